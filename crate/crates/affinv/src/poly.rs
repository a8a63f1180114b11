//! Sparse multivariate polynomials over Q.
//!
//! Variables are opaque `u32` identifiers; the modules that use this type
//! (jet coordinates, invariant symbols, family parameters) assign their own
//! numbering schemes. Monomials are kept sorted by variable id and the term
//! map is a `BTreeMap`, so printing and iteration are deterministic.

use num::{BigRational, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type Var = u32;

/// Sorted list of (variable, exponent) pairs with positive exponents.
pub type Monomial = Vec<(Var, u32)>;

pub(crate) fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Monomial::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct MultiPoly {
    pub terms: BTreeMap<Monomial, BigRational>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::new(), c);
        }
        MultiPoly { terms }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn from_i64(n: i64) -> Self {
        Self::constant(BigRational::from_integer(n.into()))
    }

    pub fn rat(p: i64, q: i64) -> Self {
        Self::constant(BigRational::new(p.into(), q.into()))
    }

    pub fn var(v: Var) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(v, 1)], BigRational::one());
        MultiPoly { terms }
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MultiPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_empty())
    }

    /// Constant term (coefficient of the empty monomial).
    pub fn constant_term(&self) -> BigRational {
        self.terms.get(&Monomial::new()).cloned().unwrap_or_else(BigRational::zero)
    }

    /// If the polynomial is a constant, return it.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.is_constant() {
            Some(self.constant_term())
        } else {
            None
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        MultiPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = MultiPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(mono_mul(ma, mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        MultiPoly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Formal partial derivative with respect to `v`.
    pub fn derivative(&self, v: Var) -> Self {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            if let Some(pos) = m.iter().position(|&(w, _)| w == v) {
                let e = m[pos].1;
                let mut m2 = m.clone();
                if e == 1 {
                    m2.remove(pos);
                } else {
                    m2[pos].1 = e - 1;
                }
                out.add_term(m2, c * BigRational::from_integer(e.into()));
            }
        }
        out
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().find(|&&(w, _)| w == v).map_or(0, |&(_, e)| e))
            .max()
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|&(_, e)| e).sum())
            .max()
            .unwrap_or(0)
    }

    /// Total degree counting only variables selected by `f`.
    pub fn degree_where(&self, f: impl Fn(Var) -> bool) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().filter(|&&(w, _)| f(w)).map(|&(_, e)| e).sum())
            .max()
            .unwrap_or(0)
    }

    /// Drop every term whose degree in the selected variables exceeds `max`.
    pub fn truncate_where(&self, f: impl Fn(Var) -> bool, max: u32) -> Self {
        MultiPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.iter().filter(|&&(w, _)| f(w)).map(|&(_, e)| e).sum::<u32>() <= max)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn variables(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = Vec::new();
        for m in self.terms.keys() {
            for &(v, _) in m {
                if !vs.contains(&v) {
                    vs.push(v);
                }
            }
        }
        vs.sort_unstable();
        vs
    }

    /// Coefficients of powers of `v`: result[e] is the coefficient of `v^e`.
    pub fn coeffs_in(&self, v: Var) -> Vec<MultiPoly> {
        let d = self.degree_in(v) as usize;
        let mut out = vec![MultiPoly::zero(); d + 1];
        for (m, c) in &self.terms {
            let (e, m2): (u32, Monomial) = match m.iter().position(|&(w, _)| w == v) {
                Some(pos) => {
                    let mut m2 = m.clone();
                    let e = m2.remove(pos).1;
                    (e, m2)
                }
                None => (0, m.clone()),
            };
            out[e as usize].add_term(m2, c.clone());
        }
        out
    }

    /// Substitute `v := value` (polynomial substitution).
    pub fn subst(&self, v: Var, value: &MultiPoly) -> Self {
        let coeffs = self.coeffs_in(v);
        // Horner
        let mut out = MultiPoly::zero();
        for c in coeffs.into_iter().rev() {
            out = out.mul(value).add(&c);
        }
        out
    }

    /// Evaluate with a generic coefficient map; `f(v)` supplies the value of
    /// variable `v` in the target ring.
    pub fn eval_with<K, F>(&self, from_rat: impl Fn(&BigRational) -> K, f: F) -> K
    where
        K: Clone,
        K: crate::coeff::Coeff,
        F: Fn(Var) -> K,
    {
        let mut acc = K::zero();
        for (m, c) in &self.terms {
            let mut t = from_rat(c);
            for &(v, e) in m {
                let val = f(v);
                for _ in 0..e {
                    t = t.mul(&val);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// Remove the rational content (gcd of coefficients, sign normalized so the
    /// leading term is positive). Returns the primitive part.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        use num::BigInt;
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num::Integer::gcd(&num_gcd, c.numer());
            den_lcm = num::Integer::lcm(&den_lcm, c.denom());
        }
        let content = BigRational::new(num_gcd, den_lcm);
        let lead_sign = self.terms.iter().next_back().map(|(_, c)| c.is_negative()).unwrap_or(false);
        let content = if lead_sign { -content } else { content };
        self.scale(&content.recip())
    }

    /// Exact division; returns None if `d` does not divide `self`.
    pub fn div_exact(&self, d: &MultiPoly) -> Option<MultiPoly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        // choose the lowest variable of d as the main variable
        let v = d.variables()[0];
        let dd = d.degree_in(v);
        let d_coeffs = d.coeffs_in(v);
        let lead = &d_coeffs[dd as usize];
        let mut rem = self.clone();
        let mut quo = MultiPoly::zero();
        loop {
            if rem.is_zero() {
                return Some(quo);
            }
            let rd = rem.degree_in(v);
            if rd < dd {
                return None;
            }
            let r_coeffs = rem.coeffs_in(v);
            let rl = &r_coeffs[rd as usize];
            let q = rl.div_exact(lead)?;
            let shift = MultiPoly::monomial(vec![(v, rd - dd)], BigRational::one());
            let term = if rd == dd { q.clone() } else { q.mul(&shift) };
            quo = quo.add(&term);
            rem = rem.sub(&term.mul(d));
            if !rem.is_zero() && rem.degree_in(v) >= rd && rd > 0 {
                // no progress; not divisible
                return None;
            }
        }
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c)?;
            for &(v, e) in m {
                if e == 1 {
                    write!(f, "*v{}", v)?;
                } else {
                    write!(f, "*v{}^{}", v, e)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_basics() {
        let x = MultiPoly::var(0);
        let y = MultiPoly::var(1);
        let p = x.add(&y).pow(2);
        let q = x.mul(&x).add(&x.mul(&y).scale(&BigRational::from_integer(2.into()))).add(&y.mul(&y));
        assert_eq!(p, q);
        assert_eq!(p.derivative(0), x.add(&y).scale(&BigRational::from_integer(2.into())));
    }

    #[test]
    fn exact_division() {
        let x = MultiPoly::var(0);
        let y = MultiPoly::var(1);
        let a = x.add(&y);
        let b = x.sub(&y);
        let p = a.mul(&b);
        assert_eq!(p.div_exact(&a).unwrap(), b);
        assert!(p.div_exact(&x.add(&MultiPoly::one())).is_none());
    }

    #[test]
    fn substitution() {
        let x = MultiPoly::var(0);
        let y = MultiPoly::var(1);
        let p = x.mul(&x).add(&y);
        let s = p.subst(0, &y.add(&MultiPoly::one()));
        let expect = y.add(&MultiPoly::one()).pow(2).add(&y);
        assert_eq!(s, expect);
    }
}
