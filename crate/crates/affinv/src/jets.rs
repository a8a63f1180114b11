//! Jet-space computations: rational functions of jet coordinates u_{j,k}
//! (with the adjoined Hessian radical), total derivative operators, the
//! solved relation expressing u_{0,3} on the vanishing locus of the order-3
//! relative invariant, the pipeline-derived relation for u_{4,0}, dependent
//! jet-coordinate solving near the normalization cross-section, and the
//! compatibility obstruction sequence.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::poly::{mono_mul, Monomial, MultiPoly, Var};
use crate::relinv::{final_loop_b2, prenormalize};
use crate::scalar::Scalar;
use crate::series::Series2;
use num::BigRational;
use std::collections::BTreeMap;

/// Variable id for the jet coordinate u_{j,k}; j, k < 16.
pub fn jet_var(j: usize, k: usize) -> Var {
    assert!(j < 16 && k < 16, "jet coordinate out of range");
    (j * 16 + k) as Var
}

/// Decode a jet variable id.
pub fn jet_deg(v: Var) -> (usize, usize) {
    ((v as usize) / 16, (v as usize) % 16)
}

/// Variable id for the adjoined radical sqrt(u11^2 - u20 u02).
pub const RAD_R: Var = 900;

/// The radicand u11^2 - u20 u02 (Hessian combination).
pub fn h2_poly() -> MultiPoly {
    let u11 = MultiPoly::var(jet_var(1, 1));
    let u20 = MultiPoly::var(jet_var(2, 0));
    let u02 = MultiPoly::var(jet_var(0, 2));
    u11.mul(&u11).sub(&u20.mul(&u02))
}

/// Total-derivative direction.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dir {
    X,
    Y,
}

fn next_var(v: Var, dir: Dir) -> Var {
    let (j, k) = jet_deg(v);
    match dir {
        Dir::X => jet_var(j + 1, k),
        Dir::Y => jet_var(j, k + 1),
    }
}

/// Total derivative of the radicand: D(h2) as a polynomial.
fn d_h2(dir: Dir) -> MultiPoly {
    let t = |j: usize, k: usize| MultiPoly::var(jet_var(j, k));
    match dir {
        // D_x(u11^2 - u20 u02) = 2 u11 u21 - u30 u02 - u20 u12
        Dir::X => t(1, 1)
            .mul(&t(2, 1))
            .scale(&BigRational::from_integer(2.into()))
            .sub(&t(3, 0).mul(&t(0, 2)))
            .sub(&t(2, 0).mul(&t(1, 2))),
        // D_y(u11^2 - u20 u02) = 2 u11 u12 - u21 u02 - u20 u03
        Dir::Y => t(1, 1)
            .mul(&t(1, 2))
            .scale(&BigRational::from_integer(2.into()))
            .sub(&t(2, 1).mul(&t(0, 2)))
            .sub(&t(2, 0).mul(&t(0, 3))),
    }
}

/// Replace even powers of the radical by powers of the radicand.
fn reduce_r(p: &MultiPoly) -> MultiPoly {
    let mut out = MultiPoly::zero();
    let h2 = h2_poly();
    for (m, c) in &p.terms {
        let e = m
            .iter()
            .find(|&&(v, _)| v == RAD_R)
            .map_or(0, |&(_, e)| e);
        if e < 2 {
            out.add_term(m.clone(), c.clone());
        } else {
            let mut m2: Monomial = m.iter().filter(|&&(v, _)| v != RAD_R).cloned().collect();
            if e % 2 == 1 {
                m2.push((RAD_R, 1));
                m2.sort_unstable_by_key(|&(v, _)| v);
            }
            let t = MultiPoly::monomial(m2, c.clone()).mul(&h2.pow(e / 2));
            out = out.add(&t);
        }
    }
    out
}

/// A quotient of jet polynomials; numerator and denominator are kept linear
/// in the adjoined radical (even powers are rewritten via the radicand).
#[derive(Clone, Debug)]
pub struct JetFrac {
    pub num: MultiPoly,
    pub den: MultiPoly,
}

impl JetFrac {
    pub fn from_poly(p: MultiPoly) -> Self {
        JetFrac { num: reduce_r(&p), den: MultiPoly::one() }.normalized()
    }

    pub fn var(j: usize, k: usize) -> Self {
        Self::from_poly(MultiPoly::var(jet_var(j, k)))
    }

    /// The radical itself as an element.
    pub fn radical() -> Self {
        Self::from_poly(MultiPoly::var(RAD_R))
    }

    pub fn zero() -> Self {
        JetFrac { num: MultiPoly::zero(), den: MultiPoly::one() }
    }

    pub fn one() -> Self {
        JetFrac { num: MultiPoly::one(), den: MultiPoly::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            self.den = MultiPoly::one();
            return self;
        }
        if let Some(c) = self.den.as_constant() {
            self.num = self.num.scale(&c.recip());
            self.den = MultiPoly::one();
            return self;
        }
        if let Some(q) = self.num.div_exact(&self.den) {
            return JetFrac { num: q, den: MultiPoly::one() };
        }
        self
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return JetFrac { num: self.num.add(&o.num), den: self.den.clone() }.normalized();
        }
        JetFrac {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
        .normalized()
    }

    pub fn neg(&self) -> Self {
        JetFrac { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        JetFrac {
            num: reduce_r(&self.num.mul(&o.num)),
            den: self.den.mul(&o.den),
        }
        .normalized()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        JetFrac { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.num.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(JetFrac { num: self.den.clone(), den: self.num.clone() }.normalized())
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    /// Equality in the quotient field.
    pub fn equal(&self, o: &Self) -> bool {
        reduce_r(&self.num.mul(&o.den))
            .sub(&reduce_r(&o.num.mul(&self.den)))
            .is_zero()
    }

    /// Highest total jet order of any coordinate appearing (the radical
    /// counts as order 2 through its radicand).
    pub fn max_jet_order(&self) -> usize {
        let mut m = 0;
        for p in [&self.num, &self.den] {
            for v in p.variables() {
                if v == RAD_R {
                    m = m.max(2);
                } else {
                    let (j, k) = jet_deg(v);
                    m = m.max(j + k);
                }
            }
        }
        m
    }
}

fn d_poly(p: &MultiPoly, dir: Dir) -> JetFrac {
    let mut out = MultiPoly::zero();
    for v in p.variables() {
        if v == RAD_R {
            continue;
        }
        out = out.add(&p.derivative(v).mul(&MultiPoly::var(next_var(v, dir))));
    }
    let mut frac = JetFrac::from_poly(out);
    let pr = p.derivative(RAD_R);
    if !pr.is_zero() {
        // D(r) = D(h2)/(2r) = D(h2) r / (2 h2)
        let num = reduce_r(&pr.mul(&d_h2(dir)).mul(&MultiPoly::var(RAD_R)));
        let den = h2_poly().scale(&BigRational::from_integer(2.into()));
        frac = frac.add(&JetFrac { num, den }.normalized());
    }
    frac
}

/// Total derivative: D(u_{j,k}) = u_{j+1,k} (direction x) or u_{j,k+1}
/// (direction y), extended by the chain and quotient rules, with
/// D(r) = D(h2)/(2r) for the adjoined radical.
pub fn total_derivative(f: &JetFrac, dir: Dir) -> JetFrac {
    let dn = d_poly(&f.num, dir);
    let dd = d_poly(&f.den, dir);
    let den2 = JetFrac::from_poly(f.den.mul(&f.den));
    let num_part = dn
        .mul(&JetFrac::from_poly(f.den.clone()))
        .sub(&dd.mul(&JetFrac::from_poly(f.num.clone())));
    num_part.div(&den2).expect("denominator square nonzero")
}

/// Evaluate at a numeric jet; missing coordinates default to 0. The radical
/// takes its principal value.
pub fn eval_scalar(f: &JetFrac, vals: &BTreeMap<(usize, usize), Scalar>) -> Result<Scalar> {
    let h2 = h2_poly().eval_with(Scalar::from_rational, |v| {
        let (j, k) = jet_deg(v);
        vals.get(&(j, k)).cloned().unwrap_or_else(Scalar::zero)
    });
    let r = h2.sqrt()?;
    let look = |v: Var| -> Scalar {
        if v == RAD_R {
            r.clone()
        } else {
            let (j, k) = jet_deg(v);
            vals.get(&(j, k)).cloned().unwrap_or_else(Scalar::zero)
        }
    };
    let n = f.num.eval_with(Scalar::from_rational, &look);
    let d = f.den.eval_with(Scalar::from_rational, &look);
    n.div(&d)
}

/// Evaluate on the jet of a graphed surface: u_{j,k} becomes the partial
/// derivative function of F, and the result is a series in the basepoint,
/// valid through `F.order - max jet order`.
pub fn evaluate_on_surface(f: &JetFrac, surf: &Series2<Scalar>) -> Result<Series2<Scalar>> {
    let m = f.max_jet_order();
    if surf.order < m {
        return Err(Error::OrderMismatch(surf.order, m));
    }
    let valid = surf.order - m;
    let partial = |j: usize, k: usize| -> Series2<Scalar> {
        let mut s = surf.clone();
        for _ in 0..j {
            s = s.partial_x();
        }
        for _ in 0..k {
            s = s.partial_y();
        }
        s.to_order(valid)
    };
    let h2s = h2_poly().eval_with(
        |r| Series2::constant(valid, Scalar::from_rational(r)),
        |v| {
            let (j, k) = jet_deg(v);
            partial(j, k)
        },
    );
    let rs = h2s.sqrt_series()?;
    let look = |v: Var| -> Series2<Scalar> {
        if v == RAD_R {
            rs.clone()
        } else {
            let (j, k) = jet_deg(v);
            partial(j, k)
        }
    };
    let n = f
        .num
        .eval_with(|r| Series2::constant(valid, Scalar::from_rational(r)), &look);
    let d = f
        .den
        .eval_with(|r| Series2::constant(valid, Scalar::from_rational(r)), &look);
    n.mul(&d.inverse()?)
}

/// The printed solved relation for u_{0,3} on the vanishing locus of the
/// order-3 relative invariant: braces numerator over (u11 + u20 + r)^3,
/// transcribed verbatim.
pub fn r03_printed() -> JetFrac {
    let v = |j: usize, k: usize| MultiPoly::var(jet_var(j, k));
    let r = MultiPoly::var(RAD_R);
    let term = |c: i64, fs: &[&MultiPoly]| -> MultiPoly {
        let mut t = MultiPoly::from_i64(c);
        for f in fs {
            t = t.mul(f);
        }
        t
    };
    let (u20, u11, u02) = (v(2, 0), v(1, 1), v(0, 2));
    let (u30, u21, u12) = (v(3, 0), v(2, 1), v(1, 2));
    let mut s = MultiPoly::zero();
    s = s.add(&term(6, &[&u02, &u11, &u11, &u12]));
    s = s.add(&term(-3, &[&u02, &u02, &u12, &u20]));
    s = s.add(&term(9, &[&u02, &u11, &u12, &u20]));
    s = s.add(&term(9, &[&u02, &u12, &u20, &u20]));
    s = s.add(&term(3, &[&u11, &u12, &u20, &u20]));
    s = s.add(&term(6, &[&u02, &u11, &u12, &r]));
    s = s.add(&term(9, &[&u02, &u12, &u20, &r]));
    s = s.add(&term(-3, &[&u12, &u20, &u20, &r]));
    s = s.add(&term(-3, &[&u02, &u02, &u11, &u21]));
    s = s.add(&term(-9, &[&u02, &u02, &u20, &u21]));
    s = s.add(&term(-9, &[&u02, &u11, &u20, &u21]));
    s = s.add(&term(-6, &[&u11, &u11, &u20, &u21]));
    s = s.add(&term(3, &[&u02, &u20, &u20, &u21]));
    s = s.add(&term(-3, &[&u02, &u02, &r, &u21]));
    s = s.add(&term(9, &[&u02, &u20, &r, &u21]));
    s = s.add(&term(6, &[&u11, &u20, &r, &u21]));
    s = s.add(&term(1, &[&u02, &u02, &u02, &u30]));
    s = s.add(&term(3, &[&u02, &u02, &u11, &u30]));
    s = s.add(&term(6, &[&u02, &u11, &u11, &u30]));
    s = s.add(&term(4, &[&u11, &u11, &u11, &u30]));
    s = s.add(&term(-3, &[&u02, &u02, &u20, &u30]));
    s = s.add(&term(-3, &[&u02, &u11, &u20, &u30]));
    s = s.add(&term(-3, &[&u02, &u02, &r, &u30]));
    s = s.add(&term(-6, &[&u02, &u11, &r, &u30]));
    s = s.add(&term(-4, &[&u11, &u11, &r, &u30]));
    s = s.add(&term(1, &[&u02, &u20, &r, &u30]));
    let den = u11.add(&u20).add(&r).pow(3);
    JetFrac { num: reduce_r(&s), den: reduce_r(&den) }
}

// ---------------------------------------------------------------------------
// Truncated polynomial ring around the cross-section.
// ---------------------------------------------------------------------------

/// Truncated multivariate polynomial in the cross-section deviation
/// variables v_{j,k} = u_{j,k} - (cross-section value), with exact scalar
/// coefficients, truncated at a fixed total degree. All ring operations
/// commute with truncation, so degrees <= trunc are exact.
#[derive(Clone, Debug)]
pub struct EpsElem {
    pub trunc: usize,
    pub terms: BTreeMap<Monomial, Scalar>,
}

fn mono_deg(m: &Monomial) -> usize {
    m.iter().map(|&(_, e)| e as usize).sum()
}

impl EpsElem {
    pub fn constant(c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::new(), c);
        }
        EpsElem { trunc: usize::MAX, terms }
    }

    pub fn variable(v: Var, trunc: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(v, 1)], Scalar::one());
        EpsElem { trunc, terms }
    }

    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() || mono_deg(&m) > self.trunc {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn constant_term(&self) -> Scalar {
        self.terms
            .get(&Monomial::new())
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    /// Lowest total degree of any term; `None` for the zero element.
    pub fn valuation(&self) -> Option<usize> {
        self.terms.keys().map(mono_deg).min()
    }

    /// Coefficient of a specific monomial.
    pub fn coeff_of(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Partial derivative with respect to a deviation variable.
    pub fn partial(&self, v: Var) -> Self {
        let mut out = EpsElem { trunc: self.trunc, terms: BTreeMap::new() };
        for (m, c) in &self.terms {
            if let Some(pos) = m.iter().position(|&(w, _)| w == v) {
                let e = m[pos].1;
                let mut m2 = m.clone();
                if e == 1 {
                    m2.remove(pos);
                } else {
                    m2[pos].1 = e - 1;
                }
                out.add_term(m2, c.mul(&Scalar::from_int(e as i64)));
            }
        }
        out
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

    /// Keep only the terms whose variables all satisfy the predicate.
    pub fn restrict(&self, keep: impl Fn(Var) -> bool) -> Self {
        EpsElem {
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.iter().all(|&(v, _)| keep(v)))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Coefficient polynomials of powers of one variable.
    pub fn coeffs_in(&self, v: Var) -> Vec<EpsElem> {
        let d = self
            .terms
            .keys()
            .map(|m| m.iter().find(|&&(w, _)| w == v).map_or(0, |&(_, e)| e))
            .max()
            .unwrap_or(0) as usize;
        let mut out = vec![
            EpsElem { trunc: self.trunc, terms: BTreeMap::new() };
            d + 1
        ];
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

    fn tr(&self, trunc: usize) -> Self {
        if trunc >= self.trunc {
            let mut s = self.clone();
            s.trunc = trunc.min(s.trunc);
            return s;
        }
        EpsElem {
            trunc,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| mono_deg(m) <= trunc)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }
}

impl PartialEq for EpsElem {
    fn eq(&self, other: &Self) -> bool {
        let t = self.trunc.min(other.trunc);
        self.tr(t).terms == other.tr(t).terms
    }
}

impl Coeff for EpsElem {
    fn zero() -> Self {
        EpsElem::constant(Scalar::zero())
    }
    fn one() -> Self {
        EpsElem::constant(Scalar::one())
    }
    fn add(&self, o: &Self) -> Self {
        let t = self.trunc.min(o.trunc);
        let mut out = self.tr(t);
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        let t = self.trunc.min(o.trunc);
        let mut out = EpsElem { trunc: t, terms: BTreeMap::new() };
        for (ma, ca) in &self.terms {
            if mono_deg(ma) > t {
                continue;
            }
            for (mb, cb) in &o.terms {
                if mono_deg(ma) + mono_deg(mb) > t {
                    continue;
                }
                out.add_term(mono_mul(ma, mb), ca.mul(cb));
            }
        }
        out
    }
    fn neg(&self) -> Self {
        EpsElem {
            trunc: self.trunc,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }
    fn div(&self, o: &Self) -> Result<Self> {
        let c0 = o.constant_term();
        if c0.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let t = self.trunc.min(o.trunc);
        let c0i = Scalar::one().div(&c0)?;
        // 1/o = (1/c0) sum (1 - o/c0)^m
        let u = EpsElem::one().sub(&o.scalar_mul(&c0i));
        let bound = if t == usize::MAX { 0 } else { t };
        let mut inv = EpsElem::one();
        let mut up = EpsElem::one();
        for _ in 1..=bound {
            up = up.mul(&u);
            if up.terms.is_empty() {
                break;
            }
            inv = inv.add(&up);
        }
        Ok(self.mul(&inv.scalar_mul(&c0i)).tr(t))
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn from_rational(r: &BigRational) -> Self {
        EpsElem::constant(Scalar::from_rational(r))
    }
    fn sqrt(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::NoSquareRoot);
        }
        let r0 = c0.sqrt()?;
        let c0i = Scalar::one().div(&c0)?;
        let w = self.scalar_mul(&c0i).sub(&EpsElem::one());
        let t = self.trunc;
        let bound = if t == usize::MAX { 0 } else { t };
        let mut acc = EpsElem::one();
        let mut wp = EpsElem::one();
        let mut coef = BigRational::from_integer(1.into());
        let half = BigRational::new(1.into(), 2.into());
        for m in 1..=bound {
            wp = wp.mul(&w);
            if wp.terms.is_empty() {
                break;
            }
            let f = (half.clone() - BigRational::from_integer(((m - 1) as i64).into()))
                / BigRational::from_integer((m as i64).into());
            coef *= f;
            acc = acc.add(&wp.scalar_mul(&Scalar::from_rational(&coef)));
        }
        Ok(acc.scalar_mul(&r0))
    }
}

impl EpsElem {
    pub fn scalar_mul(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return EpsElem { trunc: self.trunc, terms: BTreeMap::new() };
        }
        EpsElem {
            trunc: self.trunc,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.mul(s))).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Cross-section setup and pipeline-derived relations.
// ---------------------------------------------------------------------------

/// Cross-section value of u_{j,k}: the normalized graph xy + x^3/6 has
/// u_{1,1} = u_{3,0} = 1 and every other coordinate 0.
pub fn cross_value(j: usize, k: usize) -> i64 {
    if (j, k) == (1, 1) || (j, k) == (3, 0) {
        1
    } else {
        0
    }
}

/// u_{j,k} near the cross-section as an element of the deviation ring.
pub fn eps_u(j: usize, k: usize, trunc: usize) -> EpsElem {
    let mut e = EpsElem::variable(jet_var(j, k), trunc);
    let c = cross_value(j, k);
    if c != 0 {
        e = e.add(&EpsElem::constant(Scalar::from_int(c)));
    }
    e
}

fn generic_jet(order: usize, trunc: usize) -> Series2<EpsElem> {
    let mut f = Series2::zero(order);
    let degs: Vec<_> = f.iter_degrees().collect();
    for (j, k) in degs {
        if j + k >= 2 {
            f.set_fjk(j, k, eps_u(j, k, trunc));
        }
    }
    f
}

/// The order-3 relative invariant near the cross-section, computed by the
/// normalization pipeline on a generic jet (prenormal y^3-coefficient).
pub fn irel_03_eps(trunc: usize) -> Result<EpsElem> {
    let f = generic_jet(3, trunc);
    let pre = prenormalize(&f)?;
    Ok(pre.series.fjk(0, 3))
}

/// The order-4 relative invariant near the cross-section, computed by the
/// full pipeline (both loops, then the cubic-normalizing group element) on a
/// generic jet: the x^4-coefficient of the final form.
pub fn irel_40_eps(trunc: usize) -> Result<EpsElem> {
    let f = generic_jet(4, trunc);
    let pre = prenormalize(&f)?;
    let g = final_loop_b2(&pre.series)?;
    Ok(g.fjk(4, 0))
}

/// Solve `rel = 0` for the deviation variable `v` by fixed-point iteration;
/// the linear coefficient must be a unit and the constant part must vanish
/// at the cross-section. Returns the u-value of the solved coordinate.
pub fn solve_relation_for(rel: &EpsElem, j: usize, k: usize) -> Result<EpsElem> {
    let v = jet_var(j, k);
    let coeffs = rel.coeffs_in(v);
    if coeffs.len() < 2 || coeffs[1].constant_term().is_zero() {
        return Err(Error::InconsistentSystem(
            "relation is not solvable for the requested coordinate".into(),
        ));
    }
    if !coeffs[0].constant_term().is_zero() {
        return Err(Error::InconsistentSystem(
            "relation does not vanish at the cross-section".into(),
        ));
    }
    let p1 = &coeffs[1];
    let trunc = rel.trunc;
    let mut x = EpsElem::zero().tr(trunc);
    let bound = if trunc == usize::MAX { 1 } else { trunc + 1 };
    for _ in 0..bound {
        // x = -(P0 + sum_{e>=2} Pe x^e)/P1
        let mut rest = coeffs[0].clone();
        let mut xp = x.mul(&x);
        for pe in coeffs.iter().skip(2) {
            rest = rest.add(&pe.mul(&xp));
            xp = xp.mul(&x);
        }
        x = rest.neg().div(p1)?;
    }
    let c = cross_value(j, k);
    if c != 0 {
        x = x.add(&EpsElem::constant(Scalar::from_int(c)));
    }
    Ok(x)
}

/// Evaluate a jet fraction in the deviation ring (u-variables shifted to the
/// cross-section, principal radical).
pub fn jetfrac_to_eps(f: &JetFrac, trunc: usize) -> Result<EpsElem> {
    let h2 = h2_poly().eval_with(EpsElem::from_rational, |v| {
        let (j, k) = jet_deg(v);
        eps_u(j, k, trunc)
    });
    let r = h2.sqrt()?;
    let look = |v: Var| -> EpsElem {
        if v == RAD_R {
            r.clone()
        } else {
            let (j, k) = jet_deg(v);
            eps_u(j, k, trunc)
        }
    };
    let n = f.num.eval_with(EpsElem::from_rational, &look);
    let d = f.den.eval_with(EpsElem::from_rational, &look);
    n.div(&d)
}

// ---------------------------------------------------------------------------
// Dependent-coordinate solver and compatibility obstructions.
// ---------------------------------------------------------------------------

/// Solves dependent jet coordinates near the cross-section from the base
/// relations: u_{0,3} (always) and, in the doubly-degenerate branch,
/// u_{4,0}.
///
/// The base relation for u_{4,0} involves coordinates (u_{0,3}, u_{1,3},
/// u_{0,4}) that are themselves solved through the cubic-direction chain,
/// and vice versa, so the system is coupled. All circular couplings enter
/// with positive valuation at the cross-section, so iterated substitution
/// (Gauss-Seidel sweeps over the truncated ring) converges to the unique
/// solution in finitely many sweeps; convergence is checked, not assumed.
pub struct SubjetSolver {
    pub trunc: usize,
    pub with_40: bool,
    base03: EpsElem,
    /// Solved relation for u_{4,0} in raw coordinates (may still mention
    /// dependent coordinates).
    base40_raw: Option<EpsElem>,
    /// Canonical values of tracked dependent coordinates, expressed in the
    /// independent coordinates only. For k >= 3 the cubic-direction chain
    /// is authoritative; otherwise the quartic-direction chain.
    vals: BTreeMap<(usize, usize), EpsElem>,
    /// Quartic-direction chain values for every tracked coordinate with
    /// j >= 4 (kept separately so both chains can be confronted on
    /// doubly-determined coordinates).
    vals40: BTreeMap<(usize, usize), EpsElem>,
    /// Coordinates discovered during substitution but not yet tracked.
    pending: Vec<(usize, usize)>,
}

impl SubjetSolver {
    /// `with_40` activates the second base relation (both cubic-direction
    /// and quartic-direction relative invariants identically zero).
    pub fn new(trunc: usize, with_40: bool) -> Result<Self> {
        let base03 = jetfrac_to_eps(&r03_printed(), trunc)?;
        let base40_raw = if with_40 {
            let rel = irel_40_eps(trunc)?;
            Some(solve_relation_for(&rel, 4, 0)?)
        } else {
            None
        };
        Ok(SubjetSolver {
            trunc,
            with_40,
            base03,
            base40_raw,
            vals: BTreeMap::new(),
            vals40: BTreeMap::new(),
            pending: Vec::new(),
        })
    }

    pub fn is_dependent(&self, j: usize, k: usize) -> bool {
        k >= 3 || (self.with_40 && j >= 4)
    }

    /// Current canonical value of a coordinate (cross-section constant when
    /// the coordinate is dependent but not yet solved).
    fn getval(&mut self, j: usize, k: usize) -> EpsElem {
        if !self.is_dependent(j, k) {
            return eps_u(j, k, self.trunc);
        }
        if let Some(v) = self.vals.get(&(j, k)) {
            return v.clone();
        }
        if !self.pending.contains(&(j, k)) {
            self.pending.push((j, k));
        }
        EpsElem::constant(Scalar::from_int(cross_value(j, k))).tr(self.trunc)
    }

    /// Substitute current values for every coordinate occurring in a raw
    /// expression.
    fn substitute(&mut self, p: &EpsElem) -> EpsElem {
        let mut out = EpsElem::zero().tr(p.trunc);
        for (m, c) in &p.terms.clone() {
            let mut t = EpsElem::constant(c.clone()).tr(p.trunc);
            for &(v, e) in m {
                let (j, k) = jet_deg(v);
                // Substitution works in deviation variables: u = cross + v.
                let dev = if self.is_dependent(j, k) {
                    let u = self.getval(j, k);
                    let cr = cross_value(j, k);
                    if cr != 0 {
                        u.sub(&EpsElem::constant(Scalar::from_int(cr)))
                    } else {
                        u
                    }
                } else {
                    EpsElem::variable(v, self.trunc)
                };
                for _ in 0..e {
                    t = t.mul(&dev);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Total derivative of an expression in independent coordinates,
    /// substituting current values for the requested neighbors.
    fn d_total_cur(&mut self, p: &EpsElem, dir: Dir) -> EpsElem {
        let mut out = EpsElem::zero().tr(p.trunc);
        for v in p.variables() {
            let (a, b) = jet_deg(v);
            let (a2, b2) = match dir {
                Dir::X => (a + 1, b),
                Dir::Y => (a, b + 1),
            };
            let val = self.getval(a2, b2);
            out = out.add(&p.partial(v).mul(&val));
        }
        out
    }

    /// One chain step for the canonical value of a tracked coordinate.
    fn step_canonical(&mut self, j: usize, k: usize) -> Result<EpsElem> {
        if k >= 3 {
            Ok(if (j, k) == (0, 3) {
                self.base03.clone().tr(self.trunc)
            } else if k > 3 {
                let prev = self.getval(j, k - 1);
                self.d_total_cur(&prev, Dir::Y)
            } else {
                let prev = self.getval(j - 1, 3);
                self.d_total_cur(&prev, Dir::X)
            })
        } else {
            // j >= 4, via the quartic-direction relation
            let raw = self.base40_raw.clone().ok_or_else(|| {
                Error::UnsupportedBranch(
                    "quartic-direction base relation not active".into(),
                )
            })?;
            Ok(if (j, k) == (4, 0) {
                self.substitute(&raw)
            } else if k > 0 {
                let prev = self.getval(j, k - 1);
                self.d_total_cur(&prev, Dir::Y)
            } else {
                let prev = self.getval(j - 1, 0);
                self.d_total_cur(&prev, Dir::X)
            })
        }
    }

    /// One chain step for the quartic-direction value of a coordinate with
    /// j >= 4 (substitutions still use canonical values).
    fn step_40(&mut self, j: usize, k: usize) -> Result<EpsElem> {
        let raw = self.base40_raw.clone().ok_or_else(|| {
            Error::UnsupportedBranch("quartic-direction base relation not active".into())
        })?;
        Ok(if (j, k) == (4, 0) {
            self.substitute(&raw)
        } else if k > 0 {
            let prev = self
                .vals40
                .get(&(j, k - 1))
                .cloned()
                .unwrap_or_else(|| EpsElem::zero().tr(self.trunc));
            self.d_total_cur(&prev, Dir::Y)
        } else {
            let prev = self
                .vals40
                .get(&(j - 1, 0))
                .cloned()
                .unwrap_or_else(|| EpsElem::zero().tr(self.trunc));
            self.d_total_cur(&prev, Dir::X)
        })
    }

    fn track(&mut self, j: usize, k: usize) {
        if k >= 3 {
            // chain prerequisites
            if k > 3 {
                self.track(j, k - 1);
            } else if j > 0 {
                self.track(j - 1, 3);
            }
            self.vals
                .entry((j, k))
                .or_insert_with(|| EpsElem::constant(Scalar::from_int(cross_value(j, k))));
        } else if j >= 4 {
            if k > 0 {
                self.track(j, k - 1);
            } else if j > 4 {
                self.track(j - 1, 0);
            }
            self.vals
                .entry((j, k))
                .or_insert_with(|| EpsElem::constant(Scalar::from_int(cross_value(j, k))));
        }
    }

    fn track_40(&mut self, j: usize, k: usize) {
        assert!(j >= 4);
        if k > 0 {
            self.track_40(j, k - 1);
        } else if j > 4 {
            self.track_40(j - 1, 0);
        }
        self.vals40
            .entry((j, k))
            .or_insert_with(|| EpsElem::constant(Scalar::from_int(cross_value(j, k))));
    }

    /// Sweep the tracked coordinates until the values stop changing.
    fn converge(&mut self) -> Result<()> {
        let budget = 3 * (self.trunc.min(64) + 3);
        for _ in 0..budget {
            // Adopt coordinates discovered during the previous sweep.
            let pend = std::mem::take(&mut self.pending);
            for (j, k) in pend {
                self.track(j, k);
            }
            let mut changed = false;
            // Chain order: prerequisites first.
            let coords: Vec<(usize, usize)> = {
                let mut c: Vec<_> = self.vals.keys().cloned().collect();
                c.sort_by_key(|&(j, k)| (k.min(3), if k >= 3 { k } else { 0 }, j, k));
                c
            };
            for (j, k) in coords {
                let new = self.step_canonical(j, k)?;
                if self.vals.get(&(j, k)) != Some(&new) {
                    self.vals.insert((j, k), new);
                    changed = true;
                }
            }
            let coords40: Vec<(usize, usize)> = {
                let mut c: Vec<_> = self.vals40.keys().cloned().collect();
                c.sort_by_key(|&(j, k)| (k, j));
                c
            };
            for (j, k) in coords40 {
                let new = self.step_40(j, k)?;
                if self.vals40.get(&(j, k)) != Some(&new) {
                    self.vals40.insert((j, k), new);
                    changed = true;
                }
            }
            if !changed && self.pending.is_empty() {
                return Ok(());
            }
        }
        Err(Error::InconsistentSystem(
            "dependent-coordinate substitution did not converge".into(),
        ))
    }

    /// Solved expression for a dependent coordinate in the independent
    /// coordinates (cubic-direction chain for k >= 3, quartic-direction
    /// chain otherwise).
    pub fn solve_dependent(&mut self, j: usize, k: usize) -> Result<EpsElem> {
        if !self.is_dependent(j, k) {
            return Err(Error::NotDependent(j, k));
        }
        self.track(j, k);
        self.converge()?;
        Ok(self.vals[&(j, k)].clone())
    }

    /// Cubic-direction chain value (requires k >= 3).
    pub fn chain03(&mut self, j: usize, k: usize) -> Result<EpsElem> {
        assert!(k >= 3);
        self.solve_dependent(j, k)
    }

    /// Quartic-direction chain value for j >= 4, any k; coordinates
    /// reachable from both base relations can be confronted.
    pub fn chain40(&mut self, j: usize, k: usize) -> Result<EpsElem> {
        assert!(j >= 4);
        self.track_40(j, k);
        self.converge()?;
        Ok(self.vals40[&(j, k)].clone())
    }
}

/// A doubly-determined coordinate with its two chain expressions at the
/// cross-section (expressed in the remaining free deviations).
#[derive(Clone, Debug)]
pub struct Obstruction {
    pub coord: (usize, usize),
    pub via03: EpsElem,
    pub via40: EpsElem,
    pub difference: EpsElem,
}

/// Keep only the free coordinates that remain after the cross-section
/// normalization of the doubly-degenerate branch: u22, u31, u32.
pub fn restrict_to_free(p: &EpsElem) -> EpsElem {
    p.restrict(|v| {
        let (j, k) = jet_deg(v);
        matches!((j, k), (2, 2) | (3, 1) | (3, 2))
    })
}

/// The compatibility obstruction sequence of the doubly-degenerate branch:
/// both chains solve u_{j,3} for j = 4, 5, 6; the differences force the
/// remaining free coordinates to vanish step by step.
pub fn compatibility_obstructions(trunc: usize, max_j: usize) -> Result<Vec<Obstruction>> {
    let mut solver = SubjetSolver::new(trunc, true)?;
    let mut out = Vec::new();
    for j in 4..=max_j {
        let a = restrict_to_free(&solver.chain03(j, 3)?);
        let b = restrict_to_free(&solver.chain40(j, 3)?);
        let d = a.sub(&b);
        out.push(Obstruction { coord: (j, 3), via03: a, via40: b, difference: d });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(parts: &[(usize, usize, u32)]) -> Monomial {
        let mut m: Monomial = parts
            .iter()
            .map(|&(j, k, e)| (jet_var(j, k), e))
            .collect();
        m.sort_unstable_by_key(|&(v, _)| v);
        m
    }

    #[test]
    fn total_derivative_basics() {
        // D_x(u03) = u13
        let d = total_derivative(&JetFrac::var(0, 3), Dir::X);
        assert!(d.equal(&JetFrac::var(1, 3)));
        // D_y(u22^2) = 2 u22 u23
        let sq = JetFrac::var(2, 2).mul(&JetFrac::var(2, 2));
        let d2 = total_derivative(&sq, Dir::Y);
        let expect = JetFrac::var(2, 2)
            .mul(&JetFrac::var(2, 3))
            .scale(&BigRational::from_integer(2.into()));
        assert!(d2.equal(&expect));
    }

    #[test]
    fn radical_derivative_squares_correctly() {
        // D_x(r)^2 * (2r)^2 == D_x(h2)^2 as rational functions
        let r = JetFrac::radical();
        let dr = total_derivative(&r, Dir::X);
        let two_r = r.scale(&BigRational::from_integer(2.into()));
        let lhs = dr.mul(&two_r);
        let dh = JetFrac::from_poly(d_h2(Dir::X));
        assert!(lhs.equal(&dh));
    }

    #[test]
    fn derivatives_commute() {
        let p = r03_printed();
        let xy = total_derivative(&total_derivative(&p, Dir::X), Dir::Y);
        let yx = total_derivative(&total_derivative(&p, Dir::Y), Dir::X);
        assert!(xy.equal(&yx));
    }

    #[test]
    fn printed_relation_agrees_with_pipeline() {
        // Solve the pipeline's order-3 invariant for u03 near the
        // cross-section and compare with the printed solved relation.
        let trunc = 3;
        let rel = irel_03_eps(trunc).unwrap();
        let solved = solve_relation_for(&rel, 0, 3).unwrap();
        let printed = jetfrac_to_eps(&r03_printed(), trunc).unwrap();
        assert_eq!(solved, printed);
    }

    #[test]
    fn printed_relation_cross_section_zero() {
        let printed = jetfrac_to_eps(&r03_printed(), 2).unwrap();
        assert!(printed.constant_term().is_zero());
    }

    #[test]
    fn derivative_vs_surface_evaluation() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let n = 7;
        let mut f = Series2::<Scalar>::zero(n);
        let degs: Vec<_> = f.iter_degrees().collect();
        for (j, k) in degs {
            if j + k >= 2 {
                f.set_fjk(
                    j,
                    k,
                    Scalar::from_ratio(rng.gen_range(-4..=4), 1 + rng.gen_range(0..3)),
                );
            }
        }
        f.set_fjk(1, 1, Scalar::from_int(2));
        f.set_fjk(2, 0, Scalar::one());
        f.set_fjk(0, 2, Scalar::one());
        let p = JetFrac::var(2, 1).mul(&JetFrac::var(0, 2)).add(&JetFrac::radical());
        let dp = total_derivative(&p, Dir::X);
        let lhs = evaluate_on_surface(&dp, &f).unwrap();
        let rhs = evaluate_on_surface(&p, &f).unwrap().partial_x();
        let lo = rhs.order;
        assert_eq!(lhs.to_order(lo), rhs);
    }

    #[test]
    fn solver_cross_section_values() {
        let mut solver = SubjetSolver::new(4, true).unwrap();
        // u33 = 9/2 u22^2 at the cross-section
        let u33 = restrict_to_free(&solver.solve_dependent(3, 3).unwrap());
        let mut expect = EpsElem::zero().tr(4);
        expect.add_term(mono(&[(2, 2, 2)]), Scalar::from_ratio(9, 2));
        assert_eq!(u33, expect);
        // u43 via the cubic chain = 15 u32 u22
        let u43 = restrict_to_free(&solver.chain03(4, 3).unwrap());
        let mut e43 = EpsElem::zero().tr(4);
        e43.add_term(mono(&[(2, 2, 1), (3, 2, 1)]), Scalar::from_int(15));
        assert_eq!(u43, e43);
    }

    #[test]
    fn obstruction_sequence() {
        let obs = compatibility_obstructions(4, 6).unwrap();
        // u43: 15 u32 u22 vs 12 u32 u22
        let mut e15 = EpsElem::zero().tr(4);
        e15.add_term(mono(&[(2, 2, 1), (3, 2, 1)]), Scalar::from_int(15));
        let mut e12 = EpsElem::zero().tr(4);
        e12.add_term(mono(&[(2, 2, 1), (3, 2, 1)]), Scalar::from_int(12));
        assert_eq!(obs[0].via03, e15);
        assert_eq!(obs[0].via40, e12);
        // u53 with u22 = 0: 15 u32^2 vs 12 u32^2
        let set22 = |p: &EpsElem| {
            p.restrict(|v| v != jet_var(2, 2))
        };
        let a = set22(&obs[1].via03);
        let b = set22(&obs[1].via40);
        let mut f15 = EpsElem::zero().tr(4);
        f15.add_term(mono(&[(3, 2, 2)]), Scalar::from_int(15));
        let mut f12 = EpsElem::zero().tr(4);
        f12.add_term(mono(&[(3, 2, 2)]), Scalar::from_int(12));
        let pair = (a.clone(), b.clone());
        assert!(pair == (f15.clone(), f12.clone()) || pair == (f12, f15));
        // u63 with u32 = 0: 945/4 u22^3 vs 225 u22^3
        let set32 = |p: &EpsElem| p.restrict(|v| v != jet_var(3, 2));
        let a3 = set32(&obs[2].via03);
        let b3 = set32(&obs[2].via40);
        let mut g1 = EpsElem::zero().tr(4);
        g1.add_term(mono(&[(2, 2, 3)]), Scalar::from_ratio(945, 4));
        let mut g2 = EpsElem::zero().tr(4);
        g2.add_term(mono(&[(2, 2, 3)]), Scalar::from_int(225));
        let pair3 = (a3.clone(), b3.clone());
        assert!(pair3 == (g1.clone(), g2.clone()) || pair3 == (g2, g1));
    }
}
