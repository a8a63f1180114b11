//! Truncated bivariate power series to a fixed total order, generic over the
//! coefficient ring, with the factorial coefficient accessors F_{j,k}.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::scalar::{parse_scalar, Scalar};
use num::BigRational;
use serde::{Deserialize, Serialize};

pub const DEFAULT_ORDER: usize = 8;

/// F(x,y) = sum of c_{j,k} x^j y^k over j+k <= order; the paper-style
/// coefficient F_{j,k} is c_{j,k} * j! * k!.
#[derive(Clone, PartialEq, Debug)]
pub struct Series2<K: Coeff> {
    pub order: usize,
    c: Vec<K>,
}

fn factorial(n: usize) -> BigRational {
    let mut f = num::BigInt::from(1);
    for i in 2..=n {
        f *= i;
    }
    BigRational::from_integer(f)
}

impl<K: Coeff> Series2<K> {
    pub fn zero(order: usize) -> Self {
        Series2 { order, c: vec![K::zero(); (order + 1) * (order + 1)] }
    }

    pub fn constant(order: usize, v: K) -> Self {
        let mut s = Self::zero(order);
        s.set(0, 0, v);
        s
    }

    pub fn var_x(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.set(1, 0, K::one());
        s
    }

    pub fn var_y(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.set(0, 1, K::one());
        s
    }

    #[inline]
    fn idx(&self, j: usize, k: usize) -> usize {
        j * (self.order + 1) + k
    }

    pub fn get(&self, j: usize, k: usize) -> K {
        if j + k > self.order {
            K::zero()
        } else {
            self.c[self.idx(j, k)].clone()
        }
    }

    pub fn set(&mut self, j: usize, k: usize, v: K) {
        assert!(j + k <= self.order, "bidegree beyond order");
        let i = self.idx(j, k);
        self.c[i] = v;
    }

    /// Paper-convention coefficient F_{j,k} = c_{j,k} j! k!.
    pub fn fjk(&self, j: usize, k: usize) -> K {
        let f = factorial(j) * factorial(k);
        self.get(j, k).mul(&K::from_rational(&f))
    }

    pub fn set_fjk(&mut self, j: usize, k: usize, v: K) {
        let f = factorial(j) * factorial(k);
        self.set(j, k, v.mul(&K::from_rational(&f.recip())));
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|v| v.is_zero())
    }

    pub fn iter_degrees(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.order;
        (0..=n).flat_map(move |j| (0..=(n - j)).map(move |k| (j, k)))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.order != o.order {
            return Err(Error::OrderMismatch(self.order, o.order));
        }
        let mut out = self.clone();
        for (i, v) in out.c.iter_mut().enumerate() {
            *v = v.add(&o.c[i]);
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Series2 { order: self.order, c: self.c.iter().map(|v| v.neg()).collect() }
    }

    pub fn scale(&self, s: &K) -> Self {
        Series2 { order: self.order, c: self.c.iter().map(|v| v.mul(s)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.order != o.order {
            return Err(Error::OrderMismatch(self.order, o.order));
        }
        let n = self.order;
        let mut out = Self::zero(n);
        for (j1, k1) in self.iter_degrees() {
            let a = self.get(j1, k1);
            if a.is_zero() {
                continue;
            }
            for (j2, k2) in o.iter_degrees() {
                if j1 + j2 + k1 + k2 > n {
                    continue;
                }
                let b = o.get(j2, k2);
                if b.is_zero() {
                    continue;
                }
                let i = out.idx(j1 + j2, k1 + k2);
                out.c[i] = out.c[i].add(&a.mul(&b));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: usize) -> Result<Self> {
        let mut out = Self::constant(self.order, K::one());
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// F(X(x,y), Y(x,y)); X and Y must have zero constant term.
    pub fn substitute(&self, xs: &Self, ys: &Self) -> Result<Self> {
        if !xs.get(0, 0).is_zero() || !ys.get(0, 0).is_zero() {
            return Err(Error::ConstantTermNonzero);
        }
        let n = self.order;
        // powers of X and Y up to order n
        let mut xp = Vec::with_capacity(n + 1);
        let mut yp = Vec::with_capacity(n + 1);
        xp.push(Self::constant(n, K::one()));
        yp.push(Self::constant(n, K::one()));
        for i in 1..=n {
            xp.push(xp[i - 1].mul(xs)?);
            yp.push(yp[i - 1].mul(ys)?);
        }
        let mut out = Self::zero(n);
        for (j, k) in self.iter_degrees() {
            let c = self.get(j, k);
            if c.is_zero() {
                continue;
            }
            let term = xp[j].mul(&yp[k])?.scale(&c);
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Formal partial derivative; the result order drops by one.
    pub fn partial_x(&self) -> Self {
        let mut out = Self::zero(self.order.saturating_sub(1));
        for (j, k) in out.clone().iter_degrees() {
            let c = self.get(j + 1, k);
            out.set(j, k, c.mul(&K::from_i64((j + 1) as i64)));
        }
        out
    }

    pub fn partial_y(&self) -> Self {
        let mut out = Self::zero(self.order.saturating_sub(1));
        for (j, k) in out.clone().iter_degrees() {
            let c = self.get(j, k + 1);
            out.set(j, k, c.mul(&K::from_i64((k + 1) as i64)));
        }
        out
    }

    /// G(x,y) = F(x+x0, y+y0) - F(x0,y0). Exact through the stored
    /// coefficients; the truncation tail of F is lost as documented.
    pub fn taylor_shift(&self, x0: &K, y0: &K) -> Self {
        let n = self.order;
        let mut binom = vec![vec![BigRational::from_integer(0.into()); n + 1]; n + 1];
        for (i, row) in binom.iter_mut().enumerate() {
            row[0] = BigRational::from_integer(1.into());
            for l in 1..=i {
                row[l] = factorial(i) / (factorial(l) * factorial(i - l));
            }
        }
        // powers of the shifts
        let mut xp = vec![K::one()];
        let mut yp = vec![K::one()];
        for i in 1..=n {
            xp.push(xp[i - 1].mul(x0));
            yp.push(yp[i - 1].mul(y0));
        }
        let mut out = Self::zero(n);
        for (a, b) in self.iter_degrees() {
            if a == 0 && b == 0 {
                continue;
            }
            let mut acc = K::zero();
            for j in a..=n {
                for k in b..=(n - j) {
                    let c = self.get(j, k);
                    if c.is_zero() {
                        continue;
                    }
                    let w = K::from_rational(&(binom[j][a].clone() * binom[k][b].clone()));
                    acc = acc.add(&c.mul(&w).mul(&xp[j - a]).mul(&yp[k - b]));
                }
            }
            out.set(a, b, acc);
        }
        out
    }

    /// Transpose coefficients: (j,k) -> (k,j).
    pub fn swap_xy(&self) -> Self {
        let mut out = Self::zero(self.order);
        for (j, k) in self.iter_degrees() {
            out.set(k, j, self.get(j, k));
        }
        out
    }

    /// Truncate (or zero-extend) to a new order.
    pub fn to_order(&self, order: usize) -> Self {
        let mut out = Self::zero(order);
        for (j, k) in out.clone().iter_degrees() {
            out.set(j, k, self.get(j, k));
        }
        out
    }

    /// Map coefficients into another ring.
    pub fn map<L: Coeff>(&self, f: impl Fn(&K) -> L) -> Series2<L> {
        let mut out = Series2::zero(self.order);
        for (j, k) in self.iter_degrees() {
            out.set(j, k, f(&self.get(j, k)));
        }
        out
    }

    /// Evaluate at a point of the coefficient ring.
    pub fn eval(&self, x: &K, y: &K) -> K {
        let n = self.order;
        let mut xp = vec![K::one()];
        let mut yp = vec![K::one()];
        for i in 1..=n {
            xp.push(xp[i - 1].mul(x));
            yp.push(yp[i - 1].mul(y));
        }
        let mut acc = K::zero();
        for (j, k) in self.iter_degrees() {
            let c = self.get(j, k);
            if !c.is_zero() {
                acc = acc.add(&c.mul(&xp[j]).mul(&yp[k]));
            }
        }
        acc
    }
}

fn half_binomial(m: usize) -> BigRational {
    // (1/2 choose m)
    let mut c = BigRational::from_integer(1.into());
    let half = BigRational::new(1.into(), 2.into());
    for i in 0..m {
        let factor = (half.clone() - BigRational::from_integer(i.into()))
            / BigRational::from_integer(((i + 1) as i64).into());
        c *= factor;
    }
    c
}

impl<K: Coeff> Series2<K> {
    fn harmonize(&self, o: &Self) -> (Self, Self) {
        if self.order == o.order {
            (self.clone(), o.clone())
        } else if self.order < o.order {
            (self.to_order(o.order), o.clone())
        } else {
            (self.clone(), o.to_order(self.order))
        }
    }

    /// Multiplicative inverse; requires an invertible constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.get(0, 0);
        let c0i = K::one().div(&c0)?;
        let n = self.order;
        // u = 1 - F/c0 has positive valuation; 1/F = (1/c0) sum u^m
        let u = Self::constant(n, K::one()).sub(&self.scale(&c0i))?;
        let mut acc = Self::constant(n, K::one());
        let mut up = Self::constant(n, K::one());
        for _ in 1..=n {
            up = up.mul(&u)?;
            acc = acc.add(&up)?;
        }
        Ok(acc.scale(&c0i))
    }

    /// Square root with an invertible constant term (principal branch of the
    /// constant via the coefficient ring's own sqrt).
    pub fn sqrt_series(&self) -> Result<Self> {
        let c0 = self.get(0, 0);
        if c0.is_zero() {
            return Err(Error::NoSquareRoot);
        }
        let r0 = c0.sqrt()?;
        let n = self.order;
        let c0i = K::one().div(&c0)?;
        let w = self.scale(&c0i).sub(&Self::constant(n, K::one()))?;
        let mut acc = Self::constant(n, K::one());
        let mut wp = Self::constant(n, K::one());
        for m in 1..=n {
            wp = wp.mul(&w)?;
            let b = K::from_rational(&half_binomial(m));
            acc = acc.add(&wp.scale(&b))?;
        }
        Ok(acc.scale(&r0))
    }
}

/// Truncated series form a commutative ring; this lets the whole
/// normalization pipeline run with series-valued coefficients, producing
/// invariants as functions of a displaced basepoint. Ring constants are
/// created at order 0 (they are exact), and binary operations zero-extend
/// the lower-order operand; genuinely truncated operands are expected to
/// share one uniform order.
impl<K: Coeff> Coeff for Series2<K> {
    fn zero() -> Self {
        Series2::zero(0)
    }
    fn one() -> Self {
        Series2::constant(0, K::one())
    }
    fn add(&self, o: &Self) -> Self {
        let (a, b) = self.harmonize(o);
        a.add(&b).expect("harmonized orders")
    }
    fn sub(&self, o: &Self) -> Self {
        let (a, b) = self.harmonize(o);
        a.sub(&b).expect("harmonized orders")
    }
    fn mul(&self, o: &Self) -> Self {
        let (a, b) = self.harmonize(o);
        a.mul(&b).expect("harmonized orders")
    }
    fn neg(&self) -> Self {
        Series2::neg(self)
    }
    fn div(&self, o: &Self) -> Result<Self> {
        let (a, b) = self.harmonize(o);
        Ok(a.mul(&b.inverse()?).expect("harmonized orders"))
    }
    fn is_zero(&self) -> bool {
        Series2::is_zero(self)
    }
    fn from_rational(r: &BigRational) -> Self {
        Series2::constant(0, K::from_rational(r))
    }
    fn sqrt(&self) -> Result<Self> {
        self.sqrt_series()
    }
}

/// A surface u = F(x,y) with its original basepoint in C^3. When the
/// surface comes from a closed-form expression, the expression is kept so
/// the series can be re-expanded exactly at a displaced basepoint.
#[derive(Clone, Debug)]
pub struct SurfaceGraph {
    pub series: Series2<Scalar>,
    pub basepoint: (Scalar, Scalar, Scalar),
    pub expr: Option<crate::expr::ExprAst>,
}

impl SurfaceGraph {
    pub fn at_origin(series: Series2<Scalar>) -> Self {
        SurfaceGraph {
            series,
            basepoint: (Scalar::zero(), Scalar::zero(), Scalar::zero()),
            expr: None,
        }
    }

    /// Parse and expand a closed-form expression at the origin.
    pub fn from_expr(text: &str, order: usize) -> crate::error::Result<Self> {
        let ast = crate::expr::parse(text)?;
        let series = crate::expr::expand(&ast, order)?;
        Ok(SurfaceGraph {
            series,
            basepoint: (Scalar::zero(), Scalar::zero(), Scalar::zero()),
            expr: Some(ast),
        })
    }
}

/// On-disk coefficient-list format.
#[derive(Serialize, Deserialize)]
pub struct SeriesFile {
    pub order: usize,
    pub convention: String,
    pub coeffs: Vec<(usize, usize, String)>,
}

pub fn series_to_file(s: &Series2<Scalar>, convention: &str) -> SeriesFile {
    let mut coeffs = Vec::new();
    for (j, k) in s.iter_degrees() {
        let v = match convention {
            "factorial" => s.fjk(j, k),
            _ => s.get(j, k),
        };
        if !v.is_zero() {
            coeffs.push((j, k, v.encode()));
        }
    }
    SeriesFile { order: s.order, convention: convention.to_string(), coeffs }
}

pub fn series_from_file(f: &SeriesFile) -> Result<Series2<Scalar>> {
    let mut s = Series2::zero(f.order);
    for (j, k, text) in &f.coeffs {
        let v = parse_scalar(text)?;
        if *j + *k > f.order {
            continue;
        }
        if f.convention == "factorial" {
            s.set_fjk(*j, *k, v);
        } else {
            s.set(*j, *k, v);
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy(n: usize) -> Series2<Scalar> {
        Series2::var_x(n).mul(&Series2::var_y(n)).unwrap()
    }

    #[test]
    fn ring_and_truncation() {
        let n = 5;
        let p = xy(n);
        let sq = p.mul(&p).unwrap();
        assert_eq!(sq.get(2, 2), Scalar::one());
        let x3 = Series2::<Scalar>::var_x(n).pow(3).unwrap();
        assert!(x3.mul(&x3).unwrap().is_zero());
        let s = Series2::<Scalar>::var_x(n).add(&Series2::var_y(n)).unwrap();
        let s2 = s.mul(&s).unwrap();
        assert_eq!(s2.get(1, 1), Scalar::from_int(2));
    }

    #[test]
    fn substitution_examples() {
        let n = 4;
        let f = xy(n);
        let s = Series2::<Scalar>::var_x(n).add(&Series2::var_y(n)).unwrap();
        let t = Series2::<Scalar>::var_x(n).sub(&Series2::var_y(n)).unwrap();
        let g = f.substitute(&s, &t).unwrap();
        assert_eq!(g.get(2, 0), Scalar::one());
        assert_eq!(g.get(0, 2), Scalar::from_int(-1));
        assert_eq!(g.get(1, 1), Scalar::zero());

        // x^2 with x -> x + y^2
        let f2 = Series2::<Scalar>::var_x(n).pow(2).unwrap();
        let xs = Series2::<Scalar>::var_x(n).add(&Series2::var_y(n).pow(2).unwrap()).unwrap();
        let g2 = f2.substitute(&xs, &Series2::var_y(n)).unwrap();
        assert_eq!(g2.get(2, 0), Scalar::one());
        assert_eq!(g2.get(1, 2), Scalar::from_int(2));
        assert_eq!(g2.get(0, 4), Scalar::one());
    }

    #[test]
    fn factorial_accessors() {
        let mut s = Series2::<Scalar>::zero(6);
        s.set_fjk(3, 0, Scalar::one()); // x^3/6
        assert_eq!(s.get(3, 0), Scalar::from_ratio(1, 6));
        assert_eq!(s.fjk(3, 0), Scalar::one());
        let dxy = s.partial_x();
        assert_eq!(dxy.get(2, 0), Scalar::from_ratio(1, 2));
    }

    #[test]
    fn shift_examples() {
        let n = 4;
        let f = xy(n);
        let g = f.taylor_shift(&Scalar::one(), &Scalar::zero());
        assert_eq!(g.get(0, 1), Scalar::one());
        assert_eq!(g.get(1, 1), Scalar::one());
        assert_eq!(g.get(0, 0), Scalar::zero());

        let mut h = Series2::<Scalar>::zero(n);
        h.set_fjk(3, 0, Scalar::one());
        let h2 = xy(n).add(&h).unwrap();
        let t = Scalar::from_ratio(1, 7);
        let sh = h2.taylor_shift(&t, &Scalar::zero());
        assert_eq!(sh.get(2, 0), t.mul(&Scalar::from_ratio(1, 2)));
        // shift back restores (polynomial input)
        let back = sh.taylor_shift(&t.neg(), &Scalar::zero());
        assert_eq!(back, h2);
    }

    #[test]
    fn partials_commute() {
        let mut s = Series2::<Scalar>::zero(6);
        s.set(2, 3, Scalar::from_ratio(7, 3));
        s.set(4, 1, Scalar::from_int(2));
        assert_eq!(s.partial_x().partial_y(), s.partial_y().partial_x());
    }

    #[test]
    fn file_round_trip() {
        let mut s = Series2::<Scalar>::zero(5);
        s.set(1, 1, Scalar::one());
        s.set(3, 0, Scalar::from_ratio(1, 6));
        s.set(2, 1, Scalar::from_int(2).sqrt().unwrap());
        let f = series_to_file(&s, "plain");
        let back = series_from_file(&f).unwrap();
        assert_eq!(s, back);
    }
}
