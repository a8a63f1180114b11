//! Arbitrary-precision binary floating point and complex arithmetic.
//!
//! Used by the approximate scalar mode and for numeric embeddings of exact
//! field elements (sign choices, reconstruction seeds). Values are
//! `mant * 2^exp` with a `BigInt` mantissa kept at [`PREC`] bits.

use num::bigint::{BigInt, Sign};
use num::{BigRational, Signed, Zero};

/// Working mantissa precision in bits.
pub const PREC: u64 = 256;
/// Zero threshold exponent: |v| < 2^ZERO_EXP counts as zero.
pub const ZERO_EXP: i64 = -200;

#[derive(Clone, Debug)]
pub struct Apf {
    pub mant: BigInt,
    pub exp: i64,
}

impl Apf {
    pub fn zero() -> Self {
        Apf { mant: BigInt::zero(), exp: 0 }
    }

    pub fn from_bigint(m: BigInt) -> Self {
        Apf { mant: m, exp: 0 }.normed()
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_bigint(BigInt::from(n))
    }

    fn normed(mut self) -> Self {
        if self.mant.is_zero() {
            self.exp = 0;
            return self;
        }
        let bits = self.mant.bits();
        if bits > PREC {
            let shift = bits - PREC;
            self.mant >>= shift;
            self.exp += shift as i64;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero() || self.mag_exp() < ZERO_EXP
    }

    /// Exponent e with 2^(e-1) <= |v| < 2^e (for nonzero v).
    pub fn mag_exp(&self) -> i64 {
        if self.mant.is_zero() {
            i64::MIN
        } else {
            self.exp + self.mant.bits() as i64
        }
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn add(&self, o: &Apf) -> Apf {
        if self.mant.is_zero() {
            return o.clone();
        }
        if o.mant.is_zero() {
            return self.clone();
        }
        let (a, b) = if self.exp <= o.exp { (self, o) } else { (o, self) };
        let shift = (b.exp - a.exp) as u64;
        if shift > PREC + 64 {
            // the smaller operand is below the rounding horizon
            let (lo, hi) = (a.mag_exp(), b.mag_exp());
            if hi - lo > (PREC as i64) + 8 {
                return b.clone();
            }
        }
        let bm = &b.mant << shift;
        Apf { mant: &a.mant + bm, exp: a.exp }.normed()
    }

    pub fn neg(&self) -> Apf {
        Apf { mant: -&self.mant, exp: self.exp }
    }

    pub fn sub(&self, o: &Apf) -> Apf {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Apf) -> Apf {
        Apf { mant: &self.mant * &o.mant, exp: self.exp + o.exp }.normed()
    }

    pub fn div(&self, o: &Apf) -> Apf {
        if self.mant.is_zero() {
            return Apf::zero();
        }
        assert!(!o.mant.is_zero(), "Apf division by zero");
        let scale = PREC + 32 + o.mant.bits();
        let num = &self.mant << scale;
        Apf { mant: num / &o.mant, exp: self.exp - o.exp - scale as i64 }.normed()
    }

    pub fn from_rational(r: &BigRational) -> Apf {
        let n = Apf::from_bigint(r.numer().clone());
        let d = Apf::from_bigint(r.denom().clone());
        n.div(&d)
    }

    pub fn from_f64(x: f64) -> Apf {
        if x == 0.0 {
            return Apf::zero();
        }
        let (m, e, s) = {
            let bits = x.to_bits();
            let sign = if bits >> 63 == 1 { Sign::Minus } else { Sign::Plus };
            let exp = ((bits >> 52) & 0x7ff) as i64;
            let frac = bits & ((1u64 << 52) - 1);
            if exp == 0 {
                (frac, -1074i64, sign)
            } else {
                (frac | (1u64 << 52), exp - 1075, sign)
            }
        };
        Apf { mant: BigInt::from_biguint(s, m.into()), exp: e }.normed()
    }

    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let (m, e) = if bits > 53 {
            let shift = bits - 53;
            ((&self.mant >> shift).clone(), self.exp + shift as i64)
        } else {
            (self.mant.clone(), self.exp)
        };
        let mf: f64 = {
            let (s, digits) = m.to_u64_digits();
            let v = digits.first().copied().unwrap_or(0) as f64;
            if s == Sign::Minus {
                -v
            } else {
                v
            }
        };
        if e > 1000 {
            return if mf > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        if e < -1060 {
            return 0.0;
        }
        mf * 2f64.powi(e as i32)
    }

    pub fn abs(&self) -> Apf {
        Apf { mant: self.mant.abs(), exp: self.exp }
    }

    pub fn cmp_abs(&self, o: &Apf) -> std::cmp::Ordering {
        self.abs().sub(&o.abs()).mant.sign().cmp(&Sign::NoSign)
    }

    /// Square root of a nonnegative value by Newton iteration from an f64 seed.
    pub fn sqrt(&self) -> Apf {
        if self.is_zero() {
            return Apf::zero();
        }
        assert!(!self.mant.is_negative(), "Apf sqrt of negative value");
        // write v = w * 2^(2q) with w in f64 range
        let me = self.mag_exp();
        let q = me.div_euclid(2);
        let w = Apf { mant: self.mant.clone(), exp: self.exp - 2 * q };
        let mut x = Apf::from_f64(w.to_f64().sqrt());
        let half = Apf { mant: BigInt::from(1), exp: -1 };
        for _ in 0..6 {
            x = x.add(&w.div(&x)).mul(&half);
        }
        x.exp += q;
        x.normed()
    }
}

/// Complex number over [`Apf`].
#[derive(Clone, Debug)]
pub struct CApf {
    pub re: Apf,
    pub im: Apf,
}

impl CApf {
    pub fn zero() -> Self {
        CApf { re: Apf::zero(), im: Apf::zero() }
    }

    pub fn one() -> Self {
        CApf { re: Apf::from_i64(1), im: Apf::zero() }
    }

    pub fn real(r: Apf) -> Self {
        CApf { re: r, im: Apf::zero() }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        CApf::real(Apf::from_rational(r))
    }

    pub fn is_zero(&self) -> bool {
        self.norm_sq().is_zero()
    }

    pub fn norm_sq(&self) -> Apf {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn abs(&self) -> Apf {
        self.norm_sq().sqrt()
    }

    pub fn add(&self, o: &CApf) -> CApf {
        CApf { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &CApf) -> CApf {
        CApf { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn neg(&self) -> CApf {
        CApf { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &CApf) -> CApf {
        CApf {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn div(&self, o: &CApf) -> CApf {
        let n = o.norm_sq();
        assert!(!n.mant.is_zero(), "CApf division by zero");
        let conj = CApf { re: o.re.clone(), im: o.im.neg() };
        let p = self.mul(&conj);
        CApf { re: p.re.div(&n), im: p.im.div(&n) }
    }

    /// Principal square root: Re > 0, or Im >= 0 when Re = 0.
    pub fn sqrt(&self) -> CApf {
        if self.is_zero() {
            return CApf::zero();
        }
        let r = self.abs();
        let half = Apf { mant: BigInt::from(1), exp: -1 };
        if self.im.is_zero() && self.re.is_negative() {
            return CApf { re: Apf::zero(), im: self.re.neg().sqrt() };
        }
        let re = r.add(&self.re).mul(&half).sqrt();
        let mut im = r.sub(&self.re).mul(&half).sqrt();
        if self.im.is_negative() {
            im = im.neg();
        }
        let root = CApf { re, im };
        if root.re.is_negative() || (root.re.is_zero() && root.im.is_negative()) {
            root.neg()
        } else {
            root
        }
    }

    /// Cube root by Newton iteration from an f64 seed; the branch continuous
    /// with the principal real cube root on positive reals.
    pub fn cbrt(&self) -> CApf {
        if self.is_zero() {
            return CApf::zero();
        }
        let me = self.abs().mag_exp();
        let q = me.div_euclid(3);
        let scale = |a: &Apf| Apf { mant: a.mant.clone(), exp: a.exp - 3 * q };
        let w = CApf { re: scale(&self.re), im: scale(&self.im) };
        let (wr, wi) = (w.re.to_f64(), w.im.to_f64());
        let r = (wr * wr + wi * wi).sqrt().cbrt();
        let th = wi.atan2(wr) / 3.0;
        let mut x = CApf { re: Apf::from_f64(r * th.cos()), im: Apf::from_f64(r * th.sin()) };
        let two = CApf::real(Apf::from_i64(2));
        let three = CApf::real(Apf::from_i64(3));
        for _ in 0..6 {
            let x2 = x.mul(&x);
            x = two.mul(&x).add(&w.div(&x2)).div(&three);
        }
        let unscale = |a: &Apf| Apf { mant: a.mant.clone(), exp: a.exp + q };
        CApf { re: unscale(&x.re), im: unscale(&x.im) }
    }

    /// exp, sin, cos, tan by Maclaurin series; intended for arguments of
    /// moderate size (|z| < 2).
    pub fn exp(&self) -> CApf {
        self.maclaurin(|_| Some(1))
    }

    pub fn sin(&self) -> CApf {
        self.maclaurin(|n| match n % 4 {
            1 => Some(1),
            3 => Some(-1),
            _ => None,
        })
    }

    pub fn cos(&self) -> CApf {
        self.maclaurin(|n| match n % 4 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        })
    }

    pub fn tan(&self) -> CApf {
        self.sin().div(&self.cos())
    }

    /// sum of sign(n) * z^n / n! over n with sign(n) != None.
    fn maclaurin(&self, sign: impl Fn(u32) -> Option<i32>) -> CApf {
        let mut term = CApf::one();
        let mut acc = CApf::zero();
        for n in 0u32..500 {
            if n > 0 {
                term = term.mul(self).div(&CApf::real(Apf::from_i64(n as i64)));
                if term.abs().mag_exp() < ZERO_EXP - 60 {
                    if let Some(s) = sign(n) {
                        let t = if s < 0 { term.neg() } else { term.clone() };
                        acc = acc.add(&t);
                    }
                    break;
                }
            }
            if let Some(s) = sign(n) {
                let t = if s < 0 { term.neg() } else { term.clone() };
                acc = acc.add(&t);
            }
        }
        acc
    }
}

impl crate::coeff::Coeff for CApf {
    fn zero() -> Self {
        CApf::zero()
    }
    fn one() -> Self {
        CApf::one()
    }
    fn add(&self, o: &Self) -> Self {
        CApf::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        CApf::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        CApf::mul(self, o)
    }
    fn neg(&self) -> Self {
        CApf::neg(self)
    }
    fn div(&self, o: &Self) -> crate::error::Result<Self> {
        if o.is_zero() {
            return Err(crate::error::Error::DivisionByZero);
        }
        Ok(CApf::div(self, o))
    }
    fn is_zero(&self) -> bool {
        CApf::is_zero(self)
    }
    fn from_rational(r: &BigRational) -> Self {
        CApf::from_rational(r)
    }
    fn sqrt(&self) -> crate::error::Result<Self> {
        Ok(CApf::sqrt(self))
    }
}

impl PartialEq for CApf {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl std::fmt::Display for Apf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

impl std::fmt::Display for CApf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}+{} i@{}", self.re, self.im, PREC)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apf_close(a: &Apf, b: &Apf) -> bool {
        a.sub(b).is_zero()
    }

    #[test]
    fn basic_arith() {
        let a = Apf::from_rational(&BigRational::new(1.into(), 3.into()));
        let three = Apf::from_i64(3);
        assert!(apf_close(&a.mul(&three), &Apf::from_i64(1)));
    }

    #[test]
    fn sqrt_newton() {
        let two = Apf::from_i64(2);
        let r = two.sqrt();
        assert!(apf_close(&r.mul(&r), &two));
    }

    #[test]
    fn complex_sqrt_principal() {
        let z = CApf { re: Apf::from_i64(-3), im: Apf::zero() };
        let r = z.sqrt();
        assert!(r.re.is_zero());
        assert!(!r.im.is_negative());
        assert!(r.mul(&r).sub(&z).is_zero());
    }

    #[test]
    fn cbrt_newton() {
        let z = CApf { re: Apf::from_i64(8), im: Apf::zero() };
        let r = z.cbrt();
        assert!(r.sub(&CApf::real(Apf::from_i64(2))).is_zero());
        let w = CApf { re: Apf::from_i64(2), im: Apf::from_i64(5) };
        let c = w.cbrt();
        assert!(c.mul(&c).mul(&c).sub(&w).is_zero());
    }

    #[test]
    fn transcendental() {
        let x = CApf::from_rational(&BigRational::new(1.into(), 10.into()));
        let s = x.sin();
        let c = x.cos();
        let one = CApf::one();
        assert!(s.mul(&s).add(&c.mul(&c)).sub(&one).is_zero());
        let t = x.tan();
        assert!(t.sub(&s.div(&c)).is_zero());
        assert!((x.exp().re.to_f64() - 0.1f64.exp()).abs() < 1e-15);
    }
}
