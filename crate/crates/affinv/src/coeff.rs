//! Coefficient ring abstraction.
//!
//! The series, regraphing, and jet machinery are generic over the coefficient
//! ring: exact scalars, approximate complex numbers, truncated epsilon rings,
//! and dual numbers all implement [`Coeff`].

use crate::error::Result;
use num::BigRational;

pub trait Coeff: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Exact division; errors on zero or non-invertible divisors.
    fn div(&self, o: &Self) -> Result<Self>;
    fn is_zero(&self) -> bool;
    fn from_rational(r: &BigRational) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(n.into()))
    }

    fn rat(p: i64, q: i64) -> Self {
        Self::from_rational(&BigRational::new(p.into(), q.into()))
    }

    /// A square root in the ring, when the ring supports one.
    fn sqrt(&self) -> Result<Self> {
        Err(crate::error::Error::NoSquareRoot)
    }

    /// A cube root in the ring, when the ring supports one.
    fn cbrt(&self) -> Result<Self> {
        Err(crate::error::Error::NoExactCubeRoot)
    }
}

/// Dual numbers K[t]/(t^2), used to push a first-order displacement
/// parameter through the pipeline.
#[derive(Clone, PartialEq, Debug)]
pub struct Dual<K: Coeff> {
    pub re: K,
    pub inf: K,
}

impl<K: Coeff> Dual<K> {
    pub fn constant(re: K) -> Self {
        Dual { re, inf: K::zero() }
    }

    pub fn variable(re: K) -> Self {
        Dual { re, inf: K::one() }
    }
}

impl<K: Coeff> Coeff for Dual<K> {
    fn zero() -> Self {
        Dual { re: K::zero(), inf: K::zero() }
    }
    fn one() -> Self {
        Dual { re: K::one(), inf: K::zero() }
    }
    fn add(&self, o: &Self) -> Self {
        Dual { re: self.re.add(&o.re), inf: self.inf.add(&o.inf) }
    }
    fn sub(&self, o: &Self) -> Self {
        Dual { re: self.re.sub(&o.re), inf: self.inf.sub(&o.inf) }
    }
    fn mul(&self, o: &Self) -> Self {
        Dual {
            re: self.re.mul(&o.re),
            inf: self.re.mul(&o.inf).add(&self.inf.mul(&o.re)),
        }
    }
    fn neg(&self) -> Self {
        Dual { re: self.re.neg(), inf: self.inf.neg() }
    }
    fn div(&self, o: &Self) -> Result<Self> {
        let re = self.re.div(&o.re)?;
        // (a+bt)/(c+dt) = a/c + (b - (a/c)d)/c t
        let inf = self.inf.sub(&re.mul(&o.inf)).div(&o.re)?;
        Ok(Dual { re, inf })
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.inf.is_zero()
    }
    fn from_rational(r: &BigRational) -> Self {
        Dual { re: K::from_rational(r), inf: K::zero() }
    }
    fn sqrt(&self) -> Result<Self> {
        let r = self.re.sqrt()?;
        let two_r = r.add(&r);
        let inf = self.inf.div(&two_r)?;
        Ok(Dual { re: r, inf })
    }
    fn cbrt(&self) -> Result<Self> {
        let r = self.re.cbrt()?;
        let r2 = r.mul(&r);
        let three_r2 = r2.add(&r2).add(&r2);
        let inf = self.inf.div(&three_r2)?;
        Ok(Dual { re: r, inf })
    }
}
