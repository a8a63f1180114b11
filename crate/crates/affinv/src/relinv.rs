//! Closed-form relative invariants of orders 3 and 4, and the two
//! normalization loops that bring a nondegenerate graph to the prenormal
//! form u = xy + G30 x^3/6 + G03 y^3/6 + O(4).

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::regraph::{g1_regraph, linear_regraph, precompose};
use crate::series::Series2;

/// The printed 13-monomial numerator of the Pick invariant, evaluated on the
/// order-3 jet of a graph (factorial-convention coefficients).
pub fn pick_numerator<K: Coeff>(f: &Series2<K>) -> K {
    let f20 = f.fjk(2, 0);
    let f11 = f.fjk(1, 1);
    let f02 = f.fjk(0, 2);
    let f30 = f.fjk(3, 0);
    let f21 = f.fjk(2, 1);
    let f12 = f.fjk(1, 2);
    let f03 = f.fjk(0, 3);
    let t = |c: i64, parts: &[&K]| -> K {
        let mut v = K::from_i64(c);
        for p in parts {
            v = v.mul(p);
        }
        v
    };
    let mut p = K::zero();
    p = p.add(&t(6, &[&f03, &f11, &f12, &f20, &f20]));
    p = p.add(&t(-9, &[&f02, &f12, &f12, &f20, &f20]));
    p = p.add(&t(-1, &[&f03, &f03, &f20, &f20, &f20]));
    p = p.add(&t(-12, &[&f03, &f11, &f11, &f20, &f21]));
    p = p.add(&t(18, &[&f02, &f11, &f12, &f20, &f21]));
    p = p.add(&t(6, &[&f02, &f03, &f20, &f20, &f21]));
    p = p.add(&t(-9, &[&f02, &f02, &f20, &f21, &f21]));
    p = p.add(&t(8, &[&f03, &f11, &f11, &f11, &f30]));
    p = p.add(&t(-12, &[&f02, &f11, &f11, &f12, &f30]));
    p = p.add(&t(-6, &[&f02, &f03, &f11, &f20, &f30]));
    p = p.add(&t(6, &[&f02, &f02, &f12, &f20, &f30]));
    p = p.add(&t(6, &[&f02, &f02, &f11, &f21, &f30]));
    p = p.add(&t(-1, &[&f02, &f02, &f02, &f30, &f30]));
    p
}

/// Result of the two normalization loops.
pub struct Prenorm<K: Coeff> {
    pub series: Series2<K>,
    /// Shear constant c used when F20 + 2 F11 + F02 = 0 (y -> y + c x).
    pub shear: Option<i64>,
    /// The first-loop matrix (x', y') = M (x, y), rows [a, b; c, d].
    pub lin: [K; 4],
    /// Second-loop stabilizer parameters (mu = lambda = 1).
    pub k2: K,
    pub l2: K,
}

/// Hessian determinant combination F11^2 - F20 F02 at the origin.
pub fn hessian_h2<K: Coeff>(f: &Series2<K>) -> K {
    let f20 = f.fjk(2, 0);
    let f11 = f.fjk(1, 1);
    let f02 = f.fjk(0, 2);
    f11.mul(&f11).sub(&f20.mul(&f02))
}

/// First loop: linear change normalizing the quadratic part to xy, using the
/// printed matrix with the radicals sqrt(F20 + 2 F11 + F02) and
/// sqrt(F11^2 - F20 F02).
pub fn first_loop<K: Coeff>(f: &Series2<K>) -> Result<(Series2<K>, [K; 4], Option<i64>)> {
    let h2 = hessian_h2(f);
    if h2.is_zero() {
        return Err(Error::DegenerateHessian);
    }
    let h1 = |s: &Series2<K>| {
        s.fjk(2, 0)
            .add(&s.fjk(1, 1))
            .add(&s.fjk(1, 1))
            .add(&s.fjk(0, 2))
    };
    let mut work = f.clone();
    let mut shear = None;
    if h1(&work).is_zero() {
        let n = f.order;
        let mut found = false;
        for c in 1..=3i64 {
            let xs = Series2::var_x(n);
            let ys = Series2::var_y(n).add(&Series2::var_x(n).scale(&K::from_i64(c)))?;
            let cand = precompose(f, &xs, &ys)?;
            if !h1(&cand).is_zero() {
                work = cand;
                shear = Some(c);
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::BadPosition);
        }
    }
    let f20 = work.fjk(2, 0);
    let f11 = work.fjk(1, 1);
    let f02 = work.fjk(0, 2);
    let r2 = hessian_h2(&work).sqrt()?;
    let s1 = h1(&work).sqrt()?;
    let d = K::from_i64(2).sqrt()?.mul(&s1);
    let di = K::one().div(&d)?;
    let a = f20.add(&f11).add(&r2).mul(&di);
    let b = f11.add(&f02).sub(&r2).mul(&di);
    let c = f20.add(&f11).sub(&r2).mul(&di);
    let dd = f11.add(&f02).add(&r2).mul(&di);
    let mut g = linear_regraph(&work, &a, &b, &c, &dd)?;
    // the quadratic part is exactly xy; enforce it against coefficient noise
    g.set(1, 1, K::one());
    g.set(2, 0, K::zero());
    g.set(0, 2, K::zero());
    Ok((g, [a, b, c, dd], shear))
}

/// Both loops: quadratic part to xy, then kill G21 and G12 with the
/// stabilizer element l = F21/2, k = F12/2 at mu = lambda = 1.
pub fn prenormalize<K: Coeff>(f: &Series2<K>) -> Result<Prenorm<K>> {
    let (g, lin, shear) = first_loop(f)?;
    let l2 = g.fjk(2, 1).mul(&K::rat(1, 2));
    let k2 = g.fjk(1, 2).mul(&K::rat(1, 2));
    let out = g1_regraph(&g, &K::one(), &K::one(), &k2, &l2)?;
    Ok(Prenorm { series: out, shear, lin, k2, l2 })
}

/// Sign relating the printed closed form of the order-3 relative invariant
/// to the value produced by the normalization pipeline under the principal
/// branch convention for all square roots. Determined empirically on random
/// jets and on the cubic normal forms; reported, never silently folded into
/// the verbatim transcription.
pub const REL_I30_PIPELINE_SIGN: i64 = -1;

/// The printed closed form of the order-3 relative invariant (the prenormal
/// G30) in terms of the original jet, transcribed verbatim.
pub fn rel_i30_printed<K: Coeff>(f: &Series2<K>) -> Result<K> {
    let f20 = f.fjk(2, 0);
    let f11 = f.fjk(1, 1);
    let f02 = f.fjk(0, 2);
    let f30 = f.fjk(3, 0);
    let f21 = f.fjk(2, 1);
    let f12 = f.fjk(1, 2);
    let f03 = f.fjk(0, 3);
    let h1 = f20.add(&f11).add(&f11).add(&f02);
    let h2 = f11.mul(&f11).sub(&f20.mul(&f02));
    if h1.is_zero() || h2.is_zero() {
        return Err(Error::DenominatorZero);
    }
    let rho = h2.sqrt()?;
    let t = |c: i64, parts: &[&K]| -> K {
        let mut v = K::from_i64(c);
        for p in parts {
            v = v.mul(p);
        }
        v
    };
    let mut s = K::zero();
    s = s.add(&t(-4, &[&f03, &f11, &f11, &f11]));
    s = s.add(&t(6, &[&f02, &f11, &f11, &f12]));
    s = s.add(&t(3, &[&f02, &f03, &f11, &f20]));
    s = s.add(&t(-6, &[&f03, &f11, &f11, &f20]));
    s = s.add(&t(-3, &[&f02, &f02, &f12, &f20]));
    s = s.add(&t(9, &[&f02, &f11, &f12, &f20]));
    s = s.add(&t(3, &[&f02, &f03, &f20, &f20]));
    s = s.add(&t(-3, &[&f03, &f11, &f20, &f20]));
    s = s.add(&t(9, &[&f02, &f12, &f20, &f20]));
    s = s.add(&t(3, &[&f11, &f12, &f20, &f20]));
    s = s.add(&t(-1, &[&f03, &f20, &f20, &f20]));
    s = s.add(&t(4, &[&f03, &f11, &f11, &rho]));
    s = s.add(&t(-6, &[&f02, &f11, &f12, &rho]));
    s = s.add(&t(-1, &[&f02, &f03, &f20, &rho]));
    s = s.add(&t(6, &[&f03, &f11, &f20, &rho]));
    s = s.add(&t(-9, &[&f02, &f12, &f20, &rho]));
    s = s.add(&t(3, &[&f03, &f20, &f20, &rho]));
    s = s.add(&t(3, &[&f12, &f20, &f20, &rho]));
    s = s.add(&t(-3, &[&f02, &f02, &f11, &f21]));
    s = s.add(&t(-9, &[&f02, &f02, &f20, &f21]));
    s = s.add(&t(-9, &[&f02, &f11, &f20, &f21]));
    s = s.add(&t(-6, &[&f11, &f11, &f20, &f21]));
    s = s.add(&t(3, &[&f02, &f20, &f20, &f21]));
    s = s.add(&t(3, &[&f02, &f02, &rho, &f21]));
    s = s.add(&t(-9, &[&f02, &f20, &rho, &f21]));
    s = s.add(&t(-6, &[&f11, &f20, &rho, &f21]));
    s = s.add(&t(1, &[&f02, &f02, &f02, &f30]));
    s = s.add(&t(3, &[&f02, &f02, &f11, &f30]));
    s = s.add(&t(6, &[&f02, &f11, &f11, &f30]));
    s = s.add(&t(4, &[&f11, &f11, &f11, &f30]));
    s = s.add(&t(-3, &[&f02, &f02, &f20, &f30]));
    s = s.add(&t(-3, &[&f02, &f11, &f20, &f30]));
    s = s.add(&t(3, &[&f02, &f02, &rho, &f30]));
    s = s.add(&t(6, &[&f02, &f11, &rho, &f30]));
    s = s.add(&t(4, &[&f11, &f11, &rho, &f30]));
    s = s.add(&t(-1, &[&f02, &f20, &rho, &f30]));
    // -1 / (2 sqrt2 h1^{3/2} h2^{3/2})
    let sqrt2 = K::from_i64(2).sqrt()?;
    let h1r = h1.sqrt()?;
    let den = K::from_i64(2)
        .mul(&sqrt2)
        .mul(&h1.mul(&h1r))
        .mul(&h2.mul(&rho));
    s.neg().div(&den)
}

/// The order-3 relative invariant with the pipeline-consistent sign: equals
/// the prenormal G30 bit-exactly on every jet in its domain.
pub fn rel_i30<K: Coeff>(f: &Series2<K>) -> Result<K> {
    Ok(rel_i30_printed(f)?.mul(&K::from_i64(REL_I30_PIPELINE_SIGN)))
}

/// The six printed order-4 coefficients of the final-loop output in terms of
/// the xy-prenormal coefficients (branch B2, F30 != 0).
pub fn order4_g_block<K: Coeff>(f: &Series2<K>) -> Result<[K; 6]> {
    let f30 = f.fjk(3, 0);
    if f30.is_zero() {
        return Err(Error::DenominatorZero);
    }
    let f21 = f.fjk(2, 1);
    let f12 = f.fjk(1, 2);
    let f03 = f.fjk(0, 3);
    let f40 = f.fjk(4, 0);
    let f31 = f.fjk(3, 1);
    let f22 = f.fjk(2, 2);
    let f13 = f.fjk(1, 3);
    let f04 = f.fjk(0, 4);
    let half = K::rat(1, 2);
    let g03 = f03.mul(&f30).mul(&f30);
    let g40 = K::from_i64(2)
        .mul(&f21)
        .mul(&f30)
        .sub(&f40)
        .neg()
        .div(&f30)?;
    let g31 = K::from_i64(-3)
        .mul(&f21)
        .mul(&f21)
        .sub(&K::from_i64(4).mul(&f12).mul(&f30))
        .add(&K::from_i64(2).mul(&f31))
        .mul(&half);
    let g22 = K::from_i64(-3)
        .mul(&f12)
        .mul(&f21)
        .mul(&f30)
        .add(&f22.mul(&f30));
    let f30sq = f30.mul(&f30);
    let g13 = K::from_i64(-3)
        .mul(&f12)
        .mul(&f12)
        .mul(&f30sq)
        .add(&K::from_i64(2).mul(&f13).mul(&f30sq))
        .sub(&K::from_i64(4).mul(&f03).mul(&f21).mul(&f30sq))
        .mul(&half);
    let f30cb = f30sq.mul(&f30);
    let g04 = f04
        .mul(&f30cb)
        .sub(&K::from_i64(2).mul(&f03).mul(&f12).mul(&f30cb));
    Ok([g03, g40, g31, g22, g13, g04])
}

/// Apply the printed final-loop group element (l = F21/(2 F30), k = F12/2,
/// lambda = 1/F30, mu = 1) to a prenormal series; brings F30 to 1 and kills
/// the mixed cubics. The pipeline oracle for `order4_g_block`.
pub fn final_loop_b2<K: Coeff>(f: &Series2<K>) -> Result<Series2<K>> {
    let f30 = f.fjk(3, 0);
    if f30.is_zero() {
        return Err(Error::DenominatorZero);
    }
    let l = f.fjk(2, 1).div(&f30.add(&f30))?;
    let k = f.fjk(1, 2).mul(&K::rat(1, 2));
    let lambda = K::one().div(&f30)?;
    g1_regraph(f, &K::one(), &lambda, &k, &l)
}

/// The Pick relation check: the pipeline product G30*G03 against the printed
/// right side -P/(8 (F11^2 - F20 F02)^3). Returns (lhs, rhs, sign) with
/// sign = +1 when lhs = rhs, -1 when lhs = -rhs, 0 otherwise (both zero
/// counts as +1).
pub fn pick_factorization_check<K: Coeff>(f: &Series2<K>) -> Result<(K, K, i32)> {
    let pre = prenormalize(f)?;
    let lhs = pre.series.fjk(3, 0).mul(&pre.series.fjk(0, 3));
    let p = pick_numerator(f);
    let h2 = hessian_h2(f);
    let den = K::from_i64(8).mul(&h2).mul(&h2).mul(&h2);
    let rhs = p.neg().div(&den)?;
    let sign = if lhs.sub(&rhs).is_zero() {
        1
    } else if lhs.add(&rhs).is_zero() {
        -1
    } else {
        0
    };
    Ok((lhs, rhs, sign))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn xy(n: usize) -> Series2<Scalar> {
        Series2::var_x(n).mul(&Series2::var_y(n)).unwrap()
    }

    fn b1_form(n: usize) -> Series2<Scalar> {
        let mut s = xy(n);
        s.set_fjk(3, 0, Scalar::one());
        s.set_fjk(0, 3, Scalar::one());
        s
    }

    #[test]
    fn pick_examples() {
        assert_eq!(pick_numerator(&b1_form(6)), Scalar::from_int(8));
        assert_eq!(pick_numerator(&xy(6)), Scalar::zero());
        let mut ruled = xy(6);
        ruled.set_fjk(3, 0, Scalar::one());
        assert_eq!(pick_numerator(&ruled), Scalar::zero());
    }

    #[test]
    fn prenormal_fixed_points() {
        let f = b1_form(6);
        let pre = prenormalize(&f).unwrap();
        assert_eq!(pre.series, f);

        // x^2 - y^2 with no cubic: becomes xy
        let n = 6;
        let mut q = Series2::<Scalar>::zero(n);
        q.set_fjk(2, 0, Scalar::from_int(2));
        q.set_fjk(0, 2, Scalar::from_int(-2));
        let pre2 = prenormalize(&q).unwrap();
        assert_eq!(pre2.series, xy(n));
    }

    #[test]
    fn complex_radicals_allowed() {
        // x^2 + y^2 has h2 = -4, needs sqrt(-1)
        let n = 5;
        let mut q = Series2::<Scalar>::zero(n);
        q.set_fjk(2, 0, Scalar::from_int(2));
        q.set_fjk(0, 2, Scalar::from_int(2));
        let pre = prenormalize(&q).unwrap();
        assert_eq!(pre.series, xy(n));
        // x^2 alone is degenerate
        let mut d = Series2::<Scalar>::zero(n);
        d.set_fjk(2, 0, Scalar::from_int(2));
        assert!(matches!(prenormalize(&d), Err(Error::DegenerateHessian)));
    }

    #[test]
    fn bad_position_shear() {
        // x^2 - y^2 in the (2,0,-2) presentation has F20+2F11+F02 = 0
        let n = 5;
        let mut q = Series2::<Scalar>::zero(n);
        q.set(2, 0, Scalar::one());
        q.set(0, 2, Scalar::one().neg());
        let (_, _, shear) = first_loop(&q).unwrap();
        assert_eq!(shear, Some(1));
    }

    #[test]
    fn printed_i30_matches_pipeline() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 5;
        for _ in 0..20 {
            let mut f = Series2::<Scalar>::zero(n);
            let r = |rng: &mut rand_chacha::ChaCha8Rng, range: i64| {
                Scalar::from_ratio(rng.gen_range(-range..=range), 1 + rng.gen_range(0..3))
            };
            loop {
                f.set_fjk(2, 0, r(&mut rng, 4));
                f.set_fjk(1, 1, r(&mut rng, 4));
                f.set_fjk(0, 2, r(&mut rng, 4));
                let h2 = hessian_h2(&f);
                let h1 = f.fjk(2, 0).add(&f.fjk(1, 1)).add(&f.fjk(1, 1)).add(&f.fjk(0, 2));
                if !h2.is_zero() && !h1.is_zero() {
                    break;
                }
            }
            for (j, k) in [(3, 0), (2, 1), (1, 2), (0, 3)] {
                f.set_fjk(j, k, r(&mut rng, 4));
            }
            let printed = rel_i30(&f).unwrap();
            let pipeline = prenormalize(&f).unwrap().series.fjk(3, 0);
            assert_eq!(printed, pipeline);
        }
    }

    #[test]
    fn i30_zero_cases() {
        assert_eq!(rel_i30(&xy(5)).unwrap(), Scalar::zero());
        let mut s = xy(5);
        s.set_fjk(0, 3, Scalar::one());
        assert_eq!(rel_i30(&s).unwrap(), Scalar::zero());
        let mut c = xy(5);
        c.set_fjk(3, 0, Scalar::one());
        assert_eq!(rel_i30(&c).unwrap(), Scalar::one());
        assert_eq!(rel_i30(&b1_form(5)).unwrap(), Scalar::one());
    }

    #[test]
    fn order4_block_against_pipeline() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 6;
        for _ in 0..10 {
            let mut f = xy(n);
            let r = |rng: &mut rand_chacha::ChaCha8Rng| Scalar::from_ratio(rng.gen_range(-5..=5), 1 + rng.gen_range(0..4));
            f.set_fjk(3, 0, Scalar::from_int(1 + rng.gen_range(0..4)));
            for (j, k) in [(2, 1), (1, 2), (0, 3), (4, 0), (3, 1), (2, 2), (1, 3), (0, 4)] {
                f.set_fjk(j, k, r(&mut rng));
            }
            let block = order4_g_block(&f).unwrap();
            let g = final_loop_b2(&f).unwrap();
            assert_eq!(g.fjk(3, 0), Scalar::one());
            assert!(g.fjk(2, 1).is_zero());
            assert!(g.fjk(1, 2).is_zero());
            assert_eq!(g.fjk(0, 3), block[0]);
            assert_eq!(g.fjk(4, 0), block[1]);
            assert_eq!(g.fjk(3, 1), block[2]);
            assert_eq!(g.fjk(2, 2), block[3]);
            assert_eq!(g.fjk(1, 3), block[4]);
            assert_eq!(g.fjk(0, 4), block[5]);
        }
    }

    #[test]
    fn order4_block_printed_examples() {
        let n = 6;
        let mut f = xy(n);
        f.set_fjk(3, 0, Scalar::one());
        f.set_fjk(2, 1, Scalar::one());
        let block = order4_g_block(&f).unwrap();
        assert_eq!(block[1], Scalar::from_int(-2));
        let mut f2 = xy(n);
        f2.set_fjk(3, 0, Scalar::one());
        f2.set_fjk(4, 0, Scalar::from_int(7));
        let block2 = order4_g_block(&f2).unwrap();
        assert_eq!(block2[1], Scalar::from_int(7));
        for i in [0, 2, 3, 4, 5] {
            assert!(block2[i].is_zero());
        }
    }

    #[test]
    fn pick_sign_constant() {
        let (lhs, rhs, sign) = pick_factorization_check(&b1_form(6)).unwrap();
        assert_eq!(lhs, Scalar::one());
        assert_eq!(rhs, Scalar::from_int(-1));
        assert_eq!(sign, -1);
    }

    #[test]
    fn g30_weight_law() {
        // under (mu, lambda, k, l): G30 -> lambda/mu^2 G30, G03 -> mu/lambda^2 G03
        let mut f = b1_form(6);
        f.set_fjk(4, 0, Scalar::from_int(2));
        let mu = Scalar::from_int(3);
        let lambda = Scalar::from_ratio(1, 2);
        let g = g1_regraph(&f, &mu, &lambda, &Scalar::from_int(1), &Scalar::from_int(-2)).unwrap();
        assert_eq!(g.fjk(3, 0), Scalar::from_ratio(1, 18));
        assert_eq!(g.fjk(0, 3), Scalar::from_int(12));
    }
}
