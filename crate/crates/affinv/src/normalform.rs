//! Branch classification and full normalization: walk the branching tree on
//! the vanishing pattern of the relative invariants, emit the normal form,
//! the normalized invariants, the composed transformation chain, and the
//! residual stabilizer; re-run at arbitrary basepoints.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::expr::{self, Mode};
use crate::regraph::{Step, TransformChain};
use crate::relinv::{final_loop_b2, prenormalize};
use crate::scalar::Scalar;
use crate::series::{Series2, SurfaceGraph};
use std::collections::BTreeMap;

/// Terminal (and intermediate, for reporting) nodes of the branching tree.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BranchLabel {
    /// Both cubic-direction relative invariants nonzero.
    B1,
    /// One cubic direction vanishes identically, quartic invariant nonzero.
    B21,
    /// Cubic and quartic invariants vanish; mixed order-4 invariant nonzero.
    B221,
    /// Everything above vanishes identically: the cubic ruled surface.
    B222,
    /// Both cubic directions vanish identically; order-4 cross term nonzero.
    B31,
    /// All of the above vanish identically: the quadric.
    B32,
}

impl BranchLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchLabel::B1 => "B1",
            BranchLabel::B21 => "B2.1",
            BranchLabel::B221 => "B2.2.1",
            BranchLabel::B222 => "B2.2.2",
            BranchLabel::B31 => "B3.1",
            BranchLabel::B32 => "B3.2",
        }
    }
}

/// Result of a full classification run.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub branch: BranchLabel,
    /// The fully normalized series.
    pub series: Series2<Scalar>,
    /// Normalized invariants I_{j,k} for 4 <= j+k <= order.
    pub invariants: BTreeMap<(usize, usize), Scalar>,
    /// The order through which "identically zero" decisions were checked.
    pub decided_to_order: usize,
    /// The composed transformation chain (replayable on the input).
    pub transform: TransformChain,
    /// Descriptor of the residual stabilizer of the normal form.
    pub residual_stabilizer: String,
}

/// F_{j,k} as functions of the basepoint: an order-`m` series whose (j,k)
/// coefficient (factorial convention) is the series of the corresponding
/// partial derivative of F in the displacement, truncated uniformly to
/// order `f.order - m`. Constant and linear slots stay zero (tangent-plane
/// re-centering at every basepoint).
fn jet_function_series(f: &Series2<Scalar>, m: usize) -> Result<Series2<Series2<Scalar>>> {
    if f.order < m {
        return Err(Error::OrderMismatch(f.order, m));
    }
    let inner = f.order - m;
    let mut out: Series2<Series2<Scalar>> = Series2::zero(m);
    for j in 0..=m {
        for k in 0..=(m - j) {
            if j + k < 2 {
                continue;
            }
            let mut s = f.clone();
            for _ in 0..j {
                s = s.partial_x();
            }
            for _ in 0..k {
                s = s.partial_y();
            }
            out.set_fjk(j, k, s.to_order(inner));
        }
    }
    Ok(out)
}

/// Decision for a relative invariant viewed as a function of the basepoint.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Vanishing {
    NonzeroAtOrigin,
    IdenticallyZero,
    /// Zero at the origin but not identically: the basepoint is non-generic.
    ZeroAtOriginOnly,
}

fn vanishing_of(fun: &Series2<Scalar>) -> Vanishing {
    if fun.is_zero() {
        Vanishing::IdenticallyZero
    } else if fun.get(0, 0).is_zero() {
        Vanishing::ZeroAtOriginOnly
    } else {
        Vanishing::NonzeroAtOrigin
    }
}

fn invariant_map(s: &Series2<Scalar>, from: usize) -> BTreeMap<(usize, usize), Scalar> {
    let mut m = BTreeMap::new();
    for (j, k) in s.iter_degrees() {
        if j + k >= from {
            m.insert((j, k), s.fjk(j, k));
        }
    }
    m
}

/// Record the two normalization loops on the chain and return the
/// prenormalized series.
fn prenormalize_recorded(
    f: &Series2<Scalar>,
    chain: &mut TransformChain,
) -> Result<Series2<Scalar>> {
    let pre = prenormalize(f)?;
    if let Some(c) = pre.shear {
        chain.push(Step::Shear { c: Scalar::from_int(c) });
    }
    let [a, b, c, d] = pre.lin;
    chain.push(Step::Linear { a, b, c, d });
    chain.push(Step::G1 {
        mu: Scalar::one(),
        lambda: Scalar::one(),
        k: pre.k2.clone(),
        l: pre.l2.clone(),
    });
    Ok(pre.series)
}

/// Record the group element that brings the leading cubic coefficient to 1
/// and kills the remaining mixed cubics.
fn final_loop_recorded(
    f: &Series2<Scalar>,
    chain: &mut TransformChain,
) -> Result<Series2<Scalar>> {
    let f30 = f.fjk(3, 0);
    if f30.is_zero() {
        return Err(Error::DenominatorZero);
    }
    let l = f.fjk(2, 1).div(&f30.add(&f30))?;
    let k = f.fjk(1, 2).mul(&Scalar::rat(1, 2));
    let lambda = Scalar::one().div(&f30)?;
    chain.push(Step::G1 { mu: Scalar::one(), lambda, k, l });
    final_loop_b2(f)
}

/// Cube root, exact when possible, otherwise numeric.
fn cbrt_flex(s: &Scalar) -> Scalar {
    match s.cbrt() {
        Ok(v) => v,
        Err(_) => s.to_approx().cbrt().expect("approx cube root"),
    }
}

fn sqrt_flex(s: &Scalar) -> Result<Scalar> {
    match s.sqrt() {
        Ok(v) => Ok(v),
        Err(_) => s.to_approx().sqrt(),
    }
}

/// Walk the branching tree and fully normalize the surface. `n` is the
/// order through which the result (and every "identically zero" claim) is
/// decided.
pub fn classify(surface: &SurfaceGraph, n: usize) -> Result<NormalForm> {
    if n < 4 {
        return Err(Error::UndecidableAtOrder(n));
    }
    let mut chain = TransformChain::default();
    let mut f = surface.series.to_order(n);
    if !f.get(0, 0).is_zero() || !f.get(1, 0).is_zero() || !f.get(0, 1).is_zero() {
        let step = Step::Translate { x0: Scalar::zero(), y0: Scalar::zero() };
        f = step.apply(&f)?;
        chain.push(step);
    }

    // Cubic-direction decision, as functions of the basepoint.
    let fun3 = jet_function_series(&f, 3)?;
    let pre3 = prenormalize(&fun3)?;
    let v30 = vanishing_of(&pre3.series.fjk(3, 0));
    let v03 = vanishing_of(&pre3.series.fjk(0, 3));
    for (name, v) in [("cubic-x", v30), ("cubic-y", v03)] {
        if v == Vanishing::ZeroAtOriginOnly {
            return Err(Error::NonGenericBasepoint(format!(
                "{name} relative invariant vanishes at the basepoint but not identically"
            )));
        }
    }

    match (v30, v03) {
        (Vanishing::NonzeroAtOrigin, Vanishing::NonzeroAtOrigin) => {
            classify_b1(&f, chain, n)
        }
        (Vanishing::NonzeroAtOrigin, Vanishing::IdenticallyZero) => {
            classify_b2(&f, chain, n)
        }
        (Vanishing::IdenticallyZero, Vanishing::NonzeroAtOrigin) => {
            chain.push(Step::Swap);
            let g = Step::Swap.apply(&f)?;
            classify_b2(&g, chain, n)
        }
        (Vanishing::IdenticallyZero, Vanishing::IdenticallyZero) => {
            classify_b3(&f, chain, n)
        }
        _ => unreachable!(),
    }
}

fn classify_b1(
    f: &Series2<Scalar>,
    mut chain: TransformChain,
    n: usize,
) -> Result<NormalForm> {
    let pre = prenormalize_recorded(f, &mut chain)?;
    let g30 = pre.fjk(3, 0);
    let g03 = pre.fjk(0, 3);
    // mu^3 = G30^2 G03 and lambda = mu^2/G30 bring both cubics to 1.
    let mu = cbrt_flex(&g30.mul(&g30).mul(&g03));
    let lambda = mu.mul(&mu).div(&g30)?;
    chain.push(Step::Scale { mu: mu.clone(), lambda: lambda.clone() });
    let mut out = crate::regraph::scale_regraph(&pre, &mu, &lambda)?;
    // clear exact-arithmetic noise in the pinned slots
    if out.fjk(3, 0).sub(&Scalar::one()).is_zero() {
        out.set_fjk(3, 0, Scalar::one());
    }
    if out.fjk(0, 3).sub(&Scalar::one()).is_zero() {
        out.set_fjk(0, 3, Scalar::one());
    }
    let invariants = invariant_map(&out, 4);
    Ok(NormalForm {
        branch: BranchLabel::B1,
        series: out,
        invariants,
        decided_to_order: n,
        transform: chain,
        residual_stabilizer: "discrete: swap x G0 (order 6)".to_string(),
    })
}

fn classify_b2(
    f: &Series2<Scalar>,
    mut chain: TransformChain,
    n: usize,
) -> Result<NormalForm> {
    let pre = prenormalize_recorded(f, &mut chain)?;
    let fin = final_loop_recorded(&pre, &mut chain)?;

    // Quartic-direction decision as a function of the basepoint.
    let fun4 = jet_function_series(f, 4)?;
    let pre4 = prenormalize(&fun4)?;
    let fin4 = final_loop_b2(&pre4.series)?;
    let v40 = vanishing_of(&fin4.fjk(4, 0));
    match v40 {
        Vanishing::ZeroAtOriginOnly => Err(Error::NonGenericBasepoint(
            "quartic relative invariant vanishes at the basepoint but not identically"
                .to_string(),
        )),
        Vanishing::NonzeroAtOrigin => {
            // one-parameter scaling (mu x, mu^2 y, mu^3 u): G40 -> 1
            let mu = fin.fjk(4, 0);
            let lambda = mu.mul(&mu);
            chain.push(Step::Scale { mu: mu.clone(), lambda: lambda.clone() });
            let mut out = crate::regraph::scale_regraph(&fin, &mu, &lambda)?;
            if out.fjk(4, 0).sub(&Scalar::one()).is_zero() {
                out.set_fjk(4, 0, Scalar::one());
            }
            let invariants = invariant_map(&out, 4);
            Ok(NormalForm {
                branch: BranchLabel::B21,
                series: out,
                invariants,
                decided_to_order: n,
                transform: chain,
                residual_stabilizer: "none (discrete identity only)".to_string(),
            })
        }
        Vanishing::IdenticallyZero => {
            // Compatibility of the two defining relations forces the mixed
            // coefficients below; verify instead of assuming.
            for (j, k) in [(2, 2), (3, 2)] {
                if !fin.fjk(j, k).is_zero() {
                    return Err(Error::InconsistentSystem(format!(
                        "coefficient ({j},{k}) must vanish in the doubly-degenerate branch"
                    )));
                }
            }
            let v31 = vanishing_of(&fin4.fjk(3, 1));
            match v31 {
                Vanishing::ZeroAtOriginOnly => Err(Error::NonGenericBasepoint(
                    "mixed order-4 invariant vanishes at the basepoint but not identically"
                        .to_string(),
                )),
                Vanishing::NonzeroAtOrigin => {
                    // mu^2 = G31 under (mu x, mu^2 y, mu^3 u)
                    let mu = sqrt_flex(&fin.fjk(3, 1))?;
                    let lambda = mu.mul(&mu);
                    chain.push(Step::Scale { mu: mu.clone(), lambda: lambda.clone() });
                    let mut out = crate::regraph::scale_regraph(&fin, &mu, &lambda)?;
                    if out.fjk(3, 1).sub(&Scalar::one()).is_zero() {
                        out.set_fjk(3, 1, Scalar::one());
                    }
                    let invariants = invariant_map(&out, 4);
                    Ok(NormalForm {
                        branch: BranchLabel::B221,
                        series: out,
                        invariants,
                        decided_to_order: n,
                        transform: chain,
                        residual_stabilizer: "discrete: mu = -1".to_string(),
                    })
                }
                Vanishing::IdenticallyZero => {
                    // Everything is forced: the cubic ruled surface.
                    let mut cayley = Series2::zero(n);
                    cayley.set_fjk(1, 1, Scalar::one());
                    cayley.set_fjk(3, 0, Scalar::one());
                    if fin != cayley {
                        return Err(Error::InconsistentSystem(
                            "doubly-degenerate branch must reduce to the cubic ruled surface"
                                .to_string(),
                        ));
                    }
                    Ok(NormalForm {
                        branch: BranchLabel::B222,
                        series: fin,
                        invariants: BTreeMap::new(),
                        decided_to_order: n,
                        transform: chain,
                        residual_stabilizer: "1-parameter: (mu x, mu^2 y, mu^3 u)"
                            .to_string(),
                    })
                }
            }
        }
    }
}

fn classify_b3(
    f: &Series2<Scalar>,
    mut chain: TransformChain,
    n: usize,
) -> Result<NormalForm> {
    let pre = prenormalize_recorded(f, &mut chain)?;
    let fun4 = jet_function_series(f, 4)?;
    let pre4 = prenormalize(&fun4)?;
    let v22 = vanishing_of(&pre4.series.fjk(2, 2));
    match v22 {
        Vanishing::ZeroAtOriginOnly => Err(Error::NonGenericBasepoint(
            "order-4 cross invariant vanishes at the basepoint but not identically"
                .to_string(),
        )),
        Vanishing::NonzeroAtOrigin => {
            // (mu x, lambda y, mu lambda u) with mu lambda = G22
            let mu = pre.fjk(2, 2);
            let lambda = Scalar::one();
            chain.push(Step::Scale { mu: mu.clone(), lambda: lambda.clone() });
            let mut out = crate::regraph::scale_regraph(&pre, &mu, &lambda)?;
            if out.fjk(2, 2).sub(&Scalar::one()).is_zero() {
                out.set_fjk(2, 2, Scalar::one());
            }
            let invariants = invariant_map(&out, 4);
            Ok(NormalForm {
                branch: BranchLabel::B31,
                series: out,
                invariants,
                decided_to_order: n,
                transform: chain,
                residual_stabilizer: "1-parameter: (mu x, y/mu, u)".to_string(),
            })
        }
        Vanishing::IdenticallyZero => {
            let mut quadric = Series2::zero(n);
            quadric.set_fjk(1, 1, Scalar::one());
            if pre != quadric {
                return Err(Error::InconsistentSystem(
                    "fully degenerate branch must reduce to the quadric".to_string(),
                ));
            }
            Ok(NormalForm {
                branch: BranchLabel::B32,
                series: pre,
                invariants: BTreeMap::new(),
                decided_to_order: n,
                transform: chain,
                residual_stabilizer: "2-parameter: (mu x, lambda y, mu lambda u)"
                    .to_string(),
            })
        }
    }
}

/// Re-run the classification with the basepoint moved to `p`.
/// Expression-backed surfaces are re-expanded exactly at the displaced
/// point (falling back to high-precision numerics when the displaced
/// coefficients leave the exact field); series-backed surfaces are shifted
/// formally.
pub fn invariantize_at(surface: &SurfaceGraph, p: (&Scalar, &Scalar)) -> Result<NormalForm> {
    invariantize_at_mode(surface, p, Mode::Exact)
}

/// Like [`invariantize_at`], but expression-backed surfaces may be expanded
/// in the requested arithmetic mode. Approximate mode avoids the cost of
/// deep exact radical towers at displaced basepoints.
pub fn invariantize_at_mode(
    surface: &SurfaceGraph,
    p: (&Scalar, &Scalar),
    mode: Mode,
) -> Result<NormalForm> {
    let n = surface.series.order;
    let shifted = shift_surface_mode(surface, p, mode)?;
    classify(&shifted, n)
}

/// The surface re-graphed around basepoint `p` (same order).
pub fn shift_surface(surface: &SurfaceGraph, p: (&Scalar, &Scalar)) -> Result<SurfaceGraph> {
    shift_surface_mode(surface, p, Mode::Exact)
}

/// [`shift_surface`] with an explicit arithmetic mode for expression-backed
/// surfaces.
pub fn shift_surface_mode(
    surface: &SurfaceGraph,
    p: (&Scalar, &Scalar),
    mode: Mode,
) -> Result<SurfaceGraph> {
    let n = surface.series.order;
    let (x0, y0) = p;
    if let (Some(ast), Some(a), Some(b)) =
        (&surface.expr, x0.as_rational(), y0.as_rational())
    {
        let moved = expr::shift_vars(ast, &a, &b);
        let series = match expr::expand_in(&moved, n, mode) {
            Ok(s) => s,
            Err(Error::NotExactlyEvaluable(_)) => expr::expand_in(&moved, n, Mode::Approx)?,
            Err(e) => return Err(e),
        };
        let mut g = SurfaceGraph::at_origin(series);
        g.basepoint = (x0.clone(), y0.clone(), Scalar::zero());
        g.expr = Some(moved);
        return Ok(g);
    }
    let series = surface.series.taylor_shift(x0, y0);
    let mut g = SurfaceGraph::at_origin(series);
    g.basepoint = (x0.clone(), y0.clone(), Scalar::zero());
    Ok(g)
}

/// omega = (-1 + sqrt(-3))/2, a primitive cube root of unity.
pub fn omega() -> Scalar {
    Scalar::from_int(-3)
        .sqrt()
        .expect("sqrt(-3) in the tower")
        .sub(&Scalar::one())
        .mul(&Scalar::rat(1, 2))
}

/// Canonical representative of a fully-cubic normal form under the residual
/// discrete group: the swap composed with the three scalings
/// (omega^j x, omega^{2j} y, u). Minimal under the lexicographic ordering of
/// the canonical coefficient encodings; deterministic and idempotent.
pub fn canonicalize_discrete(nf: &NormalForm) -> Result<NormalForm> {
    if nf.branch != BranchLabel::B1 {
        return Err(Error::UnsupportedBranch(nf.branch.as_str().to_string()));
    }
    let w = omega();
    let mut best: Option<(Vec<String>, Series2<Scalar>, Vec<Step>)> = None;
    for swap in [false, true] {
        for j in 0..3u32 {
            let mut steps = Vec::new();
            let mut s = nf.series.clone();
            if swap {
                steps.push(Step::Swap);
                s = Step::Swap.apply(&s)?;
            }
            if j > 0 {
                let mut mu = w.clone();
                if j == 2 {
                    mu = mu.mul(&w);
                }
                let lambda = mu.mul(&mu);
                let step = Step::Scale { mu, lambda };
                s = step.apply(&s)?;
                steps.push(step);
            }
            let key: Vec<String> = s
                .iter_degrees()
                .filter(|&(a, b)| a + b >= 4)
                .map(|(a, b)| s.fjk(a, b).canonical_key())
                .collect();
            if best.as_ref().map_or(true, |(bk, _, _)| key < *bk) {
                best = Some((key, s, steps));
            }
        }
    }
    let (_, series, steps) = best.unwrap();
    let mut transform = nf.transform.clone();
    for st in steps {
        transform.push(st);
    }
    let invariants = invariant_map(&series, 4);
    Ok(NormalForm {
        branch: nf.branch,
        series,
        invariants,
        decided_to_order: nf.decided_to_order,
        transform,
        residual_stabilizer: nf.residual_stabilizer.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_from(terms: &[(usize, usize, i64, i64)], n: usize) -> Series2<Scalar> {
        let mut s = Series2::zero(n);
        for &(j, k, p, q) in terms {
            s.set_fjk(j, k, Scalar::from_ratio(p, q));
        }
        s
    }

    #[test]
    fn quadric_classifies_b32() {
        let s = SurfaceGraph::from_expr("x*y", 8).unwrap();
        let nf = classify(&s, 8).unwrap();
        assert_eq!(nf.branch, BranchLabel::B32);
        assert!(nf.invariants.is_empty());
    }

    #[test]
    fn exceptional_quartic_classifies_b31() {
        let s = SurfaceGraph::from_expr("2-2*sqrt(1-x*y)", 8).unwrap();
        let nf = classify(&s, 8).unwrap();
        assert_eq!(nf.branch, BranchLabel::B31);
        // normal form xy + x^2 y^2 / 4 + ...
        assert_eq!(nf.series.fjk(2, 2), Scalar::one());
    }

    #[test]
    fn cubic_ruled_classifies_b222() {
        let s = SurfaceGraph::from_expr("x*y + x^3/6", 8).unwrap();
        let nf = classify(&s, 8).unwrap();
        assert_eq!(nf.branch, BranchLabel::B222);
    }

    #[test]
    fn fully_cubic_tail_is_b1_identity() {
        // xy + x^3/6 + y^3/6 + generic order-4 tail: pipeline is the identity
        let s = series_from(
            &[(1, 1, 1, 1), (3, 0, 1, 1), (0, 3, 1, 1), (4, 0, 5, 1), (2, 2, 7, 2)],
            6,
        );
        let nf = classify(&SurfaceGraph::at_origin(s.clone()), 6).unwrap();
        assert_eq!(nf.branch, BranchLabel::B1);
        assert_eq!(nf.invariants[&(4, 0)], Scalar::from_int(5));
        assert_eq!(nf.invariants[&(2, 2)], Scalar::from_ratio(7, 2));
        // round trip: replaying the chain reproduces the normal form
        let replay = nf.transform.apply(&s).unwrap();
        assert_eq!(replay, nf.series);
    }

    #[test]
    fn swapped_cubic_goes_through_swap() {
        let s = SurfaceGraph::from_expr("x*y + y^3/6 + y^4/24", 8).unwrap();
        let nf = classify(&s, 8).unwrap();
        assert_eq!(nf.branch, BranchLabel::B21);
        assert_eq!(nf.series.fjk(3, 0), Scalar::one());
        assert_eq!(nf.series.fjk(4, 0), Scalar::one());
        assert_eq!(nf.series.fjk(0, 3), Scalar::zero());
    }

    #[test]
    fn b21_scaling_normalizes_quartic() {
        let s = SurfaceGraph::from_expr("x*y + x^3/6 + x^4/12", 8).unwrap();
        let nf = classify(&s, 8).unwrap();
        assert_eq!(nf.branch, BranchLabel::B21);
        assert_eq!(nf.series.fjk(4, 0), Scalar::one());
        let replay = nf.transform.apply(&s.series).unwrap();
        assert_eq!(replay, nf.series);
    }

    #[test]
    fn quadric_invariant_under_basepoint_move() {
        let s = SurfaceGraph::from_expr("x*y", 8).unwrap();
        let nf = invariantize_at(&s, (&Scalar::from_int(3), &Scalar::from_int(5))).unwrap();
        assert_eq!(nf.branch, BranchLabel::B32);
    }

    #[test]
    fn perturbed_cubic_differs_at_displaced_basepoint() {
        let s = SurfaceGraph::from_expr("x*y + x^3/6 + y^3/6 + x^5*y/120", 10).unwrap();
        let at0 = classify(&s, 10).unwrap();
        let atp = invariantize_at(&s, (&Scalar::from_ratio(1, 10), &Scalar::zero())).unwrap();
        assert_eq!(at0.branch, BranchLabel::B1);
        assert_eq!(atp.branch, BranchLabel::B1);
        assert!(at0.invariants[&(4, 0)] != atp.invariants[&(4, 0)]);
    }

    #[test]
    fn canonicalize_is_idempotent_and_fixes_omega_twist() {
        let s = series_from(
            &[(1, 1, 1, 1), (3, 0, 1, 1), (0, 3, 1, 1), (4, 0, 2, 1), (0, 4, 2, 1)],
            5,
        );
        let nf = classify(&SurfaceGraph::at_origin(s.clone()), 5).unwrap();
        let c1 = canonicalize_discrete(&nf).unwrap();
        let c2 = canonicalize_discrete(&c1).unwrap();
        assert_eq!(c1.invariants, c2.invariants);
        // an omega-twisted tuple lands on the same representative
        let w = omega();
        let tw = crate::regraph::scale_regraph(&s, &w, &w.mul(&w)).unwrap();
        let nf2 = classify(&SurfaceGraph::at_origin(tw), 5).unwrap();
        let c3 = canonicalize_discrete(&nf2).unwrap();
        for (k, v) in &c1.invariants {
            assert_eq!(v, &c3.invariants[k], "mismatch at {k:?}");
        }
    }

    #[test]
    fn too_low_order_is_rejected() {
        let s = SurfaceGraph::from_expr("x*y", 3).unwrap();
        assert!(matches!(classify(&s, 3), Err(Error::UndecidableAtOrder(3))));
    }
}
