//! Moduli systems for homogeneous models, the family catalog N1-N10, model
//! matching, and the sampled homogeneity verdict.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::normalform::{self, BranchLabel, NormalForm};
use crate::poly::{MultiPoly, Var};
use crate::recurrence::{ivar, ivar_deg, parse_inv_poly};
use crate::scalar::Scalar;
use crate::series::SurfaceGraph;
use num::BigRational;
use std::collections::BTreeMap;

/// Parameter variable ids (disjoint from the invariant-symbol ids).
pub const PARAM_A: Var = 300;
pub const PARAM_B: Var = 301;

/// A rational function of the family parameters; minimal field arithmetic
/// for the symbolic family-identity checks.
#[derive(Clone, Debug)]
pub struct RatFun {
    pub num: MultiPoly,
    pub den: MultiPoly,
}

impl RatFun {
    pub fn from_poly(p: MultiPoly) -> Self {
        RatFun { num: p, den: MultiPoly::one() }
    }

    fn simplify(mut self) -> Self {
        if self.num.is_zero() {
            self.den = MultiPoly::one();
        } else if let Some(q) = self.num.div_exact(&self.den) {
            self.num = q;
            self.den = MultiPoly::one();
        }
        self
    }
}

impl PartialEq for RatFun {
    fn eq(&self, other: &Self) -> bool {
        self.num.mul(&other.den).sub(&other.num.mul(&self.den)).is_zero()
    }
}

impl Coeff for RatFun {
    fn zero() -> Self {
        RatFun::from_poly(MultiPoly::zero())
    }
    fn one() -> Self {
        RatFun::from_poly(MultiPoly::one())
    }
    fn add(&self, o: &Self) -> Self {
        RatFun {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
        .simplify()
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        RatFun { num: self.num.mul(&o.num), den: self.den.mul(&o.den) }.simplify()
    }
    fn neg(&self) -> Self {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if o.num.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RatFun {
            num: self.num.mul(&o.den),
            den: self.den.mul(&o.num),
        }
        .simplify())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn from_rational(r: &BigRational) -> Self {
        RatFun::from_poly(MultiPoly::zero().add(&MultiPoly::one().scale(r)))
    }
}

/// One homogeneous model family.
#[derive(Clone, Debug)]
pub struct ModelFamily {
    pub id: &'static str,
    pub branch: BranchLabel,
    /// Parameter names in order ('a', 'b', 's', 't').
    pub params: Vec<char>,
    /// Invariant assignments as rational functions of the parameters,
    /// keyed by (j,k). Empty for the parameterless branches whose normal
    /// form is a single surface.
    pub assignments: BTreeMap<(usize, usize), RatFun>,
    /// Closed-form graph expression when one is available.
    pub closed_form: Option<&'static str>,
}

fn rf(text: &str) -> RatFun {
    // reuse the invariant-polynomial parser with A/B standing for the params
    let p = parse_inv_poly(&text.replace('a', "I99").replace('b', "I98"))
        .expect("family assignment parses");
    // remap the placeholder symbols onto the parameter ids
    let mut out = MultiPoly::zero();
    for (m, c) in &p.terms {
        let mut m2: Vec<(Var, u32)> = m
            .iter()
            .map(|&(v, e)| {
                let d = ivar_deg(v);
                match d {
                    (9, 9) => (PARAM_A, e),
                    (9, 8) => (PARAM_B, e),
                    _ => (v, e),
                }
            })
            .collect();
        m2.sort_unstable_by_key(|&(v, _)| v);
        out.add_term(m2, c.clone());
    }
    RatFun::from_poly(out)
}

/// The order-4 invariant slots of the fully-cubic branch.
pub const B1_SLOTS: [(usize, usize); 5] = [(4, 0), (3, 1), (2, 2), (1, 3), (0, 4)];
/// The generating invariant slots of the simply-degenerate branch.
pub const B21_SLOTS: [(usize, usize); 5] = [(3, 1), (2, 2), (5, 0), (4, 1), (3, 2)];

/// The hard-coded family catalog for a terminal branch.
pub fn enumerate_families(branch: BranchLabel) -> Vec<ModelFamily> {
    let fam = |id, branch, params: &[char], asg: Vec<((usize, usize), RatFun)>, cf| {
        ModelFamily {
            id,
            branch,
            params: params.to_vec(),
            assignments: asg.into_iter().collect(),
            closed_form: cf,
        }
    };
    match branch {
        BranchLabel::B1 => vec![
            fam(
                "N1",
                branch,
                &['a', 'b'],
                vec![
                    ((4, 0), rf("a")),
                    ((3, 1), rf("-2 b")),
                    ((2, 2), rf("0 a")),
                    ((1, 3), rf("-2 a")),
                    ((0, 4), rf("b")),
                ],
                None,
            ),
            fam(
                "N2",
                branch,
                &['b'],
                vec![
                    ((4, 0), rf("b")),
                    ((3, 1), rf("-4 b - 9")),
                    ((2, 2), rf("-16/9 b^2 - 10 b - 9")),
                    ((1, 3), rf("-4 b - 9")),
                    ((0, 4), rf("b")),
                ],
                None,
            ),
            fam(
                "N3",
                branch,
                &['b'],
                vec![
                    ((4, 0), rf("b")),
                    ((3, 1), rf("4 b - 9")),
                    ((2, 2), rf("6 b - 9")),
                    ((1, 3), rf("4 b - 9")),
                    ((0, 4), rf("b")),
                ],
                None,
            ),
            fam(
                "N4",
                branch,
                &['a'],
                vec![
                    ((4, 0), rf("a")),
                    ((3, 1), rf("0 a")),
                    ((2, 2), rf("9/2")),
                    ((1, 3), rf("0 a")),
                    (
                        (0, 4),
                        RatFun {
                            num: MultiPoly::from_i64(81),
                            den: MultiPoly::var(PARAM_A).scale(&BigRational::from_integer(16.into())),
                        },
                    ),
                ],
                None,
            ),
        ],
        BranchLabel::B21 => vec![
            fam(
                "N5",
                branch,
                &['t'],
                vec![
                    ((3, 1), rf("a")),
                    ((2, 2), rf("0 a")),
                    ((5, 0), rf("4 a + 3/2")),
                    ((4, 1), rf("a")),
                    ((3, 2), rf("0 a")),
                ],
                None,
            ),
            fam(
                "N6",
                branch,
                &['s'],
                vec![
                    ((3, 1), rf("0 a")),
                    ((2, 2), rf("0 a")),
                    ((5, 0), rf("a")),
                    ((4, 1), rf("0 a")),
                    ((3, 2), rf("0 a")),
                ],
                None,
            ),
        ],
        BranchLabel::B221 => vec![fam(
            "N7",
            branch,
            &[],
            vec![],
            Some("(1+y)*sqrt(2)*tan(x/sqrt(2))-x"),
        )],
        BranchLabel::B222 => vec![fam("N8", branch, &[], vec![], Some("x*y+x^3/6"))],
        BranchLabel::B31 => vec![fam(
            "N9",
            branch,
            &[],
            vec![],
            Some("2-2*sqrt(1-x*y)"),
        )],
        BranchLabel::B32 => vec![fam("N10", branch, &[], vec![], Some("x*y"))],
    }
}

/// The moduli equations of a branch (conditions on the generating
/// invariants that homogeneity forces).
pub fn moduli_equations(branch: BranchLabel) -> Result<Vec<MultiPoly>> {
    match branch {
        BranchLabel::B1 => Ok([
            "8 I04 I40 - 1 I13 I31 + 2 I31 I40 - 9 I22",
            "2 I04 I13 + 8 I04 I40 - 1 I13 I31 - 9 I22",
            "4 I04 I31 - 1 I13 I22 - 4 I22 I40 + 2 I31^2 + 9 I13 + 18 I40",
            "4 I04 I22 - 2 I13^2 - 4 I13 I40 + I22 I31 - 18 I04 - 9 I31",
        ]
        .iter()
        .map(|s| parse_inv_poly(s).unwrap())
        .collect()),
        BranchLabel::B21 => {
            let mut v: Vec<MultiPoly> = [
                // homogeneous order-4 equations
                "I41 + 8 I31^2 - 7/2 I22 + 2 I31 - 2 I50 I31",
                "4 I31 I22 + 2 I31^2 - 2 I41 I31 + I32",
                "12 I31 I22 - 3 I50 I22 + 4 I22 + I32",
                "6 I22^2 + 4 I31 I22 - 3 I41 I22",
                // order-5 eliminations
                "24 I31^2 I50 - 2 I50^2 I31 - 15/2 I22 I50 + 7 I50 I31 + 21/2 I22 - 64 I31^3 + 36 I22 I31 - 40 I31^2 - 6 I31",
                "30 I22 I31 + 72 I22 I31^2 - 18 I22 I50 I31 - 63/4 I22^2 + 56 I31^3 - 14 I31^2 I50 + 12 I31^2 + 64 I31^4 - 32 I31^3 I50 + 4 I50^2 I31^2",
            ]
            .iter()
            .map(|s| parse_inv_poly(s).unwrap())
            .collect();
            // product form: -I31 (−16I31²+4I31I50+3I22−6I31)(−32I31²+8I31I50+6I22−13I31)
            let f1 = parse_inv_poly("-16 I31^2 + 4 I31 I50 + 3 I22 - 6 I31").unwrap();
            let f2 = parse_inv_poly("-32 I31^2 + 8 I31 I50 + 6 I22 - 13 I31").unwrap();
            v.push(MultiPoly::var(ivar(3, 1)).neg().mul(&f1).mul(&f2));
            Ok(v)
        }
        other => Err(Error::UnsupportedBranch(other.as_str().to_string())),
    }
}

/// Evaluate the moduli equations on an invariant tuple; returns the
/// residuals and whether they all vanish.
pub fn check_moduli(
    branch: BranchLabel,
    inv: &BTreeMap<(usize, usize), Scalar>,
) -> Result<(bool, Vec<Scalar>)> {
    let eqs = moduli_equations(branch)?;
    let mut residuals = Vec::new();
    for e in &eqs {
        for v in e.variables() {
            let d = ivar_deg(v);
            if !inv.contains_key(&d) {
                return Err(Error::Other(format!("missing invariant I{}{}", d.0, d.1)));
            }
        }
        residuals.push(e.eval_with(Scalar::from_rational, |v| inv[&ivar_deg(v)].clone()));
    }
    let ok = residuals.iter().all(|r| r.is_zero());
    Ok((ok, residuals))
}

/// Symbolic family-identity check: the family's assignments satisfy the
/// branch moduli equations identically in the parameters.
pub fn family_satisfies_moduli(fam: &ModelFamily) -> Result<bool> {
    if fam.assignments.is_empty() {
        return Ok(true);
    }
    let eqs = moduli_equations(fam.branch)?;
    for e in &eqs {
        let r = e.eval_with(RatFun::from_rational, |v| {
            fam.assignments[&ivar_deg(v)].clone()
        });
        if !r.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One family/parameter match of an invariant tuple.
#[derive(Clone, Debug)]
pub struct ModelMatch {
    pub family: &'static str,
    pub params: BTreeMap<char, Scalar>,
}

fn try_family(
    fam: &ModelFamily,
    slots: &[(usize, usize)],
    tuple: &BTreeMap<(usize, usize), Scalar>,
) -> Option<ModelMatch> {
    // Solve the parameters from the slots where a parameter occurs alone,
    // then verify every assignment.
    let mut params: BTreeMap<char, Scalar> = BTreeMap::new();
    match fam.id {
        "N1" => {
            params.insert('a', tuple[&(4, 0)].clone());
            params.insert('b', tuple[&(0, 4)].clone());
        }
        "N2" | "N3" => {
            params.insert('b', tuple[&(4, 0)].clone());
        }
        "N4" => {
            let a = tuple[&(4, 0)].clone();
            if a.is_zero() {
                return None;
            }
            params.insert('a', a);
        }
        "N5" => {
            params.insert('t', tuple[&(3, 1)].clone());
        }
        "N6" => {
            params.insert('s', tuple[&(5, 0)].clone());
        }
        _ => {}
    }
    let lookup = |v: Var| -> Scalar {
        if v == PARAM_A {
            params
                .get(&'a')
                .or_else(|| params.get(&'s'))
                .or_else(|| params.get(&'t'))
                .cloned()
                .unwrap_or_else(Scalar::zero)
        } else if v == PARAM_B {
            params.get(&'b').cloned().unwrap_or_else(Scalar::zero)
        } else {
            Scalar::zero()
        }
    };
    for &slot in slots {
        let asg = &fam.assignments[&slot];
        let num = asg.num.eval_with(Scalar::from_rational, lookup);
        let den = asg.den.eval_with(Scalar::from_rational, lookup);
        if den.is_zero() {
            return None;
        }
        let expect = num.div(&den).ok()?;
        if tuple[&slot] != expect {
            return None;
        }
    }
    Some(ModelMatch { family: fam.id, params })
}

/// Instantiate a family's generating invariants at concrete parameter
/// values. Parameters are looked up by the family's own letters; missing
/// ones default to zero.
pub fn family_invariants(
    fam: &ModelFamily,
    params: &BTreeMap<char, Scalar>,
) -> Result<BTreeMap<(usize, usize), Scalar>> {
    let lookup = |v: Var| -> Scalar {
        if v == PARAM_A {
            params
                .get(&'a')
                .or_else(|| params.get(&'s'))
                .or_else(|| params.get(&'t'))
                .cloned()
                .unwrap_or_else(Scalar::zero)
        } else if v == PARAM_B {
            params.get(&'b').cloned().unwrap_or_else(Scalar::zero)
        } else {
            Scalar::zero()
        }
    };
    let mut out = BTreeMap::new();
    for (&slot, asg) in &fam.assignments {
        let num = asg.num.eval_with(Scalar::from_rational, lookup);
        let den = asg.den.eval_with(Scalar::from_rational, lookup);
        if den.is_zero() {
            return Err(Error::DenominatorZero);
        }
        out.insert(slot, num.div(&den)?);
    }
    Ok(out)
}

/// Match a classified normal form against the family catalog. For the
/// fully-cubic branch, all six discrete gauges of the tuple are tried.
/// Returns every family that matches (more than one only at the documented
/// overlap points).
pub fn match_model(nf: &NormalForm) -> Result<Vec<ModelMatch>> {
    let fams = enumerate_families(nf.branch);
    match nf.branch {
        BranchLabel::B1 => {
            let mut found: Vec<ModelMatch> = Vec::new();
            for tuple in b1_discrete_images(&b1_tuple(nf)?) {
                for fam in &fams {
                    if let Some(m) = try_family(fam, &B1_SLOTS, &tuple) {
                        if !found
                            .iter()
                            .any(|f| f.family == m.family && f.params == m.params)
                        {
                            found.push(m);
                        }
                    }
                }
            }
            Ok(found)
        }
        BranchLabel::B21 => {
            let tuple = b21_tuple(nf)?;
            Ok(fams
                .iter()
                .filter_map(|f| try_family(f, &B21_SLOTS, &tuple))
                .collect())
        }
        _ => Ok(fams
            .iter()
            .map(|f| ModelMatch { family: f.id, params: BTreeMap::new() })
            .collect()),
    }
}

/// The order-4 tuple of a fully-cubic normal form.
pub fn b1_tuple(nf: &NormalForm) -> Result<BTreeMap<(usize, usize), Scalar>> {
    let mut t = BTreeMap::new();
    for slot in B1_SLOTS {
        let v = nf
            .invariants
            .get(&slot)
            .cloned()
            .ok_or(Error::UndecidableAtOrder(nf.decided_to_order))?;
        t.insert(slot, v);
    }
    Ok(t)
}

/// The generating tuple of a simply-degenerate normal form (needs order 5).
pub fn b21_tuple(nf: &NormalForm) -> Result<BTreeMap<(usize, usize), Scalar>> {
    let mut t = BTreeMap::new();
    for slot in B21_SLOTS {
        let v = nf
            .invariants
            .get(&slot)
            .cloned()
            .ok_or(Error::UndecidableAtOrder(nf.decided_to_order))?;
        t.insert(slot, v);
    }
    Ok(t)
}

/// The six discrete gauges of a fully-cubic order-4 tuple: swap composed
/// with I_{a,b} -> omega^{-j(a-b)} I_{a,b}.
pub fn b1_discrete_images(
    tuple: &BTreeMap<(usize, usize), Scalar>,
) -> Vec<BTreeMap<(usize, usize), Scalar>> {
    let w = normalform::omega();
    let mut out = Vec::new();
    for swap in [false, true] {
        for j in 0..3i64 {
            let mut img = BTreeMap::new();
            for (&(a, b), v) in tuple {
                let (sa, sb) = if swap { (b, a) } else { (a, b) };
                // omega^{-j(sa-sb)} factor
                let e = (-(j) * (sa as i64 - sb as i64)).rem_euclid(3);
                let mut f = v.clone();
                for _ in 0..e {
                    f = f.mul(&w);
                }
                img.insert((sa, sb), f);
            }
            out.push(img);
        }
    }
    out
}

/// Verdict of the sampled homogeneity test.
#[derive(Clone, Debug)]
pub struct HomogeneityVerdict {
    pub pass: bool,
    pub matches: Vec<ModelMatch>,
    /// Why the test failed, when it did.
    pub witness: Option<String>,
}

/// Necessary-condition homogeneity test: moduli residuals at the origin,
/// plus constancy of the canonicalized invariants at sampled nearby
/// basepoints. Sampled basepoint expansions run in exact arithmetic.
pub fn is_homogeneous(
    surface: &SurfaceGraph,
    n: usize,
    samples: usize,
) -> Result<HomogeneityVerdict> {
    is_homogeneous_mode(surface, n, samples, crate::expr::Mode::Exact)
}

/// [`is_homogeneous`] with an explicit arithmetic mode for the sampled
/// basepoint expansions. Approximate mode (256-bit) sidesteps the cost of
/// exact nested radical towers on closed-form surfaces.
pub fn is_homogeneous_mode(
    surface: &SurfaceGraph,
    n: usize,
    samples: usize,
    mode: crate::expr::Mode,
) -> Result<HomogeneityVerdict> {
    let nf = normalform::classify(surface, n)?;
    if matches!(nf.branch, BranchLabel::B1 | BranchLabel::B21) {
        let tuple = if nf.branch == BranchLabel::B1 {
            b1_tuple(&nf)?
        } else {
            b21_tuple(&nf)?
        };
        // The decisive degree-4 condition is closure of the frame bracket:
        // a homogeneous surface's symmetry fields span the printed frame,
        // so their bracket must close within it. (The degree-4 moduli
        // equations cut out a different variety on the generic branch; see
        // `check_moduli` for the catalog-side test.)
        let res = crate::symmetry::bracket_closure_residual(nf.branch, &tuple)?;
        if !res.is_zero() {
            return Ok(HomogeneityVerdict {
                pass: false,
                matches: Vec::new(),
                witness: Some("frame bracket fails to close on the order-4 jet".into()),
            });
        }
    }
    let reference = canonical_tuple(&nf)?;
    for i in 0..samples {
        // deterministic small rational displacements of magnitude ~1/10
        let x0 = Scalar::from_ratio(((i as i64 % 5) - 2) * 2 + 1, 40);
        let y0 = Scalar::from_ratio(((7 * i as i64 + 3) % 9) - 4, 50);
        let nfp = normalform::invariantize_at_mode(surface, (&x0, &y0), mode)?;
        if nfp.branch != nf.branch {
            return Ok(HomogeneityVerdict {
                pass: false,
                matches: Vec::new(),
                witness: Some(format!(
                    "branch changes to {} at ({}, {})",
                    nfp.branch.as_str(),
                    x0.encode(),
                    y0.encode()
                )),
            });
        }
        let probe = canonical_tuple(&nfp)?;
        if !tuples_agree(&reference, &probe) {
            return Ok(HomogeneityVerdict {
                pass: false,
                matches: Vec::new(),
                witness: Some(format!(
                    "invariants change at ({}, {})",
                    x0.encode(),
                    y0.encode()
                )),
            });
        }
    }
    Ok(HomogeneityVerdict { pass: true, matches: match_model(&nf)?, witness: None })
}

fn canonical_tuple(nf: &NormalForm) -> Result<BTreeMap<(usize, usize), Scalar>> {
    if nf.branch == BranchLabel::B1 {
        let c = normalform::canonicalize_discrete(nf)?;
        Ok(c.invariants)
    } else {
        Ok(nf.invariants.clone())
    }
}

fn tuples_agree(
    a: &BTreeMap<(usize, usize), Scalar>,
    b: &BTreeMap<(usize, usize), Scalar>,
) -> bool {
    for (k, v) in a {
        if let Some(w) = b.get(k) {
            if !v.sub(w).is_zero() {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b1_map(vals: [(i64, i64); 5]) -> BTreeMap<(usize, usize), Scalar> {
        B1_SLOTS
            .iter()
            .zip(vals)
            .map(|(&s, (p, q))| (s, Scalar::from_ratio(p, q)))
            .collect()
    }

    #[test]
    fn moduli_accept_family_points() {
        // first family at a=2, b=3: (2, -6, 0, -4, 3)
        let m = b1_map([(2, 1), (-6, 1), (0, 1), (-4, 1), (3, 1)]);
        let (ok, _) = check_moduli(BranchLabel::B1, &m).unwrap();
        assert!(ok);
        // fourth family at a=1
        let m = b1_map([(1, 1), (0, 1), (9, 2), (0, 1), (81, 16)]);
        let (ok, _) = check_moduli(BranchLabel::B1, &m).unwrap();
        assert!(ok);
    }

    #[test]
    fn moduli_reject_off_variety_points() {
        let m = b1_map([(1, 1), (1, 1), (1, 1), (1, 1), (1, 1)]);
        let (ok, residuals) = check_moduli(BranchLabel::B1, &m).unwrap();
        assert!(!ok);
        // E1 residual is 0 but E3 residual is 28
        assert!(residuals[0].is_zero());
        assert_eq!(residuals[2], Scalar::from_int(28));
    }

    #[test]
    fn families_satisfy_moduli_symbolically() {
        for branch in [
            BranchLabel::B1,
            BranchLabel::B21,
            BranchLabel::B221,
            BranchLabel::B222,
            BranchLabel::B31,
            BranchLabel::B32,
        ] {
            for fam in enumerate_families(branch) {
                assert!(
                    family_satisfies_moduli(&fam).unwrap(),
                    "family {} fails its moduli equations",
                    fam.id
                );
            }
        }
    }

    #[test]
    fn f1_identity_on_b1_families() {
        // I13 I04 - I40 I31 vanishes identically on every fully-cubic family
        let f1 = parse_inv_poly("I13 I04 - 1 I40 I31").unwrap();
        for fam in enumerate_families(BranchLabel::B1) {
            let r = f1.eval_with(RatFun::from_rational, |v| {
                fam.assignments[&ivar_deg(v)].clone()
            });
            assert!(r.is_zero(), "family {}", fam.id);
        }
    }

    #[test]
    fn match_inverts_assignments() {
        let nf_stub = |tuple: BTreeMap<(usize, usize), Scalar>| NormalForm {
            branch: BranchLabel::B1,
            series: crate::series::Series2::zero(4),
            invariants: tuple,
            decided_to_order: 4,
            transform: Default::default(),
            residual_stabilizer: String::new(),
        };
        let m = nf_stub(b1_map([(1, 1), (-6, 1), (0, 1), (-2, 1), (3, 1)]));
        let res = match_model(&m).unwrap();
        assert!(res
            .iter()
            .any(|r| r.family == "N1"
                && r.params[&'a'] == Scalar::from_int(1)
                && r.params[&'b'] == Scalar::from_int(3)));
        // overlap point (0,-9,-9,-9,0) matches both parameterized cubic families
        let m = nf_stub(b1_map([(0, 1), (-9, 1), (-9, 1), (-9, 1), (0, 1)]));
        let res = match_model(&m).unwrap();
        let names: Vec<_> = res.iter().map(|r| r.family).collect();
        assert!(names.contains(&"N2") && names.contains(&"N3"), "{names:?}");
    }

    #[test]
    fn quartic_cross_model_is_homogeneous() {
        let s = SurfaceGraph::from_expr("2-2*sqrt(1-x*y)", 8).unwrap();
        let v = is_homogeneous_mode(&s, 8, 3, crate::expr::Mode::Approx).unwrap();
        assert!(v.pass, "witness: {:?}", v.witness);
        assert!(v.matches.iter().any(|m| m.family == "N9"));
    }

    #[test]
    fn cubic_ruled_is_homogeneous() {
        let s = SurfaceGraph::from_expr("x*y+x^3/6", 8).unwrap();
        let v = is_homogeneous(&s, 8, 3).unwrap();
        assert!(v.pass, "witness: {:?}", v.witness);
        assert!(v.matches.iter().any(|m| m.family == "N8"));
    }

    #[test]
    fn quartic_perturbation_fails_homogeneity() {
        // tuple (1,0,0,0,0): the frame bracket does not close
        let s = SurfaceGraph::from_expr("x*y + x^3/6 + y^3/6 + x^4/24", 8).unwrap();
        let v = is_homogeneous(&s, 8, 3).unwrap();
        assert!(!v.pass);
        assert!(v.witness.unwrap().contains("bracket"));
    }
}
