//! Self-contained verification suite: each criterion exercises one pillar
//! of the pipeline end to end and reports pass/fail with a human-readable
//! detail string. Shared between the CLI `verify` command and the
//! integration tests.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::expr::Mode;
use crate::homogeneity::{
    self, enumerate_families, family_invariants, moduli_equations, ModelFamily,
};
use crate::jets::{self, compatibility_obstructions, jet_var, Dir, EpsElem, JetFrac, SubjetSolver};
use crate::normalform::{self, BranchLabel, NormalForm};
use crate::poly::Var;
use crate::recurrence::{
    self, default_b1_unknowns, eliminate_homogeneous, ideals_match, ivar, ivar_deg,
};
use crate::relinv;
use crate::scalar::Scalar;
use crate::series::{Series2, SurfaceGraph};
use crate::symmetry::{
    bracket_closure_residual, frame_fields, lie_bracket, orbit_surface, tangency_defect,
    AffineVectorField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Outcome of one verification criterion.
#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

pub const CRITERION_COUNT: usize = 10;

pub fn run_all() -> Vec<CriterionResult> {
    (1..=CRITERION_COUNT).map(run_one).collect()
}

pub fn run_one(id: usize) -> CriterionResult {
    let (name, out) = match id {
        1 => ("ten-model classification", c1()),
        2 => ("elimination identity", c2()),
        3 => ("family identities", c3()),
        4 => ("compatibility numbers", c4()),
        5 => ("symmetry verification", c5()),
        6 => ("bracket iff-condition", c6()),
        7 => ("Pick consistency", c7()),
        8 => ("orbit round trips", c8()),
        9 => ("homogeneous constancy", c9()),
        10 => ("property suites", c10()),
        _ => ("unknown", Err(Error::UnsupportedBranch(format!("criterion {id}")))),
    };
    match out {
        Ok((pass, detail)) => CriterionResult { id, name, pass, detail },
        Err(e) => CriterionResult { id, name, pass: false, detail: format!("error: {e}") },
    }
}

type Check = Result<(bool, String)>;

// ---------------------------------------------------------------------------
// model construction helpers

/// The canonical parameter samples used throughout the suite.
pub fn sample_params(id: &str) -> BTreeMap<char, Scalar> {
    let mut m = BTreeMap::new();
    match id {
        "N1" => {
            m.insert('a', Scalar::from_int(1));
            m.insert('b', Scalar::from_int(2));
        }
        "N2" | "N3" => {
            m.insert('b', Scalar::from_int(1));
        }
        "N4" => {
            m.insert('a', Scalar::from_int(1));
        }
        "N5" => {
            m.insert('t', Scalar::from_int(1));
        }
        "N6" => {
            m.insert('s', Scalar::from_int(1));
        }
        _ => {}
    }
    m
}

pub fn find_family(id: &str) -> Option<ModelFamily> {
    for b in [
        BranchLabel::B1,
        BranchLabel::B21,
        BranchLabel::B221,
        BranchLabel::B222,
        BranchLabel::B31,
        BranchLabel::B32,
    ] {
        for f in enumerate_families(b) {
            if f.id == id {
                return Some(f);
            }
        }
    }
    None
}

/// Build the model series for a catalog entry: closed form when one is
/// recorded, otherwise the surface swept by the frame of the instantiated
/// family invariants. Returns the series and the expected branch.
pub fn model_surface(
    id: &str,
    params: &BTreeMap<char, Scalar>,
    order: usize,
) -> Result<(Series2<Scalar>, BranchLabel)> {
    let fam = find_family(id)
        .ok_or_else(|| Error::UnsupportedBranch(format!("unknown model {id}")))?;
    if let Some(cf) = fam.closed_form {
        return Ok((SurfaceGraph::from_expr(cf, order)?.series, fam.branch));
    }
    let inv = family_invariants(&fam, params)?;
    let f = frame_fields(fam.branch, &inv)?;
    let s = sweep_any_pair(&f, order)?;
    Ok((s, fam.branch))
}

/// Sweep the orbit using the first frame pair whose flows are transverse
/// at the origin.
pub fn sweep_any_pair(f: &[AffineVectorField], order: usize) -> Result<Series2<Scalar>> {
    let mut last = Error::DegenerateFrame;
    for i in 0..f.len() {
        for j in (i + 1)..f.len() {
            match orbit_surface(&f[i], &f[j], order) {
                Ok(s) => return Ok(s),
                Err(Error::DegenerateFrame) => last = Error::DegenerateFrame,
                Err(e) => return Err(e),
            }
        }
    }
    Err(last)
}

fn params_text(p: &BTreeMap<char, Scalar>) -> String {
    p.iter()
        .map(|(k, v)| format!("{k}={}", v.encode()))
        .collect::<Vec<_>>()
        .join(",")
}

// ---------------------------------------------------------------------------
// criterion 1: ten-model classification

const MODEL_IDS: [&str; 10] = ["N1", "N2", "N3", "N4", "N5", "N6", "N7", "N8", "N9", "N10"];

fn c1() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for id in MODEL_IDS {
        let params = sample_params(id);
        let (series, want_branch) = model_surface(id, &params, 8)?;
        let nf = normalform::classify(&SurfaceGraph::at_origin(series), 8)?;
        if nf.branch != want_branch {
            ok = false;
            notes.push(format!(
                "{id}({}): classified to {} instead of {}",
                params_text(&params),
                nf.branch.as_str(),
                want_branch.as_str()
            ));
            continue;
        }
        let matches = homogeneity::match_model(&nf)?;
        let hit = matches
            .iter()
            .any(|m| m.family == id && m.params == params);
        if !hit {
            ok = false;
            notes.push(format!(
                "{id}({}): catalog match missing; got {:?}",
                params_text(&params),
                matches
                    .iter()
                    .map(|m| format!("{}({})", m.family, params_text(&m.params)))
                    .collect::<Vec<_>>()
            ));
        }
    }
    if ok {
        notes.push("all ten models classify to their branch with exact invariant match".into());
    }
    Ok((ok, notes.join("; ")))
}

// ---------------------------------------------------------------------------
// criterion 2: elimination identity

fn c2() -> Check {
    let t = recurrence::table(BranchLabel::B1)?;
    let conds = eliminate_homogeneous(&t, &default_b1_unknowns());
    let four = conds.len() == 4;
    let matched = ideals_match(&conds, &moduli_equations(BranchLabel::B1)?, 2);
    let free = conds.iter().all(|c| {
        c.variables()
            .iter()
            .all(|&v| v != ivar(5, 0) && v != ivar(0, 5))
    });
    let ok = four && matched && free;
    Ok((
        ok,
        format!(
            "conditions: {} (want 4); ideal matches catalog at degree<=2: {matched}; \
             I5,0/I0,5 eliminated: {free}",
            conds.len()
        ),
    ))
}

// ---------------------------------------------------------------------------
// criterion 3: family identities

fn c3() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    for b in [BranchLabel::B1, BranchLabel::B21] {
        for fam in enumerate_families(b) {
            if fam.assignments.is_empty() {
                continue;
            }
            let sat = homogeneity::family_satisfies_moduli(&fam)?;
            if !sat {
                ok = false;
                notes.push(format!("{} fails its branch identities symbolically", fam.id));
            }
        }
    }
    if ok {
        notes.push(
            "all continuous families satisfy their branch moduli identities in the parameters"
                .into(),
        );
    }
    Ok((ok, notes.join("; ")))
}

// ---------------------------------------------------------------------------
// criterion 4: compatibility numbers

fn mono(parts: &[(usize, usize, u32)]) -> Vec<(Var, u32)> {
    let mut m: Vec<(Var, u32)> = parts.iter().map(|&(j, k, e)| (jet_var(j, k), e)).collect();
    m.sort_unstable_by_key(|&(v, _)| v);
    m
}

fn coeff_of(p: &EpsElem, parts: &[(usize, usize, u32)]) -> Scalar {
    p.terms
        .get(&mono(parts))
        .cloned()
        .unwrap_or_else(Scalar::zero)
}

fn c4() -> Check {
    let mut solver = SubjetSolver::new(4, true)?;
    let u33 = jets::restrict_to_free(&solver.solve_dependent(3, 3)?);
    let want_u33 = {
        let mut e = EpsElem {
            trunc: 4,
            terms: BTreeMap::new(),
        };
        e.add_term(mono(&[(2, 2, 2)]), Scalar::from_ratio(9, 2));
        e
    };
    let first = u33.terms == want_u33.terms;

    let obs = compatibility_obstructions(4, 6)?;
    // u43: 15 vs 12 on u22*u32
    let a = coeff_of(&obs[0].via03, &[(2, 2, 1), (3, 2, 1)]);
    let b = coeff_of(&obs[0].via40, &[(2, 2, 1), (3, 2, 1)]);
    let second = a == Scalar::from_int(15) && b == Scalar::from_int(12);
    // u53: (135/2, 15) vs (75, 12) on (u22^2 u31, u32^2)
    let p = [
        coeff_of(&obs[1].via03, &[(2, 2, 2), (3, 1, 1)]),
        coeff_of(&obs[1].via03, &[(3, 2, 2)]),
        coeff_of(&obs[1].via40, &[(2, 2, 2), (3, 1, 1)]),
        coeff_of(&obs[1].via40, &[(3, 2, 2)]),
    ];
    let third = p[0] == Scalar::from_ratio(135, 2)
        && p[1] == Scalar::from_int(15)
        && p[2] == Scalar::from_int(75)
        && p[3] == Scalar::from_int(12);
    // u63: 945/4 vs 225 on u22^3
    let g = coeff_of(&obs[2].via03, &[(2, 2, 3)]);
    let h = coeff_of(&obs[2].via40, &[(2, 2, 3)]);
    let fourth = g == Scalar::from_ratio(945, 4) && h == Scalar::from_int(225);
    // the successive differences force u32 = 0, then u22 = 0
    let forcing = !obs[0].difference.terms.is_empty() && !obs[2].difference.terms.is_empty();

    let ok = first && second && third && fourth && forcing;
    Ok((
        ok,
        format!(
            "u33 = 9/2 u22^2: {first}; u43 15-vs-12: {second}; \
             u53 135/2+15-vs-75+12: {third}; u63 945/4-vs-225: {fourth}; \
             nonzero differences force u32 = u22 = 0: {forcing}"
        ),
    ))
}

// ---------------------------------------------------------------------------
// criterion 5: symmetry verification

fn defects_zero(fields: &[AffineVectorField], s: &Series2<Scalar>, n: usize) -> Result<Vec<bool>> {
    fields
        .iter()
        .map(|f| Ok(tangency_defect(f, s, n)?.is_zero()))
        .collect()
}

fn c5() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    // continuous branches: frame tangency on the swept series through order 8
    for id in ["N1", "N2", "N3", "N4", "N5", "N6"] {
        let params = sample_params(id);
        let fam = find_family(id).unwrap();
        let inv = family_invariants(&fam, &params)?;
        let f = frame_fields(fam.branch, &inv)?;
        let s = sweep_any_pair(&f, 9)?;
        let d = defects_zero(&f, &s, 8)?;
        let closed = bracket_closure_residual(fam.branch, &inv)?.is_zero();
        if d.iter().all(|&z| z) && closed {
            notes.push(format!("{id}: tangent+closed"));
        } else {
            ok = false;
            notes.push(format!(
                "{id}({}): field tangency through order 8 = {d:?}, bracket closes = {closed} \
                 (the generic-branch catalog tuples do not close; see README discrepancy notes)",
                params_text(&params)
            ));
        }
    }
    // fixed models: tangency on the closed forms plus structure constants
    let one = Scalar::from_int(1);
    let fixed: [(&str, BranchLabel); 4] = [
        ("N7", BranchLabel::B221),
        ("N8", BranchLabel::B222),
        ("N9", BranchLabel::B31),
        ("N10", BranchLabel::B32),
    ];
    for (id, b) in fixed {
        let fam = find_family(id).unwrap();
        let s = SurfaceGraph::from_expr(fam.closed_form.unwrap(), 9)?.series;
        let f = frame_fields(b, &BTreeMap::new())?;
        let d = defects_zero(&f, &s, 8)?;
        if !d.iter().all(|&z| z) {
            ok = false;
            notes.push(format!("{id}: tangency through order 8 = {d:?}"));
        }
        let rels_ok = match id {
            "N7" => lie_bracket(&f[0], &f[1]).is_zero(),
            "N8" => {
                lie_bracket(&f[0], &f[2]).sub(&f[0]).is_zero()
                    && lie_bracket(&f[1], &f[2])
                        .sub(&f[1].scalar_mul(&Scalar::from_int(2)))
                        .is_zero()
            }
            "N9" => {
                lie_bracket(&f[0], &f[1]).sub(&f[1]).is_zero()
                    && lie_bracket(&f[0], &f[2])
                        .sub(&f[2].scalar_mul(&one.neg()))
                        .is_zero()
                    && lie_bracket(&f[1], &f[2])
                        .sub(&f[0].scalar_mul(&Scalar::from_int(-2)))
                        .is_zero()
            }
            _ => true,
        };
        if !rels_ok {
            ok = false;
            notes.push(format!("{id}: structure constants mismatch"));
        }
    }
    if ok {
        notes.push("all printed fields tangent and all structure constants reproduced".into());
    }
    Ok((ok, notes.join("; ")))
}

// ---------------------------------------------------------------------------
// criterion 6: bracket iff-condition

fn b1_point(rng: &mut ChaCha8Rng) -> BTreeMap<(usize, usize), Scalar> {
    homogeneity::B1_SLOTS
        .iter()
        .map(|&s| {
            (
                s,
                Scalar::from_ratio(rng.gen_range(-6..=6), 1 + rng.gen_range(0..4)),
            )
        })
        .collect()
}

fn c6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let mut notes = Vec::new();
    let mut ok = true;

    // five random points of the degree-4 moduli variety of the generic
    // branch, drawn from the continuous families
    let mut on_failures = Vec::new();
    for i in 0..5 {
        let fam = find_family(["N1", "N2", "N3", "N4", "N1"][i]).unwrap();
        let mut params = BTreeMap::new();
        for &p in &fam.params {
            params.insert(p, Scalar::from_ratio(rng.gen_range(1..=5), 1 + rng.gen_range(0..3)));
        }
        let inv = family_invariants(&fam, &params)?;
        let (moduli_ok, _) = homogeneity::check_moduli(BranchLabel::B1, &inv)?;
        let closed = bracket_closure_residual(BranchLabel::B1, &inv)?.is_zero();
        if moduli_ok && !closed {
            on_failures.push(format!("{}({})", fam.id, params_text(&params)));
        }
    }
    if !on_failures.is_empty() {
        ok = false;
        notes.push(format!(
            "generic branch: residual is NONZERO on moduli-variety points {:?} — the closure \
             variety and the degree-4 moduli variety differ (see README discrepancy notes)",
            on_failures
        ));
    }
    // five random points off the variety: residual must be nonzero
    let mut off_ok = true;
    let mut seen = 0;
    while seen < 5 {
        let inv = b1_point(&mut rng);
        let (moduli_ok, _) = homogeneity::check_moduli(BranchLabel::B1, &inv)?;
        if moduli_ok {
            continue;
        }
        seen += 1;
        if bracket_closure_residual(BranchLabel::B1, &inv)?.is_zero() {
            off_ok = false;
        }
    }
    if !off_ok {
        ok = false;
        notes.push("generic branch: residual vanished off the variety".into());
    } else {
        notes.push("generic branch: residual nonzero on 5 off-variety points".into());
    }

    // degenerate branch: the analog holds on both sides
    let mut b21_ok = true;
    for i in 0..5 {
        let fam = find_family(if i % 2 == 0 { "N5" } else { "N6" }).unwrap();
        let mut params = BTreeMap::new();
        for &p in &fam.params {
            params.insert(p, Scalar::from_ratio(rng.gen_range(-6..=6), 1 + rng.gen_range(0..3)));
        }
        let inv = family_invariants(&fam, &params)?;
        if !bracket_closure_residual(BranchLabel::B21, &inv)?.is_zero() {
            b21_ok = false;
        }
    }
    let mut seen = 0;
    while seen < 5 {
        let inv: BTreeMap<_, _> = homogeneity::B21_SLOTS
            .iter()
            .map(|&s| {
                (
                    s,
                    Scalar::from_ratio(rng.gen_range(-6..=6), 1 + rng.gen_range(0..4)),
                )
            })
            .collect();
        let (moduli_ok, _) = homogeneity::check_moduli(BranchLabel::B21, &inv)?;
        if moduli_ok {
            continue;
        }
        seen += 1;
        if bracket_closure_residual(BranchLabel::B21, &inv)?.is_zero() {
            b21_ok = false;
        }
    }
    if b21_ok {
        notes.push("degenerate branch: residual vanishes on 5 family points, nonzero on 5 off".into());
    } else {
        ok = false;
        notes.push("degenerate branch: iff-condition failed".into());
    }
    Ok((ok, notes.join("; ")))
}

// ---------------------------------------------------------------------------
// criterion 7: Pick consistency

fn random_rank2_jet(rng: &mut ChaCha8Rng, order: usize) -> Series2<Scalar> {
    loop {
        let mut s = Series2::zero(order);
        for j in 0..=order {
            for k in 0..=(order - j) {
                if j + k < 2 {
                    continue;
                }
                // sparse small-denominator jets keep the radical towers shallow
                if j + k > 2 && rng.gen_range(0..3) != 0 {
                    continue;
                }
                s.set_fjk(j, k, Scalar::from_ratio(rng.gen_range(-5..=5), 1 + rng.gen_range(0..2)));
            }
        }
        if !relinv::hessian_h2(&s).is_zero() && !s.fjk(3, 0).is_zero() {
            return s;
        }
    }
}

fn c7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sign: Option<i32> = None;
    let mut done = 0;
    let mut i30_done = 0;
    while done < 20 {
        let s = random_rank2_jet(&mut rng, 4);
        let (lhs, rhs, sg) = match relinv::pick_factorization_check(&s) {
            Ok(v) => v,
            Err(_) => continue, // bad-position jet; draw another
        };
        if sg == 0 {
            return Ok((
                false,
                format!(
                    "factorization mismatch: lhs {} vs rhs {}",
                    lhs.encode(),
                    rhs.encode()
                ),
            ));
        }
        match sign {
            None => sign = Some(sg),
            Some(prev) if prev != sg => {
                return Ok((false, "sign constant not global".into()));
            }
            _ => {}
        }
        done += 1;
    }
    while i30_done < 20 {
        let s = random_rank2_jet(&mut rng, 4);
        let (pipeline, printed) = match (relinv::prenormalize(&s), relinv::rel_i30(&s)) {
            (Ok(p), Ok(v)) => (p.series.fjk(3, 0), v),
            _ => continue,
        };
        if !pipeline.sub(&printed).is_zero() {
            return Ok((false, "order-3 relative invariant disagrees with pipeline".into()));
        }
        i30_done += 1;
    }
    Ok((
        true,
        format!(
            "factorization holds on 20 jets with global sign {:+}; \
             order-3 invariant matches pipeline on 20 jets",
            sign.unwrap()
        ),
    ))
}

// ---------------------------------------------------------------------------
// criterion 8: orbit round trips

fn c8() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    for id in ["N1", "N4", "N8", "N9"] {
        let params = sample_params(id);
        let fam = find_family(id).unwrap();
        let f = if fam.closed_form.is_some() {
            frame_fields(fam.branch, &BTreeMap::new())?
        } else {
            frame_fields(fam.branch, &family_invariants(&fam, &params)?)?
        };
        let s = sweep_any_pair(&f, 8)?;
        let nf = normalform::classify(&SurfaceGraph::at_origin(s), 8)?;
        if nf.branch != fam.branch {
            ok = false;
            notes.push(format!("{id}: branch drifted to {}", nf.branch.as_str()));
            continue;
        }
        if let Some(cf) = fam.closed_form {
            let want = normalform::classify(&SurfaceGraph::from_expr(cf, 8)?, 8)?;
            if nf.invariants != want.invariants {
                ok = false;
                notes.push(format!("{id}: swept invariants differ from the closed form"));
            }
        } else {
            let matches = homogeneity::match_model(&nf)?;
            if !matches.iter().any(|m| m.family == id && m.params == params) {
                ok = false;
                notes.push(format!("{id}: round trip lost the parameters"));
            }
        }
    }
    if ok {
        notes.push("classification inverts the orbit construction on all four models".into());
    }
    Ok((ok, notes.join("; ")))
}

// ---------------------------------------------------------------------------
// criterion 9: homogeneous constancy

fn c9() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for id in ["N9", "N7"] {
        let fam = find_family(id).unwrap();
        let s = SurfaceGraph::from_expr(fam.closed_form.unwrap(), 8)?;
        let v = homogeneity::is_homogeneous_mode(&s, 8, 5, Mode::Approx)?;
        if v.pass && v.matches.iter().any(|m| m.family == id) {
            notes.push(format!("{id}: invariants constant at 5 sampled basepoints"));
        } else {
            ok = false;
            notes.push(format!("{id}: {:?}", v.witness));
        }
    }
    Ok((ok, notes.join("; ")))
}

// ---------------------------------------------------------------------------
// criterion 10: property suites

const CASES: usize = 1000;

fn random_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    let base = Scalar::from_ratio(rng.gen_range(-9..=9), 1 + rng.gen_range(0..5));
    if rng.gen_range(0..4) == 0 {
        // adjoin a radical now and then to exercise the extension tower
        let r = Scalar::from_ratio(rng.gen_range(1..=7), 1 + rng.gen_range(0..3));
        if let Ok(sq) = r.sqrt() {
            return base.add(&sq);
        }
    }
    base
}

fn scalar_axioms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..CASES {
        let (a, b, c) = (
            random_scalar(&mut rng),
            random_scalar(&mut rng),
            random_scalar(&mut rng),
        );
        if !a.add(&b).sub(&b.add(&a)).is_zero() {
            return Ok((false, "addition not commutative".into()));
        }
        if !a.add(&b).add(&c).sub(&a.add(&b.add(&c))).is_zero() {
            return Ok((false, "addition not associative".into()));
        }
        if !a.mul(&b.add(&c)).sub(&a.mul(&b).add(&a.mul(&c))).is_zero() {
            return Ok((false, "multiplication not distributive".into()));
        }
        if !a.mul(&b).sub(&b.mul(&a)).is_zero() {
            return Ok((false, "multiplication not commutative".into()));
        }
        if !a.is_zero() {
            let q = b.div(&a)?;
            if !q.mul(&a).sub(&b).is_zero() {
                return Ok((false, "division does not invert multiplication".into()));
            }
        }
    }
    Ok((true, String::new()))
}

fn random_series(rng: &mut ChaCha8Rng, order: usize) -> Series2<Scalar> {
    let mut s = Series2::zero(order);
    for j in 0..=order {
        for k in 0..=(order - j) {
            s.set(
                j,
                k,
                Scalar::from_ratio(rng.gen_range(-4..=4), 1 + rng.gen_range(0..3)),
            );
        }
    }
    s
}

fn substitution_round_trips() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..CASES {
        let mut s = random_series(&mut rng, 4);
        // the shift re-centers on the graph value, so compare at zero constant
        s.set(0, 0, Scalar::zero());
        let a = Scalar::from_ratio(rng.gen_range(-3..=3), 1 + rng.gen_range(0..2));
        let b = Scalar::from_ratio(rng.gen_range(-3..=3), 1 + rng.gen_range(0..2));
        let mut back = s.taylor_shift(&a, &b).taylor_shift(&a.neg(), &b.neg());
        back.set(0, 0, Scalar::zero());
        if !back.sub(&s)?.is_zero() {
            return Ok((false, "shift round trip failed".into()));
        }
        // linear substitution and its inverse
        let c = Scalar::from_ratio(1 + rng.gen_range(0..4), 1 + rng.gen_range(0..3));
        let xs = Series2::var_x(4).scale(&c);
        let ys = Series2::var_y(4);
        let xi = Series2::var_x(4).scale(&Scalar::from_int(1).div(&c)?);
        let fwd = s.substitute(&xs, &ys)?;
        if !fwd.substitute(&xi, &ys)?.sub(&s)?.is_zero() {
            return Ok((false, "scaling round trip failed".into()));
        }
        // swap twice
        if !s.swap_xy().swap_xy().sub(&s)?.is_zero() {
            return Ok((false, "swap round trip failed".into()));
        }
    }
    Ok((true, String::new()))
}

fn random_jetfrac(rng: &mut ChaCha8Rng) -> JetFrac {
    let mut p = JetFrac::zero();
    for _ in 0..3 {
        let t = JetFrac::var(rng.gen_range(0..4), rng.gen_range(0..4))
            .mul(&JetFrac::var(rng.gen_range(0..4), rng.gen_range(0..4)));
        p = p.add(&t);
    }
    p
}

fn derivative_commutation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..CASES {
        let p = random_jetfrac(&mut rng);
        let xy = jets::total_derivative(&jets::total_derivative(&p, Dir::X), Dir::Y);
        let yx = jets::total_derivative(&jets::total_derivative(&p, Dir::Y), Dir::X);
        if !xy.equal(&yx) {
            return Ok((false, "total derivatives do not commute".into()));
        }
    }
    Ok((true, String::new()))
}

fn jacobi() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..CASES {
        let mut f = || {
            let mut v = AffineVectorField::zero();
            for i in 0..3 {
                v.cst[i] = Scalar::from_ratio(rng.gen_range(-4..=4), 1 + rng.gen_range(0..3));
                for j in 0..3 {
                    v.lin[i][j] =
                        Scalar::from_ratio(rng.gen_range(-4..=4), 1 + rng.gen_range(0..3));
                }
            }
            v
        };
        let (a, b, c) = (f(), f(), f());
        let s = lie_bracket(&a, &lie_bracket(&b, &c))
            .sub(&lie_bracket(&lie_bracket(&a, &b), &c))
            .sub(&lie_bracket(&b, &lie_bracket(&a, &c)));
        if !s.is_zero() {
            return Ok((false, "Jacobi identity failed".into()));
        }
    }
    Ok((true, String::new()))
}

/// The generic-branch recurrence table is symmetric under exchanging the
/// two directions together with transposing every invariant index.
fn table_conjugation() -> Check {
    let t = recurrence::table(BranchLabel::B1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    // collect all invariant indices the table mentions
    let mut idx: Vec<(usize, usize)> = Vec::new();
    for e in &t.eqs {
        for v in e.rhs.variables() {
            let d = ivar_deg(v);
            if !idx.contains(&d) {
                idx.push(d);
            }
        }
        if !idx.contains(&e.target) {
            idx.push(e.target);
        }
    }
    for _ in 0..CASES {
        let vals: BTreeMap<(usize, usize), Scalar> = idx
            .iter()
            .map(|&d| {
                (
                    d,
                    Scalar::from_ratio(rng.gen_range(-5..=5), 1 + rng.gen_range(0..3)),
                )
            })
            .collect();
        let direct = |v: Var| vals.get(&ivar_deg(v)).cloned().unwrap_or_else(Scalar::zero);
        let flipped = |v: Var| {
            let (j, k) = ivar_deg(v);
            vals.get(&(k, j)).cloned().unwrap_or_else(Scalar::zero)
        };
        for e in &t.eqs {
            // the mirror of D_dir I_{j,k} is D_dir' I_{k,j}
            let (mj, mk) = (e.target.1, e.target.0);
            let mdir = match e.dir {
                Dir::X => Dir::Y,
                Dir::Y => Dir::X,
            };
            let Some(m) = t
                .eqs
                .iter()
                .find(|f| f.dir == mdir && f.target == (mj, mk))
            else {
                return Ok((
                    false,
                    format!("no mirror line for ({},{})", e.target.0, e.target.1),
                ));
            };
            let lhs = e.rhs.eval_with(Scalar::from_rational, direct);
            let rhs = m.rhs.eval_with(Scalar::from_rational, flipped);
            if !lhs.sub(&rhs).is_zero() {
                return Ok((
                    false,
                    format!(
                        "conjugation symmetry broken at line for ({},{})",
                        e.target.0, e.target.1
                    ),
                ));
            }
        }
    }
    Ok((true, String::new()))
}

fn c10() -> Check {
    let suites: [(&str, fn() -> Check); 5] = [
        ("scalar axioms", scalar_axioms),
        ("substitution round trips", substitution_round_trips),
        ("total-derivative commutation", derivative_commutation),
        ("Jacobi identity", jacobi),
        ("table conjugation symmetry", table_conjugation),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, f) in suites {
        let (pass, detail) = f()?;
        if pass {
            notes.push(format!("{name}: {CASES} cases"));
        } else {
            ok = false;
            notes.push(format!("{name}: FAILED ({detail})"));
        }
    }
    Ok((ok, notes.join("; ")))
}

// ---------------------------------------------------------------------------

/// Convenience used by the CLI and tests: canonicalized invariants of a
/// classification, with the generic-branch discrete gauge fixed.
pub fn canonical_invariants(nf: &NormalForm) -> Result<BTreeMap<(usize, usize), Scalar>> {
    if nf.branch == BranchLabel::B1 {
        Ok(normalform::canonicalize_discrete(nf)?.invariants)
    } else {
        Ok(nf.invariants.clone())
    }
}
