//! Recurrence tables for the invariant derivatives of the normalized
//! coefficients, stored as symbolic data: differentiation equations
//! "D I_{j,k} = polynomial", commutator coefficients, homogeneous
//! elimination, next-order solving, and a pipeline-based derivative probe.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::jets::Dir;
use crate::normalform::BranchLabel;
use crate::poly::{MultiPoly, Var};
use crate::scalar::Scalar;
use num::BigRational;
use std::collections::{BTreeMap, BTreeSet};

/// Variable id for the invariant symbol I_{j,k}.
pub fn ivar(j: usize, k: usize) -> Var {
    assert!(j < 16 && k < 16);
    (j * 16 + k) as Var
}

pub fn ivar_deg(v: Var) -> (usize, usize) {
    ((v as usize) / 16, (v as usize) % 16)
}

/// One table line: D_dir I_target = rhs.
#[derive(Clone, Debug)]
pub struct RecEq {
    pub dir: Dir,
    pub target: (usize, usize),
    pub rhs: MultiPoly,
}

/// A differentiation table with its commutator coefficients
/// [D_x, D_y] = c1 D_x + c2 D_y.
#[derive(Clone, Debug)]
pub struct RecurrenceTable {
    pub branch: BranchLabel,
    pub eqs: Vec<RecEq>,
    pub c1: MultiPoly,
    pub c2: MultiPoly,
}

// ---------------------------------------------------------------------------
// Checked-in table text and its parser.
// ---------------------------------------------------------------------------

const TABLE_B1: &str = "\
Dx I40 = -8 I13 I40 - 160 I40^2 - 144 I31 + I50
Dy I40 = -32 I04 I40 - 40 I31 I40 - 48 I22 + I41 + 216
Dx I31 = -4 I13 I31 - 32 I31 I40 - 84 I22 + I41 + 216
Dy I31 = -16 I04 I31 - 8 I31^2 - 72 I13 - 72 I40 + I32
Dx I22 = -4 I13 I22 - 16 I22 I40 - 36 I13 + I32
Dy I22 = -16 I04 I22 - 4 I22 I31 - 36 I31 + I23
Dx I13 = -8 I13^2 - 16 I13 I40 - 72 I04 - 72 I31 + I23
Dy I13 = -32 I04 I13 - 4 I13 I31 - 84 I22 + I14 + 216
Dx I04 = -40 I04 I13 - 32 I04 I40 - 48 I22 + I14 + 216
Dy I04 = -160 I04^2 - 8 I04 I31 - 144 I13 + I05
";

const COMM_B1: (&str, &str) = ("2/3 I31 + 4/3 I04", "-4/3 I40 - 2/3 I13");

const TABLE_B21: &str = "\
Dx I31 = I41 + 8 I31^2 - 7/2 I22 + 2 I31 - 2 I50 I31
Dy I31 = 4 I31 I22 + 2 I31^2 - 2 I41 I31 + I32
Dx I22 = 12 I31 I22 - 3 I50 I22 + 4 I22 + I32
Dy I22 = 6 I22^2 + 4 I31 I22 - 3 I41 I22
Dx I50 = I60 + 8 I50 I31 - 5/2 I41 + I50 - 5/2 I31 - 5 I22 - 2 I50^2
Dy I50 = I51 + I50 I31 + 4 I50 I22 - 5/2 I22 - 2 I50 I41
Dx I41 = I51 + 12 I31 I41 - 2 I32 + 3 I41 - 4 I31^2 - 5/2 I22 - 3 I50 I41
Dy I41 = -4 I22 I31 + 6 I22 I41 + 3 I31 I41 - 3 I41^2 + I42
Dx I32 = I42 + 16 I31 I32 + 5 I32 - 17/2 I31 I22 - 4 I50 I32
Dy I32 = 8 I22 I32 + 5 I31 I32 - 4 I32 I41
";

const COMM_B21: (&str, &str) = ("-1 I31 - 2 I22 + I41", "8 I31 + 3 - 2 I50");

/// Parse one side of a table line: signed terms, each a rational coefficient
/// followed by invariant symbols with optional integer exponents.
pub fn parse_inv_poly(text: &str) -> Result<MultiPoly> {
    let mut out = MultiPoly::zero();
    let toks: Vec<&str> = text.split_whitespace().collect();
    let mut i = 0;
    let mut sign = 1i64;
    let mut first = true;
    while i < toks.len() {
        match toks[i] {
            "+" => {
                sign = 1;
                i += 1;
            }
            "-" => {
                sign = -1;
                i += 1;
            }
            _ if first => {}
            _ => {
                return Err(Error::SyntaxError(i, format!("expected sign, got `{}`", toks[i])));
            }
        }
        first = false;
        // one term: optional coefficient then symbols
        let mut coef = BigRational::from_integer(sign.into());
        let mut term = MultiPoly::one();
        let mut any = false;
        while i < toks.len() && toks[i] != "+" && toks[i] != "-" {
            let t = toks[i];
            if let Some(rest) = t.strip_prefix('I') {
                let (base, exp) = match rest.split_once('^') {
                    Some((b, e)) => (
                        b,
                        e.parse::<u32>()
                            .map_err(|_| Error::SyntaxError(i, format!("bad exponent in `{t}`")))?,
                    ),
                    None => (rest, 1),
                };
                if base.len() != 2 {
                    return Err(Error::SyntaxError(i, format!("bad symbol `{t}`")));
                }
                let j = (base.as_bytes()[0] - b'0') as usize;
                let k = (base.as_bytes()[1] - b'0') as usize;
                let mut m = MultiPoly::var(ivar(j, k));
                if exp > 1 {
                    m = m.pow(exp);
                }
                term = term.mul(&m);
                any = true;
            } else {
                let (num, den) = match t.split_once('/') {
                    Some((p, q)) => (
                        p.parse::<i64>()
                            .map_err(|_| Error::SyntaxError(i, format!("bad number `{t}`")))?,
                        q.parse::<i64>()
                            .map_err(|_| Error::SyntaxError(i, format!("bad number `{t}`")))?,
                    ),
                    None => (
                        t.parse::<i64>()
                            .map_err(|_| Error::SyntaxError(i, format!("bad number `{t}`")))?,
                        1,
                    ),
                };
                coef *= BigRational::new(num.into(), den.into());
                any = true;
            }
            i += 1;
        }
        if !any {
            return Err(Error::SyntaxError(i, "empty term".to_string()));
        }
        out = out.add(&term.scale(&coef));
        sign = 1;
    }
    Ok(out)
}

fn parse_table(branch: BranchLabel, text: &str, comm: (&str, &str)) -> Result<RecurrenceTable> {
    let mut eqs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once('=')
            .ok_or_else(|| Error::SyntaxError(0, format!("missing `=` in `{line}`")))?;
        let mut parts = lhs.split_whitespace();
        let dir = match parts.next() {
            Some("Dx") => Dir::X,
            Some("Dy") => Dir::Y,
            other => {
                return Err(Error::SyntaxError(0, format!("bad direction `{other:?}`")));
            }
        };
        let sym = parts
            .next()
            .ok_or_else(|| Error::SyntaxError(0, "missing target".to_string()))?;
        let base = sym
            .strip_prefix('I')
            .ok_or_else(|| Error::SyntaxError(0, format!("bad target `{sym}`")))?;
        let j = (base.as_bytes()[0] - b'0') as usize;
        let k = (base.as_bytes()[1] - b'0') as usize;
        eqs.push(RecEq { dir, target: (j, k), rhs: parse_inv_poly(rhs.trim())? });
    }
    Ok(RecurrenceTable {
        branch,
        eqs,
        c1: parse_inv_poly(comm.0)?,
        c2: parse_inv_poly(comm.1)?,
    })
}

/// The differentiation table for a branch (fully-cubic branch: 10 order-4
/// lines; simply-degenerate branch: 4 order-4 and 6 order-5 lines).
pub fn table(branch: BranchLabel) -> Result<RecurrenceTable> {
    match branch {
        BranchLabel::B1 => parse_table(branch, TABLE_B1, COMM_B1),
        BranchLabel::B21 => parse_table(branch, TABLE_B21, COMM_B21),
        other => Err(Error::UnsupportedBranch(other.as_str().to_string())),
    }
}

impl RecurrenceTable {
    /// The sub-table whose targets have the given total order.
    pub fn restrict_to_order(&self, order: usize) -> RecurrenceTable {
        RecurrenceTable {
            branch: self.branch,
            eqs: self
                .eqs
                .iter()
                .filter(|e| e.target.0 + e.target.1 == order)
                .cloned()
                .collect(),
            c1: self.c1.clone(),
            c2: self.c2.clone(),
        }
    }
}

/// Default elimination unknowns for the fully-cubic branch, in the
/// deterministic order that reproduces the pairing structure.
pub fn default_b1_unknowns() -> Vec<(usize, usize)> {
    vec![(4, 1), (3, 2), (2, 3), (1, 4)]
}

/// Normalize a condition: remove rational content, fix the sign so the
/// first monomial in the deterministic order has positive coefficient.
fn normalize_condition(p: &MultiPoly) -> MultiPoly {
    let q = p.primitive_part();
    if let Some((_, c)) = q.terms.iter().next() {
        if c < &BigRational::from_integer(0.into()) {
            return q.neg();
        }
    }
    q
}

/// Set all left sides to 0 and eliminate each listed unknown that occurs
/// linearly in exactly two equations (their difference is a condition on
/// the lower-order invariants). Equations whose unknown occurs only once
/// merely determine that unknown and contribute no condition; with an empty
/// unknown list the homogeneous equations are returned verbatim.
pub fn eliminate_homogeneous(
    t: &RecurrenceTable,
    unknowns: &[(usize, usize)],
) -> Vec<MultiPoly> {
    let eqs: Vec<MultiPoly> = t.eqs.iter().map(|e| e.rhs.clone()).collect();
    let mut used = vec![false; eqs.len()];
    let mut conditions = Vec::new();
    for &(j, k) in unknowns {
        let v = ivar(j, k);
        let holders: Vec<usize> = (0..eqs.len())
            .filter(|&i| !used[i] && eqs[i].degree_in(v) > 0)
            .collect();
        if holders.len() == 2 {
            let a = &eqs[holders[0]];
            let b = &eqs[holders[1]];
            // both occurrences are linear with constant coefficient
            let ca = a.coeffs_in(v)[1].as_constant();
            let cb = b.coeffs_in(v)[1].as_constant();
            if let (Some(ca), Some(cb)) = (ca, cb) {
                let diff = a.scale(&cb).sub(&b.scale(&ca));
                conditions.push(normalize_condition(&diff));
                used[holders[0]] = true;
                used[holders[1]] = true;
            }
        } else if holders.len() == 1 {
            used[holders[0]] = true;
        }
    }
    if unknowns.is_empty() {
        return eqs.iter().map(normalize_condition).collect();
    }
    conditions
}

/// Exact Q-linear span membership: is `p` a linear combination of
/// {m * g : g in gens, monomial m, deg(m*g) <= degcap}?
pub fn in_span(p: &MultiPoly, gens: &[MultiPoly], degcap: usize) -> bool {
    // collect candidate products
    let vars: BTreeSet<Var> = gens
        .iter()
        .chain(std::iter::once(p))
        .flat_map(|q| q.variables())
        .collect();
    let vars: Vec<Var> = vars.into_iter().collect();
    let mut candidates: Vec<MultiPoly> = Vec::new();
    for g in gens {
        let gd = g.total_degree() as usize;
        if gd > degcap {
            continue;
        }
        let room = degcap - gd;
        // monomials of degree <= room in the variables
        let mut monos: Vec<MultiPoly> = vec![MultiPoly::one()];
        for _ in 0..room {
            let mut next = Vec::new();
            for m in &monos {
                for &v in &vars {
                    next.push(m.mul(&MultiPoly::var(v)));
                }
            }
            monos.extend(next);
        }
        for m in monos {
            candidates.push(m.mul(g));
        }
    }
    // Gaussian elimination over Q on the monomial-coefficient vectors
    let mut basis: Vec<BTreeMap<Vec<(Var, u32)>, BigRational>> = Vec::new();
    let mut target: BTreeMap<Vec<(Var, u32)>, BigRational> = p
        .terms
        .iter()
        .map(|(m, c)| (m.clone(), c.clone()))
        .collect();
    let reduce = |vset: &mut BTreeMap<Vec<(Var, u32)>, BigRational>,
                  basis: &Vec<BTreeMap<Vec<(Var, u32)>, BigRational>>| {
        for b in basis {
            if let Some((lead, lc)) = b.iter().next() {
                if let Some(c) = vset.get(lead).cloned() {
                    let f = c / lc.clone();
                    for (m, bc) in b {
                        let e = vset.entry(m.clone()).or_insert_with(|| {
                            BigRational::from_integer(0.into())
                        });
                        *e -= f.clone() * bc.clone();
                    }
                    vset.retain(|_, c| *c != BigRational::from_integer(0.into()));
                }
            }
        }
    };
    for c in candidates {
        let mut vset: BTreeMap<Vec<(Var, u32)>, BigRational> = c
            .terms
            .iter()
            .map(|(m, cc)| (m.clone(), cc.clone()))
            .collect();
        reduce(&mut vset, &basis);
        if !vset.is_empty() {
            basis.push(vset);
            basis.sort_by(|a, b| a.keys().next().cmp(&b.keys().next()));
        }
    }
    reduce(&mut target, &basis);
    target.is_empty()
}

/// Mutual span membership of two condition sets at the given degree cap.
pub fn ideals_match(a: &[MultiPoly], b: &[MultiPoly], degcap: usize) -> bool {
    a.iter().all(|p| in_span(p, b, degcap)) && b.iter().all(|p| in_span(p, a, degcap))
}

/// Evaluate an invariant polynomial on a value map (missing symbols are the
/// unknowns; the caller guarantees they do not occur).
fn eval_poly(p: &MultiPoly, vals: &BTreeMap<(usize, usize), Scalar>) -> Result<Scalar> {
    for v in p.variables() {
        let (j, k) = ivar_deg(v);
        if !vals.contains_key(&(j, k)) {
            return Err(Error::Other(format!("missing value for I{j}{k}")));
        }
    }
    Ok(p.eval_with(Scalar::from_rational, |v| {
        let d = ivar_deg(v);
        vals[&d].clone()
    }))
}

/// Solve each table line for its unique next-order unknown given values for
/// the table invariants and their D-derivatives; cross-check every unknown
/// that is determined more than once.
pub fn solve_next_order(
    t: &RecurrenceTable,
    inv: &BTreeMap<(usize, usize), Scalar>,
    derivs: &BTreeMap<(char, (usize, usize)), Scalar>,
) -> Result<BTreeMap<(usize, usize), Scalar>> {
    let mut solved: BTreeMap<(usize, usize), Scalar> = BTreeMap::new();
    // iterate until no equation with exactly one unresolved unknown remains
    let mut remaining: Vec<&RecEq> = t.eqs.iter().collect();
    loop {
        let mut progress = false;
        let mut next_remaining = Vec::new();
        for eq in remaining {
            let known = |d: (usize, usize)| {
                inv.get(&d).cloned().or_else(|| solved.get(&d).cloned())
            };
            let unknowns: Vec<(usize, usize)> = eq
                .rhs
                .variables()
                .into_iter()
                .map(ivar_deg)
                .filter(|d| known(*d).is_none())
                .collect();
            if unknowns.len() != 1 {
                next_remaining.push(eq);
                continue;
            }
            let u = unknowns[0];
            let v = ivar(u.0, u.1);
            if eq.rhs.degree_in(v) != 1 {
                next_remaining.push(eq);
                continue;
            }
            let parts = eq.rhs.coeffs_in(v);
            let dkey = (if eq.dir == Dir::X { 'x' } else { 'y' }, eq.target);
            let lhs = match derivs.get(&dkey) {
                Some(v) => v.clone(),
                // no derivative value supplied for this line: unusable
                None => continue,
            };
            let vals: BTreeMap<(usize, usize), Scalar> = eq
                .rhs
                .variables()
                .into_iter()
                .map(ivar_deg)
                .filter(|d| *d != u)
                .filter_map(|d| known(d).map(|s| (d, s)))
                .collect();
            let p0 = eval_poly(&parts[0], &vals)?;
            let p1 = eval_poly(&parts[1], &vals)?;
            // lhs = p0 + p1 * unknown
            let val = lhs.sub(&p0).div(&p1)?;
            if let Some(prev) = solved.get(&u) {
                if prev != &val {
                    return Err(Error::InconsistentSystem(format!("I{}{}", u.0, u.1)));
                }
            } else {
                solved.insert(u, val);
            }
            progress = true;
        }
        remaining = next_remaining;
        if remaining.is_empty() {
            // done; but re-run cross-checks on every equation now solvable
            break;
        }
        if !progress {
            break;
        }
    }
    // final cross-check pass over all equations whose symbols are now known
    for eq in &t.eqs {
        let mut vals = inv.clone();
        vals.extend(solved.clone());
        let all_known = eq
            .rhs
            .variables()
            .into_iter()
            .map(ivar_deg)
            .all(|d| vals.contains_key(&d));
        if !all_known {
            continue;
        }
        let dkey = (if eq.dir == Dir::X { 'x' } else { 'y' }, eq.target);
        if let Some(lhs) = derivs.get(&dkey) {
            let rhs = eval_poly(&eq.rhs, &vals)?;
            if lhs != &rhs {
                return Err(Error::InconsistentSystem(format!(
                    "D{}I{}{}",
                    dkey.0, eq.target.0, eq.target.1
                )));
            }
        }
    }
    Ok(solved)
}

// ---------------------------------------------------------------------------
// Derivative probe through the pipeline with a dual displacement parameter.
// ---------------------------------------------------------------------------

use crate::coeff::Dual;
use crate::series::{Series2, SurfaceGraph};

/// Normalized invariants of a surface together with their exact first
/// partials in the normalized basepoint displacement, computed by running
/// the branch pipeline over dual numbers.
pub struct ProbeResult {
    pub branch: BranchLabel,
    pub value: Scalar,
    pub d_dx: Scalar,
    pub d_dy: Scalar,
}

fn dual_pipeline_invariant(
    f: &Series2<Scalar>,
    branch: BranchLabel,
    which: (usize, usize),
    dir: Dir,
) -> Result<Scalar> {
    let eps = Dual { re: Scalar::zero(), inf: Scalar::one() };
    let zero = Dual::constant(Scalar::zero());
    let df: Series2<Dual<Scalar>> = f.map(|c| Dual::constant(c.clone()));
    let (dx, dy) = match dir {
        Dir::X => (eps, zero),
        Dir::Y => (zero, eps),
    };
    let mut g = df.taylor_shift(&dx, &dy);
    g.set(0, 0, Dual::zero());
    if g.order >= 1 {
        g.set(1, 0, Dual::zero());
        g.set(0, 1, Dual::zero());
    }
    let pre = crate::relinv::prenormalize(&g)?;
    let normalized = match branch {
        BranchLabel::B1 => {
            let g30 = pre.series.fjk(3, 0);
            let g03 = pre.series.fjk(0, 3);
            let mu = g30.mul(&g30).mul(&g03).cbrt()?;
            let lambda = mu.mul(&mu).div(&g30)?;
            crate::regraph::scale_regraph(&pre.series, &mu, &lambda)?
        }
        BranchLabel::B21 => {
            let fin = crate::relinv::final_loop_b2(&pre.series)?;
            let mu = fin.fjk(4, 0);
            let lambda = mu.mul(&mu);
            crate::regraph::scale_regraph(&fin, &mu, &lambda)?
        }
        BranchLabel::B31 => {
            let mu = pre.series.fjk(2, 2);
            crate::regraph::scale_regraph(&pre.series, &mu, &Dual::one())?
        }
        other => return Err(Error::UnsupportedBranch(other.as_str().to_string())),
    };
    Ok(normalized.fjk(which.0, which.1).inf)
}

/// Exact partials of a normalized invariant in the basepoint displacement.
/// The identification of the table operators D_x, D_y with these partials
/// is a modeling convention; only the homogeneous case (all partials zero)
/// is branch-independent.
pub fn invariant_derivative_probe(
    surface: &SurfaceGraph,
    which: (usize, usize),
    n: usize,
) -> Result<ProbeResult> {
    let nf = crate::normalform::classify(surface, n)?;
    let mut f = surface.series.to_order(n);
    f.set(0, 0, Scalar::zero());
    if n >= 1 {
        f.set(1, 0, Scalar::zero());
        f.set(0, 1, Scalar::zero());
    }
    let d_dx = dual_pipeline_invariant(&f, nf.branch, which, Dir::X)?;
    let d_dy = dual_pipeline_invariant(&f, nf.branch, which, Dir::Y)?;
    let value = nf
        .invariants
        .get(&which)
        .cloned()
        .unwrap_or_else(Scalar::zero);
    Ok(ProbeResult { branch: nf.branch, value, d_dx, d_dy })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_line_parses_verbatim() {
        let t = table(BranchLabel::B1).unwrap();
        assert_eq!(t.eqs.len(), 10);
        let e = &t.eqs[0];
        assert_eq!(e.dir, Dir::X);
        assert_eq!(e.target, (4, 0));
        let expect = parse_inv_poly("-8 I13 I40 - 160 I40^2 - 144 I31 + I50").unwrap();
        assert!(e.rhs.sub(&expect).is_zero());
    }

    #[test]
    fn b1_table_is_swap_symmetric() {
        // swapping x<->y (I_{j,k} <-> I_{k,j}, Dx <-> Dy) maps the table to itself
        let t = table(BranchLabel::B1).unwrap();
        let swap_poly = |p: &MultiPoly| -> MultiPoly {
            let mut out = MultiPoly::zero();
            for (m, c) in &p.terms {
                let mut m2: Vec<(Var, u32)> = m
                    .iter()
                    .map(|&(v, e)| {
                        let (j, k) = ivar_deg(v);
                        (ivar(k, j), e)
                    })
                    .collect();
                m2.sort_unstable_by_key(|&(v, _)| v);
                out.add_term(m2, c.clone());
            }
            out
        };
        for e in &t.eqs {
            let mirrored_target = (e.target.1, e.target.0);
            let mirrored_dir = if e.dir == Dir::X { Dir::Y } else { Dir::X };
            let partner = t
                .eqs
                .iter()
                .find(|f| f.target == mirrored_target && f.dir == mirrored_dir)
                .expect("conjugate line exists");
            assert!(swap_poly(&e.rhs).sub(&partner.rhs).is_zero());
        }
        // commutator: c1 <-> -c2 under the swap
        assert!(swap_poly(&t.c1).add(&t.c2).is_zero());
    }

    #[test]
    fn b1_elimination_matches_moduli() {
        let t = table(BranchLabel::B1).unwrap();
        let conds = eliminate_homogeneous(&t, &default_b1_unknowns());
        assert_eq!(conds.len(), 4);
        // E1 appears among the conditions
        let e1 = parse_inv_poly("8 I04 I40 - 1 I13 I31 + 2 I31 I40 - 9 I22").unwrap();
        assert!(conds.iter().any(|c| {
            c.sub(&normalize_condition(&e1)).is_zero()
        }));
        // the full set spans the four printed conditions and vice versa
        let printed: Vec<MultiPoly> = [
            "8 I04 I40 - 1 I13 I31 + 2 I31 I40 - 9 I22",
            "2 I04 I13 + 8 I04 I40 - 1 I13 I31 - 9 I22",
            "4 I04 I31 - 1 I13 I22 - 4 I22 I40 + 2 I31^2 + 9 I13 + 18 I40",
            "4 I04 I22 - 2 I13^2 - 4 I13 I40 + I22 I31 - 18 I04 - 9 I31",
        ]
        .iter()
        .map(|s| parse_inv_poly(s).unwrap())
        .collect();
        assert!(ideals_match(&conds, &printed, 2));
        // I50 and I05 stay unconstrained: no condition mentions them
        for c in &conds {
            assert_eq!(c.degree_in(ivar(5, 0)), 0);
            assert_eq!(c.degree_in(ivar(0, 5)), 0);
        }
    }

    #[test]
    fn b21_order4_returns_equations_verbatim() {
        let t = table(BranchLabel::B21).unwrap().restrict_to_order(4);
        assert_eq!(t.eqs.len(), 4);
        let conds = eliminate_homogeneous(&t, &[]);
        assert_eq!(conds.len(), 4);
        let e41 = parse_inv_poly("I41 + 8 I31^2 - 7/2 I22 + 2 I31 - 2 I50 I31").unwrap();
        assert!(conds
            .iter()
            .any(|c| c.sub(&normalize_condition(&e41)).is_zero()));
    }

    #[test]
    fn solve_next_order_homogeneous_family() {
        // fourth normal-form family: I40=a, I04=81/(16a), I22=9/2, I31=I13=0
        let t = table(BranchLabel::B1).unwrap();
        let a = Scalar::from_int(2);
        let mut inv = BTreeMap::new();
        inv.insert((4, 0), a.clone());
        inv.insert((0, 4), Scalar::from_ratio(81, 16).div(&a).unwrap());
        inv.insert((2, 2), Scalar::from_ratio(9, 2));
        inv.insert((3, 1), Scalar::zero());
        inv.insert((1, 3), Scalar::zero());
        let mut derivs = BTreeMap::new();
        for eq in &t.eqs {
            derivs.insert(
                (if eq.dir == Dir::X { 'x' } else { 'y' }, eq.target),
                Scalar::zero(),
            );
        }
        let solved = solve_next_order(&t, &inv, &derivs).unwrap();
        // I50 = 160 a^2 from the first line with D = 0
        assert_eq!(solved[&(5, 0)], Scalar::from_int(160).mul(&a).mul(&a));
    }

    #[test]
    fn solve_next_order_rejects_inconsistent() {
        let t = table(BranchLabel::B1).unwrap();
        let mut inv = BTreeMap::new();
        // random values violating the moduli conditions
        inv.insert((4, 0), Scalar::from_int(1));
        inv.insert((0, 4), Scalar::from_int(2));
        inv.insert((2, 2), Scalar::from_int(3));
        inv.insert((3, 1), Scalar::from_int(4));
        inv.insert((1, 3), Scalar::from_int(5));
        let mut derivs = BTreeMap::new();
        for eq in &t.eqs {
            derivs.insert(
                (if eq.dir == Dir::X { 'x' } else { 'y' }, eq.target),
                Scalar::zero(),
            );
        }
        assert!(matches!(
            solve_next_order(&t, &inv, &derivs),
            Err(Error::InconsistentSystem(_))
        ));
    }

    #[test]
    fn b21_solved_display_for_i41() {
        // I41 = -8 I31^2 + 2 I50 I31 + DxI31 + 7/2 I22 - 2 I31
        let t = table(BranchLabel::B21).unwrap().restrict_to_order(4);
        let mut inv = BTreeMap::new();
        inv.insert((3, 1), Scalar::from_int(2));
        inv.insert((2, 2), Scalar::from_int(4));
        inv.insert((5, 0), Scalar::from_int(3));
        let mut derivs = BTreeMap::new();
        derivs.insert(('x', (3, 1)), Scalar::from_int(7));
        let solved = solve_next_order(&t, &inv, &derivs).unwrap();
        // -8*4 + 2*3*2 + 7 + 7/2*4 - 2*2 = -32+12+7+14-4 = -3
        assert_eq!(solved[&(4, 1)], Scalar::from_int(-3));
    }

    #[test]
    fn probe_vanishes_on_homogeneous_model() {
        // the closed-form quartic-cross model is exactly homogeneous: every
        // normalized invariant is constant in the basepoint
        let s = SurfaceGraph::from_expr("2-2*sqrt(1-x*y)", 8).unwrap();
        let p = invariant_derivative_probe(&s, (3, 3), 8).unwrap();
        assert_eq!(p.branch, BranchLabel::B31);
        assert!(p.d_dx.is_zero() && p.d_dy.is_zero());
        let q = invariant_derivative_probe(&s, (4, 2), 8).unwrap();
        assert!(q.d_dx.is_zero() && q.d_dy.is_zero());
    }

    #[test]
    fn probe_nonzero_on_perturbed_surface() {
        let s = SurfaceGraph::from_expr("x*y + x^3/6 + y^3/6 + x^5*y/120", 10).unwrap();
        let p = invariant_derivative_probe(&s, (4, 0), 10).unwrap();
        assert_eq!(p.branch, BranchLabel::B1);
        assert!(!p.d_dx.is_zero() || !p.d_dy.is_zero());
    }
}
