//! Exact scalars over towers of quadratic extensions of Q, with an
//! arbitrary-precision complex fallback mode.
//!
//! An exact value lives in Q(sqrt(d1),...,sqrt(dt)) where each radicand d_i
//! is an element of the previous level and is never a square there, so the
//! representation is a coordinate tree over Q and zero-testing is structural.
//! Square roots extend the tower on demand up to a depth bound. A limited
//! exact cube root covers rationals, radical monomials, and depth-1 elements;
//! anything else must go through the approximate mode.

use crate::apf::CApf;
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use num::{BigInt, BigRational, One, Signed, Zero};

pub const MAX_TOWER_DEPTH: usize = 4;

/// Element of the k-th tower level: either a rational (depth 0) or
/// `a + b*sqrt(d_k)` with `a`, `b` at depth k-1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Elem {
    Rat(BigRational),
    Quad(Box<Elem>, Box<Elem>),
}

impl Elem {
    fn zero(depth: usize) -> Elem {
        if depth == 0 {
            Elem::Rat(BigRational::zero())
        } else {
            let z = Elem::zero(depth - 1);
            Elem::Quad(Box::new(z.clone()), Box::new(z))
        }
    }

    fn from_rat(r: &BigRational, depth: usize) -> Elem {
        if depth == 0 {
            Elem::Rat(r.clone())
        } else {
            Elem::Quad(Box::new(Elem::from_rat(r, depth - 1)), Box::new(Elem::zero(depth - 1)))
        }
    }

    fn lift(&self, depth: usize) -> Elem {
        Elem::Quad(Box::new(self.clone()), Box::new(Elem::zero(depth)))
    }

    fn is_zero(&self) -> bool {
        match self {
            Elem::Rat(r) => r.is_zero(),
            Elem::Quad(a, b) => a.is_zero() && b.is_zero(),
        }
    }

    /// The rational value, if this element is a constant.
    fn as_rat(&self) -> Option<BigRational> {
        match self {
            Elem::Rat(r) => Some(r.clone()),
            Elem::Quad(a, b) => {
                if b.is_zero() {
                    a.as_rat()
                } else {
                    None
                }
            }
        }
    }
}

fn e_add(a: &Elem, b: &Elem) -> Elem {
    match (a, b) {
        (Elem::Rat(x), Elem::Rat(y)) => Elem::Rat(x + y),
        (Elem::Quad(a1, b1), Elem::Quad(a2, b2)) => {
            Elem::Quad(Box::new(e_add(a1, a2)), Box::new(e_add(b1, b2)))
        }
        _ => panic!("tower depth mismatch"),
    }
}

fn e_neg(a: &Elem) -> Elem {
    match a {
        Elem::Rat(x) => Elem::Rat(-x),
        Elem::Quad(p, q) => Elem::Quad(Box::new(e_neg(p)), Box::new(e_neg(q))),
    }
}

fn e_sub(a: &Elem, b: &Elem) -> Elem {
    e_add(a, &e_neg(b))
}

/// Multiply at depth k over the radicand list (radicands[i] has depth i).
fn e_mul(a: &Elem, b: &Elem, depth: usize, rads: &[Elem]) -> Elem {
    match (a, b) {
        (Elem::Rat(x), Elem::Rat(y)) => Elem::Rat(x * y),
        (Elem::Quad(a1, b1), Elem::Quad(a2, b2)) => {
            let d = &rads[depth - 1];
            let lo = depth - 1;
            let re = e_add(&e_mul(a1, a2, lo, rads), &e_mul(&e_mul(b1, b2, lo, rads), d, lo, rads));
            let im = e_add(&e_mul(a1, b2, lo, rads), &e_mul(b1, a2, lo, rads));
            Elem::Quad(Box::new(re), Box::new(im))
        }
        _ => panic!("tower depth mismatch"),
    }
}

fn e_inv(a: &Elem, depth: usize, rads: &[Elem]) -> Result<Elem> {
    match a {
        Elem::Rat(x) => {
            if x.is_zero() {
                Err(Error::DivisionByZero)
            } else {
                Ok(Elem::Rat(x.recip()))
            }
        }
        Elem::Quad(x, y) => {
            let lo = depth - 1;
            let d = &rads[lo];
            // norm x^2 - y^2 d lives one level down; it vanishes only at 0
            let n = e_sub(&e_mul(x, x, lo, rads), &e_mul(&e_mul(y, y, lo, rads), d, lo, rads));
            let ni = e_inv(&n, lo, rads)?;
            Ok(Elem::Quad(
                Box::new(e_mul(x, &ni, lo, rads)),
                Box::new(e_neg(&e_mul(y, &ni, lo, rads))),
            ))
        }
    }
}

fn rat_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    if r.is_zero() {
        return Some(BigRational::zero());
    }
    let np = r.numer().sqrt();
    let dp = r.denom().sqrt();
    if &(&np * &np) == r.numer() && &(&dp * &dp) == r.denom() {
        Some(BigRational::new(np, dp))
    } else {
        None
    }
}

/// Complete square-root search in the tower: returns some r with r^2 = s,
/// or None when s is not a square in Q(sqrt(d1),...,sqrt(d_depth)).
fn sqrt_in(s: &Elem, depth: usize, rads: &[Elem]) -> Option<Elem> {
    match s {
        Elem::Rat(r) => rat_sqrt(r).map(Elem::Rat),
        Elem::Quad(a, b) => {
            let lo = depth - 1;
            let d = &rads[lo];
            if b.is_zero() {
                if let Some(r) = sqrt_in(a, lo, rads) {
                    return Some(r.lift(lo));
                }
                // maybe sqrt(a) = q * sqrt(d) with q one level down
                let di = e_inv(d, lo, rads).ok()?;
                let q2 = e_mul(a, &di, lo, rads);
                if let Some(q) = sqrt_in(&q2, lo, rads) {
                    return Some(Elem::Quad(Box::new(Elem::zero(lo)), Box::new(q)));
                }
                return None;
            }
            // (x + y sqrt(d))^2 = (x^2 + y^2 d) + 2xy sqrt(d)
            let a2 = e_mul(a, a, lo, rads);
            let b2d = e_mul(&e_mul(b, b, lo, rads), d, lo, rads);
            let m = sqrt_in(&e_sub(&a2, &b2d), lo, rads)?;
            let half = Elem::from_rat(&BigRational::new(1.into(), 2.into()), lo);
            for mm in [m.clone(), e_neg(&m)] {
                let x2 = e_mul(&e_add(a, &mm), &half, lo, rads);
                if let Some(x) = sqrt_in(&x2, lo, rads) {
                    if x.is_zero() {
                        continue;
                    }
                    let inv2x = e_inv(&e_add(&x, &x), lo, rads).ok()?;
                    let y = e_mul(b, &inv2x, lo, rads);
                    let cand = Elem::Quad(Box::new(x), Box::new(y));
                    if e_sub(&e_mul(&cand, &cand, depth, rads), s).is_zero() {
                        return Some(cand);
                    }
                }
            }
            None
        }
    }
}

fn e_to_capf(e: &Elem, depth: usize, rads: &[Elem]) -> CApf {
    match e {
        Elem::Rat(r) => CApf::from_rational(r),
        Elem::Quad(a, b) => {
            let lo = depth - 1;
            let root = e_to_capf(&rads[lo], lo, rads).sqrt();
            e_to_capf(a, lo, rads).add(&e_to_capf(b, lo, rads).mul(&root))
        }
    }
}

/// Exact scalar: coordinates `elem` (depth = rads.len()) over the tower `rads`.
#[derive(Clone, Debug)]
pub struct Exact {
    pub rads: Vec<Elem>,
    pub elem: Elem,
}

impl Exact {
    pub fn from_rational(r: &BigRational) -> Exact {
        Exact { rads: Vec::new(), elem: Elem::Rat(r.clone()) }
    }

    fn depth(&self) -> usize {
        self.rads.len()
    }

    fn to_capf(&self) -> CApf {
        e_to_capf(&self.elem, self.depth(), &self.rads)
    }

    /// Flip to the principal representative: numeric embedding with Re > 0,
    /// or Im > 0 when Re = 0.
    fn principal(self) -> Exact {
        let v = self.to_capf();
        let flip = if !v.re.is_zero() {
            v.re.is_negative()
        } else {
            v.im.is_negative()
        };
        if flip {
            Exact { elem: e_neg(&self.elem), rads: self.rads }
        } else {
            self
        }
    }
}

/// Rewrite `b` over the tower of `a`, extending the tower when a radicand of
/// `b` has no square root there. Returns the shared tower and both elements.
fn merge(a: &Exact, b: &Exact) -> Result<(Vec<Elem>, Elem, Elem)> {
    if a.rads == b.rads {
        return Ok((a.rads.clone(), a.elem.clone(), b.elem.clone()));
    }
    let mut rads = a.rads.clone();
    let mut ea = a.elem.clone();
    // roots[i] = expression of sqrt(b-radicand i) in the merged tower
    let mut roots: Vec<Elem> = Vec::new();

    // express an Elem of b's tower (depth bd) in the merged tower
    fn reexpress(e: &Elem, bd: usize, roots: &[Elem], rads: &[Elem]) -> Elem {
        match e {
            Elem::Rat(r) => Elem::from_rat(r, rads.len()),
            Elem::Quad(p, q) => {
                let pe = reexpress(p, bd - 1, roots, rads);
                let qe = reexpress(q, bd - 1, roots, rads);
                e_add(&pe, &e_mul(&qe, &roots[bd - 1], rads.len(), rads))
            }
        }
    }

    for (i, brad) in b.rads.iter().enumerate() {
        let val = reexpress(brad, i, &roots, &rads);
        match sqrt_in(&val, rads.len(), &rads) {
            Some(r) => {
                let principal = Exact { rads: rads.clone(), elem: r }.principal();
                roots.push(principal.elem);
            }
            None => {
                if rads.len() + 1 > MAX_TOWER_DEPTH {
                    return Err(Error::TowerDepthExceeded(MAX_TOWER_DEPTH));
                }
                let lo = rads.len();
                rads.push(val);
                ea = ea.lift(lo);
                for r in roots.iter_mut() {
                    *r = r.lift(lo);
                }
                roots.push(Elem::Quad(
                    Box::new(Elem::zero(lo)),
                    Box::new(Elem::from_rat(&BigRational::one(), lo)),
                ));
            }
        }
    }
    let eb = reexpress(&b.elem, b.rads.len(), &roots, &rads);
    Ok((rads, ea, eb))
}

#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(Exact),
    Approx(CApf),
}

impl Scalar {
    pub fn from_int(n: i64) -> Scalar {
        Scalar::Exact(Exact::from_rational(&BigRational::from_integer(n.into())))
    }

    pub fn from_ratio(p: i64, q: i64) -> Scalar {
        Scalar::Exact(Exact::from_rational(&BigRational::new(p.into(), q.into())))
    }

    pub fn approx(v: CApf) -> Scalar {
        Scalar::Approx(v)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// The rational value of an exact constant, if any.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Scalar::Exact(e) => e.elem.as_rat(),
            Scalar::Approx(_) => None,
        }
    }

    pub fn to_capf(&self) -> CApf {
        match self {
            Scalar::Exact(e) => e.to_capf(),
            Scalar::Approx(v) => v.clone(),
        }
    }

    /// Force approximate mode.
    pub fn to_approx(&self) -> Scalar {
        Scalar::Approx(self.to_capf())
    }

    fn binop(
        &self,
        o: &Scalar,
        f: impl Fn(&Elem, &Elem, usize, &[Elem]) -> Result<Elem>,
        g: impl Fn(&CApf, &CApf) -> Result<CApf>,
    ) -> Result<Scalar> {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                let (rads, ea, eb) = merge(a, b)?;
                let elem = f(&ea, &eb, rads.len(), &rads)?;
                Ok(Scalar::Exact(Exact { rads, elem }))
            }
            _ => Ok(Scalar::Approx(g(&self.to_capf(), &o.to_capf())?)),
        }
    }

    /// Square root; exact mode finds an in-field root or extends the tower,
    /// choosing the principal embedding.
    pub fn sqrt(&self) -> Result<Scalar> {
        match self {
            Scalar::Approx(v) => Ok(Scalar::Approx(v.sqrt())),
            Scalar::Exact(a) => {
                if a.elem.is_zero() {
                    return Ok(self.clone());
                }
                if let Some(r) = sqrt_in(&a.elem, a.depth(), &a.rads) {
                    return Ok(Scalar::Exact(Exact { rads: a.rads.clone(), elem: r }.principal()));
                }
                if a.depth() + 1 > MAX_TOWER_DEPTH {
                    return Err(Error::TowerDepthExceeded(MAX_TOWER_DEPTH));
                }
                let lo = a.depth();
                let mut rads = a.rads.clone();
                rads.push(a.elem.clone());
                let elem = Elem::Quad(
                    Box::new(Elem::zero(lo)),
                    Box::new(Elem::from_rat(&BigRational::one(), lo)),
                );
                Ok(Scalar::Exact(Exact { rads, elem }))
            }
        }
    }

    /// Limited exact cube root: rationals, single radical monomials, and
    /// depth-1 quadratic elements. Errors otherwise.
    pub fn cbrt_exact(&self) -> Result<Scalar> {
        let a = match self {
            Scalar::Exact(a) => a,
            Scalar::Approx(v) => return Ok(Scalar::Approx(v.cbrt())),
        };
        if let Some(r) = a.elem.as_rat() {
            let c = rat_cbrt(&r).ok_or(Error::NoExactCubeRoot)?;
            return Ok(Scalar::Exact(Exact::from_rational(&c)));
        }
        if let Some(s) = cbrt_monomial(a) {
            return Ok(s);
        }
        if a.depth() == 1 {
            if let Some(s) = cbrt_depth1(a) {
                return Ok(s);
            }
        }
        Err(Error::NoExactCubeRoot)
    }

    /// Cube root: exact when possible, otherwise an approximate value.
    pub fn cbrt_lossy(&self) -> Scalar {
        self.cbrt_exact().unwrap_or_else(|_| Scalar::Approx(self.to_capf().cbrt()))
    }

    /// Deterministic ordering key for canonical-representative selection.
    pub fn canonical_key(&self) -> String {
        match self {
            Scalar::Exact(e) => format!("E{:?}|{:?}", e.rads, e.elem),
            Scalar::Approx(v) => format!("A{:+.40e}{:+.40e}", v.re.to_f64(), v.im.to_f64()),
        }
    }

    pub fn encode(&self) -> String {
        fn enc(e: &Elem, depth: usize, rads: &[Elem]) -> String {
            match e {
                Elem::Rat(r) => {
                    if r.denom().is_one() {
                        format!("{}", r.numer())
                    } else {
                        format!("{}/{}", r.numer(), r.denom())
                    }
                }
                Elem::Quad(a, b) => {
                    let lo = depth - 1;
                    if b.is_zero() {
                        return enc(a, lo, rads);
                    }
                    let rd = format!("sqrt({})", enc(&rads[lo], lo, rads));
                    let bs = if b.as_rat().map(|r| r.is_one()).unwrap_or(false) {
                        rd
                    } else {
                        format!("{}*{}", enc(b, lo, rads), rd)
                    };
                    if a.is_zero() {
                        bs
                    } else {
                        format!("({} + {})", enc(a, lo, rads), bs)
                    }
                }
            }
        }
        match self {
            Scalar::Exact(e) => enc(&e.elem, e.depth(), &e.rads),
            Scalar::Approx(v) => format!("{}", v),
        }
    }
}

fn rat_cbrt(r: &BigRational) -> Option<BigRational> {
    if r.is_zero() {
        return Some(BigRational::zero());
    }
    let nc = r.numer().cbrt();
    let dc = r.denom().cbrt();
    if &(&nc * &nc * &nc) == r.numer() && &(&dc * &dc * &dc) == r.denom() {
        Some(BigRational::new(nc, dc))
    } else {
        None
    }
}

/// Cube root of c * B where B is a product of tower radicals with rational
/// square D: (e*B)^3 = e^3 * D * B.
fn cbrt_monomial(a: &Exact) -> Option<Scalar> {
    // collect the coordinates in the multiplicative radical basis
    fn coords(e: &Elem, path: &mut Vec<bool>, out: &mut Vec<(Vec<bool>, BigRational)>) {
        match e {
            Elem::Rat(r) => {
                if !r.is_zero() {
                    out.push((path.clone(), r.clone()));
                }
            }
            Elem::Quad(p, q) => {
                path.push(false);
                coords(p, path, out);
                path.pop();
                path.push(true);
                coords(q, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    coords(&a.elem, &mut Vec::new(), &mut out);
    if out.len() != 1 {
        return None;
    }
    let (path, c) = &out[0];
    // path[i] refers to radical index depth-1-i
    let mut dprod = BigRational::one();
    let mut used_any = false;
    for (i, &used) in path.iter().enumerate() {
        if used {
            let rad_idx = a.depth() - 1 - i;
            let dr = a.rads[rad_idx].as_rat()?;
            dprod *= dr;
            used_any = true;
        }
    }
    if !used_any {
        return rat_cbrt(c).map(|r| Scalar::Exact(Exact::from_rational(&r)));
    }
    let e = rat_cbrt(&(c / &dprod))?;
    // rebuild e * B in the same tower
    fn build(path: &[bool], depth: usize, e: &BigRational) -> Elem {
        if depth == 0 {
            return Elem::Rat(e.clone());
        }
        let z = Elem::zero(depth - 1);
        let sub = build(&path[1..], depth - 1, e);
        if path[0] {
            Elem::Quad(Box::new(z), Box::new(sub))
        } else {
            Elem::Quad(Box::new(sub), Box::new(z))
        }
    }
    let elem = build(path, a.depth(), &e);
    Some(Scalar::Exact(Exact { rads: a.rads.clone(), elem }))
}

/// Cube root of a + b sqrt(d) with a,b,d rational, via the norm equation and
/// rational reconstruction of the trace root.
fn cbrt_depth1(s: &Exact) -> Option<Scalar> {
    let (a, b) = match &s.elem {
        Elem::Quad(a, b) => (a.as_rat()?, b.as_rat()?),
        Elem::Rat(_) => return None,
    };
    let d = s.rads[0].as_rat()?;
    if b.is_zero() {
        return None;
    }
    let n = rat_cbrt(&(&a * &a - &b * &b * &d))?;
    // x = (t + conj(t))/2 satisfies 4x^3 - 3n x - a = 0
    let nf = n.numer().to_string().parse::<f64>().ok()? / n.denom().to_string().parse::<f64>().ok()?;
    let af = a.numer().to_string().parse::<f64>().ok()? / a.denom().to_string().parse::<f64>().ok()?;
    let mut cands: Vec<f64> = Vec::new();
    for seed in [-8.0f64, -2.0, -0.5, 0.5, 2.0, 8.0] {
        let mut x = seed * (af.abs().cbrt().max(nf.abs().sqrt()).max(0.5));
        for _ in 0..80 {
            let f = 4.0 * x * x * x - 3.0 * nf * x - af;
            let fp = 12.0 * x * x - 3.0 * nf;
            if fp.abs() < 1e-300 {
                break;
            }
            x -= f / fp;
        }
        if (4.0 * x * x * x - 3.0 * nf * x - af).abs() < 1e-6 * (1.0 + af.abs()) {
            cands.push(x);
        }
    }
    let four = BigRational::from_integer(4.into());
    let three = BigRational::from_integer(3.into());
    for xf in cands {
        if let Some(x) = reconstruct_rational(xf, 1_000_000_000_000u64) {
            if &four * &x * &x * &x - &three * &n * &x - &a == BigRational::zero() {
                let denom = &four * &x * &x - &n;
                if denom.is_zero() {
                    continue;
                }
                let y = &b / denom;
                let cand = Exact {
                    rads: s.rads.clone(),
                    elem: Elem::Quad(Box::new(Elem::Rat(x.clone())), Box::new(Elem::Rat(y.clone()))),
                };
                let cube = e_mul(
                    &e_mul(&cand.elem, &cand.elem, 1, &cand.rads),
                    &cand.elem,
                    1,
                    &cand.rads,
                );
                if e_sub(&cube, &s.elem).is_zero() {
                    return Some(Scalar::Exact(cand));
                }
            }
        }
    }
    None
}

/// Continued-fraction reconstruction of a rational from a float, with a
/// denominator bound; returns None when no convergent verifies closely.
fn reconstruct_rational(x: f64, max_den: u64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let ai = a as i128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 as u128 > max_den as u128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a;
        if frac < 1e-14 {
            break;
        }
        v = 1.0 / frac;
    }
    if q1 == 0 {
        return None;
    }
    let approx = p1 as f64 / q1 as f64;
    if (approx - x.abs()).abs() > 1e-9 * (1.0 + x.abs()) {
        return None;
    }
    let mut r = BigRational::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        r = -r;
    }
    Some(r)
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl Coeff for Scalar {
    fn zero() -> Self {
        Scalar::from_int(0)
    }
    fn one() -> Self {
        Scalar::from_int(1)
    }
    fn add(&self, o: &Self) -> Self {
        self.binop(o, |a, b, _, _| Ok(e_add(a, b)), |a, b| Ok(a.add(b))).unwrap()
    }
    fn sub(&self, o: &Self) -> Self {
        self.binop(o, |a, b, _, _| Ok(e_sub(a, b)), |a, b| Ok(a.sub(b))).unwrap()
    }
    fn mul(&self, o: &Self) -> Self {
        self.binop(o, |a, b, d, r| Ok(e_mul(a, b, d, r)), |a, b| Ok(a.mul(b)))
            .expect("tower merge failed in mul")
    }
    fn neg(&self) -> Self {
        match self {
            Scalar::Exact(e) => Scalar::Exact(Exact { rads: e.rads.clone(), elem: e_neg(&e.elem) }),
            Scalar::Approx(v) => Scalar::Approx(v.neg()),
        }
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.binop(
            o,
            |a, b, d, r| Ok(e_mul(a, &e_inv(b, d, r)?, d, r)),
            |a, b| Ok(a.div(b)),
        )
    }
    fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(e) => e.elem.is_zero(),
            Scalar::Approx(v) => v.is_zero(),
        }
    }
    fn from_rational(r: &BigRational) -> Self {
        Scalar::Exact(Exact::from_rational(r))
    }
    fn sqrt(&self) -> Result<Self> {
        Scalar::sqrt(self)
    }
    fn cbrt(&self) -> Result<Self> {
        match self {
            Scalar::Exact(_) => self.cbrt_exact(),
            Scalar::Approx(v) => Ok(Scalar::Approx(v.cbrt())),
        }
    }
}

impl std::fmt::Display for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.encode())
    }
}

/// Parse the textual scalar encoding: rational literals, `+ - * / ^`,
/// parentheses, and `sqrt(...)`; or the approx form `re+im i@bits`.
pub fn parse_scalar(text: &str) -> Result<Scalar> {
    let t = text.trim();
    if t.contains('@') {
        return parse_approx(t);
    }
    let toks: Vec<char> = t.chars().filter(|c| !c.is_whitespace()).collect();
    let mut pos = 0usize;
    let v = parse_sum(&toks, &mut pos)?;
    if pos != toks.len() {
        return Err(Error::SyntaxError(pos, "trailing input".into()));
    }
    Ok(v)
}

fn parse_approx(t: &str) -> Result<Scalar> {
    // "re+im i@bits" with im possibly negative: split at '@', strip trailing "i"
    let body = t.split('@').next().unwrap_or("").trim();
    let body = body.strip_suffix('i').unwrap_or(body).trim();
    // find the sign separating re and im (not at position 0, not after e/E)
    let chars: Vec<char> = body.chars().collect();
    let mut split = None;
    for i in (1..chars.len()).rev() {
        if (chars[i] == '+' || chars[i] == '-')
            && chars[i - 1] != 'e'
            && chars[i - 1] != 'E'
        {
            split = Some(i);
            break;
        }
    }
    let (re_s, im_s) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => (body, "0"),
    };
    let re: f64 = re_s.parse().map_err(|_| Error::SyntaxError(0, "bad real part".into()))?;
    let im: f64 = im_s.parse().map_err(|_| Error::SyntaxError(0, "bad imaginary part".into()))?;
    Ok(Scalar::Approx(CApf {
        re: crate::apf::Apf::from_f64(re),
        im: crate::apf::Apf::from_f64(im),
    }))
}

fn parse_sum(t: &[char], pos: &mut usize) -> Result<Scalar> {
    let mut acc = if t.get(*pos) == Some(&'-') {
        *pos += 1;
        parse_product(t, pos)?.neg()
    } else {
        if t.get(*pos) == Some(&'+') {
            *pos += 1;
        }
        parse_product(t, pos)?
    };
    while let Some(&c) = t.get(*pos) {
        if c == '+' {
            *pos += 1;
            acc = acc.add(&parse_product(t, pos)?);
        } else if c == '-' {
            *pos += 1;
            acc = acc.sub(&parse_product(t, pos)?);
        } else {
            break;
        }
    }
    Ok(acc)
}

fn parse_product(t: &[char], pos: &mut usize) -> Result<Scalar> {
    let mut acc = parse_power(t, pos)?;
    while let Some(&c) = t.get(*pos) {
        if c == '*' {
            *pos += 1;
            acc = acc.mul(&parse_power(t, pos)?);
        } else if c == '/' {
            *pos += 1;
            acc = acc.div(&parse_power(t, pos)?)?;
        } else {
            break;
        }
    }
    Ok(acc)
}

fn parse_power(t: &[char], pos: &mut usize) -> Result<Scalar> {
    let base = parse_atom(t, pos)?;
    if t.get(*pos) == Some(&'^') {
        *pos += 1;
        let neg = if t.get(*pos) == Some(&'-') {
            *pos += 1;
            true
        } else {
            false
        };
        let start = *pos;
        while t.get(*pos).map_or(false, |c| c.is_ascii_digit()) {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::SyntaxError(*pos, "expected integer exponent".into()));
        }
        let n: u32 = t[start..*pos]
            .iter()
            .collect::<String>()
            .parse()
            .map_err(|_| Error::SyntaxError(start, "bad exponent".into()))?;
        let mut out = Scalar::one();
        for _ in 0..n {
            out = out.mul(&base);
        }
        if neg {
            return Scalar::one().div(&out);
        }
        return Ok(out);
    }
    Ok(base)
}

fn parse_atom(t: &[char], pos: &mut usize) -> Result<Scalar> {
    match t.get(*pos) {
        Some('(') => {
            *pos += 1;
            let v = parse_sum(t, pos)?;
            if t.get(*pos) != Some(&')') {
                return Err(Error::SyntaxError(*pos, "expected )".into()));
            }
            *pos += 1;
            Ok(v)
        }
        Some(c) if c.is_ascii_digit() => {
            let start = *pos;
            while t.get(*pos).map_or(false, |c| c.is_ascii_digit()) {
                *pos += 1;
            }
            let n: BigInt = t[start..*pos]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| Error::SyntaxError(start, "bad integer".into()))?;
            Ok(Scalar::Exact(Exact::from_rational(&BigRational::from_integer(n))))
        }
        Some('s') => {
            let word: String = t[*pos..].iter().take(5).collect();
            if word.starts_with("sqrt(") {
                *pos += 5;
                let v = parse_sum(t, pos)?;
                if t.get(*pos) != Some(&')') {
                    return Err(Error::SyntaxError(*pos, "expected )".into()));
                }
                *pos += 1;
                v.sqrt()
            } else {
                Err(Error::SyntaxError(*pos, "unknown symbol".into()))
            }
        }
        _ => Err(Error::SyntaxError(*pos, "unexpected input".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn rational_arith() {
        let a = Scalar::from_ratio(1, 2);
        let b = Scalar::from_ratio(1, 3);
        assert_eq!(a.add(&b), Scalar::from_ratio(5, 6));
    }

    #[test]
    fn sqrt_defining_relation() {
        let r2 = s(2).sqrt().unwrap();
        assert_eq!(r2.mul(&r2), s(2));
        assert_eq!(s(4).sqrt().unwrap(), s(2));
    }

    #[test]
    fn omega_cubes_to_one() {
        // omega = (-1 + sqrt(-3))/2
        let w = s(-1).add(&s(-3).sqrt().unwrap()).div(&s(2)).unwrap();
        assert_eq!(w.mul(&w).mul(&w), s(1));
        assert!(!w.mul(&w).sub(&w).is_zero());
    }

    #[test]
    fn zero_testing() {
        let r2 = s(2).sqrt().unwrap();
        assert!(r2.sub(&r2).is_zero());
        let x = s(1).add(&r2).mul(&s(1).sub(&r2)).add(&s(1));
        assert!(x.is_zero());
        assert!(!Scalar::from_ratio(1, 1_000_000).is_zero());
    }

    #[test]
    fn cross_tower_products() {
        let r2 = s(2).sqrt().unwrap();
        let r3 = s(3).sqrt().unwrap();
        let r6 = s(6).sqrt().unwrap();
        // sqrt(6) must land in Q(sqrt2, sqrt3) once both are around
        let p = r2.mul(&r3);
        assert_eq!(p, r6);
    }

    #[test]
    fn division_and_inverse() {
        let r2 = s(2).sqrt().unwrap();
        let x = s(1).add(&r2);
        let inv = s(1).div(&x).unwrap();
        assert_eq!(x.mul(&inv), s(1));
        assert!(s(1).div(&s(0)).is_err());
    }

    #[test]
    fn principal_sqrt_sign() {
        let r = s(2).sqrt().unwrap();
        assert!(!r.to_capf().re.is_negative());
        let ri = s(-3).sqrt().unwrap();
        assert!(ri.to_capf().re.is_zero());
        assert!(!ri.to_capf().im.is_negative());
    }

    #[test]
    fn cube_roots() {
        assert_eq!(s(8).cbrt_exact().unwrap(), s(2));
        assert_eq!(s(-27).cbrt_exact().unwrap(), s(-3));
        assert!(s(2).cbrt_exact().is_err());
        // (sqrt 2)^3 = 2 sqrt 2
        let r2 = s(2).sqrt().unwrap();
        let v = s(2).mul(&r2);
        assert_eq!(v.cbrt_exact().unwrap(), r2);
        // (1 + sqrt 2)^3 = 7 + 5 sqrt 2
        let t = s(1).add(&r2);
        let c = t.mul(&t).mul(&t);
        assert_eq!(c.cbrt_exact().unwrap(), t);
    }

    #[test]
    fn parse_round_trip() {
        let v = parse_scalar("(1 + 2*sqrt(2))/3").unwrap();
        let w = parse_scalar(&v.encode()).unwrap();
        assert_eq!(v, w);
        assert_eq!(parse_scalar("5/6").unwrap(), Scalar::from_ratio(5, 6));
        assert!(parse_scalar("1 + *").is_err());
    }

    #[test]
    fn approx_mode() {
        let a = s(2).sqrt().unwrap().to_approx();
        let b = s(2).to_approx();
        assert!(a.mul(&a).sub(&b).is_zero());
        // mixed-mode coercion
        let m = a.mul(&s(3));
        assert!(!m.is_exact());
    }
}
