//! Regraphing a surface u = F(x,y) after affine transformations: linear
//! changes of (x,y), the swap, pure scalings, and the stabilizer maps
//! x' = mu x + k u, y' = lambda y + l u, u' = mu lambda u solved through the
//! fundamental equation G(mu x + k F, lambda y + l F) = mu lambda F.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::Series2;

/// G = F composed with the inverse of the 2x2 matrix [[a,b],[c,d]] acting on
/// (x,y); the graphing direction u is unchanged.
pub fn linear_regraph<K: Coeff>(f: &Series2<K>, a: &K, b: &K, c: &K, d: &K) -> Result<Series2<K>> {
    let det = a.mul(d).sub(&b.mul(c));
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let n = f.order;
    let di = K::one().div(&det)?;
    let mut xs = Series2::zero(n);
    xs.set(1, 0, d.mul(&di));
    xs.set(0, 1, b.neg().mul(&di));
    let mut ys = Series2::zero(n);
    ys.set(1, 0, c.neg().mul(&di));
    ys.set(0, 1, a.mul(&di));
    f.substitute(&xs, &ys)
}

/// Substitute (x,y) -> (X(x,y), Y(x,y)) directly (the forward direction,
/// for precompositions).
pub fn precompose<K: Coeff>(f: &Series2<K>, xs: &Series2<K>, ys: &Series2<K>) -> Result<Series2<K>> {
    f.substitute(xs, ys)
}

pub fn swap_regraph<K: Coeff>(f: &Series2<K>) -> Series2<K> {
    f.swap_xy()
}

/// Pure scaling (x,y,u) -> (mu x, lambda y, mu lambda u):
/// G(x,y) = mu lambda F(x/mu, y/lambda), i.e. the coefficient law
/// G_{j,k} = mu^{1-j} lambda^{1-k} F_{j,k}.
pub fn scale_regraph<K: Coeff>(f: &Series2<K>, mu: &K, lambda: &K) -> Result<Series2<K>> {
    if mu.is_zero() || lambda.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let n = f.order;
    let mui = K::one().div(mu)?;
    let li = K::one().div(lambda)?;
    let mut out = Series2::zero(n);
    // powers mu^{1-j}: start at mu and keep dividing
    let mut mp = vec![mu.clone()];
    let mut lp = vec![lambda.clone()];
    for i in 1..=n {
        mp.push(mp[i - 1].mul(&mui));
        lp.push(lp[i - 1].mul(&li));
    }
    for (j, k) in f.iter_degrees() {
        let c = f.get(j, k);
        if !c.is_zero() {
            out.set(j, k, c.mul(&mp[j]).mul(&lp[k]));
        }
    }
    Ok(out)
}

/// Solve the fundamental equation for G given F = xy + O(3): the unique
/// series with G(mu x + k F, lambda y + l F) = mu lambda F through order N.
/// Determined degree by degree since kF and lF have valuation >= 2.
pub fn g1_regraph<K: Coeff>(
    f: &Series2<K>,
    mu: &K,
    lambda: &K,
    k: &K,
    l: &K,
) -> Result<Series2<K>> {
    if !f.get(1, 1).sub(&K::one()).is_zero()
        || !f.get(2, 0).is_zero()
        || !f.get(0, 2).is_zero()
        || !f.get(0, 0).is_zero()
        || !f.get(1, 0).is_zero()
        || !f.get(0, 1).is_zero()
    {
        return Err(Error::NotPrenormalized);
    }
    if mu.is_zero() || lambda.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let n = f.order;
    let mut xs = f.scale(k); // k*F
    let mut ys = f.scale(l);
    xs.set(1, 0, xs.get(1, 0).add(mu));
    ys.set(0, 1, ys.get(0, 1).add(lambda));
    let target = f.scale(&mu.mul(lambda));
    let mui = K::one().div(mu)?;
    let li = K::one().div(lambda)?;
    let mut mp = vec![K::one()];
    let mut lp = vec![K::one()];
    for i in 1..=n {
        mp.push(mp[i - 1].mul(&mui));
        lp.push(lp[i - 1].mul(&li));
    }
    let mut g = Series2::zero(n);
    for m in 1..=n {
        let r = target.sub(&g.substitute(&xs, &ys)?)?;
        // degree-m part of the residual equals G_m(mu x, lambda y)
        for j in 0..=m {
            let kk = m - j;
            let c = r.get(j, kk);
            if !c.is_zero() {
                g.set(j, kk, c.mul(&mp[j]).mul(&lp[kk]));
            }
        }
    }
    Ok(g)
}

/// One recorded transformation of the normalization chain, with enough data
/// to replay it on a surface series.
#[derive(Clone, Debug)]
pub enum Step {
    /// Basepoint shift (x,y) -> (x + x0, y + y0) with the graph re-centered
    /// on its tangent plane: the constant and linear terms of the shifted
    /// series are removed by the affine map u -> u - F(p) - F_x(p)x - F_y(p)y.
    Translate { x0: Scalar, y0: Scalar },
    /// (x,y) -> M^{-1}(x,y) regraph with M = [[a,b],[c,d]].
    Linear { a: Scalar, b: Scalar, c: Scalar, d: Scalar },
    /// Precomposition (x,y) -> (x, y + c x) used to leave the first-loop bad set.
    Shear { c: Scalar },
    Swap,
    Scale { mu: Scalar, lambda: Scalar },
    G1 { mu: Scalar, lambda: Scalar, k: Scalar, l: Scalar },
}

impl Step {
    pub fn apply(&self, f: &Series2<Scalar>) -> Result<Series2<Scalar>> {
        match self {
            Step::Translate { x0, y0 } => {
                let mut g = f.taylor_shift(x0, y0);
                g.set(0, 0, Scalar::zero());
                if g.order >= 1 {
                    g.set(1, 0, Scalar::zero());
                    g.set(0, 1, Scalar::zero());
                }
                Ok(g)
            }
            Step::Linear { a, b, c, d } => linear_regraph(f, a, b, c, d),
            Step::Shear { c } => {
                let n = f.order;
                let xs = Series2::var_x(n);
                let ys = Series2::var_y(n).add(&Series2::var_x(n).scale(c))?;
                precompose(f, &xs, &ys)
            }
            Step::Swap => Ok(swap_regraph(f)),
            Step::Scale { mu, lambda } => scale_regraph(f, mu, lambda),
            Step::G1 { mu, lambda, k, l } => g1_regraph(f, mu, lambda, k, l),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Step::Translate { x0, y0 } => format!("translate({}, {})", x0.encode(), y0.encode()),
            Step::Linear { a, b, c, d } => format!(
                "linear([{}, {}; {}, {}])",
                a.encode(),
                b.encode(),
                c.encode(),
                d.encode()
            ),
            Step::Shear { c } => format!("shear(y += {} x)", c.encode()),
            Step::Swap => "swap(x, y)".to_string(),
            Step::Scale { mu, lambda } => {
                format!("scale(mu={}, lambda={})", mu.encode(), lambda.encode())
            }
            Step::G1 { mu, lambda, k, l } => format!(
                "g1(mu={}, lambda={}, k={}, l={})",
                mu.encode(),
                lambda.encode(),
                k.encode(),
                l.encode()
            ),
        }
    }
}

/// The composed transformation chain recorded by the pipeline.
#[derive(Clone, Debug, Default)]
pub struct TransformChain {
    pub steps: Vec<Step>,
}

impl TransformChain {
    pub fn push(&mut self, s: Step) {
        self.steps.push(s);
    }

    /// Replay the chain on an input series.
    pub fn apply(&self, f: &Series2<Scalar>) -> Result<Series2<Scalar>> {
        let mut cur = f.clone();
        for s in &self.steps {
            cur = s.apply(&cur)?;
        }
        Ok(cur)
    }

    pub fn describe(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.describe()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;

    fn xy(n: usize) -> Series2<Scalar> {
        Series2::var_x(n).mul(&Series2::var_y(n)).unwrap()
    }

    fn cayley(n: usize) -> Series2<Scalar> {
        let mut s = xy(n);
        s.set_fjk(3, 0, Scalar::one());
        s
    }

    #[test]
    fn swap_moves_cubic() {
        let s = swap_regraph(&cayley(6));
        assert_eq!(s.fjk(0, 3), Scalar::one());
        assert_eq!(s.fjk(3, 0), Scalar::zero());
        assert_eq!(swap_regraph(&s), cayley(6));
    }

    #[test]
    fn linear_change_of_coordinates() {
        // (x,y) = (s+t, s-t) applied to F=xy gives s^2 - t^2; as a regraph
        // that is precompose with the matrix columns
        let f = xy(4);
        let n = 4;
        let xs = Series2::<Scalar>::var_x(n).add(&Series2::var_y(n)).unwrap();
        let ys = Series2::<Scalar>::var_x(n).sub(&Series2::var_y(n)).unwrap();
        let g = precompose(&f, &xs, &ys).unwrap();
        assert_eq!(g.get(2, 0), Scalar::one());
        assert_eq!(g.get(0, 2), Scalar::from_int(-1));
    }

    #[test]
    fn g1_identity_and_weights() {
        let f = cayley(6);
        let g = g1_regraph(
            &f,
            &Scalar::one(),
            &Scalar::one(),
            &Scalar::zero(),
            &Scalar::zero(),
        )
        .unwrap();
        assert_eq!(g, f);

        // G_{3,0} = lambda/mu^2 F_{3,0}
        let mu = Scalar::from_int(2);
        let lambda = Scalar::from_int(3);
        let g2 = g1_regraph(&f, &mu, &lambda, &Scalar::zero(), &Scalar::zero()).unwrap();
        assert_eq!(g2.fjk(3, 0), Scalar::from_ratio(3, 4));
    }

    #[test]
    fn g1_kills_mixed_cubics() {
        let n = 6;
        let mut f = xy(n);
        f.set_fjk(3, 0, Scalar::one());
        f.set_fjk(2, 1, Scalar::from_int(4));
        f.set_fjk(1, 2, Scalar::from_int(-6));
        f.set_fjk(0, 3, Scalar::from_int(2));
        let l = f.fjk(2, 1).mul(&Scalar::from_ratio(1, 2));
        let k = f.fjk(1, 2).mul(&Scalar::from_ratio(1, 2));
        let g = g1_regraph(&f, &Scalar::one(), &Scalar::one(), &k, &l).unwrap();
        assert!(g.fjk(2, 1).is_zero());
        assert!(g.fjk(1, 2).is_zero());
        assert_eq!(g.fjk(3, 0), Scalar::one());
        assert_eq!(g.fjk(0, 3), Scalar::from_int(2));
    }

    #[test]
    fn fundamental_equation_residual() {
        let n = 7;
        let mut f = xy(n);
        f.set_fjk(3, 0, Scalar::from_int(2));
        f.set_fjk(0, 3, Scalar::from_int(-1));
        f.set_fjk(2, 1, Scalar::from_ratio(1, 3));
        f.set_fjk(4, 0, Scalar::from_int(5));
        f.set_fjk(2, 2, Scalar::from_ratio(-2, 7));
        let (mu, lambda) = (Scalar::from_int(2), Scalar::from_ratio(1, 3));
        let (k, l) = (Scalar::from_ratio(1, 2), Scalar::from_int(-1));
        let g = g1_regraph(&f, &mu, &lambda, &k, &l).unwrap();
        let mut xs = f.scale(&k);
        xs.set(1, 0, xs.get(1, 0).add(&mu));
        let mut ys = f.scale(&l);
        ys.set(0, 1, ys.get(0, 1).add(&lambda));
        let lhs = g.substitute(&xs, &ys).unwrap();
        let rhs = f.scale(&mu.mul(&lambda));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn g1_group_law() {
        let n = 6;
        let mut f = xy(n);
        f.set_fjk(3, 0, Scalar::one());
        f.set_fjk(0, 3, Scalar::from_int(3));
        f.set_fjk(4, 0, Scalar::from_int(-2));
        let p1 = (
            Scalar::from_int(2),
            Scalar::from_int(1),
            Scalar::from_ratio(1, 3),
            Scalar::from_int(1),
        );
        let p2 = (
            Scalar::from_ratio(1, 2),
            Scalar::from_int(3),
            Scalar::from_int(-1),
            Scalar::from_ratio(2, 5),
        );
        let step1 = g1_regraph(&f, &p1.0, &p1.1, &p1.2, &p1.3).unwrap();
        let step2 = g1_regraph(&step1, &p2.0, &p2.1, &p2.2, &p2.3).unwrap();
        // composed parameters: x'' = mu2 x' + k2 u' with x' = mu1 x + k1 u,
        // u' = mu1 lambda1 u, so mu = mu2 mu1, k = mu2 k1 + k2 mu1 lambda1
        let mu = p2.0.mul(&p1.0);
        let lambda = p2.1.mul(&p1.1);
        let k = p2.0.mul(&p1.2).add(&p2.2.mul(&p1.0).mul(&p1.1));
        let l = p2.1.mul(&p1.3).add(&p2.3.mul(&p1.0).mul(&p1.1));
        let direct = g1_regraph(&f, &mu, &lambda, &k, &l).unwrap();
        assert_eq!(step2, direct);
    }

    #[test]
    fn scale_law() {
        let f = cayley(6);
        let g = scale_regraph(&f, &Scalar::from_int(2), &Scalar::from_int(3)).unwrap();
        // G_{j,k} = mu^{1-j} lambda^{1-k} F_{j,k}
        assert_eq!(g.fjk(1, 1), f.fjk(1, 1));
        assert_eq!(g.fjk(3, 0), Scalar::from_ratio(3, 4).mul(&f.fjk(3, 0)));
    }

    #[test]
    fn chain_replay() {
        let mut chain = TransformChain::default();
        chain.push(Step::Swap);
        chain.push(Step::Scale { mu: Scalar::from_int(2), lambda: Scalar::one() });
        let f = cayley(6);
        let g = chain.apply(&f).unwrap();
        assert_eq!(g.fjk(0, 3), Scalar::from_int(2).mul(&Scalar::from_ratio(1, 1)));
    }
}
