//! Closed-form surface expressions: parsing, printing, and exact expansion
//! into truncated series.

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::Series2;
use num::{BigInt, BigRational, One, Zero};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Func {
    Sqrt,
    Tan,
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Tan => "tan",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum ExprAst {
    Num(BigRational),
    Var(char),
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Div(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, i64),
    Neg(Box<ExprAst>),
    Call(Func, Box<ExprAst>),
}

// ---------------------------------------------------------------- lexer

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = chars[start..i]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| Error::SyntaxError(start, "bad number".into()))?;
            out.push((Tok::Num(n), start));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(Error::SyntaxError(i, format!("unexpected character `{}`", c)));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- parser

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|&(_, p)| p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_op(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(Tok::Op(o)) if *o == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::SyntaxError(self.here(), format!("expected `{}`", c))),
        }
    }

    fn sum(&mut self) -> Result<ExprAst> {
        let mut acc = if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            ExprAst::Neg(Box::new(self.product()?))
        } else {
            if let Some(Tok::Op('+')) = self.peek() {
                self.pos += 1;
            }
            self.product()?
        };
        loop {
            match self.peek() {
                Some(Tok::Op('+')) => {
                    self.pos += 1;
                    acc = ExprAst::Add(Box::new(acc), Box::new(self.product()?));
                }
                Some(Tok::Op('-')) => {
                    self.pos += 1;
                    acc = ExprAst::Sub(Box::new(acc), Box::new(self.product()?));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<ExprAst> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    acc = ExprAst::Mul(Box::new(acc), Box::new(self.power()?));
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    acc = ExprAst::Div(Box::new(acc), Box::new(self.power()?));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<ExprAst> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let neg = matches!(self.peek(), Some(Tok::Op('-')));
            if neg {
                self.pos += 1;
            }
            let p = self.here();
            match self.bump() {
                Some(Tok::Num(n)) => {
                    let e: i64 = n
                        .to_string()
                        .parse()
                        .map_err(|_| Error::SyntaxError(p, "exponent too large".into()))?;
                    Ok(ExprAst::Pow(Box::new(base), if neg { -e } else { e }))
                }
                _ => Err(Error::SyntaxError(p, "expected integer exponent".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<ExprAst> {
        let p = self.here();
        match self.bump() {
            Some(Tok::Num(n)) => Ok(ExprAst::Num(BigRational::from_integer(n))),
            Some(Tok::Op('(')) => {
                let e = self.sum()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Some(Tok::Op('-')) => Ok(ExprAst::Neg(Box::new(self.atom()?))),
            Some(Tok::Ident(id)) => match id.as_str() {
                "x" => Ok(ExprAst::Var('x')),
                "y" => Ok(ExprAst::Var('y')),
                "sqrt" | "tan" | "sin" | "cos" | "exp" => {
                    let f = match id.as_str() {
                        "sqrt" => Func::Sqrt,
                        "tan" => Func::Tan,
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        _ => Func::Exp,
                    };
                    self.expect_op('(')?;
                    let arg = self.sum()?;
                    self.expect_op(')')?;
                    Ok(ExprAst::Call(f, Box::new(arg)))
                }
                _ => Err(Error::UnknownFunction(id)),
            },
            _ => Err(Error::SyntaxError(p, "expected expression".into())),
        }
    }
}

pub fn parse(text: &str) -> Result<ExprAst> {
    let toks = lex(text)?;
    let end = text.chars().count();
    let mut p = Parser { toks, pos: 0, end };
    let ast = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(Error::SyntaxError(p.here(), "trailing input".into()));
    }
    Ok(ast)
}

pub fn print(ast: &ExprAst) -> String {
    match ast {
        ExprAst::Num(r) => {
            if r.denom().is_one() {
                format!("{}", r.numer())
            } else {
                format!("({}/{})", r.numer(), r.denom())
            }
        }
        ExprAst::Var(c) => c.to_string(),
        ExprAst::Add(a, b) => format!("({} + {})", print(a), print(b)),
        ExprAst::Sub(a, b) => format!("({} - {})", print(a), print(b)),
        ExprAst::Mul(a, b) => format!("({} * {})", print(a), print(b)),
        ExprAst::Div(a, b) => format!("({} / {})", print(a), print(b)),
        ExprAst::Pow(a, e) => format!("({}^{})", print(a), e),
        ExprAst::Neg(a) => format!("(-{})", print(a)),
        ExprAst::Call(f, a) => format!("{}({})", f.name(), print(a)),
    }
}

/// Substitute x -> x + a, y -> y + b in the tree (exact re-centering).
pub fn shift_vars(ast: &ExprAst, a: &BigRational, b: &BigRational) -> ExprAst {
    match ast {
        ExprAst::Var('x') => ExprAst::Add(
            Box::new(ExprAst::Var('x')),
            Box::new(ExprAst::Num(a.clone())),
        ),
        ExprAst::Var('y') => ExprAst::Add(
            Box::new(ExprAst::Var('y')),
            Box::new(ExprAst::Num(b.clone())),
        ),
        ExprAst::Num(_) | ExprAst::Var(_) => ast.clone(),
        ExprAst::Add(p, q) => ExprAst::Add(
            Box::new(shift_vars(p, a, b)),
            Box::new(shift_vars(q, a, b)),
        ),
        ExprAst::Sub(p, q) => ExprAst::Sub(
            Box::new(shift_vars(p, a, b)),
            Box::new(shift_vars(q, a, b)),
        ),
        ExprAst::Mul(p, q) => ExprAst::Mul(
            Box::new(shift_vars(p, a, b)),
            Box::new(shift_vars(q, a, b)),
        ),
        ExprAst::Div(p, q) => ExprAst::Div(
            Box::new(shift_vars(p, a, b)),
            Box::new(shift_vars(q, a, b)),
        ),
        ExprAst::Pow(p, e) => ExprAst::Pow(Box::new(shift_vars(p, a, b)), *e),
        ExprAst::Neg(p) => ExprAst::Neg(Box::new(shift_vars(p, a, b))),
        ExprAst::Call(f, p) => ExprAst::Call(*f, Box::new(shift_vars(p, a, b))),
    }
}

/// Symbolic derivative for polynomial trees; a test oracle only.
pub fn poly_derivative(ast: &ExprAst, var: char) -> Option<ExprAst> {
    Some(match ast {
        ExprAst::Num(_) => ExprAst::Num(BigRational::zero()),
        ExprAst::Var(c) => ExprAst::Num(if *c == var {
            BigRational::one()
        } else {
            BigRational::zero()
        }),
        ExprAst::Add(a, b) => ExprAst::Add(
            Box::new(poly_derivative(a, var)?),
            Box::new(poly_derivative(b, var)?),
        ),
        ExprAst::Sub(a, b) => ExprAst::Sub(
            Box::new(poly_derivative(a, var)?),
            Box::new(poly_derivative(b, var)?),
        ),
        ExprAst::Mul(a, b) => ExprAst::Add(
            Box::new(ExprAst::Mul(Box::new(poly_derivative(a, var)?), b.clone())),
            Box::new(ExprAst::Mul(a.clone(), Box::new(poly_derivative(b, var)?))),
        ),
        ExprAst::Neg(a) => ExprAst::Neg(Box::new(poly_derivative(a, var)?)),
        ExprAst::Pow(a, e) if *e >= 1 => ExprAst::Mul(
            Box::new(ExprAst::Mul(
                Box::new(ExprAst::Num(BigRational::from_integer((*e).into()))),
                Box::new(ExprAst::Pow(a.clone(), e - 1)),
            )),
            Box::new(poly_derivative(a, var)?),
        ),
        _ => return None,
    })
}

// ------------------------------------------------------------ expansion

/// Maclaurin coefficient lists (plain convention) to order n.
fn mac_exp(n: usize) -> Vec<BigRational> {
    let mut v = vec![BigRational::one()];
    for m in 1..=n {
        let prev = v[m - 1].clone();
        v.push(prev / BigRational::from_integer(m.into()));
    }
    v
}

fn mac_sin(n: usize) -> Vec<BigRational> {
    let e = mac_exp(n);
    (0..=n)
        .map(|m| match m % 4 {
            1 => e[m].clone(),
            3 => -e[m].clone(),
            _ => BigRational::zero(),
        })
        .collect()
}

fn mac_cos(n: usize) -> Vec<BigRational> {
    let e = mac_exp(n);
    (0..=n)
        .map(|m| match m % 4 {
            0 => e[m].clone(),
            2 => -e[m].clone(),
            _ => BigRational::zero(),
        })
        .collect()
}

/// tan via t' = 1 + t^2, t(0) = 0.
fn mac_tan(n: usize) -> Vec<BigRational> {
    let mut t = vec![BigRational::zero(); n + 1];
    for m in 0..n {
        // (m+1) t_{m+1} = [m == 0] + sum_{i+j=m} t_i t_j
        let mut s = if m == 0 { BigRational::one() } else { BigRational::zero() };
        for i in 0..=m {
            s += t[i].clone() * t[m - i].clone();
        }
        t[m + 1] = s / BigRational::from_integer((m + 1).into());
    }
    t
}

/// (1+t)^(1/2) binomial series.
fn mac_sqrt1p(n: usize) -> Vec<BigRational> {
    let mut v = vec![BigRational::one()];
    let half = BigRational::new(1.into(), 2.into());
    for m in 1..=n {
        let prev = v[m - 1].clone();
        let factor = (half.clone() - BigRational::from_integer((m as i64 - 1).into()))
            / BigRational::from_integer((m as i64).into());
        v.push(prev * factor);
    }
    v
}

/// Compose a univariate Maclaurin list with a zero-constant series.
fn compose<K: Coeff>(coeffs: &[BigRational], g: &Series2<K>) -> Result<Series2<K>> {
    let n = g.order;
    let mut acc = Series2::constant(n, K::from_rational(&coeffs[0]));
    let mut gp = Series2::constant(n, K::one());
    for c in coeffs.iter().take(n + 1).skip(1) {
        gp = gp.mul(g)?;
        if gp.is_zero() {
            break;
        }
        acc = acc.add(&gp.scale(&K::from_rational(c)))?;
    }
    Ok(acc)
}

/// 1/(c+g) for invertible constant part c.
fn series_inverse(s: &Series2<Scalar>) -> Result<Series2<Scalar>> {
    let c = s.get(0, 0);
    if c.is_zero() {
        return Err(Error::PoleAtOrigin);
    }
    let cinv = Scalar::one().div(&c)?;
    let g = s.sub(&Series2::constant(s.order, c))?.scale(&cinv);
    // 1/(c(1+h)) = (1/c) * sum (-h)^m
    let geom: Vec<BigRational> = (0..=s.order)
        .map(|m| {
            if m % 2 == 0 {
                BigRational::one()
            } else {
                -BigRational::one()
            }
        })
        .collect();
    Ok(compose(&geom, &g)?.scale(&cinv))
}

/// Expansion mode: exact scalars, or everything coerced to approx complex.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Exact,
    Approx,
}

pub fn expand(ast: &ExprAst, n: usize) -> Result<Series2<Scalar>> {
    expand_in(ast, n, Mode::Exact)
}

pub fn expand_in(ast: &ExprAst, n: usize, mode: Mode) -> Result<Series2<Scalar>> {
    let lit = |r: &BigRational| match mode {
        Mode::Exact => Scalar::from_rational(r),
        Mode::Approx => Scalar::from_rational(r).to_approx(),
    };
    match ast {
        ExprAst::Num(r) => Ok(Series2::constant(n, lit(r))),
        ExprAst::Var('x') => Ok(Series2::var_x(n)),
        ExprAst::Var('y') => Ok(Series2::var_y(n)),
        ExprAst::Var(c) => Err(Error::Other(format!("unknown variable `{}`", c))),
        ExprAst::Add(a, b) => expand_in(a, n, mode)?.add(&expand_in(b, n, mode)?),
        ExprAst::Sub(a, b) => expand_in(a, n, mode)?.sub(&expand_in(b, n, mode)?),
        ExprAst::Mul(a, b) => expand_in(a, n, mode)?.mul(&expand_in(b, n, mode)?),
        ExprAst::Div(a, b) => {
            let num = expand_in(a, n, mode)?;
            let den = expand_in(b, n, mode)?;
            num.mul(&series_inverse(&den)?)
        }
        ExprAst::Neg(a) => Ok(expand_in(a, n, mode)?.neg()),
        ExprAst::Pow(a, e) => {
            let base = expand_in(a, n, mode)?;
            if *e >= 0 {
                base.pow(*e as usize)
            } else {
                series_inverse(&base)?.pow((-e) as usize)
            }
        }
        ExprAst::Call(f, a) => {
            let arg = expand_in(a, n, mode)?;
            let c = arg.get(0, 0);
            let g = arg.sub(&Series2::constant(n, c.clone()))?;
            match f {
                Func::Sqrt => {
                    if c.is_zero() {
                        return Err(Error::NotAnalyticAtOrigin);
                    }
                    // sqrt(c) * sqrt(1 + g/c)
                    let root = c.sqrt()?;
                    let gn = g.scale(&Scalar::one().div(&c)?);
                    Ok(compose(&mac_sqrt1p(n), &gn)?.scale(&root))
                }
                Func::Exp => {
                    let base = compose(&mac_exp(n), &g)?;
                    if c.is_zero() {
                        Ok(base)
                    } else {
                        Ok(base.scale(&eval_const(Func::Exp, &c, mode)?))
                    }
                }
                Func::Sin => {
                    if c.is_zero() {
                        compose(&mac_sin(n), &g)
                    } else {
                        // sin(c+g) = sin c cos g + cos c sin g
                        let sc = eval_const(Func::Sin, &c, mode)?;
                        let cc = eval_const(Func::Cos, &c, mode)?;
                        compose(&mac_cos(n), &g)?
                            .scale(&sc)
                            .add(&compose(&mac_sin(n), &g)?.scale(&cc))
                    }
                }
                Func::Cos => {
                    if c.is_zero() {
                        compose(&mac_cos(n), &g)
                    } else {
                        let sc = eval_const(Func::Sin, &c, mode)?;
                        let cc = eval_const(Func::Cos, &c, mode)?;
                        compose(&mac_cos(n), &g)?
                            .scale(&cc)
                            .sub(&compose(&mac_sin(n), &g)?.scale(&sc))
                    }
                }
                Func::Tan => {
                    if c.is_zero() {
                        compose(&mac_tan(n), &g)
                    } else {
                        let sin = expand_in(&ExprAst::Call(Func::Sin, a.clone()), n, mode)?;
                        let cos = expand_in(&ExprAst::Call(Func::Cos, a.clone()), n, mode)?;
                        sin.mul(&series_inverse(&cos)?)
                    }
                }
            }
        }
    }
}

/// Value of a transcendental function at a nonzero constant; only the
/// approximate mode can supply it.
fn eval_const(f: Func, c: &Scalar, mode: Mode) -> Result<Scalar> {
    if mode == Mode::Exact && c.is_exact() {
        return Err(Error::NotExactlyEvaluable(format!("{}({})", f.name(), c.encode())));
    }
    let v = c.to_capf();
    Ok(Scalar::approx(match f {
        Func::Sin => v.sin(),
        Func::Cos => v.cos(),
        Func::Exp => v.exp(),
        Func::Tan => v.tan(),
        Func::Sqrt => v.sqrt(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coeff;

    #[test]
    fn parse_errors() {
        assert!(matches!(parse("x*y*"), Err(Error::SyntaxError(_, _))));
        assert!(matches!(parse("foo(x)"), Err(Error::UnknownFunction(_))));
        assert!(parse("x*y + x^3/6").is_ok());
    }

    #[test]
    fn quadric_and_cayley() {
        let s = expand(&parse("x*y").unwrap(), 8).unwrap();
        assert_eq!(s.get(1, 1), Scalar::one());
        let c = expand(&parse("x*y + x^3/6").unwrap(), 8).unwrap();
        assert_eq!(c.fjk(3, 0), Scalar::one());
        assert_eq!(c.get(3, 0), Scalar::from_ratio(1, 6));
    }

    #[test]
    fn sqrt_model() {
        // 2 - 2 sqrt(1 - xy) = xy + x2y2/4 + x3y3/8 + ...
        let s = expand(&parse("2 - 2*sqrt(1 - x*y)").unwrap(), 8).unwrap();
        assert_eq!(s.get(0, 0), Scalar::zero());
        assert_eq!(s.get(1, 1), Scalar::one());
        assert_eq!(s.get(2, 2), Scalar::from_ratio(1, 4));
        assert_eq!(s.get(3, 3), Scalar::from_ratio(1, 8));
        assert_eq!(s.get(4, 4), Scalar::from_ratio(5, 64));
        assert_eq!(s.get(2, 1), Scalar::zero());
    }

    #[test]
    fn tan_model() {
        // (1+y) sqrt2 tan(x/sqrt2) - x = xy + x3/6 + x3y/6 + x5/30 + x5y/30
        let s = expand(&parse("(1+y)*sqrt(2)*tan(x/sqrt(2)) - x").unwrap(), 6).unwrap();
        assert_eq!(s.get(0, 0), Scalar::zero());
        assert_eq!(s.get(1, 1), Scalar::one());
        assert_eq!(s.get(3, 0), Scalar::from_ratio(1, 6));
        assert_eq!(s.get(3, 1), Scalar::from_ratio(1, 6));
        assert_eq!(s.get(5, 0), Scalar::from_ratio(1, 30));
        assert_eq!(s.get(5, 1), Scalar::from_ratio(1, 30));
        assert_eq!(s.get(2, 0), Scalar::zero());
        assert_eq!(s.get(4, 0), Scalar::zero());
    }

    #[test]
    fn print_parse_round_trip() {
        for text in [
            "x*y + x^3/6",
            "2 - 2*sqrt(1 - x*y)",
            "(1+y)*sqrt(2)*tan(x/sqrt(2)) - x",
        ] {
            let a = parse(text).unwrap();
            let b = parse(&print(&a)).unwrap();
            assert_eq!(expand(&a, 6).unwrap(), expand(&b, 6).unwrap());
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let g = parse("sqrt(1 + x + 2*x*y)").unwrap();
        let s = expand(&g, 6).unwrap();
        let sq = s.mul(&s).unwrap();
        let direct = expand(&parse("1 + x + 2*x*y").unwrap(), 6).unwrap();
        assert_eq!(sq, direct);
    }

    #[test]
    fn derivative_oracle() {
        let a = parse("x^3*y + 2*x*y^2").unwrap();
        let d = poly_derivative(&a, 'x').unwrap();
        let lhs = expand(&a, 6).unwrap().partial_x();
        let rhs = expand(&d, 5).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn displaced_constants() {
        // exact mode refuses tan at a nonzero constant, approx mode accepts
        let shifted = shift_vars(
            &parse("tan(x)").unwrap(),
            &BigRational::new(1.into(), 10.into()),
            &BigRational::zero(),
        );
        assert!(matches!(expand(&shifted, 4), Err(Error::NotExactlyEvaluable(_))));
        let s = expand_in(&shifted, 4, Mode::Approx).unwrap();
        let t0 = s.get(0, 0).to_capf().re.to_f64();
        assert!((t0 - 0.1f64.tan()).abs() < 1e-15);
    }

    #[test]
    fn pole_detection() {
        assert!(matches!(
            expand(&parse("1/(x+y)").unwrap(), 4),
            Err(Error::PoleAtOrigin)
        ));
        assert!(matches!(
            expand(&parse("sqrt(x)").unwrap(), 4),
            Err(Error::NotAnalyticAtOrigin)
        ));
    }
}
