//! Scalar expressions in the single variable `u`.
//!
//! Every nonlinearity `f(u)` handled by the toolkit is an [`Expr`]. The tree
//! can be parsed from text, evaluated, differentiated symbolically and lightly
//! simplified. Values are immutable; all operations return new trees.

mod diff;
mod parse;

use std::fmt;

use crate::error::{Error, Result};

pub use parse::parse;

/// Expression tree for a real function of `u`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Variable,
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Abs(Box<Expr>),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Constant(c)
    }

    pub fn var() -> Expr {
        Expr::Variable
    }

    /// True when the tree does not mention `u`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Constant(_) => true,
            Expr::Variable => false,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().all(Expr::is_constant),
            Expr::Div(a, b) | Expr::Pow(a, b) => a.is_constant() && b.is_constant(),
            Expr::Neg(a) | Expr::Exp(a) | Expr::Log(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Abs(a) => a.is_constant(),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Constant(_) | Expr::Variable => 0,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().map(Expr::size).sum(),
            Expr::Div(a, b) | Expr::Pow(a, b) => a.size() + b.size(),
            Expr::Neg(a) | Expr::Exp(a) | Expr::Log(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Abs(a) => a.size(),
        }
    }

    /// Evaluates the expression at `u`.
    ///
    /// Fails with [`Error::Domain`] naming the offending node for the log of a
    /// non-positive number, division by zero, a non-integer power of a
    /// negative base, or any non-finite intermediate.
    pub fn eval(&self, u: f64) -> Result<f64> {
        let v = match self {
            Expr::Constant(c) => *c,
            Expr::Variable => u,
            Expr::Add(xs) => {
                let mut acc = 0.0;
                for x in xs {
                    acc += x.eval(u)?;
                }
                acc
            }
            Expr::Mul(xs) => {
                let mut acc = 1.0;
                for x in xs {
                    acc *= x.eval(u)?;
                }
                acc
            }
            Expr::Neg(a) => -a.eval(u)?,
            Expr::Div(n, d) => {
                let den = d.eval(u)?;
                if den == 0.0 {
                    return Err(self.domain_error(u));
                }
                n.eval(u)? / den
            }
            Expr::Pow(b, e) => {
                let base = b.eval(u)?;
                let exp = e.eval(u)?;
                pow_real(base, exp).ok_or_else(|| self.domain_error(u))?
            }
            Expr::Exp(a) => a.eval(u)?.exp(),
            Expr::Log(a) => {
                let x = a.eval(u)?;
                if x <= 0.0 {
                    return Err(self.domain_error(u));
                }
                x.ln()
            }
            Expr::Sin(a) => a.eval(u)?.sin(),
            Expr::Cos(a) => a.eval(u)?.cos(),
            Expr::Abs(a) => a.eval(u)?.abs(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.domain_error(u))
        }
    }

    fn domain_error(&self, u: f64) -> Error {
        Error::Domain {
            node: self.to_string(),
            at: u,
        }
    }

    /// Replaces every occurrence of `u` by `inner`, giving `self(inner(u))`.
    pub fn substitute(&self, inner: &Expr) -> Expr {
        let sub = |a: &Expr| Box::new(a.substitute(inner));
        match self {
            Expr::Constant(c) => Expr::Constant(*c),
            Expr::Variable => inner.clone(),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.substitute(inner)).collect()),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.substitute(inner)).collect()),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::Pow(a, b) => Expr::Pow(sub(a), sub(b)),
            Expr::Exp(a) => Expr::Exp(sub(a)),
            Expr::Log(a) => Expr::Log(sub(a)),
            Expr::Sin(a) => Expr::Sin(sub(a)),
            Expr::Cos(a) => Expr::Cos(sub(a)),
            Expr::Abs(a) => Expr::Abs(sub(a)),
        }
    }

    /// The `n`-th derivative, simplified after every step.
    pub fn nth_derivative(&self, n: usize) -> Expr {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.diff();
        }
        e
    }
}

/// Real power with integer exponents allowed for negative bases.
pub fn pow_real(base: f64, exp: f64) -> Option<f64> {
    if exp.fract() == 0.0 && exp.abs() < i32::MAX as f64 {
        if base == 0.0 && exp < 0.0 {
            return None;
        }
        return Some(base.powi(exp as i32));
    }
    if base < 0.0 || (base == 0.0 && exp < 0.0) {
        return None;
    }
    Some(base.powf(exp))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, xs: &[Expr], sep: &str) -> fmt::Result {
            write!(f, "(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, "{sep}")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")
        }
        match self {
            Expr::Constant(c) if *c < 0.0 => write!(f, "({c:?})"),
            Expr::Constant(c) => write!(f, "{c:?}"),
            Expr::Variable => write!(f, "u"),
            Expr::Add(xs) => join(f, xs, " + "),
            Expr::Mul(xs) => join(f, xs, "*"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, b) => write!(f, "({a}^{b})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Abs(a) => write!(f, "abs({a})"),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Expr> {
        parse(s)
    }
}

/// Interval of admissible `u` values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl DomainInterval {
    /// Closed interval `[lo, hi]`.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        Self::with_flags(lo, hi, true, true)
    }

    pub fn open(lo: f64, hi: f64) -> Result<Self> {
        Self::with_flags(lo, hi, false, false)
    }

    pub fn with_flags(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "domain requires finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(DomainInterval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    pub fn contains(&self, u: f64) -> bool {
        let above = if self.lo_closed { u >= self.lo } else { u > self.lo };
        let below = if self.hi_closed { u <= self.hi } else { u < self.hi };
        above && below
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// `m` Chebyshev points of the first kind, strictly interior.
    ///
    /// `shift` in `[0, 1)` rotates the underlying angles by a fraction of the
    /// angular spacing, producing a disjoint interior set for `shift > 0`.
    pub fn chebyshev_points(&self, m: usize, shift: f64) -> Vec<f64> {
        let mid = 0.5 * (self.lo + self.hi);
        let half = 0.5 * self.width();
        (0..m)
            .map(|i| {
                let theta = std::f64::consts::PI * (i as f64 + 0.5 + shift * 0.5) / m as f64;
                mid - half * theta.cos()
            })
            .collect()
    }

    /// `m` equally spaced strictly interior points.
    pub fn uniform_interior(&self, m: usize) -> Vec<f64> {
        let h = self.width() / (m + 1) as f64;
        (1..=m).map(|i| self.lo + h * i as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_basics() {
        assert_eq!(parse("u^2").unwrap().eval(3.0).unwrap(), 9.0);
        assert_eq!(parse("exp(u)").unwrap().eval(0.0).unwrap(), 1.0);
        assert_eq!(parse("-u^2").unwrap().eval(3.0).unwrap(), -9.0);
        assert_eq!(parse("2^3^2").unwrap().eval(0.0).unwrap(), 512.0);
        assert_eq!(parse("8/2/2").unwrap().eval(0.0).unwrap(), 2.0);
        assert_eq!(parse("1 - 2 - 3").unwrap().eval(0.0).unwrap(), -4.0);
    }

    #[test]
    fn eval_domain_errors() {
        let e = parse("log(u-1)").unwrap();
        match e.eval(1.0) {
            Err(Error::Domain { node, at }) => {
                assert!(node.starts_with("log"));
                assert_eq!(at, 1.0);
            }
            other => panic!("expected domain error, got {other:?}"),
        }
        assert!(parse("1/u").unwrap().eval(0.0).is_err());
        assert!(parse("u^0.5").unwrap().eval(-1.0).is_err());
        assert_eq!(parse("u^3").unwrap().eval(-2.0).unwrap(), -8.0);
        assert!(parse("u^(-1)").unwrap().eval(0.0).is_err());
        assert!(parse("exp(u)").unwrap().eval(1000.0).is_err());
    }

    #[test]
    fn substitute_composes() {
        let f = parse("u^2 + 1").unwrap();
        let g = parse("u - 3").unwrap();
        let fg = f.substitute(&g);
        assert_eq!(fg.eval(5.0).unwrap(), 5.0);
    }

    #[test]
    fn interval_rejects_empty() {
        assert!(DomainInterval::new(1.0, 1.0).is_err());
        assert!(DomainInterval::new(2.0, 1.0).is_err());
        let d = DomainInterval::open(0.0, 1.0).unwrap();
        assert!(!d.contains(0.0) && d.contains(0.5));
    }

    #[test]
    fn chebyshev_points_are_interior_and_distinct() {
        let d = DomainInterval::new(-1.0, 1.0).unwrap();
        for shift in [0.0, 0.5] {
            let pts = d.chebyshev_points(12, shift);
            assert!(pts.iter().all(|&u| u > -1.0 && u < 1.0));
            for w in pts.windows(2) {
                assert!(w[1] > w[0]);
            }
        }
        let a = d.chebyshev_points(12, 0.0);
        let b = d.chebyshev_points(12, 0.5);
        assert!(a.iter().zip(&b).all(|(x, y)| x != y));
    }
}
