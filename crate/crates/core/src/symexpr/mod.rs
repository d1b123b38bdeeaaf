//! Exact expressions over the coordinates `y1..yn, t, r`.
//!
//! Trees are immutable and shared through `Arc`. Every node is built through the
//! folding constructors below, so constants are combined eagerly and trivial
//! identities (`0 + e`, `1 * e`, `e^1`, ...) never appear in a tree. There is no
//! other simplification; equality is decided numerically by [`compare`].

mod equal;
mod parser;
mod print;
pub mod random;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use equal::{compare, equal, is_homogeneous, Comparison, DEFAULT_POINTS, DEFAULT_TOL};
pub use parser::parse;

/// A coordinate. `Y(k)` is the spatial coordinate `y{k+1}` (zero-based index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Y(usize),
    T,
    R,
}

impl Var {
    /// Position in the ordered coordinate list `(y1..yn, t, r)`.
    pub fn index(self, n: usize) -> usize {
        match self {
            Var::Y(k) => k,
            Var::T => n,
            Var::R => n + 1,
        }
    }

    pub fn from_index(i: usize, n: usize) -> Var {
        if i < n {
            Var::Y(i)
        } else if i == n {
            Var::T
        } else {
            Var::R
        }
    }

    /// All coordinates `(y1..yn, t, r)` in order.
    pub fn all(n: usize) -> Vec<Var> {
        (0..n + 2).map(|i| Var::from_index(i, n)).collect()
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Y(k) => write!(f, "y{}", k + 1),
            Var::T => f.write_str("t"),
            Var::R => f.write_str("r"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Node {
    Const(Complex64),
    Var(Var),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Pow(Expr, i32),
    Exp(Expr),
    Sin(Expr),
    Cos(Expr),
}

#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Expr {
    fn wrap(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: Complex64) -> Expr {
        Expr::wrap(Node::Const(c))
    }

    pub fn real(x: f64) -> Expr {
        Expr::constant(Complex64::new(x, 0.0))
    }

    pub fn zero() -> Expr {
        Expr::constant(ZERO)
    }

    pub fn one() -> Expr {
        Expr::constant(ONE)
    }

    /// The imaginary unit.
    pub fn i() -> Expr {
        Expr::constant(Complex64::i())
    }

    pub fn var(v: Var) -> Expr {
        Expr::wrap(Node::Var(v))
    }

    /// Spatial coordinate with zero-based index `k` (printed `y{k+1}`).
    pub fn y(k: usize) -> Expr {
        Expr::var(Var::Y(k))
    }

    pub fn t() -> Expr {
        Expr::var(Var::T)
    }

    pub fn r() -> Expr {
        Expr::var(Var::R)
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(ZERO)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(ONE)
    }

    pub fn add(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x + y),
            (Some(x), _) if x == ZERO => b.clone(),
            (_, Some(y)) if y == ZERO => a.clone(),
            _ => Expr::wrap(Node::Add(a.clone(), b.clone())),
        }
    }

    pub fn sub(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x - y),
            (_, Some(y)) if y == ZERO => a.clone(),
            (Some(x), _) if x == ZERO => Expr::neg(b),
            _ => Expr::wrap(Node::Sub(a.clone(), b.clone())),
        }
    }

    pub fn mul(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::constant(x * y),
            (Some(x), _) if x == ZERO => Expr::zero(),
            (_, Some(y)) if y == ZERO => Expr::zero(),
            (Some(x), _) if x == ONE => b.clone(),
            (_, Some(y)) if y == ONE => a.clone(),
            (Some(x), _) if x == -ONE => Expr::neg(b),
            _ => Expr::wrap(Node::Mul(a.clone(), b.clone())),
        }
    }

    pub fn div(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != ZERO => Expr::constant(x / y),
            (Some(x), _) if x == ZERO => Expr::zero(),
            (_, Some(y)) if y == ONE => a.clone(),
            _ => Expr::wrap(Node::Div(a.clone(), b.clone())),
        }
    }

    pub fn neg(a: &Expr) -> Expr {
        match a.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::wrap(Node::Neg(a.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Expr {
        match (n, self.as_const()) {
            (0, _) => Expr::one(),
            (1, _) => self.clone(),
            (_, Some(c)) if n > 0 || c != ZERO => Expr::constant(c.powi(n)),
            _ => Expr::wrap(Node::Pow(self.clone(), n)),
        }
    }

    pub fn exp(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.exp()),
            None => Expr::wrap(Node::Exp(self.clone())),
        }
    }

    pub fn sin(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.sin()),
            None => Expr::wrap(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.cos()),
            None => Expr::wrap(Node::Cos(self.clone())),
        }
    }

    /// `Σ terms`, zero for an empty iterator.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::zero(), |acc, e| Expr::add(&acc, &e))
    }

    pub fn scale(&self, c: Complex64) -> Expr {
        Expr::mul(&Expr::constant(c), self)
    }

    /// Exact partial derivative.
    pub fn diff(&self, v: Var) -> Expr {
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(w) => {
                if *w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => Expr::add(&a.diff(v), &b.diff(v)),
            Node::Sub(a, b) => Expr::sub(&a.diff(v), &b.diff(v)),
            Node::Mul(a, b) => Expr::add(&Expr::mul(&a.diff(v), b), &Expr::mul(a, &b.diff(v))),
            Node::Div(a, b) => {
                let da = a.diff(v);
                let db = b.diff(v);
                if db.is_zero() {
                    Expr::div(&da, b)
                } else {
                    let num = Expr::sub(&Expr::mul(&da, b), &Expr::mul(a, &db));
                    Expr::div(&num, &b.powi(2))
                }
            }
            Node::Neg(a) => Expr::neg(&a.diff(v)),
            Node::Pow(a, n) => {
                let da = a.diff(v);
                let outer = Expr::mul(&Expr::real(*n as f64), &a.powi(n - 1));
                Expr::mul(&outer, &da)
            }
            Node::Exp(a) => Expr::mul(&a.diff(v), self),
            Node::Sin(a) => Expr::mul(&a.diff(v), &a.cos()),
            Node::Cos(a) => Expr::neg(&Expr::mul(&a.diff(v), &a.sin())),
        }
    }

    /// Does the expression mention `v`?
    pub fn depends_on(&self, v: Var) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(w) => *w == v,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.depends_on(v) || b.depends_on(v)
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Sin(a) | Node::Cos(a) => a.depends_on(v),
        }
    }

    /// Set of coordinates mentioned anywhere in the tree.
    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(v) => {
                out.insert(*v);
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Sin(a) | Node::Cos(a) => a.collect_vars(out),
        }
    }

    /// Largest number of spatial coordinates needed to evaluate the expression.
    pub fn spatial_dim(&self) -> usize {
        self.variables()
            .iter()
            .filter_map(|v| match v {
                Var::Y(k) => Some(k + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Rejects expressions that mention `r`.
    pub fn require_r_free(&self) -> Result<()> {
        if self.depends_on(Var::R) {
            Err(Error::DependsOnR(self.to_string()))
        } else {
            Ok(())
        }
    }

    /// Simultaneous substitution of coordinates by expressions.
    pub fn substitute(&self, map: &BTreeMap<Var, Expr>) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Node::Add(a, b) => Expr::add(&a.substitute(map), &b.substitute(map)),
            Node::Sub(a, b) => Expr::sub(&a.substitute(map), &b.substitute(map)),
            Node::Mul(a, b) => Expr::mul(&a.substitute(map), &b.substitute(map)),
            Node::Div(a, b) => Expr::div(&a.substitute(map), &b.substitute(map)),
            Node::Neg(a) => Expr::neg(&a.substitute(map)),
            Node::Pow(a, n) => a.substitute(map).powi(*n),
            Node::Exp(a) => a.substitute(map).exp(),
            Node::Sin(a) => a.substitute(map).sin(),
            Node::Cos(a) => a.substitute(map).cos(),
        }
    }

    /// Evaluates at a point. Division by an exact zero yields an error.
    pub fn eval(&self, env: &Env) -> Result<Complex64> {
        let value = match self.node() {
            Node::Const(c) => *c,
            Node::Var(v) => env.get(*v)?,
            Node::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Node::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Node::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Node::Div(a, b) => {
                let den = b.eval(env)?;
                if den.norm() < 1e-300 {
                    return Err(Error::Evaluation(format!("division by zero in `{self}`")));
                }
                a.eval(env)? / den
            }
            Node::Neg(a) => -a.eval(env)?,
            Node::Pow(a, n) => {
                let base = a.eval(env)?;
                if *n < 0 && base.norm() < 1e-300 {
                    return Err(Error::Evaluation(format!("negative power of zero in `{self}`")));
                }
                base.powi(*n)
            }
            Node::Exp(a) => a.eval(env)?.exp(),
            Node::Sin(a) => a.eval(env)?.sin(),
            Node::Cos(a) => a.eval(env)?.cos(),
        };
        Ok(value)
    }

    /// Evaluates at a real point `(y, t)` with `r = 0`.
    pub fn eval_real(&self, y: &[f64], t: f64) -> Result<Complex64> {
        self.eval(&Env::real(y, t, 0.0))
    }
}

/// Coordinate values for evaluation. Values may be complex.
#[derive(Clone, Debug, PartialEq)]
pub struct Env {
    pub y: Vec<Complex64>,
    pub t: Complex64,
    pub r: Complex64,
}

impl Env {
    pub fn real(y: &[f64], t: f64, r: f64) -> Env {
        Env {
            y: y.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            t: Complex64::new(t, 0.0),
            r: Complex64::new(r, 0.0),
        }
    }

    pub fn get(&self, v: Var) -> Result<Complex64> {
        match v {
            Var::Y(k) => self
                .y
                .get(k)
                .copied()
                .ok_or_else(|| Error::Evaluation(format!("no value for y{}", k + 1))),
            Var::T => Ok(self.t),
            Var::R => Ok(self.r),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $ctor:path) => {
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $ctor(self, rhs)
            }
        }
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $ctor(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $ctor(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $ctor(self, &rhs)
            }
        }
    };
}

binop!(Add, add, Expr::add);
binop!(Sub, sub, Expr::sub);
binop!(Mul, mul, Expr::mul);
binop!(Div, div, Expr::div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<f64> for Expr {
    fn from(x: f64) -> Expr {
        Expr::real(x)
    }
}

impl From<Complex64> for Expr {
    fn from(c: Complex64) -> Expr {
        Expr::constant(c)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Expr {
        Expr::var(v)
    }
}
