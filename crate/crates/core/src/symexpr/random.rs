//! Random members of the expression class the engine is built for:
//! sums of polynomials times exponentials of linear forms. Used by the
//! randomized identity checks and the `verify` suites.

use num_complex::Complex64;
use rand::Rng;

use super::{Expr, Var};

#[derive(Clone, Debug)]
pub struct ExprShape {
    /// Number of `polynomial × exp(linear)` terms.
    pub terms: usize,
    /// Monomials per polynomial.
    pub monomials: usize,
    /// Maximal total degree of a monomial.
    pub max_degree: u32,
    /// Whether `r` may appear.
    pub include_r: bool,
}

impl Default for ExprShape {
    fn default() -> Self {
        ExprShape { terms: 2, monomials: 3, max_degree: 3, include_r: true }
    }
}

impl ExprShape {
    pub fn r_free() -> Self {
        ExprShape { include_r: false, ..Self::default() }
    }
}

fn coefficient<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))
}

fn vars(n: usize, include_r: bool) -> Vec<Var> {
    let mut v: Vec<Var> = (0..n).map(Var::Y).collect();
    v.push(Var::T);
    if include_r {
        v.push(Var::R);
    }
    v
}

/// A random polynomial in the coordinates allowed by `shape`.
pub fn random_polynomial<R: Rng>(rng: &mut R, n: usize, shape: &ExprShape) -> Expr {
    let vs = vars(n, shape.include_r);
    Expr::sum((0..shape.monomials).map(|_| {
        let degree = rng.gen_range(0..=shape.max_degree);
        let mut m = Expr::constant(coefficient(rng));
        for _ in 0..degree {
            let v = vs[rng.gen_range(0..vs.len())];
            m = m * Expr::var(v);
        }
        m
    }))
}

/// A random linear form `Σ c_k x_k` with complex coefficients of modulus below one.
pub fn random_linear<R: Rng>(rng: &mut R, n: usize, include_r: bool) -> Expr {
    Expr::sum(vars(n, include_r).into_iter().map(|v| {
        let c = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-1.0..1.0));
        Expr::var(v).scale(c)
    }))
}

/// `Σ_j p_j · exp(L_j)` with random polynomials `p_j` and linear forms `L_j`.
pub fn random_expr<R: Rng>(rng: &mut R, n: usize, shape: &ExprShape) -> Expr {
    Expr::sum((0..shape.terms.max(1)).map(|_| {
        let p = random_polynomial(rng, n, shape);
        let l = random_linear(rng, n, shape.include_r);
        p * l.exp()
    }))
}
