use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Env, Expr, Var};
use crate::error::{Error, Result};
use crate::gauge::PhysicalConstants;

/// Default number of evaluation points for randomized equality.
pub const DEFAULT_POINTS: usize = 20;
/// Default tolerance for randomized equality.
pub const DEFAULT_TOL: f64 = 1e-9;

const SEED: u64 = 0x5eed_cafe;
const MAX_ATTEMPTS_PER_POINT: usize = 10;

/// Outcome of a randomized comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    /// `max_p |a - b| / (1 + max(|a|, |b|))` over the sampled points.
    pub max_dev: f64,
    pub points: usize,
    pub tol: f64,
}

impl Comparison {
    pub fn equal(&self) -> bool {
        self.max_dev <= self.tol
    }
}

fn sample_env(rng: &mut ChaCha8Rng, n: usize) -> Env {
    let mut coord = || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-0.25..0.25));
    let y = (0..n).map(|_| coord()).collect();
    let t = coord();
    let r = coord();
    Env { y, t, r }
}

/// Compares `a` and `b` at [`DEFAULT_POINTS`] complex-perturbed points with real parts in `[-2, 2]`.
///
/// Points where either side is singular are resampled; the comparison fails if
/// too many of them are.
pub fn compare(a: &Expr, b: &Expr, tol: f64) -> Result<Comparison> {
    let n = a.spatial_dim().max(b.spatial_dim());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut max_dev = 0.0f64;
    let mut good = 0;
    let mut attempts = 0;
    while good < DEFAULT_POINTS {
        attempts += 1;
        if attempts > DEFAULT_POINTS * MAX_ATTEMPTS_PER_POINT {
            return Err(Error::Evaluation(format!("too many singular points comparing `{a}` and `{b}`")));
        }
        let env = sample_env(&mut rng, n);
        let (Ok(va), Ok(vb)) = (a.eval(&env), b.eval(&env)) else { continue };
        if !(va.re.is_finite() && va.im.is_finite() && vb.re.is_finite() && vb.im.is_finite()) {
            continue;
        }
        let dev = (va - vb).norm() / (1.0 + va.norm().max(vb.norm()));
        max_dev = max_dev.max(dev);
        good += 1;
    }
    Ok(Comparison { max_dev, points: good, tol })
}

/// Randomized equality; singular comparisons count as unequal.
pub fn equal(a: &Expr, b: &Expr, tol: f64) -> bool {
    compare(a, b, tol).map(|c| c.equal()).unwrap_or(false)
}

/// `∂_r e = (i m / ħ) e`, i.e. `e` represents a wave function on the principal bundle.
pub fn is_homogeneous(e: &Expr, consts: &PhysicalConstants) -> bool {
    let rhs = e.scale(consts.i_m_over_hbar());
    equal(&e.diff(Var::R), &rhs, DEFAULT_TOL)
}
