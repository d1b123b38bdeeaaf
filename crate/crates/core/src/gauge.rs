//! Phase cocycles of the Schrödinger principal bundle.
//!
//! A change of inertial frame acts on `(y, t, z)` by a [`GalileanTransition`] on
//! `(y, t)` together with multiplication of `z` by `exp(E(y, t))`, where the
//! exponent `E` is evaluated at *source* coordinates. Wave functions are pushed
//! forward as `ψ'(y, t) = exp(E(ϑ⁻¹(y, t))) ψ(ϑ⁻¹(y, t))`.
//!
//! Two families are provided:
//!
//! * [`strict_transition`]: depends on an anchor velocity class and satisfies the
//!   cocycle law exactly;
//! * [`projective_transition`]: anchor-free, satisfies the cocycle law only up
//!   to a constant phase per triple of frames.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::spacetime::{transition_between, GalileanTransition, Observer, SpacetimePoint};
use crate::symexpr::{Expr, Var};

/// Mass and reduced Planck constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub m: f64,
    pub hbar: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants { m: 1.0, hbar: 1.0 }
    }
}

impl PhysicalConstants {
    pub fn new(m: f64, hbar: f64) -> Result<Self> {
        if !(m > 0.0 && hbar > 0.0 && m.is_finite() && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("need m > 0 and hbar > 0, got m={m}, hbar={hbar}")));
        }
        Ok(Self { m, hbar })
    }

    /// `i m / ħ`.
    pub fn i_m_over_hbar(&self) -> Complex64 {
        Complex64::new(0.0, self.m / self.hbar)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `F_v(y, t) = (i m / ħ)(⟨v, y⟩ − (t/2)‖v‖²)`.
pub fn phase_f(v: &[f64], consts: &PhysicalConstants, y: &[f64], t: f64) -> Complex64 {
    consts.i_m_over_hbar() * (dot(v, y) - 0.5 * t * dot(v, v))
}

/// Symbolic form of [`phase_f`].
pub fn phase_f_expr(v: &[f64], consts: &PhysicalConstants) -> Expr {
    let linear = Expr::sum(v.iter().enumerate().map(|(k, &vk)| Expr::y(k).scale(vk.into())));
    let quad = Expr::t().scale((-0.5 * dot(v, v)).into());
    (linear + quad).scale(consts.i_m_over_hbar())
}

/// The unit-modulus plane wave `W_v = exp(F_v)` attached to a relative velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneWave {
    pub v: Vec<f64>,
    pub consts: PhysicalConstants,
}

impl PlaneWave {
    pub fn new(v: Vec<f64>, consts: PhysicalConstants) -> Self {
        PlaneWave { v, consts }
    }

    pub fn eval(&self, y: &[f64], t: f64) -> Complex64 {
        phase_f(&self.v, &self.consts, y, t).exp()
    }

    pub fn expr(&self) -> Expr {
        phase_f_expr(&self.v, &self.consts).exp()
    }
}

/// Anything acting on `(y, t, z)` as a Galilean transition with a phase.
pub trait GaugeTransform {
    fn transition(&self) -> &GalileanTransition;

    /// Exponent `E` of the gauge factor at source coordinates.
    fn source_exponent(&self, y: &[f64], t: f64) -> Complex64;

    fn gauge_factor(&self, y: &[f64], t: f64) -> Complex64 {
        self.source_exponent(y, t).exp()
    }
}

/// A transition map of the Schrödinger bundle.
///
/// The exponent at source coordinates is
/// `(i m/ħ)(⟨y + w + ½(t + t0)v', v'⟩ + ⟨w − (t0/2)v, v⟩) + c`
/// with `(v', w, t0)` the coordinate transition and `v = aux_v` the velocity of the
/// anchor class relative to the source frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaugeMapRepr", into = "GaugeMapRepr")]
pub struct GaugeMap {
    g: GalileanTransition,
    aux_v: Vec<f64>,
    consts: PhysicalConstants,
    c: Complex64,
}

#[derive(Serialize, Deserialize)]
struct GaugeMapRepr {
    g: GalileanTransition,
    aux_v: Vec<f64>,
    m: f64,
    hbar: f64,
    #[serde(default)]
    c: Complex64,
}

impl TryFrom<GaugeMapRepr> for GaugeMap {
    type Error = Error;

    fn try_from(r: GaugeMapRepr) -> Result<Self> {
        let consts = PhysicalConstants::new(r.m, r.hbar)?;
        Ok(GaugeMap::new(r.g, r.aux_v, consts)?.with_constant(r.c))
    }
}

impl From<GaugeMap> for GaugeMapRepr {
    fn from(t: GaugeMap) -> Self {
        GaugeMapRepr { g: t.g, aux_v: t.aux_v, m: t.consts.m, hbar: t.consts.hbar, c: t.c }
    }
}

impl GaugeMap {
    pub fn new(g: GalileanTransition, aux_v: Vec<f64>, consts: PhysicalConstants) -> Result<Self> {
        check_dim(g.dim(), aux_v.len())?;
        Ok(GaugeMap { g, aux_v, consts, c: Complex64::new(0.0, 0.0) })
    }

    pub fn identity(n: usize, consts: PhysicalConstants) -> Self {
        GaugeMap { g: GalileanTransition::identity(n), aux_v: vec![0.0; n], consts, c: Complex64::new(0.0, 0.0) }
    }

    /// The pure boost `R_v` acting by `(y, t, z) ↦ (y + v t, t, exp(F_v(y + v t, t)) z)`.
    pub fn boost(v: Vec<f64>, consts: PhysicalConstants) -> Self {
        let n = v.len();
        GaugeMap { g: GalileanTransition::boost(v), aux_v: vec![0.0; n], consts, c: Complex64::new(0.0, 0.0) }
    }

    pub fn with_constant(mut self, c: Complex64) -> Self {
        self.c = c;
        self
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn constant(&self) -> Complex64 {
        self.c
    }

    pub fn aux_velocity(&self) -> &[f64] {
        &self.aux_v
    }

    pub fn consts(&self) -> &PhysicalConstants {
        &self.consts
    }

    /// The constant part `⟨w + (t0/2)v', v'⟩ + ⟨w − (t0/2)v, v⟩` of the real phase (before `i m/ħ`).
    fn constant_phase(&self) -> f64 {
        let (vp, w, t0) = (self.g.velocity(), self.g.shift(), self.g.time_shift());
        let n = self.dim();
        let first: f64 = (0..n).map(|k| (w[k] + 0.5 * t0 * vp[k]) * vp[k]).sum();
        let second: f64 = (0..n).map(|k| (w[k] - 0.5 * t0 * self.aux_v[k]) * self.aux_v[k]).sum();
        first + second
    }

    /// Symbolic exponent at source coordinates.
    pub fn source_exponent_expr(&self) -> Expr {
        let vp = self.g.velocity();
        let linear = Expr::sum(vp.iter().enumerate().map(|(k, &v)| Expr::y(k).scale(v.into())));
        let quad = Expr::t().scale((0.5 * dot(vp, vp)).into());
        let phase = linear + quad + Expr::real(self.constant_phase());
        Expr::add(&phase.scale(self.consts.i_m_over_hbar()), &Expr::constant(self.c))
    }

    /// Exponent as a function of target coordinates, `E ∘ ϑ⁻¹`.
    pub fn target_exponent(&self, y: &[f64], t: f64) -> Complex64 {
        let p = self.g.apply_inverse_unchecked(y, t);
        self.source_exponent(&p.y, p.t)
    }

    /// Symbolic `E ∘ ϑ⁻¹`.
    pub fn target_exponent_expr(&self) -> Expr {
        self.source_exponent_expr().substitute(&inverse_substitution(&self.g))
    }

    /// True when the gauge factor is identically one.
    pub fn is_trivial_phase(&self) -> bool {
        self.g.velocity().iter().all(|&v| v == 0.0)
            && self.aux_v.iter().all(|&v| v == 0.0)
            && self.c == Complex64::new(0.0, 0.0)
    }

    /// `(y, t, z) ↦ (ϑ(y, t), exp(E(y, t)) z)`.
    pub fn apply(&self, p: &SpacetimePoint, z: Complex64) -> Result<(SpacetimePoint, Complex64)> {
        let q = self.g.apply(p)?;
        Ok((q, self.gauge_factor(&p.y, p.t) * z))
    }
}

impl GaugeTransform for GaugeMap {
    fn transition(&self) -> &GalileanTransition {
        &self.g
    }

    fn source_exponent(&self, y: &[f64], t: f64) -> Complex64 {
        let vp = self.g.velocity();
        let linear = dot(vp, y) + 0.5 * t * dot(vp, vp);
        self.consts.i_m_over_hbar() * (linear + self.constant_phase()) + self.c
    }
}

/// Substitution `(y, t) ↦ ϑ⁻¹(y, t) = (y − w − v t, t − t0)`.
pub(crate) fn inverse_substitution(g: &GalileanTransition) -> BTreeMap<Var, Expr> {
    let mut map = BTreeMap::new();
    for k in 0..g.dim() {
        let shifted = Expr::y(k) - Expr::real(g.shift()[k]) - Expr::t().scale(g.velocity()[k].into());
        map.insert(Var::Y(k), shifted);
    }
    map.insert(Var::T, Expr::t() - Expr::real(g.time_shift()));
    map
}

/// Anchor-free representative: gauge factor `exp((i m/ħ)(⟨y, v⟩ + (t/2)‖v‖²))` at source coordinates.
pub fn projective_transition(g: &GalileanTransition, consts: &PhysicalConstants) -> GaugeMap {
    let n = g.dim();
    let (v, w, t0) = (g.velocity(), g.shift(), g.time_shift());
    let offset = dot(w, v) + 0.5 * t0 * dot(v, v);
    GaugeMap {
        g: g.clone(),
        aux_v: vec![0.0; n],
        consts: *consts,
        c: -consts.i_m_over_hbar() * offset,
    }
}

/// Transition between two observers for the bundle built on the anchor class `anchor_u`.
pub fn strict_transition(
    from: &Observer,
    to: &Observer,
    anchor_u: &[f64],
    consts: &PhysicalConstants,
) -> Result<GaugeMap> {
    check_dim(from.dim(), anchor_u.len())?;
    let g = transition_between(from, to)?;
    let aux_v = anchor_u.iter().zip(from.velocity()).map(|(a, u)| a - u).collect();
    GaugeMap::new(g, aux_v, *consts)
}

/// Symbolic push-forward `exp(E ∘ ϑ⁻¹) · ψ ∘ ϑ⁻¹`.
pub fn push_forward_expr(map: &GaugeMap, psi: &Expr) -> Result<Expr> {
    if psi.spatial_dim() > map.dim() {
        return Err(Error::DimensionMismatch { expected: map.dim(), found: psi.spatial_dim() });
    }
    let moved = psi.substitute(&inverse_substitution(&map.g));
    Ok(map.target_exponent_expr().exp() * moved)
}

/// Push-forward of a callable wave function.
pub fn push_forward_fn<'a, F>(map: &'a GaugeMap, psi: F) -> impl Fn(&[f64], f64) -> Complex64 + 'a
where
    F: Fn(&[f64], f64) -> Complex64 + 'a,
{
    move |y: &[f64], t: f64| {
        let p = map.g.apply_inverse_unchecked(y, t);
        map.source_exponent(&p.y, p.t).exp() * psi(&p.y, p.t)
    }
}

/// `(ħ²/2m) Σ ∂²ψ/∂y_k² + iħ ∂ψ/∂t − U ψ` in `n` spatial dimensions.
pub fn schrodinger_operator(psi: &Expr, potential: Option<&Expr>, n: usize, consts: &PhysicalConstants) -> Expr {
    let laplacian = Expr::sum((0..n).map(|k| psi.diff(Var::Y(k)).diff(Var::Y(k))));
    let kinetic = laplacian.scale((consts.hbar * consts.hbar / (2.0 * consts.m)).into());
    let time = psi.diff(Var::T).scale(Complex64::new(0.0, consts.hbar));
    let out = kinetic + time;
    match potential {
        Some(u) => out - u * psi,
        None => out,
    }
}

/// Residuals of the conditions on `F` for `e^F ψ(y − vt, t)` to preserve the free operator.
#[derive(Clone, Debug)]
pub struct GaugeResiduals {
    /// `i ∂_t F + (ħ/2m)(Σ (∂_k F)² + Σ ∂²_k F)`.
    pub scalar: Expr,
    /// `(ħ/m) ∂_k F − i v_k` for each `k`.
    pub gradient: Vec<Expr>,
}

pub fn gauge_invariance_residual(f: &Expr, v: &[f64], consts: &PhysicalConstants) -> Result<GaugeResiduals> {
    f.require_r_free()?;
    let n = v.len();
    if f.spatial_dim() > n {
        return Err(Error::DimensionMismatch { expected: n, found: f.spatial_dim() });
    }
    let ratio = consts.hbar / consts.m;
    let grads: Vec<Expr> = (0..n).map(|k| f.diff(Var::Y(k))).collect();
    let squares = Expr::sum(grads.iter().map(|g| g * g));
    let second = Expr::sum((0..n).map(|k| grads[k].diff(Var::Y(k))));
    let scalar = f.diff(Var::T).scale(Complex64::i()) + (squares + second).scale((0.5 * ratio).into());
    let gradient = grads
        .iter()
        .zip(v)
        .map(|(g, &vk)| g.scale(ratio.into()) - Expr::constant(Complex64::new(0.0, vk)))
        .collect();
    Ok(GaugeResiduals { scalar, gradient })
}

/// `S⁰(e^F ψ(y − vt, t)) − e^F (S⁰ψ)(y − vt, t)`; vanishes for every `ψ` iff `F` solves the residual system.
pub fn covariance_defect(f: &Expr, psi: &Expr, v: &[f64], consts: &PhysicalConstants) -> Result<Expr> {
    f.require_r_free()?;
    let n = v.len();
    let g = GalileanTransition::boost(v.to_vec());
    let sub = inverse_substitution(&g);
    let phase = f.exp();
    let lhs = schrodinger_operator(&(&phase * psi.substitute(&sub)), None, n, consts);
    let rhs = phase * schrodinger_operator(psi, None, n, consts).substitute(&sub);
    Ok(lhs - rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CocycleMode {
    Strict,
    Projective,
}

/// Maps `a → b`, `b → c` and the direct `a → c`.
#[derive(Clone, Debug)]
pub struct CocycleTriple<T> {
    pub first: T,
    pub second: T,
    pub direct: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleReport {
    pub mode: CocycleMode,
    /// Max pointwise deviation of `second ∘ first` from `direct`, coordinates and gauge factor.
    pub max_dev: f64,
    /// Max deviation of the coordinate parts alone.
    pub coord_dev: f64,
    /// Max over triples of the standard deviation of the phase of `(second ∘ first) / direct`.
    pub phase_stddev: f64,
    /// Max over triples of `|ratio − 1|`; non-zero when the cocycle only holds projectively.
    pub max_unit_deviation: f64,
    pub samples: usize,
}

impl CocycleReport {
    pub fn passes(&self, tol: f64) -> bool {
        match self.mode {
            CocycleMode::Strict => self.max_dev <= tol,
            CocycleMode::Projective => self.phase_stddev <= tol && self.coord_dev <= tol,
        }
    }
}

/// Checks the composition law of a family of gauge transforms at sample points.
pub fn check_cocycle<T: GaugeTransform>(
    triples: &[CocycleTriple<T>],
    points: &[SpacetimePoint],
    mode: CocycleMode,
) -> Result<CocycleReport> {
    let mut max_dev = 0.0f64;
    let mut coord_dev = 0.0f64;
    let mut phase_stddev = 0.0f64;
    let mut max_unit_deviation = 0.0f64;
    for tr in triples {
        let mut phases = Vec::with_capacity(points.len());
        let mut reference: Option<Complex64> = None;
        for p in points {
            let q1 = tr.first.transition().apply(p)?;
            let q2 = tr.second.transition().apply(&q1)?;
            let qd = tr.direct.transition().apply(p)?;
            let dc = q2.y.iter().zip(&qd.y).map(|(a, b)| (a - b).abs()).fold((q2.t - qd.t).abs(), f64::max);
            coord_dev = coord_dev.max(dc);

            let composed = tr.first.source_exponent(&p.y, p.t) + tr.second.source_exponent(&q1.y, q1.t);
            let direct = tr.direct.source_exponent(&p.y, p.t);
            let dz = (composed.exp() - direct.exp()).norm();
            max_dev = max_dev.max(dc.max(dz));

            let ratio = (composed - direct).exp();
            let r0 = *reference.get_or_insert(ratio);
            phases.push((ratio / r0).arg());
            max_unit_deviation = max_unit_deviation.max((ratio - 1.0).norm());
        }
        phase_stddev = phase_stddev.max(stddev(&phases));
    }
    Ok(CocycleReport {
        mode,
        max_dev,
        coord_dev,
        phase_stddev,
        max_unit_deviation,
        samples: triples.len() * points.len(),
    })
}

fn stddev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// A transform whose exponent carries an extra `i·eps·y1`; used to check that cocycle checks detect defects.
#[derive(Clone, Debug)]
pub struct PhasePerturbed<T> {
    pub inner: T,
    pub eps: f64,
}

impl<T> PhasePerturbed<T> {
    pub fn new(inner: T, eps: f64) -> Self {
        PhasePerturbed { inner, eps }
    }
}

impl<T: GaugeTransform> GaugeTransform for PhasePerturbed<T> {
    fn transition(&self) -> &GalileanTransition {
        self.inner.transition()
    }

    fn source_exponent(&self, y: &[f64], t: f64) -> Complex64 {
        self.inner.source_exponent(y, t) + Complex64::new(0.0, self.eps * y[0])
    }
}

/// Triples of strict transitions over observer triples, all for one anchor class.
pub fn strict_family(
    observers: &[(Observer, Observer, Observer)],
    anchor_u: &[f64],
    consts: &PhysicalConstants,
) -> Result<Vec<CocycleTriple<GaugeMap>>> {
    observers
        .iter()
        .map(|(a, b, c)| {
            Ok(CocycleTriple {
                first: strict_transition(a, b, anchor_u, consts)?,
                second: strict_transition(b, c, anchor_u, consts)?,
                direct: strict_transition(a, c, anchor_u, consts)?,
            })
        })
        .collect()
}

/// Triples of projective representatives over observer triples.
pub fn projective_family(
    observers: &[(Observer, Observer, Observer)],
    consts: &PhysicalConstants,
) -> Result<Vec<CocycleTriple<GaugeMap>>> {
    observers
        .iter()
        .map(|(a, b, c)| {
            Ok(CocycleTriple {
                first: projective_transition(&transition_between(a, b)?, consts),
                second: projective_transition(&transition_between(b, c)?, consts),
                direct: projective_transition(&transition_between(a, c)?, consts),
            })
        })
        .collect()
}
