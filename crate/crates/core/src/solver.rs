//! Split-step Fourier evolution of `iħ ∂_tψ = −(ħ²/2m) Δψ + U ψ` and closed-form references.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::fields::spectral::{apply_separable, fft_nd, wavenumbers, Direction};
use crate::fields::{boost_coordinates, boost_field, l2_distance, sample_expr, GridSpec, WaveField};
use crate::gauge::{inverse_substitution, projective_transition, GaugeMap, PhysicalConstants};
use crate::spacetime::GalileanTransition;
use crate::symexpr::{Expr, Var};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Half potential kick, exact free step, half potential kick.
    #[default]
    Strang,
}

#[derive(Clone, Debug)]
pub struct EvolutionConfig {
    /// Step size; negative values run the equation backwards.
    pub dt: f64,
    pub steps: usize,
    /// Potential `U(y, t)`; must not involve `r`.
    pub potential: Expr,
    pub scheme: Scheme,
    /// Record a slice every this many steps (0: only the first and last).
    pub record_every: usize,
    /// Permit complex `U`, which breaks norm conservation.
    pub allow_complex_potential: bool,
    /// With `U = 0`, take the free steps between recorded slices as one exact step.
    pub fuse_free_steps: bool,
}

impl EvolutionConfig {
    pub fn free(dt: f64, steps: usize) -> Self {
        EvolutionConfig {
            dt,
            steps,
            potential: Expr::zero(),
            scheme: Scheme::Strang,
            record_every: 0,
            allow_complex_potential: false,
            fuse_free_steps: true,
        }
    }

    pub fn with_potential(mut self, u: Expr) -> Self {
        self.potential = u;
        self
    }

    pub fn recording_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub fn unfused(mut self) -> Self {
        self.fuse_free_steps = false;
        self
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.steps as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {} must be finite and non-zero", self.dt)));
        }
        self.potential.require_r_free()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub step: usize,
    pub t: f64,
    pub norm: f64,
    pub max_abs: f64,
}

#[derive(Clone, Debug)]
pub struct Evolution {
    /// Recorded slices, first is the initial field, last the final one.
    pub slices: Vec<WaveField>,
    pub log: Vec<LogEntry>,
}

impl Evolution {
    pub fn last(&self) -> &WaveField {
        self.slices.last().expect("the initial slice is always recorded")
    }

    pub fn into_last(mut self) -> WaveField {
        self.slices.pop().expect("the initial slice is always recorded")
    }
}

fn free_factors(spec: &GridSpec, consts: &PhysicalConstants, tau: f64) -> Vec<Vec<Complex64>> {
    let c = consts.hbar * tau / (2.0 * consts.m);
    spec.sizes()
        .iter()
        .zip(spec.extents())
        .map(|(&s, &l)| wavenumbers(s, l).into_iter().map(|k| Complex64::from_polar(1.0, -c * k * k)).collect())
        .collect()
}

fn free_step(data: &mut [Complex64], spec: &GridSpec, factors: &[Vec<Complex64>]) {
    fft_nd(data, spec.sizes(), Direction::Forward);
    apply_separable(data, spec.sizes(), factors);
    fft_nd(data, spec.sizes(), Direction::Inverse);
}

fn kick_factors(potential: &Expr, spec: &GridSpec, t: f64, scale: Complex64, allow_complex: bool) -> Result<Vec<Complex64>> {
    let u = sample_expr(potential, spec, t)?;
    if !allow_complex {
        if let Some(z) = u.iter().find(|z| z.im != 0.0) {
            return Err(Error::InvalidParameter(format!("potential takes the complex value {z}")));
        }
    }
    Ok(u.into_par_iter().map(|z| (scale * z).exp()).collect())
}

fn multiply(data: &mut [Complex64], factors: &[Complex64]) {
    data.par_iter_mut().zip(factors).for_each(|(z, f)| *z *= f);
}

fn all_finite(data: &[Complex64]) -> bool {
    data.par_iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Evolves `f0` for `cfg.steps` steps of size `cfg.dt`.
pub fn evolve(f0: &WaveField, cfg: &EvolutionConfig) -> Result<Evolution> {
    cfg.validate()?;
    if cfg.potential.spatial_dim() > f0.dim() {
        return Err(Error::DimensionMismatch { expected: f0.dim(), found: cfg.potential.spatial_dim() });
    }
    if !all_finite(f0.samples()) {
        return Err(Error::Diverged { step: 0 });
    }
    let spec = f0.spec().clone();
    let consts = *f0.consts();
    let t_start = f0.time();
    let time_at = |step: usize| t_start + step as f64 * cfg.dt;
    let record = |step: usize| step == cfg.steps || (cfg.record_every > 0 && step % cfg.record_every == 0);

    let mut slices = vec![f0.clone()];
    let mut log = vec![entry(f0, 0)];
    let mut data = f0.samples().to_vec();
    let push = |data: &[Complex64], step: usize, slices: &mut Vec<WaveField>, log: &mut Vec<LogEntry>| -> Result<()> {
        let f = f0.with_samples(data.to_vec(), time_at(step))?;
        log.push(entry(&f, step));
        slices.push(f);
        Ok(())
    };

    if cfg.potential.is_zero() && cfg.fuse_free_steps {
        let mut done = 0;
        while done < cfg.steps {
            let next = (done + 1..=cfg.steps).find(|&s| record(s)).expect("the last step is recorded");
            let factors = free_factors(&spec, &consts, (next - done) as f64 * cfg.dt);
            free_step(&mut data, &spec, &factors);
            if !all_finite(&data) {
                return Err(Error::Diverged { step: next });
            }
            push(&data, next, &mut slices, &mut log)?;
            done = next;
        }
        return Ok(Evolution { slices, log });
    }

    let factors = free_factors(&spec, &consts, cfg.dt);
    let half_kick = Complex64::new(0.0, -0.5 * cfg.dt / consts.hbar);
    let static_kick = if cfg.potential.depends_on(Var::T) || cfg.potential.is_zero() {
        None
    } else {
        Some(kick_factors(&cfg.potential, &spec, t_start, half_kick, cfg.allow_complex_potential)?)
    };
    for step in 1..=cfg.steps {
        let t_mid = t_start + (step as f64 - 0.5) * cfg.dt;
        let kick = match (&static_kick, cfg.potential.is_zero()) {
            (Some(k), _) => Some(std::borrow::Cow::Borrowed(k)),
            (None, true) => None,
            (None, false) => Some(std::borrow::Cow::Owned(kick_factors(
                &cfg.potential,
                &spec,
                t_mid,
                half_kick,
                cfg.allow_complex_potential,
            )?)),
        };
        if let Some(k) = &kick {
            multiply(&mut data, k);
        }
        free_step(&mut data, &spec, &factors);
        if let Some(k) = &kick {
            multiply(&mut data, k);
        }
        if !all_finite(&data) {
            return Err(Error::Diverged { step });
        }
        if record(step) {
            push(&data, step, &mut slices, &mut log)?;
        }
    }
    Ok(Evolution { slices, log })
}

fn entry(f: &WaveField, step: usize) -> LogEntry {
    LogEntry { step, t: f.time(), norm: f.l2_norm(), max_abs: f.max_abs() }
}

/// Closed-form free Gaussian packet, boosted to velocity `velocity` by the plane-wave gauge factor.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeGaussian {
    pub sigma: f64,
    pub center: Vec<f64>,
    pub velocity: Vec<f64>,
    pub consts: PhysicalConstants,
}

impl FreeGaussian {
    pub fn new(sigma: f64, center: Vec<f64>, velocity: Vec<f64>, consts: PhysicalConstants) -> Result<Self> {
        check_dim(center.len(), velocity.len())?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma = {sigma} must be positive")));
        }
        Ok(FreeGaussian { sigma, center, velocity, consts })
    }

    /// `(1 + iħt/mσ²)^{−n/2} exp(−|y − c|² / (2σ²(1 + iħt/mσ²)))`.
    pub fn rest(&self, y: &[f64], t: f64) -> Complex64 {
        let n = self.center.len() as f64;
        let s2 = self.sigma * self.sigma;
        let a = Complex64::new(1.0, self.consts.hbar * t / (self.consts.m * s2));
        let r2: f64 = y.iter().zip(&self.center).map(|(x, c)| (x - c) * (x - c)).sum();
        a.powf(-0.5 * n) * (-r2 / (2.0 * s2 * a)).exp()
    }

    /// `exp(F_v(y, t)) · rest(y − v t, t)`.
    pub fn eval(&self, y: &[f64], t: f64) -> Complex64 {
        let moved: Vec<f64> = y.iter().zip(&self.velocity).map(|(x, v)| x - v * t).collect();
        let v2: f64 = self.velocity.iter().map(|v| v * v).sum();
        let vy: f64 = self.velocity.iter().zip(y).map(|(v, x)| v * x).sum();
        let phase = self.consts.m / self.consts.hbar * (vy - 0.5 * t * v2);
        Complex64::from_polar(1.0, phase) * self.rest(&moved, t)
    }
}

/// The boosted spreading Gaussian as a closure.
pub fn analytic_free_gaussian(
    sigma: f64,
    center: Vec<f64>,
    velocity: Vec<f64>,
    consts: PhysicalConstants,
) -> Result<impl Fn(&[f64], f64) -> Complex64 + Sync + Clone> {
    let g = FreeGaussian::new(sigma, center, velocity, consts)?;
    Ok(move |y: &[f64], t: f64| g.eval(y, t))
}

/// Whether the frame change carries its gauge factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeMode {
    Full,
    /// Diagnostic: coordinate change only.
    CoordinatesOnly,
}

#[derive(Clone, Debug)]
pub struct CovarianceReport {
    /// Boost of the evolved field.
    pub evolve_then_boost: WaveField,
    /// Evolution of the boosted field under the transformed potential.
    pub boost_then_evolve: WaveField,
    pub relative_distance: f64,
    pub mode: GaugeMode,
}

/// Potential seen in the target frame, `U ∘ ϑ⁻¹`.
pub fn transformed_potential(u: &Expr, g: &GalileanTransition) -> Expr {
    if u.is_zero() {
        return u.clone();
    }
    u.substitute(&inverse_substitution(g))
}

fn apply_map(map: &GaugeMap, f: &WaveField, mode: GaugeMode) -> Result<WaveField> {
    match mode {
        GaugeMode::Full => boost_field(map, f),
        GaugeMode::CoordinatesOnly => boost_coordinates(map, f),
    }
}

/// Compares evolve-then-transform with transform-then-evolve for the transition map `map`.
pub fn covariance_check_with(
    f0: &WaveField,
    map: &GaugeMap,
    cfg: &EvolutionConfig,
    mode: GaugeMode,
) -> Result<CovarianceReport> {
    let evolved = evolve(f0, &cfg.clone().recording_every(0))?.into_last();
    let a = apply_map(map, &evolved, mode)?;
    let boosted = apply_map(map, f0, mode)?;
    let cfg_b = EvolutionConfig {
        potential: transformed_potential(&cfg.potential, crate::gauge::GaugeTransform::transition(map)),
        ..cfg.clone()
    }
    .recording_every(0);
    let b = evolve(&boosted, &cfg_b)?.into_last();
    let relative_distance = l2_distance(&a, &b)? / f0.l2_norm().max(f64::MIN_POSITIVE);
    Ok(CovarianceReport { evolve_then_boost: a, boost_then_evolve: b, relative_distance, mode })
}

/// [`covariance_check_with`] for the anchor-free transition map of `g`.
pub fn covariance_check(f0: &WaveField, g: &GalileanTransition, cfg: &EvolutionConfig, mode: GaugeMode) -> Result<CovarianceReport> {
    check_dim(f0.dim(), g.dim())?;
    let map = projective_transition(g, f0.consts());
    covariance_check_with(f0, &map, cfg, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::schrodinger_residual;
    use crate::spacetime::Observer;
    use crate::symexpr::parse;
    use std::f64::consts::PI;

    const UNIT: PhysicalConstants = PhysicalConstants { m: 1.0, hbar: 1.0 };

    fn gaussian_field(n: usize, size: usize, extent: f64, g: &FreeGaussian, t: f64) -> WaveField {
        let spec = GridSpec::cube(n, size, extent).unwrap();
        WaveField::from_fn(|y, t| g.eval(y, t), spec, t, Observer::rest(n), g.consts).unwrap()
    }

    #[test]
    fn plane_wave_mode_is_exact() {
        let consts = PhysicalConstants::new(1.3, 0.7).unwrap();
        let l = 16.0;
        let k = 2.0 * PI * 3.0 / l;
        let spec = GridSpec::cube(1, 64, l).unwrap();
        let f0 = WaveField::from_fn(|y, _| Complex64::from_polar(1.0, k * y[0]), spec, 0.0, Observer::rest(1), consts).unwrap();
        for cfg in [EvolutionConfig::free(1e-2, 150), EvolutionConfig::free(1e-2, 150).unfused()] {
            let out = evolve(&f0, &cfg).unwrap();
            let t = cfg.total_time();
            let phase = Complex64::from_polar(1.0, -consts.hbar * k * k * t / (2.0 * consts.m));
            let dev = out.last().samples().iter().zip(f0.samples()).map(|(a, b)| (a - phase * b).norm()).fold(0.0, f64::max);
            assert!(dev <= 1e-10, "{dev}");
            assert!((out.last().time() - t).abs() < 1e-12);
        }
    }

    #[test]
    fn free_gaussian_matches_closed_form() {
        let g = FreeGaussian::new(1.0, vec![0.0], vec![0.0], UNIT).unwrap();
        let f0 = gaussian_field(1, 1024, 80.0, &g, 0.0);
        let out = evolve(&f0, &EvolutionConfig::free(1e-3, 2000)).unwrap();
        let exact = gaussian_field(1, 1024, 80.0, &g, 2.0);
        assert!(l2_distance(out.last(), &exact).unwrap() <= 1e-6);
    }

    #[test]
    fn analytic_gaussian_examples() {
        let g = analytic_free_gaussian(1.5, vec![0.5], vec![0.0], UNIT).unwrap();
        assert!((g(&[2.0], 0.0) - Complex64::new((-(1.5f64).powi(2) / (2.0 * 2.25)).exp(), 0.0)).norm() < 1e-15);
        let consts = PhysicalConstants::new(2.0, 0.5).unwrap();
        let moving = FreeGaussian::new(1.0, vec![0.0], vec![0.7], consts).unwrap();
        let rest = FreeGaussian::new(1.0, vec![0.0], vec![0.0], consts).unwrap();
        let y = [0.3];
        let expect = Complex64::from_polar(1.0, 4.0 * 0.7 * 0.3) * rest.eval(&y, 0.0);
        assert!((moving.eval(&y, 0.0) - expect).norm() < 1e-15);

        for g in [rest, moving] {
            let dt = 1e-3;
            let slices: Vec<WaveField> = [0.5 - dt, 0.5, 0.5 + dt].iter().map(|&t| gaussian_field(1, 1024, 80.0, &g, t)).collect();
            let res = schrodinger_residual([&slices[0], &slices[1], &slices[2]], &Expr::zero()).unwrap();
            assert!(res <= 1e-5, "{res}");
        }
    }

    #[test]
    fn time_reversal() {
        let g = FreeGaussian::new(1.0, vec![1.0], vec![0.5], UNIT).unwrap();
        let f0 = gaussian_field(1, 512, 60.0, &g, 0.0);
        let fwd = evolve(&f0, &EvolutionConfig::free(1e-3, 1000).unfused()).unwrap().into_last();
        let back = evolve(&fwd, &EvolutionConfig::free(-1e-3, 1000).unfused()).unwrap().into_last();
        assert!(back.time().abs() < 1e-12);
        let back = back.with_samples(back.samples().to_vec(), 0.0).unwrap();
        assert!(l2_distance(&back, &f0).unwrap() <= 1e-8);
    }

    #[test]
    fn harmonic_self_convergence_is_second_order() {
        let u = parse("y1^2/2").unwrap();
        let g = FreeGaussian::new(1.0, vec![1.0], vec![0.0], UNIT).unwrap();
        let f0 = gaussian_field(1, 256, 30.0, &g, 0.0);
        let run = |dt: f64| {
            let steps = (1.0 / dt).round() as usize;
            evolve(&f0, &EvolutionConfig::free(dt, steps).with_potential(u.clone())).unwrap().into_last()
        };
        let reference = run(1e-4);
        let e1 = l2_distance(&run(1e-2), &reference).unwrap();
        let e2 = l2_distance(&run(5e-3), &reference).unwrap();
        let ratio = e1 / e2;
        assert!(ratio > 4.0 / 1.5 && ratio < 4.0 * 1.5, "ratio {ratio}");
    }

    #[test]
    fn recording_and_log() {
        let g = FreeGaussian::new(1.0, vec![0.0], vec![0.0], UNIT).unwrap();
        let f0 = gaussian_field(1, 64, 20.0, &g, 0.25);
        let out = evolve(&f0, &EvolutionConfig::free(0.01, 10).recording_every(4)).unwrap();
        let steps: Vec<usize> = out.log.iter().map(|e| e.step).collect();
        assert_eq!(steps, vec![0, 4, 8, 10]);
        assert!((out.slices[2].time() - 0.33).abs() < 1e-14);
        let unfused = evolve(&f0, &EvolutionConfig::free(0.01, 10).recording_every(4).unfused()).unwrap();
        assert_eq!(unfused.log.len(), 4);
        assert!(l2_distance(unfused.last(), out.last()).unwrap() < 1e-12);
    }

    #[test]
    fn divergence_reports_step() {
        let g = FreeGaussian::new(1.0, vec![0.0], vec![0.0], UNIT).unwrap();
        let f0 = gaussian_field(1, 64, 20.0, &g, 0.0);
        let mut cfg = EvolutionConfig::free(0.1, 50).with_potential(parse("1000*i*exp(y1^2)").unwrap());
        cfg.allow_complex_potential = true;
        match evolve(&f0, &cfg) {
            Err(Error::Diverged { step }) => assert!(step >= 1 && step <= 50),
            other => panic!("{other:?}"),
        }
        cfg.allow_complex_potential = false;
        assert!(matches!(evolve(&f0, &cfg), Err(Error::InvalidParameter(_))));
        assert!(evolve(&f0, &EvolutionConfig::free(0.0, 1)).is_err());
        assert!(evolve(&f0, &EvolutionConfig::free(0.1, 1).with_potential(parse("r").unwrap())).is_err());
    }

    #[test]
    fn covariance_identity_is_exact() {
        let g = FreeGaussian::new(1.0, vec![0.0], vec![0.0], UNIT).unwrap();
        let f0 = gaussian_field(1, 256, 40.0, &g, 0.0);
        let r = covariance_check(&f0, &GalileanTransition::identity(1), &EvolutionConfig::free(1e-2, 50), GaugeMode::Full).unwrap();
        assert!(r.relative_distance <= 1e-12);
    }

    #[test]
    fn covariance_with_potential_in_moving_frame() {
        let u = parse("y1^2/2").unwrap();
        let g = FreeGaussian::new(1.0, vec![0.0], vec![0.0], UNIT).unwrap();
        let f0 = gaussian_field(1, 512, 60.0, &g, 0.0);
        let cfg = EvolutionConfig::free(1e-3, 500).with_potential(u);
        let boost = GalileanTransition::new(vec![0.5], vec![0.3], 0.0).unwrap();
        let full = covariance_check(&f0, &boost, &cfg, GaugeMode::Full).unwrap();
        assert!(full.relative_distance <= 1e-6, "{}", full.relative_distance);
        let bare = covariance_check(&f0, &boost, &cfg, GaugeMode::CoordinatesOnly).unwrap();
        assert!(bare.relative_distance >= 0.1);
    }
}
