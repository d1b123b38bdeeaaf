//! `evolve`, `boost` and `covariance`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{positive, Failure, Outcome, EXIT_FAIL, EXIT_PASS};
use crate::fields::{boost_field, l2_distance, GridSpec, WaveField};
use crate::gauge::{projective_transition, push_forward_fn, PhysicalConstants};
use crate::solver::{covariance_check_with, evolve as run_evolution, EvolutionConfig, FreeGaussian, GaugeMode};
use crate::spacetime::{GalileanTransition, Observer};
use crate::symexpr::{parse, Expr};

type Run<T> = std::result::Result<T, Failure>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub initial: String,
    pub input: Option<PathBuf>,
    pub potential: String,
    pub n: usize,
    pub size: usize,
    pub extent: f64,
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
    pub out_dir: PathBuf,
    pub m: f64,
    pub hbar: f64,
    pub norm_tol: f64,
    pub allow_complex_potential: bool,
    pub unfused: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            initial: "exp(-y1^2/2)".into(),
            input: None,
            potential: "0".into(),
            n: 1,
            size: 256,
            extent: 40.0,
            dt: 1e-3,
            steps: 1000,
            record_every: 100,
            out_dir: PathBuf::from("schro-out"),
            m: 1.0,
            hbar: 1.0,
            norm_tol: 1e-10,
            allow_complex_potential: false,
            unfused: false,
        }
    }
}

fn expression(name: &str, src: &str) -> Run<Expr> {
    parse(src).map_err(|e| Failure::Config(format!("{name}: {e}")))
}

pub(super) fn evolve(cfg: &EvolveConfig) -> Run<Outcome> {
    positive("norm_tol", cfg.norm_tol)?;
    let potential = expression("potential", &cfg.potential)?;
    let f0 = match &cfg.input {
        Some(path) => WaveField::load(path)?,
        None => {
            let consts = PhysicalConstants::new(cfg.m, cfg.hbar)?;
            let spec = GridSpec::cube(cfg.n, cfg.size, cfg.extent)?;
            let initial = expression("initial", &cfg.initial)?;
            WaveField::from_expr(&initial, spec, 0.0, Observer::rest(cfg.n), consts)?
        }
    };
    let mut evo = EvolutionConfig::free(cfg.dt, cfg.steps).with_potential(potential).recording_every(cfg.record_every);
    evo.allow_complex_potential = cfg.allow_complex_potential;
    if cfg.unfused {
        evo = evo.unfused();
    }
    let result = run_evolution(&f0, &evo)?;

    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Failure::Config(format!("{}: {e}", cfg.out_dir.display())))?;
    let mut files = Vec::with_capacity(result.slices.len());
    for (slice, entry) in result.slices.iter().zip(&result.log) {
        let name = format!("step_{:06}.schwf", entry.step);
        slice.save(cfg.out_dir.join(&name))?;
        files.push(name);
    }
    let norm0 = result.log[0].norm;
    let drift = result.log.iter().map(|e| (e.norm - norm0).abs()).fold(0.0, f64::max);
    let drift = if norm0 > 0.0 { drift / norm0 } else { drift };
    let pass = drift <= cfg.norm_tol;
    let report = json!({
        "command": "evolve",
        "pass": pass,
        "out_dir": cfg.out_dir,
        "files": files,
        "log": result.log,
        "norm_drift": drift,
        "norm_tol": cfg.norm_tol,
    });
    let summary = vec![
        format!("wrote {} slices to {}", files.len(), cfg.out_dir.display()),
        format!("norm_drift: max {drift:.1e} ≤ {:e}", cfg.norm_tol),
    ];
    Ok(Outcome { code: if pass { EXIT_PASS } else { EXIT_FAIL }, report, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub v: Option<Vec<f64>>,
    pub w: Option<Vec<f64>>,
    pub t0: f64,
    pub norm_tol: f64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig { input: None, output: None, v: None, w: None, t0: 0.0, norm_tol: 1e-10 }
    }
}

fn vector_or_zero(name: &str, x: &Option<Vec<f64>>, n: usize) -> Run<Vec<f64>> {
    match x {
        None => Ok(vec![0.0; n]),
        Some(x) if x.len() == n => Ok(x.clone()),
        Some(x) => Err(Failure::Config(format!("{name} has {} components, the field has {n} dimensions", x.len()))),
    }
}

pub(super) fn boost(cfg: &BoostConfig) -> Run<Outcome> {
    positive("norm_tol", cfg.norm_tol)?;
    let input = cfg.input.as_ref().ok_or_else(|| Failure::Config("no input file".into()))?;
    let output = cfg.output.as_ref().ok_or_else(|| Failure::Config("no output file".into()))?;
    let f = WaveField::load(input)?;
    let n = f.dim();
    let g = GalileanTransition::new(vector_or_zero("v", &cfg.v, n)?, vector_or_zero("w", &cfg.w, n)?, cfg.t0)?;
    let map = projective_transition(&g, f.consts());
    let out = boost_field(&map, &f)?;
    let tail = spectral_tail_fraction(&out);
    if tail > 1e-10 {
        log::warn!("boosted field has {tail:.3e} of its spectral power in the outer quarter of the band; increase resolution");
    }
    out.save(output)?;

    let (norm_in, norm_out) = (f.l2_norm(), out.l2_norm());
    let deviation = (norm_out - norm_in).abs() / norm_in.max(f64::MIN_POSITIVE);
    let pass = deviation <= cfg.norm_tol;
    let report = json!({
        "command": "boost",
        "pass": pass,
        "input": input,
        "output": output,
        "transition": g,
        "t_in": f.time(),
        "t_out": out.time(),
        "frame": out.frame(),
        "norm_in": norm_in,
        "norm_out": norm_out,
        "norm_deviation": deviation,
        "norm_tol": cfg.norm_tol,
        "boundary_mass_fraction": out.boundary_mass_fraction(),
        "spectral_tail_fraction": tail,
    });
    let summary = vec![
        format!("wrote {}", output.display()),
        format!("norm_deviation: max {deviation:.1e} ≤ {:e}", cfg.norm_tol),
    ];
    Ok(Outcome { code: if pass { EXIT_PASS } else { EXIT_FAIL }, report, summary })
}

/// Share of spectral power at wavenumbers above half the Nyquist limit on any axis.
fn spectral_tail_fraction(f: &WaveField) -> f64 {
    let sizes = f.spec().sizes();
    let spectrum = f.spectrum();
    let (mut total, mut tail) = (0.0, 0.0);
    for (idx, z) in spectrum.iter().enumerate() {
        let p = z.norm_sqr();
        total += p;
        let mut rest = idx;
        let high = sizes.iter().any(|&s| {
            let j = rest % s;
            rest /= s;
            let k = j.min(s - j);
            k > s / 4
        });
        if high {
            tail += p;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovarianceConfig {
    pub n: usize,
    pub size: usize,
    pub extent: f64,
    pub sigma: f64,
    pub center: Option<Vec<f64>>,
    pub dt: f64,
    pub t_final: f64,
    /// Defaults to unit speed along `y1`.
    pub v: Option<Vec<f64>>,
    pub w: Option<Vec<f64>>,
    pub t0: f64,
    pub potential: String,
    pub m: f64,
    pub hbar: f64,
    pub tol: f64,
    pub analytic_tol: f64,
    pub no_gauge_phase: bool,
}

impl Default for CovarianceConfig {
    fn default() -> Self {
        CovarianceConfig {
            n: 1,
            size: 1024,
            extent: 80.0,
            sigma: 1.0,
            center: None,
            dt: 1e-3,
            t_final: 2.0,
            v: None,
            w: None,
            t0: 0.0,
            potential: "0".into(),
            m: 1.0,
            hbar: 1.0,
            tol: 1e-6,
            analytic_tol: 1e-6,
            no_gauge_phase: false,
        }
    }
}

pub(super) fn covariance(cfg: &CovarianceConfig) -> Run<Outcome> {
    positive("tol", cfg.tol)?;
    positive("analytic_tol", cfg.analytic_tol)?;
    positive("dt", cfg.dt)?;
    if !(cfg.t_final >= 0.0 && cfg.t_final.is_finite()) {
        return Err(Failure::Config(format!("t_final = {} must be non-negative", cfg.t_final)));
    }
    let steps = (cfg.t_final / cfg.dt).round() as usize;
    if (steps as f64 * cfg.dt - cfg.t_final).abs() > 1e-9 * cfg.t_final.max(1.0) {
        return Err(Failure::Config(format!("t_final = {} is not a multiple of dt = {}", cfg.t_final, cfg.dt)));
    }
    if steps == 0 {
        return Err(Failure::Config("t_final must cover at least one step".into()));
    }
    let n = cfg.n;
    let consts = PhysicalConstants::new(cfg.m, cfg.hbar)?;
    let spec = GridSpec::cube(n, cfg.size, cfg.extent)?;
    let v = match &cfg.v {
        None => (0..n).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect(),
        v => vector_or_zero("v", v, n)?,
    };
    let g = GalileanTransition::new(v, vector_or_zero("w", &cfg.w, n)?, cfg.t0)?;
    let packet = FreeGaussian::new(cfg.sigma, vector_or_zero("center", &cfg.center, n)?, vec![0.0; n], consts)?;
    let f0 = WaveField::from_fn(|y, t| packet.rest(y, t), spec.clone(), 0.0, Observer::rest(n), consts)?;
    let potential = expression("potential", &cfg.potential)?;
    let evo = EvolutionConfig::free(cfg.dt, steps).with_potential(potential.clone());
    let mode = if cfg.no_gauge_phase { GaugeMode::CoordinatesOnly } else { GaugeMode::Full };
    let map = projective_transition(&g, &consts);
    let report = covariance_check_with(&f0, &map, &evo, mode)?;

    let norm0 = f0.l2_norm();
    let analytic = if potential.is_zero() {
        let a = &report.evolve_then_boost;
        let exact = push_forward_fn(&map, |y: &[f64], t: f64| packet.rest(y, t));
        let reference = WaveField::from_fn(exact, spec, a.time(), a.frame().clone(), consts)?;
        let d_a = l2_distance(a, &reference)? / norm0;
        let d_b = l2_distance(&report.boost_then_evolve, &reference)? / norm0;
        Some((d_a, d_b))
    } else {
        None
    };
    let distance = report.relative_distance;
    let analytic_ok = analytic.is_none_or(|(a, b)| a <= cfg.analytic_tol && b <= cfg.analytic_tol);
    let pass = distance <= cfg.tol && analytic_ok;

    let mut summary = vec![format!("relative_distance: max {distance:.1e} ≤ {:e}", cfg.tol)];
    if let Some((a, b)) = analytic {
        summary.push(format!("evolve_then_boost_vs_analytic: max {a:.1e} ≤ {:e}", cfg.analytic_tol));
        summary.push(format!("boost_then_evolve_vs_analytic: max {b:.1e} ≤ {:e}", cfg.analytic_tol));
    }
    let report = json!({
        "command": "covariance",
        "pass": pass,
        "mode": mode,
        "relative_distance": distance,
        "tol": cfg.tol,
        "analytic": analytic.map(|(a, b)| json!({
            "evolve_then_boost": a,
            "boost_then_evolve": b,
            "tol": cfg.analytic_tol,
        })),
        "transition": g,
        "n": n,
        "size": cfg.size,
        "extent": cfg.extent,
        "dt": cfg.dt,
        "steps": steps,
        "potential": potential.to_string(),
    });
    Ok(Outcome { code: if pass { EXIT_PASS } else { EXIT_FAIL }, report, summary })
}
