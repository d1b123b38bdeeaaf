//! The invariant suites run by `schro verify`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{positive, Failure, Outcome, EXIT_FAIL, EXIT_PASS};
use crate::error::Result;
use crate::gauge::{
    check_cocycle, covariance_defect, gauge_invariance_residual, phase_f_expr, projective_family,
    schrodinger_operator, strict_family, strict_transition, CocycleMode, CocycleReport, CocycleTriple, GaugeMap, GaugeTransform,
    PhasePerturbed, PhysicalConstants,
};
use crate::hj::{
    additive_cocycle_deviation, additive_transition, exponentiate, free_hamiltonian, hj_residual, phase_transform,
    section_transform, PhasePoint,
};
use crate::spacetime::{
    random_observer, random_observer_triples, random_points, random_transition, GalileanTransition, SpacetimePoint,
};
use crate::symexpr::random::{random_expr, ExprShape};
use crate::symexpr::{compare, parse, Expr};
use crate::waveforms::{
    laplace_coordinates, metric_invariance_residual, random_field, random_form, schrodinger_laplace, wave_d_function,
    wave_gradient, Metric,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Cocycle,
    GaugeInvariance,
    Calculus,
    Metric,
    Hj,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub suite: Option<Suite>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub perturbation: Option<f64>,
    pub triples: usize,
    pub points: usize,
    pub instances: usize,
    pub forms: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            suite: None,
            seed: 42,
            tol: None,
            perturbation: None,
            triples: 200,
            points: 100,
            instances: 100,
            forms: 200,
        }
    }
}

impl VerifyConfig {
    fn bound(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    /// An independent stream per check, so adding a check leaves the others unchanged.
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One measured quantity against its bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub samples: usize,
    pub pass: bool,
    /// `"<name>: max <value> ≤ <bound>"`.
    pub summary: String,
}

impl Check {
    pub fn new(name: &str, value: f64, relation: Relation, bound: f64, samples: usize) -> Check {
        let (pass, sym) = match relation {
            Relation::AtMost => (value <= bound, '≤'),
            Relation::AtLeast => (value >= bound, '≥'),
        };
        Check {
            name: name.to_string(),
            value,
            relation,
            bound,
            samples,
            pass,
            summary: format!("{name}: max {value:.1e} {sym} {bound:e}"),
        }
    }

    pub fn at_most(name: &str, value: f64, bound: f64, samples: usize) -> Check {
        Check::new(name, value, Relation::AtMost, bound, samples)
    }

    pub fn at_least(name: &str, value: f64, bound: f64, samples: usize) -> Check {
        Check::new(name, value, Relation::AtLeast, bound, samples)
    }
}

pub(super) fn run(cfg: &VerifyConfig) -> std::result::Result<Outcome, Failure> {
    let suite = cfg.suite.ok_or_else(|| Failure::Config("no suite given".into()))?;
    if let Some(tol) = cfg.tol {
        positive("tol", tol)?;
    }
    if let Some(eps) = cfg.perturbation {
        if !eps.is_finite() {
            return Err(Failure::Config(format!("perturbation = {eps} must be finite")));
        }
    }
    for (name, k) in [("triples", cfg.triples), ("points", cfg.points), ("instances", cfg.instances), ("forms", cfg.forms)] {
        if k == 0 {
            return Err(Failure::Config(format!("{name} must be at least 1")));
        }
    }
    let checks = match suite {
        Suite::Cocycle => cocycle(cfg),
        Suite::GaugeInvariance => gauge_invariance(cfg),
        Suite::Calculus => calculus(cfg),
        Suite::Metric => metric(cfg),
        Suite::Hj => hj(cfg),
    }?;
    let pass = checks.iter().all(|c| c.pass);
    let summary = checks.iter().map(|c| format!("{} {}", if c.pass { "ok  " } else { "FAIL" }, c.summary)).collect();
    let report = json!({
        "command": "verify",
        "suite": suite,
        "seed": cfg.seed,
        "perturbation": cfg.perturbation,
        "pass": pass,
        "checks": checks,
    });
    Ok(Outcome { code: if pass { EXIT_PASS } else { EXIT_FAIL }, report, summary })
}

fn consts(m: f64, hbar: f64) -> PhysicalConstants {
    PhysicalConstants { m, hbar }
}

const COCYCLE_CASES: [(usize, f64, f64); 4] = [(1, 1.0, 1.0), (1, 2.0, 0.5), (3, 1.0, 1.0), (3, 2.0, 0.5)];

fn perturbed(family: &[CocycleTriple<GaugeMap>], eps: f64) -> Vec<CocycleTriple<PhasePerturbed<GaugeMap>>> {
    family
        .iter()
        .map(|t| CocycleTriple {
            first: PhasePerturbed::new(t.first.clone(), eps),
            second: PhasePerturbed::new(t.second.clone(), eps),
            direct: PhasePerturbed::new(t.direct.clone(), eps),
        })
        .collect()
}

fn check_family(
    family: &[CocycleTriple<GaugeMap>],
    points: &[SpacetimePoint],
    mode: CocycleMode,
    eps: Option<f64>,
) -> Result<CocycleReport> {
    match eps {
        Some(eps) => check_cocycle(&perturbed(family, eps), points, mode),
        None => check_cocycle(family, points, mode),
    }
}

fn cocycle(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let tol = cfg.bound(1e-9);
    let (mut strict, mut phase, mut coords, mut unit, mut detector) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut samples = 0;
    for (i, &(n, m, hbar)) in COCYCLE_CASES.iter().enumerate() {
        let c = consts(m, hbar);
        let mut rng = cfg.rng(i as u64);
        let triples = random_observer_triples(&mut rng, n, cfg.triples, 2.0);
        let points = random_points(&mut rng, n, cfg.points, 2.0);
        let anchor = random_observer(&mut rng, n, 2.0).velocity().to_vec();

        let family = strict_family(&triples, &anchor, &c)?;
        let s = check_family(&family, &points, CocycleMode::Strict, cfg.perturbation)?;
        strict = strict.max(s.max_dev);
        samples += s.samples;

        let p = check_family(&projective_family(&triples, &c)?, &points, CocycleMode::Projective, cfg.perturbation)?;
        phase = phase.max(p.phase_stddev);
        coords = coords.max(p.coord_dev);
        unit = unit.max(p.max_unit_deviation);

        detector = detector.max(check_cocycle(&perturbed(&family, 1e-3), &points, CocycleMode::Strict)?.max_dev);
    }
    Ok(vec![
        Check::at_most("strict_cocycle", strict, tol, samples),
        Check::at_most("projective_phase_stddev", phase, tol, samples),
        Check::at_most("projective_coordinates", coords, tol, samples),
        Check::at_least("projective_non_unit", unit, 1e-3, samples),
        Check::at_least("perturbed_cocycle_detector", detector, 1e-6, samples),
    ])
}

/// `1, y1, y1², e^{iky1}` and the plane-wave solution `e^{i(ky1 − ħk²t/2m)}`.
fn psi_corpus(c: &PhysicalConstants) -> Vec<Expr> {
    let k = 1.3;
    let y1 = Expr::y(0);
    let wave = y1.scale(Complex64::new(0.0, k));
    let solution = &wave - &Expr::t().scale(Complex64::new(0.0, c.hbar * k * k / (2.0 * c.m)));
    vec![Expr::one(), y1.clone(), y1.powi(2), wave.exp(), solution.exp()]
}

fn deviation_from_zero(e: &Expr, tol: f64) -> Result<f64> {
    Ok(compare(e, &Expr::zero(), tol)?.max_dev)
}

fn gauge_invariance(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let tol = cfg.bound(1e-8);
    let (mut scalar, mut gradient, mut defect, mut detector) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let per_case = cfg.instances.div_ceil(COCYCLE_CASES.len());
    let mut samples = 0;
    let bump = |eps: f64| Expr::y(0).powi(2).scale(eps.into());
    for (i, &(n, m, hbar)) in COCYCLE_CASES.iter().enumerate() {
        let c = consts(m, hbar);
        let corpus = psi_corpus(&c);
        let mut rng = cfg.rng(i as u64);
        for _ in 0..per_case {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut f = phase_f_expr(&v, &c);
            if let Some(eps) = cfg.perturbation {
                f = f + bump(eps);
            }
            let r = gauge_invariance_residual(&f, &v, &c)?;
            scalar = scalar.max(deviation_from_zero(&r.scalar, tol)?);
            for g in &r.gradient {
                gradient = gradient.max(deviation_from_zero(g, tol)?);
            }
            for psi in &corpus {
                defect = defect.max(deviation_from_zero(&covariance_defect(&f, psi, &v, &c)?, tol)?);
            }
            let bad = gauge_invariance_residual(&(phase_f_expr(&v, &c) + bump(1e-3)), &v, &c)?;
            detector = detector.max(deviation_from_zero(&bad.scalar, tol)?);
            samples += 1;
        }
    }
    Ok(vec![
        Check::at_most("f_scalar_residual", scalar, tol, samples),
        Check::at_most("f_gradient_residual", gradient, tol, samples),
        Check::at_most("covariance_defect", defect, tol, samples * 5),
        Check::at_least("perturbed_f_detector", detector, 1e-6, samples),
    ])
}

const CALCULUS_CONSTS: [(f64, f64); 3] = [(1.0, 1.0), (2.0, 1.0), (1.0, 0.5)];

/// `e^{±imr/ħ}` as an expression.
fn homogeneous_factor(c: &PhysicalConstants, sign: f64) -> Expr {
    Expr::r().scale(c.i_m_over_hbar() * sign).exp()
}

fn calculus(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let tol = cfg.bound(1e-9);
    let form_shape = ExprShape { terms: 1, monomials: 2, max_degree: 2, include_r: true };
    let small_r_free = ExprShape { include_r: false, ..form_shape.clone() };
    let psi_shape = ExprShape::r_free();

    let mut rng = cfg.rng(0);
    let mut dd = 0.0f64;
    for i in 0..cfg.forms {
        let n = 1 + i % 3;
        let degree = (i / 3) % (n + 3);
        let (m, hbar) = CALCULUS_CONSTS[i % 3];
        let w = random_form(&mut rng, n, degree, &form_shape)?;
        let twice = w.wave_d(&consts(m, hbar)).wave_d(&consts(m, hbar));
        dd = dd.max(twice.max_deviation(&twice.scale(&Expr::zero()), tol)?);
    }

    let mut rng = cfg.rng(1);
    let named = ["y1^2", "t", "exp(i*(y1 - t/2))", "exp(-y1^2/2 + i*t)", "y1*y2*t + exp(i*y3)"];
    let mut corpus: Vec<(usize, Expr)> =
        named.iter().map(|s| parse(s).map(|e| (e.spatial_dim().max(1), e))).collect::<Result<_>>()?;
    for i in 0..cfg.instances {
        let n = 1 + i % 3;
        corpus.push((n, random_expr(&mut rng, n, &psi_shape)));
    }
    let (mut laplace, mut free) = (0.0f64, 0.0f64);
    for (n, psi) in &corpus {
        for (m, hbar) in CALCULUS_CONSTS {
            let c = consts(m, hbar);
            let mut lap = schrodinger_laplace(psi, *n, &c)?;
            if let Some(eps) = cfg.perturbation {
                lap = lap + psi.scale(eps.into());
            }
            laplace = laplace.max(compare(&lap, &laplace_coordinates(psi, *n, &c), tol)?.max_dev);
            let scaled = lap.scale((hbar * hbar / (2.0 * m)).into());
            free = free.max(compare(&scaled, &schrodinger_operator(psi, None, *n, &c), tol)?.max_dev);
        }
    }

    let mut rng = cfg.rng(2);
    let (mut operator, mut witten, mut gradient) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..cfg.instances {
        let n = 1 + i % 3;
        let (m, hbar) = CALCULUS_CONSTS[i % 3];
        let c = consts(m, hbar);
        let (up, down) = (homogeneous_factor(&c, 1.0), homogeneous_factor(&c, -1.0));

        let x = random_field(&mut rng, n, &small_r_free);
        let psi = random_expr(&mut rng, n, &psi_shape);
        let lhs = x.act(&psi, &c) * &up;
        let rhs = x.derivation(&(&psi * &up));
        operator = operator.max(compare(&lhs, &rhs, tol)?.max_dev);

        let degree = i % (n + 2);
        let w = random_form(&mut rng, n, degree, &small_r_free)?;
        let conjugated = w.scale(&up).d().scale(&down);
        witten = witten.max(w.wave_d(&c).max_deviation(&conjugated, tol)?);

        let lowered = Metric::schrodinger(n).lower(&wave_gradient(&psi, n, &c)?)?;
        gradient = gradient.max(lowered.max_deviation(&wave_d_function(&psi, n, &c)?, tol)?);
    }

    let pairs = corpus.len() * CALCULUS_CONSTS.len();
    Ok(vec![
        Check::at_most("dtilde_squared", dd, tol, cfg.forms),
        Check::at_most("laplace_coordinates", laplace, tol, pairs),
        Check::at_most("free_operator", free, tol, pairs),
        Check::at_most("operator_correspondence", operator, tol, cfg.instances),
        Check::at_most("witten_form", witten, tol, cfg.instances),
        Check::at_most("gradient_consistency", gradient, tol, cfg.instances),
    ])
}

const DETECTOR_EPS: f64 = 1e-3;

fn metric(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let tol = cfg.bound(1e-12);
    let under_test = |n: usize| match cfg.perturbation {
        Some(eps) => {
            let mut b = vec![0.0; n];
            b[0] = eps;
            Metric::perturbed(n, &b, 0.0, 1.0)
        }
        None => Metric::schrodinger(n),
    };

    let mut rng = cfg.rng(0);
    let mut invariance = 0.0f64;
    for i in 0..cfg.instances {
        let n = 1 + i % 3;
        let g = random_transition(&mut rng, n, 2.0);
        invariance = invariance.max(metric_invariance_residual(&under_test(n), &g)?);
    }

    let (mut signature, mut inverse) = (0.0f64, 0.0f64);
    for n in 1..=3 {
        let metric = under_test(n);
        let (pos, neg) = metric.signature()?;
        signature = signature.max((pos.abs_diff(n + 1) + neg.abs_diff(1)) as f64);
        let m = metric.constant_matrix()?;
        inverse = inverse.max((metric.inverse()?.constant_matrix()? - m).amax());
    }

    let mut boosts: Vec<GalileanTransition> = (1..=3)
        .map(|n| {
            let mut v = vec![0.0; n];
            v[0] = 1.0;
            GalileanTransition::boost(v)
        })
        .collect();
    let mut rng = cfg.rng(1);
    boosts.extend((0..cfg.instances).map(|i| random_transition(&mut rng, 1 + i % 3, 2.0)));
    let family = |make: &dyn Fn(usize) -> Metric| -> Result<f64> {
        boosts.iter().try_fold(0.0f64, |acc, g| Ok(acc.max(metric_invariance_residual(&make(g.dim()), g)?)))
    };
    let b_family = family(&|n| {
        let mut b = vec![0.0; n];
        b[0] = DETECTOR_EPS;
        Metric::perturbed(n, &b, 0.0, 1.0)
    })?;
    let c_family = family(&|n| Metric::perturbed(n, &vec![0.0; n], DETECTOR_EPS, 1.0))?;
    let d_family = family(&|n| Metric::perturbed(n, &vec![0.0; n], 0.0, 1.0 + DETECTOR_EPS))?;

    Ok(vec![
        Check::at_most("metric_invariance", invariance, tol, cfg.instances),
        Check::at_most("signature_mismatch", signature, 0.0, 3),
        Check::at_most("self_inverse", inverse, tol, 3),
        Check::at_least("b_family_detector", b_family, 1e-4, boosts.len()),
        Check::at_least("c_family_detector", c_family, 1e-4, boosts.len()),
        Check::at_least("d_family_detector", d_family, 1e-4, boosts.len()),
    ])
}

/// Free HJ solutions: the plane-wave action `⟨p₀, y⟩ − ‖p₀‖²t/2m` and `m‖y‖²/2t`.
fn hj_corpus(rng: &mut ChaCha8Rng, n: usize, m: f64) -> Vec<Expr> {
    let p0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let energy = p0.iter().map(|p| p * p).sum::<f64>() / (2.0 * m);
    let plane = Expr::sum((0..n).map(|k| Expr::y(k).scale(p0[k].into()))) - Expr::t().scale(energy.into());
    let spread = Expr::div(&Expr::sum((0..n).map(|k| Expr::y(k).powi(2))).scale((0.5 * m).into()), &Expr::t());
    vec![plane, spread]
}

/// Points with `t ∈ [lo, hi]`, away from the singular slice of `m‖y‖²/2t`.
fn late_points(rng: &mut ChaCha8Rng, n: usize, count: usize, lo: f64, hi: f64) -> Vec<SpacetimePoint> {
    let mut pts = random_points(rng, n, count, 2.0);
    for p in &mut pts {
        p.t = rng.gen_range(lo..hi);
    }
    pts
}

fn hj(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let (mut cocycle, mut exp_dev, mut solutions, mut moved, mut dispersion, mut action, mut detector) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut samples = 0;
    let bump = |sigma: &Expr, eps: f64| sigma + &Expr::t().powi(2).scale(eps.into());
    for (i, &(n, m, hbar)) in COCYCLE_CASES.iter().enumerate() {
        let c = consts(m, hbar);
        let mut rng = cfg.rng(i as u64);
        let triples = random_observer_triples(&mut rng, n, cfg.triples, 2.0);
        let points = random_points(&mut rng, n, cfg.points, 2.0);
        let anchor = random_observer(&mut rng, n, 2.0).velocity().to_vec();
        for (a, b, d) in &triples {
            let ab = additive_transition(a, b, &anchor, m)?;
            let bd = additive_transition(b, d, &anchor, m)?;
            let ad = additive_transition(a, d, &anchor, m)?;
            cocycle = cocycle.max(additive_cocycle_deviation(&ab, &bd, &ad, &points)?);
            let lifted = exponentiate(&ab, hbar)?;
            let strict = strict_transition(a, b, &anchor, &c)?;
            for p in &points {
                exp_dev = exp_dev.max((lifted.gauge_factor(&p.y, p.t) - strict.gauge_factor(&p.y, p.t)).norm());
            }
        }
        samples += triples.len() * points.len();

        let free = free_hamiltonian(m);
        let late = late_points(&mut rng, n, cfg.points, 3.5, 5.0);
        for sigma in hj_corpus(&mut rng, n, m) {
            let sigma = match cfg.perturbation {
                Some(eps) => bump(&sigma, eps),
                None => sigma,
            };
            solutions = solutions.max(hj_residual(&sigma, &free, &late)?.max_residual);
            detector = detector.max(hj_residual(&bump(&sigma, 1e-3), &free, &late)?.max_residual);
            for _ in 0..cfg.instances.div_ceil(10) {
                let (a, b) = (random_observer(&mut rng, n, 1.0), random_observer(&mut rng, n, 1.0));
                let map = additive_transition(&a, &b, &anchor, m)?;
                moved = moved.max(hj_residual(&section_transform(&sigma, &map), &free, &late)?.max_residual);
            }
        }

        for _ in 0..cfg.instances {
            let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let pt = PhasePoint::free(y, rng.gen_range(-2.0..2.0), p, m)?;
            let g1 = random_transition(&mut rng, n, 2.0);
            let g2 = random_transition(&mut rng, n, 2.0);
            let image = phase_transform(&pt, &g1, m)?;
            let shell = image.p.iter().map(|x| x * x).sum::<f64>() / (2.0 * m);
            dispersion = dispersion.max((image.h - shell).abs() / (1.0 + shell.abs()));
            let twice = phase_transform(&image, &g2, m)?;
            let once = phase_transform(&pt, &g2.compose(&g1)?, m)?;
            action = action.max(phase_point_distance(&twice, &once));
        }
    }
    Ok(vec![
        Check::at_most("additive_cocycle", cocycle, cfg.bound(1e-10), samples),
        Check::at_most("exponentiate_matches_strict", exp_dev, cfg.bound(1e-12), samples),
        Check::at_most("free_hj_solutions", solutions, cfg.bound(1e-10), 2 * COCYCLE_CASES.len()),
        Check::at_most("section_transform_solutions", moved, cfg.bound(1e-9), 2 * COCYCLE_CASES.len()),
        Check::at_most("free_dispersion", dispersion, cfg.bound(1e-12), cfg.instances * COCYCLE_CASES.len()),
        Check::at_most("phase_group_action", action, cfg.bound(1e-10), cfg.instances * COCYCLE_CASES.len()),
        Check::at_least("perturbed_hj_detector", detector, 1e-3, 2 * COCYCLE_CASES.len()),
    ])
}

fn phase_point_distance(a: &PhasePoint, b: &PhasePoint) -> f64 {
    let pairs = a.y.iter().zip(&b.y).chain(a.p.iter().zip(&b.p));
    pairs.map(|(x, y)| (x - y).abs()).fold((a.t - b.t).abs().max((a.h - b.h).abs()), f64::max)
}
