//! The additive cocycle, Darboux transforms of phase points and the Hamilton–Jacobi residual.
//!
//! Actions `s` and sections `σ` are real; the multiplicative picture is recovered
//! by `s ↦ exp(i s/ħ)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::gauge::{inverse_substitution, GaugeMap, PhysicalConstants};
use crate::spacetime::{transition_between, GalileanTransition, Observer, SpacetimePoint};
use crate::symexpr::{Expr, Var};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Transition of the Hamilton–Jacobi bundle: a Galilean change of coordinates with an additive shift of `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditiveGaugeMap {
    g: GalileanTransition,
    aux_v: Vec<f64>,
    m: f64,
}

impl AdditiveGaugeMap {
    pub fn new(g: GalileanTransition, aux_v: Vec<f64>, m: f64) -> Result<Self> {
        check_dim(g.dim(), aux_v.len())?;
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass {m} must be positive")));
        }
        Ok(AdditiveGaugeMap { g, aux_v, m })
    }

    pub fn identity(n: usize, m: f64) -> Result<Self> {
        Self::new(GalileanTransition::identity(n), vec![0.0; n], m)
    }

    pub fn boost(v: Vec<f64>, m: f64) -> Result<Self> {
        let n = v.len();
        Self::new(GalileanTransition::boost(v), vec![0.0; n], m)
    }

    pub fn transition(&self) -> &GalileanTransition {
        &self.g
    }

    pub fn aux_velocity(&self) -> &[f64] {
        &self.aux_v
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    fn constant(&self) -> f64 {
        let (w, t0, v) = (self.g.shift(), self.g.time_shift(), &self.aux_v);
        (0..self.dim()).map(|k| (w[k] - 0.5 * t0 * v[k]) * v[k]).sum()
    }

    /// `m⟨y + w + ½(t + t0)v', v'⟩ + m⟨w − (t0/2)v, v⟩` at source coordinates.
    pub fn shift(&self, y: &[f64], t: f64) -> f64 {
        let (vp, w, t0) = (self.g.velocity(), self.g.shift(), self.g.time_shift());
        let moved: f64 = (0..self.dim()).map(|k| (y[k] + w[k] + 0.5 * (t + t0) * vp[k]) * vp[k]).sum();
        self.m * (moved + self.constant())
    }

    /// The shift as a function of target coordinates: `m(⟨y − (t/2)v', v'⟩ + ⟨w − (t0/2)v, v⟩)`.
    pub fn target_shift_expr(&self) -> Expr {
        let vp = self.g.velocity();
        let half_t = Expr::t().scale(0.5.into());
        let linear = Expr::sum(vp.iter().enumerate().map(|(k, &v)| (Expr::y(k) - half_t.scale(v.into())).scale(v.into())));
        (linear + Expr::real(self.constant())).scale(self.m.into())
    }

    /// `(y, t, s) ↦ (ϑ(y, t), s + shift(y, t))`.
    pub fn apply(&self, p: &SpacetimePoint, s: f64) -> Result<(SpacetimePoint, f64)> {
        let q = self.g.apply(p)?;
        Ok((q, s + self.shift(&p.y, p.t)))
    }
}

/// Additive transition between two observers for the anchor class `anchor_u`.
pub fn additive_transition(from: &Observer, to: &Observer, anchor_u: &[f64], m: f64) -> Result<AdditiveGaugeMap> {
    check_dim(from.dim(), anchor_u.len())?;
    let g = transition_between(from, to)?;
    let aux_v = anchor_u.iter().zip(from.velocity()).map(|(a, u)| a - u).collect();
    AdditiveGaugeMap::new(g, aux_v, m)
}

/// The multiplicative map with gauge factor `exp(i · shift / ħ)`.
pub fn exponentiate(a: &AdditiveGaugeMap, hbar: f64) -> Result<GaugeMap> {
    let consts = PhysicalConstants::new(a.m, hbar)?;
    GaugeMap::new(a.g.clone(), a.aux_v.clone(), consts)
}

/// Largest `|shift₁(p) + shift₂(ϑ₁ p) − shift₃(p)|` and coordinate mismatch over `points`.
pub fn additive_cocycle_deviation(
    first: &AdditiveGaugeMap,
    second: &AdditiveGaugeMap,
    direct: &AdditiveGaugeMap,
    points: &[SpacetimePoint],
) -> Result<f64> {
    let mut dev = 0.0f64;
    for p in points {
        let (q, s) = first.apply(p, 0.0)?;
        let (r, s) = second.apply(&q, s)?;
        let (d, sd) = direct.apply(p, 0.0)?;
        let coord = r.y.iter().zip(&d.y).map(|(a, b)| (a - b).abs()).fold((r.t - d.t).abs(), f64::max);
        dev = dev.max(coord).max((s - sd).abs());
    }
    Ok(dev)
}

/// A point of the phase bundle in adapted Darboux coordinates, `h = −p_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub y: Vec<f64>,
    pub t: f64,
    pub p: Vec<f64>,
    pub h: f64,
}

impl PhasePoint {
    pub fn new(y: Vec<f64>, t: f64, p: Vec<f64>, h: f64) -> Result<Self> {
        check_dim(y.len(), p.len())?;
        Ok(PhasePoint { y, t, p, h })
    }

    /// A point on the free energy shell `h = ‖p‖²/2m`.
    pub fn free(y: Vec<f64>, t: f64, p: Vec<f64>, m: f64) -> Result<Self> {
        let h = dot(&p, &p) / (2.0 * m);
        Self::new(y, t, p, h)
    }
}

/// `(y, t, p, h) ↦ (y + w + (t + t0)v, t + t0, p + m v, h + ⟨p, v⟩ + (m/2)‖v‖²)`.
pub fn phase_transform(pt: &PhasePoint, g: &GalileanTransition, m: f64) -> Result<PhasePoint> {
    check_dim(g.dim(), pt.y.len())?;
    check_dim(g.dim(), pt.p.len())?;
    let v = g.velocity();
    let q = g.apply(&SpacetimePoint::new(pt.y.clone(), pt.t))?;
    let p = pt.p.iter().zip(v).map(|(p, v)| p + m * v).collect();
    let h = pt.h + dot(&pt.p, v) + 0.5 * m * dot(v, v);
    Ok(PhasePoint { y: q.y, t: q.t, p, h })
}

/// `H(y, t, p) = ‖p‖²/2m`.
pub fn free_hamiltonian(m: f64) -> impl Fn(&[f64], f64, &[f64]) -> f64 + Clone {
    move |_y: &[f64], _t: f64, p: &[f64]| dot(p, p) / (2.0 * m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HjReport {
    /// `max |H(y, t, ∇σ) + ∂_tσ|` over the evaluated points.
    pub max_residual: f64,
    pub evaluated: usize,
    /// Points where `σ` or its derivatives could not be evaluated.
    pub skipped: usize,
}

/// Evaluates the Hamilton–Jacobi residual of `σ` at `points`.
pub fn hj_residual<H>(sigma: &Expr, hamiltonian: H, points: &[SpacetimePoint]) -> Result<HjReport>
where
    H: Fn(&[f64], f64, &[f64]) -> f64,
{
    sigma.require_r_free()?;
    let Some(first) = points.first() else {
        return Ok(HjReport { max_residual: 0.0, evaluated: 0, skipped: 0 });
    };
    let n = first.dim();
    if sigma.spatial_dim() > n {
        return Err(Error::DimensionMismatch { expected: n, found: sigma.spatial_dim() });
    }
    let grad: Vec<Expr> = (0..n).map(|k| sigma.diff(Var::Y(k))).collect();
    let dt = sigma.diff(Var::T);
    let mut report = HjReport { max_residual: 0.0, evaluated: 0, skipped: 0 };
    for pt in points {
        check_dim(n, pt.dim())?;
        let value = || -> Option<f64> {
            let p: Vec<f64> = grad.iter().map(|g| real(g.eval_real(&pt.y, pt.t))).collect::<Option<_>>()?;
            let st = real(dt.eval_real(&pt.y, pt.t))?;
            let r = hamiltonian(&pt.y, pt.t, &p) + st;
            r.is_finite().then_some(r.abs())
        };
        match value() {
            Some(r) => {
                report.max_residual = report.max_residual.max(r);
                report.evaluated += 1;
            }
            None => report.skipped += 1,
        }
    }
    if report.skipped > 0 {
        log::warn!("hj_residual skipped {} singular points", report.skipped);
    }
    Ok(report)
}

fn real(z: Result<num_complex::Complex64>) -> Option<f64> {
    let z = z.ok()?;
    (z.re.is_finite() && z.im.abs() <= 1e-12 * (1.0 + z.re.abs())).then_some(z.re)
}

/// Action of a transition on a section: `σ'(y, t) = σ(ϑ⁻¹(y, t)) + shift(ϑ⁻¹(y, t))`.
pub fn section_transform(sigma: &Expr, a: &AdditiveGaugeMap) -> Expr {
    sigma.substitute(&inverse_substitution(&a.g)) + a.target_shift_expr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{strict_transition, GaugeTransform};
    use crate::spacetime::{random_observer_triples, random_points};
    use crate::symexpr::parse;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn points(n: usize, t_lo: f64, t_hi: f64) -> Vec<SpacetimePoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        random_points(&mut rng, n, 50, 2.0)
            .into_iter()
            .map(|mut p| {
                p.t = t_lo + (p.t + 2.0) / 4.0 * (t_hi - t_lo);
                p
            })
            .collect()
    }

    #[test]
    fn additive_examples() {
        let id = AdditiveGaugeMap::identity(2, 1.5).unwrap();
        let p = SpacetimePoint::new(vec![0.3, -1.0], 0.7);
        assert_eq!(id.apply(&p, 0.25).unwrap(), (p.clone(), 0.25));

        let b = AdditiveGaugeMap::boost(vec![1.0], 1.0).unwrap();
        let (_, s) = b.apply(&SpacetimePoint::new(vec![1.0], 2.0), 0.0).unwrap();
        assert_eq!(s, 2.0);
        let factor = exponentiate(&b, 1.0).unwrap().gauge_factor(&[1.0], 2.0);
        assert!((factor - num_complex::Complex64::from_polar(1.0, 2.0)).norm() < 1e-15);
        assert!(exponentiate(&id, 1.0).unwrap().is_trivial_phase());
    }

    #[test]
    fn additive_cocycle_and_exponentiation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [1, 3] {
            let pts = random_points(&mut rng, n, 20, 2.0);
            let anchor = vec![0.4; n];
            for (a, b, c) in random_observer_triples(&mut rng, n, 40, 2.0) {
                let ab = additive_transition(&a, &b, &anchor, 2.0).unwrap();
                let bc = additive_transition(&b, &c, &anchor, 2.0).unwrap();
                let ac = additive_transition(&a, &c, &anchor, 2.0).unwrap();
                assert!(additive_cocycle_deviation(&ab, &bc, &ac, &pts).unwrap() <= 1e-10);

                let strict = strict_transition(&a, &b, &anchor, &PhysicalConstants::new(2.0, 0.5).unwrap()).unwrap();
                let exp = exponentiate(&ab, 0.5).unwrap();
                for p in &pts {
                    let (f1, f2) = (exp.gauge_factor(&p.y, p.t), strict.gauge_factor(&p.y, p.t));
                    assert!((f1 - f2).norm() <= 1e-12);
                    let direct = num_complex::Complex64::from_polar(1.0, ab.shift(&p.y, p.t) / 0.5);
                    assert!((f1 - direct).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn phase_transform_examples() {
        let pt = PhasePoint::new(vec![0.5], 1.0, vec![0.0], 0.0).unwrap();
        assert_eq!(phase_transform(&pt, &GalileanTransition::identity(1), 1.0).unwrap(), pt);
        let out = phase_transform(&pt, &GalileanTransition::boost(vec![2.0]), 1.0).unwrap();
        assert_eq!(out.p, vec![2.0]);
        assert_eq!(out.h, 2.0);
        assert!(phase_transform(&pt, &GalileanTransition::identity(2), 1.0).is_err());
    }

    #[test]
    fn hj_examples() {
        let free = free_hamiltonian(1.0);
        let plane = parse("0.7*y1 - 0.3*y2 - (0.49 + 0.09)/2*t").unwrap();
        assert!(hj_residual(&plane, &free, &points(2, -2.0, 2.0)).unwrap().max_residual <= 1e-12);

        let spread = parse("y1^2/(2*t)").unwrap();
        let pts = points(1, 1.0, 2.0);
        let r = hj_residual(&spread, &free, &pts).unwrap();
        assert!(r.max_residual <= 1e-10);
        assert_eq!(r.evaluated, pts.len());

        let perturbed = parse("y1^2/(2*t) + 0.001*t^2").unwrap();
        assert!(hj_residual(&perturbed, &free, &pts).unwrap().max_residual >= 1e-3);

        let at_zero = [SpacetimePoint::new(vec![1.0], 0.0), SpacetimePoint::new(vec![1.0], 1.0)];
        let r = hj_residual(&spread, &free, &at_zero).unwrap();
        assert_eq!((r.evaluated, r.skipped), (1, 1));
    }

    #[test]
    fn section_transform_preserves_solutions() {
        let m = 2.0;
        let free = free_hamiltonian(m);
        let corpus = [parse("0.5*y1 - 0.0625*t").unwrap(), parse("2*y1^2/(2*t)").unwrap()];
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pts = points(1, 3.5, 5.0);
        for (a, b, _) in random_observer_triples(&mut rng, 1, 10, 1.0) {
            let map = additive_transition(&a, &b, &[0.3], m).unwrap();
            for sigma in &corpus {
                assert!(hj_residual(sigma, &free, &pts).unwrap().max_residual <= 1e-10);
                let moved = section_transform(sigma, &map);
                let r = hj_residual(&moved, &free, &pts).unwrap();
                assert!(r.max_residual <= 1e-9, "{}", r.max_residual);
            }
        }
        let id = AdditiveGaugeMap::identity(1, m).unwrap();
        assert!(crate::symexpr::equal(&section_transform(&corpus[1], &id), &corpus[1], 1e-12));
    }

    #[test]
    fn section_differential_follows_phase_transform() {
        let m = 1.5;
        let sigma = parse("0.3*y1^2 - 0.2*y1*t + 0.1*t^3").unwrap();
        let g = GalileanTransition::new(vec![0.7], vec![-0.4], 0.25).unwrap();
        let map = AdditiveGaugeMap::new(g.clone(), vec![0.2], m).unwrap();
        let moved = section_transform(&sigma, &map);
        for p in points(1, -1.0, 1.0) {
            let grad = sigma.diff(Var::Y(0)).eval_real(&p.y, p.t).unwrap().re;
            let h = -sigma.diff(Var::T).eval_real(&p.y, p.t).unwrap().re;
            let image = phase_transform(&PhasePoint::new(p.y.clone(), p.t, vec![grad], h).unwrap(), &g, m).unwrap();
            let grad2 = moved.diff(Var::Y(0)).eval_real(&image.y, image.t).unwrap().re;
            let h2 = -moved.diff(Var::T).eval_real(&image.y, image.t).unwrap().re;
            assert!((grad2 - image.p[0]).abs() < 1e-10);
            assert!((h2 - image.h).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn phase_transform_is_an_action(
            v1 in -2.0..2.0f64, w1 in -2.0..2.0f64, s1 in -2.0..2.0f64,
            v2 in -2.0..2.0f64, w2 in -2.0..2.0f64, s2 in -2.0..2.0f64,
            y in -2.0..2.0f64, t in -2.0..2.0f64, p in -2.0..2.0f64, m in 0.5..3.0f64,
        ) {
            let g1 = GalileanTransition::new(vec![v1], vec![w1], s1).unwrap();
            let g2 = GalileanTransition::new(vec![v2], vec![w2], s2).unwrap();
            let pt = PhasePoint::free(vec![y], t, vec![p], m).unwrap();
            let twice = phase_transform(&phase_transform(&pt, &g1, m).unwrap(), &g2, m).unwrap();
            let once = phase_transform(&pt, &g2.compose(&g1).unwrap(), m).unwrap();
            prop_assert!((twice.y[0] - once.y[0]).abs() <= 1e-10);
            prop_assert!((twice.t - once.t).abs() <= 1e-10);
            prop_assert!((twice.p[0] - once.p[0]).abs() <= 1e-10);
            prop_assert!((twice.h - once.h).abs() <= 1e-10);
            // the free shell is preserved
            prop_assert!((once.h - once.p[0] * once.p[0] / (2.0 * m)).abs() <= 1e-10);
        }
    }
}
