//! Sampled wave functions on periodic grids.

mod format;
pub mod spectral;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::gauge::{GaugeMap, GaugeTransform, PhysicalConstants};
use crate::spacetime::Observer;
use crate::symexpr::Expr;

pub use format::{read_field, write_field, MAGIC};
use spectral::{apply_radial, apply_separable, fft_nd, pairwise_sum, wavenumbers, Direction};

/// Shape of a periodic grid: `sizes[a]` nodes spaced `extents[a] / sizes[a]`, starting at `origin[a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    sizes: Vec<usize>,
    extents: Vec<f64>,
    origin: Vec<f64>,
}

impl GridSpec {
    pub fn new(sizes: Vec<usize>, extents: Vec<f64>, origin: Vec<f64>) -> Result<Self> {
        check_dim(sizes.len(), extents.len())?;
        check_dim(sizes.len(), origin.len())?;
        if sizes.is_empty() || sizes.len() > 3 {
            return Err(Error::InvalidParameter(format!("grid dimension {} not in 1..=3", sizes.len())));
        }
        for &s in &sizes {
            if s < 8 || !s.is_power_of_two() {
                return Err(Error::InvalidParameter(format!("grid size {s} is not a power of two ≥ 8")));
            }
        }
        for &l in &extents {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter(format!("extent {l} must be positive")));
            }
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidParameter("origin must be finite".into()));
        }
        Ok(GridSpec { sizes, extents, origin })
    }

    /// The box `[-L/2, L/2)` on every axis.
    pub fn centered(sizes: Vec<usize>, extents: Vec<f64>) -> Result<Self> {
        let origin = extents.iter().map(|l| -0.5 * l).collect();
        Self::new(sizes, extents, origin)
    }

    /// `size` points on `[-extent/2, extent/2)` in each of `n` dimensions.
    pub fn cube(n: usize, size: usize, extent: f64) -> Result<Self> {
        Self::centered(vec![size; n], vec![extent; n])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extents[axis] / self.sizes[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Node coordinates along one axis.
    pub fn axis(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        (0..self.sizes[axis]).map(|j| self.origin[axis] + j as f64 * h).collect()
    }

    /// Coordinates of the node with flat index `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut rest = idx;
        (0..self.dim())
            .map(|a| {
                let j = rest % self.sizes[a];
                rest /= self.sizes[a];
                self.origin[a] + j as f64 * self.spacing(a)
            })
            .collect()
    }

    fn point_into(&self, idx: usize, out: &mut [f64]) {
        let mut rest = idx;
        for (a, y) in out.iter_mut().enumerate() {
            let j = rest % self.sizes[a];
            rest /= self.sizes[a];
            *y = self.origin[a] + j as f64 * self.spacing(a);
        }
    }
}

/// A wave function sampled at one time slice in a given frame.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveField {
    spec: GridSpec,
    t: f64,
    samples: Vec<Complex64>,
    frame: Observer,
    consts: PhysicalConstants,
}

impl WaveField {
    pub fn new(
        spec: GridSpec,
        t: f64,
        samples: Vec<Complex64>,
        frame: Observer,
        consts: PhysicalConstants,
    ) -> Result<Self> {
        check_dim(spec.len(), samples.len())?;
        check_dim(spec.dim(), frame.dim())?;
        if !t.is_finite() {
            return Err(Error::InvalidParameter("slice time must be finite".into()));
        }
        Ok(WaveField { spec, t, samples, frame, consts })
    }

    pub fn zeros(spec: GridSpec, t: f64, frame: Observer, consts: PhysicalConstants) -> Result<Self> {
        let len = spec.len();
        Self::new(spec, t, vec![Complex64::new(0.0, 0.0); len], frame, consts)
    }

    /// Samples a closure `ψ(y, t)` at every node.
    pub fn from_fn<F>(f: F, spec: GridSpec, t: f64, frame: Observer, consts: PhysicalConstants) -> Result<Self>
    where
        F: Fn(&[f64], f64) -> Complex64 + Sync,
    {
        let n = spec.dim();
        let samples = (0..spec.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; n],
                |y, idx| {
                    spec.point_into(idx, y);
                    f(y, t)
                },
            )
            .collect();
        Self::new(spec, t, samples, frame, consts)
    }

    /// Samples an r-free expression in `y1..yn, t`.
    pub fn from_expr(e: &Expr, spec: GridSpec, t: f64, frame: Observer, consts: PhysicalConstants) -> Result<Self> {
        let samples = sample_expr(e, &spec, t)?;
        Self::new(spec, t, samples, frame, consts)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn frame(&self) -> &Observer {
        &self.frame
    }

    pub fn consts(&self) -> &PhysicalConstants {
        &self.consts
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Same grid, frame and constants with new samples and time.
    pub fn with_samples(&self, samples: Vec<Complex64>, t: f64) -> Result<Self> {
        Self::new(self.spec.clone(), t, samples, self.frame.clone(), self.consts)
    }

    /// Forward DFT of the samples (unnormalized).
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut data = self.samples.clone();
        fft_nd(&mut data, &self.spec.sizes, Direction::Forward);
        data
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.samples.par_iter().map(|z| z.norm_sqr()).collect();
        (pairwise_sum(&sq) * self.spec.cell_volume()).sqrt()
    }

    /// Maximum modulus over the grid.
    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    fn check_same_grid(&self, other: &WaveField) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::FieldMismatch("grids differ".into()));
        }
        Ok(())
    }

    fn check_same_slice(&self, other: &WaveField) -> Result<()> {
        self.check_same_grid(other)?;
        if (self.t - other.t).abs() > 1e-12 * self.t.abs().max(1.0) {
            return Err(Error::FieldMismatch(format!("slice times {} and {} differ", self.t, other.t)));
        }
        Ok(())
    }

    /// Multiplies each sample by `exp(phase(y))`.
    pub fn multiply_phase<F>(&mut self, phase: F)
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let spec = &self.spec;
        let n = spec.dim();
        self.samples.par_iter_mut().enumerate().for_each_init(
            || vec![0.0; n],
            |y, (idx, z)| {
                spec.point_into(idx, y);
                *z *= phase(y).exp();
            },
        );
    }

    /// Fraction of `|ψ|²` within one sixteenth of the box from either face of any axis.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let spec = &self.spec;
        let total: Vec<f64> = self.samples.par_iter().map(|z| z.norm_sqr()).collect();
        let edge: Vec<f64> = self
            .samples
            .par_iter()
            .enumerate()
            .map(|(idx, z)| {
                let mut rest = idx;
                let near = spec.sizes.iter().any(|&s| {
                    let j = rest % s;
                    rest /= s;
                    let band = s / 16;
                    j < band || j >= s - band
                });
                if near {
                    z.norm_sqr()
                } else {
                    0.0
                }
            })
            .collect();
        let total = pairwise_sum(&total);
        if total == 0.0 {
            0.0
        } else {
            pairwise_sum(&edge) / total
        }
    }
}

/// Values of an r-free expression at the grid nodes at time `t`.
pub fn sample_expr(e: &Expr, spec: &GridSpec, t: f64) -> Result<Vec<Complex64>> {
    e.require_r_free()?;
    if e.spatial_dim() > spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: e.spatial_dim() });
    }
    let n = spec.dim();
    (0..spec.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |y, idx| {
                spec.point_into(idx, y);
                e.eval_real(y, t)
            },
        )
        .collect()
}

/// Grid-weighted `‖a − b‖₂`.
pub fn l2_distance(a: &WaveField, b: &WaveField) -> Result<f64> {
    a.check_same_slice(b)?;
    let sq: Vec<f64> = a.samples.par_iter().zip(&b.samples).map(|(x, y)| (x - y).norm_sqr()).collect();
    Ok((pairwise_sum(&sq) * a.spec.cell_volume()).sqrt())
}

/// `‖a − b‖ / ‖b‖`, or the absolute distance when `b` vanishes.
pub fn relative_l2_distance(a: &WaveField, b: &WaveField) -> Result<f64> {
    let d = l2_distance(a, b)?;
    let nb = b.l2_norm();
    Ok(if nb == 0.0 { d } else { d / nb })
}

/// `ψ(y − δ)` by a Fourier phase `exp(−i k·δ)`.
pub fn spectral_shift(f: &WaveField, delta: &[f64]) -> Result<WaveField> {
    check_dim(f.dim(), delta.len())?;
    let mut out = f.clone();
    if delta.iter().all(|&d| d == 0.0) {
        return Ok(out);
    }
    shift_in_place(&mut out.samples, &f.spec, delta);
    Ok(out)
}

pub(crate) fn shift_in_place(data: &mut [Complex64], spec: &GridSpec, delta: &[f64]) {
    fft_nd(data, &spec.sizes, Direction::Forward);
    let factors: Vec<Vec<Complex64>> = (0..spec.dim())
        .map(|a| {
            wavenumbers(spec.sizes[a], spec.extents[a])
                .into_iter()
                .map(|k| Complex64::from_polar(1.0, -k * delta[a]))
                .collect()
        })
        .collect();
    apply_separable(data, &spec.sizes, &factors);
    fft_nd(data, &spec.sizes, Direction::Inverse);
}

/// Spectral Laplacian `Σ ∂²ψ/∂y_a²`.
pub fn spectral_laplacian(f: &WaveField) -> Vec<Complex64> {
    let mut data = f.samples.clone();
    fft_nd(&mut data, &f.spec.sizes, Direction::Forward);
    apply_radial(&mut data, &f.spec.sizes, &f.spec.extents, |k2| Complex64::new(-k2, 0.0));
    fft_nd(&mut data, &f.spec.sizes, Direction::Inverse);
    data
}

const WRAP_WARNING: f64 = 1e-10;

fn check_boost(map: &GaugeMap, f: &WaveField) -> Result<()> {
    check_dim(f.dim(), map.dim())?;
    if map.consts() != f.consts() {
        return Err(Error::FieldMismatch("gauge map and field carry different (m, ħ)".into()));
    }
    Ok(())
}

/// Coordinate part of a boost: `ψ(y − w − v t_out)` on the slice `t_out = t + t0`, frame updated.
pub fn boost_coordinates(map: &GaugeMap, f: &WaveField) -> Result<WaveField> {
    check_boost(map, f)?;
    let g = map.transition();
    let t_out = f.t + g.time_shift();
    let delta: Vec<f64> = g.shift().iter().zip(g.velocity()).map(|(w, v)| w + v * t_out).collect();
    let mut out = spectral_shift(f, &delta)?;
    out.t = t_out;
    out.frame = f.frame.transformed(g)?;
    let wrapped = out.boundary_mass_fraction();
    if wrapped > WRAP_WARNING {
        log::warn!("boosted field has {wrapped:.3e} of its mass near the periodic boundary; wrap-around likely");
    }
    Ok(out)
}

/// Push-forward of a sampled slice: `exp(E(ϑ⁻¹(y, t_out))) ψ(ϑ⁻¹(y, t_out))`.
pub fn boost_field(map: &GaugeMap, f: &WaveField) -> Result<WaveField> {
    let mut out = boost_coordinates(map, f)?;
    let t_out = out.t;
    if !map.is_trivial_phase() {
        out.multiply_phase(|y| map.target_exponent(y, t_out));
    }
    Ok(out)
}

/// `‖(ħ²/2m) Δψ + iħ ∂_tψ − Uψ‖ / ‖ψ‖` at the middle slice, centered time difference.
pub fn schrodinger_residual(slices: [&WaveField; 3], potential: &Expr) -> Result<f64> {
    let [prev, mid, next] = slices;
    mid.check_same_grid(prev)?;
    mid.check_same_grid(next)?;
    let dt = mid.t - prev.t;
    let dt2 = next.t - mid.t;
    if dt == 0.0 || (dt - dt2).abs() > 1e-9 * dt.abs() {
        return Err(Error::FieldMismatch(format!("slices are not equally spaced ({dt} vs {dt2})")));
    }
    let norm = mid.l2_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let consts = mid.consts;
    let u = if potential.is_zero() {
        None
    } else {
        Some(sample_expr(potential, &mid.spec, mid.t)?)
    };
    let lap = spectral_laplacian(mid);
    let kinetic = consts.hbar * consts.hbar / (2.0 * consts.m);
    let i_hbar = Complex64::new(0.0, consts.hbar);
    let sq: Vec<f64> = (0..mid.samples.len())
        .into_par_iter()
        .map(|j| {
            let dpsi = (next.samples[j] - prev.samples[j]) / (2.0 * dt);
            let mut r = lap[j] * kinetic + i_hbar * dpsi;
            if let Some(u) = &u {
                r -= u[j] * mid.samples[j];
            }
            r.norm_sqr()
        })
        .collect();
    let res = (pairwise_sum(&sq) * mid.spec.cell_volume()).sqrt();
    Ok(res / norm)
}
