//! Multidimensional FFTs and Fourier multipliers on row-major grids (axis 0 fastest).
//!
//! Every transform works line by line; lines are independent, so the result does
//! not depend on how rayon splits the work.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Signed wavenumbers `2π j / L` in FFT order.
pub fn wavenumbers(size: usize, extent: f64) -> Vec<f64> {
    (0..size)
        .map(|j| {
            let j = if j < size / 2 { j as f64 } else { j as f64 - size as f64 };
            2.0 * PI * j / extent
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

fn plans(sizes: &[usize], dir: Direction) -> Vec<Arc<dyn Fft<f64>>> {
    let mut planner = FftPlanner::new();
    sizes
        .iter()
        .map(|&s| match dir {
            Direction::Forward => planner.plan_fft_forward(s),
            Direction::Inverse => planner.plan_fft_inverse(s),
        })
        .collect()
}

fn transform_axis(data: &mut [Complex64], sizes: &[usize], axis: usize, fft: &Arc<dyn Fft<f64>>) {
    let len = sizes[axis];
    let stride: usize = sizes[..axis].iter().product();
    if stride == 1 {
        data.par_chunks_mut(len).for_each(|line| fft.process(line));
        return;
    }
    // gather strided lines into contiguous scratch, transform, scatter back
    let block = stride * len;
    let mut scratch = vec![Complex64::new(0.0, 0.0); data.len()];
    scratch.par_chunks_mut(block).zip(data.par_chunks(block)).for_each(|(dst, src)| {
        for inner in 0..stride {
            for j in 0..len {
                dst[inner * len + j] = src[j * stride + inner];
            }
        }
    });
    scratch.par_chunks_mut(len).for_each(|line| fft.process(line));
    data.par_chunks_mut(block).zip(scratch.par_chunks(block)).for_each(|(dst, src)| {
        for inner in 0..stride {
            for j in 0..len {
                dst[j * stride + inner] = src[inner * len + j];
            }
        }
    });
}

/// In-place n-dimensional DFT. The inverse is normalized by the total size.
pub(crate) fn fft_nd(data: &mut [Complex64], sizes: &[usize], dir: Direction) {
    let plans = plans(sizes, dir);
    for (axis, fft) in plans.iter().enumerate() {
        transform_axis(data, sizes, axis, fft);
    }
    if dir == Direction::Inverse {
        let scale = 1.0 / data.len() as f64;
        data.par_iter_mut().for_each(|z| *z *= scale);
    }
}

/// Multiplies the spectrum by `Π_a factors[a][j_a]`.
pub(crate) fn apply_separable(data: &mut [Complex64], sizes: &[usize], factors: &[Vec<Complex64>]) {
    let n0 = sizes[0];
    data.par_chunks_mut(n0).enumerate().for_each(|(line, chunk)| {
        let mut outer = Complex64::new(1.0, 0.0);
        let mut rest = line;
        for (a, f) in factors.iter().enumerate().skip(1) {
            outer *= f[rest % sizes[a]];
            rest /= sizes[a];
        }
        for (j, z) in chunk.iter_mut().enumerate() {
            *z *= factors[0][j] * outer;
        }
    });
}

/// Multiplies the spectrum by `mult(Σ_a k_a²)`.
pub(crate) fn apply_radial(data: &mut [Complex64], sizes: &[usize], extents: &[f64], mult: impl Fn(f64) -> Complex64 + Sync) {
    let ks: Vec<Vec<f64>> = sizes.iter().zip(extents).map(|(&s, &l)| wavenumbers(s, l)).collect();
    let n0 = sizes[0];
    data.par_chunks_mut(n0).enumerate().for_each(|(line, chunk)| {
        let mut outer = 0.0;
        let mut rest = line;
        for a in 1..sizes.len() {
            let k = ks[a][rest % sizes[a]];
            outer += k * k;
            rest /= sizes[a];
        }
        for (j, z) in chunk.iter_mut().enumerate() {
            let k = ks[0][j];
            *z *= mult(k * k + outer);
        }
    });
}

/// Sum with a fixed binary reduction tree, independent of thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 256;
    const PARALLEL: usize = 1 << 16;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    if xs.len() >= PARALLEL {
        let (sa, sb) = rayon::join(|| pairwise_sum(a), || pairwise_sum(b));
        sa + sb
    } else {
        pairwise_sum(a) + pairwise_sum(b)
    }
}
