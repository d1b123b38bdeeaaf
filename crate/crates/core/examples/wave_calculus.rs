//! The wave differential, gradient, divergence and Laplace operator on a Gaussian.

use schro::gauge::{schrodinger_operator, PhysicalConstants};
use schro::symexpr::{compare, parse};
use schro::waveforms::{schrodinger_laplace, wave_d_function, wave_divergence, wave_gradient, WaveForm};

fn main() -> schro::Result<()> {
    let consts = PhysicalConstants::new(1.0, 1.0)?;
    let psi = parse("exp(-(y1^2 + y2^2)/2 + i*t)")?;

    let dpsi = wave_d_function(&psi, 2, &consts)?;
    println!("d~psi    = {dpsi}");
    let twice = dpsi.wave_d(&consts);
    println!("d~d~psi: max |.| = {:.2e}", twice.max_deviation(&WaveForm::zero(2, 2)?, 1e-9)?);

    let grad = wave_gradient(&psi, 2, &consts)?;
    println!("grad psi = {grad}");
    let lap = wave_divergence(&grad, &consts)?;
    let direct = schrodinger_laplace(&psi, 2, &consts)?;
    println!("div grad vs Laplace: {:.2e}", compare(&lap, &direct, 1e-9)?.max_dev);

    let scaled = lap.scale((consts.hbar * consts.hbar / (2.0 * consts.m)).into());
    let s0 = schrodinger_operator(&psi, None, 2, &consts);
    println!("(hbar^2/2m) Laplace vs S0: {:.2e}", compare(&scaled, &s0, 1e-9)?.max_dev);
    Ok(())
}
