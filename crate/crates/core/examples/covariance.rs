//! Evolve-then-boost against boost-then-evolve for a free Gaussian packet.

use schro::fields::{GridSpec, WaveField};
use schro::gauge::PhysicalConstants;
use schro::solver::{covariance_check, evolve, EvolutionConfig, FreeGaussian, GaugeMode};
use schro::spacetime::{GalileanTransition, Observer};
use schro::symexpr::parse;

fn main() -> schro::Result<()> {
    let consts = PhysicalConstants::new(1.0, 1.0)?;
    let spec = GridSpec::cube(1, 1024, 80.0)?;
    let packet = FreeGaussian::new(1.0, vec![0.0], vec![0.0], consts)?;
    let f0 = WaveField::from_fn(|y, t| packet.rest(y, t), spec, 0.0, Observer::rest(1), consts)?;

    let run = evolve(&f0, &EvolutionConfig::free(1e-3, 2000).recording_every(500))?;
    for e in &run.log {
        println!("step {:>5}  t = {:.3}  norm = {:.15}", e.step, e.t, e.norm);
    }

    let g = GalileanTransition::boost(vec![1.0]);
    let cfg = EvolutionConfig::free(1e-3, 2000);
    let full = covariance_check(&f0, &g, &cfg, GaugeMode::Full)?;
    let bare = covariance_check(&f0, &g, &cfg, GaugeMode::CoordinatesOnly)?;
    println!("with gauge phase:    {:.2e}", full.relative_distance);
    println!("without gauge phase: {:.2e}", bare.relative_distance);

    let trapped = EvolutionConfig::free(1e-3, 2000).with_potential(parse("y1^2/2")?);
    let osc = covariance_check(&f0, &g, &trapped, GaugeMode::Full)?;
    println!("harmonic potential:  {:.2e}", osc.relative_distance);
    Ok(())
}
