//! Classical phases: the additive cocycle, transformed HJ solutions and the free dispersion relation.

use schro::gauge::GaugeTransform;
use schro::hj::{
    additive_transition, exponentiate, free_hamiltonian, hj_residual, phase_transform, section_transform, PhasePoint,
};
use schro::spacetime::{GalileanTransition, Observer, SpacetimePoint};
use schro::symexpr::parse;

fn main() -> schro::Result<()> {
    let m = 1.0;
    let a = Observer::new(vec![0.0], 0.0, vec![0.0])?;
    let b = Observer::new(vec![1.0], 0.5, vec![-0.7])?;
    let shift = additive_transition(&a, &b, &[0.0], m)?;
    let p = SpacetimePoint::new(vec![0.3], 1.0);
    println!("s(y, t) at {:?}: {:.6}", p, shift.shift(&p.y, p.t));
    println!("exp(i s/hbar) factor: {:.6}", exponentiate(&shift, 1.0)?.gauge_factor(&p.y, p.t));

    let sigma = parse("y1^2/(2*t)")?;
    let image = section_transform(&sigma, &shift);
    let pts: Vec<SpacetimePoint> = (0..20).map(|i| SpacetimePoint::new(vec![-2.0 + 0.2 * i as f64], 4.0)).collect();
    println!("HJ residual of sigma:   {:.2e}", hj_residual(&sigma, free_hamiltonian(m), &pts)?.max_residual);
    println!("HJ residual of image:   {:.2e}", hj_residual(&image, free_hamiltonian(m), &pts)?.max_residual);

    let pt = PhasePoint::free(vec![0.0], 0.0, vec![1.5], m)?;
    let out = phase_transform(&pt, &GalileanTransition::boost(vec![0.5]), m)?;
    println!("(p, h) = ({:.3}, {:.4}) -> ({:.3}, {:.4})", pt.p[0], pt.h, out.p[0], out.h);
    Ok(())
}
