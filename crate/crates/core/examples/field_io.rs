//! Writing, reading and boosting a sampled field in the SCHWF001 format.

use schro::fields::{boost_field, GridSpec, WaveField};
use schro::gauge::{projective_transition, PhysicalConstants};
use schro::spacetime::{GalileanTransition, Observer};
use schro::symexpr::parse;

fn main() -> schro::Result<()> {
    let consts = PhysicalConstants::new(1.0, 1.0)?;
    let spec = GridSpec::cube(2, 64, 20.0)?;
    let f = WaveField::from_expr(&parse("exp(-(y1^2 + y2^2)/2)")?, spec, 0.0, Observer::rest(2), consts)?;

    let dir = std::env::temp_dir().join("schro-field-io");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("packet.schwf");
    f.save(&path)?;
    let back = WaveField::load(&path)?;
    println!("round trip identical: {}", back == f);

    let g = GalileanTransition::new(vec![0.5, 0.0], vec![1.0, 0.0], 0.0)?;
    let moved = boost_field(&projective_transition(&g, &consts), &back)?;
    println!("norm before {:.15}, after {:.15}", back.l2_norm(), moved.l2_norm());
    println!("frame after boost: {:?}", moved.frame());
    println!("boundary mass fraction: {:.2e}", moved.boundary_mass_fraction());
    Ok(())
}
