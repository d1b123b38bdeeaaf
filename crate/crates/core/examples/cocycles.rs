//! Strict and projective transition functions over random observer triples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use schro::gauge::{check_cocycle, projective_family, strict_family, CocycleMode, PhysicalConstants};
use schro::spacetime::{random_observer_triples, random_points};

fn main() -> schro::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let consts = PhysicalConstants::new(1.0, 1.0)?;
    let triples = random_observer_triples(&mut rng, 3, 200, 2.0);
    let points = random_points(&mut rng, 3, 100, 2.0);

    let strict = check_cocycle(&strict_family(&triples, &[0.5, 0.0, -0.5], &consts)?, &points, CocycleMode::Strict)?;
    println!("strict:     max deviation {:.2e}", strict.max_dev);

    let proj = check_cocycle(&projective_family(&triples, &consts)?, &points, CocycleMode::Projective)?;
    println!(
        "projective: phase stddev {:.2e}, coordinates {:.2e}, max |ratio - 1| {:.2}",
        proj.phase_stddev, proj.coord_dev, proj.max_unit_deviation
    );
    Ok(())
}
