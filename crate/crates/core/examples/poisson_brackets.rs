//! The bivariational structure: commutators map to Poisson brackets at full
//! truncation, and (φ, π) are canonical.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tdccm::{verify, C64, ConfigSet, ElementaryOps, SpaceSpec};

fn main() -> tdccm::Result<()> {
    let space = SpaceSpec::new(5, true)?;
    let configs = ConfigSet::new(space, space.n_b())?;
    let ops = ElementaryOps::new(space)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let st = configs.random_state(&mut rng, 0.5);

    let pb = configs.poisson_bracket(&ops.b, &ops.b_dag, &st)?;
    let comm = configs.expectation(&ops.b.commutator(&ops.b_dag), &st)?;
    println!("i{{b, b†}} = {}", C64::new(0.0, 1.0) * pb);
    println!("<[b, b†]> = {comm}");

    println!("worst commutator map error over 20 states: {:.2e}", verify::commutator_map_error(&mut rng, 20)?);
    println!("canonical relation error: {:.2e}", verify::canonical_relation_error(configs.len()));
    println!("gradient finite-difference error: {:.2e}", verify::gradient_fd_error(&mut rng, 10)?);
    Ok(())
}
