//! NCCM amplitudes (s, s̃) and ECCM amplitudes (σ, σ̃) describe the same state;
//! at full truncation both give identical expectation values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tdccm::{eccm, rabi_hamiltonian, ConfigSet, RabiParams, SpaceSpec};

fn main() -> tdccm::Result<()> {
    let space = SpaceSpec::new(4, true)?;
    let configs = ConfigSet::new(space, space.n_b())?;
    let h = rabi_hamiltonian(&RabiParams::resonant(0.3), space)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let st = configs.random_state(&mut rng, 0.6);
    let e = eccm::s_to_sigma(&configs, &st)?;
    for (i, idx) in configs.indices().iter().enumerate().take(4) {
        println!("{idx}: s = {:.4}  s~ = {:.4}  sigma~ = {:.4}", st.s[i], st.s_tilde[i], e.sigma_tilde[i]);
    }
    println!("NCCM <h> = {:.12}", configs.expectation(&h, &st)?);
    println!("ECCM <h> = {:.12}", eccm::eccm_expectation(&configs, &h, &e)?);
    println!("NCCM/ECCM trajectory agreement: {:.2e}", tdccm::verify::trajectory_agreement(&configs, &h, 1.0)?);
    Ok(())
}
