//! At full truncation the NCCM is exact: compare its trajectory with the
//! exact propagator.

use tdccm::dynamics::{self, IntegratorConfig};
use tdccm::hilbert::expect;
use tdccm::{ed_evolve, rabi_hamiltonian, ConfigSet, ElementaryOps, RabiParams, SpaceSpec};

fn main() -> tdccm::Result<()> {
    let space = SpaceSpec::new(12, true)?;
    let configs = ConfigSet::new(space, space.n_b())?;
    let h = rabi_hamiltonian(&RabiParams::resonant(0.3), space)?;
    let ops = ElementaryOps::new(space)?;
    let cfg = IntegratorConfig::rk4(1e-3, 0.0, 10.0).with_output_interval(1.0);
    let traj = dynamics::integrate(&configs, &h, &configs.zero_state(), &cfg)?;
    let times: Vec<f64> = traj.iter().map(|s| s.t).collect();
    let exact = ed_evolve(&h, &space.basis_vector(space.reference_index()), &times)?;
    for (st, psi) in traj.iter().zip(&exact) {
        let rec = dynamics::observables(&configs, &h, st)?;
        let ed = expect(&ops.sigma_z, psi).re;
        println!("t = {:4.1}  NCCM {:+.12}  ED {:+.12}  diff {:.1e}", st.t, rec.sigma_z.re, ed, (rec.sigma_z - ed).norm());
    }
    Ok(())
}
