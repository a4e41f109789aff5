//! The three Hilbert-space picture for a time-dependent Dyson map: kets,
//! ketkets and observables evolved independently, then compared.

use tdccm::nhip::{self, DerivativeRule, Profile, ShiftFamily, ThreeSpaceBundle};
use tdccm::dynamics::IntegratorConfig;
use tdccm::{rabi_hamiltonian, verify, ElementaryOps, RabiParams, SpaceSpec};

fn main() -> tdccm::Result<()> {
    let space = SpaceSpec::new(6, true)?;
    let h = rabi_hamiltonian(&RabiParams::resonant(0.3), space)?;
    let map = ShiftFamily::coherent_and_spin(space, Profile::linear(0.1), Profile::oscillating(0.2, 1.0))?;
    let bundle = ThreeSpaceBundle::new(&h, &map, DerivativeRule::Analytic)?;
    let frame = bundle.frame(1.0)?;
    println!("at t = 1: |H - H†| = {:.3e}, |Ξ - Ξ†| = {:.3e}", frame.hamiltonian.hermiticity_defect(), frame.coriolis.hermiticity_defect());

    let ops = ElementaryOps::new(space)?;
    let cfg = IntegratorConfig::rk4(1e-3, 0.0, 2.0).with_output_interval(0.5);
    let traj = nhip::evolve_three_space(&bundle, &space.basis_vector(space.reference_index()), &cfg)?;
    let rep = nhip::three_space_report(&bundle, &traj, &[&ops.sigma_z])?;
    println!("{rep:#?}");

    let cert = verify::certify_map(&h, &map, 0.0, 2.0, 1e-3)?;
    println!("{cert:#?}");
    Ok(())
}
