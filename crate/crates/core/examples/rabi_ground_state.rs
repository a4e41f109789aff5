//! SUB-N stationary ground-state energies of the Rabi model against exact
//! diagonalization.

use tdccm::dynamics::{self, NewtonOptions};
use tdccm::{ed_ground, rabi_hamiltonian, RabiParams, SpaceSpec};

fn main() -> tdccm::Result<()> {
    let space = SpaceSpec::new(30, true)?;
    println!("{:>5} {:>6} {:>22} {:>10} {:>6}", "g", "SUB-N", "E", "|E - E_ED|", "iters");
    for g in [0.1, 0.2, 0.3] {
        let params = RabiParams::resonant(g);
        let exact = ed_ground(&rabi_hamiltonian(&params, space)?)?.energy;
        for level in [2, 4, 6, 8] {
            let stat = dynamics::solve_stationary(&params, space, level, None, &NewtonOptions::default())?;
            println!("{g:>5} {level:>6} {:>22.15} {:>10.2e} {:>6}", stat.energy.re, (stat.energy - exact).norm(), stat.newton_iters);
        }
    }
    Ok(())
}
