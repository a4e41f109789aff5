//! Linear-response frequencies around the SUB-8 stationary point.

use tdccm::dynamics::{self, NewtonOptions};
use tdccm::hilbert::HermitianSpectrum;
use tdccm::{rabi_hamiltonian, ConfigSet, RabiParams, SpaceSpec};

fn main() -> tdccm::Result<()> {
    let space = SpaceSpec::new(30, true)?;
    let h = rabi_hamiltonian(&RabiParams::resonant(0.2), space)?;
    let configs = ConfigSet::new(space, 8)?;
    let stat = dynamics::solve_stationary_with(&configs, &h, 0.2, None, &NewtonOptions::default())?;
    let w = dynamics::excitation_spectrum(&configs, &h, &stat, 1e-6)?;
    let positive: Vec<_> = w.iter().filter(|x| x.re > 1e-6).take(4).collect();
    let ed = HermitianSpectrum::new(&h)?.values;
    for (k, x) in positive.iter().enumerate() {
        println!("ω_{} = {:.9}   E_{} - E_0 = {:.9}", k + 1, x.re, k + 1, ed[k + 1] - ed[0]);
    }
    Ok(())
}
