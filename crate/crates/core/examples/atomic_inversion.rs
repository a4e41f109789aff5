//! Atomic inversion ⟨σᶻ⟩(t) from |0,↓⟩ at SUB-4 and SUB-6. The imaginary part
//! of the expectation value measures the truncation error.

use tdccm::dynamics::{self, IntegratorConfig};
use tdccm::{rabi_hamiltonian, ConfigSet, RabiParams, SpaceSpec};

fn main() -> tdccm::Result<()> {
    let space = SpaceSpec::new(20, true)?;
    let h = rabi_hamiltonian(&RabiParams::resonant(0.1), space)?;
    let cfg = IntegratorConfig::rk4(1e-3, 0.0, 10.0).with_output_interval(1.0);
    for level in [4, 6] {
        let configs = ConfigSet::new(space, level)?;
        println!("SUB-{level}");
        let mut worst: f64 = 0.0;
        dynamics::integrate_with(&configs, &h, &configs.zero_state(), &cfg, |st| {
            let rec = dynamics::observables(&configs, &h, st)?;
            worst = worst.max(rec.sigma_z.im.abs());
            println!("  t = {:4.1}  <σz> = {:+.10} {:+.2e}i  <n> = {:.6}", rec.t, rec.sigma_z.re, rec.sigma_z.im, rec.n_photon.re);
            Ok(())
        })?;
        println!("  max |Im <σz>| at output times = {worst:.2e}");
    }
    Ok(())
}
