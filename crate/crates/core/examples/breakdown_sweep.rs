//! Continuation in g with warm starts until the Newton solver first fails.
//!
//! `cargo run --release --example breakdown_sweep -- 6 0.8`

use tdccm::dynamics::{self, NewtonOptions};
use tdccm::{RabiParams, SpaceSpec};

fn main() -> tdccm::Result<()> {
    let mut args = std::env::args().skip(1);
    let level: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(6);
    let g_max: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.8);
    let space = SpaceSpec::new(30, true)?;
    let grid = dynamics::g_grid(g_max, 0.005);
    let sweep = dynamics::continuation_sweep(&RabiParams::resonant(0.0), space, level, &grid, &NewtonOptions::default())?;
    for p in sweep.points.iter().step_by(10) {
        println!("g = {:.3}  E = {:+.12}  converged = {}", p.g, p.energy.re, p.converged);
    }
    match sweep.first_breakdown_g {
        Some(g) => println!("SUB-{level}: first breakdown at g = {g:.3}"),
        None => println!("SUB-{level}: no breakdown up to g = {g_max}"),
    }
    Ok(())
}
