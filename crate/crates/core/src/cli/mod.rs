//! Config-driven batch runs.
//!
//! Each subcommand reads a [`RunConfig`], validates it completely, computes,
//! and writes its CSV files plus `manifest.json` into the output directory.
//! Exit codes: 0 success, 1 a run that failed (divergence, failed check,
//! numerical error), 2 a usage or config error.
//!
//! CSV layouts (complex columns are `_re`/`_im` pairs):
//!
//! - `stationary.csv`: `row_kind, g, sub_n, e_re, e_im, converged,
//!   newton_iters, residual_norm, first_breakdown_g`, plus `e_ed, abs_err`
//!   with `--oracle ed`. `row_kind` is `point` for each coupling and
//!   `summary` for the last row of every level, which carries
//!   `first_breakdown_g` (`none` when Newton never failed).
//! - `evolve.csv` (or `evolve_sub{N}.csv` for several levels): `t, sz, n, e,
//!   norm_check, herm_residual, boundary_leak`, plus `ed_sz, ed_n, dev_sz,
//!   dev_n` with `--oracle ed`. `norm_check` is `|⟨ψ̃|ψ⟩ − 1|`.
//! - `spectrum.csv`: `index, w` for the linear-response frequencies.
//! - `nhip.csv`: `t, hidden_norm, sz_initial, sz_nhip, ket_map_defect`.
//! - `verify.json`: the full check report.
//!
//! The amplitude file for `initial.kind = "amplitude-file"` has columns
//! `channel, n, s_re, s_im, s_tilde_re, s_tilde_im`; configurations that are
//! not listed start at zero.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::Deserialize;

use crate::dynamics::{self, ObservableRecord};
use crate::eccm;
use crate::hilbert::{ed_ground, expect, HermitianSpectrum, Spin};
use crate::nccm::{Channel, ConfigIndex};
use crate::nhip::{self, DerivativeRule, DysonMap, Profile, ShiftFamily, ThreeSpaceBundle};
use crate::verify::{self, Check, Suite};
use crate::{CVector, CcmState, ConfigSet, ElementaryOps, Error, OperatorMatrix, Result, SpaceSpec, C64};

pub use config::RunConfig;
use config::{InitialKind, MapKind, MethodKind};
use output::{complex_cells, complex_header, fmt_f64, Manifest, Status, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Stationary,
    Evolve,
    Spectrum,
    Nhip,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Stationary => "stationary",
            Command::Evolve => "evolve",
            Command::Spectrum => "spectrum",
            Command::Nhip => "nhip",
            Command::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    /// Output directory; `verify` writes files only when this is set.
    pub out: Option<PathBuf>,
    pub oracle_ed: bool,
    pub sweep_parallel: Option<usize>,
    pub seed: Option<u64>,
    /// Suites for `verify`.
    pub suites: Vec<Suite>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub manifest: Manifest,
}

/// Exit code for an error that escaped a run.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        _ => 1,
    }
}

/// Runs one subcommand. Config errors are returned before anything is
/// computed or written.
pub fn execute(cmd: Command, opts: &Options) -> Result<Outcome> {
    let start = Instant::now();
    let config = match &opts.config {
        Some(path) => {
            let mut cfg = RunConfig::load(path)?;
            if let Some(seed) = opts.seed {
                cfg.seed = seed;
            }
            Some(cfg)
        }
        None if cmd == Command::Verify => None,
        None => return Err(Error::Config(format!("`{}` needs --config", cmd.name()))),
    };
    let seed = opts.seed.or(config.as_ref().map(|c| c.seed)).unwrap_or(0);
    if let Some(k) = opts.sweep_parallel {
        if k == 0 {
            return Err(Error::Config("--sweep-parallel needs at least one thread".into()));
        }
    }
    let out_dir = match (&opts.out, cmd) {
        (Some(dir), _) => Some(dir.clone()),
        (None, Command::Verify) => None,
        (None, _) => Some(PathBuf::from(".")),
    };
    if let Some(dir) = &out_dir {
        std::fs::create_dir_all(dir)?;
    }

    let mut manifest = Manifest::new(cmd.name(), config.clone(), seed);
    manifest.flag("oracle_ed", opts.oracle_ed);
    manifest.flag("sweep_parallel", opts.sweep_parallel);
    if cmd == Command::Verify {
        let names: Vec<_> = opts.suites.iter().map(|s| s.name()).collect();
        manifest.flag("suites", names);
    }

    let run = match (cmd, &config, &out_dir) {
        (Command::Verify, _, dir) => run_verify(&opts.suites, seed, dir.as_deref(), &mut manifest),
        (_, Some(cfg), Some(dir)) => match cmd {
            Command::Stationary => run_stationary(cfg, opts, dir, &mut manifest),
            Command::Evolve => run_evolve(cfg, opts, dir, &mut manifest),
            Command::Spectrum => run_spectrum(cfg, opts, dir, &mut manifest),
            Command::Nhip => run_nhip(cfg, dir, &mut manifest),
            Command::Verify => unreachable!(),
        },
        _ => unreachable!("config and output directory resolved above"),
    };
    if let Err(e) = run {
        manifest.status = Status::Failed;
        manifest.note("error", e.to_string());
    }
    if manifest.status == Status::Ok && manifest.checks.iter().any(|c| !c.passed) {
        manifest.status = Status::Failed;
    }
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    if let Some(dir) = &out_dir {
        manifest.write(dir)?;
    }
    let exit_code = if manifest.status == Status::Ok { 0 } else { 1 };
    Ok(Outcome { exit_code, manifest })
}

fn thread_pool(opts: &Options) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(opts.sweep_parallel.unwrap_or(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))
}

fn check(suite: &'static str, name: &str, value: f64, tolerance: f64) -> Check {
    Check { suite, name: name.to_string(), value, tolerance, passed: value.is_finite() && value < tolerance }
}

fn hamiltonian(cfg: &RunConfig) -> Result<(SpaceSpec, OperatorMatrix)> {
    let space = cfg.space()?;
    Ok((space, crate::rabi_hamiltonian(&cfg.params()?, space)?))
}

fn run_stationary(cfg: &RunConfig, opts: &Options, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let space = cfg.space()?;
    let base = cfg.params()?;
    let g_values = cfg.g_values();
    let newton = cfg.newton_options();
    let mut levels = cfg.levels();
    levels.sort_unstable();
    levels.dedup();

    let pool = thread_pool(opts)?;
    let sweeps = pool.install(|| {
        levels
            .par_iter()
            .map(|&level| dynamics::continuation_sweep(&base, space, level, &g_values, &newton))
            .collect::<Result<Vec<_>>>()
    })?;
    let ed: Option<Vec<f64>> = if opts.oracle_ed {
        let energies = pool.install(|| {
            g_values
                .par_iter()
                .map(|&g| {
                    let p = crate::RabiParams::new(base.omega0, base.omega, g)?;
                    Ok(ed_ground(&crate::rabi_hamiltonian(&p, space)?)?.energy)
                })
                .collect::<Result<Vec<f64>>>()
        })?;
        Some(energies)
    } else {
        None
    };

    let mut header: Vec<String> = ["row_kind", "g", "sub_n"].map(String::from).to_vec();
    header.extend(complex_header("e"));
    header.extend(["converged", "newton_iters", "residual_norm", "first_breakdown_g"].map(String::from));
    if ed.is_some() {
        header.extend(["e_ed", "abs_err"].map(String::from));
    }
    let path = dir.join("stationary.csv");
    let mut table = Table::create(&path, &header)?;
    manifest.outputs.push("stationary.csv".into());

    let mut breakdowns = serde_json::Map::new();
    for sweep in &sweeps {
        for (i, p) in sweep.points.iter().enumerate() {
            let mut row = vec!["point".to_string(), fmt_f64(p.g), p.level.to_string()];
            row.extend(complex_cells(p.energy));
            row.extend([p.converged.to_string(), p.newton_iters.to_string(), fmt_f64(p.residual_norm), String::new()]);
            if let Some(e) = &ed {
                row.extend([fmt_f64(e[i]), fmt_f64((p.energy - e[i]).norm())]);
            }
            table.row(&row)?;
        }
        let first = sweep.first_breakdown_g.map_or("none".to_string(), fmt_f64);
        let mut row = vec!["summary".to_string(), String::new(), sweep.level.to_string()];
        row.extend([String::new(), String::new(), String::new(), String::new(), String::new(), first]);
        if ed.is_some() {
            row.extend([String::new(), String::new()]);
        }
        table.row(&row)?;
        breakdowns.insert(format!("sub_{}", sweep.level), serde_json::to_value(sweep.first_breakdown_g)?);
        info!("SUB-{}: {} points, first breakdown {:?}", sweep.level, sweep.points.len(), sweep.first_breakdown_g);
    }
    manifest.note("first_breakdown_g", breakdowns);
    Ok(())
}

/// Initial NCCM amplitudes for `configs` from the `initial` section.
pub fn initial_state(cfg: &RunConfig, configs: &ConfigSet, h: &OperatorMatrix) -> Result<CcmState> {
    let space = configs.space();
    match cfg.initial.kind {
        InitialKind::Reference => Ok(configs.zero_state()),
        InitialKind::Coherent => {
            // truncated e^{αb†}|0,↓⟩
            let alpha = C64::new(cfg.initial.alpha_re, cfg.initial.alpha_im);
            let mut psi = CVector::zeros(space.dim());
            let mut c = C64::new(1.0, 0.0);
            for n in 0..=space.n_b() {
                if n > 0 {
                    c *= alpha / (n as f64).sqrt();
                }
                psi[space.index(n, Spin::Down)] = c;
            }
            let psi_tilde = psi.conjugate() / C64::new(psi.norm_squared(), 0.0);
            configs.cluster_log(&psi, &psi_tilde)
        }
        InitialKind::EdGround => {
            let ground = ed_ground(h)?.state;
            let psi_tilde = ground.conjugate() / ground.dotc(&ground);
            configs.cluster_log(&ground, &psi_tilde)
        }
        InitialKind::AmplitudeFile => {
            let path = cfg.initial.path.as_deref().expect("validated");
            read_amplitudes(Path::new(path), configs)
        }
    }
}

#[derive(Deserialize)]
struct AmplitudeRow {
    channel: u8,
    n: usize,
    s_re: f64,
    s_im: f64,
    s_tilde_re: f64,
    s_tilde_im: f64,
}

pub fn read_amplitudes(path: &Path, configs: &ConfigSet) -> Result<CcmState> {
    let mut state = configs.zero_state();
    let mut reader = csv::Reader::from_path(path)?;
    for row in reader.deserialize() {
        let row: AmplitudeRow = row?;
        let channel = Channel::from_number(row.channel)
            .ok_or_else(|| Error::Config(format!("{}: channel must be 1 or 2, found {}", path.display(), row.channel)))?;
        let i = configs.position(ConfigIndex { channel, n: row.n })?;
        state.s[i] = C64::new(row.s_re, row.s_im);
        state.s_tilde[i] = C64::new(row.s_tilde_re, row.s_tilde_im);
    }
    Ok(state)
}

pub fn write_amplitudes(path: &Path, configs: &ConfigSet, state: &CcmState) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["channel", "n", "s_re", "s_im", "s_tilde_re", "s_tilde_im"])?;
    for (i, idx) in configs.indices().iter().enumerate() {
        let mut row = vec![idx.channel.number().to_string(), idx.n.to_string()];
        row.extend(complex_cells(state.s[i]));
        row.extend(complex_cells(state.s_tilde[i]));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

struct EvolveSummary {
    level: usize,
    max_abs_sz_im: f64,
    energy_drift: f64,
    oracle: Option<(f64, f64)>,
    complete: bool,
    divergence: Option<String>,
}

fn evolve_level(cfg: &RunConfig, opts: &Options, level: usize, file: &Path) -> Result<EvolveSummary> {
    let (space, h) = hamiltonian(cfg)?;
    let configs = ConfigSet::new(space, level)?;
    let state0 = initial_state(cfg, &configs, &h)?;
    let icfg = cfg.integrator.to_config();
    let ops = ElementaryOps::new(space)?;

    let oracle = if opts.oracle_ed {
        let ket = configs.ket(&state0)?;
        let psi0 = &ket / C64::new(ket.norm(), 0.0);
        Some((HermitianSpectrum::new(&h)?, psi0))
    } else {
        None
    };

    let mut header: Vec<String> = vec!["t".into()];
    for name in ["sz", "n", "e"] {
        header.extend(complex_header(name));
    }
    header.extend(["norm_check", "herm_residual", "boundary_leak"].map(String::from));
    if oracle.is_some() {
        header.extend(["ed_sz", "ed_n", "dev_sz", "dev_n"].map(String::from));
    }
    let mut table = Table::create(file, &header)?;

    let mut summary = EvolveSummary {
        level,
        max_abs_sz_im: 0.0,
        energy_drift: 0.0,
        oracle: oracle.as_ref().map(|_| (0.0, 0.0)),
        complete: configs.is_complete(),
        divergence: None,
    };
    let mut e0 = None;
    let mut record = |rec: ObservableRecord| -> Result<()> {
        let mut row = vec![fmt_f64(rec.t)];
        for z in [rec.sigma_z, rec.n_photon, rec.energy] {
            row.extend(complex_cells(z));
        }
        row.extend([
            fmt_f64((rec.norm_check - C64::new(1.0, 0.0)).norm()),
            fmt_f64(rec.herm_residual),
            fmt_f64(rec.boundary_leak),
        ]);
        if let Some((spec, psi0)) = &oracle {
            let psi = spec.evolve(psi0, rec.t - icfg.t0);
            let (sz, n) = (expect(&ops.sigma_z, &psi).re, expect(&ops.number, &psi).re);
            let (dz, dn) = ((rec.sigma_z - sz).norm(), (rec.n_photon - n).norm());
            row.extend([fmt_f64(sz), fmt_f64(n), fmt_f64(dz), fmt_f64(dn)]);
            let o = summary.oracle.as_mut().expect("oracle enabled");
            o.0 = o.0.max(dz);
            o.1 = o.1.max(dn);
        }
        let e0 = *e0.get_or_insert(rec.energy);
        summary.energy_drift = summary.energy_drift.max((rec.energy - e0).norm());
        summary.max_abs_sz_im = summary.max_abs_sz_im.max(rec.sigma_z.im.abs());
        table.row(&row)
    };

    let result = match cfg.method.kind {
        MethodKind::Nccm => dynamics::integrate_with(&configs, &h, &state0, &icfg, |st| {
            record(dynamics::observables(&configs, &h, st)?)
        }),
        MethodKind::Eccm => {
            let sigma0 = eccm::s_to_sigma(&configs, &state0)?;
            dynamics::integrate_eccm_with(&configs, &h, &sigma0, &icfg, |st| {
                let s = eccm::sigma_to_s(&configs, st)?;
                record(dynamics::observables(&configs, &h, &s)?)
            })
        }
    };
    match result {
        Ok(()) => {}
        Err(e @ Error::Divergence { .. }) => summary.divergence = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(summary)
}

fn run_evolve(cfg: &RunConfig, opts: &Options, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let mut levels = cfg.levels();
    levels.sort_unstable();
    levels.dedup();
    let names: Vec<String> = if levels.len() == 1 {
        vec!["evolve.csv".into()]
    } else {
        levels.iter().map(|n| format!("evolve_sub{n}.csv")).collect()
    };
    let pool = thread_pool(opts)?;
    let summaries = pool.install(|| {
        levels
            .par_iter()
            .zip(&names)
            .map(|(&level, name)| evolve_level(cfg, opts, level, &dir.join(name)))
            .collect::<Result<Vec<_>>>()
    })?;
    manifest.outputs.extend(names);

    let mut per_level = serde_json::Map::new();
    for s in &summaries {
        let mut entry = serde_json::Map::new();
        entry.insert("max_abs_sz_im".into(), s.max_abs_sz_im.into());
        entry.insert("energy_drift".into(), s.energy_drift.into());
        if let Some((dz, dn)) = s.oracle {
            entry.insert("max_dev_sz".into(), dz.into());
            entry.insert("max_dev_n".into(), dn.into());
            if s.complete {
                manifest.checks.push(check("evolve", &format!("SUB-{} ⟨σᶻ⟩ vs ED", s.level), dz, 1e-7));
                manifest.checks.push(check("evolve", &format!("SUB-{} ⟨n⟩ vs ED", s.level), dn, 1e-7));
            }
        }
        if let Some(msg) = &s.divergence {
            entry.insert("divergence".into(), msg.clone().into());
            manifest.status = Status::Diverged;
        }
        per_level.insert(format!("sub_{}", s.level), entry.into());
    }
    manifest.note("levels", per_level);
    if summaries.len() > 1 {
        let decreasing = summaries.windows(2).all(|w| w[1].max_abs_sz_im < w[0].max_abs_sz_im);
        manifest.note("sz_im_decreasing_with_n", decreasing);
    }
    manifest.flag("diverged", manifest.status == Status::Diverged);
    Ok(())
}

fn run_spectrum(cfg: &RunConfig, opts: &Options, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let (space, h) = hamiltonian(cfg)?;
    let base = cfg.params()?;
    let level = cfg.method.sub_n;
    let step = cfg.sweep.g_step.unwrap_or(0.005);
    let mut g_values = dynamics::g_grid(base.g, step);
    if g_values.last().is_some_and(|&g| (g - base.g).abs() > 1e-12) {
        g_values.push(base.g);
    }
    let sweep = dynamics::continuation_sweep(&base, space, level, &g_values, &cfg.newton_options())?;
    let stat = sweep.points.last().expect("grid is non-empty");
    if sweep.first_breakdown_g.is_some() {
        return Err(Error::NotConverged);
    }
    let configs = ConfigSet::new(space, level)?;
    let freqs = dynamics::excitation_spectrum(&configs, &h, stat, 1e-6)?;

    let mut header = vec!["index".to_string()];
    header.extend(complex_header("w"));
    let mut table = Table::create(&dir.join("spectrum.csv"), &header)?;
    for (i, w) in freqs.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(complex_cells(*w));
        table.row(&row)?;
    }
    manifest.outputs.push("spectrum.csv".into());

    let symmetry = freqs
        .iter()
        .map(|w| freqs.iter().map(|v| (v + w).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    manifest.checks.push(check("spectrum", "negation symmetry", symmetry, 1e-8));
    let lowest = dynamics::lowest_positive(&freqs, 1e-6);
    manifest.note("ground_energy", [stat.energy.re, stat.energy.im]);
    manifest.note("lowest_positive", lowest.map(|w| [w.re, w.im]));
    if opts.oracle_ed {
        let values = HermitianSpectrum::new(&h)?.values;
        let gap = values[1] - values[0];
        manifest.note("ed_gap", gap);
        // a truncation error, not a defect: reported, never failed
        manifest.note("lowest_vs_ed_gap", lowest.map(|w| (w - gap).norm()));
    }
    Ok(())
}

fn run_nhip(cfg: &RunConfig, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let (space, h) = hamiltonian(cfg)?;
    let icfg = cfg.integrator.to_config();
    let (t0, t1) = (icfg.t0, icfg.t1);
    let dt = cfg.integrator.dt;
    let nh = &cfg.nhip;
    let label = format!("{:?} map", nh.map).to_lowercase();

    let map: Box<dyn DysonMap> = match nh.map {
        MapKind::Shift => Box::new(ShiftFamily::coherent_and_spin(
            space,
            Profile::linear(nh.alpha_slope),
            Profile::oscillating(nh.beta_amp, nh.beta_freq),
        )?),
        MapKind::Nccm => {
            let configs = ConfigSet::new(space, cfg.method.sub_n)?;
            let state0 = initial_state(cfg, &configs, &h)?;
            Box::new(nhip::NccmMap::from_trajectory(&configs, &h, &state0, t0, t1, nh.node_dt)?)
        }
        MapKind::Constant => {
            let configs = ConfigSet::new(space, cfg.method.sub_n)?;
            let state0 = initial_state(cfg, &configs, &h)?;
            Box::new(nhip::ConstantMap { omega: configs.assemble_s(&state0.s).exp_nilpotent()? })
        }
        MapKind::Unitary => Box::new(nhip::UnitaryMap::new(&h)?),
    };
    let t1 = match nh.map {
        // the interpolated map ends on the last RK4 node
        MapKind::Nccm => t1.min(t0 + ((t1 - t0) / nh.node_dt).round() * nh.node_dt),
        _ => t1,
    };

    let bundle = ThreeSpaceBundle::new(&h, map.as_ref(), DerivativeRule::Analytic)?;
    let ops = ElementaryOps::new(space)?;
    let psi = space.basis_vector(space.reference_index());
    let traj_cfg = crate::dynamics::IntegratorConfig { t1, ..icfg };
    let traj = nhip::evolve_three_space(&bundle, &psi, &traj_cfg)?;
    let mut header: Vec<String> = vec!["t".into()];
    for name in ["hidden_norm", "sz_initial", "sz_nhip"] {
        header.extend(complex_header(name));
    }
    header.push("ket_map_defect".into());
    let mut table = Table::create(&dir.join("nhip.csv"), &header)?;
    for (n, &t) in traj.times.iter().enumerate() {
        let frame = bundle.frame(t)?;
        let (init, ket, kk) = (&traj.initial[n], &traj.kets[n], &traj.ketkets[n]);
        let dressed = &(&frame.omega_inv * &ops.sigma_z) * &frame.omega;
        let mut row = vec![fmt_f64(t)];
        row.extend(complex_cells(kk.dotc(ket)));
        row.extend(complex_cells(init.dotc(&ops.sigma_z.apply(init))));
        row.extend(complex_cells(kk.dotc(&dressed.apply(ket))));
        row.push(fmt_f64((init - frame.omega.apply(ket)).norm()));
        table.row(&row)?;
    }
    manifest.outputs.push("nhip.csv".into());

    let cert = verify::certify_map(&h, map.as_ref(), t0, t1, dt)?;
    let mut report = verify::Report::default();
    verify::push_certificate(&mut report, &label, &cert);
    manifest.checks.extend(report.checks);
    let mid = 0.5 * (t0 + t1);
    match nh.map {
        MapKind::Constant => {
            let f = bundle.frame(mid)?;
            let d = (&f.generator - &f.hamiltonian).max_abs();
            manifest.checks.push(check("nhip", "constant map gives G = H", d, 1e-10));
        }
        MapKind::Unitary => {
            let d = bundle.generator(mid)?.max_abs();
            manifest.checks.push(check("nhip", "Heisenberg map gives G = 0", d, 1e-10));
        }
        _ => {}
    }
    manifest.note("xi_non_hermiticity", cert.xi_non_hermiticity);
    Ok(())
}

fn run_verify(suites: &[Suite], seed: u64, dir: Option<&Path>, manifest: &mut Manifest) -> Result<()> {
    let suites = if suites.is_empty() { Suite::ALL.to_vec() } else { suites.to_vec() };
    let report = verify::run(&suites, seed)?;
    if let Some(dir) = dir {
        let file = std::fs::File::create(dir.join("verify.json"))?;
        serde_json::to_writer_pretty(file, &report)?;
        manifest.outputs.push("verify.json".into());
    }
    manifest.checks = report.checks;
    Ok(())
}
