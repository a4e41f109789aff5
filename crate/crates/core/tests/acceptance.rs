//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints one `criterion N: PASS|FAIL` line with its measured
//! quantities; the process exits nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tdccm::dynamics::{self, IntegratorConfig, NewtonOptions};
use tdccm::hilbert::{expect, HermitianSpectrum};
use tdccm::nhip::{self, DerivativeRule, Profile, ShiftFamily, ThreeSpaceBundle};
use tdccm::nccm::ClusterKind;
use tdccm::verify;
use tdccm::{eccm, ed_evolve, ed_ground, rabi_hamiltonian, ConfigSet, ElementaryOps, RabiParams, SpaceSpec, C64};

type Outcome = (bool, String);

fn within(start: Instant, limit: Duration) -> (bool, f64) {
    let el = start.elapsed();
    (el <= limit, el.as_secs_f64())
}

fn criterion_01_zero_coupling_is_exact() -> Outcome {
    let start = Instant::now();
    let space = SpaceSpec::new(30, true).unwrap();
    let stat = dynamics::solve_stationary(&RabiParams::resonant(0.0), space, 1, None, &NewtonOptions::default()).unwrap();
    let e_err = (stat.energy - C64::new(-0.5, 0.0)).norm();

    let configs = ConfigSet::new(space, 1).unwrap();
    let h = rabi_hamiltonian(&RabiParams::resonant(0.0), space).unwrap();
    let traj = dynamics::integrate(&configs, &h, &configs.zero_state(), &IntegratorConfig::rk4(1e-2, 0.0, 10.0)).unwrap();
    let mut drift: f64 = 0.0;
    for st in &traj {
        let rec = dynamics::observables(&configs, &h, st).unwrap();
        drift = drift.max((rec.sigma_z + 1.0).norm()).max(rec.n_photon.norm()).max((rec.energy + 0.5).norm());
        drift = drift.max(st.s.iter().chain(&st.s_tilde).map(|x| x.norm()).fold(0.0, f64::max));
    }
    let (fast, secs) = within(start, Duration::from_secs(1));
    let ok = stat.converged && e_err < 1e-12 && stat.residual_norm < 1e-12 && drift < 1e-12 && fast;
    (ok, format!("|E + 1/2| = {e_err:.1e}, residual = {:.1e}, TD drift = {drift:.1e}, {secs:.2} s", stat.residual_norm))
}

fn criterion_02_statics_converge_to_ed() -> Outcome {
    let start = Instant::now();
    let space = SpaceSpec::new(30, true).unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for g in [0.1, 0.2, 0.3] {
        let params = RabiParams::resonant(g);
        let e_ed = ed_ground(&rabi_hamiltonian(&params, space).unwrap()).unwrap().energy;
        let errors: Vec<f64> = [2, 4, 6, 8]
            .iter()
            .map(|&n| {
                let stat = dynamics::solve_stationary(&params, space, n, None, &NewtonOptions::default()).unwrap();
                if stat.converged { (stat.energy - e_ed).norm() } else { f64::INFINITY }
            })
            .collect();
        // errors that already sit at round-off cannot decrease further
        let decreasing = errors.windows(2).all(|w| w[1] < w[0] || w[1] < 1e-12);
        ok &= decreasing && errors[3] < 1e-6;
        detail += &format!("g={g}: {:?}; ", errors.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>());
    }
    let (fast, secs) = within(start, Duration::from_secs(30));
    (ok && fast, format!("{detail}{secs:.1} s"))
}

fn criterion_03_breakdown_window() -> Outcome {
    let start = Instant::now();
    let space = SpaceSpec::new(30, true).unwrap();
    let grid = dynamics::g_grid(0.8, 0.005);
    let mut ok = true;
    let mut detail = String::new();
    for level in [4, 6] {
        let sweep = dynamics::continuation_sweep(&RabiParams::resonant(0.0), space, level, &grid, &NewtonOptions::default()).unwrap();
        let g = sweep.first_breakdown_g;
        ok &= g.is_some_and(|g| (0.60..=0.70).contains(&g));
        detail += &format!("SUB-{level} first breakdown {g:?}; ");
    }
    let (fast, secs) = within(start, Duration::from_secs(120));
    (ok && fast, format!("{detail}{secs:.1} s"))
}

fn criterion_04_full_truncation_matches_ed_dynamics() -> Outcome {
    let start = Instant::now();
    let space = SpaceSpec::new(12, true).unwrap();
    let configs = ConfigSet::new(space, 12).unwrap();
    let h = rabi_hamiltonian(&RabiParams::resonant(0.3), space).unwrap();
    let ops = ElementaryOps::new(space).unwrap();
    let cfg = IntegratorConfig::rk4(1e-3, 0.0, 10.0).with_output_interval(0.05);
    let traj = dynamics::integrate(&configs, &h, &configs.zero_state(), &cfg).unwrap();
    let times: Vec<f64> = traj.iter().map(|s| s.t).collect();
    let exact = ed_evolve(&h, &space.basis_vector(space.reference_index()), &times).unwrap();

    let (mut dz, mut dn, mut drift) = (0.0_f64, 0.0_f64, 0.0_f64);
    let e0 = dynamics::observables(&configs, &h, &traj[0]).unwrap().energy;
    for (st, psi) in traj.iter().zip(&exact) {
        let rec = dynamics::observables(&configs, &h, st).unwrap();
        dz = dz.max((rec.sigma_z - expect(&ops.sigma_z, psi)).norm());
        dn = dn.max((rec.n_photon - expect(&ops.number, psi)).norm());
        drift = drift.max((rec.energy - e0).norm());
    }
    let (fast, secs) = within(start, Duration::from_secs(60));
    let ok = dz < 1e-7 && dn < 1e-7 && drift < 1e-8 && fast && traj.len() == 201;
    (ok, format!("max dev σz = {dz:.1e}, n = {dn:.1e}, energy drift = {drift:.1e}, {secs:.1} s"))
}

fn max_im_sigma_z(level: usize) -> f64 {
    let space = SpaceSpec::new(20, true).unwrap();
    let configs = ConfigSet::new(space, level).unwrap();
    let h = rabi_hamiltonian(&RabiParams::resonant(0.1), space).unwrap();
    let mut worst: f64 = 0.0;
    dynamics::integrate_with(&configs, &h, &configs.zero_state(), &IntegratorConfig::rk4(1e-3, 0.0, 10.0), |st| {
        worst = worst.max(dynamics::sigma_z_closed_form(&configs, st).im.abs());
        Ok(())
    })
    .unwrap();
    worst
}

fn criterion_05_truncation_diagnostic_decreases() -> Outcome {
    let (sub4, sub6) = (max_im_sigma_z(4), max_im_sigma_z(6));
    let ok = sub6 < sub4 && sub4 < 1e-3 && sub6 < 1e-3;
    (ok, format!("max|Im σz|: SUB-4 = {sub4:.2e}, SUB-6 = {sub6:.2e}"))
}

fn criterion_06_bivariational_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grad = verify::gradient_fd_error(&mut rng, 100).unwrap();
    let comm = verify::commutator_map_error(&mut rng, 20).unwrap();
    let canon = verify::canonical_relation_error(30);
    let ok = grad < 1e-5 && comm < 1e-9 && canon < 1e-12;
    (ok, format!("gradient rel. err = {grad:.1e}, commutator map = {comm:.1e}, canonical = {canon:.1e}"))
}

fn criterion_07_eccm_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let space = SpaceSpec::new(6, true).unwrap();
    let mut round: f64 = 0.0;
    for level in [2, 3, 6] {
        let c = ConfigSet::new(space, level).unwrap();
        for _ in 0..10 {
            let st = c.random_state(&mut rng, 0.8);
            let back = eccm::sigma_to_s(&c, &eccm::s_to_sigma(&c, &st).unwrap()).unwrap();
            for (a, b) in back.s.iter().zip(&st.s).chain(back.s_tilde.iter().zip(&st.s_tilde)) {
                round = round.max((a - b).norm());
            }
        }
    }

    let full = ConfigSet::new(space, space.n_b()).unwrap();
    let h = rabi_hamiltonian(&RabiParams::resonant(0.3), space).unwrap();
    let ops = ElementaryOps::new(space).unwrap();
    let mut equal: f64 = 0.0;
    for _ in 0..10 {
        let st = full.random_state(&mut rng, 0.6);
        let e = eccm::s_to_sigma(&full, &st).unwrap();
        for q in [&h, &ops.sigma_z, &ops.number] {
            equal = equal.max((eccm::eccm_expectation(&full, q, &e).unwrap() - full.expectation(q, &st).unwrap()).norm());
        }
    }
    let small = SpaceSpec::new(4, true).unwrap();
    let small_full = ConfigSet::new(small, small.n_b()).unwrap();
    let traj = verify::trajectory_agreement(&small_full, &rabi_hamiltonian(&RabiParams::resonant(0.3), small).unwrap(), 2.0).unwrap();
    let ok = round < 1e-10 && equal < 1e-10 && traj < 1e-6;
    (ok, format!("round trip = {round:.1e}, expectation equality = {equal:.1e}, trajectories = {traj:.1e}"))
}

fn criterion_08_excitation_spectrum() -> Outcome {
    let space = SpaceSpec::new(30, true).unwrap();
    let params = RabiParams::resonant(0.2);
    let h = rabi_hamiltonian(&params, space).unwrap();
    let configs = ConfigSet::new(space, 8).unwrap();
    let stat = dynamics::solve_stationary_with(&configs, &h, 0.2, None, &NewtonOptions::default()).unwrap();
    let w = dynamics::excitation_spectrum(&configs, &h, &stat, 1e-6).unwrap();
    let lowest = dynamics::lowest_positive(&w, 1e-6).expect("a positive frequency");
    let ed = HermitianSpectrum::new(&h).unwrap().values;
    let err = (lowest - (ed[1] - ed[0])).norm();
    let symmetry = w.iter().map(|a| w.iter().map(|b| (a + b).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    (err < 1e-5 && symmetry < 1e-8, format!("|ω₁ − (E₁ − E₀)| = {err:.1e}, negation symmetry = {symmetry:.1e}"))
}

fn criterion_09_nhip_certification() -> Outcome {
    let start = Instant::now();
    let space = SpaceSpec::new(6, true).unwrap();
    let h = rabi_hamiltonian(&RabiParams::resonant(0.3), space).unwrap();
    let analytic = ShiftFamily::coherent_and_spin(space, Profile::linear(0.1), Profile::oscillating(0.2, 1.0)).unwrap();
    let full = ConfigSet::new(space, space.n_b()).unwrap();
    let cluster = nhip::NccmMap::from_trajectory(&full, &h, &full.zero_state(), 0.0, 2.2, 1e-2).unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for (label, cert) in [
        ("analytic", verify::certify_map(&h, &analytic, 0.0, 2.0, 1e-3).unwrap()),
        ("NCCM", verify::certify_map(&h, &cluster, 0.1, 2.1, 1e-3).unwrap()),
    ] {
        ok &= cert.z_invariant < 1e-8
            && cert.hidden_norm_drift < 1e-9
            && cert.expectation_mismatch < 1e-8
            && cert.dressing_defect < 1e-7
            && cert.theta_stationarity < 1e-7;
        detail += &format!(
            "{label}: Z {:.1e}, <<ψ|ψ> {:.1e}, expectation {:.1e}, dressed {:.1e}, θ {:.1e}; ",
            cert.z_invariant, cert.hidden_norm_drift, cert.expectation_mismatch, cert.dressing_defect, cert.theta_stationarity
        );
    }

    let sub = ConfigSet::new(space, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let st = sub.random_state(&mut rng, 0.5);
    let s_op = sub.assemble(&st.s, ClusterKind::Ket).unwrap();
    let constant = nhip::ConstantMap { omega: s_op.exp_nilpotent().unwrap() };
    let f = ThreeSpaceBundle::new(&h, &constant, DerivativeRule::Analytic).unwrap().frame(0.7).unwrap();
    let g_equals_h = (&f.generator - &f.hamiltonian).max_abs();
    let unitary = nhip::UnitaryMap::new(&h).unwrap();
    let g_zero = ThreeSpaceBundle::new(&h, &unitary, DerivativeRule::Analytic).unwrap().generator(0.7).unwrap().max_abs();
    ok &= g_equals_h < 1e-10 && g_zero < 1e-10;

    let (fast, secs) = within(start, Duration::from_secs(60));
    (ok && fast, format!("{detail}constant G − H = {g_equals_h:.1e}, unitary G = {g_zero:.1e}, {secs:.1} s"))
}

fn criterion_10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "model.g = 0.2\nspace.n_b = 8\nmethod.sub_n = 4\nsweep.levels = [2, 4]\nintegrator.t1 = 2.0\nintegrator.output_interval = 0.1\n",
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_tdccm");
    let run = |out: &str, extra: &[&str]| {
        let status = Command::new(bin)
            .args(["evolve", "--config", config.to_str().unwrap(), "--seed", "5", "--out"])
            .arg(dir.path().join(out))
            .args(extra)
            .status()
            .unwrap();
        assert!(status.success());
    };
    run("a", &[]);
    run("b", &["--sweep-parallel", "2"]);
    let mut identical = true;
    for f in ["evolve_sub2.csv", "evolve_sub4.csv"] {
        identical &= std::fs::read(dir.path().join("a").join(f)).unwrap() == std::fs::read(dir.path().join("b").join(f)).unwrap();
    }
    let verify = Command::new(bin).args(["verify", "--suite", "all"]).output().unwrap();
    let code = verify.status.code();
    (identical && code == Some(0), format!("byte-identical CSV: {identical}, `verify --suite all` exit code {code:?}"))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_01_zero_coupling_is_exact),
        (2, criterion_02_statics_converge_to_ed),
        (3, criterion_03_breakdown_window),
        (4, criterion_04_full_truncation_matches_ed_dynamics),
        (5, criterion_05_truncation_diagnostic_decreases),
        (6, criterion_06_bivariational_structure),
        (7, criterion_07_eccm_consistency),
        (8, criterion_08_excitation_spectrum),
        (9, criterion_09_nhip_certification),
        (10, criterion_10_determinism),
    ];
    // `cargo test -- <filter>` runs the matching criteria only
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    for (n, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == &n.to_string()) {
            continue;
        }
        let (passed, detail) = run();
        println!("criterion {n}: {} {detail}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
