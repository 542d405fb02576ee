//! `focusing-lab`: command-line driver for the experiments.
//!
//! Exit codes: 0 on success, 2 when a checked property fails, 3 on a
//! configuration error, 1 on any other failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde_json::json;

use focusing_core::dynamics::{evolve_nbody, nls_evolve, soliton_profile, uniform_times, NLSField, NlsConfig};
use focusing_core::harness::{
    build_initial_data, run_convergence_sweep, save_snapshot, trapped_ground_state, write_jsonl, write_sweep,
    ExperimentConfig,
};
use focusing_core::hierarchy::{delta_rate_study, Mollifier};
use focusing_core::marginals::DensityMatrix;
use focusing_core::operators::{check_inequality, verify_energy_estimate, EnergyEstimateConfig, HamiltonianSpec, Inequality};
use focusing_core::spectral::{FourierGrid1D, SingleParticleBasis};
use focusing_core::{Complex64, Error};

#[derive(Parser)]
#[command(name = "focusing-lab", version, about = "Focusing many-body dynamics under strong confinement")]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `outputs.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed; overrides the configured one.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the initial state of one sweep cell and save the final state.
    Evolve {
        #[arg(long, default_value_t = 0)]
        cell: usize,
    },
    /// Propagate the unit-mass soliton and report its errors.
    Nls(NlsArgs),
    /// Imaginary-time ground state of the trapped repulsive Hamiltonian.
    Groundstate,
    /// Convergence sweep over the configured (N, ω) cells.
    Sweep,
    /// Inequality audits and the energy estimate for every cell.
    Verify,
    /// Mollifier-to-delta rate study.
    Rates(RatesArgs),
}

#[derive(Args)]
struct NlsArgs {
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value_t = 4.0)]
    coupling: f64,
    #[arg(long, default_value_t = 1.0)]
    t_final: f64,
    #[arg(long, default_value_t = 256)]
    points: usize,
    #[arg(long, default_value_t = 32.0)]
    box_length: f64,
    #[arg(long, default_value_t = 5e-4)]
    dt: f64,
}

#[derive(Args)]
struct RatesArgs {
    #[arg(long, default_value_t = 0.4)]
    kappa: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.4, 0.2, 0.1, 0.05])]
    alphas: Vec<f64>,
    /// Longitudinal width of the Gaussian test state.
    #[arg(long, default_value_t = 1.3)]
    width: f64,
}

enum Failure {
    Config(String),
    Check(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::OutOfWindow { .. } | Error::TooLarge(_) => Failure::Config(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("this subcommand needs --config".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.outputs.dir = out.clone();
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn check(ok: bool, what: &str) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Failure::Check(what.to_string()))
    }
}

fn evolve(cli: &Cli, cell_index: usize) -> Outcome {
    let cfg = load_config(cli)?;
    let cells = cfg.cells()?;
    let cell = cells
        .get(cell_index)
        .ok_or_else(|| Failure::Config(format!("cell {cell_index} out of range ({} cells)", cells.len())))?;
    let init = build_initial_data(&cfg, cell)?;
    let h = HamiltonianSpec::new(cell.n, cell.omega, cfg.potential_spec()?, init.state.basis().clone(), 1.0)?;
    let dt = cfg.time.dt.unwrap_or_else(|| focusing_core::dynamics::default_dt(cell.omega));
    let traj = evolve_nbody(&h, &init.state, cfg.time.t_final, dt, cfg.time.samples)?;
    let dir = &cfg.outputs.dir;
    let lines = traj.times.iter().zip(&traj.energy).zip(&traj.norm_drift).map(|((t, e), d)| {
        json!({ "kind": "evolve", "cell": cell.index, "n": cell.n, "omega": cell.omega, "t": t,
                "energy_moment": e, "norm_drift": d, "config_hash": cfg.hash().unwrap_or_default() })
    });
    write_jsonl(&dir.join("results.jsonl"), lines)?;
    let last = traj.samples.last().expect("at least one sample");
    save_snapshot(last, &dir.join("snapshots").join(format!("cell{}_N{}.bin", cell.index, cell.n)))?;
    println!(
        "N = {}, ω = {:.4}: energy drift {:.3e}, norm drift {:.3e}",
        cell.n,
        cell.omega,
        traj.relative_energy_drift(),
        traj.max_norm_drift()
    );
    Ok(())
}

fn nls(cli: &Cli, a: &NlsArgs) -> Outcome {
    let grid = FourierGrid1D::new(a.box_length, a.points)?;
    let phi0 = NLSField::soliton(grid.clone(), a.eta, a.coupling, 0.0)?;
    let cfg = NlsConfig {
        dt: a.dt,
        mass_tolerance: f64::INFINITY,
        ..NlsConfig::default()
    };
    let traj = nls_evolve(&phi0, &uniform_times(a.t_final, 10), &cfg)?;
    let last = traj.samples.last().expect("at least one sample");
    let exact = NLSField::new(grid.clone(), soliton_profile(&grid, a.eta, a.coupling, 0.0, a.t_final), a.coupling)?;
    let l2 = last.distance(&exact)?;
    let mass_drift = traj.norm_drift.last().copied().unwrap_or(0.0);
    let energy_drift = traj.relative_energy_drift();
    write_jsonl(
        &out_dir(cli).join("results.jsonl"),
        [json!({ "kind": "nls", "eta": a.eta, "coupling": a.coupling, "t": a.t_final,
                 "l2_error": l2, "mass_drift": mass_drift, "energy_drift": energy_drift })],
    )?;
    println!("soliton L2 error {l2:.3e}, mass drift {mass_drift:.3e}, energy drift {energy_drift:.3e}");
    Ok(())
}

fn groundstate(cli: &Cli) -> Outcome {
    let cfg = load_config(cli)?;
    let setup = cfg
        .initial
        .ground
        .ok_or_else(|| Failure::Config("groundstate needs [initial.ground]".into()))?;
    let basis = Arc::new(cfg.basis()?);
    let dir = &cfg.outputs.dir;
    let mut lines = Vec::new();
    for &n in &cfg.scaling.n {
        let g = trapped_ground_state(basis.clone(), n, cfg.scaling.beta, &setup)?;
        println!(
            "N = {n}: E = {:.10}, structure gap {:.3e} after {} iterations",
            g.energy, g.structure_gap, g.iterations
        );
        save_snapshot(&g.state, &dir.join("snapshots").join(format!("ground_N{n}.bin")))?;
        lines.push(json!({ "kind": "groundstate", "n": n, "omega0x": setup.omega0x, "energy": g.energy,
                           "structure_gap": g.structure_gap, "iterations": g.iterations }));
    }
    write_jsonl(&dir.join("results.jsonl"), lines)?;
    Ok(())
}

fn sweep(cli: &Cli) -> Outcome {
    let cfg = load_config(cli)?;
    let result = run_convergence_sweep(&cfg)?;
    let files = write_sweep(&result, &cfg.outputs.dir, cfg.outputs.snapshots)?;
    println!("{:>3} {:>10} {:>12} {:>9}", "N", "omega", "sup gap", "window");
    for c in &result.cells {
        match (&c.error, c.sup_gap) {
            (Some(e), _) => println!("{:>3} {:>10.4} failed: {e}", c.cell.n, c.cell.omega),
            (None, Some(g)) => println!(
                "{:>3} {:>10.4} {:>12.4e} {:>9}",
                c.cell.n,
                c.cell.omega,
                g,
                if c.cell.in_window { "in" } else { "control" }
            ),
            (None, None) => {}
        }
    }
    println!("wrote {} and {}", files.results.display(), files.gaps.display());
    check(result.cells.iter().all(|c| c.error.is_none()), "a sweep cell failed")?;
    if cfg.potential_spec()?.is_zero() {
        check(result.trend().iter().all(|t| t.2 < 1e-8), "free control gap exceeds 1e-8")
    } else if result.cells.iter().filter(|c| c.cell.in_window).count() >= 2 {
        check(result.gap_decreases(), "sup gap does not decrease along the in-window cells")
    } else {
        Ok(())
    }
}

fn verify(cli: &Cli) -> Outcome {
    let cfg = load_config(cli)?;
    let basis = Arc::new(cfg.basis()?);
    let mut lines = Vec::new();
    let mut ok = true;
    for cell in cfg.cells()? {
        let h = HamiltonianSpec::new(cell.n, cell.omega, cfg.potential_spec()?, basis.clone(), 1.0)?;
        for which in Inequality::all() {
            let r = check_inequality(which, &h)?;
            ok &= r.margin >= -1e-8;
            println!("{:>14} N = {} ω = {:.4}: margin {:.3e}", r.name, r.n, r.omega, r.margin);
            lines.push(json!({ "kind": "inequality", "report": r }));
        }
        for k in 1..=2.min(cell.n) {
            let ecfg = EnergyEstimateConfig {
                k,
                seed: cfg.seed,
                c1: cfg.scaling.c1,
                c2: cfg.scaling.c2,
                enforce_window: cell.in_window,
                ..EnergyEstimateConfig::default()
            };
            let r = verify_energy_estimate(&h, &ecfg)?;
            ok &= r.worst_margin >= -1e-8;
            println!(
                "energy k = {k} N = {} ω = {:.4}: worst margin {:.3e}, calibrated C3 {:.3e}",
                r.n, r.omega, r.worst_margin, r.calibrated_c3
            );
            lines.push(json!({ "kind": "energy-estimate", "report": r }));
        }
    }
    write_jsonl(&cfg.outputs.dir.join("results.jsonl"), lines)?;
    check(ok, "an audited inequality has a negative margin")
}

fn rates(cli: &Cli, a: &RatesArgs) -> Outcome {
    let basis = Arc::new(SingleParticleBasis::new(2, 8, 64, 32.0)?);
    let grid = basis.z_grid();
    let w = a.width;
    let values: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|z| Complex64::new((std::f64::consts::PI * w * w).powf(-0.25) * (-z * z / (2.0 * w * w)).exp(), 0.0))
        .collect();
    let single = basis.embed_ground(&grid.forward(&values)?)?;
    let pair: Vec<Complex64> = single.iter().flat_map(|x| single.iter().map(move |y| x * y)).collect();
    let gamma = DensityMatrix::pure(basis.clone(), 2, &pair)?;
    let col = DMatrix::from_column_slice(single.len(), 1, &single);
    let test_op = &col * col.adjoint();
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, f) in [("gaussian", Mollifier::gaussian()), ("sign-changing", Mollifier::sign_changing())] {
        let r = delta_rate_study(&f, &gamma, 0, &test_op, a.kappa, &a.alphas)?;
        ok &= r.passes;
        println!("{name:>14}: slope {:.3} ± {:.3} (κ = {})", r.slope, r.slope_width, r.kappa);
        lines.push(json!({ "kind": "rates", "mollifier": name, "report": r }));
    }
    write_jsonl(&out_dir(cli).join("results.jsonl"), lines)?;
    check(ok, "fitted slope below κ")
}

fn run(cli: &Cli) -> Outcome {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Failure::Other(e.to_string()))?;
    }
    match &cli.command {
        Command::Evolve { cell } => evolve(cli, *cell),
        Command::Nls(a) => nls(cli, a),
        Command::Groundstate => groundstate(cli),
        Command::Sweep => sweep(cli),
        Command::Verify => verify(cli),
        Command::Rates(a) => rates(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

