use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fas_semcom::experiments::{convergence_runs, output, run_trial, sweep_snr, ExperimentConfig, SchemeId};
use fas_semcom::oracle;
use fas_semcom::{Error, Execution, Result, SystemConfig};

#[derive(Parser)]
#[command(name = "fas-semcom", version, about = "Semantic FAS downlink optimization experiments")]
struct Cli {
    /// Experiment config file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write SVG figures.
    #[arg(long, global = true)]
    plots: bool,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run on the current thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs one scheme on one scenario and prints the record.
    Simulate {
        #[arg(long, default_value = "proposed")]
        scheme: SchemeId,
        #[arg(long, default_value_t = 15.0)]
        snr: f64,
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Rate versus SNR for every configured scheme.
    Sweep {
        /// Overrides `n_trials`.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Objective per outer iteration of the proposed scheme.
    Convergence {
        /// SNR values in dB.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 15.0])]
        snr: Vec<f64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Runs the independent reference checks.
    OracleCheck,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.system.rng_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn check_trials(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Config("n_trials must be at least 1".into()));
    }
    Ok(n)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    match &cli.command {
        Command::Simulate { scheme, snr, trial } => {
            let snr_index = cfg.snr_db_list.iter().position(|s| s == snr).unwrap_or(0);
            let (records, _) = run_trial(&[*scheme], snr_index, *snr, *trial, &cfg.system, &cfg.load_model)?;
            let r = &records[0];
            println!("scheme           {}", r.scheme);
            println!("snr_db           {}", r.snr_db);
            println!("trial            {}", r.trial);
            println!("rate             {}", r.rate);
            println!("rho              {}", r.rho);
            println!("trace_q          {}", r.trace_q);
            println!("ports            {}", r.ports);
            println!("outer_iterations {}", r.outer_iterations);
            if !r.converged {
                return Err(Error::CapReached(1));
            }
        }
        Command::Sweep { trials } => {
            let n = check_trials(trials.unwrap_or(cfg.n_trials))?;
            let res = sweep_snr(&cfg.snr_db_list, n, &cfg.schemes, &cfg.system, &cfg.load_model, exec)?;
            for p in output::emit_outputs(&res.records, &res.traces, &cfg.out_dir, cli.plots)? {
                println!("wrote {}", p.display());
            }
            let capped = res.records.iter().filter(|r| !r.converged).count();
            if capped > 0 {
                return Err(Error::CapReached(capped));
            }
        }
        Command::Convergence { snr, trials } => {
            let n = check_trials(trials.unwrap_or(cfg.n_trials))?;
            let res = convergence_runs(snr, n, &cfg.system, &cfg.load_model, exec)?;
            for p in output::emit_outputs(&res.records, &res.traces, &cfg.out_dir, cli.plots)? {
                println!("wrote {}", p.display());
            }
            let capped = res.records.iter().filter(|r| !r.converged).count();
            if capped > 0 {
                return Err(Error::CapReached(capped));
            }
        }
        Command::OracleCheck => {
            if !oracle_check(&cfg, exec)? {
                std::process::exit(1);
            }
        }
    }
    Ok(())
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn oracle_check(cfg: &ExperimentConfig, exec: Execution) -> Result<bool> {
    let seed = cfg.system.rng_seed;
    let model = &cfg.load_model;
    let mut all = true;

    let inner = oracle::inner_solver_oracle(20, 10_000, 1_000, seed, model)?;
    let ok = inner.max_value_gap <= 1e-4 && inner.max_psd_excess <= 1e-9;
    all &= ok;
    println!(
        "{} inner solver: {} instances, max gap {:.3e}, max PSD excess {:.3e}",
        verdict(ok),
        inner.instances,
        inner.max_value_gap,
        inner.max_psd_excess
    );

    let single = SystemConfig { m_active: 1, ..cfg.system.clone() };
    let p1 = oracle::port_oracle(&single, model, 100, seed)?;
    let ok = p1.matches == p1.seeds && p1.exceeded == 0;
    all &= ok;
    println!("{} ports m_a=1: {}/{} match exhaustive", verdict(ok), p1.matches, p1.seeds);

    let small = SystemConfig { n_tx: 4, m_ports: 8, m_active: 2, ..cfg.system.clone() };
    let p2 = oracle::port_oracle(&small, model, 100, seed)?;
    let ok = p2.matches >= 90 && p2.exceeded == 0;
    all &= ok;
    println!(
        "{} ports M=8 m_a=2: {}/{} match exhaustive, {} exceed",
        verdict(ok),
        p2.matches,
        p2.seeds,
        p2.exceeded
    );

    let e = oracle::expectation_identity(&cfg.system, 10_000, seed)?;
    let ok = e.max_diag_rel_err <= 0.05 && e.max_offdiag_ratio <= 0.05;
    all &= ok;
    println!(
        "{} expectation identity: diag err {:.3e}, off-diag ratio {:.3e}",
        verdict(ok),
        e.max_diag_rel_err,
        e.max_offdiag_ratio
    );

    let cases = oracle::jensen_check(&cfg.system, model, 50, exec)?;
    let held = cases.iter().filter(|c| c.holds()).count();
    let ok = held == cases.len();
    all &= ok;
    println!("{} rate bound: {}/{} scenarios", verdict(ok), held, cases.len());
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
