//! `upc` — energy-efficient CDMA power control from the command line.
//!
//! Subcommands expose the solver layer (`efficiency`, `target-sir`,
//! `sif-check`) and the seeded experiment drivers (`upc`, `table1`, `cdf`,
//! `sir-ber`). Experiments read a TOML config file (see the shipped
//! `presets/*.cfg`), with `--seed`/`--out-dir` overriding the file.
//!
//! Exit codes: 0 success, 2 argument/config errors, 3 solver failures
//! (no convergence, infeasible, load too high), 4 I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use upc_core::experiments::{
    prepare_output_dir, run_cdf, run_fig1, run_sir_ber_series, run_table1, ExperimentConfig,
};
use upc_core::{
    dec_efficiency, io_efficiency, mf_efficiency, mmse_efficiency, sif_property_harness,
    EfficiencyFunction, Error, FixedPointSettings, Receiver, SnrProfile,
};

#[derive(Parser)]
#[command(
    name = "upc",
    version,
    about = "Energy-efficient power control for randomly spread CDMA systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the large-system multiuser efficiency for a receiver.
    Efficiency(EfficiencyArgs),
    /// Solve the Nash-equilibrium target SIR for f(γ) = (1 − e^{-γ})^M.
    TargetSir(TargetSirArgs),
    /// Run the unified power-control iteration and export power traces.
    Upc(ExperimentArgs),
    /// Monte Carlo P_Δ table against beta/Gaussian theory columns.
    Table1(ExperimentArgs),
    /// Empirical SIR CDFs against the theoretical models.
    Cdf(ExperimentArgs),
    /// Per-symbol SIR/BER series: fixed UPC powers vs per-draw balancing.
    SirBer(ExperimentArgs),
    /// Probe the standard-interference-function properties.
    SifCheck(SifCheckArgs),
}

#[derive(Args)]
struct EfficiencyArgs {
    /// Receiver: mf | dec | mmse | io | ml.
    #[arg(long, value_parser = parse_receiver)]
    receiver: Receiver,
    /// Load α = K/N.
    #[arg(long)]
    alpha: f64,
    /// Per-user SNRs: `equal:<value>` or a CSV file path (one SNR per line).
    /// Not needed for the decorrelator.
    #[arg(long)]
    snr: Option<String>,
    /// Gauss–Hermite node count for the io/ml fixed point.
    #[arg(long, default_value_t = 64)]
    quadrature_nodes: usize,
}

#[derive(Args)]
struct TargetSirArgs {
    /// Total packet size M in bits.
    #[arg(long)]
    packet_bits: u32,
    /// Bisection tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML config file (see presets/*.cfg).
    #[arg(long)]
    config: PathBuf,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override; used exactly as given (no timestamp
    /// subdirectory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker thread count (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SifCheckArgs {
    /// Receiver: mf | dec | mmse.
    #[arg(long, value_parser = parse_receiver)]
    receiver: Receiver,
    /// Randomized profiles per property.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Seed for the profile sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_receiver(s: &str) -> Result<Receiver, String> {
    match s {
        "mf" => Ok(Receiver::MatchedFilter),
        "dec" => Ok(Receiver::Decorrelator),
        "mmse" => Ok(Receiver::Mmse),
        "io" => Ok(Receiver::IndividuallyOptimal),
        "ml" => Ok(Receiver::JointlyOptimalMl),
        other => Err(format!("unknown receiver '{other}' (mf|dec|mmse|io|ml)")),
    }
}

/// Exit-code classification: 2 = bad input, 3 = solver, 4 = I/O.
fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 4,
        Error::NoConvergence { .. }
        | Error::LoadTooHigh { .. }
        | Error::Infeasible { .. }
        | Error::DegenerateEfficiencyFunction { .. }
        | Error::BaselineNoConvergence { .. }
        | Error::SingularGram { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_for(&err))
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Efficiency(args) => cmd_efficiency(args),
        Command::TargetSir(args) => cmd_target_sir(args),
        Command::Upc(args) => cmd_upc(args),
        Command::Table1(args) => cmd_table1(args),
        Command::Cdf(args) => cmd_cdf(args),
        Command::SirBer(args) => cmd_sir_ber(args),
        Command::SifCheck(args) => cmd_sif_check(args),
    }
}

/// Parse `equal:<value>` or a one-column CSV of per-user SNRs.
fn parse_snr_spec(spec: &str, alpha: f64) -> Result<SnrProfile, Error> {
    if let Some(value) = spec.strip_prefix("equal:") {
        let gamma: f64 = value
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad SNR value '{value}'")))?;
        return SnrProfile::point_mass(gamma, alpha, 1);
    }
    let text = std::fs::read_to_string(spec)?;
    let mut snrs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => snrs.push(v),
            // A single non-numeric header line is tolerated.
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::InvalidInput(format!(
                    "line {} of '{spec}' is not a number: '{line}'",
                    i + 1
                )))
            }
        }
    }
    SnrProfile::new(snrs, alpha)
}

fn cmd_efficiency(args: EfficiencyArgs) -> Result<(), Error> {
    // Tighter than the library default so all ten printed decimals are
    // converged digits.
    let settings = FixedPointSettings::new(1e-13, 50_000, args.quadrature_nodes)?;
    let eta = match args.receiver {
        Receiver::Decorrelator => dec_efficiency(args.alpha)?,
        rx => {
            let spec = args.snr.ok_or_else(|| {
                Error::InvalidInput("--snr is required for this receiver".into())
            })?;
            let profile = parse_snr_spec(&spec, args.alpha)?;
            match rx {
                Receiver::MatchedFilter => mf_efficiency(&profile),
                Receiver::Mmse => mmse_efficiency(&profile, &settings)?,
                Receiver::IndividuallyOptimal | Receiver::JointlyOptimalMl => {
                    io_efficiency(&profile, &settings)?
                }
                Receiver::Decorrelator => unreachable!(),
            }
        }
    };
    println!("{:.10}", eta.value());
    Ok(())
}

fn cmd_target_sir(args: TargetSirArgs) -> Result<(), Error> {
    let f = EfficiencyFunction::new(args.packet_bits, args.packet_bits, 100_000)?;
    let target = f.target_sir(args.tol)?;
    println!(
        "gamma_star = {:.6} ({:.3} dB)",
        target.value(),
        target.as_db()
    );
    Ok(())
}

/// Load the config file, apply CLI overrides, and resolve the output
/// directory (exact when --out-dir is given, timestamped otherwise).
fn load_config(args: &ExperimentArgs, experiment: &str) -> Result<(ExperimentConfig, PathBuf), Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut config: ExperimentConfig = toml::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", args.config.display())))?;
    config.validate()?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(workers) = args.workers {
        if let Err(e) = upc_core::par::configure_workers(workers) {
            log::warn!("worker pool already configured: {e}");
        }
    }
    let dir = match (&args.out_dir, &config.output_dir) {
        (Some(exact), _) => prepare_output_dir(exact, experiment, true)?,
        (None, Some(base)) => prepare_output_dir(base, experiment, false)?,
        (None, None) => prepare_output_dir(Path::new("results"), experiment, false)?,
    };
    Ok((config, dir))
}

fn cmd_upc(args: ExperimentArgs) -> Result<(), Error> {
    let (config, dir) = load_config(&args, "fig1")?;
    let result = run_fig1(&config)?;
    println!("gamma_star = {:.6}", result.gamma_star);
    for trace in &result.traces {
        let state = &trace.run.state;
        println!(
            "{:>4}: converged in {} iterations, eta = {:.6}",
            trace.receiver.label(),
            state.n,
            state.eta_trace.last().copied().unwrap_or(f64::NAN)
        );
        for (k, p) in state.powers.iter().enumerate() {
            println!("      user {k}: p = {p:.6e} W");
        }
    }
    for (rx, gap) in &result.gap_vs_ml {
        println!("max relative power gap {rx} vs ml: {:.4}", gap);
    }
    result.persist(&dir, &config)?;
    println!("results written to {}", dir.display());
    Ok(())
}

fn cmd_table1(args: ExperimentArgs) -> Result<(), Error> {
    let (config, dir) = load_config(&args, "table1")?;
    let result = run_table1(&config)?;
    println!(
        "P_delta within {} dB of gamma_star = {:.4} ({} realizations per cell)",
        result.delta_db, result.gamma_star, config.realizations
    );
    println!("{:>5} {:>6} {:>5} {:>8} {:>8} {:>8}", "n", "alpha", "rx", "sim", "beta", "norm");
    for row in &result.rows {
        let beta = row
            .p_beta
            .map(|v| format!("{v:8.4}"))
            .unwrap_or_else(|| "       -".into());
        println!(
            "{:>5} {:>6} {:>5} {:>8.4} {beta} {:>8.4}",
            row.n,
            row.alpha,
            row.receiver.label(),
            row.p_sim,
            row.p_norm
        );
    }
    result.persist(&dir, &config)?;
    println!("results written to {}", dir.display());
    Ok(())
}

fn cmd_cdf(args: ExperimentArgs) -> Result<(), Error> {
    let (config, dir) = load_config(&args, "cdf")?;
    let result = run_cdf(&config)?;
    println!("{:>5} {:>6} {:>5} {:>10} {:>10}", "n", "alpha", "rx", "ks_beta", "ks_norm");
    for case in &result.cases {
        let ks_beta = case
            .ks_beta
            .map(|v| format!("{v:10.4}"))
            .unwrap_or_else(|| "         -".into());
        println!(
            "{:>5} {:>6} {:>5} {ks_beta} {:>10.4}",
            case.n,
            case.alpha,
            case.receiver.label(),
            case.ks_gaussian
        );
    }
    result.persist(&dir, &config)?;
    println!("results written to {}", dir.display());
    Ok(())
}

fn cmd_sir_ber(args: ExperimentArgs) -> Result<(), Error> {
    let (config, dir) = load_config(&args, "sir_ber")?;
    let result = run_sir_ber_series(&config)?;
    let eff = EfficiencyFunction::new(config.packet_bits, config.packet_bits, 100_000)?;
    println!(
        "receiver {}: {} symbols, mean UPC SIR = {:.4} (target {:.4})",
        result.receiver.label(),
        config.symbols,
        result.mean_upc_sir(),
        result.gamma_star
    );
    println!(
        "mean utility retention of UPC vs per-draw balancing: {:.4}",
        result.mean_loss_ratio(&eff)?
    );
    result.persist(&dir, &config)?;
    println!("results written to {}", dir.display());
    Ok(())
}

fn cmd_sif_check(args: SifCheckArgs) -> Result<(), Error> {
    if !matches!(
        args.receiver,
        Receiver::MatchedFilter | Receiver::Decorrelator | Receiver::Mmse
    ) {
        return Err(Error::InvalidInput(
            "sif-check supports mf, dec, and mmse".into(),
        ));
    }
    let report = sif_property_harness(
        args.receiver,
        args.trials,
        args.seed,
        &FixedPointSettings::default(),
    )?;
    println!("{report}");
    for failure in report
        .positivity_failures
        .iter()
        .chain(&report.monotonicity_failures)
        .chain(&report.scalability_failures)
    {
        println!("counterexample: {failure}");
    }
    if report.all_pass() {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "interference-function property violated".into(),
        ))
    }
}
