use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lasernoise_cli::{
    cmd_optimize, cmd_rabi, cmd_ramsey, cmd_validate, with_threads, CliResult, ConfigLayers, Document, Format, Level,
    Protocol, Recipe, ValidateOptions, THREADS_ENV,
};

#[derive(Parser)]
#[command(name = "lasernoise", version, about = "Ramsey and Rabi spectroscopy of atomic ensembles under laser noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads.
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
}

#[derive(Args)]
struct Sweep {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scheme: Option<String>,
    /// Atom numbers: `10`, `4,8,16` or `4:40:2`.
    #[arg(long)]
    atoms: Option<String>,
    #[arg(long)]
    gamma_d: Option<f64>,
    #[arg(long)]
    gamma_a: Option<f64>,
    /// Interrogation time(s), comma separated.
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    engine: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// Any config key, `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Ramsey sweep over detunings, interrogation times and atom numbers.
    Ramsey(Sweep),
    /// Rabi excitation profiles and sensitivity scaling.
    Rabi(Sweep),
    /// Optimal Ramsey interrogation time under phase noise.
    Optimize(Sweep),
    /// Oracle cross-checks; exits with 1 if any check fails.
    Validate {
        #[arg(long, value_enum, default_value_t = Level::Fast)]
        level: Level,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Integrator tolerance of the checked runs.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Named figure preset.
    Recipe {
        #[arg(value_enum)]
        name: Recipe,
        #[command(flatten)]
        common: Common,
    },
}

fn layers(s: &Sweep) -> CliResult<ConfigLayers> {
    let mut l = match &s.config {
        Some(p) => ConfigLayers::from_file(p)?,
        None => ConfigLayers::default(),
    };
    let num = |v: Option<f64>| v.map(|x| format!("{x:?}"));
    let flags = [
        ("seed", s.seed.map(|v| v.to_string())),
        ("scheme", s.scheme.clone()),
        ("atoms", s.atoms.clone()),
        ("gamma_d", num(s.gamma_d)),
        ("gamma_a", num(s.gamma_a)),
        ("tau", s.tau.clone()),
        ("eta", num(s.eta)),
        ("engine", s.engine.clone()),
        ("tol", num(s.tol)),
        ("out", s.common.out.as_ref().map(|p| p.display().to_string())),
        ("format", s.common.format.map(|f| f.name().to_string())),
    ];
    for pair in &s.set {
        l.set_pair(pair)?;
    }
    for (k, v) in flags {
        if let Some(v) = v {
            l.set(k, v)?;
        }
    }
    Ok(l)
}

fn sweep(s: &Sweep, protocol: Protocol, run: fn(&lasernoise_cli::SweepConfig) -> CliResult<Document>) -> CliResult<bool> {
    let cfg = layers(s)?.resolve(protocol)?;
    let doc = with_threads(s.common.threads, || run(&cfg))??;
    doc.write(cfg.out.as_deref(), cfg.format)?;
    Ok(true)
}

fn emit(doc: &Document, common: &Common) -> CliResult<()> {
    Ok(doc.write(common.out.as_deref(), common.format.unwrap_or_default())?)
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Ramsey(s) => sweep(&s, Protocol::Ramsey, cmd_ramsey),
        Command::Rabi(s) => sweep(&s, Protocol::Rabi, cmd_rabi),
        Command::Optimize(s) => sweep(&s, Protocol::Ramsey, cmd_optimize),
        Command::Validate { level, seed, tol, common } => {
            let mut opts = ValidateOptions { level, seed, ..ValidateOptions::default() };
            if let Some(t) = tol {
                opts.tol = t;
            }
            let report = with_threads(common.threads, || cmd_validate(&opts))??;
            emit(&report.document(), &common)?;
            for c in report.checks.iter().filter(|c| !c.passed()) {
                eprintln!("FAILED {} / {}: {:.3e} > {:.3e}", c.suite, c.name, c.discrepancy, c.threshold);
            }
            Ok(report.all_passed())
        }
        Command::Recipe { name, common } => {
            let doc = with_threads(common.threads, || name.run())??;
            emit(&doc, &common)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
