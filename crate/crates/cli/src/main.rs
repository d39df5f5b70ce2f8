mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use commands::{registry, CommandError, Context};
use config::parse_config;
use report::{Format, RunReport};

const EXIT_NUMERIC: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CommandName {
    Check,
    Spectrum,
    Momentum,
    Pct,
    Fig1,
    Sweep,
}

impl CommandName {
    fn as_str(self) -> &'static str {
        match self {
            CommandName::Check => "check",
            CommandName::Spectrum => "spectrum",
            CommandName::Momentum => "momentum",
            CommandName::Pct => "pct",
            CommandName::Fig1 => "fig1",
            CommandName::Sweep => "sweep",
        }
    }
}

/// Spectra, momentum eigenfunctions and canonical-transformation checks for
/// PT-symmetric deformed momentum operators.
#[derive(Debug, Parser)]
#[command(name = "eup-spectra", version)]
struct Args {
    command: CommandName,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the report and CSV artifacts; overrides `output_path`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("eup-spectra: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let start = Instant::now();

    let cfg = match parse_config(&args.config) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, format!("config error: {e}")),
    };
    let out_dir = args.out.clone().or_else(|| cfg.output_path.clone()).unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        return fail(EXIT_CONFIG, format!("config error: cannot create output directory {}: {e}", out_dir.display()));
    }

    let name = args.command.as_str();
    let Some(command) = registry().get(name) else {
        return fail(EXIT_CONFIG, format!("unknown command {name}; registered: {}", registry().names().join(", ")));
    };
    let outcome = match command.run(&Context { config: &cfg, out_dir: &out_dir }) {
        Ok(o) => o,
        Err(CommandError::Config(e)) => return fail(EXIT_CONFIG, format!("config error: {e}")),
        Err(e) => return fail(EXIT_NUMERIC, e),
    };

    let pass = outcome.checks.iter().all(|c| c.pass);
    let mut report = RunReport {
        command: name.to_string(),
        config: serde_json::to_value(&cfg).expect("config serializes"),
        results: outcome.results,
        checks: outcome.checks,
        artifacts: outcome.artifacts,
        pass,
        wall_time_s: 0.0,
    };
    report.wall_time_s = start.elapsed().as_secs_f64();

    let rendered = report.render(args.format);
    let path = out_dir.join(format!("{name}_report.{}", args.format.extension()));
    if let Err(e) = std::fs::write(&path, &rendered) {
        return fail(EXIT_NUMERIC, format!("cannot write {}: {e}", path.display()));
    }
    print!("{rendered}");
    if pass {
        ExitCode::SUCCESS
    } else {
        for c in report.checks.iter().filter(|c| !c.pass) {
            eprintln!("eup-spectra: check {} failed: {:.3e} vs {:.3e}", c.name, c.value, c.threshold);
        }
        ExitCode::from(EXIT_NUMERIC)
    }
}
