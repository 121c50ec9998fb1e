// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::process::ExitCode;

use adaptive_submod::harness::{self, Format, RunConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "adaptive-submod", version, about = "Property suites, double greedy runs and adaptivity tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monotonicity, submodularity and anchor checks; exit 0 iff all pass.
    Verify(Opts),
    /// Continuous double greedy; one report row.
    RunDg(Opts),
    /// Best value with s known layers, s = 0..=rounds-max.
    AdaptivityCurve(Opts),
    /// Auxiliary-program bounds for r = 1..=rounds-max.
    Bounds(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum Fmt {
    Csv,
    Json,
}

#[derive(Args)]
struct Opts {
    /// Instance spec: a file path or inline JSON.
    #[arg(long)]
    instance: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 6)]
    rounds_max: u32,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Fmt>,
    /// Exact multilinear evaluation instead of sampling.
    #[arg(long)]
    exact: bool,
}

impl Opts {
    fn config(&self, default: Format) -> RunConfig {
        RunConfig {
            instance: self.instance.clone(),
            seed: self.seed,
            gamma: self.gamma,
            samples: self.samples as usize,
            trials: self.trials as usize,
            rounds_max: self.rounds_max as usize,
            format: match self.format {
                Some(Fmt::Csv) => Format::Csv,
                Some(Fmt::Json) => Format::Json,
                None => default,
            },
            exact: self.exact,
        }
    }
}

fn emit(out: &Option<std::path::PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (opts, result) = match &cli.command {
        Command::Verify(o) => {
            (o, harness::cmd_verify(&o.config(Format::Json)).map(|r| (harness::render_verify(&r), r.passed)))
        }
        Command::RunDg(o) => (o, harness::cmd_run_dg(&o.config(Format::Json)).map(|t| (t, true))),
        Command::AdaptivityCurve(o) => (
            o,
            harness::cmd_adaptivity_curve(&o.config(Format::Csv)).map(|c| {
                if let Some(w) = &c.warning {
                    eprintln!("warning: {w}");
                }
                (c.text, true)
            }),
        ),
        Command::Bounds(o) => (o, harness::cmd_bounds(&o.config(Format::Csv)).map(|t| (t, true))),
    };
    match result {
        Ok((text, ok)) => {
            if let Err(e) = emit(&opts.out, &text) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
