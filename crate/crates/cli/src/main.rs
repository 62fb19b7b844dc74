//! `crstokes`: convergence tables, inf-sup constants and lemma statistics.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};

use crstokes::analysis::{ElementPair, VelocityNorm};
use crstokes::assembly::QuadratureDegrees;
use crstokes::report::{self, Format};
use crstokes::solutions::SolutionKind;
use crstokes::study::{self, ConvergenceConfig, LemmaConfig};

const QUAD_DEGREE_VAR: &str = "CRSTOKES_QUAD_DEGREE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Convergence,
    Infsup,
    Lemmas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Example {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PairChoice {
    CrP1,
    CrP0,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormChoice {
    Full,
    Semi,
}

/// Crouzeix-Raviart / P1 Stokes studies on the unit square.
#[derive(Debug, Parser)]
#[command(name = "crstokes", version)]
struct Cli {
    #[arg(long, value_enum, default_value = "convergence")]
    command: Command,
    /// Manufactured solution; required for `convergence`.
    #[arg(long, value_enum)]
    example: Option<Example>,
    #[arg(long, default_value_t = 0)]
    min_level: usize,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(0..=6))]
    max_level: u8,
    /// Viscosity override; pressure and force scale with it.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, default_value_t = LemmaConfig::default().seed)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Element pairs for `infsup`.
    #[arg(long, value_enum, default_value = "both")]
    pair: PairChoice,
    /// Velocity norm for `infsup`.
    #[arg(long, value_enum, default_value = "full")]
    norm: NormChoice,
}

fn quadrature_degrees() -> Result<QuadratureDegrees> {
    let mut degrees = QuadratureDegrees::default();
    if let Ok(raw) = std::env::var(QUAD_DEGREE_VAR) {
        degrees.volume = raw.trim().parse().with_context(|| format!("{QUAD_DEGREE_VAR}={raw:?} is not a degree"))?;
    }
    Ok(degrees)
}

/// Writes one line and flushes it, so rows already computed survive a later failure.
fn emit(out: &mut dyn Write, line: &str) -> io::Result<()> {
    writeln!(out, "{line}")?;
    out.flush()
}

fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let format = match cli.format {
        OutputFormat::Text => Format::Text,
        OutputFormat::Csv => Format::Csv,
    };
    let max_level = usize::from(cli.max_level);
    if cli.min_level > max_level {
        return Ok(());
    }
    let degrees = quadrature_degrees()?;
    // write errors inside the callbacks are kept and reported after the sweep
    let mut write_error: Option<io::Error> = None;
    let mut sink = |line: String| {
        if write_error.is_none() {
            write_error = emit(out, &line).err();
        }
    };

    let result = match cli.command {
        Command::Convergence => {
            let Some(example) = cli.example else { bail!("--example is required for the convergence command") };
            let solution = match example {
                Example::One => SolutionKind::Example1,
                Example::Two => SolutionKind::Example2,
            };
            let mut cfg = ConvergenceConfig::new(solution, max_level);
            cfg.nu = cli.nu;
            cfg.degrees = degrees;
            sink(report::convergence_header(format));
            study::run_convergence_with::<f64, _>(&cfg, |r| {
                if r.level >= cli.min_level {
                    sink(report::convergence_row(r, format));
                }
            })
            .map(drop)
        }
        Command::Infsup => {
            let pairs: &[ElementPair] = match cli.pair {
                PairChoice::CrP1 => &[ElementPair::CrP1],
                PairChoice::CrP0 => &[ElementPair::CrP0],
                PairChoice::Both => &[ElementPair::CrP1, ElementPair::CrP0],
            };
            let norm = match cli.norm {
                NormChoice::Full => VelocityNorm::BrokenFull,
                NormChoice::Semi => VelocityNorm::BrokenSemi,
            };
            sink(report::infsup_header(format));
            study::run_infsup_with::<f64, _>(cli.min_level, max_level, pairs, norm, |r| {
                sink(report::infsup_row(r, format))
            })
            .map(drop)
        }
        Command::Lemmas => {
            let cfg = LemmaConfig { min_level: cli.min_level, max_level, seed: cli.seed, ..LemmaConfig::default() };
            sink(report::lemmas_header(format));
            study::run_lemmas_with::<f64, _>(&cfg, |l| sink(report::lemmas_row(l, format))).map(drop)
        }
    };
    if let Some(e) = write_error {
        return Err(e).context("writing output");
    }
    result.map_err(Into::into)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.out {
        Some(path) => File::create(path)
            .with_context(|| format!("creating {}", path.display()))
            .and_then(|file| run(&cli, &mut BufWriter::new(file))),
        None => run(&cli, &mut io::stdout().lock()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crstokes: {e:#}");
            ExitCode::FAILURE
        }
    }
}
