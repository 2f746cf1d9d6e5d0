//! Command-line certificates for the qc Cartan connection engine.
//!
//! Exit codes: 0 all checks pass, 1 certificate failure, 2 usage or input error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::*;
use report::Report;

#[derive(Parser)]
#[command(name = "qc-cartan", version, about = "Exact certificates for the canonical Cartan connection of qc structures")]
struct Cli {
    /// Quaternionic dimension n (default: the command's standard sweep).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Signature of g as p,q with p + q = n (default n,0).
    #[arg(long, global = true, value_parser = parse_signature)]
    signature: Option<(usize, usize)>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Random samples per check (default depends on the command).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Structure-equation certificates.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// The Lie algebra model.
    Lie {
        #[command(subcommand)]
        what: Lie,
    },
    /// Worked examples.
    Example {
        #[command(subcommand)]
        what: Example,
    },
    /// Classification of curvature by homogeneity.
    Classify {
        #[command(subcommand)]
        what: Classify,
    },
    /// Every certificate, one report.
    Report,
}

#[derive(Subcommand)]
enum Verify {
    /// d² = 0 for the flat structure equations (default n = 1, 2).
    Flat,
    /// d² = 0 for the curved structure equations (default n = 1).
    Curved,
    /// Curved d², starred forms, Bianchi combinations and a negative control (default n = 1).
    Bianchi,
    /// ∂*κ = 0 and the trace conditions on random or given components (default n = 1, 2).
    Normality {
        /// Random target-valued cochains for the closed/direct comparison.
        #[arg(long, default_value_t = 100)]
        cochains: usize,
        /// Check one component file instead of random components.
        #[arg(long)]
        components: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Lie {
    /// Jacobi identity on random triples (default n = 1, 2, 3).
    Jacobi,
    /// Killing form calibration and dual frames (default n = 1, 2, 3).
    Killing,
    /// G₁ group laws against the matrix representation (default n = 1, 2).
    G1,
    /// Flat structure equations against the bracket (default n = 1, 2).
    MaurerCartan,
}

#[derive(Subcommand)]
enum Example {
    /// The quaternionic Heisenberg group, or any chart file.
    Heisenberg {
        #[arg(long)]
        chart: Option<PathBuf>,
        /// Gauge μ = m² for the P_o coframe; give m.
        #[arg(long)]
        gauge: Option<String>,
    },
}

#[derive(Subcommand)]
enum Classify {
    /// Homogeneity of each curvature family and regularity of κ (default n = 1, 2).
    Homogeneity,
}

fn parse_signature(s: &str) -> Result<(usize, usize), String> {
    let (p, q) = s.split_once(',').ok_or("expected p,q")?;
    let p = p.trim().parse().map_err(|_| format!("bad p in {s:?}"))?;
    let q = q.trim().parse().map_err(|_| format!("bad q in {s:?}"))?;
    Ok((p, q))
}

fn sweep(n: Option<usize>, default: &[usize]) -> Vec<usize> {
    n.map_or_else(|| default.to_vec(), |n| vec![n])
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Verify { what: Verify::Flat } => "verify flat",
        Cmd::Verify { what: Verify::Curved } => "verify curved",
        Cmd::Verify { what: Verify::Bianchi } => "verify bianchi",
        Cmd::Verify { what: Verify::Normality { .. } } => "verify normality",
        Cmd::Lie { what: Lie::Jacobi } => "lie jacobi",
        Cmd::Lie { what: Lie::Killing } => "lie killing",
        Cmd::Lie { what: Lie::G1 } => "lie g1",
        Cmd::Lie { what: Lie::MaurerCartan } => "lie maurer-cartan",
        Cmd::Example { .. } => "example heisenberg",
        Cmd::Classify { .. } => "classify homogeneity",
        Cmd::Report => "report",
    }
}

fn run(cli: &Cli) -> Result<Report, UsageError> {
    let (n, sig, seed) = (cli.n, cli.signature, cli.seed);
    if n == Some(0) {
        return Err(UsageError("n must be at least 1".into()));
    }
    let name = command_name(&cli.cmd);
    let mut rep = Report::new(name, vec![], sig, seed, cli.trials);
    let set = |rep: &mut Report, ns: &[usize]| {
        for k in ns {
            if !rep.n.contains(k) {
                rep.n.push(*k);
            }
        }
    };
    match &cli.cmd {
        Cmd::Verify { what } => match what {
            Verify::Flat => {
                let ns = sweep(n, &[1, 2]);
                set(&mut rep, &ns);
                verify_flat(&mut rep, &ns, sig)?;
            }
            Verify::Curved => {
                let ns = sweep(n, &[1]);
                set(&mut rep, &ns);
                verify_curved(&mut rep, &ns, sig)?;
            }
            Verify::Bianchi => {
                let ns = sweep(n, &[1]);
                set(&mut rep, &ns);
                verify_bianchi(&mut rep, &ns, sig, seed)?;
            }
            Verify::Normality { cochains, components } => {
                let ns = sweep(n, &[1, 2]);
                set(&mut rep, &ns);
                let trials = cli.trials.unwrap_or(50);
                rep.trials = Some(trials);
                verify_normality(&mut rep, &ns, sig, seed, trials, *cochains, components.as_deref())?;
            }
        },
        Cmd::Lie { what } => match what {
            Lie::Jacobi => {
                let ns = sweep(n, &[1, 2, 3]);
                set(&mut rep, &ns);
                let trials = cli.trials.unwrap_or(100);
                rep.trials = Some(trials);
                lie_jacobi(&mut rep, &ns, sig, seed, trials)?;
            }
            Lie::Killing => {
                let ns = sweep(n, &[1, 2, 3]);
                set(&mut rep, &ns);
                lie_killing(&mut rep, &ns, sig)?;
            }
            Lie::G1 => {
                let ns = sweep(n, &[1, 2]);
                set(&mut rep, &ns);
                let trials = cli.trials.unwrap_or(100);
                rep.trials = Some(trials);
                lie_g1(&mut rep, &ns, sig, seed, trials)?;
            }
            Lie::MaurerCartan => {
                let ns = sweep(n, &[1, 2]);
                set(&mut rep, &ns);
                lie_maurer_cartan(&mut rep, &ns, sig)?;
            }
        },
        Cmd::Example { what: Example::Heisenberg { chart, gauge } } => {
            if n.is_some_and(|n| n != 1) {
                return Err(UsageError("the Heisenberg example has n = 1".into()));
            }
            example_heisenberg(&mut rep, chart.as_deref(), gauge.as_deref())?;
        }
        Cmd::Classify { what: Classify::Homogeneity } => {
            let ns = sweep(n, &[1, 2]);
            set(&mut rep, &ns);
            let trials = cli.trials.unwrap_or(5);
            rep.trials = Some(trials);
            classify_homogeneity(&mut rep, &ns, sig, seed, trials)?;
        }
        Cmd::Report => {
            let all = sweep(n, &[1, 2, 3]);
            let small = sweep(n, &[1, 2]);
            let one = sweep(n, &[1]);
            set(&mut rep, &all);
            lie_jacobi(&mut rep, &all, sig, seed, cli.trials.unwrap_or(100))?;
            lie_killing(&mut rep, &all, sig)?;
            lie_maurer_cartan(&mut rep, &small, sig)?;
            verify_flat(&mut rep, &small, sig)?;
            verify_bianchi(&mut rep, &one, sig, seed)?;
            verify_normality(&mut rep, &small, sig, seed, cli.trials.unwrap_or(50), 100, None)?;
            lie_g1(&mut rep, &small, sig, seed, cli.trials.unwrap_or(100))?;
            if n.is_none() || n == Some(1) {
                example_heisenberg(&mut rep, None, None)?;
            }
            classify_homogeneity(&mut rep, &small, sig, seed, 5)?;
            rep.n = all;
        }
    }
    Ok(rep)
}

/// Runs one parsed command line and returns its exit status.
fn execute(cli: &Cli) -> (u8, Option<Report>) {
    let rep = match run(cli) {
        Ok(r) => r,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return (2, None);
        }
    };
    rep.print_summary();
    if let Some(path) = &cli.json {
        let text = match serde_json::to_string_pretty(&rep) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {e}");
                return (2, Some(rep));
            }
        };
        if let Err(e) = std::fs::write(path, text + "\n") {
            eprintln!("error: {}: {e}", path.display());
            return (2, Some(rep));
        }
    }
    (if rep.passed { 0 } else { 1 }, Some(rep))
}

fn main() -> ExitCode {
    ExitCode::from(execute(&Cli::parse()).0)
}

#[cfg(test)]
mod tests;
