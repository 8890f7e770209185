use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qretro::report::Results;
use qretro::{json, run_scenario, selftest, CliError, RunOptions, Scenario};
use qretro_core::sweep::Execution;

#[derive(Parser)]
#[command(
    name = "qretro",
    version,
    about = "Optimal quantum retrodiction: estimators, weak values, Fisher information"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal Hermitian estimator through a channel.
    Personick(ScenarioArgs),
    /// Optimal non-Hermitian estimator through a channel.
    Complex(ScenarioArgs),
    /// Real and complex weak values for POVM outcomes.
    WeakValue(ScenarioArgs),
    /// Classical conditional expectation and its quantum embedding.
    Classical(ScenarioArgs),
    /// Fisher information before and after a channel (single problem or sweep).
    QfiMono(ScenarioArgs),
    /// Smoothed estimate of a linear quadrature for Gaussian state and effect.
    Gaussian(ScenarioArgs),
    /// Risk of a given estimator in either picture.
    Risk(ScenarioArgs),
    /// Run the seeded invariant suite.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
    /// Multiplies every judging tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
}

#[derive(Args)]
struct SelftestArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Report destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the human-readable summary on stderr.
    #[arg(long)]
    quiet: bool,
    /// Run sweeps on one thread.
    #[arg(long)]
    sequential: bool,
}

impl CommonArgs {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

/// Writes via a temporary file and a rename so readers never see a partial report.
fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text).map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => write_atomic(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summary(results: &Results) -> Vec<String> {
    match results {
        Results::Personick(r) => vec![format!(
            "min_risk={:.6e} direct_risk={:.6e} residual={:.2e} support_rank={}",
            r.min_risk, r.direct_risk, r.residual, r.support_rank
        )],
        Results::Complex(r) => vec![format!(
            "min_risk={:.6e} residual={:.2e} hermitian_min_risk={}",
            r.min_risk,
            r.residual,
            r.hermitian_min_risk.map_or("n/a".into(), |v| format!("{v:.6e}"))
        )],
        Results::WeakValue(r) => r
            .outcomes
            .iter()
            .map(|o| {
                format!(
                    "{}: p={:.6} weak_value={:?} complex={:?}",
                    o.label, o.probability, o.weak_value, o.complex_weak_value
                )
            })
            .collect(),
        Results::Classical(r) => r
            .outcomes
            .iter()
            .map(|o| format!("y={}: p={:.6} estimate={:?}", o.outcome, o.probability, o.estimate))
            .collect(),
        Results::QfiMono(r) => {
            let mut lines = vec![format!(
                "{:>5} {:<21} {:>3} {:>3} {:>13} {:>13} {:>11} {:>9}",
                "index", "family", "din", "dout", "J_in", "J_out", "slack", "gap"
            )];
            lines.extend(r.rows.iter().map(|row| {
                format!(
                    "{:>5} {:<21} {:>3} {:>3} {:>13.6e} {:>13.6e} {:>11.3e} {:>9.1e}",
                    row.index,
                    row.family,
                    row.dim_in,
                    row.dim_out,
                    row.report.j_in,
                    row.report.j_out,
                    row.report.slack,
                    row.report.agreement_gap
                )
            }));
            lines.push(format!(
                "{} instances: min slack {:.3e}, max agreement gap {:.1e}, tolerance {:.1e}: {}",
                r.summary.instances,
                r.summary.min_slack,
                r.summary.max_agreement_gap,
                r.summary.tolerance,
                if r.summary.passed { "PASS" } else { "FAIL" }
            ));
            lines
        }
        Results::Gaussian(r) => vec![format!(
            "estimate={:.12} overlap={:.6e}{}",
            r.estimate,
            r.overlap,
            r.numeric_gap.map_or(String::new(), |g| format!(" numeric_gap={g:.2e}"))
        )],
        Results::Risk(r) => vec![format!("{} risk={:.12e}", r.picture, r.risk)],
    }
}

fn scenario_command(kind: &str, args: &ScenarioArgs) -> Result<ExitCode, CliError> {
    let text = fs::read_to_string(&args.input).map_err(|e| CliError::Io(format!("{}: {e}", args.input.display())))?;
    let scenario = Scenario::parse(&text).map_err(|e| e.context(&args.input.display().to_string()))?;
    if scenario.kind() != kind {
        return Err(CliError::Validation(format!(
            "scenario kind {:?} does not match subcommand {kind:?}",
            scenario.kind()
        )));
    }
    let opts = RunOptions {
        seed: args.common.seed,
        tol_scale: args.tol_scale,
        exec: args.common.exec(),
    };
    let report = run_scenario(&scenario, &opts)?;
    emit(&args.common.output, &json::to_string(&report)?)?;
    if !args.common.quiet {
        for line in summary(&report.results) {
            eprintln!("{line}");
        }
        for w in &report.diagnostics.warnings {
            eprintln!("warning: {w}");
        }
    }
    if let Results::QfiMono(r) = &report.results {
        if !r.summary.passed {
            return Ok(ExitCode::from(3));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn selftest_command(args: &SelftestArgs) -> Result<ExitCode, CliError> {
    let seed = args.common.seed.unwrap_or(0);
    let report = selftest::run_selftest(seed, args.common.exec());
    if let Some(path) = &args.common.output {
        write_atomic(path, &json::to_string(&report)?)?;
    }
    if !args.common.quiet {
        for check in &report.checks {
            println!("{}", check.line());
        }
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        println!("selftest seed={seed}: {} checks, {failed} failed", report.checks.len());
    }
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Personick(a) => scenario_command("personick", a),
        Command::Complex(a) => scenario_command("complex", a),
        Command::WeakValue(a) => scenario_command("weak-value", a),
        Command::Classical(a) => scenario_command("classical", a),
        Command::QfiMono(a) => scenario_command("qfi-mono", a),
        Command::Gaussian(a) => scenario_command("gaussian", a),
        Command::Risk(a) => scenario_command("risk", a),
        Command::Selftest(a) => selftest_command(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qretro: {e}");
            e.to_exit()
        }
    }
}
