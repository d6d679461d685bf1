//! Argument parsing and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{cmd_compare, cmd_probe, cmd_rate, cmd_run, cmd_verify, compare_dir};
use crate::config::{ModeName, Overrides, PolicyName, RuleName, RunConfig};
use crate::error::{exit, CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "fenchel-duo",
    version,
    about = "Projection-free solvers with duality-gap certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one method and write the trace and summary.
    Run(Common),
    /// Run the identity and equivalence suite on the configured problem.
    Verify(Common),
    /// Estimate the relative curvature constant of the configured problem.
    Probe(Common),
    /// Run and fit the convergence exponent of the trace.
    Rate(Common),
    /// Run several configs on one problem and tabulate their gaps.
    Compare(Common),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RuleArg {
    FixedHarmonic,
    OpenLoop,
    ExactLs,
    ApproxGamma,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PolicyArg {
    Avg,
    Best,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Plain,
    Sharp,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Config file; repeat for `compare`.
    #[arg(long, required = true)]
    pub config: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "kmax")]
    pub k_max: Option<usize>,
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            k_max: self.k_max,
            rule: self.rule.map(|r| match r {
                RuleArg::FixedHarmonic => RuleName::FixedHarmonic,
                RuleArg::OpenLoop => RuleName::OpenLoop,
                RuleArg::ExactLs => RuleName::ExactLs,
                RuleArg::ApproxGamma => RuleName::ApproxGamma,
            }),
            gamma: self.gamma,
            delta: self.delta,
            tol: self.tol,
            policy: self.policy.map(|p| match p {
                PolicyArg::Avg => PolicyName::Avg,
                PolicyArg::Best => PolicyName::Best,
            }),
            mode: self.mode.map(|m| match m {
                ModeArg::Plain => ModeName::Plain,
                ModeArg::Sharp => ModeName::Sharp,
            }),
            seed: self.seed,
        }
    }

    fn configs(&self) -> CliResult<Vec<RunConfig>> {
        let o = self.overrides();
        self.config
            .iter()
            .map(|path| {
                let mut cfg = RunConfig::load(path)?;
                cfg.apply(&o)?;
                Ok(cfg)
            })
            .collect()
    }

    fn single(&self) -> CliResult<RunConfig> {
        let mut cfgs = self.configs()?;
        if cfgs.len() != 1 {
            return Err(CliError::Usage(format!(
                "expected exactly one --config, got {}",
                cfgs.len()
            )));
        }
        Ok(cfgs.remove(0))
    }
}

fn json_line<S: serde::Serialize>(value: &S) -> String {
    serde_json::to_string(value).expect("report serializes")
}

/// Runs a parsed command, printing reports to stdout; returns the exit code.
pub fn dispatch(cli: Cli) -> u8 {
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> CliResult<u8> {
    match command {
        Command::Run(c) => {
            let cfg = c.single()?;
            let trace = cfg.trace_path();
            let s = cmd_run(cfg)?;
            println!(
                "{} {}: {} iterations, gap bound {:e}, true gap {:e} -> {}",
                s.algorithm,
                s.rule,
                s.iterations,
                s.final_gap_bound.unwrap_or(f64::NAN),
                s.final_true_gap.unwrap_or(f64::NAN),
                trace.display()
            );
            Ok(exit::OK)
        }
        Command::Verify(c) => {
            let report = cmd_verify(c.single()?)?;
            for line in &report.checks {
                println!("{line}");
            }
            if report.passed() {
                Ok(exit::OK)
            } else {
                let names: Vec<&str> = report.failures().iter().map(|l| l.name.as_str()).collect();
                Err(CliError::Check(names.join(", ")))
            }
        }
        Command::Probe(c) => {
            let report = cmd_probe(c.single()?)?;
            println!("{}", json_line(&report));
            Ok(exit::OK)
        }
        Command::Rate(c) => {
            let report = cmd_rate(c.single()?)?;
            println!("{}", json_line(&report));
            Ok(exit::OK)
        }
        Command::Compare(c) => {
            let cfgs = c.configs()?;
            let dir = compare_dir(&cfgs, c.out.clone());
            let report = cmd_compare(cfgs, &dir)?;
            for e in &report.entries {
                println!("{}", json_line(e));
            }
            Ok(exit::OK)
        }
    }
}
