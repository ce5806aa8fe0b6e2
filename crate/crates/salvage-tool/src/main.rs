//! Command-line front end.
//!
//! ```text
//! salvage-tool <analyze|link-check|salvage|adversary|gallery>
//!              [NAME | --problem FILE] [--bins N] [--schedule 64,128,...]
//!              [--quad-tol T] [--grid N] [--out DIR] [--z R]
//! ```
//!
//! Reports go to stdout as JSON; `--out DIR` additionally writes plot-ready
//! CSVs. Exit codes: 0 success, 2 dominance violated, 3 link invalid or a
//! required link condition failed, 4 parse/config error, 5 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use salvage_tool::pipeline::{self, ExitStatus};
use salvage_tool::problem::{self, Problem};
use salvage_tool::{fixtures, report};

#[derive(Parser)]
#[command(
    name = "salvage-tool",
    version,
    about = "Diagnose negative-weight estimands and rebuild them with nonnegative weights"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sign partition, estimand value, and weight mass
    Analyze(CommonArgs),
    /// Link conditions, transformed weights, and preservation residuals
    LinkCheck(CommonArgs),
    /// Measure-dominance check with binned transform and refinement
    Salvage(CommonArgs),
    /// Construct an everywhere-positive marginal effect with beta < 0
    Adversary(CommonArgs),
    /// Run a built-in fixture through the full pipeline
    Gallery(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Built-in fixture name (example1, example2, constant_effect, gaussian)
    name: Option<String>,

    /// Problem file (JSON) instead of a fixture name
    #[arg(long)]
    problem: Option<PathBuf>,

    /// Bin count for the headline dominance pass
    #[arg(long)]
    bins: Option<usize>,

    /// Refinement schedule, comma separated (e.g. 64,128,256)
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<usize>>,

    /// Absolute quadrature tolerance
    #[arg(long)]
    quad_tol: Option<f64>,

    /// Grid points for the pointwise condition checks
    #[arg(long)]
    grid: Option<usize>,

    /// Directory for CSV artifacts (samples.csv, bins.csv)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the `z` parameter
    #[arg(long, allow_hyphen_values = true)]
    z: Option<f64>,

    /// Positive floor for the adversarial marginal effect
    #[arg(long)]
    epsilon: Option<f64>,

    /// Monotone-branch index to select when the link is not injective
    #[arg(long)]
    branch: Option<usize>,
}

impl CommonArgs {
    fn load(&self) -> Result<(String, Problem)> {
        let spec = match (&self.name, &self.problem) {
            (Some(name), None) => fixtures::fixture(name)?,
            (None, Some(path)) => problem::load_problem(path)?,
            (Some(_), Some(_)) => bail!("give either a fixture name or --problem, not both"),
            (None, None) => bail!(
                "missing input: give a fixture name ({}) or --problem FILE",
                fixtures::GALLERY.join(", ")
            ),
        };
        let mut resolved = spec.resolve(self.z)?;
        if let Some(t) = self.quad_tol {
            if !t.is_finite() || t <= 0.0 {
                bail!("--quad-tol must be positive");
            }
            resolved.quad_tol = t;
        }
        if let Some(g) = self.grid {
            resolved.grid_points = g.max(2);
        }
        if let Some(b) = self.bins {
            if b == 0 {
                bail!("--bins must be at least 1");
            }
            resolved.bins = b;
        }
        if let Some(s) = &self.schedule {
            if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) {
                bail!("--schedule must be a strictly increasing list");
            }
            resolved.n_schedule = s.clone();
        }
        if let Some(e) = self.epsilon {
            if !e.is_finite() || e <= 0.0 {
                bail!("--epsilon must be positive");
            }
            resolved.epsilon = e;
        }
        for w in &resolved.warnings {
            eprintln!("warning: {w}");
        }
        let label = self
            .name
            .clone()
            .or_else(|| self.problem.as_ref().map(|p| p.display().to_string()))
            .unwrap_or_default();
        Ok((label, resolved))
    }

    fn out_dir(&self) -> Result<Option<&PathBuf>> {
        if let Some(dir) = &self.out {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(self.out.as_ref())
    }
}

fn emit<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn is_config_error(err: &anyhow::Error) -> bool {
    // core numerical failures carry a salvage_core::Error; everything else
    // raised here is a configuration problem
    err.downcast_ref::<salvage_core::Error>().is_none()
}

fn run(cli: Cli) -> Result<ExitStatus> {
    match cli.command {
        Command::Analyze(args) => {
            let (_, problem) = args.load()?;
            let analysis = pipeline::run_analyze(&problem)?;
            if let Some(dir) = args.out_dir()? {
                report::write_samples_csv(
                    &dir.join("samples.csv"),
                    &problem.domain,
                    &problem.omega,
                    None,
                    &problem.g_prime,
                )?;
            }
            emit(&analysis.json)?;
            Ok(ExitStatus::Ok)
        }
        Command::LinkCheck(args) => {
            let (_, problem) = args.load()?;
            if problem.link.is_none() {
                bail!("link: missing (link-check needs a `link` entry in the problem)");
            }
            let analysis = pipeline::run_analyze(&problem)?;
            let run = pipeline::run_link(&problem, &analysis.part, args.branch)?
                .expect("link present");
            if let Some(dir) = args.out_dir()? {
                report::write_samples_csv(
                    &dir.join("samples.csv"),
                    &problem.domain,
                    &problem.omega,
                    run.omega_tilde.as_ref(),
                    &problem.g_prime,
                )?;
            }
            emit(&run.json)?;
            Ok(run.status)
        }
        Command::Salvage(args) => {
            let (_, problem) = args.load()?;
            let analysis = pipeline::run_analyze(&problem)?;
            let run = pipeline::run_salvage(&problem, &analysis.part)?;
            if let Some(dir) = args.out_dir()? {
                report::write_bins_csv(&dir.join("bins.csv"), &run.headline)?;
                report::write_samples_csv(
                    &dir.join("samples.csv"),
                    &problem.domain,
                    &problem.omega,
                    run.headline.omega_tilde_n.as_ref(),
                    &problem.g_prime,
                )?;
            }
            emit(&run.json)?;
            Ok(run.status)
        }
        Command::Adversary(args) => {
            let (_, problem) = args.load()?;
            let analysis = pipeline::run_analyze(&problem)?;
            let run = pipeline::run_adversary(&problem, &analysis.part)?;
            if let Some(dir) = args.out_dir()? {
                let g_adv = match &run.outcome {
                    salvage_core::AdversaryOutcome::Found { g_prime_adv, .. } => {
                        Some(g_prime_adv.clone())
                    }
                    _ => None,
                };
                report::write_samples_csv(
                    &dir.join("samples.csv"),
                    &problem.domain,
                    &problem.omega,
                    None,
                    g_adv.as_ref().unwrap_or(&problem.g_prime),
                )?;
            }
            emit(&run.json)?;
            Ok(ExitStatus::Ok)
        }
        Command::Gallery(args) => {
            let name = args.name.clone().ok_or_else(|| {
                anyhow!("gallery needs a fixture name: {}", fixtures::GALLERY.join(", "))
            })?;
            let (_, problem) = args.load()?;
            let run = pipeline::run_gallery(&name, &problem, args.branch)?;
            if let Some(dir) = args.out_dir()? {
                report::write_bins_csv(&dir.join("bins.csv"), &run.headline)?;
                report::write_samples_csv(
                    &dir.join("samples.csv"),
                    &problem.domain,
                    &problem.omega,
                    run.omega_tilde.as_ref(),
                    &problem.g_prime,
                )?;
            }
            emit(&run.json)?;
            Ok(run.status)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            return ExitCode::from(ExitStatus::Config.code());
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(err) => {
            eprintln!("error: {err:#}");
            let status =
                if is_config_error(&err) { ExitStatus::Config } else { ExitStatus::Numerical };
            ExitCode::from(status.code())
        }
    }
}
