use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fbsplit_cli::config::{normalize_key, KeyValues, RunConfig};
use fbsplit_cli::run::{cmd_compare, cmd_list, cmd_solve};

/// Forward-backward splitting solvers and flows.
#[derive(Parser)]
#[command(name = "fbsplit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List gallery problems whose name contains FILTER.
    List { filter: Option<String> },
    /// Run one scheme; exit 0 if converged, 2 if not, 1 on error.
    Solve(RunArgs),
    /// Run several schemes on one problem and compare their limits.
    Compare(RunArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Gallery problem name.
    #[arg(long)]
    problem: Option<String>,
    /// Inline function, e.g. `box:0,0|1,1`.
    #[arg(long)]
    phi: Option<String>,
    /// Inline operator, e.g. `quadratic:1,0,0,1|2,-1`.
    #[arg(long)]
    operator: Option<String>,
    /// fbn, fb-classical, fb-relaxed, newton-flow, semigroup-flow, proxgrad-flow.
    #[arg(long)]
    scheme: Option<String>,
    /// Comma-separated scheme list (compare).
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    /// rk4 or euler.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated start point.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Comma-separated reference solution for the Lyapunov columns.
    #[arg(long, allow_hyphen_values = true)]
    reference: Option<String>,
    /// Run even if the parameters violate the admissibility bounds.
    #[arg(long)]
    override_admissibility: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    record_every: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        let strings = [
            ("problem", &self.problem),
            ("phi", &self.phi),
            ("operator", &self.operator),
            ("scheme", &self.scheme),
            ("schemes", &self.schemes),
            ("h", &self.h),
            ("mu", &self.mu),
            ("dt", &self.dt),
            ("horizon", &self.horizon),
            ("method", &self.method),
            ("tol", &self.tol),
            ("max-iters", &self.max_iters),
            ("seed", &self.seed),
            ("x0", &self.x0),
            ("reference", &self.reference),
            ("record-every", &self.record_every),
        ];
        for (k, v) in strings {
            if let Some(v) = v {
                kv.insert(normalize_key(k), v.clone());
            }
        }
        for (k, v) in [("csv", &self.csv), ("json", &self.json), ("out-dir", &self.out_dir)] {
            if let Some(v) = v {
                kv.insert(normalize_key(k), v.display().to_string());
            }
        }
        if self.override_admissibility {
            kv.insert("override_admissibility".into(), "true".into());
        }
        kv
    }

    fn resolve(&self) -> fbsplit::Result<RunConfig> {
        RunConfig::resolve(self.config.as_deref(), self.overrides())
    }
}

fn fail(e: fbsplit::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List { filter } => {
            print!("{}", cmd_list(filter.as_deref()));
            ExitCode::SUCCESS
        }
        Command::Solve(args) => match args.resolve().and_then(|cfg| cmd_solve(&cfg)) {
            Ok(s) => {
                for w in &s.warnings {
                    eprintln!("warning: {w}");
                }
                println!(
                    "{} on {}: converged={} iterations={} residual={:e}",
                    s.scheme, s.problem, s.converged, s.iterations, s.final_residual
                );
                if s.converged {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                }
            }
            Err(e) => fail(e),
        },
        Command::Compare(args) => match args.resolve().and_then(|cfg| cmd_compare(&cfg)) {
            Ok(report) => {
                for s in &report.skipped {
                    eprintln!("warning: skipped {s}");
                }
                for r in &report.rows {
                    println!(
                        "{:<16} converged={:<5} iterations={:<8} residual={:e}",
                        r.scheme, r.converged, r.iterations, r.final_residual
                    );
                }
                println!("max pairwise |B difference| = {:e}", report.b_agreement);
                if report.rows.iter().all(|r| r.converged) {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                }
            }
            Err(e) => fail(e),
        },
    }
}
