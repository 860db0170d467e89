//! Command-line front end: argument parsing and the four commands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pia_core::oracle::{unit_grid, QuadSpec};
use pia_core::problem::BUILTIN_NAMES;
use pia_core::report::{build_table, residual_history, reproduce, solve_document, TableSpec};
use pia_core::{builtin, load_problem, trajectory, Error, FideProblem, FracOrder, PiaConfig};

/// Environment variable overriding the coefficient pruning tolerance.
pub const PRUNE_TOL_ENV: &str = "FIDE_PIA_PRUNE_TOL";

#[derive(Debug, Parser)]
#[command(name = "fide-pia", version, about = "Perturbation-iteration solver for fractional integro-differential equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the iteration and print the final series.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Write a JSON result document to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate iterates on a grid and compare with the reference solution.
    Table {
        #[command(flatten)]
        run: RunArgs,
        /// Iterates to tabulate, e.g. `2,3,4,5`. Defaults to all of 1..=iters.
        #[arg(long, value_delimiter = ',')]
        columns: Vec<usize>,
        /// Grid spacing on [0, 1].
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Skip the reference and error columns.
        #[arg(long)]
        no_reference: bool,
        /// Also write the table as CSV (`-` for stdout).
        #[arg(long)]
        csv: Option<String>,
    },
    /// Quadrature residual sup-norm of every iterate.
    Residual {
        #[command(flatten)]
        run: RunArgs,
        /// A point count on [0, 1] or a comma-separated list of points.
        #[arg(long, default_value = "21")]
        points: String,
    },
    /// Regenerate a benchmark table with its figure data.
    Reproduce {
        /// example1, example2 or all
        name: String,
        #[arg(long, default_value = "reproduction")]
        outdir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Built-in problem name (example1, example2) or path to a JSON problem file.
    pub problem: String,
    /// Fractional order(s) `p/q`: one value for every unknown or a comma list.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub iters: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub epsilon: f64,
}

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { 1 } else { 2 };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: 1,
        message: message.into(),
    }
}

fn runtime(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Resolves a built-in name or reads a problem file.
pub fn resolve_problem(arg: &str) -> CliResult<FideProblem> {
    if BUILTIN_NAMES.contains(&arg) {
        return Ok(builtin(arg)?);
    }
    let path = Path::new(arg);
    if !path.is_file() {
        return Err(usage(format!(
            "{arg:?} is neither a built-in problem ({}) nor a readable file",
            BUILTIN_NAMES.join(", ")
        )));
    }
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{arg}: {e}")))?;
    Ok(load_problem(&text)?)
}

fn parse_orders(s: &str) -> CliResult<Vec<FracOrder>> {
    s.split(',')
        .map(|part| part.trim().parse::<FracOrder>().map_err(CliError::from))
        .collect()
}

fn prune_tol_from_env() -> CliResult<Option<f64>> {
    match std::env::var(PRUNE_TOL_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| *x >= 0.0)
            .map(Some)
            .ok_or_else(|| usage(format!("{PRUNE_TOL_ENV}={v:?} is not a non-negative number"))),
        Err(_) => Ok(None),
    }
}

fn setup(run: &RunArgs, residual_points: usize) -> CliResult<(FideProblem, PiaConfig)> {
    let mut p = resolve_problem(&run.problem)?;
    if let Some(a) = &run.alpha {
        p = p.with_orders(&parse_orders(a)?)?;
    }
    let mut cfg = PiaConfig {
        epsilon: run.epsilon,
        max_iter: run.iters,
        residual_points,
        ..Default::default()
    };
    if let Some(tol) = prune_tol_from_env()? {
        cfg.prune_tol = tol;
    }
    Ok((p, cfg))
}

fn parse_points(s: &str) -> CliResult<Vec<f64>> {
    if s.contains(',') {
        return s
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(format!("invalid point {x:?}")))
            })
            .collect();
    }
    let n: usize = s
        .trim()
        .parse()
        .map_err(|_| usage(format!("--points expects a count or a comma list, got {s:?}")))?;
    if n == 0 {
        return Err(usage("--points must be positive"));
    }
    Ok(unit_grid(n))
}

fn grid(step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(usage("--step must lie in (0, 1]"));
    }
    let n = (1.0 / step + 1e-9).floor() as usize;
    let mut g: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    if (g[n] - 1.0).abs() > 1e-12 {
        g.push(1.0);
    }
    Ok(g)
}

/// Runs a parsed command and returns what it prints on stdout.
pub fn run(cli: Cli) -> CliResult<String> {
    let mut out = String::new();
    match cli.command {
        Command::Solve { run, out: json_path } => {
            let (p, cfg) = setup(&run, 21)?;
            let state = pia_core::solve(&p, &cfg)?;
            for (name, s) in p.unknowns.iter().zip(&state.iterates) {
                let _ = writeln!(out, "{name}{}(t) = {s}", state.n);
            }
            for h in &state.history {
                let norm = h.residual_sup_norm.map_or("-".into(), |r| format!("{r:.6e}"));
                let _ = writeln!(out, "iteration {}: terms {:?}, residual sup-norm {norm}", h.n, h.term_counts);
            }
            if let Some(path) = json_path {
                let doc = solve_document(&p, &state, &cfg);
                let text = serde_json::to_string_pretty(&doc).map_err(|e| runtime(e.to_string()))?;
                fs::write(&path, text + "\n").map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            }
        }
        Command::Table {
            run,
            columns,
            step,
            no_reference,
            csv,
        } => {
            let columns = if columns.is_empty() {
                (1..=run.iters).collect()
            } else {
                columns
            };
            let iters = columns.iter().copied().max().unwrap_or(run.iters).max(1);
            let (p, mut cfg) = setup(&run, 0)?;
            cfg.max_iter = iters;
            let spec = TableSpec {
                grid: grid(step)?,
                iterate_columns: columns,
                compare_reference: !no_reference,
            };
            spec.validate()?;
            let states = trajectory(&p, &cfg)?;
            let table = build_table(&p, &states, &spec)?;
            out.push_str(&table.to_text());
            match csv.as_deref() {
                Some("-") => out.push_str(&table.to_csv()?),
                Some(path) => fs::write(path, table.to_csv()?).map_err(|e| runtime(format!("{path}: {e}")))?,
                None => {}
            }
        }
        Command::Residual { run, points } => {
            let points = parse_points(&points)?;
            let (p, cfg) = setup(&run, 0)?;
            let mut quiet = cfg.clone();
            quiet.max_iter = run.iters;
            for (n, norm) in residual_history(&p, &quiet, &points, QuadSpec::default())? {
                let _ = writeln!(out, "{n}\t{norm:.6e}");
            }
        }
        Command::Reproduce { name, outdir } => {
            let r = reproduce(&name, &outdir)?;
            out.push_str(&r.summary);
            for f in &r.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
        }
    }
    Ok(out)
}
