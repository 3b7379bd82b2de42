mod io;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use su2q::diagnostics::{class_report, default_u_samples};
use su2q::diffops::{apply_field, InvariantField};
use su2q::fourier::{forward, synthesize};
use su2q::group::{quadrature_grid, shared_grid};
use su2q::quantize::{
    adjoint_expansion, compose_expansion, extract_symbol, l2_bound_estimate, operator_from_spec, sobolev_reweight,
    OperatorOracle, SymbolOperator,
};
use su2q::symbols::{difference, Direction};
use su2q::{Symbol, TaylorBasis};

use crate::io::{read_function, read_grid, read_samples, read_symbol, write_json, CliError, CliResult, SamplesFile};

#[derive(Parser)]
#[command(name = "su2q", version, about = "Fourier analysis and symbol calculus on SU(2)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the product quadrature grid that is exact up to two_l = --two-L.
    Grid {
        #[arg(long = "two-L")]
        two_l: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a coefficient file at the nodes of a grid.
    Synth {
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fourier coefficients of node samples, up to two_l = --two-L.
    Analyze {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long = "two-L")]
        two_l: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a left-invariant operator to a coefficient file.
    Apply {
        #[arg(long)]
        field: InvariantField,
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply Op(σ) to a coefficient file.
    OpApply {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract the symbol of a builtin operator such as `partial_zero*q_plus`.
    Extract {
        #[arg(long)]
        operator: String,
        #[arg(long = "two-L")]
        two_l: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Asymptotic composition σ_A ∘ σ_B truncated after order --n.
    Compose {
        /// Pass twice: A, then B.
        #[arg(long, required = true)]
        symbol: Vec<PathBuf>,
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Asymptotic adjoint symbol truncated after order --n.
    Adjoint {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Difference operator applied to a symbol.
    Diff {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long)]
        dir: Direction,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Growth and off-diagonal decay report for a declared order m.
    ClassReport {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        order: f64,
        #[arg(long, default_value_t = 2)]
        alpha_max: u32,
        #[arg(long, default_value_t = 0)]
        beta_max: u32,
        /// Largest decay exponent N.
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// L² boundedness certificate, optionally after Sobolev reweighting.
    L2Cert {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the identity suite and write a pass/fail manifest.
    Verify {
        #[arg(long = "two-L", default_value_t = 8)]
        two_l: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("su2q: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("su2q: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("SU2Q_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Malformed(format!("SU2Q_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Malformed(e.to_string()))
}

/// Symbols from extraction are stored x-invariant when they are.
fn compact(sigma: Symbol) -> Symbol {
    if sigma.is_x_invariant() {
        return sigma;
    }
    sigma.to_invariant(1e-12).unwrap_or(sigma)
}

fn taylor_for(n: u32) -> CliResult<TaylorBasis> {
    let order = n.saturating_sub(1);
    Ok(TaylorBasis::new(order, &shared_grid((2 * order).max(2)))?)
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Grid { two_l, out } => write_json(&quadrature_grid(two_l).to_file(), out.as_ref()),
        Command::Synth { function, grid, out } => {
            let f = read_function(&function)?;
            let grid = read_grid(&grid)?;
            write_json(&SamplesFile::new(&synthesize(&f, &grid)), out.as_ref())
        }
        Command::Analyze { grid, samples, two_l, out } => {
            let grid = read_grid(&grid)?;
            let values = read_samples(&samples)?;
            let f = forward(&values, &grid, two_l)?;
            if f.approximate {
                eprintln!(
                    "su2q: grid exactness {} is below 2·two_L = {}; coefficients are approximate",
                    grid.exactness_two_l(),
                    2 * two_l
                );
            }
            write_json(&f.to_file(), out.as_ref())
        }
        Command::Apply { field, function, out } => {
            write_json(&apply_field(field, &read_function(&function)?).to_file(), out.as_ref())
        }
        Command::OpApply { symbol, function, out } => {
            let sigma = read_symbol(&symbol)?;
            let f = read_function(&function)?;
            write_json(&SymbolOperator(sigma).apply(&f)?.to_file(), out.as_ref())
        }
        Command::Extract { operator, two_l, out } => {
            let op = operator_from_spec(&operator)?;
            let grid = shared_grid((2 * op.x_band()).max(2));
            let sigma = compact(extract_symbol(op.as_ref(), two_l, grid)?);
            write_json(&sigma.to_file()?, out.as_ref())
        }
        Command::Compose { symbol, n, out } => {
            if symbol.len() != 2 {
                return Err(CliError::Malformed(format!("compose takes exactly two --symbol files, got {}", symbol.len())));
            }
            let (a, b) = (read_symbol(&symbol[0])?, read_symbol(&symbol[1])?);
            let result = compose_expansion(&a, &b, n, &taylor_for(n)?)?;
            write_json(&compact(result).to_file()?, out.as_ref())
        }
        Command::Adjoint { symbol, n, out } => {
            let result = adjoint_expansion(&read_symbol(&symbol)?, n, &taylor_for(n)?)?;
            write_json(&compact(result).to_file()?, out.as_ref())
        }
        Command::Diff { symbol, dir, out } => write_json(&difference(dir, &read_symbol(&symbol)?)?.to_file()?, out.as_ref()),
        Command::ClassReport { symbol, order, alpha_max, beta_max, n, out } => {
            let sigma = read_symbol(&symbol)?;
            let report = class_report(&sigma, order, alpha_max, beta_max, n, &default_u_samples())?;
            write_json(&report, out.as_ref())?;
            if report.all_pass() {
                Ok(())
            } else {
                Err(CliError::Failed(format!(
                    "{} of {} class checks failed at order {order}",
                    report.summary.failed, report.summary.total
                )))
            }
        }
        Command::L2Cert { symbol, mu, out } => {
            let sigma = read_symbol(&symbol)?;
            let sigma = if mu == 0.0 { sigma } else { sobolev_reweight(&sigma, mu) };
            write_json(&l2_bound_estimate(&sigma)?, out.as_ref())
        }
        Command::Verify { two_l, out } => {
            let manifest = verify::run_suite(two_l);
            write_json(&manifest, out.as_ref())?;
            for check in manifest.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: error {:e} > {:e}", check.name, check.max_error, check.tolerance);
            }
            if manifest.all_pass {
                Ok(())
            } else {
                Err(CliError::Failed(format!("{} of {} checks failed", manifest.failed, manifest.checks.len())))
            }
        }
    }
}
