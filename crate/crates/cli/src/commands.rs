//! Subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use kaczmarz::analysis::{minimize_rayleigh, verify_theorem, VerifyConfig};
use kaczmarz::generators::GeneratorSpec;
use kaczmarz::io::{fmt_scalar, load_matrix, load_vector, save_matrix, save_vector};
use kaczmarz::kaczmarz::{SolveConfig, StopReason};
use kaczmarz::linalg::{norm, residual_norm, svd};
use kaczmarz::{Error, Result};

use crate::{GenerateArgs, Kind, RayleighArgs, SolveArgs, VerifyArgs};

/// `--seed`, then `KACZMARZ_DEFAULT_SEED`, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("KACZMARZ_DEFAULT_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!(
                "KACZMARZ_DEFAULT_SEED must be an unsigned 64-bit integer, got `{v}`"
            ))
        }),
        Err(_) => Ok(0),
    }
}

/// Writes CSV to `--out` or stdout.
fn write_output<F>(out: &Option<PathBuf>, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn require<T>(value: Option<T>, what: &str, kind: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidArgument(format!("--{what} is required for --kind {kind}")))
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    let spec = match args.kind {
        Kind::Diagonal => GeneratorSpec::Diagonal {
            entries: require(args.entries, "entries", "diagonal")?,
        },
        Kind::Planted => {
            let n = args.n.unwrap_or(100);
            GeneratorSpec::Planted {
                n,
                shift: args.shift.unwrap_or(10.0 * (n as f64).sqrt()),
                perturb: args.perturb,
                seed: resolve_seed(args.seed)?,
            }
        }
        Kind::Consistent => GeneratorSpec::Consistent {
            m: require(args.m, "m", "consistent")?,
            n: require(args.n, "n", "consistent")?,
            seed: resolve_seed(args.seed)?,
        },
    };

    match spec.build()? {
        kaczmarz::generators::GeneratedSystem::Matrix(a) => {
            save_matrix(&args.out, &a)?;
            eprintln!("wrote {}x{} matrix to {}", a.rows(), a.cols(), args.out.display());
        }
        kaczmarz::generators::GeneratedSystem::System { a, true_x, b } => {
            let x_path = args.out.with_extension("x");
            let b_path = args.out.with_extension("b");
            save_matrix(&args.out, &a)?;
            save_vector(&x_path, &true_x)?;
            save_vector(&b_path, &b)?;
            eprintln!(
                "wrote {}x{} system to {} (solution {}, rhs {})",
                a.rows(),
                a.cols(),
                args.out.display(),
                x_path.display(),
                b_path.display()
            );
        }
    }
    Ok(())
}

fn load_vector_or(path: &Option<PathBuf>, len: usize) -> Result<Vec<f64>> {
    match path {
        Some(p) => load_vector(Path::new(p)),
        None => Ok(vec![0.0; len]),
    }
}

pub fn solve(args: SolveArgs) -> Result<()> {
    let a = load_matrix(&args.matrix)?;
    let b = load_vector_or(&args.b, a.rows())?;
    let x0 = load_vector_or(&args.x0, a.cols())?;
    let true_x = args.true_x.as_deref().map(load_vector).transpose()?;
    if args.track_coefficients && true_x.is_none() {
        return Err(Error::InvalidArgument(
            "--track-coefficients needs --true-x to define the error".into(),
        ));
    }

    let cfg = SolveConfig {
        seed: resolve_seed(args.seed)?,
        max_iters: args.iters,
        residual_tol: args.tol,
        trace_every: args.trace_every,
        track_coefficients: args.track_coefficients,
    };
    let factorization = if args.track_coefficients {
        Some(svd(&a)?)
    } else {
        None
    };

    let outcome = kaczmarz::kaczmarz::solve(
        &a,
        &b,
        &x0,
        &cfg,
        true_x.as_deref(),
        factorization.as_ref(),
    )?;

    write_output(&args.out, |w| outcome.trace.write_csv(w))?;

    let final_residual = residual_norm(&a, &b, &outcome.x);
    let stop = match outcome.stop {
        StopReason::ResidualTol => "residual tolerance",
        StopReason::MaxIters => "iteration limit",
    };
    let mut summary = format!(
        "stopped at iteration {} ({stop}); final residual {}",
        outcome.iterations,
        fmt_scalar(final_residual)
    );
    if let Some(tx) = &true_x {
        let err: f64 = outcome
            .x
            .iter()
            .zip(tx)
            .map(|(xi, ti)| (xi - ti) * (xi - ti))
            .sum::<f64>()
            .sqrt();
        summary.push_str(&format!("; final error {}", fmt_scalar(err)));
    }
    eprintln!("{summary}");
    Ok(())
}

/// Exit code 0 when every check passes, 1 otherwise.
pub fn verify(args: VerifyArgs) -> Result<i32> {
    let a = load_matrix(&args.matrix)?;
    let cfg = VerifyConfig {
        theorem: args.theorem,
        seed: resolve_seed(args.seed)?,
        trials: args.trials,
        mc_iters: args.iters,
        ..VerifyConfig::default()
    };
    let report = verify_theorem(&a, &cfg)?;
    write_output(&args.out, |w| report.write_csv(w))?;
    eprintln!("{}", report.summary());
    Ok(if report.pass { 0 } else { 1 })
}

pub fn rayleigh(args: RayleighArgs) -> Result<()> {
    let a = load_matrix(&args.matrix)?;
    let x0 = match &args.x0 {
        Some(p) => load_vector(p)?,
        None => vec![1.0; a.cols()],
    };
    let cfg = SolveConfig {
        seed: resolve_seed(args.seed)?,
        max_iters: args.iters,
        residual_tol: 0.0,
        trace_every: args.trace_every,
        track_coefficients: false,
    };
    let factorization = svd(&a)?;
    let outcome = minimize_rayleigh(&a, &x0, &cfg, Some(&factorization))?;

    write_output(&args.out, |w| outcome.trace.write_rayleigh_csv(w))?;

    let n = a.cols();
    let final_norm = norm(&outcome.x);
    let quotient = if final_norm > 0.0 {
        fmt_scalar(norm(&kaczmarz::linalg::matvec(&a, &outcome.x)?) / final_norm)
    } else {
        "undefined (iterate reached zero)".into()
    };
    let mut summary = format!(
        "after {} iterations: quotient {quotient}; sigma_n = {}",
        outcome.iterations,
        fmt_scalar(factorization.sigma()[n - 1])
    );
    if n >= 2 {
        summary.push_str(&format!(
            ", sigma_(n-1) = {}",
            fmt_scalar(factorization.sigma()[n - 2])
        ));
    }
    eprintln!("{summary}");
    Ok(())
}
