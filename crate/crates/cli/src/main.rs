//! `elliptheta`: evaluate theta functions and elliptic series, interpolate
//! elliptic Askey-Wilson polynomials, and verify the identity catalog.

mod commands;
mod literal;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use elliptheta::Complex64;

/// Exit status 0 means success, 1 a failed verification, 2 a usage or
/// configuration error.
#[derive(Parser, Debug)]
#[command(name = "elliptheta", version, about = "Theta functions, elliptic hypergeometric series and elliptic interpolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a single function and print its value.
    Eval {
        #[command(subcommand)]
        func: EvalFn,
    },
    /// Expansion coefficients, interpolants and coefficient recovery.
    Interpolate {
        #[command(subcommand)]
        method: InterpMethod,
    },
    /// Check the identity catalog on random admissible parameters.
    Verify(VerifyArgs),
    /// Tabulate catalog cases or a function along a ray.
    Table {
        #[command(subcommand)]
        what: TableKind,
    },
}

fn cx(s: &str) -> Result<Complex64, String> {
    literal::complex(unshield(s))
}

fn int<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    unshield(s).parse().map_err(|_| format!("{:?} is not an integer in range", unshield(s)))
}

/// Negative literals such as `-0.3,0.1` would be read as flags; a leading
/// space marks them as values and the value parsers strip it again.
fn shield(arg: OsString) -> OsString {
    match arg.to_str() {
        Some(s) if s.len() > 1 && s.starts_with('-') && matches!(s.as_bytes()[1], b'0'..=b'9' | b'.') => format!(" {s}").into(),
        _ => arg,
    }
}

fn unshield(s: &str) -> &str {
    s.strip_prefix(' ').unwrap_or(s)
}

#[derive(Subcommand, Debug)]
enum EvalFn {
    /// θ(x;p)
    Theta {
        #[arg(value_parser = cx)]
        x: Complex64,
        #[arg(value_parser = cx)]
        p: Complex64,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// (x;p)_n for any integer n
    Pochhammer {
        #[arg(value_parser = cx)]
        x: Complex64,
        #[arg(value_parser = cx)]
        p: Complex64,
        #[arg(value_parser = int::<i64>)]
        n: i64,
    },
    /// (x;p)_∞
    PochhammerInf {
        #[arg(value_parser = cx)]
        x: Complex64,
        #[arg(value_parser = cx)]
        p: Complex64,
    },
    /// (x;q,p)_n
    QpFactorial {
        #[arg(value_parser = cx)]
        x: Complex64,
        #[arg(value_parser = cx)]
        q: Complex64,
        #[arg(value_parser = cx)]
        p: Complex64,
        #[arg(value_parser = int::<i64>)]
        n: i64,
    },
    /// P(x) and Q(x), one per line
    Pq {
        #[arg(value_parser = cx)]
        x: Complex64,
        #[arg(value_parser = cx)]
        p: Complex64,
    },
    /// Elliptic binomial coefficient [n k]
    Binomial {
        #[arg(value_parser = int::<u32>)]
        n: u32,
        #[arg(value_parser = int::<u32>)]
        k: u32,
        #[arg(value_parser = cx)]
        q: Complex64,
        #[arg(value_parser = cx)]
        p: Complex64,
    },
    /// Terminating 10V9(a; b, c, d, e, q^-n; q, p)
    V10v9 {
        #[arg(value_parser = cx)]
        a: Complex64,
        #[arg(value_parser = cx)]
        b: Complex64,
        #[arg(value_parser = cx)]
        c: Complex64,
        #[arg(value_parser = cx)]
        d: Complex64,
        #[arg(value_parser = cx)]
        e: Complex64,
        #[arg(value_parser = int::<u32>)]
        n: u32,
        #[arg(value_parser = cx)]
        q: Complex64,
        #[arg(value_parser = cx)]
        p: Complex64,
    },
    /// Terminating very-well-poised series with numerator parameters UPPER;
    /// one of them must be q^-n.
    Vwp {
        /// Argument of the series (the q^k factor corresponds to 1).
        #[arg(long, value_parser = cx, default_value = "1")]
        argument: Complex64,
        #[arg(value_parser = cx)]
        a1: Complex64,
        #[arg(value_parser = cx)]
        q: Complex64,
        #[arg(value_parser = cx)]
        p: Complex64,
        #[arg(value_parser = cx, required = true)]
        upper: Vec<Complex64>,
    },
    /// Elliptic Askey-Wilson polynomial from a JSON file, at each point
    Eaw {
        /// Polynomial JSON (`-` reads stdin).
        poly: PathBuf,
        #[arg(value_parser = cx, required = true)]
        points: Vec<Complex64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Series,
    Product,
    Auto,
}

#[derive(Args, Debug)]
struct NodeArgs {
    /// Nodes b_0..b_N.
    #[arg(long, value_parser = cx, num_args = 1.., required = true)]
    b: Vec<Complex64>,
    /// Nodes x_1..x_N.
    #[arg(long, value_parser = cx, num_args = 0..)]
    x: Vec<Complex64>,
}

#[derive(Subcommand, Debug)]
enum InterpMethod {
    /// Coefficients H_k of a polynomial over the mixed theta basis with nodes b, x
    Wang {
        #[arg(long)]
        poly: PathBuf,
        #[command(flatten)]
        nodes: NodeArgs,
        /// Also print the reconstructed value at these points.
        #[arg(long, value_parser = cx, num_args = 1..)]
        at: Vec<Complex64>,
    },
    /// Same expansion with the x-nodes taken in reverse order
    Chenfu {
        #[arg(long)]
        poly: PathBuf,
        #[command(flatten)]
        nodes: NodeArgs,
        #[arg(long, value_parser = cx, num_args = 1..)]
        at: Vec<Complex64>,
    },
    /// Theta Lagrange interpolation through values at nodes b_0..b_N; prints
    /// the coefficients of the interpolant, then its values at --at points
    ThetaLagrange {
        #[arg(long, value_parser = cx)]
        p: Complex64,
        /// Checked against the node count; picks default nodes when --b is absent.
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, value_parser = cx, num_args = 1..)]
        b: Vec<Complex64>,
        #[arg(long, value_parser = cx, num_args = 1.., conflicts_with = "poly")]
        values: Vec<Complex64>,
        /// Take the node values from this polynomial.
        #[arg(long)]
        poly: Option<PathBuf>,
        #[arg(long, value_parser = cx, num_args = 1..)]
        at: Vec<Complex64>,
    },
    /// Ordinary polynomial Lagrange interpolation, evaluated at --at points
    Lagrange {
        #[arg(long, value_parser = cx, num_args = 1.., required = true)]
        nodes: Vec<Complex64>,
        #[arg(long, value_parser = cx, num_args = 1.., required = true)]
        values: Vec<Complex64>,
        #[arg(long, value_parser = cx, num_args = 1.., required = true)]
        at: Vec<Complex64>,
    },
    /// Coefficients over the rational mixed basis from values f(b_0..b_N)
    Mixed {
        #[arg(long, value_enum, default_value_t = VariantArg::A)]
        variant: VariantArg,
        #[command(flatten)]
        nodes: NodeArgs,
        #[arg(long, value_parser = cx, num_args = 1.., required = true)]
        values: Vec<Complex64>,
    },
    /// Coefficients of prefactor · x^n ∏ θ(a_i x, a_i/x; p), printed as polynomial JSON
    Recover {
        #[arg(long, value_parser = cx)]
        p: Complex64,
        #[arg(long, value_parser = cx, num_args = 0..)]
        factors: Vec<Complex64>,
        #[arg(long, value_parser = cx, default_value = "1")]
        prefactor: Complex64,
        /// Degree to fit; defaults to the number of factors.
        #[arg(long)]
        degree: Option<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum VariantArg {
    A,
    B,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Comma-separated case id substrings; empty runs every case.
    #[arg(long, default_value = "")]
    filter: String,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overrides each case's own tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Fix the nome instead of sampling it.
    #[arg(long, value_parser = cx)]
    p: Option<Complex64>,
    /// Fix the base instead of sampling it.
    #[arg(long, value_parser = cx)]
    q: Option<Complex64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also perturb each passing trial and count how often the identity breaks (text format only).
    #[arg(long)]
    mutation: bool,
}

#[derive(Subcommand, Debug)]
enum TableKind {
    /// Catalog ids with family, default tolerance and summary
    Cases {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// θ(x;p) at `steps` points from `from` to `to`
    Theta {
        #[arg(value_parser = cx)]
        p: Complex64,
        #[arg(long, value_parser = cx)]
        from: Complex64,
        #[arg(long, value_parser = cx)]
        to: Complex64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
    /// P(x) and Q(x) at `steps` points from `from` to `to`
    Pq {
        #[arg(value_parser = cx)]
        p: Complex64,
        #[arg(long, value_parser = cx)]
        from: Complex64,
        #[arg(long, value_parser = cx)]
        to: Complex64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
}

fn main() -> ExitCode {
    // exit quietly when the reader of a pipe goes away, as `head` does
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse_from(std::env::args_os().map(shield));
    let out = match cli.command {
        Command::Eval { func } => commands::eval(func),
        Command::Interpolate { method } => commands::interpolate(method),
        Command::Verify(args) => commands::verify(args),
        Command::Table { what } => commands::table(what),
    };
    match out {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
