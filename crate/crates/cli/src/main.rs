//! `affval`: command-line front end for the affval library.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

const SCHEMAS: &str = "\
JSON formats

  Polytope (POLY), either description or both:
    {\"dim\": n, \"vertices\": [[x1, ..], ..]}
    {\"halfspaces\": [{\"normal\": [..], \"offset\": r}, ..]}     (normal . x <= offset)

  Function:
    {\"type\": \"pa\", \"pieces\": [{\"grad\": [..], \"c\": r}, ..], \"domain\": POLY | null}
        max of the affine pieces, +inf outside the domain
    {\"type\": \"plq\", \"cells\": [{\"poly\": POLY, \"A\": [[..]], \"b\": [..], \"c\": r}, ..]}
        1/2 x'Ax + b.x + c on each cell; convexity is certified on input
    {\"type\": \"indicator\", \"domain\": POLY}
    {\"type\": \"quadratic\", \"A\": [[..]], \"b\": [..], \"c\": r, \"domain\": POLY | null}

  Evaluation grid (envelope --eval-grid):
    {\"lo\": [..], \"hi\": [..], \"per_axis\": k}   or   {\"points\": [[..], ..]}

  Experiment config (experiment usc --config):
    {\"kind\": \"staircase\", \"s\": 0, \"a\": 1, \"r\": 2, \"n\": 2, \"m\": [1, 2, 4, 8], \"zeta\": \"sqrt\"}
    {\"kind\": \"pa-approximate\", \"function\": FUNCTION, \"k\": [2, 4, 8], \"zeta\": \"sqrt\"}
    optional: \"c0\", \"c1\" (valuation c0 + c1 V_n(dom u) + Z_zeta(u)), \"t1\", \"t2\" (staircase)

  zeta: power:P (0 < P < 1), sqrt, min:C, zero

Numbers are written in shortest round-trip form; +inf is written as null in
JSON and as inf in CSV.

Exit codes: 0 success, 1 a check failed, 2 usage or input error.
AFFVAL_THREADS caps the number of worker threads.";

#[derive(Parser)]
#[command(name = "affval", version, about = "Convex functions on polytopes: conjugates, envelopes, Monge-Ampere measures and affine surface area valuations", after_long_help = SCHEMAS)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct OutArg {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a function at points.
    Eval {
        file: PathBuf,
        /// Comma-separated coordinates; repeatable.
        #[arg(long = "at", required = true, allow_hyphen_values = true)]
        at: Vec<String>,
    },
    /// Legendre transform of a PA function or a quadratic on R^n.
    Conjugate {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Infimal convolution of two PA functions with compact domains.
    Infconv {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Moreau-box envelope u □ (λ/2|.|² + I_{μC}) on a grid; CSV x1..xn,value.
    Envelope {
        #[arg(long)]
        lambda: f64,
        /// Box half-width; omit for the plain Moreau envelope.
        #[arg(long)]
        mu: Option<f64>,
        file: PathBuf,
        #[arg(long = "eval-grid")]
        eval_grid: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Monge-Ampere measure of a finite-valued PA function.
    Ma { file: PathBuf },
    /// Z_zeta(u) = ∫ zeta(det D²u) over dom u.
    Zvalue {
        #[arg(long, default_value = "sqrt")]
        zeta: String,
        file: PathBuf,
        /// Quadrature resolution per axis for functions without a closed form.
        #[arg(long, default_value_t = 128)]
        res: usize,
    },
    /// Seeded check suite; CSV summary on stdout.
    Check {
        /// involution, identities, infconv, ma, valuation, invariance or closed-form
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Replace every check's tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the full CheckReport array as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Build one of the sequence constructions as function JSON.
    Construct {
        #[command(subcommand)]
        what: Construct,
    },
    /// Finite-horizon experiments; CSV index,z_value,gap on stdout.
    Experiment {
        #[command(subcommand)]
        what: Experiment,
    },
}

#[derive(Subcommand)]
enum Construct {
    Staircase {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
        #[arg(long, default_value_t = 1.0)]
        t2: f64,
        #[command(flatten)]
        out: OutArg,
    },
    Degenerate {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[command(flatten)]
        out: OutArg,
    },
    Zonotope {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Upper semicontinuity along a sequence.
    Usc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = std::env::var("AFFVAL_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if k > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
    match commands::run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("affval: {e:#}");
            ExitCode::from(2)
        }
    }
}
