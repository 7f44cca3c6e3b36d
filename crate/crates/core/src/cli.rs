//! The `pipsolve` command line.
//!
//! Exit codes: 0 on success, 1 on usage or input-file errors, 2 on numerical
//! or configuration failures.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench::{fit_csv, run_experiment, ExperimentConfig, ExperimentKind, Method};
use crate::decomposition::Lambda;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::monomials::count_total;
use crate::nodegen::{assemble_generic, read_node_file, write_node_file, AssemblyConfig};
use crate::pipsolver::{solve, SolveReport, SolverConfig};
use crate::polynomial::{MultiPoly, PolyFile};
use crate::vandermonde::genericity_check;

/// Seed used when `--seed` is not given; always echoed on stderr.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "pipsolve", version, about = "Multivariate polynomial interpolation on generic nodes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the generic node file for (m, n).
    Nodes {
        #[command(flatten)]
        geometry: Geometry,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Interpolate a polynomial file or a builtin function.
    Solve {
        /// A polynomial JSON file, or one of runge, exp-sum, random-poly, random-poly(SEED).
        function: String,
        #[command(flatten)]
        geometry: Geometry,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Genericity report for a node file.
    Verify {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run an experiment and write its CSV.
    Bench {
        #[arg(long, default_value = "accuracy")]
        experiment: String,
        /// Degree or inclusive degree range `A..B`.
        #[arg(long, default_value = "3")]
        degree: String,
        /// Inclusive dimension range `A..B`.
        #[arg(long, default_value = "2..4")]
        dims: String,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Repeatable; defaults to all methods.
        #[arg(long = "method")]
        methods: Vec<String>,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        kappa: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit `p * N^q` to the timing and operation columns of a CSV.
    Fit {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Geometry {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    kappa: f64,
    /// Translation: one value per axis, or a single value for all axes.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    /// Orient the construction by a random orthonormal frame drawn from `--seed`.
    #[arg(long)]
    random_frame: bool,
    #[arg(long)]
    seed: Option<u64>,
}

impl Geometry {
    fn config(&self, m: usize) -> Result<AssemblyConfig> {
        let mut cfg = AssemblyConfig { kappa: self.kappa, ..Default::default() };
        if let Some(l) = &self.lambda {
            cfg.lambda = l.parse()?;
        }
        if let Some(mu) = &self.mu {
            cfg.mu = Some(parse_mu(mu, m)?);
        }
        if self.random_frame {
            let seed = echo_seed(self.seed);
            cfg.frame = Some(Frame::random(m, &mut ChaCha8Rng::seed_from_u64(seed)));
        }
        Ok(cfg)
    }

    fn dims(&self) -> Result<(usize, usize)> {
        match (self.m, self.n) {
            (Some(m), Some(n)) => Ok((m, n)),
            _ => Err(usage("--m and --n are required")),
        }
    }
}

/// Marker for errors that are the caller's fault rather than numerical.
fn usage(message: impl Into<String>) -> Error {
    Error::Usage(message.into())
}

fn echo_seed(seed: Option<u64>) -> u64 {
    let seed = seed.unwrap_or(DEFAULT_SEED);
    eprintln!("seed = {seed}");
    seed
}

fn parse_mu(text: &str, m: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("--mu: not a number: {s:?}"))))
        .collect::<Result<_>>()?;
    match values.len() {
        1 => Ok(vec![values[0]; m]),
        len if len == m => Ok(values),
        len => Err(usage(format!("--mu: expected 1 or {m} values, got {len}"))),
    }
}

/// `A..B`, `A..=B` or a single `A`, inclusive.
pub fn parse_range(text: &str) -> Result<RangeInclusive<usize>> {
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| usage(format!("not a range `A..B`: {text:?}")));
    let r = match text.split_once("..") {
        Some((a, b)) => num(a)?..=num(b.trim_start_matches('='))?,
        None => num(text)?..=num(text)?,
    };
    if r.is_empty() {
        return Err(usage(format!("empty range {text:?}")));
    }
    Ok(r)
}

/// Named functions accepted by `solve`.
#[derive(Debug, Clone)]
pub enum Builtin {
    /// `1 / (1 + 25 |x|^2)`.
    Runge,
    /// `exp(x_1 + ... + x_m)`.
    ExpSum,
    /// Degree-`n` polynomial with coefficients uniform in `[-1, 1]`.
    RandomPoly(u64),
}

impl Builtin {
    pub fn parse(name: &str, seed: Option<u64>) -> Option<Builtin> {
        match name {
            "runge" => Some(Builtin::Runge),
            "exp-sum" => Some(Builtin::ExpSum),
            "random-poly" => Some(Builtin::RandomPoly(echo_seed(seed))),
            _ => {
                let inner = name.strip_prefix("random-poly(")?.strip_suffix(')')?;
                inner.trim().parse().ok().map(Builtin::RandomPoly)
            }
        }
    }

    pub fn random_poly(seed: u64, m: usize, n: usize) -> Result<MultiPoly> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..count_total(m, n)?).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        MultiPoly::from_coeffs(m, n, coeffs)
    }
}

#[derive(Debug, serde::Serialize)]
struct SolveDocument {
    #[serde(flatten)]
    poly: PolyFile,
    report: RunReport,
}

#[derive(Debug, serde::Serialize)]
struct RunReport {
    #[serde(flatten)]
    counts: SolveReport,
    node_file: Option<String>,
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_text(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn cmd_nodes(geometry: &Geometry, output: &Option<PathBuf>) -> Result<()> {
    let (m, n) = geometry.dims()?;
    let asm = assemble_generic(m, n, &geometry.config(m)?)?;
    let mut w = open_output(output)?;
    write_node_file(&mut w, &asm.nodes, n)?;
    w.flush()?;
    Ok(())
}

fn cmd_solve(function: &str, geometry: &Geometry, output: &Option<PathBuf>) -> Result<()> {
    let path = Path::new(function);
    let (poly, m, n): (Box<dyn Fn(&[f64]) -> f64>, usize, usize) = if path.is_file() {
        let file: PolyFile = serde_json::from_str(&read_text(path)?)?;
        let q = file.into_poly()?;
        let (m, n) = (q.dim(), geometry.n.unwrap_or(q.degree()));
        if geometry.m.is_some_and(|gm| gm != m) {
            return Err(usage(format!("--m {} contradicts the polynomial file (m = {m})", geometry.m.unwrap())));
        }
        (Box::new(move |x: &[f64]| q.evaluate(x).unwrap_or(f64::NAN)), m, n)
    } else {
        let (m, n) = geometry.dims()?;
        let builtin = Builtin::parse(function, geometry.seed).ok_or_else(|| {
            usage(format!("{function:?} is neither a file nor a builtin (runge, exp-sum, random-poly)"))
        })?;
        let f: Box<dyn Fn(&[f64]) -> f64> = match builtin {
            Builtin::Runge => Box::new(|x: &[f64]| 1.0 / (1.0 + 25.0 * x.iter().map(|v| v * v).sum::<f64>())),
            Builtin::ExpSum => Box::new(|x: &[f64]| x.iter().sum::<f64>().exp()),
            Builtin::RandomPoly(seed) => {
                let q = Builtin::random_poly(seed, m, n)?;
                Box::new(move |x: &[f64]| q.evaluate(x).unwrap_or(f64::NAN))
            }
        };
        (f, m, n)
    };
    let cfg = SolverConfig { assembly: geometry.config(m)?, ..Default::default() };
    let sol = solve(poly, m, n, &cfg)?;

    let node_file = match output {
        Some(p) => {
            let mut name = p.clone().into_os_string();
            name.push(".nodes.csv");
            let node_path = PathBuf::from(name);
            write_node_file(io::BufWriter::new(File::create(&node_path)?), sol.nodes(), n)?;
            Some(node_path.display().to_string())
        }
        None => None,
    };
    let doc = SolveDocument { poly: sol.poly.to_file(), report: RunReport { counts: sol.report, node_file } };
    let mut w = open_output(output)?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn cmd_verify(file: &Path, output: &Option<PathBuf>) -> Result<()> {
    let (n, nodes) = read_node_file(BufReader::new(File::open(file)?))?;
    let report = genericity_check(&nodes, nodes.dim(), n)?;
    let mut w = open_output(output)?;
    writeln!(w, "{}", if report.generic { "generic" } else { "non-generic" })?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    experiment: &str,
    degree: &str,
    dims: &str,
    reps: usize,
    seed: Option<u64>,
    methods: &[String],
    lambda: &Option<String>,
    kappa: f64,
    mu: f64,
    output: &Option<PathBuf>,
) -> Result<()> {
    let kind: ExperimentKind = experiment.parse().map_err(|e: Error| usage(e.to_string()))?;
    let methods = if methods.is_empty() {
        Method::ALL.to_vec()
    } else {
        methods.iter().map(|s| s.parse().map_err(|e: Error| usage(e.to_string()))).collect::<Result<_>>()?
    };
    let cfg = ExperimentConfig {
        kind,
        dims: parse_range(dims)?,
        degrees: parse_range(degree)?,
        reps,
        seed: echo_seed(seed),
        methods,
        lambda: match lambda {
            Some(l) => l.parse()?,
            None => Lambda::default(),
        },
        kappa,
        mu,
    };
    let mut w = open_output(output)?;
    run_experiment(&cfg, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_fit(file: &Path, output: &Option<PathBuf>) -> Result<()> {
    let fits = fit_csv(&read_text(file)?)?;
    let mut w = open_output(output)?;
    for fit in fits {
        writeln!(w, "{}", serde_json::to_string(&fit)?)?;
    }
    w.flush()?;
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_)
        | Error::Parse { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_)
        | Error::CountMismatch { .. } => 1,
        _ => 2,
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn cli_main(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Nodes { geometry, output } => cmd_nodes(geometry, output),
        Command::Solve { function, geometry, output } => cmd_solve(function, geometry, output),
        Command::Verify { file, output } => cmd_verify(file, output),
        Command::Bench { experiment, degree, dims, reps, seed, methods, lambda, kappa, mu, output } => {
            cmd_bench(experiment, degree, dims, *reps, *seed, methods, lambda, *kappa, *mu, output)
        }
        Command::Fit { file, output } => cmd_fit(file, output),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
