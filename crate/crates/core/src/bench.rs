//! Experiment harness: coefficient accuracy, runtime scaling and
//! conditioning, written as CSV, plus `p * x^q` fits.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the experiment seed
//! and selected by `(m, n, rep)`, so rows do not depend on evaluation order.

use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::decomposition::Lambda;
use crate::error::{Error, Result};
use crate::instrument;
use crate::monomials::count_total;
use crate::nodegen::{assemble_generic, Assembly, AssemblyConfig};
use crate::pipsolver::{solve_values, Composition};
use crate::polynomial::MultiPoly;
use crate::vandermonde::{build_vandermonde, genericity_check, invert, lu_solve};

/// Columns holding wall-clock measurements; excluded when comparing runs.
pub const TIMING_COLUMNS: &[&str] = &["seconds"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    PipSolver,
    Linsolve,
    Inversion,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::PipSolver, Method::Linsolve, Method::Inversion];

    pub fn name(self) -> &'static str {
        match self {
            Method::PipSolver => "pip-solver",
            Method::Linsolve => "linsolve",
            Method::Inversion => "inversion",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}; expected pip-solver, linsolve or inversion")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Accuracy,
    Runtime,
    Conditioning,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accuracy" => Ok(ExperimentKind::Accuracy),
            "runtime" => Ok(ExperimentKind::Runtime),
            "conditioning" => Ok(ExperimentKind::Conditioning),
            _ => Err(Error::Config(format!("unknown experiment {s:?}; expected accuracy, runtime or conditioning"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub dims: RangeInclusive<usize>,
    pub degrees: RangeInclusive<usize>,
    pub reps: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub lambda: Lambda,
    pub kappa: f64,
    /// Translation applied to every coordinate of the nodes.
    pub mu: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Accuracy,
            dims: 2..=4,
            degrees: 3..=3,
            reps: 10,
            seed: 42,
            methods: Method::ALL.to_vec(),
            lambda: Lambda::default(),
            kappa: 1.0,
            mu: 0.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.dims.is_empty() || self.degrees.is_empty() || *self.dims.start() == 0 {
            return Err(Error::Config("dimension and degree ranges must be non-empty, dimensions from 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        Ok(())
    }

    fn assembly(&self, m: usize, rescale: bool) -> AssemblyConfig {
        AssemblyConfig {
            lambda: self.lambda.clone(),
            kappa: self.kappa,
            mu: (self.mu != 0.0).then(|| vec![self.mu; m]),
            rescale,
            ..Default::default()
        }
    }

    fn grid(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.dims.clone().flat_map(move |m| self.degrees.clone().map(move |n| (m, n)))
    }

    fn methods(&self) -> Vec<Method> {
        let mut methods = self.methods.clone();
        methods.sort();
        methods.dedup();
        methods
    }
}

/// The random stream owned by one `(m, n, rep)` cell.
pub fn substream(seed: u64, m: usize, n: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((m as u64) << 40) | ((n as u64) << 20) | rep as u64);
    rng
}

/// `{:.16e}` (17 significant digits), with `inf` and `nan` spelled out.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// SHA-256 of the node coordinates followed by the values, little-endian.
pub fn input_checksum(nodes: &[f64], values: &[f64]) -> String {
    let mut h = Sha256::new();
    for x in nodes.iter().chain(values) {
        h.update(x.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Coefficients of the interpolant of `values` on `asm` by `method`.
pub fn run_method(method: Method, asm: &Assembly, values: &[f64]) -> Result<Vec<f64>> {
    match method {
        Method::PipSolver => Ok(solve_values(asm, values, Composition::Merge)?.0.into_coeffs()),
        Method::Linsolve => {
            let v = build_vandermonde(&asm.nodes, asm.m, asm.n)?;
            Ok(lu_solve(&v, values)?.x)
        }
        Method::Inversion => {
            let v = build_vandermonde(&asm.nodes, asm.m, asm.n)?;
            Ok(invert(&v)?.mul_vec(values))
        }
    }
}

fn uniform_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

pub const ACCURACY_HEADER: &[&str] = &["m", "n", "N", "method", "rep", "coeff_error_inf", "input_sha256"];
pub const RUNTIME_HEADER: &[&str] = &["m", "n", "N", "method", "rep", "seconds", "multiply_adds"];
pub const CONDITIONING_HEADER: &[&str] = &["m", "n", "N", "cond_1", "cond_2_or_blank", "bound_Nsq", "within_bound"];

/// Random coefficients, one shared node set and value vector per repetition,
/// `||C - C_method||_inf` per method. A failing method records `inf`.
pub fn experiment_accuracy<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<()> {
    cfg.validate()?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ACCURACY_HEADER)?;
    for (m, n) in cfg.grid() {
        let big_n = count_total(m, n)?;
        let asm = assemble_generic(m, n, &cfg.assembly(m, false))?;
        for rep in 0..cfg.reps {
            let mut rng = substream(cfg.seed, m, n, rep);
            let c = uniform_vec(&mut rng, big_n);
            let f = MultiPoly::from_coeffs(m, n, c.clone())?;
            let values: Vec<f64> = asm.nodes.iter().map(|(p, _)| f.evaluate(p)).collect::<Result<_>>()?;
            let checksum = input_checksum(asm.nodes.coords(), &values);
            for method in cfg.methods() {
                let err = match run_method(method, &asm, &values) {
                    Ok(chat) => c.iter().zip(&chat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
                    Err(_) => f64::INFINITY,
                };
                w.write_record([
                    m.to_string(),
                    n.to_string(),
                    big_n.to_string(),
                    method.to_string(),
                    rep.to_string(),
                    format_real(err),
                    checksum.clone(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Wall time and counted multiply-adds of node generation plus solve, on
/// random values.
pub fn experiment_runtime<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<()> {
    cfg.validate()?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUNTIME_HEADER)?;
    for (m, n) in cfg.grid() {
        let big_n = count_total(m, n)?;
        let acfg = cfg.assembly(m, false);
        for rep in 0..cfg.reps {
            let values = uniform_vec(&mut substream(cfg.seed, m, n, rep), big_n);
            for method in cfg.methods() {
                let start = Instant::now();
                let (result, usage) = instrument::measure(|| {
                    let asm = assemble_generic(m, n, &acfg)?;
                    run_method(method, &asm, &values)
                });
                let seconds = start.elapsed().as_secs_f64();
                let ops = if result.is_ok() { usage.multiply_adds.to_string() } else { "inf".into() };
                w.write_record([
                    m.to_string(),
                    n.to_string(),
                    big_n.to_string(),
                    method.to_string(),
                    rep.to_string(),
                    format_real(if result.is_ok() { seconds } else { f64::INFINITY }),
                    ops,
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// One conditioning row.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningRow {
    pub m: usize,
    pub n: usize,
    pub big_n: usize,
    pub cond_1: f64,
    pub cond_2: Option<f64>,
}

impl ConditioningRow {
    pub fn bound(&self) -> f64 {
        (self.big_n as f64).powi(2)
    }

    pub fn within_bound(&self) -> bool {
        self.cond_1 <= self.bound()
    }
}

/// Condition numbers of the Vandermonde matrix of the assembled nodes, mapped
/// into `[-1, 1]^m` first. Non-generic sets report `cond_1 = inf`.
pub fn conditioning_row(m: usize, n: usize, cfg: &AssemblyConfig) -> Result<ConditioningRow> {
    let asm = assemble_generic(m, n, cfg)?;
    let report = genericity_check(&asm.nodes, m, n)?;
    Ok(ConditioningRow {
        m,
        n,
        big_n: asm.nodes.len(),
        cond_1: report.cond_1.unwrap_or(f64::NAN),
        cond_2: report.cond_2,
    })
}

pub fn experiment_conditioning<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<()> {
    cfg.validate()?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CONDITIONING_HEADER)?;
    for (m, n) in cfg.grid() {
        let row = conditioning_row(m, n, &cfg.assembly(m, true))?;
        w.write_record([
            m.to_string(),
            n.to_string(),
            row.big_n.to_string(),
            format_real(row.cond_1),
            row.cond_2.map(format_real).unwrap_or_default(),
            format_real(row.bound()),
            row.within_bound().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_experiment<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<()> {
    match cfg.kind {
        ExperimentKind::Accuracy => experiment_accuracy(cfg, out),
        ExperimentKind::Runtime => experiment_runtime(cfg, out),
        ExperimentKind::Conditioning => experiment_conditioning(cfg, out),
    }
}

/// Drops the [`TIMING_COLUMNS`] from a CSV document.
pub fn strip_timing_columns(text: &str) -> Result<String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let keep: Vec<usize> = (0..headers.len()).filter(|&i| !TIMING_COLUMNS.contains(&&headers[i])).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(keep.iter().map(|&i| &headers[i]))?;
    for rec in r.records() {
        let rec = rec?;
        w.write_record(keep.iter().map(|&i| &rec[i]))?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).map_err(|e| Error::Config(e.to_string()))
}

/// `y ~ p x^q`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FitResult {
    pub p: f64,
    pub q: f64,
    pub r_squared: f64,
}

/// Least squares on `(ln x, ln y)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::Config(format!("a power-law fit needs at least 3 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::NonPositiveData { x, y });
    }
    let k = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all x values coincide".into()));
    }
    let q = sxy / sxx;
    let intercept = my - q * mx;
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - q * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(FitResult { p: intercept.exp(), q, r_squared })
}

/// One fit per `(method, column)` of a runtime or accuracy CSV, with `x = N`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CsvFit {
    pub method: String,
    pub column: String,
    #[serde(flatten)]
    pub fit: FitResult,
}

/// Fits `seconds` and `multiply_adds` (whichever are present) against `N`
/// for every method in the file. Rows with non-finite values are skipped.
pub fn fit_csv(text: &str) -> Result<Vec<CsvFit>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let n_col = col("N").ok_or_else(|| Error::Parse { line: 1, message: "missing column `N`".into() })?;
    let method_col = col("method");
    let targets: Vec<(&str, usize)> =
        ["seconds", "multiply_adds"].into_iter().filter_map(|c| col(c).map(|i| (c, i))).collect();
    if targets.is_empty() {
        return Err(Error::Parse { line: 1, message: "no `seconds` or `multiply_adds` column to fit".into() });
    }
    let mut series: Vec<(String, &str, Vec<(f64, f64)>)> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let method = method_col.map_or("all", |c| &rec[c]).to_string();
        let x: f64 = rec[n_col]
            .parse()
            .map_err(|_| Error::Parse { line, message: format!("field `N`: not a number: {:?}", &rec[n_col]) })?;
        for &(name, c) in &targets {
            let y: f64 = rec[c]
                .parse()
                .map_err(|_| Error::Parse { line, message: format!("field `{name}`: not a number: {:?}", &rec[c]) })?;
            if !y.is_finite() {
                continue;
            }
            match series.iter_mut().find(|(m, n, _)| *m == method && *n == name) {
                Some((_, _, pts)) => pts.push((x, y)),
                None => series.push((method.clone(), name, vec![(x, y)])),
            }
        }
    }
    series
        .into_iter()
        .map(|(method, column, pts)| Ok(CsvFit { method, column: column.into(), fit: fit_power_law(&pts)? }))
        .collect()
}
