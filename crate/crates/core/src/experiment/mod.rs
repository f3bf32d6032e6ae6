//! Grid experiments over `(alpha, beta)`: recovery rates and runtimes for the
//! full SDP and the sketch pipeline, with CSV and SVG heatmap output.

mod config;
mod svg;
mod table;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pipeline::{sketch_and_solve, GammaChoice, MuChoice, SketchConfig, TieRule};
use crate::rng::{tags, Seed};
use crate::sbm::{sample_sbm, LogScaleParams};
use crate::theory;

pub use config::parse_grid_config;
pub use svg::{emit_heatmap_svg, HeatmapLayout, HeatmapOptions, Metric, Overlay};
pub use table::{emit_csv, parse_csv, CSV_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    FullSdp,
    Sketch,
}

impl Method {
    fn code(self) -> u64 {
        match self {
            Method::FullSdp => 0,
            Method::Sketch => 1,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::FullSdp => "FULL_SDP",
            Method::Sketch => "SKETCH",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "FULL_SDP" | "FULL" => Ok(Method::FullSdp),
            "SKETCH" => Ok(Method::Sketch),
            other => Err(invalid(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GammaPolicy {
    /// `min{1, 4/(sqrt(alpha) - sqrt(beta))^2}` per cell.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MuPolicy {
    /// Edge density of the sampled graph.
    Auto,
    /// `mu = 1/2`
    Half,
    /// `mu = 1`
    Gw,
    /// Planted `(p + q)/2`.
    Oracle,
}

impl FromStr for MuPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(MuPolicy::Auto),
            "half" => Ok(MuPolicy::Half),
            "gw" => Ok(MuPolicy::Gw),
            "oracle" => Ok(MuPolicy::Oracle),
            other => Err(invalid(format!("unknown mu policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub n: usize,
    pub reps: usize,
    pub methods: Vec<Method>,
    pub gamma_policy: GammaPolicy,
    pub mu_policy: MuPolicy,
    pub base_seed: Seed,
    /// Community sizes; `None` is `(n/2, n/2)`.
    pub sizes: Option<(usize, usize)>,
    pub tie_rule: TieRule,
}

impl GridSpec {
    pub fn new(alphas: Vec<f64>, betas: Vec<f64>, n: usize, reps: usize) -> Self {
        GridSpec {
            alphas,
            betas,
            n,
            reps,
            methods: vec![Method::FullSdp, Method::Sketch],
            gamma_policy: GammaPolicy::Auto,
            mu_policy: MuPolicy::Auto,
            base_seed: Seed(0),
            sizes: None,
            tie_rule: TieRule::Fail,
        }
    }

    pub fn community_sizes(&self) -> (usize, usize) {
        self.sizes.unwrap_or((self.n / 2, self.n / 2))
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.betas.is_empty() || self.methods.is_empty() {
            return Err(invalid("grid needs at least one alpha, beta and method"));
        }
        if self.reps == 0 {
            return Err(invalid("reps must be positive"));
        }
        match self.sizes {
            Some((n1, n2)) => {
                if n1 == 0 || n2 == 0 || n1 + n2 != self.n {
                    return Err(invalid(format!(
                        "community sizes {n1} + {n2} must be positive and sum to n = {}",
                        self.n
                    )));
                }
            }
            None => {
                if self.n < 2 || self.n % 2 != 0 {
                    return Err(invalid(format!("n must be even and at least 2, got {}", self.n)));
                }
            }
        }
        if let GammaPolicy::Fixed(g) = self.gamma_policy {
            if !(g > 0.0 && g <= 1.0) {
                return Err(invalid(format!("gamma must lie in (0, 1], got {g}")));
            }
        }
        Ok(())
    }

    /// Seed of the sampled graph; shared by all methods of one replicate.
    pub fn graph_seed(&self, alpha_index: usize, beta_index: usize, rep: usize) -> Seed {
        self.base_seed
            .derive_path(&[alpha_index as u64, beta_index as u64, rep as u64])
            .derive(tags::GRAPH)
    }

    pub fn cell_seed(&self, alpha_index: usize, beta_index: usize, rep: usize, method: Method) -> Seed {
        self.base_seed.derive_path(&[
            alpha_index as u64,
            beta_index as u64,
            rep as u64,
            method.code(),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CellStatus {
    Ran { recovered: bool },
    Skipped,
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub alpha: f64,
    pub beta: f64,
    pub rep: usize,
    pub method: Method,
    pub n: usize,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    pub status: CellStatus,
    pub fell_back: bool,
    pub unassigned: usize,
    pub timings: crate::pipeline::StageTimings,
    pub seed: Seed,
}

impl CellResult {
    pub fn recovered(&self) -> bool {
        matches!(self.status, CellStatus::Ran { recovered: true })
    }

    pub fn is_skipped(&self) -> bool {
        self.status == CellStatus::Skipped
    }

    /// Solve, certify and extend time in milliseconds.
    pub fn runtime_ms(&self) -> f64 {
        self.timings.method().as_secs_f64() * 1e3
    }

    /// Same cell with timings cleared.
    pub fn without_timing(&self) -> CellResult {
        CellResult {
            timings: Default::default(),
            ..self.clone()
        }
    }
}

/// Short tag recorded for a failed cell.
fn error_tag(e: &Error) -> &'static str {
    match e {
        Error::EmptySketchSide(_) => "empty_sketch_side",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::TooLarge { .. } => "too_large",
        _ => "internal",
    }
}

struct Cell {
    ai: usize,
    bi: usize,
    rep: usize,
    method: Method,
}

fn run_cell(spec: &GridSpec, cell: &Cell) -> CellResult {
    let alpha = spec.alphas[cell.ai];
    let beta = spec.betas[cell.bi];
    let seed = spec.cell_seed(cell.ai, cell.bi, cell.rep, cell.method);
    let mut result = CellResult {
        alpha,
        beta,
        rep: cell.rep,
        method: cell.method,
        n: spec.n,
        gamma: None,
        mu: None,
        status: CellStatus::Skipped,
        fell_back: false,
        unassigned: 0,
        timings: Default::default(),
        seed,
    };
    if beta >= alpha {
        return result;
    }
    let outcome = (|| -> Result<()> {
        let (n1, n2) = spec.community_sizes();
        let scale = LogScaleParams { alpha, beta, n: spec.n };
        let (params, _) = scale.to_sbm_sizes(n1, n2)?;
        let (graph, planted) = sample_sbm(&params, spec.graph_seed(cell.ai, cell.bi, cell.rep));
        let gamma = match (cell.method, spec.gamma_policy) {
            (Method::FullSdp, _) => 1.0,
            (Method::Sketch, GammaPolicy::Fixed(g)) => g,
            (Method::Sketch, GammaPolicy::Auto) => theory::auto_gamma(alpha, beta)?,
        };
        result.gamma = Some(gamma);
        let mu = match spec.mu_policy {
            MuPolicy::Auto => MuChoice::Auto,
            MuPolicy::Half => MuChoice::Fixed(0.5),
            MuPolicy::Gw => MuChoice::Fixed(1.0),
            MuPolicy::Oracle => MuChoice::Fixed((params.p() + params.q()) / 2.0),
        };
        let mut config = SketchConfig::new(GammaChoice::Fixed(gamma), seed);
        config.mu = mu;
        config.tie_rule = spec.tie_rule;
        let out = sketch_and_solve(&graph, &config)?;
        result.mu = Some(out.mu_used);
        result.fell_back = out.fell_back_random;
        result.unassigned = out.unassigned.len();
        result.timings = out.timings;
        result.status = CellStatus::Ran {
            recovered: out.recovers(&planted),
        };
        Ok(())
    })();
    if let Err(e) = outcome {
        debug!("cell alpha={alpha} beta={beta} rep={} {}: {e}", cell.rep, cell.method);
        result.status = CellStatus::Error(error_tag(&e).to_string());
    }
    result
}

/// Run every `(alpha, beta, rep, method)` cell. Results come back in
/// alpha-major, then beta, rep, method order regardless of `jobs`.
pub fn run_grid(spec: &GridSpec, jobs: Option<usize>) -> Result<Vec<CellResult>> {
    spec.validate()?;
    let mut cells = Vec::new();
    for ai in 0..spec.alphas.len() {
        for bi in 0..spec.betas.len() {
            for rep in 0..spec.reps {
                for &method in &spec.methods {
                    cells.push(Cell { ai, bi, rep, method });
                }
            }
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = jobs {
        builder = builder.num_threads(k.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| invalid(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(|c| run_cell(spec, c)).collect()))
}

/// Per-`(alpha, beta)` aggregate for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub alpha: f64,
    pub beta: f64,
    pub runs: usize,
    pub recovered: usize,
    pub skipped: usize,
    pub mean_runtime: Option<Duration>,
}

impl CellSummary {
    /// Recovered over non-skipped runs; failed cells count against it.
    pub fn recovery_rate(&self) -> Option<f64> {
        (self.runs > 0).then(|| self.recovered as f64 / self.runs as f64)
    }
}

/// Summaries in first-appearance order of `(alpha, beta)`.
pub fn summarize(results: &[CellResult], method: Method) -> Vec<CellSummary> {
    let mut out: Vec<CellSummary> = Vec::new();
    let mut times: Vec<(Duration, usize)> = Vec::new();
    for r in results.iter().filter(|r| r.method == method) {
        let idx = match out.iter().position(|s| s.alpha == r.alpha && s.beta == r.beta) {
            Some(i) => i,
            None => {
                out.push(CellSummary {
                    alpha: r.alpha,
                    beta: r.beta,
                    runs: 0,
                    recovered: 0,
                    skipped: 0,
                    mean_runtime: None,
                });
                times.push((Duration::ZERO, 0));
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        match &r.status {
            CellStatus::Skipped => s.skipped += 1,
            CellStatus::Error(_) => s.runs += 1,
            CellStatus::Ran { recovered } => {
                s.runs += 1;
                s.recovered += usize::from(*recovered);
                times[idx].0 += r.timings.method();
                times[idx].1 += 1;
            }
        }
    }
    for (s, (total, count)) in out.iter_mut().zip(times) {
        if count > 0 {
            s.mean_runtime = Some(total / count as u32);
        }
    }
    out
}
