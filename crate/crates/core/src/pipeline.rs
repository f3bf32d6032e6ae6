//! Sketch-and-solve recovery of a planted bisection.
//!
//! 1. `mu` from the edge density of the full graph.
//! 2. Keep each vertex with probability `gamma`.
//! 3. Solve the `(A, mu)` SDP on the induced subgraph.
//! 4. Accept the rounded cut if it is rank one and certified; otherwise use a
//!    random partition of the sketch.
//! 5. Every other vertex joins the side it has strictly more edges to.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::{check_certificate, CertificateReport, CertificateTolerances, Verdict};
use crate::encoding::estimate_mu;
use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, Partition, Side};
use crate::rng::{tags, Seed};
use crate::sbm::bernoulli_vertex_sample;
use crate::sdp::{solve_sdp, SdpSolution, SolverConfig};
use crate::theory;

/// Largest `rank_one_gap` accepted as a rank-one solution.
pub const RANK_ONE_GAP_TOLERANCE: f64 = 1e-6;

/// What to do with a vertex that has equally many edges to both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TieRule {
    /// Leave it unassigned and report it.
    #[default]
    Fail,
    /// Put it on the plus side.
    ToFirst,
    /// Fair coin.
    Random,
}

impl std::str::FromStr for TieRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "fail" => Ok(TieRule::Fail),
            "to_first" | "first" => Ok(TieRule::ToFirst),
            "random" => Ok(TieRule::Random),
            other => Err(invalid(format!("unknown tie rule '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GammaChoice {
    Fixed(f64),
    /// `min{1, 4/(sqrt(alpha) - sqrt(beta))^2}`
    Auto { alpha: f64, beta: f64 },
}

impl GammaChoice {
    pub fn resolve(self) -> Result<f64> {
        let gamma = match self {
            GammaChoice::Fixed(g) => g,
            GammaChoice::Auto { alpha, beta } => theory::auto_gamma(alpha, beta)?,
        };
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(invalid(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        Ok(gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum MuChoice {
    /// Edge density of the full graph.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchConfig {
    pub gamma: GammaChoice,
    pub mu: MuChoice,
    pub seed: Seed,
    pub solver: SolverConfig,
    pub certify: bool,
    pub certificate: CertificateTolerances,
    pub tie_rule: TieRule,
}

impl SketchConfig {
    pub fn new(gamma: GammaChoice, seed: Seed) -> Self {
        SketchConfig {
            gamma,
            mu: MuChoice::Auto,
            seed,
            solver: SolverConfig::default().with_seed(seed.derive(tags::METHOD)),
            certify: true,
            certificate: CertificateTolerances::default(),
            tie_rule: TieRule::Fail,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub estimate: Duration,
    pub sample: Duration,
    pub solve: Duration,
    pub certify: Duration,
    pub extend: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.estimate + self.sample + self.solve + self.certify + self.extend
    }

    /// Solve, certify and extend: the part attributed to the method itself.
    pub fn method(&self) -> Duration {
        self.solve + self.certify + self.extend
    }
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    /// Covers every vertex except those in `unassigned`.
    pub full_partition: Partition,
    /// Ids of the sketched vertices.
    pub sketch_vertices: Vec<usize>,
    pub sketch_partition: Partition,
    pub mu_used: f64,
    pub gamma_used: f64,
    pub sdp: SdpSolution,
    pub certificate: Option<CertificateReport>,
    pub fell_back_random: bool,
    /// Ids left on a tie under [`TieRule::Fail`].
    pub unassigned: Vec<usize>,
    pub timings: StageTimings,
}

impl PipelineResult {
    /// Exact recovery up to swapping the sides.
    pub fn recovers(&self, planted: &Partition) -> bool {
        self.unassigned.is_empty() && self.full_partition.equal_up_to_flip(planted)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoteOutcome {
    pub partition: Partition,
    /// Ids of tied vertices (only under [`TieRule::Fail`]).
    pub unassigned: Vec<usize>,
}

impl VoteOutcome {
    pub fn is_complete(&self) -> bool {
        self.unassigned.is_empty()
    }
}

/// Extend the sketch sides `r1` (plus) and `r2` (minus), given as local
/// indices, to the whole graph by strict majority of edges.
pub fn vote_extend(
    graph: &Graph,
    r1: &[usize],
    r2: &[usize],
    tie_rule: TieRule,
    seed: Seed,
) -> Result<VoteOutcome> {
    if r1.is_empty() {
        return Err(Error::EmptySketchSide("first"));
    }
    if r2.is_empty() {
        return Err(Error::EmptySketchSide("second"));
    }
    let n = graph.num_vertices();
    let mut side: Vec<Option<Side>> = vec![None; n];
    for (set, s) in [(r1, Side::Plus), (r2, Side::Minus)] {
        for &v in set {
            if v >= n {
                return Err(Error::VertexOutOfRange(v));
            }
            if side[v].is_some() {
                return Err(invalid(format!("vertex {v} is in both sketch sides")));
            }
            side[v] = Some(s);
        }
    }

    let mut rng = seed.rng();
    let mut pairs = Vec::with_capacity(n);
    let mut unassigned = Vec::new();
    for v in 0..n {
        let id = graph.vertex_id(v);
        if let Some(s) = side[v] {
            pairs.push((id, s));
            continue;
        }
        let (to_first, to_second) = graph.neighbors(v).iter().fold((0usize, 0usize), |(a, b), &u| {
            match side[u] {
                Some(Side::Plus) => (a + 1, b),
                Some(Side::Minus) => (a, b + 1),
                None => (a, b),
            }
        });
        let choice = match to_first.cmp(&to_second) {
            std::cmp::Ordering::Greater => Some(Side::Plus),
            std::cmp::Ordering::Less => Some(Side::Minus),
            std::cmp::Ordering::Equal => match tie_rule {
                TieRule::Fail => None,
                TieRule::ToFirst => Some(Side::Plus),
                TieRule::Random => Some(if rng.gen::<bool>() { Side::Plus } else { Side::Minus }),
            },
        };
        match choice {
            Some(s) => pairs.push((id, s)),
            None => unassigned.push(id),
        }
    }
    Ok(VoteOutcome {
        partition: Partition::from_pairs(pairs)?,
        unassigned,
    })
}

/// Run the full pipeline with the built-in solver.
pub fn sketch_and_solve(graph: &Graph, config: &SketchConfig) -> Result<PipelineResult> {
    sketch_and_solve_with(graph, config, solve_sdp)
}

/// Run the pipeline with a caller-supplied SDP solver.
pub fn sketch_and_solve_with<F>(graph: &Graph, config: &SketchConfig, solve: F) -> Result<PipelineResult>
where
    F: FnOnce(&Graph, f64, &SolverConfig) -> Result<SdpSolution>,
{
    let mut timings = StageTimings::default();

    let clock = Instant::now();
    let mu = match config.mu {
        MuChoice::Auto => estimate_mu(graph)?.mu,
        MuChoice::Fixed(mu) => mu,
    };
    timings.estimate = clock.elapsed();

    let gamma = config.gamma.resolve()?;
    let clock = Instant::now();
    let sketch = bernoulli_vertex_sample(graph, gamma, config.seed.derive(tags::SKETCH))?;
    timings.sample = clock.elapsed();

    solve_on_sketch(graph, &sketch, mu, gamma, config, solve, timings)
}

/// Steps 3-5 for an explicit sketch (local indices of `graph`).
pub fn solve_on_sketch<F>(
    graph: &Graph,
    sketch: &[usize],
    mu: f64,
    gamma: f64,
    config: &SketchConfig,
    solve: F,
    mut timings: StageTimings,
) -> Result<PipelineResult>
where
    F: FnOnce(&Graph, f64, &SolverConfig) -> Result<SdpSolution>,
{
    let clock = Instant::now();
    let sub = graph.induced_subgraph(sketch)?;
    let sdp = solve(&sub, mu, &config.solver)?;
    timings.solve = clock.elapsed();

    let clock = Instant::now();
    let certificate = if config.certify {
        Some(check_certificate(&sub, &sdp.rounded_cut, mu, &config.certificate)?)
    } else {
        None
    };
    timings.certify = clock.elapsed();

    let accepted = sdp.rank_one_gap <= RANK_ONE_GAP_TOLERANCE
        && certificate
            .as_ref()
            .map_or(true, |c| c.verdict == Verdict::Certified);

    let clock = Instant::now();
    let sketch_partition = if accepted {
        sdp.rounded_cut.clone()
    } else {
        let mut rng = config.seed.derive(tags::FALLBACK).rng();
        Partition::from_pairs(sub.vertex_ids().iter().map(|&id| {
            (id, if rng.gen::<bool>() { Side::Plus } else { Side::Minus })
        }))?
    };

    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    for (id, side) in sketch_partition.iter() {
        let v = graph.index_of(id).ok_or(Error::VertexOutOfRange(id))?;
        match side {
            Side::Plus => r1.push(v),
            Side::Minus => r2.push(v),
        }
    }
    let vote = vote_extend(graph, &r1, &r2, config.tie_rule, config.seed.derive(tags::TIES))?;
    timings.extend = clock.elapsed();

    assert_eq!(
        vote.partition.restrict(sketch_partition.ids()),
        sketch_partition,
        "extension must agree with the sketch"
    );

    Ok(PipelineResult {
        full_partition: vote.partition,
        sketch_vertices: sub.vertex_ids().to_vec(),
        sketch_partition,
        mu_used: mu,
        gamma_used: gamma,
        sdp,
        certificate,
        fell_back_random: !accepted,
        unassigned: vote.unassigned,
        timings,
    })
}

/// The unsketched baseline: `gamma = 1`.
pub fn full_solve(graph: &Graph, mu: MuChoice, solver: &SolverConfig) -> Result<PipelineResult> {
    let mut config = SketchConfig::new(GammaChoice::Fixed(1.0), solver.seed);
    config.mu = mu;
    config.solver = solver.clone();
    sketch_and_solve(graph, &config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::{sample_sbm, LogScaleParams};
    use crate::sdp::{round_factors, Factors};

    fn two_triangles() -> Graph {
        Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
    }

    #[test]
    fn vote_majority_and_ties() {
        // a=0, b=1, c=2, d=3, v=4
        let g = Graph::from_edges(5, &[(4, 0), (4, 1), (4, 2)]).unwrap();
        let out = vote_extend(&g, &[0, 1], &[2, 3], TieRule::Fail, Seed(0)).unwrap();
        assert_eq!(out.partition.side(4), Some(Side::Plus));
        assert!(out.is_complete());

        let g = Graph::from_edges(5, &[(4, 0), (4, 2)]).unwrap();
        let out = vote_extend(&g, &[0, 1], &[2, 3], TieRule::Fail, Seed(0)).unwrap();
        assert_eq!(out.unassigned, vec![4]);
        assert_eq!(out.partition.side(4), None);
        let out = vote_extend(&g, &[0, 1], &[2, 3], TieRule::ToFirst, Seed(0)).unwrap();
        assert_eq!(out.partition.side(4), Some(Side::Plus));
        let out = vote_extend(&g, &[0, 1], &[2, 3], TieRule::Random, Seed(0)).unwrap();
        assert!(out.partition.side(4).is_some());
    }

    #[test]
    fn vote_rejects_empty_or_overlapping_sides() {
        let g = Graph::path(4);
        assert!(matches!(
            vote_extend(&g, &[], &[1], TieRule::Fail, Seed(0)),
            Err(Error::EmptySketchSide(_))
        ));
        assert!(matches!(
            vote_extend(&g, &[0], &[], TieRule::Fail, Seed(0)),
            Err(Error::EmptySketchSide(_))
        ));
        assert!(vote_extend(&g, &[0, 1], &[1], TieRule::Fail, Seed(0)).is_err());
    }

    #[test]
    fn auto_gamma_values() {
        assert_eq!(GammaChoice::Auto { alpha: 25.0, beta: 9.0 }.resolve().unwrap(), 1.0);
        assert_eq!(GammaChoice::Auto { alpha: 49.0, beta: 9.0 }.resolve().unwrap(), 0.25);
        let g = GammaChoice::Auto { alpha: 50.0, beta: 1.0 }.resolve().unwrap();
        assert!((g - 0.108_525_007_286_515_54).abs() < 1e-15);
        assert!(GammaChoice::Auto { alpha: 1.0, beta: 2.0 }.resolve().is_err());
        assert!(GammaChoice::Fixed(0.0).resolve().is_err());
    }

    #[test]
    fn gamma_one_is_the_full_solve() {
        let lp = LogScaleParams::new(30.0, 2.0, 60).unwrap();
        let (params, _) = lp.to_sbm().unwrap();
        let (g, planted) = sample_sbm(&params, Seed(4));
        let solver = SolverConfig::default().with_seed(Seed(8));
        let full = full_solve(&g, MuChoice::Auto, &solver).unwrap();
        let mut cfg = SketchConfig::new(GammaChoice::Fixed(1.0), Seed(8));
        cfg.solver = solver;
        let sketched = sketch_and_solve(&g, &cfg).unwrap();
        assert_eq!(sketched.sketch_vertices, (0..60).collect::<Vec<_>>());
        assert_eq!(full.full_partition, sketched.full_partition);
        assert_eq!(full.full_partition, full.sketch_partition);
        assert!(full.recovers(&planted));
    }

    #[test]
    fn two_triangles_with_explicit_sketch() {
        let g = two_triangles();
        let mut cfg = SketchConfig::new(GammaChoice::Fixed(1.0), Seed(3));
        cfg.mu = MuChoice::Fixed(0.5);
        let res = solve_on_sketch(&g, &[0, 1, 3, 4], 0.5, 1.0, &cfg, solve_sdp, StageTimings::default())
            .unwrap();
        assert!(!res.fell_back_random);
        assert_eq!(res.certificate.as_ref().unwrap().verdict, Verdict::Certified);
        // each unsketched vertex has both its edges into its own triangle
        assert_eq!(g.edges_to_set(2, &[0, 1]).unwrap(), 2);
        assert_eq!(g.edges_to_set(2, &[3, 4]).unwrap(), 0);
        let planted = Partition::from_sets(&[0, 1, 2], &[3, 4, 5]).unwrap();
        assert!(res.recovers(&planted));
    }

    #[test]
    fn sabotaged_solver_falls_back() {
        let lp = LogScaleParams::new(40.0, 2.0, 80).unwrap();
        let (params, _) = lp.to_sbm().unwrap();
        let (g, _) = sample_sbm(&params, Seed(1));
        let cfg = SketchConfig::new(GammaChoice::Fixed(0.5), Seed(2));
        let res = sketch_and_solve_with(&g, &cfg, |sub, mu, solver| {
            let n = sub.num_vertices();
            round_factors(sub, mu, Factors::random(n, solver.rank.resolve(n), solver.seed))
        })
        .unwrap();
        assert!(res.fell_back_random);
        assert_eq!(res.full_partition.restrict(&res.sketch_vertices), res.sketch_partition);
    }

    #[test]
    fn deterministic_for_identical_config() {
        let lp = LogScaleParams::new(30.0, 3.0, 100).unwrap();
        let (params, _) = lp.to_sbm().unwrap();
        let (g, _) = sample_sbm(&params, Seed(10));
        let cfg = SketchConfig::new(GammaChoice::Fixed(0.4), Seed(99));
        let a = sketch_and_solve(&g, &cfg).unwrap();
        let b = sketch_and_solve(&g, &cfg).unwrap();
        assert_eq!(a.full_partition, b.full_partition);
        assert_eq!(a.sketch_vertices, b.sketch_vertices);
        assert_eq!(a.unassigned, b.unassigned);
        assert_eq!(a.sdp.factors, b.sdp.factors);
    }

    #[test]
    fn rejects_zero_gamma() {
        let g = Graph::complete(4);
        let cfg = SketchConfig::new(GammaChoice::Fixed(0.0), Seed(0));
        assert!(sketch_and_solve(&g, &cfg).is_err());
    }
}
