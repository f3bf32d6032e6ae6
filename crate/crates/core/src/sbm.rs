//! Two-community stochastic block model sampling and Bernoulli vertex sketches.

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{Graph, Partition};
use crate::rng::Seed;

/// Community sizes and edge rates of a two-block SBM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    n1: usize,
    n2: usize,
    p: f64,
    q: f64,
}

impl SbmParams {
    /// Any rates in `[0, 1]`.
    pub fn new(n1: usize, n2: usize, p: f64, q: f64) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(invalid("community sizes must be positive"));
        }
        for (name, r) in [("p", p), ("q", q)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(invalid(format!("{name} = {r} is outside [0, 1]")));
            }
        }
        Ok(SbmParams { n1, n2, p, q })
    }

    /// Rates with `0 <= q <= p <= 1`.
    pub fn assortative(n1: usize, n2: usize, p: f64, q: f64) -> Result<Self> {
        let params = Self::new(n1, n2, p, q)?;
        if q > p {
            return Err(invalid(format!("assortative SBM needs q <= p, got p={p}, q={q}")));
        }
        Ok(params)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    /// `|n1 - n2|`
    pub fn imbalance(&self) -> usize {
        self.n1.abs_diff(self.n2)
    }

    pub fn is_balanced(&self) -> bool {
        self.n1 == self.n2
    }

    /// Expected total edge count.
    pub fn expected_edges(&self) -> f64 {
        let within = pairs(self.n1) + pairs(self.n2);
        let cross = (self.n1 * self.n2) as f64;
        self.p * within + self.q * cross
    }

    pub fn planted_partition(&self) -> Partition {
        Partition::planted(self.n1, self.n2)
    }
}

fn pairs(k: usize) -> f64 {
    (k * k.saturating_sub(1)) as f64 / 2.0
}

/// Log-scaled rates: `p = alpha ln(n)/n`, `q = beta ln(n)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScaleParams {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
}

impl LogScaleParams {
    pub fn new(alpha: f64, beta: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(invalid(format!("alpha and beta must be positive, got {alpha}, {beta}")));
        }
        if n < 2 || n % 2 != 0 {
            return Err(invalid(format!("n must be even and at least 2, got {n}")));
        }
        Ok(LogScaleParams { alpha, beta, n })
    }

    /// Rate for a scale factor, clamped to `[0, 1]`. The flag is true when
    /// clamping changed the value.
    pub fn rate(scale: f64, n: usize) -> (f64, bool) {
        let nf = n as f64;
        let r = scale * nf.ln() / nf;
        if r > 1.0 {
            (1.0, true)
        } else {
            (r.max(0.0), false)
        }
    }

    pub fn rates(&self) -> (f64, f64, bool) {
        let (p, cp) = Self::rate(self.alpha, self.n);
        let (q, cq) = Self::rate(self.beta, self.n);
        (p, q, cp || cq)
    }

    /// Balanced SBM `(n/2, n/2, p, q)`; clamping is logged and reported.
    pub fn to_sbm(&self) -> Result<(SbmParams, bool)> {
        self.to_sbm_sizes(self.n / 2, self.n / 2)
    }

    /// SBM with explicit community sizes; rates use `n = n1 + n2`.
    pub fn to_sbm_sizes(&self, n1: usize, n2: usize) -> Result<(SbmParams, bool)> {
        let n = n1 + n2;
        let (p, cp) = Self::rate(self.alpha, n);
        let (q, cq) = Self::rate(self.beta, n);
        let clamped = cp || cq;
        if clamped {
            warn!(
                "rates clamped to [0,1] for alpha={}, beta={}, n={}",
                self.alpha, self.beta, n
            );
        }
        Ok((SbmParams::new(n1, n2, p, q)?, clamped))
    }
}

/// Draw `G ~ SBM(n1, n2, p, q)`. Community 1 is ids `0..n1`. Pairs are visited
/// in lexicographic `(i, j)`, `i < j` order, one uniform draw each.
pub fn sample_sbm(params: &SbmParams, seed: Seed) -> (Graph, Partition) {
    let n = params.n();
    let mut rng = seed.rng();
    let mut edges = Vec::new();
    for i in 0..n {
        let i_first = i < params.n1;
        for j in (i + 1)..n {
            let rate = if i_first == (j < params.n1) {
                params.p
            } else {
                params.q
            };
            if rng.gen::<f64>() < rate {
                edges.push((i, j));
            }
        }
    }
    (
        Graph::from_sorted_unchecked((0..n).collect(), edges),
        params.planted_partition(),
    )
}

/// Each local vertex kept independently with probability `gamma`.
pub fn bernoulli_vertex_sample(graph: &Graph, gamma: f64, seed: Seed) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(invalid(format!("gamma = {gamma} is outside [0, 1]")));
    }
    let mut rng = seed.rng();
    Ok((0..graph.num_vertices())
        .filter(|_| rng.gen::<f64>() < gamma)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_rates_force_the_graph() {
        let params = SbmParams::new(2, 2, 1.0, 0.0).unwrap();
        for s in 0..5 {
            let (g, planted) = sample_sbm(&params, Seed(s));
            assert_eq!(g.edges(), &[(0, 1), (2, 3)]);
            assert_eq!(planted, Partition::from_sets(&[0, 1], &[2, 3]).unwrap());
        }
        let (k6, _) = sample_sbm(&SbmParams::new(3, 3, 1.0, 1.0).unwrap(), Seed(9));
        assert_eq!(k6, Graph::complete(6));
    }

    #[test]
    fn reproducible_for_identical_seed() {
        let params = SbmParams::new(20, 30, 0.3, 0.1).unwrap();
        assert_eq!(sample_sbm(&params, Seed(11)), sample_sbm(&params, Seed(11)));
        assert_ne!(sample_sbm(&params, Seed(11)).0, sample_sbm(&params, Seed(12)).0);
    }

    #[test]
    fn edge_count_within_four_sigma() {
        // E|E| = 0.5 * 2 * C(50,2) + 0.1 * 2500 = 1475
        let params = SbmParams::new(50, 50, 0.5, 0.1).unwrap();
        assert!((params.expected_edges() - 1475.0).abs() < 1e-9);
        let var: f64 = 0.5 * 0.5 * 2450.0 + 0.1 * 0.9 * 2500.0;
        let (g, _) = sample_sbm(&params, Seed(2024));
        assert!((g.edge_count() as f64 - 1475.0).abs() <= 4.0 * var.sqrt());

        let mean = (0..1000)
            .map(|s| sample_sbm(&params, Seed(s)).0.edge_count() as f64)
            .sum::<f64>()
            / 1000.0;
        assert!((mean - 1475.0).abs() <= 4.0 * (var / 1000.0).sqrt());
    }

    #[test]
    fn validation() {
        assert!(SbmParams::new(0, 3, 0.5, 0.1).is_err());
        assert!(SbmParams::new(3, 3, 1.5, 0.1).is_err());
        assert!(SbmParams::assortative(3, 3, 0.1, 0.5).is_err());
        assert!(SbmParams::new(3, 3, 0.1, 0.5).is_ok());
        assert!(LogScaleParams::new(2.0, 1.0, 7).is_err());
        assert!(LogScaleParams::new(0.0, 1.0, 8).is_err());
    }

    #[test]
    fn log_scale_clamps_and_reports() {
        let lp = LogScaleParams::new(50.0, 1.0, 10).unwrap();
        let (sbm, clamped) = lp.to_sbm().unwrap();
        assert!(clamped);
        assert_eq!(sbm.p(), 1.0);
        assert!((sbm.q() - 10f64.ln() / 10.0).abs() < 1e-15);
        let (_, clamped) = LogScaleParams::new(2.0, 1.0, 100).unwrap().to_sbm().unwrap();
        assert!(!clamped);
    }

    #[test]
    fn bernoulli_sample_extremes() {
        let g = Graph::empty(50);
        assert!(bernoulli_vertex_sample(&g, 0.0, Seed(1)).unwrap().is_empty());
        assert_eq!(
            bernoulli_vertex_sample(&g, 1.0, Seed(1)).unwrap(),
            (0..50).collect::<Vec<_>>()
        );
        assert!(bernoulli_vertex_sample(&g, 1.1, Seed(1)).is_err());
    }

    #[test]
    fn bernoulli_sample_mean_size() {
        let g = Graph::empty(1000);
        let mean = (0..500)
            .map(|s| bernoulli_vertex_sample(&g, 0.5, Seed(s)).unwrap().len() as f64)
            .sum::<f64>()
            / 500.0;
        assert!((mean - 500.0).abs() <= 3.0 * (1000.0f64 * 0.25).sqrt());
    }
}
