//! Low-rank coordinate ascent for the `(A, mu)` semidefinite program
//!
//! ```text
//! maximize tr((A - mu J) X)  subject to  diag(X) = 1,  X PSD
//! ```
//!
//! `X` is kept in factored form `X = V^T V` where the columns `v_i` of `V` are
//! unit vectors in `R^r`, so every iterate is feasible. A sweep replaces each
//! column in turn by the normalized sum `sum_{j != i} C_ij v_j`, which is the
//! exact maximizer of the objective over `v_i` with the other columns fixed.
//! With `r` above `sqrt(2n)` the factored problem has no spurious local
//! maxima generically.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::encoding::ObjectiveOperator;
use crate::error::{invalid, Error, Result};
use crate::graph::{Graph, Partition, Side};
use crate::rng::Seed;

/// Columns whose update direction is shorter than this are left in place.
const STALL_NORM: f64 = 1e-14;

/// Largest instance [`brute_force_max`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rank {
    Auto,
    Fixed(usize),
}

impl Rank {
    /// `Auto` is `min(n, ceil(sqrt(2n)) + 1)`.
    pub fn resolve(self, n: usize) -> usize {
        match self {
            Rank::Auto => {
                let r = (2.0 * n as f64).sqrt().ceil() as usize + 1;
                r.min(n).max(1)
            }
            Rank::Fixed(r) => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Rounding {
    #[default]
    TopEigenvector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rank: Rank,
    pub max_sweeps: usize,
    /// Stop once a sweep improves the objective by less than
    /// `objective_tolerance * (1 + |objective|)`.
    pub objective_tolerance: f64,
    pub rounding: Rounding,
    pub seed: Seed,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rank: Rank::Auto,
            max_sweeps: 5000,
            objective_tolerance: 1e-12,
            rounding: Rounding::TopEigenvector,
            seed: Seed(0),
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if let Rank::Fixed(0) = self.rank {
            return Err(invalid("rank must be positive"));
        }
        if self.max_sweeps == 0 {
            return Err(invalid("max_sweeps must be positive"));
        }
        if !(self.objective_tolerance > 0.0) {
            return Err(invalid("objective_tolerance must be positive"));
        }
        Ok(())
    }
}

/// `n` unit columns of length `r`, stored column-contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Factors {
    rank: usize,
    data: Vec<f64>,
}

impl Factors {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.rank
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.rank..(i + 1) * self.rank]
    }

    /// `X_ij = <v_i, v_j>`
    pub fn gram_entry(&self, i: usize, j: usize) -> f64 {
        dot(self.column(i), self.column(j))
    }

    /// Random unit columns.
    pub fn random(n: usize, rank: usize, seed: Seed) -> Self {
        let mut rng = seed.rng();
        let mut data: Vec<f64> = (0..n * rank)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        for col in data.chunks_mut(rank) {
            let norm = dot(col, col).sqrt();
            if norm > 0.0 {
                col.iter_mut().for_each(|x| *x /= norm);
            } else {
                col[0] = 1.0;
            }
        }
        Factors { rank, data }
    }

    /// `sum_ij C_ij <v_i, v_j>` for `C = A - mu J`.
    pub fn objective(&self, graph: &Graph, mu: f64) -> f64 {
        let r = self.rank;
        let mut sum = vec![0.0; r];
        for col in self.data.chunks(r) {
            axpy(1.0, col, &mut sum);
        }
        let edge_part: f64 = graph
            .edges()
            .iter()
            .map(|&(u, v)| 2.0 * dot(self.column(u), self.column(v)))
            .sum();
        edge_part - mu * dot(&sum, &sum)
    }

    /// Top eigenpair of `X = V^T V`, via the `r x r` matrix `V V^T`.
    fn top_eigenpair(&self) -> (f64, Vec<f64>) {
        let r = self.rank;
        let n = self.len();
        let mut gram = DMatrix::<f64>::zeros(r, r);
        for col in self.data.chunks(r) {
            for a in 0..r {
                for b in a..r {
                    gram[(a, b)] += col[a] * col[b];
                }
            }
        }
        for a in 0..r {
            for b in 0..a {
                gram[(a, b)] = gram[(b, a)];
            }
        }
        let eig = SymmetricEigen::new(gram);
        let (k, &lambda) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("rank is positive");
        let u = eig.eigenvectors.column(k);
        let x = (0..n)
            .map(|i| self.column(i).iter().zip(u.iter()).map(|(a, b)| a * b).sum())
            .collect();
        (lambda, x)
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub factors: Factors,
    pub objective: f64,
    pub rounded_cut: Partition,
    /// `1 - lambda_1(X) / n`, clamped to `[0, 1]`.
    pub rank_one_gap: f64,
    pub sweeps_used: usize,
    pub converged: bool,
    /// Objective after initialization and after each sweep.
    pub history: Vec<f64>,
}

/// Maximize `tr((A - mu J) X)` over unit-diagonal PSD `X` by coordinate ascent
/// on the factor columns, starting from random columns.
pub fn solve_sdp(graph: &Graph, mu: f64, config: &SolverConfig) -> Result<SdpSolution> {
    let n = graph.num_vertices();
    if n < 2 {
        return Err(invalid(format!("solve_sdp needs at least 2 vertices, got {n}")));
    }
    config.validate()?;
    let factors = Factors::random(n, config.rank.resolve(n), config.seed);
    solve_from(graph, mu, config, factors)
}

/// Coordinate ascent from given starting factors.
pub fn solve_from(
    graph: &Graph,
    mu: f64,
    config: &SolverConfig,
    mut factors: Factors,
) -> Result<SdpSolution> {
    let n = graph.num_vertices();
    if n < 2 {
        return Err(invalid(format!("solve_sdp needs at least 2 vertices, got {n}")));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(invalid(format!("mu must be finite and non-negative, got {mu}")));
    }
    config.validate()?;
    if factors.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: factors.len() });
    }
    let r = factors.rank;

    let mut total = vec![0.0; r];
    for col in factors.data.chunks(r) {
        axpy(1.0, col, &mut total);
    }
    let mut objective = factors.objective(graph, mu);
    let mut history = vec![objective];
    let mut c = vec![0.0; r];
    let mut sweeps_used = 0;
    let mut converged = false;

    while sweeps_used < config.max_sweeps {
        let mut gain = 0.0;
        for i in 0..n {
            // c = sum_{j in N(i)} v_j - mu (total - v_i)
            let vi = &factors.data[i * r..(i + 1) * r];
            for k in 0..r {
                c[k] = -mu * (total[k] - vi[k]);
            }
            for &j in graph.neighbors(i) {
                axpy(1.0, &factors.data[j * r..(j + 1) * r], &mut c);
            }
            let norm = dot(&c, &c).sqrt();
            if norm < STALL_NORM {
                continue;
            }
            let vi = &mut factors.data[i * r..(i + 1) * r];
            gain += 2.0 * (norm - dot(vi, &c));
            for k in 0..r {
                let new = c[k] / norm;
                total[k] += new - vi[k];
                vi[k] = new;
            }
        }
        sweeps_used += 1;
        let previous = objective;
        objective = factors.objective(graph, mu);
        debug_assert!(
            objective >= previous - 1e-9 * (1.0 + previous.abs()),
            "objective decreased from {previous} to {objective}"
        );
        history.push(objective);
        if gain < config.objective_tolerance * (1.0 + objective.abs()) {
            converged = true;
            break;
        }
    }

    let mut solution = round_factors(graph, mu, factors)?;
    solution.objective = objective;
    solution.sweeps_used = sweeps_used;
    solution.converged = converged;
    solution.history = history;
    Ok(solution)
}

/// Evaluate and round the given factors without running any sweeps.
pub fn round_factors(graph: &Graph, mu: f64, factors: Factors) -> Result<SdpSolution> {
    let n = graph.num_vertices();
    if factors.len() != n || n == 0 {
        return Err(Error::DimensionMismatch { expected: n, got: factors.len() });
    }
    let objective = factors.objective(graph, mu);
    let (lambda, top) = factors.top_eigenpair();
    let rank_one_gap = (1.0 - lambda / n as f64).clamp(0.0, 1.0);
    let mut signs: Vec<Side> = top.iter().map(|&x| Side::of(x)).collect();
    if signs[0] == Side::Minus {
        signs.iter_mut().for_each(|s| *s = s.flip());
    }
    let rounded_cut = Partition::from_signs(graph, &signs)?;

    Ok(SdpSolution {
        factors,
        objective,
        rounded_cut,
        rank_one_gap,
        sweeps_used: 0,
        converged: false,
        history: vec![objective],
    })
}

/// Rank-one objective `g^T A g - mu (1^T g)^2` for `g` the sign vector of
/// `partition`.
pub fn objective_value(graph: &Graph, mu: f64, partition: &Partition) -> Result<f64> {
    let g = partition.sign_vector(graph)?;
    ObjectiveOperator::new(graph, mu).quadratic_form(&g)
}

/// Exhaustive maximizer of `x^T A x - mu (1^T x)^2` over sign vectors
/// (balanced ones if requested). Ties go to the lexicographically smallest
/// `x` with `x_0 = +1`, taking `-1 < +1`.
pub fn brute_force_max(graph: &Graph, mu: f64, balanced_only: bool) -> Result<(Partition, f64)> {
    let n = graph.num_vertices();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge { n, limit: BRUTE_FORCE_LIMIT });
    }
    if n == 0 {
        return Err(invalid("brute_force_max needs at least one vertex"));
    }
    if balanced_only && n % 2 != 0 {
        return Err(invalid(format!("balanced cuts need even n, got {n}")));
    }
    let adj: Vec<u32> = (0..n)
        .map(|v| graph.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };

    let value = |mask: u32| -> f64 {
        let mut agg: i64 = 0;
        for (v, &a) in adj.iter().enumerate() {
            let same = if mask >> v & 1 == 1 { mask } else { !mask & full };
            agg += (a & same).count_ones() as i64 - (a & !same & full).count_ones() as i64;
        }
        let s = 2 * mask.count_ones() as i64 - n as i64;
        agg as f64 - mu * (s * s) as f64
    };
    // With bit i meaning x_i = +1, lexicographic order on x is the order on
    // the bit-reversed mask.
    let lex_key = |mask: u32| -> u32 { mask.reverse_bits() };

    let mut best: Option<(f64, u32)> = None;
    for rest in 0u32..(1u32 << (n - 1)) {
        let mask = (rest << 1) | 1;
        if balanced_only && mask.count_ones() as usize != n / 2 {
            continue;
        }
        let val = value(mask);
        best = match best {
            None => Some((val, mask)),
            Some((bv, bm)) if val > bv || (val == bv && lex_key(mask) < lex_key(bm)) => {
                Some((val, mask))
            }
            keep => keep,
        };
    }
    let (val, mask) = best.expect("at least one candidate");
    let signs: Vec<Side> = (0..n)
        .map(|i| if mask >> i & 1 == 1 { Side::Plus } else { Side::Minus })
        .collect();
    Ok((Partition::from_signs(graph, &signs)?, val))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
