//! Dual certificate for uniqueness of a rank-one SDP optimum.
//!
//! For a partition with sign vector `g` and sizes `n1`, `n2`, let `d+` and
//! `d-` count each vertex's neighbors on its own and on the other side. With
//!
//! ```text
//! Z = D+ - D- - mu (n1 - n2) diag(g) - A + mu J
//! ```
//!
//! `Zg = 0` holds identically. If `Z` is PSD with rank `n - 1`, then `g g^T`
//! is the unique maximizer of `tr((A - mu J) X)` over unit-diagonal PSD `X`.
//! The check therefore reduces to a positive lower bound on the smallest
//! eigenvalue of `Z` on the complement of `g`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};
use crate::lanczos::{deflated_min, shifted_power_min, DeflatedMin};
use crate::rng::{tags, Seed};

/// Largest instance accepted by [`exhaustive_unique_opt_check`].
pub const EXHAUSTIVE_LIMIT: usize = 12;
/// Largest instance for the optional dense cross-check.
pub const DENSE_CROSS_CHECK_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Certified,
    NotCertified,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "CERTIFIED",
            Verdict::NotCertified => "NOT_CERTIFIED",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Thresholds, all relative to `||Z||_scale` (largest row 1-norm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateTolerances {
    /// Certify when the lower bound on `lambda_2` exceeds this times scale.
    pub positive_margin: f64,
    /// Refute when a Rayleigh quotient on `g`'s complement is at most this
    /// times `max(scale, 1)`.
    pub null_tolerance: f64,
    /// Allowed `||Zg||_inf` relative to `1 + scale`.
    pub zg_tolerance: f64,
    pub max_iterations: usize,
    /// Budget of the shifted power fallback.
    pub power_iterations: usize,
    pub dense_cross_check: bool,
    pub seed: Seed,
}

impl Default for CertificateTolerances {
    fn default() -> Self {
        CertificateTolerances {
            positive_margin: 1e-8,
            null_tolerance: 1e-12,
            zg_tolerance: 1e-9,
            max_iterations: 1000,
            power_iterations: 2000,
            dense_cross_check: false,
            seed: Seed(0x5eed),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub verdict: Verdict,
    /// `||Zg||_inf`
    pub z_g_residual: f64,
    /// Lower bound on the second-smallest eigenvalue of `Z`.
    pub lambda2_lower: f64,
    /// Best Rayleigh quotient found on the complement of `g`.
    pub lambda2_estimate: f64,
    pub scale: f64,
    pub iterations: usize,
    /// The Krylov basis spanned the whole complement of `g`.
    pub exhaustive: bool,
    /// Unit `w` orthogonal to `g` with `w^T Z w <= null_tolerance * max(scale, 1)`;
    /// present exactly when the verdict is `NotCertified`.
    pub witness: Option<Vec<f64>>,
    /// Dense second-smallest eigenvalue, when the cross-check ran.
    pub dense_lambda2: Option<f64>,
}

/// Implicit `Z` for a graph, partition and `mu`.
#[derive(Debug, Clone)]
pub struct ZOperator<'g> {
    graph: &'g Graph,
    mu: f64,
    g: Vec<f64>,
    diag: Vec<f64>,
}

/// Build the implicit `Z`; each apply costs `O(|E| + n)`.
pub fn build_z_operator<'g>(graph: &'g Graph, partition: &Partition, mu: f64) -> Result<ZOperator<'g>> {
    let g = partition.sign_vector(graph)?;
    let imbalance: f64 = g.iter().sum();
    let diag = (0..graph.num_vertices())
        .map(|i| {
            let (same, other) = graph
                .neighbors(i)
                .iter()
                .fold((0.0, 0.0), |(s, o), &j| if g[j] == g[i] { (s + 1.0, o) } else { (s, o + 1.0) });
            same - other - mu * imbalance * g[i]
        })
        .collect();
    Ok(ZOperator { graph, mu, g, diag })
}

impl ZOperator<'_> {
    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn sign_vector(&self) -> &[f64] {
        &self.g
    }

    /// Diagonal of `D+ - D- - mu (n1 - n2) diag(g)`.
    pub fn dual_diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.graph.adjacency_matvec(x, out);
        let shift = self.mu * x.iter().sum::<f64>();
        for ((o, &d), &xi) in out.iter_mut().zip(&self.diag).zip(x) {
            *o = d * xi - *o + shift;
        }
    }

    /// Largest row 1-norm, which also bounds the spectral radius.
    pub fn scale(&self) -> f64 {
        let n = self.dim();
        let mu = self.mu;
        (0..n)
            .map(|i| {
                let deg = self.graph.degree(i) as f64;
                (self.diag[i] + mu).abs()
                    + deg * (mu - 1.0).abs()
                    + (n as f64 - 1.0 - deg) * mu.abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        m
    }
}

/// Check whether `g g^T` is certified as the unique `(A, mu)`-SDP optimum.
pub fn check_certificate(
    graph: &Graph,
    partition: &Partition,
    mu: f64,
    tol: &CertificateTolerances,
) -> Result<CertificateReport> {
    let z = build_z_operator(graph, partition, mu)?;
    let n = z.dim();
    let scale = z.scale();

    let mut zg = vec![0.0; n];
    z.apply(&z.g, &mut zg);
    let z_g_residual = zg.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut report = CertificateReport {
        verdict: Verdict::Inconclusive,
        z_g_residual,
        lambda2_lower: f64::NEG_INFINITY,
        lambda2_estimate: f64::NAN,
        scale,
        iterations: 0,
        exhaustive: false,
        witness: None,
        dense_lambda2: None,
    };

    if n < 2 {
        // the only feasible X is [1]
        report.verdict = Verdict::Certified;
        report.lambda2_lower = f64::INFINITY;
        report.lambda2_estimate = f64::INFINITY;
        report.exhaustive = true;
        return Ok(report);
    }
    if tol.dense_cross_check && n <= DENSE_CROSS_CHECK_LIMIT {
        report.dense_lambda2 = Some(dense_second_smallest(&z.to_dense()));
    }
    if z_g_residual > tol.zg_tolerance * (1.0 + scale) {
        return Ok(report);
    }

    let margin = tol.positive_margin * scale;
    let null_tol = tol.null_tolerance * scale.max(1.0);
    let rounding = 64.0 * f64::EPSILON * n as f64 * scale;
    let seed = tol.seed.derive(tags::LANCZOS);

    let Some(mut est) = deflated_min(n, &z.g, |x, out| z.apply(x, out), scale, tol.max_iterations, seed)
    else {
        return Ok(report);
    };
    let mut iterations = est.iterations;

    let classify = |est: &DeflatedMin| -> (Verdict, f64) {
        let lower = est.ritz_value - est.residual - rounding;
        if lower > margin {
            (Verdict::Certified, lower)
        } else if est.ritz_value <= null_tol {
            (Verdict::NotCertified, lower)
        } else {
            (Verdict::Inconclusive, lower)
        }
    };
    let (mut verdict, mut lower) = classify(&est);

    if verdict == Verdict::Inconclusive && !est.exhaustive && tol.power_iterations > 0 {
        let refined = shifted_power_min(n, &z.g, |x, out| z.apply(x, out), scale, &est.vector, tol.power_iterations);
        iterations += refined.iterations;
        if refined.ritz_value < est.ritz_value || refined.residual < est.residual {
            est = refined;
            (verdict, lower) = classify(&est);
        }
    }

    report.verdict = verdict;
    report.lambda2_lower = lower;
    report.lambda2_estimate = est.ritz_value;
    report.iterations = iterations;
    report.exhaustive = est.exhaustive;
    if verdict == Verdict::NotCertified {
        report.witness = Some(est.vector);
    }
    Ok(report)
}

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, j| {
        eig.eigenvectors[(i, order[j])]
    });
    (values, vectors)
}

fn dense_second_smallest(m: &DMatrix<f64>) -> f64 {
    let (values, _) = sorted_eigen(m.clone());
    values.get(1).copied().unwrap_or(f64::INFINITY)
}

/// Dense `Z` assembled entry by entry from its definition.
pub fn dense_z(graph: &Graph, partition: &Partition, mu: f64) -> Result<DMatrix<f64>> {
    let n = graph.num_vertices();
    let g = partition.sign_vector(graph)?;
    let n1 = g.iter().filter(|&&s| s > 0.0).count() as f64;
    let n2 = n as f64 - n1;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in graph.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let mut z = DMatrix::<f64>::from_element(n, n, mu) - &a;
    for i in 0..n {
        let mut d_plus = 0.0;
        let mut d_minus = 0.0;
        for j in 0..n {
            if a[(i, j)] == 1.0 {
                if g[i] == g[j] {
                    d_plus += 1.0;
                } else {
                    d_minus += 1.0;
                }
            }
        }
        z[(i, i)] += d_plus - d_minus - mu * (n1 - n2) * g[i];
    }
    Ok(z)
}

/// Dense oracle: `Z` is PSD with a one-dimensional null space spanned by `g`.
pub fn exhaustive_unique_opt_check(graph: &Graph, partition: &Partition, mu: f64) -> Result<bool> {
    let n = graph.num_vertices();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge { n, limit: EXHAUSTIVE_LIMIT });
    }
    if n == 0 {
        return Ok(true);
    }
    let g = partition.sign_vector(graph)?;
    let (values, vectors) = sorted_eigen(dense_z(graph, partition, mu)?);
    const ZERO: f64 = 1e-10;
    if values[0] < -ZERO {
        return Ok(false);
    }
    if values.iter().filter(|&&l| l <= ZERO).count() != 1 {
        return Ok(false);
    }
    let overlap: f64 = (0..n).map(|i| vectors[(i, 0)] * g[i]).sum::<f64>().abs() / (n as f64).sqrt();
    Ok(overlap > 1.0 - 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::dot;

    fn two_triangles() -> Graph {
        Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
    }

    fn k22_cross() -> (Graph, Partition) {
        let g = Graph::from_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        (g, Partition::from_sets(&[0, 1], &[2, 3]).unwrap())
    }

    #[test]
    fn two_triangles_operator_matches_closed_form() {
        let g = two_triangles();
        let p = Partition::from_sets(&[0, 1, 2], &[3, 4, 5]).unwrap();
        let z = build_z_operator(&g, &p, 0.5).unwrap();
        // Z = 2I - A + 0.5 J
        let dense = z.to_dense();
        for i in 0..6 {
            for j in 0..6 {
                let a = if g.has_edge(i, j) { 1.0 } else { 0.0 };
                let want = if i == j { 2.0 } else { 0.0 } - a + 0.5;
                assert_eq!(dense[(i, j)], want);
            }
        }
        let mut zg = vec![0.0; 6];
        z.apply(z.sign_vector(), &mut zg);
        assert!(zg.iter().all(|&v| v == 0.0));
        assert_eq!(dense, dense_z(&g, &p, 0.5).unwrap());
    }

    #[test]
    fn two_triangles_certified_with_lambda2_three() {
        let g = two_triangles();
        let p = Partition::from_sets(&[0, 1, 2], &[3, 4, 5]).unwrap();
        let tol = CertificateTolerances { dense_cross_check: true, ..Default::default() };
        let r = check_certificate(&g, &p, 0.5, &tol).unwrap();
        assert_eq!(r.verdict, Verdict::Certified);
        assert!((r.lambda2_estimate - 3.0).abs() < 1e-10);
        assert!(r.lambda2_lower > 3.0 - 1e-8);
        assert!((r.dense_lambda2.unwrap() - 3.0).abs() < 1e-10);
        assert!(exhaustive_unique_opt_check(&g, &p, 0.5).unwrap());
    }

    #[test]
    fn k22_cross_planted_is_refuted() {
        let (g, p) = k22_cross();
        let z = build_z_operator(&g, &p, 0.5).unwrap();
        let w = [1.0, -1.0, 0.0, 0.0];
        let mut zw = vec![0.0; 4];
        z.apply(&w, &mut zw);
        assert_eq!(dot(&w, &zw), -4.0);

        let r = check_certificate(&g, &p, 0.5, &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NotCertified);
        assert!((r.lambda2_estimate + 2.0).abs() < 1e-10);
        let witness = r.witness.unwrap();
        z.apply(&witness, &mut zw);
        assert!(dot(&witness, &zw) < 0.0);
        assert!(dot(&witness, z.sign_vector()).abs() < 1e-12);
        assert!(!exhaustive_unique_opt_check(&g, &p, 0.5).unwrap());
    }

    #[test]
    fn empty_graph_is_not_certified() {
        let g = Graph::empty(4);
        let p = Partition::from_sets(&[0, 1], &[2, 3]).unwrap();
        let r = check_certificate(&g, &p, 0.0, &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NotCertified);
        assert!(!exhaustive_unique_opt_check(&g, &p, 0.0).unwrap());
    }

    #[test]
    fn split_single_edge_is_not_certified() {
        let g = Graph::complete(2);
        let p = Partition::from_sets(&[0], &[1]).unwrap();
        let z = build_z_operator(&g, &p, 1.0).unwrap();
        assert!(z.to_dense().iter().all(|&v| v == 0.0));
        let r = check_certificate(&g, &p, 1.0, &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::NotCertified);
    }

    #[test]
    fn all_ones_on_single_edge_is_certified() {
        // D+ = I, D- = 0, Z = I - A, spectrum {0, 2}, null vector (1, 1)
        let g = Graph::complete(2);
        let p = Partition::from_sets(&[0, 1], &[]).unwrap();
        assert!(exhaustive_unique_opt_check(&g, &p, 0.0).unwrap());
        let r = check_certificate(&g, &p, 0.0, &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Certified);
        assert!((r.lambda2_estimate - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zg_vanishes_on_random_instances() {
        use crate::sbm::{sample_sbm, SbmParams};
        for s in 0..20 {
            let params = SbmParams::new(15 + s as usize, 20, 0.4, 0.15).unwrap();
            let (g, planted) = sample_sbm(&params, Seed(s));
            let mu = 0.1 * s as f64;
            let r = check_certificate(&g, &planted, mu, &Default::default()).unwrap();
            let bound = 1e-9 * (g.max_degree() as f64 + mu * g.num_vertices() as f64);
            assert!(r.z_g_residual <= bound.max(1e-12), "{}", r.z_g_residual);
        }
    }

    #[test]
    fn oracle_rejects_large_instances() {
        let g = Graph::empty(13);
        let p = Partition::planted(7, 6);
        assert!(exhaustive_unique_opt_check(&g, &p, 0.5).is_err());
    }
}
