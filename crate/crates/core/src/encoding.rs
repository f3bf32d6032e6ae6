//! The objective `C = A - mu J` and the edge-density estimate of `mu`.
//!
//! Over balanced sign vectors every encoding `aA + bJ + cI` with `a > 0` has
//! the same maximizer, so the family is parametrized by the single penalty
//! `mu` on the all-ones matrix. `mu = 1/2` is the `B = 2A - J + I` encoding
//! (up to scale and shift) and `mu = 1` is max-cut on the complement.

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::sbm::{LogScaleParams, SbmParams};

/// Implicit `A - mu J`; the `J` term is never formed.
#[derive(Debug, Clone, Copy)]
pub struct ObjectiveOperator<'g> {
    graph: &'g Graph,
    mu: f64,
}

impl<'g> ObjectiveOperator<'g> {
    pub fn new(graph: &'g Graph, mu: f64) -> Self {
        ObjectiveOperator { graph, mu }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dim(&self) -> usize {
        self.graph.num_vertices()
    }

    /// `A x - mu (1^T x) 1`, in `O(|E| + n)`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        if out.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: out.len() });
        }
        self.graph.adjacency_matvec(x, out);
        let shift = self.mu * x.iter().sum::<f64>();
        if shift != 0.0 {
            out.iter_mut().for_each(|o| *o -= shift);
        }
        Ok(())
    }

    /// `g^T A g - mu (1^T g)^2`.
    pub fn quadratic_form(&self, g: &[f64]) -> Result<f64> {
        if g.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: g.len() });
        }
        let agg: f64 = self
            .graph
            .edges()
            .iter()
            .map(|&(u, v)| 2.0 * g[u] * g[v])
            .sum();
        let s: f64 = g.iter().sum();
        Ok(agg - self.mu * s * s)
    }
}

/// `mu = |E| / C(n, 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuEstimate {
    pub mu: f64,
    pub edge_count: usize,
    pub n: usize,
}

pub fn estimate_mu(graph: &Graph) -> Result<MuEstimate> {
    let n = graph.num_vertices();
    if n < 2 {
        return Err(invalid(format!("edge density needs n >= 2, got {n}")));
    }
    let edge_count = graph.edge_count();
    // C(n,2) and |E| are exact integers well below 2^53 at any feasible size.
    let total = (n as u128 * (n as u128 - 1) / 2) as f64;
    Ok(MuEstimate {
        mu: edge_count as f64 / total,
        edge_count,
        n,
    })
}

/// `E mu = (p+q)/2 - (p-q)/(2(n-1))` for a balanced SBM.
pub fn expected_mu(params: &SbmParams) -> Result<f64> {
    if !params.is_balanced() {
        return Err(invalid(format!(
            "expected edge density formula needs n1 = n2, got {} and {}",
            params.n1(),
            params.n2()
        )));
    }
    let (p, q) = (params.p(), params.q());
    let n = params.n() as f64;
    Ok((p + q) / 2.0 - (p - q) / (2.0 * (n - 1.0)))
}

/// `c ln(n) / n^{3/2}`.
pub fn mu_concentration_radius(n: f64, c: f64) -> f64 {
    c * n.ln() / n.powf(1.5)
}

/// Tolerance radius for `|mu - (p+q)/2|` at the graph size of `params`.
pub fn mu_concentration_bound(params: &LogScaleParams, c: f64) -> Result<f64> {
    if params.n < 2 {
        return Err(invalid("n must be at least 2"));
    }
    if c < 0.0 {
        return Err(invalid("c must be non-negative"));
    }
    Ok(mu_concentration_radius(params.n as f64, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn estimate_mu_examples() {
        assert_eq!(estimate_mu(&Graph::empty(4)).unwrap().mu, 0.0);
        assert_eq!(estimate_mu(&Graph::complete(4)).unwrap().mu, 1.0);
        assert_eq!(estimate_mu(&Graph::path(4)).unwrap().mu, 0.5);
        assert!(estimate_mu(&Graph::empty(1)).is_err());
    }

    #[test]
    fn expected_mu_examples() {
        let p = SbmParams::new(7, 7, 0.3, 0.3).unwrap();
        assert_relative_eq!(expected_mu(&p).unwrap(), 0.3, epsilon = 1e-15);
        // enumeration: E|E| = 2 within pairs at rate 1, so E mu = 2/6
        let p = SbmParams::new(2, 2, 1.0, 0.0).unwrap();
        assert_relative_eq!(expected_mu(&p).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        let p = SbmParams::new(100, 100, 0.1, 0.05).unwrap();
        assert_relative_eq!(
            expected_mu(&p).unwrap(),
            0.074_874_371_859_296_482_4,
            max_relative = 1e-14
        );
        assert!(expected_mu(&SbmParams::new(3, 5, 0.5, 0.1).unwrap()).is_err());
    }

    #[test]
    fn concentration_radius_examples() {
        let e2 = std::f64::consts::E.powi(2);
        assert_relative_eq!(
            mu_concentration_radius(e2, 1.0),
            2.0 / std::f64::consts::E.powi(3),
            max_relative = 1e-14
        );
        let lp = LogScaleParams::new(10.0, 2.0, 400).unwrap();
        assert_relative_eq!(
            mu_concentration_bound(&lp, 4.0).unwrap(),
            0.002_995_732_273_553_991,
            max_relative = 1e-13
        );
        assert_eq!(mu_concentration_bound(&lp, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn apply_examples() {
        let k3 = Graph::complete(3);
        let y = ObjectiveOperator::new(&k3, 0.5).apply(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(y, vec![0.5, 0.5, 0.5]);

        let p = Graph::path(4);
        let x = [0.3, -1.0, 2.0, 0.25];
        let mut ax = vec![0.0; 4];
        p.adjacency_matvec(&x, &mut ax);
        assert_eq!(ObjectiveOperator::new(&p, 0.0).apply(&x).unwrap(), ax);

        let zero_sum = [1.0, -2.0, 0.5, 0.5];
        p.adjacency_matvec(&zero_sum, &mut ax);
        assert_eq!(ObjectiveOperator::new(&p, 0.7).apply(&zero_sum).unwrap(), ax);

        assert!(ObjectiveOperator::new(&p, 0.7).apply(&[1.0]).is_err());
    }

    fn dense_objective(g: &Graph, mu: f64) -> Vec<Vec<f64>> {
        let n = g.num_vertices();
        let mut c = vec![vec![-mu; n]; n];
        for &(u, v) in g.edges() {
            c[u][v] += 1.0;
            c[v][u] += 1.0;
        }
        c
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
        (2..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
                let mut edges = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if bits[k] {
                            edges.push((i, j));
                        }
                        k += 1;
                    }
                }
                Graph::from_edges(n, &edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn apply_matches_dense(
            g in arb_graph(64),
            mu in 0.0f64..2.0,
            seed in any::<u64>(),
        ) {
            use rand::Rng;
            let n = g.num_vertices();
            let mut rng = crate::rng::Seed(seed).rng();
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c = dense_objective(&g, mu);
            let got = ObjectiveOperator::new(&g, mu).apply(&x).unwrap();
            for i in 0..n {
                let want: f64 = (0..n).map(|j| c[i][j] * x[j]).sum();
                let scale = (0..n).map(|j| (c[i][j] * x[j]).abs()).sum::<f64>().max(1e-300);
                prop_assert!((got[i] - want).abs() <= 1e-12 * scale);
            }
            let qf = ObjectiveOperator::new(&g, mu).quadratic_form(&x).unwrap();
            let dense_qf: f64 = (0..n).map(|i| x[i] * (0..n).map(|j| c[i][j] * x[j]).sum::<f64>()).sum();
            prop_assert!((qf - dense_qf).abs() <= 1e-10 * (1.0 + dense_qf.abs()));
        }

        #[test]
        fn estimate_mu_in_unit_interval(g in arb_graph(20)) {
            let m = estimate_mu(&g).unwrap().mu;
            prop_assert!((0.0..=1.0).contains(&m));
        }

        #[test]
        fn balanced_argmax_independent_of_mu(
            g in arb_graph(10).prop_filter("even n", |g| g.num_vertices() % 2 == 0),
            mu in 0.0f64..3.0,
        ) {
            let n = g.num_vertices();
            let mut best0 = (f64::NEG_INFINITY, 0u32);
            let mut best_mu = (f64::NEG_INFINITY, 0u32);
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != n / 2 { continue; }
                let x: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
                let v0 = ObjectiveOperator::new(&g, 0.0).quadratic_form(&x).unwrap();
                let vmu = ObjectiveOperator::new(&g, mu).quadratic_form(&x).unwrap();
                prop_assert_eq!(v0, vmu);
                if v0 > best0.0 { best0 = (v0, mask); }
                if vmu > best_mu.0 { best_mu = (vmu, mask); }
            }
            prop_assert_eq!(best0.1, best_mu.1);
        }
    }
}
