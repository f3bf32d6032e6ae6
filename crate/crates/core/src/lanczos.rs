//! Smallest eigenvalue of a symmetric operator on the orthogonal complement of
//! a known null direction.
//!
//! Lanczos with full reorthogonalization against both the deflated direction
//! and all previous basis vectors. On breakdown the iteration restarts from a
//! fresh random vector orthogonal to everything seen so far, so once the basis
//! fills the whole complement the Ritz values are the eigenvalues themselves.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::rng::Seed;
use crate::sdp::{axpy, dot};

/// Smallest Ritz pair of the deflated operator.
#[derive(Debug, Clone)]
pub struct DeflatedMin {
    /// Smallest Ritz value; a Rayleigh quotient of `vector`, so an upper
    /// bound on the smallest eigenvalue.
    pub ritz_value: f64,
    /// Unit vector orthogonal to the deflated direction.
    pub vector: Vec<f64>,
    /// `||M y - theta y||` computed explicitly.
    pub residual: f64,
    /// The basis spans the whole complement.
    pub exhaustive: bool,
    pub iterations: usize,
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = dot(x, x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    // twice is enough
    for _ in 0..2 {
        for q in basis {
            let c = dot(x, q);
            axpy(-c, q, x);
        }
    }
}

/// Smallest eigenpair of `apply` restricted to the complement of `null_dir`.
///
/// `scale` sets the breakdown threshold; `max_iter` caps the basis size.
pub fn deflated_min<F>(
    dim: usize,
    null_dir: &[f64],
    mut apply: F,
    scale: f64,
    max_iter: usize,
    seed: Seed,
) -> Option<DeflatedMin>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if dim < 2 {
        return None;
    }
    let mut g = null_dir.to_vec();
    if normalize(&mut g) == 0.0 {
        return None;
    }
    let target = (dim - 1).min(max_iter.max(1));
    let mut rng = seed.rng();
    let breakdown = 1e-10 * scale.max(f64::MIN_POSITIVE);

    // basis[0] is the deflated direction; Lanczos vectors follow.
    let mut basis: Vec<Vec<f64>> = vec![g];
    let mut alpha: Vec<f64> = Vec::with_capacity(target);
    let mut beta: Vec<f64> = Vec::with_capacity(target);
    let mut w = vec![0.0; dim];

    let fresh = |rng: &mut rand_chacha::ChaCha8Rng, basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        for _ in 0..4 {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
            normalize(&mut v);
            orthogonalize(&mut v, basis);
            if normalize(&mut v) > 1e-8 {
                return Some(v);
            }
        }
        None
    };

    let mut q = fresh(&mut rng, &basis)?;
    while alpha.len() < target {
        apply(&q, &mut w);
        let a = dot(&w, &q);
        alpha.push(a);
        basis.push(q);
        orthogonalize(&mut w, &basis);
        if alpha.len() == target {
            break;
        }
        let b = normalize(&mut w);
        if b > breakdown {
            beta.push(b);
            q = w.clone();
        } else {
            // invariant subspace found; continue in its complement
            beta.push(0.0);
            match fresh(&mut rng, &basis) {
                Some(v) => q = v,
                None => break,
            }
        }
    }

    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (k, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let s = eig.eigenvectors.column(k);
    let mut y = vec![0.0; dim];
    for (j, qj) in basis[1..].iter().enumerate() {
        axpy(s[j], qj, &mut y);
    }
    orthogonalize(&mut y, &basis[..1]);
    normalize(&mut y);

    apply(&y, &mut w);
    let rq = dot(&y, &w);
    axpy(-rq, &y, &mut w);
    // the component along the deflated direction is not part of the
    // restricted operator
    orthogonalize(&mut w, &basis[..1]);
    let residual = dot(&w, &w).sqrt();

    Some(DeflatedMin {
        ritz_value: rq,
        vector: y,
        residual,
        exhaustive: m == dim - 1,
        iterations: m,
    })
}

/// Power iteration on `shift * I - M` in the complement of `null_dir`,
/// started from `start`. With `shift` at least the largest eigenvalue (a
/// Gershgorin bound works) this converges to the smallest eigenvector of `M`.
pub fn shifted_power_min<F>(
    dim: usize,
    null_dir: &[f64],
    mut apply: F,
    shift: f64,
    start: &[f64],
    iterations: usize,
) -> DeflatedMin
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut g = null_dir.to_vec();
    normalize(&mut g);
    let deflate = [g];
    let mut x = start.to_vec();
    orthogonalize(&mut x, &deflate);
    normalize(&mut x);
    let mut w = vec![0.0; dim];
    for _ in 0..iterations {
        apply(&x, &mut w);
        for (wi, xi) in w.iter_mut().zip(&x) {
            *wi = shift * xi - *wi;
        }
        orthogonalize(&mut w, &deflate);
        if normalize(&mut w) == 0.0 {
            break;
        }
        std::mem::swap(&mut x, &mut w);
    }
    apply(&x, &mut w);
    let rq = dot(&x, &w);
    axpy(-rq, &x, &mut w);
    orthogonalize(&mut w, &deflate);
    let residual = dot(&w, &w).sqrt();
    DeflatedMin {
        ritz_value: rq,
        vector: x,
        residual,
        exhaustive: false,
        iterations,
    }
}
