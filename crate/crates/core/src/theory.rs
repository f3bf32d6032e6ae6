//! Closed-form recovery thresholds and success-probability bounds.
//!
//! | quantity | formula |
//! |---|---|
//! | exact-recovery phase | `sqrt(alpha) - sqrt(beta)` vs `sqrt(2)` |
//! | vote extension rate | `gamma > (8/3)(2 alpha + beta)/(alpha - beta)^2` |
//! | sketch-and-solve rate | `gamma > (16/3)(2 alpha + beta)/(alpha - beta)^2` |
//! | sketch rate with slack `eta` | `gamma > (16/3)(2 alpha + beta - eta)/(alpha - beta - 2 eta)^2` |
//! | conjectured sketch rate | `gamma > 2/(sqrt(alpha) - sqrt(beta))^2` |
//! | unbalanced recovery with known `(p+q)/2` | `3(alpha - beta)^2 > 16(2 alpha + beta) + 24(alpha - beta) delta` |
//!
//! Bounds are returned unclamped; negative probability bounds are vacuous.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Tolerance for landing exactly on the phase boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Recoverable,
    Impossible,
    Boundary,
}

fn check_ordered(alpha: f64, beta: f64, strict: bool) -> Result<()> {
    if !(beta > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("need alpha, beta > 0, got {alpha}, {beta}")));
    }
    if (strict && alpha <= beta) || (!strict && alpha < beta) {
        return Err(invalid(format!("need alpha > beta, got {alpha}, {beta}")));
    }
    Ok(())
}

/// Where `(alpha, beta)` sits relative to `sqrt(alpha) - sqrt(beta) = sqrt(2)`.
pub fn prop1_phase(alpha: f64, beta: f64) -> Result<Phase> {
    check_ordered(alpha, beta, false)?;
    let d = alpha.sqrt() - beta.sqrt() - std::f64::consts::SQRT_2;
    Ok(if d.abs() <= BOUNDARY_TOLERANCE {
        Phase::Boundary
    } else if d > 0.0 {
        Phase::Recoverable
    } else {
        Phase::Impossible
    })
}

/// `(8/3)(2 alpha + beta)/(alpha - beta)^2`
pub fn lemma2_gamma_threshold(alpha: f64, beta: f64) -> Result<f64> {
    check_ordered(alpha, beta, true)?;
    Ok(8.0 * (2.0 * alpha + beta) / (3.0 * (alpha - beta).powi(2)))
}

/// `(16/3)(2 alpha + beta)/(alpha - beta)^2`
pub fn theorem6_gamma_threshold(alpha: f64, beta: f64) -> Result<f64> {
    check_ordered(alpha, beta, true)?;
    Ok(16.0 * (2.0 * alpha + beta) / (3.0 * (alpha - beta).powi(2)))
}

/// `(16/3)(2 alpha + beta - eta)/(alpha - beta - 2 eta)^2`; `eta = 0` is
/// [`theorem6_gamma_threshold`].
pub fn sketch_gamma_threshold_with_slack(alpha: f64, beta: f64, eta: f64) -> Result<f64> {
    check_ordered(alpha, beta, true)?;
    if !(eta >= 0.0) || alpha - beta - 2.0 * eta <= 0.0 {
        return Err(invalid(format!("need 0 <= eta < (alpha - beta)/2, got {eta}")));
    }
    Ok(16.0 * (2.0 * alpha + beta - eta) / (3.0 * (alpha - beta - 2.0 * eta).powi(2)))
}

/// `2/(sqrt(alpha) - sqrt(beta))^2`
pub fn conjecture_gamma_threshold(alpha: f64, beta: f64) -> Result<f64> {
    check_ordered(alpha, beta, true)?;
    Ok(2.0 / (alpha.sqrt() - beta.sqrt()).powi(2))
}

/// `min{1, 4/(sqrt(alpha) - sqrt(beta))^2}`
pub fn auto_gamma(alpha: f64, beta: f64) -> Result<f64> {
    check_ordered(alpha, beta, true)?;
    Ok((4.0 / (alpha.sqrt() - beta.sqrt()).powi(2)).min(1.0))
}

/// Lower bound on the probability that the planted `g g^T` is the unique
/// `(A, mu)`-SDP solution for `G ~ SBM(n1, n2, p, q)`, `mu > q`.
pub fn lemma4_success_bound(n1: usize, n2: usize, p: f64, q: f64, mu: f64) -> Result<f64> {
    if n1 == 0 || n2 == 0 {
        return Err(invalid("community sizes must be positive"));
    }
    if !(p > q && q > 0.0 && p <= 1.0) {
        return Err(invalid(format!("need 1 >= p > q > 0, got p={p}, q={q}")));
    }
    if !(mu > q) {
        return Err(invalid(format!("need mu > q, got mu={mu}, q={q}")));
    }
    let n = (n1 + n2) as f64;
    let m = n1.abs_diff(n2) as f64;
    let exponent = if mu < (p + q) / 2.0 {
        1.5 * ((mu - q) * n).powi(2) / ((3.0 * p + q + 2.0 * mu) * n + 3.0 * (p - q) * m)
    } else {
        (3.0 / 16.0) * ((p - q) * n - (2.0 * mu - (p + q)) * m).powi(2)
            / ((2.0 * p + q) * n + (2.0 * p - q - mu) * m)
    };
    Ok(1.0 - 2.0 * n * (-exponent).exp())
}

/// `3(alpha - beta)^2 > 16(2 alpha + beta) + 24(alpha - beta) delta`
pub fn corollary5_condition(alpha: f64, beta: f64, delta: f64) -> Result<bool> {
    check_ordered(alpha, beta, true)?;
    if !(delta >= 0.0) {
        return Err(invalid(format!("delta must be non-negative, got {delta}")));
    }
    let gap = alpha - beta;
    Ok(3.0 * gap * gap > 16.0 * (2.0 * alpha + beta) + 24.0 * gap * delta)
}

/// The phase boundary as a function of `beta`: `alpha = (sqrt(beta) + sqrt(2))^2`,
/// expanded so that `beta = 2` gives exactly `8`.
pub fn prop1_curve_alpha(beta: f64) -> f64 {
    beta + 2.0 + 2.0 * (2.0 * beta).sqrt()
}

/// Boundary of `conjecture_gamma_threshold(alpha, beta) < gamma`:
/// `alpha = (sqrt(beta) + sqrt(2/gamma))^2`.
pub fn conjecture_iso_alpha(beta: f64, gamma: f64) -> f64 {
    let c = 2.0 / gamma;
    beta + c + 2.0 * (beta * c).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub alpha: f64,
    pub beta: f64,
    pub prop1_phase: Phase,
    pub prop1_recoverable: bool,
    pub lemma2_gamma: f64,
    pub theorem6_gamma: f64,
    pub conjecture_gamma: f64,
    pub auto_gamma: f64,
    pub delta: f64,
    pub corollary5_holds: bool,
}

pub fn threshold_report(alpha: f64, beta: f64, delta: f64) -> Result<ThresholdReport> {
    let phase = prop1_phase(alpha, beta)?;
    Ok(ThresholdReport {
        alpha,
        beta,
        prop1_phase: phase,
        prop1_recoverable: phase == Phase::Recoverable,
        lemma2_gamma: lemma2_gamma_threshold(alpha, beta)?,
        theorem6_gamma: theorem6_gamma_threshold(alpha, beta)?,
        conjecture_gamma: conjecture_gamma_threshold(alpha, beta)?,
        auto_gamma: auto_gamma(alpha, beta)?,
        delta,
        corollary5_holds: corollary5_condition(alpha, beta, delta)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_examples() {
        assert_eq!(prop1_phase(8.0, 2.0).unwrap(), Phase::Boundary);
        assert_eq!(prop1_phase(50.0, 1.0).unwrap(), Phase::Recoverable);
        assert_eq!(prop1_phase(2.0, 1.0).unwrap(), Phase::Impossible);
        assert_eq!(prop1_phase(3.0, 3.0).unwrap(), Phase::Impossible);
        assert!(prop1_phase(1.0, 2.0).is_err());
    }

    #[test]
    fn rejects_unordered_rates() {
        assert!(lemma2_gamma_threshold(1.0, 1.0).is_err());
        assert!(theorem6_gamma_threshold(1.0, 2.0).is_err());
        assert!(conjecture_gamma_threshold(2.0, 2.0).is_err());
        assert!(auto_gamma(2.0, 0.0).is_err());
        assert!(corollary5_condition(3.0, 1.0, -1.0).is_err());
        assert!(lemma4_success_bound(5, 5, 0.1, 0.2, 0.3).is_err());
        assert!(lemma4_success_bound(5, 5, 0.3, 0.2, 0.1).is_err());
    }

    #[test]
    fn curve_hits_exact_surd_point() {
        assert_eq!(prop1_curve_alpha(2.0), 8.0);
        assert_eq!(conjecture_iso_alpha(2.0, 1.0), 8.0);
    }

    #[test]
    fn zero_slack_matches_sketch_threshold() {
        assert_eq!(
            sketch_gamma_threshold_with_slack(50.0, 1.0, 0.0).unwrap(),
            theorem6_gamma_threshold(50.0, 1.0).unwrap()
        );
        assert!(sketch_gamma_threshold_with_slack(5.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn success_bound_branches_meet_at_midpoint() {
        let (p, q) = (0.3, 0.1);
        let mid = (p + q) / 2.0;
        let below = lemma4_success_bound(40, 60, p, q, mid - 1e-14).unwrap();
        let at = lemma4_success_bound(40, 60, p, q, mid).unwrap();
        assert!((below - at).abs() < 1e-9);
    }

    #[test]
    fn success_bound_vacuous_near_q() {
        let b = lemma4_success_bound(50, 50, 0.3, 0.1, 0.1 + 1e-12).unwrap();
        assert!((b - (1.0 - 200.0)).abs() < 1e-6);
    }
}
