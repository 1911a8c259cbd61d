use alloc::vec::Vec;

use rand::Rng;

use crate::error::Result;
use crate::math::{dist, sqrt};
use crate::process::{run_trajectory_observed, RunParams};

/// `μ(Y(n))` and `sqrt F(Y(n))` at the anchor step, and the run's limit estimate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TightnessSample {
    pub mu_anchor: Vec<f64>,
    pub sqrt_f_anchor: f64,
    pub xi_hat: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TightnessReport {
    pub n_runs: usize,
    pub covered: usize,
    pub coverage: f64,
    pub standard_error: f64,
    /// `1 - ε`
    pub required: f64,
    pub coefficient: f64,
    pub pass: bool,
}

/// Runs one trajectory and records the anchor state after `n_anchor` steps.
/// The stop rule of `params` must let the run go past the anchor.
pub fn tightness_sample<R: Rng + ?Sized>(params: &RunParams, n_anchor: u64, rng: &mut R) -> Result<Option<TightnessSample>> {
    let mut anchor = None;
    if n_anchor == 0 {
        anchor = Some((params.initial.center_of_mass(), sqrt(params.initial.moment_of_inertia())));
    }
    let rec = run_trajectory_observed(params, rng, |state, step| {
        if step.n == n_anchor {
            anchor = Some((state.center_of_mass(), sqrt(step.f_after)));
        }
    })?;
    Ok(anchor.map(|(mu_anchor, sqrt_f_anchor)| TightnessSample {
        mu_anchor,
        sqrt_f_anchor,
        xi_hat: rec.xi_hat.into_vec(),
    }))
}

/// Fraction of runs with `||ξ̂ - μ(Y(n))|| <= coefficient · sqrt F(Y(n))`,
/// checked against `1 - ε` with 3 binomial standard errors of slack.
pub fn tightness_coverage(samples: &[TightnessSample], coefficient: f64, eps: f64) -> TightnessReport {
    let covered = samples
        .iter()
        .filter(|s| dist(&s.xi_hat, &s.mu_anchor) <= coefficient * s.sqrt_f_anchor)
        .count();
    let n = samples.len();
    let p = if n == 0 { 0.0 } else { covered as f64 / n as f64 };
    let se = if n == 0 { 0.0 } else { sqrt(p * (1.0 - p) / n as f64) };
    TightnessReport {
        n_runs: n,
        covered,
        coverage: p,
        standard_error: se,
        required: 1.0 - eps,
        coefficient,
        pass: n > 0 && p >= (1.0 - eps) - 3.0 * se,
    }
}
