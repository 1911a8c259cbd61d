use alloc::vec::Vec;

use super::mean_se;
use crate::configuration::Configuration;
use crate::geometry::ConvexBody;
use crate::math::{ln, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Functional {
    LogF,
    H,
    G,
}

impl Functional {
    pub fn as_str(&self) -> &'static str {
        match self {
            Functional::LogF => "logF",
            Functional::H => "h",
            Functional::G => "g",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DriftStatus {
    Pass,
    Fail,
    /// Reported without a verdict.
    Descriptive,
    EmptyConditioningSet,
}

/// One-sided check `mean <= bound + 3 SE` on conditional mean increments.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DriftReport {
    pub functional: Functional,
    pub n_increments: usize,
    pub conditional_mean: f64,
    pub standard_error: f64,
    pub bound: f64,
    pub pass: bool,
    pub status: DriftStatus,
}

pub fn drift_report(functional: Functional, increments: &[f64], bound: f64, descriptive: bool) -> DriftReport {
    let (mean, se) = mean_se(increments);
    let ok = mean <= bound + 3.0 * se;
    let status = if increments.is_empty() {
        DriftStatus::EmptyConditioningSet
    } else if descriptive {
        DriftStatus::Descriptive
    } else if ok {
        DriftStatus::Pass
    } else {
        DriftStatus::Fail
    };
    DriftReport {
        functional,
        n_increments: increments.len(),
        conditional_mean: mean,
        standard_error: se,
        bound,
        pass: status != DriftStatus::Fail,
        status,
    }
}

/// One-sided check `frequency >= bound - 3 SE` for a binomial frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbabilityReport {
    pub n: usize,
    pub frequency: f64,
    pub standard_error: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn frequency_report(hits: usize, n: usize, bound: f64) -> ProbabilityReport {
    let p = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
    let se = if n == 0 { 0.0 } else { sqrt(p * (1.0 - p) / n as f64) };
    ProbabilityReport {
        n,
        frequency: p,
        standard_error: se,
        bound,
        pass: n > 0 && p >= bound - 3.0 * se,
    }
}

/// Functionals of one configuration that the drift checks condition on.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Snapshot {
    pub f: f64,
    pub h: f64,
    pub a: f64,
    /// `½ log F - log d°_B`; `-inf` when no point lies in the interior or the
    /// body is the full space.
    pub g: f64,
    /// `d_min / D`
    pub separation: f64,
}

impl Snapshot {
    pub fn of(config: &Configuration, body: &ConvexBody) -> Snapshot {
        let f = config.moment_of_inertia();
        let (d_min, d_max) = config.min_max_distance();
        let mu = config.center_of_mass();
        let a = config
            .points()
            .map(|p| crate::math::dist_sq(p, &mu))
            .fold(0.0, f64::max);
        let interior = config
            .points()
            .map(|p| body.depth(p))
            .filter(|&t| t > 0.0)
            .fold(f64::INFINITY, f64::min);
        Snapshot {
            f,
            h: 0.5 * ln(f) - ln(d_min),
            a: sqrt(a),
            g: 0.5 * ln(f) - ln(interior),
            separation: d_min / d_max,
        }
    }
}

/// Accumulates `(before, after)` snapshot pairs and turns them into reports.
#[derive(Debug, Clone, Default)]
pub struct DriftCollector {
    pub pairs: Vec<(Snapshot, Snapshot)>,
}

impl DriftCollector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, before: Snapshot, after: Snapshot) {
        self.pairs.push((before, after));
    }

    pub fn extend(&mut self, other: DriftCollector) {
        self.pairs.extend(other.pairs);
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `E[Δ log F] <= -4^{-d}/(4M)`
    pub fn log_f_report(&self, drift_bound: f64) -> DriftReport {
        let inc: Vec<f64> = self.pairs.iter().map(|(b, a)| ln(a.f) - ln(b.f)).collect();
        drift_report(Functional::LogF, &inc, -drift_bound, false)
    }

    /// `P(F_{n+1} - F_n < -F_n/(4M)) >= 4^{-d}`
    pub fn decrease_probability(&self, drop_factor: f64, prob_bound: f64) -> ProbabilityReport {
        let hits = self
            .pairs
            .iter()
            .filter(|(b, a)| a.f - b.f < -drop_factor * b.f)
            .count();
        frequency_report(hits, self.pairs.len(), prob_bound)
    }

    /// `E[Δh] <= 0` on `{h >= threshold, A <= r0}`.
    pub fn h_report(&self, threshold: f64, r0: f64) -> DriftReport {
        let inc: Vec<f64> = self
            .pairs
            .iter()
            .filter(|(b, _)| b.h >= threshold && b.a <= r0)
            .map(|(b, a)| a.h - b.h)
            .collect();
        drift_report(Functional::H, &inc, 0.0, false)
    }

    /// Mean `Δg` on `{g >= log(1/δ)}`; descriptive only.
    pub fn g_report(&self, delta: f64) -> DriftReport {
        let level = -ln(delta);
        let inc: Vec<f64> = self
            .pairs
            .iter()
            .filter(|(b, a)| b.g >= level && a.g.is_finite())
            .map(|(b, a)| a.g - b.g)
            .collect();
        drift_report(Functional::G, &inc, 0.0, true)
    }
}

/// Distribution of `d_min / D` along a run, reported against a threshold.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReturnReport {
    pub n: usize,
    pub threshold: f64,
    pub fraction_at_least: f64,
    /// Quantiles at 1%, 10%, 50%, 90% and 99%.
    pub quantiles: [f64; 5],
}

pub fn return_report(ratios: &[f64], threshold: f64) -> ReturnReport {
    let mut sorted: Vec<f64> = ratios.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| {
        if sorted.is_empty() {
            0.0
        } else {
            sorted[libm::floor(p * (sorted.len() - 1) as f64) as usize]
        }
    };
    let hits = ratios.iter().filter(|&&r| r >= threshold).count();
    ReturnReport {
        n: ratios.len(),
        threshold,
        fraction_at_least: if ratios.is_empty() { 0.0 } else { hits as f64 / ratios.len() as f64 },
        quantiles: [q(0.01), q(0.1), q(0.5), q(0.9), q(0.99)],
    }
}
