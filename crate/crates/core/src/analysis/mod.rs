//! Theory constants and empirical verifiers for the quantitative claims about
//! Jante chains: drift of `log F`, `h` and `g`, exodus times, atom signatures
//! in limit-point ensembles, tightness of the limit, the two-step exodus
//! region and Keep classification maps.

mod atoms;
mod constants;
mod drift;
mod exodus;
mod keepmap;
mod two_step;
mod tightness;

pub use atoms::{atom_scan, AtomRung, AtomScanReport, DEFAULT_EPS_LADDER};
pub use constants::{compute_constants, EscapeConstants, TheoryConstants};
pub use drift::{
    drift_report, frequency_report, return_report, DriftCollector, DriftReport, DriftStatus, Functional,
    ProbabilityReport, ReturnReport, Snapshot,
};
pub use exodus::{exodus_statistics, geometric_half_fit, ExodusStatistics, GeometricFit, GEOMETRIC_BINS};
pub use keepmap::{keepmap_grid, KeepMap, NOT_IN_KEEP};
pub use two_step::{two_step_region, two_step_replay, TwoStepOutcome, TwoStepReplay};
pub use tightness::{tightness_coverage, tightness_sample, TightnessReport, TightnessSample};

use crate::math::sqrt;

/// Mean and standard error of the mean, summed in index order.
pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, sqrt(var / n))
}
