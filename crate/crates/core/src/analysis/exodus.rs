use alloc::vec::Vec;

use super::mean_se;
use crate::math::powi;

/// Number of cells of the geometric fit: `τ-1 = 1, ..., 14` and `τ-1 >= 15`.
pub const GEOMETRIC_BINS: usize = 15;

/// Chi-square statistic of `τ - 1` against `Geometric(1/2)` on `{1, 2, ...}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeometricFit {
    pub chi_square: f64,
    pub dof: usize,
    pub observed: Vec<u64>,
    pub expected: Vec<f64>,
    /// Exodus times below 2, impossible for two points.
    pub out_of_support: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExodusStatistics {
    pub n_runs: usize,
    pub n_reached: usize,
    pub all_finite: bool,
    pub mean_tau: f64,
    pub se_tau: f64,
    /// `(τ, count)` sorted by `τ`.
    pub histogram: Vec<(u64, u64)>,
    /// Present for two-point runs.
    pub geometric: Option<GeometricFit>,
}

pub fn geometric_half_fit(taus: &[u64]) -> GeometricFit {
    let mut observed = alloc::vec![0u64; GEOMETRIC_BINS];
    let mut out_of_support = 0;
    for &t in taus {
        match t {
            0 | 1 => out_of_support += 1,
            _ => observed[((t - 1) as usize).min(GEOMETRIC_BINS) - 1] += 1,
        }
    }
    let n = (taus.len() as u64 - out_of_support) as f64;
    let expected: Vec<f64> = (1..=GEOMETRIC_BINS)
        .map(|k| {
            let k = k as i32;
            // the last cell pools P(k >= 15) = 2^{-14}
            n * if k < GEOMETRIC_BINS as i32 { powi(0.5, k) } else { powi(0.5, k - 1) }
        })
        .collect();
    let chi_square = observed
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| (o as f64 - e) * (o as f64 - e) / e)
        .sum();
    GeometricFit {
        chi_square,
        dof: GEOMETRIC_BINS - 1,
        observed,
        expected,
        out_of_support,
    }
}

/// Summary of exodus times; `None` marks runs that stopped first.
pub fn exodus_statistics(taus: &[Option<u64>], m: usize) -> ExodusStatistics {
    let reached: Vec<u64> = taus.iter().flatten().copied().collect();
    let as_f: Vec<f64> = reached.iter().map(|&t| t as f64).collect();
    let (mean_tau, se_tau) = mean_se(&as_f);
    let mut sorted = reached.clone();
    sorted.sort_unstable();
    let mut histogram: Vec<(u64, u64)> = Vec::new();
    for t in sorted {
        match histogram.last_mut() {
            Some((v, c)) if *v == t => *c += 1,
            _ => histogram.push((t, 1)),
        }
    }
    ExodusStatistics {
        n_runs: taus.len(),
        n_reached: reached.len(),
        all_finite: reached.len() == taus.len(),
        mean_tau,
        se_tau,
        histogram,
        geometric: (m == 2 && !reached.is_empty()).then(|| geometric_half_fit(&reached)),
    }
}
