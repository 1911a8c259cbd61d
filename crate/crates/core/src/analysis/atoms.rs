use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::check_dim;
use crate::math::dist_sq;

/// `10^-1, ..., 10^-6`
pub const DEFAULT_EPS_LADDER: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Statistics at one scale `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AtomRung {
    pub eps: f64,
    /// Largest number of points in a closed `ε`-ball centered at a point.
    pub max_cluster_count: usize,
    /// Fraction of ordered pairs of distinct indices at distance `<= ε`.
    pub pair_fraction: f64,
    /// Fraction of points within `ε` of some probe.
    pub probe_hit_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AtomScanReport {
    pub n_points: usize,
    pub ladder: Vec<AtomRung>,
    /// `K - #distinct points`.
    pub exact_collisions: usize,
}

/// Looks for point masses in an ensemble of limit points.
pub fn atom_scan<P: AsRef<[f64]>, Q: AsRef<[f64]>>(points: &[P], probes: &[Q], eps_ladder: &[f64]) -> Result<AtomScanReport> {
    let pts: Vec<&[f64]> = points.iter().map(AsRef::as_ref).collect();
    let probes: Vec<&[f64]> = probes.iter().map(AsRef::as_ref).collect();
    let dim = pts.first().map_or(0, |p| p.len());
    for p in pts.iter().chain(&probes) {
        check_dim(dim, p.len())?;
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    if eps_ladder.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter("scan radii must be positive"));
    }
    let k = pts.len();
    let ladder = eps_ladder.iter().map(|&eps| rung(&pts, &probes, eps)).collect();
    let mut sorted = pts.clone();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let distinct = if k == 0 { 0 } else { 1 + sorted.windows(2).filter(|w| w[0] != w[1]).count() };
    Ok(AtomScanReport {
        n_points: k,
        ladder,
        exact_collisions: k - distinct,
    })
}

fn rung(pts: &[&[f64]], probes: &[&[f64]], eps: f64) -> AtomRung {
    let k = pts.len();
    let e2 = eps * eps;
    let cell = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| libm::floor(x / eps) as i64).collect() };
    let mut grid: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for (i, p) in pts.iter().enumerate() {
        grid.entry(cell(p)).or_default().push(i);
    }
    let dim = pts.first().map_or(0, |p| p.len());
    let mut max_count = 0;
    let mut pairs: u64 = 0;
    let mut key = alloc::vec![0i64; dim];
    for p in pts {
        let base = cell(p);
        let mut count = 0usize;
        // visit the 3^d neighbouring cells
        for code in 0..3usize.pow(dim as u32) {
            let mut c = code;
            for (kk, b) in key.iter_mut().zip(&base) {
                *kk = b + (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(members) = grid.get(&key) {
                count += members.iter().filter(|&&j| dist_sq(p, pts[j]) <= e2).count();
            }
        }
        max_count = max_count.max(count);
        pairs += (count - 1) as u64;
    }
    let hits = pts
        .iter()
        .filter(|p| probes.iter().any(|q| dist_sq(p, q) <= e2))
        .count();
    AtomRung {
        eps,
        max_cluster_count: max_count,
        pair_fraction: if k < 2 { 0.0 } else { pairs as f64 / (k as f64 * (k as f64 - 1.0)) },
        probe_hit_fraction: if k == 0 { 0.0 } else { hits as f64 / k as f64 },
    }
}
