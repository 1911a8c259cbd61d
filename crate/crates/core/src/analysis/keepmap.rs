use alloc::vec::Vec;

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::keepset::{KeepSet, RemovalOutcome};

/// Class of cells whose center is not in the Keep set.
pub const NOT_IN_KEEP: i64 = -1;

/// Planar grid of removal classes: `NOT_IN_KEEP` or the index of the point
/// that an arrival at the cell center would remove.
#[derive(Debug, Clone, PartialEq)]
pub struct KeepMap {
    /// `[x_min, x_max, y_min, y_max]`
    pub bbox: [f64; 4],
    pub nx: usize,
    pub ny: usize,
    /// Row-major in `iy`, then `ix`.
    pub classes: Vec<i64>,
}

impl KeepMap {
    pub fn cell_center(&self, ix: usize, iy: usize) -> [f64; 2] {
        cell_center(&self.bbox, self.nx, self.ny, ix, iy)
    }

    pub fn class(&self, ix: usize, iy: usize) -> i64 {
        self.classes[iy * self.nx + ix]
    }

    /// Sorted distinct classes.
    pub fn distinct_classes(&self) -> Vec<i64> {
        let mut c = self.classes.clone();
        c.sort_unstable();
        c.dedup();
        c
    }
}

fn cell_center(bbox: &[f64; 4], nx: usize, ny: usize, ix: usize, iy: usize) -> [f64; 2] {
    [
        bbox[0] + (ix as f64 + 0.5) * (bbox[1] - bbox[0]) / nx as f64,
        bbox[2] + (iy as f64 + 0.5) * (bbox[3] - bbox[2]) / ny as f64,
    ]
}

pub fn keepmap_grid(x: &Configuration, body: &ConvexBody, bbox: [f64; 4], resolution: (usize, usize)) -> Result<KeepMap> {
    if x.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: x.dim() });
    }
    let (nx, ny) = resolution;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParameter("grid resolution must be positive"));
    }
    if !(bbox[0] < bbox[1] && bbox[2] < bbox[3]) || bbox.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("bounding box must have positive extent"));
    }
    let keep = KeepSet::new(x, body)?;
    let mut classes = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let z = cell_center(&bbox, nx, ny, ix, iy);
            let class = if keep.contains(&z) {
                match keep.removal(&z).outcome {
                    RemovalOutcome::Remove(j) => j as i64,
                    RemovalOutcome::IncomingExtreme => NOT_IN_KEEP,
                }
            } else {
                NOT_IN_KEEP
            };
            classes.push(class);
        }
    }
    Ok(KeepMap { bbox, nx, ny, classes })
}
