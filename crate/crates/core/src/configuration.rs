//! Configurations of `M` distinct labelled points and their geometric
//! functionals (center of mass, moment of inertia, radius, diameter, minimal
//! separation and the log-ratio `h`).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, ConvexBody, Point, UNBOUNDED_DISTANCE};
use crate::math::{dist, dist_sq, ln, sqrt};

/// Configurations with `d_min < DISTINCTNESS_TOLERANCE · max(1, D)` are
/// rejected when built from user input.
pub const DISTINCTNESS_TOLERANCE: f64 = 1e-14;

/// An ordered list of `M >= 2` distinct points with distinct arrival labels.
///
/// Initial points carry labels `-(M-1)..=0` in listing order; the point that
/// arrives at step `n` carries label `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    dim: usize,
    coords: Vec<f64>,
    labels: Vec<i64>,
}

/// All functionals of a configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Functionals {
    pub mu: Point,
    pub sigma: Point,
    /// Moment of inertia: sum of squared pairwise distances.
    pub f: f64,
    /// Largest distance from the center of mass.
    pub a: f64,
    /// Diameter.
    pub d_max: f64,
    /// Smallest pairwise distance.
    pub d_min: f64,
    /// `log(sqrt(F) / d_min)`
    pub h: f64,
}

impl Configuration {
    /// Labels the points `-(M-1)..=0` in order.
    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let m = points.len() as i64;
        Self::with_labels(points, (1 - m..=0).collect())
    }

    pub fn with_labels<P: AsRef<[f64]>>(points: &[P], labels: Vec<i64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewPoints(points.len()));
        }
        if labels.len() != points.len() {
            return Err(Error::InvalidParameter("one label per point is required"));
        }
        let dim = points[0].as_ref().len();
        if dim == 0 {
            return Err(Error::InvalidParameter("a point needs at least one coordinate"));
        }
        let mut coords = Vec::with_capacity(dim * points.len());
        for p in points {
            let p = p.as_ref();
            check_dim(dim, p.len())?;
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFinite);
            }
            coords.extend_from_slice(p);
        }
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DuplicateLabel);
        }
        let cfg = Configuration { dim, coords, labels };
        let (d_min, d_max) = cfg.min_max_distance();
        if d_min < DISTINCTNESS_TOLERANCE * d_max.max(1.0) {
            return Err(Error::DegenerateConfiguration);
        }
        Ok(cfg)
    }

    /// Builds a configuration already known to be well formed, rejecting only
    /// exactly coinciding points.
    pub(crate) fn from_raw(dim: usize, coords: Vec<f64>, labels: Vec<i64>) -> Result<Self> {
        let cfg = Configuration { dim, coords, labels };
        if cfg.min_max_distance().0 == 0.0 {
            return Err(Error::DegenerateConfiguration);
        }
        Ok(cfg)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points `M`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> i64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    /// Coordinates, point-major.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_points(&self) -> Vec<Point> {
        self.points().map(|p| Point::new(p.to_vec()).expect("finite")).collect()
    }

    pub fn contained_in(&self, body: &ConvexBody) -> bool {
        body.dim() == self.dim && self.points().all(|p| body.contains_unchecked(p))
    }

    /// `Σ = Σ_i x_i`
    pub fn sigma(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.dim];
        for p in self.points() {
            for (a, b) in s.iter_mut().zip(p) {
                *a += b;
            }
        }
        s
    }

    /// Center of mass, accumulated relative to the first point so that tiny
    /// configurations far from the origin keep their relative precision.
    pub fn center_of_mass(&self) -> Vec<f64> {
        let base = self.point(0);
        let mut s = vec![0.0; self.dim];
        for p in self.points().skip(1) {
            for k in 0..self.dim {
                s[k] += p[k] - base[k];
            }
        }
        let m = self.len() as f64;
        s.iter().zip(base).map(|(a, b)| b + a / m).collect()
    }

    /// Moment of inertia as the sum of squared pairwise distances.
    pub fn moment_of_inertia(&self) -> f64 {
        let mut f = 0.0;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                f += dist_sq(self.point(i), self.point(j));
            }
        }
        f
    }

    /// `M · Σ_i ||x_i - μ||²`, the second expression for the moment of inertia.
    pub fn moment_of_inertia_central(&self) -> f64 {
        let mu = self.center_of_mass();
        self.len() as f64 * self.points().map(|p| dist_sq(p, &mu)).sum::<f64>()
    }

    pub(crate) fn min_max_distance(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d2 = dist_sq(self.point(i), self.point(j));
                lo = lo.min(d2);
                hi = hi.max(d2);
            }
        }
        (sqrt(lo), sqrt(hi))
    }

    pub fn diameter(&self) -> f64 {
        self.min_max_distance().1
    }

    pub fn min_distance(&self) -> f64 {
        self.min_max_distance().0
    }

    pub fn functionals(&self) -> Result<Functionals> {
        let f = self.moment_of_inertia();
        debug_assert!({
            let g = self.moment_of_inertia_central();
            (f - g).abs() <= 1e-9 * f.max(f64::MIN_POSITIVE)
        });
        let (d_min, d_max) = self.min_max_distance();
        if d_min == 0.0 {
            return Err(Error::DegenerateConfiguration);
        }
        let mu = self.center_of_mass();
        let a = self.points().map(|p| dist(p, &mu)).fold(0.0, f64::max);
        let sigma = mu.iter().map(|c| c * self.len() as f64).collect();
        Ok(Functionals {
            mu: Point::new(mu)?,
            sigma: Point::new(sigma)?,
            f,
            a,
            d_max,
            d_min,
            h: 0.5 * ln(f) - ln(d_min),
        })
    }

    /// `h(X) = log(sqrt(F) / d_min)`
    pub fn h(&self) -> f64 {
        0.5 * ln(self.moment_of_inertia()) - ln(self.min_distance())
    }

    /// Slack of each inequality chaining `A`, `D`, `d_min` and `F`.
    pub fn check_functional_inequalities(&self) -> Result<InequalityReport> {
        let fx = self.functionals()?;
        let m = self.len() as f64;
        let pairs = m * (m - 1.0) / 2.0;
        let sides = [
            (m / (m - 1.0) * fx.a, fx.d_max),
            (fx.d_max, 2.0 * fx.a),
            (pairs * fx.d_min * fx.d_min, fx.f),
            (fx.f, pairs * fx.d_max * fx.d_max),
            (m * m / (m - 1.0) * fx.a * fx.a, fx.f),
            (fx.f, m * m * fx.a * fx.a),
        ];
        let mut slacks = [0.0; 6];
        let mut violated = false;
        for (s, (lhs, rhs)) in slacks.iter_mut().zip(sides) {
            *s = rhs - lhs;
            if *s < -1e-9 * lhs.abs().max(rhs.abs()) {
                violated = true;
            }
        }
        Ok(InequalityReport { slacks, violated })
    }

    /// `{(x - μ) / sqrt(F)}`; labels are preserved.
    pub fn rescale_recenter(&self) -> Result<Configuration> {
        let f = self.moment_of_inertia();
        // NaN fails too
        if f.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater) {
            return Err(Error::DegenerateConfiguration);
        }
        let mu = self.center_of_mass();
        let s = sqrt(f);
        let coords = self
            .points()
            .flat_map(|p| p.iter().zip(&mu).map(move |(x, m)| (x - m) / s))
            .collect();
        Self::from_raw(self.dim, coords, self.labels.clone())
    }

    pub fn translated(&self, v: &[f64]) -> Result<Configuration> {
        check_dim(self.dim, v.len())?;
        let coords = self
            .points()
            .flat_map(|p| p.iter().zip(v).map(|(x, t)| x + t))
            .collect();
        Self::from_raw(self.dim, coords, self.labels.clone())
    }

    pub fn scaled(&self, s: f64) -> Result<Configuration> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter("scale must be positive and finite"));
        }
        Self::from_raw(self.dim, self.coords.iter().map(|x| x * s).collect(), self.labels.clone())
    }

    /// Set equality of the point sets, ignoring order and labels.
    pub fn same_set(&self, other: &Configuration) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && self.points().all(|p| other.points().any(|q| p == q))
    }

    /// Index of the point carrying `label`.
    pub fn index_of_label(&self, label: i64) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Replaces point `idx`, keeping the configuration well formed.
    pub(crate) fn replace(&mut self, idx: usize, point: &[f64], label: i64) -> Result<()> {
        if self
            .points()
            .enumerate()
            .any(|(i, p)| i != idx && p == point)
        {
            return Err(Error::DegenerateConfiguration);
        }
        self.coords[idx * self.dim..(idx + 1) * self.dim].copy_from_slice(point);
        self.labels[idx] = label;
        Ok(())
    }

    /// Distances of the configuration, and of its interior points, to the
    /// complement of `body`.
    pub fn distance_to_boundary(&self, body: &ConvexBody) -> Result<BoundaryDistance> {
        check_dim(body.dim(), self.dim)?;
        let mut d_b = f64::INFINITY;
        let mut d_b_interior = f64::INFINITY;
        for p in self.points() {
            if !body.contains_unchecked(p) {
                return Err(Error::PointOutsideBody);
            }
            let depth = body.depth(p);
            d_b = d_b.min(depth);
            if depth > 0.0 {
                d_b_interior = d_b_interior.min(depth);
            }
        }
        if body.is_full_space() {
            d_b = UNBOUNDED_DISTANCE;
        }
        Ok(BoundaryDistance { d_b, d_b_interior })
    }
}

/// Result of [`Configuration::distance_to_boundary`]; both fields use
/// [`UNBOUNDED_DISTANCE`] as the infinite sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryDistance {
    pub d_b: f64,
    /// Minimum over points strictly inside the body; infinite when every point
    /// lies on the boundary.
    pub d_b_interior: f64,
}

/// Slacks `rhs - lhs` of
/// `M/(M-1)·A <= D`, `D <= 2A`, `M(M-1)/2·d² <= F`, `F <= M(M-1)/2·D²`,
/// `M²/(M-1)·A² <= F`, `F <= M²A²`, in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub slacks: [f64; 6],
    /// Some slack is below `-1e-9` relative to its sides.
    pub violated: bool,
}

impl InequalityReport {
    pub const NAMES: [&'static str; 6] = [
        "M/(M-1) A <= D",
        "D <= 2A",
        "M(M-1)/2 d^2 <= F",
        "F <= M(M-1)/2 D^2",
        "M^2/(M-1) A^2 <= F",
        "F <= M^2 A^2",
    ];
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff_distance<P: AsRef<[f64]>, Q: AsRef<[f64]>>(a: &[P], b: &[Q]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("Hausdorff distance needs non-empty sets"));
    }
    let dim = a[0].as_ref().len();
    for p in a {
        check_dim(dim, p.as_ref().len())?;
    }
    for q in b {
        check_dim(dim, q.as_ref().len())?;
    }
    let directed = |from: &[&[f64]], to: &[&[f64]]| {
        from.iter()
            .map(|p| to.iter().map(|q| dist_sq(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    let a: Vec<&[f64]> = a.iter().map(AsRef::as_ref).collect();
    let b: Vec<&[f64]> = b.iter().map(AsRef::as_ref).collect();
    Ok(sqrt(directed(&a, &b).max(directed(&b, &a))))
}
