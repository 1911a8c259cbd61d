//! Convex bodies: membership, distance to the complement, uniform geometry
//! constants and uniform sampling on `body ∩ ball` regions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Deref;

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::math::{dist_sq, dot, norm_sq, powf, powi, sqrt};

/// Sentinel returned for distances to an empty complement (full space).
pub const UNBOUNDED_DISTANCE: f64 = f64::INFINITY;

/// Tolerance on the norm of polytope facet normals.
pub const NORMAL_TOLERANCE: f64 = 1e-12;

/// A point of `R^d` with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<f64>", into = "Vec<f64>"))]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("a point needs at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Point(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxBody {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxBody {
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn min_side(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallBody {
    center: Vec<f64>,
    radius: f64,
}

impl BallBody {
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Intersection of closed half-spaces `u_i · x <= h_i` with unit normals.
///
/// `bound`, when known, is a radius around the interior witness that contains
/// the whole polytope; it is what makes uniform sampling on the body possible.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeBody {
    dim: usize,
    normals: Vec<f64>,
    offsets: Vec<f64>,
    witness: Vec<f64>,
    bound: Option<f64>,
}

impl PolytopeBody {
    pub fn n_facets(&self) -> usize {
        self.offsets.len()
    }

    /// `(unit normal, offset)` pairs.
    pub fn facets(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.normals.chunks_exact(self.dim).zip(self.offsets.iter().copied())
    }

    pub fn witness(&self) -> &[f64] {
        &self.witness
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    fn slack(&self, z: &[f64]) -> f64 {
        self.facets()
            .map(|(u, h)| h - dot(u, z))
            .fold(f64::INFINITY, f64::min)
    }
}

/// The opinion space: a closed convex set with non-empty interior.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    FullSpace { dim: usize },
    Box(BoxBody),
    Ball(BallBody),
    Polytope(PolytopeBody),
}

impl ConvexBody {
    pub fn full_space(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidBody("dimension must be at least 1"));
        }
        Ok(ConvexBody::FullSpace { dim })
    }

    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidBody("dimension must be at least 1"));
        }
        check_dim(lower.len(), upper.len())?;
        check_finite(&lower)?;
        check_finite(&upper)?;
        if lower.iter().zip(&upper).any(|(l, u)| l >= u) {
            return Err(Error::InvalidBody("box needs lower < upper in every coordinate"));
        }
        Ok(ConvexBody::Box(BoxBody { lower, upper }))
    }

    /// `[0, 1]^d`
    pub fn unit_cube(dim: usize) -> Result<Self> {
        Self::new_box(vec![0.0; dim], vec![1.0; dim])
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidBody("dimension must be at least 1"));
        }
        check_finite(&center)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidBody("ball radius must be positive and finite"));
        }
        Ok(ConvexBody::Ball(BallBody { center, radius }))
    }

    /// Builds a polytope from `(unit normal, offset)` facets.
    pub fn polytope(
        facets: Vec<(Vec<f64>, f64)>,
        witness: Vec<f64>,
        bound: Option<f64>,
    ) -> Result<Self> {
        let dim = witness.len();
        if dim == 0 {
            return Err(Error::InvalidBody("dimension must be at least 1"));
        }
        check_finite(&witness)?;
        if facets.is_empty() {
            return Err(Error::InvalidBody("polytope needs at least one facet"));
        }
        let mut normals = Vec::with_capacity(facets.len() * dim);
        let mut offsets = Vec::with_capacity(facets.len());
        for (u, h) in facets {
            check_dim(dim, u.len())?;
            check_finite(&u)?;
            if !h.is_finite() {
                return Err(Error::NonFinite);
            }
            if (sqrt(norm_sq(&u)) - 1.0).abs() > NORMAL_TOLERANCE {
                return Err(Error::InvalidBody("facet normals must have unit length"));
            }
            if dot(&u, &witness) >= h {
                return Err(Error::InvalidBody(
                    "interior witness must strictly satisfy every facet inequality",
                ));
            }
            normals.extend_from_slice(&u);
            offsets.push(h);
        }
        if let Some(b) = bound {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidBody("bounding radius must be positive and finite"));
            }
        }
        Ok(ConvexBody::Polytope(PolytopeBody {
            dim,
            normals,
            offsets,
            witness,
            bound,
        }))
    }

    /// Like [`ConvexBody::polytope`] but rescales each `(normal, offset)` pair
    /// so the normal has unit length.
    pub fn polytope_normalized(
        facets: Vec<(Vec<f64>, f64)>,
        witness: Vec<f64>,
        bound: Option<f64>,
    ) -> Result<Self> {
        let mut unit = Vec::with_capacity(facets.len());
        for (u, h) in facets {
            let n = sqrt(norm_sq(&u));
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::InvalidBody("facet normal must be non-zero"));
            }
            unit.push((u.iter().map(|x| x / n).collect(), h / n));
        }
        Self::polytope(unit, witness, bound)
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::FullSpace { dim } => *dim,
            ConvexBody::Box(b) => b.lower.len(),
            ConvexBody::Ball(b) => b.center.len(),
            ConvexBody::Polytope(p) => p.dim,
        }
    }

    pub fn is_full_space(&self) -> bool {
        matches!(self, ConvexBody::FullSpace { .. })
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            ConvexBody::FullSpace { .. } => false,
            ConvexBody::Box(_) | ConvexBody::Ball(_) => true,
            ConvexBody::Polytope(p) => p.bound.is_some(),
        }
    }

    /// A ball containing the body, if one is known.
    pub fn bounding_ball(&self) -> Option<(Vec<f64>, f64)> {
        match self {
            ConvexBody::FullSpace { .. } => None,
            ConvexBody::Box(b) => {
                let center: Vec<f64> = b
                    .lower
                    .iter()
                    .zip(&b.upper)
                    .map(|(l, u)| 0.5 * (l + u))
                    .collect();
                // strictly larger so the closed box sits inside the open ball
                let radius = sqrt(dist_sq(&b.lower, &center)) * (1.0 + 1e-12);
                Some((center, radius))
            }
            ConvexBody::Ball(b) => Some((b.center.clone(), b.radius * (1.0 + 1e-12))),
            ConvexBody::Polytope(p) => p.bound.map(|r| (p.witness.clone(), r)),
        }
    }

    /// Lebesgue measure of the body when it has a closed form.
    pub fn volume(&self) -> Option<f64> {
        match self {
            ConvexBody::FullSpace { .. } | ConvexBody::Polytope(_) => None,
            ConvexBody::Box(b) => Some(b.lower.iter().zip(&b.upper).map(|(l, u)| u - l).product()),
            ConvexBody::Ball(b) => Some(unit_ball_volume(b.center.len()) * powi(b.radius, b.center.len() as i32)),
        }
    }

    /// Closed-set membership.
    pub fn contains(&self, z: &[f64]) -> Result<bool> {
        check_dim(self.dim(), z.len())?;
        Ok(self.contains_unchecked(z))
    }

    pub(crate) fn contains_unchecked(&self, z: &[f64]) -> bool {
        match self {
            ConvexBody::FullSpace { .. } => true,
            ConvexBody::Box(b) => z
                .iter()
                .zip(b.lower.iter().zip(&b.upper))
                .all(|(x, (l, u))| *l <= *x && *x <= *u),
            ConvexBody::Ball(b) => dist_sq(z, &b.center) <= b.radius * b.radius,
            ConvexBody::Polytope(p) => p.facets().all(|(u, h)| dot(u, z) <= h),
        }
    }

    /// `dist(z, B^c)`: zero outside the interior, [`UNBOUNDED_DISTANCE`] for
    /// the full space.
    pub fn distance_to_complement(&self, z: &[f64]) -> Result<f64> {
        check_dim(self.dim(), z.len())?;
        Ok(self.depth(z))
    }

    pub(crate) fn depth(&self, z: &[f64]) -> f64 {
        match self {
            ConvexBody::FullSpace { .. } => UNBOUNDED_DISTANCE,
            ConvexBody::Box(b) => z
                .iter()
                .zip(b.lower.iter().zip(&b.upper))
                .map(|(x, (l, u))| f64::min(x - l, u - x))
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
            ConvexBody::Ball(b) => (b.radius - sqrt(dist_sq(z, &b.center))).max(0.0),
            ConvexBody::Polytope(p) => p.slack(z).max(0.0),
        }
    }

    /// Default uniform-geometry radius: `min(1, half the minimal box side /
    /// ball radius / witness depth)`; `1` for the full space.
    pub fn default_r0(&self) -> f64 {
        match self {
            ConvexBody::FullSpace { .. } => 1.0,
            ConvexBody::Box(b) => f64::min(1.0, 0.5 * b.min_side()),
            ConvexBody::Ball(b) => f64::min(1.0, 0.5 * b.radius),
            ConvexBody::Polytope(p) => f64::min(1.0, 0.5 * p.slack(&p.witness)),
        }
    }

    /// `b(r0) = inf_x λ(B(x, r0) ∩ B)` and `c = b(r0) / (V(d) r0^d)`.
    ///
    /// Exact for the full space, balls and boxes with `r0` not exceeding the
    /// shortest side. Other cases are Monte Carlo estimates (fixed internal
    /// seed) and are flagged `approximate`.
    pub fn uniform_geometry_constants(&self, r0: f64) -> Result<UniformGeometryData> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::InvalidParameter("r0 must be positive and finite"));
        }
        let d = self.dim();
        let full = unit_ball_volume(d) * powi(r0, d as i32);
        let mut rng = SmallRng::seed_from_u64(0x6a61_6e74_655f_6230);
        let (b_r0, approximate) = match self {
            ConvexBody::FullSpace { .. } => (full, false),
            ConvexBody::Box(b) => {
                if r0 <= b.min_side() {
                    (full / powi(2.0, d as i32), false)
                } else {
                    // every corner cap is congruent; the corner is the worst point
                    let (v, _) = mc_cap_volume(&mut rng, self, &b.lower, r0, 400_000);
                    (v, true)
                }
            }
            ConvexBody::Ball(b) => {
                let v = if r0 >= 2.0 * b.radius {
                    unit_ball_volume(d) * powi(b.radius, d as i32)
                } else {
                    ball_intersection_volume(d, b.radius, r0, b.radius)
                };
                (v, false)
            }
            ConvexBody::Polytope(p) => (polytope_min_cap(&mut rng, self, p, r0), true),
        };
        let c = if self.is_full_space() { 1.0 } else { (b_r0 / full).min(1.0) };
        Ok(UniformGeometryData {
            r0,
            b_r0,
            c,
            approximate,
        })
    }
}

/// Minimum of Monte Carlo cap volumes over a sample of boundary points.
fn polytope_min_cap<R: Rng + ?Sized>(rng: &mut R, body: &ConvexBody, p: &PolytopeBody, r0: f64) -> f64 {
    const CANDIDATES: usize = 48;
    const CAP_SAMPLES: usize = 20_000;
    let d = p.dim;
    let spread = p.bound.unwrap_or(4.0 * r0 + p.slack(&p.witness));
    let mut best = f64::INFINITY;
    let mut probe = vec![0.0; d];
    let mut q = vec![0.0; d];
    for _ in 0..CANDIDATES {
        sample_ball_offset(rng, spread, &mut probe);
        for (x, w) in probe.iter_mut().zip(&p.witness) {
            *x += w;
        }
        for (u, h) in p.facets() {
            let s = dot(u, &probe) - h;
            for k in 0..d {
                q[k] = probe[k] - s * u[k];
            }
            if p.slack(&q) >= -1e-9 * (1.0 + spread) {
                let (v, _) = mc_cap_volume(rng, body, &q, r0, CAP_SAMPLES);
                best = best.min(v);
            }
        }
    }
    if best.is_finite() {
        best
    } else {
        unit_ball_volume(d) * powi(r0, d as i32) * 0.5
    }
}

/// Uniform-geometry constants of a body for a given radius.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UniformGeometryData {
    pub r0: f64,
    pub b_r0: f64,
    pub c: f64,
    /// `b_r0` is a Monte Carlo estimate rather than a closed form.
    pub approximate: bool,
}

/// Volume of the unit ball in `R^d`; `V(0) = 1`.
pub fn unit_ball_volume(d: usize) -> f64 {
    // V(d) = 2π/d · V(d-2) keeps the small cases exact
    let mut v = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

/// `∫_0^φ sin^n θ dθ` by the standard reduction formula.
fn sin_power_integral(n: usize, phi: f64) -> f64 {
    let (s, c) = (libm::sin(phi), libm::cos(phi));
    let mut lo = phi; // n = 0
    let mut hi = 1.0 - c; // n = 1
    if n == 0 {
        return lo;
    }
    for k in 2..=n {
        let next = -powi(s, (k - 1) as i32) * c / k as f64 + (k - 1) as f64 / k as f64 * lo;
        lo = hi;
        hi = next;
    }
    hi
}

/// Volume of `{u ∈ B(0, rho) : u_1 >= p}` in `R^d`.
pub fn ball_cap_volume(d: usize, rho: f64, p: f64) -> f64 {
    if p >= rho {
        return 0.0;
    }
    if p <= -rho {
        return unit_ball_volume(d) * powi(rho, d as i32);
    }
    let phi = libm::acos(p / rho);
    unit_ball_volume(d - 1) * powi(rho, d as i32) * sin_power_integral(d, phi)
}

/// Volume of the intersection of two balls of radii `a`, `b` whose centers are
/// `t` apart.
pub fn ball_intersection_volume(d: usize, a: f64, b: f64, t: f64) -> f64 {
    if t >= a + b {
        return 0.0;
    }
    if t <= (a - b).abs() {
        return unit_ball_volume(d) * powi(a.min(b), d as i32);
    }
    let x = (t * t + a * a - b * b) / (2.0 * t);
    ball_cap_volume(d, a, x) + ball_cap_volume(d, b, t - x)
}

/// Writes a uniform point of the open ball `B(0, radius)` into `out`:
/// spherically symmetric direction times `radius · U^{1/d}`.
pub fn sample_ball_offset<R: Rng + ?Sized>(rng: &mut R, radius: f64, out: &mut [f64]) {
    let d = out.len();
    let n2 = loop {
        let mut n2 = 0.0;
        for o in out.iter_mut() {
            let g: f64 = StandardNormal.sample(rng);
            *o = g;
            n2 += g * g;
        }
        if n2 > 0.0 {
            break n2;
        }
    };
    let u: f64 = rng.random();
    let r = radius * if d == 1 { u } else { powf(u, 1.0 / d as f64) };
    let scale = r / sqrt(n2);
    for o in out.iter_mut() {
        *o *= scale;
    }
}

/// Uniform sample from `B ∩ B(center, radius)` by rejection from the ball.
pub fn sample_in_body_cap<R: Rng + ?Sized>(
    rng: &mut R,
    body: &ConvexBody,
    center: &[f64],
    radius: f64,
    max_attempts: usize,
) -> Result<Vec<f64>> {
    check_dim(body.dim(), center.len())?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter("cap radius must be positive and finite"));
    }
    let mut out = vec![0.0; center.len()];
    sample_in_body_cap_into(rng, body, center, radius, max_attempts, &mut out)?;
    Ok(out)
}

/// Allocation-free core of [`sample_in_body_cap`]; returns the number of
/// proposals used. Dimensions are not re-checked.
pub(crate) fn sample_in_body_cap_into<R: Rng + ?Sized>(
    rng: &mut R,
    body: &ConvexBody,
    center: &[f64],
    radius: f64,
    max_attempts: usize,
    out: &mut [f64],
) -> Result<usize> {
    let r2 = radius * radius;
    let mut attempts = 0;
    while attempts < max_attempts {
        sample_ball_offset(rng, radius, out);
        if norm_sq(out) >= r2 {
            // rounding pushed the draw onto the sphere; redraw
            continue;
        }
        for (o, c) in out.iter_mut().zip(center) {
            *o += c;
        }
        attempts += 1;
        if body.contains_unchecked(out) {
            return Ok(attempts);
        }
    }
    Err(Error::AttemptsExhausted { attempts })
}

/// Uniform sample from a bounded body, by rejection from its bounding ball.
pub fn sample_uniform_in_body<R: Rng + ?Sized>(
    rng: &mut R,
    body: &ConvexBody,
    max_attempts: usize,
) -> Result<Vec<f64>> {
    let (center, radius) = body.bounding_ball().ok_or(Error::UnboundedBody)?;
    sample_in_body_cap(rng, body, &center, radius, max_attempts)
}

/// Monte Carlo estimate of `λ(B ∩ B(center, radius))` with its standard error.
pub fn mc_cap_volume<R: Rng + ?Sized>(
    rng: &mut R,
    body: &ConvexBody,
    center: &[f64],
    radius: f64,
    n_samples: usize,
) -> (f64, f64) {
    let d = center.len();
    let full = unit_ball_volume(d) * powi(radius, d as i32);
    let n = n_samples.max(1);
    let mut buf = vec![0.0; d];
    let mut hits = 0usize;
    for _ in 0..n {
        sample_ball_offset(rng, radius, &mut buf);
        for (o, c) in buf.iter_mut().zip(center) {
            *o += c;
        }
        if body.contains_unchecked(&buf) {
            hits += 1;
        }
    }
    binomial_volume(full, hits, n)
}

/// `(V·p̂, V·sqrt(p̂(1-p̂)/n))`
pub(crate) fn binomial_volume(full: f64, hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (full * p, full * sqrt(p * (1.0 - p) / n as f64))
}

/// Monte Carlo check of the inner-shell isoperimetric bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShellVolumeReport {
    /// Estimate of `λ(B(y,R) ∩ B ∩ N_r(B^c))`.
    pub mc_volume: f64,
    pub mc_se: f64,
    /// `2 r d sqrt(d) V(d-1) R^{d-1}`
    pub easy_bound: f64,
    /// `V(d) (R^d - (R-r)^d)`
    pub sharp_bound: f64,
    /// Estimate exceeds `min(easy, sharp)` by more than 4 standard errors
    /// (plus rounding).
    pub violation: bool,
}

pub fn shell_volume_check<R: Rng + ?Sized>(
    rng: &mut R,
    body: &ConvexBody,
    y: &[f64],
    outer: f64,
    shell: f64,
    n_samples: usize,
) -> Result<ShellVolumeReport> {
    check_dim(body.dim(), y.len())?;
    if !(shell > 0.0 && shell < outer && outer.is_finite()) {
        return Err(Error::InvalidParameter("shell check needs 0 < r < R"));
    }
    let d = y.len();
    let n = n_samples.max(1);
    let full = unit_ball_volume(d) * powi(outer, d as i32);
    let mut buf = vec![0.0; d];
    let mut hits = 0usize;
    for _ in 0..n {
        sample_ball_offset(rng, outer, &mut buf);
        for (o, c) in buf.iter_mut().zip(y) {
            *o += c;
        }
        if body.contains_unchecked(&buf) && body.depth(&buf) < shell {
            hits += 1;
        }
    }
    let (mc_volume, mc_se) = binomial_volume(full, hits, n);
    let easy_bound =
        2.0 * shell * d as f64 * sqrt(d as f64) * unit_ball_volume(d - 1) * powi(outer, d as i32 - 1);
    let sharp_bound = unit_ball_volume(d) * (powi(outer, d as i32) - powi(outer - shell, d as i32));
    Ok(ShellVolumeReport {
        mc_volume,
        mc_se,
        easy_bound,
        sharp_bound,
        violation: mc_volume > easy_bound.min(sharp_bound) * (1.0 + 1e-12) + 4.0 * mc_se,
    })
}

/// Monte Carlo check of `λ(B∩B(x,r1)) / λ(B∩B(x,r2)) >= (r1/r2)^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VolumeRatioReport {
    pub ratio: f64,
    pub se: f64,
    pub bound: f64,
    /// Ratio falls below the bound by more than 4 standard errors (plus
    /// rounding).
    pub violation: bool,
}

pub fn volume_comparison_check<R: Rng + ?Sized>(
    rng: &mut R,
    body: &ConvexBody,
    x: &[f64],
    r1: f64,
    r2: f64,
    n_samples: usize,
) -> Result<VolumeRatioReport> {
    check_dim(body.dim(), x.len())?;
    if !(r1 > 0.0 && r1 < r2 && r2.is_finite()) {
        return Err(Error::InvalidParameter("volume comparison needs 0 < r1 < r2"));
    }
    if !body.contains_unchecked(x) {
        return Err(Error::PointOutsideBody);
    }
    let (v1, s1) = mc_cap_volume(rng, body, x, r1, n_samples);
    let (v2, s2) = mc_cap_volume(rng, body, x, r2, n_samples);
    let ratio = v1 / v2;
    // delta method for a ratio of independent estimates
    let se = ratio * sqrt((s1 / v1) * (s1 / v1) + (s2 / v2) * (s2 / v2));
    let bound = powi(r1 / r2, x.len() as i32);
    Ok(VolumeRatioReport {
        ratio,
        se,
        bound,
        violation: ratio < bound * (1.0 - 1e-12) - 4.0 * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> ConvexBody {
        ConvexBody::unit_cube(2).unwrap()
    }

    #[test]
    fn contains_examples() {
        let sq = unit_square();
        assert!(sq.contains(&[0.5, 0.5]).unwrap());
        assert!(sq.contains(&[1.0, 0.3]).unwrap());
        let disc = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(!disc.contains(&[1.1, 0.0]).unwrap());
        assert_eq!(
            sq.contains(&[0.5]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn distance_examples() {
        assert_eq!(unit_square().distance_to_complement(&[0.3, 0.5]).unwrap(), 0.3);
        let disc = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(disc.distance_to_complement(&[0.0, 0.0]).unwrap(), 1.0);
        let r3 = ConvexBody::full_space(3).unwrap();
        assert_eq!(r3.distance_to_complement(&[5.0, -2.0, 1.0]).unwrap(), UNBOUNDED_DISTANCE);
        // outside points are at distance zero
        assert_eq!(unit_square().distance_to_complement(&[1.5, 0.5]).unwrap(), 0.0);
        assert_eq!(disc.distance_to_complement(&[3.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn polytope_membership_and_depth() {
        // the triangle x >= 0, y >= 0, x + y <= 1
        let s = 1.0 / 2f64.sqrt();
        let tri = ConvexBody::polytope(
            vec![(vec![-1.0, 0.0], 0.0), (vec![0.0, -1.0], 0.0), (vec![s, s], s)],
            vec![0.25, 0.25],
            Some(2.0),
        )
        .unwrap();
        assert!(tri.contains(&[0.5, 0.5]).unwrap());
        assert!(!tri.contains(&[0.6, 0.5]).unwrap());
        let depth = tri.distance_to_complement(&[0.25, 0.25]).unwrap();
        assert!((depth - 0.25).abs() < 1e-15);
        let bad = ConvexBody::polytope(vec![(vec![2.0, 0.0], 1.0)], vec![0.0, 0.0], None);
        assert!(matches!(bad, Err(Error::InvalidBody(_))));
        let no_interior = ConvexBody::polytope(vec![(vec![1.0, 0.0], 0.0)], vec![0.0, 0.0], None);
        assert!(matches!(no_interior, Err(Error::InvalidBody(_))));
    }

    #[test]
    fn body_validation() {
        assert!(ConvexBody::new_box(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(ConvexBody::ball(vec![0.0], 0.0).is_err());
        assert!(ConvexBody::full_space(0).is_err());
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(0), 1.0);
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        // against the Gamma-function formula
        for d in 0..12 {
            let g = libm::pow(PI, d as f64 / 2.0) / libm::tgamma(d as f64 / 2.0 + 1.0);
            assert!((unit_ball_volume(d) - g).abs() < 1e-12 * g, "d = {d}");
        }
    }

    #[test]
    fn lens_volume_against_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=3 {
            let body = ConvexBody::ball(vec![0.0; d], 1.0).unwrap();
            let mut y = vec![0.0; d];
            y[0] = 0.8;
            let exact = ball_intersection_volume(d, 1.0, 0.6, 0.8);
            let (est, se) = mc_cap_volume(&mut rng, &body, &y, 0.6, 200_000);
            assert!((est - exact).abs() < 5.0 * se, "d={d}: {est} vs {exact}");
        }
        // half-space limit: a tiny cap ball on the boundary of a huge ball
        let v = ball_intersection_volume(2, 1e6, 1.0, 1e6);
        assert!((v - PI / 2.0).abs() < 1e-5);
    }

    #[test]
    fn uniform_geometry_examples() {
        let r3 = ConvexBody::full_space(3).unwrap();
        assert_eq!(r3.uniform_geometry_constants(0.7).unwrap().c, 1.0);
        for d in 1..=4 {
            let cube = ConvexBody::unit_cube(d).unwrap();
            let g = cube.uniform_geometry_constants(cube.default_r0()).unwrap();
            assert!((g.c - powi(0.5, d as i32)).abs() < 1e-15);
            assert!(!g.approximate);
        }
        let interval = ConvexBody::ball(vec![0.0], 1.0).unwrap();
        let g = interval.uniform_geometry_constants(0.5).unwrap();
        assert!((g.b_r0 - 0.5).abs() < 1e-15);
        assert!((g.c - 0.5).abs() < 1e-15);
        // every non-full body has c <= 1/2
        let disc = ConvexBody::ball(vec![0.0, 0.0], 2.0).unwrap();
        let g = disc.uniform_geometry_constants(1.0).unwrap();
        assert!(g.c < 0.5 && g.c > 0.3);
    }

    #[test]
    fn polytope_uniform_geometry_is_approximate() {
        let square = ConvexBody::polytope(
            vec![
                (vec![1.0, 0.0], 1.0),
                (vec![-1.0, 0.0], 0.0),
                (vec![0.0, 1.0], 1.0),
                (vec![0.0, -1.0], 0.0),
            ],
            vec![0.5, 0.5],
            Some(1.0),
        )
        .unwrap();
        let g = square.uniform_geometry_constants(0.25).unwrap();
        assert!(g.approximate);
        // boundary sample never finds a worse point than a corner (c = 1/4),
        // and the edge midpoints give 1/2
        assert!(g.c > 0.2 && g.c <= 0.52, "c = {}", g.c);
    }

    #[test]
    fn full_space_never_rejects() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r2 = ConvexBody::full_space(2).unwrap();
        for _ in 0..100 {
            let mut out = [0.0; 2];
            let used = sample_in_body_cap_into(&mut rng, &r2, &[3.0, 4.0], 2.0, 1, &mut out).unwrap();
            assert_eq!(used, 1);
        }
    }

    #[test]
    fn interior_cap_always_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sq = unit_square();
        for _ in 0..1000 {
            let mut out = [0.0; 2];
            let used = sample_in_body_cap_into(&mut rng, &sq, &[0.5, 0.5], 0.1, 1, &mut out).unwrap();
            assert_eq!(used, 1);
        }
    }

    #[test]
    fn corner_cap_acceptance_is_a_quarter() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sq = unit_square();
        let mut proposals = 0usize;
        let draws = 100_000;
        let mut out = [0.0; 2];
        for _ in 0..draws {
            proposals += sample_in_body_cap_into(&mut rng, &sq, &[0.0, 0.0], 0.5, 10_000, &mut out).unwrap();
            assert!(sq.contains(&out).unwrap());
            assert!(dist_sq(&out, &[0.0, 0.0]) < 0.25);
        }
        let rate = draws as f64 / proposals as f64;
        // proposals per success are geometric; the rate is within 1% here
        assert!((rate - 0.25).abs() < 0.01, "rate = {rate}");
    }

    #[test]
    fn exhausted_sampler_reports_attempts() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sq = unit_square();
        // center far outside: nothing is ever accepted
        let err = sample_in_body_cap(&mut rng, &sq, &[10.0, 10.0], 0.5, 25).unwrap_err();
        assert_eq!(err, Error::AttemptsExhausted { attempts: 25 });
    }

    #[test]
    fn shell_examples_in_one_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let unit = ConvexBody::unit_cube(1).unwrap();
        let r = shell_volume_check(&mut rng, &unit, &[0.5], 0.4, 0.1, 50_000).unwrap();
        assert_eq!(r.mc_volume, 0.0);
        assert!((r.easy_bound - 0.2).abs() < 1e-15);
        assert!(!r.violation);

        let r = shell_volume_check(&mut rng, &unit, &[0.05], 0.2, 0.1, 200_000).unwrap();
        assert!((r.mc_volume - 0.1).abs() < 4.0 * r.mc_se + 1e-12);
        assert!((r.sharp_bound - 0.2).abs() < 1e-15);
        assert!(!r.violation);

        // r close to R: the sharp bound is the whole ball
        let r = shell_volume_check(&mut rng, &unit, &[0.3], 0.5, 0.5 - 1e-12, 1_000).unwrap();
        assert!((r.sharp_bound - 1.0).abs() < 1e-9);
        assert!(!r.violation);

        assert!(shell_volume_check(&mut rng, &unit, &[0.3], 0.1, 0.2, 10).is_err());
    }

    #[test]
    fn volume_comparison_on_box_corner() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let sq = unit_square();
        let rep = volume_comparison_check(&mut rng, &sq, &[0.0, 0.0], 0.2, 0.4, 100_000).unwrap();
        // both caps are quarter discs, so the ratio sits exactly on the bound
        assert!((rep.ratio - 0.25).abs() < 5.0 * rep.se);
        assert!(!rep.violation);
        // exact and equal to the bound up to rounding
        let space = ConvexBody::full_space(3).unwrap();
        for (r1, r2) in [(0.37339886180367976, 0.8519695070816685), (0.0556951499546, 0.83209947926954)] {
            let rep = volume_comparison_check(&mut rng, &space, &[2.8, 0.2, 1.5], r1, r2, 10).unwrap();
            assert_eq!(rep.se, 0.0);
            assert!(!rep.violation);
        }
    }

    #[test]
    fn cap_sample_is_uniform() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        // 4 equal-area rings times 4 quadrants of the disc inscribed in [0,1]^2
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sq = unit_square();
        let n = 100_000;
        let mut counts = [0usize; 16];
        for _ in 0..n {
            let p = sample_in_body_cap(&mut rng, &sq, &[0.5, 0.5], 0.5, 100).unwrap();
            let (x, y) = (p[0] - 0.5, p[1] - 0.5);
            let ring = ((4.0 * (x * x + y * y) / 0.25) as usize).min(3);
            let quad = (usize::from(x >= 0.0)) * 2 + usize::from(y >= 0.0);
            counts[ring * 4 + quad] += 1;
        }
        let expected = n as f64 / 16.0;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected) * (c as f64 - expected) / expected)
            .sum();
        let p = ChiSquared::new(15.0).unwrap().sf(stat);
        assert!(p > 1e-3, "chi2 = {stat}, p = {p}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let sq = unit_square();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10)
                .map(|_| sample_in_body_cap(&mut rng, &sq, &[0.1, 0.9], 0.4, 100).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }
}
