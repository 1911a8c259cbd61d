//! Geometry of `Keep(X; B)`, the set of arrival locations that would join the
//! configuration, and of the removal rule.
//!
//! All quantities are evaluated relative to the first point of the
//! configuration, so a configuration of diameter `1e-12` sitting at `0.7`
//! keeps its relative precision.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::geometry::{check_dim, sample_ball_offset, sample_in_body_cap_into, unit_ball_volume, ConvexBody, Point};
use crate::math::{dist_sq, powi, sqrt};

/// Near ties are reported when the two largest distances to the augmented
/// center of mass differ by less than this times `D(X ∪ {z})`.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Default proposal budget of the Keep sampler.
pub const DEFAULT_MAX_ATTEMPTS: usize = 1_000_000;

/// An open ball.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, z: &[f64]) -> bool {
        dist_sq(z, &self.center) < self.radius * self.radius
    }
}

/// The ball decomposition of `Keep(X; R^d)` together with the sandwich balls.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KeepBalls {
    /// `B((Σ - x_j)/(M-1), M/(M-1)·||x_j - μ||)` for each `j`.
    pub balls: Vec<Ball>,
    /// `B(μ, (M+1)/(M-1)·A)`
    pub outer: Ball,
    /// `B(μ, A)`
    pub inner: Ball,
    /// `B(μ(X \ {x_i}), M/(M+1)·A)` for each `i`.
    pub leave_one_out: Vec<Ball>,
}

/// Which point leaves when `z` arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RemovalOutcome {
    /// Index into the configuration.
    Remove(usize),
    /// The arrival itself is the farthest point, so it does not join.
    IncomingExtreme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RemovalChoice {
    pub outcome: RemovalOutcome,
    pub near_tie: bool,
}

/// `F(X) - F({z} ∪ X \ {x_j})` evaluated three ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FIdentity {
    /// From the pairwise-sum definition of `F`.
    pub lhs: f64,
    /// `(M+1)(||x_j - μ⁺||² - ||z - μ⁺||²)` with `μ⁺ = (z + Σ)/(M+1)`.
    pub rhs1: f64,
    /// `(M-1)(||x_j - c_j||² - ||z - c_j||²)` with `c_j = (Σ - x_j)/(M-1)`.
    pub rhs2: f64,
    /// `max(F(X), F({z} ∪ X \ {x_j}))`, the magnitude the difference was taken at.
    pub scale: f64,
}

impl FIdentity {
    /// Largest pairwise disagreement relative to [`FIdentity::scale`].
    pub fn relative_discrepancy(&self) -> f64 {
        let a = (self.lhs - self.rhs1).abs();
        let b = (self.lhs - self.rhs2).abs();
        let c = (self.rhs1 - self.rhs2).abs();
        a.max(b).max(c) / self.scale
    }
}

/// Outcome of every equivalent membership test for `Keep(X; R^d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MembershipForms {
    /// `||z - μ⁺|| < max_s ||s - μ⁺||`
    pub definition: bool,
    /// `||Mz - Σ|| < ||(M+1)x_j - z - Σ||` for some `j`.
    pub mean_form: bool,
    /// `Σ_{i≠j} ||z - x_i||² < Σ_{i≠j} ||x_j - x_i||²` for some `j`.
    pub pair_form: bool,
    /// `z` lies in the union of the Keep balls.
    pub ball_union: bool,
    /// Replacing some `x_j` by `z` lowers `F`.
    pub f_decrease: bool,
    pub near_tie: bool,
}

impl MembershipForms {
    pub fn agree(&self) -> bool {
        let v = self.definition;
        self.mean_form == v && self.pair_form == v && self.ball_union == v && self.f_decrease == v
    }
}

/// Precomputed Keep geometry of one configuration inside one body.
#[derive(Debug, Clone)]
pub struct KeepSet<'a> {
    config: &'a Configuration,
    body: &'a ConvexBody,
    dim: usize,
    m: usize,
    /// `x_i - x_0`, point-major.
    local: Vec<f64>,
    /// `Σ - M x_0`
    sigma: Vec<f64>,
    /// `c_j - x_0`, point-major.
    centers: Vec<f64>,
    radii_sq: Vec<f64>,
    mu: Vec<f64>,
    a: f64,
    d_max: f64,
}

impl<'a> KeepSet<'a> {
    pub fn new(config: &'a Configuration, body: &'a ConvexBody) -> Result<Self> {
        check_dim(body.dim(), config.dim())?;
        let dim = config.dim();
        let m = config.len();
        let origin = config.point(0);
        let mut local = Vec::with_capacity(dim * m);
        for p in config.points() {
            local.extend(p.iter().zip(origin).map(|(x, o)| x - o));
        }
        let mut sigma = vec![0.0; dim];
        for p in local.chunks_exact(dim) {
            for (s, x) in sigma.iter_mut().zip(p) {
                *s += x;
            }
        }
        let mf = m as f64;
        let mu_local: Vec<f64> = sigma.iter().map(|s| s / mf).collect();
        let mut centers = Vec::with_capacity(dim * m);
        let mut radii_sq = Vec::with_capacity(m);
        let mut a_sq: f64 = 0.0;
        for p in local.chunks_exact(dim) {
            centers.extend(sigma.iter().zip(p).map(|(s, x)| (s - x) / (mf - 1.0)));
            let r2 = dist_sq(p, &mu_local);
            a_sq = a_sq.max(r2);
            radii_sq.push(r2 * (mf / (mf - 1.0)) * (mf / (mf - 1.0)));
        }
        let mu = mu_local.iter().zip(origin).map(|(u, o)| u + o).collect();
        Ok(KeepSet {
            config,
            body,
            dim,
            m,
            local,
            sigma,
            centers,
            radii_sq,
            mu,
            a: sqrt(a_sq),
            d_max: config.diameter(),
        })
    }

    pub fn config(&self) -> &'a Configuration {
        self.config
    }

    pub fn body(&self) -> &'a ConvexBody {
        self.body
    }

    /// `μ(X)`
    pub fn center_of_mass(&self) -> &[f64] {
        &self.mu
    }

    /// `A(X)`
    pub fn radius(&self) -> f64 {
        self.a
    }

    /// Radius of the outer sandwich ball `(M+1)/(M-1)·A`.
    pub fn outer_radius(&self) -> f64 {
        let m = self.m as f64;
        (m + 1.0) / (m - 1.0) * self.a
    }

    fn to_local(&self, z: &[f64], out: &mut [f64]) {
        for ((o, x), b) in out.iter_mut().zip(z).zip(self.config.point(0)) {
            *o = x - b;
        }
    }

    fn local_point(&self, i: usize) -> &[f64] {
        &self.local[i * self.dim..(i + 1) * self.dim]
    }

    fn in_balls_local(&self, zl: &[f64]) -> bool {
        self.centers
            .chunks_exact(self.dim)
            .zip(&self.radii_sq)
            .any(|(c, r2)| dist_sq(zl, c) < *r2)
    }

    fn is_new(&self, z: &[f64]) -> bool {
        self.config.points().all(|p| p != z)
    }

    /// `z ∈ Keep(X; B)`: `z ∈ B`, `z ∉ X` and `z` lies in some Keep ball.
    ///
    /// Debug builds cross-check every equivalent form away from near ties.
    pub fn contains(&self, z: &[f64]) -> bool {
        let mut zl = vec![0.0; self.dim];
        self.to_local(z, &mut zl);
        let inside = self.in_balls_local(&zl);
        #[cfg(debug_assertions)]
        {
            let forms = self.forms_local(&zl);
            debug_assert!(
                forms.near_tie || !self.is_new(z) || forms.agree(),
                "Keep membership forms disagree: {forms:?}"
            );
        }
        inside && self.is_new(z) && self.body.contains_unchecked(z)
    }

    /// Removal rule: the point of `X ∪ {z}` farthest from `(z + Σ)/(M+1)`.
    ///
    /// Ties among points of `X` go to the smallest index; a tie involving `z`
    /// counts as [`RemovalOutcome::IncomingExtreme`], since membership in Keep
    /// is strict.
    pub fn removal(&self, z: &[f64]) -> RemovalChoice {
        let mut zl = vec![0.0; self.dim];
        self.to_local(z, &mut zl);
        self.removal_local(&zl)
    }

    fn removal_local(&self, zl: &[f64]) -> RemovalChoice {
        let mf = self.m as f64;
        let mu_plus: Vec<f64> = self
            .sigma
            .iter()
            .zip(zl)
            .map(|(s, z)| (s + z) / (mf + 1.0))
            .collect();
        let mut best = 0;
        let mut best_d = f64::NEG_INFINITY;
        let mut second_d = f64::NEG_INFINITY;
        for i in 0..self.m {
            let d = sqrt(dist_sq(self.local_point(i), &mu_plus));
            if d > best_d {
                second_d = best_d;
                best_d = d;
                best = i;
            } else if d > second_d {
                second_d = d;
            }
        }
        let dz = sqrt(dist_sq(zl, &mu_plus));
        let outcome = if dz >= best_d {
            second_d = best_d;
            best_d = dz;
            RemovalOutcome::IncomingExtreme
        } else {
            second_d = second_d.max(dz);
            RemovalOutcome::Remove(best)
        };
        let d_all = (0..self.m)
            .map(|i| sqrt(dist_sq(zl, self.local_point(i))))
            .fold(self.d_max, f64::max);
        RemovalChoice {
            outcome,
            near_tie: best_d - second_d < TIE_TOLERANCE * d_all,
        }
    }

    /// Every equivalent membership test for `Keep(X; R^d)`.
    pub fn forms(&self, z: &[f64]) -> MembershipForms {
        let mut zl = vec![0.0; self.dim];
        self.to_local(z, &mut zl);
        self.forms_local(&zl)
    }

    fn forms_local(&self, zl: &[f64]) -> MembershipForms {
        let mf = self.m as f64;
        let choice = self.removal_local(zl);
        let mut mean_form = false;
        let mut pair_form = false;
        let mut f_decrease = false;
        let lhs_mean: f64 = sqrt(
            zl.iter()
                .zip(&self.sigma)
                .map(|(z, s)| (mf * z - s) * (mf * z - s))
                .sum(),
        );
        let f_before = pairwise_f(self.local.chunks_exact(self.dim));
        for j in 0..self.m {
            let xj = self.local_point(j);
            let rhs_mean: f64 = sqrt(
                xj.iter()
                    .zip(zl)
                    .zip(&self.sigma)
                    .map(|((x, z), s)| {
                        let t = (mf + 1.0) * x - z - s;
                        t * t
                    })
                    .sum(),
            );
            mean_form |= lhs_mean < rhs_mean;
            let (mut sz, mut sx) = (0.0, 0.0);
            for i in (0..self.m).filter(|&i| i != j) {
                sz += dist_sq(zl, self.local_point(i));
                sx += dist_sq(xj, self.local_point(i));
            }
            pair_form |= sz < sx;
            let after = pairwise_f(
                self.local
                    .chunks_exact(self.dim)
                    .enumerate()
                    .map(|(i, p)| if i == j { zl } else { p }),
            );
            f_decrease |= after < f_before;
        }
        MembershipForms {
            definition: choice.outcome != RemovalOutcome::IncomingExtreme,
            mean_form,
            pair_form,
            ball_union: self.in_balls_local(zl),
            f_decrease,
            near_tie: choice.near_tie,
        }
    }

    /// Writes an exact uniform draw from `Keep(X; B)` into `out` by rejection
    /// from `B ∩ B(μ, (M+1)/(M-1)·A)`. Returns the number of proposals.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, max_attempts: usize, out: &mut [f64]) -> Result<usize> {
        // Keep lies in the open outer ball; the inflation guards its radius
        // against rounding in A
        let radius = self.outer_radius() * (1.0 + 1e-12);
        let mut used = 0;
        while used < max_attempts {
            used += sample_in_body_cap_into(rng, self.body, &self.mu, radius, max_attempts - used, out)
                .map_err(|_| Error::AttemptsExhausted { attempts: max_attempts })?;
            if self.contains(out) {
                return Ok(used);
            }
        }
        Err(Error::AttemptsExhausted { attempts: used })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, max_attempts: usize) -> Result<Point> {
        let mut out = vec![0.0; self.dim];
        self.sample_into(rng, max_attempts, &mut out)?;
        Point::new(out)
    }

    pub fn balls(&self) -> KeepBalls {
        let origin = self.config.point(0);
        let shift = |c: &[f64]| Point::new(c.iter().zip(origin).map(|(x, o)| x + o).collect()).expect("finite");
        let mf = self.m as f64;
        let mu = Point::new(self.mu.clone()).expect("finite");
        let balls = self
            .centers
            .chunks_exact(self.dim)
            .zip(&self.radii_sq)
            .map(|(c, r2)| Ball {
                center: shift(c),
                radius: sqrt(*r2),
            })
            .collect();
        // μ(X \ {x_i}) = (Σ - x_i)/(M-1) is the i-th Keep-ball center
        let leave_one_out = self
            .centers
            .chunks_exact(self.dim)
            .map(|c| Ball {
                center: shift(c),
                radius: mf / (mf + 1.0) * self.a,
            })
            .collect();
        KeepBalls {
            balls,
            outer: Ball {
                center: mu.clone(),
                radius: self.outer_radius(),
            },
            inner: Ball {
                center: mu,
                radius: self.a,
            },
            leave_one_out,
        }
    }
}

fn pairwise_f<'p>(points: impl Iterator<Item = &'p [f64]> + Clone) -> f64 {
    let mut f = 0.0;
    for (i, p) in points.clone().enumerate() {
        for q in points.clone().skip(i + 1) {
            f += dist_sq(p, q);
        }
    }
    f
}

pub fn keep_balls(x: &Configuration) -> Result<KeepBalls> {
    let body = ConvexBody::full_space(x.dim())?;
    Ok(KeepSet::new(x, &body)?.balls())
}

pub fn keep_contains(x: &Configuration, body: &ConvexBody, z: &[f64]) -> Result<bool> {
    check_dim(x.dim(), z.len())?;
    Ok(KeepSet::new(x, body)?.contains(z))
}

pub fn removal_choice(x: &Configuration, z: &[f64]) -> Result<RemovalChoice> {
    check_dim(x.dim(), z.len())?;
    let body = ConvexBody::full_space(x.dim())?;
    Ok(KeepSet::new(x, &body)?.removal(z))
}

/// Evaluates every equivalent form of `z ∈ Keep(X; R^d)`.
pub fn membership_forms(x: &Configuration, z: &[f64]) -> Result<MembershipForms> {
    check_dim(x.dim(), z.len())?;
    let body = ConvexBody::full_space(x.dim())?;
    Ok(KeepSet::new(x, &body)?.forms(z))
}

pub fn f_identity(x: &Configuration, z: &[f64], j: usize) -> Result<FIdentity> {
    check_dim(x.dim(), z.len())?;
    if j >= x.len() {
        return Err(Error::InvalidParameter("removal index out of range"));
    }
    let d = x.dim();
    let mf = x.len() as f64;
    let origin = x.point(0);
    let local: Vec<Vec<f64>> = x
        .points()
        .map(|p| p.iter().zip(origin).map(|(a, o)| a - o).collect())
        .collect();
    let zl: Vec<f64> = z.iter().zip(origin).map(|(a, o)| a - o).collect();
    let before = pairwise_f(local.iter().map(Vec::as_slice));
    let after = pairwise_f(local.iter().enumerate().map(|(i, p)| if i == j { zl.as_slice() } else { p.as_slice() }));
    let mut sigma = vec![0.0; d];
    for p in &local {
        for (s, v) in sigma.iter_mut().zip(p) {
            *s += v;
        }
    }
    let xj = &local[j];
    let mu_plus: Vec<f64> = sigma.iter().zip(&zl).map(|(s, z)| (s + z) / (mf + 1.0)).collect();
    let cj: Vec<f64> = sigma.iter().zip(xj).map(|(s, x)| (s - x) / (mf - 1.0)).collect();
    Ok(FIdentity {
        lhs: before - after,
        rhs1: (mf + 1.0) * (dist_sq(xj, &mu_plus) - dist_sq(&zl, &mu_plus)),
        rhs2: (mf - 1.0) * (dist_sq(xj, &cj) - dist_sq(&zl, &cj)),
        scale: before.max(after),
    })
}

/// Exact uniform draw from `Keep(X; B)`.
pub fn sample_keep<R: Rng + ?Sized>(
    rng: &mut R,
    x: &Configuration,
    body: &ConvexBody,
    max_attempts: usize,
) -> Result<Point> {
    KeepSet::new(x, body)?.sample(rng, max_attempts)
}

/// Monte Carlo estimate of `λ(Keep(X; B))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VolumeEstimate {
    pub estimate: f64,
    pub se: f64,
}

/// Hit-or-miss estimate over the outer sandwich ball.
pub fn keep_volume<R: Rng + ?Sized>(
    rng: &mut R,
    x: &Configuration,
    body: &ConvexBody,
    n_samples: usize,
) -> Result<VolumeEstimate> {
    let keep = KeepSet::new(x, body)?;
    let d = x.dim();
    let radius = keep.outer_radius();
    let full = unit_ball_volume(d) * powi(radius, d as i32);
    let n = n_samples.max(1);
    let mut buf = vec![0.0; d];
    let mut hits = 0usize;
    for _ in 0..n {
        sample_ball_offset(rng, radius, &mut buf);
        for (b, m) in buf.iter_mut().zip(&keep.mu) {
            *b += m;
        }
        if keep.contains(&buf) {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    Ok(VolumeEstimate {
        estimate: full * p,
        se: full * sqrt(p * (1.0 - p) / n as f64),
    })
}
