//! The Jante chains: the body-valued chain `Y(n)` (the scale-free chain `Z(n)`
//! is the same chain on the full space) and the original `N = M + 1` point
//! chain whose core is a time change of `Y`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::geometry::{check_dim, sample_in_body_cap_into, ConvexBody, Point};
use crate::keepset::{KeepSet, RemovalOutcome, DEFAULT_MAX_ATTEMPTS};
use crate::math::{norm_sq, sqrt};

/// Recentering fires once `||μ|| > RECENTER_RATIO · sqrt(F)`.
pub const RECENTER_RATIO: f64 = 1e3;

/// Default absolute diameter target, relative to the initial diameter.
pub const DEFAULT_TARGET_D_RATIO: f64 = 1e-12;

/// Live state of one chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    config: Configuration,
    body: ConvexBody,
    step: u64,
    next_label: i64,
    original_remaining: usize,
    offset: Vec<f64>,
    recenter: bool,
    max_attempts: usize,
    near_ties: u64,
}

/// One step of the chain, in the caller's (un-recentered) coordinates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepRecord {
    pub n: u64,
    pub added: Point,
    pub removed: Point,
    /// Arrival label of the removed point.
    pub alpha: i64,
    pub f_after: f64,
    pub near_tie: bool,
}

impl ChainState {
    pub fn new(config: Configuration, body: ConvexBody) -> Result<Self> {
        check_dim(body.dim(), config.dim())?;
        if !config.contained_in(&body) {
            return Err(Error::PointOutsideBody);
        }
        let next_label = config.labels().iter().copied().max().unwrap_or(0).max(0) + 1;
        let original_remaining = config.labels().iter().filter(|&&l| l <= 0).count();
        let dim = config.dim();
        Ok(ChainState {
            config,
            body,
            step: 0,
            next_label,
            original_remaining,
            offset: vec![0.0; dim],
            recenter: false,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            near_ties: 0,
        })
    }

    /// Recentering translates the configuration back to the origin whenever
    /// its center of mass drifts far away relative to its size. Only lawful on
    /// the full space.
    pub fn with_recentering(mut self, on: bool) -> Result<Self> {
        if on && !self.body.is_full_space() {
            return Err(Error::InvalidParameter("recentering requires the full space"));
        }
        self.recenter = on;
        Ok(self)
    }

    pub fn with_max_attempts(mut self, max_attempts: usize) -> Self {
        self.max_attempts = max_attempts.max(1);
        self
    }

    /// Current configuration, in recentered coordinates.
    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn next_arrival_label(&self) -> i64 {
        self.next_label
    }

    /// Number of initial points (label `<= 0`) still present.
    pub fn original_remaining(&self) -> usize {
        self.original_remaining
    }

    /// Translation to add to [`ChainState::config`] to recover true coordinates.
    pub fn cumulative_offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn near_ties(&self) -> u64 {
        self.near_ties
    }

    /// `μ` in true coordinates.
    pub fn center_of_mass(&self) -> Vec<f64> {
        let mut mu = self.config.center_of_mass();
        for (m, o) in mu.iter_mut().zip(&self.offset) {
            *m += o;
        }
        mu
    }

    fn shifted(&self, p: &[f64]) -> Point {
        Point::new(p.iter().zip(&self.offset).map(|(x, o)| x + o).collect()).expect("finite")
    }

    /// One step: draw the arrival uniformly from Keep and remove the point
    /// farthest from the augmented center of mass.
    pub fn step_jante<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<StepRecord> {
        let mut y = vec![0.0; self.config.dim()];
        let (j, near_tie) = {
            let keep = KeepSet::new(&self.config, &self.body)?;
            loop {
                keep.sample_into(rng, self.max_attempts, &mut y)?;
                let choice = keep.removal(&y);
                match choice.outcome {
                    RemovalOutcome::Remove(j) => break (j, choice.near_tie),
                    // only reachable through an exact tie on the Keep boundary
                    RemovalOutcome::IncomingExtreme => self.near_ties += 1,
                }
            }
        };
        self.apply(j, &y, near_tie)
    }

    /// Same as [`ChainState::step_jante`] with a caller-supplied arrival, given
    /// in true coordinates.
    pub fn step_jante_with_point(&mut self, y: &[f64]) -> Result<StepRecord> {
        check_dim(self.config.dim(), y.len())?;
        let y: Vec<f64> = y.iter().zip(&self.offset).map(|(a, o)| a - o).collect();
        let keep = KeepSet::new(&self.config, &self.body)?;
        if !keep.contains(&y) {
            return Err(Error::PointNotInKeep);
        }
        let choice = keep.removal(&y);
        match choice.outcome {
            RemovalOutcome::Remove(j) => self.apply(j, &y, choice.near_tie),
            RemovalOutcome::IncomingExtreme => Err(Error::PointNotInKeep),
        }
    }

    fn apply(&mut self, j: usize, y: &[f64], near_tie: bool) -> Result<StepRecord> {
        let f_before = self.config.moment_of_inertia();
        let removed = self.shifted(self.config.point(j));
        let added = self.shifted(y);
        let alpha = self.config.label(j);
        let label = self.next_label;
        self.config.replace(j, y, label)?;
        self.step += 1;
        self.next_label += 1;
        if alpha <= 0 {
            self.original_remaining -= 1;
        }
        if near_tie {
            self.near_ties += 1;
        }
        let f_after = self.config.moment_of_inertia();
        debug_assert!(f_after < f_before || near_tie, "F rose: {f_before} -> {f_after}");
        if self.recenter {
            self.maybe_recenter(f_after)?;
        }
        Ok(StepRecord {
            n: self.step,
            added,
            removed,
            alpha,
            f_after,
            near_tie,
        })
    }

    fn maybe_recenter(&mut self, f: f64) -> Result<()> {
        let mu = self.config.center_of_mass();
        if sqrt(norm_sq(&mu)) > RECENTER_RATIO * sqrt(f) {
            let neg: Vec<f64> = mu.iter().map(|m| -m).collect();
            self.config = self.config.translated(&neg)?;
            for (o, m) in self.offset.iter_mut().zip(&mu) {
                *o += m;
            }
        }
        Ok(())
    }
}

/// When a run stops.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StopRule {
    pub max_steps: u64,
    /// Absolute diameter target; `0` disables it.
    pub target_d: f64,
    /// Absolute moment-of-inertia target; `0` disables it.
    pub target_f: f64,
    /// Targets only count once every initial point has left. With both
    /// targets disabled the run stops at the exodus.
    pub require_exodus: bool,
}

impl StopRule {
    pub fn max_steps(max_steps: u64) -> Self {
        StopRule {
            max_steps,
            target_d: 0.0,
            target_f: 0.0,
            require_exodus: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_d >= 0.0 && self.target_f >= 0.0) || self.target_d.is_infinite() || self.target_f.is_infinite() {
            return Err(Error::InvalidParameter("stop targets must be finite and non-negative"));
        }
        if self.max_steps == u64::MAX && self.target_d == 0.0 && self.target_f == 0.0 && !self.require_exodus {
            return Err(Error::InvalidParameter("stop rule never fires"));
        }
        Ok(())
    }

    fn check(&self, state: &ChainState) -> Option<StopReason> {
        self.check_parts(state.step, state.original_remaining, &state.config)
    }

    fn check_parts(&self, step: u64, original_remaining: usize, config: &Configuration) -> Option<StopReason> {
        let no_targets = self.target_d == 0.0 && self.target_f == 0.0;
        if !self.require_exodus || original_remaining == 0 {
            if self.require_exodus && no_targets {
                return Some(StopReason::Exodus);
            }
            if self.target_d > 0.0 && config.diameter() <= self.target_d {
                return Some(StopReason::TargetD);
            }
            if self.target_f > 0.0 && config.moment_of_inertia() <= self.target_f {
                return Some(StopReason::TargetF);
            }
        }
        (step >= self.max_steps).then_some(StopReason::MaxSteps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StopReason {
    TargetD,
    TargetF,
    Exodus,
    MaxSteps,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::TargetD => "TargetD",
            StopReason::TargetF => "TargetF",
            StopReason::Exodus => "Exodus",
            StopReason::MaxSteps => "MaxSteps",
        }
    }
}

/// Inputs of [`run_trajectory`].
#[derive(Debug, Clone)]
pub struct RunParams {
    pub body: ConvexBody,
    pub initial: Configuration,
    pub stop: StopRule,
    pub recenter: bool,
    /// Keep every [`StepRecord`]; removal labels up to the exodus are kept
    /// regardless.
    pub keep_steps: bool,
    pub max_attempts: usize,
}

impl RunParams {
    pub fn new(body: ConvexBody, initial: Configuration, stop: StopRule) -> Self {
        RunParams {
            body,
            initial,
            stop,
            recenter: false,
            keep_steps: true,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

/// History of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub initial: Configuration,
    /// Empty unless steps were kept.
    pub steps: Vec<StepRecord>,
    /// Removal labels `α(1), α(2), ...` up to the exodus (or the end of the run).
    pub alphas: Vec<i64>,
    /// Exodus time, if reached.
    pub tau: Option<u64>,
    pub n_final: u64,
    pub f_final: f64,
    pub d_final: f64,
    /// `μ` of the final configuration, in true coordinates.
    pub xi_hat: Point,
    pub stop_reason: StopReason,
    pub near_ties: u64,
    /// Final configuration in true coordinates.
    pub final_config: Configuration,
}

/// Runs the chain until the stop rule fires.
pub fn run_trajectory<R: Rng + ?Sized>(params: &RunParams, rng: &mut R) -> Result<TrajectoryRecord> {
    run_trajectory_observed(params, rng, |_, _| {})
}

/// [`run_trajectory`], calling `observe` after every step with the new state.
pub fn run_trajectory_observed<R, O>(params: &RunParams, rng: &mut R, mut observe: O) -> Result<TrajectoryRecord>
where
    R: Rng + ?Sized,
    O: FnMut(&ChainState, &StepRecord),
{
    params.stop.validate()?;
    let mut state = ChainState::new(params.initial.clone(), params.body.clone())?
        .with_recentering(params.recenter)?
        .with_max_attempts(params.max_attempts);
    let mut steps = Vec::new();
    let mut alphas = Vec::new();
    let mut tau = (state.original_remaining == 0).then_some(0);
    let stop_reason = loop {
        if let Some(reason) = params.stop.check(&state) {
            break reason;
        }
        let rec = state.step_jante(rng)?;
        if tau.is_none() {
            alphas.push(rec.alpha);
            if state.original_remaining == 0 {
                tau = Some(rec.n);
            }
        }
        observe(&state, &rec);
        if params.keep_steps {
            steps.push(rec);
        }
    };
    Ok(finish(params.initial.clone(), state, steps, alphas, tau, stop_reason))
}

fn finish(
    initial: Configuration,
    state: ChainState,
    steps: Vec<StepRecord>,
    alphas: Vec<i64>,
    tau: Option<u64>,
    stop_reason: StopReason,
) -> TrajectoryRecord {
    let xi_hat = Point::new(state.center_of_mass()).expect("finite");
    let (_, d_final) = state.config.min_max_distance();
    let f_final = state.config.moment_of_inertia();
    let final_config = if state.offset.iter().all(|&o| o == 0.0) {
        state.config.clone()
    } else {
        // recentered coordinates are the faithful ones; this copy is for output
        state.config.translated(&state.offset).unwrap_or_else(|_| state.config.clone())
    };
    TrajectoryRecord {
        initial,
        steps,
        alphas,
        tau,
        n_final: state.step,
        f_final,
        d_final,
        xi_hat,
        stop_reason,
        near_ties: state.near_ties,
        final_config,
    }
}

/// `(τ, (α(1), ..., α(τ)))`, the event `E_{τ, ᾱ}` of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovalSequence {
    /// `None` when the run stopped before the exodus.
    pub tau: Option<u64>,
    /// Removal labels up to `τ`, or every label observed if not reached.
    pub alphas: Vec<i64>,
}

pub fn removal_sequence(record: &TrajectoryRecord) -> RemovalSequence {
    RemovalSequence {
        tau: record.tau,
        alphas: record.alphas.clone(),
    }
}

/// State of the original chain on `N = M + 1` points in a bounded body.
#[derive(Debug, Clone)]
pub struct OriginalState {
    points: Configuration,
    body: ConvexBody,
    t: u64,
    next_label: i64,
    max_attempts: usize,
    bounding: (Vec<f64>, f64),
    sample: Vec<f64>,
    mu: Vec<f64>,
    /// Index of the point outside the core.
    far: usize,
}

/// Index of the point farthest from the center of mass, which is left in
/// `mu`.
fn farthest_from_center(points: &Configuration, mu: &mut [f64]) -> usize {
    let base = points.point(0);
    mu.fill(0.0);
    for p in points.points().skip(1) {
        for (m, (x, b)) in mu.iter_mut().zip(p.iter().zip(base)) {
            *m += x - b;
        }
    }
    let n = points.len() as f64;
    for (m, b) in mu.iter_mut().zip(base) {
        *m = b + *m / n;
    }
    let mut best = 0;
    let mut best_d = f64::NEG_INFINITY;
    for (i, p) in points.points().enumerate() {
        let d = crate::math::dist_sq(p, mu);
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// One step of the original chain.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginalStep {
    pub t: u64,
    /// The fresh uniform point.
    pub sample: Point,
    /// The point that left the core and its arrival label, when the core
    /// (all points but the farthest) changed.
    pub left_core: Option<(Point, i64)>,
}

impl OriginalState {
    /// `points` holds all `N` points; the initial core is all but the one
    /// farthest from their center of mass.
    pub fn new(points: Configuration, body: ConvexBody) -> Result<Self> {
        check_dim(body.dim(), points.dim())?;
        if !body.is_bounded() {
            return Err(Error::UnboundedBody);
        }
        if points.len() < 3 {
            return Err(Error::TooFewPoints(points.len()));
        }
        if !points.contained_in(&body) {
            return Err(Error::PointOutsideBody);
        }
        let bounding = body.bounding_ball().ok_or(Error::UnboundedBody)?;
        let dim = points.dim();
        let mut state = OriginalState {
            points,
            body,
            t: 0,
            next_label: 1,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            bounding,
            sample: vec![0.0; dim],
            mu: vec![0.0; dim],
            far: 0,
        };
        // the core starts with labels -(M-1)..0 in input order, the farthest
        // point gets -M
        let far = state.farthest();
        let n = state.points.len() as i64;
        let mut next = -(n - 2);
        let labels = (0..state.points.len())
            .map(|i| {
                if i == far {
                    -(n - 1)
                } else {
                    next += 1;
                    next - 1
                }
            })
            .collect();
        state.points = Configuration::from_raw(state.points.dim(), state.points.coords().to_vec(), labels)?;
        state.far = far;
        Ok(state)
    }

    pub fn with_max_attempts(mut self, max_attempts: usize) -> Self {
        self.max_attempts = max_attempts.max(1);
        self
    }

    pub fn points(&self) -> &Configuration {
        &self.points
    }

    fn farthest(&mut self) -> usize {
        farthest_from_center(&self.points, &mut self.mu)
    }

    /// The `M` points other than the farthest, with their labels.
    pub fn core(&self) -> Configuration {
        let skip = self.far;
        let coords = self
            .points
            .points()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .flat_map(|(_, p)| p.iter().copied())
            .collect();
        let labels = self
            .points
            .labels()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, l)| *l)
            .collect();
        Configuration::from_raw(self.points.dim(), coords, labels).expect("distinct points stay distinct")
    }

    /// Replaces the farthest point by a uniform point of the body.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<OriginalStep> {
        let left = self.advance(rng)?;
        let left_core = left.map(|i| {
            (
                Point::new(self.points.point(i).to_vec()).expect("finite"),
                self.points.label(i),
            )
        });
        Ok(OriginalStep {
            t: self.t,
            sample: Point::new(self.sample.clone()).expect("finite"),
            left_core,
        })
    }

    /// Allocation-free [`step`](Self::step): the index of the point that
    /// left the core, if any. The fresh point stays in `self.sample`.
    fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Option<usize>> {
        let out = self.far;
        let (center, radius) = &self.bounding;
        loop {
            sample_in_body_cap_into(rng, &self.body, center, *radius, self.max_attempts, &mut self.sample)?;
            match self.points.replace(out, &self.sample, self.next_label) {
                Err(Error::DegenerateConfiguration) => continue,
                other => break other?,
            }
        }
        self.next_label += 1;
        self.t += 1;
        let now = self.farthest();
        self.far = now;
        Ok((now != out).then_some(now))
    }
}

/// Original chain observed through its core: `record` is the time-changed
/// core chain, with `n` counting core changes.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginalRun {
    pub record: TrajectoryRecord,
    pub original_steps: u64,
}

/// Runs the original chain from the `N` points of `params.initial` until the
/// stop rule fires on the core, or `max_original_steps` original steps pass
/// (reported as [`StopReason::MaxSteps`]).
pub fn run_original<R: Rng + ?Sized>(params: &RunParams, max_original_steps: u64, rng: &mut R) -> Result<OriginalRun> {
    run_original_observed(params, max_original_steps, rng, |_, _| {})
}

/// [`run_original`] with a callback after every core change, receiving the
/// new core.
pub fn run_original_observed<R, O>(params: &RunParams, max_original_steps: u64, rng: &mut R, mut observe: O) -> Result<OriginalRun>
where
    R: Rng + ?Sized,
    O: FnMut(&Configuration, &StepRecord),
{
    params.stop.validate()?;
    if params.recenter {
        return Err(Error::InvalidParameter("recentering requires the full space"));
    }
    let mut state = OriginalState::new(params.initial.clone(), params.body.clone())?.with_max_attempts(params.max_attempts);
    let initial = state.core();
    let mut core = initial.clone();
    let mut remaining = core.labels().iter().filter(|&&l| l <= 0).count();
    let mut n = 0u64;
    let mut steps = Vec::new();
    let mut alphas = Vec::new();
    let mut tau = (remaining == 0).then_some(0);
    let mut verdict = params.stop.check_parts(n, remaining, &core);
    let stop_reason = loop {
        if let Some(reason) = verdict {
            break reason;
        }
        if state.t >= max_original_steps {
            break StopReason::MaxSteps;
        }
        // the core, and so the stop rule, only moves when a core point leaves
        let Some(left) = state.advance(rng)? else {
            continue;
        };
        let removed = Point::new(state.points.point(left).to_vec())?;
        let alpha = state.points.label(left);
        let added = Point::new(state.sample.clone())?;
        n += 1;
        core = state.core();
        if alpha <= 0 {
            remaining -= 1;
        }
        if tau.is_none() {
            alphas.push(alpha);
            if remaining == 0 {
                tau = Some(n);
            }
        }
        let record = StepRecord {
            n,
            added,
            removed,
            alpha,
            f_after: core.moment_of_inertia(),
            near_tie: false,
        };
        observe(&core, &record);
        if params.keep_steps {
            steps.push(record);
        }
        verdict = params.stop.check_parts(n, remaining, &core);
    };
    let (_, d_final) = core.min_max_distance();
    Ok(OriginalRun {
        record: TrajectoryRecord {
            initial,
            steps,
            alphas,
            tau,
            n_final: n,
            f_final: core.moment_of_inertia(),
            d_final,
            xi_hat: Point::new(core.center_of_mass())?,
            stop_reason,
            near_ties: 0,
            final_config: core,
        },
        original_steps: state.t,
    })
}
