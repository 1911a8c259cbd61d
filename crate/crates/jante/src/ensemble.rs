//! Single runs and deterministic parallel ensembles.

use jante_core::analysis::{DriftCollector, Snapshot, TightnessSample};
use jante_core::{
    run_original_observed, run_trajectory_observed, Configuration, ConvexBody, StepRecord, StopReason,
    TrajectoryRecord,
};
use rayon::prelude::*;

use crate::config::{ChainKind, Experiment};
use crate::seed::{derive_seed, run_rng};

/// Runs past this index contribute no drift increments (memory bound).
pub const DRIFT_RUNS: usize = 10_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Collect {
    pub steps: bool,
    pub drift: bool,
    /// Step at which `μ` and `sqrt F` are recorded for the tightness check.
    pub anchor: Option<u64>,
}

/// One ensemble row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub tau: Option<u64>,
    pub n_final: u64,
    pub xi: Vec<f64>,
    pub f_final: f64,
    pub d_final: f64,
    pub reason: StopReason,
    pub ties: u64,
    pub original_steps: Option<u64>,
    /// Removal labels up to the exodus.
    pub alphas: Vec<i64>,
    pub tightness: Option<TightnessSample>,
    /// Steps where `F` failed to decrease.
    pub f_increases: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub drift: DriftCollector,
    pub record: TrajectoryRecord,
}

struct Observer<'a> {
    body: &'a ConvexBody,
    collect: Collect,
    prev: Snapshot,
    prev_f: f64,
    drift: DriftCollector,
    anchor: Option<(Vec<f64>, f64)>,
    f_increases: u64,
}

impl<'a> Observer<'a> {
    fn new(initial: &Configuration, body: &'a ConvexBody, collect: Collect) -> Self {
        let anchor = (collect.anchor == Some(0))
            .then(|| (initial.center_of_mass(), initial.moment_of_inertia().sqrt()));
        Observer {
            body,
            collect,
            prev: Snapshot::of(initial, body),
            prev_f: initial.moment_of_inertia(),
            drift: DriftCollector::new(),
            anchor,
            f_increases: 0,
        }
    }

    fn see(&mut self, config: &Configuration, mu: impl FnOnce() -> Vec<f64>, step: &StepRecord) {
        if step.f_after >= self.prev_f {
            self.f_increases += 1;
        }
        self.prev_f = step.f_after;
        if self.collect.drift {
            let now = Snapshot::of(config, self.body);
            self.drift.push(self.prev, now);
            self.prev = now;
        }
        if self.collect.anchor == Some(step.n) {
            self.anchor = Some((mu(), step.f_after.sqrt()));
        }
    }
}

/// Runs trajectory `run` of the experiment.
pub fn run_one(exp: &Experiment, run: usize, collect: Collect) -> jante_core::Result<RunOutput> {
    let mut rng = run_rng(exp.seed, run as u64);
    let params = jante_core::RunParams {
        keep_steps: collect.steps,
        ..exp.params.clone()
    };
    let (record, original_steps, obs) = match exp.chain {
        ChainKind::Jante | ChainKind::ScaleFree => {
            let mut obs = Observer::new(&params.initial, &params.body, collect);
            let record = run_trajectory_observed(&params, &mut rng, |state, step| {
                obs.see(state.config(), || state.center_of_mass(), step)
            })?;
            (record, None, obs)
        }
        ChainKind::Original => {
            // the observer starts from the initial core, not all N points
            let core = jante_core::OriginalState::new(params.initial.clone(), params.body.clone())?.core();
            let mut obs = Observer::new(&core, &params.body, collect);
            let out = run_original_observed(&params, exp.max_original_steps, &mut rng, |core, step| {
                obs.see(core, || core.center_of_mass(), step)
            })?;
            (out.record, Some(out.original_steps), obs)
        }
    };
    let summary = RunSummary {
        run,
        seed: derive_seed(exp.seed, run as u64),
        tau: record.tau,
        n_final: record.n_final,
        xi: record.xi_hat.as_slice().to_vec(),
        f_final: record.f_final,
        d_final: record.d_final,
        reason: record.stop_reason,
        ties: record.near_ties,
        original_steps,
        alphas: record.alphas.clone(),
        tightness: obs.anchor.map(|(mu_anchor, sqrt_f_anchor)| TightnessSample {
            mu_anchor,
            sqrt_f_anchor,
            xi_hat: record.xi_hat.as_slice().to_vec(),
        }),
        f_increases: obs.f_increases,
    };
    Ok(RunOutput {
        summary,
        drift: obs.drift,
        record,
    })
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    /// Sorted by run index.
    pub runs: Vec<RunSummary>,
    /// Increments of the first [`DRIFT_RUNS`] runs, in run order.
    pub drift: DriftCollector,
}

impl Ensemble {
    pub fn taus(&self) -> Vec<Option<u64>> {
        self.runs.iter().map(|r| r.tau).collect()
    }

    pub fn limits(&self) -> Vec<Vec<f64>> {
        self.runs.iter().map(|r| r.xi.clone()).collect()
    }

    pub fn tightness_samples(&self) -> Vec<TightnessSample> {
        self.runs.iter().filter_map(|r| r.tightness.clone()).collect()
    }
}

/// Runs `exp.n_runs` trajectories on `workers` threads (default: available
/// parallelism). The result does not depend on the worker count.
pub fn run_ensemble(exp: &Experiment, collect: Collect, workers: Option<usize>) -> anyhow::Result<Ensemble> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build()?;
    let outputs: Vec<(RunSummary, DriftCollector)> = pool.install(|| {
        (0..exp.n_runs)
            .into_par_iter()
            .map(|run| {
                let c = Collect {
                    steps: false,
                    drift: collect.drift && run < DRIFT_RUNS,
                    ..collect
                };
                run_one(exp, run, c).map(|o| (o.summary, o.drift))
            })
            .collect::<jante_core::Result<_>>()
    })?;
    let mut drift = DriftCollector::new();
    let mut runs = Vec::with_capacity(outputs.len());
    for (summary, d) in outputs {
        drift.extend(d);
        runs.push(summary);
    }
    Ok(Ensemble { runs, drift })
}
