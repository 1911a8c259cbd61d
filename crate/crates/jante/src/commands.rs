//! The CLI commands. Each writes its files under the output directory and
//! returns what it wrote plus a verdict.

use std::path::PathBuf;

use jante_core::analysis::{compute_constants, keepmap_grid, TheoryConstants};
use jante_core::{ConvexBody, StopRule, UniformGeometryData};
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, Experiment, RunConfig};
use crate::ensemble::{run_ensemble, run_one, Collect, Ensemble};
use crate::io;
use crate::verify::{self, TIGHTNESS_ANCHOR};

/// Exit code 0.
pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl From<jante_core::Error> for CommandError {
    fn from(e: jante_core::Error) -> Self {
        CommandError::Runtime(e.into())
    }
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::Config(_) => EXIT_CONFIG,
            CommandError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: RunConfig) -> RunConfig {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.runs {
            cfg.n_runs = n;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        cfg
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: u8,
    pub files: Vec<PathBuf>,
    /// Printed to stdout.
    pub message: String,
}

impl Outcome {
    fn ok(files: Vec<PathBuf>, message: String) -> Self {
        Outcome { exit_code: EXIT_OK, files, message }
    }
}

fn geometry(body: &ConvexBody) -> Result<UniformGeometryData, CommandError> {
    Ok(body.uniform_geometry_constants(body.default_r0())?)
}

fn constants_for(exp: &Experiment) -> Result<(TheoryConstants, UniformGeometryData), CommandError> {
    let g = geometry(&exp.params.body)?;
    Ok((compute_constants(exp.d, exp.m, g.c)?, g))
}

pub fn simulate(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let exp = cfg.resolve()?;
    if exp.n_runs != 1 {
        return Err(ConfigError::Invalid("simulate needs n_runs = 1".into()).into());
    }
    let out = run_one(&exp, 0, Collect { steps: true, ..Collect::default() })?;
    let dir = &exp.output_dir;
    io::write_trajectory(io::create(dir, "trajectory.csv")?, &out.record)?;
    let s = &out.summary;
    let summary = json!({
        "seed": exp.seed,
        "run_seed": s.seed,
        "chain": exp.chain,
        "tau": s.tau,
        "alphas": s.alphas,
        "xi_hat": s.xi,
        "n_final": s.n_final,
        "F_final": s.f_final,
        "D_final": s.d_final,
        "stop_reason": s.reason.as_str(),
        "near_ties": s.ties,
        "original_steps": s.original_steps,
    });
    io::write_json(dir, "summary.json", &summary)?;
    Ok(Outcome::ok(
        vec![dir.join("trajectory.csv"), dir.join("summary.json")],
        format!("{} steps, stop reason {}", s.n_final, s.reason.as_str()),
    ))
}

fn write_ensemble_files(exp: &Experiment, ens: &Ensemble, files: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    let dir = &exp.output_dir;
    io::write_ensemble(io::create(dir, "ensemble.csv")?, exp.d, &ens.runs)?;
    files.push(dir.join("ensemble.csv"));
    let ex = verify::exodus_summary(ens, exp.m);
    io::write_tau_histogram(io::create(dir, "tau_hist.csv")?, &ex.stats, exp.m)?;
    files.push(dir.join("tau_hist.csv"));
    Ok(())
}

#[derive(Debug, Serialize)]
struct EnsembleSummary<'a> {
    seed: u64,
    n_runs: usize,
    chain: crate::config::ChainKind,
    exodus: verify::ExodusSummary,
    drift: Vec<jante_core::analysis::DriftReport>,
    decrease_probability: jante_core::analysis::ProbabilityReport,
    atom_scan: Option<jante_core::analysis::AtomScanReport>,
    near_tie_rate: f64,
    constants: &'a TheoryConstants,
}

pub fn ensemble(cfg: &RunConfig, workers: Option<usize>) -> Result<Outcome, CommandError> {
    let exp = cfg.resolve()?;
    let (k, g) = constants_for(&exp)?;
    let ens = run_ensemble(&exp, Collect { drift: true, ..Collect::default() }, workers)?;
    let mut files = Vec::new();
    write_ensemble_files(&exp, &ens, &mut files)?;
    let dir = &exp.output_dir;
    let drift = verify::drift_reports(&ens, &k, g.r0);
    io::write_drift(io::create(dir, "drift.csv")?, &drift)?;
    files.push(dir.join("drift.csv"));
    let atom_scan = verify::limit_atom_scan(&exp, &ens);
    if let Some(scan) = &atom_scan {
        io::write_atom_ladder(io::create(dir, "atom_ladder.csv")?, scan)?;
        files.push(dir.join("atom_ladder.csv"));
    }
    let summary = EnsembleSummary {
        seed: exp.seed,
        n_runs: exp.n_runs,
        chain: exp.chain,
        exodus: verify::exodus_summary(&ens, exp.m),
        drift,
        decrease_probability: ens.drift.decrease_probability(k.drop_factor, k.prob_bound),
        atom_scan,
        near_tie_rate: verify::near_tie_rate(&ens),
        constants: &k,
    };
    io::write_json(dir, "summary.json", &summary)?;
    files.push(dir.join("summary.json"));
    Ok(Outcome::ok(
        files,
        format!("{} runs, mean tau {:.4}", exp.n_runs, summary.exodus.stats.mean_tau),
    ))
}

/// Runs the ensemble until the exodus (then the configured targets) and
/// evaluates every check; exit code 1 when a gating check fails.
pub fn verify(cfg: &RunConfig, workers: Option<usize>) -> Result<Outcome, CommandError> {
    let mut exp = cfg.resolve()?;
    exp.params.stop.require_exodus = true;
    let (k, g) = constants_for(&exp)?;
    let collect = Collect {
        drift: true,
        anchor: Some(TIGHTNESS_ANCHOR),
        ..Collect::default()
    };
    let ens = run_ensemble(&exp, collect, workers)?;
    let report = verify::evaluate(&exp, &ens, &k, g.r0);
    let mut files = Vec::new();
    write_ensemble_files(&exp, &ens, &mut files)?;
    let dir = &exp.output_dir;
    io::write_drift(io::create(dir, "drift.csv")?, &verify::drift_reports(&ens, &k, g.r0))?;
    io::write_json(dir, "verify.json", &report)?;
    files.push(dir.join("drift.csv"));
    files.push(dir.join("verify.json"));
    let mut message = String::new();
    for c in &report.checks {
        let verdict = match (c.pass, c.gating) {
            (true, true) => "PASS",
            (false, true) => "FAIL",
            (true, false) => "info",
            (false, false) => "info (outside bound)",
        };
        message.push_str(&format!("{:<24} {verdict}\n", c.name));
    }
    message.push_str(if report.pass { "verify: PASS" } else { "verify: FAIL" });
    Ok(Outcome {
        exit_code: if report.pass { EXIT_OK } else { EXIT_VERIFY_FAILED },
        files,
        message,
    })
}

pub fn keepmap(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let exp = cfg.resolve()?;
    let spec = exp
        .keepmap
        .clone()
        .ok_or_else(|| ConfigError::Invalid("keepmap needs a [keepmap] table".into()))?;
    if exp.d != 2 {
        return Err(ConfigError::Invalid("keepmap needs d = 2".into()).into());
    }
    let map = keepmap_grid(
        &exp.params.initial,
        &exp.params.body,
        spec.bbox,
        (spec.resolution[0], spec.resolution[1]),
    )
    .map_err(ConfigError::from)?;
    let dir = &exp.output_dir;
    io::write_keepmap(io::create(dir, "keepmap.csv")?, &map)?;
    Ok(Outcome::ok(
        vec![dir.join("keepmap.csv")],
        format!("classes {:?}", map.distinct_classes()),
    ))
}

/// Prints the theory constants as JSON; writes no files.
pub fn constants(cfg: &RunConfig) -> Result<Outcome, CommandError> {
    let body = cfg.body()?;
    if cfg.m < 2 {
        return Err(ConfigError::Invalid("M must be at least 2".into()).into());
    }
    let g = geometry(&body)?;
    let k = compute_constants(cfg.d, cfg.m, g.c)?;
    let mut value = serde_json::to_value(k).map_err(anyhow::Error::from)?;
    value["tightness_radius_coeff_half"] = json!(k.tightness_radius_coeff(0.5)?);
    value["g_delta"] = json!(k.g_delta());
    value["uniform_geometry"] = serde_json::to_value(g).map_err(anyhow::Error::from)?;
    Ok(Outcome::ok(
        Vec::new(),
        serde_json::to_string_pretty(&value).map_err(anyhow::Error::from)?,
    ))
}

/// Runs every trajectory to its exodus and reports the law of `τ`.
pub fn exodus(cfg: &RunConfig, workers: Option<usize>) -> Result<Outcome, CommandError> {
    let mut exp = cfg.resolve()?;
    exp.params.stop = StopRule {
        target_d: 0.0,
        target_f: 0.0,
        require_exodus: true,
        ..exp.params.stop
    };
    let ens = run_ensemble(&exp, Collect::default(), workers)?;
    let mut files = Vec::new();
    write_ensemble_files(&exp, &ens, &mut files)?;
    let ex = verify::exodus_summary(&ens, exp.m);
    io::write_json(&exp.output_dir, "exodus.json", &ex)?;
    files.push(exp.output_dir.join("exodus.json"));
    let p = ex.geometric_p_value.map_or(String::new(), |p| format!(", geometric p = {p:.4}"));
    Ok(Outcome::ok(
        files,
        format!(
            "{} of {} runs reached the exodus, mean tau {:.4}{p}",
            ex.stats.n_reached, ex.stats.n_runs, ex.stats.mean_tau
        ),
    ))
}
