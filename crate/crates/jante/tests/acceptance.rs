//! Acceptance criteria 1-11. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::time::Instant;

use jante::config::RunConfig;
use jante::ensemble::{run_ensemble, Collect};
use jante::io::write_ensemble;
use jante_core::analysis::{
    atom_scan, compute_constants, tightness_coverage, two_step_region, two_step_replay, TwoStepOutcome,
};
use jante_core::geometry::{shell_volume_check, volume_comparison_check};
use jante_core::keepset::{f_identity, keep_balls, keep_contains, membership_forms, removal_choice};
use jante_core::{Configuration, ConvexBody};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

// ---------------------------------------------------------------- oracles

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn mean(points: &[Vec<f64>]) -> Vec<f64> {
    let d = points[0].len();
    let mut m = vec![0.0; d];
    for p in points {
        for k in 0..d {
            m[k] += p[k];
        }
    }
    m.iter().map(|v| v / points.len() as f64).collect()
}

fn pairwise_f(points: &[&[f64]]) -> f64 {
    let mut f = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            f += dist2(points[i], points[j]);
        }
    }
    f
}

/// `||z - μ⁺|| < max_s ||s - μ⁺||` over `s ∈ X`.
fn keep_by_definition(x: &[Vec<f64>], z: &[f64]) -> bool {
    let mut all = x.to_vec();
    all.push(z.to_vec());
    let mu = mean(&all);
    let far = x.iter().map(|s| dist2(s, &mu)).fold(0.0, f64::max);
    dist2(z, &mu) < far
}

/// Some swap `x_j -> z` lowers `F`.
fn keep_by_f_decrease(x: &[Vec<f64>], z: &[f64]) -> bool {
    let refs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
    let f0 = pairwise_f(&refs);
    (0..x.len()).any(|j| {
        let mut swapped = refs.clone();
        swapped[j] = z;
        pairwise_f(&swapped) < f0
    })
}

fn unit_ball_point(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        if u.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            return u;
        }
    }
}

/// Random configuration at a random scale and position, and an arrival
/// drawn around it reaching 30% beyond the outer ball.
fn random_instance(rng: &mut impl Rng) -> (Vec<Vec<f64>>, Vec<f64>) {
    let d = rng.random_range(1..=3);
    let m = rng.random_range(2..=6);
    let scale = 10f64.powf(rng.random_range(-3.0..3.0));
    let shift: Vec<f64> = (0..d).map(|_| scale * rng.random_range(-5.0..5.0)).collect();
    let x: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..d).map(|k| shift[k] + scale * rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mu = mean(&x);
    let a = x.iter().map(|p| dist2(p, &mu)).fold(0.0, f64::max).sqrt();
    let r = 1.3 * (m as f64 + 1.0) / (m as f64 - 1.0) * a;
    let u = unit_ball_point(rng, d);
    let z = mu.iter().zip(&u).map(|(c, v)| c + r * v).collect();
    (x, z)
}

fn run_config(text: &str) -> jante::Experiment {
    RunConfig::from_toml(text).expect("config parses").resolve().expect("config resolves")
}

// ---------------------------------------------------------------- criteria

fn keep_equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let n = 100_000;
    let (mut mismatches, mut ties, mut inside) = (0, 0, 0);
    for _ in 0..n {
        let (x, z) = random_instance(&mut rng);
        let cfg = Configuration::from_points(&x).unwrap();
        let forms = membership_forms(&cfg, &z).unwrap();
        if forms.near_tie {
            ties += 1;
            continue;
        }
        let body = ConvexBody::full_space(cfg.dim()).unwrap();
        let by_balls = keep_contains(&cfg, &body, &z).unwrap();
        let direct = keep_by_definition(&x, &z);
        let by_f = keep_by_f_decrease(&x, &z);
        inside += usize::from(direct);
        let lib = [forms.definition, forms.mean_form, forms.pair_form, forms.ball_union, forms.f_decrease];
        if by_balls != direct || by_f != direct || lib.iter().any(|&v| v != direct) {
            mismatches += 1;
        }
    }
    let rate = ties as f64 / n as f64;
    verdict(
        mismatches == 0 && rate < 1e-6 && start.elapsed().as_secs() < 30,
        format!("{n} instances, {inside} inside Keep, {mismatches} mismatches, near-tie rate {rate:.1e}"),
    )
}

fn f_identity_check() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let n = 10_000;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (x, z) = random_instance(&mut rng);
        let cfg = Configuration::from_points(&x).unwrap();
        let j = rng.random_range(0..x.len());
        let m = x.len() as f64;
        let refs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let before = pairwise_f(&refs);
        let mut swapped = refs.clone();
        swapped[j] = &z;
        let after = pairwise_f(&swapped);
        let raw = before - after;
        let sigma: Vec<f64> = (0..z.len()).map(|k| x.iter().map(|p| p[k]).sum()).collect();
        let mu_plus: Vec<f64> = sigma.iter().zip(&z).map(|(s, v)| (s + v) / (m + 1.0)).collect();
        let c_j: Vec<f64> = sigma.iter().zip(&x[j]).map(|(s, v)| (s - v) / (m - 1.0)).collect();
        let form1 = (m + 1.0) * (dist2(&x[j], &mu_plus) - dist2(&z, &mu_plus));
        let form2 = (m - 1.0) * (dist2(&x[j], &c_j) - dist2(&z, &c_j));
        let scale = before.max(after);
        let lib = f_identity(&cfg, &z, j).unwrap();
        let errs = [
            (raw - form1).abs() / scale,
            (raw - form2).abs() / scale,
            (raw - lib.rhs1).abs() / scale,
            (raw - lib.rhs2).abs() / scale,
            lib.relative_discrepancy(),
        ];
        worst = errs.iter().copied().fold(worst, f64::max);
    }
    verdict(worst < 1e-9, format!("{n} instances, worst relative discrepancy {worst:.2e}"))
}

fn sandwich() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let n = 100_000;
    let (mut violations, mut ties) = (0, 0);
    let mut radius_err: f64 = 0.0;
    for _ in 0..n {
        let (x, z) = random_instance(&mut rng);
        let cfg = Configuration::from_points(&x).unwrap();
        if removal_choice(&cfg, &z).unwrap().near_tie {
            ties += 1;
            continue;
        }
        let m = x.len() as f64;
        let mu = mean(&x);
        let a = x.iter().map(|p| dist2(p, &mu)).fold(0.0, f64::max).sqrt();
        let outer = (m + 1.0) / (m - 1.0) * a;
        let inside = keep_by_definition(&x, &z);
        let dz = dist2(&z, &mu).sqrt();
        if dz < a && !inside {
            violations += 1;
        }
        if inside && dz >= outer {
            violations += 1;
        }
        for i in 0..x.len() {
            let rest: Vec<Vec<f64>> = x.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, p)| p.clone()).collect();
            if dist2(&z, &mean(&rest)).sqrt() < m / (m + 1.0) * a && !inside {
                violations += 1;
            }
        }
        let kb = keep_balls(&cfg).unwrap();
        radius_err = radius_err.max((kb.inner.radius - a).abs() / a).max((kb.outer.radius - outer).abs() / outer);
    }
    verdict(
        violations == 0 && radius_err < 1e-9,
        format!("{n} points ({ties} near ties skipped), {violations} violations, radius error {radius_err:.1e}"),
    )
}

/// Ensembles on the unit cube with at least 10⁵ increments each.
fn drift_grid() -> Vec<(usize, usize, jante_core::analysis::DriftCollector, f64, f64, f64)> {
    let mut out = Vec::new();
    for d in [1usize, 2] {
        for m in [2usize, 3, 5] {
            let text = |n_runs: usize| {
                format!(
                    "d = {d}\nM = {m}\nseed = {}\nn_runs = {n_runs}\n[body]\nkind = \"box\"\nlower = {lo:?}\nupper = {hi:?}\n\
                     [initial]\nkind = \"random\"\nlower = {lo:?}\nupper = {hi:?}\nseed = {}\n",
                    1000 + 10 * d + m,
                    7 * d + m,
                    lo = vec![0.0; d],
                    hi = vec![1.0; d],
                )
            };
            let pilot = run_ensemble(&run_config(&text(100)), Collect::default(), None).unwrap();
            let per_run = pilot.runs.iter().map(|r| r.n_final as f64).sum::<f64>() / 100.0;
            let n_runs = ((1.3e5 / per_run).ceil() as usize).clamp(100, jante::ensemble::DRIFT_RUNS);
            let ens = run_ensemble(&run_config(&text(n_runs)), Collect { drift: true, ..Collect::default() }, None).unwrap();
            let mut drift = ens.drift;
            drift.pairs.truncate(100_000);
            let bound = 4f64.powi(-(d as i32)) / (4.0 * m as f64);
            out.push((d, m, drift, bound, 4f64.powi(-(d as i32)), 1.0 / (4.0 * m as f64)));
        }
    }
    out
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn drift_bound(grid: &[(usize, usize, jante_core::analysis::DriftCollector, f64, f64, f64)], secs: f64) -> Verdict {
    let mut pass = secs < 120.0;
    let mut parts = Vec::new();
    for (d, m, drift, bound, _, _) in grid {
        let inc: Vec<f64> = drift.pairs.iter().map(|(b, a)| a.f.ln() - b.f.ln()).collect();
        let (mean, se) = mean_se(&inc);
        let lib = drift.log_f_report(*bound);
        let ok = inc.len() >= 100_000 && mean <= -bound + 3.0 * se && lib.pass;
        pass &= ok;
        parts.push(format!("({d},{m}) {mean:.4}<={:.4}", -bound));
    }
    verdict(pass, format!("ensembles {secs:.1}s; mean Δlog F vs bound: {}", parts.join(", ")))
}

fn decrease_probability(grid: &[(usize, usize, jante_core::analysis::DriftCollector, f64, f64, f64)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, m, drift, _, prob, drop) in grid {
        let n = drift.pairs.len() as f64;
        let hits = drift.pairs.iter().filter(|(b, a)| a.f - b.f < -drop * b.f).count() as f64;
        let p = hits / n;
        let se = (p * (1.0 - p) / n).sqrt();
        let ok = p >= prob - 3.0 * se && drift.decrease_probability(*drop, *prob).pass;
        pass &= ok;
        parts.push(format!("({d},{m}) {p:.3}>={prob:.4}"));
    }
    verdict(pass, format!("P(definite drop) vs bound: {}", parts.join(", ")))
}

fn exodus() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [1usize, 2] {
        for m in [2usize, 3, 4] {
            let initial = if d == 1 && m == 2 {
                "kind = \"explicit\"\npoints = [[-1.0], [1.0]]".to_string()
            } else {
                format!("kind = \"random\"\nlower = {:?}\nupper = {:?}\nseed = {}", vec![-1.0; d], vec![1.0; d], d * 10 + m)
            };
            let text = format!(
                "d = {d}\nM = {m}\nchain = \"scale_free\"\nseed = {}\nn_runs = 100000\n[body]\nkind = \"fullspace\"\n\
                 [initial]\n{initial}\n[stop]\nmax_steps = 100000\ntarget_D = 0.0\nrequire_exodus = true\n",
                500 + d * 10 + m
            );
            let ens = run_ensemble(&run_config(&text), Collect::default(), None).unwrap();
            let taus: Vec<u64> = ens.runs.iter().filter_map(|r| r.tau).collect();
            let all = taus.len() == ens.runs.len() && taus.iter().all(|&t| t < 100_000);
            pass &= all;
            let mean_tau = taus.iter().sum::<u64>() as f64 / taus.len() as f64;
            if m == 2 {
                // τ - 1 against Geometric(1/2), last cell pools k >= 15
                let mut obs = [0f64; 15];
                for &t in &taus {
                    obs[((t - 1) as usize).clamp(1, 15) - 1] += 1.0;
                }
                let n = taus.len() as f64;
                let chi2: f64 = (1..=15)
                    .map(|k| {
                        let p = if k < 15 { 0.5f64.powi(k) } else { 0.5f64.powi(14) };
                        (obs[k as usize - 1] - n * p).powi(2) / (n * p)
                    })
                    .sum();
                let pval = ChiSquared::new(14.0).unwrap().sf(chi2);
                let ok = pval > 0.001 && (mean_tau - 3.0).abs() <= 0.02;
                pass &= ok;
                parts.push(format!("({d},{m}) mean τ {mean_tau:.4} p={pval:.3}"));
            } else {
                parts.push(format!("({d},{m}) mean τ {mean_tau:.2}"));
            }
        }
    }
    verdict(pass, format!("10^5 runs each, all finite; {}", parts.join(", ")))
}

fn continuity() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    let ladder = [1e-1, 1e-2, 1e-3, 1e-4];
    for body in ["kind = \"box\"\nlower = [0.0]\nupper = [1.0]", "kind = \"fullspace\""] {
        let text = format!(
            "d = 1\nM = 3\nseed = 77\nn_runs = 10000\n[body]\n{body}\n[initial]\nkind = \"explicit\"\npoints = [[0.1], [0.35], [0.8]]\n"
        );
        let exp = run_config(&text);
        let ens = run_ensemble(&exp, Collect::default(), None).unwrap();
        let limits = ens.limits();
        let probes: Vec<Vec<f64>> = exp.params.initial.points().map(<[f64]>::to_vec).collect();
        let scan = atom_scan(&limits, &probes, &ladder).unwrap();
        let mut bits: Vec<u64> = limits.iter().map(|p| p[0].to_bits()).collect();
        bits.sort_unstable();
        bits.dedup();
        let hits: Vec<f64> = scan.ladder.iter().map(|r| r.probe_hit_fraction).collect();
        let decreasing = hits.windows(2).all(|w| w[1] < w[0]);
        let ok = scan.exact_collisions == 0 && bits.len() == limits.len() && decreasing;
        pass &= ok;
        parts.push(format!("probe hits {hits:?}"));

        // negative control: 5% of the ensemble replaced by copies
        let mut corrupted = limits.clone();
        for i in 0..corrupted.len() / 20 {
            corrupted[2 * i + 1] = corrupted[2 * i].clone();
        }
        let control = atom_scan(&corrupted, &probes, &ladder).unwrap();
        pass &= control.exact_collisions == corrupted.len() / 20;
    }
    verdict(pass, format!("10^4 limits, no collisions, control flagged; {}", parts.join("; ")))
}

/// Closed-form classification of the first two arrivals from `{-1, 1}`.
fn region(z1: f64, z2: f64) -> bool {
    (0.0 < z1 && z1 < 1.0 && 2.0 * z1 - 1.0 < z2 && z2 < (z1 + 1.0) / 2.0)
        || (1.0 < z1 && z1 < 3.0 && (z1 + 1.0) / 2.0 < z2 && z2 < 2.0 * z1 - 1.0)
}

fn two_step() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let (mut legal, mut disagreements, mut ties, mut hits) = (0, 0, 0, 0);
    while legal < 10_000 {
        let z1 = rng.random_range(-3.0..3.0);
        let z2 = rng.random_range(-3.0..3.0);
        let Some(replay) = two_step_replay(z1, z2).unwrap() else { continue };
        legal += 1;
        if replay.near_tie {
            ties += 1;
            continue;
        }
        let replayed = replay.outcome == TwoStepOutcome::MinusThenPlus;
        let lib = two_step_region(z1, z2) == TwoStepOutcome::MinusThenPlus;
        hits += usize::from(replayed);
        if replayed != region(z1, z2) || lib != replayed {
            disagreements += 1;
        }
    }
    verdict(
        disagreements == 0,
        format!("{legal} legal draws, {hits} in region, {disagreements} disagreements, {ties} near ties"),
    )
}

fn tightness() -> Verdict {
    let text = "d = 1\nM = 2\nchain = \"scale_free\"\nseed = 909\nn_runs = 10000\n[body]\nkind = \"fullspace\"\n\
                [initial]\nkind = \"explicit\"\npoints = [[-1.0], [1.0]]\n";
    let exp = run_config(text);
    let ens = run_ensemble(&exp, Collect { anchor: Some(5), ..Collect::default() }, None).unwrap();
    let gamma: f64 = 0.5;
    let eps: f64 = 0.5;
    let n0 = (2.0 * (eps * (1.0 - gamma.sqrt())).ln() / gamma.ln()).ceil();
    let m: f64 = 2.0;
    let coeff = 2.0 / (m * (m - 1.0).sqrt()) * (n0 + 1.0 / (1.0 - gamma.powf(0.25)));
    let lib = compute_constants(1, 2, 1.0).unwrap().tightness_radius_coeff(eps).unwrap();
    let samples = ens.tightness_samples();
    let covered = samples
        .iter()
        .filter(|s| (s.xi_hat[0] - s.mu_anchor[0]).abs() <= coeff * s.sqrt_f_anchor)
        .count();
    let coverage = covered as f64 / samples.len() as f64;
    let report = tightness_coverage(&samples, lib, eps);
    verdict(
        samples.len() == 10_000 && (coeff - lib).abs() < 1e-12 && (coeff * 100.0).round() == 1229.0 && coverage >= 0.5 && report.pass,
        format!("coefficient {coeff:.4}, coverage {coverage:.4} over {} runs", samples.len()),
    )
}

fn volume_checks() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut violations = 0;
    for i in 0..100 {
        let d = 1 + i % 3;
        let body = match i % 4 {
            0 => {
                let lower: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..0.0)).collect();
                let upper: Vec<f64> = lower.iter().map(|l| l + rng.random_range(0.5..3.0)).collect();
                ConvexBody::new_box(lower, upper).unwrap()
            }
            1 => ConvexBody::ball((0..d).map(|_| rng.random_range(-1.0..1.0)).collect(), rng.random_range(0.3..2.0)).unwrap(),
            2 => {
                // simplex {x >= 0, sum x <= s}
                let s = rng.random_range(0.5..2.0);
                let mut facets: Vec<(Vec<f64>, f64)> = (0..d)
                    .map(|k| ((0..d).map(|j| if j == k { -1.0 } else { 0.0 }).collect(), 0.0))
                    .collect();
                facets.push((vec![1.0; d], s));
                ConvexBody::polytope_normalized(facets, vec![s / (2.0 * d as f64 + 2.0); d], Some(2.0 * s)).unwrap()
            }
            _ => ConvexBody::full_space(d).unwrap(),
        };
        let y = loop {
            let p: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            if body.contains(&p).unwrap() {
                break p;
            }
        };
        let big_r = rng.random_range(0.1..1.5);
        let r = big_r * rng.random_range(0.05..0.95);
        let shell = shell_volume_check(&mut rng, &body, &y, big_r, r, 20_000).unwrap();
        let ratio = volume_comparison_check(&mut rng, &body, &y, r, big_r, 20_000).unwrap();
        violations += usize::from(shell.violation) + usize::from(ratio.violation);
    }
    verdict(violations == 0, format!("100 instances, {violations} violations beyond 4 SE"))
}

fn determinism() -> Verdict {
    let text = "d = 2\nM = 4\nseed = 31337\nn_runs = 500\n[body]\nkind = \"ball\"\ncenter = [0.0, 0.0]\nradius = 1.0\n\
                [initial]\nkind = \"random\"\nlower = [-0.5, -0.5]\nupper = [0.5, 0.5]\nseed = 4\n";
    let exp = run_config(text);
    let csv = |workers| {
        let ens = run_ensemble(&exp, Collect::default(), Some(workers)).unwrap();
        let mut buf = Vec::new();
        write_ensemble(&mut buf, exp.d, &ens.runs).unwrap();
        buf
    };
    let reference = csv(1);
    let same = [2, 3, 8].iter().all(|&w| csv(w) == reference);
    verdict(same && !reference.is_empty(), format!("{} bytes, workers 1/2/3/8 identical", reference.len()))
}

fn main() {
    let mut failures = 0;
    let mut record = |n: usize, name: &str, f: &dyn Fn() -> Verdict| {
        let start = Instant::now();
        let v = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {n:>2} {}  {name} [{secs:.1}s]: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failures += usize::from(!v.pass);
    };
    record(1, "keep equivalence", &keep_equivalence);
    record(2, "F identity", &f_identity_check);
    record(3, "sandwich inclusions", &sandwich);
    let start = Instant::now();
    let grid = drift_grid();
    let secs = start.elapsed().as_secs_f64();
    record(4, "log F drift bound", &|| drift_bound(&grid, secs));
    record(5, "definite-decrease probability", &|| decrease_probability(&grid));
    record(6, "exodus", &exodus);
    record(7, "continuity (atom scan)", &continuity);
    record(8, "two-step region oracle", &two_step);
    record(9, "tightness", &tightness);
    record(10, "isoperimetric and volume comparison", &volume_checks);
    record(11, "determinism across worker counts", &determinism);
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
