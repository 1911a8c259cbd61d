//! CSV and JSON output.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use jante_core::analysis::{AtomScanReport, DriftReport, ExodusStatistics, KeepMap};
use jante_core::TrajectoryRecord;
use serde::Serialize;

use crate::ensemble::RunSummary;

/// 17 significant digits; parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn coord_headers(prefix: &str, d: usize) -> impl Iterator<Item = String> + '_ {
    (1..=d).map(move |k| format!("{prefix}_{k}"))
}

/// `n, y_1..y_d, alpha, F_after, near_tie`
pub fn write_trajectory<W: Write>(w: W, record: &TrajectoryRecord) -> anyhow::Result<()> {
    let d = record.initial.dim();
    let mut out = csv_writer(w);
    let mut header = vec!["n".to_string()];
    header.extend(coord_headers("y", d));
    header.extend(["alpha", "F_after", "near_tie"].map(String::from));
    out.write_record(&header)?;
    for s in &record.steps {
        let mut row = vec![s.n.to_string()];
        row.extend(s.added.as_slice().iter().map(|&v| fmt_f64(v)));
        row.push(s.alpha.to_string());
        row.push(fmt_f64(s.f_after));
        row.push(u8::from(s.near_tie).to_string());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// `run, seed, tau, n_final, xi_1..xi_d, F_final, reason, ties`; an
/// unreached exodus is written as `NA`.
pub fn write_ensemble<W: Write>(w: W, d: usize, runs: &[RunSummary]) -> anyhow::Result<()> {
    let mut out = csv_writer(w);
    let mut header: Vec<String> = ["run", "seed", "tau", "n_final"].map(String::from).to_vec();
    header.extend(coord_headers("xi", d));
    header.extend(["F_final", "reason", "ties"].map(String::from));
    out.write_record(&header)?;
    for r in runs {
        let mut row = vec![
            r.run.to_string(),
            r.seed.to_string(),
            r.tau.map_or_else(|| "NA".to_string(), |t| t.to_string()),
            r.n_final.to_string(),
        ];
        row.extend(r.xi.iter().map(|&v| fmt_f64(v)));
        row.push(fmt_f64(r.f_final));
        row.push(r.reason.as_str().to_string());
        row.push(r.ties.to_string());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// `ix, iy, x, y, class`; class `-1` is outside Keep.
pub fn write_keepmap<W: Write>(w: W, map: &KeepMap) -> anyhow::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["ix", "iy", "x", "y", "class"])?;
    for iy in 0..map.ny {
        for ix in 0..map.nx {
            let [x, y] = map.cell_center(ix, iy);
            out.write_record([
                ix.to_string(),
                iy.to_string(),
                fmt_f64(x),
                fmt_f64(y),
                map.class(ix, iy).to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `tau, count, frequency, geometric_pmf`; the pmf column is `P(τ-1 = k)`
/// under `Geometric(1/2)` for two-point runs and empty otherwise.
pub fn write_tau_histogram<W: Write>(w: W, stats: &ExodusStatistics, m: usize) -> anyhow::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["tau", "count", "frequency", "geometric_pmf"])?;
    let n = stats.n_reached.max(1) as f64;
    for &(tau, count) in &stats.histogram {
        let pmf = if m == 2 && tau >= 2 {
            fmt_f64(0.5f64.powi((tau - 1) as i32))
        } else {
            String::new()
        };
        out.write_record([tau.to_string(), count.to_string(), fmt_f64(count as f64 / n), pmf])?;
    }
    out.flush()?;
    Ok(())
}

/// `eps, max_cluster_count, pair_fraction, probe_hit_fraction`
pub fn write_atom_ladder<W: Write>(w: W, report: &AtomScanReport) -> anyhow::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["eps", "max_cluster_count", "pair_fraction", "probe_hit_fraction"])?;
    for r in &report.ladder {
        out.write_record([
            fmt_f64(r.eps),
            r.max_cluster_count.to_string(),
            fmt_f64(r.pair_fraction),
            fmt_f64(r.probe_hit_fraction),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `functional, n_increments, mean, se, bound, status`
pub fn write_drift<W: Write>(w: W, reports: &[DriftReport]) -> anyhow::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["functional", "n_increments", "mean", "se", "bound", "status"])?;
    for r in reports {
        out.write_record([
            r.functional.as_str().to_string(),
            r.n_increments.to_string(),
            fmt_f64(r.conditional_mean),
            fmt_f64(r.standard_error),
            fmt_f64(r.bound),
            format!("{:?}", r.status),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn create(dir: &Path, name: &str) -> anyhow::Result<File> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    File::create(&path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<()> {
    let mut f = create(dir, name)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 5e-324, f64::MAX] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }
}
