use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use eigengap::harness::checks::NeumannRow;
use eigengap::harness::output::OutputSet;
use eigengap::harness::{
    run_coverage, run_crlb_check, run_neumann_check, run_sweep, run_sym_vs_asym, run_symmetric_pipeline,
    CoverageOutcome, CoverageReport,
};
use eigengap::Result;

use crate::experiment::ExperimentConfig;

/// Files to write and a table to print for one finished experiment.
pub struct Rendered {
    pub files: OutputSet,
    pub table: String,
}

#[derive(Serialize)]
struct SweepRow {
    value: f64,
    sample: usize,
    error: f64,
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Rendered> {
    let mut files = OutputSet::new();
    let mut summary = json!({
        "command": cfg.name(),
        "config": cfg,
        "log_base": "natural",
        "base_seed": cfg.run().base_seed,
        "n_trials": cfg.run().n_trials,
        "parallel": cfg.run().backend().is_parallel(),
    });
    let table = match cfg {
        ExperimentConfig::Coverage(c) => {
            let out = run_coverage(c)?;
            coverage_files(&mut files, "coverage", &out, &mut summary)?;
            coverage_table(&out)
        }
        ExperimentConfig::Sympipe(c) => {
            let out = run_symmetric_pipeline(c)?;
            coverage_files(&mut files, "sympipe", &out, &mut summary)?;
            coverage_table(&out)
        }
        ExperimentConfig::CrlbCheck(c) => {
            let rep = run_crlb_check(c)?;
            files.records_csv("crlb-linear.csv", &rep.coverage.linear_records)?;
            summary["empirical_variance"] = json!(rep.empirical_variance);
            summary["crlb"] = json!(rep.crlb);
            summary["oracle_variance"] = json!(rep.oracle_variance);
            summary["ratio"] = json!(rep.ratio);
            summary["linear"] = json!(rep.coverage.linear);
            summary["failures"] = json!(rep.coverage.failures);
            let mut t = String::new();
            writeln!(t, "{:<22}{:>14}", "quantity", "value").ok();
            for (k, v) in [
                ("empirical variance", rep.empirical_variance),
                ("lower bound", rep.crlb),
                ("oracle variance", rep.oracle_variance),
                ("ratio", rep.ratio),
            ] {
                writeln!(t, "{k:<22}{v:>14.6e}").ok();
            }
            t
        }
        ExperimentConfig::Sweep(c) => {
            let rep = run_sweep(c)?;
            let rows: Vec<SweepRow> = rep
                .cells
                .iter()
                .flat_map(|cell| {
                    cell.errors.iter().enumerate().map(|(sample, &error)| SweepRow {
                        value: cell.value,
                        sample,
                        error,
                    })
                })
                .collect();
            files.csv("sweep-errors.csv", &rows)?;
            let cells: Vec<Value> = rep
                .cells
                .iter()
                .map(|cell| {
                    json!({
                        "value": cell.value,
                        "n_trials": cell.n_trials,
                        "n_failed": cell.n_failed,
                        "min": cell.min,
                        "quartiles": cell.quartiles,
                        "max": cell.max,
                        "mean": cell.mean,
                    })
                })
                .collect();
            summary["variable"] = json!(rep.variable);
            summary["cells"] = json!(cells);
            let mut t = String::new();
            writeln!(t, "{:>12}{:>8}{:>13}{:>13}{:>13}", rep.variable, "ok", "q25", "median", "q75").ok();
            for cell in &rep.cells {
                let [a, b, c] = cell.quartiles;
                writeln!(t, "{:>12.4}{:>8}{a:>13.4e}{b:>13.4e}{c:>13.4e}", cell.value, cell.n_trials).ok();
            }
            t
        }
        ExperimentConfig::Symasym(c) => {
            let rep = run_sym_vs_asym(c)?;
            files.csv("symasym.csv", &rep.rows)?;
            summary["l"] = json!(rep.l);
            summary["rows"] = json!(rep.rows);
            let mut t = String::new();
            writeln!(t, "{:>8}{:>14}{:>14}{:>14}{:>14}", "n", "asym", "sym", "asym rel", "sym rel").ok();
            for r in &rep.rows {
                writeln!(
                    t,
                    "{:>8}{:>14.4e}{:>14.4e}{:>14.4}{:>14.4}",
                    r.n, r.asym_error, r.sym_error, r.asym_relative, r.sym_relative
                )
                .ok();
            }
            t
        }
        ExperimentConfig::NeumannCheck(c) => {
            let rep = run_neumann_check(c)?;
            files.csv::<NeumannRow>("neumann.csv", &rep.rows)?;
            summary["n_failed"] = json!(rep.n_failed);
            summary["violations"] = json!(rep.violations);
            summary["rows"] = json!(rep.rows.len());
            let mut t = String::new();
            writeln!(t, "{:>6}{:>16}{:>16}", "s", "max defect", "max bound").ok();
            for &s in &c.s_max {
                let pick = |f: fn(&NeumannRow) -> f64| {
                    rep.rows.iter().filter(|r| r.s_max == s).map(f).fold(0.0, f64::max)
                };
                writeln!(t, "{s:>6}{:>16.4e}{:>16.4e}", pick(|r| r.defect), pick(|r| r.bound)).ok();
            }
            writeln!(t, "violations: {} of {}", rep.violations, rep.rows.len()).ok();
            t
        }
    };
    files.json("summary.json", &summary)?;
    Ok(Rendered { files, table })
}

fn coverage_files(files: &mut OutputSet, stem: &str, out: &CoverageOutcome, summary: &mut Value) -> Result<()> {
    files.records_csv(&format!("{stem}-linear.csv"), &out.linear_records)?;
    files.records_csv(&format!("{stem}-eigval.csv"), &out.eigen_records)?;
    summary["linear"] = json!(out.linear);
    summary["eigenvalue"] = json!(out.eigenvalue);
    summary["eigenvalue_localized"] = json!(out.eigenvalue_localized);
    summary["failures"] = json!(out.failures);
    Ok(())
}

fn coverage_table(out: &CoverageOutcome) -> String {
    let mut t = String::new();
    writeln!(t, "{:<12}{:>8}{:>8}{:>10}{:>8}{:>13}{:>13}", "target", "ok", "failed", "coverage", "KS", "mean |err|", "mean var").ok();
    let row = |t: &mut String, r: &CoverageReport| {
        writeln!(
            t,
            "{:<12}{:>8}{:>8}{:>10.4}{:>8.4}{:>13.4e}{:>13.4e}",
            r.target, r.n_trials, r.n_failed, r.coverage_rate, r.ks_distance, r.mean_abs_error, r.mean_variance
        )
        .ok();
    };
    row(&mut t, &out.linear);
    row(&mut t, &out.eigenvalue);
    t
}
