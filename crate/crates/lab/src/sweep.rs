//! Suite execution and output writing.
//!
//! Instances run in parallel on the current rayon pool; results are collected
//! in instance order so every output is byte-reproducible.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use armor_core::data::{sample_dataset, Dataset};
use armor_core::mdp::Policy;
use armor_core::theory::{
    absolute_decomposition_terms, check_absolute_decomposition, check_on_support_bound, check_rpi,
    check_suboptimality_trend, compare_solution_concepts, mle_coverage_experiment, CheckReport, Instance, TrendSpec,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Suite};
use crate::error::{LabError, Result};
use crate::plot;

const DATA_TAG: u64 = 100;

/// Rows of one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&'static str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub suite: Suite,
    pub table: Table,
    pub reports: Vec<CheckReport>,
    pub plots: Vec<Table>,
}

impl SuiteRun {
    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.reports.iter().filter(|r| r.failed())
    }
}

/// Column lists of every suite CSV, shown in `--help`.
pub const CSV_COLUMNS: &[(&str, &[&str])] = &[
    (
        "rpi",
        &[
            "instance",
            "instance_seed",
            "n",
            "alpha",
            "truth_in_space",
            "version_space_size",
            "game_value",
            "j_hat",
            "j_ref",
            "improvement",
            "asserted",
            "passed",
        ],
    ),
    (
        "absolute",
        &[
            "instance",
            "instance_seed",
            "n",
            "alpha",
            "truth_in_space",
            "lhs",
            "intermediate",
            "rhs",
            "asserted",
            "passed",
        ],
    ),
    (
        "trend",
        &[
            "instance",
            "instance_seed",
            "alpha",
            "n",
            "mean",
            "std_err",
            "excess",
            "excess_se",
            "c_fit",
        ],
    ),
    (
        "mle",
        &[
            "instance",
            "instance_seed",
            "n",
            "delta",
            "trials",
            "frequency",
            "floor",
            "asserted",
            "passed",
        ],
    ),
    (
        "support",
        &[
            "instance",
            "instance_seed",
            "n",
            "delta",
            "trials",
            "min_feasible_c_diag",
            "c_diag",
            "passed",
        ],
    ),
    (
        "concepts",
        &[
            "instance",
            "instance_seed",
            "n",
            "alpha",
            "concept",
            "row",
            "policy",
            "worst_return",
            "worst_regret",
        ],
    ),
];

fn columns(suite: Suite) -> &'static [&'static str] {
    CSV_COLUMNS
        .iter()
        .find(|(name, _)| *name == suite.name())
        .map(|(_, c)| *c)
        .expect("every suite has columns")
}

fn dataset(cfg: &ExperimentConfig, inst: &Instance, n: usize) -> Result<Dataset> {
    Ok(sample_dataset(
        &inst.m_star,
        &inst.behavior,
        n,
        inst.trial_seed(DATA_TAG, n, 0),
        cfg.noise(),
    )?)
}

fn label(i: usize, mut r: CheckReport) -> CheckReport {
    r.name = format!("instance {i}: {}", r.name);
    r
}

fn label_n(i: usize, n: usize, mut r: CheckReport) -> CheckReport {
    r.name = format!("instance {i}, n={n}: {}", r.name);
    r
}

fn policy_string(p: &Policy) -> String {
    match p.actions() {
        Some(a) => a.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
        None => format!("{:?}", p.prob_rows()),
    }
}

type Part = (Vec<Vec<String>>, Vec<CheckReport>, Vec<Vec<String>>);

fn rpi_part(cfg: &ExperimentConfig, i: usize, inst: &Instance) -> Result<Part> {
    let (mut rows, mut reports, mut sub) = (Vec::new(), Vec::new(), Vec::new());
    let alphas = cfg.algorithm.alphas(inst.class.len())?;
    for &n in &cfg.dataset.n_grid {
        let d = dataset(cfg, inst, n)?;
        for p in check_rpi(inst, &d, &alphas, cfg.algorithm.solver_mode())? {
            rows.push(vec![
                i.to_string(),
                inst.seed.to_string(),
                n.to_string(),
                p.alpha.to_string(),
                p.truth_in_space.to_string(),
                p.version_space_size.to_string(),
                p.game_value.to_string(),
                p.j_hat.to_string(),
                p.j_ref.to_string(),
                (p.j_hat - p.j_ref).to_string(),
                p.report.asserted.to_string(),
                p.report.passed.to_string(),
            ]);
            sub.push(vec![
                n.to_string(),
                p.alpha.to_string(),
                p.game_value.to_string(),
                (p.j_hat - p.j_ref).to_string(),
                u8::from(p.truth_in_space).to_string(),
            ]);
            reports.push(label_n(i, n, p.report));
        }
    }
    Ok((rows, reports, sub))
}

fn absolute_part(cfg: &ExperimentConfig, i: usize, inst: &Instance) -> Result<Part> {
    let (mut rows, mut reports) = (Vec::new(), Vec::new());
    let alphas = cfg.algorithm.alphas(inst.class.len())?;
    for &n in &cfg.dataset.n_grid {
        let d = dataset(cfg, inst, n)?;
        for &alpha in &alphas {
            let t = absolute_decomposition_terms(inst, &d, alpha)?;
            let r = check_absolute_decomposition(inst, &d, alpha)?;
            rows.push(vec![
                i.to_string(),
                inst.seed.to_string(),
                n.to_string(),
                alpha.to_string(),
                t.truth_in_space.to_string(),
                t.lhs.to_string(),
                t.intermediate.to_string(),
                t.rhs.to_string(),
                r.asserted.to_string(),
                r.passed.to_string(),
            ]);
            reports.push(label_n(i, n, r));
        }
    }
    Ok((rows, reports, Vec::new()))
}

fn trend_part(cfg: &ExperimentConfig, i: usize, inst: &Instance) -> Result<Part> {
    let (mut rows, mut reports, mut sub) = (Vec::new(), Vec::new(), Vec::new());
    let log_term = (inst.class.len() as f64 / cfg.checks.delta).ln();
    for alpha in cfg.algorithm.alphas(inst.class.len())? {
        let spec = TrendSpec {
            n_grid: cfg.dataset.n_grid.clone(),
            trials: cfg.checks.trials,
            alpha,
            delta: cfg.checks.delta,
            noise: cfg.noise(),
        };
        let t = check_suboptimality_trend(inst, &spec)?;
        for p in &t.points {
            rows.push(vec![
                i.to_string(),
                inst.seed.to_string(),
                alpha.to_string(),
                p.n.to_string(),
                p.mean.to_string(),
                p.std_err.to_string(),
                p.excess.to_string(),
                p.excess_se.to_string(),
                t.c_fit.to_string(),
            ]);
            sub.push(vec![
                i.to_string(),
                alpha.to_string(),
                p.n.to_string(),
                p.mean.to_string(),
                p.std_err.to_string(),
                p.excess.to_string(),
                (t.c_fit * (log_term / p.n as f64).sqrt()).to_string(),
            ]);
        }
        reports.push(label(i, t.report));
    }
    Ok((rows, reports, sub))
}

fn mle_part(cfg: &ExperimentConfig, i: usize, inst: &Instance) -> Result<Part> {
    let (mut rows, mut reports) = (Vec::new(), Vec::new());
    for &n in &cfg.dataset.n_grid {
        let r = mle_coverage_experiment(inst, n, cfg.checks.trials, cfg.checks.delta)?;
        rows.push(vec![
            i.to_string(),
            inst.seed.to_string(),
            n.to_string(),
            cfg.checks.delta.to_string(),
            r.trials.to_string(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.asserted.to_string(),
            r.passed.to_string(),
        ]);
        reports.push(label(i, r));
    }
    Ok((rows, reports, Vec::new()))
}

fn support_part(cfg: &ExperimentConfig, i: usize, inst: &Instance) -> Result<Part> {
    let (mut rows, mut reports) = (Vec::new(), Vec::new());
    for &n in &cfg.dataset.n_grid {
        let r = check_on_support_bound(inst, n, cfg.checks.trials, cfg.checks.delta, cfg.checks.c_diag)?;
        rows.push(vec![
            i.to_string(),
            inst.seed.to_string(),
            n.to_string(),
            cfg.checks.delta.to_string(),
            r.trials.to_string(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.passed.to_string(),
        ]);
        reports.push(label(i, r));
    }
    Ok((rows, reports, Vec::new()))
}

fn concepts_part(cfg: &ExperimentConfig, i: usize, inst: &Instance) -> Result<Part> {
    let (mut rows, mut reports) = (Vec::new(), Vec::new());
    let alphas = cfg.algorithm.alphas(inst.class.len())?;
    for &n in &cfg.dataset.n_grid {
        let d = dataset(cfg, inst, n)?;
        for &alpha in &alphas {
            let cmp = compare_solution_concepts(inst, &d, alpha)?;
            for r in &cmp.rows {
                rows.push(vec![
                    i.to_string(),
                    inst.seed.to_string(),
                    n.to_string(),
                    alpha.to_string(),
                    r.concept.name().to_string(),
                    r.row.to_string(),
                    policy_string(&r.policy),
                    r.worst_return.to_string(),
                    r.worst_regret.to_string(),
                ]);
            }
            let abs = &cmp.rows[0];
            reports.push(label(
                i,
                CheckReport {
                    name: format!("concepts(n={n}, alpha={alpha})"),
                    passed: cmp.return_column_ok && cmp.regret_column_ok,
                    asserted: true,
                    lhs: abs.worst_return,
                    rhs: cmp.best_worst_return,
                    details: format!(
                        "separates={} best_worst_regret={}",
                        cmp.separates(),
                        cmp.best_worst_regret
                    ),
                    trials: 1,
                },
            ));
        }
    }
    Ok((rows, reports, Vec::new()))
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    s / k as f64
}

fn game_value_plot(sub: Vec<Vec<String>>) -> Table {
    let mut t = Table::new(
        "plot_game_value_vs_alpha",
        &[
            "n",
            "alpha",
            "mean_game_value",
            "mean_improvement",
            "truth_in_space_fraction",
            "points",
        ],
    );
    let parse = |r: &Vec<String>, k: usize| r[k].parse::<f64>().expect("written by this module");
    let mut keyed: Vec<(usize, f64, Vec<String>)> = sub
        .into_iter()
        .map(|r| (r[0].parse().expect("count"), parse(&r, 1), r))
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    for group in keyed.chunk_by(|a, b| a.0 == b.0 && a.1 == b.1) {
        let rows: Vec<&Vec<String>> = group.iter().map(|g| &g.2).collect();
        t.rows.push(vec![
            group[0].0.to_string(),
            group[0].1.to_string(),
            mean(rows.iter().map(|r| parse(r, 2))).to_string(),
            mean(rows.iter().map(|r| parse(r, 3))).to_string(),
            mean(rows.iter().map(|r| parse(r, 4))).to_string(),
            rows.len().to_string(),
        ]);
    }
    t
}

/// Runs one suite over `instances`.
pub fn run_suite(cfg: &ExperimentConfig, instances: &[Instance], suite: Suite) -> Result<SuiteRun> {
    let part = match suite {
        Suite::Rpi => rpi_part,
        Suite::Absolute => absolute_part,
        Suite::Trend => trend_part,
        Suite::Mle => mle_part,
        Suite::Support => support_part,
        Suite::Concepts => concepts_part,
    };
    let parts: Vec<Part> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| part(cfg, i, inst).map_err(|e| LabError::Format(format!("instance {i}: {e}"))))
        .collect::<Result<_>>()?;
    let mut table = Table::new(suite.name(), columns(suite));
    let (mut reports, mut sub) = (Vec::new(), Vec::new());
    for (rows, reps, s) in parts {
        table.rows.extend(rows);
        reports.extend(reps);
        sub.extend(s);
    }
    let plots = match suite {
        Suite::Rpi => vec![game_value_plot(sub)],
        Suite::Trend => {
            let mut t = Table::new(
                "plot_suboptimality_vs_n",
                &[
                    "instance",
                    "alpha",
                    "n",
                    "mean_suboptimality",
                    "std_err",
                    "mean_excess",
                    "fitted_bound",
                ],
            );
            t.rows = sub;
            vec![t]
        }
        _ => Vec::new(),
    };
    Ok(SuiteRun {
        suite,
        table,
        reports,
        plots,
    })
}

fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn report_json(suite: Suite, r: &CheckReport) -> Value {
    json!({
        "suite": suite.name(),
        "name": r.name,
        "passed": r.passed,
        "asserted": r.asserted,
        "lhs": number(r.lhs),
        "rhs": number(r.rhs),
        "details": r.details,
        "trials": r.trials,
    })
}

fn stamp(cfg: &ExperimentConfig) -> String {
    format!("config_sha256={} seed={}", cfg.hash(), cfg.seed)
}

fn write_file(path: &Path, body: &[u8]) -> Result<PathBuf> {
    fs::write(path, body).map_err(|e| LabError::io(path, e))?;
    Ok(path.to_path_buf())
}

pub fn write_csv(cfg: &ExperimentConfig, dir: &Path, table: &Table) -> Result<PathBuf> {
    let mut buf = format!("# {}\n", stamp(cfg)).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| LabError::io(dir, e))?;
    }
    write_file(&dir.join(format!("{}.csv", table.name)), &buf)
}

pub fn write_reports(cfg: &ExperimentConfig, path: &Path, runs: &[SuiteRun]) -> Result<PathBuf> {
    let mut buf = Vec::new();
    let head = json!({"config_sha256": cfg.hash(), "seed": cfg.seed});
    writeln!(buf, "{head}").expect("write to memory");
    for run in runs {
        for r in &run.reports {
            writeln!(buf, "{}", report_json(run.suite, r)).expect("write to memory");
        }
    }
    write_file(path, &buf)
}

/// Human-readable summary: one line per suite, then each failed or
/// unasserted-but-failing report.
pub fn summary(cfg: &ExperimentConfig, runs: &[SuiteRun]) -> String {
    let mut out = format!("# {}\n", stamp(cfg));
    for run in runs {
        let asserted = run.reports.iter().filter(|r| r.asserted).count();
        let failed = run.failures().count();
        let info = run.reports.len() - asserted;
        out.push_str(&format!(
            "{} {}: {} asserted, {} failed, {} diagnostic or precondition-unmet\n",
            if failed == 0 { "PASS" } else { "FAIL" },
            run.suite.name(),
            asserted,
            failed,
            info
        ));
        for r in run.failures() {
            out.push_str(&format!(
                "  failed {}: lhs={} rhs={} {}\n",
                r.name, r.lhs, r.rhs, r.details
            ));
        }
        if matches!(run.suite, Suite::Support | Suite::Trend) {
            for r in &run.reports {
                out.push_str(&format!("  {}: {}\n", r.name, r.details));
            }
        }
    }
    out
}

/// Writes every output of a sweep into `dir` and returns the file paths.
pub fn write_sweep(cfg: &ExperimentConfig, dir: &Path, runs: &[SuiteRun], svg: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut files = Vec::new();
    for run in runs {
        files.push(write_csv(cfg, dir, &run.table)?);
        for p in &run.plots {
            files.push(write_csv(cfg, dir, p)?);
            if svg {
                let body = plot::render(p, &stamp(cfg));
                files.push(write_file(&dir.join(format!("{}.svg", p.name)), body.as_bytes())?);
            }
        }
    }
    files.push(write_reports(cfg, &dir.join("reports.jsonl"), runs)?);
    files.push(write_file(&dir.join("summary.txt"), summary(cfg, runs).as_bytes())?);
    Ok(files)
}
