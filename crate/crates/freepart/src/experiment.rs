//! Config-driven experiment runners: moment tables, N/V and Poissonized
//! convergence sweeps, oracle cross-checks, and partition listings.
//!
//! Output is fully deterministic: identical configs produce byte-identical
//! tables.

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::combinat::enumerate_set_partitions;
use crate::config::{CountMode, ExperimentConfig, Mode, OutputFormat};
use crate::cumulants::free_cumulant;
use crate::error::{Error, Result};
use crate::fock::{
    fock_vacuum_expectation, free_product_apply, free_product_vacuum_expectation,
    poissonized_oracle, FreeProductVector,
};
use crate::rational::{rat_dec, rat_f64, rat_str, Rat};
use crate::space::{DiscreteSpace, JumpMeasure, TestFunction};
use crate::systems::{
    centered_fixed_n_trace, centered_poissonized_trace, fixed_n_trace, n_from_ratio,
    poissonized_trace, ParticleCount, ParticleSystemSpec,
};
use crate::targets::{centered_levy_moment, levy_moment};

/// Significant digits in decimal renderings.
const DECIMAL_DIGITS: usize = 20;
/// Tail tolerance of the Poissonized floating checks.
pub const POISSON_TAIL_TOL: f64 = 1e-9;

/// One table row; column names match the documented CSV header.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub word: String,
    #[serde(rename = "V")]
    pub volume: String,
    #[serde(rename = "N_or_alpha")]
    pub n_or_alpha: String,
    pub value_exact: String,
    pub value_decimal: String,
    pub limit_exact: String,
    pub error_decimal: String,
    pub order_estimate: String,
}

/// One line of the oracle cross-check report.
#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub check: String,
    pub cases: usize,
    pub max_abs_error: String,
    pub status: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionRow {
    pub partition: String,
    pub noncrossing: bool,
}

#[derive(Clone, Debug)]
pub enum Report {
    Table(Vec<Row>),
    Oracle(Vec<OracleRow>),
    Partitions {
        rows: Vec<PartitionRow>,
        total: usize,
        noncrossing: usize,
    },
}

impl Report {
    /// True when an oracle report contains a mismatch.
    pub fn has_oracle_mismatch(&self) -> bool {
        match self {
            Report::Oracle(rows) => rows.iter().any(|r| r.status != "ok"),
            _ => false,
        }
    }
}

/// Dispatch on the config's mode.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.mode {
        Mode::Moments => Ok(Report::Table(run_moments(cfg)?)),
        Mode::Converge => Ok(Report::Table(run_converge(cfg)?)),
        Mode::Oracle => Ok(Report::Oracle(run_oracle_check(cfg)?)),
        Mode::Partitions => run_partitions(cfg),
    }
}

fn base_space(cfg: &ExperimentConfig) -> Result<&DiscreteSpace> {
    cfg.space
        .as_ref()
        .ok_or_else(|| Error::Config("mode requires a space".into()))
}

/// Volume scaling: multiply the bulk cell's mass by the scale factor while
/// test-function supports stay fixed.
fn scaled_space(base: &DiscreteSpace, bulk: usize, scale: &Rat) -> DiscreteSpace {
    let cells = base
        .cell_names()
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mass = if i == bulk {
                base.mass(i) * scale
            } else {
                base.mass(i).clone()
            };
            (name.clone(), mass)
        })
        .collect();
    DiscreteSpace::new(cells).expect("scaling preserves validity")
}

/// System volume: sigma(Lambda), times nu(Delta) in the marked case.
fn system_volume(space: &DiscreteSpace, jumps: &Option<JumpMeasure>) -> Rat {
    match jumps {
        Some(jm) => space.total_mass() * jm.total_mass(),
        None => space.total_mass(),
    }
}

struct TracePoint {
    volume: Rat,
    n_or_alpha: String,
    value: Rat,
}

/// Finite-system trace of one word on one (possibly scaled) space.
fn finite_trace(
    cfg: &ExperimentConfig,
    space: &DiscreteSpace,
    fns: &[&TestFunction],
) -> Result<TracePoint> {
    let volume = system_volume(space, &cfg.jumps);
    let (count, n_or_alpha) = match cfg.count_mode {
        CountMode::Fixed => {
            let n = n_from_ratio(&cfg.n_ratio, &volume)?;
            (ParticleCount::FixedN(n), n.to_string())
        }
        CountMode::Poissonized => {
            let alpha = cfg.alpha.clone().unwrap_or_else(|| volume.clone());
            (ParticleCount::PoissonAlpha(alpha.clone()), rat_str(&alpha))
        }
    };
    let spec = ParticleSystemSpec {
        space: space.clone(),
        jumps: cfg.jumps.clone(),
        count,
    };
    let value = match (&spec.count, cfg.centered) {
        (ParticleCount::FixedN(_), false) => fixed_n_trace(&spec, fns)?,
        (ParticleCount::FixedN(_), true) => centered_fixed_n_trace(&spec, fns)?,
        (ParticleCount::PoissonAlpha(_), false) => poissonized_trace(&spec, fns)?,
        (ParticleCount::PoissonAlpha(_), true) => centered_poissonized_trace(&spec, fns)?,
    };
    Ok(TracePoint {
        volume,
        n_or_alpha,
        value,
    })
}

/// Limit moment of a word: the free Levy / free Poisson value on the base
/// space, which the finite systems approach as the volume grows.
fn limit_value(cfg: &ExperimentConfig, fns: &[&TestFunction]) -> Result<Rat> {
    let base = base_space(cfg)?;
    let jm = cfg.jumps.clone().unwrap_or_else(JumpMeasure::delta_one);
    if cfg.centered {
        centered_levy_moment(base, &jm, fns)
    } else {
        levy_moment(base, &jm, fns)
    }
}

fn word_label(word: &[String]) -> String {
    word.join("*")
}

/// One row per word: finite-system value, limit value, difference.
pub fn run_moments(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let base = base_space(cfg)?;
    let mut rows = Vec::new();
    for word in &cfg.words {
        let fns = cfg.word_functions(word)?;
        let point = finite_trace(cfg, base, &fns)?;
        let limit = limit_value(cfg, &fns)?;
        let error = (&point.value - &limit).abs();
        rows.push(Row {
            word: word_label(word),
            volume: rat_str(&point.volume),
            n_or_alpha: point.n_or_alpha,
            value_exact: rat_str(&point.value),
            value_decimal: rat_dec(&point.value, DECIMAL_DIGITS),
            limit_exact: rat_str(&limit),
            error_decimal: rat_dec(&error, DECIMAL_DIGITS),
            order_estimate: String::new(),
        });
    }
    Ok(rows)
}

/// Convergence sweep: for each word and each schedule point, the trace on
/// the scaled space, the error against the limit, and the empirical order
/// between consecutive points.
pub fn run_converge(cfg: &ExperimentConfig) -> Result<Vec<Row>> {
    let base = base_space(cfg)?;
    let bulk = cfg
        .bulk_cell
        .ok_or_else(|| Error::Config("converge mode needs a bulk_cell".into()))?;
    if cfg.schedule.len() < 3 {
        return Err(Error::Config(
            "schedule too short for order estimation (need >= 3 points)".into(),
        ));
    }
    let mut rows = Vec::new();
    for word in &cfg.words {
        let fns = cfg.word_functions(word)?;
        let limit = limit_value(cfg, &fns)?;
        // schedule points are independent; evaluate them in parallel but
        // assemble in schedule order
        let points: Vec<Result<TracePoint>> = cfg
            .schedule
            .par_iter()
            .map(|scale| {
                let space = scaled_space(base, bulk, scale);
                finite_trace(cfg, &space, &fns)
            })
            .collect();
        let mut prev: Option<(Rat, Rat)> = None; // (V, error)
        for point in points {
            let point = point?;
            let error = (&point.value - &limit).abs();
            let order = match &prev {
                Some((v_prev, e_prev)) if !e_prev.is_zero() && !error.is_zero() => {
                    let c = rat_f64(&point.volume) / rat_f64(v_prev);
                    let p = (rat_f64(e_prev) / rat_f64(&error)).ln() / c.ln();
                    format!("{p:.4}")
                }
                _ => String::new(),
            };
            prev = Some((point.volume.clone(), error.clone()));
            rows.push(Row {
                word: word_label(word),
                volume: rat_str(&point.volume),
                n_or_alpha: point.n_or_alpha,
                value_exact: rat_str(&point.value),
                value_decimal: rat_dec(&point.value, DECIMAL_DIGITS),
                limit_exact: rat_str(&limit),
                error_decimal: rat_dec(&error, DECIMAL_DIGITS),
                order_estimate: order,
            });
        }
    }
    Ok(rows)
}

/// All words of lengths `1..=max_len` over the given alphabet, in
/// lexicographic order.
fn all_words<T: Copy>(alphabet: &[T], max_len: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::new();
    let mut layer: Vec<Vec<T>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &a in alphabet {
                let mut v = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Exhaustive desk-scale comparison of the combinatorial traces against the
/// two operator oracles, plus freeness and Poissonized floating checks.
pub fn run_oracle_check(cfg: &ExperimentConfig) -> Result<Vec<OracleRow>> {
    let base = base_space(cfg)?;
    if base.num_cells() > 3 {
        return Err(Error::ResourceLimit(
            "oracle mode is desk-scale only: at most 3 cells".into(),
        ));
    }
    if cfg.functions.is_empty() {
        return Err(Error::Config("oracle mode needs functions".into()));
    }
    let jm = cfg.jumps.clone().unwrap_or_else(JumpMeasure::delta_one);
    let fns: Vec<&TestFunction> = cfg.functions.values().collect();
    let mut rows = Vec::new();

    // Oracle B vs the cumulant-additivity route, exhaustive over N <= 3.
    {
        let deep = all_words(&fns[..fns.len().min(2)], 5);
        let wide = if fns.len() > 2 {
            all_words(&fns[..3.min(fns.len())], 3)
        } else {
            Vec::new()
        };
        let mut cases = 0usize;
        let mut max_err = Rat::zero();
        for n in 1..=3u64 {
            let spec = ParticleSystemSpec {
                space: base.clone(),
                jumps: cfg.jumps.clone(),
                count: ParticleCount::FixedN(n),
            };
            for word in deep.iter().chain(wide.iter()) {
                let lhs = fixed_n_trace(&spec, word)?;
                let rhs =
                    free_product_vacuum_expectation(base, &jm, n, word, word.len())?;
                let err = (lhs - rhs).abs();
                if err > max_err {
                    max_err = err;
                }
                cases += 1;
            }
        }
        rows.push(exact_row("fixed_n_trace_vs_free_product_oracle", cases, &max_err));
    }

    // Oracle A vs the limit moments.
    {
        let words = all_words(&fns[..fns.len().min(2)], 4);
        let mut cases = 0usize;
        let mut max_err = Rat::zero();
        for word in &words {
            let lhs = levy_moment(base, &jm, word)?;
            let rhs = fock_vacuum_expectation(base, &jm, word, word.len())?;
            let err = (lhs - rhs).abs();
            if err > max_err {
                max_err = err;
            }
            cases += 1;
        }
        rows.push(exact_row("levy_moment_vs_fock_oracle", cases, &max_err));
    }

    // Freeness: mixed free cumulants across particle labels vanish.
    {
        let f = fns[0];
        let mut cases = 0usize;
        let mut max_err = Rat::zero();
        for n in 2..=3u64 {
            let mf = |word: &[(usize, &TestFunction)]| -> Rat {
                let mut v = FreeProductVector::vacuum(word.len());
                for (label, func) in word.iter().rev() {
                    v = free_product_apply(base, &jm, *label, func, &v)
                        .expect("depth equals word length");
                }
                v.vacuum_coefficient()
            };
            let labels: Vec<usize> = (0..n as usize).collect();
            for k in 2..=4usize {
                for labeling in all_words(&labels, k).into_iter().filter(|w| w.len() == k) {
                    if labeling.iter().all(|&l| l == labeling[0]) {
                        continue; // not a mixed word
                    }
                    let word: Vec<(usize, &TestFunction)> =
                        labeling.iter().map(|&l| (l, f)).collect();
                    let err = free_cumulant(&mf, &word)?.abs();
                    if err > max_err {
                        max_err = err;
                    }
                    cases += 1;
                }
            }
        }
        rows.push(exact_row("mixed_cumulants_across_particles", cases, &max_err));
    }

    // Poissonized closed form vs the operator-level Poisson series, k <= 2.
    {
        let volume = system_volume(base, &cfg.jumps);
        let alpha = cfg.alpha.clone().unwrap_or(volume);
        let words = all_words(&fns[..fns.len().min(2)], 2);
        let mut cases = 0usize;
        let mut max_err: f64 = 0.0;
        for word in &words {
            let spec = ParticleSystemSpec {
                space: base.clone(),
                jumps: cfg.jumps.clone(),
                count: ParticleCount::PoissonAlpha(alpha.clone()),
            };
            let exact = rat_f64(&poissonized_trace(&spec, word)?);
            let oracle =
                poissonized_oracle(base, &jm, &alpha, word, 80, word.len(), POISSON_TAIL_TOL)?;
            max_err = max_err.max((exact - oracle).abs());
            cases += 1;
        }
        let status = if max_err <= 2.0 * POISSON_TAIL_TOL {
            "ok"
        } else {
            "mismatch"
        };
        rows.push(OracleRow {
            check: "poissonized_closed_form_vs_series_oracle".into(),
            cases,
            max_abs_error: format!("{max_err:.3e}"),
            status: status.into(),
        });
    }

    Ok(rows)
}

fn exact_row(check: &str, cases: usize, max_err: &Rat) -> OracleRow {
    OracleRow {
        check: check.into(),
        cases,
        max_abs_error: rat_str(max_err),
        status: if max_err.is_zero() { "ok" } else { "mismatch" }.into(),
    }
}

/// Listing of all partitions of `{1..n}` with the non-crossing flag and the
/// Bell/Catalan counts.
pub fn run_partitions(cfg: &ExperimentConfig) -> Result<Report> {
    let n = cfg
        .partitions_n
        .ok_or_else(|| Error::Config("partitions mode needs partitions_n".into()))?;
    let parts = enumerate_set_partitions(n)?;
    let mut rows = Vec::new();
    let mut noncrossing = 0usize;
    for p in &parts {
        let nc = p.is_noncrossing();
        if nc {
            noncrossing += 1;
        }
        let blocks: Vec<String> = p
            .blocks()
            .iter()
            .map(|b| {
                let inner: Vec<String> = b.iter().map(|x| x.to_string()).collect();
                format!("{{{}}}", inner.join(","))
            })
            .collect();
        rows.push(PartitionRow {
            partition: format!("{{{}}}", blocks.join(",")),
            noncrossing: nc,
        });
    }
    Ok(Report::Partitions {
        total: parts.len(),
        noncrossing,
        rows,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Render a report in the requested format. CSV uses RFC-4180-style quoting
/// and a fixed header; JSON mirrors the same rows.
pub fn render(report: &Report, format: OutputFormat) -> String {
    match (report, format) {
        (Report::Table(rows), OutputFormat::Csv) => {
            let mut out = String::from(
                "word,V,N_or_alpha,value_exact,value_decimal,limit_exact,error_decimal,order_estimate\n",
            );
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    csv_field(&r.word),
                    csv_field(&r.volume),
                    csv_field(&r.n_or_alpha),
                    csv_field(&r.value_exact),
                    csv_field(&r.value_decimal),
                    csv_field(&r.limit_exact),
                    csv_field(&r.error_decimal),
                    csv_field(&r.order_estimate),
                ));
            }
            out
        }
        (Report::Table(rows), OutputFormat::Json) => {
            serde_json::to_string_pretty(rows).expect("rows serialize") + "\n"
        }
        (Report::Oracle(rows), OutputFormat::Csv) => {
            let mut out = String::from("check,cases,max_abs_error,status\n");
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    csv_field(&r.check),
                    r.cases,
                    csv_field(&r.max_abs_error),
                    csv_field(&r.status),
                ));
            }
            out
        }
        (Report::Oracle(rows), OutputFormat::Json) => {
            serde_json::to_string_pretty(rows).expect("rows serialize") + "\n"
        }
        (
            Report::Partitions {
                rows,
                total,
                noncrossing,
            },
            OutputFormat::Csv,
        ) => {
            let mut out = String::from("partition,noncrossing\n");
            for r in rows {
                out.push_str(&format!("{},{}\n", csv_field(&r.partition), r.noncrossing));
            }
            out.push_str(&format!("# total={total} noncrossing={noncrossing}\n"));
            out
        }
        (
            Report::Partitions {
                rows,
                total,
                noncrossing,
            },
            OutputFormat::Json,
        ) => {
            let value = serde_json::json!({
                "partitions": rows,
                "total": total,
                "noncrossing": noncrossing,
            });
            serde_json::to_string_pretty(&value).expect("rows serialize") + "\n"
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn converge_cfg(count_mode: &str) -> ExperimentConfig {
        let text = format!(
            r#"{{
                "mode": "converge",
                "space": {{
                    "cells": [
                        {{"name": "theta", "mass": "1"}},
                        {{"name": "bulk", "mass": "9"}}
                    ],
                    "bulk_cell": "bulk"
                }},
                "functions": {{"f": {{"theta": "1"}}}},
                "words": [["f", "f"], ["f", "f", "f"]],
                "schedule": ["1", "39/9", "159/9", "639/9"],
                "n_ratio": "1",
                "count_mode": "{count_mode}"
            }}"#
        );
        ExperimentConfig::from_json(&text).unwrap()
    }

    #[test]
    fn converge_fixed_orders_are_first_order() {
        let rows = run_converge(&converge_cfg("fixed")).unwrap();
        // k = 3 word, last schedule point: empirical order near 1
        let last = rows.last().unwrap();
        assert_eq!(last.word, "f*f*f");
        let p: f64 = last.order_estimate.parse().unwrap();
        assert!((0.8..=1.2).contains(&p), "order {p}");
    }

    #[test]
    fn converge_poissonized_low_orders_exact() {
        let rows = run_converge(&converge_cfg("poissonized")).unwrap();
        for r in rows.iter().filter(|r| r.word == "f*f") {
            assert_eq!(r.error_decimal, "0", "{r:?}");
        }
    }

    #[test]
    fn moments_rows() {
        let text = r#"{
            "mode": "moments",
            "space": {
                "cells": [
                    {"name": "theta", "mass": "1"},
                    {"name": "bulk", "mass": "9"}
                ]
            },
            "functions": {"f": {"theta": "1"}},
            "words": [["f", "f"]],
            "count_mode": "fixed",
            "n_ratio": "1"
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let rows = run_moments(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].value_exact, "19/10");
        assert_eq!(rows[0].limit_exact, "2/1");
    }

    #[test]
    fn partitions_report() {
        let text = r#"{"mode": "partitions", "partitions_n": 4}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        match run_partitions(&cfg).unwrap() {
            Report::Partitions {
                total, noncrossing, ..
            } => {
                assert_eq!(total, 15);
                assert_eq!(noncrossing, 14);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let cfg = converge_cfg("fixed");
        let a = render(&run(&cfg).unwrap(), OutputFormat::Csv);
        let b = render(&run(&cfg).unwrap(), OutputFormat::Csv);
        assert_eq!(a, b);
        assert!(a.starts_with("word,V,N_or_alpha,"));
        let j = render(&run(&cfg).unwrap(), OutputFormat::Json);
        assert!(j.trim_start().starts_with('['));
    }

    #[test]
    fn oracle_report_passes() {
        let text = r#"{
            "mode": "oracle",
            "space": {
                "cells": [
                    {"name": "a", "mass": "1"},
                    {"name": "b", "mass": "2"}
                ]
            },
            "functions": {
                "f": {"a": "1"},
                "g": {"a": "1/2", "b": "1"},
                "h": {"b": "2"}
            }
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let rows = run_oracle_check(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.status == "ok"), "{rows:?}");
        assert!(rows.iter().any(|r| r.cases >= 200), "{rows:?}");
    }
}
