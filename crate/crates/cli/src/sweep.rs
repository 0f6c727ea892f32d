//! Grid of synthetic graphs scored by several methods.

use std::fmt::Write as _;

use ndiv_core::metrics::{auc, average_precision};
use ndiv_core::synthgen::generate;
use ndiv_core::{run, AnomalyType, Method, Synthetic, SyntheticSpec};
use rayon::prelude::*;

use crate::args::SweepArgs;
use crate::commands::{resolve, resolve_spec};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{report_json, round_sig, Staged, REPORT_DIGITS};

pub const DEFAULT_METHODS: [Method; 3] = [Method::NeighborDiv, Method::Nrs, Method::AmenEgo];
pub const DEFAULT_H_VALUES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const DEFAULT_TYPES: [AnomalyType; 3] = [AnomalyType::TypeH, AnomalyType::TypeD, AnomalyType::Mixed];

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub base: SyntheticSpec,
    pub scoring: RunConfig,
    pub methods: Vec<Method>,
    pub h_values: Vec<f64>,
    pub anomaly_types: Vec<AnomalyType>,
    pub seeds: Vec<u64>,
}

impl SweepPlan {
    /// Default grid around `base`, with seeds `0..seeds`.
    pub fn new(base: SyntheticSpec, scoring: RunConfig, seeds: usize) -> Self {
        Self {
            base,
            scoring,
            methods: DEFAULT_METHODS.to_vec(),
            h_values: DEFAULT_H_VALUES.to_vec(),
            anomaly_types: DEFAULT_TYPES.to_vec(),
            seeds: (0..seeds as u64).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMetrics {
    pub auc: f64,
    pub ap: f64,
    pub measured_homophily: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub anomaly_type: AnomalyType,
    pub h: f64,
    pub seed: u64,
    pub method: Method,
    pub result: Result<CellMetrics, String>,
}

/// AUC and AP of one method on one synthetic graph.
pub fn score_cell(sg: &Synthetic, cfg: &RunConfig) -> Result<CellMetrics, String> {
    let out = run(&sg.graph, &cfg.pipeline()).map_err(|e| e.to_string())?;
    let labels = sg.graph.labels().ok_or("synthetic graph has no labels")?;
    let scores = out.scores.evaluated_scores();
    let labels = out.scores.evaluated_labels(labels);
    Ok(CellMetrics {
        auc: auc(&scores, &labels).map_err(|e| e.to_string())?,
        ap: average_precision(&scores, &labels).map_err(|e| e.to_string())?,
        measured_homophily: sg.measured_homophily,
    })
}

/// Every cell, in (type, h, seed, method) order regardless of thread count.
pub fn run_sweep(plan: &SweepPlan) -> Vec<SweepRow> {
    let mut graphs = Vec::new();
    for &t in &plan.anomaly_types {
        for &h in &plan.h_values {
            for &seed in &plan.seeds {
                graphs.push((t, h, seed));
            }
        }
    }
    graphs
        .par_iter()
        .map(|&(anomaly_type, h, seed)| {
            let spec = SyntheticSpec {
                anomaly_type,
                target_homophily: h,
                seed,
                ..plan.base.clone()
            };
            let sg = spec.validate().and_then(|_| generate::<f64>(&spec)).map_err(|e| e.to_string());
            plan.methods
                .iter()
                .map(|&method| {
                    let cfg = RunConfig {
                        method,
                        ..plan.scoring.clone()
                    };
                    let result = sg.as_ref().map_err(Clone::clone).and_then(|g| score_cell(g, &cfg));
                    SweepRow {
                        anomaly_type,
                        h,
                        seed,
                        method,
                        result,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn type_name(t: AnomalyType) -> &'static str {
    match t {
        AnomalyType::TypeH => "type_h",
        AnomalyType::TypeD => "type_d",
        AnomalyType::Mixed => "mixed",
    }
}

/// Mean AUC of `method` on `t` at homophily `h`, if any seed succeeded.
pub fn cell_mean(rows: &[SweepRow], t: AnomalyType, method: Method, h: f64) -> Option<f64> {
    let v: Vec<f64> = rows
        .iter()
        .filter(|r| r.anomaly_type == t && r.method == method && r.h == h)
        .filter_map(|r| r.result.as_ref().ok().map(|m| m.auc))
        .collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn long_csv(rows: &[SweepRow]) -> String {
    let mut csv = String::from("anomaly_type,h,seed,method,auc,ap,measured_homophily,error\n");
    for r in rows {
        let _ = write!(csv, "{},{},{},{},", type_name(r.anomaly_type), r.h, r.seed, r.method);
        match &r.result {
            Ok(m) => {
                let _ = writeln!(
                    csv,
                    "{},{},{},",
                    round_sig(m.auc, REPORT_DIGITS),
                    round_sig(m.ap, REPORT_DIGITS),
                    round_sig(m.measured_homophily, REPORT_DIGITS)
                );
            }
            Err(e) => {
                let _ = writeln!(csv, ",,,\"{}\"", e.replace('"', "'"));
            }
        }
    }
    csv
}

/// One row per (type, method), one column per homophily value.
pub fn pivot_csv(plan: &SweepPlan, rows: &[SweepRow]) -> String {
    let mut csv = String::from("anomaly_type,method");
    for h in &plan.h_values {
        let _ = write!(csv, ",h={h}");
    }
    csv.push('\n');
    for &t in &plan.anomaly_types {
        for &m in &plan.methods {
            let _ = write!(csv, "{},{}", type_name(t), m);
            for &h in &plan.h_values {
                match cell_mean(rows, t, m, h) {
                    Some(a) => {
                        let _ = write!(csv, ",{}", round_sig(a, REPORT_DIGITS));
                    }
                    None => csv.push(','),
                }
            }
            csv.push('\n');
        }
    }
    csv
}

pub fn sweep_cmd(args: &SweepArgs) -> Result<(), CliError> {
    if args.synth.homophily.is_some() || args.synth.anomaly_type.is_some() {
        return Err(CliError::Usage(
            "sweep sets homophily and anomaly type per cell; use --h-values and --anomaly-types".into(),
        ));
    }
    if args.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let scoring = resolve(&Default::default(), &args.scoring)?;
    let dir = scoring
        .out_dir
        .clone()
        .ok_or_else(|| CliError::Usage("--out-dir is required".into()))?;
    let base = resolve_spec(None, &args.synth, None)?;
    let mut plan = SweepPlan::new(base, scoring.clone(), 0);
    plan.seeds = (0..args.seeds as u64).map(|i| scoring.seed.wrapping_add(i)).collect();
    if !args.methods.is_empty() {
        plan.methods = args.methods.clone();
    }
    if !args.h_values.is_empty() {
        if let Some(h) = args.h_values.iter().find(|h| !(0.0..=1.0).contains(*h)) {
            return Err(CliError::Usage(format!("homophily {h} is outside [0, 1]")));
        }
        plan.h_values = args.h_values.clone();
    }
    if !args.anomaly_types.is_empty() {
        plan.anomaly_types = args.anomaly_types.clone();
    }
    let rows = run_sweep(&plan);
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    for r in rows.iter().filter(|r| r.result.is_err()) {
        log::warn!(
            "{} h={} seed={} {}: {}",
            type_name(r.anomaly_type),
            r.h,
            r.seed,
            r.method,
            r.result.as_ref().err().map(String::as_str).unwrap_or_default()
        );
    }
    let pivot = pivot_csv(&plan, &rows);
    print!("{pivot}");
    let summary = serde_json::json!({
        "command": "sweep",
        "version": env!("CARGO_PKG_VERSION"),
        "scoring": plan.scoring.recorded(),
        "config_digest": plan.scoring.digest(),
        "base_spec": plan.base,
        "seeds": plan.seeds,
        "cells": rows.len(),
        "failed_cells": failed,
    });
    let mut staged = Staged::default();
    staged.add("sweep.csv".into(), long_csv(&rows));
    staged.add("sweep_pivot.csv".into(), pivot);
    staged.add("sweep.json".into(), report_json(summary));
    for p in staged.commit(&dir)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
