use std::fmt::Write as _;
use std::path::PathBuf;

use log::info;
use ndiv_core::graph::{load_edge_list, load_feature_matrix, load_labels};
use ndiv_core::metrics::{EvalReport, DEFAULT_K_VALUES};
use ndiv_core::synthgen::{generate, sbm_probabilities};
use ndiv_core::{run, AnomalyKind, Graph, PipelineOutput, Synthetic, SyntheticSpec};
use serde_json::{json, Value};

use crate::args::{GenerateArgs, InputArgs, ScoreArgs, ScoringArgs, SynthArgs};
use crate::config::{digest_of, load_json, RunConfig};
use crate::error::CliError;
use crate::output::{report_json, sig, Staged, CSV_DIGITS};

/// Defaults, then the `--config` file, then explicit flags.
pub fn resolve(input: &InputArgs, s: &ScoringArgs) -> Result<RunConfig, CliError> {
    let mut c: RunConfig = match &s.config {
        Some(p) => load_json(p)?,
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($($field:ident <- $value:expr),* $(,)?) => {
            $(if let Some(v) = $value.clone() { c.$field = v; })*
        };
    }
    set!(
        method <- s.method,
        rank <- s.rank,
        statistic <- s.statistic,
        entropy_bins <- s.entropy_bins,
        reference <- s.reference,
        fallback <- s.fallback,
        pairs <- s.pairs,
        seed <- s.seed,
    );
    if let Some(l) = s.lambda {
        c.lambda = l.0;
    }
    for (slot, value) in [
        (&mut c.edges, &input.edges),
        (&mut c.features, &input.features),
        (&mut c.labels, &input.labels),
        (&mut c.out_dir, &s.out_dir),
    ] {
        if value.is_some() {
            *slot = value.clone();
        }
    }
    c.validate()?;
    Ok(c)
}

pub fn resolve_spec(base: Option<&PathBuf>, a: &SynthArgs, seed: Option<u64>) -> Result<SyntheticSpec, CliError> {
    let mut spec: SyntheticSpec = match base {
        Some(p) => load_json(p)?,
        None => SyntheticSpec::default(),
    };
    macro_rules! set {
        ($($field:ident <- $value:expr),* $(,)?) => {
            $(if let Some(v) = $value { spec.$field = v; })*
        };
    }
    set!(
        n <- a.nodes,
        communities <- a.communities,
        target_homophily <- a.homophily,
        avg_degree <- a.avg_degree,
        feature_dim <- a.feature_dim,
        center_variance <- a.center_variance,
        noise_variance <- a.noise_variance,
        anomaly_type <- a.anomaly_type,
        anomalies_per_type <- a.anomalies_per_type,
        seed <- seed,
    );
    spec.validate()?;
    Ok(spec)
}

/// Graph plus the original id of every node.
pub struct LoadedGraph {
    pub graph: Graph,
    pub node_ids: Vec<u64>,
}

/// Reads the input files. Any failure here is reported as an input error.
pub fn load_graph(cfg: &RunConfig, need_labels: bool) -> Result<LoadedGraph, CliError> {
    let input = |e: ndiv_core::Error| CliError::Io(e.to_string());
    let edges = cfg.edges.as_ref().ok_or_else(|| CliError::Usage("--edges is required".into()))?;
    let features = cfg
        .features
        .as_ref()
        .ok_or_else(|| CliError::Usage("--features is required".into()))?;
    if need_labels && cfg.labels.is_none() {
        return Err(CliError::Usage("--labels is required".into()));
    }
    let el = load_edge_list(edges).map_err(input)?;
    let x = load_feature_matrix::<f64>(features).map_err(input)?;
    let n = x.rows();
    let (pairs, node_ids) = match el.max_original_id() {
        Some(m) if m as usize >= n => {
            if el.node_count() != n {
                return Err(CliError::Io(format!(
                    "{}: node id {m} has no feature row ({n} rows) and the {} distinct ids cannot be mapped onto them",
                    edges.display(),
                    el.node_count()
                )));
            }
            (el.edges.clone(), el.node_ids.clone())
        }
        _ => (el.original_edges(), (0..n as u64).collect()),
    };
    let labels = match &cfg.labels {
        Some(p) => Some(load_labels(p, n).map_err(input)?),
        None => None,
    };
    let graph = Graph::build(&pairs, x, labels).map_err(input)?;
    info!(
        "loaded {} nodes, {} edges ({} self-loops and {} duplicate lines dropped)",
        graph.node_count(),
        graph.edge_count(),
        el.self_loops_dropped,
        el.duplicates_dropped
    );
    Ok(LoadedGraph { graph, node_ids })
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    cfg.out_dir
        .clone()
        .ok_or_else(|| CliError::Usage("--out-dir is required".into()))
}

pub fn scores_csv(ids: &[u64], out: &PipelineOutput<f64>) -> String {
    let s = &out.scores;
    let mut csv = String::from(if s.predictions.is_some() {
        "node_id,score,prediction\n"
    } else {
        "node_id,score\n"
    });
    for i in 0..s.scores.len() {
        let _ = write!(csv, "{}", ids[i]);
        if s.evaluated_mask[i] {
            let _ = write!(csv, ",{}", sig(s.scores[i], CSV_DIGITS));
            if let Some(p) = &s.predictions {
                let _ = write!(csv, ",{}", p[i]);
            }
        } else {
            csv.push(',');
            if s.predictions.is_some() {
                csv.push(',');
            }
        }
        csv.push('\n');
    }
    csv
}

fn run_report(command: &str, cfg: &RunConfig, g: &Graph, out: &PipelineOutput<f64>) -> Value {
    let s = &out.scores;
    let profile = g.degree_profile();
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.recorded(),
        "config_digest": cfg.digest(),
        "graph": {
            "nodes": g.node_count(),
            "edges": g.edge_count(),
            "valid_nodes": profile.valid_count(),
            "isolated_nodes": profile.isolated_count,
            "degree_one_nodes": profile.degree_one_count,
        },
        "calibration": {
            "reference_value": s.reference_value,
            "mu_delta": s.mu_delta,
            "sigma_delta": s.sigma_delta,
            "tau": s.tau,
        },
        "evaluated_nodes": s.evaluated_mask.iter().filter(|&&m| m).count(),
        "flagged_nodes": s.predictions.as_ref().map(|p| p.iter().filter(|&&v| v == 1).count()),
    })
}

fn stage_extras(staged: &mut Staged, args: &ScoreArgs, lg: &LoadedGraph, out: &PipelineOutput<f64>) {
    if args.dump_projection {
        if let Some(pf) = &out.projection {
            let mut csv = String::new();
            for row in pf.projected.iter_rows() {
                let cells: Vec<String> = row.iter().map(|&v| sig(v, CSV_DIGITS)).collect();
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            staged.add("projection.csv".into(), csv);
        }
    }
    if args.dump_raw {
        let mut csv = String::from("node_id,raw\n");
        for (i, v) in out.raw.iter().enumerate() {
            let cell = v.map(|x| sig(x, CSV_DIGITS)).unwrap_or_default();
            let _ = writeln!(csv, "{},{cell}", lg.node_ids[i]);
        }
        staged.add("raw.csv".into(), csv);
    }
}

fn announce(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

pub fn score(args: &ScoreArgs) -> Result<(), CliError> {
    let cfg = resolve(&args.input, &args.scoring)?;
    let dir = out_dir(&cfg)?;
    let lg = load_graph(&cfg, false)?;
    let out = run(&lg.graph, &cfg.pipeline())?;
    let mut staged = Staged::default();
    staged.add("scores.csv".into(), scores_csv(&lg.node_ids, &out));
    staged.add("report.json".into(), report_json(run_report("score", &cfg, &lg.graph, &out)));
    stage_extras(&mut staged, args, &lg, &out);
    announce(&staged.commit(&dir)?);
    Ok(())
}

/// Metrics of a scored run on its evaluated nodes.
pub fn evaluation(cfg: &RunConfig, g: &Graph, out: &PipelineOutput<f64>) -> Result<EvalReport, CliError> {
    let labels = g
        .labels()
        .ok_or_else(|| CliError::Usage("--labels is required".into()))?;
    let scores = out.scores.evaluated_scores();
    let labels = out.scores.evaluated_labels(labels);
    Ok(EvalReport::compute(
        &scores,
        &labels,
        &DEFAULT_K_VALUES,
        cfg.method.name(),
        &cfg.digest(),
    )?)
}

pub fn evaluate(args: &ScoreArgs) -> Result<(), CliError> {
    let cfg = resolve(&args.input, &args.scoring)?;
    let dir = out_dir(&cfg)?;
    let lg = load_graph(&cfg, true)?;
    let out = run(&lg.graph, &cfg.pipeline())?;
    let mut report = evaluation(&cfg, &lg.graph, &out)?;
    let points = std::mem::take(&mut report.pr_points);
    let mut pr = String::from("recall,precision\n");
    for (r, p) in &points {
        let _ = writeln!(pr, "{},{}", sig(*r, CSV_DIGITS), sig(*p, CSV_DIGITS));
    }
    let mut json = run_report("evaluate", &cfg, &lg.graph, &out);
    json["metrics"] = serde_json::to_value(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!(
        "{}: AUC {:.4}  AP {:.4}  KS {:.4}  ({} nodes, {} positive)",
        report.method, report.auc, report.ap, report.ks_statistic, report.n_evaluated, report.n_positive
    );
    let mut staged = Staged::default();
    staged.add("scores.csv".into(), scores_csv(&lg.node_ids, &out));
    staged.add("eval.json".into(), report_json(json));
    staged.add("pr.csv".into(), pr);
    stage_extras(&mut staged, args, &lg, &out);
    announce(&staged.commit(&dir)?);
    Ok(())
}

/// Text files describing a synthetic graph.
pub fn synthetic_files(spec: &SyntheticSpec, sg: &Synthetic) -> Result<Staged, CliError> {
    let g = &sg.graph;
    let mut edges = String::new();
    for (u, v) in g.edges() {
        let _ = writeln!(edges, "{u} {v}");
    }
    let mut feats = String::new();
    for row in g.features().iter_rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        feats.push_str(&cells.join(","));
        feats.push('\n');
    }
    let column = |v: &mut dyn Iterator<Item = String>| v.map(|s| s + "\n").collect::<String>();
    let labels = column(&mut g.labels().unwrap_or(&[]).iter().map(|l| l.to_string()));
    let comms = column(&mut sg.communities.iter().map(|c| c.to_string()));
    let mut anomalies = String::from("node_id,type\n");
    for (v, kind) in &sg.anomalies {
        let tag = match kind {
            AnomalyKind::TypeH => "type_h",
            AnomalyKind::TypeD => "type_d",
        };
        let _ = writeln!(anomalies, "{v},{tag}");
    }
    let (p_in, p_out) = sbm_probabilities(spec)?;
    let sidecar = json!({
        "spec": spec,
        "spec_digest": digest_of(spec),
        "seed": spec.seed,
        "p_in": p_in,
        "p_out": p_out,
        "measured_homophily": sg.measured_homophily,
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "anomalies": sg.anomalies.len(),
    });
    let mut staged = Staged::default();
    staged.add("edges.txt".into(), edges);
    staged.add("features.csv".into(), feats);
    staged.add("labels.txt".into(), labels);
    staged.add("communities.txt".into(), comms);
    staged.add("anomalies.csv".into(), anomalies);
    staged.add("graph.json".into(), report_json(sidecar));
    Ok(staged)
}

pub fn generate_cmd(args: &GenerateArgs) -> Result<(), CliError> {
    let spec = resolve_spec(args.config.as_ref(), &args.synth, args.seed)?;
    let sg: Synthetic = generate(&spec)?;
    println!(
        "generated {} nodes, {} edges, homophily {:.4}, {} anomalies",
        sg.graph.node_count(),
        sg.graph.edge_count(),
        sg.measured_homophily,
        sg.anomalies.len()
    );
    announce(&synthetic_files(&spec, &sg)?.commit(&args.out_dir)?);
    Ok(())
}
