//! Wall-clock comparison of full pair enumeration and sampled budgets.

use std::fmt::Write as _;
use std::time::Instant;

use ndiv_core::diversity::pair_count;
use ndiv_core::metrics::{auc, average_precision};
use ndiv_core::{run, Graph, Method};

use crate::args::BenchArgs;
use crate::commands::{load_graph, resolve};
use crate::config::{Pairs, RunConfig};
use crate::error::CliError;
use crate::output::{round_sig, Staged, REPORT_DIGITS};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub pairs: Pairs,
    pub total_pairs: usize,
    /// Fastest of the repeats.
    pub seconds: f64,
    /// Full-enumeration time over this row's time.
    pub speedup: f64,
    pub auc: Option<f64>,
    pub ap: Option<f64>,
}

/// Pairs examined over all nodes under `pairs`.
pub fn total_pairs(g: &Graph, pairs: Pairs) -> usize {
    (0..g.node_count())
        .map(|i| {
            let c = pair_count(g.degree(i));
            pairs.budget().map_or(c, |k| k.min(c))
        })
        .sum()
}

pub fn run_bench(g: &Graph, cfg: &RunConfig, budgets: &[usize], repeats: usize) -> Result<Vec<BenchRow>, CliError> {
    if cfg.method != Method::NeighborDiv {
        return Err(CliError::Usage("bench only applies to --method neighbordiv".into()));
    }
    if repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    let mut configs = vec![Pairs::Full];
    for &k in budgets {
        if k == 0 {
            return Err(CliError::Usage("pair budgets must be at least 1".into()));
        }
        configs.push(Pairs::Budget(k));
    }
    let mut rows = Vec::with_capacity(configs.len());
    for pairs in configs {
        let c = RunConfig { pairs, ..cfg.clone() };
        let pipeline = c.pipeline();
        let mut best = f64::INFINITY;
        let mut last = None;
        for _ in 0..repeats {
            let t = Instant::now();
            let out = run(g, &pipeline)?;
            best = best.min(t.elapsed().as_secs_f64());
            last = Some(out);
        }
        let (mut a, mut p) = (None, None);
        if let (Some(labels), Some(out)) = (g.labels(), &last) {
            let s = out.scores.evaluated_scores();
            let l = out.scores.evaluated_labels(labels);
            a = auc(&s, &l).ok();
            p = average_precision(&s, &l).ok();
        }
        rows.push(BenchRow {
            pairs,
            total_pairs: total_pairs(g, pairs),
            seconds: best,
            speedup: 0.0,
            auc: a,
            ap: p,
        });
    }
    let full = rows[0].seconds;
    for r in &mut rows {
        r.speedup = if r.seconds > 0.0 { full / r.seconds } else { f64::INFINITY };
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut csv = String::from("pairs,total_pairs,seconds,speedup,auc,ap\n");
    let opt = |v: Option<f64>| v.map(|x| round_sig(x, REPORT_DIGITS).to_string()).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.pairs,
            r.total_pairs,
            round_sig(r.seconds, REPORT_DIGITS),
            round_sig(r.speedup, REPORT_DIGITS),
            opt(r.auc),
            opt(r.ap)
        );
    }
    csv
}

pub fn bench_cmd(args: &BenchArgs) -> Result<(), CliError> {
    let cfg = resolve(&args.input, &args.scoring)?;
    let dir = cfg
        .out_dir
        .clone()
        .ok_or_else(|| CliError::Usage("--out-dir is required".into()))?;
    let lg = load_graph(&cfg, false)?;
    let rows = run_bench(&lg.graph, &cfg, &args.budgets, args.repeats)?;
    let csv = bench_csv(&rows);
    print!("{csv}");
    let mut staged = Staged::default();
    staged.add("bench.csv".into(), csv);
    for p in staged.commit(&dir)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
