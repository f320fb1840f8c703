use std::collections::BTreeMap;
use std::path::PathBuf;

use adjscale::corpus::read_instances;
use adjscale::scales::Dataset;
use adjscale::selection::{
    build_selection_benchmark, evaluate_selection, read_jsonl, select_sentences, write_jsonl, AnnotatedInstance,
    FitScores, SelectionPair, SelectionStrategy, SentSet, VariationMetric,
};
use clap::{Args, ValueEnum};
use log::{info, warn};

use crate::util::{check_input, check_output, file_stem, open, usage, write_atomic, write_output, CmdResult, Context};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    /// The k candidates whose fit scores vary least across the scale.
    LowestStd,
    /// A seeded uniform sample of k candidates.
    Random,
    /// The first k candidates by id, for sets chosen elsewhere.
    External,
}

#[derive(Args)]
#[command(args_override_self = true)]
pub struct SelectArgs {
    /// Fit scores, `instance_id<TAB>adjective<TAB>score` (needed for lowest-std).
    #[arg(long)]
    fit: Option<PathBuf>,
    /// Candidate instances (JSON Lines).
    #[arg(long)]
    instances: PathBuf,
    /// Scale file; each instance is a candidate for every scale holding its target.
    #[arg(long)]
    scales: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, value_enum, default_value = "lowest-std")]
    strategy: StrategyArg,
    /// Seed for the random strategy; recorded in the output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sentence set (JSON) [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn select(a: SelectArgs) -> CmdResult {
    check_input("instances", &a.instances)?;
    check_input("scales", &a.scales)?;
    match (&a.fit, a.strategy) {
        (Some(f), _) => check_input("fit", f)?,
        (None, StrategyArg::LowestStd) => return Err(usage("--strategy lowest-std needs --fit")),
        (None, _) => {}
    }
    if a.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    if let Some(p) = &a.out {
        check_output("out", p)?;
    }
    let strategy = match a.strategy {
        StrategyArg::LowestStd => SelectionStrategy::LowestStd,
        StrategyArg::Random => SelectionStrategy::Random { seed: a.seed },
        StrategyArg::External => SelectionStrategy::External,
    };

    let dataset = Dataset::load(&a.scales).with_file(&a.scales)?;
    let instances = read_instances(open(&a.instances)?).with_file(&a.instances)?;
    let fit = match &a.fit {
        Some(p) => FitScores::read_tsv(file_stem(p), open(p)?).with_file(p)?,
        None => FitScores::new("none"),
    };
    let mut candidates: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for inst in &instances {
        if let Some(t) = inst.target() {
            for s in dataset.scales_with(&t) {
                candidates.entry(s.id().to_string()).or_default().push(inst.id.clone());
            }
        }
    }
    let mut set = SentSet {
        strategy,
        k: a.k,
        scales: BTreeMap::new(),
    };
    for scale in dataset.scales() {
        let pool = candidates.get(scale.id()).map(Vec::as_slice).unwrap_or_default();
        let entry = select_sentences(scale, pool, &fit, a.k, strategy)?;
        if entry.short {
            warn!("{}: only {} of {} sentences available", scale.id(), entry.ids.len(), a.k);
        }
        set.scales.insert(scale.id().to_string(), entry);
    }
    info!("selected sentences for {} scales with {strategy}", set.scales.len());
    write_output(a.out.as_deref(), |w| {
        serde_json::to_writer_pretty(&mut *w, &set)?;
        writeln!(w)?;
        Ok(())
    })
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Std,
    Var,
}

#[derive(Args)]
#[command(args_override_self = true)]
pub struct BenchArgs {
    /// Substitute-annotated instances (JSON Lines) to build pairs from.
    #[arg(long, conflicts_with = "pairs")]
    annotated: Option<PathBuf>,
    /// Previously built pairs (JSON Lines).
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Pairs kept when building, largest variation difference first.
    #[arg(long, default_value_t = 500)]
    pair_count: usize,
    /// Where to write built pairs.
    #[arg(long)]
    pairs_out: Option<PathBuf>,
    /// Fit-score files to evaluate (repeatable); the scorer is named after the file.
    #[arg(long = "fit")]
    fit: Vec<PathBuf>,
    /// Variation metrics to evaluate with [default: std and var].
    #[arg(long = "metric", value_enum)]
    metrics: Vec<MetricArg>,
    /// Accuracy report (CSV).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn selection_bench(a: BenchArgs) -> CmdResult {
    match (&a.annotated, &a.pairs) {
        (Some(p), None) => check_input("annotated", p)?,
        (None, Some(p)) => check_input("pairs", p)?,
        _ => return Err(usage("give exactly one of --annotated and --pairs")),
    }
    for f in &a.fit {
        check_input("fit", f)?;
    }
    if a.fit.is_empty() != a.out.is_none() {
        return Err(usage("--fit and --out go together"));
    }
    if a.pairs_out.is_none() && a.out.is_none() {
        return Err(usage("nothing to do: give --pairs-out or --fit with --out"));
    }
    if a.pairs_out.is_some() && a.annotated.is_none() {
        return Err(usage("--pairs-out needs --annotated"));
    }
    if let Some(p) = &a.pairs_out {
        check_output("pairs-out", p)?;
    }
    if let Some(p) = &a.out {
        check_output("out", p)?;
    }
    let metrics: Vec<VariationMetric> = if a.metrics.is_empty() {
        vec![VariationMetric::Std, VariationMetric::Var]
    } else {
        a.metrics
            .iter()
            .map(|m| match m {
                MetricArg::Std => VariationMetric::Std,
                MetricArg::Var => VariationMetric::Var,
            })
            .collect()
    };

    let pairs: Vec<SelectionPair> = match (&a.annotated, &a.pairs) {
        (Some(p), _) => {
            let instances: Vec<AnnotatedInstance> = read_jsonl("annotated instance", open(p)?).with_file(p)?;
            let pairs = build_selection_benchmark(&instances, a.pair_count);
            info!("built {} pairs from {} instances", pairs.len(), instances.len());
            pairs
        }
        (None, Some(p)) => read_jsonl("selection pair", open(p)?).with_file(p)?,
        _ => unreachable!(),
    };

    let mut rows = Vec::new();
    for f in &a.fit {
        let scorer = file_stem(f);
        let fit = FitScores::read_tsv(scorer.clone(), open(f)?).with_file(f)?;
        for &m in &metrics {
            let ev = evaluate_selection(&pairs, &fit, m);
            if ev.skipped > 0 {
                warn!("{scorer}/{m}: skipped {} pairs with missing or degenerate scores", ev.skipped);
            }
            let fmt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
            rows.push(format!(
                "{scorer},{m},{},{},{},{}",
                fmt(ev.accuracy()),
                fmt(ev.first_sentence_accuracy()),
                ev.evaluated,
                ev.skipped
            ));
        }
    }

    if let Some(p) = &a.pairs_out {
        write_atomic(p, |w| Ok(write_jsonl(w, &pairs)?))?;
    }
    if let Some(p) = &a.out {
        write_atomic(p, |w| {
            writeln!(w, "scorer,metric,accuracy,first_sentence_accuracy,evaluated,skipped")?;
            for r in &rows {
                writeln!(w, "{r}")?;
            }
            Ok(())
        })?;
    }
    Ok(())
}
