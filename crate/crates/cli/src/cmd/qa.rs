use std::collections::HashMap;
use std::path::PathBuf;

use adjscale::embed::{load_static_filtered, ContextualStore, Measure};
use adjscale::eval::qa::{qa_evaluate, qa_predict, read_qa_tsv, QaLabel, DEFAULT_QA_TIE_THRESHOLD};
use adjscale::eval::{write_report_csv, ReportRow};
use adjscale::ranking::VectorSource;
use adjscale::Error;
use anyhow::anyhow;
use clap::Args;
use log::{info, warn};

use crate::util::{check_input, check_output, file_stem, open, read_dvecs, usage, write_atomic, write_output, CmdResult, Context};

#[derive(Args)]
#[command(args_override_self = true)]
pub struct QaArgs {
    /// Items, `id<TAB>adj_q<TAB>adj_a<TAB>negated<TAB>gold`.
    #[arg(long)]
    qa: PathBuf,
    /// Intensity vectors (from build-dvec or rank --dvec-out).
    #[arg(long)]
    dvec: PathBuf,
    /// word2vec text file.
    #[arg(long = "static", value_name = "FILE", conflicts_with = "contextual")]
    static_: Option<PathBuf>,
    /// Contextual vectors keyed by item id.
    #[arg(long, value_name = "FILE")]
    contextual: Option<PathBuf>,
    /// Layer to answer at (contextual).
    #[arg(long)]
    layer: Option<i64>,
    #[arg(long, default_value = "cosine")]
    measure: Measure,
    /// Similarity differences below this count as equal intensity.
    #[arg(long, default_value_t = DEFAULT_QA_TIE_THRESHOLD)]
    tie_threshold: f64,
    /// Leave out items lacking vectors instead of failing.
    #[arg(long)]
    skip_unanswerable: bool,
    /// Method label in the report [default: dvec file stem].
    #[arg(long)]
    label: Option<String>,
    /// Tag for the sent_set column [default: vector file stem].
    #[arg(long)]
    sent_set: Option<String>,
    /// Scores (CSV) [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-item predictions, `id<TAB>prediction<TAB>gold`.
    #[arg(long)]
    predictions_out: Option<PathBuf>,
}

pub fn qa(a: QaArgs) -> CmdResult {
    check_input("qa", &a.qa)?;
    check_input("dvec", &a.dvec)?;
    let vectors = match (&a.static_, &a.contextual) {
        (Some(p), None) => {
            check_input("static", p)?;
            if a.layer.is_some() {
                return Err(usage("--layer only applies to --contextual"));
            }
            p
        }
        (None, Some(p)) => {
            check_input("contextual", p)?;
            if a.layer.is_none() {
                return Err(usage("--contextual needs --layer"));
            }
            p
        }
        _ => return Err(usage("give --static or --contextual")),
    };
    if !(a.tie_threshold.is_finite() && a.tie_threshold >= 0.0) {
        return Err(usage("--tie-threshold must be a non-negative number"));
    }
    if let Some(p) = &a.out {
        check_output("out", p)?;
    }
    if let Some(p) = &a.predictions_out {
        check_output("predictions-out", p)?;
    }

    let items = read_qa_tsv(open(&a.qa)?).with_file(&a.qa)?;
    let dvecs = read_dvecs(&a.dvec)?;
    let dvec = dvecs.iter().find(|d| d.layer == a.layer).ok_or_else(|| match a.layer {
        Some(l) => usage(format!("{} has no intensity vector for layer {l}", a.dvec.display())),
        None => usage(format!("{} has no static intensity vector", a.dvec.display())),
    })?;

    let emb;
    let store;
    let source = if let Some(p) = &a.static_ {
        let vocab = items
            .iter()
            .flat_map(|it| [it.adj_q.as_str().to_string(), it.adj_a.as_str().to_string()])
            .collect();
        emb = load_static_filtered(p, Some(&vocab)).with_file(p)?;
        VectorSource::Static(&emb)
    } else {
        let p = a.contextual.as_ref().expect("checked above");
        store = ContextualStore::load(p).with_file(p)?;
        if let Some(l) = a.layer {
            if !store.manifest().layers.contains(&l) {
                return Err(usage(format!("layer {l} is not in {}", p.display())));
            }
        }
        VectorSource::Contextual(&store)
    };

    let mut predictions: HashMap<String, QaLabel> = HashMap::new();
    let mut answered = Vec::new();
    let mut skipped = 0usize;
    for item in &items {
        match qa_predict(item, dvec, source, a.layer, a.measure, a.tie_threshold) {
            Ok(p) => {
                predictions.insert(item.id.clone(), p);
                answered.push(item.clone());
            }
            Err(e @ Error::Missing { .. }) if a.skip_unanswerable => {
                warn!("skipping {}: {e}", item.id);
                skipped += 1;
            }
            Err(e) => return Err(anyhow!("{}: {e}", item.id).into()),
        }
    }
    let scores = qa_evaluate(&answered, &predictions)?;
    info!(
        "accuracy {:.3}, macro F1 {:.3} over {} items ({skipped} skipped)",
        scores.accuracy, scores.f1, scores.n
    );

    let method = a.label.clone().unwrap_or_else(|| file_stem(&a.dvec));
    let sent_set = a.sent_set.clone().unwrap_or_else(|| file_stem(vectors));
    let rows: Vec<ReportRow> = [
        ("acc", scores.accuracy),
        ("precision", scores.precision),
        ("recall", scores.recall),
        ("f1", scores.f1),
    ]
    .into_iter()
    .map(|(metric, value)| ReportRow {
        method: method.clone(),
        sent_set: sent_set.clone(),
        layer: a.layer,
        metric: metric.to_string(),
        value,
        n_scales: scores.n,
        n_excluded: skipped,
    })
    .collect();

    write_output(a.out.as_deref(), |w| Ok(write_report_csv(w, &rows)?))?;
    if let Some(p) = &a.predictions_out {
        write_atomic(p, |w| {
            for item in &answered {
                writeln!(w, "{}\t{}\t{}", item.id, predictions[&item.id], item.gold)?;
            }
            Ok(())
        })?;
    }
    Ok(())
}
