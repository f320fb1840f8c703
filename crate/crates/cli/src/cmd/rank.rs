use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use adjscale::embed::{load_static_filtered, ContextualStore, Measure, StaticEmbeddings};
use adjscale::eval::{best_layers, evaluate_scale, weighted_dataset_eval, write_report_csv, ReportRow, ScaleResult};
use adjscale::ranking::{
    apply_tie_adjustment, bertsim_rank, build_dvec as build_intensity, dataset_pairs, dvec_rank, freq_rank, pairs_from,
    sense_rank, CountTable, DvecPair, IntensityVector, RankOutcome, Ranking, SentenceAggregation, VectorSource,
    DIFFVEC_1_NEGATIVE, DIFFVEC_1_POSITIVE, DIFFVEC_5,
};
use adjscale::scales::{lexical_split, Dataset, Scale};
use adjscale::selection::{read_jsonl, write_jsonl};
use adjscale::Error;
use anyhow::anyhow;
use clap::{Args, ValueEnum};
use log::{info, warn};

use crate::util::{
    check_input, check_output, file_stem, open, read_dvecs, usage, write_atomic, CmdResult, Context, LayerSpec,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Similarity to the scale's most extreme adjective.
    Bertsim,
    /// Intensity direction from the anchors of a separate dataset.
    #[value(name = "diffvec-dataset")]
    DiffvecDataset,
    /// Direction from good:awesome.
    #[value(name = "diffvec-1+")]
    Diffvec1Pos,
    /// Direction from bad:horrible.
    #[value(name = "diffvec-1-", alias = "diffvec-1−")]
    Diffvec1Neg,
    /// Direction from five hand-picked pairs.
    #[value(name = "diffvec-5")]
    Diffvec5,
    /// Rarer is more intense.
    Freq,
    /// Fewer senses is more intense.
    Sense,
}

impl MethodArg {
    fn is_diffvec(self) -> bool {
        matches!(
            self,
            MethodArg::DiffvecDataset | MethodArg::Diffvec1Pos | MethodArg::Diffvec1Neg | MethodArg::Diffvec5
        )
    }

    fn name(self) -> &'static str {
        match self {
            MethodArg::Bertsim => "bertsim",
            MethodArg::DiffvecDataset => "diffvec-dataset",
            MethodArg::Diffvec1Pos => "diffvec-1+",
            MethodArg::Diffvec1Neg => "diffvec-1-",
            MethodArg::Diffvec5 => "diffvec-5",
            MethodArg::Freq => "freq",
            MethodArg::Sense => "sense",
        }
    }
}

/// Where vectors come from. Exactly one source is used per run.
#[derive(Args)]
pub struct VectorArgs {
    /// word2vec text file.
    #[arg(long = "static", value_name = "FILE", conflicts_with = "contextual")]
    static_: Option<PathBuf>,
    /// Contextual vectors (JSON Lines with a sidecar manifest).
    #[arg(long, value_name = "FILE")]
    contextual: Option<PathBuf>,
    /// Layers: `all` (every transformer layer), a list `1,4`, or a range `9-12`.
    #[arg(long)]
    layers: Option<String>,
}

/// How the intensity direction is built.
#[derive(Args)]
pub struct AnchorArgs {
    /// Dataset whose scale anchors build the direction (diffvec-dataset).
    #[arg(long)]
    source: Option<PathBuf>,
    /// Anchor pair `mild:extreme`, optionally `@scale_id` (repeatable; replaces the preset pairs).
    #[arg(long = "pair", value_name = "PAIR")]
    pairs: Vec<DvecPair>,
    /// Sentences averaged per anchor pair [default: all].
    #[arg(long)]
    num_sentences: Option<usize>,
    /// Contextual vectors holding the anchor sentences [default: --contextual].
    #[arg(long, value_name = "FILE")]
    anchor_contextual: Option<PathBuf>,
}

struct Sources {
    emb: Option<StaticEmbeddings>,
    store: Option<ContextualStore>,
    anchor_store: Option<ContextualStore>,
    layers: Vec<Option<i64>>,
}

impl Sources {
    fn eval(&self) -> Option<VectorSource<'_>> {
        match (&self.emb, &self.store) {
            (Some(e), _) => Some(VectorSource::Static(e)),
            (None, Some(s)) => Some(VectorSource::Contextual(s)),
            _ => None,
        }
    }

    fn anchors(&self) -> Option<VectorSource<'_>> {
        match (&self.emb, &self.anchor_store, &self.store) {
            (Some(e), _, _) => Some(VectorSource::Static(e)),
            (None, Some(s), _) | (None, None, Some(s)) => Some(VectorSource::Contextual(s)),
            _ => None,
        }
    }
}

fn check_vector_args(v: &VectorArgs, anchors: Option<&AnchorArgs>) -> CmdResult {
    if let Some(p) = &v.static_ {
        check_input("static", p)?;
        if v.layers.is_some() {
            return Err(usage("--layers only applies to --contextual"));
        }
    }
    if let Some(p) = &v.contextual {
        check_input("contextual", p)?;
    }
    if let Some(l) = &v.layers {
        LayerSpec::parse(l).map_err(usage)?;
    }
    if let Some(a) = anchors {
        if let Some(p) = &a.anchor_contextual {
            if v.contextual.is_none() {
                return Err(usage("--anchor-contextual needs --contextual"));
            }
            check_input("anchor-contextual", p)?;
        }
        if a.num_sentences == Some(0) {
            return Err(usage("--num-sentences must be at least 1"));
        }
        if a.num_sentences.is_some() && v.static_.is_some() {
            return Err(usage("--num-sentences only applies to --contextual"));
        }
        if let Some(p) = &a.source {
            check_input("source", p)?;
        }
    }
    Ok(())
}

fn check_anchor_method(method: MethodArg, a: &AnchorArgs, eval: Option<&Path>) -> CmdResult {
    match method {
        MethodArg::DiffvecDataset => {
            let src = a.source.as_ref().ok_or_else(|| usage("diffvec-dataset needs --source"))?;
            if !a.pairs.is_empty() {
                return Err(usage("--pair cannot be combined with diffvec-dataset"));
            }
            if let Some(e) = eval {
                if same_file(src, e) {
                    return Err(usage("--source must be a different dataset from --scales"));
                }
            }
        }
        m if m.is_diffvec() => {
            if a.source.is_some() {
                return Err(usage(format!("--source only applies to diffvec-dataset, not {}", m.name())));
            }
        }
        m => {
            if a.source.is_some() || !a.pairs.is_empty() || a.num_sentences.is_some() || a.anchor_contextual.is_some() {
                return Err(usage(format!("anchor flags do not apply to {}", m.name())));
            }
        }
    }
    Ok(())
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

/// Loads vectors, keeping only `vocab` from static files, and resolves the
/// requested layers.
fn load_sources(v: &VectorArgs, a: Option<&AnchorArgs>, vocab: &HashSet<String>) -> CmdResult<Sources> {
    let emb = match &v.static_ {
        Some(p) => {
            let e = load_static_filtered(p, Some(vocab)).with_file(p)?;
            info!("{}: {} of {} needed words found", p.display(), e.len(), vocab.len());
            Some(e)
        }
        None => None,
    };
    let store = match &v.contextual {
        Some(p) => Some(ContextualStore::load(p).with_file(p)?),
        None => None,
    };
    let anchor_store = match a.and_then(|a| a.anchor_contextual.as_ref()) {
        Some(p) if !v.contextual.as_ref().is_some_and(|c| same_file(c, p)) => Some(ContextualStore::load(p).with_file(p)?),
        _ => None,
    };
    let layers = match &store {
        None => vec![None],
        Some(s) => {
            let spec = LayerSpec::parse(v.layers.as_deref().unwrap_or("all")).map_err(usage)?;
            let m = s.manifest();
            let mut layers = spec.resolve(&m.layers, &m.block_layers()).map_err(usage)?;
            if let Some(anchor) = &anchor_store {
                layers.retain(|l| anchor.manifest().layers.contains(l));
                if layers.is_empty() {
                    return Err(usage("the anchor vectors share none of the requested layers"));
                }
            }
            layers.into_iter().map(Some).collect()
        }
    };
    Ok(Sources {
        emb,
        store,
        anchor_store,
        layers,
    })
}

/// Anchor pairs for a diffvec method and the label used in reports.
fn anchor_pairs(
    method: MethodArg,
    a: &AnchorArgs,
    source: Option<&Dataset>,
    eval: Option<&Dataset>,
) -> CmdResult<(Vec<DvecPair>, String)> {
    if method == MethodArg::DiffvecDataset {
        let src = source.ok_or_else(|| usage("diffvec-dataset needs --source"))?;
        let split = match eval {
            Some(e) => {
                let s = lexical_split(src, e);
                info!(
                    "{}: {} of {} scales left after removing anchors that occur in {}",
                    src.name,
                    s.len(),
                    src.len(),
                    e.name
                );
                s
            }
            None => src.clone(),
        };
        return Ok((dataset_pairs(&split), format!("diffvec-{}", src.name)));
    }
    let pairs = if !a.pairs.is_empty() {
        a.pairs.clone()
    } else {
        match method {
            MethodArg::Diffvec1Pos => pairs_from(&DIFFVEC_1_POSITIVE),
            MethodArg::Diffvec1Neg => pairs_from(&DIFFVEC_1_NEGATIVE),
            MethodArg::Diffvec5 => pairs_from(&DIFFVEC_5),
            _ => unreachable!("not a diffvec method"),
        }
    };
    Ok((pairs, method.name().to_string()))
}

/// Keeps the pairs whose vectors exist for every layer. Contextual pairs
/// without a scale id are placed on the first scale (in `datasets` order)
/// whose complete grid holds both words.
fn usable_pairs(
    pairs: Vec<DvecPair>,
    src: VectorSource<'_>,
    layers: &[Option<i64>],
    num_sentences: Option<usize>,
    datasets: &[&Dataset],
) -> CmdResult<Vec<DvecPair>> {
    let mut out = Vec::new();
    for p in pairs {
        match src {
            VectorSource::Static(emb) => {
                if emb.contains(p.mild.as_str()) && emb.contains(p.ext.as_str()) {
                    out.push(p);
                } else {
                    warn!("skipping anchor {p}: no static vector");
                }
            }
            VectorSource::Contextual(store) => {
                let covers = |id: &str| {
                    let sents = store.sentences(id);
                    !store.is_partial(id)
                        && !sents.is_empty()
                        && num_sentences.is_none_or(|n| sents.len() >= n)
                        && layers.iter().flatten().all(|&l| {
                            sents
                                .iter()
                                .all(|&s| store.get(id, s, &p.mild, l).is_some() && store.get(id, s, &p.ext, l).is_some())
                        })
                };
                let placed = match &p.scale_id {
                    Some(id) => covers(id).then(|| p.clone()),
                    None => datasets
                        .iter()
                        .flat_map(|d| d.scales())
                        .find(|s| s.contains(&p.mild) && s.contains(&p.ext) && covers(s.id()))
                        .map(|s| p.clone().on_scale(s.id())),
                };
                match placed {
                    Some(q) => out.push(q),
                    None => warn!("skipping anchor {p}: no complete contextual sentences"),
                }
            }
        }
    }
    if out.is_empty() {
        return Err(anyhow!("no usable anchor pairs").into());
    }
    Ok(out)
}

fn dvecs_for_layers(
    pairs: &[DvecPair],
    src: VectorSource<'_>,
    layers: &[Option<i64>],
    num_sentences: Option<usize>,
) -> CmdResult<Vec<IntensityVector>> {
    let mut out = Vec::new();
    for &l in layers {
        out.push(build_intensity(pairs, src, l, num_sentences)?);
    }
    Ok(out)
}

fn vocab_of<'a>(datasets: impl IntoIterator<Item = &'a Dataset>, pairs: &[DvecPair]) -> HashSet<String> {
    let mut v: HashSet<String> = datasets
        .into_iter()
        .flat_map(|d| d.vocabulary().into_iter().map(|a| a.as_str().to_string()))
        .collect();
    for p in pairs {
        v.insert(p.mild.as_str().to_string());
        v.insert(p.ext.as_str().to_string());
    }
    v
}

fn load_dataset(p: &Path) -> CmdResult<Dataset> {
    Dataset::load(p).with_file(p)
}

#[derive(Args)]
#[command(args_override_self = true)]
pub struct BuildDvecArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Evaluation dataset; anchors occurring in it are left out (diffvec-dataset).
    #[arg(long)]
    scales: Option<PathBuf>,
    #[command(flatten)]
    anchors: AnchorArgs,
    #[command(flatten)]
    vectors: VectorArgs,
    /// Intensity vectors, one JSON object per layer.
    #[arg(long)]
    out: PathBuf,
}

pub fn build_dvec(a: BuildDvecArgs) -> CmdResult {
    if !a.method.is_diffvec() {
        return Err(usage(format!("{} does not build an intensity vector", a.method.name())));
    }
    if let Some(p) = &a.scales {
        check_input("scales", p)?;
    }
    check_vector_args(&a.vectors, Some(&a.anchors))?;
    if a.vectors.static_.is_none() && a.vectors.contextual.is_none() {
        return Err(usage("give --static or --contextual"));
    }
    check_anchor_method(a.method, &a.anchors, a.scales.as_deref())?;
    check_output("out", &a.out)?;

    let eval = a.scales.as_deref().map(load_dataset).transpose()?;
    let source = a.anchors.source.as_deref().map(load_dataset).transpose()?;
    let (pairs, label) = anchor_pairs(a.method, &a.anchors, source.as_ref(), eval.as_ref())?;
    let vocab = vocab_of(source.iter().chain(eval.iter()), &pairs);
    let src = load_sources(&a.vectors, Some(&a.anchors), &vocab)?;
    let datasets: Vec<&Dataset> = source.iter().chain(eval.iter()).collect();
    let anchor_src = src.anchors().expect("checked above");
    let pairs = usable_pairs(pairs, anchor_src, &src.layers, a.anchors.num_sentences, &datasets)?;
    let dvecs = dvecs_for_layers(&pairs, anchor_src, &src.layers, a.anchors.num_sentences)?;
    info!("{label}: built {} intensity vectors from {} pairs", dvecs.len(), pairs.len());
    write_atomic(&a.out, |w| Ok(write_jsonl(w, &dvecs)?))
}

#[derive(Args)]
#[command(args_override_self = true)]
pub struct RankArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Gold scales to rank and evaluate.
    #[arg(long)]
    scales: PathBuf,
    #[command(flatten)]
    anchors: AnchorArgs,
    /// Precomputed intensity vectors (from build-dvec) instead of anchors.
    #[arg(long, conflicts_with_all = ["source", "pairs", "num_sentences", "anchor_contextual"])]
    dvec: Option<PathBuf>,
    #[command(flatten)]
    vectors: VectorArgs,
    /// Count table, `adjective<TAB>count` (freq and sense).
    #[arg(long)]
    counts: Option<PathBuf>,
    #[arg(long, default_value = "cosine")]
    measure: Measure,
    /// How sentence vectors are combined (contextual).
    #[arg(long, default_value = "mean-similarity")]
    aggregation: SentenceAggregation,
    /// Adjacent scores closer than this are tied; 0 ties only equal scores.
    #[arg(long, default_value_t = 0.0)]
    tie_threshold: f64,
    /// Tag for the sent_set column [default: vector or count file stem].
    #[arg(long)]
    sent_set: Option<String>,
    /// Method label in the report [default: method name, or diffvec-<source>].
    #[arg(long)]
    label: Option<String>,
    /// Evaluation report (CSV).
    #[arg(long)]
    out: PathBuf,
    /// Every ranking produced (JSON Lines).
    #[arg(long)]
    rankings_out: Option<PathBuf>,
    /// Intensity vectors used, one per layer (JSON Lines).
    #[arg(long)]
    dvec_out: Option<PathBuf>,
}

fn check_rank_args(a: &RankArgs) -> CmdResult {
    check_input("scales", &a.scales)?;
    check_vector_args(&a.vectors, Some(&a.anchors))?;
    let has_vectors = a.vectors.static_.is_some() || a.vectors.contextual.is_some();
    match a.method {
        MethodArg::Bertsim => {
            if a.vectors.contextual.is_none() {
                return Err(usage("bertsim needs --contextual"));
            }
            if a.measure != Measure::Cosine {
                return Err(usage("bertsim always uses cosine"));
            }
        }
        MethodArg::Freq | MethodArg::Sense => {
            let c = a.counts.as_ref().ok_or_else(|| usage(format!("{} needs --counts", a.method.name())))?;
            check_input("counts", c)?;
            if has_vectors {
                return Err(usage(format!("{} does not use vectors", a.method.name())));
            }
        }
        _ => {
            if !has_vectors {
                return Err(usage("give --static or --contextual"));
            }
        }
    }
    if a.counts.is_some() && !matches!(a.method, MethodArg::Freq | MethodArg::Sense) {
        return Err(usage("--counts only applies to freq and sense"));
    }
    if let Some(d) = &a.dvec {
        if !a.method.is_diffvec() {
            return Err(usage("--dvec only applies to diffvec methods"));
        }
        check_input("dvec", d)?;
    } else {
        check_anchor_method(a.method, &a.anchors, Some(&a.scales))?;
    }
    if a.dvec_out.is_some() && !a.method.is_diffvec() {
        return Err(usage("--dvec-out only applies to diffvec methods"));
    }
    if !(a.tie_threshold.is_finite() && a.tie_threshold >= 0.0) {
        return Err(usage("--tie-threshold must be a non-negative number"));
    }
    check_output("out", &a.out)?;
    for (flag, p) in [("rankings-out", &a.rankings_out), ("dvec-out", &a.dvec_out)] {
        if let Some(p) = p {
            check_output(flag, p)?;
        }
    }
    Ok(())
}

/// Errors that mean a scale lacks data rather than that the run is broken.
fn is_coverage_error(e: &Error) -> bool {
    matches!(e, Error::Missing { .. } | Error::PartialGrid(_))
}

pub fn rank(a: RankArgs) -> CmdResult {
    check_rank_args(&a)?;

    let eval = load_dataset(&a.scales)?;
    let source = a.anchors.source.as_deref().map(load_dataset).transpose()?;
    let counts = match &a.counts {
        Some(p) => Some(CountTable::read_tsv(file_stem(p), open(p)?).with_file(p)?),
        None => None,
    };
    let given_dvecs = a.dvec.as_deref().map(read_dvecs).transpose()?;
    let (pairs, default_label) = if a.method.is_diffvec() && given_dvecs.is_none() {
        anchor_pairs(a.method, &a.anchors, source.as_ref(), Some(&eval))?
    } else {
        (Vec::new(), a.method.name().to_string())
    };
    let vocab = vocab_of(source.iter().chain([&eval]), &pairs);
    let src = load_sources(&a.vectors, Some(&a.anchors), &vocab)?;
    let label = a.label.clone().unwrap_or(default_label);
    let sent_set = a.sent_set.clone().unwrap_or_else(|| {
        a.vectors
            .contextual
            .as_ref()
            .or(a.vectors.static_.as_ref())
            .or(a.counts.as_ref())
            .map(|p| file_stem(p))
            .unwrap_or_default()
    });

    let dvecs: Vec<IntensityVector> = match (&given_dvecs, a.method.is_diffvec()) {
        (Some(given), _) => src
            .layers
            .iter()
            .map(|l| {
                given
                    .iter()
                    .find(|d| d.layer == *l)
                    .cloned()
                    .ok_or_else(|| usage(format!("--dvec has no vector for layer {l:?}")))
            })
            .collect::<CmdResult<_>>()?,
        (None, true) => {
            let datasets: Vec<&Dataset> = source.iter().chain([&eval]).collect();
            let anchor_src = src.anchors().expect("checked above");
            let pairs = usable_pairs(pairs, anchor_src, &src.layers, a.anchors.num_sentences, &datasets)?;
            info!("{label}: {} anchor pairs", pairs.len());
            dvecs_for_layers(&pairs, anchor_src, &src.layers, a.anchors.num_sentences)?
        }
        (None, false) => Vec::new(),
    };

    let mut rows: Vec<ReportRow> = Vec::new();
    let mut all_rankings: Vec<Ranking> = Vec::new();
    for (li, &layer) in src.layers.iter().enumerate() {
        let mut results: Vec<ScaleResult> = Vec::new();
        let mut excluded: Vec<String> = Vec::new();
        for scale in eval.scales() {
            let outcome = rank_one(&a, &src, scale, layer, dvecs.get(li), counts.as_ref());
            let ranking = match outcome {
                Ok(RankOutcome::Ranked(r)) => r,
                Ok(RankOutcome::Excluded { scale_id, reason }) => {
                    info!("excluding {scale_id}: {reason}");
                    excluded.push(scale_id);
                    continue;
                }
                Err(e) if is_coverage_error(&e) => {
                    info!("excluding {}: {e}", scale.id());
                    excluded.push(scale.id().to_string());
                    continue;
                }
                Err(e) => return Err(anyhow!("{}: {e}", scale.id()).into()),
            };
            let mut ranking = apply_tie_adjustment(&ranking, a.tie_threshold);
            ranking.method = label.clone();
            results.push(evaluate_scale(&ranking, scale)?);
            all_rankings.push(ranking);
        }
        let summary = weighted_dataset_eval(&results, excluded.len()).map_err(|e| {
            anyhow!("layer {layer:?}: {e} ({} scales excluded)", excluded.len())
        })?;
        info!(
            "{label} layer {}: p_acc {:.3} over {} scales, {} excluded",
            layer.map_or("-".to_string(), |l| l.to_string()),
            summary.p_acc,
            summary.n_scales,
            summary.n_excluded
        );
        rows.extend(summary.rows(&label, &sent_set, layer));
    }
    if src.store.is_some() {
        let best = best_layers(&rows);
        rows.extend(best);
    }

    write_atomic(&a.out, |w| Ok(write_report_csv(w, &rows)?))?;
    if let Some(p) = &a.rankings_out {
        write_atomic(p, |w| Ok(write_jsonl(w, &all_rankings)?))?;
    }
    if let Some(p) = &a.dvec_out {
        write_atomic(p, |w| Ok(write_jsonl(w, &dvecs)?))?;
    }
    Ok(())
}

fn rank_one(
    a: &RankArgs,
    src: &Sources,
    scale: &Scale,
    layer: Option<i64>,
    dvec: Option<&IntensityVector>,
    counts: Option<&CountTable>,
) -> Result<RankOutcome, Error> {
    let ranked = |r: Ranking| Ok(RankOutcome::Ranked(r));
    match a.method {
        MethodArg::Bertsim => {
            let store = src.store.as_ref().expect("checked");
            let layer = layer.expect("contextual runs have layers");
            if !store.has_scale(scale.id()) {
                return Err(Error::missing("scale in contextual store", scale.id()));
            }
            bertsim_rank(store, scale, layer, a.aggregation)
        }
        MethodArg::Freq => ranked(freq_rank(scale, counts.expect("checked"))?),
        MethodArg::Sense => ranked(sense_rank(scale, counts.expect("checked"))?),
        _ => {
            let dvec = dvec.expect("diffvec runs have a vector per layer");
            ranked(dvec_rank(
                scale,
                dvec,
                src.eval().expect("checked"),
                layer,
                a.measure,
                a.aggregation,
            )?)
        }
    }
}

#[derive(Args)]
#[command(args_override_self = true)]
pub struct EvaluateArgs {
    /// Rankings (JSON Lines), as written by `rank --rankings-out`.
    #[arg(long)]
    rankings: PathBuf,
    /// Gold scales.
    #[arg(long)]
    scales: PathBuf,
    /// Re-derive ties with this threshold before scoring.
    #[arg(long)]
    tie_threshold: Option<f64>,
    /// Tag for the sent_set column [default: rankings file stem].
    #[arg(long)]
    sent_set: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

pub fn evaluate(a: EvaluateArgs) -> CmdResult {
    check_input("rankings", &a.rankings)?;
    check_input("scales", &a.scales)?;
    if let Some(t) = a.tie_threshold {
        if !(t.is_finite() && t >= 0.0) {
            return Err(usage("--tie-threshold must be a non-negative number"));
        }
    }
    check_output("out", &a.out)?;

    let gold = load_dataset(&a.scales)?;
    let rankings: Vec<Ranking> = read_jsonl("ranking", open(&a.rankings)?).with_file(&a.rankings)?;
    let sent_set = a.sent_set.clone().unwrap_or_else(|| file_stem(&a.rankings));
    let mut groups: BTreeMap<(String, Option<i64>), Vec<Ranking>> = BTreeMap::new();
    for r in rankings {
        groups.entry((r.method.clone(), r.layer)).or_default().push(r);
    }
    let mut rows = Vec::new();
    for ((method, layer), rs) in &groups {
        let mut seen = HashSet::new();
        let mut results = Vec::new();
        for r in rs {
            let scale = gold
                .get(&r.scale_id)
                .ok_or_else(|| anyhow!("ranking for unknown scale {}", r.scale_id))?;
            if !seen.insert(r.scale_id.as_str()) {
                return Err(anyhow!("{method} layer {layer:?}: scale {} ranked twice", r.scale_id).into());
            }
            let r = match a.tie_threshold {
                Some(t) => apply_tie_adjustment(r, t),
                None => r.clone(),
            };
            results.push(evaluate_scale(&r, scale)?);
        }
        let excluded = gold.len() - results.len();
        let summary = weighted_dataset_eval(&results, excluded)?;
        rows.extend(summary.rows(method, &sent_set, *layer));
    }
    let best = best_layers(&rows);
    rows.extend(best);
    write_atomic(&a.out, |w| Ok(write_report_csv(w, &rows)?))
}
