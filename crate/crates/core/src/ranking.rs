//! Intensity rankings.
//!
//! Two vector-based methods are provided:
//!
//! * [`bertsim_rank`] scores each adjective by its similarity to the most
//!   extreme adjective of the scale, measured in shared sentence contexts.
//! * [`dvec_rank`] scores each adjective by its similarity to an intensity
//!   direction ([`IntensityVector`]) averaged from `extreme - mild`
//!   differences on other scales.
//!
//! Frequency and sense-count baselines rank rarer / less polysemous words as
//! more intense. Higher scores always mean higher intensity.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embed::{similarity, ContextualStore, Measure, StaticEmbeddings, Vector};
use crate::error::{Error, Result};
use crate::scales::{Adjective, Dataset, Scale};

/// Threshold below which two adjacent scores are merged into a tie.
pub const DEFAULT_TIE_THRESHOLD: f64 = 0.01;

/// Scores for one scale plus the tie groups derived from them, mildest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub scale_id: String,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<i64>,
    pub scores: BTreeMap<Adjective, f64>,
    pub levels: Vec<Vec<Adjective>>,
    /// Scale members deliberately left unranked (the reference adjective).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<Adjective>,
    #[serde(default)]
    pub tie_threshold: f64,
}

impl Ranking {
    /// Ranking whose levels only merge exactly equal scores.
    pub fn new(
        scale_id: impl Into<String>,
        method: impl Into<String>,
        layer: Option<i64>,
        scores: BTreeMap<Adjective, f64>,
    ) -> Self {
        let levels = tie_levels(&scores, 0.0);
        Ranking {
            scale_id: scale_id.into(),
            method: method.into(),
            layer,
            scores,
            levels,
            excluded: Vec::new(),
            tie_threshold: 0.0,
        }
    }

    pub fn level_of(&self, adj: &Adjective) -> Option<usize> {
        self.levels.iter().position(|l| l.contains(adj))
    }

    /// Adjectives from least to most intense, ties in name order.
    pub fn order(&self) -> Vec<&Adjective> {
        self.levels.iter().flatten().collect()
    }
}

/// Groups adjectives by ascending score. Walking upward from the lowest
/// score, each adjective joins the current group when its gap to the
/// previous adjective is below `threshold` (or zero), so ties chain.
pub fn tie_levels(scores: &BTreeMap<Adjective, f64>, threshold: f64) -> Vec<Vec<Adjective>> {
    let mut sorted: Vec<(&Adjective, f64)> = scores.iter().map(|(a, s)| (a, *s)).collect();
    sorted.sort_by(|x, y| x.1.total_cmp(&y.1).then_with(|| x.0.cmp(y.0)));
    let mut levels: Vec<Vec<Adjective>> = Vec::new();
    let mut prev: Option<f64> = None;
    for (adj, s) in sorted {
        match (prev, levels.last_mut()) {
            (Some(p), Some(level)) if s == p || (s - p).abs() < threshold => level.push(adj.clone()),
            _ => levels.push(vec![adj.clone()]),
        }
        prev = Some(s);
    }
    levels
}

/// Re-derives the levels of `ranking` with the given tie threshold.
pub fn apply_tie_adjustment(ranking: &Ranking, threshold: f64) -> Ranking {
    Ranking {
        levels: tie_levels(&ranking.scores, threshold),
        tie_threshold: threshold,
        ..ranking.clone()
    }
}

/// Result of a ranking method that may decline a scale.
#[derive(Debug, Clone, PartialEq)]
pub enum RankOutcome {
    Ranked(Ranking),
    Excluded { scale_id: String, reason: String },
}

impl RankOutcome {
    pub fn ranked(self) -> Option<Ranking> {
        match self {
            RankOutcome::Ranked(r) => Some(r),
            RankOutcome::Excluded { .. } => None,
        }
    }
}

/// How per-sentence contextual vectors are combined before ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SentenceAggregation {
    /// Mean of the per-sentence similarities.
    #[default]
    MeanSimilarity,
    /// Similarity of the mean vector.
    MeanVector,
}

impl FromStr for SentenceAggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean-similarity" => Ok(SentenceAggregation::MeanSimilarity),
            "mean-vector" => Ok(SentenceAggregation::MeanVector),
            other => Err(Error::invalid("aggregation", format!("unknown aggregation {other:?}"))),
        }
    }
}

/// Ranks every adjective except the scale's most extreme one by its cosine
/// similarity to the extreme adjective, averaged over the scale's sentences.
/// Scales left with a single adjective are excluded.
pub fn bertsim_rank(
    store: &ContextualStore,
    scale: &Scale,
    layer: i64,
    aggregation: SentenceAggregation,
) -> Result<RankOutcome> {
    let ext = scale.extreme();
    let others: Vec<&Adjective> = scale.adjectives().filter(|a| *a != ext).collect();
    if others.len() < 2 {
        return Ok(RankOutcome::Excluded {
            scale_id: scale.id().to_string(),
            reason: "only one adjective left after removing the extreme reference".into(),
        });
    }
    let sentences = store.complete_sentences(scale, layer)?;
    let lookup = |a: &Adjective, s: usize| {
        store
            .get(scale.id(), s, a, layer)
            .ok_or_else(|| Error::PartialGrid(scale.id().to_string()))
    };
    let mut scores = BTreeMap::new();
    for a in others {
        let score = match aggregation {
            SentenceAggregation::MeanSimilarity => {
                let mut total = 0.0;
                for &s in &sentences {
                    total += similarity(lookup(a, s)?, lookup(ext, s)?, Measure::Cosine)?;
                }
                total / sentences.len() as f64
            }
            SentenceAggregation::MeanVector => {
                let va = Vector::mean(sentences.iter().map(|&s| lookup(a, s)).collect::<Result<Vec<_>>>()?)?;
                let ve = Vector::mean(sentences.iter().map(|&s| lookup(ext, s)).collect::<Result<Vec<_>>>()?)?;
                similarity(&va, &ve, Measure::Cosine)?
            }
        };
        scores.insert(a.clone(), score);
    }
    let mut r = Ranking::new(scale.id(), "bertsim", Some(layer), scores);
    r.excluded.push(ext.clone());
    Ok(RankOutcome::Ranked(r))
}

/// Where adjective vectors come from.
#[derive(Debug, Clone, Copy)]
pub enum VectorSource<'a> {
    Static(&'a StaticEmbeddings),
    Contextual(&'a ContextualStore),
}

/// A `(mild, extreme)` anchor pair. Contextual construction needs the id of
/// the scale whose sentences hold both words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DvecPair {
    pub mild: Adjective,
    pub ext: Adjective,
    pub scale_id: Option<String>,
}

impl DvecPair {
    pub fn new(mild: &str, ext: &str) -> Result<Self> {
        Ok(DvecPair {
            mild: Adjective::new(mild)?,
            ext: Adjective::new(ext)?,
            scale_id: None,
        })
    }

    pub fn on_scale(mut self, scale_id: impl Into<String>) -> Self {
        self.scale_id = Some(scale_id.into());
        self
    }

    /// Anchor pair of a gold scale.
    pub fn from_scale(scale: &Scale) -> Self {
        DvecPair {
            mild: scale.mild().clone(),
            ext: scale.extreme().clone(),
            scale_id: Some(scale.id().to_string()),
        }
    }
}

impl fmt::Display for DvecPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.mild, self.ext)?;
        if let Some(s) = &self.scale_id {
            write!(f, "@{s}")?;
        }
        Ok(())
    }
}

impl FromStr for DvecPair {
    type Err = Error;

    /// `mild:ext` or `mild:ext@scale_id`.
    fn from_str(s: &str) -> Result<Self> {
        let (words, scale) = match s.split_once('@') {
            Some((w, sc)) => (w, Some(sc)),
            None => (s, None),
        };
        let (mild, ext) = words
            .split_once(':')
            .ok_or_else(|| Error::invalid("pair", format!("{s:?} is not mild:extreme")))?;
        let pair = DvecPair::new(mild.trim(), ext.trim())?;
        Ok(match scale {
            Some(sc) => pair.on_scale(sc.trim()),
            None => pair,
        })
    }
}

/// Single positive pair.
pub const DIFFVEC_1_POSITIVE: [(&str, &str); 1] = [("good", "awesome")];
/// Single negative pair.
pub const DIFFVEC_1_NEGATIVE: [(&str, &str); 1] = [("bad", "horrible")];
/// Five pairs spanning several properties.
pub const DIFFVEC_5: [(&str, &str); 5] = [
    ("good", "awesome"),
    ("bad", "horrible"),
    ("old", "ancient"),
    ("pretty", "gorgeous"),
    ("ugly", "hideous"),
];

pub fn pairs_from(words: &[(&str, &str)]) -> Vec<DvecPair> {
    words
        .iter()
        .map(|(m, e)| DvecPair::new(m, e).expect("valid built-in pair"))
        .collect()
}

/// Anchor pairs of every scale in a dataset.
pub fn dataset_pairs(dataset: &Dataset) -> Vec<DvecPair> {
    dataset.scales().iter().map(DvecPair::from_scale).collect()
}

/// Intensity direction with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityVector {
    pub vector: Vector,
    /// `[mild, extreme]` anchors.
    pub pairs: Vec<(Adjective, Adjective)>,
    pub layer: Option<i64>,
    /// Sentences averaged per pair, when the same for every pair.
    pub sentences: Option<usize>,
}

/// Averages `ext - mild` differences into an intensity direction.
///
/// Contextually, each pair contributes the mean over its scale's first
/// `num_sentences` sentences (all of them when `None`) of the per-sentence
/// difference; pair means are then averaged. Statically, the word-vector
/// differences are averaged.
pub fn build_dvec(
    pairs: &[DvecPair],
    source: VectorSource<'_>,
    layer: Option<i64>,
    num_sentences: Option<usize>,
) -> Result<IntensityVector> {
    if pairs.is_empty() {
        return Err(Error::invalid("intensity vector", "no anchor pairs"));
    }
    if num_sentences == Some(0) {
        return Err(Error::invalid("intensity vector", "num_sentences must be at least 1"));
    }
    let mut per_pair = Vec::with_capacity(pairs.len());
    let mut counts = Vec::with_capacity(pairs.len());
    match source {
        VectorSource::Static(emb) => {
            if layer.is_some() {
                return Err(Error::LayerMismatch {
                    dvec: None,
                    requested: layer,
                });
            }
            for p in pairs {
                let ext = static_vec(emb, &p.ext)?;
                let mild = static_vec(emb, &p.mild)?;
                per_pair.push((ext - mild)?);
            }
        }
        VectorSource::Contextual(store) => {
            let layer = layer.ok_or_else(|| Error::invalid("intensity vector", "contextual source needs a layer"))?;
            for p in pairs {
                let (diff, used) = contextual_pair_diff(store, p, layer, num_sentences)?;
                per_pair.push(diff);
                counts.push(used);
            }
        }
    }
    let vector = Vector::mean(&per_pair)?;
    if vector.is_zero() {
        return Err(Error::invalid("intensity vector", "anchor differences cancel to zero"));
    }
    let sentences = match counts.first() {
        Some(&c) if counts.iter().all(|&x| x == c) => Some(c),
        _ => None,
    };
    Ok(IntensityVector {
        vector,
        pairs: pairs.iter().map(|p| (p.mild.clone(), p.ext.clone())).collect(),
        layer,
        sentences,
    })
}

fn static_vec<'a>(emb: &'a StaticEmbeddings, adj: &Adjective) -> Result<&'a Vector> {
    emb.get(adj.as_str())
        .ok_or_else(|| Error::missing("word vector", adj.as_str()))
}

fn contextual_pair_diff(
    store: &ContextualStore,
    pair: &DvecPair,
    layer: i64,
    num_sentences: Option<usize>,
) -> Result<(Vector, usize)> {
    let scale_id = pair
        .scale_id
        .as_deref()
        .ok_or_else(|| Error::missing("scale id for contextual pair", pair.to_string()))?;
    if !store.has_scale(scale_id) {
        return Err(Error::missing("scale in contextual store", scale_id));
    }
    let mut sentences = store.sentences(scale_id);
    if let Some(n) = num_sentences {
        if sentences.len() < n {
            return Err(Error::invalid(
                "intensity vector",
                format!("scale {scale_id} has {} sentences, {n} requested", sentences.len()),
            ));
        }
        sentences.truncate(n);
    }
    let mut diffs = Vec::with_capacity(sentences.len());
    for s in &sentences {
        let get = |a: &Adjective| {
            store
                .get(scale_id, *s, a, layer)
                .ok_or_else(|| Error::missing("contextual vector", format!("{scale_id}/{s}/{a}/{layer}")))
        };
        diffs.push((get(&pair.ext)? - get(&pair.mild)?)?);
    }
    Ok((Vector::mean(&diffs)?, sentences.len()))
}

/// Scores each adjective of `scale` by its similarity to the intensity
/// direction. The ranking layer must match the layer the direction was
/// built at.
pub fn dvec_rank(
    scale: &Scale,
    dvec: &IntensityVector,
    source: VectorSource<'_>,
    layer: Option<i64>,
    measure: Measure,
    aggregation: SentenceAggregation,
) -> Result<Ranking> {
    if layer != dvec.layer {
        return Err(Error::LayerMismatch {
            dvec: dvec.layer,
            requested: layer,
        });
    }
    let mut scores = BTreeMap::new();
    match source {
        VectorSource::Static(emb) => {
            for a in scale.adjectives() {
                let v = static_vec(emb, a)?;
                scores.insert(a.clone(), similarity(v, &dvec.vector, measure)?);
            }
        }
        VectorSource::Contextual(store) => {
            let layer = layer.ok_or_else(|| Error::invalid("ranking", "contextual source needs a layer"))?;
            let sentences = store.complete_sentences(scale, layer)?;
            for a in scale.adjectives() {
                let vecs = sentences
                    .iter()
                    .map(|&s| {
                        store
                            .get(scale.id(), s, a, layer)
                            .ok_or_else(|| Error::PartialGrid(scale.id().to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let score = match aggregation {
                    SentenceAggregation::MeanSimilarity => {
                        let mut total = 0.0;
                        for v in &vecs {
                            total += similarity(v, &dvec.vector, measure)?;
                        }
                        total / vecs.len() as f64
                    }
                    SentenceAggregation::MeanVector => {
                        similarity(&Vector::mean(vecs)?, &dvec.vector, measure)?
                    }
                };
                scores.insert(a.clone(), score);
            }
        }
    }
    Ok(Ranking::new(scale.id(), "diffvec", layer, scores))
}

/// Non-negative per-word counts (corpus frequency or number of senses).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CountTable {
    pub name: String,
    counts: HashMap<Adjective, f64>,
}

impl CountTable {
    pub fn new(name: impl Into<String>) -> Self {
        CountTable {
            name: name.into(),
            counts: HashMap::new(),
        }
    }

    pub fn insert(&mut self, adj: Adjective, count: f64) -> Result<()> {
        if !count.is_finite() || count < 0.0 {
            return Err(Error::invalid("count", format!("{adj}: {count} is not a non-negative number")));
        }
        self.counts.insert(adj, count);
        Ok(())
    }

    /// `None` for absent words, distinct from a zero count.
    pub fn get(&self, adj: &Adjective) -> Option<f64> {
        self.counts.get(adj).copied()
    }

    /// `adjective<TAB>count` per line.
    pub fn read_tsv<R: BufRead>(name: impl Into<String>, reader: R) -> Result<Self> {
        let mut table = CountTable::new(name);
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (w, c) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse("count table", i + 1, "expected adjective<TAB>count"))?;
            let adj = Adjective::new(w.trim()).map_err(|e| Error::parse("count table", i + 1, e.to_string()))?;
            let count: f64 = c
                .trim()
                .parse()
                .map_err(|_| Error::parse("count table", i + 1, format!("bad count {c:?}")))?;
            if table.counts.contains_key(&adj) {
                return Err(Error::parse("count table", i + 1, format!("duplicate entry {adj}")));
            }
            table
                .insert(adj, count)
                .map_err(|e| Error::parse("count table", i + 1, e.to_string()))?;
        }
        Ok(table)
    }
}

/// Rarer words rank as more intense: score is the negated frequency.
pub fn freq_rank(scale: &Scale, table: &CountTable) -> Result<Ranking> {
    count_rank(scale, table, "freq")
}

/// Words with fewer senses rank as more intense.
pub fn sense_rank(scale: &Scale, table: &CountTable) -> Result<Ranking> {
    count_rank(scale, table, "sense")
}

fn count_rank(scale: &Scale, table: &CountTable, method: &str) -> Result<Ranking> {
    let missing: Vec<&str> = scale
        .adjectives()
        .filter(|a| table.get(a).is_none())
        .map(Adjective::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(Error::missing(
            "count table entries",
            format!("{} (scale {})", missing.join(", "), scale.id()),
        ));
    }
    let scores = scale
        .adjectives()
        .map(|a| (a.clone(), -table.get(a).unwrap_or_default()))
        .collect();
    Ok(Ranking::new(scale.id(), method, None, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{ContextualRecord, Manifest};

    fn adj(s: &str) -> Adjective {
        Adjective::new(s).unwrap()
    }

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn scores(pairs: &[(&str, f64)]) -> BTreeMap<Adjective, f64> {
        pairs.iter().map(|(a, s)| (adj(a), *s)).collect()
    }

    fn names(levels: &[Vec<Adjective>]) -> Vec<Vec<&str>> {
        levels.iter().map(|l| l.iter().map(Adjective::as_str).collect()).collect()
    }

    fn static_emb(rows: &[(&str, &[f64])]) -> StaticEmbeddings {
        StaticEmbeddings::from_pairs("t", rows.iter().map(|(w, c)| (w.to_string(), v(c)))).unwrap()
    }

    #[test]
    fn tie_adjustment_merges_close_neighbours() {
        let r = Ranking::new("s", "m", None, scores(&[("x", 0.10), ("y", 0.105), ("z", 0.30)]));
        assert_eq!(names(&r.levels), vec![vec!["x"], vec!["y"], vec!["z"]]);
        let adj_r = apply_tie_adjustment(&r, DEFAULT_TIE_THRESHOLD);
        assert_eq!(names(&adj_r.levels), vec![vec!["x", "y"], vec!["z"]]);
    }

    #[test]
    fn zero_threshold_only_merges_equal_scores() {
        let r = Ranking::new("s", "m", None, scores(&[("x", 0.5), ("y", 0.5), ("z", 0.5000001)]));
        assert_eq!(names(&apply_tie_adjustment(&r, 0.0).levels), vec![vec!["x", "y"], vec!["z"]]);
    }

    #[test]
    fn tie_adjustment_chains_from_the_bottom() {
        // each neighbour gap is 0.008 but the span is 0.024
        let r = Ranking::new("s", "m", None, scores(&[("a", 0.0), ("b", 0.008), ("c", 0.016), ("d", 0.024)]));
        assert_eq!(names(&apply_tie_adjustment(&r, 0.01).levels), vec![vec!["a", "b", "c", "d"]]);
    }

    #[test]
    fn static_dvec_single_pair() {
        let emb = static_emb(&[("awesome", &[2.0, 0.0]), ("good", &[1.0, 0.0])]);
        let d = build_dvec(&pairs_from(&DIFFVEC_1_POSITIVE), VectorSource::Static(&emb), None, None).unwrap();
        assert_eq!(d.vector.as_slice(), &[1.0, 0.0]);
        assert_eq!(d.pairs, vec![(adj("good"), adj("awesome"))]);
    }

    #[test]
    fn static_dvec_averages_pairs() {
        let emb = static_emb(&[("e1", &[1.0, 0.0]), ("e2", &[0.0, 1.0]), ("m", &[0.0, 0.0])]);
        let pairs = vec![DvecPair::new("m", "e1").unwrap(), DvecPair::new("m", "e2").unwrap()];
        let d = build_dvec(&pairs, VectorSource::Static(&emb), None, None).unwrap();
        assert_eq!(d.vector.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn dvec_errors() {
        let emb = static_emb(&[("a", &[1.0, 0.0]), ("b", &[1.0, 0.0])]);
        let zero = build_dvec(&[DvecPair::new("a", "b").unwrap()], VectorSource::Static(&emb), None, None);
        assert!(zero.unwrap_err().to_string().contains("zero"));
        let missing = build_dvec(&[DvecPair::new("a", "nope").unwrap()], VectorSource::Static(&emb), None, None);
        assert!(missing.unwrap_err().to_string().contains("nope"));
    }

    #[test]
    fn diffvec_5_pairs() {
        let got: Vec<String> = pairs_from(&DIFFVEC_5).iter().map(|p| p.to_string()).collect();
        assert_eq!(
            got,
            vec!["good:awesome", "bad:horrible", "old:ancient", "pretty:gorgeous", "ugly:hideous"]
        );
    }

    #[test]
    fn pair_syntax() {
        let p: DvecPair = "good:awesome@wk-1".parse().unwrap();
        assert_eq!(p, DvecPair::new("good", "awesome").unwrap().on_scale("wk-1"));
        assert!("good".parse::<DvecPair>().is_err());
    }

    #[test]
    fn dvec_rank_static_cosine_order() {
        let emb = static_emb(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0]), ("c", &[0.6, 0.8])]);
        let d = IntensityVector {
            vector: v(&[1.0, 0.0]),
            pairs: vec![],
            layer: None,
            sentences: None,
        };
        let scale = Scale::from_order("s", &["a", "b", "c"]).unwrap();
        let r = dvec_rank(&scale, &d, VectorSource::Static(&emb), None, Measure::Cosine, Default::default()).unwrap();
        assert_eq!(names(&r.levels), vec![vec!["b"], vec!["c"], vec!["a"]]);
        assert!((r.scores[&adj("c")] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn dot_measure_is_magnitude_sensitive() {
        let emb = static_emb(&[("big", &[2.0, 0.0]), ("small", &[1.0, 0.0])]);
        let d = IntensityVector {
            vector: v(&[1.0, 0.0]),
            pairs: vec![],
            layer: None,
            sentences: None,
        };
        let scale = Scale::from_order("s", &["small", "big"]).unwrap();
        let dot = dvec_rank(&scale, &d, VectorSource::Static(&emb), None, Measure::Dot, Default::default()).unwrap();
        assert_eq!(names(&dot.levels), vec![vec!["small"], vec!["big"]]);
        let cos = dvec_rank(&scale, &d, VectorSource::Static(&emb), None, Measure::Cosine, Default::default()).unwrap();
        assert_eq!(names(&cos.levels), vec![vec!["big", "small"]]);
    }

    #[test]
    fn dvec_rank_rejects_layer_mismatch() {
        let emb = static_emb(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let d = IntensityVector {
            vector: v(&[1.0, 0.0]),
            pairs: vec![],
            layer: Some(3),
            sentences: None,
        };
        let scale = Scale::from_order("s", &["a", "b"]).unwrap();
        assert!(matches!(
            dvec_rank(&scale, &d, VectorSource::Static(&emb), None, Measure::Cosine, Default::default()),
            Err(Error::LayerMismatch { .. })
        ));
    }

    fn store(scale_id: &str, vecs: &[(&str, &[f64])], k: usize) -> ContextualStore {
        let mut recs = Vec::new();
        for s in 0..k {
            for (a, c) in vecs {
                recs.push(ContextualRecord {
                    scale_id: scale_id.into(),
                    sent_idx: s,
                    adjective: adj(a),
                    layer: 1,
                    vector: v(c).scaled(1.0 + s as f64),
                });
            }
        }
        let m = Manifest {
            model: "t".into(),
            dim: vecs[0].1.len(),
            layers: vec![1],
            sentences_per_scale: k,
            partial_scales: vec![],
        };
        ContextualStore::from_records(m, recs).unwrap()
    }

    #[test]
    fn bertsim_excludes_two_adjective_scale() {
        let st = store("s", &[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])], 1);
        let scale = Scale::from_order("s", &["a", "b"]).unwrap();
        assert!(matches!(
            bertsim_rank(&st, &scale, 1, Default::default()).unwrap(),
            RankOutcome::Excluded { .. }
        ));
    }

    #[test]
    fn bertsim_recovers_angular_order() {
        // angles to the extreme shrink with intensity: 80, 50, 20 degrees
        let at = |deg: f64| {
            let r = deg.to_radians();
            [r.cos(), r.sin()]
        };
        let (a, b, c, e) = (at(80.0), at(50.0), at(20.0), at(0.0));
        let st = store("s", &[("a", &a), ("b", &b), ("c", &c), ("e", &e)], 3);
        let scale = Scale::from_order("s", &["a", "b", "c", "e"]).unwrap();
        let r = bertsim_rank(&st, &scale, 1, Default::default()).unwrap().ranked().unwrap();
        assert_eq!(names(&r.levels), vec![vec!["a"], vec!["b"], vec!["c"]]);
        assert_eq!(r.excluded, vec![adj("e")]);
        assert!((r.scores[&adj("b")] - 50f64.to_radians().cos()).abs() < 1e-12);
    }

    #[test]
    fn bertsim_identical_vectors_tie() {
        let st = store("s", &[("a", &[1.0, 1.0]), ("b", &[1.0, 1.0]), ("c", &[1.0, 1.0])], 2);
        let scale = Scale::from_order("s", &["a", "b", "c"]).unwrap();
        let r = bertsim_rank(&st, &scale, 1, Default::default()).unwrap().ranked().unwrap();
        assert!(r.scores.values().all(|&s| (s - 1.0).abs() < 1e-12));
        assert_eq!(apply_tie_adjustment(&r, DEFAULT_TIE_THRESHOLD).levels.len(), 1);
    }

    #[test]
    fn bertsim_partial_grid_errors() {
        let st = store("s", &[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])], 1);
        let scale = Scale::from_order("s", &["a", "b", "c"]).unwrap();
        assert!(matches!(
            bertsim_rank(&st, &scale, 1, Default::default()),
            Err(Error::PartialGrid(_))
        ));
    }

    #[test]
    fn contextual_dvec_and_sentence_limit() {
        let st = store("src", &[("m", &[0.0, 1.0]), ("x", &[1.0, 1.0])], 3);
        let pair = DvecPair::new("m", "x").unwrap().on_scale("src");
        // sentence s scales vectors by (1 + s): diffs are [1,0], [2,0], [3,0]
        let all = build_dvec(std::slice::from_ref(&pair), VectorSource::Contextual(&st), Some(1), None).unwrap();
        assert_eq!(all.vector.as_slice(), &[2.0, 0.0]);
        assert_eq!(all.sentences, Some(3));
        let one = build_dvec(std::slice::from_ref(&pair), VectorSource::Contextual(&st), Some(1), Some(1)).unwrap();
        assert_eq!(one.vector.as_slice(), &[1.0, 0.0]);
        assert!(build_dvec(std::slice::from_ref(&pair), VectorSource::Contextual(&st), Some(1), Some(4)).is_err());
        let unscoped = DvecPair::new("m", "x").unwrap();
        assert!(build_dvec(&[unscoped], VectorSource::Contextual(&st), Some(1), None).is_err());
    }

    #[test]
    fn freq_and_sense_baselines() {
        let mut freq = CountTable::new("f");
        freq.insert(adj("good"), 276e6).unwrap();
        freq.insert(adj("awesome"), 10e6).unwrap();
        let scale = Scale::from_order("s", &["good", "awesome"]).unwrap();
        let r = freq_rank(&scale, &freq).unwrap();
        assert_eq!(names(&r.levels), vec![vec!["good"], vec!["awesome"]]);

        let senses = CountTable::read_tsv("wn", "old\t9\nancient\t2\n".as_bytes()).unwrap();
        let scale = Scale::from_order("s", &["old", "ancient"]).unwrap();
        let r = sense_rank(&scale, &senses).unwrap();
        assert_eq!(names(&r.levels), vec![vec!["old"], vec!["ancient"]]);

        let tied = CountTable::read_tsv("wn", "old\t2\nancient\t2\n".as_bytes()).unwrap();
        assert_eq!(sense_rank(&scale, &tied).unwrap().levels.len(), 1);
    }

    #[test]
    fn count_table_missing_and_absent_vs_zero() {
        let t = CountTable::read_tsv("f", "rare\t0\n".as_bytes()).unwrap();
        assert_eq!(t.get(&adj("rare")), Some(0.0));
        assert_eq!(t.get(&adj("other")), None);
        let scale = Scale::from_order("s", &["rare", "x", "y"]).unwrap();
        let err = freq_rank(&scale, &t).unwrap_err().to_string();
        assert!(err.contains("x, y"), "{err}");
        assert!(CountTable::read_tsv("f", "w\t-1\n".as_bytes()).is_err());
    }
}
