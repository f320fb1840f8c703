//! Fluency-based sentence selection.
//!
//! A candidate sentence is a good context for a scale when every adjective
//! of the scale fits it about equally well, i.e. when the spread of the
//! per-adjective fit scores is small. The same spread measures drive a
//! benchmark built from substitute-annotated instances, which compares
//! scorers by how often they pick the instance where all substitutes fit.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scales::Scale;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariationMetric {
    /// Population standard deviation.
    #[default]
    Std,
    /// Coefficient of variation, `std / mean`.
    Var,
}

impl FromStr for VariationMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "std" => Ok(VariationMetric::Std),
            "var" => Ok(VariationMetric::Var),
            other => Err(Error::invalid("variation metric", format!("unknown metric {other:?}"))),
        }
    }
}

impl fmt::Display for VariationMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariationMetric::Std => "std",
            VariationMetric::Var => "var",
        })
    }
}

pub fn variation(scores: &[f64], metric: VariationMetric) -> Result<f64> {
    if scores.len() < 2 {
        return Err(Error::invalid(
            "variation",
            format!("needs at least 2 scores, got {}", scores.len()),
        ));
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let std = (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n).sqrt();
    match metric {
        VariationMetric::Std => Ok(std),
        VariationMetric::Var if mean == 0.0 => Err(Error::invalid(
            "variation",
            "coefficient of variation undefined for zero mean",
        )),
        VariationMetric::Var => Ok(std / mean),
    }
}

/// Scorer output: how well each candidate word fits each instance slot.
/// Higher is a better fit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitScores {
    pub scorer: String,
    scores: HashMap<(String, String), f64>,
}

impl FitScores {
    pub fn new(scorer: impl Into<String>) -> Self {
        FitScores {
            scorer: scorer.into(),
            scores: HashMap::new(),
        }
    }

    pub fn insert(&mut self, instance: &str, word: &str, score: f64) -> Result<()> {
        if !score.is_finite() {
            return Err(Error::invalid("fit score", format!("{instance}/{word}: not finite")));
        }
        if self
            .scores
            .insert((instance.to_string(), word.to_string()), score)
            .is_some()
        {
            return Err(Error::invalid(
                "fit score",
                format!("duplicate score for ({instance}, {word})"),
            ));
        }
        Ok(())
    }

    pub fn get(&self, instance: &str, word: &str) -> Option<f64> {
        self.scores
            .get(&(instance.to_string(), word.to_string()))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Scores of `words` for one instance, or the first missing word.
    pub fn profile<'a>(
        &self,
        instance: &str,
        words: impl IntoIterator<Item = &'a str>,
    ) -> std::result::Result<Vec<f64>, String> {
        words
            .into_iter()
            .map(|w| self.get(instance, w).ok_or_else(|| w.to_string()))
            .collect()
    }

    /// `instance_id<TAB>word<TAB>score` per line.
    pub fn read_tsv<R: BufRead>(scorer: impl Into<String>, reader: R) -> Result<Self> {
        let mut fit = FitScores::new(scorer);
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse("fit scores", i + 1, "expected 3 tab-separated columns"));
            }
            let score: f64 = cols[2]
                .trim()
                .parse()
                .map_err(|_| Error::parse("fit scores", i + 1, format!("bad score {:?}", cols[2])))?;
            fit.insert(cols[0], cols[1], score)
                .map_err(|e| Error::parse("fit scores", i + 1, e.to_string()))?;
        }
        Ok(fit)
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut keys: Vec<_> = self.scores.keys().collect();
        keys.sort();
        for k in keys {
            writeln!(out, "{}\t{}\t{}", k.0, k.1, self.scores[k])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionStrategy {
    LowestStd,
    Random { seed: u64 },
    External,
}

impl fmt::Display for SelectionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionStrategy::LowestStd => f.write_str("lowest-std"),
            SelectionStrategy::Random { seed } => write!(f, "random(seed={seed})"),
            SelectionStrategy::External => f.write_str("external"),
        }
    }
}

impl FromStr for SelectionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowest-std" => return Ok(SelectionStrategy::LowestStd),
            "external" => return Ok(SelectionStrategy::External),
            _ => {}
        }
        s.strip_prefix("random(seed=")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|n| n.parse().ok())
            .map(|seed| SelectionStrategy::Random { seed })
            .ok_or_else(|| Error::invalid("selection strategy", format!("unknown strategy {s:?}")))
    }
}

impl Serialize for SelectionStrategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SelectionStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentSetEntry {
    pub ids: Vec<String>,
    /// Fewer than `k` candidates were available.
    pub short: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentSet {
    pub strategy: SelectionStrategy,
    pub k: usize,
    pub scales: BTreeMap<String, SentSetEntry>,
}

/// Picks up to `k` sentences for `scale` from `candidates`.
///
/// `LowestStd` ranks candidates by the population std of their fit scores
/// over the scale's adjectives (ties by id); `Random` draws a seeded sample
/// without replacement from the id-sorted candidates.
pub fn select_sentences(
    scale: &Scale,
    candidates: &[String],
    fit: &FitScores,
    k: usize,
    strategy: SelectionStrategy,
) -> Result<SentSetEntry> {
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    let mut pool: Vec<&String> = candidates.iter().collect();
    pool.sort();
    pool.dedup();
    let short = pool.len() < k;
    let ids: Vec<String> = match strategy {
        SelectionStrategy::LowestStd => {
            let mut scored = Vec::with_capacity(pool.len());
            for id in pool {
                let profile = fit
                    .profile(id, scale.adjectives().map(|a| a.as_str()))
                    .map_err(|adj| Error::missing("fit score", format!("({id}, {adj})")))?;
                scored.push((variation(&profile, VariationMetric::Std)?, id));
            }
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
            scored.into_iter().take(k).map(|(_, id)| id.clone()).collect()
        }
        SelectionStrategy::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(fnv1a(scale.id()));
            let n = pool.len();
            index::sample(&mut rng, n, k.min(n))
                .into_iter()
                .map(|i| pool[i].clone())
                .collect()
        }
        SelectionStrategy::External => pool.into_iter().take(k).cloned().collect(),
    };
    Ok(SentSetEntry { ids, short })
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// A substitute proposed for an annotated instance, with its annotator count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposedSubstitute {
    pub form: String,
    pub freq: f64,
}

/// A corpus instance of `word` annotated with substitutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedInstance {
    pub id: String,
    pub word: String,
    pub substitutes: Vec<ProposedSubstitute>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSubstitute {
    pub form: String,
    pub freq_a: f64,
    pub freq_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionPair {
    pub word: String,
    pub inst_a: String,
    pub inst_b: String,
    pub substitutes: Vec<PairSubstitute>,
    /// Id of the member whose substitute frequencies vary least.
    pub gold: String,
}

impl SelectionPair {
    pub fn swapped(&self) -> SelectionPair {
        SelectionPair {
            word: self.word.clone(),
            inst_a: self.inst_b.clone(),
            inst_b: self.inst_a.clone(),
            substitutes: self
                .substitutes
                .iter()
                .map(|s| PairSubstitute {
                    form: s.form.clone(),
                    freq_a: s.freq_b,
                    freq_b: s.freq_a,
                })
                .collect(),
            gold: self.gold.clone(),
        }
    }
}

pub const MIN_PAIR_SUBSTITUTES: usize = 2;
pub const MAX_PAIR_SUBSTITUTES: usize = 8;
pub const MAX_UNIQUE_SUBSTITUTES: usize = 2;

/// Pairs instances of the same word that share substitutes and keeps the
/// `pair_count` pairs whose frequency profiles differ most in coefficient
/// of variation.
///
/// Each member may have at most two substitutes the other lacks; those get
/// frequency 0 on the other side. A pair needs 2 to 8 substitutes in total.
pub fn build_selection_benchmark(
    instances: &[AnnotatedInstance],
    pair_count: usize,
) -> Vec<SelectionPair> {
    let mut by_word: BTreeMap<&str, Vec<&AnnotatedInstance>> = BTreeMap::new();
    for inst in instances {
        by_word.entry(&inst.word).or_default().push(inst);
    }
    let mut ranked: Vec<(f64, SelectionPair)> = Vec::new();
    for (word, group) in by_word {
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                if let Some(scored) = make_pair(word, a, b) {
                    ranked.push(scored);
                }
            }
        }
    }
    // stable: equal differences keep generation order
    ranked.sort_by(|x, y| y.0.total_cmp(&x.0));
    ranked.into_iter().take(pair_count).map(|(_, p)| p).collect()
}

fn make_pair(word: &str, a: &AnnotatedInstance, b: &AnnotatedInstance) -> Option<(f64, SelectionPair)> {
    let freq_b: HashMap<&str, f64> = b.substitutes.iter().map(|s| (s.form.as_str(), s.freq)).collect();
    let forms_a: HashSet<&str> = a.substitutes.iter().map(|s| s.form.as_str()).collect();
    let shared = a.substitutes.iter().filter(|s| freq_b.contains_key(s.form.as_str())).count();
    let unique_a = a.substitutes.len() - shared;
    let unique_b = b.substitutes.len() - shared;
    if shared == 0 || unique_a > MAX_UNIQUE_SUBSTITUTES || unique_b > MAX_UNIQUE_SUBSTITUTES {
        return None;
    }
    let mut subs: Vec<PairSubstitute> = a
        .substitutes
        .iter()
        .map(|s| PairSubstitute {
            form: s.form.clone(),
            freq_a: s.freq,
            freq_b: freq_b.get(s.form.as_str()).copied().unwrap_or(0.0),
        })
        .collect();
    subs.extend(
        b.substitutes
            .iter()
            .filter(|s| !forms_a.contains(s.form.as_str()))
            .map(|s| PairSubstitute {
                form: s.form.clone(),
                freq_a: 0.0,
                freq_b: s.freq,
            }),
    );
    if !(MIN_PAIR_SUBSTITUTES..=MAX_PAIR_SUBSTITUTES).contains(&subs.len()) {
        return None;
    }
    let fa: Vec<f64> = subs.iter().map(|s| s.freq_a).collect();
    let fb: Vec<f64> = subs.iter().map(|s| s.freq_b).collect();
    let va = variation(&fa, VariationMetric::Var).ok()?;
    let vb = variation(&fb, VariationMetric::Var).ok()?;
    let gold = if vb < va { &b.id } else { &a.id };
    Some((
        (va - vb).abs(),
        SelectionPair {
            word: word.to_string(),
            inst_a: a.id.clone(),
            inst_b: b.id.clone(),
            substitutes: subs,
            gold: gold.clone(),
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SelectionEval {
    pub evaluated: usize,
    pub skipped: usize,
    pub correct: usize,
    pub first_correct: usize,
}

impl SelectionEval {
    pub fn accuracy(&self) -> Option<f64> {
        (self.evaluated > 0).then(|| self.correct as f64 / self.evaluated as f64)
    }

    /// Accuracy of always choosing the first member of each pair.
    pub fn first_sentence_accuracy(&self) -> Option<f64> {
        (self.evaluated > 0).then(|| self.first_correct as f64 / self.evaluated as f64)
    }
}

/// Predicts, for each pair, the member whose fit scores over the pair's
/// substitutes vary least. Pairs with missing scores (or an undefined
/// coefficient of variation) are skipped and tallied.
pub fn evaluate_selection(
    pairs: &[SelectionPair],
    fit: &FitScores,
    metric: VariationMetric,
) -> SelectionEval {
    let mut ev = SelectionEval::default();
    for p in pairs {
        let forms = || p.substitutes.iter().map(|s| s.form.as_str());
        let spread = |inst: &str| {
            fit.profile(inst, forms())
                .ok()
                .and_then(|prof| variation(&prof, metric).ok())
        };
        let (Some(va), Some(vb)) = (spread(&p.inst_a), spread(&p.inst_b)) else {
            ev.skipped += 1;
            continue;
        };
        let predicted = if vb < va { &p.inst_b } else { &p.inst_a };
        ev.evaluated += 1;
        ev.correct += usize::from(*predicted == p.gold);
        ev.first_correct += usize::from(p.inst_a == p.gold);
    }
    ev
}

pub fn read_jsonl<T: serde::de::DeserializeOwned, R: BufRead>(what: &'static str, reader: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(what, i + 1, e.to_string()))?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize, W: Write>(mut out: W, items: &[T]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
