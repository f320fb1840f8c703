//! Static and contextual embedding stores.
//!
//! Static vectors come from word2vec text files. Contextual vectors come from
//! a JSON Lines interchange file with one record per
//! `(scale_id, sent_idx, adjective, layer)` plus a sidecar manifest
//! (`vecs.jsonl` -> `vecs.manifest.json`).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::{Add, Sub};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scales::{Adjective, Scale};

/// Dense real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("vector", "zero dimensions"));
        }
        if let Some(i) = components.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(
                "vector",
                format!("non-finite component at index {i}"),
            ));
        }
        Ok(Vector(components))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        check_dims(self, other)?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn add_assign(&mut self, other: &Vector) -> Result<()> {
        check_dims(self, other)?;
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
        Ok(())
    }

    /// Component-wise mean; errors on an empty slice or mixed dimensions.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a Vector>) -> Result<Vector> {
        let mut iter = vectors.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::invalid("vector mean", "no vectors"))?;
        let mut acc = first.clone();
        let mut n = 1usize;
        for v in iter {
            acc.add_assign(v)?;
            n += 1;
        }
        Ok(acc.scaled(1.0 / n as f64))
    }
}

fn check_dims(a: &Vector, b: &Vector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

impl Sub for &Vector {
    type Output = Result<Vector>;

    fn sub(self, rhs: &Vector) -> Result<Vector> {
        check_dims(self, rhs)?;
        Ok(Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect()))
    }
}

impl Add for &Vector {
    type Output = Result<Vector>;

    fn add(self, rhs: &Vector) -> Result<Vector> {
        check_dims(self, rhs)?;
        Ok(Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    #[default]
    Cosine,
    Dot,
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" | "cos" => Ok(Measure::Cosine),
            "dot" => Ok(Measure::Dot),
            other => Err(Error::invalid("measure", format!("unknown measure {other:?}"))),
        }
    }
}

pub fn similarity(a: &Vector, b: &Vector, measure: Measure) -> Result<f64> {
    let dot = a.dot(b)?;
    match measure {
        Measure::Dot => Ok(dot),
        Measure::Cosine => {
            let denom = a.norm() * b.norm();
            if denom == 0.0 {
                return Err(Error::ZeroVector);
            }
            Ok((dot / denom).clamp(-1.0, 1.0))
        }
    }
}

/// Word vectors keyed by surface form.
#[derive(Debug, Clone)]
pub struct StaticEmbeddings {
    pub name: String,
    dim: usize,
    vocab: HashMap<String, Vector>,
}

impl StaticEmbeddings {
    pub fn from_pairs(
        name: impl Into<String>,
        pairs: impl IntoIterator<Item = (String, Vector)>,
    ) -> Result<Self> {
        let mut vocab = HashMap::new();
        let mut dim = None;
        for (word, v) in pairs {
            let d = *dim.get_or_insert(v.dim());
            if v.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.dim(),
                });
            }
            if vocab.insert(word.clone(), v).is_some() {
                return Err(Error::invalid("embeddings", format!("duplicate word {word}")));
            }
        }
        let dim = dim.ok_or_else(|| Error::invalid("embeddings", "no vectors"))?;
        Ok(StaticEmbeddings {
            name: name.into(),
            dim,
            vocab,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&Vector> {
        self.vocab.get(word)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vocab.contains_key(word)
    }

    /// Writes word2vec text format with a header line, words sorted.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.vocab.len(), self.dim)?;
        let mut words: Vec<_> = self.vocab.keys().collect();
        words.sort();
        for w in words {
            write!(out, "{w}")?;
            for c in self.vocab[w].as_slice() {
                write!(out, " {c}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

pub fn load_static(path: impl AsRef<Path>) -> Result<StaticEmbeddings> {
    load_static_filtered(path, None)
}

/// Loads a word2vec text file, keeping only words in `keep` when given.
/// Row lengths are still checked for every line.
pub fn load_static_filtered(
    path: impl AsRef<Path>,
    keep: Option<&HashSet<String>>,
) -> Result<StaticEmbeddings> {
    let path = path.as_ref();
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_word2vec_text(name, BufReader::new(File::open(path)?), keep)
}

pub fn read_word2vec_text<R: BufRead>(
    name: String,
    reader: R,
    keep: Option<&HashSet<String>>,
) -> Result<StaticEmbeddings> {
    const WHAT: &str = "word2vec text";
    let mut dim: Option<usize> = None;
    let mut vocab = HashMap::new();
    let mut saw_row = false;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let word = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.collect();
        if lineno == 1 && rest.len() == 1 {
            if let (Ok(_), Ok(d)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                if d == 0 {
                    return Err(Error::parse(WHAT, lineno, "header declares zero dimensions"));
                }
                dim = Some(d);
                continue;
            }
        }
        saw_row = true;
        let d = *dim.get_or_insert(rest.len());
        if rest.len() != d || d == 0 {
            return Err(Error::parse(
                WHAT,
                lineno,
                format!("expected {d} components, found {}", rest.len()),
            ));
        }
        if keep.is_some_and(|k| !k.contains(word)) {
            continue;
        }
        let comps = rest
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(WHAT, lineno, e.to_string()))?;
        let v = Vector::new(comps).map_err(|e| Error::parse(WHAT, lineno, e.to_string()))?;
        if vocab.insert(word.to_string(), v).is_some() {
            return Err(Error::parse(WHAT, lineno, format!("duplicate word {word}")));
        }
    }
    if !saw_row {
        return Err(Error::invalid(WHAT, "file has no vectors"));
    }
    Ok(StaticEmbeddings {
        name,
        dim: dim.unwrap_or(0),
        vocab,
    })
}

/// Sidecar metadata for a contextual dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub model: String,
    pub dim: usize,
    pub layers: Vec<i64>,
    pub sentences_per_scale: usize,
    /// Scales the extractor already knows to be incomplete.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub partial_scales: Vec<String>,
}

impl Manifest {
    /// Declared layers without the input-embedding layer 0.
    pub fn block_layers(&self) -> Vec<i64> {
        self.layers.iter().copied().filter(|&l| l != 0).collect()
    }
}

/// One line of the contextual interchange file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextualRecord {
    pub scale_id: String,
    pub sent_idx: usize,
    pub adjective: Adjective,
    pub layer: i64,
    pub vector: Vector,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct ScaleGrid {
    vectors: BTreeMap<(usize, Adjective, i64), Vector>,
    partial: bool,
}

impl ScaleGrid {
    fn sentences(&self) -> BTreeSet<usize> {
        self.vectors.keys().map(|(s, _, _)| *s).collect()
    }

    fn adjectives(&self) -> BTreeSet<&Adjective> {
        self.vectors.keys().map(|(_, a, _)| a).collect()
    }
}

/// Contextual vectors keyed by `(scale, sentence, adjective, layer)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextualStore {
    manifest: Manifest,
    scales: BTreeMap<String, ScaleGrid>,
}

impl ContextualStore {
    pub fn from_records(
        manifest: Manifest,
        records: impl IntoIterator<Item = ContextualRecord>,
    ) -> Result<Self> {
        let mut store = ContextualStore {
            manifest,
            scales: BTreeMap::new(),
        };
        for (i, r) in records.into_iter().enumerate() {
            store
                .insert(r)
                .map_err(|e| Error::parse("contextual record", i + 1, e.to_string()))?;
        }
        store.refresh_completeness();
        Ok(store)
    }

    fn insert(&mut self, r: ContextualRecord) -> Result<()> {
        let m = &self.manifest;
        if r.vector.dim() != m.dim {
            return Err(Error::DimensionMismatch {
                expected: m.dim,
                got: r.vector.dim(),
            });
        }
        if !m.layers.contains(&r.layer) {
            return Err(Error::invalid(
                "layer",
                format!("{} is not a declared layer", r.layer),
            ));
        }
        if r.sent_idx >= m.sentences_per_scale {
            return Err(Error::invalid(
                "sentence index",
                format!("{} >= sentences_per_scale {}", r.sent_idx, m.sentences_per_scale),
            ));
        }
        let grid = self.scales.entry(r.scale_id.clone()).or_default();
        let key = (r.sent_idx, r.adjective, r.layer);
        if grid.vectors.contains_key(&key) {
            return Err(Error::invalid(
                "contextual record",
                format!(
                    "duplicate key ({}, {}, {}, {})",
                    r.scale_id, key.0, key.1, key.2
                ),
            ));
        }
        grid.vectors.insert(key, r.vector);
        Ok(())
    }

    fn refresh_completeness(&mut self) {
        let layers = &self.manifest.layers;
        let flagged: HashSet<&str> = self
            .manifest
            .partial_scales
            .iter()
            .map(String::as_str)
            .collect();
        for (id, grid) in &mut self.scales {
            let sentences = grid.sentences();
            let adjectives = grid.adjectives();
            let expected = sentences.len() * adjectives.len() * layers.len();
            grid.partial = flagged.contains(id.as_str()) || grid.vectors.len() != expected;
        }
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn dim(&self) -> usize {
        self.manifest.dim
    }

    pub fn len(&self) -> usize {
        self.scales.values().map(|g| g.vectors.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scale_ids(&self) -> impl Iterator<Item = &str> {
        self.scales.keys().map(String::as_str)
    }

    pub fn has_scale(&self, scale_id: &str) -> bool {
        self.scales.contains_key(scale_id)
    }

    /// True when the scale's grid is missing records or was flagged upstream.
    pub fn is_partial(&self, scale_id: &str) -> bool {
        self.scales.get(scale_id).is_some_and(|g| g.partial)
    }

    pub fn get(&self, scale_id: &str, sent_idx: usize, adj: &Adjective, layer: i64) -> Option<&Vector> {
        self.scales
            .get(scale_id)?
            .vectors
            .get(&(sent_idx, adj.clone(), layer))
    }

    /// Sentence indices present for a scale, ascending.
    pub fn sentences(&self, scale_id: &str) -> Vec<usize> {
        self.scales
            .get(scale_id)
            .map(|g| g.sentences().into_iter().collect())
            .unwrap_or_default()
    }

    /// Checks that every adjective of `scale` has a vector in every stored
    /// sentence at `layer`; returns those sentence indices.
    pub fn complete_sentences(&self, scale: &Scale, layer: i64) -> Result<Vec<usize>> {
        let grid = self
            .scales
            .get(scale.id())
            .ok_or_else(|| Error::missing("scale in contextual store", scale.id()))?;
        if !self.manifest.layers.contains(&layer) {
            return Err(Error::missing("layer", layer.to_string()));
        }
        if grid.partial {
            return Err(Error::PartialGrid(scale.id().to_string()));
        }
        let sentences: Vec<usize> = grid.sentences().into_iter().collect();
        for &s in &sentences {
            for a in scale.adjectives() {
                if !grid.vectors.contains_key(&(s, a.clone(), layer)) {
                    return Err(Error::PartialGrid(scale.id().to_string()));
                }
            }
        }
        Ok(sentences)
    }

    /// All vectors stored for `(key, adjective, layer)` across sentences.
    /// Used for QA items, which are keyed by item id rather than scale.
    pub fn vectors_for(&self, key: &str, adj: &Adjective, layer: i64) -> Vec<&Vector> {
        self.scales
            .get(key)
            .map(|g| {
                g.vectors
                    .iter()
                    .filter(|((_, a, l), _)| a == adj && *l == layer)
                    .map(|(_, v)| v)
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn records(&self) -> impl Iterator<Item = ContextualRecord> + '_ {
        self.scales.iter().flat_map(|(id, grid)| {
            grid.vectors.iter().map(move |((s, a, l), v)| ContextualRecord {
                scale_id: id.clone(),
                sent_idx: *s,
                adjective: a.clone(),
                layer: *l,
                vector: v.clone(),
            })
        })
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in self.records() {
            serde_json::to_writer(&mut out, &r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(manifest: Option<Manifest>, reader: R) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let r: ContextualRecord = serde_json::from_str(&line)
                .map_err(|e| Error::parse("contextual interchange", i + 1, e.to_string()))?;
            records.push(r);
        }
        let manifest = match manifest {
            Some(m) => m,
            None => infer_manifest(&records)?,
        };
        ContextualStore::from_records(manifest, records)
    }

    /// Loads `path` and its sidecar manifest. Without a manifest, the
    /// dimension, layers and sentence count are inferred from the records.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mpath = manifest_path(path);
        let manifest = if mpath.exists() {
            Some(serde_json::from_reader(BufReader::new(File::open(&mpath)?))?)
        } else {
            None
        };
        Self::read_jsonl(manifest, BufReader::new(File::open(path)?))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = BufWriter::new(File::create(path)?);
        self.write_jsonl(&mut out)?;
        out.flush()?;
        let mut m = BufWriter::new(File::create(manifest_path(path))?);
        serde_json::to_writer_pretty(&mut m, &self.manifest)?;
        m.write_all(b"\n")?;
        m.flush()?;
        Ok(())
    }
}

/// `vecs.jsonl` -> `vecs.manifest.json`.
pub fn manifest_path(path: &Path) -> PathBuf {
    path.with_extension("manifest.json")
}

fn infer_manifest(records: &[ContextualRecord]) -> Result<Manifest> {
    let first = records
        .first()
        .ok_or_else(|| Error::invalid("contextual interchange", "no records and no manifest"))?;
    let layers: BTreeSet<i64> = records.iter().map(|r| r.layer).collect();
    let k = records.iter().map(|r| r.sent_idx + 1).max().unwrap_or(0);
    Ok(Manifest {
        model: "unknown".into(),
        dim: first.vector.dim(),
        layers: layers.into_iter().collect(),
        sentences_per_scale: k,
        partial_scales: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn adj(s: &str) -> Adjective {
        Adjective::new(s).unwrap()
    }

    #[test]
    fn cosine_basics() {
        let a = v(&[3.0, -2.0, 0.5]);
        assert!((similarity(&a, &a, Measure::Cosine).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(similarity(&v(&[1.0, 0.0]), &v(&[0.0, 1.0]), Measure::Cosine).unwrap(), 0.0);
        // 0.6 / (1 * 1)
        let c = similarity(&v(&[1.0, 0.0]), &v(&[0.6, 0.8]), Measure::Cosine).unwrap();
        assert!((c - 0.6).abs() < 1e-12);
    }

    #[test]
    fn cosine_zero_vector_errors() {
        let err = similarity(&v(&[0.0, 0.0]), &v(&[1.0, 0.0]), Measure::Cosine).unwrap_err();
        assert!(matches!(err, Error::ZeroVector));
        assert_eq!(similarity(&v(&[0.0, 0.0]), &v(&[1.0, 0.0]), Measure::Dot).unwrap(), 0.0);
    }

    #[test]
    fn dim_mismatch_errors() {
        let err = similarity(&v(&[1.0]), &v(&[1.0, 0.0]), Measure::Dot).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 1, got: 2 }));
    }

    #[test]
    fn non_finite_vector_rejected() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![]).is_err());
    }

    #[test]
    fn word2vec_without_header() {
        let e = read_word2vec_text("t".into(), "good 0.1 0.2\nbad 0.3 0.4\n".as_bytes(), None).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.dim(), 2);
        assert_eq!(e.get("bad").unwrap().as_slice(), &[0.3, 0.4]);
        assert!(e.get("ugly").is_none());
    }

    #[test]
    fn word2vec_with_header() {
        let e = read_word2vec_text("t".into(), "2 3\na 1 2 3\nb 4 5 6\n".as_bytes(), None).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.dim(), 3);
    }

    #[test]
    fn word2vec_ragged_row_reports_line() {
        let err = read_word2vec_text("t".into(), "good 0.1 0.2\nbad 0.3 0.4 0.5\n".as_bytes(), None)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn word2vec_header_dim_enforced() {
        let err = read_word2vec_text("t".into(), "1 3\ngood 0.1 0.2\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn word2vec_empty_file_errors() {
        assert!(read_word2vec_text("t".into(), "".as_bytes(), None).is_err());
        assert!(read_word2vec_text("t".into(), "3 2\n".as_bytes(), None).is_err());
    }

    #[test]
    fn word2vec_filter_keeps_subset() {
        let keep: HashSet<String> = ["bad".to_string()].into();
        let e = read_word2vec_text("t".into(), "good 0.1 0.2\nbad 0.3 0.4\n".as_bytes(), Some(&keep))
            .unwrap();
        assert_eq!(e.len(), 1);
        assert!(e.contains("bad"));
    }

    fn manifest(layers: Vec<i64>, k: usize) -> Manifest {
        Manifest {
            model: "test".into(),
            dim: 2,
            layers,
            sentences_per_scale: k,
            partial_scales: vec![],
        }
    }

    fn grid_records(adjs: &[&str], k: usize, layers: &[i64]) -> Vec<ContextualRecord> {
        let mut out = Vec::new();
        for s in 0..k {
            for (ai, a) in adjs.iter().enumerate() {
                for &l in layers {
                    out.push(ContextualRecord {
                        scale_id: "s1".into(),
                        sent_idx: s,
                        adjective: adj(a),
                        layer: l,
                        vector: v(&[ai as f64 + 1.0, s as f64 + l as f64 / 10.0]),
                    });
                }
            }
        }
        out
    }

    #[test]
    fn contextual_complete_grid() {
        let layers: Vec<i64> = (1..=12).collect();
        let recs = grid_records(&["damp", "wet"], 2, &layers);
        let store = ContextualStore::from_records(manifest(layers, 2), recs).unwrap();
        assert_eq!(store.len(), 48);
        assert!(!store.is_partial("s1"));
        let scale = Scale::from_order("s1", &["damp", "wet"]).unwrap();
        assert_eq!(store.complete_sentences(&scale, 5).unwrap(), vec![0, 1]);
    }

    #[test]
    fn contextual_missing_record_flags_partial() {
        let layers: Vec<i64> = (1..=12).collect();
        let mut recs = grid_records(&["damp", "wet"], 2, &layers);
        recs.remove(17);
        let store = ContextualStore::from_records(manifest(layers, 2), recs).unwrap();
        assert!(store.is_partial("s1"));
        let scale = Scale::from_order("s1", &["damp", "wet"]).unwrap();
        assert!(matches!(
            store.complete_sentences(&scale, 1),
            Err(Error::PartialGrid(_))
        ));
    }

    #[test]
    fn contextual_duplicate_key_errors() {
        let mut recs = grid_records(&["damp", "wet"], 1, &[1]);
        recs.push(recs[0].clone());
        let err = ContextualStore::from_records(manifest(vec![1], 1), recs).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn contextual_dim_mismatch_errors() {
        let mut recs = grid_records(&["damp", "wet"], 1, &[1]);
        recs[1].vector = v(&[1.0, 2.0, 3.0]);
        let err = ContextualStore::from_records(manifest(vec![1], 1), recs).unwrap_err();
        assert!(err.to_string().contains("dimension mismatch"), "{err}");
    }

    #[test]
    fn contextual_undeclared_layer_errors() {
        let recs = grid_records(&["damp", "wet"], 1, &[13]);
        assert!(ContextualStore::from_records(manifest(vec![1], 1), recs).is_err());
    }

    #[test]
    fn manifest_flag_marks_partial() {
        let recs = grid_records(&["damp", "wet"], 1, &[1]);
        let mut m = manifest(vec![1], 1);
        m.partial_scales.push("s1".into());
        let store = ContextualStore::from_records(m, recs).unwrap();
        assert!(store.is_partial("s1"));
    }

    #[test]
    fn record_rejects_extra_keys() {
        let line = r#"{"scale_id":"s","sent_idx":0,"adjective":"a","layer":1,"vector":[1.0],"x":1}"#;
        assert!(ContextualStore::read_jsonl(None, line.as_bytes()).is_err());
    }

    #[test]
    fn jsonl_round_trip_without_manifest_infers_it() {
        let recs = grid_records(&["damp", "wet"], 2, &[0, 1, 2]);
        let store = ContextualStore::from_records(manifest(vec![0, 1, 2], 2), recs).unwrap();
        let mut buf = Vec::new();
        store.write_jsonl(&mut buf).unwrap();
        let back = ContextualStore::read_jsonl(None, buf.as_slice()).unwrap();
        assert_eq!(back.manifest().layers, vec![0, 1, 2]);
        assert_eq!(back.manifest().block_layers(), vec![1, 2]);
        assert_eq!(back.records().collect::<Vec<_>>(), store.records().collect::<Vec<_>>());
    }
}
