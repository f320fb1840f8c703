//! Indirect yes/no question answering from adjective intensity.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embed::{similarity, Measure, Vector};
use crate::error::{Error, Result};
use crate::ranking::{IntensityVector, VectorSource};
use crate::scales::Adjective;

pub const DEFAULT_QA_TIE_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum QaLabel {
    Yes,
    No,
    Uncertain,
}

impl QaLabel {
    pub fn flipped(self) -> QaLabel {
        match self {
            QaLabel::Yes => QaLabel::No,
            QaLabel::No => QaLabel::Yes,
            QaLabel::Uncertain => QaLabel::Uncertain,
        }
    }
}

impl FromStr for QaLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "YES" => Ok(QaLabel::Yes),
            "NO" => Ok(QaLabel::No),
            "UNCERTAIN" => Ok(QaLabel::Uncertain),
            other => Err(Error::invalid("QA label", format!("unknown label {other:?}"))),
        }
    }
}

impl fmt::Display for QaLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QaLabel::Yes => "YES",
            QaLabel::No => "NO",
            QaLabel::Uncertain => "UNCERTAIN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaItem {
    pub id: String,
    pub adj_q: Adjective,
    pub adj_a: Adjective,
    pub negated: bool,
    pub gold: QaLabel,
}

/// Reads `id<TAB>adj_q<TAB>adj_a<TAB>negated<TAB>gold`. Blank lines, `#`
/// comments and a leading `id` header are skipped.
pub fn read_qa_tsv<R: BufRead>(reader: R) -> Result<Vec<QaItem>> {
    let mut items = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split('\t').collect();
        if items.is_empty() && cols[0] == "id" {
            continue;
        }
        if cols.len() != 5 {
            return Err(Error::parse("QA file", lineno, format!("expected 5 columns, got {}", cols.len())));
        }
        let adj = |s: &str| Adjective::new(s).map_err(|e| Error::parse("QA file", lineno, e.to_string()));
        let negated = match cols[3].trim() {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse("QA file", lineno, format!("negated must be 0 or 1, got {other:?}"))),
        };
        let gold = cols[4]
            .parse()
            .map_err(|e: Error| Error::parse("QA file", lineno, e.to_string()))?;
        let id = cols[0].trim().to_string();
        if id.is_empty() {
            return Err(Error::parse("QA file", lineno, "empty id"));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::parse("QA file", lineno, format!("duplicate id {id}")));
        }
        items.push(QaItem {
            id,
            adj_q: adj(cols[1])?,
            adj_a: adj(cols[2])?,
            negated,
            gold,
        });
    }
    Ok(items)
}

/// The decision rule on two similarities to the intensity direction. A
/// difference under `tie_threshold` counts as equal intensity, which
/// answers YES.
pub fn qa_decide(sim_q: f64, sim_a: f64, negated: bool, tie_threshold: f64) -> QaLabel {
    let diffsim = sim_q - sim_a;
    let label = if diffsim.abs() < tie_threshold || sim_a > sim_q {
        QaLabel::Yes
    } else {
        QaLabel::No
    };
    if negated {
        label.flipped()
    } else {
        label
    }
}

/// Predicts an item's answer. Contextual vectors are looked up under the
/// item id as scale key; several sentence vectors for one adjective are
/// scored and averaged.
pub fn qa_predict(
    item: &QaItem,
    dvec: &IntensityVector,
    source: VectorSource<'_>,
    layer: Option<i64>,
    measure: Measure,
    tie_threshold: f64,
) -> Result<QaLabel> {
    if layer != dvec.layer {
        return Err(Error::LayerMismatch {
            dvec: dvec.layer,
            requested: layer,
        });
    }
    let sim = |adj: &Adjective| -> Result<f64> {
        match source {
            VectorSource::Static(emb) => {
                let v = emb
                    .get(adj.as_str())
                    .ok_or_else(|| Error::missing("static vector", adj.to_string()))?;
                similarity(v, &dvec.vector, measure)
            }
            VectorSource::Contextual(store) => {
                let layer = layer.ok_or_else(|| Error::invalid("QA", "contextual source needs a layer"))?;
                let vecs: Vec<&Vector> = store.vectors_for(&item.id, adj, layer);
                if vecs.is_empty() {
                    return Err(Error::missing(
                        "contextual vector",
                        format!("{} {adj} layer {layer}", item.id),
                    ));
                }
                let mut total = 0.0;
                for v in &vecs {
                    total += similarity(v, &dvec.vector, measure)?;
                }
                Ok(total / vecs.len() as f64)
            }
        }
    };
    let sim_q = sim(&item.adj_q)?;
    let sim_a = sim(&item.adj_a)?;
    Ok(qa_decide(sim_q, sim_a, item.negated, tie_threshold))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaScores {
    pub n: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Accuracy and macro precision/recall/F1 over YES and NO. Items with an
/// UNCERTAIN gold label are left out. A class never predicted has
/// precision 0.
pub fn qa_evaluate(items: &[QaItem], predictions: &HashMap<String, QaLabel>) -> Result<QaScores> {
    let scored: Vec<(&QaItem, QaLabel)> = items
        .iter()
        .filter(|it| it.gold != QaLabel::Uncertain)
        .map(|it| {
            predictions
                .get(&it.id)
                .map(|&p| (it, p))
                .ok_or_else(|| Error::missing("QA prediction", it.id.clone()))
        })
        .collect::<Result<_>>()?;
    if scored.is_empty() {
        return Err(Error::invalid("QA evaluation", "no YES/NO items"));
    }
    let n = scored.len();
    let correct = scored.iter().filter(|(it, p)| it.gold == *p).count();
    let mut precision = 0.0;
    let mut recall = 0.0;
    let mut f1 = 0.0;
    for class in [QaLabel::Yes, QaLabel::No] {
        let tp = scored.iter().filter(|(it, p)| *p == class && it.gold == class).count() as f64;
        let predicted = scored.iter().filter(|(_, p)| *p == class).count() as f64;
        let actual = scored.iter().filter(|(it, _)| it.gold == class).count() as f64;
        let p = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let r = if actual > 0.0 { tp / actual } else { 0.0 };
        precision += p / 2.0;
        recall += r / 2.0;
        f1 += if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 } / 2.0;
    }
    Ok(QaScores {
        n,
        accuracy: correct as f64 / n as f64,
        precision,
        recall,
        f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::StaticEmbeddings;

    fn item(id: &str, gold: QaLabel) -> QaItem {
        QaItem {
            id: id.into(),
            adj_q: Adjective::new("good").unwrap(),
            adj_a: Adjective::new("great").unwrap(),
            negated: false,
            gold,
        }
    }

    #[test]
    fn decision_examples() {
        assert_eq!(qa_decide(0.3, 0.8, false, 0.01), QaLabel::Yes);
        assert_eq!(qa_decide(0.3, 0.8, true, 0.01), QaLabel::No);
        assert_eq!(qa_decide(0.505, 0.500, false, 0.01), QaLabel::Yes);
        assert_eq!(qa_decide(0.8, 0.3, false, 0.01), QaLabel::No);
        assert_eq!(qa_decide(0.8, 0.3, true, 0.01), QaLabel::Yes);
    }

    #[test]
    fn great_ad_static() {
        let emb = StaticEmbeddings::from_pairs(
            "t",
            vec![
                ("good".to_string(), Vector::new(vec![1.0, 0.2]).unwrap()),
                ("great".to_string(), Vector::new(vec![1.0, 1.5]).unwrap()),
            ],
        )
        .unwrap();
        let dvec = IntensityVector {
            vector: Vector::new(vec![0.0, 1.0]).unwrap(),
            pairs: vec![],
            layer: None,
            sentences: None,
        };
        let it = item("q1", QaLabel::Yes);
        let got = qa_predict(&it, &dvec, VectorSource::Static(&emb), None, Measure::Cosine, 0.01).unwrap();
        assert_eq!(got, QaLabel::Yes);
        assert!(matches!(
            qa_predict(&it, &dvec, VectorSource::Static(&emb), Some(3), Measure::Cosine, 0.01),
            Err(Error::LayerMismatch { .. })
        ));
        let mut missing = it.clone();
        missing.adj_a = Adjective::new("superb").unwrap();
        assert!(qa_predict(&missing, &dvec, VectorSource::Static(&emb), None, Measure::Cosine, 0.01).is_err());
    }

    fn majority_setup(pred: QaLabel) -> QaScores {
        let mut items = Vec::new();
        for i in 0..123 {
            items.push(item(&format!("q{i}"), if i < 85 { QaLabel::Yes } else { QaLabel::No }));
        }
        items.push(item("u1", QaLabel::Uncertain));
        items.push(item("u2", QaLabel::Uncertain));
        let preds = items.iter().map(|it| (it.id.clone(), pred)).collect();
        qa_evaluate(&items, &preds).unwrap()
    }

    #[test]
    fn majority_baseline() {
        let s = majority_setup(QaLabel::Yes);
        assert_eq!(s.n, 123);
        assert!((s.accuracy - 0.691).abs() < 0.001);
        assert!((s.precision - 0.346).abs() < 0.001);
        assert_eq!(s.recall, 0.5);
        assert!((s.f1 - 0.409).abs() < 0.001);
        let s = majority_setup(QaLabel::No);
        assert!((s.accuracy - 0.309).abs() < 0.001);
        assert_eq!(s.recall, 0.5);
    }

    #[test]
    fn perfect_predictor() {
        let items = vec![item("a", QaLabel::Yes), item("b", QaLabel::No)];
        let preds = items.iter().map(|it| (it.id.clone(), it.gold)).collect();
        let s = qa_evaluate(&items, &preds).unwrap();
        assert_eq!((s.accuracy, s.precision, s.recall, s.f1), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn missing_prediction_errors() {
        let items = vec![item("a", QaLabel::Yes)];
        assert!(qa_evaluate(&items, &HashMap::new()).is_err());
    }

    #[test]
    fn tsv_parsing() {
        let text = "id\tadj_q\tadj_a\tnegated\tgold\nq1\tgood\tgreat\t0\tYES\n# c\nq2\tWarm\thot\t1\tno\n";
        let items = read_qa_tsv(text.as_bytes()).unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[1].adj_q.as_str(), "warm");
        assert!(items[1].negated);
        assert_eq!(items[1].gold, QaLabel::No);
        assert!(read_qa_tsv("q1\tgood\tgreat\t2\tYES\n".as_bytes()).is_err());
        assert!(read_qa_tsv("q1\tgood\tgreat\t0\n".as_bytes()).is_err());
        assert!(read_qa_tsv("q1\tgood\tgreat\t0\tYES\nq1\tgood\tgreat\t0\tNO\n".as_bytes()).is_err());
    }
}
