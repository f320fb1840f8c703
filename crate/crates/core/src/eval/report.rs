use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::metrics::ScaleResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "p_acc")]
    PairwiseAccuracy,
    #[serde(rename = "tau")]
    KendallTau,
    #[serde(rename = "rho")]
    SpearmanRho,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::PairwiseAccuracy, Metric::KendallTau, Metric::SpearmanRho];

    pub fn name(self) -> &'static str {
        match self {
            Metric::PairwiseAccuracy => "p_acc",
            Metric::KendallTau => "tau",
            Metric::SpearmanRho => "rho",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Pair-count-weighted averages over the scales of one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub p_acc: f64,
    pub tau: Option<f64>,
    pub rho: Option<f64>,
    pub n_scales: usize,
    /// Scales dropped before scoring (single adjective left, partial grid,
    /// missing vectors).
    pub n_excluded: usize,
    pub tau_undefined: usize,
    pub rho_undefined: usize,
}

impl DatasetSummary {
    pub fn value(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::PairwiseAccuracy => Some(self.p_acc),
            Metric::KendallTau => self.tau,
            Metric::SpearmanRho => self.rho,
        }
    }

    /// `(scales averaged, scales left out)` for one metric.
    pub fn coverage(&self, metric: Metric) -> (usize, usize) {
        let undefined = match metric {
            Metric::PairwiseAccuracy => 0,
            Metric::KendallTau => self.tau_undefined,
            Metric::SpearmanRho => self.rho_undefined,
        };
        (self.n_scales - undefined, self.n_excluded + undefined)
    }

    /// One CSV row per defined metric.
    pub fn rows(&self, method: &str, sent_set: &str, layer: Option<i64>) -> Vec<ReportRow> {
        Metric::ALL
            .into_iter()
            .filter_map(|m| {
                let value = self.value(m)?;
                let (n_scales, n_excluded) = self.coverage(m);
                Some(ReportRow {
                    method: method.to_string(),
                    sent_set: sent_set.to_string(),
                    layer,
                    metric: m.name().to_string(),
                    value,
                    n_scales,
                    n_excluded,
                })
            })
            .collect()
    }
}

/// Averages per-scale results using each scale's pair count as its weight.
/// Undefined correlations are left out of their metric's average.
pub fn weighted_dataset_eval(results: &[ScaleResult], n_excluded: usize) -> Result<DatasetSummary> {
    if results.is_empty() {
        return Err(Error::invalid("evaluation", "no scales to average"));
    }
    let weighted = |get: &dyn Fn(&ScaleResult) -> Option<f64>| -> (Option<f64>, usize) {
        let mut num = 0.0;
        let mut den = 0.0;
        let mut undefined = 0;
        for r in results {
            match get(r) {
                Some(v) => {
                    num += r.pair_count as f64 * v;
                    den += r.pair_count as f64;
                }
                None => undefined += 1,
            }
        }
        ((den > 0.0).then(|| num / den), undefined)
    };
    let (p_acc, _) = weighted(&|r| Some(r.p_acc));
    let (tau, tau_undefined) = weighted(&|r| r.tau);
    let (rho, rho_undefined) = weighted(&|r| r.rho);
    Ok(DatasetSummary {
        p_acc: p_acc.unwrap_or(0.0),
        tau,
        rho,
        n_scales: results.len(),
        n_excluded,
        tau_undefined,
        rho_undefined,
    })
}

/// One line of the evaluation CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub sent_set: String,
    pub layer: Option<i64>,
    pub metric: String,
    pub value: f64,
    pub n_scales: usize,
    pub n_excluded: usize,
}

/// For every `(method, sent_set, metric)` with per-layer rows, a
/// `best:<metric>` row holding the highest value and its layer (lowest
/// layer wins ties).
pub fn best_layers(rows: &[ReportRow]) -> Vec<ReportRow> {
    let mut best: BTreeMap<(&str, &str, &str), &ReportRow> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.layer.is_some() && !r.metric.starts_with("best:")) {
        let key = (r.method.as_str(), r.sent_set.as_str(), r.metric.as_str());
        match best.get(&key) {
            Some(cur) if cur.value > r.value || (cur.value == r.value && cur.layer <= r.layer) => {}
            _ => {
                best.insert(key, r);
            }
        }
    }
    best.into_values()
        .map(|r| ReportRow {
            metric: format!("best:{}", r.metric),
            ..r.clone()
        })
        .collect()
}

pub const REPORT_HEADER: &str = "method,sent_set,layer,metric,value,n_scales,n_excluded";

pub fn write_report_csv<W: Write>(mut out: W, rows: &[ReportRow]) -> Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&r.method),
            csv_field(&r.sent_set),
            r.layer.map(|l| l.to_string()).unwrap_or_default(),
            csv_field(&r.metric),
            r.value,
            r.n_scales,
            r.n_excluded
        )?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
