use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::Ranking;
use crate::scales::{Relation, Scale};

/// Per-scale agreement between a predicted ranking and the gold scale.
/// Correlations are `None` when one side is entirely tied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleResult {
    pub scale_id: String,
    pub p_acc: f64,
    pub tau: Option<f64>,
    pub rho: Option<f64>,
    pub pair_count: usize,
}

/// Gold adjectives that the prediction is scored on, with their gold and
/// predicted level positions.
fn aligned_levels(pred: &Ranking, gold: &Scale) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(extra) = pred.scores.keys().find(|a| !gold.contains(a)) {
        return Err(Error::invalid(
            "ranking",
            format!("{extra} is not on gold scale {}", gold.id()),
        ));
    }
    let mut g = Vec::new();
    let mut p = Vec::new();
    for (gl, level) in gold.levels().iter().enumerate() {
        for a in level {
            if pred.excluded.contains(a) {
                continue;
            }
            let pl = pred
                .level_of(a)
                .ok_or_else(|| Error::missing("prediction for gold adjective", format!("{a} ({})", gold.id())))?;
            g.push(gl as f64);
            p.push(pl as f64);
        }
    }
    if g.len() < 2 {
        return Err(Error::invalid(
            "evaluation",
            format!("scale {} has fewer than 2 evaluated adjectives", gold.id()),
        ));
    }
    Ok((g, p))
}

/// Fraction of unordered pairs whose predicted relation (`<`, `>`, `=`)
/// matches gold, and the number of pairs.
pub fn pairwise_accuracy(pred: &Ranking, gold: &Scale) -> Result<(f64, usize)> {
    let (g, p) = aligned_levels(pred, gold)?;
    let mut correct = 0usize;
    let mut total = 0usize;
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            total += 1;
            let gr = relation(g[i], g[j]);
            let pr = relation(p[i], p[j]);
            correct += usize::from(gr == pr);
        }
    }
    Ok((correct as f64 / total as f64, total))
}

fn relation(a: f64, b: f64) -> Relation {
    match a.total_cmp(&b) {
        Ordering::Less => Relation::Less,
        Ordering::Greater => Relation::Greater,
        Ordering::Equal => Relation::Equal,
    }
}

pub fn evaluate_scale(pred: &Ranking, gold: &Scale) -> Result<ScaleResult> {
    let (p_acc, pair_count) = pairwise_accuracy(pred, gold)?;
    let (g, p) = aligned_levels(pred, gold)?;
    Ok(ScaleResult {
        scale_id: gold.id().to_string(),
        p_acc,
        tau: kendall_tau_b(&g, &p),
        rho: spearman_rho(&g, &p),
        pair_count,
    })
}

/// Kendall's tau-b, computed with Knight's O(n log n) method.
///
/// Returns `None` for fewer than two items, mismatched lengths, or when
/// either side is entirely tied.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let n0 = (n * (n - 1) / 2) as i64;
    let mut tied_x = 0i64;
    let mut tied_xy = 0i64;
    let mut run_x = 1i64;
    let mut run_xy = 1i64;
    for i in 1..n {
        if pairs[i].0 == pairs[i - 1].0 {
            run_x += 1;
            if pairs[i].1 == pairs[i - 1].1 {
                run_xy += 1;
            } else {
                tied_xy += run_xy * (run_xy - 1) / 2;
                run_xy = 1;
            }
        } else {
            tied_x += run_x * (run_x - 1) / 2;
            tied_xy += run_xy * (run_xy - 1) / 2;
            run_x = 1;
            run_xy = 1;
        }
    }
    tied_x += run_x * (run_x - 1) / 2;
    tied_xy += run_xy * (run_xy - 1) / 2;

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let swaps = merge_sort_swaps(&mut ys) as i64;

    let mut tied_y = 0i64;
    let mut run_y = 1i64;
    for i in 1..n {
        if ys[i] == ys[i - 1] {
            run_y += 1;
        } else {
            tied_y += run_y * (run_y - 1) / 2;
            run_y = 1;
        }
    }
    tied_y += run_y * (run_y - 1) / 2;

    let denom_x = n0 - tied_x;
    let denom_y = n0 - tied_y;
    if denom_x == 0 || denom_y == 0 {
        return None;
    }
    let concordant_minus_discordant = n0 - tied_x - tied_y + tied_xy - 2 * swaps;
    Some(concordant_minus_discordant as f64 / ((denom_x as f64) * (denom_y as f64)).sqrt())
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn merge_sort_swaps(v: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_sort_swaps(&mut v[..mid]) + merge_sort_swaps(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            merged.push(v[j]);
            j += 1;
        } else {
            merged.push(v[i]);
            i += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..]);
    v.copy_from_slice(&merged);
    swaps
}

/// Fractional (average) ranks, 1-based.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        // positions start..end share the mean of ranks start+1..=end
        let r = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = r;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho as the Pearson correlation of average ranks. `None` when
/// either side has zero rank variance.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let mean = (n + 1) as f64 / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (da, db) = (a - mean, b - mean);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::scales::{parse_scale_file, Adjective};

    fn ranking(order: &[&[&str]]) -> Ranking {
        let mut scores = BTreeMap::new();
        for (i, level) in order.iter().enumerate() {
            for a in *level {
                scores.insert(Adjective::new(a).unwrap(), i as f64);
            }
        }
        Ranking::new("s", "t", None, scores)
    }

    fn gold(line: &str) -> Scale {
        parse_scale_file("g", line).unwrap().scales()[0].clone()
    }

    #[test]
    fn one_flipped_pair() {
        let (acc, n) = pairwise_accuracy(&ranking(&[&["a"], &["c"], &["b"]]), &gold("s: a < b < c")).unwrap();
        assert_eq!(n, 3);
        assert!((acc - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identical_with_ties_is_perfect() {
        let r = evaluate_scale(&ranking(&[&["a", "b"], &["c"]]), &gold("s: a = b < c")).unwrap();
        assert_eq!(r.p_acc, 1.0);
        assert!((r.tau.unwrap() - 1.0).abs() < 1e-15);
        assert!((r.rho.unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gold_tie_predicted_strict_counts_wrong() {
        let (acc, n) = pairwise_accuracy(&ranking(&[&["a"], &["b"]]), &gold("s: a = b")).unwrap();
        assert_eq!((acc, n), (0.0, 1));
    }

    #[test]
    fn tau_example() {
        // concordant 2, discordant 1 over 3 pairs
        let t = kendall_tau_b(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((t - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reversal_gives_minus_one() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [4.0, 3.0, 2.0, 1.0];
        assert!((kendall_tau_b(&x, &y).unwrap() + 1.0).abs() < 1e-15);
        assert!((spearman_rho(&x, &y).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn all_tied_side_is_undefined() {
        assert_eq!(kendall_tau_b(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]), None);
        let r = evaluate_scale(&ranking(&[&["a"], &["b"]]), &gold("s: a = b")).unwrap();
        assert_eq!((r.tau, r.rho), (None, None));
    }

    #[test]
    fn missing_prediction_errors_unless_excluded() {
        let mut pred = ranking(&[&["a"], &["b"]]);
        assert!(pairwise_accuracy(&pred, &gold("s: a < b < c")).is_err());
        pred.excluded.push(Adjective::new("c").unwrap());
        assert_eq!(pairwise_accuracy(&pred, &gold("s: a < b < c")).unwrap(), (1.0, 1));
    }

    #[test]
    fn average_ranks_handle_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }
}
