use std::collections::BTreeMap;

use adjscale::embed::{ContextualRecord, ContextualStore, Manifest, Measure, StaticEmbeddings, Vector};
use adjscale::ranking::{
    apply_tie_adjustment, bertsim_rank, build_dvec, dvec_rank, freq_rank, CountTable, DvecPair, Ranking,
    SentenceAggregation, VectorSource,
};
use adjscale::scales::{Adjective, Scale};
use proptest::prelude::*;

const ADJS: [&str; 5] = ["warm", "hot", "scalding", "boiling", "torrid"];

fn adj(s: &str) -> Adjective {
    Adjective::new(s).unwrap()
}

fn vecs(n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, dim), n)
        .prop_filter("non-zero", |vs| vs.iter().all(|v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3))
}

fn separated(scores: &BTreeMap<Adjective, f64>) -> bool {
    let mut s: Vec<f64> = scores.values().copied().collect();
    s.sort_by(f64::total_cmp);
    s.windows(2).all(|w| w[1] - w[0] > 1e-9)
}

proptest! {
    #[test]
    fn tie_adjustment_is_idempotent(
        scores in prop::collection::vec(prop::sample::select(vec![0.0, 0.004, 0.008, 0.012, 0.02, 0.5, 0.505]), 2..6),
        jitter in prop::collection::vec(-0.003f64..0.003, 6),
        threshold in prop::sample::select(vec![0.0, 0.005, 0.01, 0.05]),
    ) {
        let map: BTreeMap<Adjective, f64> =
            scores.iter().zip(ADJS).zip(&jitter).map(|((s, a), j)| (adj(a), s + j)).collect();
        let r = Ranking::new("s", "m", None, map);
        let once = apply_tie_adjustment(&r, threshold);
        let twice = apply_tie_adjustment(&once, threshold);
        prop_assert_eq!(&once, &twice);
        let flat: usize = once.levels.iter().map(Vec::len).sum();
        prop_assert_eq!(flat, r.scores.len());
        // levels ascend in score
        for w in once.levels.windows(2) {
            let hi = w[0].iter().map(|a| once.scores[a]).fold(f64::MIN, f64::max);
            let lo = w[1].iter().map(|a| once.scores[a]).fold(f64::MAX, f64::min);
            prop_assert!(hi < lo);
        }
    }

    #[test]
    fn dvec_rank_ignores_vector_length(
        raw in vecs(4, 3),
        d in vecs(1, 3),
        which in 0usize..4,
        alpha in 0.05f64..20.0,
    ) {
        let scale = Scale::from_order("s", &ADJS[..4]).unwrap();
        let dvec = build_dvec(
            &[DvecPair::new("warm", "hot").unwrap()],
            VectorSource::Static(&StaticEmbeddings::from_pairs(
                "d",
                vec![
                    ("warm".to_string(), Vector::zeros(3)),
                    ("hot".to_string(), Vector::new(d[0].clone()).unwrap()),
                ],
            ).unwrap()),
            None,
            None,
        ).unwrap();
        let emb = |scale_one: bool| {
            StaticEmbeddings::from_pairs(
                "e",
                raw.iter().enumerate().map(|(i, v)| {
                    let v = Vector::new(v.clone()).unwrap();
                    let v = if scale_one && i == which { v.scaled(alpha) } else { v };
                    (ADJS[i].to_string(), v)
                }),
            ).unwrap()
        };
        let (e1, e2) = (emb(false), emb(true));
        let r1 = dvec_rank(&scale, &dvec, VectorSource::Static(&e1), None, Measure::Cosine, SentenceAggregation::default()).unwrap();
        prop_assume!(separated(&r1.scores));
        let r2 = dvec_rank(&scale, &dvec, VectorSource::Static(&e2), None, Measure::Cosine, SentenceAggregation::default()).unwrap();
        prop_assert_eq!(r1.levels, r2.levels);
    }

    #[test]
    fn repeated_pair_equals_single_pair(raw in vecs(2, 4), copies in 1usize..6) {
        let emb = StaticEmbeddings::from_pairs(
            "e",
            vec![
                ("good".to_string(), Vector::new(raw[0].clone()).unwrap()),
                ("great".to_string(), Vector::new(raw[1].clone()).unwrap()),
            ],
        ).unwrap();
        prop_assume!(raw[0] != raw[1]);
        let p = DvecPair::new("good", "great").unwrap();
        let one = build_dvec(std::slice::from_ref(&p), VectorSource::Static(&emb), None, None).unwrap();
        let many = build_dvec(&vec![p; copies], VectorSource::Static(&emb), None, None).unwrap();
        for (a, b) in one.vector.as_slice().iter().zip(many.vector.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn bertsim_scores_bounded_and_copy_of_reference_wins(
        raw in vecs(8, 3),
        twin in 0usize..3,
    ) {
        // scale of 4, 2 sentences; adjective `twin` copies the extreme vector
        let scale = Scale::from_order("s", &ADJS[..4]).unwrap();
        let manifest = Manifest { model: "m".into(), dim: 3, layers: vec![1], sentences_per_scale: 2, partial_scales: vec![] };
        let mut records = Vec::new();
        for s in 0..2 {
            for (i, a) in ADJS[..4].iter().enumerate() {
                let src = if i == twin { 3 } else { i };
                records.push(ContextualRecord {
                    scale_id: "s".into(),
                    sent_idx: s,
                    adjective: adj(a),
                    layer: 1,
                    vector: Vector::new(raw[s * 4 + src].clone()).unwrap(),
                });
            }
        }
        let store = ContextualStore::from_records(manifest, records).unwrap();
        for agg in [SentenceAggregation::MeanSimilarity, SentenceAggregation::MeanVector] {
            let r = bertsim_rank(&store, &scale, 1, agg).unwrap().ranked().unwrap();
            for v in r.scores.values() {
                prop_assert!((-1.0..=1.0).contains(v));
            }
            if agg == SentenceAggregation::MeanSimilarity {
                prop_assert!((r.scores[&adj(ADJS[twin])] - 1.0).abs() < 1e-12);
            }
            prop_assert!(r.levels.last().unwrap().contains(&adj(ADJS[twin])));
        }
    }

    #[test]
    fn count_ranks_survive_monotone_transforms(counts in prop::collection::vec(0u32..1000, 5)) {
        let scale = Scale::from_order("s", &ADJS).unwrap();
        let table = |f: &dyn Fn(f64) -> f64| {
            let mut t = CountTable::new("c");
            for (a, c) in ADJS.iter().zip(&counts) {
                t.insert(adj(a), f(f64::from(*c))).unwrap();
            }
            t
        };
        let base = freq_rank(&scale, &table(&|x| x)).unwrap();
        let affine = freq_rank(&scale, &table(&|x| 2.0 * x + 7.0)).unwrap();
        let square = freq_rank(&scale, &table(&|x| x * x)).unwrap();
        prop_assert_eq!(&base.levels, &affine.levels);
        prop_assert_eq!(&base.levels, &square.levels);
    }
}
