use adjscale::scales::{gold_relations, lexical_split, parse_scale_file, Adjective, Dataset, Scale};
use proptest::prelude::*;

const WORDS: [&str; 16] = [
    "warm", "hot", "scalding", "cool", "cold", "icy", "good", "great", "superb", "bad", "awful", "old",
    "ancient", "big", "huge", "enormous",
];

/// A scale over distinct words; `tie[i]` joins word `i` to the previous level.
fn arb_scale(id: &'static str) -> impl Strategy<Value = Scale> {
    Just(WORDS.to_vec())
        .prop_shuffle()
        .prop_flat_map(|w| (Just(w), 2usize..8))
        .prop_flat_map(|(w, n)| (Just(w[..n].to_vec()), prop::collection::vec(any::<bool>(), n)))
        .prop_map(move |(words, tie)| {
            let mut levels: Vec<Vec<Adjective>> = Vec::new();
            for (i, w) in words.iter().enumerate() {
                let a = Adjective::new(w).unwrap();
                match levels.last_mut() {
                    Some(l) if tie[i] => l.push(a),
                    _ => levels.push(vec![a]),
                }
            }
            Scale::new(id, levels).unwrap()
        })
}

proptest! {
    #[test]
    fn relation_count_is_all_pairs(s in arb_scale("s")) {
        let n = s.len();
        prop_assert_eq!(gold_relations(&s).len(), n * (n - 1) / 2);
        prop_assert_eq!(s.pair_count(), n * (n - 1) / 2);
    }

    #[test]
    fn relations_are_antisymmetric(s in arb_scale("s")) {
        for a in s.adjectives() {
            for b in s.adjectives() {
                let ab = s.relation(a, b).unwrap();
                prop_assert_eq!(ab.reversed(), s.relation(b, a).unwrap());
            }
        }
    }

    #[test]
    fn scale_file_round_trip(a in arb_scale("first"), b in arb_scale("second")) {
        let d = Dataset::new("d", vec![a, b]).unwrap();
        let text = d.to_scale_file();
        let back = parse_scale_file("d", &text).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(back.to_scale_file(), text);
    }

    #[test]
    fn self_split_is_empty(a in arb_scale("first"), b in arb_scale("second")) {
        let d = Dataset::new("d", vec![a, b]).unwrap();
        prop_assert!(lexical_split(&d, &d).is_empty());
    }
}
