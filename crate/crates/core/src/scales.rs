//! Gold adjective scales.
//!
//! A scale file holds one half-scale per line:
//!
//! ```text
//! # comment
//! wk-wet: damp < moist < wet
//! cd-fear: scary = frightening < terrifying
//! ```
//!
//! `<` separates intensity levels (mildest first) and `=` joins adjacent
//! adjectives into a tie group.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lowercase adjective token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Adjective(String);

impl Adjective {
    /// Lowercases `form` and checks it is a single non-empty token.
    pub fn new(form: &str) -> Result<Self> {
        if form.is_empty() {
            return Err(Error::invalid("adjective", "empty form"));
        }
        if form.chars().any(char::is_whitespace) {
            return Err(Error::invalid(
                "adjective",
                format!("{form:?} contains whitespace"),
            ));
        }
        Ok(Adjective(form.to_lowercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True when the form starts with one of `a e i o u`.
    pub fn starts_with_vowel(&self) -> bool {
        matches!(self.0.chars().next(), Some('a' | 'e' | 'i' | 'o' | 'u'))
    }
}

impl TryFrom<String> for Adjective {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Adjective::new(&s)
    }
}

impl From<Adjective> for String {
    fn from(a: Adjective) -> String {
        a.0
    }
}

impl fmt::Display for Adjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Adjective {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Less,
    Greater,
    Equal,
}

impl Relation {
    pub fn reversed(self) -> Self {
        match self {
            Relation::Less => Relation::Greater,
            Relation::Greater => Relation::Less,
            Relation::Equal => Relation::Equal,
        }
    }

    /// Relation implied by two level positions on a scale.
    pub fn from_levels(a: usize, b: usize) -> Self {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Relation::Less,
            std::cmp::Ordering::Greater => Relation::Greater,
            std::cmp::Ordering::Equal => Relation::Equal,
        }
    }
}

/// An ordered half-scale. `levels[0]` is the mildest tie group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scale {
    id: String,
    levels: Vec<Vec<Adjective>>,
}

impl Scale {
    pub fn new(id: impl Into<String>, levels: Vec<Vec<Adjective>>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() || id.contains(':') || id.chars().any(char::is_whitespace) {
            return Err(Error::invalid(
                "scale id",
                format!("{id:?} must be non-empty without ':' or whitespace"),
            ));
        }
        if levels.iter().any(Vec::is_empty) {
            return Err(Error::invalid("scale", format!("{id}: empty level")));
        }
        let mut seen = HashSet::new();
        for adj in levels.iter().flatten() {
            if !seen.insert(adj) {
                return Err(Error::invalid(
                    "scale",
                    format!("{id}: duplicate adjective {adj}"),
                ));
            }
        }
        if seen.len() < 2 {
            return Err(Error::invalid(
                "scale",
                format!("{id}: fewer than 2 adjectives"),
            ));
        }
        Ok(Scale { id, levels })
    }

    /// Builds a tie-free scale from adjectives listed mildest first.
    pub fn from_order(id: impl Into<String>, forms: &[&str]) -> Result<Self> {
        let levels = forms
            .iter()
            .map(|f| Adjective::new(f).map(|a| vec![a]))
            .collect::<Result<_>>()?;
        Scale::new(id, levels)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn levels(&self) -> &[Vec<Adjective>] {
        &self.levels
    }

    /// All adjectives, mildest level first, file order within a level.
    pub fn adjectives(&self) -> impl Iterator<Item = &Adjective> {
        self.levels.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, adj: &Adjective) -> bool {
        self.level_of(adj).is_some()
    }

    pub fn level_of(&self, adj: &Adjective) -> Option<usize> {
        self.levels.iter().position(|l| l.contains(adj))
    }

    /// First-listed member of the mildest level.
    pub fn mild(&self) -> &Adjective {
        &self.levels[0][0]
    }

    /// First-listed member of the most extreme level.
    pub fn extreme(&self) -> &Adjective {
        &self.levels[self.levels.len() - 1][0]
    }

    /// Gold relation of `a` relative to `b`, or `None` if either is absent.
    pub fn relation(&self, a: &Adjective, b: &Adjective) -> Option<Relation> {
        Some(Relation::from_levels(self.level_of(a)?, self.level_of(b)?))
    }

    /// Number of unordered adjective pairs, `n(n-1)/2`.
    pub fn pair_count(&self) -> usize {
        let n = self.len();
        n * (n - 1) / 2
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        for (i, level) in self.levels.iter().enumerate() {
            if i > 0 {
                f.write_str(" < ")?;
            }
            for (j, adj) in level.iter().enumerate() {
                if j > 0 {
                    f.write_str(" = ")?;
                }
                write!(f, "{adj}")?;
            }
        }
        Ok(())
    }
}

/// One relation per unordered pair, keyed in scale order (earlier-listed first).
pub fn gold_relations(scale: &Scale) -> BTreeMap<(Adjective, Adjective), Relation> {
    let adjs: Vec<(&Adjective, usize)> = scale
        .levels
        .iter()
        .enumerate()
        .flat_map(|(i, l)| l.iter().map(move |a| (a, i)))
        .collect();
    let mut out = BTreeMap::new();
    for (i, (a, la)) in adjs.iter().enumerate() {
        for (b, lb) in &adjs[i + 1..] {
            out.insert(((*a).clone(), (*b).clone()), Relation::from_levels(*la, *lb));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    scales: Vec<Scale>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, scales: Vec<Scale>) -> Result<Self> {
        let mut ids = HashSet::new();
        for s in &scales {
            if !ids.insert(s.id()) {
                return Err(Error::invalid(
                    "dataset",
                    format!("duplicate scale id {}", s.id()),
                ));
            }
        }
        Ok(Dataset {
            name: name.into(),
            scales,
        })
    }

    pub fn scales(&self) -> &[Scale] {
        &self.scales
    }

    pub fn get(&self, id: &str) -> Option<&Scale> {
        self.scales.iter().find(|s| s.id() == id)
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Every adjective in any scale.
    pub fn vocabulary(&self) -> HashSet<&Adjective> {
        self.scales.iter().flat_map(Scale::adjectives).collect()
    }

    /// Scales that contain `adj`.
    pub fn scales_with<'a>(&'a self, adj: &'a Adjective) -> impl Iterator<Item = &'a Scale> {
        self.scales.iter().filter(move |s| s.contains(adj))
    }

    /// Serializes in the line format accepted by [`parse_scale_file`].
    pub fn to_scale_file(&self) -> String {
        let mut out = String::new();
        for s in &self.scales {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        parse_scale_file(&name, &text)
    }
}

pub fn parse_scale_file(name: &str, text: &str) -> Result<Dataset> {
    let mut scales = Vec::new();
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let scale = parse_scale_line(line).map_err(|e| match e {
            Error::Invalid { msg, .. } => Error::parse("scale file", lineno, msg),
            other => other,
        })?;
        if let Some(prev) = ids.insert(scale.id().to_string(), lineno) {
            return Err(Error::parse(
                "scale file",
                lineno,
                format!("scale id {} already defined on line {prev}", scale.id()),
            ));
        }
        scales.push(scale);
    }
    Dataset::new(name, scales)
}

fn parse_scale_line(line: &str) -> Result<Scale> {
    let (id, body) = line
        .split_once(':')
        .ok_or_else(|| Error::invalid("scale", "expected `id: adj < adj ...`"))?;
    let mut levels = Vec::new();
    for level in body.split('<') {
        let group = level
            .split('=')
            .map(|f| Adjective::new(f.trim()))
            .collect::<Result<Vec<_>>>()?;
        levels.push(group);
    }
    Scale::new(id.trim(), levels)
}

/// Source scales whose mildest and most extreme anchors both stay clear of
/// every adjective in `eval`.
pub fn lexical_split(source: &Dataset, eval: &Dataset) -> Dataset {
    let vocab = eval.vocabulary();
    let scales = source
        .scales
        .iter()
        .filter(|s| !vocab.contains(s.mild()) && !vocab.contains(s.extreme()))
        .cloned()
        .collect();
    Dataset {
        name: source.name.clone(),
        scales,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adj(s: &str) -> Adjective {
        Adjective::new(s).unwrap()
    }

    #[test]
    fn parses_total_order() {
        let d = parse_scale_file("t", "s1: damp < moist < wet\n").unwrap();
        let s = &d.scales()[0];
        assert_eq!(s.id(), "s1");
        assert_eq!(
            s.levels(),
            &[vec![adj("damp")], vec![adj("moist")], vec![adj("wet")]]
        );
    }

    #[test]
    fn parses_ties() {
        let d = parse_scale_file("t", "s2: scary = frightening < terrifying").unwrap();
        let s = &d.scales()[0];
        assert_eq!(
            s.levels(),
            &[vec![adj("scary"), adj("frightening")], vec![adj("terrifying")]]
        );
        assert_eq!(s.mild(), &adj("scary"));
        assert_eq!(s.extreme(), &adj("terrifying"));
    }

    #[test]
    fn rejects_single_adjective() {
        let err = parse_scale_file("t", "# header\ns3: good").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_duplicate_adjective() {
        let err = parse_scale_file("t", "s: big < large < big").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn rejects_duplicate_scale_id() {
        let err = parse_scale_file("t", "s: a < b\ns: c < d").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn skips_comments_and_blank_lines_and_lowercases() {
        let d = parse_scale_file("t", "\n# x\n  s:  Big<  HUGE \n\n").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.scales()[0].to_string(), "s: big < huge");
    }

    #[test]
    fn hyphenated_adjectives_are_fine() {
        let d = parse_scale_file("t", "s: well-written < great").unwrap();
        assert_eq!(d.scales()[0].mild().as_str(), "well-written");
    }

    #[test]
    fn gold_relations_total_order() {
        let s = Scale::from_order("s", &["damp", "moist", "wet"]).unwrap();
        let rel = gold_relations(&s);
        assert_eq!(rel.len(), 3);
        assert_eq!(rel[&(adj("damp"), adj("moist"))], Relation::Less);
        assert_eq!(rel[&(adj("damp"), adj("wet"))], Relation::Less);
        assert_eq!(rel[&(adj("moist"), adj("wet"))], Relation::Less);
    }

    #[test]
    fn gold_relations_with_tie() {
        let d = parse_scale_file("t", "s: scary = frightening < terrifying").unwrap();
        let rel = gold_relations(&d.scales()[0]);
        assert_eq!(rel.len(), 3);
        assert_eq!(rel[&(adj("scary"), adj("frightening"))], Relation::Equal);
        assert_eq!(rel[&(adj("scary"), adj("terrifying"))], Relation::Less);
        assert_eq!(rel[&(adj("frightening"), adj("terrifying"))], Relation::Less);
    }

    #[test]
    fn gold_relations_singleton_levels() {
        let s = Scale::from_order("s", &["a", "b"]).unwrap();
        let rel = gold_relations(&s);
        assert_eq!(rel.into_iter().collect::<Vec<_>>(), vec![((adj("a"), adj("b")), Relation::Less)]);
    }

    #[test]
    fn relation_query_is_antisymmetric() {
        let s = Scale::from_order("s", &["a", "b"]).unwrap();
        assert_eq!(s.relation(&adj("a"), &adj("b")), Some(Relation::Less));
        assert_eq!(s.relation(&adj("b"), &adj("a")), Some(Relation::Greater));
        assert_eq!(s.relation(&adj("a"), &adj("zzz")), None);
    }

    #[test]
    fn lexical_split_drops_scales_with_shared_anchor() {
        let source = parse_scale_file("src", "p: good < great < awesome\nw: damp < moist < wet").unwrap();
        let eval = parse_scale_file("ev", "x: cool < awesome").unwrap();
        let split = lexical_split(&source, &eval);
        let ids: Vec<_> = split.scales().iter().map(Scale::id).collect();
        assert_eq!(ids, vec!["w"]);
    }

    #[test]
    fn lexical_split_keeps_scale_sharing_only_middle_word() {
        let source = parse_scale_file("src", "w: damp < moist < wet").unwrap();
        let eval = parse_scale_file("ev", "x: moist < soggy").unwrap();
        assert!(eval.vocabulary().contains(&adj("moist")));
        assert!(!eval.vocabulary().contains(&adj("damp")));
        assert!(!eval.vocabulary().contains(&adj("wet")));
        assert_eq!(lexical_split(&source, &eval), source);
    }

    #[test]
    fn lexical_split_with_empty_eval_is_identity() {
        let source = parse_scale_file("src", "w: damp < moist < wet").unwrap();
        let eval = Dataset::new("ev", vec![]).unwrap();
        assert_eq!(lexical_split(&source, &eval), source);
    }

    #[test]
    fn lexical_split_of_self_is_empty() {
        let d = parse_scale_file("d", "a: x < y\nb: p = q < r < s").unwrap();
        assert!(lexical_split(&d, &d).is_empty());
    }
}
