//! Hearst-pattern detection over dependency parses.
//!
//! Sentences that state an is-a relation ("viruses and other deceptive
//! software") make poor substitution contexts: swapping the adjective changes
//! which things are being classified. Seven lexico-syntactic patterns are
//! recognized, each anchored on a trigger word and confirmed by the
//! dependency arcs that link the trigger to the two noun heads.

use std::fmt;

use super::conllu::ParsedSentence;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HearstPattern {
    /// `NP and other NP`
    AndOther,
    /// `NP or other NP`
    OrOther,
    /// `NP such as NP`
    SuchAs,
    /// `such NP as NP`
    SuchNpAs,
    /// `NP, including NP`
    Including,
    /// `NP, especially NP`
    Especially,
    /// `NP like NP`
    Like,
}

impl HearstPattern {
    pub const ALL: [HearstPattern; 7] = [
        HearstPattern::AndOther,
        HearstPattern::OrOther,
        HearstPattern::SuchAs,
        HearstPattern::SuchNpAs,
        HearstPattern::Including,
        HearstPattern::Especially,
        HearstPattern::Like,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HearstPattern::AndOther => "and-other",
            HearstPattern::OrOther => "or-other",
            HearstPattern::SuchAs => "such-as",
            HearstPattern::SuchNpAs => "such-np-as",
            HearstPattern::Including => "including",
            HearstPattern::Especially => "especially",
            HearstPattern::Like => "like",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for HearstPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A pattern occurrence. Positions are 0-based token indices of the two
/// noun heads; `first` precedes the trigger in surface order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HearstMatch {
    pub pattern: HearstPattern,
    pub trigger: usize,
    pub first: usize,
    pub second: usize,
}

impl HearstMatch {
    pub fn involves(&self, noun: usize) -> bool {
        self.first == noun || self.second == noun
    }
}

/// Which matches cause a sentence to be dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HearstScope {
    /// Only matches where the target adjective modifies one of the two nouns.
    #[default]
    TargetInvolving,
    /// Any match anywhere in the sentence.
    AnyMatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterDecision {
    Keep,
    Drop(HearstPattern),
}

pub fn hearst_filter(
    parsed: &ParsedSentence,
    target_index: usize,
    scope: HearstScope,
) -> Result<FilterDecision> {
    parsed.validate()?;
    if target_index >= parsed.len() {
        return Err(Error::invalid(
            "parse",
            format!(
                "target index {target_index} outside sentence of {} tokens",
                parsed.len()
            ),
        ));
    }
    let modified = modified_noun(parsed, target_index);
    let hit = find_matches(parsed).into_iter().find(|m| match scope {
        HearstScope::AnyMatch => true,
        HearstScope::TargetInvolving => modified.is_some_and(|n| m.involves(n)),
    });
    Ok(hit.map_or(FilterDecision::Keep, |m| FilterDecision::Drop(m.pattern)))
}

/// Noun that the adjective at `i` modifies, following adjective
/// coordination (`deceptive and harmful software`).
pub fn modified_noun(s: &ParsedSentence, mut i: usize) -> Option<usize> {
    let mut hops = 0;
    while s.tokens[i].base_rel() == "conj" && hops < s.len() {
        let h = s.head_of(i)?;
        if s.tokens[h].upos != "ADJ" {
            break;
        }
        i = h;
        hops += 1;
    }
    if s.tokens[i].base_rel() != "amod" {
        return None;
    }
    s.head_of(i).filter(|&h| s.tokens[h].is_nominal())
}

/// All pattern occurrences, ordered by trigger position.
pub fn find_matches(s: &ParsedSentence) -> Vec<HearstMatch> {
    let mut out = Vec::new();
    for i in 0..s.len() {
        let form = s.tokens[i].lower_form();
        let found = match form.as_str() {
            "other" => match_other(s, i),
            "such" => match_such_as(s, i).or_else(|| match_such_np_as(s, i)),
            "including" => match_including(s, i),
            "especially" => match_marked(s, i, HearstPattern::Especially, &["advmod"]),
            "like" => match_marked(s, i, HearstPattern::Like, &["case", "mark"]),
            _ => None,
        };
        out.extend(found);
    }
    out
}

fn nominal_head(s: &ParsedSentence, i: usize) -> Option<usize> {
    s.head_of(i).filter(|&h| s.tokens[h].is_nominal())
}

/// `NP1 (and|or) other NP2`: `other` modifies NP2, the conjunction is NP2's
/// `cc` dependent, and NP2 is conjoined to NP1.
fn match_other(s: &ParsedSentence, i: usize) -> Option<HearstMatch> {
    let cc = i.checked_sub(1)?;
    let pattern = match s.tokens[cc].lower_form().as_str() {
        "and" => HearstPattern::AndOther,
        "or" => HearstPattern::OrOther,
        _ => return None,
    };
    let second = nominal_head(s, i)?;
    if s.head_of(cc) != Some(second) || s.tokens[second].base_rel() != "conj" {
        return None;
    }
    let first = nominal_head(s, second)?;
    (first < cc).then_some(HearstMatch {
        pattern,
        trigger: i,
        first,
        second,
    })
}

/// `NP1 such as NP2`: the fixed expression marks NP2, which depends on NP1.
fn match_such_as(s: &ParsedSentence, i: usize) -> Option<HearstMatch> {
    let as_ = i + 1;
    if as_ >= s.len() || s.tokens[as_].lower_form() != "as" {
        return None;
    }
    let second = [i, as_]
        .into_iter()
        .find_map(|t| nominal_head(s, t).filter(|&h| h > as_))?;
    let first = nominal_head(s, second)?;
    (first < i).then_some(HearstMatch {
        pattern: HearstPattern::SuchAs,
        trigger: i,
        first,
        second,
    })
}

/// `such NP1 as NP2`: `such` modifies NP1 and a later `as` marks NP2, a
/// dependent of NP1.
fn match_such_np_as(s: &ParsedSentence, i: usize) -> Option<HearstMatch> {
    let first = nominal_head(s, i).filter(|&h| h > i)?;
    (first + 1..s.len())
        .filter(|&j| s.tokens[j].lower_form() == "as")
        .find_map(|j| {
            let second = nominal_head(s, j).filter(|&h| h > j)?;
            (s.head_of(second) == Some(first)).then_some(HearstMatch {
                pattern: HearstPattern::SuchNpAs,
                trigger: i,
                first,
                second,
            })
        })
}

/// `NP1, including NP2`, parsed either with `including` as a case marker of
/// NP2 or as a participle heading NP2.
fn match_including(s: &ParsedSentence, i: usize) -> Option<HearstMatch> {
    if let Some(m) = match_marked(s, i, HearstPattern::Including, &["case", "mark"]) {
        return Some(m);
    }
    let first = nominal_head(s, i).filter(|&h| h < i)?;
    let second = s
        .children(i)
        .find(|&c| c > i && s.tokens[c].is_nominal() && matches!(s.tokens[c].base_rel(), "obj" | "nmod" | "obl"))?;
    Some(HearstMatch {
        pattern: HearstPattern::Including,
        trigger: i,
        first,
        second,
    })
}

/// Trigger attached to NP2 with one of `rels`; NP2 depends on a preceding NP1.
fn match_marked(
    s: &ParsedSentence,
    i: usize,
    pattern: HearstPattern,
    rels: &[&str],
) -> Option<HearstMatch> {
    if !rels.contains(&s.tokens[i].base_rel()) {
        return None;
    }
    let second = nominal_head(s, i).filter(|&h| h > i)?;
    let first = nominal_head(s, second).filter(|&h| h < i)?;
    Some(HearstMatch {
        pattern,
        trigger: i,
        first,
        second,
    })
}
