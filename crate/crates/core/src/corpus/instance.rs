use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scales::Adjective;

/// A corpus sentence with one target adjective position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub tokens: Vec<String>,
    pub target_index: usize,
    pub source: String,
}

impl Instance {
    pub fn new(id: String, tokens: Vec<String>, target_index: usize, source: String) -> Result<Self> {
        if target_index >= tokens.len() {
            return Err(Error::invalid(
                "instance",
                format!("{id}: target_index {target_index} out of range"),
            ));
        }
        Ok(Instance {
            id,
            tokens,
            target_index,
            source,
        })
    }

    /// The target token lowercased with surrounding punctuation removed.
    pub fn target(&self) -> Option<Adjective> {
        token_adjective(&self.tokens[self.target_index])
    }

    /// Identifier of the source sentence shared by every instance drawn
    /// from it (`source:line`).
    pub fn sentence_key(&self) -> &str {
        self.id.rsplit_once(':').map_or(&self.id, |(k, _)| k)
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Splits a whitespace token into leading punctuation, word core and
/// trailing punctuation (`"(damp,"` -> `("(", "damp", ",")`).
pub(crate) fn split_affixes(token: &str) -> (&str, &str, &str) {
    let is_punct = |c: char| c.is_ascii_punctuation() && c != '-';
    let core_start = token.find(|c: char| !is_punct(c)).unwrap_or(token.len());
    let core_end = token
        .rfind(|c: char| !is_punct(c))
        .map(|i| i + token[i..].chars().next().map_or(1, char::len_utf8))
        .unwrap_or(core_start)
        .max(core_start);
    (&token[..core_start], &token[core_start..core_end], &token[core_end..])
}

pub(crate) fn token_adjective(token: &str) -> Option<Adjective> {
    let (_, core, _) = split_affixes(token);
    Adjective::new(core).ok()
}

/// Scans one-sentence-per-line text for whole-token, case-insensitive
/// matches of `adjectives`, keeping at most `cap` instances per adjective
/// in stream order. Ids are `source:line:token`, line 1-based.
pub fn collect_instances<R: BufRead>(
    corpus: R,
    source: &str,
    adjectives: &HashSet<Adjective>,
    cap: usize,
) -> Result<Vec<Instance>> {
    if cap == 0 {
        return Err(Error::invalid("cap", "must be at least 1"));
    }
    let mut counts: HashMap<&Adjective, usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, line) in corpus.lines().enumerate() {
        let line = line?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        for (t, tok) in tokens.iter().enumerate() {
            let Some(adj) = token_adjective(tok) else {
                continue;
            };
            let Some(key) = adjectives.get(&adj) else {
                continue;
            };
            let n = counts.entry(key).or_default();
            if *n >= cap {
                continue;
            }
            *n += 1;
            out.push(Instance {
                id: format!("{source}:{}:{t}", i + 1),
                tokens: tokens.iter().map(|s| s.to_string()).collect(),
                target_index: t,
                source: source.to_string(),
            });
        }
    }
    Ok(out)
}

pub fn write_instances<W: Write>(mut out: W, instances: &[Instance]) -> Result<()> {
    for inst in instances {
        serde_json::to_writer(&mut out, inst)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_instances<R: BufRead>(reader: R) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let inst: Instance = serde_json::from_str(&line)
            .map_err(|e| Error::parse("instance file", i + 1, e.to_string()))?;
        if inst.target_index >= inst.tokens.len() {
            return Err(Error::parse(
                "instance file",
                i + 1,
                format!("{}: target_index out of range", inst.id),
            ));
        }
        out.push(inst);
    }
    Ok(out)
}
