//! Minimal CoNLL-U reader.
//!
//! Only the columns needed for pattern matching are kept. Multiword token
//! ranges (`3-4`) and empty nodes (`5.1`) are skipped, so token positions
//! line up with a pre-tokenized input sentence.

use std::io::BufRead;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub form: String,
    pub lemma: String,
    pub upos: String,
    /// 1-based head index, 0 for the root.
    pub head: usize,
    pub deprel: String,
}

impl Token {
    /// Relation without its language-specific subtype (`nmod:poss` -> `nmod`).
    pub fn base_rel(&self) -> &str {
        self.deprel.split(':').next().unwrap_or(&self.deprel)
    }

    pub fn lower_form(&self) -> String {
        self.form.to_lowercase()
    }

    pub fn is_nominal(&self) -> bool {
        matches!(self.upos.as_str(), "NOUN" | "PROPN")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedSentence {
    pub sent_id: Option<String>,
    pub text: Option<String>,
    pub tokens: Vec<Token>,
}

impl ParsedSentence {
    /// Exactly one root and every head within the sentence.
    pub fn validate(&self) -> Result<()> {
        let what = self.sent_id.as_deref().unwrap_or("<unnamed>");
        let roots = self.tokens.iter().filter(|t| t.head == 0).count();
        if roots != 1 {
            return Err(Error::invalid(
                "parse",
                format!("{what}: expected exactly one root, found {roots}"),
            ));
        }
        if let Some((i, t)) = self
            .tokens
            .iter()
            .enumerate()
            .find(|(_, t)| t.head > self.tokens.len())
        {
            return Err(Error::invalid(
                "parse",
                format!("{what}: token {} has head {} out of range", i + 1, t.head),
            ));
        }
        Ok(())
    }

    /// 0-based head position of token `i`, `None` for the root.
    pub fn head_of(&self, i: usize) -> Option<usize> {
        self.tokens[i].head.checked_sub(1)
    }

    /// 0-based positions of the dependents of token `i`.
    pub fn children(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.tokens
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.head == i + 1)
            .map(|(j, _)| j)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

pub fn parse_conllu<R: BufRead>(reader: R) -> Result<Vec<ParsedSentence>> {
    const WHAT: &str = "CoNLL-U";
    let mut out = Vec::new();
    let mut cur = ParsedSentence::default();
    let mut open = false;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            if open {
                out.push(std::mem::take(&mut cur));
                open = false;
            }
            continue;
        }
        open = true;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                match k.trim() {
                    "sent_id" => cur.sent_id = Some(v.trim().to_string()),
                    "text" => cur.text = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::parse(
                WHAT,
                lineno,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| Error::parse(WHAT, lineno, format!("bad token id {:?}", cols[0])))?;
        if id != cur.tokens.len() + 1 {
            return Err(Error::parse(
                WHAT,
                lineno,
                format!("token id {id} out of sequence"),
            ));
        }
        let head: usize = cols[6]
            .parse()
            .map_err(|_| Error::parse(WHAT, lineno, format!("bad head {:?}", cols[6])))?;
        cur.tokens.push(Token {
            form: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            head,
            deprel: cols[7].to_string(),
        });
    }
    if open {
        out.push(cur);
    }
    Ok(out)
}
