use serde::{Deserialize, Serialize};

use super::instance::{split_affixes, Instance};
use crate::error::{Error, Result};
use crate::scales::{Adjective, Scale};

/// An instance sentence with its target replaced by a scale-mate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub adjective: Adjective,
    pub tokens: Vec<String>,
}

/// One sentence per scale-mate of the instance's target, in scale order.
///
/// Punctuation glued to the target token is kept, as is an initial capital.
/// An indefinite article directly before the target is set to `an` before a
/// vowel-initial substitute and `a` otherwise.
pub fn generate_substitutions(instance: &Instance, scale: &Scale) -> Result<Vec<Substitution>> {
    let target = instance
        .target()
        .filter(|t| scale.contains(t))
        .ok_or_else(|| {
            Error::invalid(
                "substitution",
                format!(
                    "{}: target {:?} is not on scale {}",
                    instance.id,
                    instance.tokens[instance.target_index],
                    scale.id()
                ),
            )
        })?;
    Ok(scale
        .adjectives()
        .filter(|b| **b != target)
        .map(|b| Substitution {
            adjective: b.clone(),
            tokens: substitute(instance, b),
        })
        .collect())
}

/// Tokens of `instance` with the target set to `adj` (article repaired).
pub fn substitute(instance: &Instance, adj: &Adjective) -> Vec<String> {
    let mut tokens = instance.tokens.clone();
    let t = instance.target_index;
    let (pre, core, post) = split_affixes(&instance.tokens[t]);
    tokens[t] = format!("{pre}{}{post}", match_initial_case(core, adj.as_str()));
    if t > 0 {
        if let Some(fixed) = repair_article(&tokens[t - 1], adj.starts_with_vowel()) {
            tokens[t - 1] = fixed;
        }
    }
    tokens
}

fn match_initial_case(original: &str, replacement: &str) -> String {
    if original.chars().next().is_some_and(char::is_uppercase) {
        let mut chars = replacement.chars();
        match chars.next() {
            Some(c) => c.to_uppercase().chain(chars).collect(),
            None => String::new(),
        }
    } else {
        replacement.to_string()
    }
}

fn repair_article(token: &str, vowel: bool) -> Option<String> {
    let (pre, core, post) = split_affixes(token);
    if !(core.eq_ignore_ascii_case("a") || core.eq_ignore_ascii_case("an")) {
        return None;
    }
    let article = if vowel { "an" } else { "a" };
    Some(format!("{pre}{}{post}", match_initial_case(core, article)))
}
