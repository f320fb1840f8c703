#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use adjscale::corpus::conllu::parse_conllu;
use adjscale::corpus::hearst::{hearst_filter, FilterDecision, HearstScope};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn decision_name(d: FilterDecision) -> String {
    match d {
        FilterDecision::Keep => "keep".to_string(),
        FilterDecision::Drop(p) => format!("drop:{}", p.name()),
    }
}

/// Runs the hand-built Hearst fixture under `scope`. Returns the number of
/// sentences and one message per disagreement with the annotated decision.
pub fn run_hearst_fixture(scope: HearstScope) -> (usize, Vec<String>) {
    let text = std::fs::read_to_string(fixture("hearst_fixture.conllu")).unwrap();
    // `# key = value` comments per sent_id
    let mut meta: HashMap<String, HashMap<String, String>> = HashMap::new();
    let mut current = String::new();
    for line in text.lines() {
        let Some(comment) = line.strip_prefix("# ") else { continue };
        let Some((k, v)) = comment.split_once(" = ") else { continue };
        if k == "sent_id" {
            current = v.to_string();
        }
        meta.entry(current.clone()).or_default().insert(k.to_string(), v.to_string());
    }
    let key = match scope {
        HearstScope::TargetInvolving => "expect",
        HearstScope::AnyMatch => "expect_any",
    };
    let sentences = parse_conllu(text.as_bytes()).unwrap();
    let mut failures = Vec::new();
    for s in &sentences {
        let id = s.sent_id.clone().unwrap();
        let m = &meta[&id];
        let target: usize = m["target"].parse().unwrap();
        let got = decision_name(hearst_filter(s, target - 1, scope).unwrap());
        if got != m[key] {
            failures.push(format!("{id}: expected {}, got {got}", m[key]));
        }
    }
    (sentences.len(), failures)
}
