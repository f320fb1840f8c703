use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::PathBuf;

use adjscale::corpus::conllu::{parse_conllu, ParsedSentence};
use adjscale::corpus::hearst::{self, FilterDecision, HearstScope};
use adjscale::corpus::{collect_instances, generate_substitutions, read_instances, write_instances, Instance};
use adjscale::scales::{Adjective, Dataset};
use anyhow::anyhow;
use clap::{Args, ValueEnum};
use log::{info, warn};
use serde::Serialize;

use crate::util::{check_input, check_output, file_stem, open, usage, write_atomic, CmdResult, Context};

#[derive(Args)]
#[command(args_override_self = true)]
pub struct CollectArgs {
    /// Corpus with one whitespace-tokenized sentence per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Scale files whose adjectives are searched for (repeatable).
    #[arg(long = "scales", required = true)]
    scales: Vec<PathBuf>,
    /// Instances kept per adjective, first come first served.
    #[arg(long, default_value_t = 1000)]
    cap: usize,
    /// Corpus name used in instance ids [default: corpus file stem].
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

pub fn collect(a: CollectArgs) -> CmdResult {
    check_input("corpus", &a.corpus)?;
    for s in &a.scales {
        check_input("scales", s)?;
    }
    if a.cap == 0 {
        return Err(usage("--cap must be at least 1"));
    }
    let source = a.source.clone().unwrap_or_else(|| file_stem(&a.corpus));
    if source.is_empty() || source.contains(char::is_whitespace) {
        return Err(usage(format!("--source {source:?} must be non-empty without whitespace")));
    }
    check_output("out", &a.out)?;

    let datasets = load_datasets(&a.scales)?;
    let adjectives: HashSet<Adjective> = datasets
        .iter()
        .flat_map(|d| d.vocabulary().into_iter().cloned())
        .collect();
    let instances = collect_instances(open(&a.corpus)?, &source, &adjectives, a.cap).with_file(&a.corpus)?;

    let mut counts: HashMap<Adjective, usize> = HashMap::new();
    for inst in &instances {
        if let Some(t) = inst.target() {
            *counts.entry(t).or_default() += 1;
        }
    }
    for d in &datasets {
        let uncovered: Vec<&str> = d
            .scales()
            .iter()
            .filter(|s| s.adjectives().any(|x| !counts.contains_key(x)))
            .map(|s| s.id())
            .collect();
        if !uncovered.is_empty() {
            info!("{}: {} scales have an adjective with no instances: {}", d.name, uncovered.len(), uncovered.join(", "));
        }
    }
    info!("collected {} instances for {} of {} adjectives", instances.len(), counts.len(), adjectives.len());
    write_atomic(&a.out, |w| Ok(write_instances(w, &instances)?))
}

#[derive(Args)]
#[command(args_override_self = true)]
pub struct SubstituteArgs {
    /// Instance file (JSON Lines).
    #[arg(long)]
    instances: PathBuf,
    /// Scale file defining the scale-mates.
    #[arg(long)]
    scales: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// One sentence of a substitution set. The original sentence is included
/// so each set covers every adjective of the scale.
#[derive(Serialize)]
struct SubstitutionRecord<'a> {
    id: &'a str,
    scale_id: &'a str,
    adjective: &'a Adjective,
    original: bool,
    tokens: &'a [String],
}

pub fn substitute(a: SubstituteArgs) -> CmdResult {
    check_input("instances", &a.instances)?;
    check_input("scales", &a.scales)?;
    check_output("out", &a.out)?;

    let dataset = Dataset::load(&a.scales).with_file(&a.scales)?;
    let instances = read_instances(open(&a.instances)?).with_file(&a.instances)?;
    let mut lines = Vec::new();
    let mut skipped = 0usize;
    for inst in &instances {
        let Some(target) = inst.target() else {
            skipped += 1;
            continue;
        };
        let scales: Vec<_> = dataset.scales_with(&target).collect();
        if scales.is_empty() {
            skipped += 1;
            continue;
        }
        for scale in scales {
            let subs = generate_substitutions(inst, scale)?;
            let mut subs = subs.iter();
            for adj in scale.adjectives() {
                let rec = if *adj == target {
                    SubstitutionRecord {
                        id: &inst.id,
                        scale_id: scale.id(),
                        adjective: adj,
                        original: true,
                        tokens: &inst.tokens,
                    }
                } else {
                    let s = subs.next().ok_or_else(|| anyhow!("substitutions out of step for {}", inst.id))?;
                    SubstitutionRecord {
                        id: &inst.id,
                        scale_id: scale.id(),
                        adjective: &s.adjective,
                        original: false,
                        tokens: &s.tokens,
                    }
                };
                lines.push(serde_json::to_string(&rec).map_err(anyhow::Error::from)?);
            }
        }
    }
    if skipped > 0 {
        warn!("{skipped} instances have a target on no scale of {}", dataset.name);
    }
    info!("wrote {} sentences for {} instances", lines.len(), instances.len() - skipped);
    write_atomic(&a.out, |w| {
        for l in &lines {
            writeln!(w, "{l}")?;
        }
        Ok(())
    })
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    /// Drop only when the target adjective modifies a pattern noun.
    Target,
    /// Drop on any pattern match in the sentence.
    Any,
}

#[derive(Args)]
#[command(args_override_self = true)]
pub struct HearstArgs {
    /// Instance file (JSON Lines).
    #[arg(long)]
    instances: PathBuf,
    /// CoNLL-U parses; `# sent_id` is the instance id or its sentence id.
    #[arg(long)]
    parses: PathBuf,
    #[arg(long, value_enum, default_value = "target")]
    scope: ScopeArg,
    /// Kept instances (JSON Lines).
    #[arg(long)]
    out: PathBuf,
    /// Also write `id<TAB>pattern` for every dropped instance.
    #[arg(long)]
    dropped: Option<PathBuf>,
}

pub fn hearst_filter(a: HearstArgs) -> CmdResult {
    check_input("instances", &a.instances)?;
    check_input("parses", &a.parses)?;
    check_output("out", &a.out)?;
    if let Some(d) = &a.dropped {
        check_output("dropped", d)?;
    }
    let scope = match a.scope {
        ScopeArg::Target => HearstScope::TargetInvolving,
        ScopeArg::Any => HearstScope::AnyMatch,
    };

    let instances = read_instances(open(&a.instances)?).with_file(&a.instances)?;
    let parses = parse_conllu(open(&a.parses)?).with_file(&a.parses)?;
    let mut by_id: HashMap<&str, &ParsedSentence> = HashMap::new();
    for p in &parses {
        let id = p
            .sent_id
            .as_deref()
            .ok_or_else(|| anyhow!("{}: sentence without # sent_id", a.parses.display()))?;
        if by_id.insert(id, p).is_some() {
            return Err(anyhow!("{}: duplicate sent_id {id}", a.parses.display()).into());
        }
    }

    let mut kept: Vec<Instance> = Vec::new();
    let mut dropped: Vec<(String, &'static str)> = Vec::new();
    let mut per_pattern: BTreeMap<&'static str, usize> = BTreeMap::new();
    for inst in instances {
        let parse = by_id
            .get(inst.id.as_str())
            .or_else(|| by_id.get(inst.sentence_key()))
            .ok_or_else(|| anyhow!("no parse for instance {}", inst.id))?;
        if parse.len() != inst.tokens.len() {
            return Err(anyhow!(
                "parse of {} has {} tokens, instance has {}",
                inst.id,
                parse.len(),
                inst.tokens.len()
            )
            .into());
        }
        match hearst::hearst_filter(parse, inst.target_index, scope).map_err(|e| anyhow!("{}: {e}", inst.id))? {
            FilterDecision::Keep => kept.push(inst),
            FilterDecision::Drop(p) => {
                *per_pattern.entry(p.name()).or_default() += 1;
                dropped.push((inst.id, p.name()));
            }
        }
    }
    for (p, n) in &per_pattern {
        info!("dropped {n} instances matching {p}");
    }
    info!("kept {} of {} instances", kept.len(), kept.len() + dropped.len());
    write_atomic(&a.out, |w| Ok(write_instances(w, &kept)?))?;
    if let Some(path) = &a.dropped {
        write_atomic(path, |w| {
            for (id, p) in &dropped {
                writeln!(w, "{id}\t{p}")?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

pub fn load_datasets(paths: &[PathBuf]) -> CmdResult<Vec<Dataset>> {
    paths.iter().map(|p| Dataset::load(p).with_file(p)).collect()
}
