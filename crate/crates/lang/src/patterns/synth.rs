use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ast::NodeKind;
use crate::dfg::extract_variables;
use crate::error::PatternError;
use crate::label::DefectLabel;
use crate::lexer::TokenKind;
use crate::parser::parse_function;
use crate::patterns::inject::{apply_edit, inject_defect, Edit};
use crate::patterns::match_pattern;
use crate::patterns::templates::DEFAULT_TEMPLATES;
use crate::triple::{changed_lines, content_hash, FunctionTriple};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub seed: u64,
    pub count_per_label: usize,
    pub templates: Vec<String>,
    /// Share of clean triples in the whole corpus.
    pub clean_fraction: f64,
    /// Fail when a label has no viable template instead of skipping it.
    pub strict: bool,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            count_per_label: 1,
            templates: DEFAULT_TEMPLATES.iter().map(|s| s.to_string()).collect(),
            clean_fraction: 0.5,
            strict: true,
        }
    }
}

/// Replacement names for benign renames.
const RENAME_POOL: &[&str] = &["amount", "input", "other", "result", "item", "current", "target", "entry", "next", "data"];

/// A consistent rename of one variable. Returns `None` when no variable can
/// be renamed without the change reading as a defect.
pub fn benign_rename<R: Rng>(template: &str, rng: &mut R) -> Option<String> {
    let decl = parse_function(template).ok()?;
    let vars = extract_variables(&decl);
    let mut names: Vec<&str> = Vec::new();
    for v in &vars {
        if !names.contains(&v.name.as_str()) {
            names.push(&v.name);
        }
    }
    let idents: Vec<&str> = decl.tokens.iter().filter(|t| t.kind == TokenKind::Identifier).map(|t| t.text.as_str()).collect();
    let declared: Vec<&str> = {
        let mut d: Vec<&str> = decl.params.iter().map(|p| p.name.as_str()).collect();
        decl.body.walk(&mut |n| {
            if n.kind == NodeKind::Declarator {
                d.push(&n.text);
            }
        });
        d
    };
    let mut choices: Vec<(&str, &str)> = Vec::new();
    for n in names.iter().filter(|n| declared.contains(n)) {
        for r in RENAME_POOL.iter().filter(|r| !idents.contains(r)) {
            choices.push((n, r));
        }
    }
    choices.shuffle(rng);
    for (from, to) in choices {
        let mut out = template.to_string();
        // Rewrite right to left so earlier offsets stay valid.
        for v in vars.iter().rev().filter(|v| v.name == from) {
            let i = v.token_index;
            out = apply_edit(&out, &decl.tokens, &Edit { span: (i, i + 1), text: to.to_string() });
        }
        let Ok(renamed) = parse_function(&out) else { continue };
        if !matches!(match_pattern(&decl, &renamed), Ok(Some(_))) {
            return Some(out);
        }
    }
    None
}

fn clean_triple(template: &str, buggy_src: String) -> FunctionTriple {
    let (_, line) = changed_lines(template, &buggy_src).unwrap_or((1, 1));
    let name = parse_function(template).map(|d| d.name).unwrap_or_default();
    FunctionTriple {
        id: content_hash(&[template, &buggy_src])[..16].to_string(),
        repo: "synthetic".into(),
        fix_commit: content_hash(&[&buggy_src])[..40].to_string(),
        inducing_commit: None,
        label: DefectLabel::Clean,
        clean_src: template.to_string(),
        fixed_src: buggy_src.clone(),
        buggy_src,
        buggy_line: line,
        fixed_line: line,
        file_path: format!("synthetic/{name}.java"),
    }
}

/// Duplicate draws tolerated per label before duplicates are accepted.
const MAX_REPEATS: usize = 32;

/// Number of clean triples that makes them `clean_fraction` of the corpus.
pub fn clean_count(defective: usize, clean_fraction: f64) -> usize {
    if clean_fraction <= 0.0 {
        return 0;
    }
    (defective as f64 * clean_fraction / (1.0 - clean_fraction)).round() as usize
}

/// Generates a labelled corpus: `count_per_label` defective triples for
/// every pattern that some template admits, followed by the clean triples.
/// Each label draws from its own random stream derived from the seed.
pub fn generate_corpus(spec: &SynthSpec) -> Result<Vec<FunctionTriple>, PatternError> {
    if spec.count_per_label == 0 {
        return Err(PatternError::InvalidSpec("count_per_label must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&spec.clean_fraction) {
        return Err(PatternError::InvalidSpec("clean_fraction must lie in [0, 1)".into()));
    }
    if spec.templates.is_empty() {
        return Err(PatternError::InvalidSpec("no templates".into()));
    }
    for t in &spec.templates {
        parse_function(t)?;
    }
    let mut out = Vec::new();
    for &label in DefectLabel::patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(label.id() as u64);
        let mut order: Vec<usize> = (0..spec.templates.len()).collect();
        order.shuffle(&mut rng);
        let mut made = Vec::new();
        let mut viable = vec![true; order.len()];
        let mut k = 0;
        let mut repeats = 0;
        while made.len() < spec.count_per_label && viable.iter().any(|v| *v) {
            let slot = k % order.len();
            k += 1;
            if !viable[slot] {
                continue;
            }
            match inject_defect(&spec.templates[order[slot]], label, &mut rng) {
                Ok(t) if repeats < MAX_REPEATS && made.iter().any(|m: &FunctionTriple| m.buggy_src == t.buggy_src) => {
                    repeats += 1;
                }
                Ok(t) => made.push(t),
                Err(_) => viable[slot] = false,
            }
        }
        if made.is_empty() {
            if spec.strict {
                return Err(PatternError::NoApplicableTemplate { label: label.to_string() });
            }
            continue;
        }
        for (i, mut t) in made.into_iter().enumerate() {
            t.id = format!("synth-{}-{i}", label.name().to_lowercase());
            out.push(t);
        }
    }
    let n_clean = clean_count(out.len(), spec.clean_fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(DefectLabel::Clean.id() as u64);
    let mut order: Vec<usize> = (0..spec.templates.len()).collect();
    order.shuffle(&mut rng);
    let mut made = 0;
    let mut misses = 0;
    let mut k = 0;
    while made < n_clean {
        let template = &spec.templates[order[k % order.len()]];
        k += 1;
        match benign_rename(template, &mut rng) {
            Some(buggy) => {
                let mut t = clean_triple(template, buggy);
                t.id = format!("synth-clean-{made}");
                out.push(t);
                made += 1;
                misses = 0;
            }
            None => {
                misses += 1;
                if misses >= order.len() {
                    return Err(PatternError::NoApplicableTemplate { label: DefectLabel::Clean.to_string() });
                }
            }
        }
    }
    Ok(out)
}
