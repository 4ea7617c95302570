use std::collections::BTreeMap;

use fixline_lang::patterns::DEFAULT_TEMPLATES;
use fixline_lang::{generate_corpus, match_pattern, parse_function, DefectLabel, PatternError, SynthSpec};

fn spec(count: usize, seed: u64) -> SynthSpec {
    SynthSpec { seed, count_per_label: count, ..SynthSpec::default() }
}

#[test]
fn every_injected_label_round_trips() {
    for seed in [0, 1, 7] {
        let corpus = generate_corpus(&spec(3, seed)).unwrap();
        for t in corpus.iter().filter(|t| !t.label.is_clean()) {
            let buggy = parse_function(&t.buggy_src).unwrap();
            let fixed = parse_function(&t.fixed_src).unwrap();
            let m = match_pattern(&buggy, &fixed).unwrap().expect("a pattern fires");
            assert_eq!(m.label, t.label, "{}", t.id);
        }
    }
}

#[test]
fn all_sixteen_patterns_and_balanced_clean_share() {
    let corpus = generate_corpus(&spec(2, 0)).unwrap();
    let mut counts: BTreeMap<DefectLabel, usize> = BTreeMap::new();
    for t in &corpus {
        *counts.entry(t.label).or_default() += 1;
    }
    assert_eq!(counts.len(), 17);
    assert!(DefectLabel::patterns().iter().all(|l| counts[l] == 2));
    assert_eq!(counts[&DefectLabel::Clean], 32);
}

#[test]
fn clean_triples_never_match() {
    let corpus = generate_corpus(&spec(2, 5)).unwrap();
    for t in corpus.iter().filter(|t| t.label.is_clean()) {
        let clean = parse_function(&t.clean_src).unwrap();
        let buggy = parse_function(&t.buggy_src).unwrap();
        assert!(!matches!(match_pattern(&clean, &buggy), Ok(Some(_))), "{}", t.id);
        assert_eq!(t.buggy_src, t.fixed_src);
        assert_ne!(t.clean_src, t.buggy_src);
    }
}

#[test]
fn emitted_triples_validate() {
    for t in generate_corpus(&spec(2, 3)).unwrap() {
        t.validate().unwrap_or_else(|e| panic!("{}: {e}", t.id));
    }
}

#[test]
fn generation_is_deterministic() {
    let render = |seed| generate_corpus(&spec(2, seed)).unwrap().iter().map(|t| t.to_json_line() + "\n").collect::<String>();
    assert_eq!(render(11), render(11));
    assert_ne!(render(11), render(12));
}

#[test]
fn skips_labels_without_templates_unless_strict() {
    // Two templates with no throws clause to remove and no `||` condition:
    // MISSING_THROWS_EXCEPTION and LESS_SPECIFIC_IF have no site.
    let templates = vec![DEFAULT_TEMPLATES[1].to_string(), DEFAULT_TEMPLATES[3].to_string(), DEFAULT_TEMPLATES[4].to_string(),
        "boolean ok(int a, int b) {\n    if (a > 0 && b > 0) {\n        return a.equals(b, true);\n    }\n    return false;\n}".to_string()];
    let lenient = SynthSpec { seed: 0, count_per_label: 2, templates: templates.clone(), clean_fraction: 0.5, strict: false };
    let corpus = generate_corpus(&lenient).unwrap();
    let defective = corpus.iter().filter(|t| !t.label.is_clean()).count();
    assert_eq!(defective, 28);
    assert_eq!(corpus.len() - defective, 28);
    let strict = SynthSpec { strict: true, ..lenient };
    assert!(matches!(generate_corpus(&strict), Err(PatternError::NoApplicableTemplate { .. })));
}
