#[path = "support/oracles.rs"]
mod oracles;

use fixline_metrics::*;
use proptest::prelude::*;

#[test]
fn counts_and_macro_scores_match_oracle() {
    oracles::prf_cases().unwrap();
}

#[test]
fn binary_auc_matches_pair_enumeration() {
    oracles::binary_auc_cases().unwrap();
}

#[test]
fn multiclass_auc_matches_pair_enumeration() {
    oracles::multiclass_auc_cases().unwrap();
}

#[test]
fn bleu_matches_greedy_matching_oracle() {
    oracles::bleu_cases().unwrap();
}

#[test]
fn exact_match_matches_token_comparison() {
    oracles::exact_match_cases().unwrap();
}

#[test]
fn worked_examples() {
    oracles::worked_examples().unwrap();
}

#[test]
fn oracle_agrees_on_a_hand_case() {
    assert_eq!(oracles::naive_auc(&[0.9, 0.8, 0.3, 0.2], &[true, false, true, false]), 0.75);
    assert_eq!(oracles::naive_prf(&[0, 0, 1], &[0, 1, 1], 1), (1.0, 0.5, 2.0 / 3.0));
}

proptest! {
    #[test]
    fn auc_is_rank_invariant(scores in prop::collection::vec(-5.0f64..5.0, 2..20), flips in prop::collection::vec(any::<bool>(), 2..20)) {
        let n = scores.len().min(flips.len());
        let mut labels = flips[..n].to_vec();
        labels[0] = true;
        labels[1] = false;
        let a = auc_binary(&scores[..n], &labels).unwrap();
        let t: Vec<f64> = scores[..n].iter().map(|x| x.exp() * 3.0 + 1.0).collect();
        prop_assert!((a - auc_binary(&t, &labels).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn bleu_is_bounded_and_reflexive(c in prop::collection::vec(0u8..5, 1..15), r in prop::collection::vec(0u8..5, 1..15)) {
        let cs: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        let rs: Vec<String> = r.iter().map(|x| x.to_string()).collect();
        let cfg = BleuConfig::default();
        let s = bleu(&cs, &rs, &cfg).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&s));
        if rs.len() >= 4 {
            prop_assert!((bleu(&rs, &rs, &cfg).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
