//! Deliberately naive reference computations and randomized comparisons
//! against them. Each check returns the first disagreement.

use fixline_metrics::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CASES: usize = 1000;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

fn ok<T>(r: Result<T, MetricError>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub fn naive_prf(pred: &[usize], gold: &[usize], k: usize) -> (f64, f64, f64) {
    let tp = (0..pred.len()).filter(|&i| pred[i] == k && gold[i] == k).count() as f64;
    let pp = pred.iter().filter(|&&p| p == k).count() as f64;
    let gp = gold.iter().filter(|&&g| g == k).count() as f64;
    let p = if pp > 0.0 { tp / pp } else { 0.0 };
    let r = if gp > 0.0 { tp / gp } else { 0.0 };
    let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f)
}

pub fn naive_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] && !labels[j] {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

pub fn naive_bleu(c: &[String], r: &[String]) -> f64 {
    let mut log_sum = 0.0;
    for n in 1..=4 {
        if c.len() < n {
            return 0.0;
        }
        let cg: Vec<&[String]> = c.windows(n).collect();
        let rg: Vec<&[String]> = r.windows(n).collect();
        let mut used = vec![false; rg.len()];
        let mut m = 0;
        for g in &cg {
            if let Some(pos) = (0..rg.len()).find(|&k| !used[k] && rg[k] == *g) {
                used[pos] = true;
                m += 1;
            }
        }
        if m == 0 {
            return 0.0;
        }
        log_sum += 0.25 * (m as f64 / cg.len() as f64).ln();
    }
    let bp = if c.len() > r.len() { 1.0 } else { (1.0 - r.len() as f64 / c.len() as f64).exp() };
    bp * log_sum.exp()
}

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

pub fn prf_cases() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..CASES {
        let n = rng.gen_range(1..30);
        let k = rng.gen_range(2..6);
        let pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let gold: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let mut classes: Vec<usize> = gold.clone();
        classes.sort();
        classes.dedup();
        let mut sums = (0.0, 0.0, 0.0);
        for &c in &classes {
            let counts = ok(class_counts(&pred, &gold, c))?;
            let tp = (0..n).filter(|&i| pred[i] == c && gold[i] == c).count();
            let fp = (0..n).filter(|&i| pred[i] == c && gold[i] != c).count();
            let fn_ = (0..n).filter(|&i| pred[i] != c && gold[i] == c).count();
            let want = ConfusionCounts { tp, fp, fn_, tn: n - tp - fp - fn_ };
            ensure!(counts == want, "counts {counts:?} != {want:?} for {pred:?} {gold:?}");
            let (p, r, f) = naive_prf(&pred, &gold, c);
            let s = precision_recall_f1(&counts);
            ensure!(close(s.precision, p) && close(s.recall, r) && close(s.f1, f), "prf {s:?} != {:?}", (p, r, f));
            sums = (sums.0 + p, sums.1 + r, sums.2 + f);
        }
        let m = ok(macro_prf(&pred, &gold))?;
        let nc = classes.len() as f64;
        ensure!(
            close(m.precision, sums.0 / nc) && close(m.recall, sums.1 / nc) && close(m.f1, sums.2 / nc),
            "macro {m:?} for {pred:?} {gold:?}"
        );
    }
    Ok(())
}

pub fn binary_auc_cases() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..CASES {
        let n = rng.gen_range(2..25);
        // coarse scores make ties common
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..6) as f64 / 5.0).collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        labels[0] = true;
        labels[1] = false;
        let got = ok(auc_binary(&scores, &labels))?;
        let want = naive_auc(&scores, &labels);
        ensure!(close(got, want), "auc {got} != {want} for {scores:?} {labels:?}");
    }
    Ok(())
}

pub fn multiclass_auc_cases() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..CASES {
        let k = rng.gen_range(2..5);
        let n = rng.gen_range(k..20);
        let labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
        let probs: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0..8) as f64 + 1.0).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|x| x / s).collect()
            })
            .collect();
        let mut ovr = 0.0;
        let mut ovo = 0.0;
        for a in 0..k {
            let l: Vec<bool> = labels.iter().map(|&y| y == a).collect();
            ovr += naive_auc(&probs.iter().map(|p| p[a]).collect::<Vec<_>>(), &l);
            for b in 0..k {
                if a != b {
                    let idx: Vec<usize> = (0..n).filter(|&i| labels[i] == a || labels[i] == b).collect();
                    let s: Vec<f64> = idx.iter().map(|&i| probs[i][a]).collect();
                    let l: Vec<bool> = idx.iter().map(|&i| labels[i] == a).collect();
                    ovo += naive_auc(&s, &l);
                }
            }
        }
        let ovr = ovr / k as f64;
        let ovo = ovo / (k * (k - 1)) as f64;
        let got_ovr = ok(auc_multiclass(&probs, &labels, AucMode::Ovr))?;
        let got_ovo = ok(auc_multiclass(&probs, &labels, AucMode::Ovo))?;
        ensure!(close(got_ovr, ovr), "ovr {got_ovr} != {ovr} for {labels:?}");
        ensure!(close(got_ovo, ovo), "ovo {got_ovo} != {ovo} for {labels:?}");
    }
    Ok(())
}

pub fn bleu_cases() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = BleuConfig::default();
    let words = ["a", "b", "c", "d"];
    for _ in 0..CASES {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<String> {
            let n = rng.gen_range(1..12);
            (0..n).map(|_| words[rng.gen_range(0..words.len())].to_string()).collect()
        };
        let r = draw(&mut rng);
        let c = if rng.gen_bool(0.3) { r.clone() } else { draw(&mut rng) };
        let got = ok(bleu(&c, &r, &cfg))?;
        let want = naive_bleu(&c, &r);
        ensure!(close(got, want), "bleu {got} != {want} for {c:?} {r:?}");
    }
    Ok(())
}

pub fn exact_match_cases() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pieces = ["x", "=", "y", "+", "1", ";", "(", ")", "return"];
    for _ in 0..CASES {
        let n = rng.gen_range(1..8);
        let mut cands = Vec::new();
        let mut refs = Vec::new();
        let mut hits = 0;
        for _ in 0..n {
            let toks: Vec<&str> = (0..rng.gen_range(1..6)).map(|_| pieces[rng.gen_range(0..pieces.len())]).collect();
            let mut other = toks.clone();
            let same = rng.gen_bool(0.5);
            if !same {
                other.push("z");
            }
            hits += same as usize;
            let spaced: String = other.iter().map(|t| format!("{t}{}", " ".repeat(rng.gen_range(1..4)))).collect();
            cands.push(spaced);
            refs.push(toks.join(" "));
        }
        let got = ok(exact_match_accuracy(&cands, &refs))?;
        ensure!(close(got, hits as f64 / n as f64), "accuracy {got} for {cands:?} {refs:?}");
    }
    Ok(())
}

pub fn worked_examples() -> Result<(), String> {
    let auc = ok(auc_binary(&[0.9, 0.8, 0.3, 0.2], &[true, false, true, false]))?;
    ensure!(auc == 0.75, "auc example gave {auc}");
    ensure!(auc_binary(&[0.5, 0.2], &[true, true]) == Err(MetricError::SingleClass), "single class accepted");
    let cfg = BleuConfig::default();
    // shares 1-, 2- and 3-grams but no 4-gram
    let zero = ok(bleu(&toks("a b c d"), &toks("a b c e"), &cfg))?;
    ensure!(zero == 0.0, "bleu with p4 = 0 gave {zero}");
    let one = ok(bleu(&toks("a b c d e"), &toks("a b c d e"), &cfg))?;
    ensure!(one == 1.0, "identical bleu gave {one}");
    let s = precision_recall_f1(&ConfusionCounts { tp: 3, fp: 1, fn_: 2, tn: 0 });
    ensure!((s.precision, s.recall) == (0.75, 0.6) && close(s.f1, 2.0 / 3.0), "prf example gave {s:?}");
    Ok(())
}
