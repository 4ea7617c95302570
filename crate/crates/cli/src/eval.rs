use std::io::Write;
use std::path::Path;

use anyhow::Context;
use fixline_lang::{tokenize, FunctionTriple};
use fixline_metrics::{
    auc_binary, auc_multiclass, binary_counts, exact_match_accuracy, macro_prf, mean_sentence_bleu, precision_recall_f1, AucMode,
    BleuConfig,
};
use fixline_model::classify::argmax;
use fixline_model::predict::{classify_pair, generate};
use fixline_model::train::make_example;
use fixline_model::{prepare, Model};
use serde::Serialize;

use crate::commands::{load_model, pick, read_triples, required, split};
use crate::config::{Settings, SplitName};
use crate::{invalid, Cli, Task};

#[derive(Debug, Serialize)]
#[serde(tag = "task", rename_all = "lowercase")]
enum Report {
    Identify { split: SplitName, examples: usize, precision: f64, recall: f64, f1: f64, auc: Option<f64> },
    Classify { split: SplitName, examples: usize, precision: f64, recall: f64, f1: f64, auc_ovo: Option<f64>, auc_ovr: Option<f64> },
    Repair { split: SplitName, examples: usize, bleu: f64, bleu_kind: &'static str, accuracy: f64 },
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"))
}

impl Report {
    fn table(&self) -> String {
        match self {
            Report::Identify { precision, recall, f1, auc, .. } => format!(
                "{:<10} {:<10} {:<10} {:<10}\n{:<10.3} {:<10.3} {:<10.3} {:<10}\n",
                "Precision", "Recall", "F1-score", "AUC", precision, recall, f1, fmt(*auc)
            ),
            Report::Classify { precision, recall, f1, auc_ovo, auc_ovr, .. } => format!(
                "{:<10} {:<10} {:<10} {:<10} {:<10}\n{:<10.3} {:<10.3} {:<10.3} {:<10} {:<10}\n",
                "Precision",
                "Recall",
                "F1-score",
                "AUC_OVO",
                "AUC_OVR",
                precision,
                recall,
                f1,
                fmt(*auc_ovo),
                fmt(*auc_ovr)
            ),
            Report::Repair { bleu, accuracy, .. } => {
                format!("{:<10} {:<10}\n{:<10.3} {:<10.3}\n", "BLEU", "Accuracy", bleu, accuracy)
            }
        }
    }
}

/// Label distributions for every triple, gold ids alongside.
fn classify_all(model: &Model, triples: &[FunctionTriple]) -> anyhow::Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let mut probs = Vec::new();
    let mut gold = Vec::new();
    for t in triples {
        let ex = make_example(model, t).with_context(|| format!("triple {}", t.id))?;
        let (p, _) = classify_pair(model, &ex.clean, &ex.current)?;
        probs.push(p);
        gold.push(ex.label);
    }
    Ok((probs, gold))
}

fn read_candidates(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str::<String>(l).map_err(|e| invalid(format!("{}:{}: {e}", path.display(), i + 1))))
        .collect()
}

fn texts(src: &str) -> anyhow::Result<Vec<String>> {
    let tokens = tokenize(src).map_err(|e| invalid(format!("candidate does not lex: {e}")))?;
    Ok(tokens.into_iter().map(|t| t.text).collect())
}

fn repair(cli: &Cli, settings: &Settings, triples: &[FunctionTriple]) -> anyhow::Result<Report> {
    let defective: Vec<&FunctionTriple> = triples.iter().filter(|t| !t.label.is_clean()).collect();
    if defective.is_empty() {
        return Err(invalid("no defective triples to repair in the chosen split"));
    }
    let references: Vec<Vec<String>> = defective.iter().map(|t| Ok(prepare(&t.fixed_src)?.tokens)).collect::<anyhow::Result<_>>()?;
    let candidates: Vec<Vec<String>> = match &cli.candidates {
        Some(path) => {
            let c = read_candidates(path)?;
            if c.len() != defective.len() {
                return Err(invalid(format!("{} candidates for {} defective triples", c.len(), defective.len())));
            }
            c.iter().map(|s| texts(s)).collect::<anyhow::Result<_>>()?
        }
        None => {
            let model = load_model(required(&cli.ckpt, "ckpt")?)?;
            let mut out = Vec::new();
            for t in &defective {
                let ex = make_example(&model, t).with_context(|| format!("triple {}", t.id))?;
                let (_, memory) = classify_pair(&model, &ex.clean, &ex.current)?;
                out.push(generate(&model, &memory, settings.beam_width).0);
            }
            out
        }
    };
    let bleu = mean_sentence_bleu(&candidates, &references, &BleuConfig::default())?;
    let join = |v: &[Vec<String>]| v.iter().map(|t| t.join(" ")).collect::<Vec<_>>();
    let accuracy = exact_match_accuracy(&join(&candidates), &join(&references))?;
    Ok(Report::Repair { split: settings.eval_split, examples: defective.len(), bleu, bleu_kind: "mean_sentence", accuracy })
}

pub fn eval(cli: &Cli, settings: &Settings, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let task = cli.task.ok_or_else(|| invalid("--task is required for eval"))?;
    let data = required(&cli.data, "data")?;
    let triples = pick(split(&read_triples(data)?, settings)?, settings.eval_split);
    if triples.is_empty() {
        return Err(invalid(format!("the {:?} split is empty", settings.eval_split).to_lowercase()));
    }
    let n = triples.len();
    let report = match task {
        Task::Identify => {
            let model = load_model(required(&cli.ckpt, "ckpt")?)?;
            let (probs, gold) = classify_all(&model, &triples)?;
            let pred: Vec<bool> = probs.iter().map(|p| argmax(p) != 0).collect();
            let truth: Vec<bool> = gold.iter().map(|&g| g != 0).collect();
            let scores: Vec<f64> = probs.iter().map(|p| 1.0 - p[0]).collect();
            let s = precision_recall_f1(&binary_counts(&pred, &truth)?);
            Report::Identify { split: settings.eval_split, examples: n, precision: s.precision, recall: s.recall, f1: s.f1, auc: auc_binary(&scores, &truth).ok() }
        }
        Task::Classify => {
            let model = load_model(required(&cli.ckpt, "ckpt")?)?;
            let (probs, gold) = classify_all(&model, &triples)?;
            let pred: Vec<usize> = probs.iter().map(|p| argmax(p)).collect();
            let m = macro_prf(&pred, &gold)?;
            Report::Classify {
                split: settings.eval_split,
                examples: n,
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
                auc_ovo: auc_multiclass(&probs, &gold, AucMode::Ovo).ok(),
                auc_ovr: auc_multiclass(&probs, &gold, AucMode::Ovr).ok(),
            }
        }
        Task::Repair => repair(cli, settings, &triples)?,
    };
    writeln!(out, "{}", serde_json::to_string(&report)?)?;
    write!(err, "{}", report.table())?;
    Ok(0)
}
