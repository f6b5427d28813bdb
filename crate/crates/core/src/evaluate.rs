//! Character-level edit extraction and P/R/Fβ scoring.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::correct::AppliedCorrection;
use crate::error::{Error, Result};

/// A source-span replacement; empty replacement means deletion. Spans
/// count Unicode scalar values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub replacement: String,
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    pub type_label: Option<String>,
}

impl Edit {
    fn key(&self) -> (usize, usize, &str) {
        (self.start, self.end, &self.replacement)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Match,
    Substitute,
    Delete,
    Insert,
}

/// Minimal edit-distance alignment with unit costs. Backtrace ties break
/// match > substitution > deletion > insertion; consecutive non-match
/// operations merge into maximal edits.
pub fn extract_edits(source: &str, target: &str) -> Vec<Edit> {
    let s: Vec<char> = source.chars().collect();
    let t: Vec<char> = target.chars().collect();
    let (n, m) = (s.len(), t.len());
    let mut dp = vec![vec![0u32; m + 1]; n + 1];
    for i in 0..=n {
        dp[i][0] = i as u32;
    }
    for j in 0..=m {
        dp[0][j] = j as u32;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = dp[i - 1][j - 1] + u32::from(s[i - 1] != t[j - 1]);
            dp[i][j] = sub.min(dp[i - 1][j] + 1).min(dp[i][j - 1] + 1);
        }
    }

    // backtrace from the end, then reverse
    let mut ops: Vec<Op> = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let cur = dp[i][j];
        if i > 0 && j > 0 && s[i - 1] == t[j - 1] && dp[i - 1][j - 1] == cur {
            ops.push(Op::Match);
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && dp[i - 1][j - 1] + 1 == cur {
            ops.push(Op::Substitute);
            i -= 1;
            j -= 1;
        } else if i > 0 && dp[i - 1][j] + 1 == cur {
            ops.push(Op::Delete);
            i -= 1;
        } else {
            ops.push(Op::Insert);
            j -= 1;
        }
    }
    ops.reverse();

    let mut edits: Vec<Edit> = Vec::new();
    let (mut si, mut ti) = (0usize, 0usize);
    let mut open: Option<(usize, usize, String)> = None; // (start, end, replacement)
    for op in ops {
        match op {
            Op::Match => {
                if let Some((start, end, replacement)) = open.take() {
                    edits.push(Edit {
                        start,
                        end,
                        replacement,
                        type_label: None,
                    });
                }
                si += 1;
                ti += 1;
            }
            Op::Substitute => {
                let e = open.get_or_insert((si, si, String::new()));
                e.1 = si + 1;
                e.2.push(t[ti]);
                si += 1;
                ti += 1;
            }
            Op::Delete => {
                let e = open.get_or_insert((si, si, String::new()));
                e.1 = si + 1;
                si += 1;
            }
            Op::Insert => {
                let e = open.get_or_insert((si, si, String::new()));
                e.2.push(t[ti]);
                ti += 1;
            }
        }
    }
    if let Some((start, end, replacement)) = open.take() {
        edits.push(Edit {
            start,
            end,
            replacement,
            type_label: None,
        });
    }
    edits
}

/// Replace spans right-to-left. Edits must be sorted, non-overlapping,
/// and in bounds.
pub fn apply_edits(source: &str, edits: &[Edit]) -> Result<String> {
    let mut chars: Vec<char> = source.chars().collect();
    let mut prev_start = chars.len();
    for e in edits.iter().rev() {
        if e.start > e.end || e.end > prev_start {
            return Err(Error::BadEdits);
        }
        prev_start = e.start;
        chars.splice(e.start..e.end, e.replacement.chars());
    }
    Ok(chars.into_iter().collect())
}

/// (1+β²)PR / (β²P + R); 0 when the denominator is 0.
pub fn fbeta(p: f64, r: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * p + r;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * p * r / denom
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeRecall {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
    pub beta: f64,
    pub per_type: BTreeMap<String, TypeRecall>,
}

impl ScoreReport {
    fn from_counts(tp: u64, fp: u64, fn_: u64, beta: f64, per_type: BTreeMap<String, TypeRecall>) -> ScoreReport {
        let ratio = |num: u64, denom: u64| {
            if denom == 0 {
                0.0
            } else {
                num as f64 / denom as f64
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        ScoreReport {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f: fbeta(precision, recall, beta),
            beta,
            per_type,
        }
    }

    /// Human-readable table; metrics reported ×100 with two decimals.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "TP {}  FP {}  FN {}\n",
            self.tp, self.fp, self.fn_
        ));
        out.push_str(&format!(
            "P {:6.2}  R {:6.2}  F{} {:6.2}\n",
            self.precision * 100.0,
            self.recall * 100.0,
            self.beta,
            self.f * 100.0
        ));
        for (label, t) in &self.per_type {
            out.push_str(&format!(
                "  {label}: TP {}  FN {}  R {:6.2}\n",
                t.tp,
                t.fn_,
                t.recall * 100.0
            ));
        }
        out
    }
}

/// Micro-averaged correction-level scoring against references. Gold
/// edits are extracted per sentence; a hypothesis edit is a true
/// positive when (start, end, replacement) all agree.
pub fn score(
    sources: &[String],
    hypotheses: &[String],
    references: &[String],
    beta: f64,
) -> Result<ScoreReport> {
    if sources.len() != hypotheses.len() {
        return Err(Error::LengthMismatch(sources.len(), hypotheses.len()));
    }
    if sources.len() != references.len() {
        return Err(Error::LengthMismatch(sources.len(), references.len()));
    }
    let gold: Vec<Vec<Edit>> = sources
        .iter()
        .zip(references)
        .map(|(s, r)| extract_edits(s, r))
        .collect();
    score_with_gold(sources, hypotheses, &gold, beta)
}

/// Scoring against pre-annotated (possibly typed) gold edits.
pub fn score_with_gold(
    sources: &[String],
    hypotheses: &[String],
    gold: &[Vec<Edit>],
    beta: f64,
) -> Result<ScoreReport> {
    if sources.len() != hypotheses.len() {
        return Err(Error::LengthMismatch(sources.len(), hypotheses.len()));
    }
    if sources.len() != gold.len() {
        return Err(Error::LengthMismatch(sources.len(), gold.len()));
    }
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    let mut per_type: BTreeMap<String, TypeRecall> = BTreeMap::new();
    for ((src, hyp), gold_edits) in sources.iter().zip(hypotheses).zip(gold) {
        let hyp_edits = extract_edits(src, hyp);
        let hyp_keys: HashSet<(usize, usize, &str)> = hyp_edits.iter().map(Edit::key).collect();
        let gold_keys: HashSet<(usize, usize, &str)> = gold_edits.iter().map(Edit::key).collect();
        for e in &hyp_edits {
            if gold_keys.contains(&e.key()) {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        for e in gold_edits {
            let hit = hyp_keys.contains(&e.key());
            if !hit {
                fn_ += 1;
            }
            if let Some(label) = &e.type_label {
                let t = per_type.entry(label.clone()).or_default();
                if hit {
                    t.tp += 1;
                } else {
                    t.fn_ += 1;
                }
            }
        }
    }
    for t in per_type.values_mut() {
        let denom = t.tp + t.fn_;
        t.recall = if denom == 0 {
            0.0
        } else {
            t.tp as f64 / denom as f64
        };
    }
    Ok(ScoreReport::from_counts(tp, fp, fn_, beta, per_type))
}

/// Gold record for one sentence in the annotated JSONL format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldRecord {
    pub source: String,
    pub edits: Vec<Edit>,
}

pub fn read_gold<R: std::io::BufRead>(reader: R) -> Result<Vec<GoldRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GoldRecord = serde_json::from_str(&line).map_err(|source| Error::TemplateJson {
            line: i + 1,
            source,
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Template usage statistics over correction logs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageReport {
    pub per_template: BTreeMap<String, u64>,
    /// use-count -> number of templates used that many times
    pub histogram: BTreeMap<u64, u64>,
    pub distinct_templates: u64,
    pub total_corrections: u64,
}

pub fn usage_report<'a, I>(applied: I) -> UsageReport
where
    I: IntoIterator<Item = &'a AppliedCorrection>,
{
    let mut report = UsageReport::default();
    for a in applied {
        *report.per_template.entry(a.template_id.clone()).or_insert(0) += 1;
        report.total_corrections += 1;
    }
    report.distinct_templates = report.per_template.len() as u64;
    for count in report.per_template.values() {
        *report.histogram.entry(*count).or_insert(0) += 1;
    }
    report
}
