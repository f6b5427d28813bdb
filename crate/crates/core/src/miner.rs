//! Mining candidate error templates from question-page dumps.
//!
//! Questions like 「大约……左右是语义重复吗？」 carry an error template in
//! their two slots. Five default search patterns ship with the miner;
//! custom patterns load from JSONL.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::template::{Template, SENTENCE_TERMINALS};

/// Separator aliases between the A and B slots; longest alias wins at a
/// given position.
pub const SEPARATORS: [&str; 4] = ["……", "。。。", "...", "…"];

/// Characters stripped from the ends of captured slots: quotation marks
/// plus separator punctuation.
const TRIM_CHARS: [char; 13] = [
    '“', '”', '"', '\'', '『', '』', '「', '」', '，', '、', '；', '：', ',',
];

const MIN_SLOT_CHARS: usize = 1;
const MAX_SLOT_CHARS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchPattern {
    pub id: String,
    #[serde(default)]
    pub prefix: String,
    pub suffix: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateTemplate {
    pub left: String,
    pub right: String,
    pub pattern_id: String,
    pub source_line: String,
}

/// The five stock question shapes.
pub fn load_default_patterns() -> Vec<SearchPattern> {
    let suffixes = [
        "是语法错误吗？",
        "是病句吗？",
        "是语义重复吗？",
        "是句式杂糅吗？",
        "这句话错了吗？",
    ];
    suffixes
        .iter()
        .enumerate()
        .map(|(i, s)| SearchPattern {
            id: format!("p{}", i + 1),
            prefix: String::new(),
            suffix: (*s).to_string(),
        })
        .collect()
}

pub fn read_patterns<R: std::io::BufRead>(reader: R) -> Result<Vec<SearchPattern>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: SearchPattern = serde_json::from_str(&line).map_err(|source| Error::TemplateJson {
            line: i + 1,
            source,
        })?;
        out.push(p);
    }
    Ok(out)
}

/// Remove everything between `<` and `>` (markup stripping for page
/// dumps).
pub fn strip_markup(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_tag = false;
    for c in text.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            c if !in_tag => out.push(c),
            _ => {}
        }
    }
    out
}

fn trim_slot(s: &str) -> &str {
    s.trim().trim_matches(|c| TRIM_CHARS.contains(&c)).trim()
}

/// A full-width question mark at the end of a suffix also accepts its
/// ASCII form.
fn strip_suffix_normalized<'a>(line: &'a str, suffix: &str) -> Option<&'a str> {
    if let Some(rest) = line.strip_suffix(suffix) {
        return Some(rest);
    }
    if let Some(core) = suffix.strip_suffix('？') {
        if let Some(rest) = line.strip_suffix('?') {
            return rest.strip_suffix(core);
        }
    }
    None
}

fn match_pattern(line: &str, pattern: &SearchPattern) -> Option<(String, String)> {
    let rest = strip_suffix_normalized(line, &pattern.suffix)?;
    let mid = rest.strip_prefix(&pattern.prefix)?;
    // leftmost separator; A before it, B between it and the suffix
    let mut pos = 0usize;
    while pos < mid.len() {
        let tail = &mid[pos..];
        if let Some(sep) = SEPARATORS.iter().find(|s| tail.starts_with(**s)) {
            let a = &mid[..pos];
            let b = &mid[pos + sep.len()..];
            let a_len = a.chars().count();
            let b_len = b.chars().count();
            if (MIN_SLOT_CHARS..=MAX_SLOT_CHARS).contains(&a_len)
                && (MIN_SLOT_CHARS..=MAX_SLOT_CHARS).contains(&b_len)
            {
                return Some((trim_slot(a).to_string(), trim_slot(b).to_string()));
            }
            return None;
        }
        pos += tail.chars().next().map(char::len_utf8).unwrap_or(1);
    }
    None
}

/// Scan page text line by line and capture (A, B) slots in document
/// order. Expects markup-free text; see [`strip_markup`].
pub fn extract_candidates(page_text: &str, patterns: &[SearchPattern]) -> Vec<CandidateTemplate> {
    let mut out = Vec::new();
    for raw_line in page_text.lines() {
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        for pattern in patterns {
            if let Some((left, right)) = match_pattern(line, pattern) {
                out.push(CandidateTemplate {
                    left,
                    right,
                    pattern_id: pattern.id.clone(),
                    source_line: line.to_string(),
                });
                break;
            }
        }
    }
    out
}

/// Drop unusable candidates, deduplicate on (left, right), and assign
/// stable ids in first-occurrence order.
pub fn normalize_and_dedupe(candidates: &[CandidateTemplate]) -> Vec<Template> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for c in candidates {
        let left = trim_slot(&c.left);
        let right = trim_slot(&c.right);
        if left.is_empty() || right.is_empty() {
            continue;
        }
        if [left, right].iter().any(|p| {
            p.chars()
                .any(|ch| SENTENCE_TERMINALS.contains(&ch) || ch == '\n' || ch == '\r')
        }) {
            continue;
        }
        if !seen.insert((left.to_string(), right.to_string())) {
            continue;
        }
        let mut t = Template::new(format!("t{:06}", out.len() + 1), left, right);
        t.source = c.pattern_id.clone();
        out.push(t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_default_patterns() {
        let ps = load_default_patterns();
        assert_eq!(ps.len(), 5);
        assert_eq!(ps[0].suffix, "是语法错误吗？");
        assert_eq!(ps[4].suffix, "这句话错了吗？");
    }

    #[test]
    fn extracts_the_motivating_question() {
        let got = extract_candidates("因为...为由是语法错误吗？", &load_default_patterns());
        assert_eq!(got.len(), 1);
        assert_eq!((got[0].left.as_str(), got[0].right.as_str()), ("因为", "为由"));
        assert_eq!(got[0].pattern_id, "p1");
    }

    #[test]
    fn no_suffix_no_candidate() {
        assert!(extract_candidates("今天天气很好。", &load_default_patterns()).is_empty());
    }

    #[test]
    fn separator_and_question_mark_variants() {
        let got = extract_candidates("大约……左右是语义重复吗?", &load_default_patterns());
        assert_eq!(got.len(), 1);
        assert_eq!((got[0].left.as_str(), got[0].right.as_str()), ("大约", "左右"));
        assert_eq!(got[0].pattern_id, "p3");
    }

    #[test]
    fn quoted_slots_are_trimmed() {
        let got = extract_candidates("“起因是”…“因为”是句式杂糅吗？", &load_default_patterns());
        assert_eq!(got.len(), 1);
        assert_eq!(
            (got[0].left.as_str(), got[0].right.as_str()),
            ("起因是", "因为")
        );
    }

    #[test]
    fn oversized_slots_rejected() {
        let line = format!("{}...左右是病句吗？", "很".repeat(11));
        assert!(extract_candidates(&line, &load_default_patterns()).is_empty());
    }

    #[test]
    fn markup_is_stripped() {
        let s = strip_markup("<p>大约…左右是病句吗？</p>");
        assert_eq!(s, "大约…左右是病句吗？");
        let got = extract_candidates(&s, &load_default_patterns());
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn dedupe_keeps_first_occurrence() {
        let cands = extract_candidates(
            "大约…左右是病句吗？\n因为…为由是语法错误吗？\n大约…左右是语义重复吗？",
            &load_default_patterns(),
        );
        assert_eq!(cands.len(), 3);
        let ts = normalize_and_dedupe(&cands);
        assert_eq!(ts.len(), 2);
        assert_eq!(ts[0].id, "t000001");
        assert_eq!(ts[0].left, "大约");
        assert_eq!(ts[0].source, "p2");
        assert_eq!(ts[1].left, "因为");
    }

    #[test]
    fn punctuation_only_slot_dropped() {
        let cand = CandidateTemplate {
            left: "，".into(),
            right: "左右".into(),
            pattern_id: "p1".into(),
            source_line: String::new(),
        };
        assert!(normalize_and_dedupe(&[cand]).is_empty());
    }

    #[test]
    fn dedupe_is_idempotent() {
        let cands = extract_candidates(
            "大约…左右是病句吗？\n大约…左右是病句吗？\n因为…为由是语法错误吗？",
            &load_default_patterns(),
        );
        let once = normalize_and_dedupe(&cands);
        let again_input: Vec<CandidateTemplate> = once
            .iter()
            .map(|t| CandidateTemplate {
                left: t.left.clone(),
                right: t.right.clone(),
                pattern_id: t.source.clone(),
                source_line: String::new(),
            })
            .collect();
        let twice = normalize_and_dedupe(&again_input);
        assert_eq!(once, twice);
    }

    #[test]
    fn inverse_property_on_synthesized_questions() {
        let patterns = load_default_patterns();
        for (i, p) in patterns.iter().enumerate() {
            let a = format!("部{i}分");
            let b = "另外";
            let line = format!("{}{a}…{b}{}", p.prefix, p.suffix);
            let got = extract_candidates(&line, &patterns);
            assert_eq!(got.len(), 1, "pattern {}", p.id);
            assert_eq!(got[0].left, a);
            assert_eq!(got[0].right, b);
        }
    }

    #[test]
    fn punctuation_only_slot_after_trim_dropped_in_extract_pipeline() {
        // comma-only left slot survives extraction but not normalization
        let got = extract_candidates("，...左右是病句吗？", &load_default_patterns());
        assert!(normalize_and_dedupe(&got).is_empty());
    }
}
