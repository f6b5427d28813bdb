//! Applying corrective actions to matched spans.

use crate::error::{Error, Result};
use crate::matcher::CompiledTemplateSet;
use crate::template::{CorrectiveAction, MatchSpan, Template};

/// One correction performed on a sentence: which template fired, which
/// side was deleted (Random already resolved), and where.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct AppliedCorrection {
    pub template_id: String,
    pub action: CorrectiveAction,
    pub span: MatchSpan,
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv1a64(parts: &[&[u8]]) -> u64 {
    let mut h = FNV_OFFSET;
    for part in parts {
        for &b in *part {
            h ^= u64::from(b);
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

/// Resolve `Random` to a concrete side. Depends only on the template id,
/// the sentence, the match start, and the key; never on iteration order.
pub fn resolve_random(
    template_id: &str,
    sentence: &str,
    start: usize,
    rng_key: u64,
) -> CorrectiveAction {
    let start_dec = start.to_string();
    let h = fnv1a64(&[
        template_id.as_bytes(),
        sentence.as_bytes(),
        start_dec.as_bytes(),
    ]) ^ rng_key;
    if h % 2 == 0 {
        CorrectiveAction::Left
    } else {
        CorrectiveAction::Right
    }
}

/// Delete one side of a match. Returns the corrected sentence and the
/// concrete side that was deleted.
pub fn apply_action(
    sentence: &str,
    span: &MatchSpan,
    action: CorrectiveAction,
    rng_key: u64,
) -> Result<(String, CorrectiveAction)> {
    let chars: Vec<char> = sentence.chars().collect();
    if span.left_end > span.right_start
        || span.right_start > span.right_end
        || span.left_start > span.left_end
        || span.right_end > chars.len()
    {
        return Err(Error::SpanOutOfBounds { len: chars.len() });
    }
    let side = match action {
        CorrectiveAction::Random => resolve_random(&span.template_id, sentence, span.left_start, rng_key),
        other => other,
    };
    let (ds, de) = match side {
        CorrectiveAction::Left => (span.left_start, span.left_end),
        CorrectiveAction::Right => (span.right_start, span.right_end),
        CorrectiveAction::Random => unreachable!(),
    };
    let out: String = chars[..ds].iter().chain(chars[de..].iter()).collect();
    Ok((out, side))
}

/// Check that the sentence substrings under a span equal the template
/// literals.
pub fn verify_span(template: &Template, sentence: &str, span: &MatchSpan) -> Result<()> {
    let chars: Vec<char> = sentence.chars().collect();
    if span.right_end > chars.len() || span.left_end > span.right_start {
        return Err(Error::SpanOutOfBounds { len: chars.len() });
    }
    let left: String = chars[span.left_start..span.left_end].iter().collect();
    let right: String = chars[span.right_start..span.right_end].iter().collect();
    if left != template.left {
        return Err(Error::SpanMismatch {
            expected: template.left.clone(),
        });
    }
    if right != template.right {
        return Err(Error::SpanMismatch {
            expected: template.right.clone(),
        });
    }
    Ok(())
}

/// Correct one sentence in a single pass: match once on the original
/// text, then apply every action right-to-left so earlier spans stay
/// valid. No re-matching on the corrected output.
pub fn apply_correction(
    set: &CompiledTemplateSet,
    sentence: &str,
    rng_key: u64,
    force: Option<CorrectiveAction>,
) -> Result<(String, Vec<AppliedCorrection>)> {
    let matches = set.find_matches(sentence);
    let mut applied = Vec::with_capacity(matches.len());
    let mut chars: Vec<char> = sentence.chars().collect();
    for span in matches.iter().rev() {
        let template = set
            .get(&span.template_id)
            .expect("match refers to a template in the set");
        verify_span(template, sentence, span)?;
        let action = match force.or(template.action) {
            Some(a) => a,
            None => return Err(Error::UnresolvedAction(template.id.clone())),
        };
        // Random is resolved against the original sentence so results do
        // not depend on which other templates fired.
        let side = match action {
            CorrectiveAction::Random => {
                resolve_random(&span.template_id, sentence, span.left_start, rng_key)
            }
            other => other,
        };
        let (ds, de) = match side {
            CorrectiveAction::Left => (span.left_start, span.left_end),
            CorrectiveAction::Right => (span.right_start, span.right_end),
            CorrectiveAction::Random => unreachable!(),
        };
        chars.drain(ds..de);
        applied.push(AppliedCorrection {
            template_id: span.template_id.clone(),
            action: side,
            span: span.clone(),
        });
    }
    applied.reverse();
    Ok((chars.into_iter().collect(), applied))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::first_match;

    fn span_for(t: &Template, s: &str) -> MatchSpan {
        first_match(t, s).unwrap()
    }

    #[test]
    fn right_deletion_matches_reference() {
        let t = Template::parse("大约.*左右", "t1").unwrap();
        let s = "他大约五岁左右。";
        let m = span_for(&t, s);
        let (out, side) = apply_action(s, &m, CorrectiveAction::Right, 0).unwrap();
        assert_eq!(out, "他大约五岁。");
        assert_eq!(side, CorrectiveAction::Right);
    }

    #[test]
    fn left_deletion() {
        let t = Template::parse("大约.*左右", "t1").unwrap();
        let s = "他大约五岁左右。";
        let m = span_for(&t, s);
        let (out, _) = apply_action(s, &m, CorrectiveAction::Left, 0).unwrap();
        assert_eq!(out, "他五岁左右。");
    }

    #[test]
    fn mixed_pattern_reference() {
        let mut t = Template::parse("起因是.*因为", "t1").unwrap();
        t.gap_max = 0;
        let s = "杀人事件的起因是因为打牌争执。";
        let m = span_for(&t, s);
        let (out, _) = apply_action(s, &m, CorrectiveAction::Right, 0).unwrap();
        assert_eq!(out, "杀人事件的起因是打牌争执。");
    }

    #[test]
    fn deletion_exactness() {
        let t = Template::parse("大约.*左右", "t1").unwrap();
        let s = "他大约五岁左右。";
        let m = span_for(&t, s);
        let (out, _) = apply_action(s, &m, CorrectiveAction::Left, 7).unwrap();
        let slen = s.chars().count();
        assert_eq!(out.chars().count(), slen - (m.left_end - m.left_start));
    }

    #[test]
    fn out_of_bounds_rejected() {
        let m = MatchSpan {
            template_id: "t".into(),
            left_start: 0,
            left_end: 2,
            right_start: 5,
            right_end: 99,
            sentence_index: 0,
        };
        assert!(apply_action("short", &m, CorrectiveAction::Left, 0).is_err());
    }

    #[test]
    fn random_is_keyed_and_stable() {
        let t = Template::parse("大约.*左右", "t1").unwrap();
        let s = "他大约五岁左右。";
        let m = span_for(&t, s);
        let (a1, s1) = apply_action(s, &m, CorrectiveAction::Random, 42).unwrap();
        let (a2, s2) = apply_action(s, &m, CorrectiveAction::Random, 42).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(s1, s2);
        // flipping the low bit of the key flips the side
        let (_, s3) = apply_action(s, &m, CorrectiveAction::Random, 43).unwrap();
        assert_ne!(s1, s3);
    }

    #[test]
    fn correction_no_match_is_identity() {
        let mut t = Template::parse("大约.*左右", "t1").unwrap();
        t.action = Some(CorrectiveAction::Right);
        let set = CompiledTemplateSet::compile(vec![t]).unwrap();
        let (out, applied) = apply_correction(&set, "今天天气很好。", 0, None).unwrap();
        assert_eq!(out, "今天天气很好。");
        assert!(applied.is_empty());
    }

    #[test]
    fn correction_applies_stored_action() {
        let mut t = Template::parse("大约.*左右", "t1").unwrap();
        t.action = Some(CorrectiveAction::Right);
        let set = CompiledTemplateSet::compile(vec![t]).unwrap();
        let (out, applied) = apply_correction(&set, "他大约五岁左右。", 0, None).unwrap();
        assert_eq!(out, "他大约五岁。");
        assert_eq!(applied.len(), 1);
        assert_eq!(applied[0].template_id, "t1");
    }

    #[test]
    fn correction_two_disjoint_matches() {
        let mut t1 = Template::parse("a.*b", "t1").unwrap();
        t1.action = Some(CorrectiveAction::Left);
        let mut t2 = Template::parse("c.*d", "t2").unwrap();
        t2.action = Some(CorrectiveAction::Right);
        let set = CompiledTemplateSet::compile(vec![t1, t2]).unwrap();
        let (out, applied) = apply_correction(&set, "axbycxd", 0, None).unwrap();
        assert_eq!(out, "xbycx");
        assert_eq!(applied.len(), 2);
        assert_eq!(applied[0].template_id, "t1");
        assert_eq!(applied[1].template_id, "t2");
    }

    #[test]
    fn force_overrides_stored_action() {
        let mut t = Template::parse("大约.*左右", "t1").unwrap();
        t.action = Some(CorrectiveAction::Right);
        let set = CompiledTemplateSet::compile(vec![t]).unwrap();
        let (out, _) =
            apply_correction(&set, "他大约五岁左右。", 0, Some(CorrectiveAction::Left)).unwrap();
        assert_eq!(out, "他五岁左右。");
    }

    #[test]
    fn unresolved_action_without_force_errors() {
        let t = Template::parse("大约.*左右", "t1").unwrap();
        let set = CompiledTemplateSet::compile(vec![t]).unwrap();
        assert!(matches!(
            apply_correction(&set, "他大约五岁左右。", 0, None),
            Err(Error::UnresolvedAction(_))
        ));
    }
}
