//! Multi-pattern template matching.
//!
//! `CompiledTemplateSet` indexes all left literals in an Aho-Corasick
//! automaton over Unicode scalar values; each left occurrence is then
//! verified against the template's right literal with the shortest
//! admissible gap. Overlapping candidates across templates are resolved
//! by a deterministic sort-and-greedy pass on full extents.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::template::{MatchSpan, Template, SENTENCE_TERMINALS};

/// Immutable, shareable matching index over a template set.
#[derive(Debug)]
pub struct CompiledTemplateSet {
    templates: Vec<Template>,
    left_chars: Vec<Vec<char>>,
    right_chars: Vec<Vec<char>>,
    automaton: Automaton,
}

impl CompiledTemplateSet {
    pub fn compile(templates: Vec<Template>) -> Result<CompiledTemplateSet> {
        let mut seen = HashMap::new();
        for t in &templates {
            t.validate()?;
            if seen.insert(t.id.clone(), ()).is_some() {
                return Err(Error::DuplicateTemplateId(t.id.clone()));
            }
        }
        let left_chars: Vec<Vec<char>> = templates.iter().map(|t| t.left.chars().collect()).collect();
        let right_chars: Vec<Vec<char>> =
            templates.iter().map(|t| t.right.chars().collect()).collect();
        let automaton = Automaton::build(&left_chars);
        Ok(CompiledTemplateSet {
            templates,
            left_chars,
            right_chars,
            automaton,
        })
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn get(&self, template_id: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.id == template_id)
    }

    /// All non-overlapping matches in one sentence, ascending by start.
    pub fn find_matches(&self, sentence: &str) -> Vec<MatchSpan> {
        self.find_matches_indexed(sentence, 0)
    }

    pub fn find_matches_indexed(&self, sentence: &str, sentence_index: usize) -> Vec<MatchSpan> {
        let chars: Vec<char> = sentence.chars().collect();
        let mut candidates: Vec<(usize, MatchSpan)> = Vec::new();
        for (ti, left_start) in self.automaton.occurrences(&chars) {
            let t = &self.templates[ti];
            let left_end = left_start + self.left_chars[ti].len();
            if let Some((rs, re)) = lazy_right(&chars, left_end, t, &self.right_chars[ti]) {
                candidates.push((
                    ti,
                    MatchSpan {
                        template_id: t.id.clone(),
                        left_start,
                        left_end,
                        right_start: rs,
                        right_end: re,
                        sentence_index,
                    },
                ));
            }
        }
        resolve_overlaps(candidates, |ti| {
            self.left_chars[ti].len() + self.right_chars[ti].len()
        })
    }
}

/// First match of a single template in a sentence: leftmost left-part
/// occurrence, shortest admissible gap.
pub fn first_match(template: &Template, sentence: &str) -> Option<MatchSpan> {
    let chars: Vec<char> = sentence.chars().collect();
    first_match_chars(template, &chars)
}

fn first_match_chars(template: &Template, chars: &[char]) -> Option<MatchSpan> {
    let lchars: Vec<char> = template.left.chars().collect();
    let rchars: Vec<char> = template.right.chars().collect();
    for start in 0..chars.len().saturating_sub(lchars.len() - 1) {
        if chars[start..start + lchars.len()] != lchars[..] {
            continue;
        }
        let left_end = start + lchars.len();
        if let Some((rs, re)) = lazy_right(chars, left_end, template, &rchars) {
            return Some(MatchSpan {
                template_id: template.id.clone(),
                left_start: start,
                left_end,
                right_start: rs,
                right_end: re,
                sentence_index: 0,
            });
        }
    }
    None
}

/// Sort candidates by (start asc, combined literal length desc, id asc)
/// and select greedily so full extents never overlap.
pub fn resolve_overlaps<F>(mut candidates: Vec<(usize, MatchSpan)>, total_len: F) -> Vec<MatchSpan>
where
    F: Fn(usize) -> usize,
{
    candidates.sort_by(|(ai, a), (bi, b)| {
        a.left_start
            .cmp(&b.left_start)
            .then(total_len(*bi).cmp(&total_len(*ai)))
            .then(a.template_id.cmp(&b.template_id))
    });
    let mut out: Vec<MatchSpan> = Vec::new();
    let mut max_end = 0usize;
    for (_, span) in candidates {
        if out.is_empty() || span.left_start >= max_end {
            max_end = max_end.max(span.right_end);
            out.push(span);
        }
    }
    out
}

/// Find the shortest gap g in [gap_min, gap_max] such that the right
/// literal matches at left_end + g and the gap carries no sentence
/// terminal.
fn lazy_right(
    chars: &[char],
    left_end: usize,
    template: &Template,
    rchars: &[char],
) -> Option<(usize, usize)> {
    for g in 0..=template.gap_max {
        if g > 0 {
            match chars.get(left_end + g - 1) {
                Some(c) if SENTENCE_TERMINALS.contains(c) => return None,
                None => return None,
                _ => {}
            }
        }
        if g < template.gap_min {
            continue;
        }
        let rs = left_end + g;
        if rs + rchars.len() > chars.len() {
            return None;
        }
        if chars[rs..rs + rchars.len()] == *rchars {
            return Some((rs, rs + rchars.len()));
        }
    }
    None
}

/// Character-level Aho-Corasick automaton over the left literals.
#[derive(Debug)]
struct Automaton {
    children: Vec<HashMap<char, u32>>,
    fail: Vec<u32>,
    out: Vec<Vec<u32>>,
    pat_len: Vec<usize>,
}

impl Automaton {
    fn build(patterns: &[Vec<char>]) -> Automaton {
        let pat_len: Vec<usize> = patterns.iter().map(Vec::len).collect();
        let mut children: Vec<HashMap<char, u32>> = vec![HashMap::new()];
        let mut out: Vec<Vec<u32>> = vec![Vec::new()];
        for (pi, pat) in patterns.iter().enumerate() {
            let mut node = 0u32;
            for &c in pat {
                let next = match children[node as usize].get(&c) {
                    Some(&n) => n,
                    None => {
                        children.push(HashMap::new());
                        out.push(Vec::new());
                        let n = (children.len() - 1) as u32;
                        children[node as usize].insert(c, n);
                        n
                    }
                };
                node = next;
            }
            out[node as usize].push(pi as u32);
        }
        let mut fail = vec![0u32; children.len()];
        let mut queue = std::collections::VecDeque::new();
        for (_, &n) in children[0].iter() {
            queue.push_back(n);
        }
        while let Some(n) = queue.pop_front() {
            let edges: Vec<(char, u32)> = children[n as usize].iter().map(|(&c, &m)| (c, m)).collect();
            for (c, m) in edges {
                let mut f = fail[n as usize];
                loop {
                    if let Some(&g) = children[f as usize].get(&c) {
                        if g != m {
                            fail[m as usize] = g;
                        }
                        break;
                    }
                    if f == 0 {
                        break;
                    }
                    f = fail[f as usize];
                }
                let fm = fail[m as usize] as usize;
                let extra = out[fm].clone();
                out[m as usize].extend(extra);
                queue.push_back(m);
            }
        }
        Automaton {
            children,
            fail,
            out,
            pat_len,
        }
    }

    /// Yields (pattern index, start char index) for every occurrence of
    /// every pattern.
    fn occurrences<'a>(&'a self, chars: &'a [char]) -> impl Iterator<Item = (usize, usize)> + 'a {
        let mut node = 0u32;
        let mut pending: Vec<(usize, usize)> = Vec::new();
        let mut pos = 0usize;
        std::iter::from_fn(move || loop {
            if let Some(hit) = pending.pop() {
                return Some(hit);
            }
            if pos >= chars.len() {
                return None;
            }
            let c = chars[pos];
            loop {
                if let Some(&n) = self.children[node as usize].get(&c) {
                    node = n;
                    break;
                }
                if node == 0 {
                    break;
                }
                node = self.fail[node as usize];
            }
            pos += 1;
            for &pi in &self.out[node as usize] {
                pending.push((pi as usize, pos - self.pat_len[pi as usize]));
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(templates: Vec<Template>) -> CompiledTemplateSet {
        CompiledTemplateSet::compile(templates).unwrap()
    }

    #[test]
    fn single_template_basic_match() {
        let s = set(vec![Template::parse("大约.*左右", "t1").unwrap()]);
        let ms = s.find_matches("他大约五岁左右。");
        assert_eq!(ms.len(), 1);
        let m = &ms[0];
        assert_eq!((m.left_start, m.left_end), (1, 3));
        assert_eq!((m.right_start, m.right_end), (5, 7));
    }

    #[test]
    fn right_literal_absent() {
        let s = set(vec![Template::parse("大约.*左右", "t1").unwrap()]);
        assert!(s.find_matches("他大约五岁。").is_empty());
    }

    #[test]
    fn gap_with_terminal_rejected() {
        let s = set(vec![Template::parse("大约.*左右", "t1").unwrap()]);
        assert!(s.find_matches("大约。左右").is_empty());
    }

    #[test]
    fn zero_gap_match() {
        let mut t = Template::parse("起因是.*因为", "t1").unwrap();
        t.gap_min = 0;
        t.gap_max = 0;
        let s = set(vec![t]);
        let ms = s.find_matches("杀人事件的起因是因为打牌争执。");
        assert_eq!(ms.len(), 1);
        assert_eq!((ms[0].left_start, ms[0].right_end), (5, 10));
    }

    #[test]
    fn duplicate_id_rejected() {
        let t1 = Template::parse("a.*b", "t1").unwrap();
        let t2 = Template::parse("c.*d", "t1").unwrap();
        assert!(matches!(
            CompiledTemplateSet::compile(vec![t1, t2]),
            Err(Error::DuplicateTemplateId(_))
        ));
    }

    #[test]
    fn empty_set_matches_nothing() {
        let s = set(vec![]);
        assert!(s.find_matches("任何句子都行。").is_empty());
    }

    #[test]
    fn lazy_gap_prefers_shortest() {
        let s = set(vec![Template::parse("a.*b", "t1").unwrap()]);
        let ms = s.find_matches("axbxb");
        assert_eq!(ms.len(), 1);
        assert_eq!((ms[0].right_start, ms[0].right_end), (2, 3));
    }

    #[test]
    fn gap_min_respected() {
        let mut t = Template::parse("a.*b", "t1").unwrap();
        t.gap_min = 2;
        let s = set(vec![t]);
        let ms = s.find_matches("axbxb");
        assert_eq!(ms.len(), 1);
        // gap of 1 skipped, gap 3 is first admissible
        assert_eq!(ms[0].right_start, 4);
    }

    #[test]
    fn overlap_longer_combined_literal_wins() {
        let t1 = Template::parse("ab.*cd", "t1").unwrap();
        let t2 = Template::parse("b.*c", "t2").unwrap();
        let s = set(vec![t2.clone(), t1.clone()]);
        let ms = s.find_matches("abxcd");
        // ab..cd starts at 0, b..c starts at 1; non-overlap greedy keeps t1 only
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].template_id, "t1");
    }

    #[test]
    fn tie_broken_by_template_id() {
        let t1 = Template::parse("a.*b", "t2").unwrap();
        let t2 = Template::parse("a.*b", "t1").unwrap();
        let s = set(vec![t1, t2]);
        let ms = s.find_matches("axb");
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].template_id, "t1");
    }

    #[test]
    fn first_match_is_leftmost() {
        let t = Template::parse("a.*b", "t1").unwrap();
        let m = first_match(&t, "xaxbab").unwrap();
        assert_eq!((m.left_start, m.right_end), (1, 4));
    }

    #[test]
    fn span_invariants_hold() {
        let t = Template::parse("大约.*左右", "t1").unwrap();
        let s = set(vec![t.clone()]);
        let sentence = "他大约了五岁左右吧大约左右。";
        for m in s.find_matches(sentence) {
            let chars: Vec<char> = sentence.chars().collect();
            assert!(m.left_end <= m.right_start);
            assert!(m.gap_len() >= t.gap_min && m.gap_len() <= t.gap_max);
            let left: String = chars[m.left_start..m.left_end].iter().collect();
            let right: String = chars[m.right_start..m.right_end].iter().collect();
            assert_eq!(left, t.left);
            assert_eq!(right, t.right);
            assert!(!chars[m.left_end..m.right_start]
                .iter()
                .any(|c| SENTENCE_TERMINALS.contains(c)));
        }
    }
}
