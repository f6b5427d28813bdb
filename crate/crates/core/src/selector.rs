//! Perplexity-based corrective action selection.
//!
//! For each template, the first N corpus sentences it matches are scored
//! before and after each candidate deletion; the action whose average
//! perplexity reduction beats the other side by more than `alpha` wins,
//! otherwise the template falls back to Random.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correct::apply_action;
use crate::error::{Error, Result};
use crate::lm::{perplexity, LanguageModel};
use crate::matcher::first_match;
use crate::template::{CorrectiveAction, MatchSpan, Template};

#[derive(Debug, Clone, Copy)]
pub struct SelectorConfig {
    /// Number of evidence sentences sampled per template.
    pub n: usize,
    /// Minimum ΔPPL margin before a side is preferred over Random.
    pub alpha: f64,
    pub rng_key: u64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        SelectorConfig {
            n: 20,
            alpha: 5.0,
            rng_key: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionDecision {
    pub template_id: String,
    pub dppl_left: f64,
    pub dppl_right: f64,
    pub support: usize,
    pub chosen: CorrectiveAction,
    pub insufficient_evidence: bool,
}

/// First N sentences in stream order that match the template; one
/// (first) match per sentence.
pub fn sample_matching_sentences<I>(corpus: I, template: &Template, n: usize) -> Vec<(String, MatchSpan)>
where
    I: IntoIterator<Item = String>,
{
    let mut out = Vec::new();
    for sentence in corpus {
        if out.len() >= n {
            break;
        }
        if let Some(m) = first_match(template, &sentence) {
            out.push((sentence, m));
        }
    }
    out
}

/// Average PPL reduction over the samples after deleting one side (Left
/// or Right only).
pub fn delta_ppl<M: LanguageModel + ?Sized>(
    model: &M,
    samples: &[(String, MatchSpan)],
    action: CorrectiveAction,
) -> Result<f64> {
    assert!(
        matches!(action, CorrectiveAction::Left | CorrectiveAction::Right),
        "delta_ppl takes a concrete side"
    );
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut sum = 0.0;
    for (sentence, span) in samples {
        let before = perplexity(model, sentence)?;
        let (corrected, _) = apply_action(sentence, span, action, 0)?;
        let after = perplexity(model, &corrected)?;
        sum += before - after;
    }
    Ok(sum / samples.len() as f64)
}

/// The selection rule: Left if its reduction beats Right by more than
/// alpha, Right for the mirror case, Random otherwise. Strict
/// inequalities on both sides.
pub fn select_action(dppl_left: f64, dppl_right: f64, alpha: f64) -> CorrectiveAction {
    if dppl_left - dppl_right > alpha {
        CorrectiveAction::Left
    } else if dppl_right - dppl_left > alpha {
        CorrectiveAction::Right
    } else {
        CorrectiveAction::Random
    }
}

fn decide<M: LanguageModel + ?Sized>(
    template: &Template,
    samples: &[(String, MatchSpan)],
    model: &M,
    cfg: &SelectorConfig,
) -> ActionDecision {
    let insufficient = |template: &Template| ActionDecision {
        template_id: template.id.clone(),
        dppl_left: 0.0,
        dppl_right: 0.0,
        support: 0,
        chosen: CorrectiveAction::Random,
        insufficient_evidence: true,
    };
    if samples.is_empty() {
        return insufficient(template);
    }
    // a scorer failure degrades this template only
    let (dl, dr) = match (
        delta_ppl(model, samples, CorrectiveAction::Left),
        delta_ppl(model, samples, CorrectiveAction::Right),
    ) {
        (Ok(dl), Ok(dr)) => (dl, dr),
        _ => return insufficient(template),
    };
    ActionDecision {
        template_id: template.id.clone(),
        dppl_left: dl,
        dppl_right: dr,
        support: samples.len(),
        chosen: select_action(dl, dr, cfg.alpha),
        insufficient_evidence: false,
    }
}

const STREAM_CHUNK: usize = 512;

/// Collect up to N evidence sentences per template in one streaming pass
/// over the corpus. Stops reading once every template is saturated.
pub fn collect_samples<I>(
    templates: &[Template],
    corpus: I,
    n: usize,
) -> Result<Vec<Vec<(String, MatchSpan)>>>
where
    I: IntoIterator<Item = Result<String>>,
{
    let mut samples: Vec<Vec<(String, MatchSpan)>> = vec![Vec::new(); templates.len()];
    let mut corpus = corpus.into_iter();
    loop {
        let mut chunk = Vec::with_capacity(STREAM_CHUNK);
        for sentence in corpus.by_ref().take(STREAM_CHUNK) {
            chunk.push(sentence?);
        }
        if chunk.is_empty() {
            break;
        }
        let scan = |(slot, template): (&mut Vec<(String, MatchSpan)>, &Template)| {
            for sentence in &chunk {
                if slot.len() >= n {
                    break;
                }
                if let Some(m) = first_match(template, sentence) {
                    slot.push((sentence.clone(), m));
                }
            }
        };
        #[cfg(feature = "parallel")]
        samples
            .par_iter_mut()
            .zip(templates.par_iter())
            .for_each(scan);
        #[cfg(not(feature = "parallel"))]
        samples.iter_mut().zip(templates.iter()).for_each(scan);
        if samples.iter().all(|s| s.len() >= n) {
            break;
        }
    }
    Ok(samples)
}

/// One decision per template, in input order.
pub fn select_actions_batch<M, I>(
    templates: &[Template],
    corpus: I,
    model: &M,
    cfg: &SelectorConfig,
) -> Result<Vec<ActionDecision>>
where
    M: LanguageModel + ?Sized,
    I: IntoIterator<Item = Result<String>>,
{
    let samples = collect_samples(templates, corpus, cfg.n)?;
    let decisions;
    #[cfg(feature = "parallel")]
    {
        decisions = templates
            .par_iter()
            .zip(samples.par_iter())
            .map(|(t, s)| decide(t, s, model, cfg))
            .collect();
    }
    #[cfg(not(feature = "parallel"))]
    {
        decisions = templates
            .iter()
            .zip(samples.iter())
            .map(|(t, s)| decide(t, s, model, cfg))
            .collect();
    }
    Ok(decisions)
}

/// Write decisions back into the template records.
pub fn apply_decisions(templates: &mut [Template], decisions: &[ActionDecision]) {
    for (t, d) in templates.iter_mut().zip(decisions) {
        debug_assert_eq!(t.id, d.template_id);
        t.action = Some(d.chosen);
        t.dppl_left = Some(d.dppl_left);
        t.dppl_right = Some(d.dppl_right);
        t.support = Some(d.support as u64);
    }
}

/// Counts per chosen action across a decision batch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSummary {
    pub left: usize,
    pub right: usize,
    pub random: usize,
    pub insufficient: usize,
}

impl ActionSummary {
    pub fn from_decisions(decisions: &[ActionDecision]) -> ActionSummary {
        let mut s = ActionSummary::default();
        for d in decisions {
            match d.chosen {
                CorrectiveAction::Left => s.left += 1,
                CorrectiveAction::Right => s.right += 1,
                CorrectiveAction::Random => s.random += 1,
            }
            if d.insufficient_evidence {
                s.insufficient += 1;
            }
        }
        s
    }
}
