//! Data-parallel batch drivers.
//!
//! Each driver has a `_seq` variant that is always available; the
//! unsuffixed entry point runs on rayon when the `parallel` feature is
//! enabled (the default) and falls back to the sequential path otherwise.
//! Outputs are index-aligned with the input, so both paths produce
//! identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::correct::{apply_correction, AppliedCorrection};
use crate::error::Result;
use crate::lm::{LanguageModel, ScoreResult};
use crate::matcher::CompiledTemplateSet;
use crate::template::{CorrectiveAction, MatchSpan};

pub fn find_matches_all_seq(set: &CompiledTemplateSet, sentences: &[String]) -> Vec<Vec<MatchSpan>> {
    sentences
        .iter()
        .enumerate()
        .map(|(i, s)| set.find_matches_indexed(s, i))
        .collect()
}

pub fn find_matches_all(set: &CompiledTemplateSet, sentences: &[String]) -> Vec<Vec<MatchSpan>> {
    #[cfg(feature = "parallel")]
    {
        sentences
            .par_iter()
            .enumerate()
            .map(|(i, s)| set.find_matches_indexed(s, i))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        find_matches_all_seq(set, sentences)
    }
}

pub fn correct_all_seq(
    set: &CompiledTemplateSet,
    sentences: &[String],
    rng_key: u64,
    force: Option<CorrectiveAction>,
) -> Result<Vec<(String, Vec<AppliedCorrection>)>> {
    sentences
        .iter()
        .map(|s| apply_correction(set, s, rng_key, force))
        .collect()
}

pub fn correct_all(
    set: &CompiledTemplateSet,
    sentences: &[String],
    rng_key: u64,
    force: Option<CorrectiveAction>,
) -> Result<Vec<(String, Vec<AppliedCorrection>)>> {
    #[cfg(feature = "parallel")]
    {
        sentences
            .par_iter()
            .map(|s| apply_correction(set, s, rng_key, force))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        correct_all_seq(set, sentences, rng_key, force)
    }
}

pub fn score_all_seq<M: LanguageModel + ?Sized>(
    model: &M,
    sentences: &[String],
) -> Result<Vec<ScoreResult>> {
    sentences.iter().map(|s| model.score(s)).collect()
}

pub fn score_all<M: LanguageModel + ?Sized>(
    model: &M,
    sentences: &[String],
) -> Result<Vec<ScoreResult>> {
    #[cfg(feature = "parallel")]
    {
        sentences.par_iter().map(|s| model.score(s)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        score_all_seq(model, sentences)
    }
}
