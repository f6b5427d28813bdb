//! Perplexity scoring.
//!
//! Anything that maps a sentence to (total negative log-likelihood, token
//! count) can drive action selection: the built-in character n-gram model
//! or an external scorer speaking the line protocol.

mod external;
mod ngram;

pub use external::ExternalScorer;
pub use ngram::{NgramModel, Token};

use crate::error::Result;

/// Score of one sentence: total NLL in natural-log units over
/// `token_count` counted tokens (EOS included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreResult {
    pub total_nll: f64,
    pub token_count: u64,
}

pub trait LanguageModel: Send + Sync {
    fn score(&self, sentence: &str) -> Result<ScoreResult>;
}

/// exp(total_nll / token_count).
pub fn perplexity<M: LanguageModel + ?Sized>(model: &M, sentence: &str) -> Result<f64> {
    let r = model.score(sentence)?;
    Ok((r.total_nll / r.token_count as f64).exp())
}

#[cfg(test)]
pub(crate) struct UniformModel {
    pub vocab_size: u64,
}

#[cfg(test)]
impl LanguageModel for UniformModel {
    fn score(&self, sentence: &str) -> Result<ScoreResult> {
        let t = sentence.chars().count() as u64 + 1;
        Ok(ScoreResult {
            total_nll: t as f64 * (self.vocab_size as f64).ln(),
            token_count: t,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_model_ppl_is_vocab_size() {
        let m = UniformModel { vocab_size: 37 };
        let ppl = perplexity(&m, "他大约五岁左右。").unwrap();
        assert!((ppl - 37.0).abs() < 1e-9);
    }

    #[test]
    fn zero_nll_gives_ppl_one() {
        struct Certain;
        impl LanguageModel for Certain {
            fn score(&self, s: &str) -> Result<ScoreResult> {
                Ok(ScoreResult {
                    total_nll: 0.0,
                    token_count: s.chars().count() as u64 + 1,
                })
            }
        }
        assert_eq!(perplexity(&Certain, "abc").unwrap(), 1.0);
    }
}
