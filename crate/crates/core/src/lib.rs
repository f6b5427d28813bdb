//! Automatic error templates for rule-based text correction.
//!
//! The pipeline mines `A.*B` error templates from question-page dumps,
//! picks each template's corrective deletion by language-model perplexity
//! reduction, applies templates around an optional external correction
//! model, and scores output with character-level P/R/Fβ.

pub mod batch;
pub mod corpus;
pub mod correct;
pub mod error;
pub mod evaluate;
pub mod lm;
pub mod matcher;
pub mod miner;
pub mod selector;
pub mod template;

pub use error::{Error, Result};
pub use matcher::CompiledTemplateSet;
pub use template::{CorrectiveAction, MatchSpan, Template};
