//! Error templates of the form `A.*B` and their corrective actions.
//!
//! A template carries two literals (`left`, `right`), character-level gap
//! bounds, and an optional corrective action together with the perplexity
//! evidence that selected it. Templates are stored as UTF-8 JSON Lines.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Characters that terminate a sentence; forbidden inside template parts
/// and inside the matched gap.
pub const SENTENCE_TERMINALS: [char; 3] = ['。', '！', '？'];

/// Aliases accepted for the gap marker when parsing template text.
/// Longest alias wins at any given position.
const GAP_MARKERS: [&str; 4] = ["……", "...", ".*", "…"];

pub const DEFAULT_GAP_MIN: usize = 0;
pub const DEFAULT_GAP_MAX: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrectiveAction {
    Left,
    Right,
    Random,
}

impl std::fmt::Display for CorrectiveAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorrectiveAction::Left => write!(f, "left"),
            CorrectiveAction::Right => write!(f, "right"),
            CorrectiveAction::Random => write!(f, "random"),
        }
    }
}

impl std::str::FromStr for CorrectiveAction {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "left" => Ok(CorrectiveAction::Left),
            "right" => Ok(CorrectiveAction::Right),
            "random" => Ok(CorrectiveAction::Random),
            other => Err(format!("unknown action {other:?} (expected left|right|random)")),
        }
    }
}

fn default_gap_max() -> usize {
    DEFAULT_GAP_MAX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub id: String,
    pub left: String,
    pub right: String,
    #[serde(default)]
    pub gap_min: usize,
    #[serde(default = "default_gap_max")]
    pub gap_max: usize,
    #[serde(default)]
    pub action: Option<CorrectiveAction>,
    #[serde(default)]
    pub dppl_left: Option<f64>,
    #[serde(default)]
    pub dppl_right: Option<f64>,
    #[serde(default)]
    pub support: Option<u64>,
    #[serde(default)]
    pub source: String,
    /// Unknown keys are preserved across read/rewrite.
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl Template {
    pub fn new(id: impl Into<String>, left: impl Into<String>, right: impl Into<String>) -> Self {
        Template {
            id: id.into(),
            left: left.into(),
            right: right.into(),
            gap_min: DEFAULT_GAP_MIN,
            gap_max: DEFAULT_GAP_MAX,
            action: None,
            dppl_left: None,
            dppl_right: None,
            support: None,
            source: String::new(),
            extra: serde_json::Map::new(),
        }
    }

    /// Parse template text like `大约.*左右` (also accepting `…`, `...`, `……`
    /// as the gap marker).
    pub fn parse(text: &str, id: &str) -> Result<Template> {
        let mut parts: Vec<&str> = Vec::new();
        let mut markers = 0usize;
        let mut seg_start = 0usize;
        let mut pos = 0usize;
        while pos < text.len() {
            let rest = &text[pos..];
            if let Some(m) = GAP_MARKERS.iter().find(|m| rest.starts_with(**m)) {
                parts.push(&text[seg_start..pos]);
                markers += 1;
                pos += m.len();
                seg_start = pos;
            } else {
                pos += rest.chars().next().map(char::len_utf8).unwrap_or(1);
            }
        }
        parts.push(&text[seg_start..]);

        if markers != 1 {
            return Err(Error::TemplateParse {
                id: id.to_string(),
                reason: format!("expected exactly one gap marker, found {markers}"),
            });
        }
        let (left, right) = (parts[0], parts[1]);
        let t = Template::new(id, left, right);
        t.validate()?;
        Ok(t)
    }

    /// Check structural invariants (part contents and gap bounds).
    pub fn validate(&self) -> Result<()> {
        let err = |reason: String| Error::TemplateParse {
            id: self.id.clone(),
            reason,
        };
        if self.left.is_empty() {
            return Err(err("empty left part".into()));
        }
        if self.right.is_empty() {
            return Err(err("empty right part".into()));
        }
        for (name, part) in [("left", &self.left), ("right", &self.right)] {
            if part
                .chars()
                .any(|c| c == '\n' || c == '\r' || SENTENCE_TERMINALS.contains(&c))
            {
                return Err(err(format!(
                    "{name} part contains newline or sentence-terminal punctuation"
                )));
            }
        }
        if self.gap_min > self.gap_max {
            return Err(err(format!(
                "gap_min {} exceeds gap_max {}",
                self.gap_min, self.gap_max
            )));
        }
        Ok(())
    }

    /// Check that a stored Left/Right action agrees with the stored ΔPPL
    /// evidence under the given selection margin. Templates without both
    /// evidence fields are considered consistent.
    pub fn action_consistent_with_evidence(&self, alpha: f64) -> bool {
        let (Some(dl), Some(dr)) = (self.dppl_left, self.dppl_right) else {
            return true;
        };
        match self.action {
            Some(CorrectiveAction::Left) => dl - dr > alpha,
            Some(CorrectiveAction::Right) => dr - dl > alpha,
            Some(CorrectiveAction::Random) | None => true,
        }
    }

    pub fn left_len(&self) -> usize {
        self.left.chars().count()
    }

    pub fn right_len(&self) -> usize {
        self.right.chars().count()
    }
}

/// A located template occurrence. All positions count Unicode scalar
/// values, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchSpan {
    pub template_id: String,
    pub left_start: usize,
    pub left_end: usize,
    pub right_start: usize,
    pub right_end: usize,
    pub sentence_index: usize,
}

impl MatchSpan {
    pub fn gap_len(&self) -> usize {
        self.right_start - self.left_end
    }

    /// Full extent of the match, [left_start, right_end).
    pub fn extent(&self) -> (usize, usize) {
        (self.left_start, self.right_end)
    }
}

/// Read a template set from JSON Lines; blank lines are skipped.
pub fn read_templates<R: BufRead>(reader: R) -> Result<Vec<Template>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let t: Template = serde_json::from_str(&line).map_err(|source| Error::TemplateJson {
            line: i + 1,
            source,
        })?;
        t.validate()?;
        out.push(t);
    }
    Ok(out)
}

/// Write a template set as JSON Lines, one object per template.
pub fn write_templates<W: Write>(mut writer: W, templates: &[Template]) -> Result<()> {
    for t in templates {
        serde_json::to_writer(&mut writer, t)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_templates_file(path: &std::path::Path) -> Result<Vec<Template>> {
    let file = std::fs::File::open(path)?;
    read_templates(std::io::BufReader::new(file))
}

pub fn write_templates_file(path: &std::path::Path, templates: &[Template]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_templates(&mut w, templates)?;
    w.flush()?;
    Ok(())
}
