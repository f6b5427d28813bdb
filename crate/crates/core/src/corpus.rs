//! Sentence segmentation and streaming corpus ingestion.
//!
//! Sentences are split after each of 。！？ and after every newline;
//! terminal punctuation stays with its sentence and whitespace-only
//! segments are dropped. Segments are otherwise kept verbatim.

use std::fs::File;
use std::io::{BufRead, BufReader, Lines};
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::template::SENTENCE_TERMINALS;

/// Split one newline-free line after each sentence terminal.
pub fn split_line(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for c in line.chars() {
        current.push(c);
        if SENTENCE_TERMINALS.contains(&c) {
            push_segment(&mut out, std::mem::take(&mut current));
        }
    }
    push_segment(&mut out, current);
    out
}

fn push_segment(out: &mut Vec<String>, seg: String) {
    if !seg.trim().is_empty() {
        out.push(seg);
    }
}

/// Segment a whole text into sentences.
pub fn segment(text: &str) -> Vec<String> {
    text.split('\n').flat_map(split_line).collect()
}

/// Constant-memory sentence stream over one file or a directory of
/// `.txt` files (lexicographic name order).
pub struct SentenceStream {
    files: std::vec::IntoIter<PathBuf>,
    lines: Option<Lines<BufReader<File>>>,
    pending: std::vec::IntoIter<String>,
}

impl SentenceStream {
    pub fn open(path: &Path) -> Result<SentenceStream> {
        let mut files = Vec::new();
        if path.is_dir() {
            for entry in std::fs::read_dir(path)? {
                let p = entry?.path();
                if p.is_file() && p.extension().map_or(false, |e| e == "txt") {
                    files.push(p);
                }
            }
            files.sort();
        } else {
            // errors on missing files surface here
            File::open(path)?;
            files.push(path.to_path_buf());
        }
        Ok(SentenceStream {
            files: files.into_iter(),
            lines: None,
            pending: Vec::new().into_iter(),
        })
    }
}

impl Iterator for SentenceStream {
    type Item = Result<String>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(s) = self.pending.next() {
                return Some(Ok(s));
            }
            if let Some(lines) = &mut self.lines {
                match lines.next() {
                    Some(Ok(line)) => {
                        self.pending = split_line(&line).into_iter();
                        continue;
                    }
                    Some(Err(e)) => return Some(Err(e.into())),
                    None => self.lines = None,
                }
            }
            match self.files.next() {
                Some(path) => match File::open(&path) {
                    Ok(f) => self.lines = Some(BufReader::new(f).lines()),
                    Err(e) => return Some(Err(e.into())),
                },
                None => return None,
            }
        }
    }
}

/// Open a file or directory as a sentence stream.
pub fn open_corpus(path: &Path) -> Result<SentenceStream> {
    SentenceStream::open(path)
}
