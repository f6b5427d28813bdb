//! Client for external perplexity scorers.
//!
//! Wire protocol, line-oriented over the child's standard streams:
//! request = one sentence per line (UTF-8, newlines forbidden); response =
//! `ok <total_nll> <token_count>` or `err <message>`, one response line
//! per request line, in order.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::lm::{LanguageModel, ScoreResult};

pub struct ExternalScorer {
    inner: Mutex<Pipes>,
}

struct Pipes {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

impl ExternalScorer {
    /// Spawn `cmd` through the shell and keep its pipes open. Requests on
    /// one connection are serialized.
    pub fn spawn(cmd: &str) -> Result<ExternalScorer> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(cmd)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Scorer(format!("failed to spawn {cmd:?}: {e}")))?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ExternalScorer {
            inner: Mutex::new(Pipes {
                child,
                stdin,
                stdout,
            }),
        })
    }
}

impl LanguageModel for ExternalScorer {
    fn score(&self, sentence: &str) -> Result<ScoreResult> {
        if sentence.contains('\n') {
            return Err(Error::Scorer("sentence contains a newline".into()));
        }
        let mut pipes = self.inner.lock().expect("scorer mutex poisoned");
        writeln!(pipes.stdin, "{sentence}")?;
        pipes.stdin.flush()?;
        let mut line = String::new();
        let n = pipes.stdout.read_line(&mut line)?;
        if n == 0 {
            return Err(Error::Scorer("scorer closed its output stream".into()));
        }
        parse_response(line.trim_end_matches(['\r', '\n']))
    }
}

pub fn parse_response(line: &str) -> Result<ScoreResult> {
    if let Some(msg) = line.strip_prefix("err ") {
        return Err(Error::Scorer(msg.to_string()));
    }
    if line == "err" {
        return Err(Error::Scorer("unspecified scorer error".into()));
    }
    let body = line
        .strip_prefix("ok ")
        .ok_or_else(|| Error::Scorer(format!("malformed response line {line:?}")))?;
    let mut fields = body.split(' ');
    let (nll, count) = match (fields.next(), fields.next(), fields.next()) {
        (Some(nll), Some(count), None) => (nll, count),
        _ => return Err(Error::Scorer(format!("malformed response line {line:?}"))),
    };
    let total_nll: f64 = nll
        .parse()
        .map_err(|_| Error::Scorer(format!("bad total_nll {nll:?}")))?;
    let token_count: u64 = count
        .parse()
        .map_err(|_| Error::Scorer(format!("bad token_count {count:?}")))?;
    if token_count == 0 {
        return Err(Error::Scorer("token_count must be positive".into()));
    }
    Ok(ScoreResult {
        total_nll,
        token_count,
    })
}

impl Drop for ExternalScorer {
    fn drop(&mut self) {
        if let Ok(pipes) = self.inner.get_mut() {
            let _ = pipes.stdin.flush();
        }
        if let Ok(pipes) = self.inner.get_mut() {
            let _ = pipes.child.kill();
            let _ = pipes.child.wait();
        }
    }
}
