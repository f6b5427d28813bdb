//! Character n-gram model with add-k smoothing.
//!
//! Tokens are Unicode scalar values plus reserved BOS/EOS/UNK symbols.
//! n−1 BOS tokens pad the scoring context (not counted in t); one EOS is
//! appended and counted. Characters outside the vocabulary map to UNK at
//! scoring time.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::lm::{LanguageModel, ScoreResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Bos,
    Eos,
    Unk,
    Ch(char),
}

#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    k: f64,
    vocab: BTreeSet<char>,
    counts: HashMap<Vec<Token>, HashMap<Token, u64>>,
    context_totals: HashMap<Vec<Token>, u64>,
}

impl NgramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing_k(&self) -> f64 {
        self.k
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// Count n-grams over a sentence stream. Vocabulary is every
    /// character seen.
    pub fn train<I>(corpus: I, order: usize, k: f64) -> Result<NgramModel>
    where
        I: IntoIterator<Item = String>,
    {
        assert!(order >= 1, "order must be >= 1");
        assert!(k > 0.0, "smoothing k must be positive");
        let mut model = NgramModel {
            order,
            k,
            vocab: BTreeSet::new(),
            counts: HashMap::new(),
            context_totals: HashMap::new(),
        };
        let mut saw_sentence = false;
        for sentence in corpus {
            saw_sentence = true;
            let tokens = tokenize(&sentence, order);
            for c in sentence.chars() {
                model.vocab.insert(c);
            }
            for i in (order - 1)..tokens.len() {
                let context = tokens[i - (order - 1)..i].to_vec();
                *model
                    .counts
                    .entry(context.clone())
                    .or_default()
                    .entry(tokens[i])
                    .or_insert(0) += 1;
                *model.context_totals.entry(context).or_insert(0) += 1;
            }
        }
        if !saw_sentence {
            return Err(Error::EmptyCorpus);
        }
        Ok(model)
    }

    pub fn count(&self, context: &[Token], symbol: Token) -> u64 {
        self.counts
            .get(context)
            .and_then(|m| m.get(&symbol))
            .copied()
            .unwrap_or(0)
    }

    /// p(symbol | context) = (count + k) / (total + k·(|V|+2)).
    /// |V| excludes BOS; the +2 adds EOS and UNK.
    pub fn prob(&self, context: &[Token], symbol: Token) -> f64 {
        let total = self.context_totals.get(context).copied().unwrap_or(0);
        let denom = total as f64 + self.k * (self.vocab.len() as f64 + 2.0);
        (self.count(context, symbol) as f64 + self.k) / denom
    }

    fn map_oov(&self, token: Token) -> Token {
        match token {
            Token::Ch(c) if !self.vocab.contains(&c) => Token::Unk,
            t => t,
        }
    }

    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "NGRAM v1 {} {} {}",
            self.order,
            self.k,
            self.vocab.len()
        )?;
        let mut lines: Vec<String> = Vec::with_capacity(self.counts.len());
        for (context, symbols) in &self.counts {
            let ctx: String = context.iter().map(render_token).collect();
            for (symbol, count) in symbols {
                lines.push(format!(
                    "{}\t{}\t{}",
                    escape(&ctx),
                    escape(&render_token(symbol).to_string()),
                    count
                ));
            }
        }
        lines.sort_unstable();
        for line in lines {
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn save_file(&self, path: &std::path::Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.save(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load<R: BufRead>(reader: R) -> Result<NgramModel> {
        let bad = |msg: &str| Error::ModelFormat(msg.to_string());
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| bad("missing header"))??;
        let fields: Vec<&str> = header.split(' ').collect();
        if fields.len() != 5 || fields[0] != "NGRAM" || fields[1] != "v1" {
            return Err(bad("bad header"));
        }
        let order: usize = fields[2].parse().map_err(|_| bad("bad order"))?;
        let k: f64 = fields[3].parse().map_err(|_| bad("bad smoothing constant"))?;
        let vocab_size: usize = fields[4].parse().map_err(|_| bad("bad vocab size"))?;
        if order < 1 || !(k > 0.0) {
            return Err(bad("invalid order or smoothing constant"));
        }

        let mut counts: HashMap<Vec<Token>, HashMap<Token, u64>> = HashMap::new();
        let mut context_totals: HashMap<Vec<Token>, u64> = HashMap::new();
        let mut vocab = BTreeSet::new();
        for line in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (ctx, sym, count) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(c), Some(s), Some(n), None) => (c, s, n),
                _ => return Err(bad("expected three tab-separated fields")),
            };
            let context: Vec<Token> = unescape(ctx)?.chars().map(parse_token).collect();
            let sym_str = unescape(sym)?;
            let mut sym_chars = sym_str.chars();
            let symbol = match (sym_chars.next(), sym_chars.next()) {
                (Some(c), None) => parse_token(c),
                _ => return Err(bad("symbol field must be one token")),
            };
            if context.len() != order - 1 {
                return Err(bad("context length does not match order"));
            }
            let count: u64 = count.parse().map_err(|_| bad("bad count"))?;
            for t in context.iter().chain(std::iter::once(&symbol)) {
                if let Token::Ch(c) = t {
                    vocab.insert(*c);
                }
            }
            *counts.entry(context.clone()).or_default().entry(symbol).or_insert(0) += count;
            *context_totals.entry(context).or_insert(0) += count;
        }
        if vocab.len() != vocab_size {
            return Err(bad("vocab size does not match counts"));
        }
        Ok(NgramModel {
            order,
            k,
            vocab,
            counts,
            context_totals,
        })
    }

    pub fn load_file(path: &std::path::Path) -> Result<NgramModel> {
        NgramModel::load(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

impl LanguageModel for NgramModel {
    fn score(&self, sentence: &str) -> Result<ScoreResult> {
        let tokens: Vec<Token> = tokenize(sentence, self.order)
            .into_iter()
            .map(|t| self.map_oov(t))
            .collect();
        let mut total_nll = 0.0;
        for i in (self.order - 1)..tokens.len() {
            let context = &tokens[i - (self.order - 1)..i];
            total_nll -= self.prob(context, tokens[i]).ln();
        }
        Ok(ScoreResult {
            total_nll,
            token_count: (tokens.len() - (self.order - 1)) as u64,
        })
    }
}

/// n−1 BOS, the sentence characters, one EOS.
pub fn tokenize(sentence: &str, order: usize) -> Vec<Token> {
    let mut tokens = vec![Token::Bos; order - 1];
    tokens.extend(sentence.chars().map(Token::Ch));
    tokens.push(Token::Eos);
    tokens
}

fn render_token(t: &Token) -> char {
    match t {
        Token::Bos => '\u{01}',
        Token::Eos => '\u{02}',
        Token::Unk => '\u{03}',
        Token::Ch(c) => *c,
    }
}

fn parse_token(c: char) -> Token {
    match c {
        '\u{01}' => Token::Bos,
        '\u{02}' => Token::Eos,
        '\u{03}' => Token::Unk,
        c => Token::Ch(c),
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Result<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('\\') => out.push('\\'),
            _ => return Err(Error::ModelFormat("bad escape sequence".into())),
        }
    }
    Ok(out)
}
