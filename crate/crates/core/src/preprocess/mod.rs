//! The cleaning chain between tagged text and the topic model: tokenize,
//! drop numbers, erase punctuation, filter stop words, fold case, stem.
//!
//! Underscore is a word character throughout so knowledge-base tags like
//! `Barack_Obama` survive as single tokens, and underscore tokens bypass
//! the stemmer — they are identifiers, not English words.

pub mod porter2;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, StopwordListId};
use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub document_id: String,
    pub tokens: Vec<String>,
}

/// Stop-word membership, case-insensitive.
#[derive(Debug, Clone)]
pub struct StopwordList {
    words: HashSet<String>,
}

impl StopwordList {
    /// The vendored Snowball English list (~175 words).
    pub fn english_default() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    /// File format: one lowercase word per line, `#` comments allowed.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn for_config(cfg: &PipelineConfig) -> Result<Self> {
        match cfg.stopword_list_id {
            StopwordListId::EnglishDefault => Ok(Self::english_default()),
            StopwordListId::File => {
                let path = cfg.stopword_file.as_ref().ok_or_else(|| {
                    Error::Input("stopword_list_id = \"file\" requires stopword_file".into())
                })?;
                Self::from_file(path)
            }
        }
    }

    fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.to_lowercase())
            .collect();
        StopwordList { words }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(&token.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Split on whitespace, brackets and commas. Other punctuation stays
/// inside tokens for the punctuation-erasure stage.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| {
        c.is_whitespace() || matches!(c, '[' | ']' | '(' | ')' | '{' | '}' | ',')
    })
    .filter(|s| !s.is_empty())
    .map(str::to_string)
    .collect()
}

fn is_pure_number(token: &str) -> bool {
    let rest = token.strip_prefix(['+', '-']).unwrap_or(token);
    if rest.is_empty() {
        return false;
    }
    let mut digits = 0usize;
    let mut dots = 0usize;
    for c in rest.chars() {
        if c.is_ascii_digit() {
            digits += 1;
        } else if c == '.' {
            dots += 1;
        } else {
            return false;
        }
    }
    digits > 0 && dots <= 1
}

/// Remove tokens that are nothing but a number; mixed alphanumerics stay.
pub fn filter_numbers(tokens: Vec<String>) -> Vec<String> {
    tokens.into_iter().filter(|t| !is_pure_number(t)).collect()
}

/// Strip everything that is not a letter, digit or underscore; tokens
/// emptied by stripping are dropped.
pub fn erase_punctuation(tokens: Vec<String>) -> Vec<String> {
    tokens
        .into_iter()
        .map(|t| t.chars().filter(|&c| is_word_char(c)).collect::<String>())
        .filter(|t| !t.is_empty())
        .collect()
}

pub fn filter_stopwords(tokens: Vec<String>, stopwords: &StopwordList) -> Vec<String> {
    tokens.into_iter().filter(|t| !stopwords.contains(t)).collect()
}

/// Unicode simple (one-to-one) lowercase. The full mapping would expand
/// U+0130 into two characters and break chain idempotence.
fn simple_lowercase_char(c: char) -> char {
    if c == '\u{130}' {
        return 'i';
    }
    let mut lower = c.to_lowercase();
    let first = lower.next().unwrap_or(c);
    if lower.next().is_none() {
        first
    } else {
        c
    }
}

pub fn fold_case(tokens: Vec<String>) -> Vec<String> {
    tokens
        .into_iter()
        .map(|t| t.chars().map(simple_lowercase_char).collect())
        .collect()
}

/// Snowball-stem every token; underscore tokens pass through unstemmed.
pub fn stem(tokens: Vec<String>) -> Vec<String> {
    tokens
        .into_iter()
        .map(|t| if t.contains('_') { t } else { porter2::stem(&t) })
        .collect()
}

/// Snowball is not idempotent (`agreed` → `agre` → `agr`), so the chain
/// iterates each token's stem to a fixed point. Almost every word
/// stabilizes on the first pass; the bound is a safety net.
fn stem_to_fixpoint(token: String) -> String {
    if token.contains('_') {
        return token;
    }
    let mut current = token;
    for _ in 0..4 {
        let next = porter2::stem(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

/// The full chain in pipeline order. Two adjustments keep the chain a
/// projection — running it on its own output changes nothing. Stems are
/// iterated to a fixed point, and a final pass drops tokens that stemming
/// turned into a stop word or that punctuation erasure reduced to a bare
/// number.
pub fn run_chain(text: &str, stopwords: &StopwordList) -> Vec<String> {
    let tokens = tokenize(text);
    let tokens = filter_numbers(tokens);
    let tokens = erase_punctuation(tokens);
    let tokens = filter_stopwords(tokens, stopwords);
    let tokens = fold_case(tokens);
    let tokens: Vec<String> = tokens.into_iter().map(stem_to_fixpoint).collect();
    let tokens = filter_numbers(tokens);
    filter_stopwords(tokens, stopwords)
}

/// Chain a document's text into the token stream the topic model consumes.
pub fn preprocess_document(document_id: &str, text: &str, stopwords: &StopwordList) -> TokenizedDoc {
    TokenizedDoc {
        document_id: document_id.to_string(),
        tokens: run_chain(text, stopwords),
    }
}
