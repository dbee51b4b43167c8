use std::collections::HashSet;

use super::porter::Stemmer;

/// Tokens shorter than this (in characters) are dropped.
pub const MIN_TOKEN_CHARS: usize = 3;

const BUNDLED: &str = include_str!("../../data/stopwords_en.txt");

/// Fixed English stopword list. Entries are stored with apostrophes removed
/// so they match tokens after punctuation stripping.
#[derive(Debug, Clone, Default)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED)
    }

    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(|l| fold_token(l.trim()))
                .filter(|w| !w.is_empty())
                .collect(),
        )
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn contains(&self, w: &str) -> bool {
        self.0.contains(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{2018}' | '`')
}

fn fold_token(s: &str) -> String {
    s.chars()
        .filter(|c| !is_apostrophe(*c))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Lowercases, strips punctuation (apostrophes are deleted, every other
/// non-alphanumeric character separates tokens), and splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut cleaned = String::with_capacity(text.len());
    for c in text.chars() {
        if is_apostrophe(c) {
            continue;
        }
        if c.is_alphanumeric() {
            cleaned.extend(c.to_lowercase());
        } else {
            cleaned.push(' ');
        }
    }
    cleaned.split_whitespace().map(str::to_string).collect()
}

fn keep(tok: &str, stopwords: &StopWords) -> bool {
    tok.chars().count() >= MIN_TOKEN_CHARS && !stopwords.contains(tok)
}

/// Lowercase, strip punctuation, drop stopwords and short tokens, stem.
///
/// The length and stopword filters run both before and after stemming, and
/// the stemmer is applied until it reaches a fixed point, so the output is
/// stable under re-normalization.
pub fn normalize<S: Stemmer + ?Sized>(
    text: &str,
    stopwords: &StopWords,
    stemmer: &S,
) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| keep(t, stopwords))
        .map(|t| stem_fixpoint(stemmer, t))
        .filter(|t| keep(t, stopwords))
        .collect()
}

fn stem_fixpoint<S: Stemmer + ?Sized>(stemmer: &S, mut word: String) -> String {
    loop {
        let next = stemmer.stem(&word);
        if next == word {
            return word;
        }
        word = next;
    }
}
