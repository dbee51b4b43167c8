use std::collections::HashMap;

use crate::{Error, Result};

const BUNDLED: &str = include_str!("../../data/sentiment_lexicon.tsv");

/// Word valences in `[-1, 1]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    valence: HashMap<String, f64>,
}

impl Lexicon {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled lexicon is well formed")
    }

    /// `word TAB valence` lines; valences outside `[-1, 1]` are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut valence = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| Error::Parse {
                line: n + 1,
                message: m.to_string(),
            };
            let (w, v) = line
                .split_once('\t')
                .ok_or_else(|| err("expected word TAB valence"))?;
            let v: f64 = v.trim().parse().map_err(|_| err("bad valence"))?;
            if !(-1.0..=1.0).contains(&v) {
                return Err(err("valence outside [-1, 1]"));
            }
            valence.insert(w.trim().to_lowercase(), v);
        }
        Ok(Self { valence })
    }

    pub fn insert(&mut self, word: &str, valence: f64) {
        self.valence
            .insert(word.to_lowercase(), valence.clamp(-1.0, 1.0));
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.valence.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.valence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valence.is_empty()
    }
}

/// Mean valence of the tokens found in the lexicon; 0 when none match.
pub fn sentiment<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> f64 {
    let (sum, n) = tokens
        .iter()
        .filter_map(|t| lexicon.get(&t.as_ref().to_lowercase()))
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).clamp(-1.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bundled_values() {
        let lex = Lexicon::bundled();
        assert!(lex.len() > 5000);
        assert_eq!(sentiment(&["great"], &lex), 0.775);
        assert_eq!(sentiment(&["awful"], &lex), -0.5);
        assert_eq!(sentiment(&["great", "table"], &lex), 0.775);
    }

    #[test]
    fn empty_and_symmetric() {
        let mut lex = Lexicon::default();
        lex.insert("great", 0.8);
        lex.insert("awful", -0.8);
        assert_eq!(sentiment::<&str>(&[], &lex), 0.0);
        assert_eq!(sentiment(&["zzz"], &lex), 0.0);
        assert_eq!(sentiment(&["great"], &lex), 0.8);
        assert_eq!(sentiment(&["great", "awful"], &lex), 0.0);
    }

    #[test]
    fn parse_rejects_out_of_range() {
        assert!(Lexicon::parse("a\t1.5\n").is_err());
        assert!(Lexicon::parse("a 0.5\n").is_err());
    }

    proptest! {
        #[test]
        fn bounded(words in prop::collection::vec("[a-z]{2,8}", 0..30)) {
            let s = sentiment(&words, &Lexicon::bundled());
            prop_assert!((-1.0..=1.0).contains(&s));
        }
    }
}
