use std::collections::HashMap;

use crate::{Error, Result};

pub const DEFAULT_VOCAB_CAP: usize = 30_000;
pub const PAD_ID: u32 = 0;

/// Token to index map. Index 0 is padding, `1..=V` are tokens by descending
/// corpus frequency (ties by first occurrence), `V + 1` is out-of-vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Fits on whitespace-separated documents.
    pub fn fit<S: AsRef<str>>(corpus: &[S], cap: usize) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::invalid("cannot fit a vocabulary on an empty corpus"));
        }
        Self::fit_tokens(corpus.iter().map(|d| d.as_ref().split_whitespace()), cap)
    }

    pub fn fit_tokens<'a, D, I>(docs: D, cap: usize) -> Result<Self>
    where
        D: IntoIterator<Item = I>,
        I: IntoIterator<Item = &'a str>,
    {
        // token -> (count, first position)
        let mut seen: HashMap<&'a str, (usize, usize)> = HashMap::new();
        let mut pos = 0;
        for doc in docs {
            for t in doc {
                seen.entry(t).or_insert((0, pos)).0 += 1;
                pos += 1;
            }
        }
        let mut ranked: Vec<(&str, usize, usize)> =
            seen.into_iter().map(|(t, (c, p))| (t, c, p)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
        ranked.truncate(cap);
        Ok(Self::from_ordered(
            ranked.into_iter().map(|(t, _, _)| t.to_string()).collect(),
        ))
    }

    fn from_ordered(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32 + 1))
            .collect();
        Self { tokens, index }
    }

    /// Number of indexed tokens (V).
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn oov_id(&self) -> u32 {
        self.tokens.len() as u32 + 1
    }

    /// Rows an embedding table over this vocabulary needs (V + 2).
    pub fn id_space(&self) -> usize {
        self.tokens.len() + 2
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(self.oov_id())
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        if id == PAD_ID {
            return None;
        }
        self.tokens.get(id as usize - 1).map(String::as_str)
    }

    /// Token ids of `text`, padded with zeros or cut at the tail to `len`.
    pub fn encode(&self, text: &str, len: usize) -> Vec<u32> {
        self.encode_tokens(text.split_whitespace(), len)
    }

    pub fn encode_tokens<'a, I: IntoIterator<Item = &'a str>>(
        &self,
        tokens: I,
        len: usize,
    ) -> Vec<u32> {
        let mut ids: Vec<u32> = tokens.into_iter().take(len).map(|t| self.id(t)).collect();
        ids.resize(len, PAD_ID);
        ids
    }

    /// Inverse of [`encode`](Self::encode) for in-vocabulary ids; padding and
    /// OOV ids are skipped.
    pub fn decode(&self, ids: &[u32]) -> Vec<&str> {
        ids.iter().filter_map(|&i| self.token(i)).collect()
    }

    /// `token TAB index` lines in index order.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            s.push_str(t);
            s.push('\t');
            s.push_str(&(i + 1).to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let parse_err = |m: &str| Error::Parse {
                line: n + 1,
                message: m.to_string(),
            };
            let (tok, idx) = line
                .rsplit_once('\t')
                .ok_or_else(|| parse_err("expected token TAB index"))?;
            let idx: usize = idx.trim().parse().map_err(|_| parse_err("bad index"))?;
            if idx != tokens.len() + 1 {
                return Err(parse_err("indices must be contiguous from 1"));
            }
            if tok.is_empty() || tok.contains(char::is_whitespace) {
                return Err(parse_err("token must be non-empty without whitespace"));
            }
            tokens.push(tok.to_string());
        }
        let v = Self::from_ordered(tokens);
        if v.index.len() != v.tokens.len() {
            return Err(Error::Format("duplicate token in vocabulary file".into()));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn frequency_order() {
        let v = Vocabulary::fit(&["b b a", "a c a"], DEFAULT_VOCAB_CAP).unwrap();
        assert_eq!(v.id("a"), 1);
        assert_eq!(v.id("b"), 2);
        assert_eq!(v.id("c"), 3);
        assert_eq!(v.oov_id(), 4);
    }

    #[test]
    fn cap_sends_rest_to_oov() {
        let v = Vocabulary::fit(&["b b a", "a c a"], 2).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.id("c"), v.oov_id());
        assert_eq!(v.oov_id(), 3);
    }

    #[test]
    fn ties_by_first_occurrence() {
        let v = Vocabulary::fit(&["y x", "x y z"], 10).unwrap();
        assert_eq!(v.decode(&[1, 2, 3]), vec!["y", "x", "z"]);
    }

    #[test]
    fn single_and_empty() {
        assert_eq!(Vocabulary::fit(&["x"], 10).unwrap().id("x"), 1);
        assert!(Vocabulary::fit::<&str>(&[], 10).is_err());
    }

    #[test]
    fn encode_pad_truncate_oov() {
        let v = Vocabulary::fit(&["a b c d e a"], 10).unwrap();
        assert_eq!(v.encode("a b", 4), vec![1, 2, 0, 0]);
        assert_eq!(v.encode("a b c d e", 3), vec![1, 2, 3]);
        assert_eq!(v.encode("zzz", 2), vec![v.oov_id(), 0]);
        assert_eq!(v.encode("", 2), vec![0, 0]);
    }

    #[test]
    fn tsv_roundtrip() {
        let v = Vocabulary::fit(&["b b a", "a c a"], 10).unwrap();
        let s = v.to_tsv();
        assert_eq!(s, "a\t1\nb\t2\nc\t3\n");
        assert_eq!(Vocabulary::from_tsv(&s).unwrap(), v);
        assert!(Vocabulary::from_tsv("a\t2\n").is_err());
        assert!(Vocabulary::from_tsv("a\t1\na\t2\n").is_err());
    }

    proptest! {
        #[test]
        fn indices_are_a_bijection(docs in prop::collection::vec("[a-e]{1,2}( [a-e]{1,2}){0,6}", 1..8), cap in 1usize..40) {
            let v = Vocabulary::fit(&docs, cap).unwrap();
            let distinct: std::collections::HashSet<&str> = docs.iter().flat_map(|d| d.split_whitespace()).collect();
            prop_assert_eq!(v.len(), cap.min(distinct.len()));
            let mut ids: Vec<u32> = v.tokens.iter().map(|t| v.id(t)).collect();
            ids.sort_unstable();
            prop_assert_eq!(ids, (1..=v.len() as u32).collect::<Vec<_>>());
        }

        #[test]
        fn encode_decode_keeps_known_tokens(docs in prop::collection::vec("[a-h]( [a-h]){0,9}", 1..5), cap in 1usize..9) {
            let v = Vocabulary::fit(&docs, cap).unwrap();
            for d in &docs {
                let ids = v.encode(d, 64);
                let known: Vec<&str> = d.split_whitespace().filter(|t| v.id(t) != v.oov_id()).collect();
                prop_assert_eq!(v.decode(&ids), known);
            }
        }
    }
}
