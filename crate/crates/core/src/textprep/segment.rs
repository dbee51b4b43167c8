//! Dictionary-driven splitting of concatenated words ("makeamericagreatagain").
//!
//! A known word of frequency rank `r` costs `ln(r * ln N)` where `N` is the
//! dictionary size; every character not covered by a known word costs
//! [`UNKNOWN_CHAR_COST`]. The minimum-cost split is found by dynamic
//! programming over split points.

use std::collections::HashMap;

use crate::{Error, Result};

pub const UNKNOWN_CHAR_COST: f64 = 100.0;

const BUNDLED: &str = include_str!("../../data/segmentation_words.txt");

#[derive(Debug, Clone)]
pub struct SegmentationDictionary {
    ranks: HashMap<String, usize>,
    total: usize,
    max_word_chars: usize,
}

impl SegmentationDictionary {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled wordlist is well formed")
    }

    /// One word per line, most frequent first. Repeated words keep their
    /// first (best) rank.
    pub fn parse(text: &str) -> Result<Self> {
        let mut ranks = HashMap::new();
        let mut max_word_chars = 0;
        let mut rank = 0;
        for line in text.lines() {
            let w = line.trim().to_lowercase();
            if w.is_empty() {
                continue;
            }
            rank += 1;
            max_word_chars = max_word_chars.max(w.chars().count());
            ranks.entry(w).or_insert(rank);
        }
        if ranks.is_empty() {
            return Err(Error::invalid("segmentation dictionary is empty"));
        }
        Ok(Self {
            total: rank,
            ranks,
            max_word_chars,
        })
    }

    pub fn rank(&self, word: &str) -> Option<usize> {
        self.ranks.get(&word.to_lowercase()).copied()
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn word_cost(&self, word: &str) -> Option<f64> {
        let n = self.total.max(2) as f64;
        self.rank(word).map(|r| (r as f64 * n.ln()).ln())
    }

    /// Minimum-cost segmentation; adjacent unknown characters are merged
    /// into one token. The pieces always concatenate back to `word`
    /// (lowercased).
    pub fn segment(&self, word: &str) -> Vec<String> {
        let chars: Vec<char> = word.to_lowercase().chars().collect();
        let n = chars.len();
        if n == 0 {
            return Vec::new();
        }
        // best[i] = (cost of chars[..i], length of last piece, last piece known)
        let mut best: Vec<(f64, usize, bool)> = vec![(f64::INFINITY, 0, false); n + 1];
        best[0] = (0.0, 0, true);
        let mut piece = String::new();
        for i in 1..=n {
            let mut cand = (best[i - 1].0 + UNKNOWN_CHAR_COST, 1, false);
            let lo = i.saturating_sub(self.max_word_chars);
            for start in lo..i {
                piece.clear();
                piece.extend(&chars[start..i]);
                if let Some(&r) = self.ranks.get(piece.as_str()) {
                    let n_words = self.total.max(2) as f64;
                    let c = best[start].0 + (r as f64 * n_words.ln()).ln();
                    // Strict improvement keeps the earliest, longest-last
                    // candidate on exact ties.
                    if c < cand.0 {
                        cand = (c, i - start, true);
                    }
                }
            }
            best[i] = cand;
        }
        let mut pieces: Vec<(String, bool)> = Vec::new();
        let mut i = n;
        while i > 0 {
            let (_, len, known) = best[i];
            let s: String = chars[i - len..i].iter().collect();
            match pieces.last_mut() {
                Some((prev, false)) if !known => prev.insert_str(0, &s),
                _ => pieces.push((s, known)),
            }
            i -= len;
        }
        pieces.reverse();
        pieces.into_iter().map(|(s, _)| s).collect()
    }

    /// Splits on non-alphanumeric separators first (`barack__obama`), then
    /// segments each run.
    pub fn segment_identifier(&self, ident: &str) -> Vec<String> {
        ident
            .split(|c: char| !c.is_alphanumeric())
            .filter(|p| !p.is_empty())
            .flat_map(|p| self.segment(p))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict() -> SegmentationDictionary {
        SegmentationDictionary::bundled()
    }

    #[test]
    fn slogan() {
        assert_eq!(
            dict().segment("makeamericagreatagain"),
            vec!["make", "america", "great", "again"]
        );
    }

    #[test]
    fn known_word_returns_itself() {
        assert_eq!(dict().segment("obama"), vec!["obama"]);
    }

    #[test]
    fn lady_gaga() {
        let d = dict();
        // Oracle: the two-word split must be cheaper than the alternatives
        // that keep "ladygaga" whole or split it differently.
        let two = d.word_cost("lady").unwrap() + d.word_cost("gaga").unwrap();
        assert!(two < 8.0 * UNKNOWN_CHAR_COST);
        assert_eq!(d.segment("ladygaga"), vec!["lady", "gaga"]);
    }

    #[test]
    fn unknown_run_stays_single_token() {
        let d = SegmentationDictionary::parse("cat\ndog\n").unwrap();
        assert_eq!(d.segment("zzq"), vec!["zzq"]);
        assert_eq!(d.segment("catzzdog"), vec!["cat", "zz", "dog"]);
    }

    #[test]
    fn identifier_separators() {
        assert_eq!(
            dict().segment_identifier("barack__obama"),
            vec!["barack", "obama"]
        );
    }

    #[test]
    fn empty_dictionary_rejected() {
        assert!(SegmentationDictionary::parse("\n\n").is_err());
    }
}
