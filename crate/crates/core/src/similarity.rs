//! Profile similarity between a candidate account and genuine accounts, and
//! the impersonator decision rule.
//!
//! Text fields are compared with the cosine of binary character-bigram
//! presence vectors after lowercasing and removing separators, so
//! `barack__obama` and `barackobama` score 1.0. Photo similarity comes from
//! an external [`PhotoOracle`].

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::num::Float;
use crate::record::ProfileRecord;
use crate::textprep::{demojize, replace_entities, EmojiTable};
use crate::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.30;

fn is_separator(c: char) -> bool {
    c == '_' || c == '.' || c.is_whitespace()
}

/// Set of distinct character bigrams after lowercasing and separator removal.
pub fn char_bigrams(s: &str) -> BTreeSet<(char, char)> {
    let chars: Vec<char> = s
        .chars()
        .filter(|c| !is_separator(*c))
        .flat_map(char::to_lowercase)
        .collect();
    chars.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Cosine similarity of binary bigram vectors; 0 when either side has no
/// bigram.
pub fn text_cosine<F: Float>(a: &str, b: &str) -> F {
    let ba = char_bigrams(a);
    let bb = char_bigrams(b);
    if ba.is_empty() || bb.is_empty() {
        return F::zero();
    }
    let shared = ba.intersection(&bb).count();
    if shared == ba.len() && shared == bb.len() {
        return F::one();
    }
    let num = F::from_usize_lossy(shared);
    let den = (F::from_usize_lossy(ba.len()) * F::from_usize_lossy(bb.len())).sqrt();
    (num / den).min(F::one())
}

/// Decides whether two profile photos show the same person.
pub trait PhotoOracle {
    /// `None` when the oracle has no verdict for the pair.
    fn lookup(&self, a: &str, b: &str) -> Option<bool>;

    /// Number of pairs the oracle could not answer.
    fn misses(&self) -> usize {
        0
    }

    fn record_miss(&self) {}
}

/// Precomputed verdicts loaded from `photo_a TAB photo_b TAB {0|1}` lines.
/// Lookups are symmetric.
#[derive(Debug, Default)]
pub struct TablePhotoOracle {
    pairs: HashMap<(String, String), bool>,
    misses: AtomicUsize,
}

impl TablePhotoOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut o = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            let verdict = match parts.as_slice() {
                [_, _, "1"] => true,
                [_, _, "0"] => false,
                _ => {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: "expected photo_a TAB photo_b TAB 0|1".into(),
                    })
                }
            };
            o.insert(parts[0].trim(), parts[1].trim(), verdict);
        }
        Ok(o)
    }

    pub fn insert(&mut self, a: &str, b: &str, same: bool) {
        self.pairs.insert(Self::key(a, b), same);
    }

    fn key(a: &str, b: &str) -> (String, String) {
        if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<_> = self.pairs.iter().collect();
        rows.sort();
        rows.iter()
            .map(|((a, b), v)| format!("{a}\t{b}\t{}\n", u8::from(**v)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl PhotoOracle for TablePhotoOracle {
    fn lookup(&self, a: &str, b: &str) -> Option<bool> {
        self.pairs.get(&Self::key(a, b)).copied()
    }

    fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    fn record_miss(&self) {
        self.misses.fetch_add(1, Ordering::Relaxed);
    }
}

/// Oracle verdict for two profiles. Missing photos, or a pair the oracle
/// cannot answer, count as not similar. Identical photo ids are the same
/// image and therefore similar.
pub fn photo_similar<O: PhotoOracle + ?Sized>(
    candidate: &ProfileRecord,
    genuine: &ProfileRecord,
    oracle: &O,
) -> bool {
    let (Some(a), Some(b)) = (candidate.photo_id.as_deref(), genuine.photo_id.as_deref()) else {
        return false;
    };
    if a.is_empty() || b.is_empty() {
        return false;
    }
    if a == b {
        return true;
    }
    match oracle.lookup(a, b) {
        Some(v) => v,
        None => {
            oracle.record_miss();
            log::warn!("photo oracle has no verdict for ({a}, {b})");
            false
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub candidate: String,
    pub genuine_target: String,
    pub sim_username: f64,
    pub sim_full_name: f64,
    pub sim_biography: f64,
    pub photo_similar: bool,
    pub similar_feature_count: u8,
    pub is_impersonator: bool,
}

impl SimilarityReport {
    /// Assembles a report from raw scores, deriving the count and verdict.
    pub fn from_scores(
        candidate: &str,
        genuine_target: &str,
        sims: [f64; 3],
        photo: bool,
        threshold: f64,
    ) -> Self {
        let count = sims.iter().filter(|&&s| s >= threshold).count() + usize::from(photo);
        Self {
            candidate: candidate.to_string(),
            genuine_target: genuine_target.to_string(),
            sim_username: sims[0],
            sim_full_name: sims[1],
            sim_biography: sims[2],
            photo_similar: photo,
            similar_feature_count: count as u8,
            is_impersonator: count >= 1,
        }
    }
}

/// Biography text as compared: entities and emoji replaced by words.
pub fn prepare_biography(bio: &str, emoji: &EmojiTable) -> String {
    demojize(&replace_entities(bio), emoji)
}

pub fn assess_profile<O: PhotoOracle + ?Sized>(
    candidate: &ProfileRecord,
    genuine: &ProfileRecord,
    threshold: f64,
    oracle: &O,
    emoji: &EmojiTable,
) -> Result<SimilarityReport> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid(format!(
            "threshold {threshold} outside (0, 1]"
        )));
    }
    let sims = [
        text_cosine::<f64>(&candidate.username, &genuine.username),
        text_cosine::<f64>(&candidate.full_name, &genuine.full_name),
        text_cosine::<f64>(
            &prepare_biography(&candidate.biography, emoji),
            &prepare_biography(&genuine.biography, emoji),
        ),
    ];
    let photo = photo_similar(candidate, genuine, oracle);
    Ok(SimilarityReport::from_scores(
        &candidate.username,
        &genuine.username,
        sims,
        photo,
        threshold,
    ))
}

/// Most and least number of similar features across genuine targets. The
/// least count ignores targets with zero similar features unless every
/// target has zero.
pub fn msf_lsf(reports: &[SimilarityReport]) -> Result<(u8, u8)> {
    if reports.is_empty() {
        return Err(Error::invalid("no similarity reports"));
    }
    let msf = reports
        .iter()
        .map(|r| r.similar_feature_count)
        .max()
        .unwrap_or(0);
    let lsf = reports
        .iter()
        .map(|r| r.similar_feature_count)
        .filter(|&c| c > 0)
        .min()
        .unwrap_or(0);
    Ok((msf, lsf))
}

/// Report that defines a candidate's genuine target: highest similar
/// feature count, ties broken by username similarity, then by first
/// position.
pub fn best_report(reports: &[SimilarityReport]) -> Option<&SimilarityReport> {
    reports.iter().reduce(|best, r| {
        let better = r.similar_feature_count > best.similar_feature_count
            || (r.similar_feature_count == best.similar_feature_count
                && r.sim_username > best.sim_username);
        if better {
            r
        } else {
            best
        }
    })
}

/// Outcome of assessing one candidate against the whole genuine community.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub report: SimilarityReport,
    pub msf: u8,
    pub lsf: u8,
}

pub fn identify<O: PhotoOracle + ?Sized>(
    candidate: &ProfileRecord,
    community: &[ProfileRecord],
    threshold: f64,
    oracle: &O,
    emoji: &EmojiTable,
) -> Result<Identification> {
    let reports = community
        .iter()
        .map(|g| assess_profile(candidate, g, threshold, oracle, emoji))
        .collect::<Result<Vec<_>>>()?;
    let (msf, lsf) = msf_lsf(&reports)?;
    let report = best_report(&reports)
        .cloned()
        .ok_or_else(|| Error::invalid("no genuine accounts configured"))?;
    Ok(Identification { report, msf, lsf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn profile(username: &str, photo: Option<&str>) -> ProfileRecord {
        ProfileRecord {
            username: username.into(),
            full_name: String::new(),
            biography: String::new(),
            follower_count: 0,
            followee_count: 0,
            media_count: 0,
            is_private: false,
            is_verified: false,
            has_external_url: false,
            account_age_days: 0,
            photo_id: photo.map(str::to_string),
        }
    }

    fn report_with_count(c: u8) -> SimilarityReport {
        SimilarityReport {
            candidate: "c".into(),
            genuine_target: "g".into(),
            sim_username: 0.0,
            sim_full_name: 0.0,
            sim_biography: 0.0,
            photo_similar: false,
            similar_feature_count: c,
            is_impersonator: c > 0,
        }
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(text_cosine::<f64>("barackobama", "barackobama"), 1.0);
        assert_eq!(text_cosine::<f64>("abcd", "wxyz"), 0.0);
        // {ab,bc,cd} vs {bc,cd,de}: 2 shared / (sqrt 3 * sqrt 3)
        assert!((text_cosine::<f64>("abcd", "bcde") - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(text_cosine::<f64>("@barack__obama", "@barackobama"), 1.0);
        assert_eq!(text_cosine::<f64>("", "abc"), 0.0);
        assert_eq!(text_cosine::<f64>("a", "a"), 0.0);
    }

    #[test]
    fn photo_cases() {
        let mut table = TablePhotoOracle::parse("A\tA\t1\nA\tB\t1\n").unwrap();
        let a = profile("x", Some("A"));
        let b = profile("y", Some("B"));
        let none = profile("z", None);
        assert!(photo_similar(&a, &a, &table));
        assert!(photo_similar(&a, &b, &table));
        assert!(photo_similar(&b, &a, &table));
        assert!(!photo_similar(&none, &a, &table));
        let c = profile("w", Some("C"));
        assert!(!photo_similar(&c, &a, &table));
        assert_eq!(table.misses(), 1);
        table.insert("C", "A", false);
        assert!(!photo_similar(&c, &a, &table));
        assert_eq!(table.misses(), 1);
    }

    #[test]
    fn oracle_file_roundtrip() {
        let table = TablePhotoOracle::parse("B\tA\t1\nC\tD\t0\n").unwrap();
        let again = TablePhotoOracle::parse(&table.to_tsv()).unwrap();
        assert_eq!(again.lookup("A", "B"), Some(true));
        assert_eq!(again.lookup("D", "C"), Some(false));
        assert!(TablePhotoOracle::parse("A\tB\tyes\n").is_err());
    }

    #[test]
    fn decision_rule() {
        let r = SimilarityReport::from_scores("c", "g", [0.0, 0.0, 0.0], false, 0.3);
        assert!(!r.is_impersonator);
        let r = SimilarityReport::from_scores("c", "g", [0.35, 0.0, 0.0], false, 0.3);
        assert!(r.is_impersonator);
        let r = SimilarityReport::from_scores("c", "g", [0.0, 0.0, 0.0], true, 0.3);
        assert!(r.is_impersonator);
        assert_eq!(r.similar_feature_count, 1);
    }

    #[test]
    fn threshold_domain() {
        let t = TablePhotoOracle::new();
        let e = EmojiTable::parse("").unwrap();
        let p = profile("a", None);
        assert!(assess_profile(&p, &p, 0.0, &t, &e).is_err());
        assert!(assess_profile(&p, &p, 1.0, &t, &e).is_ok());
    }

    #[test]
    fn msf_lsf_examples() {
        let r = |cs: &[u8]| cs.iter().map(|&c| report_with_count(c)).collect::<Vec<_>>();
        assert_eq!(msf_lsf(&r(&[3])).unwrap(), (3, 3));
        assert_eq!(msf_lsf(&r(&[1, 3, 2])).unwrap(), (3, 1));
        assert_eq!(msf_lsf(&r(&[0, 0])).unwrap(), (0, 0));
        assert_eq!(msf_lsf(&r(&[0, 2])).unwrap(), (2, 2));
        assert!(msf_lsf(&[]).is_err());
    }

    #[test]
    fn best_report_tie_break() {
        let mut a = report_with_count(1);
        a.sim_username = 0.2;
        a.genuine_target = "a".into();
        let mut b = report_with_count(1);
        b.sim_username = 0.5;
        b.genuine_target = "b".into();
        let reports = [a, b, report_with_count(0)];
        assert_eq!(best_report(&reports).unwrap().genuine_target, "b");
    }

    proptest! {
        #[test]
        fn cosine_is_symmetric_and_bounded(a in "[a-z_. ]{0,12}", b in "[a-z_. ]{0,12}") {
            let ab = text_cosine::<f64>(&a, &b);
            prop_assert_eq!(ab, text_cosine::<f64>(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
            if !char_bigrams(&a).is_empty() {
                prop_assert_eq!(text_cosine::<f64>(&a, &a), 1.0);
            }
        }

        #[test]
        fn raising_threshold_never_creates_impersonators(
            s in prop::array::uniform3(0.0f64..1.0), photo: bool, t1 in 0.01f64..1.0, dt in 0.0f64..0.5
        ) {
            let t2 = (t1 + dt).min(1.0);
            let lo = SimilarityReport::from_scores("c", "g", s, photo, t1);
            let hi = SimilarityReport::from_scores("c", "g", s, photo, t2);
            prop_assert!(!hi.is_impersonator || lo.is_impersonator);
        }
    }
}
