//! Text normalization and decomposition of captions, biographies, hashtags
//! and usernames.
//!
//! Steps run in a fixed order: entity replacement, emoji conversion, tag
//! extraction, normalization. Hashtags, mentions and usernames are then
//! split into dictionary words.

mod emoji;
mod entities;
mod normalize;
mod porter;
mod segment;
mod tags;

use std::sync::{Arc, OnceLock};

pub use emoji::{count_emoji, demojize, EmojiTable, EMOTICONS, UNMAPPED_EMOJI};
pub use entities::{
    contains_url, count_urls, replace_entities, EMAIL_PATTERN, PHONE_PATTERN, URL_PATTERN,
};
pub use normalize::{normalize, tokenize, StopWords, MIN_TOKEN_CHARS};
pub use porter::{NoStemmer, PorterStemmer, Stemmer};
pub use segment::{SegmentationDictionary, UNKNOWN_CHAR_COST};
pub use tags::{extract_tags, strip_tags, Tags, HASHTAG_PATTERN, MENTION_PATTERN};

/// Output of running one raw text through the full preprocessing chain.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProcessedText {
    /// Normalized and stemmed words, tags removed.
    pub tokens: Vec<String>,
    /// Same filtering, no stemming. Used for lexicon lookups.
    pub plain_tokens: Vec<String>,
    pub hashtags: Vec<String>,
    pub mentions: Vec<String>,
    pub hashtag_words: Vec<String>,
    pub mention_words: Vec<String>,
    pub emoji_count: usize,
    pub has_url: bool,
}

/// Immutable bundle of the dictionaries the preprocessing steps need.
#[derive(Debug, Clone)]
pub struct TextPipeline {
    pub stopwords: Arc<StopWords>,
    pub dictionary: Arc<SegmentationDictionary>,
    pub emoji: Arc<EmojiTable>,
}

impl TextPipeline {
    /// Pipeline over the data files shipped with the crate. Loaded once per
    /// process.
    pub fn bundled() -> Self {
        static SHARED: OnceLock<TextPipeline> = OnceLock::new();
        SHARED
            .get_or_init(|| TextPipeline {
                stopwords: Arc::new(StopWords::bundled()),
                dictionary: Arc::new(SegmentationDictionary::bundled()),
                emoji: Arc::new(EmojiTable::bundled()),
            })
            .clone()
    }

    pub fn process(&self, raw: &str) -> ProcessedText {
        let has_url = contains_url(raw);
        let emoji_count = count_emoji(raw, &self.emoji);
        let text = replace_entities(raw);
        let text = demojize(&text, &self.emoji);
        let tags = extract_tags(&text);
        let body = strip_tags(&text);
        ProcessedText {
            tokens: normalize(&body, &self.stopwords, &PorterStemmer),
            plain_tokens: normalize(&body, &self.stopwords, &NoStemmer),
            hashtag_words: tags
                .hashtags
                .iter()
                .flat_map(|h| self.dictionary.segment_identifier(h))
                .collect(),
            mention_words: tags
                .mentions
                .iter()
                .flat_map(|m| self.dictionary.segment_identifier(m))
                .collect(),
            hashtags: tags.hashtags,
            mentions: tags.mentions,
            emoji_count,
            has_url,
        }
    }

    /// Dictionary words of a username or full name.
    pub fn split_identifier(&self, ident: &str) -> Vec<String> {
        self.dictionary.segment_identifier(&ident.to_lowercase())
    }

    /// Normalized, stemmed tokens of free text (biographies).
    pub fn normalize_text(&self, raw: &str) -> Vec<String> {
        let text = demojize(&replace_entities(raw), &self.emoji);
        normalize(&strip_tags(&text), &self.stopwords, &PorterStemmer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_chain() {
        let p = TextPipeline::bundled();
        let out = p.process("Loving it 🔥 #MakeAmericaGreatAgain @barack_obama https://x.io/a");
        assert_eq!(out.hashtags, vec!["makeamericagreatagain"]);
        assert_eq!(out.hashtag_words, vec!["make", "america", "great", "again"]);
        assert_eq!(out.mention_words, vec!["barack", "obama"]);
        assert_eq!(out.tokens, vec!["love", "fire", "websit"]);
        assert_eq!(out.plain_tokens, vec!["loving", "fire", "website"]);
        assert_eq!(out.emoji_count, 1);
        assert!(out.has_url);
    }

    #[test]
    fn url_fragments_never_leak_into_tags() {
        let p = TextPipeline::bundled();
        let out = p.process("https://site.com/#anchor");
        assert!(out.hashtags.is_empty());
    }
}
