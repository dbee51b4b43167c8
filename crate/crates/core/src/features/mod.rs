//! Classifier inputs: a fused text document per post, its integer encoding,
//! and a fixed-order numeric metadata vector.

mod lda;
mod sentiment;
mod vocab;

pub use lda::{lda_fit, LdaParams, TopicModel, TopicState, INFER_ITERS};
pub use sentiment::{sentiment, Lexicon};
pub use vocab::{Vocabulary, DEFAULT_VOCAB_CAP, PAD_ID};

use crate::record::{MediaType, PostRecord, ProfileRecord};
use crate::similarity::SimilarityReport;
use crate::textprep::{ProcessedText, TextPipeline};
use crate::{Error, Result};

pub const DEFAULT_SEQUENCE_LEN: usize = 100;
/// Words of the dominant topic appended to each document.
pub const TOPIC_WORDS: usize = 3;
const SECONDS_PER_DAY: f64 = 86_400.0;

/// `n / d`, or `n / (d + 1)` when `d` is zero.
pub fn ratio(numerator: f64, denominator: f64) -> f64 {
    if denominator == 0.0 {
        numerator / (denominator + 1.0)
    } else {
        numerator / denominator
    }
}

fn merge_tags(listed: &[String], extracted: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in listed
        .iter()
        .map(|t| t.trim_start_matches(['#', '@']).to_lowercase())
        .chain(extracted.iter().cloned())
    {
        if !t.is_empty() && !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

/// Preprocessed text of one post. Tags listed on the record and tags found
/// in the caption are merged, duplicates dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PostText {
    pub caption: ProcessedText,
    pub hashtags: Vec<String>,
    pub mentions: Vec<String>,
    pub hashtag_words: Vec<String>,
    pub mention_words: Vec<String>,
}

pub fn analyze_post(pipeline: &TextPipeline, post: &PostRecord) -> PostText {
    let caption = pipeline.process(&post.caption);
    let hashtags = merge_tags(&post.hashtags, &caption.hashtags);
    let mentions = merge_tags(&post.mentions, &caption.mentions);
    let hashtag_words = hashtags
        .iter()
        .flat_map(|h| pipeline.split_identifier(h))
        .collect();
    let mention_words = mentions
        .iter()
        .flat_map(|m| pipeline.split_identifier(m))
        .collect();
    PostText {
        caption,
        hashtags,
        mentions,
        hashtag_words,
        mention_words,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProfileText {
    pub bio: ProcessedText,
    pub name_words: Vec<String>,
}

pub fn analyze_profile(pipeline: &TextPipeline, profile: &ProfileRecord) -> ProfileText {
    let mut name_words = pipeline.split_identifier(&profile.username);
    name_words.extend(pipeline.split_identifier(&profile.full_name));
    ProfileText {
        bio: pipeline.process(&profile.biography),
        name_words,
    }
}

/// Tokens the topic model sees for a post: caption words and hashtag words.
pub fn topic_document(post: &PostText) -> Vec<String> {
    post.caption
        .tokens
        .iter()
        .chain(&post.hashtag_words)
        .cloned()
        .collect()
}

/// Top words of the dominant topic of `post`, empty when no topic applies.
pub fn topic_words<'m>(model: &'m TopicModel, post: &PostText) -> Vec<&'m str> {
    model
        .dominant_topic(&topic_document(post))
        .map(|t| model.top_words(t, TOPIC_WORDS))
        .unwrap_or_default()
}

/// Fused document: caption tokens, hashtag words, mention words, biography
/// tokens, username and full-name words, topic words; single spaces.
pub fn build_corpus_entry<S: AsRef<str>>(
    post: &PostText,
    profile: &ProfileText,
    topic_words: &[S],
) -> String {
    let parts = post
        .caption
        .tokens
        .iter()
        .map(String::as_str)
        .chain(post.hashtag_words.iter().map(String::as_str))
        .chain(post.mention_words.iter().map(String::as_str))
        .chain(profile.bio.tokens.iter().map(String::as_str))
        .chain(profile.name_words.iter().map(String::as_str))
        .chain(topic_words.iter().map(AsRef::as_ref));
    parts
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

pub const METADATA_NAMES: [&str; 22] = [
    "like_count",
    "comment_count",
    "tagged_users_count",
    "mention_users_count",
    "hashtag_count",
    "caption_sentiment",
    "hashtag_sentiment",
    "media_type",
    "emoji_count",
    "has_url",
    "date_age_days",
    "sim_username",
    "sim_full_name",
    "sim_biography",
    "sim_photo",
    "follower",
    "followee",
    "post_count",
    "following_followers_ratio",
    "followers_posts_ratio",
    "bio_emoji_count",
    "bio_hashtag_count",
];

pub const METADATA_DIM: usize = METADATA_NAMES.len();

/// Columns holding unbounded counts (log-compressed before scaling).
pub const COUNT_COLUMNS: [usize; 12] = [0, 1, 2, 3, 4, 8, 15, 16, 17, 18, 19, 20];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetadataVector(pub [f64; METADATA_DIM]);

impl MetadataVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        METADATA_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.0[i])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

pub struct MetadataInputs<'a> {
    pub post: &'a PostRecord,
    pub post_text: &'a PostText,
    pub profile: &'a ProfileRecord,
    pub profile_text: &'a ProfileText,
    pub similarity: &'a SimilarityReport,
    /// Epoch seconds the post age is measured from.
    pub reference_time: i64,
}

pub fn metadata_vector(inp: &MetadataInputs<'_>, lexicon: &Lexicon) -> Result<MetadataVector> {
    let p = inp.post;
    let t = inp.post_text;
    let prof = inp.profile;
    let s = inp.similarity;
    let follower = prof.follower_count as f64;
    let followee = prof.followee_count as f64;
    let posts = prof.media_count as f64;
    let v = MetadataVector([
        p.like_count as f64,
        p.comment_count as f64,
        p.tagged_users.len() as f64,
        t.mentions.len() as f64,
        t.hashtags.len() as f64,
        sentiment(&t.caption.plain_tokens, lexicon),
        sentiment(&t.hashtag_words, lexicon),
        match p.media_type {
            MediaType::Image => 0.0,
            MediaType::Video => 1.0,
        },
        (p.emoji_count as f64).max(t.caption.emoji_count as f64),
        f64::from(u8::from(p.has_url || t.caption.has_url)),
        (inp.reference_time - p.timestamp) as f64 / SECONDS_PER_DAY,
        s.sim_username,
        s.sim_full_name,
        s.sim_biography,
        f64::from(u8::from(s.photo_similar)),
        follower,
        followee,
        posts,
        ratio(followee, follower),
        ratio(follower, posts),
        inp.profile_text.bio.emoji_count as f64,
        inp.profile_text.bio.hashtags.len() as f64,
    ]);
    if !v.is_finite() {
        return Err(Error::Numeric(format!(
            "non-finite metadata for post {}",
            p.post_id
        )));
    }
    Ok(v)
}

/// Tab-separated with a header row. Values use the shortest representation
/// that parses back to the same bits.
pub fn metadata_to_tsv(rows: &[MetadataVector]) -> String {
    let mut s = METADATA_NAMES.join("\t");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.0.iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&cells.join("\t"));
        s.push('\n');
    }
    s
}

pub fn metadata_from_tsv(text: &str) -> Result<Vec<MetadataVector>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty metadata file".into()))?;
    if header.split('\t').ne(METADATA_NAMES.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: "unexpected metadata header".into(),
        });
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let err = |m: String| Error::Parse {
            line: n + 2,
            message: m,
        };
        let mut vals = [0.0; METADATA_DIM];
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != METADATA_DIM {
            return Err(err(format!(
                "expected {METADATA_DIM} columns, got {}",
                cells.len()
            )));
        }
        for (slot, c) in vals.iter_mut().zip(cells) {
            *slot = c.parse().map_err(|_| err(format!("bad number {c:?}")))?;
        }
        out.push(MetadataVector(vals));
    }
    Ok(out)
}
