//! Synthetic populations of genuine, fan and bot accounts and their posts.
//!
//! Genuine accounts are modeled on fifteen well-known politicians, athletes
//! and musicians. Fans and bots each copy one of them. Profile strings are
//! built by searching random recombinations of the genuine account's text
//! for one whose bigram cosine lands closest to a drawn target score, so
//! the similarity stage sees the intended distribution.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::record::{write_atomic, write_jsonl, Class, MediaType, PostRecord, ProfileRecord};
use crate::similarity::{prepare_biography, text_cosine, TablePhotoOracle, DEFAULT_THRESHOLD};
use crate::textprep::{count_emoji, EmojiTable, TextPipeline};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Community {
    Politics,
    Sports,
    Music,
}

impl Community {
    pub fn hashtag(self) -> &'static str {
        match self {
            Community::Politics => "politics",
            Community::Sports => "sports",
            Community::Music => "music",
        }
    }

    #[rustfmt::skip]
    fn words(self) -> &'static [&'static str] {
        match self {
            Community::Politics => &[
                "election", "vote", "democracy", "campaign", "policy", "rally", "nation",
                "freedom", "speech", "government", "economy", "citizens", "future", "summit",
                "healthcare", "jobs", "parliament", "reform", "leadership", "debate",
            ],
            Community::Sports => &[
                "match", "goal", "victory", "training", "season", "champions", "final", "team",
                "tournament", "stadium", "league", "tennis", "football", "trophy", "fitness",
                "practice", "slam", "court", "record", "comeback",
            ],
            Community::Music => &[
                "album", "concert", "tour", "song", "stage", "music", "single", "video",
                "studio", "lyrics", "performance", "tickets", "show", "dance", "voice",
                "release", "rehearsal", "festival", "band", "chorus",
            ],
        }
    }
}

/// A genuine account the generator can model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Celebrity {
    pub username: &'static str,
    pub full_name: &'static str,
    pub biography: &'static str,
    pub hashtag: &'static str,
    pub community: Community,
    pub followers: u64,
    pub followees: u64,
    pub comments_per_post: f64,
    pub likes_per_post: f64,
}

impl Celebrity {
    fn first_name(&self) -> &'static str {
        self.full_name
            .split_whitespace()
            .next()
            .unwrap_or(self.full_name)
    }
}

const fn celeb(
    username: &'static str,
    full_name: &'static str,
    biography: &'static str,
    hashtag: &'static str,
    community: Community,
    stats: (u64, u64, f64, f64),
) -> Celebrity {
    Celebrity {
        username,
        full_name,
        biography,
        hashtag,
        community,
        followers: stats.0,
        followees: stats.1,
        comments_per_post: stats.2,
        likes_per_post: stats.3,
    }
}

/// Real-account statistics: followers, followees, comments and likes per
/// post. Taylor Swift has comments disabled.
#[rustfmt::skip]
pub const CELEBRITIES: [Celebrity; 15] = [
    celeb("realdonaldtrump", "Donald J. Trump", "45th President of the United States of America", "donaldtrump", Community::Politics, (16_000_000, 8, 19_500.0, 340_000.0)),
    celeb("barackobama", "Barack Obama", "Dad, husband, President, citizen", "barackobama", Community::Politics, (2_500_000, 14, 13_500.0, 1_000_000.0)),
    celeb("emmanuelmacron", "Emmanuel Macron", "President of the French Republic", "emmanuelmacron", Community::Politics, (1_500_000, 91, 3_800.0, 65_000.0)),
    celeb("borisjohnsonuk", "Boris Johnson", "Prime Minister of the United Kingdom and MP for Uxbridge", "borisjohnson", Community::Politics, (367_000, 254, 600.0, 15_000.0)),
    celeb("theresamay", "Theresa May", "Member of Parliament for Maidenhead", "theresamay", Community::Politics, (157_000, 1, 350.0, 5_600.0)),
    celeb("cristiano", "Cristiano Ronaldo", "Footballer and proud father of four", "cristianoronaldo", Community::Sports, (197_000_000, 445, 35_000.0, 5_500_000.0)),
    celeb("leomessi", "Leo Messi", "Official account of Leo Messi, footballer", "messi", Community::Sports, (140_000_000, 227, 28_000.0, 4_100_000.0)),
    celeb("rafaelnadal", "Rafa Nadal", "Professional tennis player from Manacor", "rafaelnadal", Community::Sports, (8_400_000, 65, 2_500.0, 290_000.0)),
    celeb("rogerfederer", "Roger Federer", "Tennis player, husband and dad of four", "rogerfederer", Community::Sports, (7_100_000, 71, 2_900.0, 400_000.0)),
    celeb("djokernole", "Novak Djokovic", "Professional tennis player and dreamer", "novakdjokovic", Community::Sports, (6_600_000, 777, 1_500.0, 220_000.0)),
    celeb("ladygaga", "Lady Gaga", "Singer, songwriter and actress, new album out now", "ladygaga", Community::Music, (39_000_000, 46, 19_500.0, 1_100_000.0)),
    celeb("beyonce", "Beyonce", "Official account of the artist", "beyonce", Community::Music, (138_000_000, 0, 25_800.0, 2_900_000.0)),
    celeb("taylorswift", "Taylor Swift", "Lover out now, tour dates on the website", "taylorswift", Community::Music, (125_000_000, 0, 0.0, 1_800_000.0)),
    celeb("adele", "Adele", "Singer from Tottenham, London", "adele", Community::Music, (33_000_000, 0, 12_700.0, 1_300_000.0)),
    celeb("madonna", "Madonna", "Queen of pop, artist and activist", "madonna", Community::Music, (14_700_000, 243, 1_800.0, 98_000.0)),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Separability {
    Easy,
    Hard,
}

/// Distribution family for follower, followee and media counts. Both
/// families are parameterized by mean and log-scale spread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeFamily {
    LogNormal,
    Gamma,
}

/// Distribution family for per-post like and comment counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountFamily {
    NegativeBinomial,
    Poisson,
}

/// Mean similarity scores of one class against its target account.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilarityTargets {
    pub username: f64,
    pub full_name: f64,
    pub biography: f64,
    pub photo_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassParams {
    pub follower_mean: f64,
    /// Log-scale spread of follower counts.
    pub follower_sigma: f64,
    pub followee_mean: f64,
    pub media_mean: f64,
    /// Log-scale spread of followee and media counts.
    pub count_sigma: f64,
    pub account_age_mean: f64,
    pub similarity: SimilarityTargets,
    /// Beta concentration (a + b) of similarity draws.
    pub similarity_concentration: f64,
    /// Exactly one feature is pushed over the threshold and the rest stay
    /// low. Without it each feature is drawn independently.
    pub single_hook: bool,
    pub comments_per_post: f64,
    pub likes_per_post: f64,
    /// Negative-binomial shape; smaller means more dispersed.
    pub engagement_shape: f64,
    pub duplicate_caption_prob: f64,
    /// Probability a caption comes from the pool shared by every class.
    pub generic_caption_prob: f64,
    pub hashtags_per_post: f64,
    pub emoji_per_post: f64,
    pub mention_prob: f64,
    pub url_prob: f64,
    pub tagged_per_post: f64,
    pub video_prob: f64,
    pub external_url_prob: f64,
    pub private_prob: f64,
    pub photo_prob: f64,
    pub posts_per_account: usize,
}

impl ClassParams {
    pub fn fan() -> Self {
        Self {
            follower_mean: 101_600.0,
            follower_sigma: 1.0,
            followee_mean: 757.0,
            media_mean: 808.0,
            count_sigma: 0.6,
            account_age_mean: 1100.0,
            similarity: SimilarityTargets {
                username: 0.49,
                full_name: 0.40,
                biography: 0.25,
                photo_rate: 0.71,
            },
            similarity_concentration: 8.0,
            single_hook: false,
            comments_per_post: 24.15,
            likes_per_post: 1_600.0,
            engagement_shape: 2.0,
            duplicate_caption_prob: 0.05,
            generic_caption_prob: 0.3,
            hashtags_per_post: 3.0,
            emoji_per_post: 2.0,
            mention_prob: 0.6,
            url_prob: 0.03,
            tagged_per_post: 0.4,
            video_prob: 0.15,
            external_url_prob: 0.2,
            private_prob: 0.05,
            photo_prob: 0.95,
            posts_per_account: 6,
        }
    }

    pub fn bot() -> Self {
        Self {
            follower_mean: 16_500.0,
            follower_sigma: 1.0,
            followee_mean: 927.0,
            media_mean: 679.0,
            count_sigma: 0.6,
            account_age_mean: 250.0,
            similarity: SimilarityTargets {
                username: 0.13,
                full_name: 0.18,
                biography: 0.18,
                photo_rate: 0.17,
            },
            similarity_concentration: 8.0,
            single_hook: true,
            comments_per_post: 10.01,
            likes_per_post: 774.0,
            engagement_shape: 2.0,
            duplicate_caption_prob: 0.5,
            generic_caption_prob: 0.3,
            hashtags_per_post: 8.0,
            emoji_per_post: 1.5,
            mention_prob: 0.3,
            url_prob: 0.6,
            tagged_per_post: 4.0,
            video_prob: 0.4,
            external_url_prob: 0.7,
            private_prob: 0.0,
            photo_prob: 0.9,
            posts_per_account: 9,
        }
    }

    /// Moves only the posting behavior (engagement, caption style, tags,
    /// links) a fraction `t` of the way to `other`; profiles are untouched.
    pub fn blend_posting(&self, other: &Self, t: f64) -> Self {
        let mixed = self.blend(other, t);
        Self {
            comments_per_post: mixed.comments_per_post,
            likes_per_post: mixed.likes_per_post,
            engagement_shape: mixed.engagement_shape,
            duplicate_caption_prob: mixed.duplicate_caption_prob,
            generic_caption_prob: mixed.generic_caption_prob,
            hashtags_per_post: mixed.hashtags_per_post,
            emoji_per_post: mixed.emoji_per_post,
            mention_prob: mixed.mention_prob,
            url_prob: mixed.url_prob,
            tagged_per_post: mixed.tagged_per_post,
            video_prob: mixed.video_prob,
            ..self.clone()
        }
    }

    /// Moves every numeric parameter a fraction `t` of the way to `other`.
    pub fn blend(&self, other: &Self, t: f64) -> Self {
        let mix = |a: f64, b: f64| a + t * (b - a);
        let s = &self.similarity;
        let o = &other.similarity;
        Self {
            follower_mean: mix(self.follower_mean, other.follower_mean),
            follower_sigma: mix(self.follower_sigma, other.follower_sigma),
            followee_mean: mix(self.followee_mean, other.followee_mean),
            media_mean: mix(self.media_mean, other.media_mean),
            count_sigma: mix(self.count_sigma, other.count_sigma),
            account_age_mean: mix(self.account_age_mean, other.account_age_mean),
            similarity: SimilarityTargets {
                username: mix(s.username, o.username),
                full_name: mix(s.full_name, o.full_name),
                biography: mix(s.biography, o.biography),
                photo_rate: mix(s.photo_rate, o.photo_rate),
            },
            similarity_concentration: mix(
                self.similarity_concentration,
                other.similarity_concentration,
            ),
            single_hook: self.single_hook,
            comments_per_post: mix(self.comments_per_post, other.comments_per_post),
            likes_per_post: mix(self.likes_per_post, other.likes_per_post),
            engagement_shape: mix(self.engagement_shape, other.engagement_shape),
            duplicate_caption_prob: mix(self.duplicate_caption_prob, other.duplicate_caption_prob),
            generic_caption_prob: mix(self.generic_caption_prob, other.generic_caption_prob),
            hashtags_per_post: mix(self.hashtags_per_post, other.hashtags_per_post),
            emoji_per_post: mix(self.emoji_per_post, other.emoji_per_post),
            mention_prob: mix(self.mention_prob, other.mention_prob),
            url_prob: mix(self.url_prob, other.url_prob),
            tagged_per_post: mix(self.tagged_per_post, other.tagged_per_post),
            video_prob: mix(self.video_prob, other.video_prob),
            external_url_prob: mix(self.external_url_prob, other.external_url_prob),
            private_prob: mix(self.private_prob, other.private_prob),
            photo_prob: mix(self.photo_prob, other.photo_prob),
            posts_per_account: self.posts_per_account,
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        let bad = |field: &str| Err(Error::invalid(format!("{what}.{field} is out of range")));
        let nonneg = [
            ("follower_mean", self.follower_mean),
            ("followee_mean", self.followee_mean),
            ("media_mean", self.media_mean),
            ("account_age_mean", self.account_age_mean),
            ("comments_per_post", self.comments_per_post),
            ("likes_per_post", self.likes_per_post),
            ("hashtags_per_post", self.hashtags_per_post),
            ("emoji_per_post", self.emoji_per_post),
            ("tagged_per_post", self.tagged_per_post),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return bad(name);
            }
        }
        let positive = [
            ("follower_sigma", self.follower_sigma),
            ("count_sigma", self.count_sigma),
            ("similarity_concentration", self.similarity_concentration),
            ("engagement_shape", self.engagement_shape),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(name);
            }
        }
        let s = &self.similarity;
        let probs = [
            ("similarity.username", s.username),
            ("similarity.full_name", s.full_name),
            ("similarity.biography", s.biography),
            ("similarity.photo_rate", s.photo_rate),
            ("duplicate_caption_prob", self.duplicate_caption_prob),
            ("generic_caption_prob", self.generic_caption_prob),
            ("mention_prob", self.mention_prob),
            ("url_prob", self.url_prob),
            ("video_prob", self.video_prob),
            ("external_url_prob", self.external_url_prob),
            ("private_prob", self.private_prob),
            ("photo_prob", self.photo_prob),
        ];
        for (name, v) in probs {
            if !(0.0..=1.0).contains(&v) {
                return bad(name);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenuineParams {
    pub posts_per_account: usize,
    pub generic_caption_prob: f64,
    pub engagement_shape: f64,
    pub hashtags_per_post: f64,
    pub emoji_per_post: f64,
    pub mention_prob: f64,
    pub url_prob: f64,
    pub video_prob: f64,
    pub media_mean: f64,
}

impl Default for GenuineParams {
    fn default() -> Self {
        Self {
            posts_per_account: 60,
            generic_caption_prob: 0.3,
            engagement_shape: 4.0,
            hashtags_per_post: 1.0,
            emoji_per_post: 0.7,
            mention_prob: 0.15,
            url_prob: 0.1,
            video_prob: 0.3,
            media_mean: 2_500.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n_genuine: usize,
    pub n_fan: usize,
    pub n_bot: usize,
    pub seed: u64,
    pub separability: Separability,
    pub fan: ClassParams,
    pub bot: ClassParams,
    pub genuine: GenuineParams,
    pub sizes: SizeFamily,
    pub engagement: CountFamily,
    /// Epoch seconds; posts fall in the window before it.
    pub reference_time: i64,
    pub window_days: u32,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_genuine: CELEBRITIES.len(),
            n_fan: 200,
            n_bot: 100,
            seed: 7,
            separability: Separability::Easy,
            fan: ClassParams::fan(),
            bot: ClassParams::bot(),
            genuine: GenuineParams::default(),
            sizes: SizeFamily::LogNormal,
            engagement: CountFamily::NegativeBinomial,
            reference_time: 1_580_515_200,
            window_days: 153,
        }
    }
}

/// How far the posting behavior of fans and bots moves toward each other
/// under [`Separability::Hard`]. Profiles keep their easy-setting values so
/// the two populations stay separable by clustering.
pub const HARD_BLEND: f64 = 0.35;
/// Generic-caption probability floor under [`Separability::Hard`].
pub const HARD_GENERIC_PROB: f64 = 0.5;

impl GeneratorConfig {
    pub fn new(n_genuine: usize, n_fan: usize, n_bot: usize, seed: u64) -> Self {
        Self {
            n_genuine,
            n_fan,
            n_bot,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.fan.validate("fan")?;
        self.bot.validate("bot")?;
        let g = &self.genuine;
        for (name, v) in [
            ("generic_caption_prob", g.generic_caption_prob),
            ("mention_prob", g.mention_prob),
            ("url_prob", g.url_prob),
            ("video_prob", g.video_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("genuine.{name} is out of range")));
            }
        }
        for (name, v) in [
            ("hashtags_per_post", g.hashtags_per_post),
            ("emoji_per_post", g.emoji_per_post),
            ("media_mean", g.media_mean),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("genuine.{name} is out of range")));
            }
        }
        if !(g.engagement_shape.is_finite() && g.engagement_shape > 0.0) {
            return Err(Error::invalid("genuine.engagement_shape is out of range"));
        }
        if self.window_days == 0 {
            return Err(Error::invalid("window_days must be positive"));
        }
        Ok(())
    }

    /// Fan and bot parameters after applying the separability setting.
    pub fn effective_params(&self) -> (ClassParams, ClassParams) {
        match self.separability {
            Separability::Easy => (self.fan.clone(), self.bot.clone()),
            Separability::Hard => {
                let mut fan = self.fan.blend_posting(&self.bot, HARD_BLEND);
                let mut bot = self.bot.blend_posting(&self.fan, HARD_BLEND);
                fan.generic_caption_prob = fan.generic_caption_prob.max(HARD_GENERIC_PROB);
                bot.generic_caption_prob = bot.generic_caption_prob.max(HARD_GENERIC_PROB);
                (fan, bot)
            }
        }
    }
}

/// A fan or bot account with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthProfile {
    pub profile: ProfileRecord,
    pub class: Class,
    /// Username of the genuine account it copies.
    pub target: String,
    pub celebrity: usize,
}

#[derive(Debug)]
pub struct Population {
    pub genuine: Vec<ProfileRecord>,
    /// Index into [`CELEBRITIES`] per genuine account.
    pub genuine_celebrity: Vec<usize>,
    pub candidates: Vec<SynthProfile>,
    pub oracle: TablePhotoOracle,
}

impl Population {
    pub fn labeled(&self) -> Vec<(ProfileRecord, Class)> {
        self.genuine
            .iter()
            .map(|p| (p.clone(), Class::Genuine))
            .chain(self.candidates.iter().map(|c| (c.profile.clone(), c.class)))
            .collect()
    }
}

const GENUINE_STREAM: u64 = 1;
const FAN_STREAM: u64 = 2;
const BOT_STREAM: u64 = 3;
const POST_STREAM: u64 = 4;
const ORDER_STREAM: u64 = 5;

/// Per-entity generator: streams separate the roles, the index separates
/// entities within a role.
fn rng_for(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 40) | index);
    rng
}

fn draw_size<R: Rng>(rng: &mut R, family: SizeFamily, mean: f64, sigma: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let v = match family {
        SizeFamily::LogNormal => {
            let mu = mean.ln() - sigma * sigma / 2.0;
            LogNormal::new(mu, sigma)
                .expect("valid log-normal")
                .sample(rng)
        }
        SizeFamily::Gamma => {
            // Same mean and variance as the log-normal with this spread.
            let shape = 1.0 / (sigma * sigma).exp_m1();
            Gamma::new(shape, mean / shape)
                .expect("valid gamma")
                .sample(rng)
        }
    };
    v.round() as u64
}

fn draw_count<R: Rng>(rng: &mut R, family: CountFamily, mean: f64, shape: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let lambda = match family {
        CountFamily::Poisson => mean,
        CountFamily::NegativeBinomial => Gamma::new(shape, mean / shape)
            .expect("valid gamma")
            .sample(rng),
    };
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("valid poisson").sample(rng) as u64
}

fn draw_poisson<R: Rng>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("valid poisson").sample(rng) as usize
    }
}

fn draw_beta<R: Rng>(rng: &mut R, mean: f64, concentration: f64) -> f64 {
    let m = mean.clamp(0.005, 0.995);
    Beta::new(m * concentration, (1.0 - m) * concentration)
        .expect("valid beta")
        .sample(rng)
}

/// Where a realized similarity must fall relative to the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Above,
    Below,
}

impl Side {
    fn of(score: f64) -> Self {
        if score >= DEFAULT_THRESHOLD {
            Side::Above
        } else {
            Side::Below
        }
    }

    fn admits(self, score: f64) -> bool {
        (score >= DEFAULT_THRESHOLD) == (self == Side::Above)
    }
}

const SEARCH_ROUNDS: usize = 6;
const SEARCH_TRIES: usize = 24;

/// Keeps the generated string whose score is closest to `target` on the
/// required side of the threshold, among those `clean` accepts.
fn search<R: Rng>(
    rng: &mut R,
    target: f64,
    side: Side,
    mut make: impl FnMut(&mut R) -> String,
    score: impl Fn(&str) -> f64,
    clean: impl Fn(&str) -> bool,
    fallback: impl FnOnce() -> String,
) -> String {
    let mut best: Option<(f64, String)> = None;
    for _ in 0..SEARCH_ROUNDS {
        for _ in 0..SEARCH_TRIES {
            let cand = make(rng);
            if cand.trim().is_empty() {
                continue;
            }
            let s = score(&cand);
            if !side.admits(s) || !clean(&cand) {
                continue;
            }
            let d = (s - target).abs();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, cand));
            }
        }
        if best.is_some() {
            break;
        }
    }
    best.map(|(_, s)| s).unwrap_or_else(fallback)
}

/// Random contiguous slice of `chars` whose length is roughly proportional
/// to the target score.
fn slice_for<R: Rng>(rng: &mut R, chars: &[char], target: f64) -> String {
    let n = chars.len();
    if n == 0 {
        return String::new();
    }
    let lo = ((target - 0.3).max(0.0) * n as f64).floor() as usize;
    let hi = (((target + 0.4).min(1.0) * n as f64).ceil() as usize).clamp(lo, n);
    let len = rng.gen_range(lo..=hi);
    let start = rng.gen_range(0..=n - len);
    chars[start..start + len].iter().collect()
}

fn pick<T: Copy, R: Rng>(rng: &mut R, pool: &[T]) -> T {
    pool[rng.gen_range(0..pool.len())]
}

#[rustfmt::skip]
const FAN_AFFIXES: [&str; 16] = [
    "fan", "fans", "club", "daily", "world", "lover", "army", "forever", "updates", "page",
    "hub", "universe", "zone", "fanclub", "nation", "stan",
];
#[rustfmt::skip]
const BOT_AFFIXES: [&str; 16] = [
    "news", "promo", "media", "viral", "trend", "deals", "follow", "likes", "boost", "insta",
    "gram", "shop", "best", "free", "top", "gains",
];
const DIGITS: [&str; 8] = ["1", "7", "10", "23", "30", "99", "2019", "2020"];
const SEPARATORS: [&str; 3] = ["", "_", "."];

fn make_username<R: Rng>(rng: &mut R, reference: &[char], target: f64, affixes: &[&str]) -> String {
    let core = slice_for(rng, reference, target);
    let mut parts: Vec<String> = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        parts.push(pick(rng, affixes).to_string());
    }
    if core.is_empty() && parts.is_empty() {
        parts.push(pick(rng, affixes).to_string());
    }
    if !core.is_empty() {
        if rng.gen_bool(0.6) {
            parts.insert(0, core);
        } else {
            parts.push(core);
        }
    }
    if rng.gen_bool(0.3) {
        parts.push(pick(rng, &DIGITS).to_string());
    }
    parts.join(pick(rng, &SEPARATORS))
}

#[rustfmt::skip]
const FAN_NAME_WORDS: [&str; 12] = [
    "Fan", "Club", "Fans", "Lover", "Army", "Forever", "Updates", "Daily", "World", "Page",
    "Support", "Stan",
];
#[rustfmt::skip]
const BOT_NAME_WORDS: [&str; 12] = [
    "Deals", "Promo", "News", "Media", "Official", "Shop", "Viral", "Trends", "Boost", "Store",
    "Gains", "Network",
];
#[rustfmt::skip]
const GIVEN_NAMES: [&str; 12] = [
    "Alex", "Maria", "John", "Sofia", "David", "Emma", "Lucas", "Olivia", "Daniel", "Mia",
    "Chris", "Nina",
];
#[rustfmt::skip]
const FAMILY_NAMES: [&str; 10] = [
    "Smith", "Brown", "Garcia", "Rossi", "Kowalski", "Silva", "Nguyen", "Lopez", "Khan",
    "Wright",
];

fn title_case(s: &str) -> String {
    s.split_whitespace()
        .map(|w| {
            let mut c = w.chars();
            match c.next() {
                Some(f) => f.to_uppercase().chain(c).collect::<String>(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn make_full_name<R: Rng>(rng: &mut R, reference: &[char], target: f64, class: Class) -> String {
    let core = slice_for(rng, reference, target).trim().to_string();
    let mut parts: Vec<String> = Vec::new();
    match class {
        Class::Bot if rng.gen_bool(0.5) => {
            parts.push(pick(rng, &GIVEN_NAMES).to_string());
            parts.push(pick(rng, &FAMILY_NAMES).to_string());
        }
        Class::Bot => {
            for _ in 0..rng.gen_range(1..=2) {
                parts.push(pick(rng, &BOT_NAME_WORDS).to_string());
            }
        }
        _ => {
            for _ in 0..rng.gen_range(0..=2) {
                parts.push(pick(rng, &FAN_NAME_WORDS).to_string());
            }
        }
    }
    if !core.is_empty() {
        if rng.gen_bool(0.7) {
            parts.insert(0, core);
        } else {
            parts.push(core);
        }
    }
    title_case(&parts.join(" "))
}

#[rustfmt::skip]
const FAN_BIO_PHRASES: [&str; 12] = [
    "biggest fan", "fan account", "not affiliated", "daily photos and updates",
    "love you forever", "follow for more", "since day one", "supporting from far away",
    "turn on notifications", "fan page", "dreaming to meet you", "all about the legend",
];
#[rustfmt::skip]
const BOT_BIO_PHRASES: [&str; 12] = [
    "follow for follow", "dm for promo", "best deals online", "click the link below",
    "earn money from home", "breaking news and updates", "free followers daily",
    "shoutouts available", "business inquiries by dm", "new giveaway every week",
    "trending content", "crypto tips",
];
const FAN_BIO_EMOJI: [&str; 5] = ["😍", "❤", "👑", "💯", "🙌"];
const BOT_BIO_EMOJI: [&str; 5] = ["💰", "🔥", "👇", "✅", "📈"];

fn make_biography<R: Rng>(
    rng: &mut R,
    reference_words: &[&str],
    target: f64,
    class: Class,
    celebrity: &Celebrity,
) -> String {
    let (phrases, emoji): (&[&str], &[&str]) = if class == Class::Bot {
        (&BOT_BIO_PHRASES, &BOT_BIO_EMOJI)
    } else {
        (&FAN_BIO_PHRASES, &FAN_BIO_EMOJI)
    };
    let n = reference_words.len();
    let lo = ((target - 0.3).max(0.0) * n as f64).floor() as usize;
    let hi = (((target + 0.4).min(1.0) * n as f64).ceil() as usize).clamp(lo, n);
    let len = rng.gen_range(lo..=hi);
    let start = rng.gen_range(0..=n - len);
    let mut parts: Vec<String> = Vec::new();
    if len > 0 {
        parts.push(reference_words[start..start + len].join(" "));
    }
    for _ in 0..rng.gen_range(1..=2) {
        parts.push(pick(rng, phrases).to_string());
    }
    parts.shuffle(rng);
    let mut bio = parts.join(". ");
    if rng.gen_bool(0.4) {
        bio.push(' ');
        bio.push_str(pick(rng, emoji));
    }
    if rng.gen_bool(if class == Class::Bot { 0.5 } else { 0.3 }) {
        let tag = if class == Class::Bot {
            pick(rng, &BOT_TAGS)
        } else {
            celebrity.hashtag
        };
        bio.push_str(&format!(" #{tag}"));
    }
    bio
}

/// Target similarities for one account: three text scores and the photo
/// verdict.
fn draw_similarities<R: Rng>(rng: &mut R, p: &ClassParams) -> ([f64; 3], bool) {
    let s = &p.similarity;
    let means = [s.username, s.full_name, s.biography];
    let kappa = p.similarity_concentration;
    if p.single_hook {
        let plan = HookPlan::new(s);
        let hook = plan.pick(rng);
        let mut sims = [0.0; 3];
        for (j, sim) in sims.iter_mut().enumerate() {
            *sim = if hook == j {
                rng.gen_range(HOOK_LOW..HOOK_HIGH)
            } else {
                draw_beta(rng, plan.low[j], kappa)
            };
        }
        return (sims, hook == 3);
    }
    loop {
        let sims = means.map(|m| draw_beta(rng, m, kappa));
        let photo = rng.gen_bool(s.photo_rate);
        if photo || sims.iter().any(|&v| v >= DEFAULT_THRESHOLD) {
            return (sims, photo);
        }
    }
}

const HOOK_LOW: f64 = 0.30;
const HOOK_HIGH: f64 = 0.42;
const HOOK_MEAN: f64 = (HOOK_LOW + HOOK_HIGH) / 2.0;
/// Starting guesses for the below-threshold means of the three text scores.
const HOOK_BASE: [f64; 3] = [0.06, 0.09, 0.09];

/// Mixture that gives every account exactly one similar feature while
/// keeping the class means: feature `j` is the hook with probability
/// `probs[j]` (index 3 is the photo), otherwise it is drawn around `low[j]`.
#[derive(Debug, Clone, PartialEq)]
struct HookPlan {
    probs: [f64; 4],
    low: [f64; 3],
}

impl HookPlan {
    fn new(s: &SimilarityTargets) -> Self {
        let means = [s.username, s.full_name, s.biography];
        let mut probs = [0.0; 4];
        for j in 0..3 {
            probs[j] = ((means[j] - HOOK_BASE[j]) / (HOOK_MEAN - HOOK_BASE[j])).clamp(0.0, 1.0);
        }
        // The photo rate is kept exactly; the text hooks share the rest.
        probs[3] = s.photo_rate;
        let text: f64 = probs[..3].iter().sum();
        if text > 0.0 {
            let scale = (1.0 - s.photo_rate) / text;
            probs[..3].iter_mut().for_each(|p| *p *= scale);
        } else {
            probs[3] = 1.0;
        }
        let mut low = [0.0; 3];
        for j in 0..3 {
            low[j] = if probs[j] < 1.0 {
                ((means[j] - probs[j] * HOOK_MEAN) / (1.0 - probs[j])).clamp(0.0, 0.25)
            } else {
                0.0
            };
        }
        Self { probs, low }
    }

    fn pick<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (j, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return j;
            }
        }
        3
    }
}

fn genuine_profile(index: usize, seed: u64, genuine: &GenuineParams) -> (ProfileRecord, usize) {
    let c = index % CELEBRITIES.len();
    let cel = &CELEBRITIES[c];
    let copy = index / CELEBRITIES.len();
    let username = if copy == 0 {
        cel.username.to_string()
    } else {
        format!("{}{}", cel.username, copy + 1)
    };
    let mut rng = rng_for(seed, GENUINE_STREAM, index as u64);
    let jitter = if copy == 0 {
        1.0
    } else {
        Normal::new(0.0f64, 0.1)
            .expect("valid normal")
            .sample(&mut rng)
            .exp()
    };
    let profile = ProfileRecord {
        photo_id: Some(format!("photo-{username}")),
        username,
        full_name: cel.full_name.to_string(),
        biography: cel.biography.to_string(),
        follower_count: (cel.followers as f64 * jitter).round() as u64,
        followee_count: cel.followees,
        media_count: draw_size(&mut rng, SizeFamily::LogNormal, genuine.media_mean, 0.5),
        is_private: false,
        is_verified: true,
        has_external_url: true,
        account_age_days: rng.gen_range(2_500..4_000),
    };
    (profile, c)
}

struct Reference<'a> {
    account: &'a ProfileRecord,
    username_chars: Vec<char>,
    name_chars: Vec<char>,
    bio_words: Vec<&'a str>,
    bio_prepared: String,
}

impl<'a> Reference<'a> {
    fn new(account: &'a ProfileRecord, emoji: &EmojiTable) -> Self {
        Self {
            account,
            username_chars: account
                .username
                .to_lowercase()
                .chars()
                .filter(|c| c.is_alphanumeric())
                .collect(),
            name_chars: account.full_name.to_lowercase().chars().collect(),
            bio_words: account.biography.split_whitespace().collect(),
            bio_prepared: prepare_biography(&account.biography, emoji),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn candidate_profile(
    rng: &mut ChaCha8Rng,
    class: Class,
    params: &ClassParams,
    sizes: SizeFamily,
    reference: &Reference<'_>,
    others: &[&Reference<'_>],
    celebrity: &Celebrity,
    emoji: &EmojiTable,
    taken: &mut HashSet<String>,
) -> (ProfileRecord, bool) {
    // Strings stay below the threshold against every other account, so the
    // copied account is the one the similarity stage reports.
    let below = |sim: f64| sim < DEFAULT_THRESHOLD;
    let (sims, photo) = draw_similarities(rng, params);
    let affixes: &[&str] = if class == Class::Bot {
        &BOT_AFFIXES
    } else {
        &FAN_AFFIXES
    };
    let ref_user = &reference.account.username;
    let mut username = search(
        rng,
        sims[0],
        Side::of(sims[0]),
        |r| make_username(r, &reference.username_chars, sims[0], affixes),
        |c| text_cosine::<f64>(c, ref_user),
        |c| {
            !taken.contains(c)
                && others
                    .iter()
                    .all(|o| below(text_cosine(c, &o.account.username)))
        },
        || match Side::of(sims[0]) {
            Side::Above => format!("{ref_user}_{}", affixes[0]),
            Side::Below => format!("{}_{}", affixes[1], affixes[2]),
        },
    );
    while taken.contains(&username) {
        username.push_str(pick(rng, &DIGITS));
    }
    taken.insert(username.clone());

    let ref_name = &reference.account.full_name;
    let full_name = search(
        rng,
        sims[1],
        Side::of(sims[1]),
        |r| make_full_name(r, &reference.name_chars, sims[1], class),
        |c| text_cosine::<f64>(c, ref_name),
        |c| {
            others
                .iter()
                .all(|o| below(text_cosine(c, &o.account.full_name)))
        },
        || match Side::of(sims[1]) {
            Side::Above => format!("{ref_name} Fans"),
            Side::Below => "Alex Smith".to_string(),
        },
    );

    let biography = search(
        rng,
        sims[2],
        Side::of(sims[2]),
        |r| make_biography(r, &reference.bio_words, sims[2], class, celebrity),
        |c| text_cosine::<f64>(&prepare_biography(c, emoji), &reference.bio_prepared),
        |c| {
            let prepared = prepare_biography(c, emoji);
            others
                .iter()
                .all(|o| below(text_cosine(&prepared, &o.bio_prepared)))
        },
        || match Side::of(sims[2]) {
            Side::Above => reference.account.biography.clone(),
            Side::Below => String::new(),
        },
    );

    let has_photo = photo || rng.gen_bool(params.photo_prob);
    let profile = ProfileRecord {
        photo_id: has_photo.then(|| format!("photo-{username}")),
        username,
        full_name,
        biography,
        follower_count: draw_size(rng, sizes, params.follower_mean, params.follower_sigma),
        followee_count: draw_size(rng, sizes, params.followee_mean, params.count_sigma),
        media_count: draw_size(rng, sizes, params.media_mean, params.count_sigma),
        is_private: rng.gen_bool(params.private_prob),
        is_verified: false,
        has_external_url: rng.gen_bool(params.external_url_prob),
        account_age_days: draw_size(rng, SizeFamily::LogNormal, params.account_age_mean, 0.5),
    };
    (profile, photo)
}

/// Genuine accounts, fans and bots, plus photo verdicts for every
/// candidate/genuine photo pair.
pub fn gen_profiles(cfg: &GeneratorConfig) -> Result<Population> {
    cfg.validate()?;
    let (fan_params, bot_params) = cfg.effective_params();
    let mut genuine = Vec::with_capacity(cfg.n_genuine);
    let mut genuine_celebrity = Vec::with_capacity(cfg.n_genuine);
    for i in 0..cfg.n_genuine {
        let (p, c) = genuine_profile(i, cfg.seed, &cfg.genuine);
        genuine.push(p);
        genuine_celebrity.push(c);
    }
    // Without a genuine community the candidates still copy the standard
    // accounts, which are simply not emitted.
    let fallback: Vec<(ProfileRecord, usize)> = if genuine.is_empty() {
        (0..CELEBRITIES.len())
            .map(|i| genuine_profile(i, cfg.seed, &cfg.genuine))
            .collect()
    } else {
        Vec::new()
    };
    let targets: Vec<(&ProfileRecord, usize)> = if genuine.is_empty() {
        fallback.iter().map(|(p, c)| (p, *c)).collect()
    } else {
        genuine
            .iter()
            .zip(genuine_celebrity.iter().copied())
            .collect()
    };
    let emoji = TextPipeline::bundled().emoji;
    let references: Vec<Reference<'_>> = targets
        .iter()
        .map(|(p, _)| Reference::new(p, &emoji))
        .collect();

    let mut taken: HashSet<String> = genuine.iter().map(|p| p.username.clone()).collect();
    let mut candidates = Vec::with_capacity(cfg.n_fan + cfg.n_bot);
    let mut photo_flags = Vec::with_capacity(cfg.n_fan + cfg.n_bot);
    for (class, n, params, stream) in [
        (Class::Fan, cfg.n_fan, &fan_params, FAN_STREAM),
        (Class::Bot, cfg.n_bot, &bot_params, BOT_STREAM),
    ] {
        for i in 0..n {
            let mut rng = rng_for(cfg.seed, stream, i as u64);
            let t = rng.gen_range(0..targets.len());
            let celebrity = &CELEBRITIES[targets[t].1];
            let others: Vec<&Reference<'_>> = references
                .iter()
                .zip(&targets)
                .filter(|(_, (_, c))| *c != targets[t].1)
                .map(|(r, _)| r)
                .collect();
            let (profile, photo) = candidate_profile(
                &mut rng,
                class,
                params,
                cfg.sizes,
                &references[t],
                &others,
                celebrity,
                &emoji,
                &mut taken,
            );
            candidates.push(SynthProfile {
                profile,
                class,
                target: targets[t].0.username.clone(),
                celebrity: targets[t].1,
            });
            photo_flags.push(photo);
        }
    }

    let mut oracle = TablePhotoOracle::new();
    for (cand, &photo) in candidates.iter().zip(&photo_flags) {
        let Some(cp) = cand.profile.photo_id.as_deref() else {
            continue;
        };
        for g in &genuine {
            if let Some(gp) = g.photo_id.as_deref() {
                oracle.insert(cp, gp, photo && g.username == cand.target);
            }
        }
    }
    Ok(Population {
        genuine,
        genuine_celebrity,
        candidates,
        oracle,
    })
}

#[rustfmt::skip]
const GENERIC_CAPTIONS: [&str; 20] = [
    "Good morning everyone, have a great day", "Weekend vibes with friends",
    "Another beautiful day in the city", "New post, what do you think?",
    "Throwback to summer memories", "Sunday mood", "Coffee first, then everything else",
    "Thank you for the love and support", "Stay safe and take care",
    "Happy new year to all of you", "Merry Christmas from our family to yours",
    "Some moments are worth remembering", "Sunset never gets old", "Back at it again",
    "Feeling grateful today", "Monday motivation", "Enjoying the little things",
    "Can't wait for what comes next", "Good times and great memories", "Smile, it is a new day",
];
#[rustfmt::skip]
const GENERIC_TAGS: [&str; 8] = [
    "love", "instagood", "photooftheday", "happy", "tbt", "weekend", "mood", "life",
];

#[rustfmt::skip]
const GENUINE_TEMPLATES: [&str; 10] = [
    "Incredible {w1} in {place} tonight. Thank you all for the {w2} and support",
    "Proud of our {w1} and the {w2} ahead. Together we move forward",
    "Working hard on the next {w1}. Big {w2} coming soon",
    "What a {w1}! Grateful for every {w2} along the way",
    "Honored to share this {w1} with everyone in {place}",
    "Behind the scenes of our {w1} and {w2} preparations",
    "A special {w1} today with an amazing group of people",
    "Today we talked about {w1}, {w2} and {w3}. More to come",
    "Back in {place} for another {w1}. See you there", "Every {w1} matters. Thank you {place}",
];
#[rustfmt::skip]
const FAN_TEMPLATES: [&str; 10] = [
    "{name} is the greatest of all time, nobody compares",
    "So happy to see {first} back with a new {w1}! Love you {first}",
    "Who else loves {name}? Comment below", "Throwback to the best {w1} {first} ever gave us",
    "{first} forever! Best {w1} and best {w2}", "Daily dose of {name}, never stop being you",
    "I would give anything to meet {first} one day", "Look at this {w1} from {first}, iconic",
    "{name} fans where are you? Share your favorite {w1}",
    "Still not over this {w1}, {first} you are everything",
];
#[rustfmt::skip]
const BOT_TEMPLATES: [&str; 8] = [
    "Follow us for daily {w1} updates, link in bio", "Get free followers now!!! Visit our page",
    "Breaking {w1} news about {name}, check the link",
    "Giveaway alert, tag 3 friends and follow to win", "Best deals on {w2} merch today only",
    "Earn money from home, dm us for details",
    "Like and share if you agree, follow for more {w1}",
    "Promo available for your page, dm now",
];
#[rustfmt::skip]
const BOT_TAGS: [&str; 16] = [
    "follow", "followforfollow", "like4like", "likeforlikes", "instagood", "viral", "trending",
    "explore", "news", "promo", "giveaway", "free", "followers", "f4f", "l4l", "instadaily",
];
#[rustfmt::skip]
const FAN_TAGS: [&str; 10] = [
    "fan", "fanpage", "fans", "love", "goat", "legend", "queen", "king", "idol", "forever",
];
#[rustfmt::skip]
const PLACES: [&str; 10] = [
    "London", "Paris", "New York", "Madrid", "Miami", "Berlin", "Tokyo", "Rome", "Chicago",
    "Lisbon",
];
const GENUINE_EMOJI: [&str; 6] = ["🙏", "✨", "👏", "💪", "🎉", "🌟"];
const FAN_EMOJI: [&str; 7] = ["😍", "❤", "🔥", "👑", "🐐", "💯", "🙌"];
const BOT_EMOJI: [&str; 7] = ["🔥", "💰", "🎁", "👉", "✅", "📈", "⚡"];

/// Posting behavior resolved for one class.
struct PostStyle<'a> {
    class: Class,
    comments_mean: f64,
    likes_mean: f64,
    engagement_shape: f64,
    duplicate_prob: f64,
    generic_prob: f64,
    hashtags: f64,
    emoji: f64,
    mention_prob: f64,
    url_prob: f64,
    tagged: f64,
    video_prob: f64,
    family: CountFamily,
    emoji_table: &'a EmojiTable,
}

fn fill(template: &str, cel: &Celebrity, rng: &mut ChaCha8Rng) -> String {
    let words = cel.community.words();
    let mut out = template
        .replace("{name}", cel.full_name)
        .replace("{first}", cel.first_name());
    for key in ["{w1}", "{w2}", "{w3}"] {
        out = out.replace(key, pick(rng, words));
    }
    out.replace("{place}", pick(rng, &PLACES))
}

fn short_code(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: &[u8] = b"abcdefghijkmnpqrstuvwxyz23456789";
    (0..6)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
        .collect()
}

struct Draft {
    caption: String,
    hashtags: Vec<String>,
    mentions: Vec<String>,
    has_url: bool,
}

impl Draft {
    fn render(&self) -> String {
        let mut s = self.caption.clone();
        for m in &self.mentions {
            s.push_str(&format!(" @{m}"));
        }
        for h in &self.hashtags {
            s.push_str(&format!(" #{h}"));
        }
        s
    }
}

fn push_unique(v: &mut Vec<String>, s: &str) {
    if !v.iter().any(|x| x == s) {
        v.push(s.to_string());
    }
}

fn draft_caption(
    rng: &mut ChaCha8Rng,
    style: &PostStyle<'_>,
    publisher: &str,
    target: &str,
    cel: &Celebrity,
) -> Draft {
    let mut hashtags = Vec::new();
    let mut mentions = Vec::new();
    let mut has_url = false;
    if rng.gen_bool(style.generic_prob) {
        let mut caption = pick(rng, &GENERIC_CAPTIONS).to_string();
        for _ in 0..rng.gen_range(0..=2) {
            push_unique(&mut hashtags, pick(rng, &GENERIC_TAGS));
        }
        if rng.gen_bool(0.5) {
            caption.push(' ');
            caption.push_str(pick(rng, &["🙂", "☀", "❤", "😊"]));
        }
        return Draft {
            caption,
            hashtags,
            mentions,
            has_url,
        };
    }
    let n_tags = draw_poisson(rng, style.hashtags);
    let (mut caption, emoji_pool): (String, &[&str]) = match style.class {
        Class::Genuine => {
            if rng.gen_bool(0.5) {
                push_unique(&mut hashtags, cel.community.hashtag());
            }
            for _ in 0..n_tags {
                push_unique(
                    &mut hashtags,
                    if rng.gen_bool(0.5) {
                        cel.hashtag
                    } else {
                        pick(rng, cel.community.words())
                    },
                );
            }
            (
                fill(pick(rng, &GENUINE_TEMPLATES), cel, rng),
                &GENUINE_EMOJI,
            )
        }
        Class::Fan => {
            push_unique(&mut hashtags, cel.hashtag);
            for _ in 0..n_tags {
                push_unique(
                    &mut hashtags,
                    if rng.gen_bool(0.3) {
                        cel.community.hashtag()
                    } else {
                        pick(rng, &FAN_TAGS)
                    },
                );
            }
            (fill(pick(rng, &FAN_TEMPLATES), cel, rng), &FAN_EMOJI)
        }
        Class::Bot => {
            push_unique(&mut hashtags, cel.hashtag);
            for _ in 0..n_tags {
                if rng.gen_bool(0.2) {
                    push_unique(&mut hashtags, pick(rng, &CELEBRITIES).hashtag);
                } else {
                    push_unique(&mut hashtags, pick(rng, &BOT_TAGS));
                }
            }
            (fill(pick(rng, &BOT_TEMPLATES), cel, rng), &BOT_EMOJI)
        }
    };
    for _ in 0..draw_poisson(rng, style.emoji) {
        caption.push(' ');
        caption.push_str(pick(rng, emoji_pool));
    }
    if rng.gen_bool(style.url_prob) {
        has_url = true;
        match style.class {
            Class::Bot => caption.push_str(&format!(" https://bit.ly/{}", short_code(rng))),
            _ => caption.push_str(&format!(" https://www.{publisher}.com")),
        }
    }
    if rng.gen_bool(style.mention_prob) {
        match style.class {
            Class::Genuine => {
                let peer = pick(rng, &CELEBRITIES);
                if peer.community == cel.community && peer.username != publisher {
                    push_unique(&mut mentions, peer.username);
                }
            }
            _ => push_unique(&mut mentions, target),
        }
    }
    Draft {
        caption,
        hashtags,
        mentions,
        has_url,
    }
}

fn style_for<'a>(
    class: Class,
    cfg: &GeneratorConfig,
    cel: &Celebrity,
    emoji: &'a EmojiTable,
) -> PostStyle<'a> {
    let (fan, bot) = cfg.effective_params();
    let g = &cfg.genuine;
    match class {
        Class::Genuine => PostStyle {
            class,
            comments_mean: cel.comments_per_post,
            likes_mean: cel.likes_per_post,
            engagement_shape: g.engagement_shape,
            duplicate_prob: 0.0,
            generic_prob: g.generic_caption_prob,
            hashtags: g.hashtags_per_post,
            emoji: g.emoji_per_post,
            mention_prob: g.mention_prob,
            url_prob: g.url_prob,
            tagged: 0.3,
            video_prob: g.video_prob,
            family: cfg.engagement,
            emoji_table: emoji,
        },
        Class::Fan | Class::Bot => {
            let p = if class == Class::Fan { fan } else { bot };
            PostStyle {
                class,
                comments_mean: p.comments_per_post,
                likes_mean: p.likes_per_post,
                engagement_shape: p.engagement_shape,
                duplicate_prob: p.duplicate_caption_prob,
                generic_prob: p.generic_caption_prob,
                hashtags: p.hashtags_per_post,
                emoji: p.emoji_per_post,
                mention_prob: p.mention_prob,
                url_prob: p.url_prob,
                tagged: p.tagged_per_post,
                video_prob: p.video_prob,
                family: cfg.engagement,
                emoji_table: emoji,
            }
        }
    }
}

fn stable_index(s: &str) -> u64 {
    // FNV-1a, so post streams depend only on the publisher name.
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    }) & ((1 << 40) - 1)
}

/// `n` posts for `profile`, which belongs to `class` and copies (or, for
/// genuine accounts, is) the account `target` modeled on `celebrity`.
pub fn gen_posts(
    profile: &ProfileRecord,
    class: Class,
    target: &str,
    celebrity: &Celebrity,
    n: usize,
    cfg: &GeneratorConfig,
) -> Vec<PostRecord> {
    let emoji = TextPipeline::bundled().emoji;
    let style = style_for(class, cfg, celebrity, &emoji);
    let mut rng = rng_for(cfg.seed, POST_STREAM, stable_index(&profile.username));
    let window = i64::from(cfg.window_days) * 86_400;
    let mut previous: Vec<(String, Vec<String>, Vec<String>, bool)> = Vec::new();
    let mut posts = Vec::with_capacity(n);
    for i in 0..n {
        let reuse = !previous.is_empty() && rng.gen_bool(style.duplicate_prob);
        let (caption, hashtags, mentions, has_url) = if reuse {
            previous[rng.gen_range(0..previous.len())].clone()
        } else {
            let d = draft_caption(&mut rng, &style, &profile.username, target, celebrity);
            let entry = (d.render(), d.hashtags, d.mentions, d.has_url);
            previous.push(entry.clone());
            entry
        };
        let mut tagged_users = Vec::new();
        for _ in 0..draw_poisson(&mut rng, style.tagged) {
            let user = match class {
                Class::Bot => format!("{}_{}", pick(&mut rng, &BOT_AFFIXES), rng.gen_range(1..500)),
                Class::Fan => target.to_string(),
                Class::Genuine => pick(&mut rng, &CELEBRITIES).username.to_string(),
            };
            push_unique(&mut tagged_users, &user);
        }
        posts.push(PostRecord {
            post_id: format!("{}-{:04}", profile.username, i),
            publisher_id: profile.username.clone(),
            emoji_count: count_emoji(&caption, style.emoji_table) as u64,
            caption,
            hashtags,
            mentions,
            tagged_users,
            like_count: draw_count(
                &mut rng,
                style.family,
                style.likes_mean,
                style.engagement_shape,
            ),
            comment_count: draw_count(
                &mut rng,
                style.family,
                style.comments_mean,
                style.engagement_shape,
            ),
            media_type: if rng.gen_bool(style.video_prob) {
                MediaType::Video
            } else {
                MediaType::Image
            },
            has_url,
            timestamp: cfg.reference_time - rng.gen_range(1..=window),
        });
    }
    posts
}

/// One row of the ground-truth file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRow {
    pub username: String,
    pub class: Class,
    pub target: String,
}

pub const LABELS_HEADER: &str = "username,class,target";

pub fn labels_to_csv(rows: &[LabelRow]) -> String {
    let mut s = format!("{LABELS_HEADER}\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.username, r.class, r.target));
    }
    s
}

pub fn labels_from_csv(text: &str) -> Result<Vec<LabelRow>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(Error::Parse {
                line: i + 1,
                message: "expected 3 columns".into(),
            });
        }
        out.push(LabelRow {
            username: f[0].to_string(),
            class: f[1].parse().map_err(|e: Error| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?,
            target: f[2].to_string(),
        });
    }
    Ok(out)
}

/// A complete generated dataset.
#[derive(Debug)]
pub struct Dataset {
    pub genuine: Vec<ProfileRecord>,
    /// Fan and bot profiles in shuffled order.
    pub candidates: Vec<ProfileRecord>,
    /// Posts of every account in shuffled order.
    pub posts: Vec<PostRecord>,
    pub labels: Vec<LabelRow>,
    pub oracle: TablePhotoOracle,
}

pub const GENUINE_FILE: &str = "genuine.jsonl";
pub const PROFILES_FILE: &str = "profiles.jsonl";
pub const POSTS_FILE: &str = "posts.jsonl";
pub const LABELS_FILE: &str = "labels.csv";
pub const PHOTO_ORACLE_FILE: &str = "photo_oracle.tsv";

impl Dataset {
    pub fn label_of(&self, username: &str) -> Option<Class> {
        self.labels
            .iter()
            .find(|r| r.username == username)
            .map(|r| r.class)
    }

    /// File name and contents of every output file.
    pub fn files(&self) -> Result<Vec<(&'static str, String)>> {
        Ok(vec![
            (GENUINE_FILE, write_jsonl(&self.genuine)?),
            (PROFILES_FILE, write_jsonl(&self.candidates)?),
            (POSTS_FILE, write_jsonl(&self.posts)?),
            (LABELS_FILE, labels_to_csv(&self.labels)),
            (PHOTO_ORACLE_FILE, self.oracle.to_tsv()),
        ])
    }

    /// Writes every file into `dir`, each one atomically.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, body) in self.files()? {
            let path = dir.join(name);
            write_atomic(&path, body.as_bytes())?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn gen_dataset(cfg: &GeneratorConfig) -> Result<Dataset> {
    let pop = gen_profiles(cfg)?;
    let mut posts = Vec::new();
    let mut labels = Vec::new();
    for (g, &c) in pop.genuine.iter().zip(&pop.genuine_celebrity) {
        posts.extend(gen_posts(
            g,
            Class::Genuine,
            &g.username,
            &CELEBRITIES[c],
            cfg.genuine.posts_per_account,
            cfg,
        ));
        labels.push(LabelRow {
            username: g.username.clone(),
            class: Class::Genuine,
            target: g.username.clone(),
        });
    }
    let (fan, bot) = cfg.effective_params();
    for cand in &pop.candidates {
        let n = if cand.class == Class::Fan {
            fan.posts_per_account
        } else {
            bot.posts_per_account
        };
        posts.extend(gen_posts(
            &cand.profile,
            cand.class,
            &cand.target,
            &CELEBRITIES[cand.celebrity],
            n,
            cfg,
        ));
        labels.push(LabelRow {
            username: cand.profile.username.clone(),
            class: cand.class,
            target: cand.target.clone(),
        });
    }
    let mut order_rng = rng_for(cfg.seed, ORDER_STREAM, 0);
    let mut candidates: Vec<ProfileRecord> =
        pop.candidates.into_iter().map(|c| c.profile).collect();
    candidates.shuffle(&mut order_rng);
    posts.shuffle(&mut order_rng);
    Ok(Dataset {
        genuine: pop.genuine,
        candidates,
        posts,
        labels,
        oracle: pop.oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{identify, PhotoOracle};

    fn mean(v: impl Iterator<Item = f64>) -> f64 {
        let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
        s / n as f64
    }

    fn population(n_fan: usize, n_bot: usize, seed: u64) -> Population {
        gen_profiles(&GeneratorConfig::new(15, n_fan, n_bot, seed)).unwrap()
    }

    #[test]
    fn fan_followers_near_target() {
        let pop = population(1000, 0, 3);
        let m = mean(
            pop.candidates
                .iter()
                .map(|c| c.profile.follower_count as f64),
        );
        assert!((m - 101_600.0).abs() <= 0.2 * 101_600.0, "mean {m}");
    }

    #[test]
    fn bot_username_similarity_near_target() {
        let pop = population(0, 1000, 4);
        let emoji = TextPipeline::bundled().emoji;
        let sims: Vec<f64> = pop
            .candidates
            .iter()
            .map(|c| {
                identify(
                    &c.profile,
                    &pop.genuine,
                    DEFAULT_THRESHOLD,
                    &pop.oracle,
                    &emoji,
                )
                .unwrap()
                .report
                .sim_username
            })
            .collect();
        let m = mean(sims.into_iter());
        assert!((m - 0.13).abs() <= 0.05, "mean {m}");
    }

    #[test]
    fn every_candidate_is_an_impersonator() {
        let pop = population(150, 150, 5);
        let emoji = TextPipeline::bundled().emoji;
        for c in &pop.candidates {
            let id = identify(
                &c.profile,
                &pop.genuine,
                DEFAULT_THRESHOLD,
                &pop.oracle,
                &emoji,
            )
            .unwrap();
            assert!(id.report.is_impersonator, "{}", c.profile.username);
        }
        assert_eq!(pop.oracle.misses(), 0);
    }

    #[test]
    fn hook_plan_keeps_means() {
        let s = ClassParams::bot().similarity;
        let plan = HookPlan::new(&s);
        assert!((plan.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let means = [s.username, s.full_name, s.biography];
        for j in 0..3 {
            let implied = plan.probs[j] * HOOK_MEAN + (1.0 - plan.probs[j]) * plan.low[j];
            assert!((implied - means[j]).abs() < 0.02, "feature {j}: {implied}");
        }
        assert_eq!(plan.probs[3], s.photo_rate);
    }

    #[test]
    fn same_seed_same_population() {
        let a = gen_dataset(&GeneratorConfig::new(15, 20, 20, 9)).unwrap();
        let b = gen_dataset(&GeneratorConfig::new(15, 20, 20, 9)).unwrap();
        assert_eq!(a.files().unwrap(), b.files().unwrap());
        let c = gen_dataset(&GeneratorConfig::new(15, 20, 20, 10)).unwrap();
        assert_ne!(a.files().unwrap(), c.files().unwrap());
    }

    #[test]
    fn zero_posts() {
        let cfg = GeneratorConfig::default();
        let p = &gen_profiles(&GeneratorConfig::new(15, 0, 0, 1))
            .unwrap()
            .genuine[0];
        assert!(gen_posts(p, Class::Genuine, &p.username, &CELEBRITIES[0], 0, &cfg).is_empty());
    }

    #[test]
    fn bot_comments_near_target() {
        let cfg = GeneratorConfig::new(15, 0, 0, 2);
        let p = ProfileRecord {
            username: "promo_news".into(),
            full_name: String::new(),
            biography: String::new(),
            follower_count: 1,
            followee_count: 1,
            media_count: 1,
            is_private: false,
            is_verified: false,
            has_external_url: false,
            account_age_days: 1,
            photo_id: None,
        };
        let posts = gen_posts(&p, Class::Bot, "adele", &CELEBRITIES[13], 1000, &cfg);
        let m = mean(posts.iter().map(|p| p.comment_count as f64));
        assert!((m - 10.01).abs() <= 0.15 * 10.01, "mean {m}");
    }

    fn duplicate_rate(posts: &[PostRecord]) -> f64 {
        let distinct: HashSet<&str> = posts.iter().map(|p| p.caption.as_str()).collect();
        1.0 - distinct.len() as f64 / posts.len() as f64
    }

    #[test]
    fn bots_repeat_captions_more_than_fans() {
        let ds = gen_dataset(&GeneratorConfig::new(15, 100, 60, 11)).unwrap();
        let of_class = |c: Class| -> Vec<PostRecord> {
            ds.posts
                .iter()
                .filter(|p| ds.label_of(&p.publisher_id) == Some(c))
                .take(500)
                .cloned()
                .collect()
        };
        let bots = of_class(Class::Bot);
        let fans = of_class(Class::Fan);
        assert_eq!(bots.len(), 500);
        assert_eq!(fans.len(), 500);
        assert!(duplicate_rate(&bots) > duplicate_rate(&fans));
    }

    #[test]
    fn counts_and_label_classes() {
        let ds = gen_dataset(&GeneratorConfig::new(100, 100, 100, 1)).unwrap();
        assert_eq!(ds.genuine.len() + ds.candidates.len(), 300);
        let classes: HashSet<Class> = ds.labels.iter().map(|r| r.class).collect();
        assert_eq!(classes.len(), 3);
        let names: HashSet<&str> = ds.labels.iter().map(|r| r.username.as_str()).collect();
        assert_eq!(names.len(), 300);
    }

    #[test]
    fn records_validate() {
        let ds = gen_dataset(&GeneratorConfig::new(15, 30, 30, 6)).unwrap();
        for p in ds.genuine.iter().chain(&ds.candidates) {
            p.validate().unwrap();
        }
        for p in &ds.posts {
            p.validate().unwrap();
        }
        assert!(ds.genuine.iter().all(|g| g.is_verified));
    }

    #[test]
    fn labels_csv_roundtrip() {
        let ds = gen_dataset(&GeneratorConfig::new(15, 5, 5, 6)).unwrap();
        assert_eq!(
            labels_from_csv(&labels_to_csv(&ds.labels)).unwrap(),
            ds.labels
        );
    }

    #[test]
    fn files_written_to_directory() {
        let dir = tempfile::tempdir().unwrap();
        let ds = gen_dataset(&GeneratorConfig::new(15, 5, 5, 6)).unwrap();
        let paths = ds.write_to(dir.path()).unwrap();
        assert_eq!(paths.len(), 5);
        let text = std::fs::read_to_string(dir.path().join(POSTS_FILE)).unwrap();
        assert_eq!(text.lines().count(), ds.posts.len());
    }

    #[test]
    fn invalid_probability_rejected() {
        let mut cfg = GeneratorConfig::default();
        cfg.bot.url_prob = 1.5;
        assert!(gen_profiles(&cfg).is_err());
    }
}
