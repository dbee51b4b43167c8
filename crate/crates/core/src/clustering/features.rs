use serde::{Deserialize, Serialize};

use crate::num::{Float, Matrix};
use crate::record::{PostRecord, ProfileRecord};
use crate::similarity::Identification;

pub const FEATURE_NAMES: [&str; 17] = [
    "sim_username",
    "sim_full_name",
    "sim_biography",
    "sim_photo",
    "has_external_url",
    "msf",
    "lsf",
    "avg_received_like",
    "avg_hashtag_length",
    "avg_caption_length",
    "avg_received_comment",
    "account_age_days",
    "follower_count",
    "followee_count",
    "media_count",
    "is_private",
    "is_verified",
];

pub const SIM_USERNAME: usize = 0;
/// Heavy-tailed count and average columns: likes, hashtags, caption length,
/// comments, account age, followers, followees, media.
pub const COUNT_FEATURES: [usize; 8] = [7, 8, 9, 10, 11, 12, 13, 14];

/// `ln(1 + x)` on the [`COUNT_FEATURES`] columns of a feature matrix, so a
/// few very large accounts do not dominate the distances after scaling.
pub fn compress_counts<F: Float>(m: &Matrix<F>) -> Matrix<F> {
    let mut out = m.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        for &c in &COUNT_FEATURES {
            row[c] = row[c].max(F::zero()).ln_1p();
        }
    }
    out
}
pub const SIM_PHOTO: usize = 3;
pub const FOLLOWER_COUNT: usize = 12;

/// Per-impersonator clustering features in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterFeatureVector {
    pub profile_id: String,
    pub values: Vec<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Post-derived averages are taken over `posts`; with no posts they are 0.
/// The hashtag average is the mean number of hashtags per post and the
/// caption average is the mean caption length in characters.
pub fn build_cluster_features(
    profile: &ProfileRecord,
    ident: &Identification,
    posts: &[&PostRecord],
) -> ClusterFeatureVector {
    let r = &ident.report;
    let values = vec![
        r.sim_username,
        r.sim_full_name,
        r.sim_biography,
        flag(r.photo_similar),
        flag(profile.has_external_url),
        f64::from(ident.msf),
        f64::from(ident.lsf),
        mean(posts.iter().map(|p| p.like_count as f64)),
        mean(posts.iter().map(|p| p.hashtags.len() as f64)),
        mean(posts.iter().map(|p| p.caption.chars().count() as f64)),
        mean(posts.iter().map(|p| p.comment_count as f64)),
        profile.account_age_days as f64,
        profile.follower_count as f64,
        profile.followee_count as f64,
        profile.media_count as f64,
        flag(profile.is_private),
        flag(profile.is_verified),
    ];
    ClusterFeatureVector {
        profile_id: profile.username.clone(),
        values,
    }
}
