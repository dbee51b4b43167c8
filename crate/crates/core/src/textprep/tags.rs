use std::sync::OnceLock;

use regex::Regex;

/// Marker runs (`#`, `##`, ...) followed by word characters. Repeated
/// markers collapse, so `##x` yields the hashtag `x`.
pub const HASHTAG_PATTERN: &str = r"#+([\p{L}\p{N}_]+)";
/// Instagram handles may contain dots; a trailing dot is punctuation.
pub const MENTION_PATTERN: &str = r"@+([\p{L}\p{N}_](?:[\p{L}\p{N}_.]*[\p{L}\p{N}_])?)";

fn hashtag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(HASHTAG_PATTERN).expect("hashtag regex"))
}

fn mention_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(MENTION_PATTERN).expect("mention regex"))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tags {
    pub hashtags: Vec<String>,
    pub mentions: Vec<String>,
}

pub fn extract_tags(text: &str) -> Tags {
    Tags {
        hashtags: hashtag_re()
            .captures_iter(text)
            .map(|c| c[1].to_lowercase())
            .collect(),
        mentions: mention_re()
            .captures_iter(text)
            .map(|c| c[1].to_lowercase())
            .collect(),
    }
}

/// Removes hashtag and mention spans so they are not tokenized twice.
pub fn strip_tags(text: &str) -> String {
    let s = hashtag_re().replace_all(text, " ");
    mention_re().replace_all(&s, " ").into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic() {
        let t = extract_tags("go #TeamA with @bob");
        assert_eq!(t.hashtags, vec!["teama"]);
        assert_eq!(t.mentions, vec!["bob"]);
    }

    #[test]
    fn doubled_marker() {
        let t = extract_tags("##x");
        assert_eq!(t.hashtags, vec!["x"]);
        assert!(t.mentions.is_empty());
    }

    #[test]
    fn empty() {
        assert_eq!(extract_tags(""), Tags::default());
    }

    #[test]
    fn mention_trailing_dot_and_order() {
        let t = extract_tags("thanks @leo.messi. and @cristiano #a #b");
        assert_eq!(t.mentions, vec!["leo.messi", "cristiano"]);
        assert_eq!(t.hashtags, vec!["a", "b"]);
    }

    #[test]
    fn strip_leaves_plain_words() {
        assert_eq!(
            strip_tags("go #TeamA with @bob")
                .split_whitespace()
                .collect::<Vec<_>>(),
            vec!["go", "with"]
        );
    }
}
