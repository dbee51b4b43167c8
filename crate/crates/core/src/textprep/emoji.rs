//! Emoji and emoticon conversion to words.

use std::collections::HashMap;

use crate::{Error, Result};

/// Replacement for pictographs missing from the table.
pub const UNMAPPED_EMOJI: &str = "emoji";

/// Emoticon to word map. Emoticons only match as whole whitespace-delimited
/// tokens.
pub const EMOTICONS: &[(&str, &str)] = &[
    (":)", "smile"),
    (":-)", "smile"),
    ("(:", "smile"),
    (":]", "smile"),
    ("=)", "smile"),
    (":D", "laugh"),
    (":-D", "laugh"),
    ("xD", "laugh"),
    ("XD", "laugh"),
    (";)", "wink"),
    (";-)", "wink"),
    (":(", "sad"),
    (":-(", "sad"),
    ("):", "sad"),
    (":'(", "cry"),
    (":P", "tongue"),
    (":-P", "tongue"),
    (":p", "tongue"),
    (":o", "surprise"),
    (":O", "surprise"),
    (":/", "skeptical"),
    (":-/", "skeptical"),
    ("<3", "love"),
    ("</3", "heartbreak"),
];

/// Codepoint-sequence to name table.
#[derive(Debug, Clone)]
pub struct EmojiTable {
    names: HashMap<Vec<char>, String>,
    max_len: usize,
}

const BUNDLED: &str = include_str!("../../data/emoji_names.tsv");

impl EmojiTable {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled emoji table is well formed")
    }

    /// Parses `HEX[ HEX...] TAB name` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut names = HashMap::new();
        let mut max_len = 0;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (cps, name) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected codepoint TAB name".into(),
            })?;
            let seq = cps
                .split_whitespace()
                .map(|h| {
                    u32::from_str_radix(h.trim_start_matches("U+"), 16)
                        .ok()
                        .and_then(char::from_u32)
                })
                .collect::<Option<Vec<char>>>()
                .ok_or_else(|| Error::Parse {
                    line: i + 1,
                    message: format!("bad codepoint {cps:?}"),
                })?;
            if seq.is_empty() {
                continue;
            }
            max_len = max_len.max(seq.len());
            names.insert(seq, name.trim().to_lowercase());
        }
        Ok(Self { names, max_len })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, c: char) -> Option<&str> {
        self.names.get(&vec![c]).map(String::as_str)
    }
}

fn is_pictograph(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF | 0x2600..=0x27BF | 0x2B00..=0x2BFF | 0x2300..=0x23FF)
}

/// Joiners and modifiers that carry no meaning once separated from a
/// sequence.
fn is_emoji_glue(c: char) -> bool {
    matches!(
        c as u32,
        0xFE0F | 0xFE0E | 0x200D | 0x1F3FB..=0x1F3FF | 0x20E3
    )
}

/// Number of emoji (table hits or unmapped pictographs) in `text`.
pub fn count_emoji(text: &str, table: &EmojiTable) -> usize {
    scan(text, table).1
}

pub fn demojize(text: &str, table: &EmojiTable) -> String {
    let replaced = scan(text, table).0;
    replace_emoticons(&replaced)
}

fn push_word(out: &mut String, word: &str) {
    if out.chars().last().is_some_and(|p| !p.is_whitespace()) {
        out.push(' ');
    }
    out.push_str(word);
}

fn scan(text: &str, table: &EmojiTable) -> (String, usize) {
    let chars: Vec<char> = text.chars().filter(|&c| c != '\u{FE0F}').collect();
    let mut out = String::with_capacity(text.len());
    let mut count = 0;
    let mut i = 0;
    let mut after_emoji = false;
    while i < chars.len() {
        let upper = table.max_len.min(chars.len() - i);
        let hit = (1..=upper)
            .rev()
            .find_map(|n| table.names.get(&chars[i..i + n]).map(|name| (n, name)));
        if let Some((n, name)) = hit {
            push_word(&mut out, name);
            count += 1;
            i += n;
            after_emoji = true;
            continue;
        }
        let c = chars[i];
        if is_pictograph(c) {
            push_word(&mut out, UNMAPPED_EMOJI);
            count += 1;
            after_emoji = true;
        } else if !is_emoji_glue(c) {
            if after_emoji && !c.is_whitespace() {
                out.push(' ');
            }
            out.push(c);
            after_emoji = false;
        }
        i += 1;
    }
    (out, count)
}

fn replace_emoticons(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while !rest.is_empty() {
        let ws_end = rest
            .find(|c: char| !c.is_whitespace())
            .unwrap_or(rest.len());
        out.push_str(&rest[..ws_end]);
        rest = &rest[ws_end..];
        let tok_end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        let tok = &rest[..tok_end];
        match EMOTICONS.iter().find(|(e, _)| *e == tok) {
            Some((_, w)) => out.push_str(w),
            None => out.push_str(tok),
        }
        rest = &rest[tok_end..];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fire_emoji() {
        let t = EmojiTable::bundled();
        assert_eq!(demojize("great 🔥", &t), "great fire");
        assert_eq!(demojize("great🔥🔥", &t), "great fire fire");
    }

    #[test]
    fn plain_text_untouched() {
        assert_eq!(demojize("plain text", &EmojiTable::bundled()), "plain text");
    }

    #[test]
    fn emoticons() {
        let t = EmojiTable::bundled();
        assert_eq!(demojize(":)", &t), "smile");
        assert_eq!(demojize("oh :-( no", &t), "oh sad no");
        // Not a standalone token.
        assert_eq!(demojize("f(:x)", &t), "f(:x)");
    }

    #[test]
    fn unmapped_pictograph_fallback() {
        let t = EmojiTable::parse("1F525\tfire\n").unwrap();
        assert_eq!(demojize("a 😀 b", &t), "a emoji b");
        assert_eq!(count_emoji("a 😀🔥 b", &t), 2);
    }

    #[test]
    fn variation_selector_ignored() {
        let t = EmojiTable::bundled();
        assert_eq!(demojize("\u{2764}\u{FE0F}", &t), demojize("\u{2764}", &t));
    }
}
