//! Replacement of URLs, e-mail addresses, phone numbers and line breaks by
//! placeholder words.

use std::sync::OnceLock;

use regex::Regex;

/// Scheme- or `www.`-prefixed address up to the next whitespace.
pub const URL_PATTERN: &str = r"(?i)\b(?:https?://|ftp://|www\.)\S+";
pub const EMAIL_PATTERN: &str = r"[A-Za-z0-9._%+\-]+@[A-Za-z0-9.\-]+\.[A-Za-z]{2,}";
/// Optional leading `+`, then digits separated by single spaces, dots,
/// dashes or parentheses. A candidate is only replaced when it holds
/// between 7 and 15 digits.
pub const PHONE_PATTERN: &str = r"\+?\(?\d(?:[ .\-()]{0,2}\d){5,}";

pub const URL_WORD: &str = "website";
pub const EMAIL_WORD: &str = "email";
pub const PHONE_WORD: &str = "phones";
pub const NEWLINE_WORD: &str = "line";

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(URL_PATTERN).expect("url regex"))
}

fn email_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(EMAIL_PATTERN).expect("email regex"))
}

fn phone_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(PHONE_PATTERN).expect("phone regex"))
}

pub fn contains_url(text: &str) -> bool {
    url_re().is_match(text)
}

pub fn count_urls(text: &str) -> usize {
    url_re().find_iter(text).count()
}

pub fn replace_entities(text: &str) -> String {
    let s = url_re().replace_all(text, URL_WORD);
    let s = email_re().replace_all(&s, EMAIL_WORD);
    let s = phone_re().replace_all(&s, |caps: &regex::Captures<'_>| {
        let m = &caps[0];
        let digits = m.chars().filter(char::is_ascii_digit).count();
        if (7..=15).contains(&digits) {
            PHONE_WORD.to_string()
        } else {
            m.to_string()
        }
    });
    replace_newlines(&s)
}

/// Each `\n` or `\r\n` becomes the word `line`, padded with a space on any
/// side that is not already whitespace.
fn replace_newlines(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len() + 8);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let is_break = c == '\n' || (c == '\r' && chars.get(i + 1) == Some(&'\n'));
        if !is_break {
            out.push(c);
            i += 1;
            continue;
        }
        let width = if c == '\r' { 2 } else { 1 };
        if out.chars().last().is_some_and(|p| !p.is_whitespace()) {
            out.push(' ');
        }
        out.push_str(NEWLINE_WORD);
        if chars
            .get(i + width)
            .is_some_and(|n| !n.is_whitespace() || *n == '\n' || *n == '\r')
        {
            out.push(' ');
        }
        i += width;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_becomes_website() {
        assert_eq!(replace_entities("see https://a.b/x now"), "see website now");
        assert_eq!(replace_entities("www.example.org!"), "website");
    }

    #[test]
    fn empty_is_empty() {
        assert_eq!(replace_entities(""), "");
    }

    #[test]
    fn phone_and_newline() {
        // "+1-202-555-0147": '+', then 11 digits joined by '-' separators,
        // matched by PHONE_PATTERN and within the 7..=15 digit window.
        assert_eq!(
            replace_entities("call +1-202-555-0147\nbye"),
            "call phones line bye"
        );
    }

    #[test]
    fn short_numbers_survive() {
        assert_eq!(
            replace_entities("since 2019 we won 3-1"),
            "since 2019 we won 3-1"
        );
    }

    #[test]
    fn email_becomes_email() {
        assert_eq!(replace_entities("mail me: a.b@c.com"), "mail me: email");
    }

    #[test]
    fn crlf_and_consecutive_breaks() {
        assert_eq!(replace_entities("a\r\nb"), "a line b");
        assert_eq!(replace_entities("a\n\nb"), "a line line b");
    }

    #[test]
    fn no_url_survives() {
        let out = replace_entities("x http://q.io/a?b=1 y www.z.com");
        assert_eq!(count_urls(&out), 0);
    }
}
