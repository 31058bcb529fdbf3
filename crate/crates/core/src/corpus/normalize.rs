//! Tweet text normalization.
//!
//! Fixed pipeline: strip emoji, lowercase, drop a leading retweet marker,
//! replace (or delete) mentions, URLs and hashtags, delete digits,
//! punctuation and symbols, then split on whitespace.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategory, GeneralCategoryGroup, UnicodeGeneralCategory};

use super::emoji::strip_emojis;

pub const MENTION_TOKEN: &str = "<mention>";
pub const URL_TOKEN: &str = "<url>";
pub const HASHTAG_TOKEN: &str = "<hashtag>";

/// Whether platform patterns become placeholder tokens or are deleted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeMode {
    #[default]
    Tokens,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pattern {
    Url,
    Mention,
    Hashtag,
}

impl Pattern {
    fn token(self) -> &'static str {
        match self {
            Pattern::Url => URL_TOKEN,
            Pattern::Mention => MENTION_TOKEN,
            Pattern::Hashtag => HASHTAG_TOKEN,
        }
    }
}

fn pattern_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // Alternation order matters: a URL may itself contain '@' or '#'.
    RE.get_or_init(|| {
        Regex::new(r"(?P<url>(?:[a-z][a-z0-9+.\-]*://|www\.)\S+)|(?P<mention>@\w+)|(?P<hashtag>#\w+)")
            .expect("valid pattern regex")
    })
}

fn retweet_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*rt\s+(@\w)").expect("valid retweet regex"))
}

/// Unicode simple lowercase mapping (one char in, one char out).
fn simple_lowercase(c: char) -> char {
    if c == '\u{0130}' {
        // The only unconditional one-to-many lowercase mapping.
        return 'i';
    }
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

fn is_removed_char(c: char) -> bool {
    match c.general_category_group() {
        GeneralCategoryGroup::Punctuation | GeneralCategoryGroup::Symbol => true,
        _ => c.general_category() == GeneralCategory::DecimalNumber,
    }
}

fn push_words(text: &str, out: &mut Vec<String>) {
    let cleaned: String = text.chars().filter(|&c| !is_removed_char(c)).collect();
    out.extend(cleaned.split_whitespace().map(str::to_owned));
}

/// Normalizes `text` into an ordered token list.
pub fn normalize(text: &str, mode: NormalizeMode) -> Vec<String> {
    let stripped = strip_emojis(text);
    let lowered: String = stripped.chars().map(simple_lowercase).collect();

    let body = match retweet_regex().captures(&lowered) {
        Some(caps) => &lowered[caps.get(1).map_or(0, |m| m.start())..],
        None => lowered.as_str(),
    };

    let mut tokens = Vec::new();
    let mut last = 0;
    for caps in pattern_regex().captures_iter(body) {
        let (m, pattern) = if let Some(m) = caps.name("url") {
            (m, Pattern::Url)
        } else if let Some(m) = caps.name("mention") {
            (m, Pattern::Mention)
        } else {
            (caps.name("hashtag").expect("one group matches"), Pattern::Hashtag)
        };
        push_words(&body[last..m.start()], &mut tokens);
        if mode == NormalizeMode::Tokens {
            tokens.push(pattern.token().to_owned());
        }
        last = m.end();
    }
    push_words(&body[last..], &mut tokens);
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn hindi_tweet_tokens_mode() {
        let out = normalize("RT @user देखो https://t.co/x #खुशी 123!", NormalizeMode::Tokens);
        assert_eq!(out, toks(&["<mention>", "देखो", "<url>", "<hashtag>"]));
    }

    #[test]
    fn hindi_tweet_plain_mode() {
        let out = normalize("RT @user देखो https://t.co/x #खुशी 123!", NormalizeMode::Plain);
        assert_eq!(out, toks(&["देखो"]));
    }

    #[test]
    fn empty_input() {
        assert!(normalize("", NormalizeMode::Tokens).is_empty());
        assert!(normalize("   ", NormalizeMode::Plain).is_empty());
    }

    #[test]
    fn retweet_marker_only_when_followed_by_mention() {
        assert_eq!(normalize("rt this", NormalizeMode::Tokens), toks(&["rt", "this"]));
        assert_eq!(normalize("  Rt @a hi", NormalizeMode::Plain), toks(&["hi"]));
        assert_eq!(normalize("art @a", NormalizeMode::Tokens), toks(&["art", "<mention>"]));
        // Not leading.
        assert_eq!(normalize("ok RT @a", NormalizeMode::Plain), toks(&["ok", "rt"]));
    }

    #[test]
    fn urls_with_hash_or_at_are_single_urls() {
        assert_eq!(
            normalize("see www.x.com/#frag and http://a.b/@c", NormalizeMode::Tokens),
            toks(&["see", "<url>", "and", "<url>"])
        );
    }

    #[test]
    fn removes_digits_punct_symbols_and_emoji() {
        let out = normalize("Hello, WORLD!! ٣ 42 a+b=c 😂 don't", NormalizeMode::Tokens);
        assert_eq!(out, toks(&["hello", "world", "abc", "dont"]));
    }

    #[test]
    fn placeholder_adjacent_to_text() {
        assert_eq!(
            normalize("hi@bob,#tag!", NormalizeMode::Tokens),
            toks(&["hi", "<mention>", "<hashtag>"])
        );
    }

    #[test]
    fn simple_case_mapping() {
        assert_eq!(simple_lowercase('İ'), 'i');
        assert_eq!(simple_lowercase('Σ'), 'σ');
        assert_eq!(normalize("ÄB", NormalizeMode::Plain), toks(&["äb"]));
    }
}
