use unicode_properties::UnicodeEmoji;
use unicode_segmentation::UnicodeSegmentation;

use super::category::{CategoryTable, EmojiCategory, Lookup};
use super::normalize::{normalize, NormalizeMode};
use super::{Example, RawTweet};

/// True when a grapheme cluster is an emoji presentation unit.
///
/// ASCII characters carrying the Emoji property (digits, `#`, `*`) only
/// count inside keycap sequences.
pub fn is_emoji_cluster(cluster: &str) -> bool {
    cluster
        .chars()
        .any(|c| c == '\u{20E3}' || (!c.is_ascii() && c.is_emoji_char()))
}

/// Every emoji grapheme cluster in order of appearance, duplicates kept.
pub fn extract_emojis<'a>(text: &'a str, table: &CategoryTable) -> Vec<&'a str> {
    text.graphemes(true)
        .filter(|g| is_emoji_cluster(g) || table.contains(g))
        .collect()
}

/// Removes emoji clusters, leaving a space so neighbouring words stay apart.
pub(crate) fn strip_emojis(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for g in text.graphemes(true) {
        if is_emoji_cluster(g) {
            out.push(' ');
        } else {
            out.push_str(g);
        }
    }
    out
}

pub fn categorize(emoji: &str, table: &CategoryTable) -> Lookup {
    table.categorize(emoji)
}

/// Outcome of exploding one tweet.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Exploded {
    pub examples: Vec<Example>,
    pub unknown_emojis: usize,
}

/// One example per categorizable emoji occurrence; unknown emojis are
/// counted and skipped.
pub fn explode(tweet: &RawTweet, table: &CategoryTable, mode: NormalizeMode) -> Exploded {
    let emojis = extract_emojis(&tweet.text, table);
    let mut labels: Vec<EmojiCategory> = Vec::with_capacity(emojis.len());
    let mut unknown = 0;
    for e in emojis {
        match table.categorize(e) {
            Lookup::Known(c) => labels.push(c),
            Lookup::Unknown => unknown += 1,
        }
    }
    if labels.is_empty() {
        return Exploded {
            examples: Vec::new(),
            unknown_emojis: unknown,
        };
    }
    let tokens = normalize(&tweet.text, mode);
    let examples = labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| Example {
            id: format!("{}#{}", tweet.id, i),
            source_id: tweet.id.clone(),
            tokens: tokens.clone(),
            label,
        })
        .collect();
    Exploded {
        examples,
        unknown_emojis: unknown,
    }
}
