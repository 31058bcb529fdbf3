//! Raw tweet ingestion: emoji extraction and categorization, multi-emoji
//! explosion into single-label examples, and text normalization.

mod category;
mod emoji;
mod normalize;

use serde::{Deserialize, Serialize};

pub use category::{CategoryTable, EmojiCategory, Lookup, NUM_CATEGORIES};
pub use emoji::{categorize, explode, extract_emojis, is_emoji_cluster, Exploded};
pub use normalize::{normalize, NormalizeMode, HASHTAG_TOKEN, MENTION_TOKEN, URL_TOKEN};

/// One input line: `{"id": ..., "text": ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTweet {
    pub id: String,
    pub text: String,
}

/// A single-label training instance traceable to its source tweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub source_id: String,
    pub tokens: Vec<String>,
    pub label: EmojiCategory,
}
