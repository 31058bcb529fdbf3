use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Number of coarse emoji categories.
pub const NUM_CATEGORIES: usize = 10;

const BUNDLED_TABLE: &str = include_str!("../../assets/emoji_categories_v1.csv");

/// Coarse emoji category, encoded as `0..=9` in label vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum EmojiCategory {
    SmileysEmotion,
    PeopleBody,
    Component,
    AnimalsNature,
    FoodDrink,
    TravelPlaces,
    Activities,
    Objects,
    Symbols,
    Flags,
}

impl EmojiCategory {
    pub const ALL: [EmojiCategory; NUM_CATEGORIES] = [
        EmojiCategory::SmileysEmotion,
        EmojiCategory::PeopleBody,
        EmojiCategory::Component,
        EmojiCategory::AnimalsNature,
        EmojiCategory::FoodDrink,
        EmojiCategory::TravelPlaces,
        EmojiCategory::Activities,
        EmojiCategory::Objects,
        EmojiCategory::Symbols,
        EmojiCategory::Flags,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            EmojiCategory::SmileysEmotion => "SmileysEmotion",
            EmojiCategory::PeopleBody => "PeopleBody",
            EmojiCategory::Component => "Component",
            EmojiCategory::AnimalsNature => "AnimalsNature",
            EmojiCategory::FoodDrink => "FoodDrink",
            EmojiCategory::TravelPlaces => "TravelPlaces",
            EmojiCategory::Activities => "Activities",
            EmojiCategory::Objects => "Objects",
            EmojiCategory::Symbols => "Symbols",
            EmojiCategory::Flags => "Flags",
        }
    }
}

impl From<EmojiCategory> for u8 {
    fn from(c: EmojiCategory) -> u8 {
        c as u8
    }
}

impl TryFrom<u8> for EmojiCategory {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        EmojiCategory::from_index(v as usize).ok_or_else(|| format!("label {v} not in 0..=9"))
    }
}

impl fmt::Display for EmojiCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmojiCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        EmojiCategory::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

/// Result of looking an emoji up in a [`CategoryTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup {
    Known(EmojiCategory),
    Unknown,
}

impl Lookup {
    pub fn known(self) -> Option<EmojiCategory> {
        match self {
            Lookup::Known(c) => Some(c),
            Lookup::Unknown => None,
        }
    }
}

fn strip_variation_selectors(s: &str) -> String {
    s.chars().filter(|&c| c != '\u{FE0F}').collect()
}

/// Emoji sequence → category mapping loaded from a `sequence,category` CSV.
#[derive(Debug, Clone)]
pub struct CategoryTable {
    exact: HashMap<String, EmojiCategory>,
    stripped: HashMap<String, EmojiCategory>,
    checksum: String,
}

impl CategoryTable {
    /// The table shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_TABLE, Path::new("<bundled>")).expect("bundled category table is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses CSV text. Sequences are space-separated hex codepoints.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "sequence,category" => {}
            _ => return Err(parse_err(1, "expected header \"sequence,category\"".into())),
        }

        let mut exact = HashMap::new();
        let mut stripped = HashMap::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (seq, cat) = line
                .split_once(',')
                .ok_or_else(|| parse_err(line_no, "expected two columns".into()))?;
            let category: EmojiCategory = cat.trim().parse().map_err(|e| parse_err(line_no, e))?;
            let mut key = String::new();
            for hex in seq.split_whitespace() {
                let cp = u32::from_str_radix(hex, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| parse_err(line_no, format!("bad codepoint {hex:?}")))?;
                key.push(cp);
            }
            if key.is_empty() {
                return Err(parse_err(line_no, "empty sequence".into()));
            }
            if let Some(prev) = exact.insert(key.clone(), category) {
                if prev != category {
                    return Err(parse_err(line_no, format!("sequence {seq} mapped twice")));
                }
            }
            stripped.entry(strip_variation_selectors(&key)).or_insert(category);
        }

        let checksum = Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Ok(CategoryTable {
            exact,
            stripped,
            checksum,
        })
    }

    /// SHA-256 of the source CSV text, hex encoded.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }

    pub fn contains(&self, emoji: &str) -> bool {
        self.categorize(emoji) != Lookup::Unknown
    }

    /// Exact lookup, then a lookup with U+FE0F removed on both sides.
    pub fn categorize(&self, emoji: &str) -> Lookup {
        if let Some(&c) = self.exact.get(emoji) {
            return Lookup::Known(c);
        }
        match self.stripped.get(&strip_variation_selectors(emoji)) {
            Some(&c) => Lookup::Known(c),
            None => Lookup::Unknown,
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.exact.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table_covers_all_categories() {
        let table = CategoryTable::bundled();
        assert!(table.len() > 3000);
        for cat in EmojiCategory::ALL {
            assert!(table.exact.values().any(|&c| c == cat), "no entry for {cat}");
        }
        assert_eq!(table.checksum().len(), 64);
    }

    #[test]
    fn categorize_examples() {
        let table = CategoryTable::bundled();
        assert_eq!(table.categorize("😂"), Lookup::Known(EmojiCategory::SmileysEmotion));
        assert_eq!(table.categorize("🇮🇳"), Lookup::Known(EmojiCategory::Flags));
        assert_eq!(table.categorize("\u{E000}"), Lookup::Unknown);
        assert_eq!(table.categorize("👩‍💻"), Lookup::Known(EmojiCategory::PeopleBody));
        assert_eq!(table.categorize("🏽"), Lookup::Known(EmojiCategory::Component));
    }

    #[test]
    fn variation_selector_fallback() {
        let table = CategoryTable::bundled();
        // Heart is listed with U+FE0F; bare and doubled forms still resolve.
        assert_eq!(table.categorize("\u{2764}"), Lookup::Known(EmojiCategory::SmileysEmotion));
        assert_eq!(
            table.categorize("😂\u{FE0F}"),
            Lookup::Known(EmojiCategory::SmileysEmotion)
        );
    }

    #[test]
    fn labels_encode_as_integers() {
        for (i, cat) in EmojiCategory::ALL.iter().enumerate() {
            assert_eq!(cat.index(), i);
            assert_eq!(serde_json::to_string(cat).unwrap(), i.to_string());
        }
        assert!(serde_json::from_str::<EmojiCategory>("10").is_err());
    }

    #[test]
    fn parse_rejects_bad_input() {
        let p = Path::new("t.csv");
        assert!(CategoryTable::parse("seq,cat\n", p).is_err());
        assert!(CategoryTable::parse("sequence,category\nZZZZ,Flags\n", p).is_err());
        assert!(CategoryTable::parse("sequence,category\n1F602,Nope\n", p).is_err());
        assert!(CategoryTable::parse("sequence,category\n1F602,Flags\n1F602,Objects\n", p).is_err());
        let t = CategoryTable::parse("sequence,category\n1F602,Flags\n", p).unwrap();
        assert_eq!(t.categorize("😂"), Lookup::Known(EmojiCategory::Flags));
    }
}
