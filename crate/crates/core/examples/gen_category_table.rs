//! Regenerates `assets/emoji_categories_v1.csv` from the `emojis` crate.
//!
//! Run with `cargo run -p emofed-core --example gen_category_table > crates/core/assets/emoji_categories_v1.csv`.
//! The `emojis` crate omits the CLDR "Component" group, so skin-tone and
//! hair-style components are appended by hand.

use std::collections::BTreeSet;

fn group_name(group: emojis::Group) -> &'static str {
    match group {
        emojis::Group::SmileysAndEmotion => "SmileysEmotion",
        emojis::Group::PeopleAndBody => "PeopleBody",
        emojis::Group::AnimalsAndNature => "AnimalsNature",
        emojis::Group::FoodAndDrink => "FoodDrink",
        emojis::Group::TravelAndPlaces => "TravelPlaces",
        emojis::Group::Activities => "Activities",
        emojis::Group::Objects => "Objects",
        emojis::Group::Symbols => "Symbols",
        emojis::Group::Flags => "Flags",
    }
}

fn hex_sequence(s: &str) -> String {
    s.chars()
        .map(|c| format!("{:04X}", c as u32))
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() {
    let mut rows = BTreeSet::new();
    for emoji in emojis::iter() {
        let name = group_name(emoji.group());
        rows.insert((hex_sequence(emoji.as_str()), name));
        if let Some(tones) = emoji.skin_tones() {
            for variant in tones {
                rows.insert((hex_sequence(variant.as_str()), name));
            }
        }
    }
    // CLDR component group: skin tones and hair styles.
    for cp in (0x1F3FB..=0x1F3FF).chain(0x1F9B0..=0x1F9B3) {
        rows.insert((format!("{cp:04X}"), "Component"));
    }

    println!("sequence,category");
    for (seq, name) in rows {
        println!("{seq},{name}");
    }
}
