//! Fixed vocabularies for naturalistic narration.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pronoun {
    She,
    He,
}

impl Pronoun {
    pub fn possessive(self) -> &'static str {
        match self {
            Pronoun::She => "her",
            Pronoun::He => "his",
        }
    }

    pub fn subject(self) -> &'static str {
        match self {
            Pronoun::She => "she",
            Pronoun::He => "he",
        }
    }
}

pub const PEOPLE: [(&str, Pronoun); 20] = [
    ("Alice", Pronoun::She),
    ("Bob", Pronoun::He),
    ("Carol", Pronoun::She),
    ("Dave", Pronoun::He),
    ("Erin", Pronoun::She),
    ("Frank", Pronoun::He),
    ("Grace", Pronoun::She),
    ("Henry", Pronoun::He),
    ("Irene", Pronoun::She),
    ("Jack", Pronoun::He),
    ("Karen", Pronoun::She),
    ("Leo", Pronoun::He),
    ("Maria", Pronoun::She),
    ("Nathan", Pronoun::He),
    ("Olivia", Pronoun::She),
    ("Peter", Pronoun::He),
    ("Quinn", Pronoun::She),
    ("Robert", Pronoun::He),
    ("Sophie", Pronoun::She),
    ("Tom", Pronoun::He),
];

/// (singular, plural)
pub const GOODS: [(&str, &str); 10] = [
    ("apple", "apples"),
    ("pear", "pears"),
    ("orange", "oranges"),
    ("banana", "bananas"),
    ("lemon", "lemons"),
    ("plum", "plums"),
    ("peach", "peaches"),
    ("cherry", "cherries"),
    ("coin", "coins"),
    ("marble", "marbles"),
];

/// Nested time units for recurring calculations, outermost first.
pub const UNITS: [(&str, &str); 9] = [
    ("season", "seasons"),
    ("month", "months"),
    ("week", "weeks"),
    ("day", "days"),
    ("session", "sessions"),
    ("round", "rounds"),
    ("turn", "turns"),
    ("phase", "phases"),
    ("step", "steps"),
];

/// Irrelevant sentences used as noise in recurring calculations.
pub const NOISE: [&str; 8] = [
    "The weather is sunny most of the time.",
    "A friend sometimes watches from the stands.",
    "The player wears a blue shirt.",
    "The venue is close to a small lake.",
    "Snacks are sold near the entrance.",
    "The referee has been doing this job for years.",
    "The player's coach likes to drink tea.",
    "Music plays in the background.",
];

pub const OBJECTS: [&str; 48] = [
    "lamp", "book", "chair", "kettle", "drum", "vase", "radio", "clock", "pillow", "bucket", "guitar", "helmet",
    "blanket", "toaster", "backpack", "candle", "hammer", "ladder", "mirror", "teapot", "basket", "globe",
    "saucepan", "skateboard", "umbrella", "violin", "suitcase", "camera", "printer", "shovel", "trophy", "wallet",
    "cushion", "jar", "bell", "kite", "rope", "bottle", "notebook", "stool", "fan", "lantern", "speaker", "tray",
    "wrench", "blender", "microscope", "telescope",
];

/// `1st`, `2nd`, `3rd`, `4th`, ..., `11th`, `12th`, `13th`, `21st`.
pub fn ordinal(n: usize) -> String {
    let suffix = match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

/// `Alice`, `Alice and Bob`, `Alice, Bob and Carol`.
pub fn join_names(names: &[&str]) -> String {
    match names {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordinals() {
        let got: Vec<String> = [1, 2, 3, 4, 11, 12, 13, 21, 22, 40].iter().map(|&n| ordinal(n)).collect();
        assert_eq!(got, ["1st", "2nd", "3rd", "4th", "11th", "12th", "13th", "21st", "22nd", "40th"]);
    }

    #[test]
    fn tables_have_no_duplicates() {
        let mut people: Vec<_> = PEOPLE.iter().map(|p| p.0).collect();
        people.sort();
        people.dedup();
        assert_eq!(people.len(), 20);
        let mut objects = OBJECTS.to_vec();
        objects.sort();
        objects.dedup();
        assert_eq!(objects.len(), OBJECTS.len());
    }

    #[test]
    fn name_lists() {
        assert_eq!(join_names(&["Alice"]), "Alice");
        assert_eq!(join_names(&["Alice", "Bob", "Carol"]), "Alice, Bob and Carol");
    }
}
