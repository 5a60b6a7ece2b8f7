//! Answer extraction from free-form model replies.

use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::taskgen::{Answer, AnswerKind};

static MARKER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\banswer\b[*_`\s]*[:=][*_`\s]*").unwrap());
// an integer not glued to a word, so `a0` does not read as 0
static INTEGER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?:^|[^\w.])(-?\d+)\b").unwrap());
static LIST: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[\[(]\s*(-?\d+(?:\s*,\s*-?\d+)*)?\s*,?\s*[\])]").unwrap());
static BARE_LIST: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*(-?\d+(?:\s*,\s*-?\d+)+)").unwrap());

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedAnswer {
    pub value: Answer,
    /// Byte range of the value in the reply.
    pub raw_span: Range<usize>,
}

fn parse_items(s: &str) -> Option<Vec<i64>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|t| t.trim().parse().ok()).collect()
}

fn wrap(kind: AnswerKind, items: Vec<i64>) -> Answer {
    match kind {
        AnswerKind::Tuple => Answer::Tuple(items),
        _ => Answer::Sequence(items),
    }
}

fn last_integer(text: &str, offset: usize) -> Option<ExtractedAnswer> {
    let m = INTEGER.captures_iter(text).last()?.get(1)?;
    Some(ExtractedAnswer { value: Answer::Int(m.as_str().parse().ok()?), raw_span: offset + m.start()..offset + m.end() })
}

fn first_integer(text: &str, offset: usize) -> Option<ExtractedAnswer> {
    let m = INTEGER.captures_iter(text).next()?.get(1)?;
    Some(ExtractedAnswer { value: Answer::Int(m.as_str().parse().ok()?), raw_span: offset + m.start()..offset + m.end() })
}

fn list_at(kind: AnswerKind, m: regex::Match<'_>, items: Option<regex::Match<'_>>, offset: usize) -> Option<ExtractedAnswer> {
    let items = parse_items(items.map_or("", |i| i.as_str()))?;
    Some(ExtractedAnswer { value: wrap(kind, items), raw_span: offset + m.start()..offset + m.end() })
}

fn first_list(kind: AnswerKind, text: &str, offset: usize) -> Option<ExtractedAnswer> {
    if let Some(c) = LIST.captures(text) {
        return list_at(kind, c.get(0)?, c.get(1), offset);
    }
    let c = BARE_LIST.captures(text)?;
    list_at(kind, c.get(1)?, c.get(1), offset)
}

fn last_list(kind: AnswerKind, text: &str, offset: usize) -> Option<ExtractedAnswer> {
    let c = LIST.captures_iter(text).last()?;
    list_at(kind, c.get(0)?, c.get(1), offset)
}

fn name_after(text: &str, offset: usize) -> Option<ExtractedAnswer> {
    let line = text.lines().next().unwrap_or("");
    let trimmed = line.trim_start();
    let lead = line.len() - trimmed.len();
    let cleaned = trimmed.trim_end().trim_end_matches(['.', '*', '`', '"', '\'']).trim_start_matches(['*', '`', '"', '\'']);
    let start = lead + (trimmed.len() - trimmed.trim_start_matches(['*', '`', '"', '\'']).len());
    let lower = cleaned.to_lowercase();
    let name = lower.strip_prefix("the ").unwrap_or(&lower).trim();
    if name.is_empty() || name.contains(char::is_whitespace) {
        return None;
    }
    Some(ExtractedAnswer {
        value: Answer::Name(name.to_string()),
        raw_span: offset + start..offset + start + cleaned.len(),
    })
}

/// Reads an answer of kind `format` from `response`. The text after the last
/// `Answer:` marker is tried first; otherwise the last integer or the last
/// bracketed list in the reply is taken. Names are only read after a marker.
pub fn extract_answer(response: &str, format: AnswerKind) -> Option<ExtractedAnswer> {
    if let Some(m) = MARKER.find_iter(response).last() {
        let rest = &response[m.end()..];
        let line = rest.lines().next().unwrap_or("");
        let found = match format {
            AnswerKind::Int => first_integer(line, m.end()),
            AnswerKind::Tuple | AnswerKind::Sequence => first_list(format, line, m.end()),
            AnswerKind::Name => name_after(rest, m.end()),
        };
        if found.is_some() {
            return found;
        }
    }
    match format {
        AnswerKind::Int => last_integer(response, 0),
        AnswerKind::Tuple | AnswerKind::Sequence => last_list(format, response, 0),
        AnswerKind::Name => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(s: &str) -> Option<Answer> {
        extract_answer(s, AnswerKind::Int).map(|e| e.value)
    }

    #[test]
    fn marker_wins() {
        assert_eq!(int("step 3: a0=6. Answer: 6"), Some(Answer::Int(6)));
        assert_eq!(int("a0 is 4, then 9.\nAnswer: -12\nDone, 3 steps."), Some(Answer::Int(-12)));
        assert_eq!(int("**Answer:** 41"), Some(Answer::Int(41)));
    }

    #[test]
    fn fallbacks() {
        assert_eq!(int("so the final value of a2 is 17"), Some(Answer::Int(17)));
        assert_eq!(int("I cannot determine this."), None);
        assert_eq!(int("a0 and a1"), None);
        let seq = extract_answer("the sorted list is [1, 2, 3]", AnswerKind::Sequence).unwrap();
        assert_eq!(seq.value, Answer::Sequence(vec![1, 2, 3]));
        assert_eq!(seq.raw_span, 19..28);
        let tup = extract_answer("Answer: (4, -1)", AnswerKind::Tuple).unwrap();
        assert_eq!(tup.value, Answer::Tuple(vec![4, -1]));
        let bare = extract_answer("Answer: 4, 5, 6", AnswerKind::Tuple).unwrap();
        assert_eq!(bare.value, Answer::Tuple(vec![4, 5, 6]));
        assert_eq!(extract_answer("Answer: []", AnswerKind::Sequence).unwrap().value, Answer::Sequence(vec![]));
    }

    #[test]
    fn names_need_the_marker() {
        let e = extract_answer("The heaviest is clear.\nAnswer: The Lamp.", AnswerKind::Name).unwrap();
        assert_eq!(e.value, Answer::Name("lamp".into()));
        assert_eq!(extract_answer("it is the lamp", AnswerKind::Name), None);
        assert_eq!(extract_answer("Answer: the red lamp", AnswerKind::Name), None);
    }

    #[test]
    fn kinds_never_mismatch() {
        for kind in [AnswerKind::Int, AnswerKind::Tuple, AnswerKind::Sequence, AnswerKind::Name] {
            for text in ["Answer: [1, 2]", "Answer: 5", "Answer: kettle", "[3] and 4", "nothing"] {
                if let Some(e) = extract_answer(text, kind) {
                    assert_eq!(e.value.kind(), kind, "{text}");
                }
            }
        }
    }
}
