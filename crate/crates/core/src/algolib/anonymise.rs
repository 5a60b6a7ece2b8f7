use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AnonymiseError {
    #[error("function `{0}` is defined but missing from the name map")]
    UnknownIdentifier(String),
}

static DEF_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^[ \t]*def[ \t]+([A-Za-z_][A-Za-z0-9_]*)[ \t]*\(").unwrap());

/// Names of the functions defined in `source`, in order of definition.
pub fn defined_functions(source: &str) -> Vec<String> {
    DEF_RE
        .captures_iter(source)
        .map(|c| c[1].to_string())
        .collect()
}

/// Renames function identifiers according to `names`. Every function defined
/// in `source` must appear in the map, either as a key or as an already
/// anonymised value, so applying the same map twice is a no-op. Strings,
/// comments and attribute accesses (`x.name`) are left untouched.
pub fn anonymise(source: &str, names: &BTreeMap<String, String>) -> Result<String, AnonymiseError> {
    for f in defined_functions(source) {
        if !names.contains_key(&f) && !names.values().any(|v| *v == f) {
            return Err(AnonymiseError::UnknownIdentifier(f));
        }
    }

    let mut out = String::with_capacity(source.len());
    let mut chars = source.char_indices().peekable();
    let mut prev: Option<char> = None;
    while let Some((i, c)) = chars.next() {
        if c == '#' {
            // comment runs to end of line
            out.push(c);
            while let Some(&(_, d)) = chars.peek() {
                if d == '\n' {
                    break;
                }
                out.push(d);
                chars.next();
            }
            prev = None;
        } else if c == '"' || c == '\'' {
            out.push(c);
            let mut escaped = false;
            for (_, d) in chars.by_ref() {
                out.push(d);
                if escaped {
                    escaped = false;
                } else if d == '\\' {
                    escaped = true;
                } else if d == c {
                    break;
                }
            }
            prev = Some(c);
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut end = i + c.len_utf8();
            while let Some(&(j, d)) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    end = j + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let ident = &source[i..end];
            match names.get(ident) {
                Some(new) if prev != Some('.') => out.push_str(new),
                _ => out.push_str(ident),
            }
            prev = ident.chars().last();
        } else {
            out.push(c);
            prev = Some(c);
        }
    }
    Ok(out)
}
