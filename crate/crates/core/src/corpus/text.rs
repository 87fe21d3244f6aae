//! Text cleaning, tokenisation and token normalisation.

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

pub const LAUGHTER: &str = "laughter";
pub const ONOMATOPOEIA: &str = "onomatopoeia";

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?:https?://|www\.)\S*").unwrap());

/// Lowercases, folds to ASCII, strips Twitter meta tokens and collapses
/// whitespace.
///
/// ASCII folding uses compatibility decomposition followed by removal of
/// combining marks; anything still outside ASCII is dropped. Whitespace
/// tokens beginning with `@` or `#` are removed, as is any `http://`,
/// `https://` or `www.` run up to the next whitespace.
pub fn clean_text(raw: &str) -> String {
    // Fold before lowercasing: decomposition can yield uppercase ASCII (e.g. U+210C).
    let folded: String = raw
        .nfkd()
        .filter(|c| !is_combining_mark(*c))
        .filter(char::is_ascii)
        .collect::<String>()
        .to_ascii_lowercase();
    let mut out = String::with_capacity(folded.len());
    for token in folded.split_ascii_whitespace() {
        if token.starts_with('@') || token.starts_with('#') {
            continue;
        }
        let token = URL.replace_all(token, "");
        if token.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&token);
    }
    out
}

fn is_separator(c: char) -> bool {
    c.is_whitespace() || (c.is_ascii_punctuation() && c != '\'' && c != '-')
}

/// Splits on whitespace and punctuation, then drops stopwords, single
/// characters and any token containing a non-alphabetic character.
///
/// Apostrophes and hyphens do not split a word, so `ng'ombe` stays a single
/// token (and is then dropped as non-alphabetic).
pub fn tokenize_and_filter(text: &str, stopwords: &HashSet<String>) -> Vec<String> {
    text.split(is_separator)
        .map(|t| t.trim_matches(|c| c == '\'' || c == '-'))
        .filter(|t| is_valid_token(t, stopwords))
        .map(str::to_owned)
        .collect()
}

/// Token acceptance rule shared by tokenisation and post-stemming checks.
pub fn is_valid_token(token: &str, stopwords: &HashSet<String>) -> bool {
    token.chars().count() > 1
        && token.chars().all(|c| c.is_alphabetic())
        && !stopwords.contains(token)
}

fn is_laughter(token: &str) -> bool {
    let b = token.as_bytes();
    b.len() >= 4
        && b.len().is_multiple_of(2)
        && b.chunks(2)
            .all(|u| u[0] == b'h' && matches!(u[1], b'a' | b'e' | b'i'))
}

fn is_repeated_unit(token: &str) -> bool {
    let b = token.as_bytes();
    (2..=4).any(|unit| {
        b.len() >= 2 * unit
            && b.len().is_multiple_of(unit)
            && b[..unit].iter().all(u8::is_ascii_alphabetic)
            && b.chunks(unit).all(|c| c == &b[..unit])
    })
}

/// Maps laughter (`haha`, `hehehe`, `hihaha`, ...) to [`LAUGHTER`] and other
/// repeated 2-4 letter units (`bumbum`, `tamtam`) to [`ONOMATOPOEIA`].
pub fn normalize_special_tokens(tokens: Vec<String>) -> Vec<String> {
    tokens
        .into_iter()
        .map(|t| {
            if is_laughter(&t) {
                LAUGHTER.to_owned()
            } else if is_repeated_unit(&t) {
                ONOMATOPOEIA.to_owned()
            } else {
                t
            }
        })
        .collect()
}

/// A small default Swahili stopword list.
pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(include_str!("stopwords_sw.txt"))
}

/// One stopword per line; blank lines and `#` comments ignored.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn clean_text_examples() {
        assert_eq!(clean_text("Habari   NJEMA"), "habari njema");
        assert_eq!(clean_text("soma https://t.co/abc sasa"), "soma sasa");
        assert_eq!(clean_text("café"), "cafe");
        assert_eq!(clean_text("  @user #tag soma www.example.com\t\n"), "soma");
        assert_eq!(clean_text("ℌabari ☃ ﬁle"), "habari file");
    }

    #[test]
    fn tokenize_examples() {
        let none = HashSet::new();
        assert_eq!(
            tokenize_and_filter("habari njema 2021", &none),
            words(&["habari", "njema"])
        );
        assert_eq!(tokenize_and_filter("a habari", &none), words(&["habari"]));
        let na: HashSet<String> = ["na".to_string()].into();
        assert_eq!(tokenize_and_filter("na habari", &na), words(&["habari"]));
        assert_eq!(
            tokenize_and_filter("habari, njema. (sasa)", &none),
            words(&["habari", "njema", "sasa"])
        );
        assert_eq!(
            tokenize_and_filter("ng'ombe abc123", &none),
            Vec::<String>::new()
        );
    }

    #[test]
    fn special_token_examples() {
        assert_eq!(
            normalize_special_tokens(words(&["hahaha"])),
            words(&[LAUGHTER])
        );
        assert_eq!(
            normalize_special_tokens(words(&["hehe", "hiha"])),
            words(&[LAUGHTER, LAUGHTER])
        );
        assert_eq!(
            normalize_special_tokens(words(&["bumbum"])),
            words(&[ONOMATOPOEIA])
        );
        assert_eq!(
            normalize_special_tokens(words(&["habari", "ha", "hah"])),
            words(&["habari", "ha", "hah"])
        );
        assert_eq!(
            normalize_special_tokens(words(&["laughter", "onomatopoeia"])),
            words(&[LAUGHTER, ONOMATOPOEIA])
        );
    }

    #[test]
    fn default_list_loads() {
        let sw = default_stopwords();
        assert!(sw.contains("na") && sw.contains("kwa"));
    }

    proptest! {
        #[test]
        fn clean_text_is_idempotent(s in "\\PC{0,40}") {
            let once = clean_text(&s);
            prop_assert_eq!(clean_text(&once), once.clone());
        }

        #[test]
        fn clean_text_idempotent_on_meta_heavy_input(
            parts in prop::collection::vec(prop::sample::select(vec![
                "@a", "#b", "http://x", "www.y", "ÉTÉ", "hi", " ", "\t", "x@y", "hhttp://", "ß", "Ǆ",
            ]), 0..12)
        ) {
            let s = parts.concat();
            let once = clean_text(&s);
            prop_assert_eq!(clean_text(&once), once.clone());
        }
    }
}
