//! Fixed-lexicon sentiment scorer used by the mock client.
//!
//! Tokens are lowercase alphanumeric runs (apostrophes kept). With `p`
//! positive and `n` negative hits and `o` other tokens, the raw scores are
//! `positive = p`, `negative = n`, `mixed = min(p, n)` when both are
//! non-zero, and `neutral = o / 4`, normalised to sum to one. Text with no
//! tokens, or with no lexicon hit and nothing else, is fully neutral.

use std::collections::HashSet;

const POSITIVE: &str = include_str!("../../data/positive-words.txt");
const NEGATIVE: &str = include_str!("../../data/negative-words.txt");

/// Weight of a non-lexicon token relative to a lexicon hit.
pub const NEUTRAL_WEIGHT: f64 = 0.25;

fn parse_list(src: &str) -> HashSet<String> {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

impl Lexicon {
    pub fn builtin() -> Self {
        Lexicon {
            positive: parse_list(POSITIVE),
            negative: parse_list(NEGATIVE),
        }
    }

    pub fn is_positive(&self, word: &str) -> bool {
        self.positive.contains(word)
    }

    pub fn is_negative(&self, word: &str) -> bool {
        self.negative.contains(word)
    }

    /// `[positive, negative, mixed, neutral]`, summing to one.
    pub fn score(&self, text: &str) -> [f64; 4] {
        let tokens = tokenize(text);
        let p = tokens.iter().filter(|t| self.is_positive(t)).count() as f64;
        let n = tokens.iter().filter(|t| self.is_negative(t)).count() as f64;
        let other = tokens.len() as f64 - p - n;
        let mixed = if p > 0.0 && n > 0.0 { p.min(n) } else { 0.0 };
        let raw = [p, n, mixed, other * NEUTRAL_WEIGHT];
        let total: f64 = raw.iter().sum();
        if p + n == 0.0 || total == 0.0 {
            return [0.0, 0.0, 0.0, 1.0];
        }
        raw.map(|v| v / total)
    }
}
