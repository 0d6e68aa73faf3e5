//! Spoken-phrase bracketing of experience reports.
//!
//! Phrases are matched token by token, ignoring case and any
//! non-alphanumeric characters, so "Start Ziggy," matches "start ziggy".
//! Report text keeps the original tokens joined by single spaces. A start
//! phrase seen while a report is already open is dropped; an end phrase with
//! no open report is ignored.

use crate::model::{DesPhrases, DesReport, Span, Transcript};

fn key(token: &str) -> String {
    token
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

fn phrase_keys(phrase: &str) -> Vec<String> {
    phrase
        .split_whitespace()
        .map(key)
        .filter(|k| !k.is_empty())
        .collect()
}

struct OpenReport {
    tokens: Vec<String>,
    start_ms: u64,
    last_end_ms: u64,
    last_t_ms: u64,
}

/// Emitted report and the time of the transcript that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SpottedReport {
    pub t_ms: u64,
    pub report: DesReport,
}

pub struct DesSpotter {
    start: Vec<String>,
    end: Vec<String>,
    open: Option<OpenReport>,
}

impl DesSpotter {
    pub fn new(phrases: &DesPhrases) -> Self {
        DesSpotter {
            start: phrase_keys(&phrases.start),
            end: phrase_keys(&phrases.end),
            open: None,
        }
    }

    pub fn is_open(&self) -> bool {
        self.open.is_some()
    }

    /// Feeds one wearer transcript observed at `t_ms`.
    pub fn push(&mut self, t_ms: u64, transcript: &Transcript) -> Vec<SpottedReport> {
        let tokens: Vec<&str> = transcript.text.split_whitespace().collect();
        let keys: Vec<String> = tokens.iter().map(|t| key(t)).collect();
        let matches = |at: usize, phrase: &[String]| {
            !phrase.is_empty()
                && keys.len() >= at + phrase.len()
                && keys[at..at + phrase.len()] == *phrase
        };
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            if matches(i, &self.start) {
                if self.open.is_none() {
                    self.open = Some(OpenReport {
                        tokens: Vec::new(),
                        start_ms: transcript.span.start_ms,
                        last_end_ms: transcript.span.end_ms,
                        last_t_ms: t_ms,
                    });
                }
                i += self.start.len();
                continue;
            }
            if matches(i, &self.end) {
                if let Some(open) = self.open.take() {
                    out.push(SpottedReport {
                        t_ms,
                        report: DesReport {
                            text: open.tokens.join(" "),
                            span: Span::new(open.start_ms, transcript.span.end_ms),
                            terminated: true,
                        },
                    });
                }
                i += self.end.len();
                continue;
            }
            if let Some(open) = self.open.as_mut() {
                open.tokens.push(tokens[i].to_string());
            }
            i += 1;
        }
        if let Some(open) = self.open.as_mut() {
            open.last_end_ms = transcript.span.end_ms;
            open.last_t_ms = t_ms;
        }
        out
    }

    /// Closes an open report at session end.
    pub fn finish(&mut self) -> Option<SpottedReport> {
        self.open.take().map(|open| SpottedReport {
            t_ms: open.last_t_ms,
            report: DesReport {
                text: open.tokens.join(" "),
                span: Span::new(open.start_ms, open.last_end_ms),
                terminated: false,
            },
        })
    }
}

/// Runs a spotter over a whole transcript sequence.
pub fn spot_des(transcripts: &[(u64, Transcript)], phrases: &DesPhrases) -> Vec<SpottedReport> {
    let mut s = DesSpotter::new(phrases);
    let mut out: Vec<SpottedReport> = transcripts
        .iter()
        .flat_map(|(t, tr)| s.push(*t, tr))
        .collect();
    out.extend(s.finish());
    out
}
