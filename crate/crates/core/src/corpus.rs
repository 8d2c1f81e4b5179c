//! AMR corpus files (`# ::id`, `# ::snt`, `# ::tok` + Penman) and
//! `token/TAG` sidecar files.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::AmrGraph;
use crate::penman::{emit_penman, parse_penman, PenmanError};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("record starting at line {line}: {error}")]
    Penman { line: usize, error: PenmanError },
    #[error("line {line}: malformed `token/TAG` item `{item}`")]
    Sidecar { line: usize, item: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub id: Option<String>,
    pub sentence: Option<String>,
    pub tokens: Vec<String>,
    pub graph: AmrGraph,
}

impl CorpusEntry {
    pub fn new(tokens: Vec<String>, graph: AmrGraph) -> Self {
        CorpusEntry {
            id: None,
            sentence: Some(tokens.join(" ")),
            tokens,
            graph,
        }
    }
}

/// Splits a comment line into `::key value` pairs.
fn comment_fields(line: &str) -> Vec<(String, String)> {
    let body = line.trim_start_matches('#').trim();
    let mut out = Vec::new();
    for part in body.split("::").skip(1) {
        let part = part.trim_end();
        let (k, v) = part.split_once(char::is_whitespace).unwrap_or((part, ""));
        out.push((k.to_string(), v.trim().to_string()));
    }
    out
}

pub fn read_corpus(text: &str) -> Result<Vec<CorpusEntry>, CorpusError> {
    let mut entries = Vec::new();
    let mut block: Vec<&str> = Vec::new();
    let mut block_start = 1;
    let lines: Vec<&str> = text.lines().collect();
    for (i, line) in lines.iter().chain(std::iter::once(&"")).enumerate() {
        if line.trim().is_empty() {
            if !block.is_empty() {
                if let Some(e) = parse_block(&block, block_start)? {
                    entries.push(e);
                }
                block.clear();
            }
            block_start = i + 2;
        } else {
            block.push(line);
        }
    }
    Ok(entries)
}

fn parse_block(lines: &[&str], line: usize) -> Result<Option<CorpusEntry>, CorpusError> {
    let mut id = None;
    let mut sentence = None;
    let mut tokens = None;
    let mut body = String::new();
    for l in lines {
        if l.trim_start().starts_with('#') {
            for (k, v) in comment_fields(l) {
                match k.as_str() {
                    "id" => id = Some(v),
                    "snt" => sentence = Some(v),
                    "tok" => tokens = Some(v.split_whitespace().map(String::from).collect()),
                    _ => {}
                }
            }
        } else {
            body.push_str(l);
            body.push('\n');
        }
    }
    if body.trim().is_empty() {
        return Ok(None);
    }
    let graph = parse_penman(&body).map_err(|error| CorpusError::Penman { line, error })?;
    let tokens = tokens.unwrap_or_else(|| {
        sentence
            .as_deref()
            .unwrap_or("")
            .split_whitespace()
            .map(String::from)
            .collect()
    });
    Ok(Some(CorpusEntry {
        id,
        sentence,
        tokens,
        graph,
    }))
}

pub fn write_corpus(entries: &[CorpusEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        if let Some(id) = &e.id {
            let _ = writeln!(out, "# ::id {id}");
        }
        if let Some(s) = &e.sentence {
            let _ = writeln!(out, "# ::snt {s}");
        }
        let _ = writeln!(out, "# ::tok {}", e.tokens.join(" "));
        out.push_str(&emit_penman(&e.graph));
        out.push_str("\n\n");
    }
    out
}

/// Parses one sidecar line of `token/TAG` items. The tag follows the last `/`.
pub fn parse_tagged_line(line: &str, line_no: usize) -> Result<Vec<(String, String)>, CorpusError> {
    line.split_whitespace()
        .map(|item| match item.rsplit_once('/') {
            Some((tok, tag)) if !tok.is_empty() => Ok((tok.to_string(), tag.to_string())),
            _ => Err(CorpusError::Sidecar {
                line: line_no,
                item: item.to_string(),
            }),
        })
        .collect()
}

/// Reads a whole sidecar file, keeping only the tags.
pub fn read_tags(text: &str) -> Result<Vec<Vec<String>>, CorpusError> {
    text.lines()
        .enumerate()
        .map(|(i, l)| parse_tagged_line(l, i + 1).map(|items| items.into_iter().map(|(_, t)| t).collect()))
        .collect()
}

pub fn write_tags(tokens: &[Vec<String>], tags: &[Vec<String>]) -> String {
    let mut out = String::new();
    for (toks, tags) in tokens.iter().zip(tags) {
        let line: Vec<String> = toks.iter().zip(tags).map(|(a, b)| format!("{a}/{b}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
