use std::collections::BTreeMap;

use crate::linearize::LinToken;

/// `VERBALIZE teacher TO person :ARG0-of teach-01`: a word realized as a
/// root concept with leaf children.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct VerbalEntry {
    pub word: String,
    pub root: String,
    pub children: Vec<(String, String)>,
}

impl VerbalEntry {
    pub fn fragment(&self) -> Vec<LinToken> {
        let mut out = vec![LinToken::Concept(self.root.clone())];
        for (role, c) in &self.children {
            out.push(LinToken::RelOpen(role.clone()));
            out.push(LinToken::Concept(c.clone()));
            out.push(LinToken::RelClose(role.clone()));
        }
        out
    }

    pub fn fragment_text(&self) -> String {
        self.fragment()
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Inverse of [`VerbalEntry::fragment_text`].
    pub fn from_fragment(word: &str, text: &str) -> Option<VerbalEntry> {
        let toks: Vec<LinToken> = text.split_ascii_whitespace().map(LinToken::parse).collect();
        let root = match toks.first()? {
            LinToken::Concept(c) => c.clone(),
            _ => return None,
        };
        let rest = &toks[1..];
        if !rest.len().is_multiple_of(3) {
            return None;
        }
        let mut children = Vec::new();
        for ch in rest.chunks(3) {
            match ch {
                [LinToken::RelOpen(r), LinToken::Concept(c), LinToken::RelClose(r2)] if r == r2 => {
                    children.push((r.clone(), c.clone()))
                }
                _ => return None,
            }
        }
        Some(VerbalEntry {
            word: word.to_string(),
            root,
            children,
        })
    }
}

/// Reads a verbalization list. `VERBALIZE` and `MAYBE-VERBALIZE` lines are
/// kept, `DO-NOT-VERBALIZE` lines and anything malformed are skipped. When a
/// word has several entries the first one listed wins.
pub fn parse_verbalization_list(text: &str) -> BTreeMap<String, VerbalEntry> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let f: Vec<&str> = line.split_ascii_whitespace().collect();
        if f.len() < 4 || !matches!(f[0], "VERBALIZE" | "MAYBE-VERBALIZE") || f[2] != "TO" {
            continue;
        }
        let rest = &f[4..];
        if !rest.len().is_multiple_of(2) {
            continue;
        }
        let children: Option<Vec<(String, String)>> = rest
            .chunks(2)
            .map(|p| p[0].strip_prefix(':').map(|r| (r.to_string(), p[1].to_string())))
            .collect();
        let Some(children) = children else { continue };
        let word = f[1].to_lowercase();
        out.entry(word.clone()).or_insert(VerbalEntry {
            word,
            root: f[3].to_string(),
            children,
        });
    }
    out
}
