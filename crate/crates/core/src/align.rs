//! Hard alignments and the reference attention rows built from them.
//!
//! An alignment line lists items `start-end|path[+path...]`, where `start-end`
//! is a half-open token span and each path addresses a graph element by
//! 0-based outgoing-edge indices from the root (`0` is the root, `0.1` the
//! target of the root's second edge, constants included).

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{AmrGraph, GraphElement, NodeId, Target};
use crate::linearize::{Linearization, TokenSeq};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlignError {
    #[error("malformed alignment item `{0}`")]
    Malformed(String),
    #[error("path `{0}` does not address a graph element")]
    BadPath(String),
    #[error("token index {index} out of range for input length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("aligned element {0:?} does not appear in the token sequence")]
    NodeNotInSequence(GraphElement),
    #[error("output position {pos} out of range for output length {len}")]
    PositionOutOfRange { pos: usize, len: usize },
}

/// One aligned source span and the graph elements it covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedSpan {
    pub start: usize,
    pub end: usize,
    pub elements: Vec<GraphElement>,
}

/// Node-level hard alignment for one sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alignment {
    pub spans: Vec<AlignedSpan>,
}

impl Alignment {
    pub fn parse_line(line: &str, g: &AmrGraph) -> Result<Self, AlignError> {
        let mut spans = Vec::new();
        for item in line.split_whitespace() {
            let (span, paths) = item
                .split_once('|')
                .ok_or_else(|| AlignError::Malformed(item.to_string()))?;
            let (s, e) = span
                .split_once('-')
                .ok_or_else(|| AlignError::Malformed(item.to_string()))?;
            let start: usize = s.parse().map_err(|_| AlignError::Malformed(item.to_string()))?;
            let end: usize = e.parse().map_err(|_| AlignError::Malformed(item.to_string()))?;
            if end <= start {
                return Err(AlignError::Malformed(item.to_string()));
            }
            let elements = paths
                .split('+')
                .map(|p| resolve_path(g, p))
                .collect::<Result<Vec<_>, _>>()?;
            spans.push(AlignedSpan { start, end, elements });
        }
        Ok(Alignment { spans })
    }

    pub fn to_line(&self, g: &AmrGraph) -> String {
        let paths = element_paths(g);
        self.spans
            .iter()
            .map(|s| {
                let p: Vec<&str> = s
                    .elements
                    .iter()
                    .filter_map(|el| paths.get(el).map(String::as_str))
                    .collect();
                format!("{}-{}|{}", s.start, s.end, p.join("+"))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Checks every span against the input length.
    pub fn check_bounds(&self, input_len: usize) -> Result<(), AlignError> {
        for s in &self.spans {
            if s.end > input_len {
                return Err(AlignError::IndexOutOfRange {
                    index: s.end - 1,
                    len: input_len,
                });
            }
        }
        Ok(())
    }

    /// Token positions aligned to each element (union over spans).
    pub fn element_tokens(&self) -> BTreeMap<GraphElement, BTreeSet<usize>> {
        let mut m: BTreeMap<GraphElement, BTreeSet<usize>> = BTreeMap::new();
        for s in &self.spans {
            for el in &s.elements {
                m.entry(*el).or_default().extend(s.start..s.end);
            }
        }
        m
    }
}

fn resolve_path(g: &AmrGraph, path: &str) -> Result<GraphElement, AlignError> {
    let bad = || AlignError::BadPath(path.to_string());
    let mut parts = path.split('.');
    if parts.next() != Some("0") {
        return Err(bad());
    }
    let adj = g.adjacency();
    let mut cur = GraphElement::Node(g.root());
    for p in parts {
        let k: usize = p.parse().map_err(|_| bad())?;
        let GraphElement::Node(n) = cur else {
            return Err(bad());
        };
        let ei = *adj[n.0].get(k).ok_or_else(bad)?;
        cur = match g.edges()[ei].target {
            Target::Node(t) => GraphElement::Node(t),
            Target::Constant(_) => GraphElement::Constant(ei),
        };
    }
    Ok(cur)
}

/// Shortest-in-traversal path of every element: the path along which a
/// depth-first walk (stored edge order) first reaches it.
pub fn element_paths(g: &AmrGraph) -> BTreeMap<GraphElement, String> {
    let adj = g.adjacency();
    let mut out = BTreeMap::new();
    let mut stack = vec![(g.root(), "0".to_string())];
    out.insert(GraphElement::Node(g.root()), "0".to_string());
    while let Some((n, path)) = stack.pop() {
        let mut children = Vec::new();
        for (k, &ei) in adj[n.0].iter().enumerate() {
            let p = format!("{path}.{k}");
            match g.edges()[ei].target {
                Target::Constant(_) => {
                    out.insert(GraphElement::Constant(ei), p);
                }
                Target::Node(t) => {
                    if let Entry::Vacant(v) = out.entry(GraphElement::Node(t)) {
                        v.insert(p.clone());
                        children.push((t, p));
                    }
                }
            }
        }
        // reversed so the first child is expanded first
        stack.extend(children.into_iter().rev());
    }
    out
}

/// Alignment from output positions to input token positions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PositionAlignment {
    pub rows: BTreeMap<usize, BTreeSet<usize>>,
}

/// Moves each element's tokens onto the position of its first-visit token
/// in the linearization. Revisits and brackets stay unaligned.
pub fn project_alignment(a: &Alignment, lin: &Linearization) -> Result<PositionAlignment, AlignError> {
    let mut rows: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (el, toks) in a.element_tokens() {
        let pos = *lin.positions.get(&el).ok_or(AlignError::NodeNotInSequence(el))?;
        rows.entry(pos).or_default().extend(toks);
    }
    Ok(PositionAlignment { rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AttentionMode {
    #[default]
    Standard,
    /// Relation brackets and sentinels get an all-zero reference row.
    NoRelationAlign,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttentionRow {
    Uniform,
    Zero,
    Tokens(Vec<usize>),
}

/// Reference attention for one sentence pair: one row per output position
/// over `input_len` input positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceAttention {
    pub input_len: usize,
    pub rows: Vec<AttentionRow>,
}

impl ReferenceAttention {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, j: usize) -> Vec<f64> {
        let m = self.input_len;
        match &self.rows[j] {
            AttentionRow::Uniform => vec![1.0 / m as f64; m],
            AttentionRow::Zero => vec![0.0; m],
            AttentionRow::Tokens(t) => {
                let mut r = vec![0.0; m];
                let p = 1.0 / t.len() as f64;
                for &i in t {
                    r[i] = p;
                }
                r
            }
        }
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        (0..self.rows.len()).map(|j| self.row(j)).collect()
    }

    pub fn push(&mut self, row: AttentionRow) {
        self.rows.push(row);
    }

    /// Compact text form: input length, then one tab-separated field per row
    /// (`u` uniform, `z` zero, or comma-separated token indices).
    pub fn to_archive_line(&self) -> String {
        let mut out = self.input_len.to_string();
        for r in &self.rows {
            out.push('\t');
            match r {
                AttentionRow::Uniform => out.push('u'),
                AttentionRow::Zero => out.push('z'),
                AttentionRow::Tokens(t) => {
                    let s: Vec<String> = t.iter().map(|i| i.to_string()).collect();
                    out.push_str(&s.join(","));
                }
            }
        }
        out
    }

    pub fn from_archive_line(line: &str) -> Result<Self, AlignError> {
        let bad = || AlignError::Malformed(line.to_string());
        let mut fields = line.split('\t');
        let input_len: usize = fields.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let mut rows = Vec::new();
        for f in fields {
            rows.push(match f {
                "u" => AttentionRow::Uniform,
                "z" => AttentionRow::Zero,
                _ => {
                    let t = f
                        .split(',')
                        .map(|x| x.parse::<usize>().map_err(|_| bad()))
                        .collect::<Result<Vec<_>, _>>()?;
                    if let Some(&i) = t.iter().find(|&&i| i >= input_len) {
                        return Err(AlignError::IndexOutOfRange {
                            index: i,
                            len: input_len,
                        });
                    }
                    AttentionRow::Tokens(t)
                }
            });
        }
        Ok(ReferenceAttention { input_len, rows })
    }
}

/// Builds reference rows: equal mass over the tokens aligned to a position,
/// uniform `1/m` for unaligned positions. Under [`AttentionMode::NoRelationAlign`]
/// bracket and sentinel positions get zero rows instead.
pub fn reference_attention(
    a: &PositionAlignment,
    input_len: usize,
    out: &TokenSeq,
    mode: AttentionMode,
) -> Result<ReferenceAttention, AlignError> {
    for (&pos, toks) in &a.rows {
        if pos >= out.len() {
            return Err(AlignError::PositionOutOfRange { pos, len: out.len() });
        }
        if let Some(&i) = toks.iter().find(|&&i| i >= input_len) {
            return Err(AlignError::IndexOutOfRange {
                index: i,
                len: input_len,
            });
        }
    }
    let rows = out
        .tokens()
        .iter()
        .enumerate()
        .map(|(j, tok)| {
            if mode == AttentionMode::NoRelationAlign && tok.is_structural() {
                return AttentionRow::Zero;
            }
            match a.rows.get(&j) {
                Some(t) if !t.is_empty() && !tok.is_structural() => AttentionRow::Tokens(t.iter().copied().collect()),
                _ => AttentionRow::Uniform,
            }
        })
        .collect();
    Ok(ReferenceAttention { input_len, rows })
}

/// Appends the row for the end-of-sequence prediction: uniform, or zero
/// under [`AttentionMode::NoRelationAlign`].
pub fn with_end_row(mut r: ReferenceAttention, mode: AttentionMode) -> ReferenceAttention {
    r.push(match mode {
        AttentionMode::Standard => AttentionRow::Uniform,
        AttentionMode::NoRelationAlign => AttentionRow::Zero,
    });
    r
}

/// Hard alignment of a node to the given tokens, for callers building
/// alignments programmatically.
pub fn node_span(start: usize, end: usize, node: NodeId) -> AlignedSpan {
    AlignedSpan {
        start,
        end,
        elements: vec![GraphElement::Node(node)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::linearize_traced;
    use crate::penman::parse_penman;

    fn ryan() -> AmrGraph {
        parse_penman("(d / describe-01 :ARG0 (p / person :name (n / name :op1 \"Ryan\")) :ARG1 p :ARG2 (g / genius))")
            .unwrap()
    }

    #[test]
    fn paths_roundtrip() {
        let g = ryan();
        let a = Alignment::parse_line("0-1|0.0+0.0.0+0.0.0.0 2-3|0 6-7|0.2", &g).unwrap();
        assert_eq!(a.spans.len(), 3);
        assert_eq!(a.spans[0].elements[2], GraphElement::Constant(2));
        assert_eq!(a.spans[2].elements[0], GraphElement::Node(g.find_var("g").unwrap()));
        assert_eq!(Alignment::parse_line(&a.to_line(&g), &g).unwrap(), a);
        // the reentrant edge path resolves to the same node
        let b = Alignment::parse_line("0-1|0.1", &g).unwrap();
        assert_eq!(b.spans[0].elements[0], GraphElement::Node(g.find_var("p").unwrap()));
    }

    #[test]
    fn malformed_items() {
        let g = ryan();
        assert!(matches!(
            Alignment::parse_line("0-1", &g),
            Err(AlignError::Malformed(_))
        ));
        assert!(matches!(
            Alignment::parse_line("1-1|0", &g),
            Err(AlignError::Malformed(_))
        ));
        assert!(matches!(
            Alignment::parse_line("0-1|0.9", &g),
            Err(AlignError::BadPath(_))
        ));
        assert!(matches!(
            Alignment::parse_line("0-1|1", &g),
            Err(AlignError::BadPath(_))
        ));
        let a = Alignment::parse_line("5-7|0", &g).unwrap();
        assert_eq!(a.check_bounds(6), Err(AlignError::IndexOutOfRange { index: 6, len: 6 }));
    }

    #[test]
    fn projection() {
        let g = ryan();
        let lin = linearize_traced(&g);
        // genius aligned to token 4
        let a = Alignment::parse_line("4-5|0.2 0-1|0.0.0.0", &g).unwrap();
        let p = project_alignment(&a, &lin).unwrap();
        let toks = lin.tokens.rendered();
        let pos_genius = toks.iter().position(|t| t == "genius").unwrap();
        assert_eq!(p.rows[&pos_genius], BTreeSet::from([4]));
        let pos_ryan = toks.iter().position(|t| t == "\"Ryan\"").unwrap();
        assert_eq!(p.rows[&pos_ryan], BTreeSet::from([0]));
        // reentrant node: only the first visit is aligned
        let a = Alignment::parse_line("0-1|0.1", &g).unwrap();
        let p = project_alignment(&a, &lin).unwrap();
        assert_eq!(p.rows.keys().copied().collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn rows_for_aligned_unaligned_and_ablation() {
        let out = TokenSeq::parse("-TOP-( a :ARG0( b )ARG0 )-TOP-");
        let mut pa = PositionAlignment::default();
        pa.rows.insert(3, BTreeSet::from([2, 3]));
        let r = reference_attention(&pa, 5, &out, AttentionMode::Standard).unwrap();
        assert_eq!(r.row(3), vec![0.0, 0.0, 0.5, 0.5, 0.0]);
        assert_eq!(r.row(2), vec![0.2; 5]);
        assert_eq!(r.row(1), vec![0.2; 5]);
        let r4 = reference_attention(&PositionAlignment::default(), 4, &out, AttentionMode::Standard).unwrap();
        assert_eq!(r4.row(2), vec![0.25; 4]);
        let z = reference_attention(&PositionAlignment::default(), 4, &out, AttentionMode::NoRelationAlign).unwrap();
        assert_eq!(z.row(2), vec![0.0; 4]);
        assert_eq!(z.row(1), vec![0.25; 4]);
    }

    #[test]
    fn archive_line_roundtrip() {
        let r = ReferenceAttention {
            input_len: 4,
            rows: vec![
                AttentionRow::Uniform,
                AttentionRow::Zero,
                AttentionRow::Tokens(vec![1, 3]),
            ],
        };
        let line = r.to_archive_line();
        assert_eq!(line, "4\tu\tz\t1,3");
        assert_eq!(ReferenceAttention::from_archive_line(&line).unwrap(), r);
        assert!(ReferenceAttention::from_archive_line("2\t5").is_err());
    }

    #[test]
    fn out_of_range_errors() {
        let out = TokenSeq::parse("-TOP-( a )-TOP-");
        let mut pa = PositionAlignment::default();
        pa.rows.insert(1, BTreeSet::from([7]));
        assert_eq!(
            reference_attention(&pa, 3, &out, AttentionMode::Standard),
            Err(AlignError::IndexOutOfRange { index: 7, len: 3 })
        );
    }
}
