//! Penman notation reader and writer.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{AmrGraph, Edge, GraphError, Node, NodeId, Target};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PenmanError {
    #[error("unbalanced parentheses at byte {0}")]
    UnbalancedInput(usize),
    #[error("variable `{0}` is defined twice")]
    DuplicateVariable(String),
    #[error("variable `{0}` is referenced but never defined")]
    DanglingReference(String),
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("empty input")]
    Empty,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Slash,
    Role(String),
    Quoted(String),
    Symbol(String),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, PenmanError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'#' if at_line_start(bytes, i) => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                out.push((i, Tok::Open));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::Close));
                i += 1;
            }
            b'/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            b'"' => {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i] != b'"' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
                if i >= bytes.len() {
                    return Err(PenmanError::Syntax {
                        pos: start,
                        msg: "unterminated string".into(),
                    });
                }
                i += 1;
                out.push((start, Tok::Quoted(text[start..i].to_string())));
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len() && !is_delim(bytes[i]) {
                    i += 1;
                }
                let word = &text[start..i];
                if let Some(role) = word.strip_prefix(':') {
                    out.push((start, Tok::Role(role.to_string())));
                } else {
                    out.push((start, Tok::Symbol(word.to_string())));
                }
            }
        }
    }
    Ok(out)
}

fn at_line_start(bytes: &[u8], i: usize) -> bool {
    bytes[..i]
        .iter()
        .rev()
        .take_while(|&&b| b != b'\n')
        .all(|b| b.is_ascii_whitespace())
}

fn is_delim(b: u8) -> bool {
    b.is_ascii_whitespace() || b == b'(' || b == b')' || b == b'"'
}

/// Unquoted symbols that are always constants, never variables.
const RESERVED_CONSTANTS: [&str; 5] = ["-", "+", "interrogative", "expressive", "imperative"];

/// Whether an undefined bare symbol should be treated as a variable reference
/// (and therefore reported as dangling) rather than a constant.
fn looks_like_variable(s: &str) -> bool {
    if RESERVED_CONSTANTS.contains(&s) {
        return false;
    }
    let letters = s.chars().take_while(|c| c.is_ascii_lowercase()).count();
    let rest = &s[letters..];
    (1..=2).contains(&letters) && rest.chars().all(|c| c.is_ascii_digit())
}

enum RawTarget {
    Node(usize),
    Symbol(String),
    Quoted(String),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    nodes: Vec<Node>,
    edges: Vec<(usize, String, RawTarget)>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn syntax(&self, msg: &str) -> PenmanError {
        PenmanError::Syntax {
            pos: self.offset(),
            msg: msg.to_string(),
        }
    }

    fn node(&mut self) -> Result<usize, PenmanError> {
        // caller consumed '('
        let var = match self.peek() {
            Some(Tok::Symbol(s)) => s.clone(),
            None => return Err(PenmanError::UnbalancedInput(self.end)),
            _ => return Err(self.syntax("expected variable")),
        };
        self.pos += 1;
        if self.peek() != Some(&Tok::Slash) {
            return Err(self.syntax("expected `/` after variable"));
        }
        self.pos += 1;
        let concept = match self.peek() {
            Some(Tok::Symbol(s)) => s.clone(),
            Some(Tok::Quoted(s)) => s.clone(),
            None => return Err(PenmanError::UnbalancedInput(self.end)),
            _ => return Err(self.syntax("expected concept")),
        };
        self.pos += 1;
        let id = self.nodes.len();
        self.nodes.push(Node { var, concept });
        loop {
            match self.peek().cloned() {
                Some(Tok::Close) => {
                    self.pos += 1;
                    return Ok(id);
                }
                Some(Tok::Role(role)) => {
                    self.pos += 1;
                    // reserve the slot so edges stay in document order
                    let slot = self.edges.len();
                    self.edges.push((id, role, RawTarget::Quoted(String::new())));
                    let target = match self.peek().cloned() {
                        Some(Tok::Open) => {
                            self.pos += 1;
                            RawTarget::Node(self.node()?)
                        }
                        Some(Tok::Symbol(s)) => {
                            self.pos += 1;
                            RawTarget::Symbol(s)
                        }
                        Some(Tok::Quoted(s)) => {
                            self.pos += 1;
                            RawTarget::Quoted(s)
                        }
                        None => return Err(PenmanError::UnbalancedInput(self.end)),
                        _ => return Err(self.syntax("expected relation target")),
                    };
                    self.edges[slot].2 = target;
                }
                None => return Err(PenmanError::UnbalancedInput(self.end)),
                _ => return Err(self.syntax("expected relation or `)`")),
            }
        }
    }
}

/// Reads one Penman expression. Bare symbols that name a variable defined
/// anywhere in the expression become reentrant edges to that node.
pub fn parse_penman(text: &str) -> Result<AmrGraph, PenmanError> {
    let toks = tokenize(text)?;
    let depth = toks.iter().fold(0i64, |d, (_, t)| match t {
        Tok::Open => d + 1,
        Tok::Close => d - 1,
        _ => d,
    });
    if depth != 0 {
        let at = toks.last().map(|(o, _)| *o).unwrap_or(0);
        return Err(PenmanError::UnbalancedInput(at));
    }
    if toks.is_empty() {
        return Err(PenmanError::Empty);
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        nodes: Vec::new(),
        edges: Vec::new(),
    };
    if p.peek() != Some(&Tok::Open) {
        return Err(p.syntax("expected `(`"));
    }
    p.pos += 1;
    let root = p.node()?;
    if p.pos != p.toks.len() {
        return Err(p.syntax("trailing content after graph"));
    }

    let mut by_var: HashMap<&str, usize> = HashMap::new();
    for (i, n) in p.nodes.iter().enumerate() {
        if by_var.insert(n.var.as_str(), i).is_some() {
            return Err(PenmanError::DuplicateVariable(n.var.clone()));
        }
    }
    let mut edges = Vec::with_capacity(p.edges.len());
    for (src, role, raw) in &p.edges {
        let target = match raw {
            RawTarget::Node(t) => Target::Node(NodeId(*t)),
            RawTarget::Quoted(s) => Target::Constant(s.clone()),
            RawTarget::Symbol(s) => match by_var.get(s.as_str()) {
                Some(&t) => Target::Node(NodeId(t)),
                None if looks_like_variable(s) => return Err(PenmanError::DanglingReference(s.clone())),
                None => Target::Constant(s.clone()),
            },
        };
        edges.push(Edge {
            source: NodeId(*src),
            role: role.clone(),
            target,
        });
    }
    Ok(AmrGraph::from_parts(p.nodes, edges, NodeId(root))?)
}

/// Writes a graph in multi-line Penman notation. Each node is defined at its
/// first occurrence in a depth-first walk (stored edge order); later
/// occurrences are bare variable references.
pub fn emit_penman(g: &AmrGraph) -> String {
    let adj = g.adjacency();
    let mut out = String::new();
    let mut defined = HashSet::new();
    emit_node(g, &adj, g.root(), 0, &mut defined, &mut out);
    out
}

fn emit_node(
    g: &AmrGraph,
    adj: &[Vec<usize>],
    id: NodeId,
    depth: usize,
    defined: &mut HashSet<NodeId>,
    out: &mut String,
) {
    defined.insert(id);
    let n = g.node(id);
    let _ = write!(out, "({} / {}", n.var, n.concept);
    for &ei in &adj[id.0] {
        let e = &g.edges()[ei];
        out.push('\n');
        out.push_str(&"    ".repeat(depth + 1));
        let _ = write!(out, ":{} ", e.role);
        match &e.target {
            Target::Constant(c) => out.push_str(c),
            Target::Node(t) if defined.contains(t) => out.push_str(&g.node(*t).var),
            Target::Node(t) => emit_node(g, adj, *t, depth + 1, defined, out),
        }
    }
    out.push(')');
}
