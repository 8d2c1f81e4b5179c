//! Bracket-paired linearization of AMR graphs.
//!
//! Every branch is wrapped in a relation-specific pair `:ARG0( ... )ARG0`, the
//! whole traversal in `-TOP-( ... )-TOP-`, and a revisited node is written as
//! its concept followed by `-RET-`. Variables are dropped.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::graph::{fresh_variable, AmrGraph, GraphElement, Node, NodeId, Target};

pub const TOP_OPEN: &str = "-TOP-(";
pub const TOP_CLOSE: &str = ")-TOP-";
pub const RET: &str = "-RET-";
/// Placeholder concept used wherever a branch or graph has no usable head.
pub const UNKNOWN_CONCEPT: &str = "amr-unknown";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinToken {
    TopOpen,
    TopClose,
    RelOpen(String),
    RelClose(String),
    Concept(String),
    Constant(String),
    Ret,
}

impl LinToken {
    /// Relation brackets and the two sentinels.
    pub fn is_structural(&self) -> bool {
        matches!(
            self,
            LinToken::TopOpen | LinToken::TopClose | LinToken::RelOpen(_) | LinToken::RelClose(_)
        )
    }

    pub fn parse(s: &str) -> LinToken {
        match s {
            TOP_OPEN => LinToken::TopOpen,
            TOP_CLOSE => LinToken::TopClose,
            RET => LinToken::Ret,
            _ if s.len() > 2 && s.starts_with(':') && s.ends_with('(') => {
                LinToken::RelOpen(s[1..s.len() - 1].to_string())
            }
            _ if s.len() > 1 && s.starts_with(')') => LinToken::RelClose(s[1..].to_string()),
            _ if is_constant_form(s) => LinToken::Constant(unescape_constant(s)),
            _ => LinToken::Concept(s.to_string()),
        }
    }
}

impl fmt::Display for LinToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinToken::TopOpen => f.write_str(TOP_OPEN),
            LinToken::TopClose => f.write_str(TOP_CLOSE),
            LinToken::RelOpen(l) => write!(f, ":{l}("),
            LinToken::RelClose(l) => write!(f, "){l}"),
            LinToken::Concept(c) => f.write_str(c),
            LinToken::Constant(c) => f.write_str(&escape_constant(c)),
            LinToken::Ret => f.write_str(RET),
        }
    }
}

/// Quoted strings, numbers, and the reserved symbols `-`, `+`,
/// `interrogative`, `expressive`, `imperative`.
pub fn is_constant_form(s: &str) -> bool {
    s.starts_with('"') || matches!(s, "-" | "+" | "interrogative" | "expressive" | "imperative") || is_number(s)
}

pub fn is_number(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    !body.is_empty() && body.chars().next().is_some_and(|c| c.is_ascii_digit()) && body.parse::<f64>().is_ok()
}

// Quoted constants may contain spaces; one token must stay one
// whitespace-free string.
fn escape_constant(c: &str) -> String {
    if !c.contains([' ', '\\']) {
        return c.to_string();
    }
    c.replace('\\', "\\\\").replace(' ', "\\_")
}

fn unescape_constant(s: &str) -> String {
    if !s.contains('\\') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('_') => out.push(' '),
                Some(o) => out.push(o),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSeq(pub Vec<LinToken>);

impl TokenSeq {
    pub fn parse(line: &str) -> TokenSeq {
        TokenSeq(line.split_ascii_whitespace().map(LinToken::parse).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> &[LinToken] {
        &self.0
    }

    pub fn rendered(&self) -> Vec<String> {
        self.0.iter().map(|t| t.to_string()).collect()
    }

    /// True when the sequence is `-TOP-( ... )-TOP-` with every relation bracket
    /// closed by its own label at the same depth.
    pub fn is_balanced(&self) -> bool {
        let t = &self.0;
        if t.len() < 2 || t[0] != LinToken::TopOpen || t[t.len() - 1] != LinToken::TopClose {
            return false;
        }
        let mut stack: Vec<&str> = Vec::new();
        for tok in &t[1..t.len() - 1] {
            match tok {
                LinToken::RelOpen(l) => stack.push(l),
                LinToken::RelClose(l) => {
                    if stack.pop() != Some(l.as_str()) {
                        return false;
                    }
                }
                LinToken::TopOpen | LinToken::TopClose => return false,
                _ => {}
            }
        }
        stack.is_empty()
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromIterator<LinToken> for TokenSeq {
    fn from_iter<I: IntoIterator<Item = LinToken>>(iter: I) -> Self {
        TokenSeq(iter.into_iter().collect())
    }
}

/// A linearization together with the token position of every graph element
/// it emitted: first-visit concept tokens for nodes, leaf tokens for constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub tokens: TokenSeq,
    pub positions: HashMap<GraphElement, usize>,
}

/// Overrides applied while walking the graph; used by re-categorization to
/// replace concepts with category symbols and fold away absorbed branches.
#[derive(Debug, Clone, Default)]
pub struct LinearizeView {
    pub node_labels: HashMap<NodeId, String>,
    pub constant_labels: HashMap<usize, String>,
    pub skip_edges: HashSet<usize>,
}

pub fn linearize(g: &AmrGraph) -> TokenSeq {
    linearize_traced(g).tokens
}

pub fn linearize_traced(g: &AmrGraph) -> Linearization {
    linearize_with(g, &LinearizeView::default())
}

pub fn linearize_with(g: &AmrGraph, view: &LinearizeView) -> Linearization {
    let adj = g.adjacency();
    let mut w = Walker {
        g,
        view,
        adj: &adj,
        visited: vec![false; g.node_count()],
        out: vec![LinToken::TopOpen],
        positions: HashMap::new(),
    };
    w.walk(g.root());
    w.out.push(LinToken::TopClose);
    Linearization {
        tokens: TokenSeq(w.out),
        positions: w.positions,
    }
}

struct Walker<'a> {
    g: &'a AmrGraph,
    view: &'a LinearizeView,
    adj: &'a [Vec<usize>],
    visited: Vec<bool>,
    out: Vec<LinToken>,
    positions: HashMap<GraphElement, usize>,
}

impl Walker<'_> {
    fn label(&self, id: NodeId) -> String {
        self.view
            .node_labels
            .get(&id)
            .cloned()
            .unwrap_or_else(|| self.g.node(id).concept.clone())
    }

    fn walk(&mut self, id: NodeId) {
        self.visited[id.0] = true;
        self.positions.insert(GraphElement::Node(id), self.out.len());
        self.out.push(LinToken::Concept(self.label(id)));
        for &ei in &self.adj[id.0] {
            if self.view.skip_edges.contains(&ei) {
                continue;
            }
            let e = &self.g.edges()[ei];
            self.out.push(LinToken::RelOpen(e.role.clone()));
            match &e.target {
                Target::Constant(c) => {
                    self.positions.insert(GraphElement::Constant(ei), self.out.len());
                    let tok = match self.view.constant_labels.get(&ei) {
                        Some(l) => LinToken::Concept(l.clone()),
                        None => LinToken::Constant(c.clone()),
                    };
                    self.out.push(tok);
                }
                Target::Node(t) if self.visited[t.0] => {
                    self.out.push(LinToken::Concept(self.label(*t)));
                    self.out.push(LinToken::Ret);
                }
                Target::Node(t) => self.walk(*t),
            }
            self.out.push(LinToken::RelClose(e.role.clone()));
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinearizeError {
    #[error("unbalanced token sequence at position {0}")]
    Unbalanced(usize),
    #[error("token sequence contains no concept")]
    EmptySequence,
}

enum Child {
    Node(NodeId),
    Constant,
}

struct Frame {
    /// Node the branch hangs from; `None` for the `-TOP-` frame.
    parent: Option<NodeId>,
    role: String,
    child: Option<Child>,
}

fn sanitize_concept(raw: &str) -> String {
    let s: String = crate::graph::unquote(raw)
        .chars()
        .map(|c| {
            if c.is_whitespace() || c == '(' || c == ')' {
                '_'
            } else {
                c
            }
        })
        .collect();
    if s.is_empty() {
        UNKNOWN_CONCEPT.to_string()
    } else {
        s
    }
}

struct Builder {
    nodes: Vec<Node>,
    edges: Vec<(NodeId, String, Target)>,
    used: HashMap<String, usize>,
}

impl Builder {
    fn new_node(&mut self, concept: &str) -> NodeId {
        let concept = sanitize_concept(concept);
        let var = fresh_variable(&concept, &mut self.used);
        self.nodes.push(Node { var, concept });
        NodeId(self.nodes.len() - 1)
    }

    fn most_recent(&self, concept: &str) -> Option<NodeId> {
        let concept = sanitize_concept(concept);
        self.nodes.iter().rposition(|n| n.concept == concept).map(NodeId)
    }

    /// Sets the head of the innermost frame, adding the edge from its parent.
    fn attach(&mut self, frame: &mut Frame, child: Target) {
        frame.child = Some(match &child {
            Target::Node(id) => Child::Node(*id),
            Target::Constant(_) => Child::Constant,
        });
        if let Some(p) = frame.parent {
            self.edges.push((p, frame.role.clone(), child));
        }
    }
}

/// Rebuilds a graph from a balanced token sequence.
///
/// `concept -RET-` attaches to the most recent node already built with that
/// concept (or builds a fresh node when none exists). Stray tokens inside a
/// balanced sequence (second heads in one branch, dangling `-RET-`, branches
/// under a constant) are tolerated: extras are ignored and branches under a
/// constant attach to the enclosing node.
pub fn delinearize(t: &TokenSeq) -> Result<AmrGraph, LinearizeError> {
    let toks = &t.0;
    if toks.is_empty() {
        return Err(LinearizeError::EmptySequence);
    }
    if toks[0] != LinToken::TopOpen {
        return Err(LinearizeError::Unbalanced(0));
    }
    let mut b = Builder {
        nodes: Vec::new(),
        edges: Vec::new(),
        used: HashMap::new(),
    };
    let mut stack = vec![Frame {
        parent: None,
        role: String::new(),
        child: None,
    }];
    let mut root: Option<NodeId> = None;
    let mut closed = false;
    let mut i = 1;
    while i < toks.len() {
        if closed {
            return Err(LinearizeError::Unbalanced(i));
        }
        match &toks[i] {
            LinToken::TopOpen => return Err(LinearizeError::Unbalanced(i)),
            LinToken::Concept(c) => {
                let is_ret = toks.get(i + 1) == Some(&LinToken::Ret);
                let frame = stack.last_mut().expect("stack never empty before close");
                if frame.child.is_none() {
                    let id = if is_ret {
                        b.most_recent(c).unwrap_or_else(|| b.new_node(c))
                    } else {
                        b.new_node(c)
                    };
                    b.attach(frame, Target::Node(id));
                    if frame.parent.is_none() {
                        root = Some(id);
                    }
                }
                if is_ret {
                    i += 1;
                }
            }
            LinToken::Constant(c) => {
                let frame = stack.last_mut().expect("stack never empty before close");
                if frame.child.is_none() {
                    if frame.parent.is_none() {
                        let id = b.new_node(c);
                        b.attach(frame, Target::Node(id));
                        root = Some(id);
                    } else {
                        b.attach(frame, Target::Constant(c.clone()));
                    }
                }
            }
            LinToken::Ret => {}
            LinToken::RelOpen(l) => {
                let frame = stack.last_mut().expect("stack never empty before close");
                let parent = match frame.child {
                    Some(Child::Node(id)) => id,
                    Some(Child::Constant) => frame.parent.expect("constants never head the top frame"),
                    None => {
                        let id = b.new_node(UNKNOWN_CONCEPT);
                        b.attach(frame, Target::Node(id));
                        if frame.parent.is_none() {
                            root = Some(id);
                        }
                        id
                    }
                };
                stack.push(Frame {
                    parent: Some(parent),
                    role: l.clone(),
                    child: None,
                });
            }
            LinToken::RelClose(l) => {
                if stack.len() < 2 || stack.last().map(|f| f.role.as_str()) != Some(l.as_str()) {
                    return Err(LinearizeError::Unbalanced(i));
                }
                let mut frame = stack.pop().expect("checked above");
                if frame.child.is_none() {
                    let id = b.new_node(UNKNOWN_CONCEPT);
                    b.attach(&mut frame, Target::Node(id));
                }
            }
            LinToken::TopClose => {
                if stack.len() != 1 {
                    return Err(LinearizeError::Unbalanced(i));
                }
                closed = true;
            }
        }
        i += 1;
    }
    if !closed {
        return Err(LinearizeError::Unbalanced(toks.len()));
    }
    let root = root.ok_or(LinearizeError::EmptySequence)?;
    let mut g = AmrGraph::with_root(b.nodes[root.0].var.clone(), b.nodes[root.0].concept.clone());
    // Rebuild with the root first so NodeId(0) is the root.
    let mut remap = vec![NodeId(usize::MAX); b.nodes.len()];
    remap[root.0] = NodeId(0);
    for (i, n) in b.nodes.iter().enumerate() {
        if i != root.0 {
            remap[i] = g.add_node(n.var.clone(), n.concept.clone());
        }
    }
    for (s, role, t) in b.edges {
        let t = match t {
            Target::Node(id) => Target::Node(remap[id.0]),
            c => c,
        };
        g.add_edge(remap[s.0], role, t);
    }
    debug_assert!(g.validate().is_ok());
    Ok(g)
}

/// Makes any token sequence balanced. Deterministic and idempotent.
///
/// 1. a relation close whose label differs from the innermost open relation
///    closes that relation anyway;
/// 2. relations still open at the end are closed before the final `)-TOP-`;
/// 3. closes with nothing open are dropped, as is everything after an
///    explicit `)-TOP-`;
/// 4. a missing leading `-TOP-(` or trailing `)-TOP-` is inserted;
/// 5. a branch closed without a concept or constant (and such a top level)
///    gets the placeholder concept `amr-unknown` before its close.
pub fn repair_brackets(t: &TokenSeq) -> TokenSeq {
    let mut out: Vec<LinToken> = Vec::with_capacity(t.len() + 4);
    // Open relations, each with whether its branch has a head yet.
    let mut stack: Vec<(String, bool)> = Vec::new();
    let mut top_headed = false;
    out.push(LinToken::TopOpen);
    let mut toks = t.0.iter().peekable();
    if toks.peek() == Some(&&LinToken::TopOpen) {
        toks.next();
    }

    fn push_close(out: &mut Vec<LinToken>, headed: bool, tok: LinToken) {
        if !headed {
            out.push(LinToken::Concept(UNKNOWN_CONCEPT.to_string()));
        }
        out.push(tok);
    }

    for tok in toks {
        let headed = match stack.last_mut() {
            Some((_, h)) => h,
            None => &mut top_headed,
        };
        match tok {
            LinToken::TopOpen => {}
            LinToken::RelOpen(l) => {
                *headed = true;
                stack.push((l.clone(), false));
                out.push(tok.clone());
            }
            LinToken::RelClose(_) => {
                if let Some((open, h)) = stack.pop() {
                    push_close(&mut out, h, LinToken::RelClose(open));
                }
            }
            LinToken::TopClose => break,
            LinToken::Concept(_) | LinToken::Constant(_) => {
                *headed = true;
                out.push(tok.clone());
            }
            LinToken::Ret => out.push(tok.clone()),
        }
    }
    while let Some((open, h)) = stack.pop() {
        push_close(&mut out, h, LinToken::RelClose(open));
    }
    push_close(&mut out, top_headed, LinToken::TopClose);
    TokenSeq(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penman::parse_penman;

    const RYAN: &str = "(d / describe-01 :ARG0 (p / person :name (n / name :op1 \"Ryan\")) :ARG1 p :ARG2 (g / genius))";
    const RYAN_LIN: &str = "-TOP-( describe-01 :ARG0( person :name( name :op1( \"Ryan\" )op1 )name )ARG0 :ARG1( person -RET- )ARG1 :ARG2( genius )ARG2 )-TOP-";

    #[test]
    fn token_rendering_is_bijective() {
        for s in [
            "-TOP-(",
            ")-TOP-",
            ":ARG0(",
            ")ARG0",
            "-RET-",
            "genius",
            "\"Ryan\"",
            "2007",
            "-",
            "-SURF--0",
            "DATE-0",
            "NE_person-1",
            ":ARG0-of(",
            ")ARG0-of",
        ] {
            assert_eq!(LinToken::parse(s).to_string(), s);
        }
        assert_eq!(LinToken::parse("-SURF--0"), LinToken::Concept("-SURF--0".into()));
        assert_eq!(LinToken::parse("2007"), LinToken::Constant("2007".into()));
        let spaced = LinToken::Constant("\"a b\\c\"".into());
        assert_eq!(LinToken::parse(&spaced.to_string()), spaced);
        assert!(!spaced.to_string().contains(' '));
    }

    #[test]
    fn single_node() {
        let g = parse_penman("(g / genius)").unwrap();
        assert_eq!(linearize(&g).to_string(), "-TOP-( genius )-TOP-");
        let back = delinearize(&TokenSeq::parse("-TOP-( genius )-TOP-")).unwrap();
        assert!(back.isomorphic(&g));
    }

    #[test]
    fn ryan_linearization() {
        let g = parse_penman(RYAN).unwrap();
        let lin = linearize(&g);
        assert_eq!(lin.to_string(), RYAN_LIN);
        assert!(lin.is_balanced());
        let back = delinearize(&lin).unwrap();
        assert!(back.isomorphic(&g));
    }

    #[test]
    fn chain_depth() {
        let g = parse_penman("(a / a :mod (b / b :mod (c / c)))").unwrap();
        let lin = linearize(&g);
        let mut depth = 0usize;
        let mut max = 0;
        for t in lin.tokens() {
            match t {
                LinToken::TopOpen | LinToken::RelOpen(_) => {
                    depth += 1;
                    max = max.max(depth);
                }
                LinToken::TopClose | LinToken::RelClose(_) => depth -= 1,
                _ => {}
            }
        }
        assert_eq!(max, 3);
        assert_eq!(depth, 0);
    }

    #[test]
    fn ret_attaches_to_most_recent_same_concept() {
        let t = TokenSeq::parse(
            "-TOP-( and :op1( person )op1 :op2( person )op2 :op3( see-01 :ARG0( person -RET- )ARG0 )op3 )-TOP-",
        );
        let g = delinearize(&t).unwrap();
        assert_eq!(g.node_count(), 4);
        let see = g.nodes().iter().position(|n| n.concept == "see-01").unwrap();
        let arg0 = g
            .edges()
            .iter()
            .find(|e| e.source.0 == see && e.role == "ARG0")
            .unwrap();
        let op2 = g.edges().iter().find(|e| e.role == "op2").unwrap();
        assert_eq!(arg0.target, op2.target);
    }

    #[test]
    fn ret_without_antecedent_creates_node() {
        let g = delinearize(&TokenSeq::parse("-TOP-( a :ARG0( b -RET- )ARG0 )-TOP-")).unwrap();
        assert_eq!(g.node_count(), 2);
    }

    #[test]
    fn delinearize_errors() {
        assert_eq!(delinearize(&TokenSeq::default()), Err(LinearizeError::EmptySequence));
        assert!(matches!(
            delinearize(&TokenSeq::parse("-TOP-( a :ARG0( b )ARG1 )-TOP-")),
            Err(LinearizeError::Unbalanced(_))
        ));
        assert!(matches!(
            delinearize(&TokenSeq::parse("-TOP-( a")),
            Err(LinearizeError::Unbalanced(_))
        ));
        assert_eq!(
            delinearize(&TokenSeq::parse("-TOP-( )-TOP-")),
            Err(LinearizeError::EmptySequence)
        );
    }

    #[test]
    fn repair_examples() {
        let r = repair_brackets(&TokenSeq::parse("-TOP-( genius"));
        assert_eq!(r.to_string(), "-TOP-( genius )-TOP-");
        let r = repair_brackets(&TokenSeq::parse("-TOP-( a :ARG0( b )ARG1 )-TOP-"));
        assert_eq!(r.to_string(), "-TOP-( a :ARG0( b )ARG0 )-TOP-");
        assert!(delinearize(&r).is_ok());
        let r = repair_brackets(&TokenSeq::parse(RYAN_LIN));
        assert_eq!(r.to_string(), RYAN_LIN);
    }

    #[test]
    fn repair_rules() {
        // orphan closes dropped, missing top inserted
        let r = repair_brackets(&TokenSeq::parse(")ARG0 a )mod :ARG1( b"));
        assert_eq!(r.to_string(), "-TOP-( a :ARG1( b )ARG1 )-TOP-");
        // empty branch gets a placeholder
        let r = repair_brackets(&TokenSeq::parse("-TOP-( a :ARG0( )ARG0 )-TOP-"));
        assert_eq!(r.to_string(), "-TOP-( a :ARG0( amr-unknown )ARG0 )-TOP-");
        // content after the top close is dropped
        let r = repair_brackets(&TokenSeq::parse("-TOP-( a )-TOP- b )-TOP-"));
        assert_eq!(r.to_string(), "-TOP-( a )-TOP-");
        let r = repair_brackets(&TokenSeq::default());
        assert_eq!(r.to_string(), "-TOP-( amr-unknown )-TOP-");
        assert!(delinearize(&r).is_ok());
    }

    #[test]
    fn tolerant_delinearize() {
        // headless branch, doubled head, branch under a constant
        let t = TokenSeq::parse("-TOP-( a b :ARG0( :ARG1( c )ARG1 )ARG0 :op1( 5 :mod( d )mod )op1 )-TOP-");
        let g = delinearize(&t).unwrap();
        assert!(g.validate().is_ok());
        assert_eq!(g.node(g.root()).concept, "a");
        assert!(g.nodes().iter().any(|n| n.concept == UNKNOWN_CONCEPT));
    }

    #[test]
    fn traced_positions() {
        let g = parse_penman(RYAN).unwrap();
        let lin = linearize_traced(&g);
        let toks = lin.tokens.rendered();
        for (el, &pos) in &lin.positions {
            match el {
                GraphElement::Node(id) => assert_eq!(toks[pos], g.node(*id).concept),
                GraphElement::Constant(ei) => match &g.edges()[*ei].target {
                    Target::Constant(c) => assert_eq!(&toks[pos], c),
                    _ => unreachable!(),
                },
            }
        }
        assert_eq!(lin.positions.len(), 5);
    }
}
