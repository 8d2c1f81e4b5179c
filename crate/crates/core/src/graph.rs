//! AMR graph data model and triple decomposition.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A node or a constant leaf, the two kinds of graph element an alignment can address.
/// Constants are identified by the index of the edge that carries them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphElement {
    Node(NodeId),
    Constant(usize),
}

/// A variable node: an opaque variable name and its concept label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub var: String,
    pub concept: String,
}

/// The endpoint of an edge: either another variable node or a constant leaf.
///
/// Constants keep their exact surface form, quotes included, so that
/// `"Ryan"`, `2007` and `-` all survive a write/read cycle unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    Node(NodeId),
    Constant(String),
}

/// A labeled edge. Roles are stored without the leading colon (`ARG0`, `op1`, `ARG0-of`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: NodeId,
    pub role: String,
    pub target: Target,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no nodes")]
    Empty,
    #[error("root {0} is not a node of the graph")]
    BadRoot(NodeId),
    #[error("edge {0} references unknown node")]
    BadEdge(usize),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("node `{0}` has an invalid concept label `{1}`")]
    BadConcept(String, String),
    #[error("node `{0}` is not reachable from the root")]
    Unreachable(String),
}

/// Rooted, directed, edge-labeled graph. Edge order is significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmrGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    root: NodeId,
}

pub fn is_valid_concept(label: &str) -> bool {
    !label.is_empty() && !label.chars().any(|c| c.is_whitespace() || c == '(' || c == ')')
}

impl AmrGraph {
    /// Starts a graph holding just its root node.
    pub fn with_root(var: impl Into<String>, concept: impl Into<String>) -> Self {
        AmrGraph {
            nodes: vec![Node {
                var: var.into(),
                concept: concept.into(),
            }],
            edges: Vec::new(),
            root: NodeId(0),
        }
    }

    /// Builds and validates a graph from raw parts.
    pub fn from_parts(nodes: Vec<Node>, edges: Vec<Edge>, root: NodeId) -> Result<Self, GraphError> {
        let g = AmrGraph { nodes, edges, root };
        g.validate()?;
        Ok(g)
    }

    pub fn add_node(&mut self, var: impl Into<String>, concept: impl Into<String>) -> NodeId {
        self.nodes.push(Node {
            var: var.into(),
            concept: concept.into(),
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn add_edge(&mut self, source: NodeId, role: impl Into<String>, target: Target) -> usize {
        self.edges.push(Edge {
            source,
            role: role.into(),
            target,
        });
        self.edges.len() - 1
    }

    pub fn add_child(&mut self, source: NodeId, role: &str, var: &str, concept: &str) -> NodeId {
        let id = self.add_node(var, concept);
        self.add_edge(source, role, Target::Node(id));
        id
    }

    pub fn add_constant(&mut self, source: NodeId, role: &str, value: &str) -> usize {
        self.add_edge(source, role, Target::Constant(value.to_string()))
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        if self.nodes.is_empty() {
            return Err(GraphError::Empty);
        }
        if self.root.0 >= self.nodes.len() {
            return Err(GraphError::BadRoot(self.root));
        }
        let mut seen = HashSet::new();
        for n in &self.nodes {
            if !seen.insert(n.var.as_str()) {
                return Err(GraphError::DuplicateVariable(n.var.clone()));
            }
            if !is_valid_concept(&n.concept) {
                return Err(GraphError::BadConcept(n.var.clone(), n.concept.clone()));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            let bad_target = matches!(e.target, Target::Node(t) if t.0 >= self.nodes.len());
            if e.source.0 >= self.nodes.len() || bad_target {
                return Err(GraphError::BadEdge(i));
            }
        }
        let reach = self.reachable();
        if let Some(i) = reach.iter().position(|r| !r) {
            return Err(GraphError::Unreachable(self.nodes[i].var.clone()));
        }
        Ok(())
    }

    fn reachable(&self) -> Vec<bool> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([self.root]);
        seen[self.root.0] = true;
        while let Some(n) = queue.pop_front() {
            for &ei in &adj[n.0] {
                if let Target::Node(t) = self.edges[ei].target {
                    if !seen[t.0] {
                        seen[t.0] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        seen
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id.0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn constant_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| matches!(e.target, Target::Constant(_)))
            .count()
    }

    /// Outgoing edge indices per node, in stored order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.source.0].push(i);
        }
        adj
    }

    pub fn outgoing(&self, id: NodeId) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(move |(_, e)| e.source == id)
    }

    pub fn find_var(&self, var: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.var == var).map(NodeId)
    }

    /// Number of variable-to-variable edges whose target was already reached
    /// earlier in a depth-first walk from the root (in stored edge order).
    pub fn reentrancy_count(&self) -> usize {
        let adj = self.adjacency();
        let mut visited = vec![false; self.nodes.len()];
        let mut count = 0;
        let mut stack = vec![(self.root, 0usize)];
        visited[self.root.0] = true;
        while let Some((n, k)) = stack.pop() {
            if k < adj[n.0].len() {
                stack.push((n, k + 1));
                if let Target::Node(t) = self.edges[adj[n.0][k]].target {
                    if visited[t.0] {
                        count += 1;
                    } else {
                        visited[t.0] = true;
                        stack.push((t, 0));
                    }
                }
            }
        }
        count
    }

    /// Replaces variable names with fresh ones derived from concept initials
    /// (`d`, `p`, `p2`, ...). Structure and order are untouched.
    pub fn renamed_canonically(&self) -> AmrGraph {
        let mut g = self.clone();
        let mut used: HashMap<String, usize> = HashMap::new();
        for node in &mut g.nodes {
            node.var = fresh_variable(&node.concept, &mut used);
        }
        g
    }

    /// Structural isomorphism: a concept-preserving bijection of nodes that maps
    /// the root to the root and the edge multiset (roles and constants included)
    /// onto the other graph's edge multiset. Variable names are ignored.
    pub fn isomorphic(&self, other: &AmrGraph) -> bool {
        isomorphic(self, other)
    }
}

/// Picks a variable name not yet in `used`, based on the first letter of the concept.
pub fn fresh_variable(concept: &str, used: &mut HashMap<String, usize>) -> String {
    let first = concept
        .chars()
        .find(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_lowercase())
        .unwrap_or('x');
    let base = first.to_string();
    let k = used.entry(base.clone()).or_insert(0);
    *k += 1;
    if *k == 1 {
        base
    } else {
        format!("{base}{k}")
    }
}

/// Strips one pair of surrounding double quotes, if present.
pub fn unquote(value: &str) -> &str {
    if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
        &value[1..value.len() - 1]
    } else {
        value
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Triple {
    Instance {
        var: String,
        concept: String,
    },
    Attribute {
        role: String,
        var: String,
        value: String,
    },
    Relation {
        role: String,
        source: String,
        target: String,
    },
}

/// Decomposes a graph into instance, attribute and relation triples.
///
/// The root contributes a synthetic `TOP` attribute carrying its concept.
/// Attribute values are compared without surrounding quotes.
pub fn graph_triples(g: &AmrGraph) -> Vec<Triple> {
    let mut out = Vec::with_capacity(g.nodes.len() + g.edges.len() + 1);
    for n in &g.nodes {
        out.push(Triple::Instance {
            var: n.var.clone(),
            concept: n.concept.clone(),
        });
    }
    let root = g.node(g.root);
    out.push(Triple::Attribute {
        role: "TOP".into(),
        var: root.var.clone(),
        value: root.concept.clone(),
    });
    for e in &g.edges {
        let src = g.node(e.source).var.clone();
        match &e.target {
            Target::Constant(c) => out.push(Triple::Attribute {
                role: e.role.clone(),
                var: src,
                value: unquote(c).to_string(),
            }),
            Target::Node(t) => out.push(Triple::Relation {
                role: e.role.clone(),
                source: src,
                target: g.node(*t).var.clone(),
            }),
        }
    }
    out
}

type EdgeKey = (usize, String, EdgeEnd);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum EdgeEnd {
    Node(usize),
    Const(String),
}

fn node_signature(g: &AmrGraph, id: usize) -> (String, Vec<String>, Vec<String>) {
    let mut out = Vec::new();
    let mut inc = Vec::new();
    for e in &g.edges {
        if e.source.0 == id {
            match &e.target {
                Target::Node(_) => out.push(format!(">{}", e.role)),
                Target::Constant(c) => out.push(format!("={}={}", e.role, c)),
            }
        }
        if e.target == Target::Node(NodeId(id)) {
            inc.push(e.role.clone());
        }
    }
    out.sort();
    inc.sort();
    (g.nodes[id].concept.clone(), out, inc)
}

fn isomorphic(a: &AmrGraph, b: &AmrGraph) -> bool {
    if a.nodes.len() != b.nodes.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let sig_a: Vec<_> = (0..a.nodes.len()).map(|i| node_signature(a, i)).collect();
    let sig_b: Vec<_> = (0..b.nodes.len()).map(|i| node_signature(b, i)).collect();
    if sig_a[a.root.0] != sig_b[b.root.0] {
        return false;
    }
    let mut sa = sig_a.clone();
    let mut sb = sig_b.clone();
    sa.sort();
    sb.sort();
    if sa != sb {
        return false;
    }

    let edges_b: BTreeMap<EdgeKey, usize> = edge_multiset(b, |n| n);
    // Variable-to-variable edges indexed by endpoint for incremental checks.
    let mut rel_a: Vec<Vec<(usize, String, usize)>> = vec![Vec::new(); a.nodes.len()];
    for e in &a.edges {
        if let Target::Node(t) = e.target {
            rel_a[e.source.0].push((e.source.0, e.role.clone(), t.0));
            if t.0 != e.source.0 {
                rel_a[t.0].push((e.source.0, e.role.clone(), t.0));
            }
        }
    }
    let mut rel_b_count: HashMap<(usize, String, usize), usize> = HashMap::new();
    for e in &b.edges {
        if let Target::Node(t) = e.target {
            *rel_b_count.entry((e.source.0, e.role.clone(), t.0)).or_default() += 1;
        }
    }

    // Assignment order: BFS from the root so constraints propagate early.
    let order = bfs_order(a);
    let mut map = vec![usize::MAX; a.nodes.len()];
    let mut used = vec![false; b.nodes.len()];
    map[a.root.0] = b.root.0;
    used[b.root.0] = true;

    fn consistent(
        x: usize,
        map: &[usize],
        rel_a: &[Vec<(usize, String, usize)>],
        rel_b_count: &HashMap<(usize, String, usize), usize>,
    ) -> bool {
        let mut need: HashMap<(usize, String, usize), usize> = HashMap::new();
        for (s, r, t) in &rel_a[x] {
            let (ms, mt) = (map[*s], map[*t]);
            if ms != usize::MAX && mt != usize::MAX {
                *need.entry((ms, r.clone(), mt)).or_default() += 1;
            }
        }
        need.iter().all(|(k, c)| rel_b_count.get(k).copied().unwrap_or(0) >= *c)
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        k: usize,
        order: &[usize],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        sig_a: &[(String, Vec<String>, Vec<String>)],
        sig_b: &[(String, Vec<String>, Vec<String>)],
        rel_a: &[Vec<(usize, String, usize)>],
        rel_b_count: &HashMap<(usize, String, usize), usize>,
        check: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        if k == order.len() {
            return check(map);
        }
        let x = order[k];
        if map[x] != usize::MAX {
            if !consistent(x, map, rel_a, rel_b_count) {
                return false;
            }
            return search(k + 1, order, map, used, sig_a, sig_b, rel_a, rel_b_count, check);
        }
        for y in 0..sig_b.len() {
            if used[y] || sig_a[x] != sig_b[y] {
                continue;
            }
            map[x] = y;
            used[y] = true;
            if consistent(x, map, rel_a, rel_b_count)
                && search(k + 1, order, map, used, sig_a, sig_b, rel_a, rel_b_count, check)
            {
                return true;
            }
            map[x] = usize::MAX;
            used[y] = false;
        }
        false
    }

    let check = |m: &[usize]| edge_multiset(a, |n| m[n]) == edges_b;
    search(
        0,
        &order,
        &mut map,
        &mut used,
        &sig_a,
        &sig_b,
        &rel_a,
        &rel_b_count,
        &check,
    )
}

fn edge_multiset(g: &AmrGraph, f: impl Fn(usize) -> usize) -> BTreeMap<EdgeKey, usize> {
    let mut m = BTreeMap::new();
    for e in &g.edges {
        let end = match &e.target {
            Target::Node(t) => EdgeEnd::Node(f(t.0)),
            Target::Constant(c) => EdgeEnd::Const(c.clone()),
        };
        *m.entry((f(e.source.0), e.role.clone(), end)).or_insert(0) += 1;
    }
    m
}

fn bfs_order(g: &AmrGraph) -> Vec<usize> {
    let adj = g.adjacency();
    let mut seen = vec![false; g.nodes.len()];
    let mut order = Vec::with_capacity(g.nodes.len());
    let mut queue = VecDeque::from([g.root.0]);
    seen[g.root.0] = true;
    while let Some(n) = queue.pop_front() {
        order.push(n);
        for &ei in &adj[n] {
            if let Target::Node(t) = g.edges[ei].target {
                if !seen[t.0] {
                    seen[t.0] = true;
                    queue.push_back(t.0);
                }
            }
        }
    }
    // Unreachable nodes only occur in invalid graphs; include them anyway.
    for (i, s) in seen.iter().enumerate() {
        if !s {
            order.push(i);
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ryan() -> AmrGraph {
        let mut g = AmrGraph::with_root("d", "describe-01");
        let p = g.add_child(NodeId(0), "ARG0", "p", "person");
        let n = g.add_child(p, "name", "n", "name");
        g.add_constant(n, "op1", "\"Ryan\"");
        g.add_edge(NodeId(0), "ARG1", Target::Node(p));
        g.add_child(NodeId(0), "ARG2", "g", "genius");
        g
    }

    #[test]
    fn single_node_triples() {
        let g = AmrGraph::with_root("g", "genius");
        let t = graph_triples(&g);
        assert_eq!(
            t,
            vec![
                Triple::Instance {
                    var: "g".into(),
                    concept: "genius".into()
                },
                Triple::Attribute {
                    role: "TOP".into(),
                    var: "g".into(),
                    value: "genius".into()
                },
            ]
        );
    }

    #[test]
    fn ryan_triple_counts() {
        // 4 variables, 1 constant edge + TOP, 4 variable edges (ARG0, name, ARG1, ARG2).
        let t = graph_triples(&ryan());
        let inst = t.iter().filter(|t| matches!(t, Triple::Instance { .. })).count();
        let attr = t.iter().filter(|t| matches!(t, Triple::Attribute { .. })).count();
        let rel = t.iter().filter(|t| matches!(t, Triple::Relation { .. })).count();
        assert_eq!((inst, attr, rel), (4, 2, 4));
        assert_eq!(ryan().reentrancy_count(), 1);
    }

    #[test]
    fn validation_errors() {
        let mut g = AmrGraph::with_root("a", "alpha");
        g.add_node("b", "beta");
        assert_eq!(g.validate(), Err(GraphError::Unreachable("b".into())));
        let mut g = AmrGraph::with_root("a", "alpha");
        g.add_child(NodeId(0), "mod", "a", "beta");
        assert_eq!(g.validate(), Err(GraphError::DuplicateVariable("a".into())));
        let g = AmrGraph::with_root("a", "has space");
        assert!(matches!(g.validate(), Err(GraphError::BadConcept(..))));
    }

    #[test]
    fn isomorphism_ignores_variables_but_not_structure() {
        let g = ryan();
        assert!(g.isomorphic(&g.renamed_canonically()));
        let mut h = ryan();
        h.node_mut(NodeId(3)).concept = "idiot".into();
        assert!(!g.isomorphic(&h));
        let mut h = ryan();
        h.add_constant(NodeId(0), "polarity", "-");
        assert!(!g.isomorphic(&h));
    }

    #[test]
    fn isomorphism_distinguishes_reentrancy_endpoints() {
        // a :x b(c) :y b(c): reentrancy to first vs second c
        let mut g1 = AmrGraph::with_root("a", "a");
        let b1 = g1.add_child(NodeId(0), "x", "b1", "c");
        let b2 = g1.add_child(NodeId(0), "y", "b2", "c");
        g1.add_child(b1, "z", "d", "d");
        g1.add_edge(NodeId(0), "w", Target::Node(b1));
        let mut g2 = g1.clone();
        g2.edges.last_mut().unwrap().target = Target::Node(b2);
        assert!(!g1.isomorphic(&g2));
        assert!(g1.isomorphic(&g1.renamed_canonically()));
    }
}
