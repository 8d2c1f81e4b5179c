//! Seeded random graphs and token-sequence corruptions for property tests
//! and the acceptance harness.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{fresh_variable, AmrGraph, Edge, Node, NodeId, Target};
use crate::linearize::{LinToken, TokenSeq};

const UNIQUE_POOL: &[&str] = &[
    "want-01",
    "go-02",
    "boy",
    "girl",
    "see-01",
    "city",
    "big",
    "describe-01",
    "person",
    "genius",
    "name",
    "country",
    "say-01",
    "tree",
    "house",
    "believe-01",
    "run-02",
    "dog",
    "cat",
    "new",
    "old",
    "possible-01",
    "know-01",
    "thing",
    "book",
    "write-01",
    "teach-01",
    "school",
    "day",
    "time",
    "eat-01",
    "food",
    "happy-01",
    "live-01",
    "work-01",
    "friend",
    "visit-01",
    "river",
    "mountain",
    "and",
];
const DUPLICATE_POOL: &[&str] = &["person", "thing", "boy", "see-01"];
const ROLES: &[&str] = &[
    "ARG0", "ARG1", "ARG2", "mod", "time", "location", "ARG0-of", "op1", "manner",
];
const CONST_ROLES: &[&str] = &["polarity", "quant", "value", "op1", "mode"];
const CONSTS: &[&str] = &["-", "3", "12", "\"Ryan\"", "\"New York\"", "interrogative", "2.5", "+"];

/// A connected graph of 1 to `max_nodes` nodes: a random spanning tree,
/// up to three constants and up to two reentrant edges, with the whole edge
/// list shuffled. With `unique_labels` no concept label repeats; otherwise
/// labels come from a four-word pool.
pub fn random_graph<R: Rng>(rng: &mut R, max_nodes: usize, unique_labels: bool) -> AmrGraph {
    let n = rng.gen_range(1..=max_nodes.max(1));
    let labels: Vec<&str> = if unique_labels {
        UNIQUE_POOL
            .choose_multiple(rng, n.min(UNIQUE_POOL.len()))
            .copied()
            .collect()
    } else {
        (0..n).map(|_| *DUPLICATE_POOL.choose(rng).expect("nonempty")).collect()
    };
    let n = labels.len();
    let mut used = HashMap::new();
    let nodes: Vec<Node> = labels
        .iter()
        .map(|c| Node {
            var: fresh_variable(c, &mut used),
            concept: c.to_string(),
        })
        .collect();
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push(Edge {
            source: NodeId(rng.gen_range(0..i)),
            role: ROLES.choose(rng).expect("nonempty").to_string(),
            target: Target::Node(NodeId(i)),
        });
    }
    for _ in 0..rng.gen_range(0..=3) {
        edges.push(Edge {
            source: NodeId(rng.gen_range(0..n)),
            role: CONST_ROLES.choose(rng).expect("nonempty").to_string(),
            target: Target::Constant(CONSTS.choose(rng).expect("nonempty").to_string()),
        });
    }
    if n >= 2 {
        for _ in 0..rng.gen_range(0..=2) {
            let s = rng.gen_range(0..n);
            let t = (s + rng.gen_range(1..n)) % n;
            edges.push(Edge {
                source: NodeId(s),
                role: ROLES.choose(rng).expect("nonempty").to_string(),
                target: Target::Node(NodeId(t)),
            });
        }
    }
    edges.shuffle(rng);
    AmrGraph::from_parts(nodes, edges, NodeId(0)).expect("spanning tree keeps every node reachable")
}

/// Same graph with variable names drawn from a shuffled `x0..xN` list.
pub fn rename_variables<R: Rng>(g: &AmrGraph, rng: &mut R) -> AmrGraph {
    let mut names: Vec<String> = (0..g.node_count()).map(|i| format!("x{i}")).collect();
    names.shuffle(rng);
    let mut out = g.clone();
    for (i, name) in names.into_iter().enumerate() {
        out.node_mut(NodeId(i)).var = name;
    }
    out
}

/// Applies one to four random edits: token deletions, relation label swaps
/// on opens or closes, and stray bracket insertions.
pub fn corrupt<R: Rng>(rng: &mut R, t: &TokenSeq) -> TokenSeq {
    let mut toks = t.0.clone();
    for _ in 0..rng.gen_range(1..=4) {
        match rng.gen_range(0..4) {
            0 | 1 if !toks.is_empty() => {
                let i = rng.gen_range(0..toks.len());
                toks.remove(i);
            }
            2 if !toks.is_empty() => {
                let i = rng.gen_range(0..toks.len());
                let role = ROLES.choose(rng).expect("nonempty").to_string();
                toks[i] = match &toks[i] {
                    LinToken::RelOpen(_) => LinToken::RelOpen(role),
                    LinToken::RelClose(_) => LinToken::RelClose(role),
                    LinToken::Concept(_) => LinToken::Concept(role.to_lowercase()),
                    other => other.clone(),
                };
            }
            _ => {
                let i = rng.gen_range(0..=toks.len());
                let role = ROLES.choose(rng).expect("nonempty").to_string();
                let tok = match rng.gen_range(0..5) {
                    0 => LinToken::RelOpen(role),
                    1 => LinToken::RelClose(role),
                    2 => LinToken::TopClose,
                    3 => LinToken::TopOpen,
                    _ => LinToken::Ret,
                };
                toks.insert(i, tok);
            }
        }
    }
    TokenSeq(toks)
}

/// Reentrant edges of a depth-first walk in stored edge order, as
/// (source concept, role, target concept), sorted.
pub fn reentrant_edge_labels(g: &AmrGraph) -> Vec<(String, String, String)> {
    let adj = g.adjacency();
    let mut visited = vec![false; g.node_count()];
    let mut out = Vec::new();
    let mut stack = vec![(g.root(), 0usize)];
    visited[g.root().0] = true;
    while let Some((n, k)) = stack.pop() {
        if k < adj[n.0].len() {
            stack.push((n, k + 1));
            let e = &g.edges()[adj[n.0][k]];
            if let Target::Node(t) = e.target {
                if visited[t.0] {
                    out.push((g.node(n).concept.clone(), e.role.clone(), g.node(t).concept.clone()));
                } else {
                    visited[t.0] = true;
                    stack.push((t, 0));
                }
            }
        }
    }
    out.sort();
    out
}

/// The graph minus its reentrant edges (the depth-first spanning tree plus
/// constants).
pub fn tree_part(g: &AmrGraph) -> AmrGraph {
    let adj = g.adjacency();
    let mut visited = vec![false; g.node_count()];
    let mut keep = vec![true; g.edges().len()];
    let mut stack = vec![(g.root(), 0usize)];
    visited[g.root().0] = true;
    while let Some((n, k)) = stack.pop() {
        if k < adj[n.0].len() {
            stack.push((n, k + 1));
            let ei = adj[n.0][k];
            if let Target::Node(t) = g.edges()[ei].target {
                if visited[t.0] {
                    keep[ei] = false;
                } else {
                    visited[t.0] = true;
                    stack.push((t, 0));
                }
            }
        }
    }
    let edges = g
        .edges()
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(e, _)| e.clone())
        .collect();
    AmrGraph::from_parts(g.nodes().to_vec(), edges, g.root()).expect("tree edges keep reachability")
}
