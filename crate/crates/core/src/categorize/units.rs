//! Finding the subgraphs that collapse into one category symbol and the
//! source span each one is anchored to.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::dates::DateFields;
use super::verbalize::VerbalEntry;
use super::{classify_concept, classify_constant, CategoryBase, CategoryConfig, ConceptClass};
use crate::align::Alignment;
use crate::graph::{AmrGraph, GraphElement, NodeId, Target};
use crate::linearize::{linearize_traced, LinToken};

#[derive(Debug, Clone)]
pub(crate) struct Unit {
    pub base: CategoryBase,
    pub root: GraphElement,
    pub absorbed: Vec<usize>,
    pub members: Vec<GraphElement>,
    pub fragment: Vec<LinToken>,
    pub date: Option<DateFields>,
}

impl Unit {
    pub fn fragment_text(&self) -> String {
        render(&self.fragment)
    }
}

pub(crate) fn render(toks: &[LinToken]) -> String {
    toks.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
}

/// Units that received a source span, in span order.
#[derive(Debug, Clone)]
pub(crate) struct Analysis {
    pub units: Vec<Unit>,
    pub placed: Vec<(usize, usize, usize)>,
    pub member_of: HashMap<GraphElement, usize>,
}

impl Analysis {
    pub fn span_text(tokens: &[String], start: usize, end: usize) -> String {
        tokens[start..end].join(" ")
    }
}

pub(crate) struct Lexicon<'a> {
    pub freq: &'a dyn Fn(&str) -> usize,
    pub cfg: CategoryConfig,
    pub verbal: &'a BTreeMap<String, VerbalEntry>,
}

pub(crate) fn analyze(tokens: &[String], g: &AmrGraph, a: &Alignment, lex: &Lexicon<'_>) -> Analysis {
    let units = detect(tokens, g, a, lex);
    let mut cands: Vec<(usize, usize, usize)> = units
        .iter()
        .enumerate()
        .filter_map(|(i, u)| span_of(a, &u.members, u.root).map(|(s, e)| (s, e, i)))
        .collect();
    cands.sort_by_key(|&(s, _, i)| (s, i));
    let mut taken = vec![false; tokens.len()];
    let mut placed = Vec::new();
    let mut member_of = HashMap::new();
    for (s, e, i) in cands {
        if taken[s..e].iter().any(|&t| t) {
            continue;
        }
        taken[s..e].iter_mut().for_each(|t| *t = true);
        for m in &units[i].members {
            member_of.insert(*m, placed.len());
        }
        placed.push((i, s, e));
    }
    let placed_units: Vec<Unit> = placed.iter().map(|&(i, _, _)| units[i].clone()).collect();
    Analysis {
        placed: placed.iter().enumerate().map(|(k, &(_, s, e))| (k, s, e)).collect(),
        units: placed_units,
        member_of,
    }
}

// The span holding the unit root, else the leftmost span holding any member.
fn span_of(a: &Alignment, members: &[GraphElement], root: GraphElement) -> Option<(usize, usize)> {
    if let Some(s) = a.spans.iter().find(|s| s.elements.contains(&root)) {
        return Some((s.start, s.end));
    }
    a.spans
        .iter()
        .filter(|s| s.elements.iter().any(|e| members.contains(e)))
        .min_by_key(|s| (s.start, s.end))
        .map(|s| (s.start, s.end))
}

fn detect(tokens: &[String], g: &AmrGraph, a: &Alignment, lex: &Lexicon<'_>) -> Vec<Unit> {
    let adj = g.adjacency();
    let lin = linearize_traced(g);
    let mut order: Vec<NodeId> = (0..g.node_count()).map(NodeId).collect();
    order.sort_by_key(|n| {
        lin.positions
            .get(&GraphElement::Node(*n))
            .copied()
            .unwrap_or(usize::MAX)
    });

    let mut claimed: HashSet<GraphElement> = HashSet::new();
    let mut absorbed: HashSet<usize> = HashSet::new();
    let mut units = Vec::new();

    for n in order {
        if claimed.contains(&GraphElement::Node(n)) {
            continue;
        }
        let unit = date_unit(g, &adj, n)
            .or_else(|| ne_unit(g, &adj, n, &claimed))
            .or_else(|| verbal_unit(tokens, g, a, &adj, n, &claimed, lex))
            .or_else(|| concept_unit(g, n, lex));
        if let Some(u) = unit {
            claimed.extend(u.members.iter().copied());
            absorbed.extend(u.absorbed.iter().copied());
            units.push(u);
        }
    }
    for (ei, e) in g.edges().iter().enumerate() {
        if absorbed.contains(&ei) {
            continue;
        }
        if let Target::Constant(c) = &e.target {
            if let ConceptClass::Category(base) = classify_constant(c) {
                let el = GraphElement::Constant(ei);
                units.push(Unit {
                    base,
                    root: el,
                    absorbed: Vec::new(),
                    members: vec![el],
                    fragment: vec![LinToken::Constant(c.clone())],
                    date: None,
                });
            }
        }
    }
    units
}

fn fragment(g: &AmrGraph, adj: &[Vec<usize>], n: NodeId, absorbed: &HashSet<usize>) -> Vec<LinToken> {
    let mut out = vec![LinToken::Concept(g.node(n).concept.clone())];
    for &ei in &adj[n.0] {
        if !absorbed.contains(&ei) {
            continue;
        }
        let e = &g.edges()[ei];
        out.push(LinToken::RelOpen(e.role.clone()));
        match &e.target {
            Target::Constant(c) => out.push(LinToken::Constant(c.clone())),
            Target::Node(t) => out.extend(fragment(g, adj, *t, absorbed)),
        }
        out.push(LinToken::RelClose(e.role.clone()));
    }
    out
}

fn make_unit(
    g: &AmrGraph,
    adj: &[Vec<usize>],
    base: CategoryBase,
    n: NodeId,
    absorbed: Vec<usize>,
    mut members: Vec<GraphElement>,
) -> Unit {
    members.insert(0, GraphElement::Node(n));
    let set: HashSet<usize> = absorbed.iter().copied().collect();
    Unit {
        base,
        root: GraphElement::Node(n),
        fragment: fragment(g, adj, n, &set),
        absorbed,
        members,
        date: None,
    }
}

fn date_unit(g: &AmrGraph, adj: &[Vec<usize>], n: NodeId) -> Option<Unit> {
    if g.node(n).concept != "date-entity" {
        return None;
    }
    let mut fields = DateFields::default();
    let mut absorbed = Vec::new();
    let mut members = Vec::new();
    for &ei in &adj[n.0] {
        let e = &g.edges()[ei];
        let Target::Constant(c) = &e.target else { continue };
        let Ok(v) = c.parse::<i64>() else { continue };
        let slot = match e.role.as_str() {
            "year" => &mut fields.year,
            "month" => &mut fields.month,
            "day" => &mut fields.day,
            _ => continue,
        };
        if slot.is_none() {
            *slot = Some(v);
            absorbed.push(ei);
            members.push(GraphElement::Constant(ei));
        }
    }
    let mut u = make_unit(g, adj, CategoryBase::Date, n, absorbed, members);
    u.date = Some(fields);
    Some(u)
}

fn ne_unit(g: &AmrGraph, adj: &[Vec<usize>], n: NodeId, claimed: &HashSet<GraphElement>) -> Option<Unit> {
    let (name_edge, name_node) = adj[n.0].iter().find_map(|&ei| {
        let e = &g.edges()[ei];
        match e.target {
            Target::Node(t)
                if e.role == "name"
                    && t != n
                    && g.node(t).concept == "name"
                    && !claimed.contains(&GraphElement::Node(t))
                    && !adj[t.0].is_empty()
                    && adj[t.0]
                        .iter()
                        .all(|&oi| matches!(g.edges()[oi].target, Target::Constant(_))) =>
            {
                Some((ei, t))
            }
            _ => None,
        }
    })?;
    let mut absorbed = Vec::new();
    let mut members = Vec::new();
    for &ei in &adj[n.0] {
        if g.edges()[ei].role == "wiki" && matches!(g.edges()[ei].target, Target::Constant(_)) {
            absorbed.push(ei);
            members.push(GraphElement::Constant(ei));
        }
    }
    absorbed.push(name_edge);
    members.push(GraphElement::Node(name_node));
    for &ei in &adj[name_node.0] {
        absorbed.push(ei);
        members.push(GraphElement::Constant(ei));
    }
    absorbed.sort_unstable();
    Some(make_unit(
        g,
        adj,
        CategoryBase::Ne(g.node(n).concept.clone()),
        n,
        absorbed,
        members,
    ))
}

fn verbal_unit(
    tokens: &[String],
    g: &AmrGraph,
    a: &Alignment,
    adj: &[Vec<usize>],
    n: NodeId,
    claimed: &HashSet<GraphElement>,
    lex: &Lexicon<'_>,
) -> Option<Unit> {
    let concept = &g.node(n).concept;
    let mut best: Option<Unit> = None;
    for entry in lex
        .verbal
        .values()
        .filter(|v| &v.root == concept && !v.children.is_empty())
    {
        let mut absorbed = Vec::new();
        let mut members = Vec::new();
        let ok = entry.children.iter().all(|(role, c)| {
            let hit = adj[n.0].iter().find(|&&ei| {
                let e = &g.edges()[ei];
                !absorbed.contains(&ei)
                    && &e.role == role
                    && matches!(e.target, Target::Node(t)
                        if &g.node(t).concept == c
                            && adj[t.0].is_empty()
                            && !claimed.contains(&GraphElement::Node(t)))
            });
            match hit {
                Some(&ei) => {
                    absorbed.push(ei);
                    if let Target::Node(t) = g.edges()[ei].target {
                        members.push(GraphElement::Node(t));
                    }
                    true
                }
                None => false,
            }
        });
        if !ok {
            continue;
        }
        let u = make_unit(g, adj, CategoryBase::Verbal, n, absorbed, members);
        let Some((s, e)) = span_of(a, &u.members, u.root) else {
            continue;
        };
        if e > tokens.len() || tokens[s..e].join(" ").to_lowercase() != entry.word {
            continue;
        }
        if best.as_ref().is_none_or(|b| u.absorbed.len() > b.absorbed.len()) {
            best = Some(u);
        }
    }
    best
}

fn concept_unit(g: &AmrGraph, n: NodeId, lex: &Lexicon<'_>) -> Option<Unit> {
    let c = &g.node(n).concept;
    match classify_concept(c, (lex.freq)(c), &lex.cfg) {
        ConceptClass::Category(base) => Some(Unit {
            base,
            root: GraphElement::Node(n),
            absorbed: Vec::new(),
            members: vec![GraphElement::Node(n)],
            fragment: vec![LinToken::Concept(c.clone())],
            date: None,
        }),
        ConceptClass::Keep => None,
    }
}
