use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::model::CategoryModel;
use super::units::Analysis;
use super::{assign_indices, CategorizeError, SentenceCategoryMap, SpanRecord};
use crate::align::{AlignError, Alignment, PositionAlignment};
use crate::graph::{AmrGraph, GraphElement};
use crate::linearize::{linearize_with, Linearization, LinearizeView, TokenSeq};

/// A training pair after categorization, with the hard alignment carried
/// over to categorized source indices and target positions.
#[derive(Debug, Clone, PartialEq)]
pub struct CategorizedPair {
    pub source: Vec<String>,
    pub target: TokenSeq,
    pub table: SentenceCategoryMap,
    pub alignment: PositionAlignment,
    pub linearization: Linearization,
}

pub fn categorize_pair(
    tokens: &[String],
    lemmas: Option<&[String]>,
    g: &AmrGraph,
    a: &Alignment,
    m: &CategoryModel,
) -> Result<CategorizedPair, CategorizeError> {
    a.check_bounds(tokens.len())?;
    let an = m.analyze(tokens, g, a);
    let labels = assign_indices(
        &an.placed
            .iter()
            .map(|&(k, s, _)| (s, an.units[k].base.clone()))
            .collect::<Vec<_>>(),
    );

    let mut start_of: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (li, &(_, s, e)) in an.placed.iter().enumerate() {
        start_of.insert(s, (li, e));
    }
    let mut source = Vec::with_capacity(tokens.len());
    let mut new_index = vec![0usize; tokens.len()];
    let mut table = SentenceCategoryMap::default();
    let mut i = 0;
    while i < tokens.len() {
        if let Some(&(li, e)) = start_of.get(&i) {
            let label = labels[li].to_string();
            new_index[i..e].iter_mut().for_each(|x| *x = source.len());
            table.entries.insert(
                label.clone(),
                SpanRecord {
                    start: i,
                    end: e,
                    text: Analysis::span_text(tokens, i, e),
                    lemma: span_lemma(tokens, lemmas, i, e),
                },
            );
            source.push(label);
            i = e;
        } else {
            new_index[i] = source.len();
            source.push(m.normalize_token(&tokens[i]));
            i += 1;
        }
    }

    let mut view = LinearizeView::default();
    let mut skip = HashSet::new();
    for (li, &(k, _, _)) in an.placed.iter().enumerate() {
        let u = &an.units[k];
        let label = labels[li].to_string();
        match u.root {
            GraphElement::Node(n) => {
                view.node_labels.insert(n, label);
            }
            GraphElement::Constant(ei) => {
                view.constant_labels.insert(ei, label);
            }
        }
        skip.extend(u.absorbed.iter().copied());
    }
    view.skip_edges = skip;
    let lin = linearize_with(g, &view);

    let mut rows: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (el, toks) in a.element_tokens() {
        let anchor = match an.member_of.get(&el) {
            Some(&k) => an.units[k].root,
            None => el,
        };
        let pos = *lin.positions.get(&anchor).ok_or(AlignError::NodeNotInSequence(el))?;
        rows.entry(pos).or_default().extend(toks.iter().map(|&t| new_index[t]));
    }

    Ok(CategorizedPair {
        source,
        target: lin.tokens.clone(),
        table,
        alignment: PositionAlignment { rows },
        linearization: lin,
    })
}

pub(crate) fn span_lemma(tokens: &[String], lemmas: Option<&[String]>, s: usize, e: usize) -> String {
    let parts: Vec<String> = (s..e)
        .map(|i| match lemmas.and_then(|l| l.get(i)) {
            Some(l) if !l.is_empty() => l.to_lowercase(),
            _ => tokens[i].to_lowercase(),
        })
        .collect();
    parts.join("-")
}
