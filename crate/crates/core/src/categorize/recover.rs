use super::dates::DateFields;
use super::model::{CategoryModel, QKind};
use super::{CategoryBase, CategoryLabel, SentenceCategoryMap};
use crate::graph::AmrGraph;
use crate::linearize::{delinearize, repair_brackets, LinToken, TokenSeq, UNKNOWN_CONCEPT};

/// The fragment a category symbol stands for in this sentence. Symbols
/// missing from the table become `amr-unknown`.
pub fn expand_category(label: &CategoryLabel, d: &SentenceCategoryMap, m: &CategoryModel) -> Vec<LinToken> {
    let unknown = || vec![LinToken::Concept(UNKNOWN_CONCEPT.into())];
    if label.index.is_none() {
        return unknown();
    }
    let Some(rec) = d.get(&label.to_string()) else {
        return unknown();
    };
    let q = m
        .q_best(&rec.text)
        .filter(|q| q.kind != QKind::Keep || !q.fragment.is_empty());
    let lemma = if rec.lemma.is_empty() {
        rec.text.to_lowercase().replace(' ', "-")
    } else {
        rec.lemma.clone()
    };
    match &label.base {
        CategoryBase::Date => {
            if let Some(f) = m.read_date(&rec.text) {
                return f.fragment();
            }
            match q {
                Some(q) if q.kind == QKind::Category(CategoryBase::Date) => q.fragment_tokens(),
                _ => date_guess(&rec.text),
            }
        }
        CategoryBase::Ne(ent) => match q {
            Some(q) if matches!(q.kind, QKind::Category(CategoryBase::Ne(_))) => q.fragment_tokens(),
            _ => name_fragment(ent, &rec.text),
        },
        CategoryBase::Verb => q
            .map(|q| q.fragment_tokens())
            .unwrap_or_else(|| vec![LinToken::Concept(format!("{lemma}-01"))]),
        CategoryBase::Surf => q
            .map(|q| q.fragment_tokens())
            .unwrap_or_else(|| vec![LinToken::Concept(lemma.clone())]),
        CategoryBase::Verbal => match (q, m.verbalization(&rec.text)) {
            (Some(q), _) => q.fragment_tokens(),
            (None, Some(v)) => v.fragment(),
            (None, None) => vec![LinToken::Concept(lemma.clone())],
        },
        CategoryBase::Const => q
            .map(|q| q.fragment_tokens())
            .unwrap_or_else(|| vec![LinToken::Constant(format!("\"{}\"", rec.text.replace('"', "")))]),
        CategoryBase::Ret => unknown(),
    }
}

fn date_guess(text: &str) -> Vec<LinToken> {
    let year = text
        .split(|c: char| !c.is_ascii_digit())
        .find(|w| w.len() == 4)
        .and_then(|w| w.parse().ok());
    DateFields {
        year,
        ..Default::default()
    }
    .fragment()
}

fn name_fragment(ent: &str, text: &str) -> Vec<LinToken> {
    let mut out = vec![
        LinToken::Concept(ent.to_string()),
        LinToken::RelOpen("wiki".into()),
        LinToken::Constant("-".into()),
        LinToken::RelClose("wiki".into()),
        LinToken::RelOpen("name".into()),
        LinToken::Concept("name".into()),
    ];
    for (i, w) in text.split(' ').filter(|w| !w.is_empty()).enumerate() {
        let role = format!("op{}", i + 1);
        out.push(LinToken::RelOpen(role.clone()));
        out.push(LinToken::Constant(format!("\"{}\"", w.replace('"', ""))));
        out.push(LinToken::RelClose(role));
    }
    out.push(LinToken::RelClose("name".into()));
    out
}

/// Repairs a decoded sequence, expands its category symbols and rebuilds
/// the graph. A category followed by `-RET-` stands for its fragment's root.
pub fn recover(t: &TokenSeq, d: &SentenceCategoryMap, m: &CategoryModel) -> AmrGraph {
    let t = repair_brackets(t);
    let toks = t.tokens();
    let mut out = Vec::with_capacity(toks.len());
    for (i, tok) in toks.iter().enumerate() {
        let LinToken::Concept(c) = tok else {
            out.push(tok.clone());
            continue;
        };
        let Some(label) = CategoryLabel::parse(c) else {
            out.push(tok.clone());
            continue;
        };
        let frag = expand_category(&label, d, m);
        if toks.get(i + 1) == Some(&LinToken::Ret) {
            out.push(
                frag.into_iter()
                    .next()
                    .unwrap_or(LinToken::Concept(UNKNOWN_CONCEPT.into())),
            );
        } else {
            out.extend(frag);
        }
    }
    delinearize(&TokenSeq(out)).unwrap_or_else(|_| AmrGraph::with_root("a", UNKNOWN_CONCEPT))
}
