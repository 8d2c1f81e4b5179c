use std::collections::BTreeMap;
use std::fmt;

use super::dates::{DateFields, DateTemplate};
use super::units::{analyze, Analysis, Lexicon};
use super::verbalize::{parse_verbalization_list, VerbalEntry};
use super::{CategorizeError, CategoryBase, CategoryConfig, CategoryLabel};
use crate::align::Alignment;
use crate::graph::{AmrGraph, GraphElement, Target};
use crate::linearize::{is_constant_form, LinToken};

pub const MODEL_HEADER: &str = "amrseq-category-model\t1";

/// What a source span was realized as in training.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QKind {
    Keep,
    Category(CategoryBase),
}

impl fmt::Display for QKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QKind::Keep => f.write_str("keep"),
            QKind::Category(b) => write!(f, "{b}"),
        }
    }
}

impl QKind {
    fn parse(s: &str) -> Option<QKind> {
        if s == "keep" {
            Some(QKind::Keep)
        } else {
            CategoryBase::parse(s).map(QKind::Category)
        }
    }
}

/// The majority realization of a span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QEntry {
    pub kind: QKind,
    pub fragment: String,
    pub count: usize,
    pub total: usize,
}

impl QEntry {
    pub fn fragment_tokens(&self) -> Vec<LinToken> {
        self.fragment.split_ascii_whitespace().map(LinToken::parse).collect()
    }

    pub fn relative_frequency(&self) -> f64 {
        self.count as f64 / self.total.max(1) as f64
    }
}

/// One training pair as seen by the category builder.
#[derive(Debug, Clone, Copy)]
pub struct TrainingExample<'a> {
    pub tokens: &'a [String],
    pub graph: &'a AmrGraph,
    pub alignment: &'a Alignment,
}

/// Everything learned from the training corpus that categorization and
/// recovery need: concept counts, table Q, date templates and the
/// verbalization list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CategoryModel {
    threshold: usize,
    concept_freq: BTreeMap<String, usize>,
    token_freq: BTreeMap<String, usize>,
    q: BTreeMap<String, BTreeMap<(QKind, String), usize>>,
    templates: Vec<(DateTemplate, usize)>,
    verbal: BTreeMap<String, VerbalEntry>,
    max_span: usize,
}

pub fn build_category_model(
    corpus: &[TrainingExample<'_>],
    cfg: &CategoryConfig,
    verbalization: &str,
) -> Result<CategoryModel, CategorizeError> {
    let mut m = CategoryModel {
        threshold: cfg.threshold,
        verbal: parse_verbalization_list(verbalization),
        ..Default::default()
    };
    for ex in corpus {
        ex.alignment.check_bounds(ex.tokens.len())?;
        for t in ex.tokens {
            *m.token_freq.entry(t.clone()).or_insert(0) += 1;
        }
        for n in ex.graph.nodes() {
            *m.concept_freq.entry(n.concept.clone()).or_insert(0) += 1;
        }
    }
    let mut templates: BTreeMap<String, usize> = BTreeMap::new();
    for ex in corpus {
        let an = m.analyze(ex.tokens, ex.graph, ex.alignment);
        for &(k, s, e) in &an.placed {
            let u = &an.units[k];
            let text = Analysis::span_text(ex.tokens, s, e);
            m.add_q(text, QKind::Category(u.base.clone()), u.fragment_text());
            if let Some(d) = u.date {
                if let Some(t) = DateTemplate::learn(&ex.tokens[s..e], &d) {
                    *templates.entry(t).or_insert(0) += 1;
                }
            }
        }
        for span in &ex.alignment.spans {
            let text = Analysis::span_text(ex.tokens, span.start, span.end);
            for el in &span.elements {
                if an.member_of.contains_key(el) {
                    continue;
                }
                if let Some(label) = element_token(ex.graph, *el) {
                    m.add_q(text.clone(), QKind::Keep, label);
                }
            }
        }
    }
    m.set_templates(templates);
    Ok(m)
}

fn element_token(g: &AmrGraph, el: GraphElement) -> Option<String> {
    match el {
        GraphElement::Node(n) => Some(g.nodes().get(n.0)?.concept.clone()),
        GraphElement::Constant(ei) => match &g.edges().get(ei)?.target {
            Target::Constant(c) => Some(LinToken::Constant(c.clone()).to_string()),
            Target::Node(_) => None,
        },
    }
}

impl CategoryModel {
    pub fn config(&self) -> CategoryConfig {
        CategoryConfig {
            threshold: self.threshold,
        }
    }

    pub fn concept_freq(&self, concept: &str) -> usize {
        self.concept_freq.get(concept).copied().unwrap_or(0)
    }

    /// Occurrences of a raw source token in the training sentences.
    pub fn token_freq(&self, token: &str) -> usize {
        self.token_freq.get(token).copied().unwrap_or(0)
    }

    pub fn concept_counts(&self) -> &BTreeMap<String, usize> {
        &self.concept_freq
    }

    pub(crate) fn analyze(&self, tokens: &[String], g: &AmrGraph, a: &Alignment) -> Analysis {
        let freq = |c: &str| self.concept_freq(c);
        let lex = Lexicon {
            freq: &freq,
            cfg: self.config(),
            verbal: &self.verbal,
        };
        analyze(tokens, g, a, &lex)
    }

    fn add_q(&mut self, span: String, kind: QKind, fragment: String) {
        self.max_span = self.max_span.max(span.split(' ').count());
        *self.q.entry(span).or_default().entry((kind, fragment)).or_insert(0) += 1;
    }

    fn set_templates(&mut self, counts: BTreeMap<String, usize>) {
        let mut t: Vec<(DateTemplate, usize)> = counts
            .into_iter()
            .filter_map(|(s, c)| DateTemplate::parse(&s).map(|t| (t, c)))
            .collect();
        t.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.as_str().cmp(b.0.as_str())));
        self.templates = t;
    }

    /// Most frequent realization of a span; ties go to the smallest fragment.
    pub fn q_best(&self, span: &str) -> Option<QEntry> {
        let row = self.q.get(span)?;
        let total = row.values().sum();
        row.iter()
            .max_by(|a, b| {
                a.1.cmp(b.1)
                    .then_with(|| b.0 .1.cmp(&a.0 .1))
                    .then_with(|| b.0 .0.cmp(&a.0 .0))
            })
            .map(|((k, f), &c)| QEntry {
                kind: k.clone(),
                fragment: f.clone(),
                count: c,
                total,
            })
    }

    pub fn q_counts(&self, span: &str) -> Option<&BTreeMap<(QKind, String), usize>> {
        self.q.get(span)
    }

    pub fn q_len(&self) -> usize {
        self.q.len()
    }

    /// Longest span (in tokens) present in Q.
    pub fn max_span(&self) -> usize {
        self.max_span
    }

    pub fn date_templates(&self) -> impl Iterator<Item = (&str, usize)> {
        self.templates.iter().map(|(t, c)| (t.as_str(), *c))
    }

    pub fn max_template_len(&self) -> usize {
        self.templates.iter().map(|(t, _)| t.token_len()).max().unwrap_or(0)
    }

    /// Fields of a mention under the most frequent matching template.
    pub fn read_date(&self, mention: &str) -> Option<DateFields> {
        self.templates.iter().find_map(|(t, _)| t.read(mention))
    }

    pub fn verbalization(&self, word: &str) -> Option<&VerbalEntry> {
        self.verbal.get(&word.to_lowercase())
    }

    /// The source-side form of an uncategorized token: a span realized as
    /// one kept concept in training is written as that concept.
    pub fn normalize_token(&self, tok: &str) -> String {
        match self.q_best(tok) {
            Some(QEntry {
                kind: QKind::Keep,
                fragment,
                ..
            }) if !fragment.contains(' ') && !is_constant_form(&fragment) => fragment,
            _ => tok.to_string(),
        }
    }

    /// True for tokens allowed in a categorized target sequence:
    /// structure, `-RET-`, indexed categories, pass-through constants and
    /// concepts at or above the threshold.
    pub fn is_reduced_symbol(&self, tok: &LinToken) -> bool {
        match tok {
            LinToken::Concept(c) => {
                CategoryLabel::parse(c).is_some_and(|l| l.index.is_some()) || self.concept_freq(c) >= self.threshold
            }
            LinToken::Constant(c) => super::classify_constant(c) == super::ConceptClass::Keep,
            _ => true,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MODEL_HEADER}\nthreshold\t{}\n", self.threshold);
        for (c, n) in &self.concept_freq {
            out.push_str(&format!("concept\t{c}\t{n}\n"));
        }
        for (t, n) in &self.token_freq {
            out.push_str(&format!("token\t{t}\t{n}\n"));
        }
        for (span, row) in &self.q {
            for ((k, f), n) in row {
                out.push_str(&format!("q\t{span}\t{k}\t{f}\t{n}\n"));
            }
        }
        for (t, n) in &self.templates {
            out.push_str(&format!("template\t{}\t{n}\n", t.as_str()));
        }
        for (w, v) in &self.verbal {
            out.push_str(&format!("verbal\t{w}\t{}\n", v.fragment_text()));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<CategoryModel, CategorizeError> {
        let mut lines = text.lines().enumerate();
        let bad = |line: usize, msg: &str| CategorizeError::ModelFormat {
            line: line + 1,
            msg: msg.to_string(),
        };
        match lines.next() {
            Some((_, h)) if h == MODEL_HEADER => {}
            _ => return Err(bad(0, "missing or unsupported header")),
        }
        let mut m = CategoryModel::default();
        let mut templates = BTreeMap::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad(i, "bad count"));
            match (f[0], f.len()) {
                ("threshold", 2) => m.threshold = num(f[1])?,
                ("concept", 3) => {
                    m.concept_freq.insert(f[1].to_string(), num(f[2])?);
                }
                ("token", 3) => {
                    m.token_freq.insert(f[1].to_string(), num(f[2])?);
                }
                ("q", 5) => {
                    let kind = QKind::parse(f[2]).ok_or_else(|| bad(i, "bad kind"))?;
                    let n = num(f[4])?;
                    m.max_span = m.max_span.max(f[1].split(' ').count());
                    m.q.entry(f[1].to_string())
                        .or_default()
                        .insert((kind, f[3].to_string()), n);
                }
                ("template", 3) => {
                    DateTemplate::parse(f[1]).ok_or_else(|| bad(i, "bad template"))?;
                    templates.insert(f[1].to_string(), num(f[2])?);
                }
                ("verbal", 3) => {
                    let v = VerbalEntry::from_fragment(f[1], f[2]).ok_or_else(|| bad(i, "bad verbalization"))?;
                    m.verbal.insert(f[1].to_string(), v);
                }
                _ => return Err(bad(i, "unknown record")),
            }
        }
        m.set_templates(templates);
        Ok(m)
    }
}
