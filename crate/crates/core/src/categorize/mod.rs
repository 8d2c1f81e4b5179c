//! Re-categorization: sparse tokens and subgraphs on both sides of a
//! sentence/AMR pair are replaced by indexed category symbols, and the
//! symbols are expanded back into AMR fragments after decoding.
//!
//! Categories are `DATE`, `NE_<ent>`, `-VERB-`, `-SURF-`, `-CONST-` and
//! `-VERBAL-` (revisits are carried by the `-RET-` token of the
//! linearization). Indexed symbols append `-<k>`, counting from 0 left to right
//! on the sentence per base: `DATE-0`, `NE_country-0`, `-SURF--1`.

mod dates;
mod model;
mod pair;
mod recover;
mod source;
mod units;
mod verbalize;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use crate::align::AlignError;
use crate::linearize::is_constant_form;

pub use dates::{DateFields, DateTemplate};
pub use model::{build_category_model, CategoryModel, QEntry, QKind, TrainingExample, MODEL_HEADER};
pub use pair::{categorize_pair, CategorizedPair};
pub use recover::{expand_category, recover};
pub use source::{categorize_source, fallback_ne_tags, fallback_pos_tags, SourceAnnotation};
pub use verbalize::{parse_verbalization_list, VerbalEntry};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CategorizeError {
    #[error("malformed alignment: {0}")]
    MalformedAlignment(#[from] AlignError),
    #[error("malformed category model line {line}: {msg}")]
    ModelFormat { line: usize, msg: String },
    #[error("malformed category table entry `{0}`")]
    TableFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CategoryConfig {
    /// Concepts seen fewer than this many times become `-VERB-` / `-SURF-`.
    pub threshold: usize,
}

impl Default for CategoryConfig {
    fn default() -> Self {
        CategoryConfig { threshold: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CategoryBase {
    Date,
    Ne(String),
    Verb,
    Surf,
    Const,
    Ret,
    Verbal,
}

impl fmt::Display for CategoryBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CategoryBase::Date => f.write_str("DATE"),
            CategoryBase::Ne(e) => write!(f, "NE_{e}"),
            CategoryBase::Verb => f.write_str("-VERB-"),
            CategoryBase::Surf => f.write_str("-SURF-"),
            CategoryBase::Const => f.write_str("-CONST-"),
            CategoryBase::Ret => f.write_str("-RET-"),
            CategoryBase::Verbal => f.write_str("-VERBAL-"),
        }
    }
}

impl CategoryBase {
    pub fn parse(s: &str) -> Option<CategoryBase> {
        Some(match s {
            "DATE" => CategoryBase::Date,
            "-VERB-" => CategoryBase::Verb,
            "-SURF-" => CategoryBase::Surf,
            "-CONST-" => CategoryBase::Const,
            "-RET-" => CategoryBase::Ret,
            "-VERBAL-" => CategoryBase::Verbal,
            _ => CategoryBase::Ne(s.strip_prefix("NE_").filter(|e| !e.is_empty())?.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CategoryLabel {
    pub base: CategoryBase,
    pub index: Option<usize>,
}

impl fmt::Display for CategoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}-{i}", self.base),
            None => write!(f, "{}", self.base),
        }
    }
}

impl CategoryLabel {
    pub fn indexed(base: CategoryBase, index: usize) -> Self {
        CategoryLabel {
            base,
            index: Some(index),
        }
    }

    /// Parses `DATE-0`, `NE_person-2`, `-SURF--1`, or a bare base.
    pub fn parse(s: &str) -> Option<CategoryLabel> {
        static INDEXED: OnceLock<Regex> = OnceLock::new();
        let re = INDEXED
            .get_or_init(|| Regex::new(r"^(DATE|NE_.+|-VERB-|-SURF-|-CONST-|-VERBAL-)-(\d+)$").expect("valid regex"));
        if let Some(c) = re.captures(s) {
            let base = CategoryBase::parse(&c[1])?;
            return Some(CategoryLabel {
                base,
                index: c[2].parse().ok(),
            });
        }
        CategoryBase::parse(s).map(|base| CategoryLabel { base, index: None })
    }
}

/// Outcome of classifying a concept or constant by frequency and form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConceptClass {
    Keep,
    Category(CategoryBase),
}

/// Sense-suffixed concepts (`describe-01`, `have-org-role-91`) are predicates.
pub fn is_predicate(label: &str) -> bool {
    static PRED: OnceLock<Regex> = OnceLock::new();
    PRED.get_or_init(|| Regex::new(r"^.+-\d\d+$").expect("valid regex"))
        .is_match(label)
}

pub fn classify_concept(label: &str, freq: usize, cfg: &CategoryConfig) -> ConceptClass {
    if is_constant_form(label) {
        return classify_constant(label);
    }
    if freq >= cfg.threshold {
        ConceptClass::Keep
    } else if is_predicate(label) {
        ConceptClass::Category(CategoryBase::Verb)
    } else {
        ConceptClass::Category(CategoryBase::Surf)
    }
}

/// Numbers, `-`, `+` and the three mode constants pass through; everything
/// else becomes `-CONST-`.
pub fn classify_constant(value: &str) -> ConceptClass {
    if crate::linearize::is_number(value) || matches!(value, "-" | "+" | "interrogative" | "expressive" | "imperative")
    {
        ConceptClass::Keep
    } else {
        ConceptClass::Category(CategoryBase::Const)
    }
}

/// One entry of table D: where a category symbol came from in the sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanRecord {
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub lemma: String,
}

/// Table D for one sentence: category symbol to source span.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentenceCategoryMap {
    pub entries: BTreeMap<String, SpanRecord>,
}

impl SentenceCategoryMap {
    pub fn get(&self, label: &str) -> Option<&SpanRecord> {
        self.entries.get(label)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One line: tab-separated `label|start|end|lemma|text` entries, ordered by span.
    pub fn to_line(&self) -> String {
        let mut es: Vec<_> = self.entries.iter().collect();
        es.sort_by_key(|(l, r)| (r.start, (*l).clone()));
        es.iter()
            .map(|(l, r)| format!("{l}|{}|{}|{}|{}", r.start, r.end, r.lemma, r.text))
            .collect::<Vec<_>>()
            .join("\t")
    }

    pub fn from_line(line: &str) -> Result<Self, CategorizeError> {
        let mut entries = BTreeMap::new();
        for item in line.split('\t').filter(|s| !s.is_empty()) {
            let bad = || CategorizeError::TableFormat(item.to_string());
            let f: Vec<&str> = item.splitn(5, '|').collect();
            if f.len() != 5 {
                return Err(bad());
            }
            entries.insert(
                f[0].to_string(),
                SpanRecord {
                    start: f[1].parse().map_err(|_| bad())?,
                    end: f[2].parse().map_err(|_| bad())?,
                    lemma: f[3].to_string(),
                    text: f[4].to_string(),
                },
            );
        }
        Ok(SentenceCategoryMap { entries })
    }
}

/// Assigns per-base indices left to right. `items` are (span start, base) in
/// any order; the result gives the label for each input item.
pub(crate) fn assign_indices(items: &[(usize, CategoryBase)]) -> Vec<CategoryLabel> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&i| (items[i].0, i));
    let mut next: BTreeMap<&CategoryBase, usize> = BTreeMap::new();
    let mut out = vec![None; items.len()];
    for i in order {
        let k = next.entry(&items[i].1).or_insert(0);
        out[i] = Some(CategoryLabel::indexed(items[i].1.clone(), *k));
        *k += 1;
    }
    out.into_iter().map(|l| l.expect("every item labeled")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_rendering() {
        for s in [
            "DATE-0",
            "NE_person-0",
            "NE_political-party-3",
            "-SURF--0",
            "-VERB--12",
            "-CONST--1",
            "-VERBAL--0",
        ] {
            let l = CategoryLabel::parse(s).unwrap();
            assert!(l.index.is_some());
            assert_eq!(l.to_string(), s);
        }
        assert_eq!(
            CategoryLabel::parse("NE_country-1").unwrap().base,
            CategoryBase::Ne("country".into())
        );
        assert_eq!(CategoryLabel::parse("-SURF-").unwrap().index, None);
        assert!(CategoryLabel::parse("person").is_none());
        assert!(CategoryLabel::parse("NE_").is_none());
    }

    #[test]
    fn concept_classes() {
        let cfg = CategoryConfig::default();
        assert_eq!(
            classify_concept("describe-01", 12, &cfg),
            ConceptClass::Category(CategoryBase::Verb)
        );
        assert_eq!(
            classify_concept("genius", 7, &cfg),
            ConceptClass::Category(CategoryBase::Surf)
        );
        assert_eq!(classify_concept("person", 500, &cfg), ConceptClass::Keep);
        assert_eq!(
            classify_concept("have-org-role-91", 3, &cfg),
            ConceptClass::Category(CategoryBase::Verb)
        );
        assert_eq!(
            classify_concept("\"Ryan\"", 0, &cfg),
            ConceptClass::Category(CategoryBase::Const)
        );
        for c in ["2007", "-", "+", "interrogative", "expressive", "imperative", "0.5"] {
            assert_eq!(classify_concept(c, 0, &cfg), ConceptClass::Keep, "{c}");
        }
        let zero = CategoryConfig { threshold: 0 };
        assert_eq!(classify_concept("genius", 0, &zero), ConceptClass::Keep);
        assert_eq!(classify_concept("describe-01", 0, &zero), ConceptClass::Keep);
    }

    #[test]
    fn index_assignment_per_base() {
        let labels = assign_indices(&[
            (5, CategoryBase::Surf),
            (0, CategoryBase::Surf),
            (2, CategoryBase::Date),
            (9, CategoryBase::Surf),
        ]);
        let s: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        assert_eq!(s, vec!["-SURF--1", "-SURF--0", "DATE-0", "-SURF--2"]);
    }

    #[test]
    fn table_line_roundtrip() {
        let mut d = SentenceCategoryMap::default();
        d.entries.insert(
            "DATE-0".into(),
            SpanRecord {
                start: 3,
                end: 7,
                text: "June 6 , 2007".into(),
                lemma: "june-6-,-2007".into(),
            },
        );
        d.entries.insert(
            "-SURF--0".into(),
            SpanRecord {
                start: 0,
                end: 1,
                text: "seismology".into(),
                lemma: "seismology".into(),
            },
        );
        let line = d.to_line();
        assert!(line.starts_with("-SURF--0|0|1|"));
        assert_eq!(SentenceCategoryMap::from_line(&line).unwrap(), d);
        assert_eq!(
            SentenceCategoryMap::from_line("").unwrap(),
            SentenceCategoryMap::default()
        );
        assert!(SentenceCategoryMap::from_line("x|1").is_err());
    }
}
