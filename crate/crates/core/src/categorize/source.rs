use super::model::{CategoryModel, QKind};
use super::pair::span_lemma;
use super::{assign_indices, CategoryBase, SentenceCategoryMap, SpanRecord};

/// A sentence to categorize at test time. Missing tag layers fall back to
/// [`fallback_ne_tags`] and [`fallback_pos_tags`].
#[derive(Debug, Clone, Copy)]
pub struct SourceAnnotation<'a> {
    pub tokens: &'a [String],
    pub ne: Option<&'a [String]>,
    pub pos: Option<&'a [String]>,
    pub lemmas: Option<&'a [String]>,
}

impl<'a> SourceAnnotation<'a> {
    pub fn plain(tokens: &'a [String]) -> Self {
        SourceAnnotation {
            tokens,
            ne: None,
            pos: None,
            lemmas: None,
        }
    }
}

/// Categorizes a sentence without a graph. Categories are found in this
/// order, each only over tokens not yet claimed: dates by template, NE spans
/// from the tags, longest match in Q, verbalization words, and finally
/// nouns and verbs by POS tag among tokens never seen in training.
pub fn categorize_source(s: &SourceAnnotation<'_>, m: &CategoryModel) -> (Vec<String>, SentenceCategoryMap) {
    let tokens = s.tokens;
    let n = tokens.len();
    let ne_owned;
    let ne = match s.ne.filter(|t| t.len() == n) {
        Some(t) => t,
        None => {
            ne_owned = fallback_ne_tags(tokens);
            &ne_owned
        }
    };
    let pos_owned;
    let pos = match s.pos.filter(|t| t.len() == n) {
        Some(t) => t,
        None => {
            pos_owned = fallback_pos_tags(tokens);
            &pos_owned
        }
    };

    let mut spans: Vec<(usize, usize, CategoryBase)> = Vec::new();
    let mut taken = vec![false; n];
    fn claim(taken: &mut [bool], spans: &mut Vec<(usize, usize, CategoryBase)>, s: usize, e: usize, b: CategoryBase) {
        taken[s..e].iter_mut().for_each(|t| *t = true);
        spans.push((s, e, b));
    }
    let free = |taken: &[bool], s: usize, e: usize| e <= n && !taken[s..e].iter().any(|&t| t);

    let tl = m.max_template_len();
    let mut i = 0;
    while i < n {
        let hit = (1..=tl.min(n - i))
            .rev()
            .find(|&l| m.read_date(&tokens[i..i + l].join(" ")).is_some());
        match hit {
            Some(l) => {
                claim(&mut taken, &mut spans, i, i + l, CategoryBase::Date);
                i += l;
            }
            None => i += 1,
        }
    }

    for (st, e) in ne_spans(ne) {
        if !free(&taken, st, e) {
            continue;
        }
        let text = tokens[st..e].join(" ");
        let ent = match m.q_best(&text).map(|q| q.kind) {
            Some(QKind::Category(CategoryBase::Ne(e))) => e,
            _ => "person".to_string(),
        };
        claim(&mut taken, &mut spans, st, e, CategoryBase::Ne(ent));
    }

    let mut i = 0;
    while i < n {
        let mut step = 1;
        for l in (1..=m.max_span().min(n - i)).rev() {
            if !free(&taken, i, i + l) {
                continue;
            }
            if let Some(QKind::Category(b)) = m.q_best(&tokens[i..i + l].join(" ")).map(|q| q.kind) {
                claim(&mut taken, &mut spans, i, i + l, b);
                step = l;
                break;
            }
        }
        i += step;
    }

    for (i, tok) in tokens.iter().enumerate() {
        if free(&taken, i, i + 1) && m.verbalization(tok).is_some() {
            claim(&mut taken, &mut spans, i, i + 1, CategoryBase::Verbal);
        }
    }

    for i in 0..n {
        if !free(&taken, i, i + 1) || m.token_freq(&tokens[i]) > 0 {
            continue;
        }
        if pos[i].starts_with("VB") {
            claim(&mut taken, &mut spans, i, i + 1, CategoryBase::Verb);
        } else if pos[i].starts_with("NN") {
            claim(&mut taken, &mut spans, i, i + 1, CategoryBase::Surf);
        }
    }

    spans.sort_by_key(|s| s.0);
    let labels = assign_indices(&spans.iter().map(|(s, _, b)| (*s, b.clone())).collect::<Vec<_>>());
    let mut out = Vec::with_capacity(n);
    let mut table = SentenceCategoryMap::default();
    let mut next = spans.iter().zip(labels).peekable();
    let mut i = 0;
    while i < n {
        if let Some(((st, e, _), label)) = next.next_if(|((st, _, _), _)| *st == i) {
            let label = label.to_string();
            table.entries.insert(
                label.clone(),
                SpanRecord {
                    start: *st,
                    end: *e,
                    text: tokens[*st..*e].join(" "),
                    lemma: span_lemma(tokens, s.lemmas, *st, *e),
                },
            );
            out.push(label);
            i = *e;
        } else {
            out.push(m.normalize_token(&tokens[i]));
            i += 1;
        }
    }
    (out, table)
}

// BIO tags (`B-PER`, `I-PER`) or plain types where runs of one type form a span.
fn ne_spans(tags: &[String]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut cur: Option<(usize, &str)> = None;
    for (i, t) in tags.iter().enumerate() {
        let (begin, ty) = match t.split_once('-') {
            Some(("B", ty)) => (true, ty),
            Some(("I", ty)) => (false, ty),
            _ if t == "O" || t.is_empty() => {
                if let Some((s, _)) = cur.take() {
                    out.push((s, i));
                }
                continue;
            }
            _ => (false, t.as_str()),
        };
        match cur {
            Some((_, cty)) if !begin && cty == ty => {}
            _ => {
                if let Some((s, _)) = cur.take() {
                    out.push((s, i));
                }
                cur = Some((i, ty));
            }
        }
    }
    if let Some((s, _)) = cur {
        out.push((s, tags.len()));
    }
    out
}

/// Runs of capitalized tokens, tagged `B-ENT`/`I-ENT`. A lone capitalized
/// first token is left out.
pub fn fallback_ne_tags(tokens: &[String]) -> Vec<String> {
    let cap = |t: &String| t.chars().next().is_some_and(|c| c.is_uppercase()) && t.chars().any(|c| c.is_alphabetic());
    let mut out = vec!["O".to_string(); tokens.len()];
    let mut i = 0;
    while i < tokens.len() {
        if !cap(&tokens[i]) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < tokens.len() && cap(&tokens[j]) {
            j += 1;
        }
        if !(i == 0 && j == 1) {
            out[i] = "B-ENT".into();
            for t in out.iter_mut().take(j).skip(i + 1) {
                *t = "I-ENT".into();
            }
        }
        i = j;
    }
    out
}

const CLOSED: &[(&str, &str)] = &[
    ("the", "DT"),
    ("a", "DT"),
    ("an", "DT"),
    ("this", "DT"),
    ("that", "DT"),
    ("these", "DT"),
    ("those", "DT"),
    ("every", "DT"),
    ("some", "DT"),
    ("i", "PRP"),
    ("you", "PRP"),
    ("he", "PRP"),
    ("she", "PRP"),
    ("it", "PRP"),
    ("we", "PRP"),
    ("they", "PRP"),
    ("me", "PRP"),
    ("him", "PRP"),
    ("her", "PRP"),
    ("us", "PRP"),
    ("them", "PRP"),
    ("his", "PRP$"),
    ("its", "PRP$"),
    ("their", "PRP$"),
    ("our", "PRP$"),
    ("my", "PRP$"),
    ("your", "PRP$"),
    ("himself", "PRP"),
    ("herself", "PRP"),
    ("themselves", "PRP"),
    ("of", "IN"),
    ("in", "IN"),
    ("on", "IN"),
    ("at", "IN"),
    ("by", "IN"),
    ("for", "IN"),
    ("with", "IN"),
    ("from", "IN"),
    ("about", "IN"),
    ("as", "IN"),
    ("into", "IN"),
    ("after", "IN"),
    ("before", "IN"),
    ("if", "IN"),
    ("because", "IN"),
    ("to", "TO"),
    ("and", "CC"),
    ("or", "CC"),
    ("but", "CC"),
    ("not", "RB"),
    ("n't", "RB"),
    ("very", "RB"),
    ("is", "MD"),
    ("are", "MD"),
    ("was", "MD"),
    ("were", "MD"),
    ("be", "MD"),
    ("been", "MD"),
    ("am", "MD"),
    ("has", "MD"),
    ("have", "MD"),
    ("had", "MD"),
    ("do", "MD"),
    ("does", "MD"),
    ("did", "MD"),
    ("will", "MD"),
    ("would", "MD"),
    ("can", "MD"),
    ("could", "MD"),
    ("should", "MD"),
    ("may", "MD"),
    ("might", "MD"),
    ("must", "MD"),
    ("who", "WP"),
    ("what", "WP"),
    ("which", "WDT"),
    ("there", "EX"),
];

/// Suffix-based tags for when no tagger output is available. Auxiliaries
/// are tagged `MD` so they are never categorized as verbs.
pub fn fallback_pos_tags(tokens: &[String]) -> Vec<String> {
    tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let l = t.to_lowercase();
            if let Some((_, tag)) = CLOSED.iter().find(|(w, _)| *w == l) {
                return tag.to_string();
            }
            if !t.chars().any(char::is_alphanumeric) {
                return t.clone();
            }
            if crate::linearize::is_number(t) {
                return "CD".into();
            }
            if i > 0 && t.chars().next().is_some_and(char::is_uppercase) {
                return "NNP".into();
            }
            let tag = if l.len() > 4 && l.ends_with("ing") {
                "VBG"
            } else if l.len() > 3 && l.ends_with("ed") {
                "VBD"
            } else if l.len() > 3 && l.ends_with("ly") {
                "RB"
            } else if l.len() > 3 && l.ends_with('s') && !l.ends_with("ss") {
                "NNS"
            } else {
                "NN"
            };
            tag.to_string()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Vec<String> {
        s.split(' ').map(String::from).collect()
    }

    #[test]
    fn bio_and_plain_spans() {
        assert_eq!(ne_spans(&v("B-PER I-PER O B-LOC B-LOC")), vec![(0, 2), (3, 4), (4, 5)]);
        assert_eq!(ne_spans(&v("PERSON PERSON O LOCATION")), vec![(0, 2), (3, 4)]);
        assert_eq!(ne_spans(&v("O O")), vec![]);
    }

    #[test]
    fn fallback_taggers() {
        assert_eq!(
            fallback_ne_tags(&v("The boy met John Smith in Paris")),
            v("O O O B-ENT I-ENT O B-ENT")
        );
        assert_eq!(fallback_ne_tags(&v("Ryan Gosling smiled")), v("B-ENT I-ENT O"));
        assert_eq!(
            fallback_pos_tags(&v("the boy was running quickly , 5")),
            v("DT NN MD VBG RB , CD")
        );
    }
}
