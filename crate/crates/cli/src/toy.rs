//! Seeded synthetic corpus: sentences, AMR graphs, alignments and NE/POS/lemma
//! sidecars built together from a small grammar, so every categorizable node
//! is aligned.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use amrseq::align::Alignment;
use amrseq::corpus::{write_corpus, write_tags, CorpusEntry};
use amrseq::graph::{fresh_variable, AmrGraph, NodeId, Target};
use anyhow::{Context, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_TOY_SEED: u64 = 7;
pub const TOY_TRAIN: usize = 200;
pub const TOY_DEV: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct ToyEntry {
    pub id: String,
    pub tokens: Vec<String>,
    pub graph: AmrGraph,
    pub alignment: Alignment,
    pub ne: Vec<String>,
    pub pos: Vec<String>,
    pub lemmas: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyCorpus {
    pub train: Vec<ToyEntry>,
    pub dev: Vec<ToyEntry>,
    pub verbalization: String,
}

struct Noun {
    sg: &'static str,
    pl: &'static str,
}

struct Verb {
    base: &'static str,
    third: &'static str,
    concept: &'static str,
}

const fn n(sg: &'static str, pl: &'static str) -> Noun {
    Noun { sg, pl }
}

const fn v(base: &'static str, third: &'static str, concept: &'static str) -> Verb {
    Verb { base, third, concept }
}

const NOUNS_FREQUENT: &[Noun] = &[
    n("boy", "boys"),
    n("girl", "girls"),
    n("woman", "women"),
    n("dog", "dogs"),
];
const NOUNS_MID: &[Noun] = &[
    n("cat", "cats"),
    n("friend", "friends"),
    n("doctor", "doctors"),
    n("student", "students"),
    n("child", "children"),
    n("king", "kings"),
];
const NOUNS_RARE: &[Noun] = &[
    n("artist", "artists"),
    n("baby", "babies"),
    n("soldier", "soldiers"),
    n("pilot", "pilots"),
    n("nurse", "nurses"),
    n("lawyer", "lawyers"),
    n("monkey", "monkeys"),
    n("horse", "horses"),
    n("tiger", "tigers"),
    n("rabbit", "rabbits"),
    n("lion", "lions"),
    n("bird", "birds"),
    n("fox", "foxes"),
    n("wolf", "wolves"),
    n("duck", "ducks"),
    n("goat", "goats"),
    n("mouse", "mice"),
    n("bear", "bears"),
    n("owl", "owls"),
    n("frog", "frogs"),
    n("clown", "clowns"),
    n("tourist", "tourists"),
    n("judge", "judges"),
    n("poet", "poets"),
    n("farmer", "farmers"),
    n("sailor", "sailors"),
    n("dancer", "dancers"),
    n("wizard", "wizards"),
    n("pirate", "pirates"),
    n("robot", "robots"),
];

const VERBS_FREQUENT: &[Verb] = &[
    v("see", "sees", "see-01"),
    v("like", "likes", "like-01"),
    v("help", "helps", "help-01"),
];
const VERBS_MID: &[Verb] = &[
    v("visit", "visits", "visit-01"),
    v("call", "calls", "call-01"),
    v("find", "finds", "find-01"),
];
const VERBS_RARE: &[Verb] = &[
    v("admire", "admires", "admire-01"),
    v("praise", "praises", "praise-01"),
    v("thank", "thanks", "thank-01"),
    v("follow", "follows", "follow-01"),
    v("push", "pushes", "push-01"),
    v("carry", "carries", "carry-01"),
    v("watch", "watches", "watch-01"),
    v("greet", "greets", "greet-01"),
    v("hire", "hires", "hire-01"),
    v("invite", "invites", "invite-01"),
    v("kick", "kicks", "kick-01"),
    v("pull", "pulls", "pull-01"),
    v("miss", "misses", "miss-01"),
    v("warn", "warns", "warn-01"),
    v("trust", "trusts", "trust-01"),
    v("blame", "blames", "blame-01"),
    v("hug", "hugs", "hug-01"),
    v("chase", "chases", "chase-01"),
    v("rescue", "rescues", "rescue-01"),
    v("tickle", "tickles", "tickle-01"),
];

const ADJ_FREQUENT: &[&str] = &["big", "small"];
const ADJ_RARE: &[&str] = &[
    "tall", "old", "young", "angry", "brave", "clever", "lazy", "quiet", "rich", "strong", "tired", "kind", "proud",
    "shy", "famous",
];

/// (word, concept root, verb); all realized as `person :ARG0-of verb`.
const VERBAL: &[(&str, &str)] = &[
    ("teacher", "teach-01"),
    ("singer", "sing-01"),
    ("writer", "write-01"),
    ("player", "play-01"),
    ("driver", "drive-01"),
    ("baker", "bake-01"),
];

const FIRST_NAMES: &[&str] = &[
    "John", "Mary", "Peter", "Anna", "David", "Sarah", "Tom", "Lucy", "James", "Emma", "Paul", "Alice", "Mark",
    "Helen", "Oscar", "Nina", "Victor", "Laura", "Hugo", "Clara",
];
const SURNAMES: &[&str] = &[
    "Smith", "Jones", "Brown", "Miller", "Wilson", "Taylor", "Clark", "Lewis", "Walker", "Young", "King", "Wright",
];
/// (tokens, wiki, entity type)
const PLACES: &[(&[&str], &str, &str)] = &[
    (&["France"], "France", "country"),
    (&["Germany"], "Germany", "country"),
    (&["Spain"], "Spain", "country"),
    (&["Japan"], "Japan", "country"),
    (&["Brazil"], "Brazil", "country"),
    (&["Canada"], "Canada", "country"),
    (&["South", "Korea"], "South_Korea", "country"),
    (&["New", "Zealand"], "New_Zealand", "country"),
    (&["Peru"], "Peru", "country"),
    (&["Paris"], "Paris", "city"),
    (&["London"], "London", "city"),
    (&["Tokyo"], "Tokyo", "city"),
    (&["New", "York"], "New_York_City", "city"),
    (&["Rome"], "Rome", "city"),
];
const MONTHS: &[&str] = &[
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

pub fn verbalization_list() -> String {
    let mut s = String::from("# word-to-subgraph verbalizations for the toy corpus\n");
    for (w, verb) in VERBAL {
        s.push_str(&format!("VERBALIZE {w} TO person :ARG0-of {verb}\n"));
    }
    s.push_str("MAYBE-VERBALIZE liar TO person :ARG0-of lie-08\n");
    s.push_str("DO-NOT-VERBALIZE farmer TO person :ARG0-of farm-01\n");
    s
}

/// A run of consecutive words; a piece with paths is aligned as one span.
struct Piece {
    words: Vec<Word>,
    paths: Vec<String>,
}

struct Word {
    text: String,
    pos: &'static str,
    lemma: String,
    ne: String,
}

fn word(text: &str, pos: &'static str, lemma: &str) -> Word {
    Word {
        text: text.to_string(),
        pos,
        lemma: lemma.to_string(),
        ne: "O".to_string(),
    }
}

fn piece(words: Vec<Word>, paths: Vec<String>) -> Piece {
    Piece { words, paths }
}

fn plain(text: &str, pos: &'static str) -> Piece {
    piece(vec![word(text, pos, &text.to_lowercase())], Vec::new())
}

struct Builder {
    g: AmrGraph,
    paths: Vec<String>,
    vars: HashMap<String, usize>,
    used_nouns: HashSet<&'static str>,
    used_names: HashSet<String>,
}

impl Builder {
    fn new(root: &str) -> Builder {
        let mut vars = HashMap::new();
        let var = fresh_variable(root, &mut vars);
        Builder {
            g: AmrGraph::with_root(var, root),
            paths: vec!["0".to_string()],
            vars,
            used_nouns: HashSet::new(),
            used_names: HashSet::new(),
        }
    }

    fn next_path(&self, parent: NodeId) -> String {
        format!("{}.{}", self.paths[parent.0], self.g.outgoing(parent).count())
    }

    fn child(&mut self, parent: NodeId, role: &str, concept: &str) -> (NodeId, String) {
        let path = self.next_path(parent);
        let var = fresh_variable(concept, &mut self.vars);
        let id = self.g.add_child(parent, role, &var, concept);
        self.paths.push(path.clone());
        (id, path)
    }

    fn constant(&mut self, parent: NodeId, role: &str, value: &str) -> String {
        let path = self.next_path(parent);
        self.g.add_constant(parent, role, value);
        path
    }

    fn reentrancy(&mut self, parent: NodeId, role: &str, target: NodeId) {
        self.g.add_edge(parent, role, Target::Node(target));
    }
}

#[derive(Clone, Copy, PartialEq)]
enum NpKind {
    Common,
    Name,
    Verbal,
}

fn pick_tier<'a, T, R: Rng>(rng: &mut R, tiers: &[(f64, &'a [T])]) -> &'a T {
    let (_, tier) = tiers.choose_weighted(rng, |t| t.0).expect("positive weights");
    tier.choose(rng).expect("nonempty tier")
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Attaches a noun phrase under `parent` and returns its node and words.
fn noun_phrase<R: Rng>(
    rng: &mut R,
    b: &mut Builder,
    parent: NodeId,
    role: &str,
    kind: NpKind,
    initial: bool,
    allow_quant: bool,
) -> (NodeId, Vec<Piece>) {
    let det = |d: &str| {
        let text = if initial { capitalize(d) } else { d.to_string() };
        piece(vec![word(&text, "DT", d)], Vec::new())
    };
    match kind {
        NpKind::Name => {
            let words = loop {
                let mut w = vec![*FIRST_NAMES.choose(rng).expect("nonempty")];
                if rng.gen_bool(0.5) {
                    w.push(SURNAMES.choose(rng).expect("nonempty"));
                }
                if b.used_names.insert(w.join(" ")) {
                    break w;
                }
            };
            let (p, pp) = b.child(parent, role, "person");
            b.constant(p, "wiki", "-");
            let (nm, np) = b.child(p, "name", "name");
            for (i, w) in words.iter().enumerate() {
                b.constant(nm, &format!("op{}", i + 1), &format!("\"{w}\""));
            }
            let ws = words
                .iter()
                .enumerate()
                .map(|(i, w)| Word {
                    text: w.to_string(),
                    pos: "NNP",
                    lemma: w.to_lowercase(),
                    ne: format!("{}-PER", if i == 0 { "B" } else { "I" }),
                })
                .collect();
            (p, vec![piece(ws, vec![pp, np])])
        }
        NpKind::Verbal => {
            let (w, verb) = loop {
                let e = VERBAL.choose(rng).expect("nonempty");
                if b.used_nouns.insert(e.0) {
                    break *e;
                }
            };
            let (p, pp) = b.child(parent, role, "person");
            let (_, vp) = b.child(p, "ARG0-of", verb);
            (p, vec![det("the"), piece(vec![word(w, "NN", w)], vec![pp, vp])])
        }
        NpKind::Common => {
            let noun = loop {
                let n = pick_tier(rng, &[(0.6, NOUNS_FREQUENT), (0.15, NOUNS_MID), (0.25, NOUNS_RARE)]);
                if b.used_nouns.insert(n.sg) {
                    break n;
                }
            };
            let (id, path) = b.child(parent, role, noun.sg);
            let mut pieces = Vec::new();
            if allow_quant && rng.gen_bool(0.15) {
                let q = rng.gen_range(2..=12);
                let qp = b.constant(id, "quant", &q.to_string());
                pieces.push(piece(vec![word(&q.to_string(), "CD", &q.to_string())], vec![qp]));
                pieces.push(piece(vec![word(noun.pl, "NNS", noun.sg)], vec![path]));
                return (id, pieces);
            }
            pieces.push(det(if rng.gen_bool(0.7) { "the" } else { "a" }));
            if rng.gen_bool(0.3) {
                let adj = *pick_tier(rng, &[(0.5, ADJ_FREQUENT), (0.5, ADJ_RARE)]);
                let (_, ap) = b.child(id, "mod", adj);
                pieces.push(piece(vec![word(adj, "JJ", adj)], vec![ap]));
            }
            pieces.push(piece(vec![word(noun.sg, "NN", noun.sg)], vec![path]));
            (id, pieces)
        }
    }
}

fn subject_kind<R: Rng>(rng: &mut R) -> NpKind {
    [(0.5, NpKind::Common), (0.3, NpKind::Name), (0.2, NpKind::Verbal)]
        .choose_weighted(rng, |x| x.0)
        .expect("positive weights")
        .1
}

fn object_kind<R: Rng>(rng: &mut R) -> NpKind {
    [(0.6, NpKind::Common), (0.25, NpKind::Name), (0.15, NpKind::Verbal)]
        .choose_weighted(rng, |x| x.0)
        .expect("positive weights")
        .1
}

fn place<R: Rng>(rng: &mut R, b: &mut Builder, parent: NodeId, role: &str) -> Vec<Piece> {
    let (toks, wiki, ty) = PLACES.choose(rng).expect("nonempty");
    let (p, pp) = b.child(parent, role, ty);
    b.constant(p, "wiki", &format!("\"{wiki}\""));
    let (nm, np) = b.child(p, "name", "name");
    for (i, w) in toks.iter().enumerate() {
        b.constant(nm, &format!("op{}", i + 1), &format!("\"{w}\""));
    }
    let ws = toks
        .iter()
        .enumerate()
        .map(|(i, w)| Word {
            text: w.to_string(),
            pos: "NNP",
            lemma: w.to_lowercase(),
            ne: format!("{}-LOC", if i == 0 { "B" } else { "I" }),
        })
        .collect();
    vec![piece(ws, vec![pp, np])]
}

/// A date under `:time` in one of five surface formats. Year, month and day
/// are kept pairwise distinct as two-digit numbers so that every mention
/// abstracts to one template.
fn date<R: Rng>(rng: &mut R, b: &mut Builder, parent: NodeId) -> Vec<Piece> {
    let (year, month, day) = loop {
        let y: i64 = rng.gen_range(1990..=2015);
        let m: i64 = rng.gen_range(1..=12);
        let d: i64 = rng.gen_range(1..=28);
        if m != d && y % 100 != m && y % 100 != d {
            break (y, m, d);
        }
    };
    let format = rng.gen_range(0..10);
    let (has_month, has_day) = match format {
        0..=3 | 5 | 6 | 9 => (true, true),
        4 | 7 => (false, false),
        _ => (true, false),
    };
    let (d, dp) = b.child(parent, "time", "date-entity");
    b.constant(d, "year", &year.to_string());
    if has_month {
        b.constant(d, "month", &month.to_string());
    }
    if has_day {
        b.constant(d, "day", &day.to_string());
    }
    let mname = MONTHS[(month - 1) as usize];
    let ys = year.to_string();
    let ds = day.to_string();
    let words: Vec<Word> = match format {
        0..=3 => vec![
            word(mname, "NNP", &mname.to_lowercase()),
            word(&ds, "CD", &ds),
            word(",", ",", ","),
            word(&ys, "CD", &ys),
        ],
        5 | 6 => vec![
            word(&ds, "CD", &ds),
            word(mname, "NNP", &mname.to_lowercase()),
            word(&ys, "CD", &ys),
        ],
        4 | 7 => vec![word(&ys, "CD", &ys)],
        8 => vec![word(mname, "NNP", &mname.to_lowercase()), word(&ys, "CD", &ys)],
        _ => {
            let t = format!("{year}-{month:02}-{day:02}");
            vec![word(&t, "CD", &t)]
        }
    };
    let prep = if has_day { "on" } else { "in" };
    vec![plain(prep, "IN"), piece(words, vec![dp])]
}

fn verb<R: Rng>(rng: &mut R) -> &'static Verb {
    pick_tier(rng, &[(0.55, VERBS_FREQUENT), (0.15, VERBS_MID), (0.3, VERBS_RARE)])
}

fn sentence<R: Rng>(rng: &mut R) -> (AmrGraph, Vec<Piece>) {
    let mut pieces = Vec::new();
    let template = rng.gen_range(0..20);
    let b = match template {
        // SVO, optionally dated
        0..=6 => {
            let vb = verb(rng);
            let mut b = Builder::new(vb.concept);
            let root = b.g.root();
            let kind = subject_kind(rng);
            let (_, subj) = noun_phrase(rng, &mut b, root, "ARG0", kind, true, false);
            pieces.extend(subj);
            pieces.push(piece(vec![word(vb.third, "VBZ", vb.base)], vec!["0".into()]));
            let kind = object_kind(rng);
            let (_, obj) = noun_phrase(rng, &mut b, root, "ARG1", kind, false, true);
            pieces.extend(obj);
            if rng.gen_bool(0.3) {
                pieces.extend(date(rng, &mut b, root));
            }
            b
        }
        // control verb with a reentrant subject
        7..=10 => {
            let mut b = Builder::new("want-01");
            let root = b.g.root();
            let kind = subject_kind(rng);
            let (s, subj) = noun_phrase(rng, &mut b, root, "ARG0", kind, true, false);
            let vb = verb(rng);
            let (inner, ip) = b.child(root, "ARG1", vb.concept);
            b.reentrancy(inner, "ARG0", s);
            let kind = object_kind(rng);
            let (_, obj) = noun_phrase(rng, &mut b, inner, "ARG1", kind, false, true);
            pieces.extend(subj);
            pieces.push(piece(vec![word("wants", "VBZ", "want")], vec!["0".into()]));
            pieces.push(plain("to", "TO"));
            pieces.push(piece(vec![word(vb.base, "VB", vb.base)], vec![ip]));
            pieces.extend(obj);
            if rng.gen_bool(0.2) {
                pieces.extend(date(rng, &mut b, root));
            }
            b
        }
        // negation
        11..=14 => {
            let vb = verb(rng);
            let mut b = Builder::new(vb.concept);
            let root = b.g.root();
            let kind = subject_kind(rng);
            let (_, subj) = noun_phrase(rng, &mut b, root, "ARG0", kind, true, false);
            let kind = object_kind(rng);
            let (_, obj) = noun_phrase(rng, &mut b, root, "ARG1", kind, false, true);
            let pol = b.constant(root, "polarity", "-");
            pieces.extend(subj);
            pieces.push(plain("did", "VBD"));
            pieces.push(piece(vec![word("not", "RB", "not")], vec![pol]));
            pieces.push(piece(vec![word(vb.base, "VB", vb.base)], vec!["0".into()]));
            pieces.extend(obj);
            if rng.gen_bool(0.3) {
                pieces.extend(date(rng, &mut b, root));
            }
            b
        }
        // location
        15..=17 => {
            let mut b = Builder::new("live-01");
            let root = b.g.root();
            let kind = subject_kind(rng);
            let (_, subj) = noun_phrase(rng, &mut b, root, "ARG0", kind, true, false);
            pieces.extend(subj);
            pieces.push(piece(vec![word("lives", "VBZ", "live")], vec!["0".into()]));
            pieces.push(plain("in", "IN"));
            pieces.extend(place(rng, &mut b, root, "location"));
            b
        }
        // dated visit
        _ => {
            let mut b = Builder::new("visit-01");
            let root = b.g.root();
            let kind = subject_kind(rng);
            let (_, subj) = noun_phrase(rng, &mut b, root, "ARG0", kind, true, false);
            pieces.extend(subj);
            pieces.push(piece(vec![word("visits", "VBZ", "visit")], vec!["0".into()]));
            pieces.extend(place(rng, &mut b, root, "ARG1"));
            pieces.extend(date(rng, &mut b, root));
            b
        }
    };
    pieces.push(plain(".", "."));
    (b.g, pieces)
}

fn entry(id: String, g: AmrGraph, pieces: Vec<Piece>) -> ToyEntry {
    let mut tokens = Vec::new();
    let mut ne = Vec::new();
    let mut pos = Vec::new();
    let mut lemmas = Vec::new();
    let mut items = Vec::new();
    for p in pieces {
        let start = tokens.len();
        for w in p.words {
            tokens.push(w.text);
            ne.push(w.ne);
            pos.push(w.pos.to_string());
            lemmas.push(w.lemma);
        }
        if !p.paths.is_empty() {
            items.push(format!("{start}-{}|{}", tokens.len(), p.paths.join("+")));
        }
    }
    let alignment = Alignment::parse_line(&items.join(" "), &g).expect("generated paths address the graph");
    ToyEntry {
        id,
        tokens,
        graph: g,
        alignment,
        ne,
        pos,
        lemmas,
    }
}

pub fn generate(seed: u64, train: usize, dev: usize) -> ToyCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all = Vec::with_capacity(train + dev);
    for i in 0..train + dev {
        let (g, pieces) = sentence(&mut rng);
        let split = if i < train { "train" } else { "dev" };
        let k = if i < train { i } else { i - train };
        all.push(entry(format!("toy.{split}.{k:04}"), g, pieces));
    }
    let dev_part = all.split_off(train);
    ToyCorpus {
        train: all,
        dev: dev_part,
        verbalization: verbalization_list(),
    }
}

/// Writes `{split}.amr`, `.align`, `.ne`, `.pos`, `.lemma` and `.tok` for
/// both splits plus `verbalization.txt`.
pub fn write_toy(dir: &Path, c: &ToyCorpus) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (split, entries) in [("train", &c.train), ("dev", &c.dev)] {
        let corpus: Vec<CorpusEntry> = entries
            .iter()
            .map(|e| {
                let mut ce = CorpusEntry::new(e.tokens.clone(), e.graph.clone());
                ce.id = Some(e.id.clone());
                ce
            })
            .collect();
        let toks: Vec<Vec<String>> = entries.iter().map(|e| e.tokens.clone()).collect();
        let align: String = entries.iter().map(|e| e.alignment.to_line(&e.graph) + "\n").collect();
        let files = [
            ("amr", write_corpus(&corpus)),
            ("align", align),
            (
                "ne",
                write_tags(&toks, &entries.iter().map(|e| e.ne.clone()).collect::<Vec<_>>()),
            ),
            (
                "pos",
                write_tags(&toks, &entries.iter().map(|e| e.pos.clone()).collect::<Vec<_>>()),
            ),
            (
                "lemma",
                write_tags(&toks, &entries.iter().map(|e| e.lemmas.clone()).collect::<Vec<_>>()),
            ),
            ("tok", toks.iter().map(|t| t.join(" ") + "\n").collect()),
        ];
        for (ext, body) in files {
            let path = dir.join(format!("{split}.{ext}"));
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    let path = dir.join("verbalization.txt");
    fs::write(&path, &c.verbalization).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate(3, 20, 5), generate(3, 20, 5));
        assert_ne!(generate(3, 20, 5).train, generate(4, 20, 5).train);
    }

    #[test]
    fn sidecars_line_up_and_alignments_cover_content_words() {
        let c = generate(DEFAULT_TOY_SEED, 60, 10);
        for e in c.train.iter().chain(&c.dev) {
            assert_eq!(e.tokens.len(), e.ne.len());
            assert_eq!(e.tokens.len(), e.pos.len());
            assert_eq!(e.tokens.len(), e.lemmas.len());
            assert!(e.alignment.check_bounds(e.tokens.len()).is_ok());
            assert!(e.graph.validate().is_ok());
            for (i, p) in e.pos.iter().enumerate() {
                if p.starts_with("NN") || p.starts_with("VBZ") || p == "JJ" || p == "CD" {
                    assert!(
                        e.alignment.spans.iter().any(|s| s.start <= i && i < s.end),
                        "{}: token {i} unaligned",
                        e.id
                    );
                }
            }
        }
    }

    #[test]
    fn no_four_digit_number_outside_dates() {
        let c = generate(DEFAULT_TOY_SEED, 200, 50);
        for e in c.train.iter().chain(&c.dev) {
            for edge in e.graph.edges() {
                if let Target::Constant(v) = &edge.target {
                    if v.len() == 4 && v.chars().all(|c| c.is_ascii_digit()) {
                        assert_eq!(edge.role, "year");
                    }
                }
            }
        }
    }
}
