//! Smatch: triple-overlap F1 under the best one-to-one variable mapping.
//!
//! The mapping is searched by restarted hill-climbing. The first start is
//! seeded from concept matches, the rest are random; all randomness comes
//! from an explicit seed. [`brute_force_smatch`] enumerates every injective
//! mapping and serves as the exact oracle for small graphs.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{unquote, AmrGraph, Target};

pub const DEFAULT_RESTARTS: usize = 8;
/// Largest smaller-side variable count the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 7;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SmatchError {
    #[error("brute force needs min(|pred vars|, |gold vars|) <= {BRUTE_FORCE_LIMIT}, got {0}")]
    TooLarge(usize),
    #[error("corpus length mismatch: {pred} predicted vs {gold} gold graphs")]
    LengthMismatch { pred: usize, gold: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SmatchScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl SmatchScore {
    pub fn from_counts(matched: usize, predicted: usize, gold: usize) -> Self {
        let precision = if predicted == 0 {
            0.0
        } else {
            matched as f64 / predicted as f64
        };
        let recall = if gold == 0 { 0.0 } else { matched as f64 / gold as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        SmatchScore {
            precision,
            recall,
            f1,
            matched,
            predicted,
            gold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmatchOptions {
    pub restarts: usize,
    pub seed: u64,
    pub include_top: bool,
}

impl Default for SmatchOptions {
    fn default() -> Self {
        SmatchOptions {
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            include_top: true,
        }
    }
}

/// Triples of one graph with roles and values interned.
struct Decomposed {
    concepts: Vec<u32>,
    /// (var, role, value)
    attrs: Vec<(usize, u32, u32)>,
    /// (role, source, target)
    rels: Vec<(u32, usize, usize)>,
}

impl Decomposed {
    fn triple_count(&self) -> usize {
        self.concepts.len() + self.attrs.len() + self.rels.len()
    }
}

#[derive(Default)]
struct Interner(HashMap<String, u32>);

impl Interner {
    fn id(&mut self, s: &str) -> u32 {
        let n = self.0.len() as u32;
        *self.0.entry(s.to_string()).or_insert(n)
    }
}

fn decompose(g: &AmrGraph, include_top: bool, names: &mut Interner) -> Decomposed {
    let concepts = g.nodes().iter().map(|n| names.id(&n.concept)).collect();
    let mut attrs = Vec::new();
    let mut rels = Vec::new();
    if include_top {
        let top = names.id("\u{0}TOP");
        attrs.push((g.root().0, top, names.id(&g.node(g.root()).concept)));
    }
    for e in g.edges() {
        let role = names.id(&e.role);
        match &e.target {
            Target::Constant(c) => attrs.push((e.source.0, role, names.id(unquote(c)))),
            Target::Node(t) => rels.push((role, e.source.0, t.0)),
        }
    }
    Decomposed { concepts, attrs, rels }
}

const UNMAPPED: usize = usize::MAX;

/// Precomputed scoring tables for one (pred, gold) pair.
struct Problem {
    pred_vars: usize,
    gold_vars: usize,
    /// unary[p * gold_vars + g]: instance + attribute matches when p -> g
    unary: Vec<u32>,
    pred_rels: Vec<(u32, usize, usize)>,
    gold_rels: HashMap<(u32, usize, usize), u32>,
    pred_total: usize,
    gold_total: usize,
    pred_concepts: Vec<u32>,
    gold_concepts: Vec<u32>,
}

impl Problem {
    fn new(pred: &AmrGraph, gold: &AmrGraph, include_top: bool) -> Self {
        let mut names = Interner::default();
        let p = decompose(pred, include_top, &mut names);
        let g = decompose(gold, include_top, &mut names);
        let (np, ng) = (p.concepts.len(), g.concepts.len());
        let mut attr_p: Vec<HashMap<(u32, u32), u32>> = vec![HashMap::new(); np];
        for &(v, r, x) in &p.attrs {
            *attr_p[v].entry((r, x)).or_default() += 1;
        }
        let mut attr_g: Vec<HashMap<(u32, u32), u32>> = vec![HashMap::new(); ng];
        for &(v, r, x) in &g.attrs {
            *attr_g[v].entry((r, x)).or_default() += 1;
        }
        let mut unary = vec![0u32; np * ng];
        for a in 0..np {
            for b in 0..ng {
                let mut s = u32::from(p.concepts[a] == g.concepts[b]);
                for (k, c) in &attr_p[a] {
                    if let Some(d) = attr_g[b].get(k) {
                        s += (*c).min(*d);
                    }
                }
                unary[a * ng + b] = s;
            }
        }
        let mut gold_rels = HashMap::new();
        for &r in &g.rels {
            *gold_rels.entry(r).or_insert(0) += 1;
        }
        Problem {
            pred_vars: np,
            gold_vars: ng,
            unary,
            pred_rels: p.rels.clone(),
            gold_rels,
            pred_total: p.triple_count(),
            gold_total: g.triple_count(),
            pred_concepts: p.concepts,
            gold_concepts: g.concepts,
        }
    }

    fn score(&self, map: &[usize]) -> usize {
        let mut s = 0usize;
        for (p, &g) in map.iter().enumerate() {
            if g != UNMAPPED {
                s += self.unary[p * self.gold_vars + g] as usize;
            }
        }
        if self.pred_rels.is_empty() {
            return s;
        }
        let mut mapped: HashMap<(u32, usize, usize), u32> = HashMap::new();
        for &(r, a, b) in &self.pred_rels {
            let (ma, mb) = (map[a], map[b]);
            if ma != UNMAPPED && mb != UNMAPPED {
                *mapped.entry((r, ma, mb)).or_insert(0) += 1;
            }
        }
        for (k, c) in mapped {
            if let Some(&d) = self.gold_rels.get(&k) {
                s += c.min(d) as usize;
            }
        }
        s
    }

    fn concept_init(&self) -> Vec<usize> {
        let mut used = vec![false; self.gold_vars];
        let mut map = vec![UNMAPPED; self.pred_vars];
        for (p, slot) in map.iter_mut().enumerate() {
            if let Some(g) = (0..self.gold_vars).find(|&g| !used[g] && self.gold_concepts[g] == self.pred_concepts[p]) {
                used[g] = true;
                *slot = g;
            }
        }
        map
    }

    fn random_init(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut gold: Vec<usize> = (0..self.gold_vars).collect();
        gold.shuffle(rng);
        (0..self.pred_vars)
            .map(|p| gold.get(p).copied().unwrap_or(UNMAPPED))
            .collect()
    }

    /// First-improvement hill climbing over reassign and swap moves,
    /// scanned in a fixed variable order.
    fn climb(&self, mut map: Vec<usize>) -> (usize, Vec<usize>) {
        let mut best = self.score(&map);
        let mut used = vec![false; self.gold_vars];
        for &g in &map {
            if g != UNMAPPED {
                used[g] = true;
            }
        }
        'outer: loop {
            for p in 0..self.pred_vars {
                let old = map[p];
                for g in (0..self.gold_vars).chain(std::iter::once(UNMAPPED)) {
                    if g == old || (g != UNMAPPED && used[g]) {
                        continue;
                    }
                    map[p] = g;
                    let s = self.score(&map);
                    if s > best {
                        best = s;
                        if old != UNMAPPED {
                            used[old] = false;
                        }
                        if g != UNMAPPED {
                            used[g] = true;
                        }
                        continue 'outer;
                    }
                    map[p] = old;
                }
                for q in p + 1..self.pred_vars {
                    if map[p] == map[q] {
                        continue;
                    }
                    map.swap(p, q);
                    let s = self.score(&map);
                    if s > best {
                        best = s;
                        continue 'outer;
                    }
                    map.swap(p, q);
                }
            }
            return (best, map);
        }
    }

    fn brute_force(&self) -> usize {
        let mut best = 0;
        if self.pred_vars <= self.gold_vars {
            let mut map = vec![UNMAPPED; self.pred_vars];
            let mut used = vec![false; self.gold_vars];
            self.enumerate_pred(0, &mut map, &mut used, &mut best);
        } else {
            let mut inv = vec![UNMAPPED; self.gold_vars];
            let mut used = vec![false; self.pred_vars];
            let mut map = vec![UNMAPPED; self.pred_vars];
            self.enumerate_gold(0, &mut inv, &mut used, &mut map, &mut best);
        }
        best
    }

    fn enumerate_pred(&self, p: usize, map: &mut Vec<usize>, used: &mut Vec<bool>, best: &mut usize) {
        if p == self.pred_vars {
            *best = (*best).max(self.score(map));
            return;
        }
        map[p] = UNMAPPED;
        self.enumerate_pred(p + 1, map, used, best);
        for g in 0..self.gold_vars {
            if !used[g] {
                used[g] = true;
                map[p] = g;
                self.enumerate_pred(p + 1, map, used, best);
                used[g] = false;
            }
        }
        map[p] = UNMAPPED;
    }

    fn enumerate_gold(
        &self,
        g: usize,
        inv: &mut Vec<usize>,
        used: &mut Vec<bool>,
        map: &mut Vec<usize>,
        best: &mut usize,
    ) {
        if g == self.gold_vars {
            map.iter_mut().for_each(|m| *m = UNMAPPED);
            for (gv, &p) in inv.iter().enumerate() {
                if p != UNMAPPED {
                    map[p] = gv;
                }
            }
            *best = (*best).max(self.score(map));
            return;
        }
        inv[g] = UNMAPPED;
        self.enumerate_gold(g + 1, inv, used, map, best);
        for p in 0..self.pred_vars {
            if !used[p] {
                used[p] = true;
                inv[g] = p;
                self.enumerate_gold(g + 1, inv, used, map, best);
                used[p] = false;
            }
        }
        inv[g] = UNMAPPED;
    }
}

pub fn smatch_score(pred: &AmrGraph, gold: &AmrGraph, restarts: usize, seed: u64) -> SmatchScore {
    smatch_with(
        pred,
        gold,
        &SmatchOptions {
            restarts,
            seed,
            include_top: true,
        },
    )
}

pub fn smatch_with(pred: &AmrGraph, gold: &AmrGraph, opts: &SmatchOptions) -> SmatchScore {
    let prob = Problem::new(pred, gold, opts.include_top);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = 0;
    for r in 0..opts.restarts.max(1) {
        let init = if r == 0 {
            prob.concept_init()
        } else {
            prob.random_init(&mut rng)
        };
        let (s, _) = prob.climb(init);
        best = best.max(s);
        if best == prob.pred_total.min(prob.gold_total) {
            break;
        }
    }
    SmatchScore::from_counts(best, prob.pred_total, prob.gold_total)
}

pub fn brute_force_smatch(pred: &AmrGraph, gold: &AmrGraph) -> Result<SmatchScore, SmatchError> {
    brute_force_with(pred, gold, true)
}

pub fn brute_force_with(pred: &AmrGraph, gold: &AmrGraph, include_top: bool) -> Result<SmatchScore, SmatchError> {
    let small = pred.node_count().min(gold.node_count());
    if small > BRUTE_FORCE_LIMIT {
        return Err(SmatchError::TooLarge(small));
    }
    let prob = Problem::new(pred, gold, include_top);
    Ok(SmatchScore::from_counts(
        prob.brute_force(),
        prob.pred_total,
        prob.gold_total,
    ))
}

/// Micro-averaged corpus score: triple counts are summed before computing P/R/F1.
/// Sentence `i` is scored with seed `seed + i`.
pub fn corpus_smatch(
    pred: &[AmrGraph],
    gold: &[AmrGraph],
    opts: &SmatchOptions,
) -> Result<(SmatchScore, Vec<SmatchScore>), SmatchError> {
    if pred.len() != gold.len() {
        return Err(SmatchError::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let per: Vec<SmatchScore> = pred
        .iter()
        .zip(gold)
        .enumerate()
        .map(|(i, (p, g))| {
            smatch_with(
                p,
                g,
                &SmatchOptions {
                    seed: opts.seed.wrapping_add(i as u64),
                    ..*opts
                },
            )
        })
        .collect();
    let (m, p, g) = per
        .iter()
        .fold((0, 0, 0), |(m, p, g), s| (m + s.matched, p + s.predicted, g + s.gold));
    Ok((SmatchScore::from_counts(m, p, g), per))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penman::parse_penman;

    fn g(s: &str) -> AmrGraph {
        parse_penman(s).unwrap()
    }

    #[test]
    fn self_score_is_one() {
        let a = g("(d / describe-01 :ARG0 (p / person :name (n / name :op1 \"Ryan\")) :ARG1 p :ARG2 (x / genius))");
        let s = smatch_score(&a, &a, 8, 0);
        assert_eq!(s.f1, 1.0);
        assert_eq!(s.matched, 10);
        assert_eq!(brute_force_smatch(&a, &a).unwrap().f1, 1.0);
    }

    #[test]
    fn disjoint_concepts_score_zero() {
        let s = smatch_score(&g("(a / boy)"), &g("(b / girl)"), 8, 0);
        assert_eq!(s.matched, 0);
        assert_eq!(s.f1, 0.0);
    }

    #[test]
    fn variable_names_do_not_matter() {
        let s = brute_force_smatch(&g("(a / boy)"), &g("(zz / boy)")).unwrap();
        assert_eq!(s.f1, 1.0);
    }

    #[test]
    fn partial_match_counts() {
        // pred: want-01 ARG0 boy; gold: want-01 ARG0 girl
        let p = g("(w / want-01 :ARG0 (b / boy))");
        let q = g("(w / want-01 :ARG0 (b / girl))");
        // instance want, TOP, relation ARG0 match; boy/girl instance does not
        let s = smatch_score(&p, &q, 4, 1);
        assert_eq!(s.matched, 3);
        assert_eq!((s.predicted, s.gold), (4, 4));
        assert!((s.f1 - 0.75).abs() < 1e-12);
        let s = smatch_with(
            &p,
            &q,
            &SmatchOptions {
                include_top: false,
                ..Default::default()
            },
        );
        assert_eq!((s.matched, s.predicted), (2, 3));
    }

    #[test]
    fn corpus_micro_average() {
        let a = g("(a / boy)");
        let b = g("(b / girl)");
        let (s, per) = corpus_smatch(&[a.clone(), a.clone()], &[a.clone(), b], &SmatchOptions::default()).unwrap();
        assert_eq!(per.len(), 2);
        assert!((s.f1 - 0.5).abs() < 1e-12);
        assert!(matches!(
            corpus_smatch(std::slice::from_ref(&a), &[], &SmatchOptions::default()),
            Err(SmatchError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn brute_force_limit() {
        let big =
            g("(a / a :op1 (b / b) :op2 (c / c) :op3 (d / d) :op4 (e / e) :op5 (f / f) :op6 (h / h) :op7 (i / i))");
        assert_eq!(brute_force_smatch(&big, &big), Err(SmatchError::TooLarge(8)));
        assert!(brute_force_smatch(&big, &g("(a / a)")).is_ok());
    }

    #[test]
    fn asymmetric_sizes() {
        let p = g("(a / and :op1 (b / boy) :op2 (c / girl) :op3 (d / dog))");
        let q = g("(x / and :op2 (y / girl))");
        let bf = brute_force_smatch(&p, &q).unwrap();
        let hc = smatch_score(&p, &q, 8, 3);
        assert_eq!(bf.matched, 4);
        assert_eq!(hc.matched, bf.matched);
        let bf2 = brute_force_smatch(&q, &p).unwrap();
        assert_eq!(bf2.matched, 4);
    }
}
