//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Run with `cargo test -p amrseq-cli --test acceptance`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use amrseq::align::{reference_attention, AttentionMode, PositionAlignment};
use amrseq::categorize::{build_category_model, categorize_pair, recover, CategoryConfig, TrainingExample};
use amrseq::neural::{gradient_check, loss, Dims, Example, ParamSet, Vocab};
use amrseq::smatch::{brute_force_smatch, corpus_smatch, smatch_score};
use amrseq::synth::{corrupt, random_graph, reentrant_edge_labels, rename_variables, tree_part};
use amrseq::{delinearize, linearize, repair_brackets, AmrGraph, TokenSeq};
use amrseq_cli::config::{PipelineConfig, SplitPaths};
use amrseq_cli::pipeline::{cmd_decode, cmd_preprocess, cmd_sweep, cmd_train, load_split, prepare, sweep_table};
use amrseq_cli::toy::{self, ToyCorpus};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GRAPHS: u64 = 1000;
const CORRUPTIONS: u64 = 1000;
const RECOVER_MIN: f64 = 0.99;
const GRAD_TOL: f64 = 1e-4;
const ROW_TOL: f64 = 1e-9;
const MEMORIZE_PAIRS: usize = 50;
const MEMORIZE_MIN_F1: f64 = 0.95;
const SMATCH_PAIRS: u64 = 100;
const SMATCH_EXACT_MIN: usize = 97;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, start: Instant) -> Result<String, String> {
    let t = start.elapsed();
    if t <= limit {
        Ok(format!("{:.2}s (limit {}s)", t.as_secs_f64(), limit.as_secs()))
    } else {
        Err(format!("{:.2}s exceeds {}s", t.as_secs_f64(), limit.as_secs()))
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn roundtrip() -> Outcome {
    let start = Instant::now();
    let mut unique_fail = 0;
    let mut dup_fail = 0;
    for seed in 0..GRAPHS {
        let g = random_graph(&mut rng(seed), 12, true);
        if !delinearize(&linearize(&g)).is_ok_and(|b| b.isomorphic(&g)) {
            unique_fail += 1;
        }
        let g = random_graph(&mut rng(seed + GRAPHS), 12, false);
        let ok = delinearize(&linearize(&g)).is_ok_and(|b| {
            b.node_count() == g.node_count()
                && b.edges().len() == g.edges().len()
                && tree_part(&b).isomorphic(&tree_part(&g))
                && reentrant_edge_labels(&b) == reentrant_edge_labels(&g)
        });
        if !ok {
            dup_fail += 1;
        }
    }
    let time = within(Duration::from_secs(10), start)?;
    check(
        unique_fail == 0 && dup_fail == 0,
        format!("{GRAPHS} unique-label graphs, {unique_fail} failures; {GRAPHS} duplicate-label graphs, {dup_fail} failures; {time}"),
    )
}

fn repair() -> Outcome {
    let start = Instant::now();
    let mut undecodable = 0;
    let mut unstable = 0;
    for seed in 0..CORRUPTIONS {
        let mut r = rng(seed);
        let g = random_graph(&mut r, 12, false);
        let fixed = repair_brackets(&corrupt(&mut r, &linearize(&g)));
        if delinearize(&fixed).is_err() {
            undecodable += 1;
        }
        if repair_brackets(&fixed) != fixed {
            unstable += 1;
        }
    }
    let time = within(Duration::from_secs(10), start)?;
    check(
        undecodable == 0 && unstable == 0,
        format!("{CORRUPTIONS} corruptions, {undecodable} undecodable, {unstable} not idempotent; {time}"),
    )
}

fn categorization(c: &ToyCorpus) -> Outcome {
    let threshold = CategoryConfig::default().threshold;
    let ex: Vec<TrainingExample> = c
        .train
        .iter()
        .map(|e| TrainingExample {
            tokens: &e.tokens,
            graph: &e.graph,
            alignment: &e.alignment,
        })
        .collect();
    let m = build_category_model(&ex, &CategoryConfig { threshold }, &c.verbalization).map_err(|e| e.to_string())?;
    let mut total = 0;
    let mut exact = 0;
    let mut stray = BTreeSet::new();
    for e in c.train.iter().chain(&c.dev) {
        total += 1;
        let p = categorize_pair(&e.tokens, Some(&e.lemmas), &e.graph, &e.alignment, &m)
            .map_err(|err| format!("{}: {err}", e.id))?;
        let back = recover(&p.target, &p.table, &m);
        if back.isomorphic(&e.graph) && smatch_score(&back, &e.graph, 4, 0).f1 == 1.0 {
            exact += 1;
        }
        for t in p.target.tokens() {
            if !m.is_reduced_symbol(t) {
                stray.insert(t.to_string());
            }
        }
    }
    let rate = exact as f64 / total as f64;
    check(
        rate >= RECOVER_MIN && stray.is_empty(),
        format!(
            "n={threshold}: {exact}/{total} recovered exactly ({:.1}%, need {:.0}%); {} symbols break the reduction invariant{}",
            100.0 * rate,
            100.0 * RECOVER_MIN,
            stray.len(),
            if stray.is_empty() { String::new() } else { format!(" {stray:?}") }
        ),
    )
}

fn gradients(c: &ToyCorpus) -> Outcome {
    let start = Instant::now();
    let cfg = PipelineConfig::default();
    let split = toy_split(c, 5);
    let m = amrseq_cli::pipeline::build_model(&cfg, &split).map_err(|e| e.to_string())?;
    let prepared = prepare(&cfg, &split, &m).map_err(|e| e.to_string())?;
    let targets: Vec<Vec<String>> = prepared.iter().map(|p| p.target.rendered()).collect();
    let src = Vocab::build(prepared.iter().map(|p| p.source.as_slice()), 1000);
    let tgt = Vocab::build(targets.iter().map(Vec::as_slice), 1000);
    let dims = Dims {
        src_vocab: src.len(),
        tgt_vocab: tgt.len(),
        embed: 8,
        hidden: 8,
        attn: 8,
    };
    let mut worst: f64 = 0.0;
    let mut bitwise = true;
    for (k, p) in prepared.iter().enumerate() {
        let ex = Example {
            source: src.encode(&p.source),
            target: tgt.encode(&targets[k]),
            reference: Some(p.reference.clone()),
        };
        let params = ParamSet::init_uniform(dims, 1.0, &mut rng(k as u64 + 11));
        for lambda in [0.0, 0.3] {
            let r = gradient_check(&params, &ex, lambda).map_err(|e| e.to_string())?;
            worst = worst.max(r.max_relative_error);
        }
        let l = loss(&params, &ex, 0.0).map_err(|e| e.to_string())?;
        let unsupervised = loss(
            &params,
            &Example {
                reference: None,
                ..ex.clone()
            },
            0.0,
        )
        .map_err(|e| e.to_string())?;
        bitwise &= l.loss.to_bits() == l.nll.to_bits() && l.loss.to_bits() == unsupervised.loss.to_bits();
    }
    let time = within(Duration::from_secs(60), start)?;
    check(
        worst < GRAD_TOL && bitwise,
        format!(
            "{} toy pairs at dims 8, lambda 0 and 0.3: max relative error {worst:.2e} (tol {GRAD_TOL:.0e}); lambda=0 loss equals mean NLL bitwise: {bitwise}; {time}",
            prepared.len()
        ),
    )
}

fn attention(c: &ToyCorpus) -> Outcome {
    let seq = |s: &str| TokenSeq::parse(s);
    let aligned = PositionAlignment {
        rows: BTreeMap::from([(1, BTreeSet::from([2, 3]))]),
    };
    let t = seq("-TOP-( describe-01 :ARG1( genius )ARG1 )-TOP-");
    let half = reference_attention(&aligned, 5, &t, AttentionMode::Standard)
        .map_err(|e| e.to_string())?
        .row(1);
    let ex1 = half == vec![0.0, 0.0, 0.5, 0.5, 0.0];
    let t = seq("-TOP-( see-01 :ARG0( boy )ARG0 )-TOP-");
    let none = PositionAlignment::default();
    let even = reference_attention(&none, 4, &t, AttentionMode::Standard)
        .map_err(|e| e.to_string())?
        .row(2);
    let ex2 = even == vec![0.25; 4];
    let zero = reference_attention(&none, 4, &t, AttentionMode::NoRelationAlign)
        .map_err(|e| e.to_string())?
        .row(2);
    let ex3 = zero == vec![0.0; 4];

    let cfg = PipelineConfig::default();
    let split = toy_split(c, c.train.len());
    let m = amrseq_cli::pipeline::build_model(&cfg, &split).map_err(|e| e.to_string())?;
    let standard = prepare(&cfg, &split, &m).map_err(|e| e.to_string())?;
    let ablated_cfg = PipelineConfig {
        attention_mode: AttentionMode::NoRelationAlign,
        ..cfg.clone()
    };
    let ablated = prepare(&ablated_cfg, &split, &m).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    let mut misplaced = 0;
    for (s, a) in standard.iter().zip(&ablated) {
        for row in s.reference.dense() {
            rows += 1;
            worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
        }
        for (j, tok) in s.target.tokens().iter().enumerate() {
            let row = a.reference.row(j);
            let is_zero = row.iter().all(|&x| x == 0.0);
            let sum_ok = (row.iter().sum::<f64>() - 1.0).abs() <= ROW_TOL;
            if is_zero != tok.is_structural() || (!is_zero && !sum_ok) || (!is_zero && row != s.reference.row(j)) {
                misplaced += 1;
            }
        }
    }
    check(
        ex1 && ex2 && ex3 && worst <= ROW_TOL && misplaced == 0,
        format!(
            "half/half example {ex1}, uniform 1/m example {ex2}, ablated example {ex3}; {rows} standard rows, max |sum-1| {worst:.1e} (tol {ROW_TOL:.0e}); ablation rows wrong: {misplaced}"
        ),
    )
}

fn toy_split(c: &ToyCorpus, n: usize) -> amrseq_cli::pipeline::Split {
    let entries = c.train[..n]
        .iter()
        .map(|e| amrseq::corpus::CorpusEntry::new(e.tokens.clone(), e.graph.clone()))
        .collect();
    amrseq_cli::pipeline::Split {
        entries,
        alignments: c.train[..n].iter().map(|e| e.alignment.clone()).collect(),
        ne: Some(c.train[..n].iter().map(|e| e.ne.clone()).collect()),
        pos: Some(c.train[..n].iter().map(|e| e.pos.clone()).collect()),
        lemmas: Some(c.train[..n].iter().map(|e| e.lemmas.clone()).collect()),
    }
}

fn split_paths(name: &str) -> SplitPaths {
    SplitPaths {
        corpus: Some(format!("{name}.amr").into()),
        alignments: Some(format!("{name}.align").into()),
        ne: Some(format!("{name}.ne").into()),
        pos: Some(format!("{name}.pos").into()),
        lemmas: Some(format!("{name}.lemma").into()),
    }
}

/// Toy corpus written to `dir`, with a config pointing at it.
fn toy_config(dir: &Path, train: usize, dev: usize) -> Result<PipelineConfig, String> {
    toy::write_toy(dir, &toy::generate(toy::DEFAULT_TOY_SEED, train, dev)).map_err(|e| format!("{e:#}"))?;
    let mut cfg = PipelineConfig {
        base_dir: dir.to_path_buf(),
        train: split_paths("train"),
        ..PipelineConfig::default()
    };
    if dev > 0 {
        cfg.dev = split_paths("dev");
    }
    cfg.verbalization = Some("verbalization.txt".into());
    cfg.category.threshold = 10;
    cfg.smatch.restarts = 4;
    cfg.model.dropout = 0.0;
    cfg.model.batch_size = 4;
    cfg.model.learning_rate = 0.5;
    cfg.model.init_scale = 0.08;
    Ok(cfg)
}

fn memorize() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = toy_config(dir.path(), MEMORIZE_PAIRS, 0)?;
    cfg.model.embed_dim = 64;
    cfg.model.hidden_dim = 64;
    cfg.model.attn_dim = 64;
    cfg.model.epochs = 300;
    cfg.model.seed = 1;
    cmd_preprocess(&cfg).map_err(|e| format!("{e:#}"))?;
    let trained = cmd_train(&cfg).map_err(|e| format!("{e:#}"))?;
    let split = load_split(&cfg, &cfg.train).map_err(|e| format!("{e:#}"))?;
    let pred = cmd_decode(&cfg, &split.decode_input()).map_err(|e| format!("{e:#}"))?;
    let (score, _) = corpus_smatch(&pred, &split.graphs(), &cfg.smatch).map_err(|e| e.to_string())?;
    let time = within(Duration::from_secs(15 * 60), start)?;
    let last = trained.report.log.last().map(|l| l.train_loss).unwrap_or(f64::NAN);
    check(
        score.f1 >= MEMORIZE_MIN_F1,
        format!(
            "{MEMORIZE_PAIRS} pairs, dims 64, {} epochs: train Smatch F1 {:.4} (need {MEMORIZE_MIN_F1}), final train loss {last:.4}; {time}",
            cfg.model.epochs, score.f1
        ),
    )
}

fn supervision() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = toy_config(dir.path(), toy::TOY_TRAIN, toy::TOY_DEV)?;
    cfg.model.embed_dim = 32;
    cfg.model.hidden_dim = 32;
    cfg.model.attn_dim = 32;
    cfg.model.epochs = 20;
    cmd_preprocess(&cfg).map_err(|e| format!("{e:#}"))?;
    let mut parts = Vec::new();
    let mut ok = true;
    for seed in [1, 2] {
        let mut theta = [0.0; 2];
        for (k, lambda) in [0.3, 0.0].into_iter().enumerate() {
            let mut c = cfg.clone();
            c.model.seed = seed;
            c.model.lambda = lambda;
            let r = cmd_train(&c).map_err(|e| format!("{e:#}"))?;
            theta[k] = r.report.log.last().map(|l| l.mean_theta).unwrap_or(f64::NAN);
        }
        ok &= theta[0] < theta[1];
        parts.push(format!(
            "seed {seed}: {:.4} (lambda 0.3) vs {:.4} (lambda 0)",
            theta[0], theta[1]
        ));
    }
    check(ok, format!("final-epoch dev mean theta, {}", parts.join("; ")))
}

fn smatch(c: &ToyCorpus) -> Outcome {
    let start = Instant::now();
    let mut equal = 0;
    let mut exceeded = 0;
    let mut renaming_broken = 0;
    for seed in 0..SMATCH_PAIRS {
        let mut r = rng(seed);
        let a = random_graph(&mut r, 6, false);
        let b = random_graph(&mut r, 6, false);
        let hill = smatch_score(&a, &b, 8, seed);
        let exact = brute_force_smatch(&a, &b).map_err(|e| e.to_string())?;
        if hill.matched == exact.matched {
            equal += 1;
        }
        if hill.matched > exact.matched {
            exceeded += 1;
        }
        let (ra, rb) = (rename_variables(&a, &mut r), rename_variables(&b, &mut r));
        let renamed = smatch_score(&ra, &rb, 8, seed);
        let renamed_exact = brute_force_smatch(&ra, &rb).map_err(|e| e.to_string())?;
        if renamed.matched != hill.matched || renamed_exact.matched != exact.matched {
            renaming_broken += 1;
        }
    }
    let graphs: Vec<&AmrGraph> = c.train.iter().chain(&c.dev).map(|e| &e.graph).collect();
    let not_self = graphs.iter().filter(|g| smatch_score(g, g, 8, 0).f1 != 1.0).count();
    let time = within(Duration::from_secs(60), start)?;
    check(
        equal >= SMATCH_EXACT_MIN && exceeded == 0 && not_self == 0 && renaming_broken == 0,
        format!(
            "hill-climbing equals oracle on {equal}/{SMATCH_PAIRS} (need {SMATCH_EXACT_MIN}), exceeds it on {exceeded}; self-score below 1 on {not_self}/{} toy graphs; renaming changed {renaming_broken} scores; {time}",
            graphs.len()
        ),
    )
}

fn sweep() -> Outcome {
    let thresholds = [0, 10, 50];
    let mut tables = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut cfg = toy_config(dir.path(), toy::TOY_TRAIN, toy::TOY_DEV)?;
        cfg.model.embed_dim = 16;
        cfg.model.hidden_dim = 16;
        cfg.model.attn_dim = 16;
        cfg.model.epochs = 5;
        let rows = cmd_sweep(&cfg, &thresholds).map_err(|e| format!("{e:#}"))?;
        tables.push((rows.len(), sweep_table(&rows)));
    }
    let (n, table) = &tables[0];
    let lines: Vec<&str> = table.lines().collect();
    let well_formed = *n == thresholds.len()
        && lines.len() == thresholds.len() + 1
        && lines.iter().all(|l| l.split('\t').count() == 6)
        && lines[1..].iter().zip(thresholds).all(|(l, t)| {
            let f: Vec<&str> = l.split('\t').collect();
            f[0] == t.to_string()
                && f[3..]
                    .iter()
                    .all(|x| x.parse::<f64>().is_ok_and(|v| (0.0..=1.0).contains(&v)))
        });
    let deterministic = tables[0] == tables[1];
    let f1s: Vec<&str> = lines[1..].iter().filter_map(|l| l.split('\t').nth(5)).collect();
    check(
        well_formed && deterministic,
        format!("{n} rows for n in {thresholds:?}, well-formed {well_formed}, identical across two runs {deterministic}; F1 {f1s:?}"),
    )
}

fn main() {
    let corpus = toy::generate(toy::DEFAULT_TOY_SEED, toy::TOY_TRAIN, toy::TOY_DEV);
    let criteria: Vec<Criterion> = vec![
        ("linearization roundtrip", Box::new(roundtrip)),
        ("repair totality", Box::new(repair)),
        ("categorization roundtrip", Box::new(|| categorization(&corpus))),
        ("gradient check", Box::new(|| gradients(&corpus))),
        ("reference attention", Box::new(|| attention(&corpus))),
        ("memorization", Box::new(memorize)),
        ("supervision lowers theta", Box::new(supervision)),
        ("smatch validity", Box::new(|| smatch(&corpus))),
        ("threshold sweep", Box::new(sweep)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("criterion {} {name}: PASS: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} {name}: FAIL: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
