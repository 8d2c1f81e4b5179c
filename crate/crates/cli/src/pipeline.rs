//! The five pipeline commands. Every artifact lives under the configured
//! model directory:
//!
//! | file | written by | content |
//! |------|------------|---------|
//! | `category.model` | preprocess | serialized category model |
//! | `{train,dev}.src` / `.tgt` | preprocess | categorized parallel text, one sentence per line |
//! | `{train,dev}.d` | preprocess | table D per sentence |
//! | `{train,dev}.att` | preprocess | reference attention archive, one sentence per line |
//! | `src.vocab`, `tgt.vocab` | train | one symbol per line, index = line number |
//! | `best.ckpt`, `final.ckpt` | train | parameter checkpoints |
//! | `train.log` | train | per-epoch log |

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use amrseq::align::{project_alignment, reference_attention, with_end_row, Alignment, ReferenceAttention};
use amrseq::categorize::{
    build_category_model, categorize_pair, categorize_source, recover, CategoryLabel, CategoryModel,
    SentenceCategoryMap, SourceAnnotation, TrainingExample,
};
use amrseq::corpus::{read_corpus, read_tags, CorpusEntry};
use amrseq::linearize::{linearize_traced, LinToken, TokenSeq, UNKNOWN_CONCEPT};
use amrseq::neural::{self, Example, ParamSet, TrainReport, Vocab};
use amrseq::smatch::{corpus_smatch, SmatchOptions, SmatchScore};
use amrseq::{emit_penman, AmrGraph};
use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{exists, PipelineConfig, SplitPaths};

/// A corpus split with its alignments and optional sidecar layers, all
/// checked to have one line per sentence.
#[derive(Debug, Clone)]
pub struct Split {
    pub entries: Vec<CorpusEntry>,
    pub alignments: Vec<Alignment>,
    pub ne: Option<Vec<Vec<String>>>,
    pub pos: Option<Vec<Vec<String>>>,
    pub lemmas: Option<Vec<Vec<String>>>,
}

impl Split {
    pub fn graphs(&self) -> Vec<AmrGraph> {
        self.entries.iter().map(|e| e.graph.clone()).collect()
    }

    pub fn decode_input(&self) -> DecodeInput {
        DecodeInput {
            tokens: self.entries.iter().map(|e| e.tokens.clone()).collect(),
            ne: self.ne.clone(),
            pos: self.pos.clone(),
            lemmas: self.lemmas.clone(),
        }
    }
}

fn read(p: &Path) -> Result<String> {
    exists(p)?;
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn read_sidecar(p: &Path, want: usize) -> Result<Vec<Vec<String>>> {
    let tags = read_tags(&read(p)?).with_context(|| format!("in {}", p.display()))?;
    if tags.len() != want {
        bail!("{}: {} lines for {} sentences", p.display(), tags.len(), want);
    }
    Ok(tags)
}

pub fn load_split(cfg: &PipelineConfig, sp: &SplitPaths) -> Result<Split> {
    let corpus_path = cfg.resolve(sp.corpus.as_deref().context("corpus path missing")?);
    let align_path = cfg.resolve(sp.alignments.as_deref().context("alignment path missing")?);
    exists(&align_path)?;
    let entries = read_corpus(&read(&corpus_path)?).with_context(|| format!("in {}", corpus_path.display()))?;
    let align_text = read(&align_path)?;
    let lines: Vec<&str> = align_text.lines().collect();
    if lines.len() != entries.len() {
        bail!(
            "{}: {} lines for {} sentences",
            align_path.display(),
            lines.len(),
            entries.len()
        );
    }
    let alignments = lines
        .iter()
        .zip(&entries)
        .enumerate()
        .map(|(i, (l, e))| {
            let a = Alignment::parse_line(l, &e.graph)
                .with_context(|| format!("{}: line {}", align_path.display(), i + 1))?;
            a.check_bounds(e.tokens.len())
                .with_context(|| format!("{}: line {}", align_path.display(), i + 1))?;
            Ok(a)
        })
        .collect::<Result<Vec<_>>>()?;
    let side = |p: &Option<PathBuf>| -> Result<Option<Vec<Vec<String>>>> {
        p.as_ref()
            .map(|p| read_sidecar(&cfg.resolve(p), entries.len()))
            .transpose()
    };
    Ok(Split {
        ne: side(&sp.ne)?,
        pos: side(&sp.pos)?,
        lemmas: side(&sp.lemmas)?,
        entries,
        alignments,
    })
}

/// Sentences to decode with their optional tag layers.
#[derive(Debug, Clone, Default)]
pub struct DecodeInput {
    pub tokens: Vec<Vec<String>>,
    pub ne: Option<Vec<Vec<String>>>,
    pub pos: Option<Vec<Vec<String>>>,
    pub lemmas: Option<Vec<Vec<String>>>,
}

impl DecodeInput {
    /// Whitespace-tokenized sentences, one per line, plus optional sidecars.
    pub fn from_files(input: &Path, ne: Option<&Path>, pos: Option<&Path>, lemmas: Option<&Path>) -> Result<Self> {
        let tokens: Vec<Vec<String>> = read(input)?
            .lines()
            .map(|l| l.split_whitespace().map(String::from).collect())
            .collect();
        let n = tokens.len();
        let side = |p: Option<&Path>| p.map(|p| read_sidecar(p, n)).transpose();
        Ok(DecodeInput {
            ne: side(ne)?,
            pos: side(pos)?,
            lemmas: side(lemmas)?,
            tokens,
        })
    }
}

/// One categorized training or development pair, ready for the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub source: Vec<String>,
    pub target: TokenSeq,
    pub table: SentenceCategoryMap,
    pub reference: ReferenceAttention,
}

pub fn build_model(cfg: &PipelineConfig, train: &Split) -> Result<CategoryModel> {
    let verbal = match &cfg.verbalization {
        Some(p) => read(&cfg.resolve(p))?,
        None => String::new(),
    };
    let ex: Vec<TrainingExample> = train
        .entries
        .iter()
        .zip(&train.alignments)
        .map(|(e, a)| TrainingExample {
            tokens: &e.tokens,
            graph: &e.graph,
            alignment: a,
        })
        .collect();
    Ok(build_category_model(&ex, &cfg.category, &verbal)?)
}

pub fn prepare(cfg: &PipelineConfig, split: &Split, m: &CategoryModel) -> Result<Vec<Prepared>> {
    let mut out = Vec::with_capacity(split.entries.len());
    for (i, (e, a)) in split.entries.iter().zip(&split.alignments).enumerate() {
        let lemmas = split.lemmas.as_ref().map(|l| l[i].as_slice());
        let (source, target, table, pos) = if cfg.baseline {
            let lin = linearize_traced(&e.graph);
            let pos = project_alignment(a, &lin).with_context(|| format!("sentence {}", i + 1))?;
            (e.tokens.clone(), lin.tokens, SentenceCategoryMap::default(), pos)
        } else {
            let p =
                categorize_pair(&e.tokens, lemmas, &e.graph, a, m).with_context(|| format!("sentence {}", i + 1))?;
            (p.source, p.target, p.table, p.alignment)
        };
        let reference = with_end_row(
            reference_attention(&pos, source.len(), &target, cfg.attention_mode)
                .with_context(|| format!("sentence {}", i + 1))?,
            cfg.attention_mode,
        );
        out.push(Prepared {
            source,
            target,
            table,
            reference,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessReport {
    pub train_pairs: usize,
    pub dev_pairs: usize,
    pub raw_source_vocab: usize,
    pub raw_target_vocab: usize,
    pub source_vocab: usize,
    pub target_vocab: usize,
    /// Category symbols on the training target side, by base (`-SURF-`, `DATE`, ...).
    pub target_categories: BTreeMap<String, usize>,
}

impl PreprocessReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "pairs: {} train, {} dev\nsource vocabulary: {} raw -> {} categorized\ntarget vocabulary: {} raw -> {} categorized\n",
            self.train_pairs, self.dev_pairs, self.raw_source_vocab, self.source_vocab, self.raw_target_vocab, self.target_vocab
        );
        for (k, n) in &self.target_categories {
            s.push_str(&format!("target {k}: {n}\n"));
        }
        s
    }
}

fn write(p: &Path, body: impl AsRef<[u8]>) -> Result<()> {
    fs::write(p, body).with_context(|| format!("writing {}", p.display()))
}

fn write_prepared(dir: &Path, split: &str, items: &[Prepared]) -> Result<()> {
    let mut src = String::new();
    let mut tgt = String::new();
    let mut d = String::new();
    let mut att = String::new();
    for p in items {
        src.push_str(&p.source.join(" "));
        src.push('\n');
        tgt.push_str(&p.target.to_string());
        tgt.push('\n');
        d.push_str(&p.table.to_line());
        d.push('\n');
        att.push_str(&p.reference.to_archive_line());
        att.push('\n');
    }
    write(&dir.join(format!("{split}.src")), src)?;
    write(&dir.join(format!("{split}.tgt")), tgt)?;
    write(&dir.join(format!("{split}.d")), d)?;
    write(&dir.join(format!("{split}.att")), att)
}

fn distinct<'a>(seqs: impl Iterator<Item = &'a str>) -> usize {
    seqs.collect::<BTreeSet<_>>().len()
}

pub fn cmd_preprocess(cfg: &PipelineConfig) -> Result<PreprocessReport> {
    cfg.validate_inputs()?;
    let train = load_split(cfg, &cfg.train)?;
    let dev = match cfg.dev.corpus {
        Some(_) => Some(load_split(cfg, &cfg.dev)?),
        None => None,
    };
    let m = build_model(cfg, &train)?;
    let prepared = prepare(cfg, &train, &m)?;
    let dir = cfg.resolve(&cfg.model_dir);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write(&dir.join("category.model"), m.to_text())?;
    write_prepared(&dir, "train", &prepared)?;
    let mut dev_pairs = 0;
    if let Some(dev) = &dev {
        let p = prepare(cfg, dev, &m)?;
        dev_pairs = p.len();
        write_prepared(&dir, "dev", &p)?;
    }

    let raw_targets: Vec<Vec<String>> = train
        .entries
        .iter()
        .map(|e| linearize_traced(&e.graph).tokens.rendered())
        .collect();
    let targets: Vec<Vec<String>> = prepared.iter().map(|p| p.target.rendered()).collect();
    let mut target_categories = BTreeMap::new();
    for t in prepared.iter().flat_map(|p| p.target.tokens()) {
        if let LinToken::Concept(c) = t {
            if let Some(l) = CategoryLabel::parse(c).filter(|l| l.index.is_some()) {
                *target_categories.entry(l.base.to_string()).or_insert(0) += 1;
            }
        }
    }
    let report = PreprocessReport {
        train_pairs: prepared.len(),
        dev_pairs,
        raw_source_vocab: distinct(train.entries.iter().flat_map(|e| e.tokens.iter().map(String::as_str))),
        raw_target_vocab: distinct(raw_targets.iter().flatten().map(String::as_str)),
        source_vocab: distinct(prepared.iter().flat_map(|p| p.source.iter().map(String::as_str))),
        target_vocab: distinct(targets.iter().flatten().map(String::as_str)),
        target_categories,
    };
    write(&dir.join("preprocess.txt"), report.summary())?;
    Ok(report)
}

fn read_lines(p: &Path) -> Result<Vec<String>> {
    Ok(read(p)?.lines().map(String::from).collect())
}

fn load_prepared(cfg: &PipelineConfig, split: &str) -> Result<Option<Vec<Prepared>>> {
    let src_path = cfg.model_path(&format!("{split}.src"));
    if split == "dev" && !src_path.is_file() {
        return Ok(None);
    }
    let src = read_lines(&src_path)?;
    let tgt = read_lines(&cfg.model_path(&format!("{split}.tgt")))?;
    let d = read_lines(&cfg.model_path(&format!("{split}.d")))?;
    let att = read_lines(&cfg.model_path(&format!("{split}.att")))?;
    if tgt.len() != src.len() || d.len() != src.len() || att.len() != src.len() {
        bail!("{split}: preprocessed files have different line counts; rerun preprocess");
    }
    let mut out = Vec::with_capacity(src.len());
    for i in 0..src.len() {
        out.push(Prepared {
            source: src[i].split_whitespace().map(String::from).collect(),
            target: TokenSeq::parse(&tgt[i]),
            table: SentenceCategoryMap::from_line(&d[i]).with_context(|| format!("{split}.d line {}", i + 1))?,
            reference: ReferenceAttention::from_archive_line(&att[i])
                .with_context(|| format!("{split}.att line {}", i + 1))?,
        });
    }
    Ok(Some(out))
}

fn examples(items: &[Prepared], src: &Vocab, tgt: &Vocab) -> Vec<Example> {
    items
        .iter()
        .filter(|p| !p.source.is_empty())
        .map(|p| Example {
            source: src.encode(&p.source),
            target: tgt.encode(&p.target.rendered()),
            reference: Some(p.reference.clone()),
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub report: TrainReport,
    pub source_vocab: usize,
    pub target_vocab: usize,
    pub checkpoint: PathBuf,
}

pub fn cmd_train(cfg: &PipelineConfig) -> Result<TrainSummary> {
    cfg.model.validate()?;
    let train = load_prepared(cfg, "train")?.context("no training data")?;
    let dev = load_prepared(cfg, "dev")?.unwrap_or_default();
    let src_vocab = Vocab::build(train.iter().map(|p| p.source.as_slice()), cfg.model.src_vocab_cap);
    let tgt_seqs: Vec<Vec<String>> = train.iter().map(|p| p.target.rendered()).collect();
    let tgt_vocab = Vocab::build(tgt_seqs.iter().map(Vec::as_slice), cfg.model.tgt_vocab_cap);
    // References stay attached at λ = 0 so that Θ is still logged.
    let train_ex = examples(&train, &src_vocab, &tgt_vocab);
    let dev_ex = examples(&dev, &src_vocab, &tgt_vocab);
    if train_ex.len() < train.len() {
        log::warn!(
            "skipped {} training pairs with an empty source",
            train.len() - train_ex.len()
        );
    }
    let mcfg = neural::ModelConfig {
        lambda: cfg.effective_lambda(),
        ..cfg.model
    };
    let dims = mcfg.dims(src_vocab.len(), tgt_vocab.len());
    let init = ParamSet::init_uniform(dims, mcfg.init_scale, &mut ChaCha8Rng::seed_from_u64(mcfg.seed));
    let report = neural::train(init, &train_ex, &dev_ex, &mcfg)?;
    write(&cfg.model_path("src.vocab"), src_vocab.to_text())?;
    write(&cfg.model_path("tgt.vocab"), tgt_vocab.to_text())?;
    write(&cfg.model_path("best.ckpt"), report.best.to_checkpoint())?;
    write(&cfg.model_path("final.ckpt"), report.params.to_checkpoint())?;
    write(&cfg.model_path("train.log"), report.log_text())?;
    Ok(TrainSummary {
        report,
        source_vocab: src_vocab.len(),
        target_vocab: tgt_vocab.len(),
        checkpoint: cfg.model_path("best.ckpt"),
    })
}

/// A trained model loaded for decoding.
pub struct Decoder {
    pub categories: CategoryModel,
    pub src: Vocab,
    pub tgt: Vocab,
    pub params: ParamSet,
    pub baseline: bool,
    pub max_len: usize,
}

impl Decoder {
    pub fn load(cfg: &PipelineConfig) -> Result<Decoder> {
        let categories =
            CategoryModel::from_text(&read(&cfg.model_path("category.model"))?).context("in category.model")?;
        let vocab = |name: &str| -> Result<Vocab> {
            Vocab::from_text(&read(&cfg.model_path(name))?).with_context(|| format!("malformed {name}"))
        };
        let ckpt = cfg.model_path("best.ckpt");
        exists(&ckpt)?;
        let bytes = fs::read(&ckpt).with_context(|| format!("reading {}", ckpt.display()))?;
        let params = ParamSet::from_checkpoint(&bytes).with_context(|| format!("in {}", ckpt.display()))?;
        Ok(Decoder {
            categories,
            src: vocab("src.vocab")?,
            tgt: vocab("tgt.vocab")?,
            params,
            baseline: cfg.baseline,
            max_len: cfg.max_decode_len,
        })
    }

    /// Categorized source tokens and table D for one sentence.
    pub fn source(&self, s: &SourceAnnotation<'_>) -> (Vec<String>, SentenceCategoryMap) {
        if self.baseline {
            (s.tokens.to_vec(), SentenceCategoryMap::default())
        } else {
            categorize_source(s, &self.categories)
        }
    }

    /// Parses one sentence. Never fails: unusable output becomes the
    /// placeholder graph.
    pub fn parse(&self, s: &SourceAnnotation<'_>) -> AmrGraph {
        let placeholder = || AmrGraph::with_root("a", UNKNOWN_CONCEPT);
        if s.tokens.is_empty() {
            log::warn!("empty input sentence; emitting placeholder");
            return placeholder();
        }
        let (src, table) = self.source(s);
        let ids = self.src.encode(&src);
        let out = match neural::greedy_decode(&self.params, &self.tgt, &ids, self.max_len) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("decoding failed ({e}); emitting placeholder");
                return placeholder();
            }
        };
        let toks = out
            .0
            .into_iter()
            .map(|t| match t {
                LinToken::Concept(c) if c == neural::UNK => LinToken::Concept(UNKNOWN_CONCEPT.into()),
                t => t,
            })
            .collect();
        let g = recover(&TokenSeq(toks), &table, &self.categories);
        if g.node_count() == 1 && g.node(g.root()).concept == UNKNOWN_CONCEPT {
            log::warn!("unrecoverable output for `{}`", s.tokens.join(" "));
        }
        g
    }

    pub fn parse_all(&self, input: &DecodeInput) -> Vec<AmrGraph> {
        fn layer(l: &Option<Vec<Vec<String>>>, i: usize) -> Option<&[String]> {
            l.as_ref().and_then(|l| l.get(i)).map(Vec::as_slice)
        }
        input
            .tokens
            .iter()
            .enumerate()
            .map(|(i, tokens)| {
                self.parse(&SourceAnnotation {
                    tokens,
                    ne: layer(&input.ne, i),
                    pos: layer(&input.pos, i),
                    lemmas: layer(&input.lemmas, i),
                })
            })
            .collect()
    }
}

pub fn write_graphs(graphs: &[AmrGraph]) -> String {
    graphs.iter().map(|g| emit_penman(g) + "\n\n").collect()
}

pub fn cmd_decode(cfg: &PipelineConfig, input: &DecodeInput) -> Result<Vec<AmrGraph>> {
    Ok(Decoder::load(cfg)?.parse_all(input))
}

pub fn read_graphs(p: &Path) -> Result<Vec<AmrGraph>> {
    Ok(read_corpus(&read(p)?)
        .with_context(|| format!("in {}", p.display()))?
        .into_iter()
        .map(|e| e.graph)
        .collect())
}

pub fn cmd_eval(pred: &[AmrGraph], gold: &[AmrGraph], opts: &SmatchOptions) -> Result<(SmatchScore, Vec<SmatchScore>)> {
    Ok(corpus_smatch(pred, gold, opts)?)
}

pub fn score_line(s: &SmatchScore) -> String {
    format!("{:.4}\t{:.4}\t{:.4}", s.precision, s.recall, s.f1)
}

pub fn per_sentence_table(scores: &[SmatchScore]) -> String {
    let mut out = String::from("sentence\tmatched\tpredicted\tgold\tP\tR\tF1\n");
    for (i, s) in scores.iter().enumerate() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            i + 1,
            s.matched,
            s.predicted,
            s.gold,
            score_line(s)
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub threshold: usize,
    pub source_vocab: usize,
    pub target_vocab: usize,
    pub score: SmatchScore,
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut out = String::from("n\tsource_vocab\ttarget_vocab\tP\tR\tF1\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            r.threshold,
            r.source_vocab,
            r.target_vocab,
            score_line(&r.score)
        ));
    }
    out
}

/// Preprocess, train, decode and score once per threshold. Scores the dev
/// split, or the training split when no dev split is configured. Each run
/// writes to `<model_dir>/sweep-n<threshold>`.
pub fn cmd_sweep(cfg: &PipelineConfig, thresholds: &[usize]) -> Result<Vec<SweepRow>> {
    cfg.validate_inputs()?;
    let eval_paths = if cfg.dev.corpus.is_some() { &cfg.dev } else { &cfg.train };
    let eval = load_split(cfg, eval_paths)?;
    let gold = eval.graphs();
    let input = eval.decode_input();
    let mut rows = Vec::with_capacity(thresholds.len());
    for &n in thresholds {
        let mut c = cfg.clone();
        c.category.threshold = n;
        c.model_dir = cfg.model_dir.join(format!("sweep-n{n}"));
        let pre = cmd_preprocess(&c).with_context(|| format!("sweep n={n}: preprocess"))?;
        cmd_train(&c).with_context(|| format!("sweep n={n}: train"))?;
        let pred = cmd_decode(&c, &input).with_context(|| format!("sweep n={n}: decode"))?;
        let (score, _) = cmd_eval(&pred, &gold, &c.smatch)?;
        log::info!("sweep n={n}: F1 {:.4}", score.f1);
        rows.push(SweepRow {
            threshold: n,
            source_vocab: pre.source_vocab,
            target_vocab: pre.target_vocab,
            score,
        });
    }
    Ok(rows)
}
