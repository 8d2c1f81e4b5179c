//! Flat `key = value` experiment configuration. Relative paths resolve
//! against the directory of the file they were read from.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use amrseq::align::AttentionMode;
use amrseq::categorize::CategoryConfig;
use amrseq::neural::ModelConfig;
use amrseq::smatch::SmatchOptions;
use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitPaths {
    pub corpus: Option<PathBuf>,
    pub alignments: Option<PathBuf>,
    pub ne: Option<PathBuf>,
    pub pos: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Directory relative paths are resolved against; not part of the file form.
    pub base_dir: PathBuf,
    pub train: SplitPaths,
    pub dev: SplitPaths,
    pub verbalization: Option<PathBuf>,
    pub model_dir: PathBuf,
    pub category: CategoryConfig,
    pub model: ModelConfig,
    pub smatch: SmatchOptions,
    pub supervised_attention: bool,
    pub attention_mode: AttentionMode,
    /// Plain linearization with no categorization on either side.
    pub baseline: bool,
    pub max_decode_len: usize,
    pub sweep_thresholds: Vec<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            base_dir: PathBuf::from("."),
            train: SplitPaths::default(),
            dev: SplitPaths::default(),
            verbalization: None,
            model_dir: PathBuf::from("model"),
            category: CategoryConfig::default(),
            model: ModelConfig::default(),
            smatch: SmatchOptions::default(),
            supervised_attention: true,
            attention_mode: AttentionMode::Standard,
            baseline: false,
            max_decode_len: 200,
            sweep_thresholds: vec![0, 10, 50],
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

fn mode_name(m: AttentionMode) -> &'static str {
    match m {
        AttentionMode::Standard => "standard",
        AttentionMode::NoRelationAlign => "no-relation-align",
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = PipelineConfig::parse(&text).with_context(|| format!("in config {}", path.display()))?;
        cfg.base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        if cfg.base_dir.as_os_str().is_empty() {
            cfg.base_dir = PathBuf::from(".");
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<PipelineConfig> {
        let mut c = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {line_no}: expected `key = value`");
            };
            let (k, v) = (k.trim(), v.trim());
            c.set(k, v).with_context(|| format!("line {line_no}: key `{k}`"))?;
        }
        Ok(c)
    }

    fn set(&mut self, k: &str, v: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(v: &str) -> Result<T> {
            v.parse().map_err(|_| anyhow::anyhow!("bad number `{v}`"))
        }
        let path = || Some(PathBuf::from(v));
        let m = &mut self.model;
        match k {
            "train_corpus" => self.train.corpus = path(),
            "train_alignments" => self.train.alignments = path(),
            "train_ne" => self.train.ne = path(),
            "train_pos" => self.train.pos = path(),
            "train_lemmas" => self.train.lemmas = path(),
            "dev_corpus" => self.dev.corpus = path(),
            "dev_alignments" => self.dev.alignments = path(),
            "dev_ne" => self.dev.ne = path(),
            "dev_pos" => self.dev.pos = path(),
            "dev_lemmas" => self.dev.lemmas = path(),
            "verbalization" => self.verbalization = path(),
            "model_dir" => self.model_dir = PathBuf::from(v),
            "threshold" => self.category.threshold = num(v)?,
            "embed_dim" => m.embed_dim = num(v)?,
            "hidden_dim" => m.hidden_dim = num(v)?,
            "attn_dim" => m.attn_dim = num(v)?,
            "src_vocab_cap" => m.src_vocab_cap = num(v)?,
            "tgt_vocab_cap" => m.tgt_vocab_cap = num(v)?,
            "dropout" => m.dropout = num(v)?,
            "lambda" => m.lambda = num(v)?,
            "epochs" => m.epochs = num(v)?,
            "learning_rate" => m.learning_rate = num(v)?,
            "decay" => m.decay = num(v)?,
            "decay_patience" => m.decay_patience = num(v)?,
            "batch_size" => m.batch_size = num(v)?,
            "clip_norm" => m.clip_norm = num(v)?,
            "init_scale" => m.init_scale = num(v)?,
            "seed" => m.seed = num(v)?,
            "smatch_restarts" => self.smatch.restarts = num(v)?,
            "smatch_seed" => self.smatch.seed = num(v)?,
            "smatch_include_top" => {
                self.smatch.include_top = parse_bool(v).ok_or_else(|| anyhow::anyhow!("bad boolean `{v}`"))?
            }
            "supervised_attention" => {
                self.supervised_attention = parse_bool(v).ok_or_else(|| anyhow::anyhow!("bad boolean `{v}`"))?
            }
            "baseline" => self.baseline = parse_bool(v).ok_or_else(|| anyhow::anyhow!("bad boolean `{v}`"))?,
            "attention_mode" => {
                self.attention_mode = match v {
                    "standard" => AttentionMode::Standard,
                    "no-relation-align" => AttentionMode::NoRelationAlign,
                    _ => bail!("expected `standard` or `no-relation-align`, got `{v}`"),
                }
            }
            "max_decode_len" => self.max_decode_len = num(v)?,
            "sweep_thresholds" => {
                self.sweep_thresholds = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(num)
                    .collect::<Result<_>>()?
            }
            _ => bail!("unknown key"),
        }
        Ok(())
    }

    /// File form; `parse(to_text())` reproduces every field but `base_dir`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        for (prefix, sp) in [("train", &self.train), ("dev", &self.dev)] {
            for (name, p) in [
                ("corpus", &sp.corpus),
                ("alignments", &sp.alignments),
                ("ne", &sp.ne),
                ("pos", &sp.pos),
                ("lemmas", &sp.lemmas),
            ] {
                if let Some(p) = p {
                    put(&format!("{prefix}_{name}"), p.display().to_string());
                }
            }
        }
        if let Some(p) = &self.verbalization {
            put("verbalization", p.display().to_string());
        }
        put("model_dir", self.model_dir.display().to_string());
        put("threshold", self.category.threshold.to_string());
        let m = &self.model;
        put("embed_dim", m.embed_dim.to_string());
        put("hidden_dim", m.hidden_dim.to_string());
        put("attn_dim", m.attn_dim.to_string());
        put("src_vocab_cap", m.src_vocab_cap.to_string());
        put("tgt_vocab_cap", m.tgt_vocab_cap.to_string());
        put("dropout", m.dropout.to_string());
        put("lambda", m.lambda.to_string());
        put("epochs", m.epochs.to_string());
        put("learning_rate", m.learning_rate.to_string());
        put("decay", m.decay.to_string());
        put("decay_patience", m.decay_patience.to_string());
        put("batch_size", m.batch_size.to_string());
        put("clip_norm", m.clip_norm.to_string());
        put("init_scale", m.init_scale.to_string());
        put("seed", m.seed.to_string());
        put("smatch_restarts", self.smatch.restarts.to_string());
        put("smatch_seed", self.smatch.seed.to_string());
        put("smatch_include_top", self.smatch.include_top.to_string());
        put("supervised_attention", self.supervised_attention.to_string());
        put("attention_mode", mode_name(self.attention_mode).to_string());
        put("baseline", self.baseline.to_string());
        put("max_decode_len", self.max_decode_len.to_string());
        put(
            "sweep_thresholds",
            self.sweep_thresholds
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        s
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn model_path(&self, name: &str) -> PathBuf {
        self.resolve(&self.model_dir).join(name)
    }

    /// λ actually used in training: zero when supervision is switched off.
    pub fn effective_lambda(&self) -> f64 {
        if self.supervised_attention {
            self.model.lambda
        } else {
            0.0
        }
    }

    /// Checks that every configured input file of the training (and, if
    /// given, development) split exists.
    pub fn validate_inputs(&self) -> Result<()> {
        let need = |name: &str, p: &Option<PathBuf>| -> Result<()> {
            match p {
                None => bail!("config key `{name}` is required"),
                Some(p) => exists(&self.resolve(p)),
            }
        };
        need("train_corpus", &self.train.corpus)?;
        need("train_alignments", &self.train.alignments)?;
        for p in [&self.train.ne, &self.train.pos, &self.train.lemmas, &self.verbalization]
            .into_iter()
            .flatten()
        {
            exists(&self.resolve(p))?;
        }
        if self.dev.corpus.is_some() {
            need("dev_alignments", &self.dev.alignments)?;
            for p in [
                &self.dev.corpus,
                &self.dev.alignments,
                &self.dev.ne,
                &self.dev.pos,
                &self.dev.lemmas,
            ]
            .into_iter()
            .flatten()
            {
                exists(&self.resolve(p))?;
            }
        }
        self.model.validate()?;
        Ok(())
    }
}

pub fn exists(p: &Path) -> Result<()> {
    if !p.is_file() {
        bail!("input file not found: {}", p.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_form_roundtrips() {
        let mut c = PipelineConfig::default();
        c.train.corpus = Some("data/train.amr".into());
        c.train.alignments = Some("data/train.align".into());
        c.dev.corpus = Some("data/dev.amr".into());
        c.model.dropout = 0.1 + 0.2;
        c.model.learning_rate = 1.0 / 3.0;
        c.attention_mode = AttentionMode::NoRelationAlign;
        c.sweep_thresholds = vec![0, 5];
        let back = PipelineConfig::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), c.to_text());
    }

    #[test]
    fn errors_name_the_line() {
        let e = PipelineConfig::parse("threshold = 5\nbogus = 1\n").unwrap_err();
        assert!(format!("{e:#}").contains("line 2"));
        assert!(PipelineConfig::parse("epochs = many").is_err());
        assert!(PipelineConfig::parse("no equals sign").is_err());
    }
}
