//! Attention-based encoder-decoder in double precision, trained with plain
//! SGD and an optional attention-supervision term.

mod gradcheck;
mod net;
mod params;
mod tensor;
mod train;
mod vocab;

use thiserror::Error;

use crate::linearize::{LinToken, TokenSeq};

pub use gradcheck::{gradient_check, GradCheckReport, FD_STEP};
pub use net::{
    attend, attention_cross_entropy, decode_step, encode, greedy_decode_indices, initial_state, loss, loss_and_grad,
    DecoderState, EncoderState, Example, LossParts,
};
pub use params::{Dims, Lstm, ParamSet, CHECKPOINT_HEADER};
pub use tensor::{softmax, Mat};
pub use train::{evaluate, train, EpochLog, TrainReport};
pub use vocab::{Vocab, BOS, EOS, UNK};

#[derive(Debug, Error, PartialEq)]
pub enum NeuralError {
    #[error("empty input sequence")]
    EmptyInput,
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("reference attention has {reference} rows (or columns) but the pair needs {output}")]
    LengthMismatch { reference: usize, output: usize },
    #[error("non-finite loss {value} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize, value: f64 },
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub embed_dim: usize,
    /// Per encoder direction; also the decoder size.
    pub hidden_dim: usize,
    pub attn_dim: usize,
    pub src_vocab_cap: usize,
    pub tgt_vocab_cap: usize,
    pub dropout: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub decay: f64,
    pub decay_patience: usize,
    pub batch_size: usize,
    pub clip_norm: f64,
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embed_dim: 256,
            hidden_dim: 256,
            attn_dim: 256,
            src_vocab_cap: 20000,
            tgt_vocab_cap: 10000,
            dropout: 0.5,
            lambda: 0.3,
            epochs: 150,
            learning_rate: 0.5,
            decay: 0.95,
            decay_patience: 3,
            batch_size: 32,
            clip_norm: 5.0,
            init_scale: 0.08,
            seed: 1,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: &str| Err(NeuralError::Config(m.to_string()));
        if self.embed_dim == 0 || self.hidden_dim == 0 || self.attn_dim == 0 {
            return bad("dimensions must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return bad("lambda must be non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 || self.clip_norm.is_nan() || self.clip_norm <= 0.0
        {
            return bad("learning rate and clip norm must be positive");
        }
        if self.src_vocab_cap < 3 || self.tgt_vocab_cap < 3 {
            return bad("vocabulary caps must leave room for the reserved symbols");
        }
        Ok(())
    }

    pub fn dims(&self, src_vocab: usize, tgt_vocab: usize) -> Dims {
        Dims {
            src_vocab,
            tgt_vocab,
            embed: self.embed_dim,
            hidden: self.hidden_dim,
            attn: self.attn_dim,
        }
    }
}

/// Greedy decoding rendered through the target vocabulary.
pub fn greedy_decode(p: &ParamSet, tgt: &Vocab, input: &[usize], max_len: usize) -> Result<TokenSeq, NeuralError> {
    let ids = greedy_decode_indices(p, input, max_len)?;
    Ok(TokenSeq(
        ids.into_iter().map(|i| LinToken::parse(tgt.symbol(i))).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{AttentionRow, ReferenceAttention};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> Dims {
        Dims {
            src_vocab: 6,
            tgt_vocab: 7,
            embed: 3,
            hidden: 4,
            attn: 3,
        }
    }

    fn random(seed: u64, scale: f64) -> ParamSet {
        ParamSet::init_uniform(small(), scale, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn example(reference: Option<ReferenceAttention>) -> Example {
        Example {
            source: vec![3, 4, 5],
            target: vec![3, 5, 4, 6],
            reference,
        }
    }

    fn reference() -> ReferenceAttention {
        ReferenceAttention {
            input_len: 3,
            rows: vec![
                AttentionRow::Uniform,
                AttentionRow::Tokens(vec![0]),
                AttentionRow::Zero,
                AttentionRow::Tokens(vec![1, 2]),
                AttentionRow::Uniform,
            ],
        }
    }

    #[test]
    fn zero_params_give_zero_states() {
        let p = ParamSet::zeros(small());
        let enc = encode(&p, &[3, 4, 5]).unwrap();
        assert_eq!(enc.h.len(), 3);
        assert!(enc.h.iter().all(|h| h.len() == 8 && h.iter().all(|&x| x == 0.0)));
        assert_eq!(encode(&p, &[]), Err(NeuralError::EmptyInput));
        let st = initial_state(&p, &enc);
        let (_, dist) = decode_step(&p, Vocab::BOS, &st, &enc);
        assert!(dist.iter().all(|&x| (x - 1.0 / 7.0).abs() < 1e-15));
    }

    #[test]
    fn single_token_and_palindrome_symmetry() {
        let mut p = random(1, 0.5);
        p.enc_bw = p.enc_fw.clone();
        let one = encode(&p, &[4]).unwrap();
        assert_eq!(one.h[0][..4], one.h[0][4..]);
        let enc = encode(&p, &[3, 4, 5, 4, 3]).unwrap();
        for i in 0..5 {
            assert_eq!(enc.h[i][..4], enc.h[4 - i][4..], "position {i}");
        }
    }

    #[test]
    fn attention_rows_are_distributions() {
        let p = random(2, 0.5);
        let enc = encode(&p, &[1, 3, 5, 2]).unwrap();
        let (alpha, ctx) = attend(&p, &enc, &[0.3, -0.2, 0.1, 0.5]);
        assert!((alpha.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for k in 0..8 {
            let lo = enc.h.iter().map(|h| h[k]).fold(f64::INFINITY, f64::min);
            let hi = enc.h.iter().map(|h| h[k]).fold(f64::NEG_INFINITY, f64::max);
            assert!(ctx[k] >= lo - 1e-12 && ctx[k] <= hi + 1e-12);
        }
        let same = EncoderState::from_states(&p, vec![enc.h[0].clone(); 3]);
        let (a, _) = attend(&p, &same, &[0.1, 0.1, 0.1, 0.1]);
        assert!(a.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn theta_values() {
        assert!((attention_cross_entropy(&[0.5, 0.5], &[0.5, 0.5]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(attention_cross_entropy(&[0.0, 0.0], &[0.3, 0.7]), 0.0);
        let h: f64 = attention_cross_entropy(&[0.25, 0.75], &[0.25, 0.75]);
        assert!(attention_cross_entropy(&[0.25, 0.75], &[0.4, 0.6]) > h);
    }

    #[test]
    fn lambda_zero_is_mean_nll_bitwise() {
        let p = random(3, 0.3);
        let a = loss(&p, &example(Some(reference())), 0.0).unwrap();
        let b = loss(&p, &example(None), 0.0).unwrap();
        assert_eq!(a.loss.to_bits(), a.nll.to_bits());
        assert_eq!(a.loss.to_bits(), b.loss.to_bits());
        let c = loss(&p, &example(Some(reference())), 0.3).unwrap();
        assert_eq!(c.nll.to_bits(), a.nll.to_bits());
        assert!(c.loss > a.loss);
    }

    #[test]
    fn reference_length_checked() {
        let p = random(3, 0.3);
        let mut r = reference();
        r.rows.pop();
        assert!(matches!(
            loss(&p, &example(Some(r)), 0.3),
            Err(NeuralError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = random(4, 1.0);
        for lambda in [0.0, 0.3] {
            let r = gradient_check(&p, &example(Some(reference())), lambda).unwrap();
            assert!(r.max_relative_error < 1e-4, "lambda {lambda}: {:?}", r.per_tensor);
        }
    }

    #[test]
    fn zero_rows_contribute_no_gradient() {
        let p = random(5, 0.5);
        let all_zero = ReferenceAttention {
            input_len: 3,
            rows: vec![AttentionRow::Zero; 5],
        };
        let mut g0 = p.zeros_like();
        let mut g1 = p.zeros_like();
        loss_and_grad(&p, &example(None), 0.3, &mut g0, None).unwrap();
        loss_and_grad(&p, &example(Some(all_zero)), 0.3, &mut g1, None).unwrap();
        assert_eq!(g0, g1);
    }

    #[test]
    fn greedy_respects_max_len() {
        let p = random(6, 0.5);
        let out = greedy_decode_indices(&p, &[3, 4], 3).unwrap();
        assert!(out.len() <= 3);
        assert_eq!(out, greedy_decode_indices(&p, &[3, 4], 3).unwrap());
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::default().validate().is_ok());
        let bad = ModelConfig {
            dropout: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ModelConfig {
            hidden_dim: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn memorizes_one_pair() {
        let cfg = ModelConfig {
            dropout: 0.0,
            lambda: 0.0,
            epochs: 200,
            ..Default::default()
        };
        let d = cfg.dims(6, 7);
        let p = ParamSet::init_uniform(d, cfg.init_scale, &mut ChaCha8Rng::seed_from_u64(cfg.seed));
        let data = [example(None)];
        let r = train(p.clone(), &data, &[], &cfg).unwrap();
        let last = r.log.last().unwrap();
        assert!(last.train_loss < 0.01, "{}", r.log_text());
        assert_eq!(
            greedy_decode_indices(&r.params, &[3, 4, 5], 20).unwrap(),
            vec![3, 5, 4, 6]
        );
        let again = train(p, &data, &[], &cfg).unwrap();
        assert_eq!(again.params, r.params);
        assert_eq!(again.log_text(), r.log_text());
    }
}
