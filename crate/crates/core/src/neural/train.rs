use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::net::{loss, loss_and_grad, Example};
use super::params::ParamSet;
use super::{ModelConfig, NeuralError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub dev_loss: f64,
    /// Mean attention cross-entropy term on the dev set (train set when no
    /// dev set is given).
    pub mean_theta: f64,
}

impl EpochLog {
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            self.epoch, self.lr, self.train_loss, self.dev_loss, self.mean_theta
        )
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub params: ParamSet,
    /// Parameters after the epoch with the lowest dev loss.
    pub best: ParamSet,
    /// Epoch 0 is the evaluation before any update.
    pub log: Vec<EpochLog>,
    /// Number of updates whose gradient was rescaled to the clip norm.
    pub clipped: usize,
}

impl TrainReport {
    pub fn log_text(&self) -> String {
        let mut s = String::from("epoch\tlr\ttrain_loss\tdev_loss\tmean_theta\n");
        for l in &self.log {
            s.push_str(&l.to_line());
            s.push('\n');
        }
        s
    }
}

/// Mean loss and mean Θ term over a set, no dropout.
pub fn evaluate(p: &ParamSet, data: &[Example], lambda: f64) -> Result<(f64, f64), NeuralError> {
    if data.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mut l = 0.0;
    let mut t = 0.0;
    for ex in data {
        let parts = loss(p, ex, lambda)?;
        l += parts.loss;
        t += parts.theta;
    }
    let n = data.len() as f64;
    Ok((l / n, t / n))
}

/// Mini-batch SGD on the supervised-attention objective.
pub fn train(
    mut params: ParamSet,
    train: &[Example],
    dev: &[Example],
    cfg: &ModelConfig,
) -> Result<TrainReport, NeuralError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(NeuralError::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let held_out = if dev.is_empty() { train } else { dev };
    let mut lr = cfg.learning_rate;
    let (l0, _) = evaluate(&params, train, cfg.lambda)?;
    let (d0, t0) = evaluate(&params, held_out, cfg.lambda)?;
    let mut log = vec![EpochLog {
        epoch: 0,
        lr,
        train_loss: l0,
        dev_loss: d0,
        mean_theta: t0,
    }];
    let mut best_loss = d0;
    let mut best = params.clone();
    let mut stale = 0;
    let mut clipped = 0;
    let mut grad = params.zeros_like();
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (bi, batch) in order.chunks(cfg.batch_size).enumerate() {
            grad.scale(0.0);
            let mut batch_loss = 0.0;
            for &i in batch {
                let parts = loss_and_grad(&params, &train[i], cfg.lambda, &mut grad, Some((cfg.dropout, &mut rng)))
                    .map_err(|e| match e {
                        NeuralError::NonFiniteLoss { value, .. } => NeuralError::NonFiniteLoss {
                            epoch,
                            batch: bi,
                            value,
                        },
                        other => other,
                    })?;
                batch_loss += parts.loss;
            }
            total += batch_loss;
            grad.scale(1.0 / batch.len() as f64);
            let norm = grad.sq_norm().sqrt();
            if !norm.is_finite() {
                return Err(NeuralError::NonFiniteLoss {
                    epoch,
                    batch: bi,
                    value: norm,
                });
            }
            if norm > cfg.clip_norm {
                grad.scale(cfg.clip_norm / norm);
                clipped += 1;
            }
            params.add_scaled(-lr, &grad);
        }
        let train_loss = total / train.len() as f64;
        let (dev_loss, mean_theta) = if dev.is_empty() {
            (train_loss, evaluate(&params, train, cfg.lambda)?.1)
        } else {
            evaluate(&params, dev, cfg.lambda)?
        };
        log.push(EpochLog {
            epoch,
            lr,
            train_loss,
            dev_loss,
            mean_theta,
        });
        log::debug!("{}", log.last().expect("just pushed").to_line());
        if dev_loss < best_loss {
            best_loss = dev_loss;
            best = params.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.decay_patience {
                lr *= cfg.decay;
                stale = 0;
            }
        }
    }
    Ok(TrainReport {
        params,
        best,
        log,
        clipped,
    })
}
