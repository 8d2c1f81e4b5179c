//! Bi-LSTM encoder, attention decoder without input feeding, the
//! supervised-attention objective, and its hand-written gradient.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::params::{Lstm, ParamSet};
use super::tensor::{axpy, dot, sigmoid, softmax, Mat};
use super::vocab::Vocab;
use super::NeuralError;
use crate::align::ReferenceAttention;

/// `h[i] = [h_fw_i; h_bw_(m-i+1)]` plus the attention projection of each.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderState {
    pub h: Vec<Vec<f64>>,
    /// `[h_fw_m; h_bw_m]`, the input of the decoder initial-state map.
    pub last: Vec<f64>,
    proj: Vec<Vec<f64>>,
}

impl EncoderState {
    /// Wraps precomputed encoder outputs; `last` is taken from the first
    /// and last positions as in [`encode`].
    pub fn from_states(p: &ParamSet, h: Vec<Vec<f64>>) -> EncoderState {
        let hd = p.enc_fw.hidden();
        let m = h.len();
        let last = [&h[m - 1][..hd], &h[0][hd..]].concat();
        let proj = h.iter().map(|hi| p.att_w1.gemv(hi)).collect();
        EncoderState { h, last, proj }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

/// One training or evaluation pair in index form. The reference attention,
/// when present, has one row per target symbol plus one for `</s>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    pub reference: Option<ReferenceAttention>,
}

/// Loss of one pair: `nll + λ·theta`, both already divided by the number of
/// output steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub loss: f64,
    pub nll: f64,
    pub theta: f64,
    pub steps: usize,
}

struct StepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    o: Vec<f64>,
    g: Vec<f64>,
    c: Vec<f64>,
    tc: Vec<f64>,
    h: Vec<f64>,
}

fn lstm_step(cell: &Lstm, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> StepCache {
    let hd = cell.hidden();
    let mut z = cell.b.data.clone();
    cell.w.gemv_add(x, &mut z);
    cell.u.gemv_add(h_prev, &mut z);
    let i: Vec<f64> = z[..hd].iter().map(|&v| sigmoid(v)).collect();
    let f: Vec<f64> = z[hd..2 * hd].iter().map(|&v| sigmoid(v)).collect();
    let o: Vec<f64> = z[2 * hd..3 * hd].iter().map(|&v| sigmoid(v)).collect();
    let g: Vec<f64> = z[3 * hd..].iter().map(|v| v.tanh()).collect();
    let c: Vec<f64> = (0..hd).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
    let tc: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let h: Vec<f64> = (0..hd).map(|k| o[k] * tc[k]).collect();
    StepCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        i,
        f,
        o,
        g,
        c,
        tc,
        h,
    }
}

/// Returns `(dx, dh_prev, dc_prev)`.
fn lstm_back(
    cell: &Lstm,
    grad: &mut Lstm,
    s: &StepCache,
    dh: &[f64],
    dc_next: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let hd = cell.hidden();
    let mut dz = vec![0.0; 4 * hd];
    let mut dc_prev = vec![0.0; hd];
    for k in 0..hd {
        let dc = dc_next[k] + dh[k] * s.o[k] * (1.0 - s.tc[k] * s.tc[k]);
        let d_o = dh[k] * s.tc[k];
        let d_i = dc * s.g[k];
        let d_g = dc * s.i[k];
        let d_f = dc * s.c_prev[k];
        dc_prev[k] = dc * s.f[k];
        dz[k] = d_i * s.i[k] * (1.0 - s.i[k]);
        dz[hd + k] = d_f * s.f[k] * (1.0 - s.f[k]);
        dz[2 * hd + k] = d_o * s.o[k] * (1.0 - s.o[k]);
        dz[3 * hd + k] = d_g * (1.0 - s.g[k] * s.g[k]);
    }
    grad.w.ger_add(&dz, &s.x);
    grad.u.ger_add(&dz, &s.h_prev);
    axpy(1.0, &dz, &mut grad.b.data);
    let mut dx = vec![0.0; cell.w.cols];
    cell.w.gemv_t_add(&dz, &mut dx);
    let mut dh_prev = vec![0.0; hd];
    cell.u.gemv_t_add(&dz, &mut dh_prev);
    (dx, dh_prev, dc_prev)
}

fn embed(table: &Mat, idx: usize) -> &[f64] {
    table.row(idx.min(table.rows - 1))
}

struct Dropout<'a> {
    rate: f64,
    rng: &'a mut ChaCha8Rng,
}

impl Dropout<'_> {
    fn mask(&mut self, n: usize) -> Option<Vec<f64>> {
        if self.rate <= 0.0 {
            return None;
        }
        let keep = 1.0 / (1.0 - self.rate);
        Some(
            (0..n)
                .map(|_| if self.rng.gen::<f64>() < self.rate { 0.0 } else { keep })
                .collect(),
        )
    }
}

fn apply(mask: &Option<Vec<f64>>, v: &mut [f64]) {
    if let Some(m) = mask {
        v.iter_mut().zip(m).for_each(|(x, k)| *x *= k);
    }
}

struct EncCache {
    emb_mask: Vec<Option<Vec<f64>>>,
    fw: Vec<StepCache>,
    bw: Vec<StepCache>,
    state: EncoderState,
}

fn encode_cached(p: &ParamSet, input: &[usize], mut drop: Option<&mut Dropout<'_>>) -> Result<EncCache, NeuralError> {
    if input.is_empty() {
        return Err(NeuralError::EmptyInput);
    }
    let m = input.len();
    let hd = p.enc_fw.hidden();
    let mut emb_mask = Vec::with_capacity(m);
    let mut xs = Vec::with_capacity(m);
    for &t in input {
        let mut x = embed(&p.src_emb, t).to_vec();
        let mask = drop.as_mut().and_then(|d| d.mask(x.len()));
        apply(&mask, &mut x);
        emb_mask.push(mask);
        xs.push(x);
    }
    let zero = vec![0.0; hd];
    let mut fw: Vec<StepCache> = Vec::with_capacity(m);
    for x in &xs {
        let (h, c) = fw.last().map_or((&zero, &zero), |s| (&s.h, &s.c));
        let s = lstm_step(&p.enc_fw, x, h, c);
        fw.push(s);
    }
    let mut bw: Vec<StepCache> = Vec::with_capacity(m);
    for x in xs.iter().rev() {
        let (h, c) = bw.last().map_or((&zero, &zero), |s| (&s.h, &s.c));
        let s = lstm_step(&p.enc_bw, x, h, c);
        bw.push(s);
    }
    let h: Vec<Vec<f64>> = (0..m)
        .map(|i| [fw[i].h.as_slice(), bw[m - 1 - i].h.as_slice()].concat())
        .collect();
    let proj = h.iter().map(|hi| p.att_w1.gemv(hi)).collect();
    let last = [fw[m - 1].h.as_slice(), bw[m - 1].h.as_slice()].concat();
    Ok(EncCache {
        emb_mask,
        fw,
        bw,
        state: EncoderState { h, last, proj },
    })
}

/// Runs both encoder directions from zero states.
pub fn encode(p: &ParamSet, input: &[usize]) -> Result<EncoderState, NeuralError> {
    encode_cached(p, input, None).map(|c| c.state)
}

/// `h_0 = W_init [h_fw_m; h_bw_m] + b_init`, `c_0 = 0`.
pub fn initial_state(p: &ParamSet, enc: &EncoderState) -> DecoderState {
    let mut h = p.init_b.data.clone();
    p.init_w.gemv_add(&enc.last, &mut h);
    DecoderState {
        c: vec![0.0; h.len()],
        h,
    }
}

fn attention_scores(p: &ParamSet, enc: &EncoderState, d: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let q = p.att_w2.gemv(d);
    let a: Vec<Vec<f64>> = enc
        .proj
        .iter()
        .map(|pi| pi.iter().zip(&q).map(|(x, y)| (x + y).tanh()).collect())
        .collect();
    let u = a.iter().map(|ai| dot(&p.att_v.data, ai)).collect();
    (a, u)
}

/// `α = softmax_i(vᵀ tanh(W1 h_i + W2 d))`, `d' = Σ α_i h_i`.
pub fn attend(p: &ParamSet, enc: &EncoderState, d: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (_, u) = attention_scores(p, enc, d);
    let alpha = softmax(&u);
    let ctx = context(enc, &alpha);
    (alpha, ctx)
}

fn context(enc: &EncoderState, alpha: &[f64]) -> Vec<f64> {
    let mut ctx = vec![0.0; enc.h[0].len()];
    for (a, hi) in alpha.iter().zip(&enc.h) {
        axpy(*a, hi, &mut ctx);
    }
    ctx
}

/// One decoder step on the previous output symbol; returns the new state and
/// `softmax(W3 [d_j; d'_j])`.
pub fn decode_step(p: &ParamSet, prev: usize, state: &DecoderState, enc: &EncoderState) -> (DecoderState, Vec<f64>) {
    let s = lstm_step(&p.dec, embed(&p.tgt_emb, prev), &state.h, &state.c);
    let (_, ctx) = attend(p, enc, &s.h);
    let z = [s.h.as_slice(), ctx.as_slice()].concat();
    let dist = softmax(&p.out_w3.gemv(&z));
    (DecoderState { h: s.h, c: s.c }, dist)
}

/// Argmax decoding from `<s>` until `</s>` or `max_len` symbols.
pub fn greedy_decode_indices(p: &ParamSet, input: &[usize], max_len: usize) -> Result<Vec<usize>, NeuralError> {
    let enc = encode(p, input)?;
    let mut st = initial_state(p, &enc);
    let mut prev = Vocab::BOS;
    let mut out = Vec::new();
    while out.len() < max_len {
        let (ns, dist) = decode_step(p, prev, &st, &enc);
        let best = argmax(&dist);
        if best == Vocab::EOS {
            break;
        }
        out.push(best);
        prev = best;
        st = ns;
    }
    Ok(out)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// `Θ(ᾱ, α) = -Σ ᾱ_i ln α_i`.
pub fn attention_cross_entropy(reference: &[f64], alpha: &[f64]) -> f64 {
    -reference
        .iter()
        .zip(alpha)
        .filter(|(r, _)| **r > 0.0)
        .map(|(r, a)| r * a.ln())
        .sum::<f64>()
}

fn check_reference(ex: &Example) -> Result<(), NeuralError> {
    if let Some(r) = &ex.reference {
        let n = ex.target.len() + 1;
        if r.len() != n {
            return Err(NeuralError::LengthMismatch {
                reference: r.len(),
                output: n,
            });
        }
        if r.input_len != ex.source.len() {
            return Err(NeuralError::LengthMismatch {
                reference: r.input_len,
                output: ex.source.len(),
            });
        }
    }
    Ok(())
}

/// Supervised-attention objective on one pair, without dropout.
pub fn loss(p: &ParamSet, ex: &Example, lambda: f64) -> Result<LossParts, NeuralError> {
    forward_backward(p, ex, lambda, None, None)
}

/// Loss and gradient (accumulated into `grad`) on one pair.
pub fn loss_and_grad(
    p: &ParamSet,
    ex: &Example,
    lambda: f64,
    grad: &mut ParamSet,
    dropout: Option<(f64, &mut ChaCha8Rng)>,
) -> Result<LossParts, NeuralError> {
    forward_backward(p, ex, lambda, Some(grad), dropout)
}

struct DecCache {
    lstm: StepCache,
    emb_mask: Option<Vec<f64>>,
    a: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    z: Vec<f64>,
    z_mask: Option<Vec<f64>>,
    probs: Vec<f64>,
    reference: Option<Vec<f64>>,
}

fn forward_backward(
    p: &ParamSet,
    ex: &Example,
    lambda: f64,
    grad: Option<&mut ParamSet>,
    dropout: Option<(f64, &mut ChaCha8Rng)>,
) -> Result<LossParts, NeuralError> {
    check_reference(ex)?;
    let mut drop = dropout.map(|(rate, rng)| Dropout { rate, rng });
    let enc = encode_cached(p, &ex.source, drop.as_mut())?;
    let hd = p.dec.hidden();
    let n = ex.target.len() + 1;
    let inv_n = 1.0 / n as f64;

    let init = initial_state(p, &enc.state);
    let (mut h, mut c) = (init.h, init.c);
    let mut steps: Vec<DecCache> = Vec::with_capacity(n);
    let mut nll_sum = 0.0;
    let mut theta_sum = 0.0;
    for j in 0..n {
        let prev = if j == 0 { Vocab::BOS } else { ex.target[j - 1] };
        let gold = if j < ex.target.len() { ex.target[j] } else { Vocab::EOS };
        let mut x = embed(&p.tgt_emb, prev).to_vec();
        let emb_mask = drop.as_mut().and_then(|d| d.mask(x.len()));
        apply(&emb_mask, &mut x);
        let s = lstm_step(&p.dec, &x, &h, &c);
        let (a, u) = attention_scores(p, &enc.state, &s.h);
        let alpha = softmax(&u);
        let ctx = context(&enc.state, &alpha);
        let mut z = [s.h.as_slice(), ctx.as_slice()].concat();
        let z_mask = drop.as_mut().and_then(|d| d.mask(z.len()));
        apply(&z_mask, &mut z);
        let probs = softmax(&p.out_w3.gemv(&z));
        nll_sum -= probs[gold.min(probs.len() - 1)].ln();
        let reference = ex
            .reference
            .as_ref()
            .map(|r| r.row(j))
            .filter(|r| r.iter().any(|&v| v > 0.0));
        if let Some(r) = &reference {
            theta_sum += attention_cross_entropy(r, &alpha);
        }
        h = s.h.clone();
        c = s.c.clone();
        steps.push(DecCache {
            lstm: s,
            emb_mask,
            a,
            alpha,
            z,
            z_mask,
            probs,
            reference,
        });
    }
    let nll = nll_sum * inv_n;
    let theta = theta_sum * inv_n;
    let loss = if lambda == 0.0 { nll } else { nll + lambda * theta };
    let parts = LossParts {
        loss,
        nll,
        theta,
        steps: n,
    };
    if !loss.is_finite() {
        return Err(NeuralError::NonFiniteLoss {
            epoch: 0,
            batch: 0,
            value: loss,
        });
    }
    let Some(g) = grad else { return Ok(parts) };

    let m = ex.source.len();
    let mut dh_enc = vec![vec![0.0; 2 * hd]; m];
    let mut dproj = vec![vec![0.0; p.att_v.rows]; m];
    let mut dh_next = vec![0.0; hd];
    let mut dc_next = vec![0.0; hd];
    for j in (0..n).rev() {
        let st = &steps[j];
        let gold = if j < ex.target.len() { ex.target[j] } else { Vocab::EOS };
        let mut dlogits: Vec<f64> = st.probs.iter().map(|q| q * inv_n).collect();
        let last = dlogits.len() - 1;
        dlogits[gold.min(last)] -= inv_n;
        g.out_w3.ger_add(&dlogits, &st.z);
        let mut dz = vec![0.0; 3 * hd];
        p.out_w3.gemv_t_add(&dlogits, &mut dz);
        apply(&st.z_mask, &mut dz);
        let mut dd: Vec<f64> = dz[..hd].iter().zip(&dh_next).map(|(a, b)| a + b).collect();
        let dctx = &dz[hd..];

        let mut du: Vec<f64> = enc.state.h.iter().map(|hi| dot(dctx, hi)).collect();
        let s_alpha: f64 = st.alpha.iter().zip(&du).map(|(a, d)| a * d).sum();
        for (i, d) in du.iter_mut().enumerate() {
            *d = st.alpha[i] * (*d - s_alpha);
            axpy(st.alpha[i], dctx, &mut dh_enc[i]);
        }
        if lambda != 0.0 {
            if let Some(r) = &st.reference {
                let mass: f64 = r.iter().sum();
                for i in 0..m {
                    du[i] += lambda * inv_n * (mass * st.alpha[i] - r[i]);
                }
            }
        }
        let mut dq = vec![0.0; p.att_v.rows];
        for i in 0..m {
            axpy(du[i], &st.a[i], &mut g.att_v.data);
            let dpre: Vec<f64> = st.a[i]
                .iter()
                .zip(&p.att_v.data)
                .map(|(a, v)| du[i] * v * (1.0 - a * a))
                .collect();
            axpy(1.0, &dpre, &mut dproj[i]);
            axpy(1.0, &dpre, &mut dq);
        }
        g.att_w2.ger_add(&dq, &st.lstm.h);
        p.att_w2.gemv_t_add(&dq, &mut dd);

        let (mut dx, dh_prev, dc_prev) = lstm_back(&p.dec, &mut g.dec, &st.lstm, &dd, &dc_next);
        apply(&st.emb_mask, &mut dx);
        let prev = if j == 0 { Vocab::BOS } else { ex.target[j - 1] };
        axpy(1.0, &dx, g.tgt_emb.row_mut(prev.min(p.tgt_emb.rows - 1)));
        dh_next = dh_prev;
        dc_next = dc_prev;
    }

    g.init_w.ger_add(&dh_next, &enc.state.last);
    axpy(1.0, &dh_next, &mut g.init_b.data);
    let mut dlast = vec![0.0; 2 * hd];
    p.init_w.gemv_t_add(&dh_next, &mut dlast);

    for i in 0..m {
        g.att_w1.ger_add(&dproj[i], &enc.state.h[i]);
        let mut dhi = vec![0.0; 2 * hd];
        p.att_w1.gemv_t_add(&dproj[i], &mut dhi);
        axpy(1.0, &dhi, &mut dh_enc[i]);
    }

    let mut dx_src = vec![vec![0.0; p.src_emb.cols]; m];
    let mut dh = dlast[..hd].to_vec();
    let mut dc = vec![0.0; hd];
    for i in (0..m).rev() {
        axpy(1.0, &dh_enc[i][..hd], &mut dh);
        let (dx, dhp, dcp) = lstm_back(&p.enc_fw, &mut g.enc_fw, &enc.fw[i], &dh, &dc);
        axpy(1.0, &dx, &mut dx_src[i]);
        dh = dhp;
        dc = dcp;
    }
    let mut dh = dlast[hd..].to_vec();
    let mut dc = vec![0.0; hd];
    for k in (0..m).rev() {
        let i = m - 1 - k;
        axpy(1.0, &dh_enc[i][hd..], &mut dh);
        let (dx, dhp, dcp) = lstm_back(&p.enc_bw, &mut g.enc_bw, &enc.bw[k], &dh, &dc);
        axpy(1.0, &dx, &mut dx_src[i]);
        dh = dhp;
        dc = dcp;
    }
    for (i, mut dx) in dx_src.into_iter().enumerate() {
        apply(&enc.emb_mask[i], &mut dx);
        let t = ex.source[i].min(p.src_emb.rows - 1);
        axpy(1.0, &dx, g.src_emb.row_mut(t));
    }
    Ok(parts)
}
