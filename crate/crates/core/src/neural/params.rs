use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::tensor::Mat;
use super::NeuralError;

pub const CHECKPOINT_HEADER: &str = "amrseq-checkpoint 1";

/// One LSTM cell: gates stacked as input, forget, output, candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    pub w: Mat,
    pub u: Mat,
    pub b: Mat,
}

impl Lstm {
    fn zeros(input: usize, hidden: usize) -> Lstm {
        Lstm {
            w: Mat::zeros(4 * hidden, input),
            u: Mat::zeros(4 * hidden, hidden),
            b: Mat::zeros(4 * hidden, 1),
        }
    }

    pub fn hidden(&self) -> usize {
        self.u.cols
    }
}

/// Dimensions that fix every tensor shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub src_vocab: usize,
    pub tgt_vocab: usize,
    pub embed: usize,
    pub hidden: usize,
    pub attn: usize,
}

/// All trainable tensors of the encoder-decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub src_emb: Mat,
    pub tgt_emb: Mat,
    pub enc_fw: Lstm,
    pub enc_bw: Lstm,
    /// Decoder initial state from `[h_fw_m; h_bw_m]`.
    pub init_w: Mat,
    pub init_b: Mat,
    pub dec: Lstm,
    pub att_v: Mat,
    /// Encoder output (2·hidden) to attention space.
    pub att_w1: Mat,
    /// Decoder state to attention space.
    pub att_w2: Mat,
    /// `[d_j; d'_j]` (3·hidden) to output logits.
    pub out_w3: Mat,
}

impl ParamSet {
    pub fn zeros(d: Dims) -> ParamSet {
        let h = d.hidden;
        ParamSet {
            src_emb: Mat::zeros(d.src_vocab, d.embed),
            tgt_emb: Mat::zeros(d.tgt_vocab, d.embed),
            enc_fw: Lstm::zeros(d.embed, h),
            enc_bw: Lstm::zeros(d.embed, h),
            init_w: Mat::zeros(h, 2 * h),
            init_b: Mat::zeros(h, 1),
            dec: Lstm::zeros(d.embed, h),
            att_v: Mat::zeros(d.attn, 1),
            att_w1: Mat::zeros(d.attn, 2 * h),
            att_w2: Mat::zeros(d.attn, h),
            out_w3: Mat::zeros(d.tgt_vocab, 3 * h),
        }
    }

    /// Every entry uniform in `[-scale, scale]`, drawn tensor by tensor in
    /// [`ParamSet::tensors`] order.
    pub fn init_uniform(d: Dims, scale: f64, rng: &mut ChaCha8Rng) -> ParamSet {
        let mut p = ParamSet::zeros(d);
        for (_, t) in p.tensors_mut() {
            for x in &mut t.data {
                *x = rng.gen_range(-scale..=scale);
            }
        }
        p
    }

    pub fn dims(&self) -> Dims {
        Dims {
            src_vocab: self.src_emb.rows,
            tgt_vocab: self.tgt_emb.rows,
            embed: self.src_emb.cols,
            hidden: self.dec.hidden(),
            attn: self.att_v.rows,
        }
    }

    pub fn zeros_like(&self) -> ParamSet {
        ParamSet::zeros(self.dims())
    }

    pub fn tensors(&self) -> Vec<(&'static str, &Mat)> {
        vec![
            ("src_emb", &self.src_emb),
            ("tgt_emb", &self.tgt_emb),
            ("enc_fw.w", &self.enc_fw.w),
            ("enc_fw.u", &self.enc_fw.u),
            ("enc_fw.b", &self.enc_fw.b),
            ("enc_bw.w", &self.enc_bw.w),
            ("enc_bw.u", &self.enc_bw.u),
            ("enc_bw.b", &self.enc_bw.b),
            ("init.w", &self.init_w),
            ("init.b", &self.init_b),
            ("dec.w", &self.dec.w),
            ("dec.u", &self.dec.u),
            ("dec.b", &self.dec.b),
            ("att.v", &self.att_v),
            ("att.w1", &self.att_w1),
            ("att.w2", &self.att_w2),
            ("out.w3", &self.out_w3),
        ]
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut Mat)> {
        vec![
            ("src_emb", &mut self.src_emb),
            ("tgt_emb", &mut self.tgt_emb),
            ("enc_fw.w", &mut self.enc_fw.w),
            ("enc_fw.u", &mut self.enc_fw.u),
            ("enc_fw.b", &mut self.enc_fw.b),
            ("enc_bw.w", &mut self.enc_bw.w),
            ("enc_bw.u", &mut self.enc_bw.u),
            ("enc_bw.b", &mut self.enc_bw.b),
            ("init.w", &mut self.init_w),
            ("init.b", &mut self.init_b),
            ("dec.w", &mut self.dec.w),
            ("dec.u", &mut self.dec.u),
            ("dec.b", &mut self.dec.b),
            ("att.v", &mut self.att_v),
            ("att.w1", &mut self.att_w1),
            ("att.w2", &mut self.att_w2),
            ("out.w3", &mut self.out_w3),
        ]
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.data.len()).sum()
    }

    pub fn sq_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|(_, t)| t.data.iter())
            .map(|x| x * x)
            .sum()
    }

    pub fn scale(&mut self, a: f64) {
        for (_, t) in self.tensors_mut() {
            t.data.iter_mut().for_each(|x| *x *= a);
        }
    }

    /// `self += a * other`
    pub fn add_scaled(&mut self, a: f64, other: &ParamSet) {
        for ((_, t), (_, o)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in t.data.iter_mut().zip(&o.data) {
                *x += a * y;
            }
        }
    }

    /// Text manifest (name, rows, cols, byte offset per tensor) terminated by
    /// `end`, then all tensors as row-major little-endian f64.
    pub fn to_checkpoint(&self) -> Vec<u8> {
        let mut manifest = format!("{CHECKPOINT_HEADER}\n");
        let mut offset = 0usize;
        for (name, t) in self.tensors() {
            manifest.push_str(&format!("{name} {} {} {offset}\n", t.rows, t.cols));
            offset += t.data.len() * 8;
        }
        manifest.push_str("end\n");
        let mut out = manifest.into_bytes();
        out.reserve(offset);
        for (_, t) in self.tensors() {
            for x in &t.data {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_checkpoint(bytes: &[u8]) -> Result<ParamSet, NeuralError> {
        let bad = |m: &str| NeuralError::Checkpoint(m.to_string());
        let end = bytes
            .windows(5)
            .position(|w| w == b"\nend\n")
            .ok_or_else(|| bad("missing manifest terminator"))?;
        let header = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("manifest is not UTF-8"))?;
        let body = &bytes[end + 5..];
        let mut lines = header.lines();
        if lines.next() != Some(CHECKPOINT_HEADER) {
            return Err(bad("unsupported header"));
        }
        let mut shapes = Vec::new();
        for l in lines {
            let f: Vec<&str> = l.split(' ').collect();
            let [name, r, c, o] = f.as_slice() else {
                return Err(bad("malformed manifest line"));
            };
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad number in manifest"));
            shapes.push((name.to_string(), num(r)?, num(c)?, num(o)?));
        }
        let src = shapes
            .iter()
            .find(|s| s.0 == "src_emb")
            .ok_or_else(|| bad("no src_emb"))?;
        let tgt = shapes
            .iter()
            .find(|s| s.0 == "tgt_emb")
            .ok_or_else(|| bad("no tgt_emb"))?;
        let v = shapes.iter().find(|s| s.0 == "att.v").ok_or_else(|| bad("no att.v"))?;
        let init = shapes
            .iter()
            .find(|s| s.0 == "init.b")
            .ok_or_else(|| bad("no init.b"))?;
        let mut p = ParamSet::zeros(Dims {
            src_vocab: src.1,
            tgt_vocab: tgt.1,
            embed: src.2,
            hidden: init.1,
            attn: v.1,
        });
        let tensors = p.tensors_mut();
        if tensors.len() != shapes.len() {
            return Err(bad("tensor count mismatch"));
        }
        let mut expected_offset = 0;
        for ((name, t), (sn, r, c, o)) in tensors.into_iter().zip(&shapes) {
            if name != sn || t.rows != *r || t.cols != *c || *o != expected_offset {
                return Err(bad(&format!("tensor {sn} inconsistent with manifest")));
            }
            let n = r * c;
            let chunk = body.get(*o..o + n * 8).ok_or_else(|| bad("truncated data"))?;
            for (x, b) in t.data.iter_mut().zip(chunk.chunks_exact(8)) {
                *x = f64::from_le_bytes(b.try_into().expect("8 bytes"));
            }
            expected_offset += n * 8;
        }
        if body.len() != expected_offset {
            return Err(bad("trailing bytes after tensor data"));
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn dims() -> Dims {
        Dims {
            src_vocab: 7,
            tgt_vocab: 5,
            embed: 3,
            hidden: 4,
            attn: 2,
        }
    }

    #[test]
    fn shapes_consistent() {
        let p = ParamSet::zeros(dims());
        assert_eq!(p.att_w1.cols, 8);
        assert_eq!(p.out_w3.cols, 12);
        assert_eq!(p.out_w3.rows, 5);
        assert_eq!(p.dims(), dims());
        assert_eq!(p.tensors().len(), 17);
    }

    #[test]
    fn init_range_and_determinism() {
        let a = ParamSet::init_uniform(dims(), 0.08, &mut ChaCha8Rng::seed_from_u64(3));
        let b = ParamSet::init_uniform(dims(), 0.08, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        assert!(a.tensors().iter().all(|(_, t)| t.data.iter().all(|x| x.abs() <= 0.08)));
    }

    #[test]
    fn checkpoint_byte_exact() {
        let p = ParamSet::init_uniform(dims(), 0.08, &mut ChaCha8Rng::seed_from_u64(9));
        let bytes = p.to_checkpoint();
        let q = ParamSet::from_checkpoint(&bytes).unwrap();
        assert_eq!(q, p);
        assert_eq!(q.to_checkpoint(), bytes);
        assert!(ParamSet::from_checkpoint(&bytes[..bytes.len() - 1]).is_err());
        assert!(ParamSet::from_checkpoint(b"nonsense").is_err());
    }
}
