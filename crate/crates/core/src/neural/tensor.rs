/// Row-major dense matrix; vectors are `cols == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `y += self * x`
    pub fn gemv_add(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            *yr += dot(self.row(r), x);
        }
    }

    pub fn gemv(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.gemv_add(x, &mut y);
        y
    }

    /// `dx += selfᵀ * dy`
    pub fn gemv_t_add(&self, dy: &[f64], dx: &mut [f64]) {
        debug_assert_eq!(dy.len(), self.rows);
        debug_assert_eq!(dx.len(), self.cols);
        for (r, &d) in dy.iter().enumerate() {
            if d != 0.0 {
                axpy(d, self.row(r), dx);
            }
        }
    }

    /// `self += dy * xᵀ`
    pub fn ger_add(&mut self, dy: &[f64], x: &[f64]) {
        debug_assert_eq!(dy.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (r, &d) in dy.iter().enumerate() {
            if d != 0.0 {
                let cols = self.cols;
                axpy(d, x, &mut self.data[r * cols..(r + 1) * cols]);
            }
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn softmax(u: &[f64]) -> Vec<f64> {
    let mx = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut e: Vec<f64> = u.iter().map(|x| (x - mx).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter_mut().for_each(|x| *x /= s);
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products() {
        let m = Mat {
            rows: 2,
            cols: 3,
            data: vec![1., 2., 3., 4., 5., 6.],
        };
        assert_eq!(m.gemv(&[1., 0., -1.]), vec![-2., -2.]);
        let mut dx = vec![0.0; 3];
        m.gemv_t_add(&[1., 1.], &mut dx);
        assert_eq!(dx, vec![5., 7., 9.]);
        let mut g = Mat::zeros(2, 3);
        g.ger_add(&[1., 2.], &[1., 0., 3.]);
        assert_eq!(g.data, vec![1., 0., 3., 2., 0., 6.]);
    }

    #[test]
    fn softmax_cases() {
        let a = softmax(&[3f64.ln(), 0.0]);
        assert!((a[0] - 0.75).abs() < 1e-15 && (a[1] - 0.25).abs() < 1e-15);
        let b = softmax(&[1000.0, 1000.0, 1000.0]);
        assert!(b.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        assert!((sigmoid(-800.0)).is_finite() && sigmoid(0.0) == 0.5);
    }
}
