//! Banded LU factorization with partial pivoting for the solver's 9-point
//! systems. Row-major band storage with kl extra superdiagonals for pivot
//! fill-in; deterministic pivot choice (first maximal row).

use crate::error::{Error, Result};

/// General band matrix: row i owns columns [i - kl, i + kl + ku], the extra
/// kl on the right absorbing fill-in from row interchanges.
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

/// Factored form; `solve` applies the recorded permutation and triangular
/// sweeps.
pub struct BandLu {
    mat: BandMatrix,
    pivots: Vec<usize>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        assert!(n > 0);
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> Option<usize> {
        let lo = i.saturating_sub(self.kl);
        if j < lo || j > i + self.kl + self.ku || j >= self.n {
            return None;
        }
        Some(i * self.width + (j + self.kl - i))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.offset(i, j) {
            Some(k) => self.data[k],
            None => 0.0,
        }
    }

    /// Add into (i, j); the position must lie in the logical band
    /// [i - kl, i + ku] used during assembly.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(
            j + self.kl >= i && j <= i + self.ku,
            "assembly outside band: ({i}, {j})"
        );
        let k = self.offset(i, j).expect("entry outside band storage");
        self.data[k] += v;
    }

    /// In-place LU with partial pivoting. Deterministic: the first row with
    /// the maximal pivot magnitude wins.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let w = self.width;
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let i_max = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[k * w + kl].abs();
            for i in k + 1..=i_max {
                let v = self.data[i * w + k + kl - i].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < f64::MIN_POSITIVE.sqrt() {
                return Err(Error::Degenerate(format!(
                    "singular band matrix at column {k}"
                )));
            }
            pivots[k] = p;
            let j_max = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=j_max {
                    self.data.swap(k * w + j + kl - k, p * w + j + kl - p);
                }
            }
            let akk = self.data[k * w + kl];
            let (head, tail) = self.data.split_at_mut((k + 1) * w);
            let row_k = &head[k * w..];
            for i in k + 1..=i_max {
                let row_i = &mut tail[(i - k - 1) * w..(i - k) * w];
                let m = row_i[k + kl - i] / akk;
                row_i[k + kl - i] = m;
                if m != 0.0 {
                    let dst = &mut row_i[k + 1 + kl - i..=j_max + kl - i];
                    let src = &row_k[k + 1 + kl - k..=j_max + kl - k];
                    for (x, y) in dst.iter_mut().zip(src) {
                        *x -= m * *y;
                    }
                }
            }
        }
        Ok(BandLu { mat: self, pivots })
    }
}

impl BandLu {
    /// Solve A x = b in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.mat.n;
        let kl = self.mat.kl;
        let ku = self.mat.ku;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let i_max = (k + kl).min(n - 1);
            for i in k + 1..=i_max {
                b[i] -= self.mat.get(i, k) * b[k];
            }
        }
        for k in (0..n).rev() {
            let j_max = (k + kl + ku).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=j_max {
                s -= self.mat.get(k, j) * b[j];
            }
            b[k] = s / self.mat.get(k, k);
        }
    }
}
