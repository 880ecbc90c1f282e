//! Symmetric banded matrices and their `L D L^T` factorization.

use nalgebra::DMatrix;

/// Lower band storage: `band[i][d] = A[i][i - d]` for `d <= bandwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSym {
    n: usize,
    bandwidth: usize,
    band: Vec<f64>,
}

impl BandedSym {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            band: vec![0.0; n * (bandwidth + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        (d <= self.bandwidth).then_some(hi * (self.bandwidth + 1) + d)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.band[k])
    }

    /// Adds to the symmetric pair `(i, j)` and `(j, i)`; a single stored entry.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside the band"));
        self.band[k] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        let w = self.bandwidth + 1;
        for i in 0..self.n {
            y[i] += self.band[i * w] * x[i];
            for d in 1..=self.bandwidth.min(i) {
                let a = self.band[i * w + d];
                y[i] += a * x[i - d];
                y[i - d] += a * x[i];
            }
        }
        y
    }

    pub fn quadratic(&self, x: &[f64]) -> f64 {
        dot(&self.matvec(x), x)
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &BandedSym) -> BandedSym {
        assert_eq!(self.n, other.n);
        let bw = self.bandwidth.max(other.bandwidth);
        let mut out = BandedSym::zeros(self.n, bw);
        for i in 0..self.n {
            for d in 0..=bw.min(i) {
                let v = self.get(i, i - d) + s * other.get(i, i - d);
                out.band[i * (bw + 1) + d] = v;
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.band.iter().all(|&v| v == 0.0)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Stored entries `(i, j, value)` with `i >= j`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (0..=self.bandwidth.min(i)).map(move |d| (i, i - d, self.get(i, i - d)))
        })
    }

    /// Unpivoted `L D L^T`; `None` on an exactly zero or non-finite pivot.
    pub fn ldlt(&self) -> Option<Ldlt> {
        let n = self.n;
        let bw = self.bandwidth;
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        let mut d = vec![0.0; n];
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut dj = self.get(j, j);
            for k in lo..j {
                let ljk = l[j * w + (j - k)];
                dj -= ljk * ljk * d[k];
            }
            if dj == 0.0 || !dj.is_finite() {
                return None;
            }
            d[j] = dj;
            for i in j + 1..(j + bw + 1).min(n) {
                let lo_i = i.saturating_sub(bw);
                let mut v = self.get(i, j);
                for k in lo_i.max(lo)..j {
                    v -= l[i * w + (i - k)] * l[j * w + (j - k)] * d[k];
                }
                l[i * w + (i - j)] = v / dj;
            }
        }
        Some(Ldlt { n, bandwidth: bw, l, d })
    }
}

#[derive(Debug, Clone)]
pub struct Ldlt {
    n: usize,
    bandwidth: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl Ldlt {
    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    /// Number of negative eigenvalues, by Sylvester's law of inertia.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let w = self.bandwidth + 1;
        let mut x = b.to_vec();
        for i in 0..self.n {
            for k in i.saturating_sub(self.bandwidth)..i {
                x[i] -= self.l[i * w + (i - k)] * x[k];
            }
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..self.n).rev() {
            for k in i + 1..(i + self.bandwidth + 1).min(self.n) {
                x[i] -= self.l[k * w + (k - i)] * x[k];
            }
        }
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
