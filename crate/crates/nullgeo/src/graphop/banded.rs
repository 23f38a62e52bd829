//! Banded Gaussian elimination with partial pivoting, for the Newton
//! systems of the graph solver (bandwidth set by the stencil span).

use crate::error::{Error, Result};
use crate::real::Real;

/// Square banded matrix with `kl` subdiagonals and `ku` superdiagonals.
/// Each row stores the window [i - kl, i + ku + kl]; the extra `kl`
/// superdiagonals hold fill-in generated by row pivoting.
pub struct BandedMatrix<F> {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    width: usize,
    data: Vec<F>,
}

impl<F: Real> BandedMatrix<F> {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = kl + ku + kl + 1;
        BandedMatrix { n, kl, ku, width, data: vec![F::zero(); n * width] }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let lo = i.saturating_sub(self.kl);
        if j < lo || j > i + self.ku + self.kl || j >= self.n {
            return None;
        }
        Some(i * self.width + (j - lo))
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside band kl={} ku={}", self.kl, self.ku));
        assert!(
            j <= i + self.ku || j < i,
            "entry ({i}, {j}) in fill-in region; only kl/ku band may be set"
        );
        self.data[s] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.slot(i, j).map(|s| self.data[s]).unwrap_or(F::zero())
    }

    /// Solve A x = b by banded LU with partial pivoting.  Consumes the
    /// matrix (the factorization overwrites the band).
    pub fn solve(mut self, b: &[F]) -> Result<Vec<F>> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x = b.to_vec();
        let scale = self.data.iter().fold(F::zero(), |m, v| m.max(v.abs())).max(F::of(1e-300));
        for k in 0..n {
            // Pivot among rows k..=k+kl.
            let last = (k + self.kl).min(n - 1);
            let mut piv = k;
            for r in (k + 1)..=last {
                if self.get(r, k).abs() > self.get(piv, k).abs() {
                    piv = r;
                }
            }
            let pval = self.get(piv, k);
            if pval.abs() <= F::of(1e-14) * scale {
                return Err(Error::IllConditioned {
                    cond: (scale / pval.abs().max(F::of(1e-300))).to_f64().unwrap_or(f64::INFINITY),
                });
            }
            if piv != k {
                let hi = (k + self.ku + self.kl).min(n - 1);
                for j in k..=hi {
                    let a = self.get(k, j);
                    let b2 = self.get(piv, j);
                    if let Some(s) = self.slot(k, j) {
                        self.data[s] = b2;
                    }
                    if let Some(s) = self.slot(piv, j) {
                        self.data[s] = a;
                    }
                }
                x.swap(k, piv);
            }
            let d = self.get(k, k);
            for r in (k + 1)..=last {
                let f = self.get(r, k) / d;
                if f == F::zero() {
                    continue;
                }
                let hi = (k + self.ku + self.kl).min(n - 1);
                for j in k..=hi {
                    let v = self.get(r, j) - f * self.get(k, j);
                    if let Some(s) = self.slot(r, j) {
                        self.data[s] = v;
                    }
                }
                x[r] = x[r] - f * x[k];
            }
        }
        // Back substitution.
        for k in (0..n).rev() {
            let hi = (k + self.ku + self.kl).min(n - 1);
            let mut acc = x[k];
            for j in (k + 1)..=hi {
                acc = acc - self.get(k, j) * x[j];
            }
            x[k] = acc / self.get(k, k);
        }
        Ok(x)
    }
}
