//! Uniform lattice holding graph values u(x) over a box in the slab's
//! spatial coordinates, with second-order finite differences.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::real::Real;

#[derive(Clone, Debug)]
pub struct GraphGrid<F> {
    pub d: usize,
    pub lo: Vec<F>,
    pub hi: Vec<F>,
    pub shape: Vec<usize>,
    pub h: Vec<F>,
    /// Node values, row-major in the multi-index (last axis fastest).
    pub u: Vec<F>,
}

impl<F: Real> GraphGrid<F> {
    pub fn new(lo: Vec<F>, hi: Vec<F>, shape: Vec<usize>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert_eq!(lo.len(), shape.len());
        assert!(shape.iter().all(|&s| s >= 3), "need at least 3 nodes per axis");
        let d = lo.len();
        let h: Vec<F> = (0..d)
            .map(|i| (hi[i] - lo[i]) / F::from_usize(shape[i] - 1).unwrap())
            .collect();
        let len = shape.iter().product();
        GraphGrid { d, lo, hi, shape, h, u: vec![F::zero(); len] }
    }

    pub fn from_fn(lo: Vec<F>, hi: Vec<F>, shape: Vec<usize>, f: impl Fn(&[F]) -> F) -> Self {
        let mut g = Self::new(lo, hi, shape);
        for idx in 0..g.len() {
            let x = g.coords(idx);
            g.u[idx] = f(&x);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Multi-index of a flat node index.
    pub fn multi(&self, mut idx: usize) -> Vec<usize> {
        let mut mi = vec![0usize; self.d];
        for axis in (0..self.d).rev() {
            mi[axis] = idx % self.shape[axis];
            idx /= self.shape[axis];
        }
        mi
    }

    pub fn flat(&self, mi: &[usize]) -> usize {
        let mut idx = 0usize;
        for axis in 0..self.d {
            debug_assert!(mi[axis] < self.shape[axis]);
            idx = idx * self.shape[axis] + mi[axis];
        }
        idx
    }

    pub fn coords(&self, idx: usize) -> Vec<F> {
        let mi = self.multi(idx);
        (0..self.d).map(|a| self.lo[a] + self.h[a] * F::from_usize(mi[a]).unwrap()).collect()
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        let mi = self.multi(idx);
        (0..self.d).all(|a| mi[a] >= 1 && mi[a] + 1 < self.shape[a])
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_interior(i)).collect()
    }

    fn shifted(&self, mi: &[usize], axis: usize, delta: isize) -> usize {
        let mut m = mi.to_vec();
        m[axis] = (m[axis] as isize + delta) as usize;
        self.flat(&m)
    }

    /// Central-difference gradient at an interior node.
    pub fn gradient(&self, idx: usize) -> Result<Vec<F>> {
        if !self.is_interior(idx) {
            return Err(Error::BoundaryStencil(idx));
        }
        let mi = self.multi(idx);
        Ok((0..self.d)
            .map(|a| {
                (self.u[self.shifted(&mi, a, 1)] - self.u[self.shifted(&mi, a, -1)])
                    / (F::of(2.0) * self.h[a])
            })
            .collect())
    }

    /// Central-difference Hessian (4-point cross stencil off-diagonal).
    pub fn hessian(&self, idx: usize) -> Result<Mat<F>> {
        if !self.is_interior(idx) {
            return Err(Error::BoundaryStencil(idx));
        }
        let mi = self.multi(idx);
        let mut hess = Mat::zeros(self.d, self.d);
        for a in 0..self.d {
            let num = self.u[self.shifted(&mi, a, 1)] - F::of(2.0) * self.u[idx]
                + self.u[self.shifted(&mi, a, -1)];
            hess[(a, a)] = num / (self.h[a] * self.h[a]);
        }
        for a in 0..self.d {
            for b in (a + 1)..self.d {
                let mut m = mi.clone();
                m[a] += 1;
                m[b] += 1;
                let pp = self.u[self.flat(&m)];
                m[b] -= 2;
                let pm = self.u[self.flat(&m)];
                m[a] -= 2;
                let mm = self.u[self.flat(&m)];
                m[b] += 2;
                let mp = self.u[self.flat(&m)];
                let v = (pp - pm - mp + mm) / (F::of(4.0) * self.h[a] * self.h[b]);
                hess[(a, b)] = v;
                hess[(b, a)] = v;
            }
        }
        Ok(hess)
    }

    /// True when both grids share box, shape and spacing.
    pub fn same_lattice(&self, other: &Self) -> bool {
        self.shape == other.shape
            && self
                .lo
                .iter()
                .zip(&other.lo)
                .chain(self.hi.iter().zip(&other.hi))
                .all(|(a, b)| (*a - *b).abs() < F::of(1e-12))
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        for a in 0..self.d {
            write!(w, "x{a},")?;
        }
        writeln!(w, "u")?;
        for idx in 0..self.len() {
            for c in self.coords(idx) {
                write!(w, "{:.17e},", c)?;
            }
            writeln!(w, "{:.17e}", self.u[idx])?;
        }
        Ok(())
    }
}
