//! Complex square matrices over a momentum grid.
//!
//! Matrices act on `√w`-scaled coefficients (see [`WaveFunction::coefficients`]),
//! so the plain ℓ² structure of `C^{2n}` is the grid inner product and
//! "Hermitian" or "positive semidefinite" mean what they say.
//!
//! Finite-difference operators are stored as bands; `τ(X)` is dense. Products of
//! bands stay banded.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{ensure_same_grid, MomentumGrid, WaveFunction};

/// Relative Hermiticity tolerance, `max|M − M†| < HERMITIAN_TOLERANCE · max|M|`.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
enum Storage {
    /// Row-major `dim × dim`.
    Dense(Vec<Complex64>),
    /// Row `i` holds columns `i − half_bw ..= i + half_bw` at offsets `0 ..= 2·half_bw`.
    Banded { half_bw: usize, data: Vec<Complex64> },
}

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    grid: Arc<MomentumGrid>,
    dim: usize,
    storage: Storage,
}

impl OperatorMatrix {
    pub fn identity(grid: &Arc<MomentumGrid>) -> Self {
        Self::diagonal(grid, vec![1.0; grid.len()])
    }

    /// Real diagonal matrix.
    pub fn diagonal(grid: &Arc<MomentumGrid>, diag: Vec<f64>) -> Self {
        assert_eq!(diag.len(), grid.len(), "diagonal length must match the grid");
        let data = diag.into_iter().map(|d| Complex64::new(d, 0.0)).collect();
        OperatorMatrix { grid: grid.clone(), dim: grid.len(), storage: Storage::Banded { half_bw: 0, data } }
    }

    /// Dense matrix from row-major entries.
    pub fn from_dense(grid: &Arc<MomentumGrid>, data: Vec<Complex64>) -> Result<Self> {
        let dim = grid.len();
        if data.len() != dim * dim {
            return Err(Error::Usage(format!("dense matrix needs {} entries, got {}", dim * dim, data.len())));
        }
        Ok(OperatorMatrix { grid: grid.clone(), dim, storage: Storage::Dense(data) })
    }

    /// Banded matrix; `entry(i, j)` is queried for `|i − j| ≤ half_bw` only.
    pub fn from_band(
        grid: &Arc<MomentumGrid>,
        half_bw: usize,
        mut entry: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let dim = grid.len();
        let width = 2 * half_bw + 1;
        let mut data = vec![ZERO; dim * width];
        for i in 0..dim {
            for j in band_columns(i, half_bw, dim) {
                data[i * width + j + half_bw - i] = entry(i, j);
            }
        }
        OperatorMatrix { grid: grid.clone(), dim, storage: Storage::Banded { half_bw, data } }
    }

    pub fn grid(&self) -> &Arc<MomentumGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Half bandwidth for banded storage, `None` for dense.
    pub fn half_bandwidth(&self) -> Option<usize> {
        match &self.storage {
            Storage::Banded { half_bw, .. } => Some(*half_bw),
            Storage::Dense(_) => None,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        assert!(i < self.dim && j < self.dim, "index ({i}, {j}) out of range");
        match &self.storage {
            Storage::Dense(data) => data[i * self.dim + j],
            Storage::Banded { half_bw, data } => {
                let b = *half_bw;
                if i.abs_diff(j) > b {
                    ZERO
                } else {
                    data[i * (2 * b + 1) + j + b - i]
                }
            }
        }
    }

    /// Nonzero-pattern column range of row `i`.
    fn row_range(&self, i: usize) -> core::ops::RangeInclusive<usize> {
        match &self.storage {
            Storage::Dense(_) => 0..=self.dim - 1,
            Storage::Banded { half_bw, .. } => band_columns(i, *half_bw, self.dim),
        }
    }

    /// `M·c` for a coefficient vector.
    pub fn apply(&self, c: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(c.len(), self.dim, "vector length must match the matrix");
        (0..self.dim)
            .map(|i| self.row_range(i).map(|j| self.get_unchecked(i, j) * c[j]).sum())
            .collect()
    }

    /// Applies the matrix to a state, returning a state on the same grid.
    pub fn apply_state(&self, phi: &WaveFunction) -> Result<WaveFunction> {
        ensure_same_grid(&self.grid, phi.grid())?;
        WaveFunction::from_coefficients(self.grid.clone(), &self.apply(&phi.coefficients()))
    }

    /// `c† M c`.
    pub fn quadratic_form(&self, c: &[Complex64]) -> Complex64 {
        self.apply(c).iter().zip(c).map(|(mc, ci)| ci.conj() * mc).sum()
    }

    #[inline]
    fn get_unchecked(&self, i: usize, j: usize) -> Complex64 {
        match &self.storage {
            Storage::Dense(data) => data[i * self.dim + j],
            Storage::Banded { half_bw, data } => data[i * (2 * half_bw + 1) + j + half_bw - i],
        }
    }

    pub fn max_abs(&self) -> f64 {
        let data = match &self.storage {
            Storage::Dense(d) => d,
            Storage::Banded { data, .. } => data,
        };
        data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M − M†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in self.row_range(i) {
                if j < i {
                    continue;
                }
                let d = (self.get_unchecked(i, j) - self.get_unchecked(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOLERANCE * self.max_abs()
    }

    pub(crate) fn ensure_hermitian(&self) -> Result<()> {
        let defect = self.hermiticity_defect();
        let scale = self.max_abs();
        if defect <= HERMITIAN_TOLERANCE * scale {
            Ok(())
        } else {
            Err(Error::Usage(format!("matrix is not Hermitian: max|M - M†| = {defect:.3e}, max|M| = {scale:.3e}")))
        }
    }

    /// `½(M + M†)`, Hermitian to the last bit.
    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        let dim = self.dim;
        match &mut out.storage {
            Storage::Dense(data) => {
                for i in 0..dim {
                    for j in i..dim {
                        let v = 0.5 * (self.get_unchecked(i, j) + self.get_unchecked(j, i).conj());
                        data[i * dim + j] = v;
                        data[j * dim + i] = v.conj();
                    }
                }
            }
            Storage::Banded { half_bw, data } => {
                let b = *half_bw;
                let width = 2 * b + 1;
                for i in 0..dim {
                    for j in i..=(i + b).min(dim - 1) {
                        let v = 0.5 * (self.get_unchecked(i, j) + self.get_unchecked(j, i).conj());
                        data[i * width + j + b - i] = v;
                        data[j * width + i + b - j] = v.conj();
                    }
                }
            }
        }
        out
    }

    /// `M + c·I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        let dim = self.dim;
        match &mut out.storage {
            Storage::Dense(data) => (0..dim).for_each(|i| data[i * dim + i] += c),
            Storage::Banded { half_bw, data } => {
                let width = 2 * *half_bw + 1;
                (0..dim).for_each(|i| data[i * width + *half_bw] += c);
            }
        }
        out
    }

    /// Matrix product `self · other`. Band times band stays banded.
    pub fn product(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        ensure_same_grid(&self.grid, &other.grid)?;
        match (&self.storage, &other.storage) {
            (Storage::Banded { half_bw: a, .. }, Storage::Banded { half_bw: b, .. }) => {
                let hb = (a + b).min(self.dim - 1);
                Ok(OperatorMatrix::from_band(&self.grid, hb, |i, j| {
                    let lo = i.saturating_sub(*a).max(j.saturating_sub(*b));
                    let hi = (i + a).min(j + b).min(self.dim - 1);
                    if lo > hi {
                        return ZERO;
                    }
                    (lo..=hi).map(|k| self.get_unchecked(i, k) * other.get_unchecked(k, j)).sum()
                }))
            }
            _ => {
                let blocks_a = self.block_split();
                let blocks_b = other.block_split();
                let data = if let (Some((a0, a1)), Some((b0, b1))) = (blocks_a, blocks_b) {
                    let n = self.dim / 2;
                    let p0 = a0 * b0;
                    let p1 = a1 * b1;
                    let mut data = vec![ZERO; self.dim * self.dim];
                    for i in 0..n {
                        for j in 0..n {
                            data[i * self.dim + j] = p0[(i, j)];
                            data[(n + i) * self.dim + n + j] = p1[(i, j)];
                        }
                    }
                    data
                } else {
                    let prod = self.to_nalgebra() * other.to_nalgebra();
                    row_major(&prod)
                };
                OperatorMatrix::from_dense(&self.grid, data)
            }
        }
    }

    pub fn square(&self) -> Result<OperatorMatrix> {
        self.product(self)
    }

    /// Entrywise `self − other` as a dense matrix.
    pub fn difference(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let dim = self.dim;
        let data = (0..dim * dim).map(|k| self.get(k / dim, k % dim) - other.get(k / dim, k % dim)).collect();
        OperatorMatrix::from_dense(&self.grid, data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        let data = match &self.storage {
            Storage::Dense(d) => d,
            Storage::Banded { data, .. } => data,
        };
        libm::sqrt(data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Row-major copy of all entries.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let dim = self.dim;
        (0..dim * dim).map(|k| self.get(k / dim, k % dim)).collect()
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Splits into the two half-line diagonal blocks if every cross-block entry is zero.
    fn block_split(&self) -> Option<(DMatrix<Complex64>, DMatrix<Complex64>)> {
        let n = self.dim / 2;
        for i in 0..n {
            for j in n..self.dim {
                if self.get(i, j) != ZERO || self.get(j, i) != ZERO {
                    return None;
                }
            }
        }
        Some((
            DMatrix::from_fn(n, n, |i, j| self.get(i, j)),
            DMatrix::from_fn(n, n, |i, j| self.get(n + i, n + j)),
        ))
    }

    /// Eigenvalues of the Hermitian part, ascending. Half-line blocks are
    /// diagonalized separately when the matrix does not couple them.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.ensure_hermitian()?;
        let mut values: Vec<f64> = match self.block_split() {
            Some((b0, b1)) => {
                let mut v: Vec<f64> = b0.symmetric_eigenvalues().iter().copied().collect();
                v.extend(b1.symmetric_eigenvalues().iter().copied());
                v
            }
            None => self.to_nalgebra().symmetric_eigenvalues().iter().copied().collect(),
        };
        values.sort_by(f64::total_cmp);
        Ok(values)
    }
}

fn band_columns(i: usize, half_bw: usize, dim: usize) -> core::ops::RangeInclusive<usize> {
    i.saturating_sub(half_bw)..=(i + half_bw).min(dim - 1)
}

fn row_major(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let (rows, cols) = m.shape();
    (0..rows * cols).map(|k| m[(k / cols, k % cols)]).collect()
}
