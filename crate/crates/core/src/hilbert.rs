//! Discretized momentum-space Hilbert space.
//!
//! The momentum axis is cut into two mirror-image half-line blocks,
//! `[−p_max, −p_min]` and `[p_min, p_max]`, so the singular point `p = 0` of the
//! time operator never appears on the grid. Each block carries composite
//! trapezoid weights; the global sample order is the negative block followed by
//! the positive block, both ascending in `p`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest admissible per-half-line sample count.
pub const MIN_SAMPLES: usize = 16;

/// Modulus below which a Gaussian counts as vanished at the grid edges.
pub const EDGE_AMPLITUDE_LIMIT: f64 = 1e-8;

/// Minimal distance, in units of `sigma_p`, between `|p0|` and `p_min`.
pub const MIN_TAIL_SIGMAS: f64 = 6.0;

/// Tolerance used by [`WaveFunction::is_normalized`].
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Sign of the momentum half-line, labelling the two eigenfunction families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    /// `+1` or `-1`.
    pub fn from_sign(alpha: i32) -> Result<Branch> {
        match alpha {
            1 => Ok(Branch::Plus),
            -1 => Ok(Branch::Minus),
            other => Err(Error::Parameter(format!("branch must be +1 or -1, got {other}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MomentumGrid {
    p_min: f64,
    p_max: f64,
    n: usize,
    dp: f64,
    samples: Vec<f64>,
    weights: Vec<f64>,
}

impl PartialEq for MomentumGrid {
    fn eq(&self, other: &Self) -> bool {
        self.p_min == other.p_min && self.p_max == other.p_max && self.n == other.n
    }
}

/// Builds a two-block grid with `n` samples per half-line (`2n` in total).
pub fn make_grid(p_min: f64, p_max: f64, n: usize) -> Result<Arc<MomentumGrid>> {
    if !(p_min.is_finite() && p_max.is_finite()) {
        return Err(Error::Parameter(format!("momentum bounds must be finite, got ({p_min}, {p_max})")));
    }
    if !(0.0 < p_min && p_min < p_max) {
        return Err(Error::Parameter(format!("need 0 < p_min < p_max, got p_min = {p_min}, p_max = {p_max}")));
    }
    if n < MIN_SAMPLES {
        return Err(Error::Parameter(format!("need n >= {MIN_SAMPLES} samples per half-line, got {n}")));
    }
    let dp = (p_max - p_min) / (n - 1) as f64;
    let half: Vec<f64> = (0..n).map(|k| p_min + k as f64 * dp).collect();
    let half_weights: Vec<f64> = (0..n)
        .map(|k| if k == 0 || k == n - 1 { 0.5 * dp } else { dp })
        .collect();

    let mut samples = Vec::with_capacity(2 * n);
    let mut weights = Vec::with_capacity(2 * n);
    for k in (0..n).rev() {
        samples.push(-half[k]);
        weights.push(half_weights[k]);
    }
    samples.extend_from_slice(&half);
    weights.extend_from_slice(&half_weights);

    Ok(Arc::new(MomentumGrid { p_min, p_max, n, dp, samples, weights }))
}

impl MomentumGrid {
    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// Samples per half-line.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of samples, `2n`.
    pub fn len(&self) -> usize {
        2 * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Uniform spacing inside each block.
    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Global index of the `k`-th sample (counted outward from `p_min`) on a branch.
    #[inline]
    pub fn index(&self, branch: Branch, k: usize) -> usize {
        match branch {
            Branch::Plus => self.n + k,
            Branch::Minus => self.n - 1 - k,
        }
    }

    /// `|p|` of the `k`-th sample outward from `p_min`; identical on both blocks.
    #[inline]
    pub fn magnitude(&self, k: usize) -> f64 {
        self.samples[self.n + k]
    }

    /// Weight of the `k`-th sample outward from `p_min`; identical on both blocks.
    #[inline]
    pub fn half_weight(&self, k: usize) -> f64 {
        self.weights[self.n + k]
    }

    /// Block (branch) of a global index and its distance from the nearest block edge.
    pub fn locate(&self, i: usize) -> (Branch, usize) {
        let (branch, pos) = if i < self.n { (Branch::Minus, i) } else { (Branch::Plus, i - self.n) };
        (branch, pos.min(self.n - 1 - pos))
    }

    /// Trapezoid integral of sampled real values over both half-lines.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// A pure state sampled on a [`MomentumGrid`].
#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: Arc<MomentumGrid>,
    values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Arc<MomentumGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "state has {} amplitudes but the grid has {} samples",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Parameter(format!("non-finite amplitude at sample {i}")));
        }
        Ok(WaveFunction { grid, values })
    }

    /// Builds a state from a closure of the momentum.
    pub fn from_fn(grid: Arc<MomentumGrid>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.samples().iter().map(|&p| f(p)).collect();
        Self::new(grid, values)
    }

    /// Inverse of [`WaveFunction::coefficients`].
    pub fn from_coefficients(grid: Arc<MomentumGrid>, coefficients: &[Complex64]) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::Usage(format!(
                "{} coefficients for a grid of {} samples",
                coefficients.len(),
                grid.len()
            )));
        }
        let values = coefficients
            .iter()
            .zip(grid.weights())
            .map(|(c, w)| c / libm::sqrt(*w))
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<MomentumGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Amplitudes scaled by `√w`, so that the plain ℓ² product equals the grid inner product.
    pub fn coefficients(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| v * libm::sqrt(*w))
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| w * v.norm_sqr())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sqr())
    }

    pub fn is_normalized(&self) -> bool {
        libm::fabs(self.norm_sqr() - 1.0) < NORM_TOLERANCE
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 0.0) {
            return Err(Error::Domain("cannot normalize the zero state".into()));
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        WaveFunction { grid: self.grid.clone(), values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// Largest modulus among samples within `window` samples of `±p_min`.
    pub fn inner_edge_amplitude(&self, window: usize) -> f64 {
        let n = self.grid.n();
        (0..window.min(n))
            .flat_map(|k| Branch::BOTH.map(|b| self.grid.index(b, k)))
            .map(|i| self.values[i].norm())
            .fold(0.0, f64::max)
    }
}

/// Sampled Gaussian wave packet `(2πσ²)^(−1/4) exp(−(p−p0)²/(4σ²)) exp(−i x0 p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianStateSpec {
    pub p0: f64,
    pub sigma_p: f64,
    pub x0: f64,
}

impl GaussianStateSpec {
    pub fn new(p0: f64, sigma_p: f64, x0: f64) -> Result<Self> {
        if !(p0.is_finite() && x0.is_finite() && sigma_p.is_finite()) {
            return Err(Error::Parameter("Gaussian parameters must be finite".into()));
        }
        if !(sigma_p > 0.0) {
            return Err(Error::Parameter(format!("sigma_p must be positive, got {sigma_p}")));
        }
        Ok(GaussianStateSpec { p0, sigma_p, x0 })
    }

    /// Continuum amplitude at momentum `p`.
    pub fn amplitude(&self, p: f64) -> Complex64 {
        let s2 = self.sigma_p * self.sigma_p;
        let envelope = libm::pow(2.0 * PI * s2, -0.25) * libm::exp(-(p - self.p0) * (p - self.p0) / (4.0 * s2));
        let (s, c) = libm::sincos(-self.x0 * p);
        Complex64::new(envelope * c, envelope * s)
    }

    /// Checks that the packet vanishes at both edges of its half-line block.
    ///
    /// Requires `p_min ≤ |p0| ∓ 6σ ≤ p_max` and a continuum modulus below
    /// [`EDGE_AMPLITUDE_LIMIT`] at `|p| = p_min + 2Δp` and at `|p| = p_max`.
    pub fn check_admissible(&self, grid: &MomentumGrid) -> Result<()> {
        let mag = libm::fabs(self.p0);
        if mag - MIN_TAIL_SIGMAS * self.sigma_p < grid.p_min() {
            return Err(Error::Domain(format!(
                "Gaussian tail reaches p = 0 region: |p0| - {MIN_TAIL_SIGMAS}*sigma_p = {} < p_min = {}",
                mag - MIN_TAIL_SIGMAS * self.sigma_p,
                grid.p_min()
            )));
        }
        if mag + MIN_TAIL_SIGMAS * self.sigma_p > grid.p_max() {
            return Err(Error::Domain(format!(
                "Gaussian tail runs off the grid: |p0| + {MIN_TAIL_SIGMAS}*sigma_p = {} > p_max = {}",
                mag + MIN_TAIL_SIGMAS * self.sigma_p,
                grid.p_max()
            )));
        }
        let sign = if self.p0 >= 0.0 { 1.0 } else { -1.0 };
        let inner = grid.p_min() + 2.0 * grid.dp();
        let inner_amp = self.amplitude(sign * inner).norm();
        if inner_amp >= EDGE_AMPLITUDE_LIMIT {
            return Err(Error::Domain(format!(
                "Gaussian amplitude {inner_amp:.3e} at |p| = {inner:.6} exceeds {EDGE_AMPLITUDE_LIMIT:e} near p = 0"
            )));
        }
        let outer_amp = self.amplitude(sign * grid.p_max()).norm();
        if outer_amp >= EDGE_AMPLITUDE_LIMIT {
            return Err(Error::Domain(format!(
                "Gaussian amplitude {outer_amp:.3e} at |p| = p_max = {} exceeds {EDGE_AMPLITUDE_LIMIT:e}",
                grid.p_max()
            )));
        }
        Ok(())
    }

    pub fn is_admissible(&self, grid: &MomentumGrid) -> bool {
        self.check_admissible(grid).is_ok()
    }
}

/// Samples an admissible Gaussian and renormalizes it to unit grid norm.
pub fn gaussian_state(spec: &GaussianStateSpec, grid: &Arc<MomentumGrid>) -> Result<WaveFunction> {
    spec.check_admissible(grid)?;
    WaveFunction::from_fn(grid.clone(), |p| spec.amplitude(p))?.normalized()
}

/// Grid inner product `Σ w conj(a) b`.
pub fn inner(a: &WaveFunction, b: &WaveFunction) -> Result<Complex64> {
    ensure_same_grid(a.grid(), b.grid())?;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .zip(a.grid.weights())
        .map(|((x, y), w)| x.conj() * y * *w)
        .sum())
}

/// Free evolution `exp(−iλH)`, diagonal in momentum.
pub fn evolve(phi: &WaveFunction, lambda: f64) -> WaveFunction {
    let values = phi
        .values
        .iter()
        .zip(phi.grid.samples())
        .map(|(v, p)| {
            let (s, c) = libm::sincos(-lambda * 0.5 * p * p);
            v * Complex64::new(c, s)
        })
        .collect();
    WaveFunction { grid: phi.grid.clone(), values }
}

pub(crate) fn ensure_same_grid(a: &Arc<MomentumGrid>, b: &Arc<MomentumGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "grid mismatch: ({}, {}, {}) vs ({}, {}, {})",
            a.p_min, a.p_max, a.n, b.p_min, b.p_max, b.n
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reference_grid() -> Arc<MomentumGrid> {
        make_grid(0.5, 12.0, 2048).unwrap()
    }

    #[test]
    fn grid_has_two_blocks_and_avoids_zero() {
        let g = reference_grid();
        assert_eq!(g.samples().len(), 4096);
        assert!(g.samples().iter().all(|p| p.abs() >= 0.5));
        assert!(g.samples().windows(2).all(|w| w[0] < w[1]));
        for k in 0..g.n() {
            assert_eq!(g.samples()[g.index(Branch::Minus, k)], -g.samples()[g.index(Branch::Plus, k)]);
        }
    }

    #[test]
    fn half_line_weights_sum_to_length() {
        let g = make_grid(1.0, 2.0, 16).unwrap();
        let plus: f64 = (0..g.n()).map(|k| g.half_weight(k)).sum();
        assert_abs_diff_eq!(plus, 1.0, epsilon = 1e-12);
        assert!(g.weights().iter().all(|&w| w > 0.0));
        let total: f64 = g.weights().iter().sum();
        assert_abs_diff_eq!(total, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(matches!(make_grid(2.0, 1.0, 64), Err(Error::Parameter(_))));
        assert!(matches!(make_grid(0.0, 1.0, 64), Err(Error::Parameter(_))));
        assert!(matches!(make_grid(0.5, 1.0, 15), Err(Error::Parameter(_))));
    }

    #[test]
    fn linear_functions_integrate_exactly() {
        let g = make_grid(0.5, 12.0, 333).unwrap();
        let values: Vec<f64> = g.samples().iter().map(|p| 3.0 * p.abs() - 1.5).collect();
        // ∫ (3p − 1.5) over [0.5, 12], twice
        let exact = 2.0 * (1.5 * (144.0 - 0.25) - 1.5 * 11.5);
        assert!((g.integrate(&values) - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn gaussian_is_normalized_with_expected_momentum() {
        let g = reference_grid();
        let spec = GaussianStateSpec::new(4.0, 0.25, -8.0).unwrap();
        let phi = gaussian_state(&spec, &g).unwrap();
        assert_abs_diff_eq!(phi.norm(), 1.0, epsilon = 1e-10);
        assert!(phi.is_normalized());

        let spec0 = GaussianStateSpec::new(4.0, 0.25, 0.0).unwrap();
        let phi0 = gaussian_state(&spec0, &g).unwrap();
        let mean_p: f64 = phi0
            .values()
            .iter()
            .zip(g.samples())
            .zip(g.weights())
            .map(|((v, p), w)| w * p * v.norm_sqr())
            .sum();
        assert_abs_diff_eq!(mean_p, 4.0, epsilon = 1e-6);
    }

    #[test]
    fn wide_gaussian_is_inadmissible() {
        let g = reference_grid();
        let spec = GaussianStateSpec::new(1.0, 1.0, 0.0).unwrap();
        assert!(matches!(gaussian_state(&spec, &g), Err(Error::Domain(_))));
        assert!(GaussianStateSpec::new(1.0, 0.0, 0.0).is_err());
        let off_grid = GaussianStateSpec::new(30.0, 0.25, 0.0).unwrap();
        assert!(!off_grid.is_admissible(&g));
    }

    #[test]
    fn inner_product_basics() {
        let g = reference_grid();
        let phi = gaussian_state(&GaussianStateSpec::new(4.0, 0.25, -8.0).unwrap(), &g).unwrap();
        let one = inner(&phi, &phi).unwrap();
        assert_abs_diff_eq!(one.re, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(one.im, 0.0, epsilon = 1e-12);

        let i_phi = phi.scaled(Complex64::i());
        let z = inner(&phi, &i_phi).unwrap();
        assert!((z - Complex64::i()).norm() < 1e-12);

        let mirrored = gaussian_state(&GaussianStateSpec::new(-4.0, 0.25, -8.0).unwrap(), &g).unwrap();
        assert!(inner(&phi, &mirrored).unwrap().norm() < 1e-10);
    }

    #[test]
    fn inner_rejects_grid_mismatch() {
        let a = WaveFunction::from_fn(make_grid(0.5, 12.0, 64).unwrap(), |_| Complex64::new(1.0, 0.0)).unwrap();
        let b = WaveFunction::from_fn(make_grid(0.5, 12.0, 65).unwrap(), |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(inner(&a, &b), Err(Error::Usage(_))));
    }

    #[test]
    fn evolution_group_law() {
        let g = reference_grid();
        let phi = gaussian_state(&GaussianStateSpec::new(4.0, 0.25, -8.0).unwrap(), &g).unwrap();
        let same = evolve(&phi, 0.0);
        assert_eq!(same.values(), phi.values());

        let back = evolve(&evolve(&phi, 1.7), -1.7);
        let err = back.values().iter().zip(phi.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "round trip error {err}");
        for lambda in [-100.0, -3.3, 0.25, 100.0] {
            assert_abs_diff_eq!(evolve(&phi, lambda).norm_sqr(), phi.norm_sqr(), epsilon = 1e-12);
        }
    }

    #[test]
    fn gaussian_vanishes_near_zero() {
        let g = reference_grid();
        let phi = gaussian_state(&GaussianStateSpec::new(4.0, 0.25, -8.0).unwrap(), &g).unwrap();
        assert!(phi.inner_edge_amplitude(3) < EDGE_AMPLITUDE_LIMIT);
    }

    #[test]
    fn branch_sign_round_trip() {
        assert_eq!(Branch::from_sign(1).unwrap(), Branch::Plus);
        assert_eq!(Branch::from_sign(-1).unwrap(), Branch::Minus);
        assert!(Branch::from_sign(0).is_err());
        assert_eq!(Branch::Plus.flipped(), Branch::Minus);
    }
}
