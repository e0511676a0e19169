//! Discretized `q`, `p`, `H` and `T` on the two-block momentum grid.
//!
//! In the momentum representation `q = i d/dp`. The derivative is a fourth-order
//! central difference inside each half-line block with one-sided closures on the
//! two rows nearest each block edge, so nothing couples across `p = 0`.
//!
//! The time operator is `T = (2p)⁻¹q + q(2p)⁻¹`, which gives `[H, T] = −i` with
//! `H = p²/2`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{ensure_same_grid, MomentumGrid, WaveFunction};
use crate::matrix::OperatorMatrix;

/// Rows this close to a block edge are left out of commutator residuals.
pub const EDGE_EXCLUSION: usize = 4;

/// Variance below `−VARIANCE_TOLERANCE` is reported as a numerical error.
pub const VARIANCE_TOLERANCE: f64 = 1e-10;

/// Fourth-order first-derivative weights (times `12h`) for row `r` of a block of `n` samples.
fn stencil(r: usize, n: usize) -> (usize, [f64; 5]) {
    match r {
        0 => (0, [-25.0, 48.0, -36.0, 16.0, -3.0]),
        1 => (0, [-3.0, -10.0, 18.0, -6.0, 1.0]),
        _ if r + 2 == n => (n - 5, [-1.0, 6.0, -18.0, 10.0, 3.0]),
        _ if r + 1 == n => (n - 5, [3.0, -16.0, 36.0, -48.0, 25.0]),
        _ => (r - 2, [1.0, -8.0, 0.0, 8.0, -1.0]),
    }
}

#[derive(Debug, Clone)]
pub struct ClockOperators {
    pub grid: Arc<MomentumGrid>,
    pub q_mat: OperatorMatrix,
    pub p_mat: OperatorMatrix,
    pub h_mat: OperatorMatrix,
    pub t_mat: OperatorMatrix,
}

pub fn build_operators(grid: &Arc<MomentumGrid>) -> ClockOperators {
    let n = grid.n();
    let p = grid.samples();
    let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| libm::sqrt(*w)).collect();
    let scale = 1.0 / (12.0 * grid.dp());

    // i·D acting on √w-scaled coefficients: √w_i D_ij / √w_j.
    let q_raw = OperatorMatrix::from_band(grid, 4, |i, j| {
        let base = if i < n { 0 } else { n };
        if j < base || j >= base + n {
            return Complex64::new(0.0, 0.0);
        }
        let (start, w) = stencil(i - base, n);
        let c = j - base;
        if c < start || c >= start + 5 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, w[c - start] * scale * sqrt_w[i] / sqrt_w[j])
    });
    let q_mat = q_raw.symmetrized();

    let p_mat = OperatorMatrix::diagonal(grid, p.to_vec());
    let h_mat = OperatorMatrix::diagonal(grid, p.iter().map(|p| 0.5 * p * p).collect());
    let t_mat = OperatorMatrix::from_band(grid, 4, |i, j| {
        q_mat.get(i, j) * (0.5 / p[i] + 0.5 / p[j])
    })
    .symmetrized();

    ClockOperators { grid: grid.clone(), q_mat, p_mat, h_mat, t_mat }
}

/// `⟨φ|M|φ⟩` for Hermitian `M` and normalized `φ`.
pub fn expectation(m: &OperatorMatrix, phi: &WaveFunction) -> Result<f64> {
    check_inputs(m, phi)?;
    Ok(m.quadratic_form(&phi.coefficients()).re)
}

/// `√(⟨φ|M²|φ⟩ − ⟨φ|M|φ⟩²)`, evaluated as `‖(M − ⟨M⟩)φ‖`.
pub fn sigma(m: &OperatorMatrix, phi: &WaveFunction) -> Result<f64> {
    check_inputs(m, phi)?;
    let c = phi.coefficients();
    let mc = m.apply(&c);
    let mean: f64 = c.iter().zip(&mc).map(|(a, b)| (a.conj() * b).re).sum();
    let variance: f64 = mc.iter().zip(&c).map(|(a, b)| (a - b * mean).norm_sqr()).sum();
    if variance < -VARIANCE_TOLERANCE {
        return Err(Error::Numerical(format!("negative variance {variance:e}")));
    }
    Ok(libm::sqrt(variance.max(0.0)))
}

fn check_inputs(m: &OperatorMatrix, phi: &WaveFunction) -> Result<()> {
    ensure_same_grid(m.grid(), phi.grid())?;
    m.ensure_hermitian()?;
    if !phi.is_normalized() {
        return Err(Error::Usage(format!("state must be normalized, norm² = {}", phi.norm_sqr())));
    }
    Ok(())
}

impl ClockOperators {
    /// `‖(HT − TH)φ + iφ‖ / ‖φ‖` over rows at least [`EDGE_EXCLUSION`] + 1 samples from a block edge.
    pub fn commutator_residual(&self, phi: &WaveFunction) -> Result<f64> {
        ensure_same_grid(&self.grid, phi.grid())?;
        let c = phi.coefficients();
        let energies: Vec<f64> = self.grid.samples().iter().map(|p| 0.5 * p * p).collect();
        let tc = self.t_mat.apply(&c);
        let hc: Vec<Complex64> = c.iter().zip(&energies).map(|(c, e)| c * e).collect();
        let thc = self.t_mat.apply(&hc);
        let i_unit = Complex64::new(0.0, 1.0);
        Ok(self.interior_norm(|i| energies[i] * tc[i] - thc[i] + i_unit * c[i]) / phi.norm())
    }

    /// `‖(qp − pq)φ − iφ‖ / ‖φ‖` over interior rows.
    pub fn position_momentum_residual(&self, phi: &WaveFunction) -> Result<f64> {
        ensure_same_grid(&self.grid, phi.grid())?;
        let c = phi.coefficients();
        let p = self.grid.samples();
        let qc = self.q_mat.apply(&c);
        let pc: Vec<Complex64> = c.iter().zip(p).map(|(c, p)| c * p).collect();
        let qpc = self.q_mat.apply(&pc);
        let i_unit = Complex64::new(0.0, 1.0);
        Ok(self.interior_norm(|i| qpc[i] - p[i] * qc[i] - i_unit * c[i]) / phi.norm())
    }

    fn interior_norm(&self, row: impl Fn(usize) -> Complex64) -> f64 {
        let sum: f64 = (0..self.grid.len())
            .filter(|&i| self.grid.locate(i).1 > EDGE_EXCLUSION)
            .map(|i| row(i).norm_sqr())
            .sum();
        libm::sqrt(sum)
    }

    /// `σ_T σ_H`.
    pub fn uncertainty_product(&self, phi: &WaveFunction) -> Result<f64> {
        Ok(sigma(&self.t_mat, phi)? * sigma(&self.h_mat, phi)?)
    }
}

/// [`ClockOperators::commutator_residual`] on the state's own grid.
pub fn commutator_residual(phi: &WaveFunction) -> Result<f64> {
    build_operators(phi.grid()).commutator_residual(phi)
}

/// [`ClockOperators::uncertainty_product`] on the state's own grid.
pub fn uncertainty_product(phi: &WaveFunction) -> Result<f64> {
    build_operators(phi.grid()).uncertainty_product(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{evolve, gaussian_state, make_grid, Branch, GaussianStateSpec};

    fn state(p0: f64, sigma_p: f64, x0: f64, n: usize) -> WaveFunction {
        let g = make_grid(0.5, 12.0, n).unwrap();
        gaussian_state(&GaussianStateSpec::new(p0, sigma_p, x0).unwrap(), &g).unwrap()
    }

    #[test]
    fn stencils_differentiate_quartics_exactly() {
        let n = 12;
        for r in 0..n {
            let (start, w) = stencil(r, n);
            for deg in 0..=4 {
                let f = |x: f64| libm::pow(x, deg as f64);
                let d: f64 = (0..5).map(|c| w[c] * f((start + c) as f64)).sum::<f64>() / 12.0;
                let exact = if deg == 0 { 0.0 } else { deg as f64 * libm::pow(r as f64, (deg - 1) as f64) };
                assert!((d - exact).abs() < 1e-9, "row {r}, degree {deg}: {d} vs {exact}");
            }
        }
    }

    #[test]
    fn structure_invariants() {
        let g = make_grid(0.5, 12.0, 64).unwrap();
        let ops = build_operators(&g);
        for m in [&ops.q_mat, &ops.t_mat, &ops.p_mat, &ops.h_mat] {
            assert!(m.hermiticity_defect() <= 1e-10 * m.max_abs());
        }
        assert_eq!(ops.p_mat.half_bandwidth(), Some(0));
        for i in 0..64 {
            for j in 64..128 {
                assert_eq!(ops.t_mat.get(i, j), Complex64::new(0.0, 0.0));
                assert_eq!(ops.q_mat.get(j, i), Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn gaussian_moments_of_p_and_h() {
        let g = make_grid(0.5, 12.0, 2048).unwrap();
        let ops = build_operators(&g);
        let phi = gaussian_state(&GaussianStateSpec::new(4.0, 0.25, 0.0).unwrap(), &g).unwrap();
        assert!((expectation(&ops.p_mat, &phi).unwrap() - 4.0).abs() < 1e-6);
        assert!((expectation(&ops.h_mat, &phi).unwrap() - 8.03125).abs() < 1e-4);
        let closed = 0.5 * libm::sqrt(4.0 * 16.0 * 0.0625 + 2.0 * 0.0625 * 0.0625);
        assert!((sigma(&ops.h_mat, &phi).unwrap() - closed).abs() < 1e-6);
        assert!((expectation(&OperatorMatrix::identity(&g), &phi).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn time_operator_mean_is_classical() {
        let phi = state(4.0, 0.25, -8.0, 2048);
        let ops = build_operators(phi.grid());
        let t = expectation(&ops.t_mat, &phi).unwrap();
        assert!((t + 2.0).abs() < 0.02, "{t}");
    }

    #[test]
    fn position_momentum_commutator() {
        let phi = state(4.0, 0.25, 0.0, 2048);
        let r = build_operators(phi.grid()).position_momentum_residual(&phi).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn energy_time_commutator_converges_at_fourth_order() {
        let residual = |n| commutator_residual(&state(4.0, 0.25, -8.0, n)).unwrap();
        let (r1, r2) = (residual(512), residual(1024));
        assert!(r2 < 1e-3);
        assert!(r1 / r2 >= 8.0, "{r1} -> {r2}");
    }

    #[test]
    fn left_moving_state_uses_the_other_block() {
        let g = make_grid(0.5, 12.0, 2048).unwrap();
        let phi = gaussian_state(&GaussianStateSpec::new(-4.0, 0.25, 8.0).unwrap(), &g).unwrap();
        assert!(phi.values()[g.index(Branch::Plus, 1000)].norm() < 1e-30);
        assert!(commutator_residual(&phi).unwrap() < 1e-3);
    }

    #[test]
    fn sigma_properties() {
        let phi = state(6.0, 0.5, 0.0, 1024);
        let ops = build_operators(phi.grid());
        let s = sigma(&ops.t_mat, &phi).unwrap();
        let shifted = sigma(&ops.t_mat.shifted(3.5), &phi).unwrap();
        assert!((s - shifted).abs() < 1e-10);
        assert!(ops.uncertainty_product(&phi).unwrap() >= 0.4995);
        let h0 = sigma(&ops.h_mat, &phi).unwrap();
        for lambda in [-3.0, 0.4, 10.0] {
            assert!((sigma(&ops.h_mat, &evolve(&phi, lambda)).unwrap() - h0).abs() < 1e-10);
        }
        // a grid delta is an eigenvector of p
        let g = phi.grid().clone();
        let delta = WaveFunction::from_fn(g.clone(), |p| if p == g.samples()[700] { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
            .unwrap()
            .normalized()
            .unwrap();
        assert!(sigma(&ops.p_mat, &delta).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let phi = state(4.0, 0.25, 0.0, 64);
        let ops = build_operators(phi.grid());
        assert!(matches!(expectation(&ops.p_mat, &phi.scaled(Complex64::new(2.0, 0.0))), Err(Error::Usage(_))));
        let other = state(4.0, 0.25, 0.0, 128);
        assert!(expectation(&ops.p_mat, &other).is_err());
        let skew = OperatorMatrix::from_band(phi.grid(), 1, |i, j| Complex64::new((i as f64) - (j as f64), 0.0));
        assert!(matches!(expectation(&skew, &phi), Err(Error::Usage(_))));
    }
}
