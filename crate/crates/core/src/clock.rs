//! The time observable of the clock.
//!
//! Weak eigenfunctions of `T` come in two families, one per momentum half-line:
//!
//! ```text
//! ψ_{tα}(p) = θ(αp) √|p| exp(−i t p²/2) / √(2π),   α = ±1
//! ```
//!
//! Pairing a state with them gives the time amplitudes `A_α(t) = ⟨t,α|φ⟩`, the
//! arrival-time density `ρ(t) = Σ_α |A_α(t)|²`, and the positive operators
//! `τ(X) = Σ_α ∫_X |t,α⟩⟨t,α| dt`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{Branch, MomentumGrid, WaveFunction};
use crate::matrix::OperatorMatrix;
use crate::par;

/// Smallest time grid accepted by [`TimeGrid::new`].
pub const MIN_TIME_SAMPLES: usize = 16;

/// Smallest trapezoid node count for `τ(X)`.
pub const MIN_POVM_NODES: usize = 64;

/// Captured mass below which [`mean_and_variance`] refuses to report moments.
pub const MIN_CAPTURED_MASS: f64 = 1.0 - 1e-3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Time nodes per work item in [`amplitudes`]; the phase `exp(i t E)` is advanced
/// by recurrence inside a chunk and recomputed exactly at its start.
const CHUNK: usize = 64;

#[inline]
pub(crate) fn cis(theta: f64) -> Complex64 {
    let (s, c) = libm::sincos(theta);
    Complex64::new(c, s)
}

/// `ψ_{tα}(p)`.
pub fn eigenfunction(t: f64, branch: Branch, p: f64) -> Result<Complex64> {
    if p == 0.0 {
        return Err(Error::Domain("eigenfunctions are singular at p = 0".into()));
    }
    if branch.sign() * p < 0.0 {
        return Ok(ZERO);
    }
    let modulus = libm::sqrt(libm::fabs(p) / (2.0 * PI));
    Ok(modulus * cis(-0.5 * t * p * p))
}

/// Uniform time nodes `t_min, t_min + dt, …, t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    dt: f64,
    samples: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, m: usize) -> Result<Arc<TimeGrid>> {
        if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
            return Err(Error::Parameter(format!("need finite t_min < t_max, got ({t_min}, {t_max})")));
        }
        if m < MIN_TIME_SAMPLES {
            return Err(Error::Parameter(format!("need m >= {MIN_TIME_SAMPLES} time samples, got {m}")));
        }
        let dt = (t_max - t_min) / (m - 1) as f64;
        let samples = (0..m).map(|j| t_min + j as f64 * dt).collect();
        Ok(Arc::new(TimeGrid { t_min, t_max, dt, samples }))
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Composite trapezoid weight of node `j`.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.samples.len() {
            0.5 * self.dt
        } else {
            self.dt
        }
    }

    /// Trapezoid integral of sampled values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(j, v)| self.weight(j) * v).sum()
    }
}

/// `A_{+1}(t_j)` and `A_{−1}(t_j)` on a time grid.
#[derive(Debug, Clone)]
pub struct TimeAmplitudes {
    pub timegrid: Arc<TimeGrid>,
    pub a_plus: Vec<Complex64>,
    pub a_minus: Vec<Complex64>,
}

impl TimeAmplitudes {
    pub fn branch(&self, branch: Branch) -> &[Complex64] {
        match branch {
            Branch::Plus => &self.a_plus,
            Branch::Minus => &self.a_minus,
        }
    }
}

/// Time amplitudes by direct quadrature over the momentum grid, O(m·n).
///
/// `A_α(t) = Σ_k w_k √p_k exp(+i t p_k²/2) φ(α p_k) / √(2π)`, summed in
/// ascending `k` for every output node.
pub fn amplitudes(phi: &WaveFunction, tg: &Arc<TimeGrid>) -> TimeAmplitudes {
    let grid = phi.grid();
    let n = grid.n();
    let values = phi.values();
    let norm = 1.0 / libm::sqrt(2.0 * PI);

    let mut f_plus = Vec::with_capacity(n);
    let mut f_minus = Vec::with_capacity(n);
    let mut energies = Vec::with_capacity(n);
    for k in 0..n {
        let p = grid.magnitude(k);
        let scale = norm * grid.half_weight(k) * libm::sqrt(p);
        f_plus.push(values[grid.index(Branch::Plus, k)] * scale);
        f_minus.push(values[grid.index(Branch::Minus, k)] * scale);
        energies.push(0.5 * p * p);
    }

    let m = tg.len();
    let times = tg.samples();
    let dt = tg.dt();
    let chunks = m.div_ceil(CHUNK);
    let blocks = par::map_indices(chunks, |c| {
        let j0 = c * CHUNK;
        let len = CHUNK.min(m - j0);
        let mut acc_plus = [ZERO; CHUNK];
        let mut acc_minus = [ZERO; CHUNK];
        for k in 0..n {
            let (fp, fm) = (f_plus[k], f_minus[k]);
            if fp == ZERO && fm == ZERO {
                continue;
            }
            let e = energies[k];
            let step = cis(dt * e);
            let mut z = cis(times[j0] * e);
            for j in 0..len {
                acc_plus[j] += fp * z;
                acc_minus[j] += fm * z;
                z *= step;
            }
        }
        (acc_plus[..len].to_vec(), acc_minus[..len].to_vec())
    });

    let mut a_plus = Vec::with_capacity(m);
    let mut a_minus = Vec::with_capacity(m);
    for (p, q) in blocks {
        a_plus.extend(p);
        a_minus.extend(q);
    }
    TimeAmplitudes { timegrid: tg.clone(), a_plus, a_minus }
}

/// Arrival-time density `ρ(t) = Σ_α |A_α(t)|²` on a time grid.
#[derive(Debug, Clone)]
pub struct TimeDistribution {
    pub timegrid: Arc<TimeGrid>,
    pub density: Vec<f64>,
    /// Trapezoid integral of the density over the window.
    pub total_mass: f64,
}

impl TimeDistribution {
    pub fn from_amplitudes(amps: &TimeAmplitudes) -> Self {
        let density: Vec<f64> = amps
            .a_plus
            .iter()
            .zip(&amps.a_minus)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect();
        let total_mass = amps.timegrid.integrate(&density);
        TimeDistribution { timegrid: amps.timegrid.clone(), density, total_mass }
    }

    /// Node with the largest density.
    pub fn peak_time(&self) -> f64 {
        let (j, _) = self
            .density
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (j, &v)| if v > best.1 { (j, v) } else { best });
        self.timegrid.samples()[j]
    }

    /// `∫ tᵏ ρ(t) dt` over the window.
    pub fn raw_moment(&self, order: i32) -> f64 {
        let t = self.timegrid.samples();
        let vals: Vec<f64> = self.density.iter().zip(t).map(|(r, t)| r * libm::pow(*t, order as f64)).collect();
        self.timegrid.integrate(&vals)
    }
}

pub fn time_distribution(phi: &WaveFunction, tg: &Arc<TimeGrid>) -> TimeDistribution {
    TimeDistribution::from_amplitudes(&amplitudes(phi, tg))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of the density normalized by its captured mass.
pub fn mean_and_variance(d: &TimeDistribution) -> Result<Moments> {
    if !(d.total_mass >= MIN_CAPTURED_MASS) {
        return Err(Error::Truncation {
            mass: d.total_mass,
            detail: format!("moments need captured mass >= {MIN_CAPTURED_MASS}"),
        });
    }
    let t = d.timegrid.samples();
    let weighted = |f: &dyn Fn(f64) -> f64| -> f64 {
        let vals: Vec<f64> = d.density.iter().zip(t).map(|(r, &t)| r * f(t)).collect();
        d.timegrid.integrate(&vals) / d.total_mass
    };
    let mean = weighted(&|t| t);
    let variance = weighted(&|t| (t - mean) * (t - mean)).max(0.0);
    Ok(Moments { mean, variance })
}

/// Finite time interval `(a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Interval> {
        if a.is_infinite() || b.is_infinite() {
            return Err(Error::Unsupported("unbounded intervals have no finite POVM matrix".into()));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Parameter(format!("interval needs a < b, got ({a}, {b}]")));
        }
        Ok(Interval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.a <= other.a && other.b <= self.b
    }
}

/// Time integration rule for `τ(X)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeQuadrature {
    /// Composite trapezoid with the given node count (at least [`MIN_POVM_NODES`]).
    Trapezoid(usize),
    /// Trapezoid with the node count chosen so the fastest phase on the grid,
    /// `p_max² dt / 2`, advances less than π/4 per step.
    PhaseResolved,
    /// Closed-form time integral of each matrix entry.
    Exact,
}

impl TimeQuadrature {
    /// Node count the rule uses on `x` for a grid reaching `p_max`.
    pub fn nodes(&self, x: &Interval, p_max: f64) -> Option<usize> {
        match *self {
            TimeQuadrature::Trapezoid(n) => Some(n),
            TimeQuadrature::PhaseResolved => {
                let max_step = FRAC_PI_4 / (0.5 * p_max * p_max);
                let steps = libm::floor(x.length() / max_step) as usize + 1;
                Some((steps + 1).max(MIN_POVM_NODES))
            }
            TimeQuadrature::Exact => None,
        }
    }
}

/// Matrix of `τ(X)` together with the quadrature that produced it.
#[derive(Debug, Clone)]
pub struct PovmElement {
    interval: Interval,
    /// Time nodes and trapezoid weights; `None` for exact integration.
    nodes: Option<(Vec<f64>, Vec<f64>)>,
    matrix: OperatorMatrix,
}

impl PovmElement {
    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> OperatorMatrix {
        self.matrix
    }

    pub fn time_nodes(&self) -> Option<&[f64]> {
        self.nodes.as_ref().map(|(t, _)| t.as_slice())
    }

    /// `⟨φ|τ(X)|φ⟩`.
    ///
    /// For trapezoid matrices this evaluates `Σ_j ω_j Σ_α |⟨t_j,α|φ⟩|²`, the same
    /// number as `c† M c` summed in an order that cannot go negative.
    pub fn expectation(&self, phi: &WaveFunction) -> Result<f64> {
        crate::hilbert::ensure_same_grid(self.matrix.grid(), phi.grid())?;
        let Some((times, weights)) = &self.nodes else {
            return Ok(self.matrix.quadratic_form(&phi.coefficients()).re);
        };
        let grid = phi.grid();
        let coeffs = phi.coefficients();
        let vectors = half_line_vectors(grid);
        let mut total = 0.0;
        for (t, w) in times.iter().zip(weights) {
            for branch in Branch::BOTH {
                let amp: Complex64 = (0..grid.n())
                    .map(|k| (vectors[k] * cis(-t * 0.5 * grid.magnitude(k) * grid.magnitude(k))).conj()
                        * coeffs[grid.index(branch, k)])
                    .sum();
                total += w * amp.norm_sqr();
            }
        }
        Ok(total)
    }
}

/// `√(w_k p_k / 2π)`: the modulus of `ψ_{tα}` times `√w` on sample `k` of a half-line.
fn half_line_vectors(grid: &MomentumGrid) -> Vec<f64> {
    (0..grid.n())
        .map(|k| libm::sqrt(grid.half_weight(k) * grid.magnitude(k) / (2.0 * PI)))
        .collect()
}

/// Matrix of `τ(X)` in the `√w`-scaled basis.
///
/// `M_ij = Σ_α ∫_X ψ_{tα}(p_i) conj(ψ_{tα}(p_j)) dt · √(w_i w_j)`. The two
/// half-line blocks are mirror images and never couple.
pub fn povm_element(x: &Interval, grid: &Arc<MomentumGrid>, quadrature: TimeQuadrature) -> Result<PovmElement> {
    let n = grid.n();
    let scale = half_line_vectors(grid);
    let energies: Vec<f64> = (0..n).map(|k| 0.5 * grid.magnitude(k) * grid.magnitude(k)).collect();

    let (block, nodes): (Vec<Vec<Complex64>>, _) = match quadrature.nodes(x, grid.p_max()) {
        Some(count) => {
            if count < MIN_POVM_NODES {
                return Err(Error::Parameter(format!(
                    "POVM time quadrature needs >= {MIN_POVM_NODES} nodes, got {count}"
                )));
            }
            let h = x.length() / (count - 1) as f64;
            let times: Vec<f64> = (0..count).map(|j| x.a() + j as f64 * h).collect();
            let weights: Vec<f64> =
                (0..count).map(|j| if j == 0 || j + 1 == count { 0.5 * h } else { h }).collect();
            // columns v_j[k] = scale_k exp(−i t_j E_k)
            let phases: Vec<Vec<Complex64>> = times
                .iter()
                .map(|t| (0..n).map(|k| scale[k] * cis(-t * energies[k])).collect())
                .collect();
            let rows = par::map_indices(n, |k| {
                let mut row = vec![ZERO; n];
                for (v, w) in phases.iter().zip(&weights) {
                    let vk = v[k] * *w;
                    for l in k..n {
                        row[l] += vk * v[l].conj();
                    }
                }
                row
            });
            (rows, Some((times, weights)))
        }
        None => {
            let (a, b) = (x.a(), x.b());
            let len = x.length();
            let rows = par::map_indices(n, |k| {
                let mut row = vec![ZERO; n];
                for l in k..n {
                    let delta = energies[k] - energies[l];
                    let half = 0.5 * len * delta;
                    let sinc = if half == 0.0 { 1.0 } else { libm::sin(half) / half };
                    row[l] = scale[k] * scale[l] * len * sinc * cis(-0.5 * (a + b) * delta);
                }
                row
            });
            (rows, None)
        }
    };

    let dim = grid.len();
    let mut data = vec![ZERO; dim * dim];
    for k in 0..n {
        for l in k..n {
            let v = block[k][l];
            let (v, vc) = if k == l { (Complex64::new(v.re, 0.0), Complex64::new(v.re, 0.0)) } else { (v, v.conj()) };
            for branch in Branch::BOTH {
                let (i, j) = (grid.index(branch, k), grid.index(branch, l));
                data[i * dim + j] = v;
                data[j * dim + i] = vc;
            }
        }
    }
    Ok(PovmElement { interval: *x, nodes, matrix: OperatorMatrix::from_dense(grid, data)? })
}
