//! Grid wave functions, Gaussian preparation, overlaps and observables.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KhoError, Representation, Result};
use crate::fft;
use crate::grid::GridSpec;

/// Boundary mass above which a state is considered to have overflowed its grid.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-10;

/// Wave function `ψ(Q)` sampled at the grid nodes (point samples, quadrature weight `dq`).
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
    grid: GridSpec,
}

impl QuantumState {
    pub fn from_amplitudes(grid: GridSpec, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(KhoError::invalid(
                "amplitudes",
                format!("{} samples for a {}-point grid", amplitudes.len(), grid.n_points()),
            ));
        }
        Ok(QuantumState { amplitudes, grid })
    }

    /// Sample `f(Q)` on the grid without normalizing.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Self {
        let amplitudes = (0..grid.n_points()).map(|j| f(grid.q(j))).collect();
        QuantumState { amplitudes, grid }
    }

    pub(crate) fn from_parts(grid: GridSpec, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), grid.n_points());
        QuantumState { amplitudes, grid }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn hbar_eff(&self) -> f64 {
        self.grid.hbar_eff()
    }

    /// `Σ |ψ_j|² dq`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dq()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n.is_finite() && n > 0.0) {
            return Err(KhoError::NotNormalized { norm: n });
        }
        let s = 1.0 / n.sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a *= s);
        Ok(self)
    }

    /// Multiply by `e^{iθ}`.
    pub fn with_global_phase(mut self, theta: f64) -> Self {
        let z = Complex64::from_polar(1.0, theta);
        self.amplitudes.iter_mut().for_each(|a| *a *= z);
        self
    }

    /// Normalized linear combination `Σ c_i ψ_i` of states on the same grid.
    pub fn superposition(terms: &[(Complex64, &QuantumState)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| KhoError::invalid("terms", "empty superposition"))?;
        let grid = first.grid;
        let mut amps = vec![Complex64::new(0.0, 0.0); grid.n_points()];
        for (c, s) in terms {
            grid.check_same(&s.grid)?;
            for (a, b) in amps.iter_mut().zip(&s.amplitudes) {
                *a += c * b;
            }
        }
        QuantumState::from_parts(grid, amps).normalized()
    }

    /// `|ψ(Q_j)|²` at each node.
    pub fn position_density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Momentum-space wave function `ψ̃(p_k)` on the centered momentum axis
    /// ([`GridSpec::momenta`]), normalized so that `Σ |ψ̃|² dp = Σ |ψ|² dq`.
    pub fn momentum_amplitudes(&self) -> Vec<Complex64> {
        let n = self.grid.n_points();
        let mut buf = self.amplitudes.clone();
        fft::forward(&mut buf);
        let scale = self.grid.dq() / (2.0 * PI * self.hbar_eff()).sqrt();
        let q_min = self.grid.q_min();
        (0..n)
            .map(|k| {
                let p = self.grid.p(k);
                let m = (k + n - n / 2) % n;
                buf[m] * Complex64::from_polar(scale, -p * q_min / self.hbar_eff())
            })
            .collect()
    }

    /// `|ψ̃(p_k)|²` on the centered momentum axis.
    pub fn momentum_density(&self) -> Vec<f64> {
        self.momentum_amplitudes().iter().map(|a| a.norm_sqr()).collect()
    }

    /// Probability in the outer nodes of the position grid.
    pub fn boundary_mass(&self) -> f64 {
        edge_mass(&self.position_density(), self.grid.edge_nodes()) * self.grid.dq()
    }

    /// Probability in the outer nodes of the momentum grid.
    pub fn momentum_boundary_mass(&self) -> f64 {
        edge_mass(&self.momentum_density(), self.grid.edge_nodes()) * self.grid.dp()
    }

    /// Fail with [`KhoError::GridOverflow`] if either representation carries
    /// more than [`BOUNDARY_MASS_LIMIT`] in its outer nodes.
    pub fn check_boundary(&self, module: &'static str) -> Result<()> {
        let q = self.boundary_mass();
        if !(q < BOUNDARY_MASS_LIMIT) {
            return Err(overflow(module, Representation::Position, q));
        }
        let p = self.momentum_boundary_mass();
        if !(p < BOUNDARY_MASS_LIMIT) {
            return Err(overflow(module, Representation::Momentum, p));
        }
        Ok(())
    }
}

fn edge_mass(density: &[f64], edge: usize) -> f64 {
    let n = density.len();
    let edge = edge.min(n / 2).max(1);
    density[..edge].iter().sum::<f64>() + density[n - edge..].iter().sum::<f64>()
}

fn overflow(module: &'static str, representation: Representation, mass: f64) -> KhoError {
    KhoError::GridOverflow {
        module,
        representation,
        mass,
        threshold: BOUNDARY_MASS_LIMIT,
        step: None,
    }
}

/// Squeezed, displaced Gaussian pure state.
///
/// `squeeze` is the ratio of the position width to that of the symmetric
/// minimum-uncertainty state; `tilt` rotates the squeeze axes anticlockwise in
/// the (Q, P) plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub q0: f64,
    pub p0: f64,
    pub squeeze: f64,
    pub tilt: f64,
}

impl Default for GaussianSpec {
    fn default() -> Self {
        GaussianSpec {
            q0: 0.0,
            p0: 0.0,
            squeeze: 1.0,
            tilt: 0.0,
        }
    }
}

impl GaussianSpec {
    pub fn centered_at(q0: f64, p0: f64) -> Self {
        GaussianSpec {
            q0,
            p0,
            ..Default::default()
        }
    }

    pub fn with_squeeze(mut self, squeeze: f64, tilt: f64) -> Self {
        self.squeeze = squeeze;
        self.tilt = tilt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.squeeze.is_finite() && self.squeeze > 0.0) {
            return Err(KhoError::invalid("squeeze", format!("{} must be > 0", self.squeeze)));
        }
        if !(self.q0.is_finite() && self.p0.is_finite() && self.tilt.is_finite()) {
            return Err(KhoError::invalid("gaussian", "center and tilt must be finite"));
        }
        Ok(())
    }

    /// Phase-space covariance `[[σ_QQ, σ_QP], [σ_QP, σ_PP]]` (symmetrized).
    pub fn covariance(&self, hbar_eff: f64) -> [[f64; 2]; 2] {
        let s2 = self.squeeze * self.squeeze;
        let (major, minor) = (s2 * hbar_eff / 2.0, hbar_eff / (2.0 * s2));
        let (s, c) = self.tilt.sin_cos();
        [
            [c * c * major + s * s * minor, s * c * (major - minor)],
            [s * c * (major - minor), s * s * major + c * c * minor],
        ]
    }

    /// Unit vector along the larger principal axis of the covariance, and the
    /// standard deviation along it.
    pub fn major_axis(&self, hbar_eff: f64) -> ([f64; 2], f64) {
        let (s, c) = self.tilt.sin_cos();
        let base = (hbar_eff / 2.0).sqrt();
        if self.squeeze >= 1.0 {
            ([c, s], base * self.squeeze)
        } else {
            ([-s, c], base / self.squeeze)
        }
    }

    /// Largest standard deviation of the state in any phase-space direction.
    pub fn max_width(&self, hbar_eff: f64) -> f64 {
        self.major_axis(hbar_eff).1
    }
}

/// Sample the Gaussian on `grid`, normalize it, and check the boundary guard.
pub fn prepare_gaussian(spec: &GaussianSpec, grid: &GridSpec) -> Result<QuantumState> {
    spec.validate()?;
    let hbar = grid.hbar_eff();
    let cov = spec.covariance(hbar);
    let a = hbar / (2.0 * cov[0][0]);
    let b = -cov[0][1] / cov[0][0];
    let width = Complex64::new(a, b) / (2.0 * hbar);
    let state = QuantumState::from_fn(*grid, |q| {
        let x = q - spec.q0;
        (-width * x * x + Complex64::new(0.0, spec.p0 * x / hbar)).exp()
    })
    .normalized()?;
    state.check_boundary("core::prepare_gaussian")?;
    Ok(state)
}

/// Automatically sized grid (see [`GridSpec::for_radius`]) for `n_kicks`
/// steps of strength `kick_strength` starting from `spec`.
pub fn auto_grid(spec: &GaussianSpec, hbar_eff: f64, kick_strength: f64, n_kicks: usize) -> Result<GridSpec> {
    spec.validate()?;
    let radius = crate::grid::dynamics_radius(
        spec.q0.hypot(spec.p0),
        spec.max_width(hbar_eff),
        kick_strength,
        n_kicks,
    );
    GridSpec::for_radius(radius, hbar_eff)
}

/// `Σ conj(a_j) b_j dq`.
pub fn inner_product(a: &QuantumState, b: &QuantumState) -> Result<Complex64> {
    a.grid.check_same(&b.grid)?;
    let s: Complex64 = a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(s * a.grid.dq())
}

/// `|⟨a|b⟩|`.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    Ok(inner_product(a, b)?.norm())
}

/// First and second moments of a state. `energy = (⟨Q²⟩ + ⟨P²⟩) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    pub energy: f64,
}

/// Moments of a normalized state; momentum moments come from the discrete
/// Fourier pair of the grid.
pub fn expectations(state: &QuantumState) -> Result<Observables> {
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(KhoError::NotNormalized { norm });
    }
    let g = state.grid();
    let (mut m1, mut m2) = (0.0, 0.0);
    for (j, a) in state.amplitudes.iter().enumerate() {
        let w = a.norm_sqr();
        let q = g.q(j);
        m1 += w * q;
        m2 += w * q * q;
    }
    let (mean_q, q2) = (m1 * g.dq() / norm, m2 * g.dq() / norm);

    let mut buf = state.amplitudes.clone();
    fft::forward(&mut buf);
    let (mut total, mut p1, mut p2) = (0.0, 0.0, 0.0);
    for (m, a) in buf.iter().enumerate() {
        let w = a.norm_sqr();
        let p = g.fft_momentum(m);
        total += w;
        p1 += w * p;
        p2 += w * p * p;
    }
    let (mean_p, p2) = (p1 / total, p2 / total);
    Ok(Observables {
        mean_q,
        mean_p,
        var_q: q2 - mean_q * mean_q,
        var_p: p2 - mean_p * mean_p,
        energy: 0.5 * (q2 + p2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(h: f64) -> GridSpec {
        GridSpec::balanced(1024, h).unwrap()
    }

    #[test]
    fn symmetric_state_is_minimum_uncertainty() {
        let s = prepare_gaussian(&GaussianSpec::default(), &grid(1.0)).unwrap();
        let o = expectations(&s).unwrap();
        assert!((o.var_q.sqrt() * o.var_p.sqrt() - 0.5).abs() < 1e-10);
        assert!((o.var_q - 0.5).abs() < 1e-10);
        assert!((o.energy - 0.5).abs() < 1e-10);
    }

    #[test]
    fn squeeze_ratio() {
        let spec = GaussianSpec::default().with_squeeze(2.0, 0.0);
        let o = expectations(&prepare_gaussian(&spec, &grid(1.0)).unwrap()).unwrap();
        assert!((o.var_q.sqrt() - 2.0 * 0.5f64.sqrt()).abs() < 1e-8);
        assert!((o.var_p.sqrt() - 0.5f64.sqrt() / 2.0).abs() < 1e-8);
        assert!((o.energy - 1.0625).abs() < 1e-8);
    }

    #[test]
    fn displacement() {
        let spec = GaussianSpec::centered_at(1.5, -0.5);
        let o = expectations(&prepare_gaussian(&spec, &grid(0.9)).unwrap()).unwrap();
        assert!((o.mean_q - 1.5).abs() < 1e-8);
        assert!((o.mean_p + 0.5).abs() < 1e-8);
        assert!((o.var_q - 0.45).abs() < 1e-8);

        let spec = GaussianSpec::centered_at(2.0, 0.0);
        let o = expectations(&prepare_gaussian(&spec, &grid(1.0)).unwrap()).unwrap();
        assert!((o.energy - 2.5).abs() < 1e-8);
    }

    #[test]
    fn tilted_covariance_recovered() {
        let spec = GaussianSpec::centered_at(0.3, 0.7).with_squeeze(1.7, 0.6);
        let h = 0.8;
        let s = prepare_gaussian(&spec, &grid(h)).unwrap();
        let o = expectations(&s).unwrap();
        let c = spec.covariance(h);
        assert!((o.var_q - c[0][0]).abs() < 1e-8);
        assert!((o.var_p - c[1][1]).abs() < 1e-8);
        assert!((c[0][0] * c[1][1] - c[0][1] * c[0][1] - h * h / 4.0).abs() < 1e-12);
    }

    #[test]
    fn parseval() {
        let spec = GaussianSpec::centered_at(-1.0, 2.0).with_squeeze(0.7, 0.3);
        let s = prepare_gaussian(&spec, &grid(0.5)).unwrap();
        let pn: f64 = s.momentum_density().iter().sum::<f64>() * s.grid().dp();
        assert!((pn - s.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn momentum_amplitude_matches_analytic_gaussian() {
        // ψ̃(p) of a coherent state centered at (q0, p0) has modulus
        // (πħ)^{-1/4} exp(-(p - p0)² / 2ħ).
        let h = 1.0;
        let spec = GaussianSpec::centered_at(1.0, 0.5);
        let s = prepare_gaussian(&spec, &grid(h)).unwrap();
        let g = *s.grid();
        let amps = s.momentum_amplitudes();
        for k in (0..g.n_points()).step_by(37) {
            let p = g.p(k);
            let expect = (PI * h).powf(-0.25) * (-(p - 0.5) * (p - 0.5) / (2.0 * h)).exp();
            assert!((amps[k].norm() - expect).abs() < 1e-10, "p={p}");
        }
    }

    #[test]
    fn overlap_of_displaced_gaussians() {
        // |⟨g(0)|g(d)⟩| = exp(-d² / 4ħ), checked against direct quadrature of the
        // analytic Gaussians on a fine independent mesh.
        let h = 0.7;
        let g = grid(h);
        let a = prepare_gaussian(&GaussianSpec::default(), &g).unwrap();
        for &d in &[0.5, 1.0, 2.5] {
            let b = prepare_gaussian(&GaussianSpec::centered_at(d, 0.0), &g).unwrap();
            let got = inner_product(&a, &b).unwrap().norm();
            let mesh = 200_000;
            let (lo, hi) = (-15.0, 15.0);
            let step = (hi - lo) / mesh as f64;
            let norm = (PI * h).powf(-0.5);
            let quad: f64 = (0..mesh)
                .map(|i| {
                    let x = lo + (i as f64 + 0.5) * step;
                    norm * (-(x * x) / (2.0 * h) - (x - d) * (x - d) / (2.0 * h)).exp()
                })
                .sum::<f64>()
                * step;
            assert!((quad - (-d * d / (4.0 * h)).exp()).abs() < 1e-10);
            assert!((got - quad).abs() < 1e-10, "d={d}: {got} vs {quad}");
        }
    }

    #[test]
    fn far_apart_states_nearly_orthogonal() {
        let g = grid(1.0);
        let a = prepare_gaussian(&GaussianSpec::centered_at(-g.q_max() / 2.0, 0.0), &g).unwrap();
        let b = prepare_gaussian(&GaussianSpec::centered_at(g.q_max() / 2.0, 0.0), &g).unwrap();
        assert!(inner_product(&a, &b).unwrap().norm() < 1e-100);
        assert!((inner_product(&a, &a).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overflow_and_mismatch_errors() {
        let g = GridSpec::new(256, 3.0, 1.0).unwrap();
        let err = prepare_gaussian(&GaussianSpec::centered_at(2.5, 0.0), &g).unwrap_err();
        assert!(matches!(err, KhoError::GridOverflow { .. }));

        let a = prepare_gaussian(&GaussianSpec::default(), &grid(1.0)).unwrap();
        let b = prepare_gaussian(&GaussianSpec::default(), &grid(0.9)).unwrap();
        assert!(matches!(inner_product(&a, &b), Err(KhoError::GridMismatch)));
        assert!(prepare_gaussian(&GaussianSpec::default().with_squeeze(0.0, 0.0), &grid(1.0)).is_err());
    }

    #[test]
    fn expectations_require_normalization() {
        let g = grid(1.0);
        let s = QuantumState::from_fn(g, |q| Complex64::new((-q * q).exp(), 0.0));
        assert!(matches!(expectations(&s), Err(KhoError::NotNormalized { .. })));
    }
}
