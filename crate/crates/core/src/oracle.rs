//! Dense number-basis propagator used as an independent reference for the grid
//! dynamics.
//!
//! `Q = sqrt(ħ/2)(a + a†)` and `P = i sqrt(ħ/2)(a† - a)` are truncated to `D`
//! levels. The kick matrix `cos(Q + φ)` is taken from the upper-left block of
//! the same function of a `2D`-level position operator (so the truncation edge
//! does not contaminate it), then exponentiated through its own eigenbasis.
//! The rotation is diagonal with entries `e^{iα(k+1)}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{KhoError, Result};
use crate::params::KhoParams;
use crate::state::QuantumState;

/// Default truncation dimension.
pub const DEFAULT_DIM: usize = 256;
/// Population allowed above `0.8·D`.
pub const POPULATION_LIMIT: f64 = 1e-12;

pub type FockState = DVector<Complex64>;

#[derive(Clone, Debug)]
pub struct FockOracle {
    dim: usize,
    params: KhoParams,
    rotation: DVector<Complex64>,
    kick: DMatrix<Complex64>,
}

fn position_matrix(dim: usize, hbar: f64) -> DMatrix<f64> {
    let c = (hbar / 2.0).sqrt();
    DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            c * (j as f64).sqrt()
        } else if i == j + 1 {
            c * (i as f64).sqrt()
        } else {
            0.0
        }
    })
}

/// Momentum operator in the number basis.
pub fn momentum_matrix(dim: usize, hbar: f64) -> DMatrix<Complex64> {
    let c = (hbar / 2.0).sqrt();
    DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            Complex64::new(0.0, -c * (j as f64).sqrt())
        } else if i == j + 1 {
            Complex64::new(0.0, c * (i as f64).sqrt())
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Position operator in the number basis.
pub fn position_matrix_complex(dim: usize, hbar: f64) -> DMatrix<Complex64> {
    position_matrix(dim, hbar).map(|x| Complex64::new(x, 0.0))
}

/// `U f(λ) Uᵀ` for a real symmetric eigendecomposition.
fn spectral(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let u = &eig.eigenvectors;
    let mut scaled = u.clone();
    for (mut col, &l) in scaled.column_iter_mut().zip(eig.eigenvalues.iter()) {
        col *= f(l);
    }
    scaled * u.transpose()
}

/// Largest entry of `|M - I|`.
fn max_dev_from_identity(m: &DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

impl FockOracle {
    pub fn build(params: &KhoParams, dim: usize) -> Result<Self> {
        params.validate()?;
        if dim < 4 {
            return Err(KhoError::invalid("dim", format!("{dim} < 4")));
        }
        let h = params.hbar_eff;
        let big = SymmetricEigen::new(position_matrix(2 * dim, h));
        let cos_big = spectral(&big, |l| (l + params.kick_phase).cos());
        let cos_q = cos_big.view((0, 0), (dim, dim)).into_owned();
        let cos_q = (&cos_q + cos_q.transpose()) * 0.5;

        let eig = SymmetricEigen::new(cos_q);
        let c = params.kick_sign.factor() * params.kick_strength / h;
        let re = spectral(&eig, |m| (c * m).cos());
        let im = spectral(&eig, |m| (c * m).sin());
        let kick = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(re[(i, j)], im[(i, j)]));

        let a = params.rotation_angle;
        let rotation = DVector::from_fn(dim, |k, _| Complex64::from_polar(1.0, a * (k as f64 + 1.0)));
        Ok(FockOracle {
            dim,
            params: *params,
            rotation,
            kick,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &KhoParams {
        &self.params
    }

    pub fn kick_matrix(&self) -> &DMatrix<Complex64> {
        &self.kick
    }

    pub fn rotation_diagonal(&self) -> &DVector<Complex64> {
        &self.rotation
    }

    /// `max |[Q, P] - iħ I|` over the upper-left `(D-2)×(D-2)` block.
    pub fn commutator_defect(&self) -> f64 {
        let h = self.params.hbar_eff;
        let q = position_matrix_complex(self.dim, h);
        let p = momentum_matrix(self.dim, h);
        let comm = &q * &p - &p * &q;
        let m = self.dim - 2;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let target = if i == j { Complex64::new(0.0, h) } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((comm[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// `max |V†V - I|` for the kick and the rotation.
    pub fn unitarity_defect(&self) -> f64 {
        let v = max_dev_from_identity(&(self.kick.adjoint() * &self.kick));
        let r = self
            .rotation
            .iter()
            .map(|z| (z.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max);
        v.max(r)
    }

    /// Population of levels `≥ 0.8·D`.
    pub fn tail_population(&self, state: &FockState) -> f64 {
        let cut = (self.dim * 4).div_ceil(5);
        state.iter().skip(cut).map(|z| z.norm_sqr()).sum()
    }

    fn guard(&self, state: &FockState) -> Result<()> {
        let pop = self.tail_population(state);
        if pop < POPULATION_LIMIT {
            Ok(())
        } else {
            Err(KhoError::Truncation {
                population: pop,
                level: (self.dim * 4).div_ceil(5),
                dim: self.dim,
            })
        }
    }

    pub fn step(&self, state: &FockState) -> FockState {
        let kicked = &self.kick * state;
        kicked.component_mul(&self.rotation)
    }

    /// `Uⁿ c`, checking the truncation guard before the first and after every step.
    pub fn evolve(&self, state: &FockState, n: usize) -> Result<FockState> {
        if state.len() != self.dim {
            return Err(KhoError::invalid("fock_state", format!("length {} != {}", state.len(), self.dim)));
        }
        self.guard(state)?;
        let mut cur = state.clone();
        for _ in 0..n {
            cur = self.step(&cur);
            self.guard(&cur)?;
        }
        Ok(cur)
    }

    /// Number-basis coefficients `c_k = ⟨k|ψ⟩` of a grid state.
    pub fn project(&self, state: &QuantumState) -> Result<FockState> {
        if state.hbar_eff() != self.params.hbar_eff {
            return Err(KhoError::HbarMismatch {
                state: state.hbar_eff(),
                params: self.params.hbar_eff,
            });
        }
        Ok(project(state, self.dim))
    }
}

/// Number-basis coefficients of a grid state in the first `dim` levels.
pub fn project(state: &QuantumState, dim: usize) -> FockState {
    let g = state.grid();
    let h = g.hbar_eff();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    let mut row = vec![0.0; dim];
    for (j, amp) in state.amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        hermite_functions(g.q(j) / h.sqrt(), h, &mut row);
        for (o, &phi) in out.iter_mut().zip(&row) {
            *o += amp * phi;
        }
    }
    let dq = g.dq();
    DVector::from_iterator(dim, out.into_iter().map(|z| z * dq))
}

/// Values of the first `out.len()` normalized oscillator eigenfunctions at
/// `Q = x·sqrt(ħ)`. The recurrence is carried in scaled form so that the
/// Gaussian factor does not underflow far from the origin.
pub fn hermite_functions(x: f64, hbar: f64, out: &mut [f64]) {
    const BIG: f64 = 1e150;
    let len = out.len();
    if len == 0 {
        return;
    }
    let mut log_scale = -0.25 * (std::f64::consts::PI * hbar).ln() - 0.5 * x * x;
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut raw = Vec::with_capacity(len);
    let mut scales = Vec::with_capacity(len);
    raw.push(cur);
    scales.push(log_scale);
    for k in 0..len - 1 {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            log_scale += BIG.ln();
        }
        raw.push(cur);
        scales.push(log_scale);
    }
    for ((o, r), s) in out.iter_mut().zip(raw).zip(scales) {
        *o = r * s.exp();
    }
}

/// `|⟨a|b⟩|` for number-basis vectors.
pub fn fock_fidelity(a: &FockState, b: &FockState) -> f64 {
    a.dotc(b).norm()
}

/// Outcome of [`evolve_projected`].
#[derive(Clone, Debug)]
pub struct OracleRun {
    pub dim: usize,
    pub initial: FockState,
    pub fin: FockState,
}

/// Project `state`, evolve it `n` steps, and on a truncation failure retry with
/// twice the dimension (up to `max_dim`).
pub fn evolve_projected(state: &QuantumState, params: &KhoParams, n: usize, start_dim: usize, max_dim: usize) -> Result<OracleRun> {
    let mut dim = start_dim;
    loop {
        let oracle = FockOracle::build(params, dim)?;
        let initial = oracle.project(state)?;
        match oracle.evolve(&initial, n) {
            Ok(fin) => return Ok(OracleRun { dim, initial, fin }),
            Err(KhoError::Truncation { .. }) if dim * 2 <= max_dim => dim *= 2,
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::propagators::{apply_rotation, FloquetPlan};
    use crate::state::{expectations, prepare_gaussian, GaussianSpec};
    use std::f64::consts::{PI, TAU};

    #[test]
    fn commutator_and_unitarity() {
        let p = KhoParams::new(2.0, 2.0 * PI / 3.0, 0.3, 0.9).unwrap();
        let o = FockOracle::build(&p, 64).unwrap();
        assert!(o.commutator_defect() < 1e-8);
        assert!(o.unitarity_defect() < 1e-10);
    }

    #[test]
    fn full_turn_is_identity() {
        let p = KhoParams::new(0.0, TAU, 0.0, 1.0).unwrap();
        let o = FockOracle::build(&p, 16).unwrap();
        for z in o.rotation_diagonal().iter() {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn hermite_functions_orthonormal() {
        // Check against a fine quadrature with h = 0.5.
        let h = 0.5;
        let (n, lo, hi) = (6000, -12.0, 12.0);
        let dq = (hi - lo) / n as f64;
        let dim = 30;
        let mut gram = vec![0.0; dim * dim];
        let mut row = vec![0.0; dim];
        for i in 0..n {
            let q = lo + i as f64 * dq;
            hermite_functions(q / f64::sqrt(h), h, &mut row);
            for a in 0..dim {
                for b in 0..dim {
                    gram[a * dim + b] += row[a] * row[b] * dq;
                }
            }
        }
        for a in 0..dim {
            for b in 0..dim {
                let t = if a == b { 1.0 } else { 0.0 };
                assert!((gram[a * dim + b] - t).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn hermite_functions_far_out() {
        // Scaled recurrence agrees with the unscaled one where the latter is safe,
        // and stays finite far from the origin.
        let mut a = vec![0.0; 40];
        hermite_functions(3.0, 1.0, &mut a);
        let mut b = vec![0.0; 40];
        b[0] = PI.powf(-0.25) * (-4.5f64).exp();
        b[1] = 2f64.sqrt() * 3.0 * b[0];
        for k in 1..39 {
            let kf = k as f64;
            b[k + 1] = (2.0 / (kf + 1.0)).sqrt() * 3.0 * b[k] - (kf / (kf + 1.0)).sqrt() * b[k - 1];
        }
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12 * (1.0 + y.abs()));
        }
        let mut far = vec![0.0; 1200];
        hermite_functions(45.0, 1.0, &mut far);
        assert!(far.iter().all(|v| v.is_finite()));
        assert!(far[1100].abs() > 1e-3);
    }

    #[test]
    fn vacuum_energy_and_stationarity() {
        let h = 0.7;
        let g = GridSpec::balanced(1024, h).unwrap();
        let s = prepare_gaussian(&GaussianSpec::default(), &g).unwrap();
        let p = KhoParams::new(0.0, 1.0, 0.0, h).unwrap();
        let o = FockOracle::build(&p, 32).unwrap();
        let c = o.project(&s).unwrap();
        assert!((c[0].norm() - 1.0).abs() < 1e-12);
        let out = o.evolve(&c, 5).unwrap();
        assert!((fock_fidelity(&c, &out) - 1.0).abs() < 1e-12);
        let q = position_matrix_complex(32, h);
        let p_op = momentum_matrix(32, h);
        let e = 0.5 * (out.dotc(&(&q * &q * &out)) + out.dotc(&(&p_op * &p_op * &out))).re;
        assert!((e - expectations(&s).unwrap().energy).abs() < 1e-10);
    }

    #[test]
    fn rotation_agrees_with_grid_including_phase() {
        let h = 0.9;
        let g = GridSpec::balanced(1024, h).unwrap();
        let s = prepare_gaussian(&GaussianSpec::centered_at(1.0, -0.5).with_squeeze(1.3, 0.2), &g).unwrap();
        let a = 1.1;
        let p = KhoParams::new(0.0, a, 0.0, h).unwrap();
        let o = FockOracle::build(&p, 128).unwrap();
        let via_grid = o.project(&apply_rotation(&s, a).unwrap()).unwrap();
        let via_fock = o.evolve(&o.project(&s).unwrap(), 1).unwrap();
        assert!((via_grid.dotc(&via_fock) - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn kick_step_agrees_with_grid() {
        let h = 0.9;
        let g = GridSpec::balanced(1024, h).unwrap();
        let s = prepare_gaussian(&GaussianSpec::default(), &g).unwrap();
        let p = KhoParams::new(2.0, PI / 3.0, 0.0, h).unwrap();
        let run = evolve_projected(&s, &p, 1, 256, 1024).unwrap();
        let grid_out = FloquetPlan::new(&g, &p).unwrap().step(&s).unwrap();
        let c = project(&grid_out, run.dim);
        assert!(1.0 - fock_fidelity(&c, &run.fin) < 1e-6);
    }

    #[test]
    fn truncation_guard() {
        let h = 1.0;
        let g = GridSpec::balanced(1024, h).unwrap();
        let s = prepare_gaussian(&GaussianSpec::centered_at(6.0, 0.0), &g).unwrap();
        let p = KhoParams::new(1.0, 1.0, 0.0, h).unwrap();
        let o = FockOracle::build(&p, 16).unwrap();
        let c = o.project(&s).unwrap();
        assert!(matches!(o.evolve(&c, 1), Err(KhoError::Truncation { .. })));
        let run = evolve_projected(&s, &p, 1, 16, 256).unwrap();
        assert!(run.dim > 16);
    }
}
