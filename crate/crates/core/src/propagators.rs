//! Kick, harmonic rotation (fractional Fourier transform) and the Floquet step
//! `U = R_α V_K` on grid states.
//!
//! The rotation `R_α = e^{iα/2} exp(iα(Q² + P²)/2ħ)` is applied as a product of
//! three exact shears, `L(tan(β/2)) F(sin β) L(tan(β/2))` per sub-angle `β`,
//! where `L(a)` multiplies by `exp(i a Q²/2ħ)` in position space and `F(b)` by
//! `exp(i b P²/2ħ)` in momentum space. Angles are reduced modulo `2π`
//! (`R_{2π}` is the identity) and split so that `|β| ≤ π/4`; `α ≡ 0` and
//! `α ≡ π` are handled exactly.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;

use crate::error::{KhoError, Result};
use crate::fft::FftPair;
use crate::grid::GridSpec;
use crate::params::{KhoParams, KickSign};
use crate::state::QuantumState;

const EXACT_ANGLE_TOL: f64 = 1e-14;

/// Multiply by `exp(± i K cos(Q + φ) / ħ)`; the sign is [`KickSign::factor`].
pub fn apply_kick(state: &QuantumState, kick_strength: f64, kick_phase: f64, sign: KickSign) -> QuantumState {
    let g = *state.grid();
    let c = sign.factor() * kick_strength / g.hbar_eff();
    let amps = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(j, a)| a * Complex64::from_polar(1.0, c * (g.q(j) + kick_phase).cos()))
        .collect();
    QuantumState::from_parts(g, amps)
}

/// Apply `R_α`, checking the boundary guard before and after.
pub fn apply_rotation(state: &QuantumState, alpha: f64) -> Result<QuantumState> {
    RotationPlan::new(state.grid(), alpha)?.apply(state)
}

#[derive(Clone, Debug)]
enum RotationKind {
    Identity,
    /// `-ψ(-Q)`.
    NegParity,
    Shears {
        first: Vec<Complex64>,
        middle: Vec<Complex64>,
        last: Vec<Complex64>,
        momentum: Vec<Complex64>,
        steps: usize,
        fft: FftPair,
    },
}

/// Precomputed multipliers for `R_α` on one grid. Immutable once built, so one
/// plan can be shared by many threads.
#[derive(Clone, Debug)]
pub struct RotationPlan {
    grid: GridSpec,
    alpha: f64,
    kind: RotationKind,
}

/// `α` reduced to `(-π, π]`.
pub fn reduce_angle(alpha: f64) -> f64 {
    let r = alpha - TAU * (alpha / TAU).round();
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

impl RotationPlan {
    pub fn new(grid: &GridSpec, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(KhoError::invalid("rotation_angle", "not finite"));
        }
        let r = reduce_angle(alpha);
        let kind = if r.abs() < EXACT_ANGLE_TOL {
            RotationKind::Identity
        } else if (r.abs() - PI).abs() < EXACT_ANGLE_TOL {
            RotationKind::NegParity
        } else {
            Self::shears(grid, r)
        };
        Ok(RotationPlan {
            grid: *grid,
            alpha,
            kind,
        })
    }

    fn shears(grid: &GridSpec, r: f64) -> RotationKind {
        let n = grid.n_points();
        let h = grid.hbar_eff();
        let steps = (r.abs() / FRAC_PI_4).ceil().max(1.0) as usize;
        let beta = r / steps as f64;
        let t = (beta / 2.0).tan();
        let s = beta.sin();

        let half: Vec<Complex64> = (0..n)
            .map(|j| {
                let q = grid.q(j);
                Complex64::from_polar(1.0, t * q * q / (2.0 * h))
            })
            .collect();
        let phase = Complex64::from_polar(1.0, r / 2.0);
        let first = half.iter().map(|z| z * phase).collect();
        let middle = half.iter().map(|z| z * z).collect();
        let inv_n = 1.0 / n as f64;
        let momentum = (0..n)
            .map(|m| {
                let p = grid.fft_momentum(m);
                Complex64::from_polar(inv_n, s * p * p / (2.0 * h))
            })
            .collect();
        RotationKind::Shears {
            first,
            middle,
            last: half,
            momentum,
            steps,
            fft: FftPair::new(n),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Apply the rotation without boundary checks.
    pub fn apply_unchecked(&self, state: &QuantumState) -> Result<QuantumState> {
        self.grid.check_same(state.grid())?;
        let src = state.amplitudes();
        let out = match &self.kind {
            RotationKind::Identity => src.to_vec(),
            RotationKind::NegParity => {
                let n = src.len();
                (0..n).map(|j| -src[(n - j) % n]).collect()
            }
            RotationKind::Shears {
                first,
                middle,
                last,
                momentum,
                steps,
                fft,
            } => {
                let mut buf: Vec<Complex64> = src.iter().zip(first).map(|(a, b)| a * b).collect();
                for step in 0..*steps {
                    fft.forward.process(&mut buf);
                    buf.iter_mut().zip(momentum).for_each(|(a, b)| *a *= b);
                    fft.inverse.process(&mut buf);
                    let chirp = if step + 1 == *steps { last } else { middle };
                    buf.iter_mut().zip(chirp).for_each(|(a, b)| *a *= b);
                }
                buf
            }
        };
        Ok(QuantumState::from_parts(self.grid, out))
    }

    /// Apply the rotation, failing if the input or output violates the guard.
    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        state.check_boundary("propagators::apply_rotation")?;
        let out = self.apply_unchecked(state)?;
        out.check_boundary("propagators::apply_rotation")?;
        Ok(out)
    }
}

/// Precomputed Floquet step `R_α V_K` for one grid.
#[derive(Clone, Debug)]
pub struct FloquetPlan {
    params: KhoParams,
    kick: Vec<Complex64>,
    rotation: RotationPlan,
}

impl FloquetPlan {
    pub fn new(grid: &GridSpec, params: &KhoParams) -> Result<Self> {
        params.validate()?;
        if grid.hbar_eff() != params.hbar_eff {
            return Err(KhoError::HbarMismatch {
                state: grid.hbar_eff(),
                params: params.hbar_eff,
            });
        }
        let c = params.kick_sign.factor() * params.kick_strength / params.hbar_eff;
        let kick = (0..grid.n_points())
            .map(|j| Complex64::from_polar(1.0, c * (grid.q(j) + params.kick_phase).cos()))
            .collect();
        Ok(FloquetPlan {
            params: *params,
            kick,
            rotation: RotationPlan::new(grid, params.rotation_angle)?,
        })
    }

    pub fn params(&self) -> &KhoParams {
        &self.params
    }

    pub fn step(&self, state: &QuantumState) -> Result<QuantumState> {
        self.rotation.grid.check_same(state.grid())?;
        let kicked: Vec<Complex64> = state
            .amplitudes()
            .iter()
            .zip(&self.kick)
            .map(|(a, b)| a * b)
            .collect();
        self.rotation
            .apply(&QuantumState::from_parts(self.rotation.grid, kicked))
    }

    /// `U^n ψ` without keeping the intermediate states.
    pub fn evolve_final(&self, state: &QuantumState, n: usize) -> Result<QuantumState> {
        let mut cur = state.clone();
        for k in 1..=n {
            cur = self.step(&cur).map_err(|e| e.at_step(k))?;
        }
        Ok(cur)
    }
}

/// One Floquet step: kick, then rotate.
pub fn kho_step(state: &QuantumState, params: &KhoParams) -> Result<QuantumState> {
    FloquetPlan::new(state.grid(), params)?.step(state)
}

/// `[ψ, Uψ, …, Uⁿψ]`. A guard failure reports the step index it happened at.
pub fn kho_evolve(state: &QuantumState, params: &KhoParams, n: usize) -> Result<Vec<QuantumState>> {
    let plan = FloquetPlan::new(state.grid(), params)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(state.clone());
    for k in 1..=n {
        let next = plan.step(&out[k - 1]).map_err(|e| e.at_step(k))?;
        out.push(next);
    }
    Ok(out)
}

/// `R_α^n ψ`, applied one rotation at a time.
pub fn sho_evolve(state: &QuantumState, alpha: f64, n: usize) -> Result<QuantumState> {
    let plan = RotationPlan::new(state.grid(), alpha)?;
    let mut cur = state.clone();
    for k in 1..=n {
        cur = plan.apply(&cur).map_err(|e| e.at_step(k))?;
    }
    Ok(cur)
}
