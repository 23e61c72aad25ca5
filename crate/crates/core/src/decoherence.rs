//! Dephasing of a polarization qubit coupled to the kicked oscillator.
//!
//! With the qubit on the equator, one branch of the field evolves under the
//! full Floquet map and the other under the bare rotation. Tracing out the
//! field leaves `ρ = ½[[1, f e^{−iχ}], [f* e^{iχ}, 1]]` with the fidelity
//! amplitude `f(n) = ⟨R_αⁿ ψ | Uⁿ ψ⟩`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{KhoError, Result};
use crate::grid::{with_grid_growth, GridSpec};
use crate::par;
use crate::params::KhoParams;
use crate::propagators::{FloquetPlan, RotationPlan};
use crate::state::{auto_grid, inner_product, prepare_gaussian, GaussianSpec, QuantumState};

/// `f(n) = ⟨R_αⁿ ψ | Uⁿ ψ⟩`.
pub fn fidelity_amplitude(initial: &QuantumState, params: &KhoParams, n: usize) -> Result<Complex64> {
    Ok(*fidelity_amplitudes(initial, params, n)?.last().expect("n + 1 entries"))
}

/// `[f(0), …, f(n_max)]`, evolving both branches once.
pub fn fidelity_amplitudes(initial: &QuantumState, params: &KhoParams, n_max: usize) -> Result<Vec<Complex64>> {
    let kho = FloquetPlan::new(initial.grid(), params)?;
    let sho = RotationPlan::new(initial.grid(), params.rotation_angle)?;
    let (mut a, mut b) = (initial.clone(), initial.clone());
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(inner_product(&a, &b)?);
    for k in 1..=n_max {
        a = sho.apply(&a).map_err(|e| e.at_step(k))?;
        b = kho.step(&b).map_err(|e| e.at_step(k))?;
        out.push(inner_product(&a, &b)?);
    }
    Ok(out)
}

/// 2×2 density matrix in the {H, V} basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub rho: [[Complex64; 2]; 2],
}

impl QubitState {
    /// `½(I + s·σ)` for a Bloch vector `s = (x, y, z)`.
    pub fn from_bloch(s: [f64; 3]) -> Self {
        let h = 0.5;
        QubitState {
            rho: [
                [Complex64::new(h * (1.0 + s[2]), 0.0), Complex64::new(h * s[0], -h * s[1])],
                [Complex64::new(h * s[0], h * s[1]), Complex64::new(h * (1.0 - s[2]), 0.0)],
            ],
        }
    }

    /// Equatorial state with azimuth `chi` after dephasing by amplitude `f`.
    pub fn dephased(f: Complex64, chi: f64) -> Self {
        let c = 0.5 * f * Complex64::from_polar(1.0, -chi);
        let h = Complex64::new(0.5, 0.0);
        QubitState {
            rho: [[h, c], [c.conj(), h]],
        }
    }

    pub fn bloch(&self) -> [f64; 3] {
        let r = self.rho;
        [2.0 * r[0][1].re, -2.0 * r[0][1].im, (r[0][0] - r[1][1]).re]
    }

    pub fn trace(&self) -> Complex64 {
        self.rho[0][0] + self.rho[1][1]
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.rho.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues in ascending order (assumes Hermitian).
    pub fn eigenvalues(&self) -> [f64; 2] {
        let r = self.rho;
        let (a, d) = (r[0][0].re, r[1][1].re);
        let disc = ((a - d).powi(2) + 4.0 * r[0][1].norm_sqr()).sqrt();
        [0.5 * (a + d - disc), 0.5 * (a + d + disc)]
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let r = self.rho;
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((r[i][j] - r[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, o: &QubitState) -> f64 {
        self.rho
            .iter()
            .flatten()
            .zip(o.rho.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Check the density-matrix invariants.
    pub fn validate(&self) -> Result<()> {
        if self.hermiticity_defect() > 1e-12 {
            return Err(KhoError::invalid("rho", "not Hermitian"));
        }
        let t = self.trace();
        if (t - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(KhoError::invalid("rho", format!("trace {t}")));
        }
        let [lo, hi] = self.eigenvalues();
        if lo < -1e-10 || hi > 1.0 + 1e-10 {
            return Err(KhoError::invalid("rho", format!("eigenvalues {lo}, {hi}")));
        }
        Ok(())
    }
}

/// `ρ` after `n` steps for an equatorial qubit with azimuth `chi` (`0` is `|+⟩`).
pub fn dephase_qubit(initial: &QuantumState, params: &KhoParams, n: usize, chi: f64) -> Result<QubitState> {
    Ok(QubitState::dephased(fidelity_amplitude(initial, params, n)?, chi))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurityPoint {
    pub n: usize,
    pub purity: f64,
    pub fidelity: Complex64,
}

impl PurityPoint {
    pub fn from_fidelity(n: usize, f: Complex64) -> Self {
        PurityPoint {
            n,
            purity: 0.5 * (1.0 + f.norm_sqr()),
            fidelity: f,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurityCurve {
    pub params: KhoParams,
    pub grid: GridSpec,
    pub points: Vec<PurityPoint>,
}

impl PurityCurve {
    pub fn purities(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.purity).collect()
    }
}

/// Purity curve for `n = 0..=n_max` on an automatically sized grid.
pub fn purity_curve(spec: &GaussianSpec, params: &KhoParams, n_max: usize) -> Result<PurityCurve> {
    params.validate()?;
    spec.validate()?;
    let start = auto_grid(spec, params.hbar_eff, params.kick_strength, n_max)?;
    with_grid_growth(start, 3, |grid| {
        let psi = prepare_gaussian(spec, &grid)?;
        let f = fidelity_amplitudes(&psi, params, n_max)?;
        Ok(PurityCurve {
            params: *params,
            grid,
            points: f.into_iter().enumerate().map(|(n, f)| PurityPoint::from_fidelity(n, f)).collect(),
        })
    })
}

/// One `(K, ħ)` cell of a sweep; failures are kept per cell.
#[derive(Debug)]
pub struct SweepCell {
    pub kick_strength: f64,
    pub hbar_eff: f64,
    pub curve: Result<PurityCurve>,
}

/// Purity curves for every `(K, ħ)` pair, `K`-major. Cells run in parallel; the
/// other parameters come from `template`.
pub fn purity_sweep(spec: &GaussianSpec, template: &KhoParams, n_max: usize, hbar_list: &[f64], k_list: &[f64]) -> Result<Vec<SweepCell>> {
    if let Some(h) = hbar_list.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
        return Err(KhoError::invalid("hbar_eff", format!("{h} is not positive")));
    }
    let cells: Vec<(f64, f64)> = k_list
        .iter()
        .flat_map(|&k| hbar_list.iter().map(move |&h| (k, h)))
        .collect();
    Ok(par::map_slice(&cells, |&(k, h)| SweepCell {
        kick_strength: k,
        hbar_eff: h,
        curve: purity_curve(spec, &template.with_kick_strength(k).with_hbar(h), n_max),
    }))
}

/// Six projective intensities `[H, V, D, A, R, L]` of a qubit state.
pub fn polarization_intensities(rho: &QubitState) -> [f64; 6] {
    let t = rho.trace().re;
    let [x, y, z] = rho.bloch();
    let h = 0.5 * t;
    [h * (1.0 + z), h * (1.0 - z), h * (1.0 + x), h * (1.0 - x), h * (1.0 + y), h * (1.0 - y)]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tomography {
    pub intensities: [f64; 6],
    pub rho: QubitState,
    /// True when the raw reconstruction was unphysical and was projected back.
    pub clipped: bool,
}

/// Linear-inversion tomography from the six intensities (Stokes parameters), optionally with
/// relative Gaussian noise of standard deviation `noise` on each intensity.
/// Unphysical reconstructions are projected onto the Bloch ball (eigenvalue
/// clipping followed by renormalization).
pub fn simulate_tomography<R: Rng + ?Sized>(rho: &QubitState, noise: Option<f64>, rng: &mut R) -> Result<Tomography> {
    rho.validate()?;
    let mut i = polarization_intensities(rho);
    if let Some(sigma) = noise {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(KhoError::invalid("noise", format!("{sigma} must be >= 0")));
        }
        for v in i.iter_mut() {
            let e: f64 = StandardNormal.sample(rng);
            *v = (*v * (1.0 + sigma * e)).max(0.0);
        }
    }
    // Each analyzer setting is normalized by its own total, which cancels
    // setting-to-setting intensity drift.
    let stokes = |plus: f64, minus: f64| {
        let total = plus + minus;
        if total > 0.0 {
            Ok((plus - minus) / total)
        } else {
            Err(KhoError::invalid("intensities", "zero total intensity"))
        }
    };
    let mut s = [stokes(i[2], i[3])?, stokes(i[4], i[5])?, stokes(i[0], i[1])?];
    let len = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    let clipped = len > 1.0;
    if clipped {
        s.iter_mut().for_each(|v| *v /= len);
    }
    Ok(Tomography {
        intensities: i,
        rho: QubitState::from_bloch(s),
        clipped,
    })
}
