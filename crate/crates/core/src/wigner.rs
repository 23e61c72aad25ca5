//! Wigner distribution of grid states and diagnostics on it.
//!
//! `W(Q, P) = (1/2πħ) ∫ ψ(Q + ξ/2) ψ*(Q − ξ/2) e^{−iPξ/ħ} dξ`, sampled on the
//! position grid of the state and its centered conjugate momentum grid. The
//! half-step samples `ψ(Q ± m·dq/2)` come from band-limited (FFT) upsampling,
//! so no interpolation enters the transform itself.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KhoError, Result};
use crate::fft::{self, FftPair};
use crate::par;
use crate::state::QuantumState;

/// Real samples `W(q_i, p_k)`, stored row-major with one row per `q_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    values: Vec<f64>,
    q_axis: Axis,
    p_axis: Axis,
    hbar_eff: f64,
}

/// Uniform coordinate axis `start + i·step`, `i < len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    pub fn at(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.at(i)).collect()
    }

    /// Fractional index of coordinate `x`.
    fn index_of(&self, x: f64) -> f64 {
        (x - self.start) / self.step
    }

    fn sub(&self, lo: usize, hi: usize) -> Axis {
        Axis {
            start: self.at(lo),
            step: self.step,
            len: hi - lo,
        }
    }
}

impl WignerGrid {
    pub fn from_values(values: Vec<f64>, q_axis: Axis, p_axis: Axis, hbar_eff: f64) -> Result<Self> {
        if values.len() != q_axis.len * p_axis.len || q_axis.len == 0 || p_axis.len == 0 {
            return Err(KhoError::invalid("values", "shape does not match the axes"));
        }
        if !(q_axis.step > 0.0 && p_axis.step > 0.0) {
            return Err(KhoError::invalid("axis", "steps must be positive"));
        }
        Ok(WignerGrid {
            values,
            q_axis,
            p_axis,
            hbar_eff,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn q_axis(&self) -> &Axis {
        &self.q_axis
    }

    pub fn p_axis(&self) -> &Axis {
        &self.p_axis
    }

    pub fn hbar_eff(&self) -> f64 {
        self.hbar_eff
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.q_axis.len, self.p_axis.len)
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.p_axis.len + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.p_axis.len;
        &self.values[i * w..(i + 1) * w]
    }

    fn cell(&self) -> f64 {
        self.q_axis.step * self.p_axis.step
    }

    /// `Σ W dq dp`.
    pub fn norm(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell()
    }

    /// `Σ W² dq dp`; equals `1/(2πħ)` for a pure state.
    pub fn purity_integral(&self) -> f64 {
        self.values.iter().map(|w| w * w).sum::<f64>() * self.cell()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∫ W dp` at each `q_i`.
    pub fn q_marginal(&self) -> Vec<f64> {
        (0..self.q_axis.len)
            .map(|i| self.row(i).iter().sum::<f64>() * self.p_axis.step)
            .collect()
    }

    /// `∫ W dq` at each `p_k`.
    pub fn p_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.p_axis.len];
        for i in 0..self.q_axis.len {
            for (o, w) in out.iter_mut().zip(self.row(i)) {
                *o += w;
            }
        }
        out.iter_mut().for_each(|o| *o *= self.q_axis.step);
        out
    }

    /// Sub-grid covering index ranges `qi` and `pk` (half-open).
    pub fn crop(&self, qi: std::ops::Range<usize>, pk: std::ops::Range<usize>) -> Result<Self> {
        if qi.is_empty() || pk.is_empty() || qi.end > self.q_axis.len || pk.end > self.p_axis.len {
            return Err(KhoError::invalid("crop", "range outside the grid"));
        }
        let mut values = Vec::with_capacity(qi.len() * pk.len());
        for i in qi.clone() {
            values.extend_from_slice(&self.row(i)[pk.clone()]);
        }
        Ok(WignerGrid {
            values,
            q_axis: self.q_axis.sub(qi.start, qi.end),
            p_axis: self.p_axis.sub(pk.start, pk.end),
            hbar_eff: self.hbar_eff,
        })
    }

    /// Smallest index box, padded by `pad` nodes, containing every sample with
    /// `|W| ≥ rel · max|W|`.
    pub fn support_box(&self, rel: f64, pad: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let thr = rel * self.max_abs();
        let (nq, np) = self.shape();
        let (mut i0, mut i1, mut k0, mut k1) = (nq, 0, np, 0);
        for i in 0..nq {
            for (k, w) in self.row(i).iter().enumerate() {
                if w.abs() >= thr {
                    i0 = i0.min(i);
                    i1 = i1.max(i);
                    k0 = k0.min(k);
                    k1 = k1.max(k);
                }
            }
        }
        if i0 > i1 {
            return (0..nq, 0..np);
        }
        (
            i0.saturating_sub(pad)..(i1 + pad + 1).min(nq),
            k0.saturating_sub(pad)..(k1 + pad + 1).min(np),
        )
    }

    /// Cubic (Keys, `a = −1/2`) interpolation; zero outside the grid.
    pub fn sample_cubic(&self, q: f64, p: f64) -> f64 {
        let x = self.q_axis.index_of(q);
        let y = self.p_axis.index_of(p);
        let (nq, np) = (self.q_axis.len as isize, self.p_axis.len as isize);
        if !(x > -1.0 && y > -1.0 && x < nq as f64 && y < np as f64) {
            return 0.0;
        }
        let (xi, yi) = (x.floor() as isize, y.floor() as isize);
        let wx = keys_weights(x - xi as f64);
        let wy = keys_weights(y - yi as f64);
        let mut acc = 0.0;
        for (a, wa) in wx.iter().enumerate() {
            let i = xi - 1 + a as isize;
            if i < 0 || i >= nq {
                continue;
            }
            let row = self.row(i as usize);
            for (b, wb) in wy.iter().enumerate() {
                let k = yi - 1 + b as isize;
                if k < 0 || k >= np {
                    continue;
                }
                acc += wa * wb * row[k as usize];
            }
        }
        acc
    }

    /// Bilinear interpolation; zero outside the grid.
    pub fn sample_bilinear(&self, q: f64, p: f64) -> f64 {
        let x = self.q_axis.index_of(q);
        let y = self.p_axis.index_of(p);
        let (nq, np) = (self.q_axis.len as isize, self.p_axis.len as isize);
        if !(x > -1.0 && y > -1.0 && x < nq as f64 && y < np as f64) {
            return 0.0;
        }
        let (xi, yi) = (x.floor() as isize, y.floor() as isize);
        let (fx, fy) = (x - xi as f64, y - yi as f64);
        let at = |i: isize, k: isize| {
            if i < 0 || k < 0 || i >= nq || k >= np {
                0.0
            } else {
                self.get(i as usize, k as usize)
            }
        };
        (1.0 - fx) * ((1.0 - fy) * at(xi, yi) + fy * at(xi, yi + 1))
            + fx * ((1.0 - fy) * at(xi + 1, yi) + fy * at(xi + 1, yi + 1))
    }
}

fn keys_weights(t: f64) -> [f64; 4] {
    const A: f64 = -0.5;
    let near = |x: f64| ((A + 2.0) * x - (A + 3.0)) * x * x + 1.0;
    let far = |x: f64| ((A * x - 5.0 * A) * x + 8.0 * A) * x - 4.0 * A;
    [far(1.0 + t), near(t), near(1.0 - t), far(2.0 - t)]
}

/// Band-limited upsampling by two: `u[2j] = ψ_j`, `u[2j+1]` the midpoint values.
fn upsample2(psi: &[Complex64]) -> Vec<Complex64> {
    let n = psi.len();
    let mut spec = psi.to_vec();
    fft::forward(&mut spec);
    let mut big = vec![Complex64::new(0.0, 0.0); 2 * n];
    let half = n / 2;
    if n % 2 == 0 {
        big[..half].copy_from_slice(&spec[..half]);
        big[2 * n - half + 1..].copy_from_slice(&spec[half + 1..]);
        big[half] = spec[half] * 0.5;
        big[2 * n - half] = spec[half] * 0.5;
    } else {
        big[..=half].copy_from_slice(&spec[..=half]);
        big[2 * n - half..].copy_from_slice(&spec[half + 1..]);
    }
    FftPair::new(2 * n).inverse.process(&mut big);
    let s = 1.0 / n as f64;
    big.iter_mut().for_each(|z| *z *= s);
    big
}

/// Wigner function of a pure grid state on the state's position grid and its
/// centered conjugate momentum grid. Rows are computed in parallel.
pub fn wigner_transform(state: &QuantumState) -> Result<WignerGrid> {
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(KhoError::NotNormalized { norm });
    }
    let g = *state.grid();
    let n = g.n_points();
    let u = upsample2(state.amplitudes());
    let plan = FftPair::new(n);
    let scale = g.dq() / (2.0 * PI * g.hbar_eff());
    let half = (n / 2) as isize;
    let two_n = 2 * n as isize;

    let mut values = vec![0.0; n * n];
    par::for_each_row(&mut values, n, |j, row| {
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let c = 2 * j as isize;
        for m in -half..(n as isize - half) {
            let (a, b) = (c + m, c - m);
            if a >= 0 && b >= 0 && a < two_n && b < two_n {
                buf[m.rem_euclid(n as isize) as usize] = u[a as usize] * u[b as usize].conj();
            }
        }
        plan.forward.process(&mut buf);
        for (k, w) in row.iter_mut().enumerate() {
            *w = buf[(k + n - n / 2) % n].re * scale;
        }
    });
    Ok(WignerGrid {
        values,
        q_axis: Axis {
            start: g.q_min(),
            step: g.dq(),
            len: n,
        },
        p_axis: Axis {
            start: g.p(0),
            step: g.dp(),
            len: n,
        },
        hbar_eff: g.hbar_eff(),
    })
}

/// `Σ max(0, −W) dq dp`.
pub fn negativity_volume(w: &WignerGrid) -> f64 {
    w.values.iter().map(|v| (-v).max(0.0)).sum::<f64>() * w.cell()
}

/// Dominant interference wavelength of a Wigner function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FringeScale {
    /// Spatial frequency of the fringe, `(k_Q, k_P)`.
    pub wavevector: [f64; 2],
    /// `2π / |k|`.
    pub wavelength: f64,
    /// `(wavelength / 2)²`: area of one oscillation half-period cell.
    pub area: f64,
}

/// Negativity below which no fringe is reported.
pub const FRINGE_NEGATIVITY_FLOOR: f64 = 1e-8;
/// Spectral cutoff in units of `1/sqrt(ħ)`; smooth envelopes live below it.
pub const FRINGE_CUTOFF: f64 = 2.0;

/// Estimate the fringe scale from the 2-D power spectrum `S(k)` of `W`.
///
/// Candidates are restricted to `|k| > 2/sqrt(ħ)` (a minimum-uncertainty blob
/// has essentially no power there); the candidate maximizing `|k|² S` is taken
/// and then moved uphill on `S` to the nearest spectral peak when that peak is
/// a strict interior maximum. Returns `None` for states without negativity or
/// when the maximum sits on the cutoff (no resolved fringe).
pub fn fringe_scale(w: &WignerGrid) -> Option<FringeScale> {
    if negativity_volume(w) < FRINGE_NEGATIVITY_FLOOR {
        return None;
    }
    let (nq, np) = w.shape();
    let power = power_spectrum(w);
    let dkq = 2.0 * PI / (nq as f64 * w.q_axis.step);
    let dkp = 2.0 * PI / (np as f64 * w.p_axis.step);
    let kq = |i: usize| fft::signed_index(i, nq) as f64 * dkq;
    let kp = |k: usize| fft::signed_index(k, np) as f64 * dkp;
    let cutoff = FRINGE_CUTOFF / w.hbar_eff.sqrt();

    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    for i in 0..nq {
        for k in 0..np {
            let k2 = kq(i).powi(2) + kp(k).powi(2);
            if k2.sqrt() > cutoff {
                let score = k2 * power[i * np + k];
                if score > best.2 {
                    best = (i, k, score);
                }
            }
        }
    }
    if !best.2.is_finite() {
        return None;
    }
    let dk = dkq.max(dkp);
    let (bi, bk, _) = best;
    if kq(bi).hypot(kp(bk)) < cutoff + 1.5 * dk {
        return None;
    }

    let s = |i: isize, k: isize| power[i.rem_euclid(nq as isize) as usize * np + k.rem_euclid(np as isize) as usize];
    let (mut ci, mut ck) = (bi as isize, bk as isize);
    loop {
        let mut next = (ci, ck, s(ci, ck));
        for di in -1..=1 {
            for dj in -1..=1 {
                let v = s(ci + di, ck + dj);
                if v > next.2 {
                    next = (ci + di, ck + dj, v);
                }
            }
        }
        if (next.0, next.1) == (ci, ck) {
            break;
        }
        ci = next.0;
        ck = next.1;
    }
    let (ui, uk) = (ci.rem_euclid(nq as isize) as usize, ck.rem_euclid(np as isize) as usize);
    let peak_k = kq(ui).hypot(kp(uk));
    let strict = (-1..=1)
        .flat_map(|a| (-1..=1).map(move |b| (a, b)))
        .filter(|&(a, b)| (a, b) != (0, 0))
        .all(|(a, b)| s(ci + a, ck + b) < s(ci, ck));

    let (fq, fp) = if strict && peak_k > cutoff + 1.5 * dk {
        let off = |lo: f64, mid: f64, hi: f64| {
            let (l, m, h) = (lo.max(f64::MIN_POSITIVE).ln(), mid.ln(), hi.max(f64::MIN_POSITIVE).ln());
            let den = l - 2.0 * m + h;
            if den < 0.0 {
                (0.5 * (l - h) / den).clamp(-0.5, 0.5)
            } else {
                0.0
            }
        };
        let oi = off(s(ci - 1, ck), s(ci, ck), s(ci + 1, ck));
        let ok = off(s(ci, ck - 1), s(ci, ck), s(ci, ck + 1));
        (kq(ui) + oi * dkq, kp(uk) + ok * dkp)
    } else {
        (kq(bi), kp(bk))
    };
    let k = fq.hypot(fp);
    let wavelength = 2.0 * PI / k;
    Some(FringeScale {
        wavevector: [fq, fp],
        wavelength,
        area: (wavelength / 2.0).powi(2),
    })
}

/// `|FFT2(W)|²` in standard FFT ordering.
fn power_spectrum(w: &WignerGrid) -> Vec<f64> {
    let (nq, np) = w.shape();
    let mut data: Vec<Complex64> = w.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let row_plan = FftPair::new(np);
    par::for_each_row(&mut data, np, |_, row| row_plan.forward.process(row));
    let mut t = vec![Complex64::new(0.0, 0.0); nq * np];
    for i in 0..nq {
        for k in 0..np {
            t[k * nq + i] = data[i * np + k];
        }
    }
    let col_plan = FftPair::new(nq);
    par::for_each_row(&mut t, nq, |_, col| col_plan.forward.process(col));
    let mut out = vec![0.0; nq * np];
    for k in 0..np {
        for i in 0..nq {
            out[i * np + k] = t[k * nq + i].norm_sqr();
        }
    }
    out
}

/// Invertible linear map `z ↦ E z` of phase-space coordinates `z = (Q, P)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearPhaseSpaceMap {
    matrix: [[f64; 2]; 2],
}

/// Determinants smaller than this are treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

impl LinearPhaseSpaceMap {
    pub fn new(matrix: [[f64; 2]; 2]) -> Result<Self> {
        let m = LinearPhaseSpaceMap { matrix };
        let det = m.det();
        if !(det.is_finite() && det.abs() > SINGULAR_DET) {
            return Err(KhoError::SingularMatrix { det });
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        LinearPhaseSpaceMap {
            matrix: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    /// Anticlockwise rotation by `theta`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        LinearPhaseSpaceMap {
            matrix: [[c, -s], [s, c]],
        }
    }

    pub fn scaling(sq: f64, sp: f64) -> Result<Self> {
        Self::new([[sq, 0.0], [0.0, sp]])
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.matrix
    }

    pub fn det(&self) -> f64 {
        let m = self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn is_symplectic(&self, tol: f64) -> bool {
        (self.det() - 1.0).abs() <= tol
    }

    pub fn apply(&self, z: [f64; 2]) -> [f64; 2] {
        let m = self.matrix;
        [m[0][0] * z[0] + m[0][1] * z[1], m[1][0] * z[0] + m[1][1] * z[1]]
    }

    pub fn inverse(&self) -> Self {
        let m = self.matrix;
        let d = self.det();
        LinearPhaseSpaceMap {
            matrix: [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]],
        }
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        let (a, b) = (self.matrix, other.matrix);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        LinearPhaseSpaceMap { matrix: out }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let (a, b) = (self.matrix, other.matrix);
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (a[i][j] - b[i][j]).abs()))
            .fold(0.0, f64::max)
    }
}

/// Resampling kernel used by [`apply_linear_map_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    #[default]
    Cubic,
    Bilinear,
}

/// `W'(z) = W(E z) / |det E|` on the input axes, rescaled so that `Σ W'` equals
/// `Σ W`. Uses cubic interpolation.
pub fn apply_linear_map(w: &WignerGrid, map: &LinearPhaseSpaceMap) -> Result<WignerGrid> {
    apply_linear_map_with(w, map, Interpolation::Cubic)
}

pub fn apply_linear_map_with(w: &WignerGrid, map: &LinearPhaseSpaceMap, interp: Interpolation) -> Result<WignerGrid> {
    let det = map.det();
    if !(det.is_finite() && det.abs() > SINGULAR_DET) {
        return Err(KhoError::SingularMatrix { det });
    }
    let (nq, np) = w.shape();
    let inv_det = 1.0 / det.abs();
    let mut values = vec![0.0; nq * np];
    par::for_each_row(&mut values, np, |i, row| {
        let q = w.q_axis.at(i);
        for (k, out) in row.iter_mut().enumerate() {
            let [sq, sp] = map.apply([q, w.p_axis.at(k)]);
            let v = match interp {
                Interpolation::Cubic => w.sample_cubic(sq, sp),
                Interpolation::Bilinear => w.sample_bilinear(sq, sp),
            };
            *out = v * inv_det;
        }
    });
    let before: f64 = w.values.iter().sum();
    let after: f64 = values.iter().sum();
    if after.abs() > 0.0 && before.abs() > 0.0 {
        let r = before / after;
        values.iter_mut().for_each(|v| *v *= r);
    }
    Ok(WignerGrid {
        values,
        q_axis: w.q_axis,
        p_axis: w.p_axis,
        hbar_eff: w.hbar_eff,
    })
}

/// Covariance `[[⟨δQ²⟩, ⟨δQδP⟩], [⟨δQδP⟩, ⟨δP²⟩]]` and mean of a Wigner grid.
pub fn moments(w: &WignerGrid) -> ([f64; 2], [[f64; 2]; 2]) {
    let (nq, np) = w.shape();
    let (mut s0, mut sq, mut sp) = (0.0, 0.0, 0.0);
    let (mut sqq, mut spp, mut sqp) = (0.0, 0.0, 0.0);
    for i in 0..nq {
        let q = w.q_axis.at(i);
        for k in 0..np {
            let p = w.p_axis.at(k);
            let v = w.get(i, k);
            s0 += v;
            sq += v * q;
            sp += v * p;
            sqq += v * q * q;
            spp += v * p * p;
            sqp += v * q * p;
        }
    }
    let (mq, mp) = (sq / s0, sp / s0);
    (
        [mq, mp],
        [
            [sqq / s0 - mq * mq, sqp / s0 - mq * mp],
            [sqp / s0 - mq * mp, spp / s0 - mp * mp],
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::propagators::apply_rotation;
    use crate::state::{prepare_gaussian, GaussianSpec};

    fn vacuum(n: usize, h: f64) -> QuantumState {
        prepare_gaussian(&GaussianSpec::default(), &GridSpec::balanced(n, h).unwrap()).unwrap()
    }

    fn cat(d: f64, h: f64, n: usize) -> QuantumState {
        let g = GridSpec::balanced(n, h).unwrap();
        let a = prepare_gaussian(&GaussianSpec::centered_at(d, 0.0), &g).unwrap();
        let b = prepare_gaussian(&GaussianSpec::centered_at(-d, 0.0), &g).unwrap();
        let one = Complex64::new(1.0, 0.0);
        QuantumState::superposition(&[(one, &a), (one, &b)]).unwrap()
    }

    fn cat_wigner(q: f64, p: f64, d: f64, h: f64) -> f64 {
        let wg = |q: f64, p: f64| (-(q * q + p * p) / h).exp() / (PI * h);
        let n2 = 1.0 / (2.0 * (1.0 + (-d * d / h).exp()));
        n2 * (wg(q - d, p) + wg(q + d, p) + 2.0 * wg(q, p) * (2.0 * d * p / h).cos())
    }

    #[test]
    fn vacuum_peak_and_positivity() {
        let w = wigner_transform(&vacuum(512, 1.0)).unwrap();
        let c = 256;
        assert!(w.q_axis().at(c).abs() < 1e-12 && w.p_axis().at(c).abs() < 1e-12);
        assert!((w.get(c, c) - 1.0 / PI).abs() < 1e-10);
        assert!(w.values().iter().all(|&v| v > -1e-12));
        assert!(negativity_volume(&w) < 1e-9);
        assert!(fringe_scale(&w).is_none());
    }

    #[test]
    fn identities_on_a_tilted_state() {
        let h = 0.8;
        let g = GridSpec::balanced(512, h).unwrap();
        let s = prepare_gaussian(&GaussianSpec::centered_at(1.0, -1.5).with_squeeze(1.6, 0.7), &g).unwrap();
        let s = crate::propagators::kho_step(&s, &crate::KhoParams::new(2.0, 1.0, 0.3, h).unwrap()).unwrap();
        let w = wigner_transform(&s).unwrap();
        for (a, b) in w.q_marginal().iter().zip(s.position_density()) {
            assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in w.p_marginal().iter().zip(s.momentum_density()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((w.norm() - 1.0).abs() < 1e-10);
        assert!((w.purity_integral() - 1.0 / (2.0 * PI * h)).abs() < 1e-10);
        assert!(w.max_abs() <= 1.0 / (PI * h) + 1e-6);
    }

    #[test]
    fn cat_matches_closed_form() {
        let (d, h) = (4.0, 1.0);
        let w = wigner_transform(&cat(d, h, 1024)).unwrap();
        let mut worst: f64 = 0.0;
        for i in (0..1024).step_by(7) {
            for k in (0..1024).step_by(5) {
                let (q, p) = (w.q_axis().at(i), w.p_axis().at(k));
                worst = worst.max((w.get(i, k) - cat_wigner(q, p, d, h)).abs());
            }
        }
        assert!(worst < 1e-10, "{worst}");
        assert!(w.get(512, 512) > 0.0);
    }

    #[test]
    fn cat_negativity_against_quadrature() {
        let (d, h) = (4.0, 1.0);
        // Midpoint rule on the analytic Wigner function over the interference region.
        let m = 3000;
        let (lo, hi) = (-4.0, 4.0);
        let step = (hi - lo) / m as f64;
        let mut reference = 0.0;
        for i in 0..m {
            let q = lo + (i as f64 + 0.5) * step;
            for k in 0..m {
                let p = lo + (k as f64 + 0.5) * step;
                reference += (-cat_wigner(q, p, d, h)).max(0.0);
            }
        }
        reference *= step * step;
        assert!((reference - 0.3158).abs() < 1e-3, "{reference}");
        let w = wigner_transform(&cat(d, h, 1024)).unwrap();
        let got = negativity_volume(&w);
        assert!((got - reference).abs() < 0.03 * reference, "{got} vs {reference}");
    }

    #[test]
    fn cat_fringe_wavelength() {
        // Interference term oscillates as cos(2 d P / ħ): wavelength π ħ / d.
        for &(d, h) in &[(4.0, 1.0), (3.0, 0.5)] {
            let w = wigner_transform(&cat(d, h, 1024)).unwrap();
            let f = fringe_scale(&w).unwrap();
            let expect = PI * h / d;
            assert!((f.wavelength - expect).abs() < 0.02 * expect, "{} vs {}", f.wavelength, expect);
            assert!(f.wavevector[0].abs() < 0.5);
        }
    }

    #[test]
    fn identity_map_is_exact() {
        let w = wigner_transform(&cat(2.0, 1.0, 256)).unwrap();
        let m = apply_linear_map(&w, &LinearPhaseSpaceMap::identity()).unwrap();
        for (a, b) in w.values().iter().zip(m.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_squeezes() {
        let w = wigner_transform(&vacuum(1024, 1.0)).unwrap();
        // W'(z) = W(E z): E = diag(1/2, 2) doubles the Q width and halves the P width.
        let e = LinearPhaseSpaceMap::scaling(0.5, 2.0).unwrap();
        let m = apply_linear_map(&w, &e).unwrap();
        let (_, c0) = moments(&w);
        let (_, c1) = moments(&m);
        assert!((c1[0][0].sqrt() / c0[0][0].sqrt() - 2.0).abs() < 1e-4);
        assert!((c1[1][1].sqrt() / c0[1][1].sqrt() - 0.5).abs() < 1e-4);
        assert!((m.norm() - 1.0).abs() < 1e-12);
        // The opposite scaling narrows Q.
        let n = apply_linear_map(&w, &LinearPhaseSpaceMap::scaling(2.0, 0.5).unwrap()).unwrap();
        let (_, c2) = moments(&n);
        assert!((c2[0][0].sqrt() / c0[0][0].sqrt() - 0.5).abs() < 1e-4);
        assert!((c2[1][1].sqrt() / c0[1][1].sqrt() - 2.0).abs() < 1e-4);
    }

    #[test]
    fn rotation_covariance() {
        let h = 1.0;
        let g = GridSpec::balanced(1024, h).unwrap();
        let s = prepare_gaussian(&GaussianSpec::centered_at(1.5, 0.5).with_squeeze(1.8, 0.4), &g).unwrap();
        let a = 0.9;
        let direct = wigner_transform(&apply_rotation(&s, a).unwrap()).unwrap();
        let mapped = apply_linear_map(
            &wigner_transform(&s).unwrap(),
            &LinearPhaseSpaceMap::rotation(-a),
        )
        .unwrap();
        let diff = direct
            .values()
            .iter()
            .zip(mapped.values())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(diff < 1e-4, "{diff}");
    }

    #[test]
    fn cat_fringes_turn_with_quarter_rotation() {
        let w = wigner_transform(&cat(3.0, 1.0, 512)).unwrap();
        let r = apply_linear_map(&w, &LinearPhaseSpaceMap::rotation(-PI / 2.0)).unwrap();
        let f0 = fringe_scale(&w).unwrap();
        let f1 = fringe_scale(&r).unwrap();
        assert!(f0.wavevector[1].abs() > 10.0 * f0.wavevector[0].abs());
        assert!(f1.wavevector[0].abs() > 10.0 * f1.wavevector[1].abs());
    }

    #[test]
    fn singular_map_rejected() {
        assert!(matches!(
            LinearPhaseSpaceMap::new([[1.0, 2.0], [2.0, 4.0]]),
            Err(KhoError::SingularMatrix { .. })
        ));
        let r = LinearPhaseSpaceMap::rotation(0.7);
        assert!(r.is_symplectic(1e-14));
        assert!(r.compose(&r.inverse()).max_abs_diff(&LinearPhaseSpaceMap::identity()) < 1e-15);
    }

    #[test]
    fn keys_weights_partition_unity() {
        for &t in &[0.0, 0.25, 0.5, 0.9] {
            let w = keys_weights(t);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        assert_eq!(keys_weights(0.0), [0.0, 1.0, 0.0, 0.0]);
    }
}
