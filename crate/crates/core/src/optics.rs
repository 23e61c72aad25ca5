//! Design formulas linking the optical realization to the dimensionless map:
//! effective Planck constant, lens spacing of a fractional Fourier stage, loss
//! budget, and paraxial ray matrices.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{KhoError, Result};
use crate::wigner::LinearPhaseSpaceMap;

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(KhoError::invalid(name, format!("{v} must be finite and > 0")))
    }
}

fn single_stage_angle(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < PI {
        Ok(())
    } else {
        Err(KhoError::invalid("rotation_angle", format!("{alpha} outside (0, π)")))
    }
}

/// Physical parameters of one kick-plus-rotation stage (SI units).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpticalDesign {
    pub wavelength: f64,
    pub focal_length: f64,
    pub rotation_angle: f64,
    /// Spatial frequency of the cosine phase mask (1/m).
    pub kick_frequency: f64,
}

impl OpticalDesign {
    pub fn validate(&self) -> Result<()> {
        positive("wavelength", self.wavelength)?;
        positive("focal_length", self.focal_length)?;
        positive("kick_frequency", self.kick_frequency)?;
        single_stage_angle(self.rotation_angle)
    }

    /// `f' = f sin α`.
    pub fn effective_focal_length(&self) -> f64 {
        self.focal_length * self.rotation_angle.sin()
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// `ħ_eff = ν² f sin α λ / 2π`.
pub fn hbar_eff_from_optics(d: &OpticalDesign) -> Result<f64> {
    d.validate()?;
    Ok(d.kick_frequency.powi(2) * d.effective_focal_length() / d.wavenumber())
}

/// Mask frequency `ν` that yields `hbar_eff` for the given optics.
pub fn kick_frequency_for_hbar(wavelength: f64, focal_length: f64, rotation_angle: f64, hbar_eff: f64) -> Result<f64> {
    positive("wavelength", wavelength)?;
    positive("focal_length", focal_length)?;
    positive("hbar_eff", hbar_eff)?;
    single_stage_angle(rotation_angle)?;
    Ok((2.0 * PI * hbar_eff / (focal_length * rotation_angle.sin() * wavelength)).sqrt())
}

/// Free-space distance on each side of the lens, `z = 2 f sin²(α/2)`.
pub fn lens_spacing(focal_length: f64, rotation_angle: f64) -> Result<f64> {
    positive("focal_length", focal_length)?;
    Ok(2.0 * focal_length * (rotation_angle / 2.0).sin().powi(2))
}

/// Transmission of each optical element.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    /// Fixed elements passed once.
    pub t_o: f64,
    /// Lenses, per pass.
    pub t_l: f64,
    /// Phase modulator, per pass.
    pub t_slm: f64,
    pub input_intensity: f64,
}

impl LossModel {
    pub fn new(t_o: f64, t_l: f64, t_slm: f64, input_intensity: f64) -> Result<Self> {
        let m = LossModel {
            t_o,
            t_l,
            t_slm,
            input_intensity,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("t_o", self.t_o), ("t_l", self.t_l), ("t_slm", self.t_slm)] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(KhoError::invalid(name, format!("{t} outside (0, 1]")));
            }
        }
        if !(self.input_intensity.is_finite() && self.input_intensity >= 0.0) {
            return Err(KhoError::invalid("input_intensity", "must be >= 0"));
        }
        Ok(())
    }

    pub fn per_pass(&self) -> f64 {
        self.t_l * self.t_slm
    }
}

/// `I_out = I_in t_o (t_l t_slm)^n`.
pub fn loss_budget(m: &LossModel, n: u32) -> Result<f64> {
    m.validate()?;
    Ok(m.input_intensity * m.t_o * m.per_pass().powi(n as i32))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KickLimit {
    Limited(u64),
    /// Lossless passes: any number of kicks stays above the floor.
    Unbounded,
}

/// Largest `n` with `I_out / I_in ≥ floor_fraction`.
pub fn max_kicks(m: &LossModel, floor_fraction: f64) -> Result<KickLimit> {
    m.validate()?;
    if !(floor_fraction > 0.0 && floor_fraction < 1.0) {
        return Err(KhoError::invalid("floor_fraction", format!("{floor_fraction} outside (0, 1)")));
    }
    if m.t_o < floor_fraction {
        return Err(KhoError::invalid("t_o", "below the floor before any kick"));
    }
    let r = m.per_pass();
    if r >= 1.0 {
        return Ok(KickLimit::Unbounded);
    }
    let ratio = |n: u64| m.t_o * r.powf(n as f64);
    let mut n = ((floor_fraction / m.t_o).ln() / r.ln()).floor().max(0.0) as u64;
    while n > 0 && ratio(n) < floor_fraction {
        n -= 1;
    }
    while ratio(n + 1) >= floor_fraction {
        n += 1;
    }
    Ok(KickLimit::Limited(n))
}

/// Paraxial ray-transfer matrix acting on `(x, θ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayMatrix(pub [[f64; 2]; 2]);

impl RayMatrix {
    pub fn free_space(z: f64) -> Self {
        RayMatrix([[1.0, z], [0.0, 1.0]])
    }

    pub fn thin_lens(f: f64) -> Self {
        RayMatrix([[1.0, 0.0], [-1.0 / f, 1.0]])
    }

    pub fn det(&self) -> f64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

/// Total matrix of `stages` traversed in order (the first stage acts first).
pub fn compose_abcd(stages: &[RayMatrix]) -> Result<LinearPhaseSpaceMap> {
    let mut total = LinearPhaseSpaceMap::identity();
    for s in stages {
        let m = LinearPhaseSpaceMap::new(s.0)?;
        total = m.compose(&total);
    }
    Ok(total)
}

/// Free space `z`, lens `f`, free space `z` with `z = 2 f sin²(α/2)`.
pub fn frft_stage(focal_length: f64, alpha: f64) -> Result<Vec<RayMatrix>> {
    let z = lens_spacing(focal_length, alpha)?;
    Ok(vec![RayMatrix::free_space(z), RayMatrix::thin_lens(focal_length), RayMatrix::free_space(z)])
}

/// Two consecutive stages of angle `α/2`.
pub fn double_stage(focal_length: f64, alpha: f64) -> Result<Vec<RayMatrix>> {
    let mut s = frft_stage(focal_length, alpha / 2.0)?;
    s.extend(frft_stage(focal_length, alpha / 2.0)?);
    Ok(s)
}

/// Express a ray matrix in the coordinates `(x, f sin(α)·θ)`.
pub fn in_scaled_coordinates(m: &LinearPhaseSpaceMap, scale: f64) -> Result<LinearPhaseSpaceMap> {
    positive("scale", scale)?;
    let s = LinearPhaseSpaceMap::scaling(1.0, scale)?;
    Ok(s.compose(m).compose(&s.inverse()))
}

/// Rotation realized by a stage in scaled coordinates: `[[cos α, sin α], [−sin α, cos α]]`,
/// i.e. a clockwise turn of `(x, θ)` space.
pub fn stage_rotation(alpha: f64) -> LinearPhaseSpaceMap {
    LinearPhaseSpaceMap::rotation(-alpha)
}

/// Summary of a single-stage design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub wavelength: f64,
    pub focal_length: f64,
    pub rotation_angle: f64,
    pub kick_frequency: f64,
    pub hbar_eff: f64,
    pub effective_focal_length: f64,
    pub lens_spacing: f64,
    pub double_stage_lens_spacing: f64,
    pub ray_matrix: [[f64; 2]; 2],
}

impl DesignReport {
    pub fn new(d: &OpticalDesign) -> Result<Self> {
        let hbar_eff = hbar_eff_from_optics(d)?;
        let m = compose_abcd(&frft_stage(d.focal_length, d.rotation_angle)?)?;
        Ok(DesignReport {
            wavelength: d.wavelength,
            focal_length: d.focal_length,
            rotation_angle: d.rotation_angle,
            kick_frequency: d.kick_frequency,
            hbar_eff,
            effective_focal_length: d.effective_focal_length(),
            lens_spacing: lens_spacing(d.focal_length, d.rotation_angle)?,
            double_stage_lens_spacing: lens_spacing(d.focal_length, d.rotation_angle / 2.0)?,
            ray_matrix: m.matrix(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HENE: f64 = 632.8e-9;

    fn design(nu: f64, alpha: f64) -> OpticalDesign {
        OpticalDesign {
            wavelength: HENE,
            focal_length: 0.150,
            rotation_angle: alpha,
            kick_frequency: nu,
        }
    }

    #[test]
    fn hbar_from_optics() {
        let h = hbar_eff_from_optics(&design(8.29e3, PI / 3.0)).unwrap();
        assert!((h - 0.9).abs() < 0.005, "{h}");
        let nu = kick_frequency_for_hbar(HENE, 0.15, PI / 3.0, 0.9).unwrap();
        assert!((hbar_eff_from_optics(&design(nu, PI / 3.0)).unwrap() - 0.9).abs() < 1e-12);
        let a = hbar_eff_from_optics(&design(1e4, 1.0)).unwrap();
        let b = hbar_eff_from_optics(&design(2e4, 1.0)).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
        let tiny = hbar_eff_from_optics(&design(1e4, 1e-9)).unwrap();
        assert!(tiny < 1e-8);
        assert!(hbar_eff_from_optics(&design(-1.0, 1.0)).is_err());
        assert!(hbar_eff_from_optics(&design(1.0, PI)).is_err());
    }

    #[test]
    fn spacing() {
        assert!((lens_spacing(0.150, PI / 3.0).unwrap() - 0.075).abs() < 1e-15);
        assert!((lens_spacing(0.2, PI).unwrap() - 0.4).abs() < 1e-15);
        assert!(lens_spacing(0.2, 1e-9).unwrap() < 1e-18);
    }

    #[test]
    fn losses() {
        let m = LossModel::new(1.0, 1.0, 0.9, 1.0).unwrap();
        assert!((loss_budget(&m, 2).unwrap() - 0.81).abs() < 1e-15);
        let m = LossModel::new(1.0, 0.955, 1.0, 1.0).unwrap();
        assert_eq!(max_kicks(&m, 0.01).unwrap(), KickLimit::Limited(100));
        let m = LossModel::new(0.7, 1.0, 1.0, 2.0).unwrap();
        assert!((loss_budget(&m, 37).unwrap() - 1.4).abs() < 1e-15);
        assert_eq!(max_kicks(&m, 0.5).unwrap(), KickLimit::Unbounded);
        assert!(max_kicks(&LossModel::new(0.005, 0.9, 1.0, 1.0).unwrap(), 0.01).is_err());
        assert!(LossModel::new(1.2, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn max_kicks_is_largest_admissible() {
        for &(t_o, r, floor) in &[(0.9, 0.97, 0.05), (1.0, 0.5, 0.1), (0.5, 0.999, 0.3)] {
            let m = LossModel::new(t_o, r, 1.0, 1.0).unwrap();
            let KickLimit::Limited(n) = max_kicks(&m, floor).unwrap() else {
                panic!("bounded")
            };
            assert!(t_o * r.powf(n as f64) >= floor);
            assert!(t_o * r.powf(n as f64 + 1.0) < floor);
        }
    }

    #[test]
    fn frft_stage_is_scaled_rotation() {
        for &a in &[PI / 6.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0] {
            let f = 0.15;
            let m = compose_abcd(&frft_stage(f, a).unwrap()).unwrap();
            let expect = [[a.cos(), f * a.sin().powi(2)], [-1.0 / f, a.cos()]];
            for i in 0..2 {
                for j in 0..2 {
                    assert!((m.matrix()[i][j] - expect[i][j]).abs() < 1e-12);
                }
            }
            let r = in_scaled_coordinates(&m, f * a.sin()).unwrap();
            assert!(r.max_abs_diff(&stage_rotation(a)) < 1e-12);
            assert!(m.is_symplectic(1e-12));

            let d = compose_abcd(&double_stage(f, a).unwrap()).unwrap();
            let r2 = in_scaled_coordinates(&d, f * (a / 2.0).sin()).unwrap();
            assert!(r2.max_abs_diff(&stage_rotation(a)) < 1e-12);
        }
    }

    #[test]
    fn fourier_stage_and_empty_chain() {
        let f = 0.3;
        let m = compose_abcd(&frft_stage(f, PI / 2.0).unwrap()).unwrap();
        let e = [[0.0, f], [-1.0 / f, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.matrix()[i][j] - e[i][j]).abs() < 1e-15);
            }
        }
        assert_eq!(compose_abcd(&[]).unwrap(), LinearPhaseSpaceMap::identity());
        assert!(compose_abcd(&[RayMatrix([[1.0, 1.0], [1.0, 1.0]])]).is_err());
    }

    #[test]
    fn report() {
        let r = DesignReport::new(&design(8.29e3, PI / 3.0)).unwrap();
        assert!((r.lens_spacing - 0.075).abs() < 1e-15);
        assert!((r.effective_focal_length - 0.15 * (PI / 3.0).sin()).abs() < 1e-15);
    }
}
