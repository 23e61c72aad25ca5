//! Uniform, origin-symmetric position grids and their conjugate momentum grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{KhoError, Result};

/// Smallest grid used by the automatic sizing heuristic.
pub const MIN_AUTO_POINTS: usize = 1024;
/// Largest grid the automatic sizing heuristic will produce.
pub const MAX_AUTO_POINTS: usize = 1 << 20;

/// Position grid `q_j = -q_max + j·dq`, `j = 0..n_points`, with `dq = 2 q_max / n_points`.
///
/// The conjugate momentum grid has spacing `dp = 2π ħ / (n_points · dq)` so that
/// `dq · dp · n_points = 2π ħ` holds exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n_points: usize,
    q_max: f64,
    hbar_eff: f64,
}

/// Build a symmetric grid on `[-q_max, q_max)`.
pub fn make_grid(n_points: usize, q_max: f64, hbar_eff: f64) -> Result<GridSpec> {
    GridSpec::new(n_points, q_max, hbar_eff)
}

impl GridSpec {
    pub fn new(n_points: usize, q_max: f64, hbar_eff: f64) -> Result<Self> {
        if n_points < 2 {
            return Err(KhoError::invalid("n_points", format!("{n_points} < 2")));
        }
        if !(q_max.is_finite() && q_max > 0.0) {
            return Err(KhoError::invalid("q_max", format!("{q_max} is not positive")));
        }
        if !(hbar_eff.is_finite() && hbar_eff > 0.0) {
            return Err(KhoError::invalid(
                "hbar_eff",
                format!("{hbar_eff} is not positive"),
            ));
        }
        Ok(GridSpec {
            n_points,
            q_max,
            hbar_eff,
        })
    }

    /// Grid whose momentum window equals its position window (`dq == dp`).
    ///
    /// Harmonic rotations exchange position and momentum, so this is the natural
    /// shape for KHO dynamics: `q_max = sqrt(π ħ n / 2)`.
    pub fn balanced(n_points: usize, hbar_eff: f64) -> Result<Self> {
        if !(hbar_eff.is_finite() && hbar_eff > 0.0) {
            return Err(KhoError::invalid(
                "hbar_eff",
                format!("{hbar_eff} is not positive"),
            ));
        }
        Self::new(n_points, (PI * hbar_eff * n_points as f64 / 2.0).sqrt(), hbar_eff)
    }

    /// Smallest balanced power-of-two grid (at least [`MIN_AUTO_POINTS`]) whose
    /// half-width exceeds `1.25 · radius`.
    ///
    /// `radius` should bound the phase-space extent of the dynamics; see
    /// [`dynamics_radius`].
    pub fn for_radius(radius: f64, hbar_eff: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(KhoError::invalid("radius", format!("{radius} is not finite")));
        }
        let mut n = MIN_AUTO_POINTS;
        loop {
            let g = Self::balanced(n, hbar_eff)?;
            if g.q_max >= 1.25 * radius {
                return Ok(g);
            }
            if n >= MAX_AUTO_POINTS {
                return Err(KhoError::invalid(
                    "grid",
                    format!("radius {radius} needs more than {MAX_AUTO_POINTS} points"),
                ));
            }
            n *= 2;
        }
    }

    /// Same grid with twice the points and a `√2` wider window in both
    /// position and momentum.
    pub fn doubled(&self) -> Self {
        GridSpec {
            n_points: self.n_points * 2,
            q_max: self.q_max * std::f64::consts::SQRT_2,
            hbar_eff: self.hbar_eff,
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn q_min(&self) -> f64 {
        -self.q_max
    }

    pub fn hbar_eff(&self) -> f64 {
        self.hbar_eff
    }

    pub fn dq(&self) -> f64 {
        2.0 * self.q_max / self.n_points as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI * self.hbar_eff / (self.n_points as f64 * self.dq())
    }

    /// Half-width of the momentum window, `n dp / 2 = π ħ / dq`.
    pub fn p_max(&self) -> f64 {
        0.5 * self.n_points as f64 * self.dp()
    }

    pub fn q(&self, j: usize) -> f64 {
        self.q_min() + j as f64 * self.dq()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.q(j)).collect()
    }

    /// Momentum of centered index `k`: `p_k = (k - n/2) dp`.
    pub fn p(&self, k: usize) -> f64 {
        (k as f64 - (self.n_points / 2) as f64) * self.dp()
    }

    /// Momentum axis in centered order (ascending).
    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.p(k)).collect()
    }

    /// Momentum carried by FFT output bin `m` (standard FFT ordering).
    pub fn fft_momentum(&self, m: usize) -> f64 {
        crate::fft::signed_index(m, self.n_points) as f64 * self.dp()
    }

    /// Number of nodes at each end counted by the boundary-mass guard
    /// (the outer 2% of the grid, split evenly between both ends).
    pub fn edge_nodes(&self) -> usize {
        (self.n_points / 100).max(1)
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(KhoError::GridMismatch)
        }
    }
}

/// Conservative bound on the phase-space radius reached by `n_kicks` KHO steps
/// from a Gaussian centered at distance `center_radius` with largest standard
/// deviation `width`.
///
/// Rotations preserve the radius and each kick changes the momentum by at most
/// `K`, so the classical radius grows by at most `K` per step; `8·width + 2`
/// covers the quantum tails.
pub fn dynamics_radius(center_radius: f64, width: f64, kick_strength: f64, n_kicks: usize) -> f64 {
    center_radius + 8.0 * width + kick_strength.abs() * n_kicks as f64 + 2.0
}

/// Run `f` on `grid`, doubling the grid (see [`GridSpec::doubled`]) each time it
/// reports a grid overflow, at most `max_doublings` times.
pub fn with_grid_growth<T, F>(grid: GridSpec, max_doublings: usize, mut f: F) -> Result<T>
where
    F: FnMut(GridSpec) -> Result<T>,
{
    let mut g = grid;
    let mut attempt = 0;
    loop {
        match f(g) {
            Err(KhoError::GridOverflow { .. })
                if attempt < max_doublings && g.n_points * 2 <= MAX_AUTO_POINTS =>
            {
                g = g.doubled();
                attempt += 1;
            }
            other => return other,
        }
    }
}
