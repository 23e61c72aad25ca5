//! Classical stroboscopic map, stochastic-web portraits, manifold evolution and
//! Liouville push-forward histograms.
//!
//! One step is the kick `P ← P + K sin(Q + φ)` followed by the rotation
//! `(Q, P) ← (cos α Q − sin α P, sin α Q + cos α P)`, the same rotation the
//! quantum propagator induces on expectation values.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{KhoError, Result};
use crate::par;
use crate::params::KhoParams;
use crate::state::GaussianSpec;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Self {
        PhasePoint { q, p }
    }

    pub fn radius(&self) -> f64 {
        self.q.hypot(self.p)
    }

    pub fn dist(&self, o: &PhasePoint) -> f64 {
        (self.q - o.q).hypot(self.p - o.p)
    }

    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        PhasePoint {
            q: c * self.q - s * self.p,
            p: s * self.q + c * self.p,
        }
    }

    fn lerp(&self, o: &PhasePoint, t: f64) -> Self {
        PhasePoint {
            q: self.q + t * (o.q - self.q),
            p: self.p + t * (o.p - self.p),
        }
    }
}

/// Momentum impulse of one kick at position `q`.
fn impulse(q: f64, params: &KhoParams) -> f64 {
    -params.kick_sign.factor() * params.kick_strength * (q + params.kick_phase).sin()
}

pub fn classical_step(z: PhasePoint, params: &KhoParams) -> PhasePoint {
    PhasePoint::new(z.q, z.p + impulse(z.q, params)).rotated(params.rotation_angle)
}

/// Exact inverse of [`classical_step`].
pub fn classical_step_inverse(z: PhasePoint, params: &KhoParams) -> PhasePoint {
    let b = z.rotated(-params.rotation_angle);
    PhasePoint::new(b.q, b.p - impulse(b.q, params))
}

pub fn classical_iterate(z: PhasePoint, params: &KhoParams, n: usize) -> PhasePoint {
    (0..n).fold(z, |z, _| classical_step(z, params))
}

/// Jacobian `∂(Q', P') / ∂(Q, P)` of one step.
pub fn jacobian(z: PhasePoint, params: &KhoParams) -> [[f64; 2]; 2] {
    let k = -params.kick_sign.factor() * params.kick_strength * (z.q + params.kick_phase).cos();
    let (s, c) = params.rotation_angle.sin_cos();
    // rotation · [[1, 0], [k, 1]]
    [[c - s * k, -s], [s + c * k, c]]
}

/// Twelve seeds on the circle of radius `π` plus the origin.
pub fn default_web_seeds() -> Vec<PhasePoint> {
    let mut seeds: Vec<PhasePoint> = (0..12)
        .map(|i| {
            let a = TAU * i as f64 / 12.0;
            PhasePoint::new(PI * a.cos(), PI * a.sin())
        })
        .collect();
    seeds.push(PhasePoint::default());
    seeds
}

/// Iterates of a set of seeds, seed-major: `points[s·n_iter + (i−1)]` is the
/// `i`-th iterate of seed `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WebCloud {
    pub points: Vec<PhasePoint>,
    pub n_seeds: usize,
    pub n_iter: usize,
    pub max_radius: f64,
}

pub fn stroboscopic_web(params: &KhoParams, seeds: &[PhasePoint], n_iter: usize) -> Result<WebCloud> {
    params.validate()?;
    if n_iter == 0 {
        return Err(KhoError::invalid("n_iter", "must be >= 1"));
    }
    let orbits = par::map_slice(seeds, |&s| {
        let mut z = s;
        (0..n_iter)
            .map(|_| {
                z = classical_step(z, params);
                z
            })
            .collect::<Vec<_>>()
    });
    let points: Vec<PhasePoint> = orbits.into_iter().flatten().collect();
    let max_radius = points.iter().map(PhasePoint::radius).fold(0.0, f64::max);
    Ok(WebCloud {
        points,
        n_seeds: seeds.len(),
        n_iter,
        max_radius,
    })
}

/// Binned density on a rectangular window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram2d {
    pub q_range: (f64, f64),
    pub p_range: (f64, f64),
    pub bins: (usize, usize),
    pub counts: Vec<u64>,
    /// Samples that fell outside the window.
    pub outside: u64,
}

impl Histogram2d {
    pub fn new(q_range: (f64, f64), p_range: (f64, f64), bins: (usize, usize)) -> Result<Self> {
        if bins.0 == 0 || bins.1 == 0 {
            return Err(KhoError::invalid("bins", "must be >= 1"));
        }
        if !(q_range.1 > q_range.0 && p_range.1 > p_range.0) {
            return Err(KhoError::invalid("range", "empty histogram window"));
        }
        Ok(Histogram2d {
            q_range,
            p_range,
            bins,
            counts: vec![0; bins.0 * bins.1],
            outside: 0,
        })
    }

    pub fn bin_of(&self, z: PhasePoint) -> Option<usize> {
        let fq = (z.q - self.q_range.0) / (self.q_range.1 - self.q_range.0);
        let fp = (z.p - self.p_range.0) / (self.p_range.1 - self.p_range.0);
        if !(0.0..1.0).contains(&fq) || !(0.0..1.0).contains(&fp) {
            return None;
        }
        let i = ((fq * self.bins.0 as f64) as usize).min(self.bins.0 - 1);
        let k = ((fp * self.bins.1 as f64) as usize).min(self.bins.1 - 1);
        Some(i * self.bins.1 + k)
    }

    pub fn add(&mut self, z: PhasePoint) {
        match self.bin_of(z) {
            Some(b) => self.counts[b] += 1,
            None => self.outside += 1,
        }
    }

    pub fn cell_area(&self) -> f64 {
        (self.q_range.1 - self.q_range.0) / self.bins.0 as f64 * (self.p_range.1 - self.p_range.0)
            / self.bins.1 as f64
    }

    pub fn bin_center(&self, idx: usize) -> PhasePoint {
        let (i, k) = (idx / self.bins.1, idx % self.bins.1);
        let wq = (self.q_range.1 - self.q_range.0) / self.bins.0 as f64;
        let wp = (self.p_range.1 - self.p_range.0) / self.bins.1 as f64;
        PhasePoint::new(
            self.q_range.0 + (i as f64 + 0.5) * wq,
            self.p_range.0 + (k as f64 + 0.5) * wp,
        )
    }

    pub fn total_inside(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Fraction of in-window samples per bin (sums to 1).
    pub fn probabilities(&self) -> Vec<f64> {
        let t = self.total_inside().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }

    /// Probability density per bin: `∑ density · cell_area = 1`.
    pub fn density(&self) -> Vec<f64> {
        let a = self.cell_area();
        self.probabilities().into_iter().map(|p| p / a).collect()
    }

    /// Mean and covariance of the binned distribution (bin centers).
    pub fn moments(&self) -> ([f64; 2], [[f64; 2]; 2]) {
        let prob = self.probabilities();
        let (mut mq, mut mp) = (0.0, 0.0);
        for (b, w) in prob.iter().enumerate() {
            let z = self.bin_center(b);
            mq += w * z.q;
            mp += w * z.p;
        }
        let (mut cqq, mut cpp, mut cqp) = (0.0, 0.0, 0.0);
        for (b, w) in prob.iter().enumerate() {
            let z = self.bin_center(b);
            cqq += w * (z.q - mq).powi(2);
            cpp += w * (z.p - mp).powi(2);
            cqp += w * (z.q - mq) * (z.p - mp);
        }
        ([mq, mp], [[cqq, cqp], [cqp, cpp]])
    }
}

/// Total-variation distance `½ Σ |p_a − p_b|` between two histograms with the
/// same window and binning.
pub fn histogram_distance(a: &Histogram2d, b: &Histogram2d) -> Result<f64> {
    if a.bins != b.bins || a.q_range != b.q_range || a.p_range != b.p_range {
        return Err(KhoError::invalid("histogram", "binning differs"));
    }
    Ok(0.5
        * a.probabilities()
            .iter()
            .zip(b.probabilities())
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>())
}

/// Histogram distance between a point cloud and the same cloud rotated by
/// `angle`, on a square window of half-width `max_radius` with `bins × bins` cells.
pub fn rotation_asymmetry(cloud: &WebCloud, angle: f64, bins: usize) -> Result<f64> {
    let r = cloud.max_radius * (1.0 + 1e-9);
    if !(r > 0.0 && r.is_finite()) {
        return Err(KhoError::invalid("cloud", "degenerate point cloud"));
    }
    let mut a = Histogram2d::new((-r, r), (-r, r), (bins, bins))?;
    let mut b = a.clone();
    for z in &cloud.points {
        a.add(*z);
        b.add(z.rotated(angle));
    }
    histogram_distance(&a, &b)
}

/// Ordered chain of phase-space points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<PhasePoint>,
}

impl Polyline {
    pub fn new(points: Vec<PhasePoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(KhoError::invalid("polyline", "needs at least two points"));
        }
        if points.iter().any(|z| !(z.q.is_finite() && z.p.is_finite())) {
            return Err(KhoError::invalid("polyline", "non-finite point"));
        }
        Ok(Polyline { points })
    }

    /// Straight segment from `a` to `b` with `n ≥ 2` evenly spaced points.
    pub fn segment(a: PhasePoint, b: PhasePoint, n: usize) -> Result<Self> {
        let n = n.max(2);
        Self::new((0..n).map(|i| a.lerp(&b, i as f64 / (n - 1) as f64)).collect())
    }

    /// Major axis of a Gaussian, `±half_sigmas` standard deviations about its center.
    pub fn gaussian_axis(spec: &GaussianSpec, hbar_eff: f64, half_sigmas: f64, n: usize) -> Result<Self> {
        let ([ux, uy], sd) = spec.major_axis(hbar_eff);
        let h = half_sigmas * sd;
        Self::segment(
            PhasePoint::new(spec.q0 - h * ux, spec.p0 - h * uy),
            PhasePoint::new(spec.q0 + h * ux, spec.p0 + h * uy),
            n,
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    pub fn max_spacing(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(&w[1])).fold(0.0, f64::max)
    }

    /// Euclidean distance from `z` to the nearest segment.
    pub fn distance_to(&self, z: PhasePoint) -> f64 {
        self.points
            .windows(2)
            .map(|w| segment_distance(z, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn mapped(&self, map: &crate::wigner::LinearPhaseSpaceMap) -> Polyline {
        Polyline {
            points: self
                .points
                .iter()
                .map(|z| {
                    let [q, p] = map.apply([z.q, z.p]);
                    PhasePoint::new(q, p)
                })
                .collect(),
        }
    }
}

fn segment_distance(z: PhasePoint, a: PhasePoint, b: PhasePoint) -> f64 {
    let (dx, dy) = (b.q - a.q, b.p - a.p);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 {
        (((z.q - a.q) * dx + (z.p - a.p) * dy) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    z.dist(&a.lerp(&b, t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldConfig {
    /// Largest allowed spacing between consecutive points after refinement.
    pub eps: f64,
    /// Point budget; exceeding it is an error.
    pub max_points: usize,
}

impl Default for ManifoldConfig {
    fn default() -> Self {
        ManifoldConfig {
            eps: 0.05,
            max_points: 1_000_000,
        }
    }
}

/// Point at curve parameter `t ∈ [0, len−1]` of the initial polyline.
fn initial_at(line: &[PhasePoint], t: f64) -> PhasePoint {
    let last = line.len() - 1;
    let i = (t.floor() as usize).min(last - 1);
    line[i].lerp(&line[i + 1], t - i as f64)
}

/// Evolve a curve `n` steps, refining after every step so that consecutive
/// points are at most `eps` apart. Inserted points are computed by mapping the
/// corresponding point of the initial curve from scratch. Returns the curve
/// after every step, starting with the (refined) initial curve.
pub fn evolve_manifold_history(line: &Polyline, params: &KhoParams, n: usize, config: &ManifoldConfig) -> Result<Vec<Polyline>> {
    params.validate()?;
    if !(config.eps > 0.0) {
        return Err(KhoError::invalid("eps", "must be > 0"));
    }
    let init = &line.points;
    if init.len() < 2 {
        return Err(KhoError::invalid("polyline", "needs at least two points"));
    }
    let mut cur: Vec<(f64, PhasePoint)> = init.iter().enumerate().map(|(i, z)| (i as f64, *z)).collect();
    cur = refine(cur, init, params, 0, config)?;
    let mut out = vec![Polyline {
        points: cur.iter().map(|x| x.1).collect(),
    }];
    for step in 1..=n {
        cur = cur.into_iter().map(|(t, z)| (t, classical_step(z, params))).collect();
        cur = refine(cur, init, params, step, config)?;
        out.push(Polyline {
            points: cur.iter().map(|x| x.1).collect(),
        });
    }
    Ok(out)
}

pub fn evolve_manifold(line: &Polyline, params: &KhoParams, n: usize, config: &ManifoldConfig) -> Result<Polyline> {
    Ok(evolve_manifold_history(line, params, n, config)?
        .pop()
        .expect("history holds at least the initial curve"))
}

fn refine(
    mut cur: Vec<(f64, PhasePoint)>,
    init: &[PhasePoint],
    params: &KhoParams,
    step: usize,
    config: &ManifoldConfig,
) -> Result<Vec<(f64, PhasePoint)>> {
    const MIN_DT: f64 = 1e-13;
    loop {
        let mids: Vec<f64> = cur
            .windows(2)
            .filter(|w| w[0].1.dist(&w[1].1) > config.eps && w[1].0 - w[0].0 > MIN_DT)
            .map(|w| 0.5 * (w[0].0 + w[1].0))
            .collect();
        if mids.is_empty() {
            return Ok(cur);
        }
        let points = cur.len() + mids.len();
        if points > config.max_points {
            return Err(KhoError::PointBudget {
                step,
                points,
                cap: config.max_points,
            });
        }
        let new = par::map_slice(&mids, |&t| (t, classical_iterate(initial_at(init, t), params, step)));
        let mut merged = Vec::with_capacity(points);
        let mut it = new.into_iter().peekable();
        for (i, x) in cur.iter().enumerate() {
            merged.push(*x);
            if i + 1 < cur.len() {
                if let Some(m) = it.peek() {
                    if m.0 > x.0 && m.0 < cur[i + 1].0 {
                        merged.push(it.next().expect("peeked"));
                    }
                }
            }
        }
        cur = merged;
    }
}

/// Points drawn from the phase-space density of a Gaussian state (its Wigner
/// function), reproducible for a given seed regardless of thread count.
pub fn sample_gaussian(spec: &GaussianSpec, hbar_eff: f64, samples: usize, seed: u64) -> Result<Vec<PhasePoint>> {
    const CHUNK: usize = 4096;
    spec.validate()?;
    let c = spec.covariance(hbar_eff);
    let l00 = c[0][0].sqrt();
    let l10 = c[1][0] / l00;
    let l11 = (c[1][1] - l10 * l10).max(0.0).sqrt();
    let chunks = samples.div_ceil(CHUNK);
    let parts = par::map_range(chunks, |ci| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ci as u64);
        let len = CHUNK.min(samples - ci * CHUNK);
        (0..len)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                PhasePoint::new(spec.q0 + l00 * a, spec.p0 + l10 * a + l11 * b)
            })
            .collect::<Vec<_>>()
    });
    Ok(parts.into_iter().flatten().collect())
}

/// Monte Carlo push-forward of a Gaussian phase-space density through `n`
/// classical steps, binned on `hist`'s window.
pub fn liouville_histogram(
    spec: &GaussianSpec,
    hbar_eff: f64,
    params: &KhoParams,
    n: usize,
    samples: usize,
    seed: u64,
    mut hist: Histogram2d,
) -> Result<Histogram2d> {
    params.validate()?;
    if samples == 0 {
        return Err(KhoError::invalid("samples", "must be >= 1"));
    }
    let pts = sample_gaussian(spec, hbar_eff, samples, seed)?;
    let moved = par::map_slice(&pts, |&z| classical_iterate(z, params, n));
    for z in moved {
        hist.add(z);
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn params(k: f64, a: f64, phi: f64) -> KhoParams {
        KhoParams::new(k, a, phi, 1.0).unwrap()
    }

    #[test]
    fn basic_steps() {
        let z = classical_step(PhasePoint::new(1.0, 0.0), &params(0.0, FRAC_PI_2, 0.0));
        assert!(z.q.abs() < 1e-15 && (z.p - 1.0).abs() < 1e-15);
        for &a in &[0.3, 1.0, 2.0] {
            let z = classical_step(PhasePoint::default(), &params(2.0, a, 0.0));
            assert_eq!(z, PhasePoint::default());
        }
    }

    #[test]
    fn jacobian_is_unimodular_and_matches_differences() {
        let p = params(2.0, 0.7, 0.4);
        let z = PhasePoint::new(0.8, -1.3);
        let j = jacobian(z, &p);
        assert!((j[0][0] * j[1][1] - j[0][1] * j[1][0] - 1.0).abs() < 1e-14);
        let h = 1e-6;
        let f = |q: f64, pp: f64| classical_step(PhasePoint::new(q, pp), &p);
        let (a, b) = (f(z.q + h, z.p), f(z.q - h, z.p));
        assert!(((a.q - b.q) / (2.0 * h) - j[0][0]).abs() < 1e-8);
        assert!(((a.p - b.p) / (2.0 * h) - j[1][0]).abs() < 1e-8);
        let (a, b) = (f(z.q, z.p + h), f(z.q, z.p - h));
        assert!(((a.q - b.q) / (2.0 * h) - j[0][1]).abs() < 1e-8);
        assert!(((a.p - b.p) / (2.0 * h) - j[1][1]).abs() < 1e-8);
    }

    #[test]
    fn small_blob_keeps_its_area() {
        // Covariance of a tiny blob transforms with the Jacobian; det preserved.
        let p = params(2.0, 2.0 * PI / 3.0, 0.0);
        let spec = GaussianSpec::centered_at(1.0, 0.5);
        let h = 1e-10;
        let hist_pts = sample_gaussian(&spec, h, 200_000, 3).unwrap();
        let moved: Vec<PhasePoint> = hist_pts.iter().map(|&z| classical_step(z, &p)).collect();
        let det = |pts: &[PhasePoint]| {
            let n = pts.len() as f64;
            let (mq, mp) = (
                pts.iter().map(|z| z.q).sum::<f64>() / n,
                pts.iter().map(|z| z.p).sum::<f64>() / n,
            );
            let cqq = pts.iter().map(|z| (z.q - mq).powi(2)).sum::<f64>() / n;
            let cpp = pts.iter().map(|z| (z.p - mp).powi(2)).sum::<f64>() / n;
            let cqp = pts.iter().map(|z| (z.q - mq) * (z.p - mp)).sum::<f64>() / n;
            cqq * cpp - cqp * cqp
        };
        let (d0, d1) = (det(&hist_pts), det(&moved));
        assert!((d1 / d0 - 1.0).abs() < 1e-6, "{}", d1 / d0);
    }

    #[test]
    fn rational_rotation_orbit() {
        let p = params(0.0, TAU * 2.0 / 5.0, 0.0);
        let cloud = stroboscopic_web(&p, &[PhasePoint::new(1.3, 0.4)], 50).unwrap();
        let mut distinct: Vec<PhasePoint> = Vec::new();
        for z in &cloud.points {
            assert!((z.radius() - 1.3f64.hypot(0.4)).abs() < 1e-12);
            if !distinct.iter().any(|d| d.dist(z) < 1e-9) {
                distinct.push(*z);
            }
        }
        assert!(distinct.len() <= 5);
    }

    #[test]
    fn web_is_deterministic_and_ordered() {
        let p = params(2.0, 2.0 * PI / 3.0, 0.0);
        let a = stroboscopic_web(&p, &default_web_seeds(), 200).unwrap();
        let b = stroboscopic_web(&p, &default_web_seeds(), 200).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.points.len(), 13 * 200);
        assert_eq!(a.points[0], classical_step(default_web_seeds()[0], &p));
        assert_eq!(a.points[200 * 12], PhasePoint::default());
    }

    #[test]
    fn central_island_stays_bounded() {
        let p = params(0.75, 2.0 * PI / 3.0, 0.0);
        let cloud = stroboscopic_web(&p, &[PhasePoint::new(0.5, 0.0)], 5000).unwrap();
        assert!(cloud.max_radius < 2.0);
    }

    #[test]
    fn rigid_rotation_of_manifold() {
        let line = Polyline::segment(PhasePoint::new(-1.0, 0.2), PhasePoint::new(2.0, 0.5), 10).unwrap();
        let p = params(0.0, 0.9, 0.0);
        let out = evolve_manifold(&line, &p, 4, &ManifoldConfig::default()).unwrap();
        assert!((out.arc_length() - line.arc_length()).abs() < 1e-9);
        assert!(out.max_spacing() <= 0.05);
    }

    #[test]
    fn manifold_refinement_and_stretching() {
        let line = Polyline::segment(PhasePoint::new(-1.0, 0.0), PhasePoint::new(1.0, 0.0), 3).unwrap();
        let cfg = ManifoldConfig::default();
        let chaotic = evolve_manifold_history(&line, &params(2.0, 2.0 * PI / 3.0, 0.0), 3, &cfg).unwrap();
        let regular = evolve_manifold_history(&line, &params(0.75, 2.0 * PI / 3.0, 0.0), 3, &cfg).unwrap();
        for pl in chaotic.iter().chain(&regular) {
            assert!(pl.max_spacing() <= cfg.eps);
        }
        let growth = |h: &[Polyline]| h[3].arc_length() / h[0].arc_length();
        assert!(growth(&chaotic) > growth(&regular));
        // Every point sits on the exactly mapped initial curve.
        let p = params(2.0, 2.0 * PI / 3.0, 0.0);
        let z = classical_iterate(PhasePoint::new(0.5, 0.0), &p, 3);
        assert!(chaotic[3].distance_to(z) < cfg.eps);
    }

    #[test]
    fn point_budget() {
        let line = Polyline::segment(PhasePoint::new(-3.0, 0.0), PhasePoint::new(3.0, 0.0), 2).unwrap();
        let cfg = ManifoldConfig {
            eps: 0.01,
            max_points: 500,
        };
        let err = evolve_manifold(&line, &params(7.4, 1.0, 0.0), 4, &cfg).unwrap_err();
        assert!(matches!(err, KhoError::PointBudget { .. }));
    }

    #[test]
    fn liouville_identity_and_rotation() {
        let h = 0.5;
        let spec = GaussianSpec::centered_at(1.0, 0.0).with_squeeze(1.5, 0.0);
        let win = Histogram2d::new((-4.0, 4.0), (-4.0, 4.0), (80, 80)).unwrap();
        let p0 = KhoParams::new(0.0, FRAC_PI_2, 0.0, h).unwrap();
        let h0 = liouville_histogram(&spec, h, &p0, 0, 200_000, 0, win.clone()).unwrap();
        let (m, c) = h0.moments();
        let cov = spec.covariance(h);
        assert!((m[0] - 1.0).abs() < 0.01 && m[1].abs() < 0.01);
        assert!((c[0][0] - cov[0][0]).abs() < 0.02 && (c[1][1] - cov[1][1]).abs() < 0.02);
        let h1 = liouville_histogram(&spec, h, &p0, 1, 200_000, 0, win).unwrap();
        let (m, c) = h1.moments();
        assert!(m[0].abs() < 0.01 && (m[1] - 1.0).abs() < 0.01);
        assert!((c[0][0] - cov[1][1]).abs() < 0.02 && (c[1][1] - cov[0][0]).abs() < 0.02);
    }

    #[test]
    fn sampling_is_seeded() {
        let spec = GaussianSpec::default();
        let a = sample_gaussian(&spec, 1.0, 10_000, 7).unwrap();
        let b = sample_gaussian(&spec, 1.0, 10_000, 7).unwrap();
        let c = sample_gaussian(&spec, 1.0, 10_000, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    proptest! {
        #[test]
        fn inverse_round_trip(
            q in -20.0f64..20.0, p in -20.0f64..20.0,
            k in 0.0f64..10.0, a in -7.0f64..7.0, phi in -7.0f64..7.0,
        ) {
            let par = params(k, a, phi);
            let z = PhasePoint::new(q, p);
            let back = classical_step_inverse(classical_step(z, &par), &par);
            prop_assert!(back.dist(&z) < 1e-12 * (1.0 + z.radius() + k));
        }
    }
}
