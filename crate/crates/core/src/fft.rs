use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    // Each worker keeps its own planner; plans themselves are immutable and shareable.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Forward/inverse plan pair for one transform length. Both directions are unnormalized.
#[derive(Clone)]
pub(crate) struct FftPair {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            FftPair {
                forward: p.plan_fft_forward(len),
                inverse: p.plan_fft_inverse(len),
            }
        })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }
}

impl std::fmt::Debug for FftPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPair").field("len", &self.len()).finish()
    }
}

pub(crate) fn forward(data: &mut [Complex64]) {
    FftPair::new(data.len()).forward.process(data);
}

/// Signed frequency index of FFT bin `m` for length `n` (Nyquist bin maps to `-n/2`).
pub(crate) fn signed_index(m: usize, n: usize) -> i64 {
    if m < n.div_ceil(2) {
        m as i64
    } else {
        m as i64 - n as i64
    }
}
