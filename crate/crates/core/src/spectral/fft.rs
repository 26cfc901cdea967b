//! Scalar real <-> half-spectrum transforms on a [`Grid`].
//!
//! Forward transforms divide by the number of collocation points, so a
//! coefficient is the amplitude of `exp(i k·x)` independently of resolution.
//! Inverse transforms are unnormalised sums.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftDirection, FftPlanner};

use super::grid::Grid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static REAL_PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
}

fn plan(len: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, dir))
}

fn plan_r2c(len: usize) -> Arc<dyn RealToComplex<f64>> {
    REAL_PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

fn plan_c2r(len: usize) -> Arc<dyn ComplexToReal<f64>> {
    REAL_PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Complex transform of every lane along storage axis `axis` (0 or 1) of a
/// half-spectrum array. Lanes that are identically zero are skipped.
fn transform_full_axis(grid: &Grid, data: &mut [Complex64], axis: usize, dir: FftDirection) {
    let [a, b, c] = grid.spec_shape();
    let len = [a, b][axis];
    if len == 1 {
        return;
    }
    let fft = plan(len, dir);
    let mut lane = vec![Complex64::default(); len];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let (outer, stride) = if axis == 0 { (b * c, b * c) } else { (a * c, c) };
    let zero = Complex64::default();
    for o in 0..outer {
        let base = if axis == 0 { o } else { (o / c) * b * c + o % c };
        let mut any = false;
        for (i, v) in lane.iter_mut().enumerate() {
            *v = data[base + i * stride];
            any |= *v != zero;
        }
        if !any {
            continue;
        }
        fft.process_with_scratch(&mut lane, &mut scratch);
        for (i, v) in lane.iter().enumerate() {
            data[base + i * stride] = *v;
        }
    }
}

/// Forward transform of one real scalar field.
pub fn forward_scalar(grid: &Grid, real: &[f64], out: &mut [Complex64]) {
    let [a, b, c] = grid.real_shape();
    let ch = c / 2 + 1;
    debug_assert_eq!(real.len(), a * b * c);
    debug_assert_eq!(out.len(), a * b * ch);
    let fft = plan_r2c(c);
    let mut row_in = fft.make_input_vec();
    let mut scratch = fft.make_scratch_vec();
    for row in 0..a * b {
        row_in.copy_from_slice(&real[row * c..(row + 1) * c]);
        fft.process_with_scratch(&mut row_in, &mut out[row * ch..(row + 1) * ch], &mut scratch)
            .expect("buffer sizes match the plan");
    }
    transform_full_axis(grid, out, 1, FftDirection::Forward);
    transform_full_axis(grid, out, 0, FftDirection::Forward);
    let scale = 1.0 / grid.num_points() as f64;
    for v in out.iter_mut() {
        *v *= scale;
    }
}

/// Inverse transform of one half-spectrum scalar field. The input is assumed
/// Hermitian on the self-conjugate planes; `spec` is consumed as scratch.
pub fn inverse_scalar(grid: &Grid, spec: &mut [Complex64], out: &mut [f64]) {
    let [a, b, c] = grid.real_shape();
    let ch = c / 2 + 1;
    debug_assert_eq!(spec.len(), a * b * ch);
    debug_assert_eq!(out.len(), a * b * c);
    transform_full_axis(grid, spec, 0, FftDirection::Inverse);
    transform_full_axis(grid, spec, 1, FftDirection::Inverse);
    let fft = plan_c2r(c);
    let mut scratch = fft.make_scratch_vec();
    for row in 0..a * b {
        let half = &mut spec[row * ch..(row + 1) * ch];
        // roundoff leaves tiny imaginary parts on the real columns
        half[0].im = 0.0;
        half[ch - 1].im = 0.0;
        fft.process_with_scratch(half, &mut out[row * c..(row + 1) * c], &mut scratch)
            .expect("buffer sizes match the plan");
    }
}
