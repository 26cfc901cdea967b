//! Seeded random solenoidal initial data.
//!
//! Draws come from SplitMix64 used as a counter-based generator: the value
//! for counter `c` under seed `s` is `mix(s + (c + 1) * 0x9E3779B97F4A7C15)`.
//! Component `j` of the mode stored at linear full-grid index `l` consumes
//! counters `2 (j * N + l)` and `2 (j * N + l) + 1`, where `N` is the number
//! of collocation points. Each pair feeds one Box-Muller transform, giving a
//! complex Gaussian with `E|z|^2 = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::field::{for_each_conjugate_pair, SpectralVectorField};
use super::grid::Grid;
use super::ops::leray_project_in_place;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `counter`-th output of the SplitMix64 stream started at `seed`.
pub fn counter_u64(seed: u64, counter: u64) -> u64 {
    splitmix64(seed.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Uniform on `(0, 1]` with 53 random bits.
fn uniform_open0(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on `[0, 1)` with 53 random bits.
fn uniform(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Complex Gaussian with unit mean-square modulus from two counters.
pub fn complex_gaussian(seed: u64, counter: u64) -> Complex64 {
    let u1 = uniform_open0(counter_u64(seed, counter));
    let u2 = uniform(counter_u64(seed, counter + 1));
    let r = (-u1.ln()).sqrt();
    let theta = 2.0 * PI * u2;
    Complex64::new(r * theta.cos(), r * theta.sin())
}

/// Random real solenoidal field with `E Σ_j |p̂_j(k)|² = envelope(|k|)²` on
/// every active mode `k ≠ 0`. The mean mode and the Nyquist planes are zero.
pub fn random_solenoidal_field(
    grid: &Grid,
    seed: u64,
    envelope: impl Fn(f64) -> f64,
) -> SpectralVectorField {
    let d = grid.dim();
    let npts = grid.num_points() as u64;
    let [_, b, c] = grid.real_shape();
    // projection removes one of the d independent directions
    let norm = 1.0 / ((d - 1) as f64).sqrt();
    let mut out = SpectralVectorField::zeros(*grid);
    let n = grid.spec_len();
    {
        let coeffs = out.coeffs_mut();
        for flat in 0..n {
            let idx = grid.spec_index(flat);
            let m = grid.mode_vector(idx);
            if !grid.is_active(m) || m == [0, 0, 0] {
                continue;
            }
            let k = grid.wavevector(idx);
            let amp = envelope((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()) * norm;
            let linear = ((idx[0] * b + idx[1]) * c + idx[2]) as u64;
            for j in 0..d {
                let counter = 2 * (j as u64 * npts + linear);
                coeffs[j * n + flat] = complex_gaussian(seed, counter) * amp;
            }
        }
    }
    // entries on self-conjugate planes: the lower offset owns the draw
    let mut pairs = Vec::new();
    for_each_conjugate_pair(grid, |f, p| pairs.push((f, p)));
    {
        let coeffs = out.coeffs_mut();
        for (f, p) in pairs {
            for j in 0..d {
                if f == p {
                    coeffs[j * n + f].im = 0.0;
                } else {
                    coeffs[j * n + p] = coeffs[j * n + f].conj();
                }
            }
        }
    }
    leray_project_in_place(&mut out);
    out
}
