#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use swimflow::spectral::rng::counter_u64;
use swimflow::{leray_project, Grid, SpectralVectorField};

pub type Modes = BTreeMap<[i64; 3], [Complex64; 3]>;

/// Random Hermitian field supported on `|m_j| ≤ band`, optionally projected.
pub fn band_limited(grid: &Grid, seed: u64, band: i64, solenoidal: bool) -> SpectralVectorField {
    let d = grid.dim();
    let mut f = SpectralVectorField::zeros(*grid);
    let mut counter = 0u64;
    let mut next = || {
        counter += 1;
        (counter_u64(seed, counter) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for m in cube(d, band) {
        let (_, conj) = grid.locate(m);
        if conj {
            continue;
        }
        let neg = m.map(|x| -x);
        let mut v = [Complex64::default(); 3];
        for x in v.iter_mut().take(d) {
            *x = Complex64::new(next(), next());
        }
        if neg == m {
            for x in &mut v {
                x.im = 0.0;
            }
        }
        f.set_mode(m, v);
    }
    f.symmetrize();
    if solenoidal {
        leray_project(&f)
    } else {
        f
    }
}

/// All integer vectors with `|m_j| ≤ r` in `d` dimensions.
pub fn cube(d: usize, r: i64) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    let rr = |j: usize| if j < d { r } else { 0 };
    for a in -rr(0)..=rr(0) {
        for b in -rr(1)..=rr(1) {
            for c in -rr(2)..=rr(2) {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Every active mode of `f` with its coefficient vector.
pub fn modes(f: &SpectralVectorField) -> Modes {
    let g = f.grid();
    let r = g.modes().iter().map(|n| *n as i64 / 2 - 1).min().unwrap();
    cube(g.dim(), r).into_iter().map(|m| (m, f.mode(m))).collect()
}

pub fn wave(grid: &Grid, m: [i64; 3]) -> [f64; 3] {
    grid.wavevector_of(m)
}

/// Direct convolution `Σ_{a+b=m} f(a, b)` over mode lists, truncated to `|m_j| ≤ r`.
pub fn convolve(
    a: &Modes,
    b: &Modes,
    r: i64,
    d: usize,
    f: impl Fn([i64; 3], &[Complex64; 3], [i64; 3], &[Complex64; 3]) -> [Complex64; 3],
) -> Modes {
    let mut out: Modes = cube(d, r).into_iter().map(|m| (m, [Complex64::default(); 3])).collect();
    for (ma, va) in a {
        for (mb, vb) in b {
            let m = [ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2]];
            if let Some(slot) = out.get_mut(&m) {
                let v = f(*ma, va, *mb, vb);
                for j in 0..3 {
                    slot[j] += v[j];
                }
            }
        }
    }
    out
}

/// Largest coefficient difference between `f` and a mode map.
pub fn max_diff(f: &SpectralVectorField, expected: &Modes) -> f64 {
    let got = modes(f);
    let mut worst: f64 = 0.0;
    for (m, v) in expected {
        let g = got.get(m).copied().unwrap_or_default();
        for j in 0..3 {
            worst = worst.max((g[j] - v[j]).norm());
        }
    }
    worst
}

/// Direct `O(N²)` forward DFT of one real component, normalised by `1/N`.
pub fn direct_dft(grid: &Grid, real: &[f64], m: [i64; 3]) -> Complex64 {
    let [a, b, c] = grid.real_shape();
    let d = grid.dim();
    let mut acc = Complex64::default();
    for i0 in 0..a {
        for i1 in 0..b {
            for i2 in 0..c {
                let idx = [i0, i1, i2];
                let mut phase = 0.0;
                for j in 0..d {
                    let s = 3 - d + j;
                    phase += 2.0 * PI * m[j] as f64 * idx[s] as f64 / grid.modes()[j] as f64;
                }
                let v = real[(i0 * b + i1) * c + i2];
                acc += Complex64::from_polar(v, -phase);
            }
        }
    }
    acc / grid.num_points() as f64
}

pub fn real_dot(a: &[Complex64; 3], b: &[f64; 3]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
