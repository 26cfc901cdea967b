use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_complex::Complex64;

use super::fft;
use super::field::{inverse_unchecked, SpectralVectorField};
use super::grid::Grid;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Applies `I - k kᵀ / |k|²` to every mode. The mean mode is left untouched
/// and modes outside the active band (Nyquist planes) are removed.
pub fn leray_project(f: &SpectralVectorField) -> SpectralVectorField {
    let mut out = f.clone();
    leray_project_in_place(&mut out);
    out
}

pub fn leray_project_in_place(f: &mut SpectralVectorField) {
    let grid = *f.grid();
    let d = grid.dim();
    let table = grid.table();
    for flat in 0..grid.spec_len() {
        if !table.active[flat] {
            f.set(flat, [Complex64::default(); 3]);
            continue;
        }
        let k = table.k[flat];
        let k2 = table.k2[flat];
        if k2 == 0.0 {
            continue;
        }
        let mut v = f.at(flat);
        let mut dot = Complex64::default();
        for j in 0..d {
            dot += v[j] * k[j];
        }
        for j in 0..d {
            v[j] -= dot * (k[j] / k2);
        }
        f.set(flat, v);
    }
    f.mark_solenoidal();
}

/// Multiplies mode `k` by `(-|k|²)^order`; `order` 1 is Δ, 2 is Δ².
pub fn apply_laplacian(f: &SpectralVectorField, order: u32) -> SpectralVectorField {
    let mut out = f.clone();
    let sol = f.is_solenoidal();
    let grid = *f.grid();
    let table = grid.table();
    for flat in 0..grid.spec_len() {
        let s = (-table.k2[flat]).powi(order as i32);
        let v = out.at(flat).map(|x| x * s);
        out.set(flat, v);
    }
    if sol {
        out.mark_solenoidal();
    }
    out
}

/// `A⁻¹ f`: Leray projection followed by division by `|k|²`; zero mean.
pub fn stokes_inverse(f: &SpectralVectorField) -> SpectralVectorField {
    let mut out = leray_project(f);
    let grid = *f.grid();
    let table = grid.table();
    for flat in 0..grid.spec_len() {
        let k2 = table.k2[flat];
        let v = if k2 == 0.0 {
            [Complex64::default(); 3]
        } else {
            out.at(flat).map(|x| x / k2)
        };
        out.set(flat, v);
    }
    out.mark_solenoidal();
    out
}

/// Padded grid for exact evaluation of a product of `arity` band-limited
/// factors: 3/2 for quadratic, 2 for cubic terms.
pub fn padded_grid(grid: &Grid, arity: usize) -> Grid {
    match arity {
        0..=2 => grid.rescaled(3, 2),
        _ => grid.rescaled(2, 1),
    }
}

thread_local! {
    static EMBEDDINGS: RefCell<HashMap<(usize, [usize; 3], [usize; 3]), Rc<[(usize, usize)]>>> =
        RefCell::new(HashMap::new());
}

/// Pairs `(base offset, padded offset)` of every active mode of `base`.
fn embedding(base: &Grid, padded: &Grid) -> Rc<[(usize, usize)]> {
    let key = (base.dim(), base.real_shape(), padded.real_shape());
    EMBEDDINGS.with(|e| {
        e.borrow_mut()
            .entry(key)
            .or_insert_with(|| {
                (0..base.spec_len())
                    .filter_map(|flat| {
                        let m = base.mode_vector(base.spec_index(flat));
                        base.is_active(m).then(|| {
                            let (pf, conj) = padded.locate(m);
                            debug_assert!(!conj);
                            (flat, pf)
                        })
                    })
                    .collect()
            })
            .clone()
    })
}

/// Scalar physical values on `padded` of `mult(k) · src(k)` over active modes.
pub(crate) fn scalar_to_padded(
    base: &Grid,
    padded: &Grid,
    src: &[Complex64],
    mult: impl Fn([f64; 3]) -> Complex64,
) -> Vec<f64> {
    let table = base.table();
    let mut spec = vec![Complex64::default(); padded.spec_len()];
    for &(bf, pf) in embedding(base, padded).iter() {
        let v = src[bf];
        if v != Complex64::default() {
            spec[pf] = v * mult(table.k[bf]);
        }
    }
    let mut out = vec![0.0; padded.real_len()];
    fft::inverse_scalar(padded, &mut spec, &mut out);
    out
}

/// Components of `f` on the padded grid.
pub fn to_padded(f: &SpectralVectorField, padded: &Grid) -> Vec<Vec<f64>> {
    (0..f.grid().dim())
        .map(|j| scalar_to_padded(f.grid(), padded, f.component(j), |_| Complex64::new(1.0, 0.0)))
        .collect()
}

/// Gradient tensor of `f` on the padded grid; entry `i * d + j` is `∂_j f_i`.
pub fn gradient_padded(f: &SpectralVectorField, padded: &Grid) -> Vec<Vec<f64>> {
    let d = f.grid().dim();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(scalar_to_padded(f.grid(), padded, f.component(i), |k| I * k[j]));
        }
    }
    out
}

/// Forward transform of padded physical components, truncated to the active
/// modes of `base`.
pub fn from_padded(base: &Grid, padded: &Grid, comps: &[Vec<f64>]) -> SpectralVectorField {
    let mut out = SpectralVectorField::zeros(*base);
    let mut spec = vec![Complex64::default(); padded.spec_len()];
    let map = embedding(base, padded);
    for (j, comp) in comps.iter().enumerate() {
        fft::forward_scalar(padded, comp, &mut spec);
        let dst = out.component_mut(j);
        for &(bf, pf) in map.iter() {
            dst[bf] = spec[pf];
        }
    }
    out.clear_solenoidal();
    out
}

/// Alias-free product of 2 or 3 scalar fields given as half-spectra on
/// `grid`. Only active modes of the factors enter and the result is
/// truncated to the active band.
pub fn dealiased_product(grid: &Grid, factors: &[&[Complex64]]) -> Vec<Complex64> {
    assert!(
        (2..=3).contains(&factors.len()),
        "dealiased_product supports arity 2 or 3"
    );
    let padded = padded_grid(grid, factors.len());
    let mut prod = vec![1.0; padded.real_len()];
    for f in factors {
        let vals = scalar_to_padded(grid, &padded, f, |_| Complex64::new(1.0, 0.0));
        for (p, v) in prod.iter_mut().zip(vals) {
            *p *= v;
        }
    }
    let mut spec = vec![Complex64::default(); padded.spec_len()];
    fft::forward_scalar(&padded, &prod, &mut spec);
    let mut out = vec![Complex64::default(); grid.spec_len()];
    for &(bf, pf) in embedding(grid, &padded).iter() {
        out[bf] = spec[pf];
    }
    out
}

/// Sum with pairwise reduction; the order is fixed by the input layout.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `∫ w(k) f·g` over the torus evaluated by Parseval, with a per-mode weight
/// depending on the wavevector.
fn weighted_inner(
    f: &SpectralVectorField,
    g: &SpectralVectorField,
    w: impl Fn(f64) -> f64,
) -> f64 {
    let grid = *f.grid();
    debug_assert_eq!(&grid, g.grid());
    let n = grid.spec_len();
    let table = grid.table();
    let mut terms = Vec::with_capacity(n);
    for flat in 0..n {
        let weight = table.weight[flat] * w(table.k2[flat]);
        let mut acc = 0.0;
        for j in 0..grid.dim() {
            let a = f.coeffs()[j * n + flat];
            let b = g.coeffs()[j * n + flat];
            acc += a.re * b.re + a.im * b.im;
        }
        terms.push(weight * acc);
    }
    grid.volume() * pairwise_sum(&terms)
}

/// `L²` inner product `(f, g)`.
pub fn inner(f: &SpectralVectorField, g: &SpectralVectorField) -> f64 {
    weighted_inner(f, g, |_| 1.0)
}

pub fn norm_l2(f: &SpectralVectorField) -> f64 {
    inner(f, f).max(0.0).sqrt()
}

/// `‖∇f‖_{L²}`.
pub fn norm_grad(f: &SpectralVectorField) -> f64 {
    weighted_inner(f, f, |k2| k2).max(0.0).sqrt()
}

/// `‖Δf‖_{L²}`.
pub fn norm_laplacian(f: &SpectralVectorField) -> f64 {
    weighted_inner(f, f, |k2| k2 * k2).max(0.0).sqrt()
}

/// Pointwise magnitudes `|f(x)|` on a 2×-refined grid, where `|f|⁴` of any
/// active-band field is integrated exactly.
fn magnitudes_refined(f: &SpectralVectorField) -> (Grid, Vec<f64>) {
    let fine = f.grid().rescaled(2, 1);
    let comps = to_padded(f, &fine);
    let mut mag2 = vec![0.0; fine.real_len()];
    for c in &comps {
        for (m, v) in mag2.iter_mut().zip(c) {
            *m += v * v;
        }
    }
    (fine, mag2)
}

/// `‖f‖_{L^q}` by collocation quadrature on the 2×-refined grid.
pub fn norm_lp(f: &SpectralVectorField, q: f64) -> f64 {
    let (fine, mag2) = magnitudes_refined(f);
    let terms: Vec<f64> = mag2.iter().map(|m| m.powf(q / 2.0)).collect();
    (fine.cell_volume() * pairwise_sum(&terms)).powf(1.0 / q)
}

/// `‖f‖_{L⁴}`; exact for active-band fields.
pub fn norm_l4(f: &SpectralVectorField) -> f64 {
    let (fine, mag2) = magnitudes_refined(f);
    let terms: Vec<f64> = mag2.iter().map(|m| m * m).collect();
    (fine.cell_volume() * pairwise_sum(&terms)).sqrt().sqrt()
}

/// Collocation maximum of the pointwise Frobenius norm of `∇f`.
pub fn max_gradient(f: &SpectralVectorField) -> f64 {
    let grid = *f.grid();
    let grads = gradient_padded(f, &grid);
    let mut best: f64 = 0.0;
    for p in 0..grid.real_len() {
        let s: f64 = grads.iter().map(|g| g[p] * g[p]).sum();
        best = best.max(s);
    }
    best.sqrt()
}

/// Real-space values of a spectral field (Hermitian symmetry assumed).
pub fn values(f: &SpectralVectorField) -> super::field::RealVectorField {
    inverse_unchecked(f)
}
