use num_complex::Complex64;

use super::fft;
use super::grid::Grid;
use crate::error::{Error, Result};

/// Relative Hermitian-symmetry defect tolerated by [`inverse`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Real vector field sampled at the collocation points. Components are
/// stored one after another, each in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVectorField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealVectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self { values: vec![0.0; grid.dim() * grid.real_len()], grid }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let expected = grid.dim() * grid.real_len();
        if values.len() != expected {
            return Err(Error::ShapeMismatch { expected, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("real field contains non-finite values".into()));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x)` at every collocation point.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        let n = grid.real_len();
        let [_, b, c] = grid.real_shape();
        let h: Vec<f64> = (0..grid.dim())
            .map(|j| grid.lengths()[j] / grid.modes()[j] as f64)
            .collect();
        for p in 0..n {
            let idx = [p / (b * c), (p / c) % b, p % c];
            let mut x = [0.0; 3];
            for (j, hj) in h.iter().enumerate() {
                x[j] = idx[3 - grid.dim() + j] as f64 * hj;
            }
            let v = f(x);
            for j in 0..grid.dim() {
                out.values[j * n + p] = v[j];
            }
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn component(&self, j: usize) -> &[f64] {
        let n = self.grid.real_len();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn component_mut(&mut self, j: usize) -> &mut [f64] {
        let n = self.grid.real_len();
        &mut self.values[j * n..(j + 1) * n]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Half-spectrum Fourier coefficients of a real vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    grid: Grid,
    coeffs: Vec<Complex64>,
    solenoidal: bool,
}

impl SpectralVectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            coeffs: vec![Complex64::default(); grid.dim() * grid.spec_len()],
            grid,
            solenoidal: true,
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected = grid.dim() * grid.spec_len();
        if coeffs.len() != expected {
            return Err(Error::ShapeMismatch { expected, got: coeffs.len() });
        }
        Ok(Self { grid, coeffs, solenoidal: false })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        self.solenoidal = false;
        &mut self.coeffs
    }

    pub fn component(&self, j: usize) -> &[Complex64] {
        let n = self.grid.spec_len();
        &self.coeffs[j * n..(j + 1) * n]
    }

    pub fn component_mut(&mut self, j: usize) -> &mut [Complex64] {
        self.solenoidal = false;
        let n = self.grid.spec_len();
        &mut self.coeffs[j * n..(j + 1) * n]
    }

    /// Coefficient vector at a flat spectral offset.
    pub fn at(&self, flat: usize) -> [Complex64; 3] {
        let n = self.grid.spec_len();
        let mut v = [Complex64::default(); 3];
        for (j, vj) in v.iter_mut().enumerate().take(self.grid.dim()) {
            *vj = self.coeffs[j * n + flat];
        }
        v
    }

    pub fn set(&mut self, flat: usize, v: [Complex64; 3]) {
        let n = self.grid.spec_len();
        for (j, vj) in v.iter().enumerate().take(self.grid.dim()) {
            self.coeffs[j * n + flat] = *vj;
        }
    }

    /// Coefficient of an arbitrary integer mode (conjugating when the mode
    /// lies in the omitted half).
    pub fn mode(&self, m: [i64; 3]) -> [Complex64; 3] {
        let (flat, conj) = self.grid.locate(m);
        let mut v = self.at(flat);
        if conj {
            for x in &mut v {
                *x = x.conj();
            }
        }
        v
    }

    /// Sets mode `m` and, where both live in storage, its conjugate partner.
    pub fn set_mode(&mut self, m: [i64; 3], v: [Complex64; 3]) {
        self.solenoidal = false;
        let (flat, conj) = self.grid.locate(m);
        let vc = v.map(|x| x.conj());
        self.set(flat, if conj { vc } else { v });
        let neg = m.map(|x| -x);
        let (pflat, pconj) = self.grid.locate(neg);
        if pflat != flat {
            self.set(pflat, if pconj { v } else { vc });
        }
    }

    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    pub(crate) fn mark_solenoidal(&mut self) {
        self.solenoidal = true;
    }

    pub(crate) fn clear_solenoidal(&mut self) {
        self.solenoidal = false;
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += a * other`; the solenoidal flag survives only if both had it.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        self.solenoidal &= other.solenoidal;
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `|k · f(k)|` over all modes, relative to the coefficient scale.
    pub fn divergence_defect(&self) -> f64 {
        let n = self.grid.spec_len();
        let d = self.grid.dim();
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for flat in 0..n {
            let idx = self.grid.spec_index(flat);
            let k = self.grid.wavevector(idx);
            let kn = k.iter().map(|x| x * x).sum::<f64>().sqrt();
            if kn == 0.0 {
                continue;
            }
            let mut div = Complex64::default();
            for j in 0..d {
                div += self.coeffs[j * n + flat] * (k[j] / kn);
            }
            worst = worst.max(div.norm());
        }
        worst / scale
    }

    /// Largest `|f(k) - conj(f(-k))|` on the self-conjugate planes, relative
    /// to the coefficient scale.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for_each_conjugate_pair(&self.grid, |f, p| {
            for j in 0..self.grid.dim() {
                let off = j * self.grid.spec_len();
                let d = (self.coeffs[off + f] - self.coeffs[off + p].conj()).norm();
                worst = worst.max(d);
            }
        });
        worst / scale
    }

    /// Projects the self-conjugate planes onto Hermitian-symmetric values.
    pub fn symmetrize(&mut self) {
        let n = self.grid.spec_len();
        let d = self.grid.dim();
        let grid = self.grid;
        for_each_conjugate_pair(&grid, |f, p| {
            for j in 0..d {
                let a = self.coeffs[j * n + f];
                let b = self.coeffs[j * n + p];
                let avg = (a + b.conj()) * 0.5;
                self.coeffs[j * n + f] = avg;
                self.coeffs[j * n + p] = avg.conj();
            }
        });
    }

    /// Zeroes every mode outside the active band (Nyquist modes included).
    pub fn truncate_to_active(&mut self) {
        let n = self.grid.spec_len();
        for flat in 0..n {
            let m = self.grid.mode_vector(self.grid.spec_index(flat));
            if !self.grid.is_active(m) {
                for j in 0..self.grid.dim() {
                    self.coeffs[j * n + flat] = Complex64::default();
                }
            }
        }
    }
}

/// Calls `f(flat, partner)` once per pair of entries on the planes of the
/// halved axis that hold both `k` and `-k` (including self-paired entries).
pub(crate) fn for_each_conjugate_pair(grid: &Grid, mut f: impl FnMut(usize, usize)) {
    let [a, b, c] = grid.spec_shape();
    let real_c = grid.real_shape()[2];
    for k2 in [0, real_c / 2] {
        debug_assert!(k2 < c);
        for i0 in 0..a {
            for i1 in 0..b {
                let p0 = (a - i0) % a;
                let p1 = (b - i1) % b;
                let flat = grid.spec_flat([i0, i1, k2]);
                let partner = grid.spec_flat([p0, p1, k2]);
                if flat <= partner {
                    f(flat, partner);
                }
            }
        }
    }
}

/// Forward transform; coefficients carry the `1/N` normalization.
pub fn forward(f: &RealVectorField) -> SpectralVectorField {
    let grid = *f.grid();
    let mut out = SpectralVectorField::zeros(grid);
    out.solenoidal = false;
    let n = grid.spec_len();
    for j in 0..grid.dim() {
        fft::forward_scalar(&grid, f.component(j), &mut out.coeffs[j * n..(j + 1) * n]);
    }
    out
}

/// Inverse transform; refuses spectra that are not Hermitian to within
/// [`SYMMETRY_TOLERANCE`] instead of silently symmetrizing them.
pub fn inverse(f: &SpectralVectorField) -> Result<RealVectorField> {
    let defect = f.hermitian_defect();
    if defect > SYMMETRY_TOLERANCE {
        return Err(Error::SymmetryViolation(defect));
    }
    let mut sym = f.clone();
    sym.symmetrize();
    Ok(inverse_unchecked(&sym))
}

pub(crate) fn inverse_unchecked(f: &SpectralVectorField) -> RealVectorField {
    let grid = *f.grid();
    let mut out = RealVectorField::zeros(grid);
    let n = grid.spec_len();
    let mut buf = vec![Complex64::default(); n];
    for j in 0..grid.dim() {
        buf.copy_from_slice(f.component(j));
        fft::inverse_scalar(&grid, &mut buf, out.component_mut(j));
    }
    out
}
