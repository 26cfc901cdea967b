//! Brute-force Galerkin system on a cube of Fourier modes.
//!
//! The state is the full list of coefficients `p(m)` for `|m_j| ≤ cutoff`.
//! Every nonlinear term is a direct convolution sum over mode pairs, the
//! velocity is solved mode by mode, and the coupling enters through the
//! symmetrised trilinear form
//! `½((p·∇)ψ - (ψ·∇)p, u) = (ψ, -½(p·∇)u - ½(∇p)ᵀu)`.
//! Time stepping is classical explicit RK4. Nothing here shares code with
//! the pseudospectral path beyond the grid geometry, which makes it a useful
//! cross-check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrate::State;
use crate::params::ModelParams;
use crate::spectral::{Grid, SpectralVectorField};

type V3 = [Complex64; 3];

const ZERO: V3 = [Complex64 { re: 0.0, im: 0.0 }; 3];
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Dense coefficient list over a cube of integer modes.
#[derive(Debug, Clone)]
struct Cube {
    d: usize,
    r: i64,
    side: usize,
    modes: Vec<[i64; 3]>,
}

impl Cube {
    fn new(d: usize, r: i64) -> Self {
        let side = (2 * r + 1) as usize;
        let len = side.pow(d as u32);
        let modes = (0..len)
            .map(|mut idx| {
                let mut m = [0i64; 3];
                for j in (0..d).rev() {
                    m[j] = (idx % side) as i64 - r;
                    idx /= side;
                }
                m
            })
            .collect();
        Self { d, r, side, modes }
    }

    fn index(&self, m: [i64; 3]) -> Option<usize> {
        let mut idx = 0usize;
        for j in 0..self.d {
            if m[j].abs() > self.r {
                return None;
            }
            idx = idx * self.side + (m[j] + self.r) as usize;
        }
        Some(idx)
    }

    fn len(&self) -> usize {
        self.modes.len()
    }
}

fn dot(a: &V3, b: &[f64; 3]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cdot(a: &V3, b: &V3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Precomputed geometry of the Galerkin system.
struct System<'a> {
    grid: Grid,
    cube: Cube,
    wide: Cube,
    k: Vec<[f64; 3]>,
    k2: Vec<f64>,
    params: &'a ModelParams,
}

impl<'a> System<'a> {
    fn new(grid: &Grid, cutoff: usize, params: &'a ModelParams) -> Self {
        let cube = Cube::new(grid.dim(), cutoff as i64);
        let wide = Cube::new(grid.dim(), 2 * cutoff as i64);
        let k: Vec<[f64; 3]> = cube.modes.iter().map(|&m| grid.wavevector_of(m)).collect();
        let k2 = k.iter().map(|k| k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).collect();
        Self { grid: *grid, cube, wide, k, k2, params }
    }

    fn project(&self, i: usize, v: V3) -> V3 {
        let k2 = self.k2[i];
        if k2 == 0.0 {
            return v;
        }
        let k = &self.k[i];
        let s = dot(&v, k) / k2;
        [v[0] - s * k[0], v[1] - s * k[1], v[2] - s * k[2]]
    }

    /// `Σ_{a+b=m} f(a, b)` for every `m` in the cube.
    fn convolve(&self, mut f: impl FnMut(usize, usize) -> V3) -> Vec<V3> {
        let n = self.cube.len();
        let mut out = vec![ZERO; n];
        for a in 0..n {
            for b in 0..n {
                let ma = self.cube.modes[a];
                let mb = self.cube.modes[b];
                let m = [ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2]];
                if let Some(t) = self.cube.index(m) {
                    let v = f(a, b);
                    for j in 0..3 {
                        out[t][j] += v[j];
                    }
                }
            }
        }
        out
    }

    /// `(a·∇)b` by direct convolution.
    fn advect(&self, a: &[V3], b: &[V3]) -> Vec<V3> {
        self.convolve(|i, j| {
            let s = dot(&a[i], &self.k[j]) * I;
            b[j].map(|x| x * s)
        })
    }

    /// `|p|²p`: first `|p|²` on the doubled cube, then its product with `p`.
    fn cubic(&self, p: &[V3]) -> Vec<V3> {
        let n = self.cube.len();
        let mut q = vec![Complex64::default(); self.wide.len()];
        for a in 0..n {
            for b in 0..n {
                let ma = self.cube.modes[a];
                let mb = self.cube.modes[b];
                let m = [ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2]];
                let t = self.wide.index(m).expect("sum of cube modes lies in the doubled cube");
                q[t] += cdot(&p[a], &p[b]);
            }
        }
        let mut out = vec![ZERO; n];
        for (t, slot) in out.iter_mut().enumerate() {
            let m = self.cube.modes[t];
            for b in 0..n {
                let mb = self.cube.modes[b];
                let ma = [m[0] - mb[0], m[1] - mb[1], m[2] - mb[2]];
                let qa = q[self.wide.index(ma).expect("difference of cube modes lies in the doubled cube")];
                for j in 0..3 {
                    slot[j] += qa * p[b][j];
                }
            }
        }
        out
    }

    fn velocity(&self, p: &[V3], pp: &[V3]) -> Vec<V3> {
        let pr = self.params;
        (0..self.cube.len())
            .map(|i| {
                let k2 = self.k2[i];
                if k2 == 0.0 {
                    return ZERO;
                }
                let s = -(pr.mu1 * k2 + pr.gamma1);
                let f = self.project(i, pp[i]);
                [0, 1, 2].map(|j| p[i][j] * s - f[j] * (pr.lambda1 / k2))
            })
            .collect()
    }

    fn tendency(&self, p: &[V3]) -> Vec<V3> {
        let pr = self.params;
        let pp = self.advect(p, p);
        let u = self.velocity(p, &pp);
        let cub = self.cubic(p);
        let up = self.advect(&u, p);
        let pu = self.advect(p, &u);
        // ((∇p)ᵀu)_i = Σ_j u_j ∂_i p_j
        let gpu = self.convolve(|a, b| {
            let s = cdot(&p[a], &u[b]) * I;
            self.k[a].map(|x| s * x)
        });
        (0..self.cube.len())
            .map(|i| {
                let k2 = self.k2[i];
                let lin = pr.mu2() * k2 * k2 + pr.gamma2() * k2 + pr.beta();
                let b = [0, 1, 2].map(|j| {
                    lin * p[i][j]
                        + pr.lambda2() * pp[i][j]
                        + pr.alpha() * cub[i][j]
                        + up[i][j]
                        - 0.5 * pu[i][j]
                        - 0.5 * gpu[i][j]
                });
                self.project(i, b).map(|x| -x)
            })
            .collect()
    }

    fn gather(&self, p: &SpectralVectorField) -> Vec<V3> {
        self.cube.modes.iter().map(|&m| p.mode(m)).collect()
    }

    fn scatter(&self, coeffs: &[V3]) -> SpectralVectorField {
        let mut out = SpectralVectorField::zeros(self.grid);
        for (i, &m) in self.cube.modes.iter().enumerate() {
            let (_, conj) = self.grid.locate(m);
            if !conj {
                out.set_mode(m, coeffs[i]);
            }
        }
        out
    }
}

fn axpy(x: &[V3], a: f64, y: &[V3]) -> Vec<V3> {
    x.iter().zip(y).map(|(x, y)| [0, 1, 2].map(|j| x[j] + y[j] * a)).collect()
}

/// Largest cutoff the grid can hold: the active band `N/2 - 1`.
pub fn max_cutoff(grid: &Grid) -> usize {
    grid.modes().iter().map(|n| n / 2 - 1).min().unwrap_or(0)
}

/// One explicit RK4 step of the Galerkin system on modes `|m_j| ≤ cutoff`.
/// Coefficients outside that cube are dropped.
pub fn galerkin_reference_step(state: &State, dt: f64, params: &ModelParams, cutoff: usize) -> Result<State> {
    let grid = *state.p.grid();
    let limit = max_cutoff(&grid);
    if cutoff > limit {
        return Err(Error::CutoffTooLarge { cutoff, limit });
    }
    if params.kappa() != 0.0 {
        return Err(Error::InvalidParameter("the Galerkin reference covers kappa = 0 only".into()));
    }
    let sys = System::new(&grid, cutoff, params);
    let p = sys.gather(&state.p);
    let k1 = sys.tendency(&p);
    let k2 = sys.tendency(&axpy(&p, 0.5 * dt, &k1));
    let k3 = sys.tendency(&axpy(&p, 0.5 * dt, &k2));
    let k4 = sys.tendency(&axpy(&p, dt, &k3));
    let next: Vec<V3> = (0..p.len())
        .map(|i| [0, 1, 2].map(|j| p[i][j] + (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]) * (dt / 6.0)))
        .collect();
    let mut out = sys.scatter(&next);
    if !out.is_finite() {
        return Err(Error::NonFinite { step: 1, time: state.t + dt });
    }
    crate::spectral::ops::leray_project_in_place(&mut out);
    Ok(State { t: state.t + dt, p: out })
}

/// Tendency of the Galerkin system, for checking the pseudospectral one.
pub fn galerkin_tendency(p: &SpectralVectorField, params: &ModelParams, cutoff: usize) -> Result<SpectralVectorField> {
    let grid = *p.grid();
    let limit = max_cutoff(&grid);
    if cutoff > limit {
        return Err(Error::CutoffTooLarge { cutoff, limit });
    }
    if params.kappa() != 0.0 {
        return Err(Error::InvalidParameter("the Galerkin reference covers kappa = 0 only".into()));
    }
    let sys = System::new(&grid, cutoff, params);
    Ok(sys.scatter(&sys.tendency(&sys.gather(p))))
}
