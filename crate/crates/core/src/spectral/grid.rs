use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use crate::error::{Error, Result};

/// Per-entry data of the half-spectrum storage of one grid.
#[derive(Debug)]
pub(crate) struct ModeTable {
    pub k: Vec<[f64; 3]>,
    pub k2: Vec<f64>,
    pub active: Vec<bool>,
    pub weight: Vec<f64>,
}

type GridKey = (usize, [usize; 3], [u64; 3]);

thread_local! {
    static TABLES: RefCell<HashMap<GridKey, Rc<ModeTable>>> = RefCell::new(HashMap::new());
}

/// Uniform periodic grid on a `dim`-dimensional torus.
///
/// Storage is always three-dimensional: a two-dimensional grid is laid out
/// with a leading axis of length one, so physical axis `j` lives on storage
/// axis `3 - dim + j`. The last storage axis is the one halved by the
/// real-to-complex transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: [usize; 3],
    lengths: [f64; 3],
}

impl Grid {
    pub fn new(dim: usize, n: &[usize], lengths: &[f64]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidParameter(format!("dim must be 2 or 3, got {dim}")));
        }
        if n.len() != dim || lengths.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "expected {dim} mode counts and box lengths, got {} and {}",
                n.len(),
                lengths.len()
            )));
        }
        let mut nn = [1usize; 3];
        let mut ll = [1.0f64; 3];
        for j in 0..dim {
            if n[j] < 4 || n[j] % 2 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "mode count on axis {j} must be even and >= 4, got {}",
                    n[j]
                )));
            }
            if !(lengths[j] > 0.0) || !lengths[j].is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "box length on axis {j} must be positive, got {}",
                    lengths[j]
                )));
            }
            nn[j] = n[j];
            ll[j] = lengths[j];
        }
        Ok(Self { dim, n: nn, lengths: ll })
    }

    /// Cubic grid with `n` modes and box length `length` on every axis.
    pub fn cubic(dim: usize, n: usize, length: f64) -> Result<Self> {
        Self::new(dim, &vec![n; dim], &vec![length; dim])
    }

    /// The `2π`-periodic box.
    pub fn periodic(dim: usize, n: usize) -> Result<Self> {
        Self::cubic(dim, n, 2.0 * PI)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[usize] {
        &self.n[..self.dim]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dim]
    }

    pub fn volume(&self) -> f64 {
        self.lengths().iter().product()
    }

    pub fn num_points(&self) -> usize {
        self.modes().iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.num_points() as f64
    }

    /// Same box, mode counts scaled by `num / den` (used for padded grids).
    pub fn rescaled(&self, num: usize, den: usize) -> Self {
        let mut g = *self;
        for j in 0..self.dim {
            debug_assert!(self.n[j] * num % den == 0);
            g.n[j] = self.n[j] * num / den;
        }
        g
    }

    /// Storage shape of real-space arrays.
    pub fn real_shape(&self) -> [usize; 3] {
        match self.dim {
            2 => [1, self.n[0], self.n[1]],
            _ => self.n,
        }
    }

    /// Storage shape of half-spectrum arrays.
    pub fn spec_shape(&self) -> [usize; 3] {
        let [a, b, c] = self.real_shape();
        [a, b, c / 2 + 1]
    }

    pub fn real_len(&self) -> usize {
        self.real_shape().iter().product()
    }

    pub fn spec_len(&self) -> usize {
        self.spec_shape().iter().product()
    }

    /// Physical axis living on storage axis `s`, if any.
    fn physical_axis(&self, s: usize) -> Option<usize> {
        (s + self.dim).checked_sub(3)
    }

    /// Signed mode number of storage index `i` on storage axis `s`.
    pub fn mode_number(&self, s: usize, i: usize) -> i64 {
        let len = self.real_shape()[s] as i64;
        let i = i as i64;
        if s == 2 {
            i
        } else if i < (len + 1) / 2 || len == 1 {
            i
        } else {
            i - len
        }
    }

    /// Storage index of mode number `m` on storage axis `s` (full axes only wrap).
    pub fn storage_index(&self, s: usize, m: i64) -> usize {
        let len = self.real_shape()[s] as i64;
        m.rem_euclid(len) as usize
    }

    /// Integer mode vector (physical ordering) at spectral storage index.
    pub fn mode_vector(&self, idx: [usize; 3]) -> [i64; 3] {
        let mut m = [0i64; 3];
        for s in 0..3 {
            if let Some(j) = self.physical_axis(s) {
                m[j] = self.mode_number(s, idx[s]);
            }
        }
        m
    }

    /// Physical wavevector at spectral storage index; unused components are 0.
    pub fn wavevector(&self, idx: [usize; 3]) -> [f64; 3] {
        let m = self.mode_vector(idx);
        let mut k = [0.0; 3];
        for j in 0..self.dim {
            k[j] = 2.0 * PI * m[j] as f64 / self.lengths[j];
        }
        k
    }

    /// Wavevector for an integer mode vector.
    pub fn wavevector_of(&self, m: [i64; 3]) -> [f64; 3] {
        let mut k = [0.0; 3];
        for j in 0..self.dim {
            k[j] = 2.0 * PI * m[j] as f64 / self.lengths[j];
        }
        k
    }

    /// True when every component of `m` lies strictly inside the Nyquist band.
    pub fn is_active(&self, m: [i64; 3]) -> bool {
        (0..self.dim).all(|j| m[j].unsigned_abs() < (self.n[j] / 2) as u64)
    }

    /// Largest representable wavenumber, `π N / L` maximised over axes.
    pub fn k_nyquist(&self) -> f64 {
        (0..self.dim)
            .map(|j| PI * self.n[j] as f64 / self.lengths[j])
            .fold(0.0, f64::max)
    }

    /// Spectral storage index from flat offset.
    pub fn spec_index(&self, flat: usize) -> [usize; 3] {
        let [_, b, c] = self.spec_shape();
        [flat / (b * c), (flat / c) % b, flat % c]
    }

    pub fn spec_flat(&self, idx: [usize; 3]) -> usize {
        let [_, b, c] = self.spec_shape();
        (idx[0] * b + idx[1]) * c + idx[2]
    }

    /// Flat spectral offset of an integer mode vector, with the conjugation
    /// flag set when the mode lives in the omitted half and must be read as
    /// the conjugate of its partner.
    pub fn locate(&self, m: [i64; 3]) -> (usize, bool) {
        let mut ms = [0i64; 3];
        for s in 0..3 {
            if let Some(j) = self.physical_axis(s) {
                ms[s] = m[j];
            }
        }
        let conj = ms[2] < 0;
        if conj {
            for v in &mut ms {
                *v = -*v;
            }
        }
        let idx = [
            self.storage_index(0, ms[0]),
            self.storage_index(1, ms[1]),
            ms[2] as usize,
        ];
        (self.spec_flat(idx), conj)
    }

    /// Parseval weight of a half-spectrum entry: interior columns of the
    /// halved axis stand for themselves and their conjugate partner.
    pub fn spectral_weight(&self, idx: [usize; 3]) -> f64 {
        let c = self.real_shape()[2];
        if idx[2] == 0 || idx[2] == c / 2 {
            1.0
        } else {
            2.0
        }
    }

    pub(crate) fn key(&self) -> GridKey {
        (self.dim, self.n, self.lengths.map(f64::to_bits))
    }

    /// Wavevectors, activity flags and Parseval weights of every spectral
    /// entry, computed once per grid and thread.
    pub(crate) fn table(&self) -> Rc<ModeTable> {
        TABLES.with(|t| {
            t.borrow_mut()
                .entry(self.key())
                .or_insert_with(|| {
                    let n = self.spec_len();
                    let mut table = ModeTable {
                        k: Vec::with_capacity(n),
                        k2: Vec::with_capacity(n),
                        active: Vec::with_capacity(n),
                        weight: Vec::with_capacity(n),
                    };
                    for flat in 0..n {
                        let idx = self.spec_index(flat);
                        let k = self.wavevector(idx);
                        table.k.push(k);
                        table.k2.push(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
                        table.active.push(self.is_active(self.mode_vector(idx)));
                        table.weight.push(self.spectral_weight(idx));
                    }
                    Rc::new(table)
                })
                .clone()
        })
    }

    pub(crate) fn same_as(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.modes(), other.modes())))
        }
    }
}
