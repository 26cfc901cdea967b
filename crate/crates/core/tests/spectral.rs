mod common;

use common::*;
use num_complex::Complex64;
use swimflow::spectral::ops::pairwise_sum;
use swimflow::spectral::{
    apply_laplacian, dealiased_product, inner, norm_grad, norm_l2, norm_l4, norm_laplacian, rng::complex_gaussian,
};
use swimflow::{forward, inverse, leray_project, random_solenoidal_field, Error, Grid, RealVectorField, SpectralVectorField};

fn random_real(grid: &Grid, seed: u64) -> RealVectorField {
    let n = grid.real_len() * grid.dim();
    let vals = (0..n as u64)
        .map(|c| (swimflow::spectral::rng::counter_u64(seed, c) >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        .collect();
    RealVectorField::from_values(*grid, vals).unwrap()
}

/// Copies the active modes of `f` onto a finer grid with the same box.
fn refine(f: &SpectralVectorField, n: usize) -> SpectralVectorField {
    let g = f.grid();
    let fine = Grid::new(g.dim(), &vec![n; g.dim()], g.lengths()).unwrap();
    let mut out = SpectralVectorField::zeros(fine);
    for (m, v) in modes(f) {
        out.set_mode(m, v);
    }
    out
}

fn quadrature(f: &RealVectorField, power: i32) -> f64 {
    let g = f.grid();
    let d = g.dim();
    let pts: Vec<f64> = (0..g.real_len())
        .map(|i| {
            let s: f64 = (0..d).map(|j| f.component(j)[i].powi(2)).sum();
            s.powi(power / 2)
        })
        .collect();
    pairwise_sum(&pts) * g.cell_volume()
}

#[test]
fn forward_examples() {
    let g = Grid::cubic(3, 8, 3.0).unwrap();
    assert_eq!(forward(&RealVectorField::zeros(g)).max_abs(), 0.0);

    let two_pi = 2.0 * std::f64::consts::PI;
    let f = forward(&RealVectorField::from_fn(g, |x| [(two_pi * x[0] / 3.0).cos(), 0.0, 0.0]));
    for m in cube(3, 4) {
        let c = f.mode(m)[0];
        let expect = if m == [1, 0, 0] || m == [-1, 0, 0] { 0.5 } else { 0.0 };
        assert!((c - Complex64::new(expect, 0.0)).norm() < 1e-15, "{m:?}");
    }
}

#[test]
fn forward_matches_direct_transform() {
    for g in [Grid::periodic(3, 8).unwrap(), Grid::new(2, &[8, 6], &[1.0, 2.0]).unwrap()] {
        let f = random_real(&g, 3);
        let s = forward(&f);
        let r = g.modes().iter().map(|n| *n as i64 / 2).min().unwrap();
        for m in cube(g.dim(), r) {
            for j in 0..g.dim() {
                let direct = direct_dft(&g, f.component(j), m);
                assert!((s.mode(m)[j] - direct).norm() < 1e-13, "{m:?}");
            }
        }
        let back = inverse(&s).unwrap();
        let err = back.values().iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}

#[test]
fn inverse_examples() {
    let g = Grid::periodic(3, 8).unwrap();
    assert_eq!(inverse(&SpectralVectorField::zeros(g)).unwrap().max_abs(), 0.0);
    let mut f = SpectralVectorField::zeros(g);
    f.set_mode([0, 1, 0], [Complex64::new(0.5, 0.0), Complex64::default(), Complex64::default()]);
    let r = inverse(&f).unwrap();
    let expect = RealVectorField::from_fn(g, |x| [x[1].cos(), 0.0, 0.0]);
    let err = r.values().iter().zip(expect.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-14);
}

#[test]
fn inverse_rejects_non_hermitian_input() {
    let g = Grid::periodic(3, 8).unwrap();
    let mut f = SpectralVectorField::zeros(g);
    let (flat, _) = g.locate([1, 2, 0]);
    f.set(flat, [Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()]);
    assert!(matches!(inverse(&f), Err(Error::SymmetryViolation(_))));
    // a defect below the tolerance passes
    f.set_mode([1, 2, 0], [Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()]);
    f.set(flat, [Complex64::new(1.0 + 1e-12, 0.0), Complex64::default(), Complex64::default()]);
    assert!(inverse(&f).is_ok());
}

#[test]
fn leray_examples() {
    let g = Grid::periodic(3, 8).unwrap();
    let m = [1, -2, 3];
    let k = g.wavevector_of(m);
    let a = Complex64::new(0.4, -0.1);
    let mut par = SpectralVectorField::zeros(g);
    par.set_mode(m, k.map(|x| a * x));
    assert!(leray_project(&par).max_abs() < 1e-15);

    let mut orth = SpectralVectorField::zeros(g);
    let v = [a * 3.0, a * 3.0, a];
    orth.set_mode(m, v);
    let out = leray_project(&orth);
    assert!(out.sub(&orth).max_abs() < 1e-15);
    assert!(out.is_solenoidal());

    let mut mean = SpectralVectorField::zeros(g);
    mean.set_mode([0, 0, 0], [Complex64::new(1.0, 0.0); 3]);
    assert_eq!(leray_project(&mean).mode([0, 0, 0]), mean.mode([0, 0, 0]));
}

#[test]
fn leray_matches_explicit_projector() {
    let g = Grid::new(3, &[8, 8, 8], &[1.0, 2.0, 3.0]).unwrap();
    let f = band_limited(&g, 5, 3, false);
    let p = leray_project(&f);
    for (m, v) in modes(&f) {
        let k = g.wavevector_of(m);
        let k2: f64 = k.iter().map(|x| x * x).sum();
        let got = p.mode(m);
        for i in 0..3 {
            let mut e = v[i];
            if k2 > 0.0 {
                for j in 0..3 {
                    e -= v[j] * (k[i] * k[j] / k2);
                }
            }
            assert!((got[i] - e).norm() < 1e-14);
        }
    }
    assert!(leray_project(&p).sub(&p).max_abs() < 1e-14);
    let h = band_limited(&g, 6, 3, false);
    let lhs = inner(&p, &h);
    let rhs = inner(&f, &leray_project(&h));
    assert!((lhs - rhs).abs() < 1e-13 * lhs.abs().max(1.0));
}

#[test]
fn laplacian_examples() {
    let l = 3.0;
    let g = Grid::cubic(2, 8, l).unwrap();
    let mut f = SpectralVectorField::zeros(g);
    f.set_mode([1, 0, 0], [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.25), Complex64::default()]);
    let k2 = (2.0 * std::f64::consts::PI / l).powi(2);
    assert!(apply_laplacian(&f, 1).sub(&f.scaled(-k2)).max_abs() < 1e-14);
    assert!(apply_laplacian(&f, 2).sub(&f.scaled(k2 * k2)).max_abs() < 1e-13);
    let r = band_limited(&g, 7, 3, true);
    let twice = apply_laplacian(&apply_laplacian(&r, 1), 1);
    let once = apply_laplacian(&r, 2);
    assert!(twice.sub(&once).max_abs() < 1e-14 * once.max_abs());
}

#[test]
fn quadratic_product_matches_convolution() {
    let g = Grid::periodic(3, 8).unwrap();
    let a = band_limited(&g, 8, 3, false);
    let b = band_limited(&g, 9, 3, false);
    let got = dealiased_product(&g, &[a.component(0), b.component(1)]);
    let mut out = SpectralVectorField::zeros(g);
    out.component_mut(0).copy_from_slice(&got);
    let expect = convolve(&modes(&a), &modes(&b), 3, 3, |_, x, _, y| {
        [x[0] * y[1], Complex64::default(), Complex64::default()]
    });
    assert!(max_diff(&out, &expect) < 1e-12);

    // two single modes land on k ± k'
    let mut s = SpectralVectorField::zeros(g);
    s.set_mode([1, 0, 0], [Complex64::new(0.5, 0.0); 3]);
    let mut t = SpectralVectorField::zeros(g);
    t.set_mode([0, 2, 1], [Complex64::new(0.0, 0.5); 3]);
    let got = dealiased_product(&g, &[s.component(0), t.component(0)]);
    let mut out = SpectralVectorField::zeros(g);
    out.component_mut(0).copy_from_slice(&got);
    for m in cube(3, 3) {
        let c = out.mode(m)[0];
        let expect = match m {
            [1, 2, 1] | [-1, 2, 1] => Complex64::new(0.0, 0.25),
            [1, -2, -1] | [-1, -2, -1] => Complex64::new(0.0, -0.25),
            _ => Complex64::default(),
        };
        assert!((c - expect).norm() < 1e-15, "{m:?}");
    }
}

#[test]
fn cubic_product_matches_convolution() {
    let g = Grid::periodic(3, 8).unwrap();
    let a = band_limited(&g, 10, 2, false);
    let b = band_limited(&g, 11, 2, false);
    let c = band_limited(&g, 12, 2, false);
    let got = dealiased_product(&g, &[a.component(0), b.component(1), c.component(2)]);
    let mut out = SpectralVectorField::zeros(g);
    out.component_mut(0).copy_from_slice(&got);
    let ab = convolve(&modes(&a), &modes(&b), 4, 3, |_, x, _, y| {
        [x[0] * y[1], Complex64::default(), Complex64::default()]
    });
    let expect = convolve(&ab, &modes(&c), 3, 3, |_, x, _, y| {
        [x[0] * y[2], Complex64::default(), Complex64::default()]
    });
    assert!(max_diff(&out, &expect) < 1e-12);

    let zero = SpectralVectorField::zeros(g);
    let got = dealiased_product(&g, &[a.component(0), zero.component(0), c.component(1)]);
    assert!(got.iter().all(|z| z.norm() == 0.0));
}

#[test]
fn norm_examples() {
    let g = Grid::new(3, &[8, 8, 8], &[1.0, 2.0, 3.0]).unwrap();
    let v = g.volume();
    let mut c = SpectralVectorField::zeros(g);
    c.set_mode([0, 0, 0], [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(-2.0, 0.0)]);
    assert!((norm_l2(&c) - 3.0 * v.sqrt()).abs() < 1e-14);
    assert_eq!(norm_grad(&c), 0.0);
    assert_eq!(norm_laplacian(&c), 0.0);

    // a cos(k·x) in one component
    let a = 0.8;
    let m = [1, 1, -2];
    let mut s = SpectralVectorField::zeros(g);
    s.set_mode(m, [Complex64::default(), Complex64::new(a / 2.0, 0.0), Complex64::default()]);
    let k2: f64 = g.wavevector_of(m).iter().map(|x| x * x).sum();
    assert!((norm_l2(&s).powi(2) - a * a * v / 2.0).abs() < 1e-13);
    assert!((norm_grad(&s).powi(2) - k2 * a * a * v / 2.0).abs() < 1e-12);
    assert!((norm_laplacian(&s).powi(2) - k2 * k2 * a * a * v / 2.0).abs() < 1e-10);
}

#[test]
fn l4_matches_refined_quadrature() {
    for g in [Grid::periodic(3, 8).unwrap(), Grid::new(2, &[8, 8], &[2.0, 1.0]).unwrap()] {
        let f = band_limited(&g, 13, 3, true);
        let fine = inverse(&refine(&f, 16)).unwrap();
        let oracle = quadrature(&fine, 4).powf(0.25);
        let got = norm_l4(&f);
        assert!((got - oracle).abs() < 1e-12 * oracle, "{got} vs {oracle}");
    }
}

#[test]
fn parseval() {
    for g in [Grid::periodic(3, 8).unwrap(), Grid::new(2, &[8, 12], &[2.0, 1.0]).unwrap()] {
        let f = band_limited(&g, 14, 3, false);
        let spectral = norm_l2(&f).powi(2);
        let collocation = quadrature(&inverse(&f).unwrap(), 2);
        assert!((spectral - collocation).abs() < 1e-12 * spectral);
    }
}

#[test]
fn interpolation_inequality_for_generated_fields() {
    for (d, n) in [(2, 16), (3, 8)] {
        let g = Grid::periodic(d, n).unwrap();
        for seed in 0..10 {
            let p = random_solenoidal_field(&g, seed, |k| (-k * k / 4.0).exp());
            let g2 = norm_grad(&p).powi(2);
            assert!(g2 <= norm_l2(&p) * norm_laplacian(&p) * (1.0 + 1e-14));
        }
    }
}

#[test]
fn random_fields_are_deterministic_and_solenoidal() {
    let g = Grid::periodic(3, 8).unwrap();
    let env = |k: f64| 1.0 / (1.0 + k * k).powi(3);
    let a = random_solenoidal_field(&g, 42, env);
    let b = random_solenoidal_field(&g, 42, env);
    assert_eq!(a.coeffs(), b.coeffs());
    assert_ne!(a.coeffs(), random_solenoidal_field(&g, 43, env).coeffs());
    assert!(a.is_solenoidal() && a.divergence_defect() < 1e-12);
    assert!(a.hermitian_defect() < 1e-15);
    assert!(a.mode([0, 0, 0]).iter().all(|c| c.norm() == 0.0));
    assert!(inverse(&a).is_ok());
}

#[test]
fn random_field_variance_matches_envelope() {
    let amp = 1.5;
    for d in [2, 3] {
        let g = Grid::periodic(d, 4).unwrap();
        let m = [1, -1, if d == 3 { 1 } else { 0 }];
        let draws = 10_000;
        let mut acc = 0.0;
        for seed in 0..draws {
            let p = random_solenoidal_field(&g, seed, |_| amp);
            acc += p.mode(m).iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        let var = acc / draws as f64;
        assert!((var / (amp * amp) - 1.0).abs() < 0.05, "d={d}: {var}");
    }
}

#[test]
fn gaussian_draws_have_unit_second_moment() {
    let n = 100_000u64;
    let (mut s, mut m) = (0.0, Complex64::default());
    for c in 0..n {
        let z = complex_gaussian(99, 2 * c);
        s += z.norm_sqr();
        m += z;
    }
    assert!((s / n as f64 - 1.0).abs() < 0.02);
    assert!((m / n as f64).norm() < 0.02);
}
