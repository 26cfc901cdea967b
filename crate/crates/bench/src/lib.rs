//! Shared inputs for the benchmarks.

use swimflow::{apply_coupling, random_solenoidal_field, BaseCoefficients, Grid, ModelParams, SpectralVectorField};

/// A smooth random field on an `n`-per-axis periodic grid together with
/// moderately coupled model parameters.
pub fn fixture(dim: usize, n: usize) -> (Grid, SpectralVectorField, ModelParams) {
    let grid = Grid::periodic(dim, n).expect("benchmark grid");
    let p = random_solenoidal_field(&grid, 7, |k| (-(k * k) / 9.0).exp());
    let params = apply_coupling(BaseCoefficients::default(), 0.1).expect("benchmark parameters");
    (grid, p, params)
}
