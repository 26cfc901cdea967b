//! Energy balance, a priori bounds and relative-energy functionals.

mod energy;
mod relative;

pub use energy::{
    apriori_bound_check, apriori_rhs, cumulative_integral, energy_ledger, velocity_bound_check, AprioriCheck, EnergyLedger, EnergyRow,
};
pub use relative::{
    gronwall_check, k_functional, k_series, relative_dissipation, relative_energy, sample_derivative,
    weak_strong_report, GronwallReport, RelEnergyRow, WeakStrongReport,
};
