//! CSV tables with one row per sample.
//!
//! Numbers are written with 17 significant digits in scientific notation so
//! that every value reads back exactly. Missing values are empty cells.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use swimflow::{EnergyLedger, GronwallReport};

use crate::error::{CliError, CliResult};

pub const ENERGY_COLUMNS: [&str; 12] = [
    "t", "E", "d_visc", "d_grad", "d_quart", "d_lin", "u_sq", "cum_visc", "cum_grad", "cum_quart", "cum_lin",
    "balance_defect",
];

pub const RELATIVE_COLUMNS: [&str; 10] =
    ["t", "E_rel", "W_rel", "K_val", "r1_norm", "r2_norm", "pairing1", "pairing2", "lhs", "rhs"];

pub fn format_value(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn format_row(row: &[Option<f64>]) -> String {
    row.iter().map(|v| format_value(*v)).collect::<Vec<_>>().join(",")
}

pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<Option<f64>>]) -> CliResult<()> {
    let err = |e| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(err)?);
    writeln!(w, "{}", header.join(",")).map_err(err)?;
    for r in rows {
        debug_assert_eq!(r.len(), header.len());
        writeln!(w, "{}", format_row(r)).map_err(err)?;
    }
    w.flush().map_err(err)
}

/// One row per ledger sample, in `ENERGY_COLUMNS` order.
pub fn energy_rows(ledger: &EnergyLedger) -> Vec<Vec<Option<f64>>> {
    ledger
        .rows
        .iter()
        .map(|r| {
            [
                r.t, r.e, r.d_visc, r.d_grad, r.d_quart, r.d_lin, r.u_sq, r.cum_visc, r.cum_grad, r.cum_quart, r.cum_lin,
                r.balance_defect,
            ]
            .map(Some)
            .to_vec()
        })
        .collect()
}

pub fn write_timeseries(ledger: &EnergyLedger, path: &Path) -> CliResult<()> {
    write_table(path, &ENERGY_COLUMNS, &energy_rows(ledger))
}

pub fn relative_rows(report: &GronwallReport) -> Vec<Vec<Option<f64>>> {
    report
        .rows
        .iter()
        .map(|r| {
            [r.t, r.e_rel, r.w_rel, r.k_val, r.r1_norm, r.r2_norm, r.pairing1, r.pairing2, r.lhs, r.rhs]
                .map(Some)
                .to_vec()
        })
        .collect()
}

pub fn write_relative(report: &GronwallReport, path: &Path) -> CliResult<()> {
    write_table(path, &RELATIVE_COLUMNS, &relative_rows(report))
}

/// Reads a table written by [`write_table`].
pub fn read_table(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<Option<f64>>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().split(',').map(String::from).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse().map(Some).map_err(|_| CliError::Config(format!("line {}: bad number `{c}`", i + 2)))
                }
            })
            .collect::<CliResult<_>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
