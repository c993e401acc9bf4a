//! CSV and JSON emission. All floating-point values are written in
//! scientific notation with 9 significant digits.

use std::io::Write;

use readout_core::touchstone::TwoPortTable;
use readout_core::{IQEnsemble, QubitState, SweepRow};

use crate::error::{CliError, CliResult};

pub const SWEEP_HEADER: [&str; 6] = ["parameter", "d_volts", "sigma_volts", "snr", "analytic_error", "empirical_error"];
pub const IQ_HEADER: [&str; 4] = ["state", "trial", "i_volts", "q_volts"];
pub const S2P_HEADER: [&str; 9] =
    ["freq_hz", "s11_re", "s11_im", "s21_re", "s21_im", "s12_re", "s12_im", "s22_re", "s22_im"];

pub fn fmt_num(x: f64) -> String {
    format!("{x:.8e}")
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(format!("writing CSV: {e}"))
}

fn write_table<W: Write, const N: usize>(
    out: W,
    header: [&str; N],
    rows: impl Iterator<Item = [String; N]>,
) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> CliResult<()> {
    write_table(
        out,
        SWEEP_HEADER,
        rows.iter().map(|r| [r.parameter, r.d, r.sigma, r.snr, r.analytic_error, r.empirical_error].map(fmt_num)),
    )
}

pub fn write_iq_csv<W: Write>(out: W, ensemble: &IQEnsemble) -> CliResult<()> {
    let rows = QubitState::BOTH.into_iter().flat_map(|state| {
        ensemble
            .samples(state)
            .iter()
            .enumerate()
            .map(move |(trial, z)| [state.index().to_string(), trial.to_string(), fmt_num(z.re), fmt_num(z.im)])
    });
    write_table(out, IQ_HEADER, rows)
}

pub fn write_s2p_csv<W: Write>(out: W, table: &TwoPortTable<f64>) -> CliResult<()> {
    write_table(
        out,
        S2P_HEADER,
        table.points().iter().map(|p| {
            [p.freq, p.s11.re, p.s11.im, p.s21.re, p.s21.im, p.s12.re, p.s12.im, p.s22.re, p.s22.im].map(fmt_num)
        }),
    )
}

/// Reads back a sweep CSV written by [`write_sweep_csv`].
pub fn read_sweep_csv<R: std::io::Read>(input: R) -> CliResult<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(CliError::Runtime(format!("unexpected sweep header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let v = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| CliError::Runtime(format!("{s:?}: {e}"))))
                .collect::<CliResult<Vec<_>>>()?;
            Ok(SweepRow {
                parameter: v[0],
                d: v[1],
                sigma: v[2],
                snr: v[3],
                analytic_error: v[4],
                empirical_error: v[5],
            })
        })
        .collect()
}

pub fn write_json<W: Write>(mut out: W, value: &serde_json::Value) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}
