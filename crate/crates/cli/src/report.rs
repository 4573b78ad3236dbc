//! CSV emission. Numbers use six significant digits, '.' decimals and '\n'
//! line endings; missing values are empty fields.

use std::fs;
use std::path::Path;

use anyhow::Context;
use protodesign::transmux::BerPoint;
use protodesign::MeritReport;

use crate::failure::{CliResult, Failure};

/// printf-style "%.6g".
pub fn g6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(g6).unwrap_or_default()
}

/// Column order of the comparison table.
pub const MERIT_HEADER: [&str; 8] = ["label", "sir_db", "msl_db", "d_k", "d_nu", "xi", "oob_2piM_db", "oob_4piM_db"];

pub fn merit_row(label: &str, r: &MeritReport) -> Vec<String> {
    vec![
        label.to_string(),
        g6(r.sir_db),
        opt(r.msl_db),
        g6(r.d_k),
        g6(r.d_nu),
        opt(r.xi),
        g6(r.oob_2pi_m_db),
        g6(r.oob_4pi_m_db),
    ]
}

pub const SIR_HEADER: [&str; 5] = ["filter_label", "scenario", "sir_db", "n_symbols", "seed"];
pub const BER_HEADER: [&str; 7] = ["filter_label", "scenario", "ebn0_db", "ber", "n_symbols", "n_errors", "seed"];

pub fn ber_row(label: &str, scenario: &str, p: &BerPoint, seed: u64) -> Vec<String> {
    vec![
        label.to_string(),
        scenario.to_string(),
        g6(p.ebn0_db),
        g6(p.ber),
        p.n_symbols.to_string(),
        p.n_errors.to_string(),
        seed.to_string(),
    ]
}

/// Renders a header and rows as CSV text.
pub fn render<H: AsRef<str>>(header: &[H], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header.iter().map(|h| h.as_ref())).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Writes to `path`, or to standard output when the path is "-".
pub fn write_output(path: &Path, text: &str) -> CliResult<()> {
    if path.as_os_str() == "-" {
        print!("{text}");
        return Ok(());
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).map_err(Failure::input)
}
