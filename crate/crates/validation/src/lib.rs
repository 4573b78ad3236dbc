//! Reference figures of merit and the tolerance rules used to compare a
//! [`MeritReport`] against them.

use protodesign::MeritReport;

/// Expected merit figures of one K=4, M=32 filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub label: &'static str,
    pub sir_db: f64,
    pub msl_db: f64,
    pub d_k: f64,
    pub d_nu: f64,
    pub xi: f64,
    pub oob_2pi_m_db: f64,
    pub oob_4pi_m_db: f64,
}

const fn row(label: &'static str, v: [f64; 7]) -> ReferenceRow {
    ReferenceRow {
        label,
        sir_db: v[0],
        msl_db: v[1],
        d_k: v[2],
        d_nu: v[3],
        xi: v[4],
        oob_2pi_m_db: v[5],
        oob_4pi_m_db: v[6],
    }
}

pub const EGF_HALF: ReferenceRow = row("egf:0.5", [33.73, -58.21, 8.964, 0.0101, 0.878, -33.95, -48.81]);
pub const EGF_TWO: ReferenceRow = row("egf:2", [114.48, -21.38, 5.163, 0.0176, 0.874, -12.46, -20.67]);
pub const EGF_ONE: ReferenceRow = row("egf:1", [60.49, -33.80, 6.457, 0.0126, 0.976, -19.69, -33.50]);
pub const MARTIN: ReferenceRow = row("martin", [65.23, -39.86, 8.784, 0.0102, 0.884, -45.61, -70.60]);
pub const OFDP: ReferenceRow = row("ofdp", [59.86, -38.33, 7.842, 0.0109, 0.933, -35.45, -62.29]);
pub const TYPE_I: ReferenceRow = row("type1", [52.74, -43.63, 8.230, 0.0106, 0.915, -42.30, -82.96]);
pub const TYPE_II: ReferenceRow = row("type2", [68.09, -47.68, 8.568, 0.0103, 0.897, -50.09, -72.93]);
pub const TYPE_III: ReferenceRow = row("type3", [51.25, -58.73, 7.877, 0.0108, 0.935, -35.20, -100.57]);

/// Allowed deviations. `None` skips the field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub db: f64,
    pub d_k_rel: Option<f64>,
    pub d_nu_rel: Option<f64>,
    pub xi: Option<XiRule>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiRule {
    Abs(f64),
    Rel(f64),
}

/// Tight reproduction: 0.15 dB, 0.5% on D_k, 1% on D_ν, 0.01 on ξ.
pub const STRICT: Tolerance =
    Tolerance { db: 0.15, d_k_rel: Some(0.005), d_nu_rel: Some(0.01), xi: Some(XiRule::Abs(0.01)) };

/// The numerical-IOTA pulses: 1 dB and 2% on every dispersion figure.
pub const EGF: Tolerance =
    Tolerance { db: 1.0, d_k_rel: Some(0.02), d_nu_rel: Some(0.02), xi: Some(XiRule::Rel(0.02)) };

/// End-to-end designs: 0.5 dB on the dB-valued figures only.
pub const DESIGN: Tolerance = Tolerance { db: 0.5, d_k_rel: None, d_nu_rel: None, xi: None };

/// One compared field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldCheck {
    pub field: &'static str,
    pub got: Option<f64>,
    pub want: f64,
    /// Printed allowance, e.g. "±0.15 dB".
    pub allowance: String,
    pub ok: bool,
}

fn abs_check(field: &'static str, got: Option<f64>, want: f64, tol: f64, unit: &str) -> FieldCheck {
    let ok = got.is_some_and(|g| (g - want).abs() <= tol);
    FieldCheck { field, got, want, allowance: format!("±{tol}{unit}"), ok }
}

fn rel_check(field: &'static str, got: f64, want: f64, tol: f64) -> FieldCheck {
    let ok = (got - want).abs() <= tol * want.abs();
    FieldCheck { field, got: Some(got), want, allowance: format!("±{}%", tol * 100.0), ok }
}

/// Compares every field covered by `tol`.
pub fn compare(r: &MeritReport, want: &ReferenceRow, tol: &Tolerance) -> Vec<FieldCheck> {
    let mut out = vec![
        abs_check("sir_db", Some(r.sir_db), want.sir_db, tol.db, " dB"),
        abs_check("msl_db", r.msl_db, want.msl_db, tol.db, " dB"),
        abs_check("oob_2piM_db", Some(r.oob_2pi_m_db), want.oob_2pi_m_db, tol.db, " dB"),
        abs_check("oob_4piM_db", Some(r.oob_4pi_m_db), want.oob_4pi_m_db, tol.db, " dB"),
    ];
    if let Some(t) = tol.d_k_rel {
        out.push(rel_check("d_k", r.d_k, want.d_k, t));
    }
    if let Some(t) = tol.d_nu_rel {
        out.push(rel_check("d_nu", r.d_nu, want.d_nu, t));
    }
    match tol.xi {
        Some(XiRule::Abs(t)) => out.push(abs_check("xi", r.xi, want.xi, t, "")),
        Some(XiRule::Rel(t)) => out.push(match r.xi {
            Some(xi) => rel_check("xi", xi, want.xi, t),
            None => {
                FieldCheck { field: "xi", got: None, want: want.xi, allowance: format!("±{}%", t * 100.0), ok: false }
            }
        }),
        None => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report_from(row: &ReferenceRow) -> MeritReport {
        MeritReport {
            sir_db: row.sir_db,
            msl_db: Some(row.msl_db),
            max_sidelobe_db: Some(row.msl_db),
            d_k: row.d_k,
            d_nu: row.d_nu,
            xi: Some(row.xi),
            xi_clipped: false,
            oob_2pi_m_db: row.oob_2pi_m_db,
            oob_4pi_m_db: row.oob_4pi_m_db,
        }
    }

    #[test]
    fn exact_rows_pass_every_rule() {
        for rule in [STRICT, EGF, DESIGN] {
            assert!(compare(&report_from(&TYPE_II), &TYPE_II, &rule).iter().all(|c| c.ok));
        }
        assert_eq!(compare(&report_from(&MARTIN), &MARTIN, &STRICT).len(), 7);
        assert_eq!(compare(&report_from(&EGF_ONE), &EGF_ONE, &EGF).len(), 7);
        assert_eq!(compare(&report_from(&EGF_ONE), &EGF_ONE, &DESIGN).len(), 4);
    }

    #[test]
    fn deviations_are_caught() {
        let mut r = report_from(&TYPE_II);
        r.sir_db += 0.2;
        r.d_nu *= 1.011;
        let bad: Vec<_> = compare(&r, &TYPE_II, &STRICT).into_iter().filter(|c| !c.ok).map(|c| c.field).collect();
        assert_eq!(bad, ["sir_db", "d_nu"]);
        r.msl_db = None;
        assert!(!compare(&r, &TYPE_II, &DESIGN)[1].ok);
    }

    #[test]
    fn orderings_hold_in_the_reference() {
        const { assert!(EGF_TWO.sir_db > EGF_ONE.sir_db && EGF_ONE.sir_db > EGF_HALF.sir_db) };
        let order = [TYPE_III, TYPE_I, TYPE_II, MARTIN, OFDP, EGF_ONE];
        assert!(order.windows(2).all(|w| w[0].oob_4pi_m_db < w[1].oob_4pi_m_db));
    }
}
