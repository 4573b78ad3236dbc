//! Figures of merit for a single prototype filter.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::{self, Execution};
use crate::filter::PrototypeFilter;
use crate::interference::analytic_sir;
use crate::spectral::{dispersion, oob_energy_db, sidelobes, DEFAULT_GRID};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeritReport {
    pub sir_db: f64,
    /// Level of the first sidelobe after the main lobe, relative to DC.
    pub msl_db: Option<f64>,
    /// Largest sidelobe anywhere in (0, π].
    pub max_sidelobe_db: Option<f64>,
    pub d_k: f64,
    pub d_nu: f64,
    pub xi: Option<f64>,
    pub xi_clipped: bool,
    #[serde(rename = "oob_2piM_db")]
    pub oob_2pi_m_db: f64,
    #[serde(rename = "oob_4piM_db")]
    pub oob_4pi_m_db: f64,
}

pub fn analyze(filter: &PrototypeFilter) -> Result<MeritReport> {
    analyze_with_grid(filter, DEFAULT_GRID)
}

pub fn analyze_with_grid(filter: &PrototypeFilter, grid_points: usize) -> Result<MeritReport> {
    let p = filter.samples();
    let big_m = filter.m() as f64;
    let lobes = sidelobes(p, grid_points)?;
    let disp = dispersion(p);
    let energy = filter.energy();
    let rel = |e: f64| e - 10.0 * energy.log10();
    Ok(MeritReport {
        sir_db: analytic_sir(p, filter.m()),
        msl_db: lobes.map(|s| s.first_db),
        max_sidelobe_db: lobes.map(|s| s.max_db),
        d_k: disp.d_k,
        d_nu: disp.d_nu,
        xi: disp.xi,
        xi_clipped: disp.xi_clipped,
        oob_2pi_m_db: rel(oob_energy_db(p, 2.0 * PI / big_m)),
        oob_4pi_m_db: rel(oob_energy_db(p, 4.0 * PI / big_m)),
    })
}

/// Analyzes several filters, results in input order.
pub fn analyze_batch(filters: &[PrototypeFilter], exec: Execution) -> Vec<Result<MeritReport>> {
    exec::map_slice(exec, filters, analyze)
}
