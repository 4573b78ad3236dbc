//! The four subcommands.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use log::{info, warn};
use protodesign::designer::{design, DesignConfig, Preset};
use protodesign::merit::analyze_with_grid;
use protodesign::spectral::{dtft_power, oob_sweep, to_db, DEFAULT_GRID};
use protodesign::transmux::{ber_sim, empirical_sir, ChannelConfig, ChannelModel, TransmuxConfig, DEFAULT_SYMBOL_CAP};
use protodesign::PrototypeFilter;
use serde::{Deserialize, Serialize};

use crate::failure::{CliResult, Failure, EXIT_INPUT, EXIT_NUMERIC};
use crate::filter_file::FilterFile;
use crate::registry::{dedup_labels, resolve};
use crate::report::{ber_row, g6, merit_row, render, write_output, BER_HEADER, MERIT_HEADER, SIR_HEADER};

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> CliResult<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(Failure::input)?;
    serde_json::from_str(&text).with_context(|| format!("invalid {what} {}", path.display())).map_err(Failure::input)
}

pub fn cmd_design(config: Option<&Path>, preset: Option<Preset>, out: &Path) -> CliResult<()> {
    let (cfg, label) = match (config, preset) {
        (Some(path), _) => {
            let cfg: DesignConfig = read_json(path, "design config")?;
            let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or("design".into());
            (cfg, label)
        }
        (None, Some(p)) => (DesignConfig::preset(p, 4, 32), p.key().to_string()),
        (None, None) => return Err(Failure::input(anyhow!("either --config or --preset is required"))),
    };
    cfg.validate()?;
    info!("designing {label}: N={} K={} M={} eps0={:e}", cfg.n, cfg.k, cfg.m, cfg.epsilon0);
    let mut d = design(&cfg).map_err(|e| Failure::from_lib(e).context(format!("design {label} failed")))?;
    d.filter.set_label(label);
    info!(
        "zeta*={:.10} status={:?} line-search value={:.3e} max|eps|={:.3e}",
        d.coefficients.zeta, d.report.status, d.report.line_search_value, d.max_abs_epsilon
    );
    FilterFile::from_design(&d, cfg.n, cfg.omega_s).write(out)
}

/// Power spectrum on [0, π] relative to its peak.
pub fn spectrum_csv(filter: &PrototypeFilter, grid: usize) -> CliResult<String> {
    let spec = dtft_power(filter, grid)?;
    let peak = spec.power.iter().copied().fold(0.0, f64::max);
    let rows: Vec<Vec<String>> =
        spec.omega.iter().zip(&spec.power).map(|(w, p)| vec![g6(w / (2.0 * PI)), g6(to_db(p / peak))]).collect();
    Ok(render(&["omega_over_2pi", "power_db"], &rows))
}

pub fn cmd_analyze(filter: &str, out: &Path, grid: Option<usize>, spectrum: Option<&Path>) -> CliResult<()> {
    let f = resolve(filter)?;
    let grid = grid.unwrap_or(DEFAULT_GRID);
    let report = analyze_with_grid(&f, grid)?;
    if report.xi.is_none() {
        warn!("{}: time dispersion is zero, xi is undefined and left empty", f.label());
    }
    write_output(out, &render(&MERIT_HEADER, &[merit_row(f.label(), &report)]))?;
    if let Some(path) = spectrum {
        write_output(path, &spectrum_csv(&f, grid)?)?;
    }
    Ok(())
}

/// Band edges of the OoB sweep: ω/2π = 0, 0.0025, …, 0.25.
pub fn sweep_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 * 0.0025).collect()
}

pub fn cmd_compare(filters: &[String], out: &Path, sweep: bool) -> CliResult<()> {
    let mut resolved = Vec::new();
    let mut first_failure = None;
    for spec in filters {
        let attempt = resolve(spec).and_then(|f| {
            if sweep {
                Ok((f, None))
            } else {
                let r = analyze_with_grid(&f, DEFAULT_GRID)?;
                Ok((f, Some(r)))
            }
        });
        match attempt {
            Ok(item) => resolved.push(item),
            Err(e) => {
                warn!("skipping {spec}: {e}");
                first_failure.get_or_insert(e);
            }
        }
    }
    if resolved.is_empty() {
        let e = first_failure.unwrap_or_else(|| Failure::input(anyhow!("no filters given")));
        return Err(e.context("every filter failed"));
    }
    let labels = dedup_labels(&resolved.iter().map(|(f, _)| f.label().to_string()).collect::<Vec<_>>());
    let text = if sweep {
        let freqs = sweep_grid();
        let omegas: Vec<f64> = freqs.iter().map(|f| 2.0 * PI * f).collect();
        let mut rows = Vec::new();
        for ((f, _), label) in resolved.iter().zip(&labels) {
            let energy = f.energy();
            for (nu, e) in freqs.iter().zip(oob_sweep(f, &omegas)) {
                rows.push(vec![label.clone(), g6(*nu), g6(to_db(e / energy))]);
            }
        }
        render(&["label", "omega_over_2pi", "oob_db"], &rows)
    } else {
        let rows: Vec<Vec<String>> = resolved
            .iter()
            .zip(&labels)
            .map(|((_, r), label)| {
                let r = r.as_ref().expect("analyzed");
                if r.xi.is_none() {
                    warn!("{label}: xi is undefined and left empty");
                }
                merit_row(label, r)
            })
            .collect();
        render(&MERIT_HEADER, &rows)
    };
    write_output(out, &text)
}

/// Simulation scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub n_symbols: usize,
    #[serde(default = "default_pam")]
    pub pam_levels: usize,
    /// Frames per trial round.
    pub trials: usize,
    #[serde(default = "default_model")]
    pub model: ChannelModel,
    #[serde(default)]
    pub ebn0_db: Vec<f64>,
    #[serde(default = "default_cap")]
    pub max_symbols: u64,
}

fn default_name() -> String {
    "default".into()
}
fn default_pam() -> usize {
    2
}
fn default_model() -> ChannelModel {
    ChannelModel::Awgn
}
fn default_cap() -> u64 {
    DEFAULT_SYMBOL_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SimMode {
    Sir,
    Ber,
}

pub fn cmd_simulate(filter: &str, mode: SimMode, scenario: &Path, out: &Path, seed: u64) -> CliResult<()> {
    let f = resolve(filter)?;
    let sc: Scenario = read_json(scenario, "scenario")?;
    let label = f.label().to_string();
    let sim = |e: protodesign::Error| Failure::new(EXIT_NUMERIC, e).context(format!("simulation of {label} failed"));
    let cfg = TransmuxConfig::new(f, sc.n_symbols, sc.pam_levels, seed).map_err(sim)?;
    let text = match mode {
        SimMode::Sir => {
            let sir = empirical_sir(&cfg, sc.trials).map_err(sim)?;
            let symbols = sc.trials * sc.n_symbols.saturating_sub(2 * cfg.edge_slots()) * cfg.m;
            info!("{label}: empirical SIR {sir:.4} dB");
            let row = vec![label.clone(), sc.name.clone(), g6(sir), symbols.to_string(), seed.to_string()];
            render(&SIR_HEADER, &[row])
        }
        SimMode::Ber => {
            if sc.ebn0_db.is_empty() {
                return Err(Failure::new(EXIT_INPUT, anyhow!("BER scenario needs at least one ebn0_db point")));
            }
            let ch = ChannelConfig {
                model: sc.model,
                ebn0_db: sc.ebn0_db.clone(),
                trials: sc.trials,
                seed,
                max_symbols: sc.max_symbols,
            };
            let points = ber_sim(&cfg, &ch).map_err(sim)?;
            let rows: Vec<Vec<String>> = points.iter().map(|p| ber_row(&label, &sc.name, p, seed)).collect();
            render(&BER_HEADER, &rows)
        }
    };
    write_output(out, &text)
}
