//! Filter sources: builtin keys or filter files.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use protodesign::baseline::{egf_filter, martin_filter, martin_filter_with, ofdp_filter, EgfConfig, MartinWeights};
use protodesign::designer::{design, tabulated, DesignConfig, Preset};
use protodesign::PrototypeFilter;

use crate::failure::{CliResult, Failure};
use crate::filter_file::FilterFile;

/// Overlap factor and subcarrier count of every builtin filter.
pub const BUILTIN_K: usize = 4;
pub const BUILTIN_M: usize = 32;

pub const BUILTIN_HELP: &str = "egf:ALPHA, martin, martin:WEIGHTS.json, ofdp, type1, type2, type3, \
tabulated:type1, tabulated:type2, tabulated:type3";

/// Resolves a builtin key (see [`BUILTIN_HELP`]) or else reads a filter file.
pub fn resolve(spec: &str) -> CliResult<PrototypeFilter> {
    let labelled = |mut f: PrototypeFilter| {
        f.set_label(spec);
        f
    };
    if let Some(alpha) = spec.strip_prefix("egf:") {
        let alpha: f64 = alpha.parse().map_err(|_| Failure::input(anyhow!("bad EGF spreading factor in {spec:?}")))?;
        return Ok(labelled(egf_filter(&EgfConfig::new(alpha, BUILTIN_M), BUILTIN_K, BUILTIN_M)?));
    }
    if let Some(path) = spec.strip_prefix("martin:") {
        let weights = read_martin_weights(Path::new(path))?;
        return Ok(labelled(martin_filter_with(&weights, BUILTIN_M)?));
    }
    if let Some(key) = spec.strip_prefix("tabulated:") {
        let preset = Preset::parse(key).ok_or_else(|| Failure::input(anyhow!("unknown preset in {spec:?}")))?;
        return Ok(labelled(tabulated(preset)?.filter));
    }
    match spec {
        "martin" => Ok(labelled(martin_filter(BUILTIN_K, BUILTIN_M)?)),
        "ofdp" => Ok(labelled(ofdp_filter(BUILTIN_K, BUILTIN_M)?)),
        _ => match Preset::parse(spec) {
            Some(preset) => {
                let d = design(&DesignConfig::preset(preset, BUILTIN_K, BUILTIN_M))?;
                Ok(labelled(d.filter))
            }
            None => FilterFile::read(Path::new(spec))?
                .to_filter()
                .with_context(|| format!("invalid filter in {spec}"))
                .map_err(Failure::input),
        },
    }
}

/// Reads Mirabbasi-Martin weights from `{"K": 4, "k": [...]}`.
pub fn read_martin_weights(path: &Path) -> CliResult<MartinWeights> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(Failure::input)?;
    let w: MartinWeights = serde_json::from_str(&text)
        .with_context(|| format!("invalid Martin weights in {}", path.display()))
        .map_err(Failure::input)?;
    w.validate()?;
    Ok(w)
}

/// Makes labels unique by suffixing repeats with "#2", "#3", ... in order.
pub fn dedup_labels(labels: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(labels.len());
    for label in labels {
        let mut candidate = label.clone();
        let mut i = 1;
        while out.contains(&candidate) || (i > 1 && labels.contains(&candidate)) {
            i += 1;
            candidate = format!("{label}#{i}");
        }
        out.push(candidate);
    }
    out
}
