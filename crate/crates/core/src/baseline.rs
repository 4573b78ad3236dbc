//! Baseline prototype filters: Mirabbasi-Martin, EGF and OFDP.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::designer::{reconstruction_priority, RefineConfig};
use crate::error::{Error, Result};
use crate::filter::{centered_index, PrototypeFilter};
use crate::interference::BasisMatrix;

/// Frequency-sample weights k₀…k_{K−1} of the Mirabbasi-Martin pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartinWeights {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "k")]
    pub k_coeffs: Vec<f64>,
}

impl MartinWeights {
    /// Shipped weights for K = 4.
    pub fn k4() -> Self {
        let k1 = 0.971960;
        MartinWeights { k: 4, k_coeffs: vec![1.0, k1, FRAC_1_SQRT_2, (1.0 - k1 * k1).sqrt()] }
    }

    /// Weights for `k`, if shipped.
    pub fn shipped(k: usize) -> Option<Self> {
        (k == 4).then(Self::k4)
    }

    /// Checks k₀ = 1 and k_{K−i} = √(1 − k_i²).
    pub fn validate(&self) -> Result<()> {
        if self.k_coeffs.len() != self.k || self.k == 0 {
            return Err(Error::config(format!(
                "Martin weights for K={} must have K entries, got {}",
                self.k,
                self.k_coeffs.len()
            )));
        }
        if (self.k_coeffs[0] - 1.0).abs() > 1e-9 {
            return Err(Error::config("Martin weight k0 must equal 1"));
        }
        for i in 1..self.k {
            let ki = self.k_coeffs[i];
            let mirror = self.k_coeffs[self.k - i];
            if (mirror - (1.0 - ki * ki).max(0.0).sqrt()).abs() > 1e-9 {
                return Err(Error::config(format!(
                    "Martin weights are not power complementary at i={i}: k[{}]={mirror}, sqrt(1-k[{i}]^2)={}",
                    self.k - i,
                    (1.0 - ki * ki).max(0.0).sqrt()
                )));
            }
        }
        Ok(())
    }
}

/// Martin pulse with the shipped weights.
pub fn martin_filter(k: usize, big_m: usize) -> Result<PrototypeFilter> {
    if !(3..=8).contains(&k) {
        return Err(Error::domain(format!("Martin pulse supports K in 3..=8, got {k}")));
    }
    let w = MartinWeights::shipped(k)
        .ok_or_else(|| Error::config(format!("no shipped Martin weights for K={k}; supply a weights file")))?;
    martin_filter_with(&w, big_m)
}

/// p[k] = k₀ + 2Σ k_i cos(2πi·k̲/(KM)) on KM+1 samples, unit energy.
pub fn martin_filter_with(weights: &MartinWeights, big_m: usize) -> Result<PrototypeFilter> {
    weights.validate()?;
    let k = weights.k;
    let km = (k * big_m) as f64;
    let len = k * big_m + 1;
    let samples = (0..len)
        .map(|s| {
            let kb = centered_index(s, len);
            weights.k_coeffs[0]
                + 2.0 * (1..k).map(|i| weights.k_coeffs[i] * (2.0 * PI * i as f64 * kb / km).cos()).sum::<f64>()
        })
        .collect();
    PrototypeFilter::normalized(samples, k, big_m, "martin")
}

/// Gaussian spreading factor and lattice of the EGF pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgfConfig {
    pub alpha: f64,
    /// Signalling interval in samples.
    pub tau0: f64,
    /// Subcarrier spacing in cycles/sample.
    pub nu0: f64,
}

impl EgfConfig {
    /// τ₀ = M/2 samples and ν₀ = 1/M.
    pub fn new(alpha: f64, big_m: usize) -> Self {
        EgfConfig { alpha, tau0: big_m as f64 / 2.0, nu0: 1.0 / big_m as f64 }
    }
}

/// EGF pulse by numerical IOTA orthogonalization of a sampled Gaussian.
///
/// The Gaussian exp(−παt²) lives on a circular grid of 16KM samples where
/// τ₀ = 1/√2 spans M/2 samples. It is divided by the root of its τ₀-periodized
/// energy, transformed, divided by the root of its ν₀-periodized spectral
/// energy, transformed back, truncated to KM+1 centred samples and normalized.
pub fn egf_filter(cfg: &EgfConfig, k: usize, big_m: usize) -> Result<PrototypeFilter> {
    if !(0.5..=2.0).contains(&cfg.alpha) {
        return Err(Error::domain(format!("EGF alpha {} outside [1/2, 2]", cfg.alpha)));
    }
    if (cfg.tau0 * cfg.nu0 - 0.5).abs() > 1e-12 {
        return Err(Error::domain("EGF lattice must satisfy tau0*nu0 = 1/2"));
    }
    if (cfg.tau0 - big_m as f64 / 2.0).abs() > 1e-12 {
        return Err(Error::domain("EGF tau0 must equal M/2 samples"));
    }
    if big_m % 2 != 0 || big_m == 0 || k == 0 {
        return Err(Error::domain("EGF needs K > 0 and even M"));
    }
    let half = big_m / 2;
    let total = 16 * k * big_m;
    let dt = std::f64::consts::SQRT_2 / big_m as f64;
    let mut x: Vec<Complex64> = (0..total)
        .map(|i| {
            let j = if i <= total / 2 { i as f64 } else { i as f64 - total as f64 };
            let t = j * dt;
            Complex64::new((-PI * cfg.alpha * t * t).exp(), 0.0)
        })
        .collect();

    periodic_normalize(&mut x, half)?;
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(total).process(&mut x);
    periodic_normalize(&mut x, total / big_m)?;
    planner.plan_fft_inverse(total).process(&mut x);

    let len = k * big_m + 1;
    let h = (len - 1) / 2;
    let samples: Vec<f64> = (0..len).map(|s| x[(s + total - h) % total].re).collect();
    let label = format!("egf:{}", cfg.alpha);
    let mut f = PrototypeFilter::normalized(samples, k, big_m, label)?;
    // the truncated pulse is symmetric up to rounding; make it exact
    let mut s = f.samples().to_vec();
    for i in 0..len / 2 {
        let avg = 0.5 * (s[i] + s[len - 1 - i]);
        s[i] = avg;
        s[len - 1 - i] = avg;
    }
    f = PrototypeFilter::normalized(s, k, big_m, f.label().to_string())?;
    Ok(f)
}

/// Divides each sample by the root of the energy of its residue class mod `period`.
fn periodic_normalize(x: &mut [Complex64], period: usize) -> Result<()> {
    let mut energy = vec![0.0; period];
    for (i, z) in x.iter().enumerate() {
        energy[i % period] += z.norm_sqr();
    }
    if energy.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::numeric("IOTA normalization hit a zero periodized energy"));
    }
    let scale: Vec<f64> = energy.iter().map(|e| e.sqrt().recip()).collect();
    for (i, z) in x.iter_mut().enumerate() {
        *z *= scale[i % period];
    }
    Ok(())
}

/// Interference tolerance of the OFDP-style pulse.
pub const OFDP_EPSILON0: f64 = 3e-4;

/// OFDP-style pulse: even-indexed DPSS (ω_s = 2π/M, K of them) combined to
/// minimize energy beyond 2π/M with every |ε_{m,n}| ≤ 3e−4 at unit energy.
pub fn ofdp_filter(k: usize, big_m: usize) -> Result<PrototypeFilter> {
    let w = 2.0 * PI / big_m as f64;
    let basis = BasisMatrix::slepian(k * big_m + 1, w, k)?;
    let cfg = RefineConfig::new(w, OFDP_EPSILON0);
    let out = reconstruction_priority(&basis, big_m, &cfg)?;
    let mut f = PrototypeFilter::normalized(out.samples, k, big_m, "ofdp")?;
    f.set_label("ofdp");
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_weights_are_power_complementary() {
        let w = MartinWeights::k4();
        w.validate().unwrap();
        // six printed decimals on k1 move sqrt(1 - k1^2) by up to 2.1e-6
        assert!((w.k_coeffs[3] - 0.235147).abs() < 2.5e-6);
    }

    #[test]
    fn bad_weights_rejected() {
        let w = MartinWeights { k: 4, k_coeffs: vec![1.0, 0.9, 0.7, 0.2] };
        assert!(w.validate().is_err());
        assert!(martin_filter(5, 32).is_err());
        assert!(martin_filter(2, 32).is_err());
    }

    #[test]
    fn martin_is_symmetric_unit_energy() {
        let f = martin_filter(4, 32).unwrap();
        assert_eq!(f.len(), 129);
        assert!(f.symmetry_defect() <= 1e-12);
        assert!((f.energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn egf_is_symmetric_unit_energy() {
        for alpha in [0.5, 1.0, 2.0] {
            let f = egf_filter(&EgfConfig::new(alpha, 32), 4, 32).unwrap();
            assert_eq!(f.symmetry_defect(), 0.0);
            assert!((f.energy() - 1.0).abs() < 1e-12);
            let peak = f.samples().iter().cloned().fold(f64::MIN, f64::max);
            assert_eq!(peak, f.samples()[64]);
        }
    }

    #[test]
    fn egf_rejects_bad_config() {
        assert!(egf_filter(&EgfConfig::new(3.0, 32), 4, 32).is_err());
        let mut c = EgfConfig::new(1.0, 32);
        c.nu0 = 0.1;
        assert!(egf_filter(&c, 4, 32).is_err());
    }
}
