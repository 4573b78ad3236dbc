//! Reference FBMC/OQAM transmultiplexer: synthesis and analysis banks,
//! empirical SIR and a desk-scale BER harness.
//!
//! Both banks are evaluated directly from the pulse definition. For symbol
//! block n the modulated waveform is p[k]·W_n[k mod M], where W_n is an
//! M-point inverse DFT of the phase-rotated symbols, so synthesis costs one
//! small FFT per block. Analysis folds the windowed signal modulo M and
//! applies one forward FFT per output slot.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::{self, Execution, KahanSum};
use crate::filter::PrototypeFilter;
use crate::interference::{quarter_cos, quarter_sin};

/// Symbol latency Δα and sample delay Δβ with L_p − 1 = (M/2)Δα − Δβ and
/// Δβ ∈ [0, M/2) minimal.
pub fn delays(len: usize, big_m: usize) -> (usize, usize) {
    let half = big_m / 2;
    let alpha = (len - 1).div_ceil(half);
    (alpha, alpha * half - (len - 1))
}

#[derive(Debug, Clone)]
pub struct TransmuxConfig {
    pub m: usize,
    pub filter: PrototypeFilter,
    pub n_symbols: usize,
    pub pam_levels: usize,
    pub seed: u64,
    pub delta_alpha: usize,
    pub delta_beta: usize,
}

impl TransmuxConfig {
    pub fn new(filter: PrototypeFilter, n_symbols: usize, pam_levels: usize, seed: u64) -> Result<Self> {
        if ![2, 4, 8].contains(&pam_levels) {
            return Err(Error::domain(format!("PAM order {pam_levels} not in {{2, 4, 8}}")));
        }
        if n_symbols == 0 {
            return Err(Error::domain("frame needs at least one symbol slot"));
        }
        let m = filter.m();
        let (delta_alpha, delta_beta) = delays(filter.len(), m);
        Ok(TransmuxConfig { m, filter, n_symbols, pam_levels, seed, delta_alpha, delta_beta })
    }

    /// Samples in a modulated frame: (n_symbols − 1)·M/2 + L_p.
    pub fn frame_len(&self) -> usize {
        (self.n_symbols - 1) * self.m / 2 + self.filter.len()
    }

    /// Symbol slots per edge left out of SIR/BER statistics: ⌈L_p/(M/2)⌉.
    pub fn edge_slots(&self) -> usize {
        self.filter.len().div_ceil(self.m / 2)
    }
}

/// j^(m+n)·(−1)^(mn): the OQAM phase with the absolute-time modulation term
/// of a block starting at nM/2.
fn block_phase(m: usize, n: i64) -> Complex64 {
    let j = m as i64 + n;
    let sign = if (m as i64 * n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Complex64::new(quarter_cos(j), quarter_sin(j)) * sign
}

struct Banks {
    centre_twiddle: Vec<Complex64>,
    ifft: Arc<dyn Fft<f64>>,
    fft: Arc<dyn Fft<f64>>,
}

impl Banks {
    fn new(cfg: &TransmuxConfig) -> Self {
        let c = (cfg.filter.len() as f64 - 1.0) / 2.0;
        let m = cfg.m;
        let mut planner = FftPlanner::new();
        Banks {
            // e^{−j2πmc/M}
            centre_twiddle: (0..m).map(|i| Complex64::from_polar(1.0, -2.0 * PI * i as f64 * c / m as f64)).collect(),
            ifft: planner.plan_fft_inverse(m),
            fft: planner.plan_fft_forward(m),
        }
    }
}

/// s[k] = Σ_{m,n} a_{m,n}·p[k − nM/2]·exp(j((2π/M)·m·k̲ + (π/2)(m+n))).
/// `symbols` is M × n_symbols.
pub fn modulate(symbols: &DMatrix<f64>, cfg: &TransmuxConfig) -> Result<Vec<Complex64>> {
    if symbols.nrows() != cfg.m || symbols.ncols() != cfg.n_symbols {
        return Err(Error::domain(format!(
            "symbol matrix is {}x{}, expected {}x{}",
            symbols.nrows(),
            symbols.ncols(),
            cfg.m,
            cfg.n_symbols
        )));
    }
    let banks = Banks::new(cfg);
    let m = cfg.m;
    let half = m / 2;
    let p = cfg.filter.samples();
    let mut s = vec![Complex64::new(0.0, 0.0); cfg.frame_len()];
    let mut w = vec![Complex64::new(0.0, 0.0); m];
    for n in 0..cfg.n_symbols {
        for (sub, wi) in w.iter_mut().enumerate() {
            *wi = block_phase(sub, n as i64) * banks.centre_twiddle[sub] * symbols[(sub, n)];
        }
        banks.ifft.process(&mut w);
        let base = n * half;
        for (k, &pk) in p.iter().enumerate() {
            s[base + k] += w[k % m] * pk;
        }
    }
    Ok(s)
}

/// Analysis-bank output: `slots[(m, j)]` = Re⟨s | p_{m, j−Δα}⟩, so symbol
/// (m, n) appears at slot n + Δα. Slots before Δα hold the start-up outputs
/// of the causal chain.
#[derive(Debug, Clone)]
pub struct Demodulated {
    pub slots: DMatrix<f64>,
    pub delta_alpha: usize,
}

impl Demodulated {
    /// The M × n_symbols block aligned with the transmitted symbols.
    pub fn symbols(&self) -> DMatrix<f64> {
        let n = self.slots.ncols() - self.delta_alpha;
        self.slots.columns(self.delta_alpha, n).into_owned()
    }
}

/// Complex projections ⟨s | p_{m,n}⟩ for all m at one block index n
/// (samples outside the frame count as zero).
fn project_block(s: &[Complex64], cfg: &TransmuxConfig, banks: &Banks, n: i64, buf: &mut [Complex64]) {
    let m = cfg.m;
    let p = cfg.filter.samples();
    buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    let base = n * (m / 2) as i64;
    for (k, &pk) in p.iter().enumerate() {
        let idx = base + k as i64;
        if idx < 0 || idx >= s.len() as i64 {
            continue;
        }
        buf[k % m] += s[idx as usize] * pk;
    }
    banks.fft.process(buf);
    for (sub, z) in buf.iter_mut().enumerate() {
        *z *= (block_phase(sub, n) * banks.centre_twiddle[sub]).conj();
    }
}

/// Complex projections ⟨s | p_{m, j−Δα}⟩ for every output slot j.
fn projections(s: &[Complex64], cfg: &TransmuxConfig) -> Result<DMatrix<Complex64>> {
    if s.len() != cfg.frame_len() {
        return Err(Error::domain(format!("received {} samples, frame needs {}", s.len(), cfg.frame_len())));
    }
    let banks = Banks::new(cfg);
    let m = cfg.m;
    let da = cfg.delta_alpha;
    let n_slots = cfg.n_symbols + da;
    let mut out = DMatrix::from_element(m, n_slots, Complex64::new(0.0, 0.0));
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..n_slots {
        project_block(s, cfg, &banks, j as i64 - da as i64, &mut buf);
        out.column_mut(j).copy_from_slice(&buf);
    }
    Ok(out)
}

pub fn demodulate(s: &[Complex64], cfg: &TransmuxConfig) -> Result<Demodulated> {
    let z = projections(s, cfg)?;
    Ok(Demodulated { slots: z.map(|v| v.re), delta_alpha: cfg.delta_alpha })
}

/// Unit-energy Gray-mapped PAM constellation.
#[derive(Debug, Clone)]
pub struct Pam {
    pub levels: Vec<f64>,
    pub bits: u32,
}

impl Pam {
    pub fn new(order: usize) -> Self {
        let scale = (3.0 / ((order * order - 1) as f64)).sqrt();
        Pam {
            levels: (0..order).map(|i| (2.0 * i as f64 - (order as f64 - 1.0)) * scale).collect(),
            bits: order.trailing_zeros(),
        }
    }

    /// Index of the nearest level.
    pub fn decide(&self, x: f64) -> usize {
        let order = self.levels.len();
        let scale = self.levels[1] - self.levels[0];
        let pos = (x - self.levels[0]) / scale;
        (pos.round().max(0.0) as usize).min(order - 1)
    }

    /// Bits that differ between the Gray labels of two level indices.
    pub fn bit_errors(&self, a: usize, b: usize) -> u32 {
        let gray = |i: usize| i ^ (i >> 1);
        (gray(a) ^ gray(b)).count_ones()
    }
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_frame(cfg: &TransmuxConfig, pam: &Pam, rng: &mut ChaCha8Rng) -> (Vec<usize>, DMatrix<f64>) {
    let order = pam.levels.len();
    let idx: Vec<usize> = (0..cfg.m * cfg.n_symbols).map(|_| rng.random_range(0..order)).collect();
    let a = DMatrix::from_fn(cfg.m, cfg.n_symbols, |i, j| pam.levels[idx[j * cfg.m + i]]);
    (idx, a)
}

pub fn empirical_sir(cfg: &TransmuxConfig, trials: usize) -> Result<f64> {
    empirical_sir_with(cfg, trials, Execution::default())
}

/// 10·log10(E[a²]/E[(ã − a)²]) over interior symbols of `trials` random frames.
/// Trial t draws from ChaCha8 seeded with `cfg.seed` on stream t.
pub fn empirical_sir_with(cfg: &TransmuxConfig, trials: usize, exec: Execution) -> Result<f64> {
    let total = trials as f64 * cfg.n_symbols as f64 * cfg.m as f64;
    if total < 1e5 {
        return Err(Error::domain(format!("trials*n_symbols*M = {total} below the statistical floor of 1e5 symbols")));
    }
    let edge = cfg.edge_slots();
    if cfg.n_symbols <= 2 * edge {
        return Err(Error::domain(format!(
            "frame of {} slots has no interior beyond {edge} edge slots per side",
            cfg.n_symbols
        )));
    }
    let pam = Pam::new(cfg.pam_levels);
    let per_trial = exec::map_indices(exec, trials, |t| -> Result<(f64, f64)> {
        let mut rng = trial_rng(cfg.seed, t as u64);
        let (_, a) = random_frame(cfg, &pam, &mut rng);
        let s = modulate(&a, cfg)?;
        let est = demodulate(&s, cfg)?.symbols();
        let mut sig = KahanSum::default();
        let mut err = KahanSum::default();
        for n in edge..cfg.n_symbols - edge {
            for m in 0..cfg.m {
                let x = a[(m, n)];
                sig.add(x * x);
                err.add((est[(m, n)] - x).powi(2));
            }
        }
        Ok((sig.value(), err.value()))
    });
    let mut sig = KahanSum::default();
    let mut err = KahanSum::default();
    for r in per_trial {
        let (s, e) = r?;
        sig.add(s);
        err.add(e);
    }
    Ok(if err.value() == 0.0 { f64::INFINITY } else { 10.0 * (sig.value() / err.value()).log10() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    None,
    Awgn,
    /// One CN(0, 1) gain per subcarrier and frame, applied to the received
    /// subcarrier projection (the channel is taken as flat across each
    /// subcarrier's band), with single-tap zero forcing.
    FlatRayleighPerSubcarrier,
}

impl ChannelModel {
    pub fn key(self) -> &'static str {
        match self {
            ChannelModel::None => "none",
            ChannelModel::Awgn => "awgn",
            ChannelModel::FlatRayleighPerSubcarrier => "flat_rayleigh_per_subcarrier",
        }
    }
}

pub const DEFAULT_SYMBOL_CAP: u64 = 100_000_000;
pub const TARGET_ERRORS: u64 = 100;

fn default_cap() -> u64 {
    DEFAULT_SYMBOL_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub model: ChannelModel,
    pub ebn0_db: Vec<f64>,
    /// Frames simulated per round; rounds repeat until enough errors or the cap.
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub max_symbols: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub ber: f64,
    pub n_symbols: u64,
    /// Bit errors.
    pub n_errors: u64,
    pub n_bits: u64,
}

pub fn ber_sim(cfg: &TransmuxConfig, ch: &ChannelConfig) -> Result<Vec<BerPoint>> {
    ber_sim_with(cfg, ch, Execution::default())
}

/// Monte Carlo BER of Gray PAM through the transmultiplexer. Per Eb/N0
/// point, rounds of `ch.trials` frames run until at least 100 bit errors or
/// `ch.max_symbols` interior symbols; without noise a single round is run.
/// Frame f of point i draws from ChaCha8 seeded with `ch.seed` on stream
/// (i << 32) | f, so results do not depend on the thread count.
pub fn ber_sim_with(cfg: &TransmuxConfig, ch: &ChannelConfig, exec: Execution) -> Result<Vec<BerPoint>> {
    if ch.trials == 0 {
        return Err(Error::domain("channel config needs trials >= 1"));
    }
    let edge = cfg.edge_slots();
    if cfg.n_symbols <= 2 * edge {
        return Err(Error::domain("frame too short for interior symbols"));
    }
    let pam = Pam::new(cfg.pam_levels);
    let per_frame = ((cfg.n_symbols - 2 * edge) * cfg.m) as u64;
    let mut out = Vec::with_capacity(ch.ebn0_db.len());
    for (pi, &ebn0_db) in ch.ebn0_db.iter().enumerate() {
        let ebn0 = 10f64.powf(ebn0_db / 10.0);
        let n0 = 1.0 / (pam.bits as f64 * ebn0);
        let noise_std = (n0 / 2.0).sqrt();
        let mut errors = 0u64;
        let mut symbols = 0u64;
        let mut next_frame = 0u64;
        loop {
            let first = next_frame;
            let results = exec::map_indices(exec, ch.trials, |t| -> Result<u64> {
                let mut rng = trial_rng(ch.seed, ((pi as u64) << 32) | (first + t as u64));
                ber_frame(cfg, ch.model, &pam, noise_std, &mut rng, edge)
            });
            for r in results {
                errors += r?;
                symbols += per_frame;
            }
            next_frame += ch.trials as u64;
            if ch.model == ChannelModel::None || errors >= TARGET_ERRORS || symbols >= ch.max_symbols {
                break;
            }
        }
        let n_bits = symbols * pam.bits as u64;
        out.push(BerPoint {
            ebn0_db,
            ber: errors as f64 / n_bits as f64,
            n_symbols: symbols,
            n_errors: errors,
            n_bits,
        });
    }
    Ok(out)
}

fn add_noise(s: &mut [Complex64], std: f64, rng: &mut ChaCha8Rng) {
    for z in s.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z += Complex64::new(re, im) * std;
    }
}

fn ber_frame(
    cfg: &TransmuxConfig,
    model: ChannelModel,
    pam: &Pam,
    noise_std: f64,
    rng: &mut ChaCha8Rng,
    edge: usize,
) -> Result<u64> {
    let (idx, a) = random_frame(cfg, pam, rng);
    let s = modulate(&a, cfg)?;
    let est = match model {
        ChannelModel::None => demodulate(&s, cfg)?.symbols(),
        ChannelModel::Awgn => {
            let mut r = s;
            add_noise(&mut r, noise_std, rng);
            demodulate(&r, cfg)?.symbols()
        }
        ChannelModel::FlatRayleighPerSubcarrier => {
            // y = h_m·⟨s|p_{m,n}⟩ + ⟨w|p_{m,n}⟩, then ã = Re(y/h_m).
            let gains: Vec<Complex64> = (0..cfg.m)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect();
            let mut w = vec![Complex64::new(0.0, 0.0); s.len()];
            add_noise(&mut w, noise_std, rng);
            let zs = projections(&s, cfg)?;
            let zw = projections(&w, cfg)?;
            let da = cfg.delta_alpha;
            DMatrix::from_fn(cfg.m, cfg.n_symbols, |m, n| (zs[(m, n + da)] + zw[(m, n + da)] / gains[m]).re)
        }
    };
    let mut errors = 0u64;
    for n in edge..cfg.n_symbols - edge {
        for m in 0..cfg.m {
            let tx = idx[n * cfg.m + m];
            let rx = pam.decide(est[(m, n)]);
            errors += pam.bit_errors(tx, rx) as u64;
        }
    }
    Ok(errors)
}
