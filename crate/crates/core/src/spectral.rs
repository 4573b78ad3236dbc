//! Band-energy matrices, DPSS, DTFT power spectra, sidelobes and dispersion.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::filter::{centered_index, PrototypeFilter};

/// Energies below this value are reported at the floor.
pub const ENERGY_FLOOR: f64 = 1e-30;

/// Default number of DTFT points on [0, 2π).
pub const DEFAULT_GRID: usize = 1 << 16;

pub fn to_db(x: f64) -> f64 {
    10.0 * x.max(ENERGY_FLOOR).log10()
}

impl AsRef<[f64]> for PrototypeFilter {
    fn as_ref(&self) -> &[f64] {
        self.samples()
    }
}

/// Γ(ω)[k,l] as a function of the lag d = k − l.
pub fn gamma_lag(d: i64, omega: f64) -> f64 {
    if d == 0 {
        return omega / PI;
    }
    let x = d as f64 * (omega / PI);
    if x.fract() == 0.0 {
        0.0
    } else {
        (d as f64 * omega).sin() / (PI * d as f64)
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega <= PI {
        Ok(())
    } else {
        Err(Error::domain(format!("band edge {omega} outside (0, pi]")))
    }
}

/// The band-energy operator Γ(ω_c).
#[derive(Debug, Clone)]
pub struct GammaMatrix {
    pub omega_c: f64,
    pub entries: DMatrix<f64>,
}

pub fn build_gamma(omega_c: f64, len: usize) -> Result<GammaMatrix> {
    check_omega(omega_c)?;
    if len < 2 {
        return Err(Error::domain("Gamma needs at least two samples"));
    }
    let lags: Vec<f64> = (0..len as i64).map(|d| gamma_lag(d, omega_c)).collect();
    let entries = DMatrix::from_fn(len, len, |k, l| lags[k.abs_diff(l)]);
    Ok(GammaMatrix { omega_c, entries })
}

/// Leading eigenpairs of Γ(ω_s), columns sign-normalized.
#[derive(Debug, Clone)]
pub struct SlepianBasis {
    pub omega_s: f64,
    pub vectors: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

impl SlepianBasis {
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i).iter().copied().collect()
    }
}

/// Computes the `count` most concentrated DPSS of length `len`.
///
/// Γ is persymmetric, so it is block-diagonalized exactly into its action on
/// symmetric and antisymmetric sequences; each half is diagonalized densely.
/// Symmetric sequences therefore come out exactly symmetric.
pub fn dpss(len: usize, omega_s: f64, count: usize) -> Result<SlepianBasis> {
    check_omega(omega_s)?;
    if count > len {
        return Err(Error::domain(format!("requested {count} sequences of length {len}")));
    }
    if len < 2 {
        return Err(Error::domain("DPSS needs at least two samples"));
    }
    let g = |d: usize| gamma_lag(d as i64, omega_s);
    let half = len / 2;
    let odd_len = len % 2 == 1;
    let ne = half + usize::from(odd_len);
    let s2 = std::f64::consts::SQRT_2;

    let even = DMatrix::from_fn(ne, ne, |i, j| match (i < half, j < half) {
        (true, true) => g(i.abs_diff(j)) + g(len - 1 - i - j),
        (true, false) => s2 * g(half - i),
        (false, true) => s2 * g(half - j),
        (false, false) => g(0),
    });
    let odd = DMatrix::from_fn(half, half, |i, j| g(i.abs_diff(j)) - g(len - 1 - i - j));

    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(len);
    for (block, symmetric) in [(even, true), (odd, false)] {
        if block.nrows() == 0 {
            continue;
        }
        let n = block.nrows();
        let eig = SymmetricEigen::try_new(block, 1e-15, 10_000).ok_or_else(|| {
            Error::numeric(format!(
                "symmetric eigensolver did not converge on the {} block of size {n} (10000 sweeps)",
                if symmetric { "even" } else { "odd" }
            ))
        })?;
        for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
            let y = eig.eigenvectors.column(idx);
            let mut v = vec![0.0; len];
            for i in 0..half {
                let a = y[i] / s2;
                v[i] = a;
                v[len - 1 - i] = if symmetric { a } else { -a };
            }
            if symmetric && odd_len {
                v[half] = y[half];
            }
            normalize_sign(&mut v, symmetric);
            pairs.push((lambda, v));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.truncate(count);

    let mut vectors = DMatrix::zeros(len, count);
    let mut eigenvalues = Vec::with_capacity(count);
    for (j, (lambda, v)) in pairs.into_iter().enumerate() {
        vectors.column_mut(j).copy_from_slice(&v);
        eigenvalues.push(lambda);
    }
    Ok(SlepianBasis { omega_s, vectors, eigenvalues })
}

fn normalize_sign(v: &mut [f64], symmetric: bool) {
    let len = v.len();
    let peak = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let tiny = 1e-8 * peak;
    let centre = v[(len - 1) / 2];
    let pivot = if symmetric && centre.abs() > tiny {
        centre
    } else {
        v.iter().copied().find(|x| x.abs() > tiny).unwrap_or(0.0)
    };
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Autocorrelation r[d] = Σ_k p[k]·p[k+d] for d ≥ 0.
pub fn autocorrelation(p: &[f64]) -> Vec<f64> {
    let n = p.len();
    (0..n).map(|d| p[..n - d].iter().zip(&p[d..]).map(|(a, b)| a * b).sum()).collect()
}

/// In-band energy pᵀΓ(ω_c)p.
pub fn band_energy(p: impl AsRef<[f64]>, omega_c: f64) -> f64 {
    let r = autocorrelation(p.as_ref());
    r.iter()
        .enumerate()
        .map(|(d, rd)| {
            let w = if d == 0 { 1.0 } else { 2.0 };
            w * gamma_lag(d as i64, omega_c) * rd
        })
        .sum()
}

/// Out-of-band energy pᵀ(I − Γ(ω_c))p = (1/π)∫_{ω_c}^{π} |P(e^{jω})|² dω.
///
/// Integrated directly rather than through the lags: the lag sum subtracts
/// O(1) terms and loses every digit once the tail drops below ~1e−12, while
/// the integrand here is nonnegative. Panels are at most 1/L_p wide, so the
/// 16-point rule is exact to rounding for a length-L_p trigonometric polynomial.
pub fn oob_energy(p: impl AsRef<[f64]>, omega_c: f64) -> f64 {
    let p = p.as_ref();
    let omega_c = omega_c.clamp(0.0, PI);
    let span = PI - omega_c;
    if span == 0.0 || p.is_empty() {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre_16();
    let panels = (span * p.len() as f64).ceil().max(1.0) as usize;
    let h = span / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let mid = omega_c + (i as f64 + 0.5) * h;
        let panel: f64 = nodes.iter().zip(weights).map(|(x, w)| w * power_horner(p, mid + 0.5 * h * x)).sum();
        acc += 0.5 * h * panel;
    }
    acc / PI
}

/// |P(e^{jω})|² by Horner's rule in e^{−jω}; one sin_cos per call.
fn power_horner(p: &[f64], omega: f64) -> f64 {
    let z = Complex64::from_polar(1.0, -omega);
    let v = p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &x| acc * z + x);
    v.norm_sqr()
}

/// Nodes and weights on [−1, 1] from the Jacobi matrix of the Legendre recurrence.
fn gauss_legendre_16() -> &'static ([f64; 16], [f64; 16]) {
    static RULE: std::sync::OnceLock<([f64; 16], [f64; 16])> = std::sync::OnceLock::new();
    RULE.get_or_init(|| {
        let jacobi = DMatrix::from_fn(16, 16, |i, j| {
            let k = i.max(j) as f64;
            if i.abs_diff(j) == 1 {
                k / (4.0 * k * k - 1.0).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> =
            (0..16).map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2))).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut rule = ([0.0; 16], [0.0; 16]);
        for (i, (x, w)) in pairs.into_iter().enumerate() {
            rule.0[i] = x;
            rule.1[i] = w;
        }
        rule
    })
}

pub fn oob_energy_db(p: impl AsRef<[f64]>, omega_c: f64) -> f64 {
    to_db(oob_energy(p, omega_c))
}

/// |P(e^{jω})|² sampled on ω ∈ [0, π].
#[derive(Debug, Clone)]
pub struct PowerSpectrum {
    pub omega: Vec<f64>,
    pub power: Vec<f64>,
}

impl PowerSpectrum {
    /// Power relative to |P(e^{j0})|², in dB.
    pub fn relative_db(&self) -> Vec<f64> {
        let dc = self.power[0];
        self.power.iter().map(|&x| to_db(x / dc)).collect()
    }

    /// Largest relative level (dB) over grid points with ω ∈ [lo, hi].
    pub fn peak_db_in(&self, lo: f64, hi: f64) -> Option<f64> {
        let dc = self.power[0];
        self.omega
            .iter()
            .zip(&self.power)
            .filter(|(w, _)| **w >= lo && **w <= hi)
            .map(|(_, &x)| to_db(x / dc))
            .reduce(f64::max)
    }
}

fn min_grid(len: usize) -> usize {
    16 * len
}

/// |P|² on the full period, ω_i = 2πi/grid_points.
pub fn dtft_power_full(p: impl AsRef<[f64]>, grid_points: usize) -> Result<Vec<f64>> {
    let p = p.as_ref();
    if grid_points < min_grid(p.len()) {
        return Err(Error::domain(format!(
            "DTFT grid of {grid_points} points is below the floor 16*L_p = {}",
            min_grid(p.len())
        )));
    }
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); grid_points];
    for (b, &x) in buf.iter_mut().zip(p) {
        b.re = x;
    }
    FftPlanner::new().plan_fft_forward(grid_points).process(&mut buf);
    Ok(buf.iter().map(|z| z.norm_sqr()).collect())
}

pub fn dtft_power(p: impl AsRef<[f64]>, grid_points: usize) -> Result<PowerSpectrum> {
    let full = dtft_power_full(p, grid_points)?;
    let count = grid_points / 2 + 1;
    let step = 2.0 * PI / grid_points as f64;
    Ok(PowerSpectrum { omega: (0..count).map(|i| i as f64 * step).collect(), power: full[..count].to_vec() })
}

/// |P(e^{jω})|² evaluated directly.
pub fn power_at(p: &[f64], omega: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (k, &x) in p.iter().enumerate() {
        let (s, c) = (omega * k as f64).sin_cos();
        re += x * c;
        im -= x * s;
    }
    re * re + im * im
}

/// Sidelobe levels relative to |P(e^{j0})|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sidelobes {
    /// First local maximum after the main lobe.
    pub first_db: f64,
    pub first_omega: f64,
    /// Largest local maximum after the main lobe.
    pub max_db: f64,
    pub max_omega: f64,
}

/// Locates sidelobe maxima on a dense grid and refines each one by golden
/// section on the directly evaluated |P|². The main lobe ends at the first
/// local minimum whose level is below half the DC power.
pub fn sidelobes(p: impl AsRef<[f64]>, grid_points: usize) -> Result<Option<Sidelobes>> {
    let p = p.as_ref();
    let spec = dtft_power(p, grid_points)?;
    let h = &spec.power;
    let dc = h[0];
    if !(dc > 0.0) {
        return Ok(None);
    }
    let n = h.len();
    let Some(lobe_end) = (1..n - 1).find(|&i| h[i] <= h[i - 1] && h[i] <= h[i + 1] && h[i] < 0.5 * dc) else {
        return Ok(None);
    };
    let step = spec.omega[1];
    let mut first: Option<(f64, f64)> = None;
    let mut best: Option<(f64, f64)> = None;
    for i in lobe_end + 1..n {
        let left = h[i - 1];
        let right = if i + 1 < n { h[i + 1] } else { h[i - 1] };
        if !(h[i] >= left && h[i] >= right && h[i] > left.min(right)) {
            continue;
        }
        let lo = spec.omega[i - 1];
        let hi = (spec.omega[i] + step).min(PI);
        let r = crate::search::golden_section(|w| -power_at(p, w), lo, hi, step * 1e-9);
        let level = (-r.value).max(h[i]);
        let cand = (level, r.x);
        if first.is_none() {
            first = Some(cand);
        }
        if best.is_none_or(|b| cand.0 > b.0) {
            best = Some(cand);
        }
    }
    Ok(first.zip(best).map(|(f, b)| Sidelobes {
        first_db: to_db(f.0 / dc),
        first_omega: f.1,
        max_db: to_db(b.0 / dc),
        max_omega: b.1,
    }))
}

/// Time/frequency spreads and the Heisenberg factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    pub d_k: f64,
    pub d_nu: f64,
    /// `None` when either spread is zero.
    pub xi: Option<f64>,
    /// Set when the raw ξ exceeded 1 + 1e−6 and was clipped to 1.
    pub xi_clipped: bool,
    /// Grid size at which the D_ν integral stabilized.
    pub grid_points: usize,
}

const MAX_DISPERSION_GRID: usize = 1 << 24;

/// D_k² = Σ k̲²p[k]², D_ν² = ∫ν²|P(e^{j2πν})|²dν over ν ∈ [−1/2, 1/2], each
/// divided by the pulse energy so that unnormalized input is tolerated.
pub fn dispersion(p: impl AsRef<[f64]>) -> Dispersion {
    let p = p.as_ref();
    let len = p.len();
    let energy: f64 = p.iter().map(|x| x * x).sum();
    let dk2: f64 = p.iter().enumerate().map(|(k, x)| centered_index(k, len).powi(2) * x * x).sum::<f64>() / energy;

    let mut grid = DEFAULT_GRID.max(min_grid(len).next_power_of_two());
    let mut prev = freq_second_moment(p, grid);
    loop {
        let next_grid = grid * 2;
        if next_grid > MAX_DISPERSION_GRID {
            break;
        }
        let next = freq_second_moment(p, next_grid);
        let done = (next.sqrt() - prev.sqrt()).abs() <= 1e-6 * next.sqrt();
        grid = next_grid;
        prev = next;
        if done {
            break;
        }
    }
    let d_k = dk2.sqrt();
    let d_nu = (prev / energy).sqrt();
    let (xi, xi_clipped) = if d_k > 0.0 && d_nu > 0.0 {
        let raw = 1.0 / (4.0 * PI * d_k * d_nu);
        if raw > 1.0 + 1e-6 {
            (Some(1.0), true)
        } else {
            (Some(raw), false)
        }
    } else {
        (None, false)
    };
    Dispersion { d_k, d_nu, xi, xi_clipped, grid_points: grid }
}

/// Trapezoidal ∫ν²|P|² over one period centred at zero.
fn freq_second_moment(p: &[f64], grid: usize) -> f64 {
    let full = dtft_power_full(p, grid).expect("grid above floor");
    let half = grid / 2;
    let mut acc = 0.0;
    for (i, &x) in full.iter().enumerate() {
        if i == half {
            continue;
        }
        let nu = if i < half { i as f64 } else { i as f64 - grid as f64 } / grid as f64;
        acc += nu * nu * x;
    }
    acc += 0.25 * full[half];
    acc / grid as f64
}

/// Ē(ω) for each band edge.
pub fn oob_sweep(p: impl AsRef<[f64]>, omegas: &[f64]) -> Vec<f64> {
    let p = p.as_ref();
    omegas.iter().map(|&w| oob_energy(p, w)).collect()
}
