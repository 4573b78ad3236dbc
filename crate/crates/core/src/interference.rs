//! Interference coefficients ε_{m,n}, the Q-matrix chain and analytic SIR.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::filter::centered_index;
use crate::spectral::{dpss, to_db, GammaMatrix};

/// cos((π/2)·j) for integer j, exactly.
pub fn quarter_cos(j: i64) -> f64 {
    match j.rem_euclid(4) {
        0 => 1.0,
        2 => -1.0,
        _ => 0.0,
    }
}

/// sin((π/2)·j) for integer j, exactly.
pub fn quarter_sin(j: i64) -> f64 {
    match j.rem_euclid(4) {
        1 => 1.0,
        3 => -1.0,
        _ => 0.0,
    }
}

/// ε_{m,n} = cos(φ_{m,n})·Σ_k p[k−nM/2]·p[k]·cos((2π/M)·m·k̲), φ_{m,n} = (π/2)(m+n).
/// Shifts beyond the filter support give exactly zero.
pub fn epsilon(p: &[f64], m: i64, n: i64, big_m: usize) -> f64 {
    let phase = quarter_cos(m + n);
    if phase == 0.0 {
        return 0.0;
    }
    let len = p.len() as i64;
    let s = n * big_m as i64 / 2;
    if s.abs() >= len {
        return 0.0;
    }
    let theta = 2.0 * PI * m as f64 / big_m as f64;
    let mut acc = 0.0;
    for k in s.max(0)..len.min(len + s) {
        let kb = centered_index(k as usize, p.len());
        acc += p[(k - s) as usize] * p[k as usize] * (theta * kb).cos();
    }
    phase * acc
}

/// The reduced index set 𝓔, sorted lexicographically.
pub fn build_index_set(big_m: usize, len: usize) -> Vec<(usize, usize)> {
    let half = big_m / 2;
    let n_max = (len - 1).div_ceil(half) - 1;
    let mut out = Vec::new();
    for m in 0..=half {
        for n in 0..=n_max {
            if (m + n) % 2 == 0 && m + n != 0 {
                out.push((m, n));
            }
        }
    }
    out
}

/// Π_n: entry (i, j) = 1 iff j = i + n·M/2. Negative n gives the transpose.
pub fn shift_matrix(n: i64, big_m: usize, len: usize) -> DMatrix<f64> {
    let s = n * big_m as i64 / 2;
    DMatrix::from_fn(len, len, |i, j| if j as i64 == i as i64 + s { 1.0 } else { 0.0 })
}

/// Σ_m = diag(cos((2π/M)·m·k̲)).
pub fn cosine_mod_matrix(m: i64, big_m: usize, len: usize) -> DMatrix<f64> {
    let theta = 2.0 * PI * m as f64 / big_m as f64;
    DMatrix::from_diagonal(&nalgebra::DVector::from_fn(len, |k, _| (theta * centered_index(k, len)).cos()))
}

/// Q⁽¹⁾_{m,n} = ½(Q⁽⁰⁾ + Q⁽⁰⁾ᵀ) with Q⁽⁰⁾ = cos(φ)·Σ_m·Π_n, built densely.
pub fn q1_matrix(m: usize, n: usize, big_m: usize, len: usize) -> DMatrix<f64> {
    let q0 = cosine_mod_matrix(m as i64, big_m, len) * shift_matrix(n as i64, big_m, len) * quarter_cos((m + n) as i64);
    (&q0 + q0.transpose()) * 0.5
}

/// Largest Gershgorin off-diagonal row sum of a matrix.
pub fn gershgorin_offdiag(a: &DMatrix<f64>) -> f64 {
    (0..a.nrows()).map(|i| (0..a.ncols()).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisFamily {
    Slepian,
    Cosine,
}

/// The L_p×N matrix F whose columns span the designed filters.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    pub columns: DMatrix<f64>,
    pub family: BasisFamily,
    /// Band of the generating Γ(ω_s) for the slepian family.
    pub omega_s: Option<f64>,
}

impl BasisMatrix {
    /// Columns ψ_{0}, ψ_{2}, …, ψ_{2(N−1)} of Γ(ω_s).
    pub fn slepian(len: usize, omega_s: f64, n: usize) -> Result<Self> {
        let b = dpss(len, omega_s, 2 * n)?;
        let columns = DMatrix::from_fn(len, n, |k, i| b.vectors[(k, 2 * i)]);
        Ok(BasisMatrix { columns, family: BasisFamily::Slepian, omega_s: Some(omega_s) })
    }

    /// f₀ = 1/√(KM+1), f_i = √(2/(KM+2))·cos(2πi·k̲/(KM)) on L_p = KM+1 samples.
    pub fn cosine(k: usize, big_m: usize, n: usize) -> Self {
        let km = (k * big_m) as f64;
        let len = k * big_m + 1;
        let c0 = 1.0 / (km + 1.0).sqrt();
        let ci = (2.0 / (km + 2.0)).sqrt();
        let columns = DMatrix::from_fn(len, n, |row, i| {
            if i == 0 {
                c0
            } else {
                ci * (2.0 * PI * i as f64 * centered_index(row, len) / km).cos()
            }
        });
        BasisMatrix { columns, family: BasisFamily::Cosine, omega_s: None }
    }

    pub fn len(&self) -> usize {
        self.columns.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.nrows() == 0
    }

    pub fn n(&self) -> usize {
        self.columns.ncols()
    }

    /// p = Fc.
    pub fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        let v = &self.columns * nalgebra::DVector::from_column_slice(c);
        v.iter().copied().collect()
    }

    /// FᵀF.
    pub fn gram(&self) -> DMatrix<f64> {
        self.columns.transpose() * &self.columns
    }

    /// Row k of F, so that p[k] = u_kᵀc.
    pub fn row(&self, k: usize) -> Vec<f64> {
        self.columns.row(k).iter().copied().collect()
    }
}

/// The interference constraints of the relaxed design problem.
#[derive(Debug, Clone)]
pub struct InterferenceSystem {
    pub index_set: Vec<(usize, usize)>,
    /// Objective matrix Fᵀ(I − Γ(ω_c))F.
    pub q0: DMatrix<f64>,
    /// Q⁽²⁾ for each entry of `index_set`, in the same order.
    pub q2: Vec<DMatrix<f64>>,
    pub q3a: Vec<DMatrix<f64>>,
    pub q3b: Vec<DMatrix<f64>>,
    pub delta: f64,
    pub gram: DMatrix<f64>,
    pub basis: BasisMatrix,
    pub big_m: usize,
}

/// Q⁽²⁾ = FᵀQ⁽¹⁾F, accumulated without forming the L_p×L_p matrices.
pub fn q2_matrix(basis: &BasisMatrix, m: usize, n: usize, big_m: usize) -> DMatrix<f64> {
    let f = &basis.columns;
    let (len, nb) = f.shape();
    let s = n * big_m / 2;
    let phase = quarter_cos((m + n) as i64);
    let mut a = DMatrix::zeros(nb, nb);
    if phase == 0.0 || s >= len {
        return a;
    }
    let theta = 2.0 * PI * m as f64 / big_m as f64;
    for i in 0..len - s {
        let w = (theta * centered_index(i, len)).cos();
        for r in 0..nb {
            let fr = w * f[(i, r)];
            for c in 0..nb {
                a[(r, c)] += fr * f[(i + s, c)];
            }
        }
    }
    (&a + a.transpose()) * (0.5 * phase)
}

/// Fᵀ(I − Γ(ω_c))F, symmetrized.
pub fn objective_matrix(basis: &BasisMatrix, gamma: &GammaMatrix) -> DMatrix<f64> {
    let mut comp = -gamma.entries.clone();
    for i in 0..comp.nrows() {
        comp[(i, i)] = 1.0 - gamma.omega_c / PI;
    }
    let q0 = basis.columns.transpose() * comp * &basis.columns;
    (&q0 + q0.transpose()) * 0.5
}

fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn build_q(basis: &BasisMatrix, big_m: usize, delta: f64, gamma: &GammaMatrix) -> Result<InterferenceSystem> {
    build_q_with(basis, big_m, delta, gamma, Execution::default())
}

pub fn build_q_with(
    basis: &BasisMatrix,
    big_m: usize,
    delta: f64,
    gamma: &GammaMatrix,
    exec: Execution,
) -> Result<InterferenceSystem> {
    if !(delta >= 0.0) {
        return Err(Error::domain(format!("delta must be nonnegative, got {delta}")));
    }
    let len = basis.len();
    if gamma.entries.nrows() != len {
        return Err(Error::domain("Gamma size does not match the basis length"));
    }
    let index_set = build_index_set(big_m, len);
    let gram = basis.gram();
    let q2 = exec::map_slice(exec, &index_set, |&(m, n)| q2_matrix(basis, m, n, big_m));

    let shifted: Vec<(DMatrix<f64>, DMatrix<f64>, f64, f64)> = exec::map_slice(exec, &q2, |q| {
        let a = q + &gram * delta;
        let b = -q + &gram * delta;
        let (ea, eb) = (min_eigenvalue(&a), min_eigenvalue(&b));
        (a, b, ea, eb)
    });
    let mut q3a = Vec::with_capacity(q2.len());
    let mut q3b = Vec::with_capacity(q2.len());
    for ((a, b, ea, eb), &(m, n)) in shifted.into_iter().zip(&index_set) {
        if ea < -1e-9 || eb < -1e-9 {
            return Err(Error::config(format!(
                "shifted constraint matrix for (m,n)=({m},{n}) is not PSD at delta={delta} \
                 (min eigenvalues {ea:.3e}, {eb:.3e}); increase delta"
            )));
        }
        q3a.push(a);
        q3b.push(b);
    }

    let q0 = objective_matrix(basis, gamma);
    Ok(InterferenceSystem { index_set, q0, q2, q3a, q3b, delta, gram, basis: basis.clone(), big_m })
}

impl InterferenceSystem {
    /// Smallest δ ≥ 0 (to `tol`) making every ±Q⁽²⁾ + δFᵀF PSD. Diagnostic only.
    pub fn min_delta(&self, tol: f64) -> f64 {
        let ok = |d: f64| {
            self.q2.iter().all(|q| {
                min_eigenvalue(&(q + &self.gram * d)) >= -1e-12 && min_eigenvalue(&(-q + &self.gram * d)) >= -1e-12
            })
        };
        let mut hi = 1.0;
        while !ok(hi) {
            hi *= 2.0;
            if hi > 1e6 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        if ok(lo) {
            return 0.0;
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// Largest n with a nonzero overlap, ⌈L_p/(M/2)⌉ − 1.
pub fn max_overlap(big_m: usize, len: usize) -> usize {
    len.div_ceil(big_m / 2) - 1
}

/// Σ ε_{m,n}² over all (m,n) ≠ (0,0), expanded from the half-plane 0 ≤ m ≤ M/2,
/// n ≥ 0 by the symmetries of a symmetric pulse.
///
/// | term                    | multiplicity | reason             |
/// |-------------------------|--------------|--------------------|
/// | m ∈ {0, M/2}, n = 0     | 1            | unique             |
/// | m ∈ {0, M/2}, n ≥ 1     | 2            | ε_{m,−n} = ε_{m,n} |
/// | 1 ≤ m < M/2, n = 0      | 2            | \|ε_{M−m,n}\| = \|ε_{m,n}\| |
/// | 1 ≤ m < M/2, n ≥ 1      | 4            | both of the above  |
///
/// Pairs with m + n odd vanish and are skipped.
pub fn interference_power(p: &[f64], big_m: usize) -> f64 {
    let half = big_m / 2;
    let n_max = max_overlap(big_m, p.len());
    let mut acc = 0.0;
    for m in 0..=half {
        let mult_m = if m == 0 || m == half { 1.0 } else { 2.0 };
        for n in 0..=n_max {
            if (m + n) % 2 == 1 || m + n == 0 {
                continue;
            }
            let mult_n = if n == 0 { 1.0 } else { 2.0 };
            let e = epsilon(p, m as i64, n as i64, big_m);
            acc += mult_m * mult_n * e * e;
        }
    }
    acc
}

/// SIR = ε₀,₀² / Σ ε², in dB; +∞ when there is no interference.
pub fn analytic_sir(p: &[f64], big_m: usize) -> f64 {
    let i = interference_power(p, big_m);
    let s = epsilon(p, 0, 0, big_m).powi(2);
    if i == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (s / i).log10()
    }
}

/// Largest |ε_{m,n}| over 𝓔.
pub fn max_abs_epsilon(p: &[f64], big_m: usize) -> f64 {
    build_index_set(big_m, p.len())
        .iter()
        .map(|&(m, n)| epsilon(p, m as i64, n as i64, big_m).abs())
        .fold(0.0, f64::max)
}

/// SIR expressed in dB with the crate-wide floor.
pub fn sir_db_from_power(signal: f64, interference: f64) -> f64 {
    if interference == 0.0 {
        f64::INFINITY
    } else {
        to_db(signal / interference)
    }
}
