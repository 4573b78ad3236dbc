//! Relaxed QCQP design with an outer golden-section search over ζ, the
//! rescaling of cosine-basis designs to other M, and the reconstruction-priority
//! refinement used for the OFDP-style pulse.

use std::f64::consts::PI;

use log::{debug, info, warn};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::filter::{centered_index, PrototypeFilter};
use crate::interference::{
    build_index_set, build_q_with, max_abs_epsilon, objective_matrix, q2_matrix, BasisFamily, BasisMatrix,
    InterferenceSystem,
};
use crate::qcqp::{solve, solve_or_certify, Inequality, Qcqp, SolveStatus, SolverSettings};
use crate::search::golden_section;
use crate::spectral::build_gamma;
use crate::tables;

/// One design problem: basis, band edge, tolerances and boundary set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    pub omega_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_s: Option<f64>,
    pub epsilon0: f64,
    pub u0: f64,
    pub boundary_set: Vec<usize>,
    pub delta: f64,
    pub family: BasisFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "type1")]
    TypeI,
    #[serde(rename = "type2")]
    TypeII,
    #[serde(rename = "type3")]
    TypeIII,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::TypeI, Preset::TypeII, Preset::TypeIII];

    pub fn key(self) -> &'static str {
        match self {
            Preset::TypeI => "type1",
            Preset::TypeII => "type2",
            Preset::TypeIII => "type3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.key() == s)
    }
}

impl DesignConfig {
    pub fn preset(preset: Preset, k: usize, m: usize) -> Self {
        let w = 2.0 * PI / m as f64;
        match preset {
            Preset::TypeI => DesignConfig {
                k,
                m,
                n: 2 * k,
                omega_c: w,
                omega_s: Some(w),
                epsilon0: 2e-4,
                u0: 1e-12,
                boundary_set: vec![0, 1],
                delta: 2.0,
                family: BasisFamily::Slepian,
            },
            Preset::TypeII | Preset::TypeIII => {
                let n = k + 1;
                DesignConfig {
                    k,
                    m,
                    n,
                    omega_c: k as f64 / n as f64 * w,
                    omega_s: None,
                    epsilon0: if preset == Preset::TypeII { 8e-5 } else { 2e-4 },
                    u0: 1e-12,
                    boundary_set: if preset == Preset::TypeII { vec![0] } else { vec![0, 1] },
                    delta: 2.0,
                    family: BasisFamily::Cosine,
                }
            }
        }
    }

    /// L_p = K·M + 1.
    pub fn filter_len(&self) -> usize {
        self.k * self.m + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.m == 0 || self.m % 2 != 0 {
            return Err(Error::config("K must be positive and M even and positive"));
        }
        if self.n == 0 || self.n >= self.filter_len() {
            return Err(Error::config(format!(
                "basis size N={} must satisfy 0 < N < L_p={}",
                self.n,
                self.filter_len()
            )));
        }
        if !(self.epsilon0 > 0.0) {
            return Err(Error::config("epsilon0 must be positive"));
        }
        if !(self.u0 >= 0.0) || !(self.delta >= 0.0) {
            return Err(Error::config("u0 and delta must be nonnegative"));
        }
        if !(self.omega_c > 0.0 && self.omega_c <= PI) {
            return Err(Error::config("omega_c must lie in (0, pi]"));
        }
        if let Some(&k) = self.boundary_set.iter().find(|&&k| k >= self.filter_len()) {
            return Err(Error::config(format!("boundary index {k} outside the filter")));
        }
        if self.family == BasisFamily::Slepian && self.omega_s.is_none() {
            return Err(Error::config("slepian family needs omega_s"));
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<BasisMatrix> {
        match self.family {
            BasisFamily::Slepian => {
                BasisMatrix::slepian(self.filter_len(), self.omega_s.unwrap_or(self.omega_c), self.n)
            }
            BasisFamily::Cosine => Ok(BasisMatrix::cosine(self.k, self.m, self.n)),
        }
    }
}

/// The assembled relaxed problem, minus the value of ζ.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: DesignConfig,
    pub system: InterferenceSystem,
    /// u_k = row k of F for each k in the boundary set.
    pub boundary_rows: Vec<DVector<f64>>,
}

pub fn assemble(config: &DesignConfig) -> Result<Problem> {
    assemble_with(config, Execution::default())
}

pub fn assemble_with(config: &DesignConfig, exec: Execution) -> Result<Problem> {
    config.validate()?;
    let basis = config.basis()?;
    let gamma = build_gamma(config.omega_c, config.filter_len())?;
    let system = build_q_with(&basis, config.m, config.delta, &gamma, exec)?;
    let boundary_rows = config.boundary_set.iter().map(|&k| DVector::from_vec(basis.row(k))).collect();
    Ok(Problem { config: config.clone(), system, boundary_rows })
}

impl Problem {
    pub fn n(&self) -> usize {
        self.config.n
    }

    /// Counts of (quadratic, affine boundary, equality, sign) constraints.
    pub fn constraint_counts(&self) -> (usize, usize, usize, usize) {
        (2 * self.system.index_set.len(), 2 * self.boundary_rows.len(), 1, self.n())
    }

    /// The convex program at a fixed ζ.
    pub fn qcqp(&self, zeta: f64) -> Qcqp {
        let n = self.n();
        let cfg = &self.config;
        let rhs = cfg.epsilon0 + cfg.delta;
        let mut ineq = Vec::new();
        for (a, b) in self.system.q3a.iter().zip(&self.system.q3b) {
            ineq.push(Inequality::quadratic(a.clone(), DVector::zeros(n), rhs));
            ineq.push(Inequality::quadratic(b.clone(), DVector::zeros(n), rhs));
        }
        for u in &self.boundary_rows {
            ineq.push(Inequality::affine(u.clone(), cfg.u0));
            ineq.push(Inequality::affine(-u, cfg.u0));
        }
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = -1.0;
            ineq.push(Inequality::affine(e, 0.0));
        }
        Qcqp {
            p: self.system.q0.clone(),
            q: DVector::zeros(n),
            ineq,
            eq_mat: DMatrix::from_element(1, n, 1.0),
            eq_rhs: DVector::from_element(1, zeta),
        }
    }

    /// ‖Fc‖² = cᵀFᵀFc.
    pub fn norm_sq(&self, c: &[f64]) -> f64 {
        let v = DVector::from_column_slice(c);
        v.dot(&(&self.system.gram * &v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub c: Vec<f64>,
    pub zeta: f64,
    pub family: BasisFamily,
    /// Filter length of the basis the coefficients refer to.
    pub len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignStatus {
    Optimal,
    /// Every tolerance met except the line-search floor of 1e−8.
    LineSearchGap,
    /// The interior-point solve stalled inside the acceptable residual band.
    Inaccurate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub objective: f64,
    pub kkt_residual: f64,
    pub max_constraint_violation: f64,
    pub line_search_value: f64,
    pub iterations: usize,
    pub status: DesignStatus,
}

fn to_report(problem: &Problem, sol: &crate::qcqp::Solution) -> SolveReport {
    let c: Vec<f64> = sol.x.iter().copied().collect();
    SolveReport {
        objective: sol.objective,
        kkt_residual: sol.kkt_residual,
        max_constraint_violation: sol.max_violation,
        line_search_value: (1.0 - problem.norm_sq(&c)).powi(2),
        iterations: sol.iterations,
        status: match sol.status {
            SolveStatus::Optimal => DesignStatus::Optimal,
            SolveStatus::Inaccurate => DesignStatus::Inaccurate,
        },
    }
}

pub fn solve_fixed_zeta(problem: &Problem, zeta: f64) -> Result<(CoefficientVector, SolveReport)> {
    let upper = (problem.n() as f64).sqrt();
    if !(zeta >= 1.0 - 1e-12 && zeta <= upper + 1e-12) {
        return Err(Error::domain(format!("zeta {zeta} outside [1, sqrt(N)] = [1, {upper}]")));
    }
    let sol = solve_or_certify(&problem.qcqp(zeta), &SolverSettings::default())?;
    let report = to_report(problem, &sol);
    let coeffs = CoefficientVector {
        c: sol.x.iter().copied().collect(),
        zeta,
        family: problem.config.family,
        len: problem.config.filter_len(),
    };
    Ok((coeffs, report))
}

#[derive(Debug, Clone)]
pub struct LineSearch {
    pub zeta_star: f64,
    pub coefficients: CoefficientVector,
    pub report: SolveReport,
    /// The uniform ζ samples and their line-search values (+∞ when infeasible).
    pub sweep: Vec<(f64, f64)>,
    /// Whether the sweep showed a single local-minimum region.
    pub unimodal: bool,
    pub evaluations: usize,
}

pub const SWEEP_POINTS: usize = 16;
pub const LINE_SEARCH_TARGET: f64 = 1e-8;
pub const LINE_SEARCH_FLOOR: f64 = 1e-6;

fn line_search_value(problem: &Problem, zeta: f64) -> f64 {
    match solve_fixed_zeta(problem, zeta) {
        Ok((_, r)) => r.line_search_value,
        Err(Error::Infeasible(_)) => f64::INFINITY,
        Err(e) => {
            warn!("zeta={zeta:.12}: {e}");
            f64::INFINITY
        }
    }
}

/// Indices of local-minimum regions in a sampled sequence (plateaus count once).
fn local_minima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[j + 1] == values[i] {
            j += 1;
        }
        let left_ok = i == 0 || values[i - 1] > values[i];
        let right_ok = j + 1 == n || values[j + 1] > values[i];
        if values[i].is_finite() && left_ok && right_ok {
            out.push(i);
        }
        i = j + 1;
    }
    out
}

pub fn golden_search(problem: &Problem, tol_zeta: f64) -> Result<LineSearch> {
    golden_search_with(problem, tol_zeta, Execution::default())
}

/// Uniform sweep over [1, √N] followed by golden-section refinement around
/// every local minimum of the sweep; the best refined point wins.
pub fn golden_search_with(problem: &Problem, tol_zeta: f64, exec: Execution) -> Result<LineSearch> {
    let hi = (problem.n() as f64).sqrt();
    let zetas: Vec<f64> = (0..SWEEP_POINTS).map(|i| 1.0 + (hi - 1.0) * i as f64 / (SWEEP_POINTS - 1) as f64).collect();
    let values = exec::map_slice(exec, &zetas, |&z| line_search_value(problem, z));
    let sweep: Vec<(f64, f64)> = zetas.iter().copied().zip(values.iter().copied()).collect();
    let minima = local_minima(&values);
    if minima.is_empty() {
        // every probe infeasible: surface the certificate from the midpoint
        return solve_fixed_zeta(problem, 0.5 * (1.0 + hi))
            .and_then(|_| Err(Error::numeric("line search found no finite objective on the zeta sweep")));
    }
    let unimodal = minima.len() == 1;
    if !unimodal {
        info!("zeta sweep has {} local-minimum regions; refining each", minima.len());
    }
    let mut evaluations = SWEEP_POINTS;
    let mut best = (f64::NAN, f64::INFINITY);
    for &i in &minima {
        let a = zetas[i.saturating_sub(1)];
        let b = zetas[(i + 1).min(SWEEP_POINTS - 1)];
        let r = golden_section(|z| line_search_value(problem, z), a, b, tol_zeta);
        evaluations += r.evaluations;
        let cand = if r.value <= values[i] { (r.x, r.value) } else { (zetas[i], values[i]) };
        debug!("bracket [{a:.6}, {b:.6}] -> zeta {:.12}, value {:.3e}", cand.0, cand.1);
        if cand.1 < best.1 {
            best = cand;
        }
    }
    let (zeta_star, floor) = best;
    let (coefficients, mut report) = solve_fixed_zeta(problem, zeta_star)?;
    if floor > LINE_SEARCH_FLOOR {
        return Err(Error::RelaxationGap {
            floor,
            zeta: zeta_star,
            norm_sq: problem.norm_sq(&coefficients.c),
            limit: LINE_SEARCH_FLOOR,
        });
    }
    if report.line_search_value > LINE_SEARCH_TARGET && report.status == DesignStatus::Optimal {
        report.status = DesignStatus::LineSearchGap;
    }
    Ok(LineSearch { zeta_star, coefficients, report, sweep, unimodal, evaluations })
}

#[derive(Debug, Clone)]
pub struct Design {
    /// Fc(ζ*) / ‖Fc(ζ*)‖₂.
    pub filter: PrototypeFilter,
    pub coefficients: CoefficientVector,
    pub report: SolveReport,
    /// ‖Fc(ζ*)‖₂ before the final renormalization.
    pub raw_norm: f64,
    pub max_abs_epsilon: f64,
    pub line_search: LineSearch,
}

pub const DEFAULT_TOL_ZETA: f64 = 1e-10;

pub fn design(config: &DesignConfig) -> Result<Design> {
    design_with(config, Execution::default())
}

pub fn design_with(config: &DesignConfig, exec: Execution) -> Result<Design> {
    let problem = assemble_with(config, exec)?;
    let ls = golden_search_with(&problem, DEFAULT_TOL_ZETA, exec)?;
    let samples = problem.system.basis.synthesize(&ls.coefficients.c);
    let raw = PrototypeFilter::new(samples, config.k, config.m, "designed")?;
    let raw_norm = raw.energy().sqrt();
    let mut filter = raw;
    filter.normalize()?;
    let max_eps = max_abs_epsilon(filter.samples(), config.m);
    if max_eps > config.epsilon0 + 1e-8 {
        warn!(
            "designed pulse has max |epsilon| = {max_eps:.3e} above epsilon0 = {:.1e} (the relaxation only bounds it by epsilon0 + delta(1 - ‖p‖²))",
            config.epsilon0
        );
    }
    Ok(Design {
        filter,
        coefficients: ls.coefficients.clone(),
        report: ls.report.clone(),
        raw_norm,
        max_abs_epsilon: max_eps,
        line_search: ls,
    })
}

/// Rebuilds a cosine-basis design at a new M:
/// c′₀ = 1, c′_i = √(2L/(L+1))·c_i/c₀ with L the original length, and
/// p[k] = Σ c′_i cos(2πi·k̲/(K·M_new)) on K·M_new + 1 samples.
pub fn rescale_filter(c: &CoefficientVector, k: usize, m_new: usize) -> Result<PrototypeFilter> {
    if c.family != BasisFamily::Cosine {
        return Err(Error::domain("rescaling is defined for cosine-basis designs only"));
    }
    if c.c.is_empty() || c.c[0] == 0.0 {
        return Err(Error::domain("rescaling needs a nonzero c0"));
    }
    let coeffs = rescaled_coefficients(c);
    let km = (k * m_new) as f64;
    let len = k * m_new + 1;
    let samples = (0..len)
        .map(|s| {
            let kb = centered_index(s, len);
            coeffs.iter().enumerate().map(|(i, ci)| ci * (2.0 * PI * i as f64 * kb / km).cos()).sum()
        })
        .collect();
    PrototypeFilter::normalized(samples, k, m_new, format!("rescaled:M={m_new}"))
}

/// The coefficients c′ of [`rescale_filter`].
pub fn rescaled_coefficients(c: &CoefficientVector) -> Vec<f64> {
    let l = c.len as f64;
    let scale = (2.0 * l / (l + 1.0)).sqrt();
    std::iter::once(1.0).chain(c.c[1..].iter().map(|ci| scale * ci / c.c[0])).collect()
}

/// A preset filter synthesized from its reference weights.
#[derive(Debug, Clone)]
pub struct Tabulated {
    pub filter: PrototypeFilter,
    pub coefficients: CoefficientVector,
}

/// Reference weights for a preset (K=4, M=32) mapped onto the crate's basis.
pub fn tabulated(preset: Preset) -> Result<Tabulated> {
    let cfg = DesignConfig::preset(preset, 4, 32);
    let basis = cfg.basis()?;
    let c: Vec<f64> = match preset {
        Preset::TypeI => tables::TYPE_I_WEIGHTS.iter().zip(tables::TYPE_I_POLARITY).map(|(w, s)| w * s).collect(),
        Preset::TypeII => tables::TYPE_II_WEIGHTS.to_vec(),
        Preset::TypeIII => tables::TYPE_III_WEIGHTS.to_vec(),
    };
    let samples = basis.synthesize(&c);
    let label = format!("tabulated:{}", preset.key());
    let filter = PrototypeFilter::normalized(samples, cfg.k, cfg.m, label)?;
    let zeta = c.iter().sum();
    Ok(Tabulated { filter, coefficients: CoefficientVector { c, zeta, family: cfg.family, len: cfg.filter_len() } })
}

/// Settings of the reconstruction-priority refinement.
#[derive(Debug, Clone)]
pub struct RefineConfig {
    pub omega_c: f64,
    pub epsilon0: f64,
    /// Initial weight of the constraint-violation penalty.
    pub tau0: f64,
    pub tau_growth: f64,
    pub tau_max: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl RefineConfig {
    pub fn new(omega_c: f64, epsilon0: f64) -> Self {
        RefineConfig { omega_c, epsilon0, tau0: 1.0, tau_growth: 2.0, tau_max: 1e8, max_iter: 300, tol: 1e-11 }
    }
}

#[derive(Debug, Clone)]
pub struct RefineOutput {
    /// Unit-energy coefficients (cᵀFᵀFc = 1).
    pub coefficients: Vec<f64>,
    pub samples: Vec<f64>,
    pub iterations: usize,
    pub max_abs_epsilon: f64,
    pub objective: f64,
}

/// Minimizes Ē(ω_c) over unit-energy p = Fc with every |ε_{m,n}| ≤ ε₀ enforced
/// exactly rather than through the ζ relaxation.
///
/// Each constraint ±cᵀQ⁽²⁾c − ε₀cᵀGc ≤ 0 (G = FᵀF) is split by eigenvalue sign
/// into a difference of PSD quadratics, and cᵀGc ≥ 1 is concave on the wrong
/// side as well. Every pass linearizes the concave parts at the current point
/// and solves the convex QCQP; while the current point is infeasible the
/// linearized constraints get a slack t ≥ 0 penalized by a growing weight.
/// The iterate is rescaled to unit energy after every pass. No sign or
/// boundary constraints are imposed.
pub fn reconstruction_priority(basis: &BasisMatrix, big_m: usize, cfg: &RefineConfig) -> Result<RefineOutput> {
    if !(cfg.epsilon0 > 0.0) || !(cfg.tau0 > 0.0) || !(cfg.tau_growth >= 1.0) {
        return Err(Error::config("refinement needs epsilon0 > 0, tau0 > 0 and tau_growth >= 1"));
    }
    let len = basis.len();
    let gamma = build_gamma(cfg.omega_c, len)?;
    let q0 = objective_matrix(basis, &gamma);
    let n = basis.n();
    let g = basis.gram();
    let energy = |c: &DVector<f64>| c.dot(&(&g * c));

    // ±Q2 − ε₀G split into PSD parts S⁺ − S⁻.
    let index_set = build_index_set(big_m, len);
    let splits: Vec<(DMatrix<f64>, DMatrix<f64>)> = index_set
        .iter()
        .flat_map(|&(m, k)| {
            let q2 = q2_matrix(basis, m, k, big_m);
            [&q2 - &g * cfg.epsilon0, -&q2 - &g * cfg.epsilon0]
        })
        .map(|s| {
            let eig = SymmetricEigen::new(s);
            let pos = eig.eigenvalues.map(|v| v.max(0.0));
            let neg = eig.eigenvalues.map(|v| (-v).max(0.0));
            let v = &eig.eigenvectors;
            let part = |d: DVector<f64>| {
                let m = v * DMatrix::from_diagonal(&d) * v.transpose();
                (&m + m.transpose()) * 0.5
            };
            (part(pos), part(neg))
        })
        .collect();

    let mut c = DVector::zeros(n);
    c[0] = 1.0;
    c /= energy(&c).sqrt();
    let mut tau = cfg.tau0;
    // With `slack` the variable is (c, t); without it the pass is a plain
    // convex-concave step from a feasible point.
    let subproblem = |c: &DVector<f64>, tau: f64, slack: bool| {
        let dim = n + usize::from(slack);
        let pad_mat = |a: &DMatrix<f64>| {
            let mut big = DMatrix::zeros(dim, dim);
            big.view_mut((0, 0), (n, n)).copy_from(a);
            big
        };
        let pad_vec = |v: &DVector<f64>, t: f64| {
            let mut out = DVector::zeros(dim);
            out.rows_mut(0, n).copy_from(v);
            if slack {
                out[n] = t;
            }
            out
        };
        let mut ineq = Vec::with_capacity(splits.len() + 2);
        // xᵀS⁺x − (2(S⁻c_k)ᵀx − c_kᵀS⁻c_k) − t ≤ 0
        for (pos, neg) in &splits {
            let nc = neg * c;
            ineq.push(Inequality::quadratic(pad_mat(pos), pad_vec(&(&nc * -2.0), -1.0), -c.dot(&nc)));
        }
        // 1 − (2(Gc_k)ᵀx − c_kᵀGc_k) − t ≤ 0
        let gc = &g * c;
        ineq.push(Inequality::affine(pad_vec(&(&gc * -2.0), -1.0), -1.0 - c.dot(&gc)));
        if slack {
            ineq.push(Inequality::affine(pad_vec(&DVector::zeros(n), -1.0), 0.0));
        }
        let pr = Qcqp {
            p: pad_mat(&q0),
            q: pad_vec(&DVector::zeros(n), tau),
            ineq,
            eq_mat: DMatrix::zeros(0, dim),
            eq_rhs: DVector::zeros(0),
        };
        let mut x0 = pad_vec(c, 0.0);
        if slack {
            x0[n] = pr.ineq.iter().map(|q| q.value(&x0)).fold(0.0, f64::max) + 1.0;
        }
        (pr, x0)
    };
    // Worst original constraint ±cᵀQ2c − ε₀cᵀGc.
    let excess = |c: &DVector<f64>| {
        splits.iter().map(|(pos, neg)| c.dot(&(pos * c)) - c.dot(&(neg * c))).fold(f64::NEG_INFINITY, f64::max)
    };

    let mut iterations = 0;
    let mut last_t = f64::INFINITY;
    for it in 0..cfg.max_iter {
        iterations = it + 1;
        let slack = excess(&c) > 0.0;
        let (pr, x0) = subproblem(&c, tau, slack);
        let sol = solve(&pr, Some(&x0), &SolverSettings::default())?;
        let mut next = sol.x.rows(0, n).into_owned();
        last_t = if slack { sol.x[n].max(0.0) } else { 0.0 };
        next /= energy(&next).sqrt();
        let step = (&next - &c).amax();
        c = next;
        debug!("refine pass {it}: tau={tau:.1e} slack={slack} t={last_t:.3e} step={step:.3e}");
        if step <= cfg.tol && last_t <= 1e-12 {
            break;
        }
        if slack {
            tau = (tau * cfg.tau_growth).min(cfg.tau_max);
        }
    }
    if c[0] < 0.0 {
        c = -c;
    }
    let coefficients: Vec<f64> = c.iter().copied().collect();
    let samples = basis.synthesize(&coefficients);
    let max_eps = max_abs_epsilon(&samples, big_m);
    if max_eps > cfg.epsilon0 + 1e-8 || last_t > 1e-8 {
        return Err(Error::numeric(format!(
            "refinement did not reach the interference bound: max |epsilon| {max_eps:.3e}, slack {last_t:.3e} after {iterations} passes"
        )));
    }
    let objective = c.dot(&(&q0 * &c));
    Ok(RefineOutput { coefficients, samples, iterations, max_abs_epsilon: max_eps, objective })
}
