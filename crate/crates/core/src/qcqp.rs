//! Primal-dual interior-point solver for small convex QCQPs.
//!
//! Problem form:
//!
//! ```text
//! minimize    xᵀPx + qᵀx
//! subject to  xᵀA_i x + a_iᵀx ≤ b_i      (A_i PSD; A_i = 0 for affine rows)
//!             Ex = d
//! ```
//!
//! Inequalities get slacks s > 0 and multipliers λ > 0; each iteration takes
//! a Mehrotra predictor-corrector Newton step on the perturbed KKT system,
//! reduced to the (n + p) system `[H + JᵀS⁻¹ΛJ, Eᵀ; E, 0]`. Steps are cut back
//! by fraction-to-boundary and then by backtracking on the residual norm,
//! since curvature of the quadratic rows makes the linearized step inexact.
//!
//! Infeasibility is decided by a phase-one problem (minimize t subject to
//! f_i(x) ≤ t); its multipliers give a dual bound that certifies emptiness.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// xᵀAx + aᵀx ≤ b. `a_mat = None` marks an affine row.
#[derive(Debug, Clone)]
pub struct Inequality {
    pub a_mat: Option<DMatrix<f64>>,
    pub a_vec: DVector<f64>,
    pub b: f64,
}

impl Inequality {
    pub fn quadratic(a_mat: DMatrix<f64>, a_vec: DVector<f64>, b: f64) -> Self {
        Inequality { a_mat: Some(a_mat), a_vec, b }
    }

    pub fn affine(a_vec: DVector<f64>, b: f64) -> Self {
        Inequality { a_mat: None, a_vec, b }
    }

    /// f(x) = xᵀAx + aᵀx − b.
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let lin = self.a_vec.dot(x) - self.b;
        match &self.a_mat {
            Some(a) => x.dot(&(a * x)) + lin,
            None => lin,
        }
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.a_mat {
            Some(a) => a * x * 2.0 + &self.a_vec,
            None => self.a_vec.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Qcqp {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    pub ineq: Vec<Inequality>,
    pub eq_mat: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
}

impl Qcqp {
    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.p * x)) + self.q.dot(x)
    }

    fn check(&self) -> Result<()> {
        let n = self.dim();
        if self.p.ncols() != n || self.q.len() != n {
            return Err(Error::domain("objective dimensions disagree"));
        }
        if self.eq_mat.ncols() != n || self.eq_mat.nrows() != self.eq_rhs.len() {
            return Err(Error::domain("equality dimensions disagree"));
        }
        for g in &self.ineq {
            if g.a_vec.len() != n || g.a_mat.as_ref().is_some_and(|a| a.shape() != (n, n)) {
                return Err(Error::domain("inequality dimensions disagree"));
            }
        }
        Ok(())
    }

    /// Largest violation over inequalities and equalities at `x`.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let ineq = self.ineq.iter().map(|g| g.value(x).max(0.0)).fold(0.0, f64::max);
        let eq = (&self.eq_mat * x - &self.eq_rhs).amax();
        ineq.max(eq)
    }

    /// max(‖∇L‖∞, max_i |λ_i f_i(x)|) for the given multipliers.
    pub fn kkt_residual(&self, x: &DVector<f64>, lambda: &[f64], nu: &DVector<f64>) -> f64 {
        let mut grad = &self.p * x * 2.0 + &self.q + self.eq_mat.transpose() * nu;
        let mut comp: f64 = 0.0;
        for (g, &l) in self.ineq.iter().zip(lambda) {
            grad += g.gradient(x) * l;
            comp = comp.max((l * g.value(x)).abs());
        }
        grad.amax().max(comp)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    pub max_iter: usize,
    /// Relative tolerance on the scaled residuals and the duality measure.
    pub tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { max_iter: 200, tol: 1e-13 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Residuals stalled above the target but within the acceptable band.
    Inaccurate,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: DVector<f64>,
    pub lambda: Vec<f64>,
    pub nu: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub max_violation: f64,
    pub status: SolveStatus,
}

/// Dual certificate that the feasible set is empty: for every x,
/// Σλ_i f_i(x) + νᵀ(Ex − d) ≥ `dual_bound` > 0, which no feasible x allows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    pub lambda: Vec<f64>,
    pub nu: Vec<f64>,
    pub dual_bound: f64,
    /// Optimal value of the phase-one problem (largest violation that cannot be avoided).
    pub phase_one_value: f64,
}

impl InfeasibilityCertificate {
    /// Recomputes the dual bound from the multipliers.
    pub fn verify(&self, problem: &Qcqp) -> f64 {
        dual_bound(problem, &self.lambda, &DVector::from_column_slice(&self.nu))
    }
}

/// inf_x Σλ_i f_i(x) + νᵀ(Ex − d) in closed form. Components of the linear
/// term along null directions of ΣλA below 1e−9 are treated as rounding.
pub fn dual_bound(problem: &Qcqp, lambda: &[f64], nu: &DVector<f64>) -> f64 {
    let n = problem.dim();
    let mut a = DMatrix::zeros(n, n);
    let mut g = problem.eq_mat.transpose() * nu;
    let mut c = -nu.dot(&problem.eq_rhs);
    for (ineq, &l) in problem.ineq.iter().zip(lambda) {
        if let Some(m) = &ineq.a_mat {
            a += m * l;
        }
        g += &ineq.a_vec * l;
        c -= l * ineq.b;
    }
    let eig = SymmetricEigen::new(a);
    let scale = eig.eigenvalues.amax().max(1.0);
    let mut bound = c;
    for j in 0..n {
        let gj = eig.eigenvectors.column(j).dot(&g);
        let lj = eig.eigenvalues[j];
        if lj > 1e-12 * scale {
            bound -= gj * gj / (4.0 * lj);
        } else if gj.abs() > 1e-9 {
            return f64::NEG_INFINITY;
        }
    }
    bound
}

/// Least-norm solution of Ex = d (or zero without equalities).
fn least_norm(e: &DMatrix<f64>, d: &DVector<f64>) -> Result<DVector<f64>> {
    let n = e.ncols();
    if e.nrows() == 0 {
        return Ok(DVector::zeros(n));
    }
    let eet = e * e.transpose();
    let y = eet.lu().solve(d).ok_or_else(|| Error::numeric("equality constraints are rank deficient"))?;
    Ok(e.transpose() * y)
}

struct Iterate {
    x: DVector<f64>,
    s: DVector<f64>,
    lambda: DVector<f64>,
    nu: DVector<f64>,
}

struct Residuals {
    dual: DVector<f64>,
    primal: DVector<f64>,
    eq: DVector<f64>,
    jac: DMatrix<f64>,
}

fn residuals(pr: &Qcqp, it: &Iterate) -> Residuals {
    let m = pr.ineq.len();
    let n = pr.dim();
    let mut jac = DMatrix::zeros(m, n);
    let mut values = DVector::zeros(m);
    for (i, g) in pr.ineq.iter().enumerate() {
        values[i] = g.value(&it.x);
        jac.row_mut(i).copy_from(&g.gradient(&it.x).transpose());
    }
    let dual = &pr.p * &it.x * 2.0 + &pr.q + jac.transpose() * &it.lambda + pr.eq_mat.transpose() * &it.nu;
    let primal = &values + &it.s;
    let eq = &pr.eq_mat * &it.x - &pr.eq_rhs;
    Residuals { dual, primal, eq, jac }
}

fn merit(r: &Residuals, it: &Iterate, target: f64) -> f64 {
    let comp: f64 = it.s.iter().zip(it.lambda.iter()).map(|(s, l)| (s * l - target).powi(2)).sum();
    r.dual.norm_squared() + r.primal.norm_squared() + r.eq.norm_squared() + comp
}

fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter().zip(dv.iter()).filter(|(_, &d)| d < 0.0).map(|(&x, &d)| -x / d).fold(1.0, f64::min)
}

/// Solves the reduced KKT system with two rounds of iterative refinement.
fn kkt_solve(
    k: &DMatrix<f64>,
    lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    rhs: &DVector<f64>,
) -> Option<DVector<f64>> {
    let mut sol = lu.solve(rhs)?;
    for _ in 0..2 {
        let r = rhs - k * &sol;
        let corr = lu.solve(&r)?;
        sol += corr;
    }
    sol.iter().all(|v| v.is_finite()).then_some(sol)
}

/// Runs the interior-point method from `x0` (or the least-norm point).
/// (dx, ds, dλ, dν) of one Newton step.
type Step = (DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>);

pub fn solve(pr: &Qcqp, x0: Option<&DVector<f64>>, settings: &SolverSettings) -> Result<Solution> {
    pr.check()?;
    let n = pr.dim();
    let m = pr.ineq.len();
    let p_eq = pr.eq_mat.nrows();
    let x = match x0 {
        Some(x) => x.clone(),
        None => least_norm(&pr.eq_mat, &pr.eq_rhs)?,
    };
    let mut it = Iterate {
        s: DVector::from_iterator(m, pr.ineq.iter().map(|g| (-g.value(&x)).max(1.0))),
        lambda: DVector::from_element(m, 1.0),
        nu: DVector::zeros(p_eq),
        x,
    };

    let b_scale = 1.0 + pr.ineq.iter().map(|g| g.b.abs()).fold(0.0, f64::max);
    let d_scale = 1.0 + pr.eq_rhs.amax();
    let mut best: Option<(f64, Solution)> = None;
    let mut stall = 0;

    for iter in 0..settings.max_iter {
        let r = residuals(pr, &it);
        let mu = if m > 0 { it.s.dot(&it.lambda) / m as f64 } else { 0.0 };
        let grad_scale = 1.0 + (&pr.p * &it.x * 2.0 + &pr.q).amax();

        let lambda_vec: Vec<f64> = it.lambda.iter().copied().collect();
        let kkt = pr.kkt_residual(&it.x, &lambda_vec, &it.nu);
        let viol = pr.max_violation(&it.x);
        let score = kkt.max(viol);
        if best.as_ref().is_none_or(|(b, _)| score < 0.999 * *b) {
            stall = 0;
            best = Some((
                score,
                Solution {
                    x: it.x.clone(),
                    lambda: lambda_vec,
                    nu: it.nu.clone(),
                    objective: pr.objective(&it.x),
                    iterations: iter,
                    kkt_residual: kkt,
                    max_violation: viol,
                    status: SolveStatus::Optimal,
                },
            ));
        } else if score < 1e-8 {
            stall += 1;
        }
        log::trace!(
            "ipm {iter}: mu={mu:.3e} dual={:.3e} primal={:.3e} eq={:.3e} kkt={kkt:.3e}",
            r.dual.amax(),
            r.primal.amax(),
            r.eq.amax()
        );

        let converged = r.dual.amax() <= settings.tol * grad_scale
            && r.primal.amax() <= settings.tol * b_scale
            && r.eq.amax() <= settings.tol * d_scale
            && mu <= settings.tol * grad_scale
            && viol <= 1e-12 * b_scale;
        if converged || stall >= 8 {
            break;
        }
        if !it.lambda.iter().chain(it.s.iter()).all(|v| v.is_finite()) || it.lambda.amax() > 1e14 {
            break;
        }

        // reduced KKT matrix
        let w = it.lambda.component_div(&it.s);
        let mut h = &pr.p * 2.0;
        for (g, &l) in pr.ineq.iter().zip(it.lambda.iter()) {
            if let Some(a) = &g.a_mat {
                h += a * (2.0 * l);
            }
        }
        let jw = DMatrix::from_fn(m, n, |i, j| r.jac[(i, j)] * w[i]);
        h += r.jac.transpose() * jw;
        let dim = n + p_eq;
        let mut k = DMatrix::zeros(dim, dim);
        k.view_mut((0, 0), (n, n)).copy_from(&h);
        k.view_mut((0, n), (n, p_eq)).copy_from(&pr.eq_mat.transpose());
        k.view_mut((n, 0), (p_eq, n)).copy_from(&pr.eq_mat);
        let lu = k.clone().lu();

        let direction = |rc: &DVector<f64>| -> Option<Step> {
            // dλ = S⁻¹(−rc + Λ r_p + Λ J dx)
            let t = (-rc + it.lambda.component_mul(&r.primal)).component_div(&it.s);
            let top = -&r.dual - r.jac.transpose() * &t;
            let mut rhs = DVector::zeros(dim);
            rhs.rows_mut(0, n).copy_from(&top);
            rhs.rows_mut(n, p_eq).copy_from(&(-&r.eq));
            let sol = kkt_solve(&k, &lu, &rhs)?;
            let dx = sol.rows(0, n).into_owned();
            let dnu = sol.rows(n, p_eq).into_owned();
            let jdx = &r.jac * &dx;
            let ds = -&r.primal - &jdx;
            let dl = t + w.component_mul(&jdx);
            Some((dx, ds, dl, dnu))
        };

        let rc_aff = it.s.component_mul(&it.lambda);
        let Some((_, ds_a, dl_a, _)) = direction(&rc_aff) else {
            break;
        };
        let a_aff = max_step(&it.s, &ds_a).min(max_step(&it.lambda, &dl_a));
        let mu_aff = if m > 0 { (&it.s + &ds_a * a_aff).dot(&(&it.lambda + &dl_a * a_aff)) / m as f64 } else { 0.0 };
        let sigma = if mu > 0.0 { (mu_aff / mu).powi(3).clamp(0.0, 1.0) } else { 0.0 };
        let corrector = &rc_aff + ds_a.component_mul(&dl_a) - DVector::from_element(m, sigma * mu);
        let centering = &rc_aff - DVector::from_element(m, sigma * mu);
        let phi0 = merit(&r, &it, sigma * mu);
        let frac = (1.0 - mu).clamp(0.99, 0.9999);
        // Backtracking on the merit. The Mehrotra corrector is not always a
        // descent direction for it; when it stalls, the plain Newton step
        // towards σμ is used instead.
        let line_search = |rc: &DVector<f64>, min_alpha: f64| -> Option<Iterate> {
            let (dx, ds, dl, dnu) = direction(rc)?;
            let mut alpha = (frac * max_step(&it.s, &ds).min(max_step(&it.lambda, &dl))).min(1.0);
            while alpha >= min_alpha {
                let trial = Iterate {
                    x: &it.x + &dx * alpha,
                    s: &it.s + &ds * alpha,
                    lambda: &it.lambda + &dl * alpha,
                    nu: &it.nu + &dnu * alpha,
                };
                let rt = residuals(pr, &trial);
                if merit(&rt, &trial, sigma * mu) <= (1.0 - 1e-4 * alpha) * phi0 {
                    return Some(trial);
                }
                alpha *= 0.5;
            }
            None
        };
        match line_search(&corrector, 1e-2).or_else(|| line_search(&centering, 1e-12)) {
            Some(next) => it = next,
            None => break,
        }
    }

    let (_, mut sol) = best.ok_or_else(|| Error::numeric("interior-point method produced no iterate"))?;
    let mut lambda_clipped = sol.lambda.clone();
    lambda_clipped.iter_mut().for_each(|l| *l = l.max(0.0));
    sol.kkt_residual = pr.kkt_residual(&sol.x, &lambda_clipped, &sol.nu);
    sol.lambda = lambda_clipped;
    sol.max_violation = pr.max_violation(&sol.x);
    // KKT thresholds are relative to the objective gradient, so a large
    // linear penalty does not make a well-solved problem look inaccurate.
    let kkt_rel = sol.kkt_residual / (1.0 + (&pr.p * &sol.x * 2.0 + &pr.q).amax());
    if kkt_rel <= 1e-9 && sol.max_violation <= 1e-10 {
        if kkt_rel > 1e-11 || sol.max_violation > 1e-12 {
            sol.status = SolveStatus::Inaccurate;
        }
        Ok(sol)
    } else {
        Err(Error::numeric(format!(
            "interior-point method stopped after {} iterations with KKT residual {:.3e} and violation {:.3e}",
            sol.iterations, sol.kkt_residual, sol.max_violation
        )))
    }
}

/// Result of the phase-one problem.
#[derive(Debug, Clone)]
pub struct PhaseOne {
    /// min over {Ex = d} of max_i f_i(x), floored at −1.
    pub value: f64,
    pub x: DVector<f64>,
    pub certificate: InfeasibilityCertificate,
}

/// Minimizes t subject to f_i(x) ≤ t, t ≥ −1, Ex = d.
pub fn phase_one(pr: &Qcqp) -> Result<PhaseOne> {
    pr.check()?;
    let n = pr.dim();
    let m = pr.ineq.len();
    let ext = |v: &DVector<f64>, last: f64| {
        let mut out = DVector::zeros(n + 1);
        out.rows_mut(0, n).copy_from(v);
        out[n] = last;
        out
    };
    let mut ineq = Vec::with_capacity(m + 1);
    for g in &pr.ineq {
        let a_mat = g.a_mat.as_ref().map(|a| {
            let mut big = DMatrix::zeros(n + 1, n + 1);
            big.view_mut((0, 0), (n, n)).copy_from(a);
            big
        });
        ineq.push(Inequality { a_mat, a_vec: ext(&g.a_vec, -1.0), b: g.b });
    }
    ineq.push(Inequality::affine(ext(&DVector::zeros(n), -1.0), 1.0));
    let mut eq_mat = DMatrix::zeros(pr.eq_mat.nrows(), n + 1);
    eq_mat.view_mut((0, 0), (pr.eq_mat.nrows(), n)).copy_from(&pr.eq_mat);
    let aux = Qcqp {
        p: DMatrix::zeros(n + 1, n + 1),
        q: ext(&DVector::zeros(n), 1.0),
        ineq,
        eq_mat,
        eq_rhs: pr.eq_rhs.clone(),
    };
    let x0 = least_norm(&pr.eq_mat, &pr.eq_rhs)?;
    let t0 = pr.ineq.iter().map(|g| g.value(&x0)).fold(-1.0, f64::max) + 1.0;
    let sol = solve(&aux, Some(&ext(&x0, t0)), &SolverSettings::default())?;
    let value = sol.x[n];
    let lambda: Vec<f64> = sol.lambda[..m].to_vec();
    let nu = sol.nu.clone();
    let bound = dual_bound(pr, &lambda, &nu);
    Ok(PhaseOne {
        value,
        x: sol.x.rows(0, n).into_owned(),
        certificate: InfeasibilityCertificate {
            lambda,
            nu: nu.iter().copied().collect(),
            dual_bound: bound,
            phase_one_value: value,
        },
    })
}

/// Solves `pr`; a failed solve is classified by phase one as either
/// infeasible (with certificate) or a numeric failure.
pub fn solve_or_certify(pr: &Qcqp, settings: &SolverSettings) -> Result<Solution> {
    match solve(pr, None, settings) {
        Ok(s) => Ok(s),
        Err(Error::Numeric(msg)) => {
            let p1 = phase_one(pr)?;
            if p1.value > 1e-10 && p1.certificate.dual_bound > 0.0 {
                Err(Error::Infeasible(Box::new(p1.certificate)))
            } else if p1.value > 1e-10 {
                Err(Error::numeric(format!(
                    "{msg}; phase one reports violation {:.3e} without a valid dual certificate",
                    p1.value
                )))
            } else {
                // retry from the phase-one point, which is feasible
                solve(pr, Some(&p1.x), settings).map_err(|e| Error::numeric(format!("{msg}; retry: {e}")))
            }
        }
        Err(e) => Err(e),
    }
}
