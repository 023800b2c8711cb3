//! Interval Lasso with spread coefficients tied to the mid coefficients.
//!
//! Only the mid-mid and spread-spread relations are modelled. Spread
//! coefficients are the mid coefficients plus an additive vector whose L1
//! norm is bounded by a budget `t`:
//!
//! ```text
//! min (1 - tau) ||v_m - M a_m||^2 + tau ||v_s - S (a_m + a_a)||^2
//! s.t. spr X (a_m + a_a) >= 0,  ||a_a||_1 <= t
//! ```
//!
//! where `M` and `S` are the centred mid and spread regressors. Nothing
//! forces the fitted spread part to stay below the observed spreads, so
//! Hukuhara residuals need not exist; the fit reports whether they do.
//!
//! Columns are always taken in original units, whatever the design's
//! standardization setting.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::{build_design, Coefficients, DesignSystem, Variant};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSample, Tau};
use crate::lasso::fold_assignment;
use crate::lcp::{solve_qp_detailed, Qp, QpSolution};
use crate::ls::{mean_squared_dtau, FitResult, Method, MseConvention};

/// Budgets up to this many regressors encode the L1 ball with one row per
/// sign vector; larger ones split the additive vector into two
/// nonnegative parts (the resulting `Q` is singular, which the QP solver
/// handles without regularization).
const SIGN_ROWS_MAX_K: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoIrFit {
    pub a_m: Vec<f64>,
    pub a_a: Vec<f64>,
    pub t: f64,
    pub delta_mid: f64,
    /// May be negative; nothing constrains it.
    pub delta_spr: f64,
    pub objective: f64,
    /// Fitted spreads including the intercept are nonnegative on every row.
    pub fitted_spr_nonneg: bool,
    /// `spr X_j (a_m + a_a) <= spr y_j` on every row.
    pub hukuhara_residuals_exist: bool,
    pub diagnostics: BTreeMap<String, f64>,
}

impl LassoIrFit {
    pub fn spread_coefficients(&self) -> Vec<f64> {
        self.a_m.iter().zip(&self.a_a).map(|(m, a)| m + a).collect()
    }

    pub fn coefficients(&self) -> Result<Coefficients> {
        let k = self.a_m.len();
        let mut c = Coefficients::zeros(k);
        c.b1.copy_from_slice(&self.a_m);
        c.b2 = self.spread_coefficients();
        c.delta = Interval::new(self.delta_mid, self.delta_spr.max(0.0))?;
        Ok(c)
    }

    /// Predicted interval for one row; the spread is clipped at zero.
    pub fn predict(&self, x: &[Interval]) -> Result<Interval> {
        if x.len() != self.a_m.len() {
            return Err(Error::DimensionMismatch { expected: self.a_m.len(), got: x.len() });
        }
        let b_s = self.spread_coefficients();
        let mid = self.delta_mid + x.iter().zip(&self.a_m).map(|(xi, b)| xi.mid() * b).sum::<f64>();
        let spr = self.delta_spr + x.iter().zip(&b_s).map(|(xi, b)| xi.spr() * b).sum::<f64>();
        Interval::new(mid, spr.max(0.0))
    }
}

struct Columns {
    mid: DMatrix<f64>,
    spr: DMatrix<f64>,
    vm: DVector<f64>,
    vs: DVector<f64>,
    mean_mid: DVector<f64>,
    mean_spr: DVector<f64>,
}

fn centred(x: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let mean = x.row_mean().transpose();
    let mut c = x.clone();
    for (j, mut col) in c.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    (c, mean)
}

fn columns(design: &DesignSystem) -> Columns {
    let (mid, mean_mid) = centred(&design.mid_x);
    let (spr, mean_spr) = centred(&design.spr_x);
    Columns {
        mid,
        spr,
        vm: design.mid_y.add_scalar(-design.mean_y.mid()),
        vs: design.spr_y.add_scalar(-design.mean_y.spr()),
        mean_mid,
        mean_spr,
    }
}

/// Builds the QP over `(a_m, a_a)` (or `(a_m, p, n)` with `a_a = p - n`).
/// An infinite budget drops the L1 rows.
fn build_qp(design: &DesignSystem, cols: &Columns, tau: f64, t: f64, split: bool) -> Result<Qp> {
    let k = design.k;
    let n = design.n;
    let split = split && t.is_finite();
    let nv = if split { 3 * k } else { 2 * k };
    // each additive variable enters the spread fit with this sign
    let add_sign: Vec<(usize, f64)> = if split {
        (0..k).map(|i| (k + i, 1.0)).chain((0..k).map(|i| (2 * k + i, -1.0))).collect()
    } else {
        (0..k).map(|i| (k + i, 1.0)).collect()
    };

    let mm = cols.mid.transpose() * &cols.mid;
    let ss = cols.spr.transpose() * &cols.spr;
    let mv = cols.mid.transpose() * &cols.vm;
    let sv = cols.spr.transpose() * &cols.vs;

    // coefficient map: spread coefficients = E z
    let mut e = DMatrix::zeros(k, nv);
    e.view_mut((0, 0), (k, k)).fill_with_identity();
    for &(col, sgn) in &add_sign {
        e[((col - k) % k, col)] = sgn;
    }
    let mut q = &e.transpose() * &ss * &e * (2.0 * tau);
    q.view_mut((0, 0), (k, k)).zip_apply(&mm, |a, b| *a += 2.0 * (1.0 - tau) * b);
    let q = (&q + q.transpose()) * 0.5;
    let mut c = &e.transpose() * &sv * (-2.0 * tau);
    c.rows_mut(0, k).zip_apply(&mv, |a, b| *a -= 2.0 * (1.0 - tau) * b);

    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    let spr_rows = &design.spr_x * &e;
    for j in 0..n {
        rows.push((spr_rows.row(j).transpose(), 0.0));
    }
    if t.is_finite() {
        if split {
            for i in k..nv {
                let mut r = DVector::zeros(nv);
                r[i] = 1.0;
                rows.push((r, 0.0));
            }
            let mut r = DVector::zeros(nv);
            r.rows_mut(k, 2 * k).fill(-1.0);
            rows.push((r, -t));
        } else {
            for pattern in 0..(1usize << k) {
                let mut r = DVector::zeros(nv);
                for i in 0..k {
                    r[k + i] = if pattern >> i & 1 == 1 { 1.0 } else { -1.0 };
                }
                rows.push((r, -t));
            }
        }
    }
    let r_mat = DMatrix::from_fn(rows.len(), nv, |i, j| rows[i].0[j]);
    let r = DVector::from_iterator(rows.len(), rows.iter().map(|x| x.1));
    Qp::new(q, c, r_mat, r)
}

fn objective(cols: &Columns, tau: f64, a_m: &DVector<f64>, b_s: &DVector<f64>) -> f64 {
    (1.0 - tau) * (&cols.vm - &cols.mid * a_m).norm_squared() + tau * (&cols.vs - &cols.spr * b_s).norm_squared()
}

/// Joint fit of mid and additive coefficients at budget `t`. Only the
/// first `k` columns of each block are used, so the design variant is
/// irrelevant.
pub fn fit_lasso_ir(design: &DesignSystem, tau: Tau, t: f64) -> Result<LassoIrFit> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("budget must be nonnegative, got {t}")));
    }
    let k = design.k;
    let tv = tau.value();
    let cols = columns(design);

    let (a_m, a_a, sol) = if t == 0.0 {
        // no additive freedom: solve for a_m alone so that equality is exact
        let mm = cols.mid.transpose() * &cols.mid;
        let ss = cols.spr.transpose() * &cols.spr;
        let q = &mm * (2.0 * (1.0 - tv)) + &ss * (2.0 * tv);
        let q = (&q + q.transpose()) * 0.5;
        let c = -(cols.mid.transpose() * &cols.vm * (2.0 * (1.0 - tv)) + cols.spr.transpose() * &cols.vs * (2.0 * tv));
        let sol = solve_qp_detailed(&Qp::new(q, c, design.spr_x.clone(), DVector::zeros(design.n))?)?;
        (sol.z.clone(), DVector::zeros(k), sol)
    } else {
        let split = k > SIGN_ROWS_MAX_K;
        let qp = build_qp(design, &cols, tv, t, split)?;
        let sol = solve_qp_detailed(&qp)?;
        let a_m = sol.z.rows(0, k).into_owned();
        let a_a = if split {
            sol.z.rows(k, k) - sol.z.rows(2 * k, k)
        } else {
            sol.z.rows(k, k).into_owned()
        };
        (a_m, a_a, sol)
    };
    Ok(assemble(design, &cols, tv, t, a_m, a_a, &sol))
}

fn assemble(
    design: &DesignSystem,
    cols: &Columns,
    tau: f64,
    t: f64,
    a_m: DVector<f64>,
    a_a: DVector<f64>,
    sol: &QpSolution,
) -> LassoIrFit {
    let b_s = &a_m + &a_a;
    let delta_mid = design.mean_y.mid() - cols.mean_mid.dot(&a_m);
    let delta_spr = design.mean_y.spr() - cols.mean_spr.dot(&b_s);
    let part = &design.spr_x * &b_s;
    let scale = 1.0 + design.spr_y.amax();
    let tol = 1e-9 * scale;
    let fitted_spr_nonneg = part.iter().all(|&s| delta_spr + s >= -tol);
    let hukuhara_residuals_exist = part.iter().zip(design.spr_y.iter()).all(|(&s, &y)| s <= y + tol);

    let mut diagnostics = sol.diagnostics("lasso_ir");
    diagnostics.insert("additive_l1".into(), a_a.abs().sum());
    diagnostics.insert("delta_spr_raw".into(), delta_spr);
    diagnostics.insert("fitted_spr_nonneg".into(), f64::from(u8::from(fitted_spr_nonneg)));
    diagnostics.insert("hukuhara_residuals_exist".into(), f64::from(u8::from(hukuhara_residuals_exist)));
    LassoIrFit {
        objective: objective(cols, tau, &a_m, &b_s),
        a_m: a_m.as_slice().to_vec(),
        a_a: a_a.as_slice().to_vec(),
        t,
        delta_mid,
        delta_spr,
        fitted_spr_nonneg,
        hukuhara_residuals_exist,
        diagnostics,
    }
}

/// Packs a fit into the common result type.
pub fn to_fit_result(design: &DesignSystem, tau: Tau, fit: &LassoIrFit) -> Result<FitResult> {
    let mut fitted = Vec::with_capacity(design.n);
    let mut y = Vec::with_capacity(design.n);
    for j in 0..design.n {
        let row: Vec<Interval> = (0..design.k)
            .map(|i| Interval::new(design.mid_x[(j, i)], design.spr_x[(j, i)]))
            .collect::<Result<_>>()?;
        fitted.push(fit.predict(&row)?);
        y.push(Interval::new(design.mid_y[j], design.spr_y[j])?);
    }
    let mut diagnostics = fit.diagnostics.clone();
    diagnostics.insert("objective".into(), fit.objective);
    Ok(FitResult {
        coefficients: fit.coefficients()?,
        method: Method::LassoIr,
        tau: tau.value(),
        lambda_mid: 0.0,
        lambda_spr: 0.0,
        t_budget: fit.t,
        mse: mean_squared_dtau(&y, &fitted, tau)?,
        fitted,
        mse_convention: MseConvention::Dtau,
        diagnostics,
    })
}

/// L1 norm of the additive vector when the budget is not binding.
pub fn unconstrained_budget(design: &DesignSystem, tau: Tau) -> Result<f64> {
    let cols = columns(design);
    let qp = build_qp(design, &cols, tau.value(), f64::INFINITY, false)?;
    let sol = solve_qp_detailed(&qp)?;
    Ok(sol.z.rows(design.k, design.k).abs().sum())
}

/// `t = 0` followed by 20 log-spaced budgets ending at the unconstrained
/// additive norm.
pub fn default_budget_grid(s: &IntervalSample, tau: Tau) -> Result<Vec<f64>> {
    let top = unconstrained_budget(&build_design(s, Variant::ModelM)?, tau)?;
    let top = if top > 0.0 { top } else { 1.0 };
    let step = (1e-3f64).ln() / 19.0;
    let mut grid = vec![0.0];
    grid.extend((0..20).rev().map(|i| top * (step * i as f64).exp()));
    Ok(grid)
}

/// Budget minimizing the cross-validated mean squared `d_tau` error; ties
/// go to the earlier grid entry.
pub fn select_budget(s: &IntervalSample, tau: Tau, grid: &[f64], folds: usize, seed: u64) -> Result<f64> {
    let errs = cv_budget_errors(s, tau, grid, folds, seed)?;
    let best = (0..grid.len()).fold(0, |b, i| if errs[i] < errs[b] { i } else { b });
    Ok(grid[best])
}

/// Mean over folds of the held-out mean squared `d_tau` error, per budget.
pub fn cv_budget_errors(s: &IntervalSample, tau: Tau, grid: &[f64], folds: usize, seed: u64) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty budget grid".into()));
    }
    let parts = fold_assignment(s.n(), folds, seed)?;
    let mut errs = vec![0.0; grid.len()];
    for held in &parts {
        let train_idx: Vec<usize> = (0..s.n()).filter(|i| held.binary_search(i).is_err()).collect();
        let train = build_design(&s.select(&train_idx)?, Variant::ModelM)?;
        let test = s.select(held)?;
        for (e, &t) in errs.iter_mut().zip(grid) {
            let fit = fit_lasso_ir(&train, tau, t)?;
            let pred = test.x().iter().map(|row| fit.predict(row)).collect::<Result<Vec<_>>>()?;
            *e += mean_squared_dtau(test.y(), &pred, tau)?;
        }
    }
    let nf = parts.len() as f64;
    Ok(errs.into_iter().map(|e| e / nf).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ls::fit_ls;
    use crate::oracle::simulate;

    fn truth(b2: [f64; 2], b4: [f64; 2]) -> Coefficients {
        let mut c = Coefficients::zeros(2);
        c.b1 = vec![0.8, -0.5];
        c.b2 = b2.to_vec();
        c.b4 = b4.to_vec();
        c.delta = Interval::new(1.0, 1.0).unwrap();
        c
    }

    #[test]
    fn zero_budget_ties_coefficients() {
        let s = simulate(40, 2, &truth([0.3, 0.6], [0.0, 0.0]), 1.0, 3).unwrap();
        let d = build_design(&s, Variant::ModelM).unwrap();
        let fit = fit_lasso_ir(&d, Tau::default(), 0.0).unwrap();
        assert!(fit.a_a.iter().all(|&v| v == 0.0));
        assert_eq!(fit.spread_coefficients(), fit.a_m);
    }

    #[test]
    fn budget_is_respected_and_objective_monotone() {
        let s = simulate(40, 2, &truth([0.3, 0.6], [0.0, 0.0]), 1.0, 4).unwrap();
        let d = build_design(&s, Variant::ModelM).unwrap();
        let mut last = f64::INFINITY;
        for t in [0.0, 0.01, 0.05, 0.2, 0.5, 1.0, 5.0] {
            let fit = fit_lasso_ir(&d, Tau::default(), t).unwrap();
            let l1: f64 = fit.a_a.iter().map(|v| v.abs()).sum();
            assert!(l1 <= t + 1e-8, "t={t} l1={l1}");
            assert!(fit.objective <= last + 1e-9 * last.abs().max(1.0));
            last = fit.objective;
        }
    }

    #[test]
    fn split_encoding_matches_sign_rows() {
        let s = simulate(40, 3, &{
            let mut c = Coefficients::zeros(3);
            c.b1 = vec![0.8, -0.5, 0.2];
            c.b2 = vec![0.3, 0.6, 0.1];
            c.delta = Interval::new(1.0, 1.0).unwrap();
            c
        }, 1.0, 5)
        .unwrap();
        let d = build_design(&s, Variant::ModelM).unwrap();
        let cols = columns(&d);
        for t in [0.05, 0.3, 2.0] {
            let a = solve_qp_detailed(&build_qp(&d, &cols, 0.5, t, false).unwrap()).unwrap();
            let b = solve_qp_detailed(&build_qp(&d, &cols, 0.5, t, true).unwrap()).unwrap();
            let am = a.z.rows(0, 3).into_owned();
            let bm = b.z.rows(0, 3).into_owned();
            let oa = objective(&cols, 0.5, &am, &(&am + a.z.rows(3, 3)));
            let ob = objective(&cols, 0.5, &bm, &(&bm + b.z.rows(3, 3) - b.z.rows(6, 3)));
            assert!((oa - ob).abs() <= 1e-9 * oa.max(1.0), "t={t}: {oa} vs {ob}");
        }
    }

    #[test]
    fn cross_effects_are_out_of_reach() {
        let s = simulate(59, 2, &truth([0.3, 0.6], [0.7, -0.4]), 0.0, 6).unwrap();
        let tau = Tau::default();
        let full = build_design(&s, Variant::Full).unwrap();
        let ls = fit_ls(&full, tau).unwrap();
        let ir = fit_lasso_ir(&build_design(&s, Variant::ModelM).unwrap(), tau, 100.0).unwrap();
        assert!(ir.objective > ls.diagnostics["objective"] + 1e-3);
    }

    #[test]
    fn residual_existence_is_reported_not_enforced() {
        let x: Vec<Vec<Interval>> = (1..=10).map(|i| vec![Interval::new(i as f64, i as f64).unwrap()]).collect();
        let mut y: Vec<Interval> = (1..=10).map(|i| Interval::new(2.0 * i as f64, 2.0 * i as f64).unwrap()).collect();
        y[9] = Interval::new(20.0, 0.5).unwrap();
        let s = IntervalSample::with_default_names(y, x).unwrap();
        let d = build_design(&s, Variant::ModelM).unwrap();
        let fit = fit_lasso_ir(&d, Tau::default(), 1.0).unwrap();
        assert!(!fit.hukuhara_residuals_exist);
        let ls = fit_ls(&d, Tau::default()).unwrap();
        assert!(ls.diagnostics["gamma_violation"] <= 1e-9);
    }

    #[test]
    fn budget_selection() {
        let s = simulate(40, 2, &truth([0.1, 1.2], [0.0, 0.0]), 0.5, 8).unwrap();
        let tau = Tau::default();
        assert_eq!(select_budget(&s, tau, &[0.3], 5, 1).unwrap(), 0.3);
        let a = select_budget(&s, tau, &[0.0, 10.0], 5, 1).unwrap();
        assert_eq!(a, 10.0);
        assert_eq!(select_budget(&s, tau, &[0.0, 10.0], 5, 1).unwrap(), a);
        let grid = default_budget_grid(&s, tau).unwrap();
        assert_eq!(grid.len(), 21);
        assert_eq!(grid[0], 0.0);
        assert!(grid[1..].windows(2).all(|w| w[0] < w[1]));
    }
}
