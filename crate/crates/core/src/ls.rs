//! Least-squares estimation under the residual-existence constraints.
//!
//! The objective `(1 - tau) ||v_m - F_m A_m||^2 + tau ||v_s - F_s A_s||^2`
//! separates. The mid block is ordinary least squares. The spread block is
//! a convex QP over
//!
//! ```text
//! Gamma = { A_s >= 0 : (spr X | |mid X|) A_s <= spr y }
//! ```
//!
//! solved through its LCP with Lemke pivoting. The interval intercept is the
//! Hukuhara difference between the mean response and the mean fitted part.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::{predict, Coefficients, DesignSystem};
use crate::error::{Error, Result};
use crate::interval::{Interval, Tau};
use crate::lcp::{solve_qp_detailed, Qp, QpSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Method {
    #[serde(rename = "ls")]
    Ls,
    #[serde(rename = "lasso")]
    Lasso,
    #[serde(rename = "lasso-ir")]
    LassoIr,
}

/// How squared prediction errors are aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MseConvention {
    /// Mean of `d_tau^2` with the fit's `tau`.
    #[default]
    Dtau,
    /// Mean of `(mid error)^2 + (spr error)^2`.
    Unweighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub coefficients: Coefficients,
    pub method: Method,
    pub tau: f64,
    pub lambda_mid: f64,
    pub lambda_spr: f64,
    pub t_budget: f64,
    pub fitted: Vec<Interval>,
    pub mse: f64,
    pub mse_convention: MseConvention,
    pub diagnostics: BTreeMap<String, f64>,
}

impl FitResult {
    /// Recomputes `mse` against `y` under another convention.
    pub fn set_mse_convention(&mut self, y: &[Interval], convention: MseConvention) -> Result<()> {
        self.mse = mean_squared_error(y, &self.fitted, Tau::new(self.tau)?, convention)?;
        self.mse_convention = convention;
        Ok(())
    }
}

/// `(1/n) sum_j d_tau^2(y_j, yhat_j)`.
pub fn mean_squared_dtau(y: &[Interval], y_hat: &[Interval], tau: Tau) -> Result<f64> {
    mean_squared_error(y, y_hat, tau, MseConvention::Dtau)
}

pub fn mean_squared_error(y: &[Interval], y_hat: &[Interval], tau: Tau, convention: MseConvention) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::LengthMismatch { left: y.len(), right: y_hat.len() });
    }
    if y.is_empty() {
        return Err(Error::EmptySample);
    }
    let total: f64 = y
        .iter()
        .zip(y_hat)
        .map(|(a, b)| match convention {
            MseConvention::Dtau => a.d_tau_sq(b, tau),
            MseConvention::Unweighted => {
                let dm = a.mid() - b.mid();
                let ds = a.spr() - b.spr();
                dm * dm + ds * ds
            }
        })
        .sum();
    Ok(total / y.len() as f64)
}

/// `Delta = mean(y) -_H mean(X^ebl) B`; the intercept stored in `b_hat` is
/// ignored.
pub fn estimate_intercept(design: &DesignSystem, b_hat: &Coefficients) -> Result<Interval> {
    let a_m = b_hat.mid_block(design.variant);
    let a_s = b_hat.spr_block(design.variant);
    let mid = design.mean_mid_xebl.dot(&a_m);
    let spr = design.mean_spr_xebl.dot(&a_s).max(0.0);
    design.mean_y.hukuhara_diff(&Interval::new(mid, spr)?)
}

/// Fitted intervals for every training row.
pub fn fitted_values(design: &DesignSystem, c: &Coefficients) -> Result<Vec<Interval>> {
    (0..design.n)
        .map(|j| {
            let row: Vec<Interval> = (0..design.k)
                .map(|i| Interval::new(design.mid_x[(j, i)], design.spr_x[(j, i)]))
                .collect::<Result<_>>()?;
            predict(c, &row)
        })
        .collect()
}

/// Minimum-norm least squares on the mid block (working units). Returns
/// the solution and the numerical rank of `F_m`.
pub(crate) fn ols_mid(design: &DesignSystem) -> Result<(DVector<f64>, usize)> {
    let pm = design.pm();
    let svd = design.fm.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Ok((DVector::zeros(pm), 0));
    }
    let eps = smax * 1e-10;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let a = svd
        .solve(&design.vm, eps)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((a, rank))
}

/// Outcome of the constrained spread subproblem.
pub(crate) struct SpreadSolve {
    /// Working-unit coefficients.
    pub a_s: DVector<f64>,
    pub dropped: usize,
    pub qp: Option<QpSolution>,
}

/// Minimizes `weight/2 ||v_s - F_s a||^2 + l1 sum(a)` over Gamma, i.e. the
/// QP with `Q = weight F_s'F_s` and `c = -weight F_s'v_s + l1`.
///
/// Columns of `F_s` that are identically zero after centering do not move
/// the objective and only tighten the constraints, so they are fixed at 0.
pub(crate) fn solve_spread(design: &DesignSystem, weight: f64, l1: f64) -> Result<SpreadSolve> {
    let ps = design.ps();
    let norms: Vec<f64> = design.fs.column_iter().map(|c| c.norm()).collect();
    let nmax = norms.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..ps).filter(|&j| norms[j] > 1e-12 * nmax && nmax > 0.0).collect();
    let dropped = ps - keep.len();
    if keep.is_empty() {
        return Ok(SpreadSolve { a_s: DVector::zeros(ps), dropped, qp: None });
    }
    let m = keep.len();
    let n = design.n;
    let fs = design.fs.select_columns(keep.iter());
    let rows = design.spread_rows.select_columns(keep.iter());

    let q = fs.transpose() * &fs * weight;
    let q = (&q + q.transpose()) * 0.5;
    let c = (fs.transpose() * &design.vs) * (-weight) + DVector::from_element(m, l1);
    let mut r_mat = DMatrix::zeros(m + n, m);
    r_mat.view_mut((0, 0), (m, m)).fill_with_identity();
    r_mat.view_mut((m, 0), (n, m)).copy_from(&(-rows));
    let mut r = DVector::zeros(m + n);
    r.rows_mut(m, n).copy_from(&(-&design.spr_y));

    let sol = solve_qp_detailed(&Qp::new(q, c, r_mat, r)?)?;
    let mut a_s = DVector::zeros(ps);
    let zscale = 1.0 + sol.z.amax();
    for (pos, &j) in keep.iter().enumerate() {
        let z = sol.z[pos];
        // active nonnegativity row or roundoff below zero
        let at_bound = (sol.lcp.lambda[pos] > 0.0 && z.abs() <= 1e-9 * zscale) || z < 0.0;
        a_s[j] = if at_bound { 0.0 } else { z };
    }
    Ok(SpreadSolve { a_s, dropped, qp: Some(sol) })
}

/// Least-squares fit.
pub fn fit_ls(design: &DesignSystem, tau: Tau) -> Result<FitResult> {
    let (a_m_work, rank) = ols_mid(design)?;
    let spread = solve_spread(design, 2.0 * tau.value(), 0.0)?;
    let mut diagnostics = BTreeMap::new();
    if let Some(qp) = &spread.qp {
        diagnostics.extend(qp.diagnostics("spread"));
    }
    finish_fit(design, tau, Method::Ls, &a_m_work, &spread.a_s, rank, spread.dropped, diagnostics, 0.0, 0.0)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn finish_fit(
    design: &DesignSystem,
    tau: Tau,
    method: Method,
    a_m_work: &DVector<f64>,
    a_s_work: &DVector<f64>,
    mid_rank: usize,
    dropped: usize,
    mut diagnostics: BTreeMap<String, f64>,
    lambda_mid: f64,
    lambda_spr: f64,
) -> Result<FitResult> {
    let a_m = design.unscale_mid(a_m_work);
    let a_s = design.unscale_spr(a_s_work);
    let mut coefficients = Coefficients::from_blocks(design.variant, design.k, &a_m, &a_s, Interval::ZERO)?;
    coefficients.delta = estimate_intercept(design, &coefficients)?;
    let fitted = fitted_values(design, &coefficients)?;
    let y: Vec<Interval> = (0..design.n)
        .map(|j| Interval::new(design.mid_y[j], design.spr_y[j]))
        .collect::<Result<_>>()?;
    let mse = mean_squared_dtau(&y, &fitted, tau)?;

    let t = tau.value();
    diagnostics.insert(
        "objective".into(),
        (1.0 - t) * design.mid_rss(a_m_work) + t * design.spr_rss(a_s_work),
    );
    diagnostics.insert("gamma_violation".into(), design.gamma_violation(a_s_work));
    diagnostics.insert("mid_rank".into(), mid_rank as f64);
    diagnostics.insert("spread_columns_dropped".into(), dropped as f64);
    let degenerate = mid_rank < design.pm() || dropped > 0;
    diagnostics.insert("degenerate_design".into(), if degenerate { 1.0 } else { 0.0 });

    Ok(FitResult {
        coefficients,
        method,
        tau: t,
        lambda_mid,
        lambda_spr,
        t_budget: 0.0,
        fitted,
        mse,
        mse_convention: MseConvention::Dtau,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{build_design, Variant};
    use crate::interval::IntervalSample;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::from_endpoints(a, b).unwrap()
    }

    fn exact_sample() -> IntervalSample {
        // y_j = 2 x_j
        let x = [iv(0.0, 2.0), iv(1.0, 4.0), iv(-3.0, -1.0), iv(2.0, 2.5), iv(-1.0, 5.0)];
        let y = x.iter().map(|a| a.scale(2.0)).collect();
        IntervalSample::with_default_names(y, x.iter().map(|a| vec![*a]).collect()).unwrap()
    }

    #[test]
    fn exact_interval_linear_data() {
        let d = build_design(&exact_sample(), Variant::Full).unwrap();
        let fit = fit_ls(&d, Tau::default()).unwrap();
        let c = &fit.coefficients;
        assert!((c.b1[0] - 2.0).abs() < 1e-9);
        assert!((c.b2[0] - 2.0).abs() < 1e-9);
        assert!(c.b3[0].abs() < 1e-9);
        assert!(c.b4[0].abs() < 1e-9);
        assert!(c.delta.mid().abs() < 1e-9 && c.delta.spr() < 1e-9);
        assert!(fit.mse < 1e-16);
    }

    #[test]
    fn spreadless_data_is_plain_ols() {
        let s = IntervalSample::with_default_names(
            vec![Interval::point(1.0), Interval::point(3.0), Interval::point(2.0), Interval::point(7.0)],
            vec![
                vec![Interval::point(0.0)],
                vec![Interval::point(1.0)],
                vec![Interval::point(2.0)],
                vec![Interval::point(3.0)],
            ],
        )
        .unwrap();
        let d = build_design(&s, Variant::Full).unwrap();
        let fit = fit_ls(&d, Tau::default()).unwrap();
        // OLS of (1,3,2,7) on (0,1,2,3): slope = sum (x-1.5)(y-3.25) / sum (x-1.5)^2 = 8.5/5
        assert!((fit.coefficients.b1[0] - 1.7).abs() < 1e-12);
        assert_eq!(fit.coefficients.b2[0], 0.0);
        assert_eq!(fit.coefficients.b3[0], 0.0);
        // spr X column is zero after centering, so b4 takes the min-norm value 0
        assert!(fit.coefficients.b4[0].abs() < 1e-12);
        assert_eq!(fit.diagnostics["degenerate_design"], 1.0);
    }

    #[test]
    fn intercept_examples() {
        let s = exact_sample();
        let d = build_design(&s, Variant::Full).unwrap();
        assert_eq!(estimate_intercept(&d, &Coefficients::zeros(1)).unwrap(), d.mean_y);

        let shifted: Vec<Interval> = s.y().iter().map(|y| y.add_scaled(1.0, &Interval::point(5.0))).collect();
        let ds = build_design(&s.with_response(shifted).unwrap(), Variant::Full).unwrap();
        let a = fit_ls(&d, Tau::default()).unwrap();
        let b = fit_ls(&ds, Tau::default()).unwrap();
        for (u, v) in a.coefficients.to_vec().iter().zip(b.coefficients.to_vec()) {
            assert!((u - v).abs() < 1e-9);
        }
        assert!((b.coefficients.delta.mid() - a.coefficients.delta.mid() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn mse_examples() {
        let y = vec![iv(0.0, 2.0), iv(1.0, 5.0)];
        assert_eq!(mean_squared_dtau(&y, &y, Tau::default()).unwrap(), 0.0);
        let shifted: Vec<Interval> = y.iter().map(|a| a.add_scaled(1.0, &Interval::point(1.0))).collect();
        assert!((mean_squared_dtau(&y, &shifted, Tau::default()).unwrap() - 0.5).abs() < 1e-15);
        assert!(
            (mean_squared_error(&y, &shifted, Tau::default(), MseConvention::Unweighted).unwrap() - 1.0).abs() < 1e-15
        );
        assert!(matches!(
            mean_squared_dtau(&y, &shifted[..1], Tau::default()),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
