//! Slow reference solvers and a synthetic data generator.
//!
//! Nothing here calls into the pivoting or coordinate-descent code. Linear
//! systems are solved with a local Gaussian elimination so the oracle does
//! not share factorization kernels with the solvers it checks.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::Coefficients;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSample};
use crate::lcp::Qp;

/// Size caps for [`brute_force_qp_with`].
#[derive(Debug, Clone, Copy)]
pub struct BruteForceLimits {
    pub max_vars: usize,
    pub max_constraints: usize,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        Self { max_vars: 6, max_constraints: 12 }
    }
}

/// Dense Gaussian elimination with partial pivoting. `None` when singular.
pub fn gauss_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut x = b.clone();
    let scale = a.amax().max(1e-300);
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|i| (i, m[(i, col)].abs()))
            .fold((col, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if pmax <= 1e-12 * scale {
            return None;
        }
        if piv != col {
            m.swap_rows(piv, col);
            x.swap_rows(piv, col);
        }
        for i in col + 1..n {
            let f = m[(i, col)] / m[(col, col)];
            if f != 0.0 {
                for j in col..n {
                    m[(i, j)] -= f * m[(col, j)];
                }
                x[i] -= f * x[col];
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m[(i, j)] * x[j];
        }
        x[i] = s / m[(i, i)];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Calls `f` on every subset of `0..p` with at most `max_size` elements.
fn for_each_subset(p: usize, max_size: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, p: usize, max_size: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        f(cur);
        if cur.len() == max_size {
            return;
        }
        for i in start..p {
            cur.push(i);
            rec(i + 1, p, max_size, cur, f);
            cur.pop();
        }
    }
    rec(0, p, max_size, &mut Vec::new(), f);
}

/// Exact QP optimum with the default caps (`m <= 6`, `p <= 12`). `Ok(None)`
/// means the constraint set is empty.
pub fn brute_force_qp(qp: &Qp) -> Result<Option<DVector<f64>>> {
    brute_force_qp_with(qp, BruteForceLimits::default())
}

/// Enumerates every active set of at most `m` constraints, solves the
/// equality-constrained KKT system for each, and keeps the best feasible
/// stationary point.
pub fn brute_force_qp_with(qp: &Qp, limits: BruteForceLimits) -> Result<Option<DVector<f64>>> {
    let (m, p) = (qp.m(), qp.p());
    if m > limits.max_vars || p > limits.max_constraints {
        return Err(Error::TooLarge(format!("m = {m}, p = {p}")));
    }
    let tol = 1e-9 * (1.0 + qp.r.amax());
    let mut best: Option<(f64, DVector<f64>)> = None;
    for_each_subset(p, m, &mut |active| {
        let s = active.len();
        let mut kkt = DMatrix::zeros(m + s, m + s);
        let mut rhs = DVector::zeros(m + s);
        kkt.view_mut((0, 0), (m, m)).copy_from(&qp.q);
        for (a, &row) in active.iter().enumerate() {
            for j in 0..m {
                kkt[(m + a, j)] = qp.r_mat[(row, j)];
                kkt[(j, m + a)] = -qp.r_mat[(row, j)];
            }
            rhs[m + a] = qp.r[row];
        }
        for j in 0..m {
            rhs[j] = -qp.c[j];
        }
        let Some(sol) = gauss_solve(&kkt, &rhs) else { return };
        let z = sol.rows(0, m).into_owned();
        if qp.violation(&z) > tol {
            return;
        }
        let obj = qp.objective(&z);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, z));
        }
    });
    Ok(best.map(|(_, z)| z))
}

/// Exact minimizer of `1/2 ||v - F b||^2 + lambda ||b||_1` by enumerating
/// sign patterns in `{-1, 0, +1}^p` (`p <= 8`).
pub fn brute_force_lasso(f: &DMatrix<f64>, v: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    let p = f.ncols();
    if p > 8 {
        return Err(Error::TooLarge(format!("p = {p}")));
    }
    let g = f.transpose() * f;
    let fv = f.transpose() * v;
    let objective = |b: &DVector<f64>| 0.5 * (v - f * b).norm_squared() + lambda * b.abs().sum();
    let mut best = DVector::zeros(p);
    let mut best_obj = objective(&best);
    let patterns = 3usize.pow(p as u32);
    for code in 0..patterns {
        let mut signs = vec![0i8; p];
        let mut c = code;
        for s in signs.iter_mut() {
            *s = (c % 3) as i8 - 1;
            c /= 3;
        }
        let support: Vec<usize> = (0..p).filter(|&j| signs[j] != 0).collect();
        if support.is_empty() {
            continue;
        }
        let gs = DMatrix::from_fn(support.len(), support.len(), |a, b| g[(support[a], support[b])]);
        let rhs = DVector::from_iterator(
            support.len(),
            support.iter().map(|&j| fv[j] - lambda * f64::from(signs[j])),
        );
        let Some(sol) = gauss_solve(&gs, &rhs) else { continue };
        if support
            .iter()
            .zip(sol.iter())
            .any(|(&j, &x)| x * f64::from(signs[j]) <= 0.0)
        {
            continue;
        }
        let mut b = DVector::zeros(p);
        for (&j, &x) in support.iter().zip(sol.iter()) {
            b[j] = x;
        }
        let obj = objective(&b);
        if obj < best_obj {
            best_obj = obj;
            best = b;
        }
    }
    Ok(best)
}

/// Ordinary least squares through the normal equations.
pub fn normal_equations_ols(f: &DMatrix<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
    gauss_solve(&(f.transpose() * f), &(f.transpose() * v))
}

/// One row of the oracle comparison log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub instance_id: String,
    pub main_objective: f64,
    pub oracle_objective: f64,
    pub gap: f64,
    pub feas_violation: f64,
}

impl OracleReport {
    pub fn new(instance_id: impl Into<String>, main_objective: f64, oracle_objective: f64, feas_violation: f64) -> Self {
        Self {
            instance_id: instance_id.into(),
            main_objective,
            oracle_objective,
            gap: main_objective - oracle_objective,
            feas_violation: feas_violation.max(0.0),
        }
    }

    /// `gap / max(1, |oracle objective|)`.
    pub fn relative_gap(&self) -> f64 {
        self.gap / self.oracle_objective.abs().max(1.0)
    }
}

pub fn write_reports_csv<W: std::io::Write>(reports: &[OracleReport], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in reports {
        wtr.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Draws a sample that follows the interval model exactly up to noise.
///
/// Regressor mids are uniform on `[-10, 10]` and spreads uniform on
/// `[0.5, 5]`. The error interval has mid `delta.mid + U(-noise, noise)` and
/// spread `delta.spr + U(-1, 1) * min(noise, delta.spr)`, so its expectation
/// is `delta` and its spread stays nonnegative, keeping the truth inside the
/// residual-existence constraints.
pub fn simulate(n: usize, k: usize, truth: &Coefficients, noise: f64, seed: u64) -> Result<IntervalSample> {
    if truth.k() != k || [&truth.b2, &truth.b3, &truth.b4].iter().any(|b| b.len() != k) {
        return Err(Error::InvalidTruth(format!("coefficients do not have k = {k} entries")));
    }
    if truth.b2.iter().chain(truth.b3.iter()).any(|&b| !(b >= 0.0)) {
        return Err(Error::InvalidTruth("b2 and b3 must be nonnegative".into()));
    }
    if !(noise >= 0.0) {
        return Err(Error::InvalidTruth(format!("noise must be nonnegative, got {noise}")));
    }
    if n == 0 || k == 0 {
        return Err(Error::InvalidTruth("n and k must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<Interval> = (0..k)
            .map(|_| {
                let mid = rng.random_range(-10.0..10.0);
                let spr = rng.random_range(0.5..5.0);
                Interval::new(mid, spr)
            })
            .collect::<Result<_>>()?;
        let mut mid = truth.delta.mid();
        let mut spr = truth.delta.spr();
        for (i, xi) in row.iter().enumerate() {
            mid += xi.mid() * truth.b1[i] + xi.spr() * truth.b4[i];
            spr += xi.spr() * truth.b2[i] + xi.mid().abs() * truth.b3[i];
        }
        if noise > 0.0 {
            mid += rng.random_range(-noise..noise);
            let amp = noise.min(truth.delta.spr());
            if amp > 0.0 {
                spr += rng.random_range(-amp..amp);
            }
        }
        y.push(Interval::new(mid, spr.max(0.0))?);
        x.push(row);
    }
    IntervalSample::with_default_names(y, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn gauss_matches_hand_solution() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 1.0, 1.0]);
        let x = gauss_solve(&a, &v(&[4.0, 3.0])).unwrap();
        assert!((x - v(&[1.0, 2.0])).amax() < 1e-15);
        assert!(gauss_solve(&DMatrix::from_element(2, 2, 1.0), &v(&[1.0, 1.0])).is_none());
    }

    #[test]
    fn trivial_qps() {
        let qp = Qp::new(DMatrix::identity(2, 2), v(&[-1.0, -1.0]), DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        assert!((brute_force_qp(&qp).unwrap().unwrap() - v(&[1.0, 1.0])).amax() < 1e-14);
        let qp = Qp::new(DMatrix::identity(2, 2), v(&[1.0, 1.0]), DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        assert!(brute_force_qp(&qp).unwrap().unwrap().amax() < 1e-14);
    }

    #[test]
    fn infeasible_and_too_large() {
        let qp = Qp::new(
            DMatrix::identity(1, 1),
            v(&[0.0]),
            DMatrix::from_row_slice(2, 1, &[1.0, -1.0]),
            v(&[1.0, 0.0]),
        )
        .unwrap();
        assert_eq!(brute_force_qp(&qp).unwrap(), None);
        let big = Qp::new(DMatrix::identity(7, 7), DVector::zeros(7), DMatrix::identity(7, 7), DVector::zeros(7)).unwrap();
        assert!(matches!(brute_force_qp(&big), Err(Error::TooLarge(_))));
    }

    #[test]
    fn lasso_oracle_orthonormal() {
        // identity design: soft thresholding of v
        let f = DMatrix::identity(3, 3);
        let b = brute_force_lasso(&f, &v(&[3.0, -0.5, -2.0]), 1.0).unwrap();
        assert!((b - v(&[2.0, 0.0, -1.0])).amax() < 1e-14);
    }

    #[test]
    fn simulate_is_seeded_and_nonnegative() {
        let mut truth = Coefficients::zeros(2);
        truth.b1 = vec![1.0, -0.5];
        truth.b2 = vec![0.3, 0.0];
        truth.b3 = vec![0.1, 0.2];
        truth.delta = Interval::new(2.0, 1.0).unwrap();
        let a = simulate(30, 2, &truth, 0.5, 7).unwrap();
        let b = simulate(30, 2, &truth, 0.5, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate(30, 2, &truth, 0.5, 8).unwrap());
        assert!(a.y().iter().all(|y| y.spr() >= 0.0));

        truth.b2[0] = -1.0;
        assert!(matches!(simulate(5, 2, &truth, 0.0, 0), Err(Error::InvalidTruth(_))));
    }

    #[test]
    fn report_gap() {
        let r = OracleReport::new("a", 1.5, 1.0, -3.0);
        assert_eq!(r.gap, 0.5);
        assert_eq!(r.feas_violation, 0.0);
        let mut buf = Vec::new();
        write_reports_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("instance_id,main_objective,oracle_objective,gap,feas_violation"));
    }
}
