//! Linear complementarity problems and Lemke's complementary pivoting.
//!
//! A convex quadratic program
//!
//! ```text
//! minimize  1/2 z'Qz + c'z   subject to  Rz >= r
//! ```
//!
//! has KKT conditions `Qz + c = R'lambda`, `lambda >= 0`, `Rz - r >= 0`,
//! `lambda'(Rz - r) = 0`. Eliminating `z = Q^-1 (R'lambda - c)` leaves the
//! LCP `w = M lambda + q`, `w, lambda >= 0`, `w'lambda = 0` with
//! `M = R Q^-1 R'` and `q = -R Q^-1 c - r`. Lemke's method solves it for any
//! positive semidefinite `M` unless the constraint set is empty.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// `minimize 1/2 z'Qz + c'z` subject to `Rz >= r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Qp {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub r_mat: DMatrix<f64>,
    pub r: DVector<f64>,
}

impl Qp {
    pub fn new(q: DMatrix<f64>, c: DVector<f64>, r_mat: DMatrix<f64>, r: DVector<f64>) -> Result<Self> {
        let m = q.nrows();
        if q.ncols() != m {
            return Err(Error::DimensionMismatch { expected: m, got: q.ncols() });
        }
        if c.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: c.len() });
        }
        if r_mat.ncols() != m {
            return Err(Error::DimensionMismatch { expected: m, got: r_mat.ncols() });
        }
        if r.len() != r_mat.nrows() {
            return Err(Error::DimensionMismatch { expected: r_mat.nrows(), got: r.len() });
        }
        let scale = q.amax().max(1.0);
        if (&q - q.transpose()).amax() > 1e-10 * scale {
            return Err(Error::InvalidArgument("Q is not symmetric".into()));
        }
        Ok(Self { q, c, r_mat, r })
    }

    /// Number of variables.
    pub fn m(&self) -> usize {
        self.q.nrows()
    }

    /// Number of constraints.
    pub fn p(&self) -> usize {
        self.r_mat.nrows()
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        0.5 * z.dot(&(&self.q * z)) + self.c.dot(z)
    }

    /// Largest violation of `Rz >= r` (0 when feasible).
    pub fn violation(&self, z: &DVector<f64>) -> f64 {
        (&self.r - &self.r_mat * z).iter().fold(0.0f64, |m, &v| m.max(v))
    }
}

/// `w = M lambda + q`, `w, lambda >= 0`, `w'lambda = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lcp {
    pub m: DMatrix<f64>,
    pub q: DVector<f64>,
}

impl Lcp {
    pub fn new(m: DMatrix<f64>, q: DVector<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() != q.len() {
            return Err(Error::DimensionMismatch { expected: q.len(), got: m.nrows() });
        }
        Ok(Self { m, q })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcpStatus {
    Solved,
    /// The entering column had no positive entry: no solution along this path.
    RayTermination,
}

#[derive(Debug, Clone)]
pub struct LcpSolution {
    pub lambda: DVector<f64>,
    pub omega: DVector<f64>,
    pub status: LcpStatus,
    pub pivots: usize,
    /// Sorted basis after every pivot, when requested.
    pub basis_trace: Option<Vec<Vec<usize>>>,
}

impl LcpSolution {
    /// `max_j |w_j lambda_j|`.
    pub fn complementarity(&self) -> f64 {
        self.lambda
            .iter()
            .zip(self.omega.iter())
            .fold(0.0f64, |m, (l, w)| m.max((l * w).abs()))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LemkeOptions {
    pub max_pivots: Option<usize>,
    pub record_bases: bool,
}

impl Default for LemkeOptions {
    fn default() -> Self {
        Self { max_pivots: None, record_bases: false }
    }
}

/// Default pivot budget, `50 d`.
pub fn default_max_pivots(d: usize) -> usize {
    50 * d.max(1)
}

/// Solves `lcp` with lexicographic Lemke pivoting.
pub fn lemke_solve(lcp: &Lcp, max_pivots: usize) -> Result<LcpSolution> {
    lemke_solve_with(
        lcp,
        LemkeOptions { max_pivots: Some(max_pivots), record_bases: false },
    )
}

struct Tableau {
    d: usize,
    /// `d x (2d + 1)`: columns `w_0..w_{d-1}`, `z_0..z_{d-1}`, artificial.
    a: DMatrix<f64>,
    rhs: DVector<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn artificial(&self) -> usize {
        2 * self.d
    }

    fn complement(&self, var: usize) -> usize {
        if var < self.d {
            var + self.d
        } else {
            var - self.d
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.a[(row, col)];
        let width = self.a.ncols();
        for j in 0..width {
            self.a[(row, j)] /= piv;
        }
        self.rhs[row] /= piv;
        for i in 0..self.d {
            if i == row {
                continue;
            }
            let f = self.a[(i, col)];
            if f == 0.0 {
                continue;
            }
            for j in 0..width {
                let v = self.a[(row, j)];
                self.a[(i, j)] -= f * v;
            }
            self.rhs[i] -= f * self.rhs[row];
            self.a[(i, col)] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Lexicographic ratio test on `col`. The `w` columns of the tableau hold
    /// the current basis inverse, so comparing `(rhs_i, Binv_i) / a_i`
    /// lexicographically gives a unique leaving row.
    fn ratio_test(&self, col: usize, piv_tol: f64, cmp_tol: f64) -> Option<usize> {
        let cand: Vec<usize> = (0..self.d).filter(|&i| self.a[(i, col)] > piv_tol).collect();
        if cand.is_empty() {
            return None;
        }
        let key = |i: usize, pos: usize| -> f64 {
            let v = if pos == 0 { self.rhs[i] } else { self.a[(i, pos - 1)] };
            v / self.a[(i, col)]
        };
        // z0 leaving at the minimum ratio ends the run; prefer it
        let min_ratio = cand.iter().map(|&i| key(i, 0)).fold(f64::INFINITY, f64::min);
        let art = self.artificial();
        if let Some(&i) = cand
            .iter()
            .find(|&&i| self.basis[i] == art && key(i, 0) <= min_ratio + cmp_tol)
        {
            return Some(i);
        }
        let mut ties = cand;
        for pos in 0..=self.d {
            let best = ties.iter().map(|&i| key(i, pos)).fold(f64::INFINITY, f64::min);
            let tol = if pos == 0 { cmp_tol } else { cmp_tol.max(1e-12 * best.abs()) };
            ties.retain(|&i| key(i, pos) <= best + tol);
            if ties.len() == 1 {
                break;
            }
        }
        ties.first().copied()
    }

    fn solves_without_artificial(&self, lcp: &Lcp) -> bool {
        let d = self.d;
        let values = self.refined_values(lcp);
        let z = values.rows(d, d);
        let omega = &lcp.m * z + &lcp.q;
        let size = 1.0 + lcp.q.amax() + (lcp.m.abs() * z.abs()).amax();
        omega.min() >= -1e-9 * size
    }

    /// Values of all `2d + 1` variables re-solved from the original data for
    /// the final basis, which is more accurate than the accumulated tableau.
    fn refined_values(&self, lcp: &Lcp) -> DVector<f64> {
        let d = self.d;
        let mut b = DMatrix::zeros(d, d);
        for (pos, &var) in self.basis.iter().enumerate() {
            for i in 0..d {
                b[(i, pos)] = if var < d {
                    if i == var { 1.0 } else { 0.0 }
                } else if var < 2 * d {
                    -lcp.m[(i, var - d)]
                } else {
                    -1.0
                };
            }
        }
        let mut values = DVector::zeros(2 * d + 1);
        let xb = b.lu().solve(&lcp.q).filter(|x| x.iter().all(|v| v.is_finite()));
        let xb = xb.unwrap_or_else(|| self.rhs.clone());
        for (pos, &var) in self.basis.iter().enumerate() {
            values[var] = xb[pos].max(0.0);
        }
        values[self.artificial()] = 0.0;
        values
    }
}

/// Lemke's method with lexicographic anti-cycling and covering vector `e`.
pub fn lemke_solve_with(lcp: &Lcp, opts: LemkeOptions) -> Result<LcpSolution> {
    let d = lcp.dim();
    let max_pivots = opts.max_pivots.unwrap_or_else(|| default_max_pivots(d));
    let qscale = 1.0 + lcp.q.amax();
    let mscale = lcp.m.amax().max(1e-300);
    let feas_tol = 1e-13 * qscale;

    let mut trace = opts.record_bases.then(Vec::new);
    if d == 0 || lcp.q.min() >= -feas_tol {
        return Ok(LcpSolution {
            lambda: DVector::zeros(d),
            omega: lcp.q.clone(),
            status: LcpStatus::Solved,
            pivots: 0,
            basis_trace: trace,
        });
    }

    let mut a = DMatrix::zeros(d, 2 * d + 1);
    for i in 0..d {
        a[(i, i)] = 1.0;
        for j in 0..d {
            a[(i, d + j)] = -lcp.m[(i, j)];
        }
        a[(i, 2 * d)] = -1.0;
    }
    let mut t = Tableau { d, a, rhs: lcp.q.clone(), basis: (0..d).collect() };

    let record = |t: &Tableau, trace: &mut Option<Vec<Vec<usize>>>| {
        if let Some(tr) = trace.as_mut() {
            let mut b = t.basis.clone();
            b.sort_unstable();
            tr.push(b);
        }
    };
    record(&t, &mut trace);

    // artificial variable enters at the most negative q; ties go to the
    // largest index, which keeps the initial basis lexicographically feasible
    let qmin = lcp.q.min();
    let row = (0..d)
        .rev()
        .find(|&i| lcp.q[i] <= qmin + 1e-14 * qscale)
        .expect("nonempty");
    let mut entering = t.complement(t.basis[row]);
    t.pivot(row, t.artificial());
    let mut pivots = 1;
    record(&t, &mut trace);

    let cmp_tol = 1e-13 * qscale;
    let status = loop {
        if pivots >= max_pivots {
            return Err(Error::PivotLimitExceeded(max_pivots));
        }
        let colmax = t.a.column(entering).amax();
        let piv_tol = (1e-9 * colmax).max(1e-13 * mscale);
        let Some(row) = t.ratio_test(entering, piv_tol, cmp_tol) else {
            // a ray met with the artificial at (numerical) zero: the current
            // point already solves the LCP
            if t.basis.contains(&t.artificial()) && t.solves_without_artificial(lcp) {
                break LcpStatus::Solved;
            }
            break LcpStatus::RayTermination;
        };
        let leaving = t.basis[row];
        t.pivot(row, entering);
        pivots += 1;
        record(&t, &mut trace);
        if leaving == t.artificial() {
            break LcpStatus::Solved;
        }
        entering = t.complement(leaving);
    };

    let values = if status == LcpStatus::Solved {
        t.refined_values(lcp)
    } else {
        let mut v = DVector::zeros(2 * d + 1);
        for (pos, &var) in t.basis.iter().enumerate() {
            v[var] = t.rhs[pos].max(0.0);
        }
        v
    };
    let lambda = DVector::from_iterator(d, (0..d).map(|i| values[d + i]));
    let omega = &lcp.m * &lambda + &lcp.q;
    Ok(LcpSolution { lambda, omega, status, pivots, basis_trace: trace })
}

/// Ridge multiplier applied to `trace(Q)/m` when `Q` is not safely positive
/// definite.
pub const RIDGE_EPS: f64 = 1e-10;

/// Factorization of `Q` used for the reduction, with the ridge (if any)
/// that had to be added.
pub struct QFactor {
    chol: Cholesky<f64, Dyn>,
    pub ridge: f64,
}

impl QFactor {
    pub fn new(q: &DMatrix<f64>) -> Result<Self> {
        let m = q.nrows();
        if m == 0 {
            return Err(Error::SingularQ);
        }
        if let Some(chol) = Cholesky::new(q.clone()) {
            let l = chol.l_dirty();
            let diag = l.diagonal();
            let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if lo > 0.0 && (lo / hi).powi(2) > 1e-12 {
                return Ok(Self { chol, ridge: 0.0 });
            }
        }
        let tr = q.trace();
        let ridge = RIDGE_EPS * if tr > 0.0 { tr / m as f64 } else { 1.0 };
        let reg = q + DMatrix::identity(m, m) * ridge;
        let chol = Cholesky::new(reg).ok_or(Error::SingularQ)?;
        Ok(Self { chol, ridge })
    }

    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }
}

fn reduce(qp: &Qp, factor: &QFactor) -> Lcp {
    let rt = qp.r_mat.transpose();
    let qinv_rt = factor.solve(&rt);
    let m = &qp.r_mat * &qinv_rt;
    let m = (&m + m.transpose()) * 0.5;
    let qinv_c = factor.solve_vec(&qp.c);
    let q = -(&qp.r_mat * qinv_c) - &qp.r;
    Lcp { m, q }
}

/// `M = R Q^-1 R'`, `q = -R Q^-1 c - r`.
pub fn qp_to_lcp(qp: &Qp) -> Result<Lcp> {
    let factor = QFactor::new(&qp.q)?;
    Ok(reduce(qp, &factor))
}

/// Full output of [`solve_qp_detailed`].
#[derive(Debug, Clone)]
pub struct QpSolution {
    pub z: DVector<f64>,
    pub lcp: LcpSolution,
    /// `||Qz + c - R'lambda||_inf` against the unregularized `Q`.
    pub stationarity: f64,
    pub violation: f64,
    /// Solved through [`primal_dual_lcp`] rather than the reduction.
    pub inverse_free: bool,
}

impl QpSolution {
    pub fn diagnostics(&self, prefix: &str) -> BTreeMap<String, f64> {
        let mut d = BTreeMap::new();
        d.insert(format!("{prefix}_pivots"), self.lcp.pivots as f64);
        d.insert(format!("{prefix}_kkt_stationarity"), self.stationarity);
        d.insert(format!("{prefix}_complementarity"), self.lcp.complementarity());
        d.insert(format!("{prefix}_feasibility_violation"), self.violation);
        d.insert(format!("{prefix}_inverse_free"), f64::from(u8::from(self.inverse_free)));
        d
    }
}

/// Minimizer of the quadratic program.
pub fn solve_qp(qp: &Qp) -> Result<DVector<f64>> {
    solve_qp_detailed(qp).map(|s| s.z)
}

/// Solves an equilibrated copy of `qp` (unit diagonal in `Q`, unit-norm
/// constraint rows) and maps the result back; the scaling changes neither
/// the minimizer nor the products `lambda_i omega_i`.
///
/// The reduction through `Q^-1` is tried first. When `Q` needs a ridge, or
/// the recovered point fails its feasibility or sign checks, the problem is
/// re-solved through the inverse-free LCP of [`primal_dual_lcp`].
pub fn solve_qp_detailed(qp: &Qp) -> Result<QpSolution> {
    let m = qp.m();
    let col = DVector::from_iterator(m, qp.q.diagonal().iter().map(|&d| if d > 0.0 { d.sqrt().recip() } else { 1.0 }));
    let mut r_s = qp.r_mat.clone();
    for (j, mut c) in r_s.column_iter_mut().enumerate() {
        c *= col[j];
    }
    let row = DVector::from_iterator(
        qp.p(),
        r_s.row_iter().map(|r| {
            let nrm = r.norm();
            if nrm > 0.0 { nrm.recip() } else { 1.0 }
        }),
    );
    for (i, mut r) in r_s.row_iter_mut().enumerate() {
        r *= row[i];
    }
    let scaled = Qp {
        q: DMatrix::from_fn(m, m, |i, j| qp.q[(i, j)] * col[i] * col[j]),
        c: qp.c.component_mul(&col),
        r_mat: r_s,
        r: qp.r.component_mul(&row),
    };

    let factor = QFactor::new(&scaled.q)?;
    let mut dual_pivots = 0;
    if factor.ridge == 0.0 {
        let lcp = reduce(&scaled, &factor);
        let sol = lemke_solve_with(&lcp, LemkeOptions::default())?;
        dual_pivots = sol.pivots;
        if sol.status == LcpStatus::Solved {
            let y = factor.solve_vec(&(scaled.r_mat.transpose() * &sol.lambda - &scaled.c));
            if accept(&scaled, &y, &sol.lambda) {
                return Ok(finish(qp, y.component_mul(&col), sol, &row, false));
            }
        }
    }

    let lcp = primal_dual_lcp(&scaled);
    let mut sol = lemke_solve_with(&lcp, LemkeOptions::default())?;
    if sol.status == LcpStatus::RayTermination {
        return Err(if is_infeasible(&scaled.r_mat, &scaled.r)? {
            Error::InfeasibleQp
        } else {
            Error::RayTermination
        });
    }
    let y = sol.lambda.rows(0, m) - sol.lambda.rows(m, m);
    let mu = sol.lambda.rows(2 * m, qp.p()).into_owned();
    sol.pivots += dual_pivots;
    sol.omega = &scaled.r_mat * &y - &scaled.r;
    sol.lambda = mu;
    Ok(finish(qp, y.component_mul(&col), sol, &row, true))
}

/// Feasibility and multiplier-sign check of a candidate on the scaled QP.
fn accept(qp: &Qp, z: &DVector<f64>, lambda: &DVector<f64>) -> bool {
    let size = 1.0 + qp.r.amax() + (qp.r_mat.abs() * z.abs()).amax();
    let slack = &qp.r_mat * z - &qp.r;
    slack.iter().all(|&s| s >= -1e-10 * size) && lambda.iter().all(|&l| l >= 0.0)
}

fn finish(qp: &Qp, z: DVector<f64>, mut sol: LcpSolution, row: &DVector<f64>, inverse_free: bool) -> QpSolution {
    sol.lambda.component_mul_assign(row);
    sol.omega = &qp.r_mat * &z - &qp.r;
    let stationarity = (&qp.q * &z + &qp.c - qp.r_mat.transpose() * &sol.lambda).amax();
    let violation = qp.violation(&z);
    QpSolution { z, lcp: sol, stationarity, violation, inverse_free }
}

/// LCP of the KKT system with free variables split as `z = u - v`:
///
/// ```text
/// M = [ Q  -Q  -R' ]     q = [  c ]
///     [-Q   Q   R' ]         [ -c ]
///     [ R  -R   0  ]         [ -r ]
/// ```
///
/// `M` is positive semidefinite whenever `Q` is, so no inverse (and no
/// ridge) is needed.
pub fn primal_dual_lcp(qp: &Qp) -> Lcp {
    let (m, p) = (qp.m(), qp.p());
    let d = 2 * m + p;
    let mut mm = DMatrix::zeros(d, d);
    mm.view_mut((0, 0), (m, m)).copy_from(&qp.q);
    mm.view_mut((0, m), (m, m)).copy_from(&(-&qp.q));
    mm.view_mut((m, 0), (m, m)).copy_from(&(-&qp.q));
    mm.view_mut((m, m), (m, m)).copy_from(&qp.q);
    let rt = qp.r_mat.transpose();
    mm.view_mut((0, 2 * m), (m, p)).copy_from(&(-&rt));
    mm.view_mut((m, 2 * m), (m, p)).copy_from(&rt);
    mm.view_mut((2 * m, 0), (p, m)).copy_from(&qp.r_mat);
    mm.view_mut((2 * m, m), (p, m)).copy_from(&(-&qp.r_mat));
    let mut q = DVector::zeros(d);
    q.rows_mut(0, m).copy_from(&qp.c);
    q.rows_mut(m, m).copy_from(&(-&qp.c));
    q.rows_mut(2 * m, p).copy_from(&(-&qp.r));
    Lcp { m: mm, q }
}

/// Feasibility probe for `Rz >= r`: Lemke on the projection of the origin
/// onto the constraint set, whose LCP has a solution iff the set is nonempty.
pub fn is_infeasible(r_mat: &DMatrix<f64>, r: &DVector<f64>) -> Result<bool> {
    let m = r_mat * r_mat.transpose();
    let lcp = Lcp { m, q: -r.clone() };
    let sol = lemke_solve_with(&lcp, LemkeOptions::default())?;
    Ok(sol.status == LcpStatus::RayTermination)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn reduction_identity() {
        let qp = Qp::new(DMatrix::identity(2, 2), v(&[0.0, 0.0]), DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let lcp = qp_to_lcp(&qp).unwrap();
        assert_eq!(lcp.m, DMatrix::identity(2, 2));
        assert_eq!(lcp.q, v(&[0.0, 0.0]));
    }

    #[test]
    fn reduction_scaled() {
        let qp = Qp::new(DMatrix::identity(2, 2) * 2.0, v(&[-2.0, 0.0]), DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let lcp = qp_to_lcp(&qp).unwrap();
        assert!((lcp.m.clone() - DMatrix::identity(2, 2) * 0.5).amax() < 1e-15);
        assert!((lcp.q.clone() - v(&[1.0, 0.0])).amax() < 1e-15);
    }

    #[test]
    fn nonnegative_q_is_trivial() {
        let lcp = Lcp::new(DMatrix::identity(2, 2), v(&[1.0, 0.0])).unwrap();
        let s = lemke_solve(&lcp, 100).unwrap();
        assert_eq!(s.pivots, 0);
        assert_eq!(s.lambda, v(&[0.0, 0.0]));
        assert_eq!(s.omega, v(&[1.0, 0.0]));
    }

    #[test]
    fn identity_lcp() {
        let lcp = Lcp::new(DMatrix::identity(2, 2), v(&[-1.0, 2.0])).unwrap();
        let s = lemke_solve(&lcp, 100).unwrap();
        assert_eq!(s.status, LcpStatus::Solved);
        assert!((s.lambda.clone() - v(&[1.0, 0.0])).amax() < 1e-14);
        assert!((s.omega.clone() - v(&[0.0, 2.0])).amax() < 1e-14);
    }

    #[test]
    fn qp_interior_and_binding() {
        let qp = Qp::new(DMatrix::identity(2, 2), v(&[-1.0, -1.0]), DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let s = solve_qp_detailed(&qp).unwrap();
        assert!((s.z.clone() - v(&[1.0, 1.0])).amax() < 1e-14);
        assert_eq!(s.lcp.lambda, v(&[0.0, 0.0]));

        let qp = Qp::new(DMatrix::identity(2, 2), v(&[1.0, 1.0]), DMatrix::identity(2, 2), v(&[0.0, 0.0])).unwrap();
        let z = solve_qp(&qp).unwrap();
        assert!(z.amax() < 1e-14);
    }

    #[test]
    fn ray_termination_on_infeasible() {
        // z >= 1 and -z >= 0 cannot both hold
        let qp = Qp::new(
            DMatrix::identity(1, 1),
            v(&[0.0]),
            DMatrix::from_row_slice(2, 1, &[1.0, -1.0]),
            v(&[1.0, 0.0]),
        )
        .unwrap();
        assert_eq!(solve_qp(&qp).unwrap_err(), Error::InfeasibleQp);
    }

    #[test]
    fn pivot_limit() {
        let lcp = Lcp::new(DMatrix::identity(3, 3), v(&[-1.0, -2.0, -3.0])).unwrap();
        assert_eq!(lemke_solve(&lcp, 1).unwrap_err(), Error::PivotLimitExceeded(1));
    }

    #[test]
    fn rejects_asymmetric_q() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(Qp::new(q, v(&[0.0, 0.0]), DMatrix::identity(2, 2), v(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn ray_at_zero_artificial_is_a_solution() {
        // fitted spreads forced to zero by a zero-spread row; all five
        // constraints are active at the optimum z = 0
        let qp = Qp::new(
            DMatrix::from_row_slice(2, 2, &[2816.1986471821115, -97.03639036948691, -97.03639036948691, 768.507243990915]),
            v(&[-1804.3256364178055, 1099.1919120539949]),
            DMatrix::from_row_slice(
                5,
                2,
                &[
                    1.0, 0.0, 0.0, 1.0, -84.40756870672563, -81.59723420424055, -45.96142307617603,
                    -44.21484965345912, -0.8749000123682515, -82.4771006714422,
                ],
            ),
            v(&[0.0, 0.0, -50.81061181294997, -78.63781580043296, 0.0]),
        )
        .unwrap();
        let s = solve_qp_detailed(&qp).unwrap();
        assert!(s.z.amax() < 1e-12);
        assert!(s.violation < 1e-12);
        let pd = lemke_solve_with(&primal_dual_lcp(&qp), LemkeOptions::default()).unwrap();
        assert_eq!(pd.status, LcpStatus::Solved);
    }

    #[test]
    fn singular_q_uses_inverse_free_path() {
        // duplicated column: Q has a null direction
        let qp = Qp::new(
            DMatrix::from_element(2, 2, 1.0),
            v(&[-1.0, -1.0]),
            DMatrix::identity(2, 2),
            v(&[0.0, 0.0]),
        )
        .unwrap();
        let s = solve_qp_detailed(&qp).unwrap();
        assert!(s.inverse_free);
        assert!((s.z.sum() - 1.0).abs() < 1e-12);
        assert!(s.z.min() >= 0.0);
    }
}
