//! L1-penalized estimation with cross-validated penalties.
//!
//! The mid and spread blocks are penalized separately:
//!
//! ```text
//! mid:    1/2 ||v_m - F_m a||^2 + lambda_mid ||a||_1
//! spread: 1/2 ||v_s - F_s a||^2 + lambda_spr ||a||_1   s.t. a in Gamma
//! ```
//!
//! The mid problem is solved by cyclic coordinate descent followed by an
//! exact solve on the detected support. On `Gamma` every coefficient is
//! nonnegative, so the spread penalty is linear and the problem is a QP
//! handled by the same Lemke machinery as least squares.
//!
//! Coefficient vectors returned by [`fit_lasso_mid`] and [`fit_lasso_spr`]
//! are in the design's working units (the original units unless the design
//! was standardized).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::{build_design_with, DesignOptions, DesignSystem, Variant};
use crate::error::{Error, Result};
use crate::interval::{IntervalSample, Tau};
use crate::ls::{finish_fit, solve_spread, FitResult, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    Mid,
    Spread,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaRule {
    /// Minimizer of the cross-validated error.
    #[default]
    Mse,
    /// Largest penalty within one standard error of the minimum.
    #[serde(rename = "1se")]
    #[value(name = "1se")]
    OneSe,
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Smallest penalty at which the mid solution is zero, `||F_m'v_m||_inf`.
pub fn lambda_max_mid(design: &DesignSystem) -> f64 {
    (design.fm.transpose() * &design.vm).amax()
}

/// Smallest penalty at which the spread solution is zero,
/// `max(0, max_j (F_s'v_s)_j)`. Zero is optimal once the penalty dominates
/// every positive correlation because `Gamma` lies in the nonnegative orthant.
pub fn lambda_max_spr(design: &DesignSystem) -> f64 {
    (design.fs.transpose() * &design.vs).max().max(0.0)
}

pub fn lambda_max(design: &DesignSystem, block: Block) -> f64 {
    match block {
        Block::Mid => lambda_max_mid(design),
        Block::Spread => lambda_max_spr(design),
    }
}

/// `count` log-spaced penalties from `lambda_max` down to `ratio * lambda_max`.
pub fn lambda_grid(design: &DesignSystem, block: Block, count: usize, ratio: f64) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {count}")));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(format!("grid ratio must lie in (0, 1), got {ratio}")));
    }
    let top = lambda_max(design, block);
    // no signal at all: any positive grid gives the zero solution
    let top = if top > 0.0 { top } else { 1.0 };
    let step = ratio.ln() / (count - 1) as f64;
    Ok((0..count).map(|i| top * (step * i as f64).exp()).collect())
}

/// Subgradient optimality residual of a mid-block solution.
pub fn lasso_mid_kkt(design: &DesignSystem, lambda: f64, a: &DVector<f64>) -> f64 {
    let g = design.fm.transpose() * (&design.vm - &design.fm * a);
    g.iter()
        .zip(a.iter())
        .map(|(&gj, &aj)| {
            if aj != 0.0 {
                (gj - lambda * aj.signum()).abs()
            } else {
                (gj.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Coordinate descent on `1/2 a'Ga - b'a + lambda ||a||_1`.
struct LassoCd {
    g: DMatrix<f64>,
    b: DVector<f64>,
}

impl LassoCd {
    fn new(f: &DMatrix<f64>, v: &DVector<f64>) -> Self {
        Self { g: f.transpose() * f, b: f.transpose() * v }
    }

    fn solve(&self, lambda: f64, warm: Option<&DVector<f64>>) -> DVector<f64> {
        let p = self.b.len();
        let mut a = warm.cloned().unwrap_or_else(|| DVector::zeros(p));
        // gradient of the smooth part, negated: b - G a
        let mut grad = &self.b - &self.g * &a;
        let scale = self.b.amax().max(1e-300);
        for _ in 0..100_000 {
            let mut max_move = 0.0f64;
            for j in 0..p {
                let gjj = self.g[(j, j)];
                if gjj <= 0.0 {
                    a[j] = 0.0;
                    continue;
                }
                let old = a[j];
                let new = soft_threshold(grad[j] + gjj * old, lambda) / gjj;
                let delta = new - old;
                if delta != 0.0 {
                    a[j] = new;
                    for i in 0..p {
                        grad[i] -= self.g[(i, j)] * delta;
                    }
                    max_move = max_move.max(delta.abs() * gjj);
                }
            }
            if max_move <= 1e-15 * scale {
                break;
            }
        }
        self.polish(lambda, a)
    }

    /// Re-solves the stationarity equations on the support; accepted only if
    /// signs and the inactive subgradient bounds survive.
    fn polish(&self, lambda: f64, a: DVector<f64>) -> DVector<f64> {
        let support: Vec<usize> = (0..a.len()).filter(|&j| a[j] != 0.0).collect();
        if support.is_empty() {
            return a;
        }
        let gs = self.g.select_rows(support.iter()).select_columns(support.iter());
        let rhs = DVector::from_iterator(support.len(), support.iter().map(|&j| self.b[j] - lambda * a[j].signum()));
        let Some(sol) = gs.lu().solve(&rhs) else { return a };
        if support.iter().zip(sol.iter()).any(|(&j, &x)| !x.is_finite() || x * a[j].signum() <= 0.0) {
            return a;
        }
        let mut polished = DVector::zeros(a.len());
        for (&j, &x) in support.iter().zip(sol.iter()) {
            polished[j] = x;
        }
        let grad = &self.b - &self.g * &polished;
        let tol = 1e-12 * (1.0 + self.b.amax());
        let ok = (0..a.len()).all(|j| polished[j] != 0.0 || grad[j].abs() <= lambda + tol);
        if ok {
            polished
        } else {
            a
        }
    }
}

/// Mid-block Lasso solution.
pub fn fit_lasso_mid(design: &DesignSystem, lambda: f64) -> Result<DVector<f64>> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("penalty must be nonnegative, got {lambda}")));
    }
    Ok(LassoCd::new(&design.fm, &design.vm).solve(lambda, None))
}

/// Spread-block constrained Lasso solution.
pub fn fit_lasso_spr(design: &DesignSystem, lambda: f64) -> Result<DVector<f64>> {
    spread_solution(design, lambda).map(|(a, _)| a)
}

fn spread_solution(design: &DesignSystem, lambda: f64) -> Result<(DVector<f64>, BTreeMap<String, f64>)> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("penalty must be nonnegative, got {lambda}")));
    }
    if lambda >= lambda_max_spr(design) {
        return Ok((DVector::zeros(design.ps()), BTreeMap::new()));
    }
    let sol = solve_spread(design, 1.0, lambda)?;
    let diag = sol.qp.as_ref().map(|q| q.diagnostics("spread")).unwrap_or_default();
    Ok((sol.a_s, diag))
}

/// Grid and fold settings for cross-validation.
#[derive(Debug, Clone, Copy)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub n_lambdas: usize,
    pub ratio: f64,
    pub design: DesignOptions,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self { folds: 5, seed: 0, n_lambdas: 100, ratio: 1e-3, design: DesignOptions::default() }
    }
}

/// Cross-validation curve for one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPath {
    /// Strictly decreasing.
    pub lambdas: Vec<f64>,
    /// Full-sample solutions along the grid, in working units.
    pub coefs: Vec<Vec<f64>>,
    /// Mean over folds of this block's share of the held-out mean squared
    /// `d_tau` error.
    pub cv_mean: Vec<f64>,
    pub cv_std_err: Vec<f64>,
    pub lambda_mse: f64,
    pub lambda_1se: f64,
}

impl BlockPath {
    pub fn select(&self, rule: LambdaRule) -> f64 {
        match rule {
            LambdaRule::Mse => self.lambda_mse,
            LambdaRule::OneSe => self.lambda_1se,
        }
    }

    fn from_errors(lambdas: Vec<f64>, coefs: Vec<Vec<f64>>, fold_err: &[Vec<f64>]) -> Self {
        let k = fold_err.len() as f64;
        let nl = lambdas.len();
        let mut cv_mean = vec![0.0; nl];
        let mut cv_std_err = vec![0.0; nl];
        for i in 0..nl {
            let mean = fold_err.iter().map(|e| e[i]).sum::<f64>() / k;
            let var = fold_err.iter().map(|e| (e[i] - mean).powi(2)).sum::<f64>() / (k - 1.0);
            cv_mean[i] = mean;
            cv_std_err[i] = (var / k).sqrt();
        }
        // first minimum: ties favour the larger penalty
        let best = (0..nl).fold(0, |b, i| if cv_mean[i] < cv_mean[b] { i } else { b });
        let bound = cv_mean[best] + cv_std_err[best];
        let one_se = (0..=best).find(|&i| cv_mean[i] <= bound).unwrap_or(best);
        Self {
            lambda_mse: lambdas[best],
            lambda_1se: lambdas[one_se],
            lambdas,
            coefs,
            cv_mean,
            cv_std_err,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoPath {
    pub mid: BlockPath,
    pub spr: BlockPath,
}

/// Seeded partition of `0..n` into `folds` held-out sets.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 || folds > n {
        return Err(Error::FoldTooSmall(format!("{folds} folds for {n} observations")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = vec![Vec::new(); folds];
    for (pos, &i) in perm.iter().enumerate() {
        out[pos % folds].push(i);
    }
    for f in &mut out {
        f.sort_unstable();
    }
    if n - out.iter().map(Vec::len).max().unwrap_or(0) < 2 {
        return Err(Error::FoldTooSmall("training part of a fold has fewer than 2 rows".into()));
    }
    Ok(out)
}

/// Held-out squared errors of the two blocks, weighted as in `d_tau`.
fn held_out_errors(
    train: &DesignSystem,
    test: &IntervalSample,
    tau: Tau,
    a_m_work: &DVector<f64>,
    a_s_work: &DVector<f64>,
) -> (f64, f64) {
    let a_m = train.unscale_mid(a_m_work);
    let a_s = train.unscale_spr(a_s_work);
    let d_mid = train.mean_y.mid() - train.mean_mid_xebl.dot(&a_m);
    let d_spr = train.mean_y.spr() - train.mean_spr_xebl.dot(&a_s);
    let (mut em, mut es) = (0.0, 0.0);
    for (y, row) in test.y().iter().zip(test.x()) {
        let k = row.len();
        let mut mid = d_mid;
        let mut spr = d_spr;
        for (i, xi) in row.iter().enumerate() {
            mid += xi.mid() * a_m[i];
            spr += xi.spr() * a_s[i];
            if train.variant == Variant::Full {
                mid += xi.spr() * a_m[k + i];
                spr += xi.mid().abs() * a_s[k + i];
            }
        }
        em += (y.mid() - mid).powi(2);
        es += (y.spr() - spr).powi(2);
    }
    let n = test.n() as f64;
    ((1.0 - tau.value()) * em / n, tau.value() * es / n)
}

/// K-fold cross-validation with default grid settings.
pub fn cross_validate(s: &IntervalSample, variant: Variant, tau: Tau, folds: usize, seed: u64) -> Result<LassoPath> {
    cross_validate_with(s, variant, tau, &CvOptions { folds, seed, ..CvOptions::default() })
}

pub fn cross_validate_with(s: &IntervalSample, variant: Variant, tau: Tau, opts: &CvOptions) -> Result<LassoPath> {
    let full = build_design_with(s, variant, opts.design)?;
    let grid_mid = lambda_grid(&full, Block::Mid, opts.n_lambdas, opts.ratio)?;
    let grid_spr = lambda_grid(&full, Block::Spread, opts.n_lambdas, opts.ratio)?;
    let folds = fold_assignment(s.n(), opts.folds, opts.seed)?;

    let mut err_mid = Vec::with_capacity(folds.len());
    let mut err_spr = Vec::with_capacity(folds.len());
    for held in &folds {
        let train_idx: Vec<usize> = (0..s.n()).filter(|i| held.binary_search(i).is_err()).collect();
        let train = build_design_with(&s.select(&train_idx)?, variant, opts.design)?;
        let test = s.select(held)?;
        let cd = LassoCd::new(&train.fm, &train.vm);
        let zero_s = DVector::zeros(train.ps());
        let zero_m = DVector::zeros(train.pm());
        let mut warm: Option<DVector<f64>> = None;
        let mut em = Vec::with_capacity(grid_mid.len());
        for &lam in &grid_mid {
            let a = cd.solve(lam, warm.as_ref());
            em.push(held_out_errors(&train, &test, tau, &a, &zero_s).0);
            warm = Some(a);
        }
        let mut es = Vec::with_capacity(grid_spr.len());
        for &lam in &grid_spr {
            let (a, _) = spread_solution(&train, lam)?;
            es.push(held_out_errors(&train, &test, tau, &zero_m, &a).1);
        }
        err_mid.push(em);
        err_spr.push(es);
    }

    let cd = LassoCd::new(&full.fm, &full.vm);
    let mut warm: Option<DVector<f64>> = None;
    let mut coefs_mid = Vec::with_capacity(grid_mid.len());
    for &lam in &grid_mid {
        let a = cd.solve(lam, warm.as_ref());
        coefs_mid.push(a.as_slice().to_vec());
        warm = Some(a);
    }
    let coefs_spr = grid_spr
        .iter()
        .map(|&lam| spread_solution(&full, lam).map(|(a, _)| a.as_slice().to_vec()))
        .collect::<Result<Vec<_>>>()?;

    Ok(LassoPath {
        mid: BlockPath::from_errors(grid_mid, coefs_mid, &err_mid),
        spr: BlockPath::from_errors(grid_spr, coefs_spr, &err_spr),
    })
}

/// How the penalty for one block is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    Fixed(f64),
    Cv(LambdaRule),
}

#[derive(Debug, Clone, Copy)]
pub struct LassoConfig {
    pub mid: LambdaChoice,
    pub spr: LambdaChoice,
    pub cv: CvOptions,
}

/// Refit on the full sample at fixed penalties.
pub fn fit_lasso_fixed(design: &DesignSystem, tau: Tau, lambda_mid: f64, lambda_spr: f64) -> Result<FitResult> {
    let a_m = fit_lasso_mid(design, lambda_mid)?;
    let (a_s, mut diagnostics) = spread_solution(design, lambda_spr)?;
    diagnostics.insert("mid_kkt".into(), lasso_mid_kkt(design, lambda_mid, &a_m));
    let rank = a_m.iter().filter(|&&v| v != 0.0).count();
    let mut fit = finish_fit(design, tau, Method::Lasso, &a_m, &a_s, design.pm(), 0, diagnostics, lambda_mid, lambda_spr)?;
    fit.diagnostics.insert("mid_nonzero".into(), rank as f64);
    fit.diagnostics.remove("mid_rank");
    fit.diagnostics.remove("degenerate_design");
    fit.diagnostics.remove("spread_columns_dropped");
    Ok(fit)
}

/// Cross-validated Lasso: one selection per block, then a full-sample refit.
pub fn fit_lasso(
    s: &IntervalSample,
    variant: Variant,
    tau: Tau,
    rule: LambdaRule,
    folds: usize,
    seed: u64,
) -> Result<FitResult> {
    let cv = CvOptions { folds, seed, ..CvOptions::default() };
    fit_lasso_with(s, variant, tau, &LassoConfig { mid: LambdaChoice::Cv(rule), spr: LambdaChoice::Cv(rule), cv })
        .map(|(fit, _)| fit)
}

pub fn fit_lasso_with(
    s: &IntervalSample,
    variant: Variant,
    tau: Tau,
    cfg: &LassoConfig,
) -> Result<(FitResult, Option<LassoPath>)> {
    let design = build_design_with(s, variant, cfg.cv.design)?;
    let needs_cv = matches!(cfg.mid, LambdaChoice::Cv(_)) || matches!(cfg.spr, LambdaChoice::Cv(_));
    let path = if needs_cv { Some(cross_validate_with(s, variant, tau, &cfg.cv)?) } else { None };
    let pick = |choice: LambdaChoice, block: fn(&LassoPath) -> &BlockPath| match choice {
        LambdaChoice::Fixed(l) => l,
        LambdaChoice::Cv(rule) => block(path.as_ref().expect("cv path")).select(rule),
    };
    let lambda_mid = pick(cfg.mid, |p| &p.mid);
    let lambda_spr = pick(cfg.spr, |p| &p.spr);
    let mut fit = fit_lasso_fixed(&design, tau, lambda_mid, lambda_spr)?;
    if needs_cv {
        fit.diagnostics.insert("cv_folds".into(), cfg.cv.folds as f64);
        fit.diagnostics.insert("cv_seed".into(), cfg.cv.seed as f64);
    }
    Ok((fit, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::build_design;
    use crate::interval::Interval;
    use crate::ls::fit_ls;
    use crate::oracle::{brute_force_lasso, simulate};
    use crate::Coefficients;

    fn sample(seed: u64, noise: f64) -> IntervalSample {
        let mut truth = Coefficients::zeros(2);
        truth.b1 = vec![0.8, -0.4];
        truth.b2 = vec![0.3, 0.0];
        truth.b3 = vec![0.1, 0.05];
        truth.b4 = vec![0.0, 0.2];
        truth.delta = Interval::new(1.0, 2.0).unwrap();
        simulate(30, 2, &truth, noise, seed).unwrap()
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
    }

    #[test]
    fn zero_penalty_is_ols() {
        let d = build_design(&sample(1, 1.0), Variant::Full).unwrap();
        let ls = fit_ls(&d, Tau::default()).unwrap();
        let a = fit_lasso_mid(&d, 0.0).unwrap();
        let want = ls.coefficients.mid_block(Variant::Full);
        assert!((a - want).amax() < 1e-9);
    }

    #[test]
    fn above_lambda_max_is_exactly_zero() {
        let d = build_design(&sample(2, 1.0), Variant::Full).unwrap();
        let lm = lambda_max_mid(&d);
        assert!(fit_lasso_mid(&d, lm).unwrap().iter().all(|&v| v == 0.0));
        assert!(fit_lasso_mid(&d, 2.0 * lm).unwrap().iter().all(|&v| v == 0.0));
        assert!(fit_lasso_mid(&d, 0.99 * lm).unwrap().iter().any(|&v| v != 0.0));
        let ls = lambda_max_spr(&d);
        assert!(fit_lasso_spr(&d, ls).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mid_matches_sign_enumeration() {
        for seed in 0..10 {
            let d = build_design(&sample(seed, 2.0), Variant::Full).unwrap();
            let lm = lambda_max_mid(&d);
            for frac in [0.01, 0.1, 0.5, 0.9] {
                let lam = frac * lm;
                let a = fit_lasso_mid(&d, lam).unwrap();
                let b = brute_force_lasso(&d.fm, &d.vm, lam).unwrap();
                let obj = |x: &DVector<f64>| 0.5 * d.mid_rss(x) + lam * x.abs().sum();
                assert!(obj(&a) <= obj(&b) + 1e-9 * obj(&b).abs().max(1.0));
                assert!(lasso_mid_kkt(&d, lam, &a) <= 1e-8);
            }
        }
    }

    #[test]
    fn grid_shape() {
        let d = build_design(&sample(3, 1.0), Variant::Full).unwrap();
        let g = lambda_grid(&d, Block::Mid, 2, 0.01).unwrap();
        assert_eq!(g[0], lambda_max_mid(&d));
        assert!((g[1] - 0.01 * g[0]).abs() < 1e-15 * g[0]);
        let g = lambda_grid(&d, Block::Spread, 50, 1e-3).unwrap();
        let steps: Vec<f64> = g.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert!(steps.iter().all(|s| (s - steps[0]).abs() < 1e-12));
        assert!(lambda_grid(&d, Block::Mid, 1, 0.1).is_err());
    }

    #[test]
    fn folds_partition_and_are_seeded() {
        let f = fold_assignment(11, 3, 5).unwrap();
        let mut all: Vec<usize> = f.concat();
        all.sort_unstable();
        assert_eq!(all, (0..11).collect::<Vec<_>>());
        assert_eq!(f, fold_assignment(11, 3, 5).unwrap());
        assert!(matches!(fold_assignment(2, 2, 0), Err(Error::FoldTooSmall(_))));
        assert!(matches!(fold_assignment(5, 1, 0), Err(Error::FoldTooSmall(_))));
        assert!(matches!(fold_assignment(5, 6, 0), Err(Error::FoldTooSmall(_))));
    }

    #[test]
    fn cv_is_deterministic_and_ordered() {
        let s = sample(4, 2.0);
        let opts = CvOptions { folds: 5, seed: 9, n_lambdas: 20, ..CvOptions::default() };
        let a = cross_validate_with(&s, Variant::Full, Tau::default(), &opts).unwrap();
        let b = cross_validate_with(&s, Variant::Full, Tau::default(), &opts).unwrap();
        assert_eq!(a, b);
        for p in [&a.mid, &a.spr] {
            assert!(p.lambda_1se >= p.lambda_mse);
            assert!(p.cv_std_err.iter().all(|&e| e >= 0.0));
            assert!(p.lambdas.windows(2).all(|w| w[1] < w[0]));
        }
    }
}
