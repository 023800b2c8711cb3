//! Real design matrices derived from an interval sample.
//!
//! The interval model splits into a midpoint relation and a spread relation:
//!
//! ```text
//! mid y = mid x' b1 + spr x' b4 + mid e
//! spr y = spr x' b2 + |mid x|' b3 + spr e          (b2, b3 >= 0)
//! ```
//!
//! Column layout: the mid block is `(mid X | spr X)` with coefficients
//! `A_m = (b1 | b4)`, the spread block is `(spr X | |mid X|)` with
//! coefficients `A_s = (b2 | b3)`. Under [`Variant::ModelM`] the cross
//! columns are dropped and the blocks are `mid X` and `spr X`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    Full,
    /// `b3 = b4 = 0`: mids explain mids and spreads explain spreads only.
    ModelM,
}

/// Options for [`build_design_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct DesignOptions {
    /// Scale every centered column to unit standard deviation. Coefficients
    /// are always reported in the original units.
    pub standardize: bool,
}

/// Centered matrices and constraint data for one sample.
///
/// All matrices are in "working units": when standardization is on, column
/// `j` of a block has been divided by `scale_*[j]`. With it off (the
/// default) every scale is 1.
#[derive(Debug, Clone)]
pub struct DesignSystem {
    pub variant: Variant,
    pub n: usize,
    pub k: usize,
    /// Centered mid block, `n x pm`.
    pub fm: DMatrix<f64>,
    /// Centered spread block, `n x ps`.
    pub fs: DMatrix<f64>,
    pub vm: DVector<f64>,
    pub vs: DVector<f64>,
    /// Uncentered spread block in working units; `spread_rows * A_s <= spr y`
    /// is the residual-existence constraint.
    pub spread_rows: DMatrix<f64>,
    pub spr_x: DMatrix<f64>,
    pub abs_mid_x: DMatrix<f64>,
    pub mid_x: DMatrix<f64>,
    pub spr_y: DVector<f64>,
    pub mid_y: DVector<f64>,
    /// Column means of the uncentered mid block (original units).
    pub mean_mid_xebl: DVector<f64>,
    /// Column means of the uncentered spread block (original units).
    pub mean_spr_xebl: DVector<f64>,
    pub mean_y: Interval,
    pub scale_mid: DVector<f64>,
    pub scale_spr: DVector<f64>,
}

/// Regression coefficients `B = (b1 | b2 | b3 | b4)` and the interval
/// intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub b3: Vec<f64>,
    pub b4: Vec<f64>,
    pub delta: Interval,
}

impl Coefficients {
    pub fn zeros(k: usize) -> Self {
        Self {
            b1: vec![0.0; k],
            b2: vec![0.0; k],
            b3: vec![0.0; k],
            b4: vec![0.0; k],
            delta: Interval::ZERO,
        }
    }

    pub fn k(&self) -> usize {
        self.b1.len()
    }

    /// Flattened `(b1 | b2 | b3 | b4)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(4 * self.k());
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(&self.b2);
        v.extend_from_slice(&self.b3);
        v.extend_from_slice(&self.b4);
        v
    }

    /// Mid-block vector `(b1 | b4)` (or `b1` under Model M).
    pub fn mid_block(&self, variant: Variant) -> DVector<f64> {
        match variant {
            Variant::Full => DVector::from_iterator(
                2 * self.k(),
                self.b1.iter().chain(self.b4.iter()).copied(),
            ),
            Variant::ModelM => DVector::from_column_slice(&self.b1),
        }
    }

    /// Spread-block vector `(b2 | b3)` (or `b2` under Model M).
    pub fn spr_block(&self, variant: Variant) -> DVector<f64> {
        match variant {
            Variant::Full => DVector::from_iterator(
                2 * self.k(),
                self.b2.iter().chain(self.b3.iter()).copied(),
            ),
            Variant::ModelM => DVector::from_column_slice(&self.b2),
        }
    }

    /// Assembles coefficients from block vectors in original units.
    pub fn from_blocks(
        variant: Variant,
        k: usize,
        a_m: &DVector<f64>,
        a_s: &DVector<f64>,
        delta: Interval,
    ) -> Result<Self> {
        let width = match variant {
            Variant::Full => 2 * k,
            Variant::ModelM => k,
        };
        for v in [a_m, a_s] {
            if v.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    got: v.len(),
                });
            }
        }
        let mut c = Coefficients::zeros(k);
        c.delta = delta;
        c.b1.copy_from_slice(&a_m.as_slice()[..k]);
        c.b2.copy_from_slice(&a_s.as_slice()[..k]);
        if variant == Variant::Full {
            c.b4.copy_from_slice(&a_m.as_slice()[k..]);
            c.b3.copy_from_slice(&a_s.as_slice()[k..]);
        }
        Ok(c)
    }
}

/// Builds the design with default options.
pub fn build_design(s: &IntervalSample, variant: Variant) -> Result<DesignSystem> {
    build_design_with(s, variant, DesignOptions::default())
}

fn center_columns(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = m.nrows() as f64;
    let means = DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum() / n));
    let mut centered = m.clone();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-means[j]);
    }
    (centered, means)
}

fn column_scales(centered: &DMatrix<f64>, standardize: bool) -> DVector<f64> {
    let n = centered.nrows() as f64;
    DVector::from_iterator(
        centered.ncols(),
        centered.column_iter().map(|c| {
            let sd = (c.norm_squared() / n).sqrt();
            if standardize && sd > 0.0 {
                sd
            } else {
                1.0
            }
        }),
    )
}

fn divide_columns(m: &mut DMatrix<f64>, scale: &DVector<f64>) {
    for (j, mut col) in m.column_iter_mut().enumerate() {
        col /= scale[j];
    }
}

pub fn build_design_with(
    s: &IntervalSample,
    variant: Variant,
    opts: DesignOptions,
) -> Result<DesignSystem> {
    let n = s.n();
    if n < 2 {
        return Err(Error::DegenerateSample(n));
    }
    let k = s.k();
    let mid_x = DMatrix::from_fn(n, k, |j, i| s.row(j)[i].mid());
    let spr_x = DMatrix::from_fn(n, k, |j, i| s.row(j)[i].spr());
    let abs_mid_x = mid_x.abs();
    let mid_y = DVector::from_iterator(n, s.y().iter().map(Interval::mid));
    let spr_y = DVector::from_iterator(n, s.y().iter().map(Interval::spr));

    let (mid_raw, spr_raw) = match variant {
        Variant::Full => {
            let mut m = DMatrix::zeros(n, 2 * k);
            m.columns_mut(0, k).copy_from(&mid_x);
            m.columns_mut(k, k).copy_from(&spr_x);
            let mut sp = DMatrix::zeros(n, 2 * k);
            sp.columns_mut(0, k).copy_from(&spr_x);
            sp.columns_mut(k, k).copy_from(&abs_mid_x);
            (m, sp)
        }
        Variant::ModelM => (mid_x.clone(), spr_x.clone()),
    };

    let (mut fm, mean_mid_xebl) = center_columns(&mid_raw);
    let (mut fs, mean_spr_xebl) = center_columns(&spr_raw);
    let scale_mid = column_scales(&fm, opts.standardize);
    let scale_spr = column_scales(&fs, opts.standardize);
    divide_columns(&mut fm, &scale_mid);
    divide_columns(&mut fs, &scale_spr);
    let mut spread_rows = spr_raw;
    divide_columns(&mut spread_rows, &scale_spr);

    let mean_y = Interval::new(mid_y.mean(), spr_y.mean())?;
    let vm = mid_y.add_scalar(-mean_y.mid());
    let vs = spr_y.add_scalar(-mean_y.spr());

    Ok(DesignSystem {
        variant,
        n,
        k,
        fm,
        fs,
        vm,
        vs,
        spread_rows,
        spr_x,
        abs_mid_x,
        mid_x,
        spr_y,
        mid_y,
        mean_mid_xebl,
        mean_spr_xebl,
        mean_y,
        scale_mid,
        scale_spr,
    })
}

impl DesignSystem {
    /// Width of the mid block.
    pub fn pm(&self) -> usize {
        self.fm.ncols()
    }

    /// Width of the spread block.
    pub fn ps(&self) -> usize {
        self.fs.ncols()
    }

    /// Working-unit mid coefficients to original units.
    pub fn unscale_mid(&self, a: &DVector<f64>) -> DVector<f64> {
        a.component_div(&self.scale_mid)
    }

    pub fn unscale_spr(&self, a: &DVector<f64>) -> DVector<f64> {
        a.component_div(&self.scale_spr)
    }

    pub fn scale_mid_coefs(&self, a: &DVector<f64>) -> DVector<f64> {
        a.component_mul(&self.scale_mid)
    }

    pub fn scale_spr_coefs(&self, a: &DVector<f64>) -> DVector<f64> {
        a.component_mul(&self.scale_spr)
    }

    /// `||v_m - F_m a||^2` for working-unit `a`.
    pub fn mid_rss(&self, a: &DVector<f64>) -> f64 {
        (&self.vm - &self.fm * a).norm_squared()
    }

    /// `||v_s - F_s a||^2` for working-unit `a`.
    pub fn spr_rss(&self, a: &DVector<f64>) -> f64 {
        (&self.vs - &self.fs * a).norm_squared()
    }

    /// Largest violation of `A_s >= 0` and `spread_rows A_s <= spr y`.
    pub fn gamma_violation(&self, a_s: &DVector<f64>) -> f64 {
        let neg = a_s.iter().fold(0.0f64, |m, &v| m.max(-v));
        let over = (&self.spread_rows * a_s - &self.spr_y)
            .iter()
            .fold(0.0f64, |m, &v| m.max(v));
        neg.max(over)
    }

    /// Row `j` of the uncentered mid block in original units.
    pub fn mid_row(&self, j: usize) -> DVector<f64> {
        let k = self.k;
        match self.variant {
            Variant::Full => DVector::from_iterator(
                2 * k,
                self.mid_x.row(j).iter().chain(self.spr_x.row(j).iter()).copied(),
            ),
            Variant::ModelM => self.mid_x.row(j).transpose(),
        }
    }

    /// Row `j` of the uncentered spread block in original units.
    pub fn spr_row(&self, j: usize) -> DVector<f64> {
        let k = self.k;
        match self.variant {
            Variant::Full => DVector::from_iterator(
                2 * k,
                self.spr_x.row(j).iter().chain(self.abs_mid_x.row(j).iter()).copied(),
            ),
            Variant::ModelM => self.spr_x.row(j).transpose(),
        }
    }
}

/// Predicted interval for one row of `k` regressors.
pub fn predict(c: &Coefficients, x: &[Interval]) -> Result<Interval> {
    let k = c.k();
    if x.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: x.len(),
        });
    }
    let mut mid = c.delta.mid();
    let mut spr = c.delta.spr();
    for (i, xi) in x.iter().enumerate() {
        mid += xi.mid() * c.b1[i] + xi.spr() * c.b4[i];
        spr += xi.spr() * c.b2[i] + xi.mid().abs() * c.b3[i];
    }
    // b2, b3 >= 0 make spr nonnegative up to roundoff
    Interval::new(mid, spr.max(0.0))
}

/// Predictions for every row of a sample.
pub fn predict_sample(c: &Coefficients, s: &IntervalSample) -> Result<Vec<Interval>> {
    s.x().iter().map(|row| predict(c, row)).collect()
}
