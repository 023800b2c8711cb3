//! Compact real intervals in midpoint/spread coordinates and the sample
//! statistics built on the `d_tau` metric.
//!
//! An interval `[inf, sup]` is stored as `mid = (sup + inf) / 2` and
//! `spr = (sup - inf) / 2`. Minkowski addition and scalar products act on
//! the two coordinates separately, which is what makes the regression
//! model linear in the coefficients.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A compact interval of the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    mid: f64,
    spr: f64,
}

impl Interval {
    /// Builds an interval from its midpoint and (nonnegative) spread.
    pub fn new(mid: f64, spr: f64) -> Result<Self> {
        if !mid.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite midpoint {mid}")));
        }
        if !(spr >= 0.0) || !spr.is_finite() {
            return Err(Error::InvalidSpread(spr));
        }
        Ok(Self { mid, spr })
    }

    /// Builds `[inf, sup]`; requires `inf <= sup`.
    pub fn from_endpoints(inf: f64, sup: f64) -> Result<Self> {
        if !(inf <= sup) || !inf.is_finite() || !sup.is_finite() {
            return Err(Error::InvalidEndpoints { inf, sup });
        }
        Ok(Self {
            mid: 0.5 * (sup + inf),
            spr: 0.5 * (sup - inf),
        })
    }

    /// The degenerate interval `[x, x]`.
    pub fn point(x: f64) -> Self {
        Self { mid: x, spr: 0.0 }
    }

    pub const ZERO: Interval = Interval { mid: 0.0, spr: 0.0 };

    #[inline]
    pub fn mid(&self) -> f64 {
        self.mid
    }

    #[inline]
    pub fn spr(&self) -> f64 {
        self.spr
    }

    pub fn inf(&self) -> f64 {
        self.mid - self.spr
    }

    pub fn sup(&self) -> f64 {
        self.mid + self.spr
    }

    pub fn endpoints(&self) -> (f64, f64) {
        (self.inf(), self.sup())
    }

    /// `self + delta * other` in the Minkowski sense.
    pub fn add_scaled(&self, delta: f64, other: &Interval) -> Interval {
        Interval {
            mid: self.mid + delta * other.mid,
            spr: self.spr + delta.abs() * other.spr,
        }
    }

    /// `delta * self`.
    pub fn scale(&self, delta: f64) -> Interval {
        Interval {
            mid: delta * self.mid,
            spr: delta.abs() * self.spr,
        }
    }

    /// Hukuhara difference `self -_H other`, the interval `c` with
    /// `other + c = self`.
    ///
    /// A relative slack of `1e-12` absorbs roundoff in solver output; inside
    /// the slack the resulting spread is clamped to zero.
    pub fn hukuhara_diff(&self, other: &Interval) -> Result<Interval> {
        let slack = 1e-12 * self.spr.max(1.0);
        if other.spr > self.spr + slack {
            return Err(Error::NotHukuharaDecomposable {
                minuend: self.spr,
                subtrahend: other.spr,
            });
        }
        Ok(Interval {
            mid: self.mid - other.mid,
            spr: (self.spr - other.spr).max(0.0),
        })
    }

    /// Squared `d_tau` distance.
    pub fn d_tau_sq(&self, other: &Interval, tau: Tau) -> f64 {
        let dm = self.mid - other.mid;
        let ds = self.spr - other.spr;
        (1.0 - tau.value()) * dm * dm + tau.value() * ds * ds
    }

    /// `d_tau` distance.
    pub fn d_tau(&self, other: &Interval, tau: Tau) -> f64 {
        self.d_tau_sq(other, tau).sqrt()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} ± {}]", self.mid, self.spr)
    }
}

/// Free-function form of [`Interval::add_scaled`].
pub fn add_scaled(a: &Interval, delta: f64, b: &Interval) -> Interval {
    a.add_scaled(delta, b)
}

/// Free-function form of [`Interval::hukuhara_diff`].
pub fn hukuhara_diff(a: &Interval, b: &Interval) -> Result<Interval> {
    a.hukuhara_diff(b)
}

/// Free-function form of [`Interval::d_tau`].
pub fn d_tau(a: &Interval, b: &Interval, tau: Tau) -> f64 {
    a.d_tau(b, tau)
}

/// Weight of the spread component in `d_tau`, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Tau(f64);

impl Tau {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Tau(value))
        } else {
            Err(Error::InvalidTau(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Tau {
    fn default() -> Self {
        Tau(0.5)
    }
}

impl TryFrom<f64> for Tau {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Tau::new(v)
    }
}

impl From<Tau> for f64 {
    fn from(t: Tau) -> f64 {
        t.0
    }
}

/// Sample Aumann mean: componentwise mean of mids and spreads.
pub fn aumann_mean(s: &[Interval]) -> Result<Interval> {
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = s.len() as f64;
    let mid = s.iter().map(|a| a.mid).sum::<f64>() / n;
    let spr = s.iter().map(|a| a.spr).sum::<f64>() / n;
    Ok(Interval { mid, spr })
}

fn covariance(a: impl Iterator<Item = f64> + Clone, b: impl Iterator<Item = f64> + Clone, n: f64) -> f64 {
    let ma = a.clone().sum::<f64>() / n;
    let mb = b.clone().sum::<f64>() / n;
    a.zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n
}

/// `(1 - tau) cov(mid u, mid v) + tau cov(spr u, spr v)` with divisor `n`.
pub fn d_tau_covariance(u: &[Interval], v: &[Interval], tau: Tau) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if u.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = u.len() as f64;
    let cm = covariance(u.iter().map(|a| a.mid), v.iter().map(|a| a.mid), n);
    let cs = covariance(u.iter().map(|a| a.spr), v.iter().map(|a| a.spr), n);
    Ok((1.0 - tau.value()) * cm + tau.value() * cs)
}

/// Fréchet variance with respect to `d_tau`.
pub fn d_tau_variance(u: &[Interval], tau: Tau) -> Result<f64> {
    d_tau_covariance(u, u, tau)
}

/// `n` observations of a response interval and `k` regressor intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSample {
    y: Vec<Interval>,
    x: Vec<Vec<Interval>>,
    names: Vec<String>,
}

impl IntervalSample {
    /// `names` holds the response label followed by the `k` regressor labels.
    pub fn new(y: Vec<Interval>, x: Vec<Vec<Interval>>, names: Vec<String>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptySample);
        }
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: y.len(),
                right: x.len(),
            });
        }
        let k = x[0].len();
        if k == 0 {
            return Err(Error::InconsistentSample("no regressors".into()));
        }
        if let Some(row) = x.iter().position(|r| r.len() != k) {
            return Err(Error::InconsistentSample(format!(
                "row {row} has {} regressors, expected {k}",
                x[row].len()
            )));
        }
        if names.len() != k + 1 {
            return Err(Error::InconsistentSample(format!(
                "{} variable names for {} variables",
                names.len(),
                k + 1
            )));
        }
        Ok(Self { y, x, names })
    }

    /// Same as [`IntervalSample::new`] with names `y, x1, ..., xk`.
    pub fn with_default_names(y: Vec<Interval>, x: Vec<Vec<Interval>>) -> Result<Self> {
        let k = x.first().map_or(0, Vec::len);
        let names = std::iter::once("y".to_string())
            .chain((1..=k).map(|i| format!("x{i}")))
            .collect();
        Self::new(y, x, names)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn k(&self) -> usize {
        self.x[0].len()
    }

    pub fn y(&self) -> &[Interval] {
        &self.y
    }

    pub fn x(&self) -> &[Vec<Interval>] {
        &self.x
    }

    pub fn row(&self, j: usize) -> &[Interval] {
        &self.x[j]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Sub-sample with the given observation indices, in that order.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        let y = idx.iter().map(|&i| self.y[i]).collect();
        let x = idx.iter().map(|&i| self.x[i].clone()).collect();
        Self::new(y, x, self.names.clone())
    }

    /// Replaces the response intervals.
    pub fn with_response(&self, y: Vec<Interval>) -> Result<Self> {
        Self::new(y, self.x.clone(), self.names.clone())
    }
}
