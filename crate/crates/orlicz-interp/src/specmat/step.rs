//! Right-continuous step functions on [0, 1), the concrete carrier for
//! decreasing rearrangements of elements of a normalized tracial algebra.
//!
//! A function is stored as strictly increasing breakpoints starting at 0
//! with one value per piece; values are non-negative and non-increasing.
//! `tail_mass` records integral mass pushed past t = 1 by a dilation, so
//! total integrals stay exact even after truncation.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    #[serde(default)]
    tail_mass: f64,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::with_tail(breakpoints, values, 0.0)
    }

    pub fn with_tail(breakpoints: Vec<f64>, values: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::InvalidArgument(
                "need equally many breakpoints and values, at least one".into(),
            ));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidArgument(
                "first breakpoint must be 0".into(),
            ));
        }
        for w in breakpoints.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument(
                    "breakpoints must be strictly increasing".into(),
                ));
            }
        }
        if *breakpoints.last().unwrap() >= 1.0 {
            return Err(Error::InvalidArgument(
                "breakpoints must stay below 1".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "values must be finite and non-negative".into(),
            ));
        }
        let scale = values[0].max(1.0);
        for w in values.windows(2) {
            if w[1] > w[0] + 1e-12 * scale {
                return Err(Error::InvalidArgument(
                    "values must be non-increasing".into(),
                ));
            }
        }
        if !(tail_mass >= 0.0) || !tail_mass.is_finite() {
            return Err(Error::InvalidArgument("tail mass must be >= 0".into()));
        }
        Ok(StepFunction {
            breakpoints,
            values,
            tail_mass,
        })
    }

    pub fn zero() -> Self {
        StepFunction {
            breakpoints: vec![0.0],
            values: vec![0.0],
            tail_mass: 0.0,
        }
    }

    /// `1` on `[0, t)`, `0` beyond; `t = 1` gives the constant 1.
    pub fn indicator(t: f64) -> Result<Self> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "indicator length must lie in (0, 1], got {t}"
            )));
        }
        if t >= 1.0 {
            Self::new(vec![0.0], vec![1.0])
        } else {
            Self::new(vec![0.0, t], vec![1.0, 0.0])
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Value at `s`; the function vanishes on `[1, inf)` and `s < 0` is a
    /// domain error.
    pub fn value_at(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::InvalidArgument(format!("need s >= 0, got {s}")));
        }
        if s >= 1.0 {
            return Ok(0.0);
        }
        // last breakpoint <= s
        let idx = match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&s).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        Ok(self.values[idx])
    }

    /// Integral over [0, 1) plus any recorded tail mass.
    pub fn total_integral(&self) -> f64 {
        self.partial_integral(1.0) + self.tail_mass
    }

    /// Integral over [0, t], t in [0, 1].
    pub fn partial_integral(&self, t: f64) -> f64 {
        let t = t.min(1.0);
        let mut acc = 0.0;
        for i in 0..self.breakpoints.len() {
            let lo = self.breakpoints[i];
            if lo >= t {
                break;
            }
            let hi = if i + 1 < self.breakpoints.len() {
                self.breakpoints[i + 1].min(t)
            } else {
                t
            };
            acc += self.values[i] * (hi - lo);
        }
        acc
    }

    /// `(∫ f^p)^{1/p}`; `p = inf` is the sup. Positive tail mass makes
    /// p > 1 norms unrecoverable (the truncated shape is lost), so only
    /// p = 1 is served then.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_infinite() && p > 0.0 {
            if self.tail_mass > 0.0 {
                return Err(Error::Unsupported(
                    "sup norm undefined after tail truncation".into(),
                ));
            }
            return Ok(self.values[0]);
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "L_p norms need p in [1, inf], got {p}"
            )));
        }
        if self.tail_mass > 0.0 && p > 1.0 {
            return Err(Error::Unsupported(
                "L_p norm for p > 1 undefined after tail truncation".into(),
            ));
        }
        if p == 1.0 {
            return Ok(self.total_integral());
        }
        let mut acc = 0.0;
        for i in 0..self.breakpoints.len() {
            let lo = self.breakpoints[i];
            let hi = if i + 1 < self.breakpoints.len() {
                self.breakpoints[i + 1]
            } else {
                1.0
            };
            acc += self.values[i].powf(p) * (hi - lo);
        }
        Ok(acc.powf(1.0 / p))
    }

    /// Dilation `(D_eta f)(t) = f(t / eta)`, truncated back to [0, 1).
    /// Mass pushed past 1 is banked in `tail_mass`, preserving
    /// `∫ D_eta f = eta ∫ f` exactly up to rounding.
    pub fn dilate(&self, eta: f64) -> Result<StepFunction> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dilation factor must be positive and finite, got {eta}"
            )));
        }
        let mut bps = Vec::new();
        let mut vals = Vec::new();
        let mut tail = eta * self.tail_mass;
        for i in 0..self.breakpoints.len() {
            let lo = eta * self.breakpoints[i];
            let hi = if i + 1 < self.breakpoints.len() {
                eta * self.breakpoints[i + 1]
            } else {
                eta
            };
            if lo < 1.0 {
                bps.push(lo);
                vals.push(self.values[i]);
                if hi > 1.0 {
                    tail += self.values[i] * (hi - 1.0);
                }
            } else {
                tail += self.values[i] * (hi - lo);
            }
        }
        // shrinking dilations leave [eta, 1) uncovered: explicit zero piece
        if eta < 1.0 {
            bps.push(eta);
            vals.push(0.0);
        }
        StepFunction::with_tail(bps, vals, tail)
    }

    pub fn add(&self, other: &StepFunction) -> Result<StepFunction> {
        let grid = merged_breakpoints(self, other);
        let mut vals = Vec::with_capacity(grid.len());
        for &t in &grid {
            vals.push(self.value_at(t)? + other.value_at(t)?);
        }
        StepFunction::with_tail(grid, vals, self.tail_mass + other.tail_mass)
    }

    pub fn scale(&self, c: f64) -> Result<StepFunction> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "scaling factor must be >= 0 and finite, got {c}"
            )));
        }
        StepFunction::with_tail(
            self.breakpoints.clone(),
            self.values.iter().map(|v| c * v).collect(),
            c * self.tail_mass,
        )
    }
}

/// Union of both breakpoint grids, sorted, deduplicated.
pub(crate) fn merged_breakpoints(f: &StepFunction, g: &StepFunction) -> Vec<f64> {
    let mut grid: Vec<f64> = f
        .breakpoints
        .iter()
        .chain(g.breakpoints.iter())
        .copied()
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Hardy-Littlewood submajorization test: true iff `f` is submajorized by
/// `g`, i.e. `∫_0^s f <= ∫_0^s g` for every s (checked at the merged
/// breakpoints and at s = 1, including tail masses), with slack
/// `1e-12 * max(1, ∫f, ∫g)`.
pub fn majorizes(f: &StepFunction, g: &StepFunction) -> bool {
    let tol = 1e-12 * f.total_integral().max(g.total_integral()).max(1.0);
    for &s in merged_breakpoints(f, g).iter().skip(1) {
        if f.partial_integral(s) > g.partial_integral(s) + tol {
            return false;
        }
    }
    f.total_integral() <= g.total_integral() + tol
}
