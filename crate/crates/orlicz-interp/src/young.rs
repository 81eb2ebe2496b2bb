//! Young functions, their doubling envelopes, and growth indices.
//!
//! A Young function here is a non-decreasing convex `Phi: [0,inf) -> [0,inf]`
//! with `Phi(0) = 0` and `Phi(t) -> inf`. Four kinds are supported:
//!
//! * `power(p)`: `t^p`, `p >= 1`;
//! * `llog(alpha)`: `t * (1 + log2+ t)^alpha`, `alpha >= 0` (base-2
//!   logarithm, so `Phi(2^k) = 2^k (1+k)^alpha` for `k >= 0`);
//! * `chi_infinity`: `0` on `[0,1]` and `+inf` on `(1,inf)`, the generator
//!   whose Orlicz class is the unit ball of L_infinity;
//! * `custom`: a table of `(log2 t, log2 Phi)` samples, interpolated
//!   linearly in log-log coordinates and extended beyond the table with the
//!   edge slopes.
//!
//! The doubling envelope is `M_Phi(t) = sup_{s>0} Phi(st)/Phi(s)`; its
//! growth exponents near 0 and infinity are the Matuszewska-Orlicz indices.
//! Everything evaluates through `log2`-space helpers because series code
//! upstream needs `Phi(2^k)` for `k` far beyond f64 overflow range.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Standard validation grid: `t = 2^k` for `k` in `[-40, 40]`.
pub const STANDARD_GRID_LOG2: std::ops::RangeInclusive<i64> = -40..=40;

/// Serializable descriptor of a Young function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum YoungSpec {
    #[serde(rename = "power")]
    Power { p: f64 },
    #[serde(rename = "llog")]
    Llog { alpha: f64 },
    #[serde(rename = "chi_infinity")]
    ChiInfinity,
    #[serde(rename = "custom")]
    Custom {
        log2_t: Vec<f64>,
        log2_phi: Vec<f64>,
    },
}

/// A validated Young function.
#[derive(Clone, Debug)]
pub struct YoungFunction {
    spec: YoungSpec,
    finite_everywhere: bool,
}

/// Matuszewska-Orlicz index estimates.
///
/// `lower` estimates `p_Phi` (growth exponent of `M_Phi` at 0), `upper`
/// estimates `q_Phi` (at infinity). `error_estimate` is the spread of the
/// successive extrapolation slopes plus any clamping applied to keep the
/// estimates in the cone `1 <= lower <= upper`, which holds exactly for
/// convex Young functions vanishing at 0.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IndexPair {
    pub lower: f64,
    pub upper: f64,
    pub error_estimate: f64,
}

/// Ratio diagnostic returned by [`little_o_check`].
#[derive(Clone, Debug, Serialize)]
pub struct LittleOReport {
    /// `psi(t)/phi(t)` over the input grid, in grid order.
    pub ratios: Vec<f64>,
    /// True iff the tail keeps decreasing: the final step drops by at least
    /// the relative threshold 1e-3 and the final ratio is below half the
    /// initial one.
    pub verdict: bool,
}

/// Builds and validates a Young function from its descriptor.
///
/// Rejects `power` exponents below 1, negative `alpha`, and custom tables
/// that are malformed or non-monotone. The returned function is checked on
/// the standard grid for the Young invariants: vanishing at 0, monotone,
/// midpoint convex (chord test, relative tolerance 1e-12), and divergent.
pub fn make_young(spec: YoungSpec) -> Result<YoungFunction> {
    match &spec {
        YoungSpec::Power { p } => {
            if !p.is_finite() || *p < 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "power exponent must be >= 1, got {p}"
                )));
            }
        }
        YoungSpec::Llog { alpha } => {
            if !alpha.is_finite() || *alpha < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "llog exponent must be >= 0, got {alpha}"
                )));
            }
        }
        YoungSpec::ChiInfinity => {}
        YoungSpec::Custom { log2_t, log2_phi } => {
            if log2_t.len() != log2_phi.len() || log2_t.len() < 2 {
                return Err(Error::InvalidArgument(
                    "custom table needs >= 2 samples with matching lengths".into(),
                ));
            }
            if log2_t.iter().chain(log2_phi.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(
                    "custom table entries must be finite".into(),
                ));
            }
            if log2_t.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidArgument(
                    "custom abscissae must be strictly increasing".into(),
                ));
            }
            if log2_phi.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidArgument(
                    "custom samples must be non-decreasing".into(),
                ));
            }
            let n = log2_phi.len();
            if log2_phi[n - 1] <= log2_phi[n - 2] {
                return Err(Error::InvalidArgument(
                    "custom table must increase at its top edge (divergence)".into(),
                ));
            }
        }
    }
    let finite_everywhere = !matches!(spec, YoungSpec::ChiInfinity);
    let phi = YoungFunction {
        spec,
        finite_everywhere,
    };
    phi.validate_on_standard_grid()?;
    Ok(phi)
}

impl YoungFunction {
    pub fn spec(&self) -> &YoungSpec {
        &self.spec
    }

    /// True unless the function takes the value `+inf` (chi_infinity).
    pub fn finite_everywhere(&self) -> bool {
        self.finite_everywhere
    }

    /// Evaluates `Phi(t)`. `t` must be non-negative; may return `+inf`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Young functions take non-negative arguments, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(match &self.spec {
            YoungSpec::Power { p } => t.powf(*p),
            YoungSpec::Llog { alpha } => {
                let lg = if t > 1.0 { t.log2() } else { 0.0 };
                t * (1.0 + lg).powf(*alpha)
            }
            YoungSpec::ChiInfinity => {
                if t > 1.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            YoungSpec::Custom { .. } => self.log2_eval(t.log2()).exp2(),
        })
    }

    /// Evaluates `log2 Phi(2^u)`.
    ///
    /// This is the overflow-safe entry point used by all series code:
    /// `Phi(2^k)` itself leaves f64 range near `k = 1024` while the series
    /// terms stay small. Returns `-inf` where `Phi = 0` and `+inf` where
    /// `Phi = inf`.
    pub fn log2_eval(&self, u: f64) -> f64 {
        match &self.spec {
            YoungSpec::Power { p } => p * u,
            YoungSpec::Llog { alpha } => u + alpha * (1.0 + u.max(0.0)).log2(),
            YoungSpec::ChiInfinity => {
                if u > 0.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
            YoungSpec::Custom { log2_t, log2_phi } => {
                let n = log2_t.len();
                if u <= log2_t[0] {
                    let s = edge_slope(log2_t, log2_phi, 0);
                    log2_phi[0] + s * (u - log2_t[0])
                } else if u >= log2_t[n - 1] {
                    let s = edge_slope(log2_t, log2_phi, n - 2);
                    log2_phi[n - 1] + s * (u - log2_t[n - 1])
                } else {
                    let j = log2_t.partition_point(|&a| a <= u) - 1;
                    let w = (u - log2_t[j]) / (log2_t[j + 1] - log2_t[j]);
                    log2_phi[j] + w * (log2_phi[j + 1] - log2_phi[j])
                }
            }
        }
    }

    /// `log2 M_Phi(2^u)`: the doubling envelope in log-log coordinates.
    ///
    /// Closed forms for `power` and `llog` (for the latter `M_Phi = Phi`:
    /// the supremum sits at `s = 1`); a log-grid search with golden-section
    /// refinement for custom kinds.
    pub fn log2_m(&self, u: f64) -> Result<f64> {
        if !self.finite_everywhere {
            return Err(Error::Unsupported(
                "doubling envelope of an infinite-valued Young function".into(),
            ));
        }
        Ok(match &self.spec {
            YoungSpec::Power { p } => p * u,
            YoungSpec::Llog { .. } => self.log2_eval(u),
            YoungSpec::ChiInfinity => unreachable!(),
            YoungSpec::Custom { .. } => {
                let g = |v: f64| self.log2_eval(v + u) - self.log2_eval(v);
                let mut best_v = -60.0;
                let mut best = f64::NEG_INFINITY;
                for vi in -60..=60 {
                    let val = g(vi as f64);
                    if val > best {
                        best = val;
                        best_v = vi as f64;
                    }
                }
                // The table is piecewise linear in log-log space, so the
                // ratio is too; refine around the best grid node.
                let refined = golden_max(&g, best_v - 1.0, best_v + 1.0, 1e-9);
                best.max(refined)
            }
        })
    }

    /// Evaluates `M_Phi(t) = sup_{s>0} Phi(st)/Phi(s)`.
    pub fn eval_m(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "M_Phi needs t > 0, got {t}"
            )));
        }
        Ok(self.log2_m(t.log2())?.exp2())
    }

    fn validate_on_standard_grid(&self) -> Result<()> {
        let vals: Vec<(f64, f64)> = STANDARD_GRID_LOG2
            .map(|k| {
                let t = (k as f64).exp2();
                (t, self.eval(t).expect("grid points are positive"))
            })
            .collect();
        for w in vals.windows(2) {
            let ((_, f0), (_, f1)) = (w[0], w[1]);
            if f1 < f0 {
                return Err(Error::InvalidArgument(
                    "Young function decreases on the standard grid".into(),
                ));
            }
        }
        // Chord convexity test on consecutive grid triples; relative slack
        // 1e-12 on the chord value.
        for w in vals.windows(3) {
            let ((a, fa), (b, fb), (c, fc)) = (w[0], w[1], w[2]);
            if !fa.is_finite() || !fc.is_finite() {
                continue;
            }
            let chord = fa + (fc - fa) * (b - a) / (c - a);
            if fb > chord + 1e-12 * chord.abs().max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "convexity fails near t = {b}"
                )));
            }
        }
        // Divergence: the top edge must still be growing.
        let top = self.log2_eval(40.0);
        let below = self.log2_eval(39.0);
        if top.is_finite() && !(top > below + 1e-9) {
            return Err(Error::InvalidArgument(
                "Young function must diverge at infinity".into(),
            ));
        }
        Ok(())
    }
}

fn edge_slope(xs: &[f64], ys: &[f64], seg: usize) -> f64 {
    (ys[seg + 1] - ys[seg]) / (xs[seg + 1] - xs[seg])
}

/// Golden-section maximization of `f` on `[a, b]` to abscissa tolerance
/// `tol`. Assumes `f` is unimodal on the bracket (true for the piecewise
/// linear ratios this crate feeds it).
pub(crate) fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// Matuszewska-Orlicz indices by slope extrapolation.
///
/// Samples `log2 M_Phi(2^{+-m})` at `m = 10, 20, 30, 40`, forms difference
/// quotients, and Richardson-extrapolates the last two (the quotients decay
/// like `1/m` for llog-type envelopes). Estimates are clamped into
/// `1 <= lower <= upper`; the clamp distance is added to `error_estimate`.
pub fn matuszewska_indices(phi: &YoungFunction) -> Result<IndexPair> {
    if !phi.finite_everywhere() {
        return Err(Error::Unsupported(
            "indices of an infinite-valued Young function".into(),
        ));
    }
    let ms = [10.0_f64, 20.0, 30.0, 40.0];
    let f_up: Vec<f64> = ms.iter().map(|&m| phi.log2_m(m).unwrap()).collect();
    let f_dn: Vec<f64> = ms.iter().map(|&m| phi.log2_m(-m).unwrap()).collect();

    // upper index q: slope of log2 M(2^m) in m as m -> inf
    let dq: Vec<f64> = (0..3)
        .map(|i| (f_up[i + 1] - f_up[i]) / (ms[i + 1] - ms[i]))
        .collect();
    // lower index p: slope of log2 M(2^-m) in -m as m -> inf
    let dp: Vec<f64> = (0..3)
        .map(|i| -(f_dn[i + 1] - f_dn[i]) / (ms[i + 1] - ms[i]))
        .collect();

    let richardson = |d: &[f64]| -> f64 {
        // midpoints 25 and 35; eliminate a 1/m correction term
        d[2] + (d[2] - d[1]) * 2.5
    };
    let spread = |d: &[f64]| -> f64 {
        let mx = d.iter().cloned().fold(f64::MIN, f64::max);
        let mn = d.iter().cloned().fold(f64::MAX, f64::min);
        mx - mn
    };

    let lower_raw = richardson(&dp);
    let upper_raw = richardson(&dq);
    let mut err = spread(&dp).max(spread(&dq));
    let lower = lower_raw.max(1.0);
    let upper = upper_raw.max(lower);
    err += (lower - lower_raw).abs().max((upper - upper_raw).abs());
    Ok(IndexPair {
        lower,
        upper,
        error_estimate: err,
    })
}

/// Verifies the sharp doubling inequality `Phi(st) <= M_Phi(t) Phi(s)` on a
/// log grid of roughly `sample_count` `(s, t)` pairs, with multiplicative
/// slack 1e-9.
pub fn check_doubling(phi: &YoungFunction, sample_count: usize) -> Result<bool> {
    let side = (sample_count as f64).sqrt().ceil() as i64;
    let side = side.max(2);
    let slack = (1.0_f64 + 1e-9).log2();
    for i in 0..side {
        for j in 0..side {
            // dyadic abscissae spread over [-20, 20]
            let us = -20.0 + 40.0 * (i as f64) / (side - 1) as f64;
            let ut = -20.0 + 40.0 * (j as f64) / (side - 1) as f64;
            let us = us.round();
            let ut = ut.round();
            let lhs = phi.log2_eval(us + ut);
            let rhs = phi.log2_m(ut)? + phi.log2_eval(us);
            if lhs > rhs + slack {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Checks that `Phi` sits inside its power envelope: with indices `(p, q)`
/// and any `epsilon > 0` there are finite constants `c, C` with
/// `c * min(t^{p-eps}, t^{q+eps}) <= Phi(t) <= C * max(t^{p-eps}, t^{q+eps})`
/// over the standard grid. Returns true iff the grid-maximal ratios are
/// finite.
pub fn growth_envelope_check(phi: &YoungFunction, epsilon: f64) -> Result<bool> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(
            "growth envelope needs epsilon > 0 (the log factor beats any fixed power)".into(),
        ));
    }
    let idx = matuszewska_indices(phi)?;
    let (p, q) = (idx.lower, idx.upper);
    let mut c_low = f64::NEG_INFINITY; // log2 of the lower-envelope constant
    let mut c_up = f64::NEG_INFINITY; // log2 of the upper-envelope constant
    for k in STANDARD_GRID_LOG2 {
        let u = k as f64;
        let lphi = phi.log2_eval(u);
        let lo = ((p - epsilon) * u).min((q + epsilon) * u);
        let hi = ((p - epsilon) * u).max((q + epsilon) * u);
        c_low = c_low.max(lo - lphi);
        c_up = c_up.max(lphi - hi);
    }
    Ok(c_low.is_finite() && c_up.is_finite())
}

/// Ratio diagnostic for `psi in o(phi)`.
///
/// Evaluates `psi/phi` over `t_grid` and reports whether the ratios are
/// still decreasing at the top of the grid (final step drops by at least
/// the relative threshold 1e-3) and have at least halved overall. That is
/// the observable finite-grid signature of `psi/phi -> 0`; identical
/// functions or bounded ratios report false.
pub fn little_o_check(
    psi: &YoungFunction,
    phi: &YoungFunction,
    t_grid: &[f64],
) -> Result<LittleOReport> {
    if t_grid.len() < 3 {
        return Err(Error::InvalidArgument(
            "little-o check needs at least 3 grid points".into(),
        ));
    }
    let mut ratios = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument("t grid must be positive".into()));
        }
        let r = (psi.log2_eval(t.log2()) - phi.log2_eval(t.log2())).exp2();
        if !r.is_finite() {
            return Err(Error::InvalidArgument(
                "ratio undefined: functions must be finite and positive on the grid".into(),
            ));
        }
        ratios.push(r);
    }
    let n = ratios.len();
    let verdict =
        ratios[n - 1] <= (1.0 - 1e-3) * ratios[n - 2] && ratios[n - 1] <= 0.5 * ratios[0];
    Ok(LittleOReport { ratios, verdict })
}
