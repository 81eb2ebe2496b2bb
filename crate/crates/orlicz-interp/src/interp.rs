//! Interpolation constants, coefficient sequences, and growth fits.
//!
//! The central objects are two dyadic series constants. With `lambda_k =
//! 2^-k` and a split index `k0`:
//!
//! * `constant_f`: square of
//!   `sum_{k>k0} (lambda_k (Phi1(2^k) + Phi2(2^k0))^{1/p})^{1/2}
//!    + sum_{k<=k0} (lambda_k Phi2(2^k)^{1/p})^{1/2}`,
//!   minimized over `k0`;
//! * `constant_g`: the `l_{p/(p+1)}` quasi-norm of the analogous
//!   concatenated sequence, minimized over `k0`.
//!
//! Both converge exactly when `p` sits strictly between the upper index of
//! `Phi1` and the lower index of `Phi2` (infinite for `chi_infinity`), and
//! that gate is enforced up front. All terms are assembled in log2 space:
//! near the gate boundary the summands peak at `k` in the thousands where
//! `Phi(2^k)` itself has long left f64 range, while the terms stay small.
//! Truncation is adaptive, with a measured-ratio geometric tail bound; the
//! reported `tail_estimate` is kept below 1e-10 of the value or the
//! computation is declared divergent.

use crate::young::{golden_max, matuszewska_indices, YoungFunction};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Split-index search window used by the constant minimizers.
pub const K_WINDOW: (i64, i64) = (-32, 32);

const REL_TAIL: f64 = 1e-13;
const MAX_TERMS: usize = 10_000_000;

/// Conjugate exponent `p' = p/(p-1)`.
pub fn p_prime(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "conjugate exponent needs p > 1, got {p}"
        )));
    }
    Ok(p / (p - 1.0))
}

/// `log2(2^a + 2^b)` without leaving log space.
pub(crate) fn log2_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

struct SeriesSum {
    value: f64,
    tail: f64,
    #[allow(dead_code)]
    terms: usize,
}

impl SeriesSum {
    fn zero() -> Self {
        SeriesSum {
            value: 0.0,
            tail: 0.0,
            terms: 0,
        }
    }
}

/// Sums `2^{term_log2(k)}` for `k = start, start+dir, ...` until the
/// measured-ratio geometric tail falls below `REL_TAIL` of the running sum.
///
/// The series this crate feeds in have eventually monotone term ratios, so
/// `t * r / (1 - r)` with the last measured ratio `r < 1` is a genuine tail
/// bound once the terms are decaying.
fn sum_adaptive(start: i64, dir: i64, term_log2: impl Fn(i64) -> f64) -> Result<SeriesSum> {
    let mut sum = 0.0_f64;
    let mut prev = -1.0_f64;
    let mut k = start;
    let mut terms = 0_usize;
    loop {
        let t = term_log2(k).exp2();
        if !t.is_finite() && t != 0.0 {
            return Err(Error::Divergent(format!("series term overflows at k = {k}")));
        }
        sum += t;
        terms += 1;
        if t == 0.0 {
            if sum == 0.0 && terms >= 8 {
                // identically zero branch (generator vanishes on this side)
                return Ok(SeriesSum::zero());
            }
            if sum > 0.0 {
                return Ok(SeriesSum {
                    value: sum,
                    tail: 0.0,
                    terms,
                });
            }
        } else if prev > 0.0 {
            let r = t / prev;
            if r < 1.0 {
                let tail = t * r / (1.0 - r);
                if tail <= REL_TAIL * sum && t <= REL_TAIL * sum {
                    return Ok(SeriesSum {
                        value: sum,
                        tail,
                        terms,
                    });
                }
            }
        }
        if terms >= MAX_TERMS {
            return Err(Error::Divergent(format!(
                "series did not converge within {MAX_TERMS} terms (last k = {k})"
            )));
        }
        prev = t;
        k += dir;
    }
}

/// Result of a constant computation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConstantResult {
    pub value: f64,
    /// Minimizing split index, or the fixed start index for the strong
    /// variant.
    pub argmin_k0: i64,
    /// Split-index window that was scanned.
    pub k_window: (i64, i64),
    /// Bound on the truncation error of `value`.
    pub tail_estimate: f64,
}

fn index_gate(p: f64, phi1: &YoungFunction, phi2: &YoungFunction) -> Result<()> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "interpolation exponent must satisfy p > 1, got {p}"
        )));
    }
    if !phi1.finite_everywhere() {
        return Err(Error::Unsupported(
            "left generator must be finite everywhere".into(),
        ));
    }
    let q1 = matuszewska_indices(phi1)?.upper;
    let p2 = if phi2.finite_everywhere() {
        matuszewska_indices(phi2)?.lower
    } else {
        f64::INFINITY
    };
    if !(q1 < p && p < p2) {
        return Err(Error::Precondition(format!(
            "index gate violated: need upper(phi1) < p < lower(phi2), got {q1:.6} / {p} / {p2:.6}"
        )));
    }
    Ok(())
}

/// The two halves of the `constant_f` series at a fixed split index,
/// before squaring. Returns `(sum, tail)`.
fn f_series_at_k0(
    p: f64,
    phi1: &YoungFunction,
    phi2: &YoungFunction,
    k0: i64,
) -> Result<(f64, f64)> {
    let l2_k0 = phi2.log2_eval(k0 as f64);
    if l2_k0 == f64::INFINITY {
        return Err(Error::Precondition(format!(
            "split index {k0} infeasible: right generator infinite at 2^{k0}"
        )));
    }
    let upper = sum_adaptive(k0 + 1, 1, |k| {
        let inner = log2_sum_exp(phi1.log2_eval(k as f64), l2_k0);
        0.5 * (-(k as f64) + inner / p)
    })?;
    let lower = if phi2.finite_everywhere() {
        sum_adaptive(k0, -1, |k| {
            0.5 * (-(k as f64) + phi2.log2_eval(k as f64) / p)
        })?
    } else {
        // the infinite-valued generator vanishes identically below its knee
        SeriesSum::zero()
    };
    Ok((upper.value + lower.value, upper.tail + lower.tail))
}

/// `constant_f` evaluated at one fixed split index (diagnostic entry
/// point; the minimizer is [`constant_f`]).
pub fn constant_f_at_k0(
    p: f64,
    phi1: &YoungFunction,
    phi2: &YoungFunction,
    k0: i64,
) -> Result<ConstantResult> {
    index_gate(p, phi1, phi2)?;
    let (s, tail) = f_series_at_k0(p, phi1, phi2, k0)?;
    Ok(ConstantResult {
        value: s * s,
        argmin_k0: k0,
        k_window: (k0, k0),
        tail_estimate: 2.0 * s * tail,
    })
}

/// Interpolation constant `F(p; Phi1, Phi2)`: the squared two-sided series
/// minimized over split indices in [`K_WINDOW`].
pub fn constant_f(p: f64, phi1: &YoungFunction, phi2: &YoungFunction) -> Result<ConstantResult> {
    index_gate(p, phi1, phi2)?;
    let mut best: Option<(i64, f64, f64)> = None;
    for k0 in K_WINDOW.0..=K_WINDOW.1 {
        if phi2.log2_eval(k0 as f64) == f64::INFINITY {
            continue;
        }
        let (s, tail) = f_series_at_k0(p, phi1, phi2, k0)?;
        if best.map_or(true, |(_, bs, _)| s < bs) {
            best = Some((k0, s, tail));
        }
    }
    let (argmin_k0, s, tail) =
        best.ok_or_else(|| Error::Precondition("no feasible split index in window".into()))?;
    let value = s * s;
    let tail_estimate = 2.0 * s * tail;
    if !(tail_estimate <= 1e-10 * value) {
        return Err(Error::Divergent(format!(
            "truncation error {tail_estimate:.3e} exceeds 1e-10 of value {value:.6e}"
        )));
    }
    Ok(ConstantResult {
        value,
        argmin_k0,
        k_window: K_WINDOW,
        tail_estimate,
    })
}

/// Strong-endpoint constant `F(p; Phi, chi_infinity)` in the one-sided
/// parameterization: the square of `sum_{k>=0} 2^{-k/2} Phi(2^k)^{1/2p}`.
/// The start index is fixed at 0; nothing is optimized.
pub fn constant_f_strong_infty(p: f64, phi: &YoungFunction) -> Result<ConstantResult> {
    if !phi.finite_everywhere() {
        return Err(Error::Unsupported(
            "strong-endpoint constant needs a finite generator".into(),
        ));
    }
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "interpolation exponent must satisfy p > 1, got {p}"
        )));
    }
    let q = matuszewska_indices(phi)?.upper;
    if !(q < p) {
        return Err(Error::Precondition(format!(
            "index gate violated: need upper(phi) < p, got {q:.6} / {p}"
        )));
    }
    let s = sum_adaptive(0, 1, |k| {
        -(k as f64) / 2.0 + phi.log2_eval(k as f64) / (2.0 * p)
    })?;
    let value = s.value * s.value;
    Ok(ConstantResult {
        value,
        argmin_k0: 0,
        k_window: (0, 0),
        tail_estimate: 2.0 * s.value * s.tail,
    })
}

/// Interpolation constant `G(p; Phi1, Phi2)`: the `l_{p/(p+1)}` quasi-norm
/// of the concatenated dyadic sequence, minimized over split indices.
pub fn constant_g(p: f64, phi1: &YoungFunction, phi2: &YoungFunction) -> Result<ConstantResult> {
    index_gate(p, phi1, phi2)?;
    let q = p / (p + 1.0);
    let mut best: Option<(i64, f64, f64)> = None;
    for k0 in K_WINDOW.0..=K_WINDOW.1 {
        let l2_k0 = phi2.log2_eval(k0 as f64);
        if l2_k0 == f64::INFINITY {
            continue;
        }
        let upper = sum_adaptive(k0 + 1, 1, |k| {
            let inner = log2_sum_exp(phi1.log2_eval(k as f64), l2_k0);
            q * (-(k as f64) + inner / p)
        })?;
        let lower = if phi2.finite_everywhere() {
            sum_adaptive(k0, -1, |k| {
                q * (-(k as f64) + phi2.log2_eval(k as f64) / p)
            })?
        } else {
            SeriesSum::zero()
        };
        let u = upper.value + lower.value;
        let ut = upper.tail + lower.tail;
        if best.map_or(true, |(_, bu, _)| u < bu) {
            best = Some((k0, u, ut));
        }
    }
    let (argmin_k0, u, ut) =
        best.ok_or_else(|| Error::Precondition("no feasible split index in window".into()))?;
    let value = u.powf(1.0 / q);
    let tail_estimate = (1.0 / q) * u.powf(1.0 / q - 1.0) * ut;
    if !(tail_estimate <= 1e-10 * value) {
        return Err(Error::Divergent(format!(
            "truncation error {tail_estimate:.3e} exceeds 1e-10 of value {value:.6e}"
        )));
    }
    Ok(ConstantResult {
        value,
        argmin_k0,
        k_window: K_WINDOW,
        tail_estimate,
    })
}

/// A real sequence supported on a contiguous window of integers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZWindow {
    pub start: i64,
    pub vals: Vec<f64>,
}

impl ZWindow {
    pub fn from_fn(start: i64, end: i64, f: impl Fn(i64) -> f64) -> Self {
        ZWindow {
            start,
            vals: (start..=end).map(f).collect(),
        }
    }

    pub fn end(&self) -> i64 {
        self.start + self.vals.len() as i64 - 1
    }

    pub fn get(&self, k: i64) -> Option<f64> {
        if k < self.start {
            return None;
        }
        self.vals.get((k - self.start) as usize).copied()
    }
}

/// Concatenation at a split index: the result agrees with `a` up to `k0`
/// and equals `a(k0) + b(k)` beyond it. Both sequences must share the same
/// window and be non-decreasing; `k0` must lie inside the window.
pub fn concatenate(a: &ZWindow, b: &ZWindow, k0: i64) -> Result<ZWindow> {
    if a.start != b.start || a.vals.len() != b.vals.len() {
        return Err(Error::InvalidArgument(
            "concatenation needs matching windows".into(),
        ));
    }
    if k0 < a.start || k0 > a.end() {
        return Err(Error::InvalidArgument(format!(
            "split index {k0} outside window [{}, {}]",
            a.start,
            a.end()
        )));
    }
    for w in a.vals.windows(2).chain(b.vals.windows(2)) {
        if w[1] < w[0] {
            return Err(Error::InvalidArgument(
                "concatenation inputs must be non-decreasing".into(),
            ));
        }
    }
    let a_at_k0 = a.get(k0).unwrap();
    Ok(ZWindow::from_fn(a.start, a.end(), |k| {
        if k <= k0 {
            a.get(k).unwrap()
        } else {
            a_at_k0 + b.get(k).unwrap()
        }
    }))
}

/// Exponent convention for the optimal coefficient sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DkVariant {
    /// `d_k = lambda_k^{-1/2} (...)^{-1/(2p)}`
    HalfPower,
    /// `d_k = lambda_k^{-p/(p+1)} (...)^{-1/(p+1)}`
    POverPPlusOne,
}

/// Optimal weighting coefficients `(d_k)` on the standard window.
///
/// Only finite entries are materialized: where the right generator
/// vanishes the coefficient is infinite and the matching projection weight
/// is forced to zero, so the entry is omitted rather than stored as `inf`.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientSequence {
    pub k0: i64,
    pub variant: DkVariant,
    pub entries: BTreeMap<i64, f64>,
}

impl CoefficientSequence {
    pub fn get(&self, k: i64) -> Option<f64> {
        self.entries.get(&k).copied()
    }

    /// Reindexes `k -> k - 1`, aligning `d_{k+1}` with position `k`.
    pub fn shift_left(&self) -> Self {
        CoefficientSequence {
            k0: self.k0 - 1,
            variant: self.variant,
            entries: self.entries.iter().map(|(&k, &v)| (k - 1, v)).collect(),
        }
    }

    /// `sum_k 1/d_k` over materialized entries.
    pub fn inverse_sum(&self) -> f64 {
        self.entries.values().map(|d| 1.0 / d).sum()
    }
}

/// Minimizing coefficients for the weighted-sum majorizer at split `k0`,
/// with `lambda_k = 2^-k`:
///
/// * `k > k0`: `d_k = lambda_k^{-a} (Phi1(1/lambda_k) + Phi2(1/lambda_k0))^{-b}`
/// * `k <= k0`: `d_k = lambda_k^{-a} Phi2(1/lambda_k)^{-b}`
///
/// where `(a, b)` is `(1/2, 1/(2p))` or `(p/(p+1), 1/(p+1))` by variant;
/// the two variants coincide at `p = 1`.
pub fn optimal_dk(
    p: f64,
    phi1: &YoungFunction,
    phi2: &YoungFunction,
    k0: i64,
    variant: DkVariant,
) -> Result<CoefficientSequence> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "coefficient exponent needs p >= 1, got {p}"
        )));
    }
    if k0 < K_WINDOW.0 || k0 > K_WINDOW.1 {
        return Err(Error::InvalidArgument(format!(
            "split index {k0} outside window {K_WINDOW:?}"
        )));
    }
    if !phi1.finite_everywhere() {
        return Err(Error::Unsupported(
            "left generator must be finite everywhere".into(),
        ));
    }
    let l2_k0 = phi2.log2_eval(k0 as f64);
    if l2_k0 == f64::INFINITY {
        return Err(Error::Precondition(format!(
            "split index {k0} infeasible: right generator infinite at 2^{k0}"
        )));
    }
    let (a, b) = match variant {
        DkVariant::HalfPower => (0.5, 1.0 / (2.0 * p)),
        DkVariant::POverPPlusOne => (p / (p + 1.0), 1.0 / (p + 1.0)),
    };
    let mut entries = BTreeMap::new();
    for k in K_WINDOW.0..=K_WINDOW.1 {
        let inner = if k > k0 {
            log2_sum_exp(phi1.log2_eval(k as f64), l2_k0)
        } else {
            phi2.log2_eval(k as f64)
        };
        if inner == f64::NEG_INFINITY {
            continue; // infinite coefficient: entry not materialized
        }
        let d = (a * k as f64 - b * inner).exp2();
        entries.insert(k, d);
    }
    Ok(CoefficientSequence {
        k0,
        variant,
        entries,
    })
}

/// Geometric-mean interpolation factor with argmin.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GeometricFactor {
    pub value: f64,
    /// Minimizing threshold `eta`.
    pub eta: f64,
}

/// `inf_eta [ eta M_Phi1(C1/eta)^{1/p} + eta M_Phi2(C2/eta)^{1/p} ]`.
///
/// For `chi_infinity` on the right the second term is a hard cap: the
/// objective reduces to the first term constrained to `eta >= C2`. For a
/// pair of power functions the result is proportional to
/// `C1^theta C2^{1-theta}` with `theta = p1(p2-p) / (p(p2-p1))`.
pub fn geometric_mean_factor(
    p: f64,
    phi1: &YoungFunction,
    c1: f64,
    phi2: &YoungFunction,
    c2: f64,
) -> Result<GeometricFactor> {
    if !(c1 > 0.0) || !(c2 > 0.0) || !c1.is_finite() || !c2.is_finite() {
        return Err(Error::InvalidArgument(
            "both bounds must be positive and finite".into(),
        ));
    }
    index_gate(p, phi1, phi2)?;
    let (lc1, lc2) = (c1.log2(), c2.log2());
    let objective: Box<dyn Fn(f64) -> f64> = if phi2.finite_everywhere() {
        Box::new(move |x: f64| {
            let t1 = x + phi1.log2_m(lc1 - x).expect("finite generator") / p;
            let t2 = x + phi2.log2_m(lc2 - x).expect("finite generator") / p;
            t1.exp2() + t2.exp2()
        })
    } else {
        Box::new(move |x: f64| {
            if x < lc2 {
                f64::INFINITY
            } else {
                (x + phi1.log2_m(lc1 - x).expect("finite generator") / p).exp2()
            }
        })
    };
    let (lo, hi) = if phi2.finite_everywhere() {
        (lc1.min(lc2) - 60.0, lc1.max(lc2) + 60.0)
    } else {
        (lc2, lc2 + 60.0)
    };
    // log-convex objective: golden section is safe
    let neg = |x: f64| -objective(x);
    let _ = golden_max(&neg, lo, hi, 1e-8);
    // recover the argmin by a second pass tracking abscissae
    let (eta_log2, value) = golden_min_with_arg(&objective, lo, hi, 1e-8);
    if !value.is_finite() {
        return Err(Error::Divergent(
            "geometric factor objective did not attain a finite minimum".into(),
        ));
    }
    Ok(GeometricFactor {
        value,
        eta: eta_log2.exp2(),
    })
}

fn golden_min_with_arg(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
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
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// One row of a monotonicity sweep.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RatioRow {
    pub p: f64,
    /// `F(p; psi, chi_inf) / F(p; phi, chi_inf)` in the strong-endpoint
    /// parameterization.
    pub ratio: f64,
}

/// Monotonicity diagnostic comparing two generators.
#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub rows: Vec<RatioRow>,
    /// Sizes of the dyadic gap sets `E_n`: with
    /// `A_n = {k in [0,64] : psi(2^k) <= 2^-n phi(2^k)}`, `E_0` is the
    /// complement of `A_1` and `E_n = A_n \ A_{n+1}`. Reported until the
    /// sets empty out (capped at n = 20).
    pub e_sizes: Vec<usize>,
}

/// Computes strong-endpoint constant ratios over `p_list` together with
/// the gap-set sizes. Requires `psi <= phi` not at all; the ratios simply
/// report relative size.
pub fn monotonicity_ratio(
    p_list: &[f64],
    psi: &YoungFunction,
    phi: &YoungFunction,
) -> Result<MonotonicityReport> {
    if p_list.is_empty() {
        return Err(Error::InvalidArgument("empty exponent list".into()));
    }
    let mut rows = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let num = constant_f_strong_infty(p, psi)?.value;
        let den = constant_f_strong_infty(p, phi)?.value;
        rows.push(RatioRow {
            p,
            ratio: num / den,
        });
    }
    let member = |k: i64, n: i64| -> bool {
        psi.log2_eval(k as f64) <= phi.log2_eval(k as f64) - n as f64 + 1e-12
    };
    let set = |n: i64| -> Vec<i64> { (0..=64).filter(|&k| member(k, n)).collect() };
    let mut e_sizes = Vec::new();
    let a1 = set(1);
    e_sizes.push(65 - a1.len());
    let mut n = 1;
    loop {
        let an = set(n);
        if an.is_empty() || n > 20 {
            break;
        }
        let an1 = set(n + 1);
        let diff = an.iter().filter(|k| !an1.contains(k)).count();
        if diff > 0 {
            e_sizes.push(diff);
        }
        n += 1;
    }
    Ok(MonotonicityReport { rows, e_sizes })
}

/// One evaluation point of a growth fit.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FitPoint {
    pub p: f64,
    pub p_prime: f64,
    pub f_value: f64,
}

/// Least-squares fit of `log F` against `log p'`.
#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<FitPoint>,
}

/// OLS fit of `ln y` against `ln x` for positive samples; returns
/// `(slope, intercept)`. Needs at least two distinct abscissae.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument(
            "log-log fit needs >= 2 samples with matching lengths".into(),
        ));
    }
    if x.iter().chain(y.iter()).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "log-log fit needs positive finite samples".into(),
        ));
    }
    let xs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "log-log fit needs distinct abscissae".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Fits the blow-up exponent of the strong-endpoint constant for
/// `llog(alpha)` generators as `p -> 1`: OLS slope of `ln F` against
/// `ln p'` over `p_list`. For these generators the slope approaches
/// `alpha + 2`.
pub fn growth_exponent_fit(alpha: f64, p_list: &[f64]) -> Result<FitResult> {
    if p_list.len() < 2 {
        return Err(Error::InvalidArgument(
            "growth fit needs at least 2 exponents".into(),
        ));
    }
    let phi = crate::young::make_young(crate::young::YoungSpec::Llog { alpha })?;
    let mut points = Vec::with_capacity(p_list.len());
    for &p in p_list {
        let f = constant_f_strong_infty(p, &phi)?.value;
        points.push(FitPoint {
            p,
            p_prime: p_prime(p)?,
            f_value: f,
        });
    }
    let xs: Vec<f64> = points.iter().map(|pt| pt.p_prime).collect();
    let ys: Vec<f64> = points.iter().map(|pt| pt.f_value).collect();
    let (slope, intercept) = log_log_slope(&xs, &ys)?;
    Ok(FitResult {
        slope,
        intercept,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::{make_young, YoungSpec};
    use proptest::prelude::*;

    fn power(p: f64) -> YoungFunction {
        make_young(YoungSpec::Power { p }).unwrap()
    }
    fn llog(alpha: f64) -> YoungFunction {
        make_young(YoungSpec::Llog { alpha }).unwrap()
    }
    fn chi() -> YoungFunction {
        make_young(YoungSpec::ChiInfinity).unwrap()
    }

    #[test]
    fn constant_f_frozen_example() {
        // p = 2, Phi1 = t, Phi2 = chi_inf: split at 0,
        // value = (sum_{k>=1} 2^{-k/4})^2
        let r = constant_f(2.0, &power(1.0), &chi()).unwrap();
        assert_eq!(r.argmin_k0, 0);
        assert_eq!(r.k_window, K_WINDOW);
        assert!(
            (r.value - 27.933481823911503).abs() < 1e-8 * r.value,
            "value {}",
            r.value
        );
        assert!(r.tail_estimate <= 1e-10 * r.value);
    }

    #[test]
    fn constant_f_strong_frozen_example() {
        // (1 / (1 - 2^{-1/4}))^2
        let r = constant_f_strong_infty(2.0, &power(1.0)).unwrap();
        assert!(
            (r.value - 39.50390883967799).abs() < 1e-8 * r.value,
            "value {}",
            r.value
        );
        assert_eq!(r.argmin_k0, 0);
    }

    #[test]
    fn strong_form_agrees_with_split_at_minus_one() {
        // fixing the split one notch below the knee makes the two-sided
        // series equal the one-sided strong series term by term
        for (p, phi) in [(2.0, power(1.0)), (1.5, llog(1.0)), (3.0, llog(2.0))] {
            let a = constant_f_at_k0(p, &phi, &chi(), -1).unwrap().value;
            let b = constant_f_strong_infty(p, &phi).unwrap().value;
            assert!((a - b).abs() <= 1e-9 * b, "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn constant_g_frozen_example() {
        // p = 2: l_{2/3} norm of (2^{-k/2})_{k>=1}
        let r = constant_g(2.0, &power(1.0), &chi()).unwrap();
        assert_eq!(r.argmin_k0, 0);
        assert!(
            (r.value - 7.54636524242244).abs() < 1e-8 * r.value,
            "value {}",
            r.value
        );
        assert!(r.tail_estimate <= 1e-10 * r.value);
    }

    #[test]
    fn index_gate_rejections() {
        // upper index of llog(2) is ~1.0014 > 1.0001
        assert!(matches!(
            constant_f(1.0001, &llog(2.0), &chi()),
            Err(Error::Precondition(_))
        ));
        // p above the right generator's lower index
        assert!(matches!(
            constant_f(3.0, &power(2.0), &power(2.5)),
            Err(Error::Precondition(_))
        ));
        assert!(constant_f(2.0, &power(1.0), &power(4.0)).is_ok());
    }

    #[test]
    fn optimal_dk_frozen_example() {
        // p = 2, Phi1 = t, Phi2 = chi_inf, k0 = 0: d_k = 2^{k/4} above the
        // split, nothing materialized at or below it
        let d = optimal_dk(2.0, &power(1.0), &chi(), 0, DkVariant::HalfPower).unwrap();
        for k in 1..=K_WINDOW.1 {
            let expect = (k as f64 / 4.0).exp2();
            let got = d.get(k).unwrap();
            assert!((got - expect).abs() <= 1e-12 * expect, "k={k}");
        }
        assert!(d.get(0).is_none());
        assert!(d.get(-3).is_none());
        let shifted = d.shift_left();
        assert_eq!(shifted.get(0), d.get(1));
        assert_eq!(shifted.k0, -1);
    }

    #[test]
    fn dk_variants_coincide_at_p_one() {
        let a = optimal_dk(1.0, &power(1.0), &power(3.0), 0, DkVariant::HalfPower).unwrap();
        let b = optimal_dk(1.0, &power(1.0), &power(3.0), 0, DkVariant::POverPPlusOne).unwrap();
        for (k, va) in &a.entries {
            let vb = b.get(*k).unwrap();
            assert!((va - vb).abs() <= 1e-12 * va.abs().max(1.0), "k={k}");
        }
    }

    #[test]
    fn concatenate_example() {
        let a = ZWindow::from_fn(-2, 2, |k| k as f64 + 10.0);
        let b = ZWindow::from_fn(-2, 2, |k| 2.0 * k as f64 + 100.0);
        let c = concatenate(&a, &b, 0).unwrap();
        assert_eq!(c.get(-1), Some(9.0));
        assert_eq!(c.get(0), Some(10.0));
        assert_eq!(c.get(1), Some(10.0 + 102.0));
        assert_eq!(c.get(2), Some(10.0 + 104.0));
        let bad = ZWindow::from_fn(-1, 2, |k| k as f64);
        assert!(concatenate(&a, &bad, 0).is_err());
    }

    #[test]
    fn geometric_factor_chi_branch_is_exact_geometric_mean() {
        // Phi1 = t, p = 2: objective eta (C1/eta)^{1/2} minimized at the
        // cap eta = C2, value sqrt(C1 C2)
        for (c1, c2) in [(1.0, 1.0), (4.0, 9.0), (0.25, 16.0)] {
            let g = geometric_mean_factor(2.0, &power(1.0), c1, &chi(), c2).unwrap();
            let expect = (c1 * c2).sqrt();
            assert!((g.value - expect).abs() <= 1e-6 * expect, "{c1},{c2}");
            assert!((g.eta - c2).abs() <= 1e-4 * c2);
        }
    }

    #[test]
    fn geometric_factor_power_pair_homogeneity() {
        // for powers p1 < p < p2 the factor is proportional to
        // C1^theta C2^{1-theta}, theta = p1(p2-p)/(p(p2-p1))
        let (p1, p, p2) = (1.0, 2.0, 4.0);
        let theta = p1 * (p2 - p) / (p * (p2 - p1));
        let f = |c1: f64, c2: f64| {
            geometric_mean_factor(p, &power(p1), c1, &power(p2), c2)
                .unwrap()
                .value
        };
        let base = f(1.0, 1.0);
        for (c1, c2) in [(2.0_f64, 1.0_f64), (1.0, 8.0), (3.0, 5.0)] {
            let expect = base * c1.powf(theta) * c2.powf(1.0 - theta);
            let got = f(c1, c2);
            assert!((got - expect).abs() <= 1e-5 * expect, "{c1},{c2}: {got} vs {expect}");
        }
    }

    #[test]
    fn monotonicity_llog_pair() {
        let rep = monotonicity_ratio(&[1.01, 1.1, 2.0], &llog(1.0), &llog(2.0)).unwrap();
        for row in &rep.rows {
            assert!(row.ratio <= 1.0, "p={}: {}", row.p, row.ratio);
        }
        // ratios approach 1 as p grows away from the blow-up point
        assert!(rep.rows[0].ratio < rep.rows[2].ratio);
        assert_eq!(rep.e_sizes, vec![1, 2, 4, 8, 16, 32, 2]);
    }

    #[test]
    fn growth_fit_matches_alpha_plus_two() {
        let ps = [1.02, 1.01, 1.005, 1.002];
        for (alpha, expect) in [(0.0, 1.9974), (1.0, 3.0309), (2.0, 4.0725)] {
            let fit = growth_exponent_fit(alpha, &ps).unwrap();
            assert!(
                (fit.slope - expect).abs() < 1e-3,
                "alpha={alpha}: slope {}",
                fit.slope
            );
        }
    }

    #[test]
    fn p_prime_basics() {
        assert!((p_prime(2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((p_prime(1.25).unwrap() - 5.0).abs() < 1e-12);
        assert!(p_prime(1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn constants_finite_inside_gate(
            p in 1.4_f64..3.0,
            lo in 1.0_f64..1.2,
            hi_off in 0.25_f64..2.0,
        ) {
            let phi1 = power(lo);
            let phi2 = power(p + hi_off);
            let f = constant_f(p, &phi1, &phi2).unwrap();
            prop_assert!(f.value.is_finite() && f.value > 0.0);
            prop_assert!(f.tail_estimate <= 1e-10 * f.value);
            prop_assert!(f.argmin_k0 > K_WINDOW.0 && f.argmin_k0 < K_WINDOW.1);
            let g = constant_g(p, &phi1, &phi2).unwrap();
            prop_assert!(g.value.is_finite() && g.value > 0.0);
        }

        #[test]
        fn geometric_factor_monotone_in_bounds(
            p in 1.5_f64..2.5,
            c1 in 0.5_f64..4.0,
            scale in 1.1_f64..3.0,
        ) {
            let f1 = geometric_mean_factor(p, &power(1.0), c1, &chi(), 1.0).unwrap();
            let f2 = geometric_mean_factor(p, &power(1.0), c1 * scale, &chi(), 1.0).unwrap();
            prop_assert!(f2.value >= f1.value * 0.999);
        }
    }
}
