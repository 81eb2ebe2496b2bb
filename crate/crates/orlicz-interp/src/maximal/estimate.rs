//! Empirical weak-Orlicz constants and maximal-operator norm ratios over
//! explicit test families.

use super::filtration::Filtration;
use super::operators::{commutative_sup, cuculescu_projection, maximal_family};
use crate::specmat::Element;
use crate::young::YoungFunction;
use crate::{Error, Result};
use serde::Serialize;

/// Estimated weak-type constant for one Young function over a test set.
#[derive(Clone, Debug, Serialize)]
pub struct WeakOrliczEstimate {
    pub constant: f64,
    /// True when the threshold witnesses are exact level sets
    /// (commutative filtrations); false flags a matrix-case upper bound.
    pub exact_witness: bool,
    /// Index into the test set of the binding element.
    pub max_x_index: usize,
    /// Threshold at which that element binds.
    pub max_lambda: f64,
}

const BISECT_LO: f64 = 1e-9;
const BISECT_REL: f64 = 1.001;
const PAIR_SLACK: f64 = 1.0 + 1e-12;

/// Geometric threshold grid `offset * scale * 2^{-g}` for `g` in
/// `[0, count)`. An `offset` slightly below 1 keeps the grid off the exact
/// jump values of dyadic maximal functions, where the strict-exceedance
/// convention would otherwise halve the witnessed level sets.
pub fn dyadic_threshold_grid(scale: f64, count: usize, offset: f64) -> Result<Vec<f64>> {
    if !(scale > 0.0) || !scale.is_finite() || !(offset > 0.0) || !offset.is_finite() {
        return Err(Error::InvalidArgument(
            "threshold grid needs positive finite scale and offset".into(),
        ));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("empty threshold grid".into()));
    }
    Ok((0..count)
        .map(|g| offset * scale * (2.0_f64).powi(-(g as i32)))
        .collect())
}

/// Smallest constant `C` on a geometric bisection grid (relative step
/// 1e-3) such that `tau(1 - e_lambda) <= tau(Phi(C x / lambda))` for
/// every test element and every grid threshold, where `e_lambda` keeps
/// the part of the space the maximal family does not push above
/// `lambda` (ties kept below). Reports the binding pair.
pub fn estimate_weak_orlicz_constant(
    f: &Filtration,
    phi: &YoungFunction,
    test_set: &[Element],
    lambda_grid: &[f64],
) -> Result<WeakOrliczEstimate> {
    if test_set.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    if lambda_grid.is_empty() || lambda_grid.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidArgument(
            "threshold grid must be non-empty and positive".into(),
        ));
    }
    let exact_witness = f.is_commutative();

    // one spectrum per test element (zero eigenvalues dropped: Phi(0) = 0)
    // and one exceedance trace per (x, lambda)
    struct Pair {
        x_index: usize,
        lambda: f64,
        excess: f64,
    }
    let mut spectra: Vec<Vec<(f64, f64)>> = Vec::with_capacity(test_set.len());
    let mut pairs = Vec::with_capacity(test_set.len() * lambda_grid.len());
    for (xi, x) in test_set.iter().enumerate() {
        if x.min_eigenvalue() < -1e-9 * x.linf_norm().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "test element {xi} is not PSD"
            )));
        }
        spectra.push(
            x.eigen_pairs()
                .into_iter()
                .filter(|&(w, l)| w != 0.0 && l != 0.0)
                .collect(),
        );
        if exact_witness {
            let sup = commutative_sup(&maximal_family(f, x)?)?;
            let sup_vals = sup.as_diagonal().expect("commutative");
            let alg = x.algebra();
            for &lam in lambda_grid {
                // strict exceedance: ties stay inside e_lambda
                let excess: f64 = sup_vals
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v > lam)
                    .map(|(i, _)| alg.weight(i))
                    .sum();
                pairs.push(Pair {
                    x_index: xi,
                    lambda: lam,
                    excess,
                });
            }
        } else {
            for &lam in lambda_grid {
                let res = cuculescu_projection(f, x, lam)?;
                pairs.push(Pair {
                    x_index: xi,
                    lambda: lam,
                    excess: 1.0 - res.projection.trace(),
                });
            }
        }
    }

    // tau(Phi(C|x|/lambda)) from the spectrum; infinite values pass trivially
    let rhs = |pair: &Pair, c: f64| -> Result<f64> {
        let mut acc = 0.0;
        for &(w, l) in &spectra[pair.x_index] {
            let v = phi.eval(c * l.abs() / pair.lambda)?;
            if v.is_infinite() {
                return Ok(f64::INFINITY);
            }
            acc += w * v;
        }
        Ok(acc)
    };
    let ok = |c: f64| -> Result<bool> {
        for pair in &pairs {
            if pair.excess <= 0.0 {
                continue;
            }
            if pair.excess > rhs(pair, c)? * PAIR_SLACK {
                return Ok(false);
            }
        }
        Ok(true)
    };

    // geometric doubling then geometric bisection, returning the upper end
    let mut lo = BISECT_LO;
    let mut hi = 1.0_f64;
    let mut guard = 0;
    while !ok(hi)? {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::Divergent(
                "no finite constant satisfies the weak-type bound on this test set".into(),
            ));
        }
    }
    while hi / lo > BISECT_REL {
        let mid = (lo * hi).sqrt();
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let constant = hi;

    // binding pair: largest demand ratio at the returned constant
    let mut best = (0usize, lambda_grid[0], -1.0_f64);
    for pair in &pairs {
        if pair.excess <= 0.0 {
            continue;
        }
        let r = rhs(pair, constant)?;
        let ratio = if r > 0.0 && r.is_finite() {
            pair.excess / r
        } else {
            0.0
        };
        if ratio > best.2 {
            best = (pair.x_index, pair.lambda, ratio);
        }
    }
    Ok(WeakOrliczEstimate {
        constant,
        exact_witness,
        max_x_index: best.0,
        max_lambda: best.1,
        })
}

/// Largest measured `L_p -> L_p(l_inf)` ratio over a test set.
#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub best_ratio: f64,
    pub best_index: usize,
    pub ratios: Vec<f64>,
}

/// Lower bound on the maximal-operator norm: the largest
/// `||sup_i E_i x||_p / ||x||_p` over the test set, exact in the
/// commutative case.
pub fn maximal_lp_ratio(f: &Filtration, p: f64, test_set: &[Element]) -> Result<RatioReport> {
    if !f.is_commutative() {
        return Err(Error::Unsupported(
            "exact ratio needs a commutative filtration".into(),
        ));
    }
    if test_set.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    let mut ratios = Vec::with_capacity(test_set.len());
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, x) in test_set.iter().enumerate() {
        let denom = x.lp_norm(p)?;
        if denom == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "test element {i} vanishes"
            )));
        }
        let sup = commutative_sup(&maximal_family(f, x)?)?;
        let ratio = sup.lp_norm(p)? / denom;
        ratios.push(ratio);
        if ratio > best.1 {
            best = (i, ratio);
        }
    }
    Ok(RatioReport {
        best_ratio: best.1,
        best_index: best.0,
        ratios,
    })
}

/// Two-dimensional (tensor) variant of [`maximal_lp_ratio`].
pub fn strong_maximal_lp_lower(
    f2d: &Filtration,
    p: f64,
    test_set: &[Element],
) -> Result<RatioReport> {
    if !f2d.is_tensor() {
        return Err(Error::InvalidArgument(
            "strong maximal ratios need a tensor filtration".into(),
        ));
    }
    maximal_lp_ratio(f2d, p, test_set)
}

/// Ratio for an elementary tensor `u ⊗ v` of non-negative factors without
/// materializing the product space: the grid supremum of separable
/// non-negative data factorizes, so
/// `||sup (E_n ⊗ E_m)(u ⊗ v)||_p = ||sup E_n u||_p * ||sup E_m v||_p`.
pub fn separable_strong_ratio(
    f1: &Filtration,
    f2: &Filtration,
    p: f64,
    u: &Element,
    v: &Element,
) -> Result<f64> {
    for (f, x, name) in [(f1, u, "first"), (f2, v, "second")] {
        if !f.is_commutative() {
            return Err(Error::Unsupported(
                "separable ratios need commutative factors".into(),
            ));
        }
        if x.min_eigenvalue() < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} factor must be non-negative"
            )));
        }
    }
    let sup1 = commutative_sup(&maximal_family(f1, u)?)?;
    let sup2 = commutative_sup(&maximal_family(f2, v)?)?;
    let denom = u.lp_norm(p)? * v.lp_norm(p)?;
    if denom == 0.0 {
        return Err(Error::InvalidArgument("vanishing tensor factor".into()));
    }
    Ok(sup1.lp_norm(p)? * sup2.lp_norm(p)? / denom)
}
