//! Spectral machinery: interval projections, decreasing rearrangements,
//! distribution functions, dyadic (binary-digit) decompositions of positive
//! elements, and the pinching / corner-reduction checks used by the
//! weak-type verification pipeline.

use super::algebra::{CMatrix, Element, ElementData, Projection};
use super::step::{majorizes, merged_breakpoints, StepFunction};
use crate::{Error, Result};
use serde::Serialize;

/// Spectral projection of `x` onto the interval `(a, b]`.
///
/// Boundary rule: eigenvalues within `1e-12 * max(1, ||x||_inf)` of either
/// endpoint are excluded, deterministically resolving ties to the open
/// side. Complements of these projections are formed algebraically
/// (`1 - e`), never by a second spectral call, so partitions stay exact.
pub fn spectral_projection(x: &Element, a: f64, b: f64) -> Result<Projection> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!(
            "need a < b, got ({a}, {b}]"
        )));
    }
    let tol = 1e-12 * x.linf_norm().max(1.0);
    let keep = |l: f64| -> bool {
        let above = if a.is_infinite() { true } else { l > a + tol };
        let below = if b.is_infinite() { true } else { l <= b - tol };
        above && below
    };
    match x.data() {
        ElementData::Diagonal(v) => {
            let flags: Vec<bool> = v.iter().map(|&l| keep(l)).collect();
            Projection::from_indicator(x.algebra().clone(), &flags)
        }
        ElementData::Dense(m) => {
            let d = x.dim();
            let mut out = CMatrix::zeros(d, d);
            for (off, sz) in x.algebra().blocks() {
                let block = m.view((off, off), (sz, sz)).into_owned();
                let eig = block.symmetric_eigen();
                for (i, &l) in eig.eigenvalues.iter().enumerate() {
                    if keep(l) {
                        let v = eig.eigenvectors.column(i);
                        let outer = &v * v.adjoint();
                        let mut view = out.view_mut((off, off), (sz, sz));
                        view += outer;
                    }
                }
            }
            let el = Element::dense(x.algebra().clone(), out)?;
            Projection::try_new(el)
        }
    }
}

/// Decreasing rearrangement `mu(x)` of `|x|` as a step function on [0, 1).
pub fn singular_numbers(x: &Element) -> Result<StepFunction> {
    let mut pairs: Vec<(f64, f64)> = x
        .eigen_pairs()
        .into_iter()
        .map(|(w, l)| (w, l.abs()))
        .collect();
    pairs.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut bps = Vec::with_capacity(pairs.len());
    let mut vals = Vec::with_capacity(pairs.len());
    let mut t = 0.0;
    for (w, l) in pairs {
        if t < 1.0 {
            bps.push(t);
            vals.push(l);
        }
        t += w;
    }
    // weights sum to 1; rounding may leave the final cumulative slightly
    // off, but every pushed breakpoint is a strict partial sum < 1
    StepFunction::new(bps, vals)
}

/// Distribution function `lambda_s(x) = tau(1_{(s, inf)}(|x|))`.
pub fn distribution(x: &Element, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!("need s >= 0, got {s}")));
    }
    Ok(x.eigen_pairs()
        .iter()
        .filter(|&&(_, l)| l.abs() > s)
        .map(|&(w, _)| w)
        .sum())
}

/// Dyadic digit decomposition of a positive element over a digit window.
#[derive(Clone, Debug)]
pub struct BinaryDecomposition {
    n_min: i64,
    n_max: i64,
    projections: Vec<Projection>,
    residual_norm: f64,
}

impl BinaryDecomposition {
    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    /// Projection carrying digit `2^{-n}`.
    pub fn r(&self, n: i64) -> Option<&Projection> {
        if n < self.n_min || n > self.n_max {
            return None;
        }
        Some(&self.projections[(n - self.n_min) as usize])
    }

    pub fn projections(&self) -> &[Projection] {
        &self.projections
    }

    /// Sup norm of `x - sum_n 2^{-n} r_n` over the spectrum.
    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }
}

/// Digit of `2^{-n}` in the binary expansion of `l > 0`, read directly off
/// the IEEE-754 representation so dyadic rationals decompose exactly.
fn binary_digit(l: f64, n: i64) -> bool {
    debug_assert!(l > 0.0 && l.is_finite());
    let bits = l.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = bits & ((1u64 << 52) - 1);
    if exponent == 0 {
        // subnormals sit far below any window this module accepts
        return false;
    }
    // leading digit position: l = 1.m * 2^{exponent-1023} = 2^{-p0} * 1.m
    let p0 = 1023 - exponent;
    if n < p0 {
        false
    } else if n == p0 {
        true
    } else {
        let shift = n - p0;
        if shift > 52 {
            false
        } else {
            (mantissa >> (52 - shift)) & 1 == 1
        }
    }
}

/// Splits a positive element into digit projections `r_n`, `n` in
/// `[n_min, n_max]`: `x ≈ sum_n 2^{-n} r_n` in a common eigenbasis, with
/// the exact residual sup norm reported (never exceeding `2^{-n_max}`).
///
/// Preconditions: `x` positive (eigenvalues above `-1e-10`), every nonzero
/// eigenvalue strictly below `2^{-n_min + 1}` so its leading digit falls
/// inside the window, and a window at most 52 digits wide (the f64
/// mantissa span, beyond which digits are identically zero anyway).
pub fn binary_decomposition(
    x: &Element,
    n_window: (i64, i64),
) -> Result<BinaryDecomposition> {
    let (n_min, n_max) = n_window;
    if n_min > n_max {
        return Err(Error::InvalidArgument(format!(
            "empty digit window ({n_min}, {n_max})"
        )));
    }
    if n_max - n_min > 52 {
        return Err(Error::InvalidArgument(
            "digit window wider than the f64 mantissa (52)".into(),
        ));
    }
    let floor = x.min_eigenvalue();
    if floor < -1e-10 {
        return Err(Error::Precondition(format!(
            "element is not positive: min eigenvalue {floor:.3e}"
        )));
    }
    let cap = (2.0_f64).powi((-n_min + 1) as i32);

    // digit masks per eigenvalue, shared across representations
    let digit_masks = |lambdas: &[f64]| -> Result<(Vec<Vec<bool>>, f64)> {
        let mut masks = vec![Vec::with_capacity(lambdas.len()); (n_max - n_min + 1) as usize];
        let mut residual: f64 = 0.0;
        for &raw in lambdas {
            let l = raw.max(0.0);
            if l >= cap {
                return Err(Error::Precondition(format!(
                    "eigenvalue {l} has its leading digit above the window (needs < {cap})"
                )));
            }
            let mut recon = 0.0;
            for n in n_min..=n_max {
                let d = l > 0.0 && binary_digit(l, n);
                masks[(n - n_min) as usize].push(d);
                if d {
                    recon += (2.0_f64).powi(-n as i32);
                }
            }
            residual = residual.max((l - recon).abs());
        }
        Ok((masks, residual))
    };

    match x.data() {
        ElementData::Diagonal(v) => {
            let (masks, residual) = digit_masks(v)?;
            let projections = masks
                .into_iter()
                .map(|m| Projection::from_indicator(x.algebra().clone(), &m))
                .collect::<Result<Vec<_>>>()?;
            Ok(BinaryDecomposition {
                n_min,
                n_max,
                projections,
                residual_norm: residual,
            })
        }
        ElementData::Dense(m) => {
            // one eigendecomposition; all projections share the eigenbasis
            let d = x.dim();
            let blocks = x.algebra().blocks();
            let mut block_eigs = Vec::with_capacity(blocks.len());
            let mut lambdas = Vec::with_capacity(d);
            for &(off, sz) in &blocks {
                let block = m.view((off, off), (sz, sz)).into_owned();
                let eig = block.symmetric_eigen();
                lambdas.extend(eig.eigenvalues.iter().copied());
                block_eigs.push((off, sz, eig));
            }
            let (masks, residual) = digit_masks(&lambdas)?;
            let mut projections = Vec::with_capacity(masks.len());
            for mask in &masks {
                let mut p = CMatrix::zeros(d, d);
                let mut idx = 0;
                for (off, sz, eig) in &block_eigs {
                    for i in 0..*sz {
                        if mask[idx] {
                            let v = eig.eigenvectors.column(i);
                            let outer = &v * v.adjoint();
                            let mut view = p.view_mut((*off, *off), (*sz, *sz));
                            view += outer;
                        }
                        idx += 1;
                    }
                }
                projections.push(Projection::try_new(Element::dense(
                    x.algebra().clone(),
                    p,
                )?)?);
            }
            Ok(BinaryDecomposition {
                n_min,
                n_max,
                projections,
                residual_norm: residual,
            })
        }
    }
}

/// Comparison of `mu(x^alpha)` against `S = sum_n 2^{-n alpha} mu(r_n)`.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichCheck {
    pub alpha: f64,
    /// `mu(x^alpha)` submajorized by `S`; only meaningful (and only
    /// checked) for `alpha <= 1`, where `t -> t^alpha` is subadditive.
    pub lower_submajorized: Option<bool>,
    /// `S <= (1 - 2^{-alpha})^{-1} mu(x^alpha)` pointwise at merged
    /// breakpoints; holds for every `alpha > 0`.
    pub upper_pointwise: bool,
    pub upper_constant: f64,
}

/// Runs the two-sided rearrangement comparison for one `alpha > 0`.
pub fn binary_sandwich_check(
    x: &Element,
    dec: &BinaryDecomposition,
    alpha: f64,
    tol: f64,
) -> Result<SandwichCheck> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need alpha > 0, got {alpha}"
        )));
    }
    let x_alpha = x.spectral_map(|l| l.max(0.0).powf(alpha));
    let mu_pow = singular_numbers(&x_alpha)?;
    let mut s = StepFunction::zero();
    for n in dec.n_min()..=dec.n_max() {
        let r = dec.r(n).expect("window index");
        if r.trace() == 0.0 {
            continue;
        }
        let mu_r = singular_numbers(r.element())?;
        s = s.add(&mu_r.scale((2.0_f64).powf(-(n as f64) * alpha))?)?;
    }
    let upper_constant = 1.0 / (1.0 - (2.0_f64).powf(-alpha));
    let mut upper_pointwise = true;
    for &t in &merged_breakpoints(&mu_pow, &s) {
        let lhs = s.value_at(t)?;
        let rhs = upper_constant * mu_pow.value_at(t)?;
        if lhs > rhs + tol {
            upper_pointwise = false;
            break;
        }
    }
    let lower_submajorized = if alpha <= 1.0 {
        // residual slack: the reconstruction misses up to residual_norm of
        // mass per unit length, amplified through t^alpha at most by the
        // derivative bound on [0, ||x||]; a flat additive cushion suffices
        // at these tolerances
        let cushion = StepFunction::new(vec![0.0], vec![tol])?;
        Some(majorizes(&mu_pow, &s.add(&cushion)?))
    } else {
        None
    };
    Ok(SandwichCheck {
        alpha,
        lower_submajorized,
        upper_pointwise,
        upper_constant,
    })
}

/// Outcome of the weighted pinching comparison.
#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub min_eigenvalue: f64,
    pub passes: bool,
}

/// Pinching inequality for disjoint projections `q_k` and weights
/// `d_k > 0`: with `Q = sum q_k`,
/// `Q x Q <= (sum 1/d_k) * sum d_k q_k x q_k`,
/// which holds whenever `x` is positive (weighted Cauchy-Schwarz on
/// `x = y* y`). Reports the minimum eigenvalue of RHS - LHS; passes at
/// tolerance `-1e-9 * ||x||_inf`.
pub fn diagonal_domination_check(
    qs: &[Projection],
    ds: &[f64],
    x: &Element,
) -> Result<DominationReport> {
    if qs.is_empty() || qs.len() != ds.len() {
        return Err(Error::InvalidArgument(
            "need equally many projections and weights, at least one".into(),
        ));
    }
    if ds.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::InvalidArgument(
            "weights must be positive and finite".into(),
        ));
    }
    for i in 0..qs.len() {
        for j in (i + 1)..qs.len() {
            let prod = qs[i].element().to_dense_matrix() * qs[j].element().to_dense_matrix();
            let overlap = prod.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if overlap > 1e-10 {
                return Err(Error::Precondition(format!(
                    "projections {i} and {j} overlap: max entry {overlap:.3e}"
                )));
            }
        }
    }
    let mut q_sum = Element::zero(x.algebra().clone());
    for q in qs {
        q_sum = q_sum.add(q.element())?;
    }
    let lhs = x.compress_by(&q_sum)?;
    let inv_sum: f64 = ds.iter().map(|d| 1.0 / d).sum();
    let mut rhs = Element::zero(x.algebra().clone());
    for (q, &d) in qs.iter().zip(ds) {
        rhs = rhs.add(&x.compress_by(q.element())?.scale(d))?;
    }
    rhs = rhs.scale(inv_sum);
    let min_eigenvalue = rhs.sub(&lhs)?.min_eigenvalue();
    Ok(DominationReport {
        min_eigenvalue,
        passes: min_eigenvalue >= -1e-9 * x.linf_norm().max(1e-300),
    })
}

/// Corner reduction: for positive `s` whose off-corner
/// `(1-e) s (1-e)` vanishes (max entry at most 1e-10, a precondition),
/// checks `s = e s e` within max-entry `1e-8 * ||s||_inf`.
pub fn corner_identity_check(s: &Element, e: &Projection) -> Result<bool> {
    let comp = e.complement();
    let off_corner = s.compress_by(comp.element())?;
    let defect = off_corner.max_entry_norm();
    if defect > 1e-10 {
        return Err(Error::Precondition(format!(
            "off-corner compression does not vanish: max entry {defect:.3e}"
        )));
    }
    let corner = s.compress_by(e.element())?;
    let gap = s.sub(&corner)?.max_entry_norm();
    Ok(gap <= 1e-8 * s.linf_norm().max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specmat::algebra::TracialAlgebra;
    use nalgebra::Complex as C;

    fn diag(vals: &[f64]) -> Element {
        let alg = TracialAlgebra::commutative_uniform(vals.len()).unwrap();
        Element::diagonal(alg, vals.to_vec()).unwrap()
    }

    #[test]
    fn spectral_projection_examples() {
        let x = diag(&[0.2, 0.8]);
        let e = spectral_projection(&x, 0.5, f64::INFINITY).unwrap();
        assert_eq!(e.element().as_diagonal().unwrap(), &[0.0, 1.0]);
        let all = spectral_projection(&x, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert_eq!(all.trace(), 1.0);
        // endpoint exclusion on both sides
        let y = diag(&[0.5, 1.0, 0.75]);
        let e2 = spectral_projection(&y, 0.5, 1.0).unwrap();
        assert_eq!(e2.element().as_diagonal().unwrap(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn spectral_projection_commutes_dense() {
        let alg = TracialAlgebra::full_matrix(2).unwrap();
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C::new(1.0, 0.0),
                C::new(0.5, 0.0),
                C::new(0.5, 0.0),
                C::new(2.0, 0.0),
            ],
        );
        let x = Element::dense(alg, m).unwrap();
        let e = spectral_projection(&x, 1.5, f64::INFINITY).unwrap();
        let xe = x.to_dense_matrix() * e.element().to_dense_matrix();
        let ex = e.element().to_dense_matrix() * x.to_dense_matrix();
        let defect = (&xe - &ex).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(defect < 1e-9, "commutator defect {defect}");
        // spectrum of the top eigenvalue block
        assert!((e.trace() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_numbers_oracle() {
        let x = diag(&[3.0, 1.0, 2.0]);
        let mu = singular_numbers(&x).unwrap();
        assert_eq!(mu.breakpoints(), &[0.0, 1.0 / 3.0, 2.0 / 3.0]);
        assert_eq!(mu.values(), &[3.0, 2.0, 1.0]);
        // trace identity for positive elements
        assert!((mu.total_integral() - x.trace()).abs() < 1e-12);
        // projection rearranges to an indicator
        let p = diag(&[1.0, 0.0, 1.0]);
        let mu_p = singular_numbers(&p).unwrap();
        assert_eq!(mu_p.value_at(0.5).unwrap(), 1.0);
        assert_eq!(mu_p.value_at(0.7).unwrap(), 0.0);
    }

    #[test]
    fn distribution_and_rearrangement_are_mutual_inverses() {
        let x = diag(&[3.0, 1.0, 2.0, 2.0, 0.5]);
        let mu = singular_numbers(&x).unwrap();
        for s in [0.0, 0.1, 0.3, 0.5, 0.9] {
            let lam = distribution(&x, mu.value_at(s).unwrap()).unwrap();
            assert!(lam <= s + 1e-12, "lambda(mu(s)) = {lam} > s = {s}");
        }
        for s in [0.0, 0.4, 1.0, 1.9, 2.5, 3.5] {
            let lam = distribution(&x, s).unwrap();
            if lam < 1.0 {
                let back = mu.value_at(lam).unwrap();
                assert!(back <= s + 1e-12, "mu(lambda(s)) = {back} > s = {s}");
            }
        }
    }

    #[test]
    fn binary_digits_exact_cases() {
        // 0.75 = 2^-1 + 2^-2
        assert!(binary_digit(0.75, 1) && binary_digit(0.75, 2));
        assert!(!binary_digit(0.75, 0) && !binary_digit(0.75, 3));
        // 1.0 has exactly the digit at n = 0
        assert!(binary_digit(1.0, 0));
        assert!(!binary_digit(1.0, 1) && !binary_digit(1.0, -1));
        // 2^-5
        assert!(binary_digit(0.03125, 5) && !binary_digit(0.03125, 4));
        // 1/3 = 0.0101...: digits at even n >= 2
        assert!(!binary_digit(1.0 / 3.0, 1));
        assert!(binary_digit(1.0 / 3.0, 2));
        assert!(!binary_digit(1.0 / 3.0, 3));
        assert!(binary_digit(1.0 / 3.0, 4));
    }

    #[test]
    fn binary_decomposition_examples() {
        let x = diag(&[0.75, 0.5]);
        let dec = binary_decomposition(&x, (1, 2)).unwrap();
        assert_eq!(dec.r(1).unwrap().element().as_diagonal().unwrap(), &[1.0, 1.0]);
        assert_eq!(dec.r(2).unwrap().element().as_diagonal().unwrap(), &[1.0, 0.0]);
        assert_eq!(dec.residual_norm(), 0.0);

        // an exact projection decomposes with the single digit n = 0
        let p = diag(&[1.0, 0.0, 1.0]);
        let dp = binary_decomposition(&p, (0, 5)).unwrap();
        assert_eq!(dp.r(0).unwrap().element().as_diagonal().unwrap(), &[1.0, 0.0, 1.0]);
        for n in 1..=5 {
            assert_eq!(dp.r(n).unwrap().trace(), 0.0);
        }
        assert_eq!(dp.residual_norm(), 0.0);

        // leading digit outside the window is a precondition error
        assert!(matches!(
            binary_decomposition(&diag(&[2.5]), (0, 5)),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            binary_decomposition(&diag(&[-0.5]), (0, 5)),
            Err(Error::Precondition(_))
        ));
        // residual bounded by the last kept digit
        let y = diag(&[1.0 / 3.0, 0.9]);
        let dy = binary_decomposition(&y, (0, 10)).unwrap();
        assert!(dy.residual_norm() <= (2.0_f64).powi(-10));
        assert!(dy.residual_norm() > 0.0);
    }

    #[test]
    fn binary_decomposition_dense_shares_eigenbasis() {
        let alg = TracialAlgebra::full_matrix(2).unwrap();
        // eigenvalues 0.75 and 0.25 in a rotated basis
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C::new(0.5, 0.0),
                C::new(0.25, 0.0),
                C::new(0.25, 0.0),
                C::new(0.5, 0.0),
            ],
        );
        let x = Element::dense(alg, m).unwrap();
        let dec = binary_decomposition(&x, (1, 3)).unwrap();
        assert_eq!(dec.residual_norm(), 0.0);
        // reconstruct and compare
        let mut recon = Element::zero(x.algebra().clone());
        for n in 1..=3 {
            recon = recon
                .add(&dec.r(n).unwrap().element().scale((2.0_f64).powi(-(n as i32))))
                .unwrap();
        }
        let gap = x.sub(&recon).unwrap().linf_norm();
        assert!(gap < 1e-12, "reconstruction gap {gap}");
        // digit projections commute with x
        for n in 1..=3 {
            assert!(x.mul_commuting(dec.r(n).unwrap().element()).is_ok());
        }
    }

    #[test]
    fn sandwich_holds_on_examples() {
        let x = diag(&[0.75, 0.5, 0.3125, 0.25]);
        let dec = binary_decomposition(&x, (1, 40)).unwrap();
        for alpha in [0.5, 1.0, 2.0] {
            let chk = binary_sandwich_check(&x, &dec, alpha, 1e-9).unwrap();
            assert!(chk.upper_pointwise, "upper failed at alpha {alpha}");
            if alpha <= 1.0 {
                assert_eq!(chk.lower_submajorized, Some(true));
            } else {
                assert!(chk.lower_submajorized.is_none());
            }
        }
    }

    #[test]
    fn domination_identity_and_two_block_cases() {
        let alg = TracialAlgebra::full_matrix(2).unwrap();
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C::new(1.0, 0.0),
                C::new(0.5, 0.0),
                C::new(0.5, 0.0),
                C::new(2.0, 0.0),
            ],
        );
        let x = Element::dense(alg.clone(), m).unwrap();
        let e1 = Projection::try_new(
            Element::dense(
                alg.clone(),
                CMatrix::from_row_slice(
                    2,
                    2,
                    &[C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)],
                ),
            )
            .unwrap(),
        )
        .unwrap();
        let e2 = e1.complement();
        // single projection: equality, min eigenvalue 0
        let single = diagonal_domination_check(&[e1.clone()], &[3.0], &x).unwrap();
        assert!(single.passes && single.min_eigenvalue.abs() < 1e-12);
        // full pinch with equal weights
        let full = diagonal_domination_check(&[e1.clone(), e2.clone()], &[1.0, 1.0], &x).unwrap();
        assert!(full.passes);
        // overlapping projections are rejected
        assert!(matches!(
            diagonal_domination_check(&[e1.clone(), e1.clone()], &[1.0, 1.0], &x),
            Err(Error::Precondition(_))
        ));
        // uneven weights still dominate
        let uneven = diagonal_domination_check(&[e1, e2], &[10.0, 0.1], &x).unwrap();
        assert!(uneven.passes, "min eig {}", uneven.min_eigenvalue);
    }

    #[test]
    fn corner_identity_examples() {
        let alg = TracialAlgebra::commutative_uniform(3).unwrap();
        let s = Element::diagonal(alg.clone(), vec![2.0, 1.0, 0.0]).unwrap();
        let e = Projection::from_indicator(alg.clone(), &[true, true, false]).unwrap();
        assert!(corner_identity_check(&s, &e).unwrap());
        // support leaking outside e violates the precondition
        let bad_e = Projection::from_indicator(alg, &[true, false, false]).unwrap();
        assert!(matches!(
            corner_identity_check(&s, &bad_e),
            Err(Error::Precondition(_))
        ));
    }
}
