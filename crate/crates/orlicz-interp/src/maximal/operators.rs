//! Maximal families, positive `L_p(l_inf)` norms, and stopping-time
//! projections associated with a filtration.

use super::filtration::{Filtration, Level};
use crate::specmat::{spectral_projection, Element, Projection};
use crate::{Error, Result};
use serde::Serialize;

/// `[E_i x]` over every level of the filtration (the full grid for tensor
/// filtrations), in the filtration's enumeration order.
pub fn maximal_family(f: &Filtration, x: &Element) -> Result<Vec<Element>> {
    f.levels().iter().map(|&l| f.expect(l, x)).collect()
}

/// Pointwise supremum of a commutative family.
pub fn commutative_sup(family: &[Element]) -> Result<Element> {
    let mut it = family.iter();
    let first = it
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty family".into()))?;
    let mut acc = first.clone();
    for x in it {
        acc = acc.pointwise_max(x)?;
    }
    Ok(acc)
}

/// `L_p(l_inf)` norm data for a positive family: the infimum of `||a||_p`
/// over upper bounds `x_n <= a`.
#[derive(Clone, Debug)]
pub struct LinfNormBound {
    /// Upper bound on the infimum, realized by `certificate`.
    pub value: f64,
    /// Certified lower bound on the infimum.
    pub lower_bound: f64,
    /// True when upper and lower agree within 1e-6 relative (always in the
    /// commutative case, where the lattice supremum is available).
    pub exact: bool,
    pub certificate: Element,
}

const PSD_TOL: f64 = 1e-8;

/// Computes the positive-family `L_p(l_inf)` norm. Commutative families
/// are exact: the certificate is the pointwise supremum. Matrix families
/// get an upper bound from cycling `a <- a + (x_n - a)_+` to stationarity
/// plus a certified lower bound (max member norm and the eigenvalue
/// envelope, both of which every upper bound must dominate).
pub fn lp_linf_norm_positive(family: &[Element], p: f64) -> Result<LinfNormBound> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty family".into()));
    }
    let alg = family[0].algebra().clone();
    for x in family {
        if *x.algebra() != alg {
            return Err(Error::Structure("family spans different algebras".into()));
        }
        let floor = x.min_eigenvalue();
        if floor < -PSD_TOL * x.linf_norm().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "family member is not PSD: min eigenvalue {floor:.3e}"
            )));
        }
    }
    if alg.is_commutative() {
        let sup = commutative_sup(family)?;
        let value = sup.lp_norm(p)?;
        return Ok(LinfNormBound {
            value,
            lower_bound: value,
            exact: true,
            certificate: sup,
        });
    }

    // upper bound: monotone envelope sweeps until stationary
    let scale = family
        .iter()
        .map(|x| x.linf_norm())
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    let mut a = Element::zero(alg.clone());
    for _ in 0..1000 {
        let mut moved = 0.0_f64;
        for x in family {
            let gain = x.sub(&a)?.positive_part();
            moved = moved.max(gain.linf_norm());
            a = a.add(&gain)?;
        }
        if moved <= 1e-12 * scale {
            break;
        }
    }
    // certificate must dominate every member
    for x in family {
        let slack = a.sub(x)?.min_eigenvalue();
        if slack < -PSD_TOL * scale {
            return Err(Error::Structure(format!(
                "envelope certificate fails to dominate a member: {slack:.3e}"
            )));
        }
    }
    let value = a.lp_norm(p)?;

    // lower bound 1: any upper bound has norm >= each member's norm
    let mut lower: f64 = 0.0;
    for x in family {
        lower = lower.max(x.lp_norm(p)?);
    }
    // lower bound 2: eigenvalue envelope; mu_i(a) >= max_n mu_i(x_n) for
    // any common upper bound a, by Weyl monotonicity
    let mut envelopes: Vec<Vec<(f64, f64)>> = Vec::with_capacity(family.len());
    for x in family {
        let mut pairs = x.eigen_pairs();
        pairs.sort_by(|l, r| r.1.total_cmp(&l.1));
        envelopes.push(pairs);
    }
    let n_eigs = envelopes[0].len();
    let mut env_norm = 0.0_f64;
    if p.is_finite() {
        for i in 0..n_eigs {
            let w = envelopes[0][i].0;
            let top = envelopes.iter().map(|e| e[i].1).fold(0.0_f64, f64::max);
            env_norm += w * top.max(0.0).powf(p);
        }
        env_norm = env_norm.powf(1.0 / p);
    } else {
        env_norm = envelopes
            .iter()
            .map(|e| e.first().map(|t| t.1).unwrap_or(0.0))
            .fold(0.0_f64, f64::max);
    }
    lower = lower.max(env_norm);

    let exact = value <= lower * (1.0 + 1e-6);
    Ok(LinfNormBound {
        value,
        lower_bound: lower,
        exact,
        certificate: a,
    })
}

/// Stopping-time projection for one threshold: the largest-reasonable
/// projection `e` with `e E_i(x) e <= lambda e` at every level.
#[derive(Clone, Debug)]
pub struct CuculescuResult {
    pub projection: Projection,
    /// Measured weak (1,1) constant: `tau(1-e) * lambda / ||x||_1`.
    pub weak_constant: f64,
    /// `lambda - max_i ||e E_i(x) e||_inf`; the compression property holds
    /// when this is >= -1e-8 * max(lambda, ||x||_inf).
    pub margin: f64,
}

/// Stopping recursion over an explicit family: `q <- q - 1_{(lambda,
/// inf)}(q s q)` member by member. Eigenvalues within 1e-12 of `lambda`
/// count as below it (ties are kept).
pub(crate) fn stopping_projection(family: &[Element], lambda: f64) -> Result<Projection> {
    let alg = family
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty family".into()))?
        .algebra()
        .clone();
    let mut q = Projection::identity(alg);
    for s in family {
        let compressed = s.compress_by(q.element())?;
        let above = spectral_projection(&compressed, lambda, f64::INFINITY)?;
        // 1_{(lambda,inf)}(q s q) <= q, so the difference is a projection
        q = Projection::try_new(q.element().sub(above.element())?)?;
    }
    Ok(q)
}

/// Runs the recursive stopping construction through the levels in
/// enumeration order; the result is the decreasing limit (the final `q`).
pub fn cuculescu_projection(f: &Filtration, x: &Element, lambda: f64) -> Result<CuculescuResult> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive and finite, got {lambda}"
        )));
    }
    let floor = x.min_eigenvalue();
    if floor < -PSD_TOL * x.linf_norm().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "element is not PSD: min eigenvalue {floor:.3e}"
        )));
    }
    let family = maximal_family(f, x)?;
    let q = stopping_projection(&family, lambda)?;
    // verify the compression property across all levels
    let mut worst = f64::NEG_INFINITY;
    for e in &family {
        let compressed = e.compress_by(q.element())?;
        worst = worst.max(compressed.linf_norm());
    }
    let margin = lambda - worst;
    if margin < -PSD_TOL * lambda.max(x.linf_norm()) {
        return Err(Error::Structure(format!(
            "stopping projection fails the level bound: margin {margin:.3e}"
        )));
    }
    let l1 = x.lp_norm(1.0)?;
    let excess = 1.0 - q.trace();
    let weak_constant = if excess <= 0.0 || l1 == 0.0 {
        0.0
    } else {
        excess * lambda / l1
    };
    Ok(CuculescuResult {
        projection: q,
        weak_constant,
        margin,
    })
}

/// Levels of a filtration annotated for reports.
#[derive(Clone, Debug, Serialize)]
pub struct LevelValue {
    pub level: Level,
    pub value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use crate::specmat::{Element, TracialAlgebra};

    #[test]
    fn maximal_family_dirac_example() {
        let f = Filtration::dyadic_commutative(2).unwrap();
        let x = Element::diagonal(f.algebra().clone(), vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        let fam = maximal_family(&f, &x).unwrap();
        assert_eq!(fam.len(), 3);
        assert_eq!(fam[0].as_diagonal().unwrap(), &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(fam[1].as_diagonal().unwrap(), &[2.0, 2.0, 0.0, 0.0]);
        assert_eq!(fam[2].as_diagonal().unwrap(), &[4.0, 0.0, 0.0, 0.0]);
        // unitality: x = 1 maps to all ones
        let one = Element::one(f.algebra().clone());
        for e in maximal_family(&f, &one).unwrap() {
            assert!(e.sub(&one).unwrap().max_entry_norm() < 1e-15);
        }
    }

    #[test]
    fn lp_linf_commutative_is_pointwise_sup() {
        let f = Filtration::dyadic_commutative(3).unwrap();
        let mut r = sampling::rng(21);
        let x = sampling::random_psd_with_spectrum(f.algebra(), 0.0, 2.0, &mut r).unwrap();
        let fam = maximal_family(&f, &x).unwrap();
        let bound = lp_linf_norm_positive(&fam, 1.5).unwrap();
        assert!(bound.exact);
        // bit-for-bit match with the direct pointwise maximum
        let mut sup = fam[0].as_diagonal().unwrap().to_vec();
        for e in &fam[1..] {
            for (s, v) in sup.iter_mut().zip(e.as_diagonal().unwrap()) {
                *s = s.max(*v);
            }
        }
        let direct = Element::diagonal(f.algebra().clone(), sup).unwrap();
        assert_eq!(bound.value, direct.lp_norm(1.5).unwrap());
        assert_eq!(
            bound.certificate.as_diagonal().unwrap(),
            direct.as_diagonal().unwrap()
        );
    }

    #[test]
    fn lp_linf_single_element_is_its_norm() {
        let alg = TracialAlgebra::full_matrix(4).unwrap();
        let mut r = sampling::rng(3);
        let x = sampling::random_psd_with_spectrum(&alg, 0.0, 1.0, &mut r).unwrap();
        let b = lp_linf_norm_positive(std::slice::from_ref(&x), 2.0).unwrap();
        let expect = x.lp_norm(2.0).unwrap();
        assert!((b.value - expect).abs() < 1e-9 * expect.max(1.0));
        assert!(b.exact);
    }

    #[test]
    fn lp_linf_commuting_matrices_match_diagonal_oracle() {
        // two commuting matrices diagonal in the same rotated basis
        let alg = TracialAlgebra::full_matrix(3).unwrap();
        let mut r = sampling::rng(8);
        let u = sampling::random_unitary(3, &mut r);
        let make = |diag: &[f64]| {
            let m = crate::specmat::CMatrix::from_fn(3, 3, |i, j| {
                if i == j {
                    nalgebra::Complex::new(diag[i], 0.0)
                } else {
                    nalgebra::Complex::new(0.0, 0.0)
                }
            });
            let rot = &u * m * u.adjoint();
            let rot = (&rot + rot.adjoint()).scale(0.5);
            Element::dense(alg.clone(), rot).unwrap()
        };
        let x1 = make(&[1.0, 0.2, 0.5]);
        let x2 = make(&[0.3, 0.9, 0.4]);
        let b = lp_linf_norm_positive(&[x1, x2], 2.0).unwrap();
        // commutative oracle: pointwise max of the diagonals
        let oracle = ((1.0f64.powi(2) + 0.9f64.powi(2) + 0.5f64.powi(2)) / 3.0).sqrt();
        assert!(
            (b.value - oracle).abs() < 1e-8,
            "value {} vs oracle {oracle}",
            b.value
        );
        // the envelope lower bound is loose here, so `exact` may be false
        assert!(b.lower_bound <= b.value + 1e-12);
    }

    #[test]
    fn cuculescu_commutative_example() {
        let f = Filtration::dyadic_commutative(2).unwrap();
        let x = Element::diagonal(f.algebra().clone(), vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        let res = cuculescu_projection(&f, &x, 1.5).unwrap();
        assert_eq!(
            res.projection.element().as_diagonal().unwrap(),
            &[0.0, 0.0, 1.0, 1.0]
        );
        assert!((res.projection.trace() - 0.5).abs() < 1e-15);
        // tau(1-e) = 1/2 = 0.75 * ||x||_1 / lambda, so C = 0.75
        assert!((res.weak_constant - 0.75).abs() < 1e-12);
        assert!(res.margin >= 0.0);
    }

    #[test]
    fn cuculescu_nothing_above_threshold_keeps_identity() {
        let f = Filtration::dyadic_commutative(3).unwrap();
        let mut r = sampling::rng(30);
        let x = sampling::random_psd_with_spectrum(f.algebra(), 0.0, 0.9, &mut r).unwrap();
        let res = cuculescu_projection(&f, &x, 1.0).unwrap();
        assert_eq!(res.projection.trace(), 1.0);
        assert_eq!(res.weak_constant, 0.0);
    }

    #[test]
    fn cuculescu_matrix_compression_bound() {
        let f = Filtration::matrix_block(3).unwrap();
        let mut r = sampling::rng(44);
        for _ in 0..5 {
            let x = sampling::random_psd_with_spectrum(f.algebra(), 0.0, 2.0, &mut r).unwrap();
            let res = cuculescu_projection(&f, &x, 0.8).unwrap();
            // property (i): within 1e-8
            assert!(res.margin >= -1e-8 * 2.0, "margin {}", res.margin);
            // e commutes with nothing in particular but stays a projection
            assert!(res.projection.trace() <= 1.0 + 1e-12);
        }
    }
}
