//! Seeded random generators for test families: Hermitian and PSD elements
//! with controlled spectra, Haar-like unitaries, disjoint projection
//! systems, Dirac-style atoms, and dyadic indicators.
//!
//! Everything is driven by an explicit ChaCha8 stream so test data and CLI
//! reports are reproducible bit-for-bit from a seed.

use crate::specmat::{CMatrix, Element, Projection, Structure, TracialAlgebra};
use crate::{Error, Result};
use nalgebra::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian via Box-Muller.
fn gaussian(r: &mut ChaCha8Rng) -> Complex<f64> {
    let u1: f64 = r.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = r.gen();
    let mag = (-2.0 * u1.ln()).sqrt();
    Complex::new(
        mag * (std::f64::consts::TAU * u2).cos(),
        mag * (std::f64::consts::TAU * u2).sin(),
    )
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the R diagonal
/// phase-fixed to be positive.
pub fn random_unitary(dim: usize, r: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(r));
    let qr = g.qr();
    let rr = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = rr[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex::new(1.0, 0.0)
        };
        let col = q.column(j) * phase.conj();
        q.set_column(j, &col);
    }
    q
}

/// Random Hermitian element with entries of unit scale. Commutative
/// algebras get a random real diagonal in [-1, 1).
pub fn random_hermitian(alg: &Arc<TracialAlgebra>, r: &mut ChaCha8Rng) -> Result<Element> {
    if alg.is_commutative() {
        let vals = (0..alg.dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
        return Element::diagonal(alg.clone(), vals);
    }
    let d = alg.dim();
    let mut m = CMatrix::zeros(d, d);
    match alg.structure() {
        Structure::BlockDiagonal { sizes } => {
            let mut off = 0;
            for &s in sizes {
                let g = CMatrix::from_fn(s, s, |_, _| gaussian(r));
                let h = (&g + g.adjoint()).scale(0.5);
                m.view_mut((off, off), (s, s)).copy_from(&h);
                off += s;
            }
        }
        _ => {
            let g = CMatrix::from_fn(d, d, |_, _| gaussian(r));
            m = (&g + g.adjoint()).scale(0.5);
        }
    }
    Element::dense(alg.clone(), m)
}

/// Random PSD element with eigenvalues drawn uniformly from `(lo, hi)` in a
/// random eigenbasis (identity basis for commutative algebras).
pub fn random_psd_with_spectrum(
    alg: &Arc<TracialAlgebra>,
    lo: f64,
    hi: f64,
    r: &mut ChaCha8Rng,
) -> Result<Element> {
    if !(0.0 <= lo && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= lo < hi, got ({lo}, {hi})"
        )));
    }
    if alg.is_commutative() {
        let vals = (0..alg.dim()).map(|_| r.gen_range(lo..hi)).collect();
        return Element::diagonal(alg.clone(), vals);
    }
    let d = alg.dim();
    let mut m = CMatrix::zeros(d, d);
    let blocks: Vec<(usize, usize)> = match alg.structure() {
        Structure::BlockDiagonal { sizes } => {
            let mut out = Vec::new();
            let mut off = 0;
            for &s in sizes {
                out.push((off, s));
                off += s;
            }
            out
        }
        _ => vec![(0, d)],
    };
    for (off, s) in blocks {
        let u = random_unitary(s, r);
        let diag = CMatrix::from_fn(s, s, |i, j| {
            if i == j {
                Complex::new(r.gen_range(lo..hi), 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let h = &u * diag * u.adjoint();
        let h = (&h + h.adjoint()).scale(0.5);
        m.view_mut((off, off), (s, s)).copy_from(&h);
    }
    Element::dense(alg.clone(), m)
}

/// Random system of pairwise disjoint projections: a Haar unitary's
/// columns are split into `count` groups (sizes random, not necessarily
/// exhausting the space). Block-diagonal algebras get a per-block Haar
/// unitary, so every projection respects the block pattern.
pub fn random_disjoint_projections(
    alg: &Arc<TracialAlgebra>,
    count: usize,
    r: &mut ChaCha8Rng,
) -> Result<Vec<Projection>> {
    let d = alg.dim();
    if count == 0 || count > d {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= count <= dim, got {count} for dim {d}"
        )));
    }
    if alg.is_commutative() {
        // random disjoint index groups
        let mut idx: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            let j = r.gen_range(0..=i);
            idx.swap(i, j);
        }
        let mut flagsets = vec![vec![false; d]; count];
        for (pos, &i) in idx.iter().enumerate() {
            let group = pos % (count + 1);
            if group < count {
                flagsets[group][i] = true;
            }
        }
        return flagsets
            .into_iter()
            .map(|f| Projection::from_indicator(alg.clone(), &f))
            .collect();
    }
    // each column lives in one block, so column outer products (and their
    // sums) stay inside the pattern
    let u = match alg.structure() {
        Structure::BlockDiagonal { sizes } => {
            let mut m = CMatrix::zeros(d, d);
            let mut off = 0;
            for &s in sizes {
                let ub = random_unitary(s, r);
                m.view_mut((off, off), (s, s)).copy_from(&ub);
                off += s;
            }
            m
        }
        _ => random_unitary(d, r),
    };
    // random split points: sizes >= 1 per group, possibly leaving a remainder
    let mut cuts: Vec<usize> = (1..d).collect();
    for i in (1..cuts.len()).rev() {
        let j = r.gen_range(0..=i);
        cuts.swap(i, j);
    }
    let mut chosen: Vec<usize> = cuts.into_iter().take(count - 1).collect();
    chosen.push(0);
    chosen.sort_unstable();
    let mut bounds = chosen;
    let floor = *bounds.last().unwrap() + 1;
    let end = if r.gen_bool(0.5) { d } else { r.gen_range(floor..=d) };
    bounds.push(end);
    let mut out = Vec::with_capacity(count);
    for g in 0..count {
        let (a, b) = (bounds[g], bounds[g + 1]);
        let mut p = CMatrix::zeros(d, d);
        for j in a..b {
            let v = u.column(j);
            p += &v * v.adjoint();
        }
        let p = (&p + p.adjoint()).scale(0.5);
        out.push(Projection::try_new(Element::dense(alg.clone(), p)?)?);
    }
    Ok(out)
}

/// Point mass `mass` on one atom of a commutative algebra.
pub fn dirac_element(alg: &Arc<TracialAlgebra>, atom: usize, mass: f64) -> Result<Element> {
    if !alg.is_commutative() {
        return Err(Error::Structure("Dirac atoms need a commutative algebra".into()));
    }
    if atom >= alg.dim() {
        return Err(Error::InvalidArgument(format!(
            "atom {atom} outside dimension {}",
            alg.dim()
        )));
    }
    let mut vals = vec![0.0; alg.dim()];
    vals[atom] = mass;
    Element::diagonal(alg.clone(), vals)
}

/// Indicator of the dyadic interval `[a 2^{-n}, (a+1) 2^{-n})` realized on
/// `2^N` uniform atoms.
pub fn dyadic_interval_indicator(
    alg: &Arc<TracialAlgebra>,
    big_n: u32,
    level: u32,
    position: usize,
) -> Result<Projection> {
    if !alg.is_commutative() || alg.dim() != 1usize << big_n {
        return Err(Error::Structure(format!(
            "need a commutative algebra on 2^{big_n} atoms"
        )));
    }
    if level > big_n || position >= 1usize << level {
        return Err(Error::InvalidArgument(format!(
            "interval (level {level}, position {position}) outside depth {big_n}"
        )));
    }
    let width = 1usize << (big_n - level);
    let start = position * width;
    let flags: Vec<bool> = (0..alg.dim()).map(|i| i >= start && i < start + width).collect();
    Projection::from_indicator(alg.clone(), &flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specmat::psd_leq;

    #[test]
    fn unitary_is_unitary_and_seeded() {
        let mut r1 = rng(7);
        let u = random_unitary(5, &mut r1);
        let defect = (u.adjoint() * &u - CMatrix::identity(5, 5))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        assert!(defect < 1e-12, "unitarity defect {defect}");
        let mut r2 = rng(7);
        let u2 = random_unitary(5, &mut r2);
        assert_eq!(u, u2);
    }

    #[test]
    fn psd_spectrum_in_range() {
        let alg = TracialAlgebra::full_matrix(6).unwrap();
        let mut r = rng(1);
        for _ in 0..5 {
            let x = random_psd_with_spectrum(&alg, 0.0, 1.0, &mut r).unwrap();
            assert!(x.min_eigenvalue() >= -1e-12);
            assert!(x.linf_norm() < 1.0 + 1e-12);
        }
    }

    #[test]
    fn disjoint_projections_are_disjoint() {
        let mut r = rng(3);
        let alg = TracialAlgebra::full_matrix(8).unwrap();
        let ps = random_disjoint_projections(&alg, 3, &mut r).unwrap();
        assert_eq!(ps.len(), 3);
        let mut total = crate::specmat::Element::zero(alg);
        for p in &ps {
            total = total.add(p.element()).unwrap();
        }
        // the sum of disjoint projections is itself a projection
        assert!(Projection::try_new(total.clone()).is_ok());
        let one = crate::specmat::Element::one(total.algebra().clone());
        assert!(psd_leq(&total, &one).unwrap());

        let calg = TracialAlgebra::commutative_uniform(10).unwrap();
        let cs = random_disjoint_projections(&calg, 4, &mut r).unwrap();
        let mut tot = crate::specmat::Element::zero(calg);
        for p in &cs {
            tot = tot.add(p.element()).unwrap();
        }
        assert!(tot.linf_norm() <= 1.0);
    }

    #[test]
    fn dyadic_indicator_geometry() {
        let alg = TracialAlgebra::commutative_uniform(8).unwrap();
        let p = dyadic_interval_indicator(&alg, 3, 1, 1).unwrap();
        assert_eq!(
            p.element().as_diagonal().unwrap(),
            &[0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]
        );
        assert_eq!(p.trace(), 0.5);
        let d = dirac_element(&alg, 0, 8.0).unwrap();
        assert_eq!(d.trace(), 1.0);
    }
}
