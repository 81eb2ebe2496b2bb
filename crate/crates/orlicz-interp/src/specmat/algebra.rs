//! Tracial matrix algebras and their Hermitian elements.
//!
//! An algebra is a finite-dimensional *-algebra carrying a faithful tracial
//! state: full matrix algebras with the normalized trace, commutative
//! (diagonal) algebras with arbitrary positive weights, and block-diagonal
//! algebras whose weights are constant on each block (the general tracial
//! state on a direct sum of matrix factors). Elements are Hermitian by
//! construction; every downstream operation relies on real spectra.

use crate::{Error, Result};
use nalgebra::{Complex, DMatrix};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::sync::Arc;

pub type CMatrix = DMatrix<Complex<f64>>;

/// Support pattern of the algebra inside its ambient matrix space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Structure {
    FullMatrix,
    Diagonal,
    BlockDiagonal { sizes: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
enum Weights {
    /// `1/n` per coordinate; avoids materializing huge commutative weight
    /// vectors.
    Uniform(usize),
    Explicit(Vec<f64>),
}

/// A finite-dimensional algebra with a tracial state.
#[derive(Clone, Debug, PartialEq)]
pub struct TracialAlgebra {
    dim: usize,
    weights: Weights,
    structure: Structure,
}

/// Matrix dimensions beyond this are out of scope (dense eigendecompositions
/// dominate the cost model). Commutative algebras are exempt.
pub const MAX_MATRIX_DIM: usize = 4096;

impl TracialAlgebra {
    /// Full matrix algebra `M_dim` with the normalized trace.
    pub fn full_matrix(dim: usize) -> Result<Arc<Self>> {
        if dim == 0 || dim > MAX_MATRIX_DIM {
            return Err(Error::InvalidArgument(format!(
                "matrix dimension {dim} outside [1, {MAX_MATRIX_DIM}]"
            )));
        }
        Ok(Arc::new(TracialAlgebra {
            dim,
            weights: Weights::Uniform(dim),
            structure: Structure::FullMatrix,
        }))
    }

    /// Commutative algebra on `n` atoms of equal weight.
    pub fn commutative_uniform(n: usize) -> Result<Arc<Self>> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one atom".into()));
        }
        Ok(Arc::new(TracialAlgebra {
            dim: n,
            weights: Weights::Uniform(n),
            structure: Structure::Diagonal,
        }))
    }

    /// Commutative algebra with explicit atom weights (positive, summing
    /// to 1 within 1e-12).
    pub fn commutative(weights: Vec<f64>) -> Result<Arc<Self>> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("need at least one atom".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "atom weights must be positive and finite".into(),
            ));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "atom weights must sum to 1, got {s}"
            )));
        }
        Ok(Arc::new(TracialAlgebra {
            dim: weights.len(),
            weights: Weights::Explicit(weights),
            structure: Structure::Diagonal,
        }))
    }

    /// Direct sum of matrix blocks. `masses[b]` is the total trace mass of
    /// block `b` (default: proportional to block size, recovering the
    /// normalized trace of the ambient matrix algebra). Tracial states on
    /// such sums have constant weight within each block.
    pub fn block_diagonal(sizes: &[usize], masses: Option<&[f64]>) -> Result<Arc<Self>> {
        if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidArgument("blocks must be non-empty".into()));
        }
        let dim: usize = sizes.iter().sum();
        if dim > MAX_MATRIX_DIM {
            return Err(Error::InvalidArgument(format!(
                "total dimension {dim} exceeds {MAX_MATRIX_DIM}"
            )));
        }
        let mut w = Vec::with_capacity(dim);
        match masses {
            None => {
                for &s in sizes {
                    w.extend(std::iter::repeat(1.0 / dim as f64).take(s));
                }
            }
            Some(m) => {
                if m.len() != sizes.len() {
                    return Err(Error::InvalidArgument(
                        "one mass per block required".into(),
                    ));
                }
                if m.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "block masses must be positive".into(),
                    ));
                }
                let s: f64 = m.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "block masses must sum to 1, got {s}"
                    )));
                }
                for (&sz, &mass) in sizes.iter().zip(m) {
                    w.extend(std::iter::repeat(mass / sz as f64).take(sz));
                }
            }
        }
        Ok(Arc::new(TracialAlgebra {
            dim,
            weights: Weights::Explicit(w),
            structure: Structure::BlockDiagonal {
                sizes: sizes.to_vec(),
            },
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn is_commutative(&self) -> bool {
        matches!(self.structure, Structure::Diagonal)
    }

    /// Trace weight of coordinate `i`.
    pub fn weight(&self, i: usize) -> f64 {
        match &self.weights {
            Weights::Uniform(n) => 1.0 / *n as f64,
            Weights::Explicit(w) => w[i],
        }
    }

    /// `(offset, size)` decomposition used for blockwise eigenproblems.
    pub(crate) fn blocks(&self) -> Vec<(usize, usize)> {
        match &self.structure {
            Structure::FullMatrix => vec![(0, self.dim)],
            Structure::Diagonal => vec![(0, self.dim)],
            Structure::BlockDiagonal { sizes } => {
                let mut out = Vec::with_capacity(sizes.len());
                let mut off = 0;
                for &s in sizes {
                    out.push((off, s));
                    off += s;
                }
                out
            }
        }
    }
}

/// Hermitian element payload.
#[derive(Clone, Debug)]
pub enum ElementData {
    /// Real diagonal; the only representation allowed in commutative
    /// algebras, also valid in matrix algebras.
    Diagonal(Vec<f64>),
    Dense(CMatrix),
}

/// A Hermitian element of a tracial algebra.
#[derive(Clone, Debug)]
pub struct Element {
    alg: Arc<TracialAlgebra>,
    data: ElementData,
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

impl Element {
    pub fn diagonal(alg: Arc<TracialAlgebra>, vals: Vec<f64>) -> Result<Self> {
        if vals.len() != alg.dim() {
            return Err(Error::Structure(format!(
                "diagonal length {} vs algebra dimension {}",
                vals.len(),
                alg.dim()
            )));
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("entries must be finite".into()));
        }
        Ok(Element {
            alg,
            data: ElementData::Diagonal(vals),
        })
    }

    /// Wraps a dense matrix, validating Hermitian symmetry (max-entry
    /// tolerance 1e-12 relative to the largest entry) and the algebra's
    /// block support pattern. The stored matrix is exactly symmetrized.
    pub fn dense(alg: Arc<TracialAlgebra>, m: CMatrix) -> Result<Self> {
        if alg.is_commutative() {
            return Err(Error::Structure(
                "commutative algebras hold diagonal elements only".into(),
            ));
        }
        if m.nrows() != alg.dim() || m.ncols() != alg.dim() {
            return Err(Error::Structure(format!(
                "matrix is {}x{}, algebra dimension {}",
                m.nrows(),
                m.ncols(),
                alg.dim()
            )));
        }
        let scale = max_entry(&m).max(1.0);
        let herm_defect = max_entry(&(&m - m.adjoint()));
        if herm_defect > 2e-12 * scale {
            return Err(Error::Structure(format!(
                "matrix is not Hermitian: defect {herm_defect:.3e}"
            )));
        }
        let mut sym = (&m + m.adjoint()).scale(0.5);
        if let Structure::BlockDiagonal { .. } = alg.structure() {
            // entries outside the blocks must vanish; zero them exactly
            let blocks = alg.blocks();
            let member = |i: usize| -> usize {
                blocks
                    .iter()
                    .position(|&(off, sz)| i >= off && i < off + sz)
                    .unwrap()
            };
            for i in 0..sym.nrows() {
                for j in 0..sym.ncols() {
                    if member(i) != member(j) {
                        if sym[(i, j)].norm() > 1e-12 * scale {
                            return Err(Error::Structure(format!(
                                "entry ({i},{j}) falls outside the block pattern"
                            )));
                        }
                        sym[(i, j)] = Complex::new(0.0, 0.0);
                    }
                }
            }
        }
        Ok(Element {
            alg,
            data: ElementData::Dense(sym),
        })
    }

    pub fn zero(alg: Arc<TracialAlgebra>) -> Self {
        let d = alg.dim();
        Element {
            alg,
            data: ElementData::Diagonal(vec![0.0; d]),
        }
    }

    pub fn one(alg: Arc<TracialAlgebra>) -> Self {
        let d = alg.dim();
        Element {
            alg,
            data: ElementData::Diagonal(vec![1.0; d]),
        }
    }

    pub fn algebra(&self) -> &Arc<TracialAlgebra> {
        &self.alg
    }

    pub fn dim(&self) -> usize {
        self.alg.dim()
    }

    pub fn data(&self) -> &ElementData {
        &self.data
    }

    pub fn as_diagonal(&self) -> Option<&[f64]> {
        match &self.data {
            ElementData::Diagonal(v) => Some(v),
            ElementData::Dense(_) => None,
        }
    }

    pub(crate) fn to_dense_matrix(&self) -> CMatrix {
        match &self.data {
            ElementData::Dense(m) => m.clone(),
            ElementData::Diagonal(v) => {
                let d = v.len();
                CMatrix::from_fn(d, d, |i, j| {
                    if i == j {
                        Complex::new(v[i], 0.0)
                    } else {
                        Complex::new(0.0, 0.0)
                    }
                })
            }
        }
    }

    fn same_algebra(&self, other: &Element) -> Result<()> {
        if self.alg == other.alg {
            Ok(())
        } else {
            Err(Error::Structure("elements live in different algebras".into()))
        }
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.same_algebra(other)?;
        Ok(match (&self.data, &other.data) {
            (ElementData::Diagonal(a), ElementData::Diagonal(b)) => Element {
                alg: self.alg.clone(),
                data: ElementData::Diagonal(a.iter().zip(b).map(|(x, y)| x + y).collect()),
            },
            _ => Element {
                alg: self.alg.clone(),
                data: ElementData::Dense(self.to_dense_matrix() + other.to_dense_matrix()),
            },
        })
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Element {
        match &self.data {
            ElementData::Diagonal(v) => Element {
                alg: self.alg.clone(),
                data: ElementData::Diagonal(v.iter().map(|x| c * x).collect()),
            },
            ElementData::Dense(m) => Element {
                alg: self.alg.clone(),
                data: ElementData::Dense(m.scale(c)),
            },
        }
    }

    /// Product of two commuting Hermitian elements. The result is checked
    /// to be Hermitian, which fails exactly when the inputs do not commute.
    pub fn mul_commuting(&self, other: &Element) -> Result<Element> {
        self.same_algebra(other)?;
        match (&self.data, &other.data) {
            (ElementData::Diagonal(a), ElementData::Diagonal(b)) => Ok(Element {
                alg: self.alg.clone(),
                data: ElementData::Diagonal(a.iter().zip(b).map(|(x, y)| x * y).collect()),
            }),
            _ => {
                let p = self.to_dense_matrix() * other.to_dense_matrix();
                let scale = max_entry(&p).max(1.0);
                let defect = max_entry(&(&p - p.adjoint()));
                if defect > 1e-10 * scale {
                    return Err(Error::Structure(format!(
                        "product is not Hermitian (defect {defect:.3e}); factors do not commute"
                    )));
                }
                Ok(Element {
                    alg: self.alg.clone(),
                    data: ElementData::Dense((&p + p.adjoint()).scale(0.5)),
                })
            }
        }
    }

    /// Two-sided compression `a x a` for Hermitian `a` (typically a
    /// projection). Always Hermitian.
    pub fn compress_by(&self, a: &Element) -> Result<Element> {
        self.same_algebra(a)?;
        match (&self.data, &a.data) {
            (ElementData::Diagonal(x), ElementData::Diagonal(p)) => Ok(Element {
                alg: self.alg.clone(),
                data: ElementData::Diagonal(
                    x.iter().zip(p).map(|(v, q)| q * v * q).collect(),
                ),
            }),
            _ => {
                let am = a.to_dense_matrix();
                let p = &am * self.to_dense_matrix() * &am;
                Ok(Element {
                    alg: self.alg.clone(),
                    data: ElementData::Dense((&p + p.adjoint()).scale(0.5)),
                })
            }
        }
    }

    /// Tracial state applied to the element.
    pub fn trace(&self) -> f64 {
        match &self.data {
            ElementData::Diagonal(v) => v
                .iter()
                .enumerate()
                .map(|(i, x)| self.alg.weight(i) * x)
                .sum(),
            ElementData::Dense(m) => (0..self.dim())
                .map(|i| self.alg.weight(i) * m[(i, i)].re)
                .sum(),
        }
    }

    /// Eigenvalues paired with their trace weights. Dense elements are
    /// decomposed blockwise so each eigenvalue inherits its block's weight.
    pub fn eigen_pairs(&self) -> Vec<(f64, f64)> {
        match &self.data {
            ElementData::Diagonal(v) => v
                .iter()
                .enumerate()
                .map(|(i, &x)| (self.alg.weight(i), x))
                .collect(),
            ElementData::Dense(m) => {
                let mut out = Vec::with_capacity(self.dim());
                for (off, sz) in self.alg.blocks() {
                    let block = m.view((off, off), (sz, sz)).into_owned();
                    let eig = block.symmetric_eigen();
                    for v in eig.eigenvalues.iter() {
                        out.push((self.alg.weight(off), *v));
                    }
                }
                out
            }
        }
    }

    /// Max-entry norm (not the operator norm; used for symmetry and
    /// support checks).
    pub fn max_entry_norm(&self) -> f64 {
        match &self.data {
            ElementData::Diagonal(v) => v.iter().fold(0.0, |a, &x| a.max(x.abs())),
            ElementData::Dense(m) => max_entry(m),
        }
    }

    pub fn linf_norm(&self) -> f64 {
        self.eigen_pairs()
            .iter()
            .fold(0.0, |a, &(_, l)| a.max(l.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen_pairs()
            .iter()
            .fold(f64::INFINITY, |a, &(_, l)| a.min(l))
    }

    /// `tau(|x|^p)^{1/p}`; `p = inf` gives the spectral radius of `|x|`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_infinite() && p > 0.0 {
            return Ok(self.linf_norm());
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "L_p norms need p in [1, inf], got {p}"
            )));
        }
        let s: f64 = self
            .eigen_pairs()
            .iter()
            .map(|&(w, l)| w * l.abs().powf(p))
            .sum();
        Ok(s.powf(1.0 / p))
    }

    /// Functional calculus: applies `f` to the spectrum.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Element {
        match &self.data {
            ElementData::Diagonal(v) => Element {
                alg: self.alg.clone(),
                data: ElementData::Diagonal(v.iter().map(|&x| f(x)).collect()),
            },
            ElementData::Dense(m) => {
                let d = self.dim();
                let mut out = CMatrix::zeros(d, d);
                for (off, sz) in self.alg.blocks() {
                    let block = m.view((off, off), (sz, sz)).into_owned();
                    let eig = block.symmetric_eigen();
                    let mut fl = eig.eigenvalues.clone();
                    fl.iter_mut().for_each(|l| *l = f(*l));
                    let rebuilt = &eig.eigenvectors
                        * CMatrix::from_fn(sz, sz, |i, j| {
                            if i == j {
                                Complex::new(fl[i], 0.0)
                            } else {
                                Complex::new(0.0, 0.0)
                            }
                        })
                        * eig.eigenvectors.adjoint();
                    let herm = (&rebuilt + rebuilt.adjoint()).scale(0.5);
                    out.view_mut((off, off), (sz, sz)).copy_from(&herm);
                }
                Element {
                    alg: self.alg.clone(),
                    data: ElementData::Dense(out),
                }
            }
        }
    }

    pub fn positive_part(&self) -> Element {
        self.spectral_map(|l| l.max(0.0))
    }

    /// Entrywise maximum; defined only for commutative (diagonal) data.
    pub fn pointwise_max(&self, other: &Element) -> Result<Element> {
        self.same_algebra(other)?;
        match (&self.data, &other.data) {
            (ElementData::Diagonal(a), ElementData::Diagonal(b)) => Ok(Element {
                alg: self.alg.clone(),
                data: ElementData::Diagonal(
                    a.iter().zip(b).map(|(x, y)| x.max(*y)).collect(),
                ),
            }),
            _ => Err(Error::Unsupported(
                "pointwise max needs diagonal elements".into(),
            )),
        }
    }
}

/// PSD order check: min eigenvalue of `b - a` at tolerance
/// `-1e-9 * max(1, ||b||_inf)`.
pub fn psd_leq(a: &Element, b: &Element) -> Result<bool> {
    let diff = b.sub(a)?;
    Ok(diff.min_eigenvalue() >= -1e-9 * b.linf_norm().max(1.0))
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Element", 4)?;
        st.serialize_field("dims", &self.dim())?;
        st.serialize_field("structure", self.alg.structure())?;
        match &self.data {
            ElementData::Diagonal(v) => {
                st.serialize_field("real", v)?;
                st.serialize_field("imag", &Vec::<f64>::new())?;
            }
            ElementData::Dense(m) => {
                let re: Vec<f64> = m.iter().map(|c| c.re).collect();
                let im: Vec<f64> = m.iter().map(|c| c.im).collect();
                // column-major flattening (nalgebra iteration order)
                st.serialize_field("real", &re)?;
                st.serialize_field("imag", &im)?;
            }
        }
        st.end()
    }
}

/// An orthogonal projection: Hermitian idempotent within max-entry 1e-10.
#[derive(Clone, Debug, Serialize)]
pub struct Projection(Element);

impl Projection {
    pub fn try_new(el: Element) -> Result<Self> {
        let sq = el.mul_commuting(&el)?;
        let defect = sq.sub(&el)?.max_entry_norm();
        if defect > 1e-10 {
            return Err(Error::Structure(format!(
                "not idempotent: defect {defect:.3e}"
            )));
        }
        Ok(Projection(el))
    }

    /// Indicator projection in a commutative algebra.
    pub fn from_indicator(alg: Arc<TracialAlgebra>, keep: &[bool]) -> Result<Self> {
        let vals = keep.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Ok(Projection(Element::diagonal(alg, vals)?))
    }

    pub fn identity(alg: Arc<TracialAlgebra>) -> Self {
        Projection(Element::one(alg))
    }

    pub fn zero(alg: Arc<TracialAlgebra>) -> Self {
        Projection(Element::zero(alg))
    }

    pub fn element(&self) -> &Element {
        &self.0
    }

    pub fn into_element(self) -> Element {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn complement(&self) -> Projection {
        let one = Element::one(self.0.alg.clone());
        Projection(one.sub(&self.0).expect("same algebra"))
    }

    /// Largest projection below both. Commutative case: pointwise min.
    /// Matrix case: range intersection, read off the eigenvalue-1
    /// eigenspace of `p q p` with cutoff 1e-10.
    pub fn meet(&self, other: &Projection) -> Result<Projection> {
        self.0.same_algebra(&other.0)?;
        match (&self.0.data, &other.0.data) {
            (ElementData::Diagonal(a), ElementData::Diagonal(b)) => {
                let vals: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.min(*y)).collect();
                Ok(Projection(Element {
                    alg: self.0.alg.clone(),
                    data: ElementData::Diagonal(vals),
                }))
            }
            _ => {
                let p = self.0.to_dense_matrix();
                let q = other.0.to_dense_matrix();
                let pqp = &p * &q * &p;
                let pqp = (&pqp + pqp.adjoint()).scale(0.5);
                let d = self.0.dim();
                let mut meet = CMatrix::zeros(d, d);
                for (off, sz) in self.0.alg.blocks() {
                    let block = pqp.view((off, off), (sz, sz)).into_owned();
                    let eig = block.symmetric_eigen();
                    for (i, &l) in eig.eigenvalues.iter().enumerate() {
                        // eigenvalue 1 of pqp characterizes range(p) ∩ range(q)
                        if (l - 1.0).abs() <= 1e-10 {
                            let v = eig.eigenvectors.column(i);
                            let outer = &v * v.adjoint();
                            let mut view = meet.view_mut((off, off), (sz, sz));
                            view += outer;
                        }
                    }
                }
                let el = Element {
                    alg: self.0.alg.clone(),
                    data: ElementData::Dense((&meet + meet.adjoint()).scale(0.5)),
                };
                Projection::try_new(el)
            }
        }
    }

    /// `self <= other` as projections.
    pub fn below(&self, other: &Projection) -> Result<bool> {
        psd_leq(&self.0, &other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2() -> Arc<TracialAlgebra> {
        TracialAlgebra::full_matrix(2).unwrap()
    }

    #[test]
    fn trace_examples() {
        let alg = TracialAlgebra::commutative(vec![0.5, 0.5]).unwrap();
        let x = Element::diagonal(alg, vec![3.0, 1.0]).unwrap();
        assert_eq!(x.trace(), 2.0);
        let alg3 = TracialAlgebra::commutative_uniform(3).unwrap();
        let y = Element::diagonal(alg3, vec![3.0, 1.0, 2.0]).unwrap();
        let expect = ((9.0 + 1.0 + 4.0) / 3.0_f64).sqrt();
        assert!((y.lp_norm(2.0).unwrap() - expect).abs() < 1e-12);
        assert!((y.linf_norm() - 3.0).abs() < 1e-15);
        assert!(y.lp_norm(0.5).is_err());
    }

    #[test]
    fn dense_construction_validates() {
        let alg = m2();
        let herm = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(2.0, 0.0),
                Complex::new(0.0, -1.0),
                Complex::new(0.0, 1.0),
                Complex::new(2.0, 0.0),
            ],
        );
        let x = Element::dense(alg.clone(), herm).unwrap();
        assert!((x.trace() - 2.0).abs() < 1e-15);
        let eigs = {
            let mut ls: Vec<f64> = x.eigen_pairs().iter().map(|p| p.1).collect();
            ls.sort_by(f64::total_cmp);
            ls
        };
        assert!((eigs[0] - 1.0).abs() < 1e-12 && (eigs[1] - 3.0).abs() < 1e-12);

        let bad = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(1.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(1.0, 0.0),
            ],
        );
        assert!(Element::dense(alg, bad).is_err());
    }

    #[test]
    fn block_pattern_enforced() {
        let alg = TracialAlgebra::block_diagonal(&[1, 1], None).unwrap();
        let off_block = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(1.0, 0.0),
                Complex::new(0.5, 0.0),
                Complex::new(0.5, 0.0),
                Complex::new(1.0, 0.0),
            ],
        );
        assert!(Element::dense(alg.clone(), off_block).is_err());
        let ok = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(1.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(3.0, 0.0),
            ],
        );
        assert!(Element::dense(alg, ok).is_ok());
    }

    #[test]
    fn block_weights_weight_eigenvalues() {
        // block masses (3/4, 1/4) on sizes (1, 1): tau(diag(1, 2)) = 3/4 + 2/4
        let alg = TracialAlgebra::block_diagonal(&[1, 1], Some(&[0.75, 0.25])).unwrap();
        let x = Element::diagonal(alg, vec![1.0, 2.0]).unwrap();
        assert!((x.trace() - 1.25).abs() < 1e-15);
        assert!((x.lp_norm(1.0).unwrap() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn projection_basics() {
        let alg = TracialAlgebra::commutative_uniform(4).unwrap();
        let p = Projection::from_indicator(alg.clone(), &[true, true, false, false]).unwrap();
        assert_eq!(p.trace(), 0.5);
        assert_eq!(p.complement().trace(), 0.5);
        let q = Projection::from_indicator(alg, &[true, false, true, false]).unwrap();
        let meet = p.meet(&q).unwrap();
        assert_eq!(meet.trace(), 0.25);
        assert!(meet.below(&p).unwrap() && meet.below(&q).unwrap());
    }

    #[test]
    fn dense_meet_matches_span_intersection() {
        let alg = m2();
        // p projects onto e1, q onto (e1+e2)/sqrt2: intersection is {0}
        let p = Projection::try_new(
            Element::dense(
                alg.clone(),
                CMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        Complex::new(1.0, 0.0),
                        Complex::new(0.0, 0.0),
                        Complex::new(0.0, 0.0),
                        Complex::new(0.0, 0.0),
                    ],
                ),
            )
            .unwrap(),
        )
        .unwrap();
        let q = Projection::try_new(
            Element::dense(
                alg.clone(),
                CMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        Complex::new(0.5, 0.0),
                        Complex::new(0.5, 0.0),
                        Complex::new(0.5, 0.0),
                        Complex::new(0.5, 0.0),
                    ],
                ),
            )
            .unwrap(),
        )
        .unwrap();
        assert!(p.meet(&q).unwrap().trace() < 1e-12);
        assert!((p.meet(&p).unwrap().trace() - p.trace()).abs() < 1e-12);
    }

    #[test]
    fn psd_order_examples() {
        let alg = TracialAlgebra::commutative_uniform(2).unwrap();
        let a = Element::diagonal(alg.clone(), vec![1.0, 0.0]).unwrap();
        let b = Element::diagonal(alg.clone(), vec![2.0, 1.0]).unwrap();
        assert!(psd_leq(&a, &b).unwrap());
        assert!(!psd_leq(&b, &a).unwrap());
        assert!(psd_leq(&a, &a).unwrap());
        // x <= ||x||_inf * 1
        let bound = Element::one(alg).scale(b.linf_norm());
        assert!(psd_leq(&b, &bound).unwrap());
    }

    #[test]
    fn mul_commuting_rejects_noncommuting() {
        let alg = m2();
        let x = Element::dense(
            alg.clone(),
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex::new(1.0, 0.0),
                    Complex::new(0.0, 0.0),
                    Complex::new(0.0, 0.0),
                    Complex::new(2.0, 0.0),
                ],
            ),
        )
        .unwrap();
        let y = Element::dense(
            alg,
            CMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex::new(0.0, 0.0),
                    Complex::new(1.0, 0.0),
                    Complex::new(1.0, 0.0),
                    Complex::new(0.0, 0.0),
                ],
            ),
        )
        .unwrap();
        assert!(x.mul_commuting(&y).is_err());
        assert!(x.mul_commuting(&x).is_ok());
    }
}
