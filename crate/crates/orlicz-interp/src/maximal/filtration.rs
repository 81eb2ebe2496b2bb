//! Filtrations: ascending chains of trace-preserving conditional
//! expectations on a fixed tracial algebra.
//!
//! Three constructions are provided. The dyadic commutative filtration
//! averages over consecutive atom blocks of length `2^{N-n}`. The matrix
//! block filtration on `M_{2^N}` applies a normalized partial trace on the
//! fine tensor leg, `E_n = (id ⊗ tr) ⊗ 1`. Tensor filtrations pair two of
//! these into a doubly indexed grid `(E_n ⊗ E_m)`.
//!
//! Basis convention for mixed tensors: the commutative factor is laid out
//! as the outer (block) index regardless of argument order, so a
//! matrix-first pair is stored in the swapped basis and level indices are
//! routed accordingly. All traces, norms, and spectral data are invariant
//! under this relabeling.

use crate::sampling;
use crate::specmat::{CMatrix, Element, ElementData, TracialAlgebra};
use crate::{Error, Result};
use nalgebra::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

/// Index of one conditional expectation in a filtration: a single level
/// for chains, a grid pair for tensor products.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Level {
    One(u32),
    Two(u32, u32),
}

#[derive(Clone, Debug)]
enum Kind {
    DyadicCommutative { n: u32 },
    MatrixBlock { n: u32 },
    /// commutative (2^n1 atoms) x commutative (2^n2 atoms), outer-major
    TensorCc { n1: u32, n2: u32 },
    /// M_{2^n1} x M_{2^n2}, Kronecker order
    TensorMm { n1: u32, n2: u32 },
    /// physical layout: commutative (2^n1 atoms) outer, M_{2^n2} inner;
    /// `swapped` records that the caller's factor order was matrix-first
    TensorCm { n1: u32, n2: u32, swapped: bool },
}

#[derive(Clone, Debug)]
pub struct Filtration {
    alg: Arc<TracialAlgebra>,
    kind: Kind,
}

pub const MAX_COMMUTATIVE_DEPTH: u32 = 24;
pub const MAX_MATRIX_DEPTH: u32 = 6;
const MAX_TENSOR_COMMUTATIVE_DIM: usize = 1 << 24;
const MAX_TENSOR_MATRIX_DIM: usize = 1 << 12;

/// Block-constant means: replaces each consecutive run of `block` entries
/// by its average.
fn block_mean_1d(v: &[f64], block: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    for chunk in v.chunks_exact(block) {
        let m = chunk.iter().sum::<f64>() / block as f64;
        out.extend(std::iter::repeat(m).take(block));
    }
    out
}

/// Separable block means on a row-major `rows x cols` grid: inner blocks
/// of `g_inner` along each row, then outer blocks of `g_outer` rows.
fn grid_block_mean(v: &[f64], rows: usize, cols: usize, g_outer: usize, g_inner: usize) -> Vec<f64> {
    debug_assert_eq!(v.len(), rows * cols);
    let mut tmp = Vec::with_capacity(v.len());
    for r in 0..rows {
        let row = &v[r * cols..(r + 1) * cols];
        tmp.extend(block_mean_1d(row, g_inner));
    }
    if g_outer == 1 {
        return tmp;
    }
    let mut out = vec![0.0; v.len()];
    for rb in 0..rows / g_outer {
        for c in 0..cols {
            let mut acc = 0.0;
            for r in rb * g_outer..(rb + 1) * g_outer {
                acc += tmp[r * cols + c];
            }
            acc /= g_outer as f64;
            for r in rb * g_outer..(rb + 1) * g_outer {
                out[r * cols + c] = acc;
            }
        }
    }
    out
}

/// Partial-trace expectation on one dense block: `E(B)` has constant
/// diagonal sub-blocks `(tr sub / g) * I_g` over a `nb x nb` grid.
fn matrix_partial_expectation(b: &CMatrix, g: usize) -> CMatrix {
    let d = b.nrows();
    let nb = d / g;
    let mut out = CMatrix::zeros(d, d);
    for a in 0..nb {
        for bb in 0..nb {
            let mut s = Complex::new(0.0, 0.0);
            for w in 0..g {
                s += b[(a * g + w, bb * g + w)];
            }
            s /= g as f64;
            for u in 0..g {
                out[(a * g + u, bb * g + u)] = s;
            }
        }
    }
    out
}

impl Filtration {
    /// Commutative dyadic filtration on `2^N` uniform atoms, levels
    /// `0..=N`; `E_n` averages consecutive blocks of `2^{N-n}` atoms.
    pub fn dyadic_commutative(n: u32) -> Result<Filtration> {
        if n == 0 || n > MAX_COMMUTATIVE_DEPTH {
            return Err(Error::InvalidArgument(format!(
                "depth must lie in [1, {MAX_COMMUTATIVE_DEPTH}], got {n}"
            )));
        }
        Ok(Filtration {
            alg: TracialAlgebra::commutative_uniform(1 << n)?,
            kind: Kind::DyadicCommutative { n },
        })
    }

    /// Block filtration on `M_{2^N}` with the normalized trace, levels
    /// `0..=N`; `E_n = (id_{2^n} ⊗ tr) ⊗ 1_{2^{N-n}}`. Expectation
    /// invariants are spot-checked at construction.
    pub fn matrix_block(n: u32) -> Result<Filtration> {
        if n == 0 || n > MAX_MATRIX_DEPTH {
            return Err(Error::InvalidArgument(format!(
                "depth must lie in [1, {MAX_MATRIX_DEPTH}], got {n}"
            )));
        }
        let f = Filtration {
            alg: TracialAlgebra::full_matrix(1 << n)?,
            kind: Kind::MatrixBlock { n },
        };
        let mut r = sampling::rng(0x10_2000 + n as u64);
        f.self_check(4, &mut r)?;
        Ok(f)
    }

    /// Doubly indexed tensor filtration `(E_n ⊗ E_m)`. Factors must be
    /// simple chains (no nesting). Dimension caps: `2^24` when both factors
    /// are commutative, `2^12` otherwise.
    pub fn tensor(left: &Filtration, right: &Filtration) -> Result<Filtration> {
        let depth = |f: &Filtration| -> Result<(u32, bool)> {
            match f.kind {
                Kind::DyadicCommutative { n } => Ok((n, true)),
                Kind::MatrixBlock { n } => Ok((n, false)),
                _ => Err(Error::Unsupported(
                    "tensor factors must be simple (non-tensor) filtrations".into(),
                )),
            }
        };
        let (n1, c1) = depth(left)?;
        let (n2, c2) = depth(right)?;
        let dim = 1usize << (n1 + n2);
        let cap = if c1 && c2 {
            MAX_TENSOR_COMMUTATIVE_DIM
        } else {
            MAX_TENSOR_MATRIX_DIM
        };
        if dim > cap {
            return Err(Error::InvalidArgument(format!(
                "tensor dimension 2^{} exceeds the cap {cap}",
                n1 + n2
            )));
        }
        let (alg, kind) = match (c1, c2) {
            (true, true) => (
                TracialAlgebra::commutative_uniform(dim)?,
                Kind::TensorCc { n1, n2 },
            ),
            (false, false) => (
                TracialAlgebra::full_matrix(dim)?,
                Kind::TensorMm { n1, n2 },
            ),
            (true, false) => (
                TracialAlgebra::block_diagonal(&vec![1usize << n2; 1usize << n1], None)?,
                Kind::TensorCm {
                    n1,
                    n2,
                    swapped: false,
                },
            ),
            (false, true) => (
                TracialAlgebra::block_diagonal(&vec![1usize << n1; 1usize << n2], None)?,
                Kind::TensorCm {
                    n1: n2,
                    n2: n1,
                    swapped: true,
                },
            ),
        };
        Ok(Filtration { alg, kind })
    }

    pub fn algebra(&self) -> &Arc<TracialAlgebra> {
        &self.alg
    }

    pub fn is_commutative(&self) -> bool {
        self.alg.is_commutative()
    }

    pub fn is_tensor(&self) -> bool {
        matches!(
            self.kind,
            Kind::TensorCc { .. } | Kind::TensorMm { .. } | Kind::TensorCm { .. }
        )
    }

    /// All levels, in enumeration order: `0..=N` for chains, the row-major
    /// `(n, m)` grid for tensor products (logical factor order).
    pub fn levels(&self) -> Vec<Level> {
        match &self.kind {
            Kind::DyadicCommutative { n } | Kind::MatrixBlock { n } => {
                (0..=*n).map(Level::One).collect()
            }
            Kind::TensorCc { n1, n2 } | Kind::TensorMm { n1, n2 } => {
                let mut out = Vec::new();
                for a in 0..=*n1 {
                    for b in 0..=*n2 {
                        out.push(Level::Two(a, b));
                    }
                }
                out
            }
            Kind::TensorCm { n1, n2, swapped } => {
                // logical order: left factor first
                let (ln, lm) = if *swapped { (*n2, *n1) } else { (*n1, *n2) };
                let mut out = Vec::new();
                for a in 0..=ln {
                    for b in 0..=lm {
                        out.push(Level::Two(a, b));
                    }
                }
                out
            }
        }
    }

    /// Depth pair: `(N, None)` for chains, `(N1, Some(N2))` logical for
    /// tensors.
    pub fn depths(&self) -> (u32, Option<u32>) {
        match &self.kind {
            Kind::DyadicCommutative { n } | Kind::MatrixBlock { n } => (*n, None),
            Kind::TensorCc { n1, n2 } | Kind::TensorMm { n1, n2 } => (*n1, Some(*n2)),
            Kind::TensorCm { n1, n2, swapped } => {
                if *swapped {
                    (*n2, Some(*n1))
                } else {
                    (*n1, Some(*n2))
                }
            }
        }
    }

    fn check_member(&self, x: &Element) -> Result<()> {
        if *x.algebra() == self.alg {
            Ok(())
        } else {
            Err(Error::Structure(
                "element does not live in the filtration's algebra".into(),
            ))
        }
    }

    /// Applies the conditional expectation at `level` to `x`.
    pub fn expect(&self, level: Level, x: &Element) -> Result<Element> {
        self.check_member(x)?;
        match (&self.kind, level) {
            (Kind::DyadicCommutative { n }, Level::One(k)) => {
                if k > *n {
                    return Err(Error::InvalidArgument(format!("level {k} exceeds depth {n}")));
                }
                let v = x.as_diagonal().expect("commutative algebra holds diagonals");
                Element::diagonal(self.alg.clone(), block_mean_1d(v, 1 << (n - k)))
            }
            (Kind::MatrixBlock { n }, Level::One(k)) => {
                if k > *n {
                    return Err(Error::InvalidArgument(format!("level {k} exceeds depth {n}")));
                }
                let g = 1usize << (n - k);
                match x.data() {
                    ElementData::Diagonal(v) => {
                        Element::diagonal(self.alg.clone(), block_mean_1d(v, g))
                    }
                    ElementData::Dense(m) => {
                        Element::dense(self.alg.clone(), matrix_partial_expectation(m, g))
                    }
                }
            }
            (Kind::TensorCc { n1, n2 }, Level::Two(a, b)) => {
                if a > *n1 || b > *n2 {
                    return Err(Error::InvalidArgument(format!(
                        "grid level ({a},{b}) exceeds depths ({n1},{n2})"
                    )));
                }
                let v = x.as_diagonal().expect("commutative algebra holds diagonals");
                let out = grid_block_mean(
                    v,
                    1 << n1,
                    1 << n2,
                    1 << (n1 - a),
                    1 << (n2 - b),
                );
                Element::diagonal(self.alg.clone(), out)
            }
            (Kind::TensorMm { n1, n2 }, Level::Two(a, b)) => {
                if a > *n1 || b > *n2 {
                    return Err(Error::InvalidArgument(format!(
                        "grid level ({a},{b}) exceeds depths ({n1},{n2})"
                    )));
                }
                match x.data() {
                    ElementData::Diagonal(v) => {
                        let out = grid_block_mean(
                            v,
                            1 << n1,
                            1 << n2,
                            1 << (n1 - a),
                            1 << (n2 - b),
                        );
                        Element::diagonal(self.alg.clone(), out)
                    }
                    ElementData::Dense(m) => {
                        let out = self.tensor_mm_dense(m, *n1, *n2, a, b);
                        Element::dense(self.alg.clone(), out)
                    }
                }
            }
            (
                Kind::TensorCm {
                    n1,
                    n2,
                    swapped,
                },
                Level::Two(a, b),
            ) => {
                // route logical levels to physical (commutative, matrix)
                let (lc, lm) = if *swapped { (b, a) } else { (a, b) };
                if lc > *n1 || lm > *n2 {
                    return Err(Error::InvalidArgument(format!(
                        "grid level ({a},{b}) outside the filtration's depths"
                    )));
                }
                let atoms = 1usize << n1;
                let s2 = 1usize << n2;
                let group = 1usize << (n1 - lc);
                let g2 = 1usize << (n2 - lm);
                match x.data() {
                    ElementData::Diagonal(v) => {
                        // diagonal case is separable over the (atom, inner) grid
                        let out = grid_block_mean(v, atoms, s2, group, g2);
                        Element::diagonal(self.alg.clone(), out)
                    }
                    ElementData::Dense(m) => {
                        let d = atoms * s2;
                        let mut out = CMatrix::zeros(d, d);
                        for gi in 0..atoms / group {
                            let mut acc = CMatrix::zeros(s2, s2);
                            for a_idx in gi * group..(gi + 1) * group {
                                let off = a_idx * s2;
                                let blk = m.view((off, off), (s2, s2)).into_owned();
                                acc += matrix_partial_expectation(&blk, g2);
                            }
                            acc /= Complex::new(group as f64, 0.0);
                            for a_idx in gi * group..(gi + 1) * group {
                                let off = a_idx * s2;
                                out.view_mut((off, off), (s2, s2)).copy_from(&acc);
                            }
                        }
                        Element::dense(self.alg.clone(), out)
                    }
                }
            }
            _ => Err(Error::InvalidArgument(
                "level shape does not match the filtration (chain vs grid)".into(),
            )),
        }
    }

    fn tensor_mm_dense(&self, m: &CMatrix, n1: u32, n2: u32, a: u32, b: u32) -> CMatrix {
        let d2 = 1usize << n2;
        let g1 = 1usize << (n1 - a);
        let nb1 = 1usize << a;
        let g2 = 1usize << (n2 - b);
        let nb2 = 1usize << b;
        let idx = |blk1: usize, w1: usize, blk2: usize, w2: usize| -> usize {
            (blk1 * g1 + w1) * d2 + blk2 * g2 + w2
        };
        let d = m.nrows();
        let mut out = CMatrix::zeros(d, d);
        for a1 in 0..nb1 {
            for b1 in 0..nb1 {
                for a2 in 0..nb2 {
                    for b2 in 0..nb2 {
                        let mut s = Complex::new(0.0, 0.0);
                        for w1 in 0..g1 {
                            for w2 in 0..g2 {
                                s += m[(idx(a1, w1, a2, w2), idx(b1, w1, b2, w2))];
                            }
                        }
                        s /= (g1 * g2) as f64;
                        for u1 in 0..g1 {
                            for u2 in 0..g2 {
                                out[(idx(a1, u1, a2, u2), idx(b1, u1, b2, u2))] = s;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Builds the elementary tensor `u ⊗ v` of factor elements in this
    /// filtration's (possibly swapped) physical basis.
    pub fn tensor_element(&self, u: &Element, v: &Element) -> Result<Element> {
        let (phys_outer, phys_inner) = match &self.kind {
            Kind::TensorCc { .. } | Kind::TensorMm { .. } => (u, v),
            Kind::TensorCm { swapped, .. } => {
                if *swapped {
                    (v, u)
                } else {
                    (u, v)
                }
            }
            _ => {
                return Err(Error::Unsupported(
                    "tensor elements require a tensor filtration".into(),
                ))
            }
        };
        match &self.kind {
            Kind::TensorCc { n1, n2 } => {
                let a = phys_outer.as_diagonal().ok_or_else(|| {
                    Error::Structure("first tensor factor must be diagonal".into())
                })?;
                let b = phys_inner.as_diagonal().ok_or_else(|| {
                    Error::Structure("second tensor factor must be diagonal".into())
                })?;
                if a.len() != 1usize << n1 || b.len() != 1usize << n2 {
                    return Err(Error::Structure("tensor factor dimensions mismatch".into()));
                }
                let mut out = Vec::with_capacity(a.len() * b.len());
                for &x in a {
                    for &y in b {
                        out.push(x * y);
                    }
                }
                Element::diagonal(self.alg.clone(), out)
            }
            Kind::TensorMm { n1, n2 } => {
                let d1 = 1usize << n1;
                let d2 = 1usize << n2;
                if phys_outer.dim() != d1 || phys_inner.dim() != d2 {
                    return Err(Error::Structure("tensor factor dimensions mismatch".into()));
                }
                let m1 = phys_outer.to_dense_matrix();
                let m2 = phys_inner.to_dense_matrix();
                let out = m1.kronecker(&m2);
                Element::dense(self.alg.clone(), out)
            }
            Kind::TensorCm { n1, n2, .. } => {
                let atoms = 1usize << n1;
                let s2 = 1usize << n2;
                let a = phys_outer.as_diagonal().ok_or_else(|| {
                    Error::Structure("commutative tensor factor must be diagonal".into())
                })?;
                if a.len() != atoms || phys_inner.dim() != s2 {
                    return Err(Error::Structure("tensor factor dimensions mismatch".into()));
                }
                let inner = phys_inner.to_dense_matrix();
                let d = atoms * s2;
                let mut out = CMatrix::zeros(d, d);
                for (ai, &w) in a.iter().enumerate() {
                    let scaled = inner.scale(w);
                    out.view_mut((ai * s2, ai * s2), (s2, s2)).copy_from(&scaled);
                }
                Element::dense(self.alg.clone(), out)
            }
            _ => unreachable!(),
        }
    }

    /// Verifies unitality, trace preservation, positivity, and the tower
    /// identity `E_a E_b = E_min(a,b)` on random inputs.
    pub fn self_check(&self, trials: usize, r: &mut ChaCha8Rng) -> Result<()> {
        let levels = self.levels();
        let one = Element::one(self.alg.clone());
        for &l in &levels {
            let e1 = self.expect(l, &one)?;
            let defect = e1.sub(&one)?.max_entry_norm();
            if defect > 1e-10 {
                return Err(Error::Structure(format!(
                    "expectation at {l:?} is not unital: defect {defect:.3e}"
                )));
            }
        }
        let min_level = |a: Level, b: Level| -> Level {
            match (a, b) {
                (Level::One(x), Level::One(y)) => Level::One(x.min(y)),
                (Level::Two(x1, x2), Level::Two(y1, y2)) => Level::Two(x1.min(y1), x2.min(y2)),
                _ => unreachable!(),
            }
        };
        for _ in 0..trials {
            let x = sampling::random_hermitian(&self.alg, r)?;
            let scale = x.linf_norm().max(1.0);
            let pick = levels[r.gen_range(0..levels.len())];
            let ex = self.expect(pick, &x)?;
            if (ex.trace() - x.trace()).abs() > 1e-10 * scale {
                return Err(Error::Structure(format!(
                    "expectation at {pick:?} does not preserve the trace"
                )));
            }
            let psd = sampling::random_psd_with_spectrum(&self.alg, 0.0, 1.0, r)?;
            let ep = self.expect(pick, &psd)?;
            if ep.min_eigenvalue() < -1e-10 {
                return Err(Error::Structure(format!(
                    "expectation at {pick:?} is not positive: {:.3e}",
                    ep.min_eigenvalue()
                )));
            }
            let la = levels[r.gen_range(0..levels.len())];
            let lb = levels[r.gen_range(0..levels.len())];
            let tower = self.expect(la, &self.expect(lb, &x)?)?;
            let direct = self.expect(min_level(la, lb), &x)?;
            let defect = tower.sub(&direct)?.max_entry_norm();
            if defect > 1e-10 * scale {
                return Err(Error::Structure(format!(
                    "tower identity fails for {la:?}, {lb:?}: defect {defect:.3e}"
                )));
            }
        }
        Ok(())
    }
}
