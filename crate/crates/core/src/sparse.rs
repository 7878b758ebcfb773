//! Second-quantized term specifications realized as sparse operators over a
//! [`FockBasis`].
//!
//! Matrix elements follow hardcore-boson rules: `a_i^dag a_j` moves a particle
//! from an occupied site `j` to an empty site `i` with amplitude one. Operators
//! on distinct sites commute, so no Jordan-Wigner signs appear.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::lattice::{FockBasis, Mask};
use crate::C64;

/// Hermiticity tolerance applied when an operator is finalized.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed deviation of a state's norm from one.
pub const NORM_TOL: f64 = 1e-10;
/// Imaginary part of an expectation value that is treated as an error.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-8;

const PARALLEL_ROWS: usize = 4096;

/// One second-quantized term. Every hopping variant carries its Hermitian
/// conjugate implicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Term {
    /// `amp a_i^dag a_j + conj(amp) a_j^dag a_i`
    Hop { i: usize, j: usize, amp: C64 },
    /// `w n_i`
    Density { i: usize, w: f64 },
    /// `amp n_k a_i^dag a_j + h.c.` with `k` distinct from `i` and `j`.
    AssistedHop { k: usize, i: usize, j: usize, amp: C64 },
    /// `c` times the identity.
    Const { c: f64 },
}

/// An ordered list of [`Term`]s.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermSpec {
    terms: Vec<Term>,
}

impl TermSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: Term) -> &mut Self {
        self.terms.push(term);
        self
    }

    pub fn hop(&mut self, i: usize, j: usize, amp: C64) -> &mut Self {
        self.push(Term::Hop { i, j, amp })
    }

    pub fn density(&mut self, i: usize, w: f64) -> &mut Self {
        self.push(Term::Density { i, w })
    }

    pub fn assisted_hop(&mut self, k: usize, i: usize, j: usize, amp: C64) -> &mut Self {
        self.push(Term::AssistedHop { k, i, j, amp })
    }

    pub fn constant(&mut self, c: f64) -> &mut Self {
        self.push(Term::Const { c })
    }

    pub fn extend(&mut self, other: &TermSpec) -> &mut Self {
        self.terms.extend_from_slice(&other.terms);
        self
    }

    /// Largest site index referenced, if any.
    pub fn max_site(&self) -> Option<usize> {
        self.terms
            .iter()
            .filter_map(|t| match *t {
                Term::Hop { i, j, .. } => Some(i.max(j)),
                Term::Density { i, .. } => Some(i),
                Term::AssistedHop { k, i, j, .. } => Some(k.max(i).max(j)),
                Term::Const { .. } => None,
            })
            .max()
    }

    fn validate(&self, n_sites: usize) -> Result<()> {
        if let Some(m) = self.max_site() {
            if m >= n_sites {
                return domain(format!("term references site {m} on a {n_sites}-site lattice"));
            }
        }
        for t in &self.terms {
            match *t {
                Term::Hop { i, j, .. } if i == j => {
                    return domain(format!("hop from site {i} to itself; use a density term"))
                }
                Term::AssistedHop { k, i, j, .. } if i == j || k == i || k == j => {
                    return domain(format!(
                        "assisted hop (k={k}, i={i}, j={j}) is not in reduced form"
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Row-compressed complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(dim: usize) -> Self {
        CsrMatrix {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Assemble from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != C64::new(0.0, 0.0) {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            dim,
            row_ptr,
            cols: keep_cols,
            vals: keep_vals,
        }
    }

    fn from_rows(dim: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// `y = A x`
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let row_dot = |r: usize| -> C64 {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            acc
        };
        if self.dim >= PARALLEL_ROWS {
            y.par_iter_mut().enumerate().for_each(|(r, yr)| *yr = row_dot(r));
        } else {
            for (r, yr) in y.iter_mut().enumerate() {
                *yr = row_dot(r);
            }
        }
    }

    pub fn matvec(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.dim);
        self.matvec_into(x.as_slice(), y.as_mut_slice());
        y
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    pub fn adjoint(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                triplets.push((c, r, v.conj()));
            }
        }
        CsrMatrix::from_triplets(self.dim, triplets)
    }

    pub fn scale(&self, s: C64) -> CsrMatrix {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s * other`
    pub fn add_scaled(&self, other: &CsrMatrix, s: C64) -> CsrMatrix {
        assert_eq!(self.dim, other.dim);
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.dim {
            triplets.extend(self.row(r).map(|(c, v)| (r, c, v)));
            triplets.extend(other.row(r).map(|(c, v)| (r, c, s * v)));
        }
        CsrMatrix::from_triplets(self.dim, triplets)
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let rows: Vec<Vec<(usize, C64)>> = (0..n)
            .into_par_iter()
            .map_init(
                || (vec![C64::new(0.0, 0.0); n], vec![false; n]),
                |(acc, used), r| {
                    let mut touched = Vec::new();
                    for (k, a) in self.row(r) {
                        for (c, b) in other.row(k) {
                            if !used[c] {
                                used[c] = true;
                                touched.push(c);
                            }
                            acc[c] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    let mut row = Vec::with_capacity(touched.len());
                    for c in touched {
                        let v = acc[c];
                        acc[c] = C64::new(0.0, 0.0);
                        used[c] = false;
                        if v != C64::new(0.0, 0.0) {
                            row.push((c, v));
                        }
                    }
                    row
                },
            )
            .collect();
        CsrMatrix::from_rows(n, rows)
    }

    /// `max |A_ab - conj(A_ba)|`
    pub fn hermitian_deviation(&self) -> f64 {
        let diff = self.add_scaled(&self.adjoint(), C64::new(-1.0, 0.0));
        diff.max_abs()
    }

    /// `max |A_ab + conj(A_ba)|`
    pub fn anti_hermitian_deviation(&self) -> f64 {
        let sum = self.add_scaled(&self.adjoint(), C64::new(1.0, 0.0));
        sum.max_abs()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `(A + A^dag) / 2`
    pub fn hermitian_part(&self) -> CsrMatrix {
        self.add_scaled(&self.adjoint(), C64::new(1.0, 0.0))
            .scale(C64::new(0.5, 0.0))
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }
}

/// A general (not necessarily Hermitian) sparse operator over a basis, e.g. a
/// commutator.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    basis: Arc<FockBasis>,
    mat: CsrMatrix,
}

impl SparseOperator {
    pub fn new(basis: Arc<FockBasis>, mat: CsrMatrix) -> Self {
        assert_eq!(basis.dim(), mat.dim());
        SparseOperator { basis, mat }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.mat
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.mat.to_dense()
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &SparseOperator) -> Result<SparseOperator> {
        same_basis(&self.basis, &other.basis)?;
        let ab = self.mat.matmul(&other.mat);
        let ba = other.mat.matmul(&self.mat);
        Ok(SparseOperator::new(
            self.basis.clone(),
            ab.add_scaled(&ba, C64::new(-1.0, 0.0)),
        ))
    }

    pub fn add_scaled(&self, other: &SparseOperator, s: C64) -> Result<SparseOperator> {
        same_basis(&self.basis, &other.basis)?;
        Ok(SparseOperator::new(
            self.basis.clone(),
            self.mat.add_scaled(&other.mat, s),
        ))
    }

    pub fn scale(&self, s: C64) -> SparseOperator {
        SparseOperator::new(self.basis.clone(), self.mat.scale(s))
    }

    /// Symmetrize into a [`SparseHermitian`], failing when the operator is
    /// further than `tol` from Hermitian.
    pub fn into_hermitian(self, tol: f64) -> Result<SparseHermitian> {
        let dev = self.mat.hermitian_deviation();
        if dev > tol {
            return Err(Error::Numerical(format!(
                "operator deviates from Hermitian by {dev:e} (tolerance {tol:e})"
            )));
        }
        Ok(SparseHermitian {
            basis: self.basis,
            mat: self.mat.hermitian_part(),
        })
    }
}

/// Sparse Hermitian operator over a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct SparseHermitian {
    basis: Arc<FockBasis>,
    mat: CsrMatrix,
}

impl SparseHermitian {
    /// Wrap a matrix after checking Hermiticity to [`HERMITIAN_TOL`].
    pub fn from_csr(basis: Arc<FockBasis>, mat: CsrMatrix) -> Result<Self> {
        if basis.dim() != mat.dim() {
            return Err(Error::BasisMismatch(format!(
                "matrix dimension {} vs basis dimension {}",
                mat.dim(),
                basis.dim()
            )));
        }
        let dev = mat.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::Numerical(format!(
                "realized operator is not Hermitian (deviation {dev:e})"
            )));
        }
        Ok(SparseHermitian { basis, mat })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.mat.to_dense()
    }

    pub fn as_operator(&self) -> SparseOperator {
        SparseOperator::new(self.basis.clone(), self.mat.clone())
    }

    pub fn matvec(&self, x: &DVector<C64>) -> DVector<C64> {
        self.mat.matvec(x)
    }

    /// Diagonal entries, useful for operators known to be diagonal.
    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|k| self.mat.get(k, k)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim()).all(|r| self.mat.row(r).all(|(c, _)| c == r))
    }
}

/// Normalized complex amplitudes over a basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amps: DVector<C64>,
}

impl StateVector {
    /// Wrap amplitudes whose norm is within [`NORM_TOL`] of one.
    pub fn new(basis: Arc<FockBasis>, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "{} amplitudes for a basis of dimension {}",
                amps.len(),
                basis.dim()
            )));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Numerical(format!("state norm {norm} is not 1")));
        }
        Ok(StateVector { basis, amps })
    }

    /// Normalize `amps` and wrap them.
    pub fn normalized(basis: Arc<FockBasis>, amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numerical(format!("cannot normalize vector of norm {norm}")));
        }
        StateVector::new(basis, amps.unscale(norm))
    }

    /// The product state `|mask>`.
    pub fn from_bitmask(basis: Arc<FockBasis>, mask: Mask) -> Result<Self> {
        let k = basis.index_of(mask).ok_or_else(|| {
            Error::Domain(format!(
                "mask {mask:#b} is not in the {}-particle basis on {}",
                basis.n_particles(),
                basis.geometry()
            ))
        })?;
        let mut amps = DVector::zeros(basis.dim());
        amps[k] = C64::new(1.0, 0.0);
        Ok(StateVector { basis, amps })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        same_basis(&self.basis, &other.basis)?;
        Ok(self.amps.dotc(&other.amps))
    }
}

pub(crate) fn same_basis(a: &FockBasis, b: &FockBasis) -> Result<()> {
    if a != b {
        return Err(Error::BasisMismatch(format!(
            "{} with {} particles vs {} with {} particles",
            a.geometry(),
            a.n_particles(),
            b.geometry(),
            b.n_particles()
        )));
    }
    Ok(())
}

/// Anything Hermitian that can act on a state over a Fock basis.
pub trait HermitianAction: Sync {
    fn basis(&self) -> &Arc<FockBasis>;
    fn act(&self, x: &DVector<C64>) -> DVector<C64>;
}

impl HermitianAction for SparseHermitian {
    fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }
    fn act(&self, x: &DVector<C64>) -> DVector<C64> {
        self.mat.matvec(x)
    }
}

/// Apply `amp a_i^dag a_j` to `state`; `None` when the move is blocked.
fn hop_target(state: Mask, i: usize, j: usize) -> Option<Mask> {
    let (bi, bj) = ((1 as Mask) << i, (1 as Mask) << j);
    if state & bj != 0 && state & bi == 0 {
        Some(state ^ bi ^ bj)
    } else {
        None
    }
}

/// Build the sparse operator for `spec` on `basis`.
pub fn realize(spec: &TermSpec, basis: &Arc<FockBasis>) -> Result<SparseHermitian> {
    spec.validate(basis.n_sites())?;
    let dim = basis.dim();
    let columns: Vec<Vec<(usize, usize, C64)>> = (0..dim)
        .into_par_iter()
        .map(|col| {
            let s = basis.state(col);
            let mut out = Vec::new();
            let mut diag = 0.0;
            let mut push = |target: Mask, amp: C64| {
                let row = basis
                    .index_of(target)
                    .expect("hop preserves particle number");
                out.push((row, col, amp));
            };
            for t in spec.terms() {
                match *t {
                    Term::Hop { i, j, amp } => {
                        if let Some(m) = hop_target(s, i, j) {
                            push(m, amp);
                        }
                        if let Some(m) = hop_target(s, j, i) {
                            push(m, amp.conj());
                        }
                    }
                    Term::Density { i, w } => {
                        if s >> i & 1 == 1 {
                            diag += w;
                        }
                    }
                    Term::AssistedHop { k, i, j, amp } => {
                        if s >> k & 1 == 1 {
                            if let Some(m) = hop_target(s, i, j) {
                                push(m, amp);
                            }
                            if let Some(m) = hop_target(s, j, i) {
                                push(m, amp.conj());
                            }
                        }
                    }
                    Term::Const { c } => diag += c,
                }
            }
            if diag != 0.0 {
                out.push((col, col, C64::new(diag, 0.0)));
            }
            out
        })
        .collect();
    let triplets = columns.into_iter().flatten().collect();
    SparseHermitian::from_csr(basis.clone(), CsrMatrix::from_triplets(dim, triplets))
}

/// `A B - B A`; anti-Hermitian for Hermitian inputs, which is checked.
pub fn commutator(a: &SparseHermitian, b: &SparseHermitian) -> Result<SparseOperator> {
    let c = a.as_operator().commutator(&b.as_operator())?;
    let scale = a.mat.max_abs().max(1.0) * b.mat.max_abs().max(1.0);
    let dev = c.mat.anti_hermitian_deviation();
    if dev > 1e-12 * scale {
        return Err(Error::Numerical(format!(
            "commutator of Hermitian operators is not anti-Hermitian (deviation {dev:e})"
        )));
    }
    Ok(c)
}

/// `<psi|op|psi>`, with the imaginary part checked and discarded.
pub fn expectation<O: HermitianAction + ?Sized>(op: &O, psi: &StateVector) -> Result<f64> {
    same_basis(op.basis(), psi.basis())?;
    let v = psi.amps.dotc(&op.act(&psi.amps));
    if v.im.abs() > EXPECTATION_IMAG_TOL * v.re.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "expectation value has imaginary part {:e}",
            v.im
        )));
    }
    Ok(v.re)
}

/// `op |psi>` together with its Euclidean norm.
pub fn apply<O: HermitianAction + ?Sized>(
    op: &O,
    psi: &StateVector,
) -> Result<(DVector<C64>, f64)> {
    same_basis(op.basis(), psi.basis())?;
    let v = op.act(&psi.amps);
    let n = v.norm();
    Ok((v, n))
}

/// Dense `a_i^dag` / `a_i` matrices between particle-number sectors, composed
/// by matrix multiplication. Independent of [`realize`]; used as a test oracle.
#[doc(hidden)]
pub mod oracle {
    use super::*;

    #[derive(Clone, Copy)]
    enum Op {
        Create(usize),
        Annihilate(usize),
    }

    /// `a_i^dag a_j` projected onto `basis`.
    pub fn hop_matrix(basis: &FockBasis, i: usize, j: usize) -> DMatrix<C64> {
        product(basis, &[Op::Create(i), Op::Annihilate(j)])
    }

    pub fn density_matrix(basis: &FockBasis, i: usize) -> DMatrix<C64> {
        product(basis, &[Op::Create(i), Op::Annihilate(i)])
    }

    /// `n_k a_i^dag a_j`
    pub fn assisted_matrix(basis: &FockBasis, k: usize, i: usize, j: usize) -> DMatrix<C64> {
        product(
            basis,
            &[Op::Create(k), Op::Annihilate(k), Op::Create(i), Op::Annihilate(j)],
        )
    }

    /// Dense rendering of a whole spec, term by term.
    pub fn spec_matrix(spec: &TermSpec, basis: &FockBasis) -> DMatrix<C64> {
        let d = basis.dim();
        let mut m = DMatrix::zeros(d, d);
        for t in spec.terms() {
            match *t {
                Term::Hop { i, j, amp } => {
                    m += hop_matrix(basis, i, j) * amp + hop_matrix(basis, j, i) * amp.conj();
                }
                Term::Density { i, w } => m += density_matrix(basis, i) * C64::new(w, 0.0),
                Term::AssistedHop { k, i, j, amp } => {
                    m += assisted_matrix(basis, k, i, j) * amp
                        + assisted_matrix(basis, k, j, i) * amp.conj();
                }
                Term::Const { c } => m += DMatrix::identity(d, d) * C64::new(c, 0.0),
            }
        }
        m
    }

    fn sector(basis: &FockBasis, n: usize) -> FockBasis {
        FockBasis::new(basis.geometry(), n).expect("sector within lattice")
    }

    /// Rectangular matrix of one ladder operator from sector `from` to the
    /// neighbouring sector `to`.
    fn ladder(from: &FockBasis, to: &FockBasis, op: Op) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(to.dim(), from.dim());
        for (col, &s) in from.states().iter().enumerate() {
            let image = match op {
                Op::Create(i) if s >> i & 1 == 0 => Some(s | 1 << i),
                Op::Annihilate(i) if s >> i & 1 == 1 => Some(s & !(1 << i)),
                _ => None,
            };
            if let Some(t) = image {
                m[(to.index_of(t).unwrap(), col)] = 1.0;
            }
        }
        m
    }

    /// Product `ops[0] * ops[1] * ...` acting on `basis`.
    fn product(basis: &FockBasis, ops: &[Op]) -> DMatrix<C64> {
        let mut n = basis.n_particles();
        let mut current = sector(basis, n);
        let mut acc = DMatrix::<f64>::identity(basis.dim(), basis.dim());
        for &op in ops.iter().rev() {
            let next_n = match op {
                Op::Create(_) => n + 1,
                Op::Annihilate(_) => n.checked_sub(1).expect("annihilating vacuum sector"),
            };
            if next_n > basis.n_sites() {
                return DMatrix::zeros(basis.dim(), basis.dim());
            }
            let next = sector(basis, next_n);
            acc = ladder(&current, &next, op) * acc;
            current = next;
            n = next_n;
        }
        assert_eq!(n, basis.n_particles());
        acc.map(|v| C64::new(v, 0.0))
    }
}
