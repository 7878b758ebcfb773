//! Constructions of the emergent Hamiltonian
//! `M(t) = exp(-i H_f t) H_0 exp(i H_f t)`.
//!
//! Three routes are provided and cross-checked in the tests:
//!
//! * closed forms (`exact_1d`, `exact_2d_nn`, `exact_2d_twospin_nnn`, and the
//!   short-time truncations `trunc_appendix_*`), written as term specs or
//!   dense spin expressions;
//! * dense unitary conjugation ([`unitary_exact`]);
//! * the nested-commutator series `H_0 - i t H_1 - t^2/2 H_2` evaluated
//!   numerically with sparse products ([`trunc_numeric`]).

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lattice::{FockBasis, LatticeGeometry};
use crate::linalg::{DenseHermitian, HermitianEigen, DEFAULT_DENSE_CAP};
use crate::models::{
    build_h0_chain, build_h0_rect, build_hf_chain, build_hf_rect_nnn,
    build_two_spin_h0, build_two_spin_hf, pst_amplitude, SpinOps, TwoSpinOps,
};
use crate::sparse::{realize, HermitianAction, SparseHermitian, SparseOperator, TermSpec};
use crate::C64;

/// Allowed anti-Hermitian residue before numeric assemblies are symmetrized.
pub const SYMMETRIZE_TOL: f64 = 1e-11;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn im(x: f64) -> C64 {
    C64::new(0.0, x)
}

/// Which emergent-Hamiltonian construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmergentVariant {
    Exact1d,
    Exact2dNn,
    Exact2dTwoSpinNnn,
    UnitaryExact,
    Trunc1,
    Trunc2,
    Trunc1Appendix,
    Trunc2Appendix,
    Trunc1NnnAppendix,
    SpinPromoted,
    Oat,
}

impl EmergentVariant {
    pub const ALL: [EmergentVariant; 11] = [
        EmergentVariant::Exact1d,
        EmergentVariant::Exact2dNn,
        EmergentVariant::Exact2dTwoSpinNnn,
        EmergentVariant::UnitaryExact,
        EmergentVariant::Trunc1,
        EmergentVariant::Trunc2,
        EmergentVariant::Trunc1Appendix,
        EmergentVariant::Trunc2Appendix,
        EmergentVariant::Trunc1NnnAppendix,
        EmergentVariant::SpinPromoted,
        EmergentVariant::Oat,
    ];

    /// Whether the variant reproduces `M(t)` exactly for its model.
    pub fn is_exact(self) -> bool {
        matches!(
            self,
            EmergentVariant::Exact1d
                | EmergentVariant::Exact2dNn
                | EmergentVariant::Exact2dTwoSpinNnn
                | EmergentVariant::UnitaryExact
                | EmergentVariant::Oat
        )
    }
}

/// The entangling model an emergent Hamiltonian is built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Engineered chain, any particle number.
    Chain { len: usize },
    /// Rectangle with engineered nearest-neighbour hopping plus optional
    /// homogeneous diagonal hopping.
    Rect { lx: usize, ly: usize, j_cross: f64 },
    /// Interacting two-spin model, single excitation only.
    TwoSpin { lx: usize, ly: usize },
    /// One-axis twisting of `qubits` spins-1/2 in the symmetric sector.
    Oat { qubits: usize, lambda: f64 },
}

impl Model {
    pub fn geometry(&self) -> Result<LatticeGeometry> {
        match *self {
            Model::Chain { len } => LatticeGeometry::chain(len),
            Model::Rect { lx, ly, .. } | Model::TwoSpin { lx, ly } => {
                LatticeGeometry::rectangle(lx, ly)
            }
            Model::Oat { .. } => domain("one-axis twisting has no lattice"),
        }
    }

    /// `H_f` realized on `basis`.
    pub fn hf(&self, basis: &Arc<FockBasis>) -> Result<SparseHermitian> {
        match *self {
            Model::Chain { len } => realize(&build_hf_chain(len)?, basis),
            Model::Rect { lx, ly, j_cross } => realize(&build_hf_rect_nnn(lx, ly, j_cross)?, basis),
            Model::TwoSpin { lx, ly } => {
                single_excitation(basis)?;
                let m = build_two_spin_hf(lx, ly, true)?;
                let spec = one_body_spec(&m);
                realize(&spec, basis)
            }
            Model::Oat { .. } => domain("one-axis twisting has no lattice Hamiltonian"),
        }
    }

    /// `H_0` realized on `basis`.
    pub fn h0(&self, basis: &Arc<FockBasis>) -> Result<SparseHermitian> {
        match *self {
            Model::Chain { len } => realize(&build_h0_chain(len)?, basis),
            Model::Rect { lx, ly, .. } | Model::TwoSpin { lx, ly } => {
                realize(&build_h0_rect(lx, ly)?, basis)
            }
            Model::Oat { .. } => domain("one-axis twisting has no lattice Hamiltonian"),
        }
    }
}

fn single_excitation(basis: &FockBasis) -> Result<()> {
    if basis.n_particles() != 1 {
        return domain(format!(
            "closed form is valid for a single excitation, basis has {}",
            basis.n_particles()
        ));
    }
    Ok(())
}

/// A built emergent Hamiltonian.
#[derive(Debug, Clone)]
pub enum Emergent {
    Sparse(SparseHermitian),
    Dense(DenseHermitian),
    /// Dicke-basis matrix of the one-axis-twisting emergent Hamiltonian.
    Dicke(DMatrix<C64>),
}

impl Emergent {
    pub fn to_dense(&self) -> DMatrix<C64> {
        match self {
            Emergent::Sparse(s) => s.to_dense(),
            Emergent::Dense(d) => d.matrix().clone(),
            Emergent::Dicke(m) => m.clone(),
        }
    }

    /// Borrow as a lattice operator; `None` for the Dicke variant.
    pub fn as_action(&self) -> Option<&dyn HermitianAction> {
        match self {
            Emergent::Sparse(s) => Some(s),
            Emergent::Dense(d) => Some(d),
            Emergent::Dicke(_) => None,
        }
    }
}

/// Build `variant` for `model` at time `t`. `basis` is required by every
/// lattice variant and ignored for one-axis twisting.
pub fn build(
    variant: EmergentVariant,
    model: &Model,
    basis: Option<&Arc<FockBasis>>,
    t: f64,
) -> Result<Emergent> {
    use EmergentVariant as V;
    if let (V::Oat, Model::Oat { qubits, lambda }) = (variant, model) {
        return Ok(Emergent::Dicke(crate::oat::oat_emergent(*qubits, *lambda, t)?));
    }
    let basis = basis.ok_or_else(|| Error::Domain(format!("{variant:?} needs a Fock basis")))?;
    let mismatch = || {
        Err(Error::Domain(format!(
            "variant {variant:?} does not apply to model {model:?}"
        )))
    };
    match (variant, *model) {
        (V::Exact1d, Model::Chain { len }) => Ok(Emergent::Sparse(realize(&exact_1d(len, t)?, basis)?)),
        (V::Exact2dNn, Model::Rect { lx, ly, j_cross }) if j_cross == 0.0 => {
            single_excitation(basis)?;
            let m = exact_2d_nn(lx, ly, t)?;
            Ok(Emergent::Dense(DenseHermitian::new(basis.clone(), m.dense, SYMMETRIZE_TOL)?))
        }
        (V::Exact2dTwoSpinNnn, Model::TwoSpin { lx, ly }) => {
            single_excitation(basis)?;
            let m = exact_2d_twospin_nnn(lx, ly, t)?;
            Ok(Emergent::Dense(DenseHermitian::new(basis.clone(), m, SYMMETRIZE_TOL)?))
        }
        (V::UnitaryExact, Model::Oat { .. }) | (V::Oat, _) => mismatch(),
        (V::UnitaryExact, m) => {
            let hf = m.hf(basis)?;
            let h0 = m.h0(basis)?;
            Ok(Emergent::Dense(unitary_exact(&hf, &h0, t, DEFAULT_DENSE_CAP)?))
        }
        (V::Trunc1 | V::Trunc2, Model::Oat { .. }) => mismatch(),
        (V::Trunc1 | V::Trunc2, m) => {
            let order = if variant == V::Trunc1 { 1 } else { 2 };
            Ok(Emergent::Sparse(trunc_numeric(&m.hf(basis)?, &m.h0(basis)?, t, order)?))
        }
        (V::Trunc1Appendix | V::Trunc2Appendix, Model::Rect { lx, ly, j_cross })
            if j_cross == 0.0 =>
        {
            let order = if variant == V::Trunc1Appendix { 1 } else { 2 };
            Ok(Emergent::Sparse(realize(&trunc_appendix_nn(lx, ly, t, order)?, basis)?))
        }
        (V::Trunc1NnnAppendix, Model::Rect { lx, ly, j_cross }) => Ok(Emergent::Sparse(
            realize(&trunc_appendix_nnn(lx, ly, j_cross, t)?, basis)?,
        )),
        (V::SpinPromoted, Model::Rect { lx, ly, j_cross }) if j_cross == 0.0 => {
            Ok(Emergent::Sparse(spin_promoted(lx, ly, t, basis)?))
        }
        _ => mismatch(),
    }
}

/// Closed-form emergent Hamiltonian of the engineered chain, valid in every
/// particle-number sector:
/// `sum_l [(L-1)/2 + cos t (l - (L-1)/2)] n_l
///  + sin t sum_l (i sqrt(l (L-l))/2 a_l^dag a_{l-1} + h.c.)`.
pub fn exact_1d(len: usize, t: f64) -> Result<TermSpec> {
    if len < 2 {
        return domain(format!("need at least 2 sites, got {len}"));
    }
    let half = (len as f64 - 1.0) / 2.0;
    let (s, c) = t.sin_cos();
    let mut spec = TermSpec::new();
    for l in 0..len {
        spec.density(l, half + c * (l as f64 - half));
    }
    for l in 1..len {
        spec.hop(l, l - 1, im(s * pst_amplitude(l, len)));
    }
    Ok(spec)
}

/// Exact single-excitation emergent Hamiltonian of the nearest-neighbour
/// rectangle, as a dense two-spin matrix and as a one-body term spec.
#[derive(Debug, Clone)]
pub struct Exact2dNn {
    pub dense: DMatrix<C64>,
    pub spec: TermSpec,
}

/// `(Lx+Ly)/2 - 1 + sin t (S_1y + S_2y) - cos t (S_1z + S_2z)`.
pub fn exact_2d_nn(lx: usize, ly: usize, t: f64) -> Result<Exact2dNn> {
    let g = LatticeGeometry::rectangle(lx, ly)?;
    let ops = TwoSpinOps::new(lx, ly)?;
    let (s, c) = t.sin_cos();
    let konst = (lx + ly) as f64 / 2.0 - 1.0;
    let dense = ops.identity() * re(konst) + (&ops.s1[1] + &ops.s2[1]) * re(s)
        - (&ops.s1[2] + &ops.s2[2]) * re(c);

    // Same operator written as lattice terms; site l carries m = s - l.
    let (s1, s2) = ((lx as f64 - 1.0) / 2.0, (ly as f64 - 1.0) / 2.0);
    let mut spec = TermSpec::new();
    for y in 0..ly {
        for x in 0..lx {
            let m = (s1 - x as f64) + (s2 - y as f64);
            spec.density(g.site(x, y), konst - c * m);
        }
    }
    for y in 0..ly {
        for x in 1..lx {
            spec.hop(g.site(x, y), g.site(x - 1, y), im(s * pst_amplitude(x, lx)));
        }
    }
    for y in 1..ly {
        for x in 0..lx {
            spec.hop(g.site(x, y), g.site(x, y - 1), im(s * pst_amplitude(y, ly)));
        }
    }
    Ok(Exact2dNn { dense, spec })
}

/// Exact single-excitation emergent Hamiltonian of the interacting two-spin
/// model `H_f = S_1x + S_2x + S_1x S_2x`:
/// `(Lx+Ly)/2 - 1 + sin[(1+S_1x)t] S_2y - cos[(1+S_1x)t] S_2z
///  + S_1y sin[(1+S_2x)t] - S_1z cos[(1+S_2x)t]`.
pub fn exact_2d_twospin_nnn(lx: usize, ly: usize, t: f64) -> Result<DMatrix<C64>> {
    let ops = TwoSpinOps::new(lx, ly)?;
    let konst = (lx + ly) as f64 / 2.0 - 1.0;
    let f1 = HermitianEigen::new(&ops.s1[0]);
    let f2 = HermitianEigen::new(&ops.s2[0]);
    let sin1 = f1.map_real(|e| ((1.0 + e) * t).sin());
    let cos1 = f1.map_real(|e| ((1.0 + e) * t).cos());
    let sin2 = f2.map_real(|e| ((1.0 + e) * t).sin());
    let cos2 = f2.map_real(|e| ((1.0 + e) * t).cos());
    Ok(ops.identity() * re(konst) + sin1 * &ops.s2[1] - cos1 * &ops.s2[2]
        + &ops.s1[1] * sin2
        - &ops.s1[2] * cos2)
}

/// Dense `exp(-i H_f t) H_0 exp(i H_f t)` for matrices small enough to
/// diagonalize; reuses one eigendecomposition of `H_f` across times.
#[derive(Debug, Clone)]
pub struct Conjugator {
    eig: HermitianEigen,
    h0_in_eigenbasis: DMatrix<C64>,
    // set when the eigenvectors are real, so products run on f64 kernels
    real_vectors: Option<DMatrix<f64>>,
}

impl Conjugator {
    pub fn new(hf: &DMatrix<C64>, h0: &DMatrix<C64>) -> Self {
        let eig = HermitianEigen::new(hf);
        let h0_in_eigenbasis = eig.vectors.adjoint() * h0 * &eig.vectors;
        let real_vectors = eig
            .vectors
            .iter()
            .all(|z| z.im == 0.0)
            .then(|| eig.vectors.map(|z| z.re));
        Conjugator {
            eig,
            h0_in_eigenbasis,
            real_vectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    pub fn at(&self, t: f64) -> DMatrix<C64> {
        let e = &self.eig.values;
        let mut inner = self.h0_in_eigenbasis.clone();
        for c in 0..inner.ncols() {
            for r in 0..inner.nrows() {
                inner[(r, c)] *= C64::from_polar(1.0, -(e[r] - e[c]) * t);
            }
        }
        match &self.real_vectors {
            Some(v) => {
                let vt = v.transpose();
                let re = v * inner.map(|z| z.re) * &vt;
                let im = v * inner.map(|z| z.im) * &vt;
                re.zip_map(&im, C64::new)
            }
            None => &self.eig.vectors * inner * self.eig.vectors.adjoint(),
        }
    }
}

/// Numerically exact `M(t)` by dense unitary conjugation.
pub fn unitary_exact(
    hf: &SparseHermitian,
    h0: &SparseHermitian,
    t: f64,
    cap: usize,
) -> Result<DenseHermitian> {
    crate::sparse::same_basis(hf.basis(), h0.basis())?;
    if hf.dim() > cap {
        return Err(Error::Capacity { dim: hf.dim(), cap });
    }
    let m = Conjugator::new(&hf.to_dense(), &h0.to_dense()).at(t);
    DenseHermitian::new(hf.basis().clone(), m, SYMMETRIZE_TOL * h0_scale(h0))
}

fn h0_scale(h0: &SparseHermitian) -> f64 {
    h0.matrix().max_abs().max(1.0)
}

/// `H_0`, `H_1 = [H_f, H_0]` and `H_2 = [H_f, H_1]`, computed once so that
/// truncations at many times are cheap.
#[derive(Debug, Clone)]
pub struct NestedCommutators {
    pub h0: SparseOperator,
    pub h1: SparseOperator,
    pub h2: Option<SparseOperator>,
}

impl NestedCommutators {
    pub fn new(hf: &SparseHermitian, h0: &SparseHermitian, order: usize) -> Result<Self> {
        if !(1..=2).contains(&order) {
            return domain(format!("truncation order must be 1 or 2, got {order}"));
        }
        let hf_op = hf.as_operator();
        let h0_op = h0.as_operator();
        let h1 = hf_op.commutator(&h0_op)?;
        let h2 = if order == 2 {
            Some(hf_op.commutator(&h1)?)
        } else {
            None
        };
        Ok(NestedCommutators { h0: h0_op, h1, h2 })
    }

    /// `H_0 - i t H_1 (- t^2/2 H_2)` as a general sparse operator.
    pub fn series(&self, t: f64, order: usize) -> Result<SparseOperator> {
        let mut m = self.h0.add_scaled(&self.h1, im(-t))?;
        if order >= 2 {
            let h2 = self
                .h2
                .as_ref()
                .ok_or_else(|| Error::Domain("second-order term was not computed".into()))?;
            m = m.add_scaled(h2, re(-t * t / 2.0))?;
        }
        Ok(m)
    }

    pub fn truncated(&self, t: f64, order: usize) -> Result<SparseHermitian> {
        let m = self.series(t, order)?;
        let tol = SYMMETRIZE_TOL * self.h0.matrix().max_abs().max(1.0);
        m.into_hermitian(tol)
    }
}

/// Series truncation `M^(order)(t)` from numeric nested commutators.
pub fn trunc_numeric(
    hf: &SparseHermitian,
    h0: &SparseHermitian,
    t: f64,
    order: usize,
) -> Result<SparseHermitian> {
    NestedCommutators::new(hf, h0, order)?.truncated(t, order)
}

/// Closed-form truncation for the nearest-neighbour rectangle.
///
/// Order one adds current-like terms `-t K (i a_p^dag a_q + h.c.)` on each bond
/// `p -> q = p + x` (or `+ y`) with bond amplitude `K`. Order two adds, with
/// prefactor `-t^2/4`, the on-site renormalization
/// `[l(L-l) - (l+1)(L-l-1)] n_l` per axis and density-assisted hopping
/// `2 sqrt((x+1)(Lx-x-1)) sqrt((y+1)(Ly-y-1)) (n_{l+x+y} - n_l) (a_{l+x}^dag a_{l+y} + h.c.)`
/// on every plaquette with lower-left corner `l = (x, y)`.
pub fn trunc_appendix_nn(lx: usize, ly: usize, t: f64, order: usize) -> Result<TermSpec> {
    if !(1..=2).contains(&order) {
        return domain(format!("truncation order must be 1 or 2, got {order}"));
    }
    let g = LatticeGeometry::rectangle(lx, ly)?;
    let mut spec = build_h0_rect(lx, ly)?;
    for y in 0..ly {
        for x in 1..lx {
            spec.hop(g.site(x - 1, y), g.site(x, y), im(-t * pst_amplitude(x, lx)));
        }
    }
    for y in 1..ly {
        for x in 0..lx {
            spec.hop(g.site(x, y - 1), g.site(x, y), im(-t * pst_amplitude(y, ly)));
        }
    }
    if order == 1 {
        return Ok(spec);
    }

    let pref = -t * t / 4.0;
    // squared bond amplitude times four, zero past the edges
    let bond = |l: usize, len: usize| -> f64 {
        if l == 0 || l >= len {
            0.0
        } else {
            (l * (len - l)) as f64
        }
    };
    for y in 0..ly {
        for x in 0..lx {
            let incoming = bond(x, lx) + bond(y, ly);
            let outgoing = bond(x + 1, lx) + bond(y + 1, ly);
            spec.density(g.site(x, y), pref * (incoming - outgoing));
        }
    }
    for y in 0..ly - 1 {
        for x in 0..lx - 1 {
            let amp = pref * 2.0 * bond(x + 1, lx).sqrt() * bond(y + 1, ly).sqrt();
            let (l, lxp, lyp, lxy) = (
                g.site(x, y),
                g.site(x + 1, y),
                g.site(x, y + 1),
                g.site(x + 1, y + 1),
            );
            spec.assisted_hop(lxy, lxp, lyp, re(amp));
            spec.assisted_hop(l, lxp, lyp, re(-amp));
        }
    }
    Ok(spec)
}

/// First-order closed-form truncation with homogeneous diagonal hopping
/// `j_cross`. Only the `l -> l + x + y` diagonal changes `H_0` (by two units)
/// and so contributes a current; the `l -> l - x + y` diagonal commutes
/// with `H_0`.
pub fn trunc_appendix_nnn(lx: usize, ly: usize, j_cross: f64, t: f64) -> Result<TermSpec> {
    let g = LatticeGeometry::rectangle(lx, ly)?;
    let mut spec = trunc_appendix_nn(lx, ly, t, 1)?;
    if j_cross == 0.0 {
        return Ok(spec);
    }
    for y in 0..ly - 1 {
        for x in 0..lx - 1 {
            spec.hop(g.site(x, y), g.site(x + 1, y + 1), im(-2.0 * t * j_cross));
        }
    }
    Ok(spec)
}

/// Terms `sum_ij h_ij a_i^dag a_j` for a single-particle matrix `h`.
pub fn one_body_spec(h: &DMatrix<C64>) -> TermSpec {
    let mut spec = TermSpec::new();
    for i in 0..h.nrows() {
        if h[(i, i)].re != 0.0 {
            spec.density(i, h[(i, i)].re);
        }
        for j in i + 1..h.ncols() {
            if h[(i, j)].norm() > 1e-15 {
                spec.hop(i, j, h[(i, j)]);
            }
        }
    }
    spec
}

/// The single-particle exact emergent Hamiltonian promoted to a one-body
/// operator in any particle-number sector.
pub fn spin_promoted(lx: usize, ly: usize, t: f64, basis: &Arc<FockBasis>) -> Result<SparseHermitian> {
    let g = LatticeGeometry::rectangle(lx, ly)?;
    if basis.geometry() != g {
        return Err(Error::BasisMismatch(format!(
            "basis lives on {}, model on {g}",
            basis.geometry()
        )));
    }
    realize(&exact_2d_nn(lx, ly, t)?.spec, basis)
}

/// Dense single-excitation `H_f` and `H_0` of the two-spin models, useful for
/// checking closed forms against [`Conjugator`].
pub fn two_spin_pair(lx: usize, ly: usize, interacting: bool) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    Ok((build_two_spin_hf(lx, ly, interacting)?, build_two_spin_h0(lx, ly)?))
}

/// `-S_z` of the chain's spin, in site order; exported for the tests.
#[doc(hidden)]
pub fn chain_minus_sz(len: usize) -> DMatrix<C64> {
    -crate::models::site_ordered(&SpinOps::for_chain(len).sz)
}
