//! Entanglement entropies, Schmidt spectra, fidelities, initial states and
//! the overlap diagnostic for approximate emergent Hamiltonians.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lattice::{low_bits, FockBasis, LatticeGeometry, Mask};
use crate::linalg::HermitianEigen;
use crate::sparse::{apply, same_basis, HermitianAction, StateVector};
use crate::C64;

/// Schmidt coefficients below this are treated as exact zeros.
pub const SCHMIDT_CUTOFF: f64 = 1e-12;

/// A split of the lattice sites into `A` and its complement `B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    n_sites: usize,
    mask_a: Mask,
}

impl Bipartition {
    pub fn new(n_sites: usize, sites_a: &[usize]) -> Result<Self> {
        let mut mask_a: Mask = 0;
        for &s in sites_a {
            if s >= n_sites {
                return domain(format!("site {s} outside a {n_sites}-site lattice"));
            }
            mask_a |= 1 << s;
        }
        let na = mask_a.count_ones() as usize;
        if na == 0 || na == n_sites {
            return domain("subsystem A must be a non-empty proper subset");
        }
        Ok(Bipartition { n_sites, mask_a })
    }

    /// Left half of a chain, sites `0..L/2`.
    pub fn half_chain(len: usize) -> Result<Self> {
        let sites: Vec<usize> = (0..len / 2).collect();
        Bipartition::new(len, &sites)
    }

    /// Bottom `ceil(Ly/2)` rows of a rectangle.
    pub fn bottom_rows(lx: usize, ly: usize) -> Result<Self> {
        let g = LatticeGeometry::rectangle(lx, ly)?;
        let rows = ly.div_ceil(2);
        let sites: Vec<usize> = (0..rows)
            .flat_map(|y| (0..lx).map(move |x| g.site(x, y)))
            .collect();
        Bipartition::new(lx * ly, &sites)
    }

    /// Default half-system cut of a geometry.
    pub fn half(geometry: LatticeGeometry) -> Result<Self> {
        match geometry {
            LatticeGeometry::Chain { len } => Bipartition::half_chain(len),
            LatticeGeometry::Rectangle { lx, ly } => Bipartition::bottom_rows(lx, ly),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn mask_a(&self) -> Mask {
        self.mask_a
    }

    pub fn sites_a(&self) -> Vec<usize> {
        (0..self.n_sites).filter(|&s| self.mask_a >> s & 1 == 1).collect()
    }

    /// The same cut with `A` and `B` exchanged.
    pub fn swapped(&self) -> Self {
        let full = low_bits(self.n_sites);
        Bipartition {
            n_sites: self.n_sites,
            mask_a: full & !self.mask_a,
        }
    }

    fn is_contiguous(&self) -> bool {
        let s = self.sites_a();
        s.windows(2).all(|w| w[1] == w[0] + 1)
    }
}

/// Schmidt coefficients in descending order, zeros below [`SCHMIDT_CUTOFF`]
/// dropped. The amplitude matrix is block diagonal in the particle number of
/// `A` and each block is decomposed separately.
pub fn schmidt_spectrum(psi: &StateVector, part: &Bipartition) -> Result<Vec<f64>> {
    let basis = psi.basis();
    if part.n_sites != basis.n_sites() {
        return domain(format!(
            "bipartition of {} sites applied to a {}-site lattice",
            part.n_sites,
            basis.n_sites()
        ));
    }
    struct Block {
        rows: HashMap<Mask, usize>,
        cols: HashMap<Mask, usize>,
        entries: Vec<(usize, usize, C64)>,
    }
    let mut blocks: HashMap<u32, Block> = HashMap::new();
    for (k, amp) in psi.amplitudes().iter().enumerate() {
        if *amp == C64::new(0.0, 0.0) {
            continue;
        }
        let s = basis.state(k);
        let (a, b) = (s & part.mask_a, s & !part.mask_a);
        let blk = blocks.entry(a.count_ones()).or_insert_with(|| Block {
            rows: HashMap::new(),
            cols: HashMap::new(),
            entries: Vec::new(),
        });
        let nr = blk.rows.len();
        let r = *blk.rows.entry(a).or_insert(nr);
        let nc = blk.cols.len();
        let c = *blk.cols.entry(b).or_insert(nc);
        blk.entries.push((r, c, *amp));
    }
    let mut lambdas = Vec::new();
    for blk in blocks.values() {
        let mut m = DMatrix::<C64>::zeros(blk.rows.len(), blk.cols.len());
        for &(r, c, a) in &blk.entries {
            m[(r, c)] = a;
        }
        let sv = if m.nrows() == 1 || m.ncols() == 1 {
            vec![m.norm()]
        } else {
            m.singular_values().iter().copied().collect()
        };
        lambdas.extend(sv.into_iter().filter(|&x| x > SCHMIDT_CUTOFF));
    }
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok(lambdas)
}

/// `-sum p log2 p` over `p = lambda^2`.
pub fn entropy_from_schmidt(lambdas: &[f64]) -> f64 {
    lambdas
        .iter()
        .map(|l| l * l)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Entanglement entropy of `A` in bits.
pub fn entropy_schmidt(psi: &StateVector, part: &Bipartition) -> Result<f64> {
    Ok(entropy_from_schmidt(&schmidt_spectrum(psi, part)?))
}

/// A Slater determinant on a chain: column `k` is the `k`-th occupied
/// single-particle orbital over the sites.
#[derive(Debug, Clone)]
pub struct SlaterState {
    pub orbitals: DMatrix<C64>,
}

impl SlaterState {
    /// Product state occupying `sites` of an `n_sites` chain.
    pub fn from_sites(n_sites: usize, sites: &[usize]) -> Result<Self> {
        let mut orbitals = DMatrix::zeros(n_sites, sites.len());
        for (k, &s) in sites.iter().enumerate() {
            if s >= n_sites {
                return domain(format!("site {s} outside a {n_sites}-site chain"));
            }
            orbitals[(s, k)] = C64::new(1.0, 0.0);
        }
        Ok(SlaterState { orbitals })
    }

    /// Evolve every orbital under the single-particle Hamiltonian `h`.
    pub fn evolve(&self, h: &HermitianEigen, t: f64) -> SlaterState {
        SlaterState {
            orbitals: h.propagator(t) * &self.orbitals,
        }
    }

    /// Correlation matrix `C_ij = <c_i^dag c_j>`.
    pub fn correlation(&self) -> DMatrix<C64> {
        self.orbitals.conjugate() * self.orbitals.transpose()
    }
}

/// Free-fermion entanglement entropy in bits of a chain Slater determinant
/// for a contiguous subsystem.
pub fn entropy_freefermion_1d(
    state: &SlaterState,
    geometry: LatticeGeometry,
    part: &Bipartition,
) -> Result<f64> {
    if !geometry.is_chain() {
        return domain("free-fermion entropy is only defined for chains");
    }
    if state.orbitals.nrows() != geometry.n_sites() || part.n_sites != geometry.n_sites() {
        return domain("orbitals, geometry and bipartition disagree on the site count");
    }
    if !part.is_contiguous() {
        return domain("free-fermion entropy needs a contiguous subsystem");
    }
    let sites = part.sites_a();
    let c = state.correlation();
    let ca = DMatrix::from_fn(sites.len(), sites.len(), |i, j| c[(sites[i], sites[j])]);
    let nu = crate::linalg::eigenvalues(&ca);
    let h = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    Ok(nu
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0))
        .map(|v| h(v) + h(1.0 - v))
        .sum())
}

/// Single-particle `H_f` of the engineered chain (site-ordered `S_x`).
pub fn chain_single_particle_hf(len: usize) -> DMatrix<C64> {
    crate::models::site_ordered(&crate::models::SpinOps::for_chain(len).sx)
}

/// Tensor product of pairs `(|1>_l |0>_{L-1-l} + i |0>_l |1>_{L-1-l}) / sqrt 2`.
pub fn bell_product_state(len: usize) -> Result<StateVector> {
    if len % 2 != 0 || len < 2 {
        return domain(format!("Bell-product state needs an even chain length, got {len}"));
    }
    let pairs = len / 2;
    if pairs > 26 {
        return domain(format!("{pairs} pairs exceed the supported size"));
    }
    let basis = Arc::new(FockBasis::new(LatticeGeometry::chain(len)?, pairs)?);
    let mut amps = DVector::<C64>::zeros(basis.dim());
    let norm = (0.5f64).powf(pairs as f64 / 2.0);
    for choice in (0 as Mask)..(1 << pairs) {
        let mut mask: Mask = 0;
        let mut phase = C64::new(norm, 0.0);
        for l in 0..pairs {
            if choice >> l & 1 == 0 {
                mask |= 1 << l;
            } else {
                mask |= 1 << (len - 1 - l);
                phase *= C64::new(0.0, 1.0);
            }
        }
        let k = basis.index_of(mask).expect("pair configurations have L/2 particles");
        amps[k] = phase;
    }
    StateVector::new(basis, amps)
}

/// `<psi|M|psi> / ||M psi||`; one exactly when `psi` is an eigenstate of `M`
/// with positive eigenvalue.
pub fn overlap_metric<O: HermitianAction + ?Sized>(m: &O, psi: &StateVector) -> Result<f64> {
    let (mv, norm) = apply(m, psi)?;
    if norm < 1e-14 {
        return Err(Error::DegenerateMetric(norm));
    }
    Ok(psi.amplitudes().dotc(&mv).re / norm)
}

/// `|<phi|psi>|^2`
pub fn fidelity(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    same_basis(psi.basis(), phi.basis())?;
    Ok(psi.inner(phi)?.norm_sqr())
}

/// `<n_l>` for every site.
pub fn site_densities(psi: &StateVector) -> Vec<f64> {
    let b = psi.basis();
    let mut n = vec![0.0; b.n_sites()];
    for (k, a) in psi.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        let mut s = b.state(k);
        while s != 0 {
            let site = s.trailing_zeros() as usize;
            n[site] += p;
            s &= s - 1;
        }
    }
    n
}

/// Named product initial states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedState {
    /// Chain with every even site occupied.
    DensityWave,
    /// Chain with its left half occupied.
    DomainWall,
    /// Site `(0, 0)`.
    SingleCorner,
    /// Sites `(0, 0)` and `(Lx-1, Ly-1)`.
    TwoCorners,
    /// Sites `(0, 0)`, `(1, 0)` and `(0, 1)`.
    ThreeCornerCluster,
}

impl NamedState {
    pub fn mask(self, geometry: LatticeGeometry) -> Result<Mask> {
        let ns = geometry.n_sites();
        match (self, geometry) {
            (NamedState::DensityWave, LatticeGeometry::Chain { len }) => {
                Ok((0..len).step_by(2).map(|l| (1 as Mask) << l).sum())
            }
            (NamedState::DomainWall, LatticeGeometry::Chain { len }) => {
                Ok((0..len / 2).map(|l| (1 as Mask) << l).sum())
            }
            (NamedState::SingleCorner, _) => Ok(1),
            (NamedState::TwoCorners, _) => Ok(1 | (1 as Mask) << (ns - 1)),
            (NamedState::ThreeCornerCluster, LatticeGeometry::Rectangle { .. }) => {
                Ok(1 | (1 as Mask) << geometry.site(1, 0) | (1 as Mask) << geometry.site(0, 1))
            }
            (s, g) => domain(format!("initial state {s:?} is not defined on {g}")),
        }
    }

    /// Product state on `geometry` in the sector of matching particle number.
    pub fn state(self, geometry: LatticeGeometry) -> Result<StateVector> {
        product_state(geometry, self.mask(geometry)?)
    }
}

/// `|mask>` in the basis with `popcount(mask)` particles.
pub fn product_state(geometry: LatticeGeometry, mask: Mask) -> Result<StateVector> {
    if mask & !geometry.full_mask() != 0 {
        return domain(format!("mask {mask:#x} has bits outside {geometry}"));
    }
    let basis = Arc::new(FockBasis::new(geometry, mask.count_ones() as usize)?);
    StateVector::from_bitmask(basis, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Propagator;
    use crate::models::build_hf_chain;
    use crate::sparse::realize;
    use std::f64::consts::PI;

    fn s(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn product_states_have_zero_entropy() {
        let g = LatticeGeometry::chain(4).unwrap();
        let psi = product_state(g, 0b0101).unwrap();
        let cut = Bipartition::half_chain(4).unwrap();
        assert_eq!(schmidt_spectrum(&psi, &cut).unwrap(), vec![1.0]);
        assert_eq!(entropy_schmidt(&psi, &cut).unwrap(), 0.0);
    }

    #[test]
    fn bell_pair() {
        let psi = bell_product_state(2).unwrap();
        let a = psi.amplitudes();
        // basis order: |01> (mask 0b01, site 0 occupied) then mask 0b10
        let r = 0.5f64.sqrt();
        assert!((a[0] - s(r)).norm() < 1e-15);
        assert!((a[1] - C64::new(0.0, r)).norm() < 1e-15);
        let cut = Bipartition::half_chain(2).unwrap();
        let l = schmidt_spectrum(&psi, &cut).unwrap();
        assert!((l[0] - r).abs() < 1e-15 && (l[1] - r).abs() < 1e-15);
        assert!((entropy_schmidt(&psi, &cut).unwrap() - 1.0).abs() < 1e-14);
        assert!(bell_product_state(5).is_err());
    }

    #[test]
    fn bell_product_entropy() {
        for len in [4, 8] {
            let psi = bell_product_state(len).unwrap();
            let e = entropy_schmidt(&psi, &Bipartition::half_chain(len).unwrap()).unwrap();
            assert!((e - len as f64 / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn freefermion_matches_schmidt() {
        let len = 8;
        let g = LatticeGeometry::chain(len).unwrap();
        let psi0 = NamedState::DensityWave.state(g).unwrap();
        let hf = realize(&build_hf_chain(len).unwrap(), psi0.basis()).unwrap();
        let p = Propagator::auto(hf).unwrap();
        let h1 = HermitianEigen::new(&chain_single_particle_hf(len));
        let sites: Vec<usize> = (0..len).step_by(2).collect();
        let slater = SlaterState::from_sites(len, &sites).unwrap();
        let cut = Bipartition::half_chain(len).unwrap();
        for t in [0.0, 0.4, PI / 2.0, 2.5] {
            let a = entropy_schmidt(&p.propagate(&psi0, t).unwrap(), &cut).unwrap();
            let b = entropy_freefermion_1d(&slater.evolve(&h1, t), g, &cut).unwrap();
            assert!((a - b).abs() < 1e-8, "t={t}: {a} vs {b}");
        }
        let r = LatticeGeometry::rectangle(2, 4).unwrap();
        assert!(entropy_freefermion_1d(&slater, r, &cut).is_err());
    }

    #[test]
    fn bottom_rows_cut() {
        let b = Bipartition::bottom_rows(3, 3).unwrap();
        assert_eq!(b.sites_a(), vec![0, 1, 2, 3, 4, 5]);
        let b = Bipartition::bottom_rows(4, 4).unwrap();
        assert_eq!(b.mask_a(), 0xFF);
        assert_eq!(b.swapped().mask_a(), 0xFF00);
        assert!(Bipartition::new(4, &[]).is_err());
        assert!(Bipartition::new(2, &[0, 1]).is_err());
    }

    #[test]
    fn densities_sum_to_particle_number() {
        let g = LatticeGeometry::rectangle(3, 3).unwrap();
        let psi = NamedState::ThreeCornerCluster.state(g).unwrap();
        let n = site_densities(&psi);
        assert_eq!(n, vec![1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(NamedState::DensityWave.mask(g).is_err());
    }

    #[test]
    fn overlap_metric_rejects_zero() {
        let g = LatticeGeometry::chain(3).unwrap();
        let psi = product_state(g, 0b001).unwrap();
        let mut spec = crate::TermSpec::new();
        spec.density(2, 1.0);
        let m = realize(&spec, psi.basis()).unwrap();
        assert!(matches!(overlap_metric(&m, &psi), Err(Error::DegenerateMetric(_))));
        let mut spec = crate::TermSpec::new();
        spec.density(0, 2.0);
        let m = realize(&spec, psi.basis()).unwrap();
        assert!((overlap_metric(&m, &psi).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fidelity_basics() {
        let g = LatticeGeometry::chain(4).unwrap();
        let a = product_state(g, 0b0011).unwrap();
        let b = product_state(g, 0b0101).unwrap();
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        let c = product_state(g, 0b0001).unwrap();
        assert!(fidelity(&a, &c).is_err());
    }
}
