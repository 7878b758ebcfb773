//! Lattice geometry and the fixed-particle-number hardcore-boson Fock basis.
//!
//! Occupation states are stored as one [`Mask`] each: bit `b` set means
//! site `b` is occupied. Rectangle sites are indexed `site(lx, ly) = lx + Lx * ly`
//! everywhere in the crate.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::sparse::StateVector;

/// Largest lattice a single-word bitmask can encode.
/// Occupation bitmask of one Fock state.
pub type Mask = u128;

/// Largest lattice a single bitmask can encode.
pub const MAX_SITES: usize = Mask::BITS as usize;

/// Open-boundary lattice: a chain of `len` sites or an `lx` by `ly` rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatticeGeometry {
    Chain { len: usize },
    Rectangle { lx: usize, ly: usize },
}

impl LatticeGeometry {
    pub fn chain(len: usize) -> Result<Self> {
        let g = LatticeGeometry::Chain { len };
        g.validate()?;
        Ok(g)
    }

    pub fn rectangle(lx: usize, ly: usize) -> Result<Self> {
        let g = LatticeGeometry::Rectangle { lx, ly };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LatticeGeometry::Chain { len } if len < 2 => {
                domain(format!("chain needs at least 2 sites, got {len}"))
            }
            LatticeGeometry::Rectangle { lx, ly } if lx < 2 || ly < 2 => {
                domain(format!("rectangle sides must be >= 2, got {lx}x{ly}"))
            }
            _ if self.n_sites() > MAX_SITES => domain(format!(
                "{} sites exceed the {MAX_SITES}-site bitmask limit",
                self.n_sites()
            )),
            _ => Ok(()),
        }
    }

    pub fn n_sites(&self) -> usize {
        match *self {
            LatticeGeometry::Chain { len } => len,
            LatticeGeometry::Rectangle { lx, ly } => lx * ly,
        }
    }

    /// Side lengths `(Lx, Ly)`; a chain reports `(len, 1)`.
    pub fn dims(&self) -> (usize, usize) {
        match *self {
            LatticeGeometry::Chain { len } => (len, 1),
            LatticeGeometry::Rectangle { lx, ly } => (lx, ly),
        }
    }

    pub fn is_chain(&self) -> bool {
        matches!(self, LatticeGeometry::Chain { .. })
    }

    /// Site index of `(lx, ly)`.
    pub fn site(&self, x: usize, y: usize) -> usize {
        let (lx, ly) = self.dims();
        debug_assert!(x < lx && y < ly);
        x + lx * y
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        let (lx, _) = self.dims();
        (site % lx, site / lx)
    }

    /// Bitmask with every site set.
    pub fn full_mask(&self) -> Mask {
        low_bits(self.n_sites())
    }
}

impl fmt::Display for LatticeGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LatticeGeometry::Chain { len } => write!(f, "chain({len})"),
            LatticeGeometry::Rectangle { lx, ly } => write!(f, "{lx}x{ly}"),
        }
    }
}

/// All occupation bitmasks with a fixed particle number, in ascending order.
#[derive(Debug, Clone)]
pub struct FockBasis {
    geometry: LatticeGeometry,
    n_particles: usize,
    states: Vec<Mask>,
    index: HashMap<Mask, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.geometry == other.geometry && self.n_particles == other.n_particles
    }
}

impl FockBasis {
    pub fn new(geometry: LatticeGeometry, n_particles: usize) -> Result<Self> {
        enumerate_basis(geometry, n_particles)
    }

    pub fn geometry(&self) -> LatticeGeometry {
        self.geometry
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn n_sites(&self) -> usize {
        self.geometry.n_sites()
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Mask] {
        &self.states
    }

    pub fn state(&self, k: usize) -> Mask {
        self.states[k]
    }

    pub fn index_of(&self, mask: Mask) -> Option<usize> {
        self.index.get(&mask).copied()
    }

    /// Lookup through binary search on the sorted state list.
    pub fn index_of_sorted(&self, mask: Mask) -> Option<usize> {
        self.states.binary_search(&mask).ok()
    }

    /// Bitmask from a list of occupied sites; must match the particle number.
    pub fn mask_from_sites(&self, sites: &[usize]) -> Result<Mask> {
        let mut mask: Mask = 0;
        for &s in sites {
            if s >= self.n_sites() {
                return domain(format!("site {s} out of range for {}", self.geometry));
            }
            mask |= 1 << s;
        }
        if mask.count_ones() as usize != self.n_particles {
            return domain(format!(
                "{} distinct sites given for a {}-particle basis",
                mask.count_ones(),
                self.n_particles
            ));
        }
        Ok(mask)
    }
}

/// Enumerate every `n`-particle configuration of `geometry` in ascending
/// bitmask order.
pub fn enumerate_basis(geometry: LatticeGeometry, n: usize) -> Result<FockBasis> {
    geometry.validate()?;
    let ns = geometry.n_sites();
    if n > ns {
        return domain(format!("{n} particles do not fit on {ns} sites"));
    }
    let dim = binomial(ns, n);
    let mut states = Vec::with_capacity(dim);
    if n == 0 {
        states.push(0);
    } else {
        // Gosper's hack walks same-popcount masks in increasing order.
        let limit = geometry.full_mask();
        let mut v = low_bits(n);
        loop {
            states.push(v);
            if states.len() == dim {
                break;
            }
            let c = v & v.wrapping_neg();
            let r = v + c;
            v = (((r ^ v) >> 2) / c) | r;
            debug_assert!(v <= limit);
        }
    }
    let index = states.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    Ok(FockBasis {
        geometry,
        n_particles: n,
        states,
        index,
    })
}

/// Mask with the lowest `n` bits set.
pub fn low_bits(n: usize) -> Mask {
    if n >= MAX_SITES {
        Mask::MAX
    } else {
        ((1 as Mask) << n) - 1
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

pub fn hamming_distance(a: Mask, b: Mask) -> u32 {
    (a ^ b).count_ones()
}

/// Weight `sum |<n|psi>|^2` of the basis states at each Hamming distance
/// `d = 0..=N_s` from `reference`.
pub fn hamming_distribution(psi: &StateVector, reference: Mask) -> Result<Vec<(usize, f64)>> {
    let basis = psi.basis();
    let ns = basis.n_sites();
    if reference & !basis.geometry().full_mask() != 0 {
        return domain(format!(
            "reference mask {reference:#b} has bits outside the {ns}-site lattice"
        ));
    }
    let mut weights = vec![0.0; ns + 1];
    for (k, a) in psi.amplitudes().iter().enumerate() {
        let d = hamming_distance(basis.state(k), reference) as usize;
        weights[d] += a.norm_sqr();
    }
    Ok(weights.into_iter().enumerate().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_chain_basis() {
        let b = enumerate_basis(LatticeGeometry::chain(2).unwrap(), 1).unwrap();
        assert_eq!(b.states(), &[0b01, 0b10]);
    }

    #[test]
    fn basis_sizes_are_binomial() {
        let b = FockBasis::new(LatticeGeometry::chain(16).unwrap(), 8).unwrap();
        assert_eq!(b.dim(), 12870);
        let b = FockBasis::new(LatticeGeometry::rectangle(4, 4).unwrap(), 3).unwrap();
        assert_eq!(b.dim(), 560);
        for ns in 2..=12 {
            for n in 0..=ns {
                let b = FockBasis::new(LatticeGeometry::chain(ns).unwrap(), n).unwrap();
                assert_eq!(b.dim(), binomial(ns, n));
            }
        }
        // the top of the range, still cheap for small n
        let b = FockBasis::new(LatticeGeometry::rectangle(6, 6).unwrap(), 3).unwrap();
        assert_eq!(b.dim(), 7140);
    }

    #[test]
    fn full_width_lattice() {
        let g = LatticeGeometry::rectangle(16, 8).unwrap();
        assert_eq!(g.full_mask(), Mask::MAX);
        let b = FockBasis::new(g, 128).unwrap();
        assert_eq!(b.states(), &[Mask::MAX]);
        let b = FockBasis::new(g, 1).unwrap();
        assert_eq!(b.dim(), 128);
        assert_eq!(b.state(127), 1 << 127);
        let g = LatticeGeometry::rectangle(8, 8).unwrap();
        assert_eq!(g.full_mask(), u64::MAX as Mask);
        let b = FockBasis::new(LatticeGeometry::rectangle(10, 10).unwrap(), 2).unwrap();
        assert_eq!(b.dim(), 4950);
    }

    #[test]
    fn ordering_and_lookup() {
        let b = FockBasis::new(LatticeGeometry::rectangle(3, 3).unwrap(), 4).unwrap();
        for w in b.states().windows(2) {
            assert!(w[0] < w[1]);
        }
        for (k, &s) in b.states().iter().enumerate() {
            assert_eq!(s.count_ones(), 4);
            assert_eq!(b.index_of(s), Some(k));
            assert_eq!(b.index_of_sorted(s), Some(k));
        }
        assert_eq!(b.index_of(0b1), None);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(LatticeGeometry::chain(1).is_err());
        assert!(LatticeGeometry::rectangle(1, 5).is_err());
        assert!(LatticeGeometry::rectangle(12, 11).is_err());
        assert!(LatticeGeometry::rectangle(10, 10).is_ok());
        let g = LatticeGeometry::chain(4).unwrap();
        assert!(FockBasis::new(g, 5).is_err());
    }

    #[test]
    fn site_index_is_bijective() {
        let g = LatticeGeometry::rectangle(4, 5).unwrap();
        let mut seen = vec![false; 20];
        for y in 0..5 {
            for x in 0..4 {
                let s = g.site(x, y);
                assert_eq!(s, x + 4 * y);
                assert_eq!(g.coords(s), (x, y));
                assert!(!seen[s]);
                seen[s] = true;
            }
        }
    }

    #[test]
    fn hamming() {
        assert_eq!(hamming_distance(0b1010, 0b1010), 0);
        assert_eq!(hamming_distance(0b1010, 0b0101), 4);
        let dw: Mask = (0..8).map(|k| (1 as Mask) << (2 * k)).sum();
        let flipped = dw ^ 0xFFFF;
        assert_eq!(hamming_distance(dw, flipped), 16);
    }
}
