//! Hamiltonian builders: lattice term specs and dense large-spin operators.
//!
//! The engineered chain couples sites `l-1` and `l` with `sqrt(l (L - l)) / 2`,
//! which makes the single-particle hopping matrix equal to `S_x` for spin
//! `s = (L - 1) / 2`. Site `l` corresponds to `m = s - l`, so the corner site
//! `0` is the `+z` pole.

use nalgebra::DMatrix;

use crate::error::{domain, Result};
use crate::lattice::LatticeGeometry;
use crate::sparse::TermSpec;
use crate::C64;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Amplitude of the bond between sites `l - 1` and `l` on an `len`-site line.
pub fn pst_amplitude(l: usize, len: usize) -> f64 {
    debug_assert!(l >= 1 && l < len);
    ((l * (len - l)) as f64).sqrt() / 2.0
}

fn check_len(len: usize) -> Result<()> {
    if len < 2 {
        return domain(format!("need at least 2 sites, got {len}"));
    }
    Ok(())
}

/// `H_0 = sum_l l n_l`
pub fn build_h0_chain(len: usize) -> Result<TermSpec> {
    check_len(len)?;
    let mut spec = TermSpec::new();
    for l in 0..len {
        spec.density(l, l as f64);
    }
    Ok(spec)
}

/// Perfect-state-transfer chain.
pub fn build_hf_chain(len: usize) -> Result<TermSpec> {
    check_len(len)?;
    let mut spec = TermSpec::new();
    for l in 1..len {
        spec.hop(l - 1, l, re(pst_amplitude(l, len)));
    }
    Ok(spec)
}

/// `H_0 = sum (lx + ly) n_l` on a rectangle.
pub fn build_h0_rect(lx: usize, ly: usize) -> Result<TermSpec> {
    let g = LatticeGeometry::rectangle(lx, ly)?;
    let mut spec = TermSpec::new();
    for y in 0..ly {
        for x in 0..lx {
            spec.density(g.site(x, y), (x + y) as f64);
        }
    }
    Ok(spec)
}

/// Nearest-neighbour engineered hopping along both axes.
pub fn build_hf_rect_nn(lx: usize, ly: usize) -> Result<TermSpec> {
    let g = LatticeGeometry::rectangle(lx, ly)?;
    let mut spec = TermSpec::new();
    for y in 0..ly {
        for x in 1..lx {
            spec.hop(g.site(x - 1, y), g.site(x, y), re(pst_amplitude(x, lx)));
        }
    }
    for y in 1..ly {
        for x in 0..lx {
            spec.hop(g.site(x, y - 1), g.site(x, y), re(pst_amplitude(y, ly)));
        }
    }
    Ok(spec)
}

/// Nearest-neighbour model plus homogeneous diagonal hopping `j_cross` on
/// both diagonals of every plaquette.
pub fn build_hf_rect_nnn(lx: usize, ly: usize, j_cross: f64) -> Result<TermSpec> {
    let g = LatticeGeometry::rectangle(lx, ly)?;
    let mut spec = build_hf_rect_nn(lx, ly)?;
    if j_cross == 0.0 {
        return Ok(spec);
    }
    for y in 0..ly - 1 {
        for x in 0..lx - 1 {
            // l -> l + x + y
            spec.hop(g.site(x + 1, y + 1), g.site(x, y), re(j_cross));
            // l -> l - x + y, written from the right-hand corner
            spec.hop(g.site(x, y + 1), g.site(x + 1, y), re(j_cross));
        }
    }
    Ok(spec)
}

/// Dense spin matrices in the `|s m>` basis, `m = -s..=s` ascending.
#[derive(Debug, Clone)]
pub struct SpinOps {
    twice_s: usize,
    pub sx: DMatrix<C64>,
    pub sy: DMatrix<C64>,
    pub sz: DMatrix<C64>,
    pub sp: DMatrix<C64>,
    pub sm: DMatrix<C64>,
}

impl SpinOps {
    pub fn s(&self) -> f64 {
        self.twice_s as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_s + 1
    }

    /// `m` value of basis index `k`.
    pub fn m(&self, k: usize) -> f64 {
        k as f64 - self.s()
    }

    /// Spin ops for the `len`-site engineered chain, `s = (len - 1) / 2`.
    pub fn for_chain(len: usize) -> SpinOps {
        SpinOps::from_twice_s(len - 1)
    }

    pub fn from_twice_s(twice_s: usize) -> SpinOps {
        let s = twice_s as f64 / 2.0;
        let d = twice_s + 1;
        let mut sp = DMatrix::zeros(d, d);
        let mut sz = DMatrix::zeros(d, d);
        for k in 0..d {
            let m = k as f64 - s;
            sz[(k, k)] = re(m);
            if k + 1 < d {
                sp[(k + 1, k)] = re((s * (s + 1.0) - m * (m + 1.0)).sqrt());
            }
        }
        let sm = sp.adjoint();
        let sx = (&sp + &sm) * re(0.5);
        let sy = (&sp - &sm) * C64::new(0.0, -0.5);
        SpinOps {
            twice_s,
            sx,
            sy,
            sz,
            sp,
            sm,
        }
    }
}

/// Spin operators for spin quantum number `s` (integer or half-integer).
pub fn build_spin_ops(s: f64) -> Result<SpinOps> {
    let twice = 2.0 * s;
    if s < 0.0 || (twice - twice.round()).abs() > 1e-12 {
        return domain(format!("spin quantum number {s} is not a non-negative half-integer"));
    }
    Ok(SpinOps::from_twice_s(twice.round() as usize))
}

/// Re-index a spin matrix from `m` order to lattice-site order (`l = s - m`).
pub fn site_ordered(m: &DMatrix<C64>) -> DMatrix<C64> {
    let d = m.nrows();
    DMatrix::from_fn(d, d, |r, c| m[(d - 1 - r, d - 1 - c)])
}

/// `a1 (x) a2` laid out on rectangle sites `x + Lx * y`, with factor 1 acting
/// on `x` and factor 2 on `y`.
pub fn two_spin_kron(a1: &DMatrix<C64>, a2: &DMatrix<C64>) -> DMatrix<C64> {
    a2.kronecker(a1)
}

/// Spin operators of the two large spins of an `lx` by `ly` rectangle, in
/// site order, embedded in the `lx * ly` single-excitation space.
#[derive(Debug, Clone)]
pub struct TwoSpinOps {
    pub lx: usize,
    pub ly: usize,
    pub s1: [DMatrix<C64>; 3],
    pub s2: [DMatrix<C64>; 3],
}

impl TwoSpinOps {
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        LatticeGeometry::rectangle(lx, ly)?;
        let a = SpinOps::for_chain(lx);
        let b = SpinOps::for_chain(ly);
        let i1 = DMatrix::identity(lx, lx);
        let i2 = DMatrix::identity(ly, ly);
        let one = |m: &DMatrix<C64>| two_spin_kron(&site_ordered(m), &i2);
        let two = |m: &DMatrix<C64>| two_spin_kron(&i1, &site_ordered(m));
        Ok(TwoSpinOps {
            lx,
            ly,
            s1: [one(&a.sx), one(&a.sy), one(&a.sz)],
            s2: [two(&b.sx), two(&b.sy), two(&b.sz)],
        })
    }

    pub fn dim(&self) -> usize {
        self.lx * self.ly
    }

    pub fn identity(&self) -> DMatrix<C64> {
        DMatrix::identity(self.dim(), self.dim())
    }

    /// `S_1x (x) S_2x`
    pub fn sx_sx(&self) -> DMatrix<C64> {
        let a = SpinOps::for_chain(self.lx);
        let b = SpinOps::for_chain(self.ly);
        two_spin_kron(&site_ordered(&a.sx), &site_ordered(&b.sx))
    }
}

/// Single-excitation `H_f = S_1x + S_2x (+ S_1x S_2x)` as a dense matrix over
/// rectangle sites.
pub fn build_two_spin_hf(lx: usize, ly: usize, interacting: bool) -> Result<DMatrix<C64>> {
    let ops = TwoSpinOps::new(lx, ly)?;
    let mut h = &ops.s1[0] + &ops.s2[0];
    if interacting {
        h += ops.sx_sx();
    }
    Ok(h)
}

/// Single-excitation `H_0 = -S_1z - S_2z + (Lx + Ly)/2 - 1`.
pub fn build_two_spin_h0(lx: usize, ly: usize) -> Result<DMatrix<C64>> {
    let ops = TwoSpinOps::new(lx, ly)?;
    let c = (lx + ly) as f64 / 2.0 - 1.0;
    Ok(ops.identity() * re(c) - &ops.s1[2] - &ops.s2[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Mask;
    use crate::lattice::FockBasis;
    use crate::linalg::{eigenvalues, max_abs_diff};
    use crate::sparse::{realize, StateVector, expectation};
    use std::sync::Arc;

    fn single_particle(spec: &TermSpec, g: LatticeGeometry) -> DMatrix<C64> {
        let b = Arc::new(FockBasis::new(g, 1).unwrap());
        realize(spec, &b).unwrap().to_dense()
    }

    fn ladder(len: usize) -> Vec<f64> {
        let s = (len as f64 - 1.0) / 2.0;
        (0..len).map(|k| k as f64 - s).collect()
    }

    #[test]
    fn h0_chain_energies() {
        for (l, mask, e) in [(4usize, 0b0101 as Mask, 2.0), (4, 0b1010, 4.0)] {
            let b = Arc::new(FockBasis::new(LatticeGeometry::chain(l).unwrap(), 2).unwrap());
            let op = realize(&build_h0_chain(l).unwrap(), &b).unwrap();
            let psi = StateVector::from_bitmask(b, mask).unwrap();
            assert_eq!(expectation(&op, &psi).unwrap(), e);
        }
        let b = Arc::new(FockBasis::new(LatticeGeometry::chain(16).unwrap(), 8).unwrap());
        let op = realize(&build_h0_chain(16).unwrap(), &b).unwrap();
        let dw: Mask = (0..8).map(|k| (1 as Mask) << (2 * k)).sum();
        let psi = StateVector::from_bitmask(b, dw).unwrap();
        assert_eq!(expectation(&op, &psi).unwrap(), 56.0);
        assert!(op.is_diagonal());
    }

    #[test]
    fn hf_chain_amplitudes() {
        let spec = build_hf_chain(2).unwrap();
        assert_eq!(spec.len(), 1);
        assert_eq!(pst_amplitude(1, 2), 0.5);
        for l in 1..9 {
            assert_eq!(pst_amplitude(l, 9), pst_amplitude(9 - l, 9));
        }
    }

    #[test]
    fn hf_chain_spectrum_is_spin_ladder() {
        for len in 2..=16 {
            let h = single_particle(&build_hf_chain(len).unwrap(), LatticeGeometry::chain(len).unwrap());
            let ev = eigenvalues(&h);
            let expect = ladder(len);
            let dev = ev.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dev < 1e-10, "len {len}: {dev}");
        }
    }

    #[test]
    fn hf_chain_single_particle_is_site_ordered_sx() {
        let len = 7;
        let h = single_particle(&build_hf_chain(len).unwrap(), LatticeGeometry::chain(len).unwrap());
        let sx = site_ordered(&SpinOps::for_chain(len).sx);
        assert!(max_abs_diff(&h, &sx) < 1e-14);
    }

    #[test]
    fn rect_h0_corners() {
        let g = LatticeGeometry::rectangle(5, 3).unwrap();
        let h = single_particle(&build_h0_rect(5, 3).unwrap(), g);
        assert_eq!(h[(0, 0)].re, 0.0);
        let far = g.site(4, 2);
        assert_eq!(h[(far, far)].re, 6.0);
        let b = Arc::new(FockBasis::new(g, 2).unwrap());
        let op = realize(&build_h0_rect(5, 3).unwrap(), &b).unwrap();
        let psi = StateVector::from_bitmask(b, 1 | 1 << far).unwrap();
        assert_eq!(expectation(&op, &psi).unwrap(), 6.0);
    }

    #[test]
    fn rect_nn_spectrum_is_minkowski_sum() {
        for (lx, ly) in [(2, 2), (4, 4), (4, 5), (3, 6)] {
            let g = LatticeGeometry::rectangle(lx, ly).unwrap();
            let spec = build_hf_rect_nn(lx, ly).unwrap();
            if (lx, ly) == (2, 2) {
                assert_eq!(spec.len(), 4);
            }
            let ev = eigenvalues(&single_particle(&spec, g));
            let mut expect: Vec<f64> = ladder(lx)
                .iter()
                .flat_map(|a| ladder(ly).into_iter().map(move |b| a + b))
                .collect();
            expect.sort_by(f64::total_cmp);
            let dev = ev.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dev < 1e-10);
            if (lx, ly) == (4, 5) {
                assert!((ev[0] + 3.5).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn nnn_bond_count() {
        assert_eq!(build_hf_rect_nnn(4, 4, 0.0).unwrap(), build_hf_rect_nn(4, 4).unwrap());
        let nn = build_hf_rect_nn(3, 3).unwrap().len();
        assert_eq!(build_hf_rect_nnn(3, 3, 1.0).unwrap().len() - nn, 8);
    }

    #[test]
    fn spin_algebra() {
        let half = build_spin_ops(0.5).unwrap();
        assert!((half.sz[(0, 0)].re + 0.5).abs() < 1e-15);
        assert!((half.sx[(0, 1)].re - 0.5).abs() < 1e-15);
        assert!((half.sy[(1, 0)] - C64::new(0.0, -0.5)).norm() < 1e-15);
        let three_halves = build_spin_ops(1.5).unwrap();
        for k in 0..4 {
            assert_eq!(three_halves.sz[(k, k)].re, k as f64 - 1.5);
        }
        for s in [0.5, 1.0, 1.5, 3.0, 7.5] {
            let o = build_spin_ops(s).unwrap();
            let i = C64::new(0.0, 1.0);
            let comm = |a: &DMatrix<C64>, b: &DMatrix<C64>| a * b - b * a;
            assert!(max_abs_diff(&comm(&o.sx, &o.sy), &(&o.sz * i)) < 1e-12);
            assert!(max_abs_diff(&comm(&o.sy, &o.sz), &(&o.sx * i)) < 1e-12);
            assert!(max_abs_diff(&comm(&o.sz, &o.sx), &(&o.sy * i)) < 1e-12);
            assert!(max_abs_diff(&o.sp, &(&o.sx + &o.sy * i)) < 1e-12);
            assert!(max_abs_diff(&o.sm, &(&o.sx - &o.sy * i)) < 1e-12);
        }
        assert!(build_spin_ops(0.3).is_err());
    }

    #[test]
    fn two_spin_noninteracting_matches_lattice() {
        let g = LatticeGeometry::rectangle(4, 4).unwrap();
        let lat = single_particle(&build_hf_rect_nn(4, 4).unwrap(), g);
        let ts = build_two_spin_hf(4, 4, false).unwrap();
        assert!(max_abs_diff(&lat, &ts) < 1e-14);
        let lat0 = single_particle(&build_h0_rect(4, 4).unwrap(), g);
        assert!(max_abs_diff(&lat0, &build_two_spin_h0(4, 4).unwrap()) < 1e-14);
    }

    #[test]
    fn two_spin_interacting_has_plaquette_diagonals() {
        let (lx, ly) = (4, 4);
        let g = LatticeGeometry::rectangle(lx, ly).unwrap();
        let nn = single_particle(&build_hf_rect_nn(lx, ly).unwrap(), g);
        let mut expect = nn.clone();
        for y in 1..ly {
            for x in 1..lx {
                let amp = ((x * y * (lx - x) * (ly - y)) as f64).sqrt() / 4.0;
                let (a, b) = (g.site(x - 1, y - 1), g.site(x, y));
                let (c, d) = (g.site(x, y - 1), g.site(x - 1, y));
                for (p, q) in [(a, b), (c, d)] {
                    expect[(p, q)] += re(amp);
                    expect[(q, p)] += re(amp);
                }
            }
        }
        let ts = build_two_spin_hf(lx, ly, true).unwrap();
        assert!(max_abs_diff(&ts, &expect) < 1e-14);
    }

    #[test]
    fn two_spin_2x2_spectrum() {
        let ev = eigenvalues(&build_two_spin_hf(2, 2, true).unwrap());
        let mut expect: Vec<f64> = [-0.5, 0.5]
            .iter()
            .flat_map(|a| [-0.5, 0.5].map(|b| a + b + a * b))
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
