//! One-axis twisting `H = -lambda S_z^2` in the symmetric Dicke sector,
//! its emergent Hamiltonian, and GHZ preparation.
//!
//! Dicke vectors are indexed by `m = -s..=s` ascending with `s = L/2`. The
//! computational state `|0...0>` is `m = +s` and `|1...1>` is `m = -s`.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};
use crate::evolution::check_ascending;
use crate::lattice::binomial;
use crate::linalg::HermitianEigen;
use crate::models::SpinOps;
use crate::sparse::NORM_TOL;
use crate::C64;

/// Symmetric-sector state of `L` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeVector {
    qubits: usize,
    amps: DVector<C64>,
}

impl DickeVector {
    pub fn new(qubits: usize, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != qubits + 1 {
            return Err(Error::BasisMismatch(format!(
                "{} Dicke amplitudes for {qubits} qubits",
                amps.len()
            )));
        }
        let n = amps.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::Numerical(format!("Dicke vector norm {n} is not 1")));
        }
        Ok(DickeVector { qubits, amps })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn s(&self) -> f64 {
        self.qubits as f64 / 2.0
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    /// Amplitude of `|s m>`.
    pub fn amp(&self, m: f64) -> C64 {
        self.amps[(m + self.s()).round() as usize]
    }

    pub fn inner(&self, other: &DickeVector) -> Result<C64> {
        if self.qubits != other.qubits {
            return Err(Error::BasisMismatch(format!(
                "{} vs {} qubits",
                self.qubits, other.qubits
            )));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|<self|other>|^2`
    pub fn fidelity(&self, other: &DickeVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

fn check_qubits(qubits: usize) -> Result<()> {
    if qubits == 0 {
        return domain("need at least one qubit");
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return domain(format!("twisting strength must be positive, got {lambda}"));
    }
    Ok(())
}

pub fn spin_ops(qubits: usize) -> SpinOps {
    SpinOps::from_twice_s(qubits)
}

/// Diagonal `-lambda S_z^2`.
pub fn oat_hamiltonian(qubits: usize, lambda: f64) -> Result<DMatrix<C64>> {
    check_qubits(qubits)?;
    let s = qubits as f64 / 2.0;
    Ok(DMatrix::from_fn(qubits + 1, qubits + 1, |r, c| {
        if r == c {
            let m = r as f64 - s;
            C64::new(-lambda * m * m, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Coherent state along `-y`, the `S_y = -L/2` eigenstate:
/// `c_m = 2^{-L/2} (-i)^{s-m} sqrt(C(L, s-m))`.
pub fn coherent_minus_y(qubits: usize) -> Result<DickeVector> {
    check_qubits(qubits)?;
    if qubits > 1000 {
        return domain(format!("{qubits} qubits overflow the binomial weights"));
    }
    let norm = 0.5f64.powf(qubits as f64 / 2.0);
    let minus_i = [
        C64::new(1.0, 0.0),
        C64::new(0.0, -1.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, 1.0),
    ];
    let amps = DVector::from_fn(qubits + 1, |k, _| {
        // k indexes m = k - s, so s - m = L - k
        let exc = qubits - k;
        minus_i[exc % 4] * (norm * (binomial_f64(qubits, exc)).sqrt())
    });
    DickeVector::new(qubits, amps)
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    if n <= 60 {
        binomial(n, k) as f64
    } else {
        let k = k.min(n - k);
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }
}

/// `exp(-i H t) psi` for `H = -lambda S_z^2`, i.e. phases `exp(i lambda m^2 t)`.
pub fn evolve_oat(psi: &DickeVector, lambda: f64, t: f64) -> DickeVector {
    let s = psi.s();
    let amps = DVector::from_fn(psi.amps.len(), |k, _| {
        let m = k as f64 - s;
        psi.amps[k] * C64::from_polar(1.0, lambda * m * m * t)
    });
    DickeVector {
        qubits: psi.qubits,
        amps,
    }
}

/// Tridiagonal emergent Hamiltonian of one-axis twisting from `H_0 = S_y`:
/// `<m+1|M|m> = e^{i lambda t (2m+1)} sqrt(s(s+1) - m(m+1)) / (2i)` and its
/// Hermitian conjugate.
pub fn oat_emergent(qubits: usize, lambda: f64, t: f64) -> Result<DMatrix<C64>> {
    check_qubits(qubits)?;
    let s = qubits as f64 / 2.0;
    let d = qubits + 1;
    let mut m = DMatrix::<C64>::zeros(d, d);
    for k in 0..d - 1 {
        let mm = k as f64 - s;
        let amp = (s * (s + 1.0) - mm * (mm + 1.0)).sqrt() / 2.0;
        let up = C64::from_polar(amp, lambda * t * (2.0 * mm + 1.0)) * C64::new(0.0, -1.0);
        m[(k + 1, k)] = up;
        m[(k, k + 1)] = up.conj();
    }
    Ok(m)
}

/// `exp(-i theta S_x) psi`
pub fn rotate_x(psi: &DickeVector, theta: f64) -> DickeVector {
    let eig = HermitianEigen::new(&spin_ops(psi.qubits).sx);
    let v = eig.evolve(&psi.amps, theta);
    let n = v.norm();
    DickeVector {
        qubits: psi.qubits,
        amps: v.unscale(n),
    }
}

/// `(|0...0> + e^{i phi} |1...1>) / sqrt 2`
pub fn ghz_state(qubits: usize, phi: f64) -> Result<DickeVector> {
    if qubits < 2 {
        return domain(format!("GHZ state needs at least 2 qubits, got {qubits}"));
    }
    let r = 0.5f64.sqrt();
    let mut amps = DVector::zeros(qubits + 1);
    amps[qubits] = C64::new(r, 0.0);
    amps[0] = C64::from_polar(r, phi);
    DickeVector::new(qubits, amps)
}

/// `F(t) = |<GHZ_{3pi/2}| R_x(-pi/2) psi(t)>|^2` starting from the `-y`
/// coherent state.
pub fn ghz_fidelity_series(qubits: usize, lambda: f64, times: &[f64]) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let psi0 = coherent_minus_y(qubits)?;
    let target = ghz_state(qubits, 1.5 * std::f64::consts::PI)?;
    let eig = HermitianEigen::new(&spin_ops(qubits).sx);
    times
        .iter()
        .map(|&t| {
            let rotated = eig.evolve(&evolve_oat(&psi0, lambda, t).amps, -std::f64::consts::FRAC_PI_2);
            Ok(target.amps.dotc(&rotated).norm_sqr())
        })
        .collect()
}

/// Result of quenching from `H_OAT` to its emergent Hamiltonian.
#[derive(Debug, Clone)]
pub struct OatFreeze {
    /// `E_0 = <psi|M|psi>` at the quench.
    pub energy: f64,
    /// `||M psi - E_0 psi||` at the quench.
    pub residual: f64,
    /// GHZ fidelity at `t_freeze + Delta` for each post-quench duration.
    pub fidelities: Vec<f64>,
}

pub fn oat_freeze(qubits: usize, lambda: f64, t_freeze: f64, post_times: &[f64]) -> Result<OatFreeze> {
    check_lambda(lambda)?;
    if !(t_freeze >= 0.0) {
        return domain(format!("t_freeze must be >= 0, got {t_freeze}"));
    }
    check_ascending(post_times)?;
    let psi = evolve_oat(&coherent_minus_y(qubits)?, lambda, t_freeze);
    let m = oat_emergent(qubits, lambda, t_freeze)?;
    let mpsi = &m * &psi.amps;
    let energy = psi.amps.dotc(&mpsi).re;
    let residual = (&mpsi - &psi.amps * C64::new(energy, 0.0)).norm();
    let eig = HermitianEigen::new(&m);
    let sx = HermitianEigen::new(&spin_ops(qubits).sx);
    let target = ghz_state(qubits, 1.5 * std::f64::consts::PI)?;
    let fidelities = post_times
        .iter()
        .map(|&dt| {
            let v = eig.evolve(&psi.amps, dt);
            let rotated = sx.evolve(&v, -std::f64::consts::FRAC_PI_2);
            target.amps.dotc(&rotated).norm_sqr()
        })
        .collect();
    Ok(OatFreeze {
        energy,
        residual,
        fidelities,
    })
}
