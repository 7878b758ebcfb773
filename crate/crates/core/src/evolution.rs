//! Time propagation `exp(-i H t)|psi>` and the evolve-then-quench protocol.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::emergent::{self, Emergent, EmergentVariant, Model};
use crate::error::{domain, Error, Result};
use crate::lattice::FockBasis;
#[cfg(test)]
use crate::lattice::Mask;
use crate::linalg::{DenseHermitian, HermitianEigen};
use crate::models::TwoSpinOps;
use crate::sparse::{same_basis, HermitianAction, SparseHermitian, StateVector};
use crate::C64;

/// Largest dimension the automatic choice diagonalizes densely.
pub const DENSE_PROPAGATION_CAP: usize = 1000;
pub const KRYLOV_DIM: usize = 30;
pub const KRYLOV_TOL: f64 = 1e-10;
/// Norm drift above which propagation is treated as failed.
pub const NORM_FAIL: f64 = 1e-6;

/// Generator of a propagation.
#[derive(Debug, Clone)]
pub enum Generator {
    Sparse(SparseHermitian),
    Dense(DenseHermitian),
}

impl Generator {
    pub fn basis(&self) -> &Arc<FockBasis> {
        match self {
            Generator::Sparse(s) => s.basis(),
            Generator::Dense(d) => HermitianAction::basis(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis().dim()
    }

    fn dense_matrix(&self) -> DMatrix<C64> {
        match self {
            Generator::Sparse(s) => s.to_dense(),
            Generator::Dense(d) => d.matrix().clone(),
        }
    }
}

impl HermitianAction for Generator {
    fn basis(&self) -> &Arc<FockBasis> {
        Generator::basis(self)
    }
    fn act(&self, x: &DVector<C64>) -> DVector<C64> {
        match self {
            Generator::Sparse(s) => s.act(x),
            Generator::Dense(d) => d.act(x),
        }
    }
}

impl From<SparseHermitian> for Generator {
    fn from(s: SparseHermitian) -> Self {
        Generator::Sparse(s)
    }
}

impl From<DenseHermitian> for Generator {
    fn from(d: DenseHermitian) -> Self {
        Generator::Dense(d)
    }
}

impl TryFrom<Emergent> for Generator {
    type Error = Error;
    fn try_from(e: Emergent) -> Result<Self> {
        match e {
            Emergent::Sparse(s) => Ok(Generator::Sparse(s)),
            Emergent::Dense(d) => Ok(Generator::Dense(d)),
            Emergent::Dicke(_) => domain("Dicke-basis operators are propagated by the oat module"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    DenseEigen,
    Krylov { dim: usize, tol: f64 },
    /// Dense up to [`DENSE_PROPAGATION_CAP`], Krylov above.
    Auto,
}

impl Method {
    pub fn krylov() -> Self {
        Method::Krylov {
            dim: KRYLOV_DIM,
            tol: KRYLOV_TOL,
        }
    }
}

/// Immutable propagator for one generator; shareable across threads.
#[derive(Debug, Clone)]
pub struct Propagator {
    basis: Arc<FockBasis>,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Dense(HermitianEigen),
    Krylov { op: Generator, dim: usize, tol: f64 },
}

impl Propagator {
    pub fn new(op: impl Into<Generator>, method: Method) -> Result<Self> {
        let op = op.into();
        let basis = op.basis().clone();
        let method = match method {
            Method::Auto if op.dim() <= DENSE_PROPAGATION_CAP => Method::DenseEigen,
            Method::Auto => Method::krylov(),
            m => m,
        };
        let kind = match method {
            Method::DenseEigen => Kind::Dense(HermitianEigen::new(&op.dense_matrix())),
            Method::Krylov { dim, tol } => {
                if dim < 2 || !(tol > 0.0) {
                    return domain(format!("bad Krylov parameters dim={dim} tol={tol}"));
                }
                Kind::Krylov { op, dim, tol }
            }
            Method::Auto => unreachable!(),
        };
        Ok(Propagator { basis, kind })
    }

    pub fn auto(op: impl Into<Generator>) -> Result<Self> {
        Propagator::new(op, Method::Auto)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.kind, Kind::Dense(_))
    }

    /// `exp(-i H t) psi`
    pub fn propagate(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        same_basis(&self.basis, psi.basis())?;
        if !t.is_finite() {
            return domain(format!("propagation time {t} is not finite"));
        }
        if t == 0.0 {
            return Ok(psi.clone());
        }
        let v = match &self.kind {
            Kind::Dense(eig) => eig.evolve(psi.amplitudes(), t),
            Kind::Krylov { op, dim, tol } => krylov_expmv(op, psi.amplitudes(), t, *dim, *tol)?,
        };
        finish(&self.basis, v)
    }

    /// States at each of `times`, which must be ascending. The Krylov path
    /// steps from one sample to the next.
    pub fn series(&self, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        check_ascending(times)?;
        let mut out = Vec::with_capacity(times.len());
        let mut last = (0.0, psi0.clone());
        for &t in times {
            let psi = match self.kind {
                Kind::Dense(_) => self.propagate(psi0, t)?,
                Kind::Krylov { .. } => self.propagate(&last.1, t - last.0)?,
            };
            last = (t, psi.clone());
            out.push(psi);
        }
        Ok(out)
    }
}

pub(crate) fn check_ascending(times: &[f64]) -> Result<()> {
    if times.windows(2).any(|w| !(w[0] <= w[1])) || times.iter().any(|t| !t.is_finite()) {
        return domain("sample times must be finite and ascending");
    }
    Ok(())
}

fn finish(basis: &Arc<FockBasis>, v: DVector<C64>) -> Result<StateVector> {
    let n = v.norm();
    if !n.is_finite() || (n - 1.0).abs() > NORM_FAIL {
        return Err(Error::Numerical(format!("norm drifted to {n} during propagation")));
    }
    StateVector::new(basis.clone(), v.unscale(n))
}

/// Convenience wrapper: build an automatic propagator and apply it once.
pub fn propagate(psi0: &StateVector, op: impl Into<Generator>, t: f64) -> Result<StateVector> {
    Propagator::auto(op)?.propagate(psi0, t)
}

/// `exp(-i H t) v` through Lanczos projections with adaptive substeps.
///
/// Each substep builds an orthonormal Krylov basis of dimension up to `m`,
/// exponentiates the projected tridiagonal matrix exactly, and takes the
/// longest step whose a-posteriori error `beta_m |[exp(-i tau T) e_1]_m|` is
/// below `tol`.
pub fn krylov_expmv<O: HermitianAction + ?Sized>(
    op: &O,
    v: &DVector<C64>,
    t: f64,
    m: usize,
    tol: f64,
) -> Result<DVector<C64>> {
    let n = v.len();
    let m = m.min(n).max(1);
    let mut w = v.clone();
    let mut done = 0.0f64;
    let total = t.abs();
    let sign = t.signum();
    let mut tau_hint = total;
    let mut substeps = 0usize;

    while done < total {
        substeps += 1;
        if substeps > 100_000 {
            return Err(Error::Convergence {
                message: "too many Krylov substeps".into(),
                residual: f64::NAN,
            });
        }
        let beta0 = w.norm();
        let mut basis: Vec<DVector<C64>> = vec![w.unscale(beta0)];
        let mut alpha = Vec::with_capacity(m);
        let mut beta = Vec::with_capacity(m);
        let mut breakdown = false;
        for j in 0..m {
            let mut u = op.act(&basis[j]);
            let a = basis[j].dotc(&u).re;
            alpha.push(a);
            // full reorthogonalization, twice
            for _ in 0..2 {
                for q in &basis {
                    let c = q.dotc(&u);
                    u.axpy(-c, q, C64::new(1.0, 0.0));
                }
            }
            let b = u.norm();
            if b < 1e-13 * (1.0 + a.abs()) {
                breakdown = true;
                break;
            }
            beta.push(b);
            if j + 1 < m {
                basis.push(u.unscale(b));
            }
        }
        let k = alpha.len();
        let mut tri = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            tri[(i, i)] = alpha[i];
            if i + 1 < k {
                tri[(i, i + 1)] = beta[i];
                tri[(i + 1, i)] = beta[i];
            }
        }
        let eig = tri.symmetric_eigen();
        let remaining = total - done;
        // first column of exp(-i tau T)
        let column = |tau: f64| -> DVector<C64> {
            let mut out = DVector::<C64>::zeros(k);
            for (l, &e) in eig.eigenvalues.iter().enumerate() {
                let c = eig.eigenvectors[(0, l)] * C64::from_polar(1.0, -sign * e * tau);
                for i in 0..k {
                    out[i] += c * eig.eigenvectors[(i, l)];
                }
            }
            out
        };
        let (tau, coeffs) = if breakdown {
            (remaining, column(remaining))
        } else {
            let beta_m = beta[k - 1];
            let mut tau = tau_hint.min(remaining);
            loop {
                let c = column(tau);
                let err = beta0 * beta_m * c[k - 1].norm();
                if err <= tol {
                    // grow the next attempt when comfortably accurate
                    tau_hint = if err < 0.1 * tol { tau * 2.0 } else { tau };
                    break (tau, c);
                }
                tau *= 0.5;
                if tau < 1e-12 * total.max(1.0) {
                    return Err(Error::Convergence {
                        message: "Krylov step size underflow".into(),
                        residual: err,
                    });
                }
            }
        };
        let mut next = DVector::<C64>::zeros(n);
        for (i, q) in basis.iter().enumerate().take(k) {
            next.axpy(coeffs[i] * beta0, q, C64::new(1.0, 0.0));
        }
        w = next;
        done += tau;
        if remaining - tau <= 1e-15 * total {
            break;
        }
    }
    Ok(w)
}

/// Evolve under `H_f` to `t_freeze`, then quench to the emergent Hamiltonian
/// built at `t_freeze` and evolve for each post-freeze duration.
#[derive(Debug, Clone, PartialEq)]
pub struct FreezePlan {
    pub model: Model,
    pub variant: EmergentVariant,
    pub t_freeze: f64,
    /// Durations `Delta` after the quench, ascending.
    pub post_times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FreezeRun {
    pub at_freeze: StateVector,
    pub post: Vec<StateVector>,
}

impl FreezeRun {
    /// `|<psi(t_f)|psi(t_f + Delta)>|` per post-freeze sample.
    pub fn overlaps(&self) -> Result<Vec<f64>> {
        self.post
            .iter()
            .map(|p| Ok(self.at_freeze.inner(p)?.norm()))
            .collect()
    }
}

pub fn run_freeze(psi0: &StateVector, plan: &FreezePlan) -> Result<FreezeRun> {
    if !(plan.t_freeze >= 0.0) {
        return domain(format!("t_freeze must be >= 0, got {}", plan.t_freeze));
    }
    check_ascending(&plan.post_times)?;
    let basis = psi0.basis();
    let hf = Propagator::auto(plan.model.hf(basis)?)?;
    let at_freeze = hf.propagate(psi0, plan.t_freeze)?;
    let m = emergent::build(plan.variant, &plan.model, Some(basis), plan.t_freeze)?;
    let mp = Propagator::auto(Generator::try_from(m)?)?;
    let post = mp.series(&at_freeze, &plan.post_times)?;
    Ok(FreezeRun { at_freeze, post })
}

/// `(<S_1x>, <S_1y>, <S_1z>, <S_2x>, <S_2y>, <S_2z>)` for single-excitation
/// rectangle states. Site `(0, 0)` is `m_1 = s_1, m_2 = s_2`.
pub fn bloch_trajectory(states: &[StateVector], lx: usize, ly: usize) -> Result<Vec<[f64; 6]>> {
    let ops = TwoSpinOps::new(lx, ly)?;
    let g = crate::lattice::LatticeGeometry::rectangle(lx, ly)?;
    states
        .iter()
        .map(|psi| {
            let b = psi.basis();
            if b.geometry() != g || b.n_particles() != 1 {
                return domain(format!(
                    "Bloch vectors need a single excitation on {g}, got {} particles on {}",
                    b.n_particles(),
                    b.geometry()
                ));
            }
            let v = psi.amplitudes();
            let ev = |m: &DMatrix<C64>| v.dotc(&(m * v)).re;
            Ok([
                ev(&ops.s1[0]),
                ev(&ops.s1[1]),
                ev(&ops.s1[2]),
                ev(&ops.s2[0]),
                ev(&ops.s2[1]),
                ev(&ops.s2[2]),
            ])
        })
        .collect()
}
