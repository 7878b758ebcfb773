//! C ABI for the emfreeze simulator.
//!
//! Objects cross the boundary as opaque handles created by `emf_*_new`-style
//! constructors and released with the matching `emf_*_free`. Every fallible
//! call returns an [`EmfStatus`]; on failure a message is stored per thread
//! and can be fetched with [`emf_last_error_message`]. Panics never unwind
//! into the caller.
//!
//! Occupation bitmasks are 128 bits wide and passed as `(lo, hi)` halves.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;

use emfreeze::emergent::{self, EmergentVariant, Model};
use emfreeze::evolution::{Generator, Propagator};
use emfreeze::lattice::Mask;
use emfreeze::observables::{entropy_schmidt, overlap_metric, Bipartition};
use emfreeze::runner;
use emfreeze::sparse::expectation;
use emfreeze::{oat, Error, FockBasis, StateVector, C64};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    BasisMismatch = 4,
    Capacity = 5,
    Numerical = 6,
    Convergence = 7,
    DegenerateMetric = 8,
    Config = 9,
    Io = 10,
    Panic = 11,
}

/// Emergent-Hamiltonian construction route.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmfVariant {
    Exact1d = 0,
    Exact2dNn = 1,
    Exact2dTwoSpinNnn = 2,
    UnitaryExact = 3,
    Trunc1 = 4,
    Trunc2 = 5,
    Trunc1Appendix = 6,
    Trunc2Appendix = 7,
    Trunc1NnnAppendix = 8,
    SpinPromoted = 9,
}

impl From<EmfVariant> for EmergentVariant {
    fn from(v: EmfVariant) -> Self {
        match v {
            EmfVariant::Exact1d => EmergentVariant::Exact1d,
            EmfVariant::Exact2dNn => EmergentVariant::Exact2dNn,
            EmfVariant::Exact2dTwoSpinNnn => EmergentVariant::Exact2dTwoSpinNnn,
            EmfVariant::UnitaryExact => EmergentVariant::UnitaryExact,
            EmfVariant::Trunc1 => EmergentVariant::Trunc1,
            EmfVariant::Trunc2 => EmergentVariant::Trunc2,
            EmfVariant::Trunc1Appendix => EmergentVariant::Trunc1Appendix,
            EmfVariant::Trunc2Appendix => EmergentVariant::Trunc2Appendix,
            EmfVariant::Trunc1NnnAppendix => EmergentVariant::Trunc1NnnAppendix,
            EmfVariant::SpinPromoted => EmergentVariant::SpinPromoted,
        }
    }
}

/// Complex number with C layout.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmfComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for EmfComplex {
    fn from(z: C64) -> Self {
        EmfComplex { re: z.re, im: z.im }
    }
}

impl From<EmfComplex> for C64 {
    fn from(z: EmfComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Lattice model (engineered chain, rectangle or interacting two-spin model).
pub struct EmfModel(Model);

/// Fixed-particle-number Fock basis.
pub struct EmfBasis(Arc<FockBasis>);

/// Hermitian operator on a Fock basis.
pub struct EmfOperator(Generator);

/// Normalized state on a Fock basis.
pub struct EmfState(StateVector);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(EmfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Domain(_) => EmfStatus::Domain,
            Error::BasisMismatch(_) => EmfStatus::BasisMismatch,
            Error::Capacity { .. } => EmfStatus::Capacity,
            Error::Numerical(_) => EmfStatus::Numerical,
            Error::Convergence { .. } => EmfStatus::Convergence,
            Error::DegenerateMetric(_) => EmfStatus::DegenerateMetric,
            Error::Config { .. } => EmfStatus::Config,
            Error::Io(_) => EmfStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(EmfStatus::InvalidArgument, msg.into())
}

type Outcome = std::result::Result<(), Failure>;

fn guard(f: impl FnOnce() -> Outcome) -> EmfStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (EmfStatus::Ok, String::new()),
        Ok(Err(Failure(s, m))) => (s, m),
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            (EmfStatus::Panic, format!("panic: {m}"))
        }
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> std::result::Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(EmfStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> std::result::Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(EmfStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> std::result::Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure(EmfStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> std::result::Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure(EmfStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn path<'a>(p: *const c_char, what: &str) -> std::result::Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(Failure(EmfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn emf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes of the calling thread's last error message, excluding the
/// terminating NUL. Zero after a successful call.
#[no_mangle]
pub extern "C" fn emf_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copy the last error message into `buf` (truncated to `cap - 1` bytes and
/// NUL-terminated). Returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn emf_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Engineered chain of `len` sites.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_model_chain(len: usize, out: *mut *mut EmfModel) -> EmfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        emfreeze::LatticeGeometry::chain(len)?;
        *out = boxed(EmfModel(Model::Chain { len }));
        Ok(())
    })
}

/// `lx x ly` rectangle with engineered nearest-neighbour hopping and
/// diagonal hopping `j_cross`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_model_rect(
    lx: usize,
    ly: usize,
    j_cross: f64,
    out: *mut *mut EmfModel,
) -> EmfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        emfreeze::LatticeGeometry::rectangle(lx, ly)?;
        if !j_cross.is_finite() {
            return Err(invalid(format!("j_cross {j_cross} is not finite")));
        }
        *out = boxed(EmfModel(Model::Rect { lx, ly, j_cross }));
        Ok(())
    })
}

/// Interacting two-spin model on an `lx x ly` rectangle (single excitation).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_model_two_spin(lx: usize, ly: usize, out: *mut *mut EmfModel) -> EmfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        emfreeze::LatticeGeometry::rectangle(lx, ly)?;
        *out = boxed(EmfModel(Model::TwoSpin { lx, ly }));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from an `emf_model_*` constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn emf_model_free(model: *mut EmfModel) {
    free(model)
}

/// Basis of `particles` hardcore bosons on the model's lattice.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_basis_new(
    model: *const EmfModel,
    particles: usize,
    out: *mut *mut EmfBasis,
) -> EmfStatus {
    guard(|| {
        let model = deref(model, "model")?;
        let out = out_ptr(out, "out")?;
        let basis = FockBasis::new(model.0.geometry()?, particles)?;
        *out = boxed(EmfBasis(Arc::new(basis)));
        Ok(())
    })
}

/// Dimension of the basis, or 0 for a null handle.
///
/// # Safety
/// `basis` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emf_basis_dim(basis: *const EmfBasis) -> usize {
    basis.as_ref().map_or(0, |b| b.0.dim())
}

/// Occupation mask of basis state `index`.
///
/// # Safety
/// `basis` must be a live handle; `lo` and `hi` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_basis_state(
    basis: *const EmfBasis,
    index: usize,
    lo: *mut u64,
    hi: *mut u64,
) -> EmfStatus {
    guard(|| {
        let basis = deref(basis, "basis")?;
        let (lo, hi) = (out_ptr(lo, "lo")?, out_ptr(hi, "hi")?);
        if index >= basis.0.dim() {
            return Err(invalid(format!("index {index} out of range for dimension {}", basis.0.dim())));
        }
        let m = basis.0.state(index);
        *lo = m as u64;
        *hi = (m >> 64) as u64;
        Ok(())
    })
}

/// # Safety
/// `basis` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emf_basis_free(basis: *mut EmfBasis) {
    free(basis)
}

fn operator_out(out: *mut *mut EmfOperator, g: Generator) {
    // SAFETY: checked non-null by the caller before computing `g`.
    unsafe { *out = boxed(EmfOperator(g)) }
}

/// Entangling Hamiltonian `H_f` of `model` on `basis`.
///
/// # Safety
/// `model` and `basis` must be live handles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_operator_hf(
    model: *const EmfModel,
    basis: *const EmfBasis,
    out: *mut *mut EmfOperator,
) -> EmfStatus {
    guard(|| {
        let (model, basis) = (deref(model, "model")?, deref(basis, "basis")?);
        out_ptr(out, "out")?;
        operator_out(out, model.0.hf(&basis.0)?.into());
        Ok(())
    })
}

/// Initial Hamiltonian `H_0` of `model` on `basis`.
///
/// # Safety
/// `model` and `basis` must be live handles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_operator_h0(
    model: *const EmfModel,
    basis: *const EmfBasis,
    out: *mut *mut EmfOperator,
) -> EmfStatus {
    guard(|| {
        let (model, basis) = (deref(model, "model")?, deref(basis, "basis")?);
        out_ptr(out, "out")?;
        operator_out(out, model.0.h0(&basis.0)?.into());
        Ok(())
    })
}

/// Emergent Hamiltonian `M(t)` built by `variant`.
///
/// # Safety
/// `model` and `basis` must be live handles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_operator_emergent(
    model: *const EmfModel,
    basis: *const EmfBasis,
    variant: EmfVariant,
    t: f64,
    out: *mut *mut EmfOperator,
) -> EmfStatus {
    guard(|| {
        let (model, basis) = (deref(model, "model")?, deref(basis, "basis")?);
        out_ptr(out, "out")?;
        if !t.is_finite() {
            return Err(invalid(format!("time {t} is not finite")));
        }
        let m = emergent::build(variant.into(), &model.0, Some(&basis.0), t)?;
        operator_out(out, Generator::try_from(m)?);
        Ok(())
    })
}

/// Dimension of the operator, or 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emf_operator_dim(op: *const EmfOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.dim())
}

/// `output = op * input`; both buffers hold `len` entries, which must equal
/// the operator dimension.
///
/// # Safety
/// `op` must be a live handle; `input` and `output` valid for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn emf_operator_apply(
    op: *const EmfOperator,
    input: *const EmfComplex,
    output: *mut EmfComplex,
    len: usize,
) -> EmfStatus {
    guard(|| {
        use emfreeze::sparse::HermitianAction;
        let op = deref(op, "op")?;
        if len != op.0.dim() {
            return Err(Failure(
                EmfStatus::BasisMismatch,
                format!("buffer length {len} vs operator dimension {}", op.0.dim()),
            ));
        }
        let x = DVector::from_iterator(len, slice(input, len, "input")?.iter().map(|&z| C64::from(z)));
        let y = op.0.act(&x);
        for (o, v) in slice_mut(output, len, "output")?.iter_mut().zip(y.iter()) {
            *o = (*v).into();
        }
        Ok(())
    })
}

/// `<psi|op|psi>`
///
/// # Safety
/// `op` and `state` must be live handles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_operator_expectation(
    op: *const EmfOperator,
    state: *const EmfState,
    out: *mut f64,
) -> EmfStatus {
    guard(|| {
        let (op, state) = (deref(op, "op")?, deref(state, "state")?);
        *out_ptr(out, "out")? = expectation(&op.0, &state.0)?;
        Ok(())
    })
}

/// Overlap metric `<psi|M|psi> / ||M psi||`, one exactly for a positive
/// eigenstate of `M`.
///
/// # Safety
/// `op` and `state` must be live handles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_operator_overlap_metric(
    op: *const EmfOperator,
    state: *const EmfState,
    out: *mut f64,
) -> EmfStatus {
    guard(|| {
        let (op, state) = (deref(op, "op")?, deref(state, "state")?);
        *out_ptr(out, "out")? = overlap_metric(&op.0, &state.0)?;
        Ok(())
    })
}

/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emf_operator_free(op: *mut EmfOperator) {
    free(op)
}

/// Product state with the listed sites occupied.
///
/// # Safety
/// `basis` must be a live handle; `sites` valid for `n` elements; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_state_from_sites(
    basis: *const EmfBasis,
    sites: *const usize,
    n: usize,
    out: *mut *mut EmfState,
) -> EmfStatus {
    guard(|| {
        let basis = deref(basis, "basis")?;
        let sites = slice(sites, n, "sites")?;
        let out = out_ptr(out, "out")?;
        let mask: Mask = basis.0.mask_from_sites(sites)?;
        *out = boxed(EmfState(StateVector::from_bitmask(basis.0.clone(), mask)?));
        Ok(())
    })
}

/// State with the given amplitudes, which are normalized on entry.
///
/// # Safety
/// `basis` must be a live handle; `amps` valid for `len` elements; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_state_from_amplitudes(
    basis: *const EmfBasis,
    amps: *const EmfComplex,
    len: usize,
    out: *mut *mut EmfState,
) -> EmfStatus {
    guard(|| {
        let basis = deref(basis, "basis")?;
        let amps = slice(amps, len, "amps")?;
        let out = out_ptr(out, "out")?;
        let v = DVector::from_iterator(len, amps.iter().map(|&z| C64::from(z)));
        *out = boxed(EmfState(StateVector::normalized(basis.0.clone(), v)?));
        Ok(())
    })
}

/// Number of amplitudes, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emf_state_len(state: *const EmfState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// Copy the amplitudes into `out`, which holds `len` entries equal to the
/// state dimension.
///
/// # Safety
/// `state` must be a live handle; `out` valid for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn emf_state_amplitudes(
    state: *const EmfState,
    out: *mut EmfComplex,
    len: usize,
) -> EmfStatus {
    guard(|| {
        let state = deref(state, "state")?;
        if len != state.0.dim() {
            return Err(Failure(
                EmfStatus::BasisMismatch,
                format!("buffer length {len} vs state dimension {}", state.0.dim()),
            ));
        }
        for (o, v) in slice_mut(out, len, "out")?.iter_mut().zip(state.0.amplitudes().iter()) {
            *o = (*v).into();
        }
        Ok(())
    })
}

/// New state `exp(-i op t) state`.
///
/// # Safety
/// `state` and `op` must be live handles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_state_evolve(
    state: *const EmfState,
    op: *const EmfOperator,
    t: f64,
    out: *mut *mut EmfState,
) -> EmfStatus {
    guard(|| {
        let (state, op) = (deref(state, "state")?, deref(op, "op")?);
        let out = out_ptr(out, "out")?;
        let prop = Propagator::auto(op.0.clone())?;
        *out = boxed(EmfState(prop.propagate(&state.0, t)?));
        Ok(())
    })
}

/// `<a|b>`
///
/// # Safety
/// `a` and `b` must be live handles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_state_inner(
    a: *const EmfState,
    b: *const EmfState,
    out: *mut EmfComplex,
) -> EmfStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        *out_ptr(out, "out")? = a.0.inner(&b.0)?.into();
        Ok(())
    })
}

/// Entanglement entropy in bits across the standard half cut (left half of
/// a chain, bottom rows of a rectangle).
///
/// # Safety
/// `state` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn emf_state_entropy_half(state: *const EmfState, out: *mut f64) -> EmfStatus {
    guard(|| {
        let state = deref(state, "state")?;
        let part = Bipartition::half(state.0.basis().geometry())?;
        *out_ptr(out, "out")? = entropy_schmidt(&state.0, &part)?;
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn emf_state_free(state: *mut EmfState) {
    free(state)
}

/// GHZ fidelity of one-axis twisting with `qubits` spins at each of `n`
/// times, written to `out`.
///
/// # Safety
/// `times` and `out` must be valid for `n` elements.
#[no_mangle]
pub unsafe extern "C" fn emf_ghz_fidelity(
    qubits: usize,
    lambda: f64,
    times: *const f64,
    n: usize,
    out: *mut f64,
) -> EmfStatus {
    guard(|| {
        let times = slice(times, n, "times")?;
        let out = slice_mut(out, n, "out")?;
        let f = oat::ghz_fidelity_series(qubits, lambda, times)?;
        out.copy_from_slice(&f);
        Ok(())
    })
}

/// Run the experiment described by the TOML file at `config_path`. A null
/// `out_dir` uses the directory named in the config.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out_dir` null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn emf_run_config(config_path: *const c_char, out_dir: *const c_char) -> EmfStatus {
    guard(|| {
        let cfg_path = path(config_path, "config_path")?;
        let out = if out_dir.is_null() {
            None
        } else {
            Some(path(out_dir, "out_dir")?)
        };
        let text = std::fs::read_to_string(cfg_path).map_err(|e| Failure(EmfStatus::Io, e.to_string()))?;
        let cfg = runner::parse_config(&text)?;
        runner::run_experiment(&cfg, out)?;
        Ok(())
    })
}
