//! Named experiment runs: configuration, execution and persistent output.
//!
//! Every experiment is deterministic. Independent parameter points (lattice
//! sizes, couplings, qubit counts) run concurrently and are reassembled in
//! configuration order, so output bytes do not depend on the thread count.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

pub use config::{parse_config, serialize_config, ExperimentConfig, ExperimentKind, InitialState, Resolved, TimeGrid};
pub use output::{format_f64, Manifest, ResultTable, RunWriter};

use crate::emergent::{self, EmergentVariant, Model, NestedCommutators};
use crate::error::{domain, Error, Result};
use crate::evolution::{bloch_trajectory, Generator, Propagator};
use crate::lattice::{hamming_distribution, FockBasis, LatticeGeometry};
use crate::observables::{entropy_schmidt, product_state, schmidt_spectrum, site_densities, Bipartition};
use crate::sparse::{expectation, HermitianAction, SparseHermitian, StateVector};
use crate::spectral::{stats_timeseries, ElementStats};
use crate::{oat, C64};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "EMFREEZE_THREADS";

/// Build the global thread pool honouring [`THREADS_ENV`]; call once at start-up.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| Error::Config {
            path: THREADS_ENV.into(),
            message: format!("expected a positive integer, got {v:?}"),
        })?;
        if n == 0 {
            return Err(Error::Config {
                path: THREADS_ENV.into(),
                message: "must be at least 1".into(),
            });
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Outcome of [`run_experiment`].
#[derive(Debug)]
pub struct RunOutput {
    pub tables: Vec<ResultTable>,
    pub files: Vec<PathBuf>,
    pub manifest: Manifest,
}

/// Compute the tables of an experiment without touching the file system.
pub fn compute(cfg: &ExperimentConfig) -> Result<Vec<ResultTable>> {
    let r = cfg.resolve()?;
    match r.experiment {
        ExperimentKind::Fig2Entropy => fig2_entropy(&r),
        ExperimentKind::Fig2HammingSchmidt => fig2_hamming_schmidt(&r),
        ExperimentKind::Fig3SingleParticle => fig3_single_particle(&r),
        ExperimentKind::Fig4Overlap => fig4_overlap(&r),
        ExperimentKind::Fig5OverlapJcross => fig5_overlap_jcross(&r),
        ExperimentKind::Fig6Spectral => fig6_spectral(&r),
        ExperimentKind::Fig7Ghz => fig7_ghz(&r),
        ExperimentKind::FreezeDemo | ExperimentKind::Custom => lattice_run(&r),
    }
}

/// Run `cfg`, writing one CSV per table and `manifest.json` into `out`
/// (or the configured output directory, or `./<experiment>`).
pub fn run_experiment(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<RunOutput> {
    let started = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let resolved = cfg.resolve()?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(cfg.experiment.name()));
    let tables = compute(cfg)?;

    let mut writer = RunWriter::new(&dir)?;
    let mut entries = Vec::new();
    for t in &tables {
        let csv = t.to_csv();
        writer.write(&t.file_name(), csv.as_bytes())?;
        entries.push(output::FileEntry {
            name: t.file_name(),
            rows: t.rows.len(),
            columns: t.columns.clone(),
            sha256: output::sha256_hex(csv.as_bytes()),
        });
    }
    let config_toml = serialize_config(cfg)?;
    let manifest = Manifest {
        experiment: cfg.experiment.name().into(),
        version: crate::VERSION.into(),
        config: serde_json::to_value(cfg).map_err(json_err)?,
        config_sha256: output::sha256_hex(config_toml.as_bytes()),
        config_toml,
        resolved: resolved_json(&resolved),
        tolerances: serde_json::json!({
            "hermitian": crate::sparse::HERMITIAN_TOL,
            "state_norm": crate::sparse::NORM_TOL,
            "krylov_local_error": crate::evolution::KRYLOV_TOL,
            "krylov_dim": crate::evolution::KRYLOV_DIM,
            "dense_propagation_cap": crate::evolution::DENSE_PROPAGATION_CAP,
            "schmidt_cutoff": crate::observables::SCHMIDT_CUTOFF,
            "norm_failure": crate::evolution::NORM_FAIL,
        }),
        threads: rayon::current_num_threads(),
        started_unix,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        files: entries,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(json_err)?;
    writer.write("manifest.json", json.as_bytes())?;
    let files = writer.commit();
    Ok(RunOutput {
        tables,
        files,
        manifest,
    })
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Numerical(format!("manifest serialization failed: {e}"))
}

fn resolved_json(r: &Resolved) -> serde_json::Value {
    serde_json::json!({
        "chain_lengths": r.chain_lengths,
        "rectangles": r.rectangles,
        "initial_state": r.initial_state,
        "particles": r.particles,
        "j_cross": r.j_cross,
        "lambda": r.lambda,
        "qubits": r.qubits,
        "variant": r.variant,
        "t_freeze": r.t_freeze,
        "time_samples": r.times.len(),
        "time_first": r.times.first(),
        "time_last": r.times.last(),
        "snapshots": r.snapshots,
        "bins": r.bins,
    })
}

fn initial(r: &Resolved, geometry: LatticeGeometry) -> Result<StateVector> {
    let init = r
        .initial_state
        .as_ref()
        .ok_or_else(|| Error::Domain("no initial state configured".into()))?;
    product_state(geometry, init.mask(geometry)?)
}

/// States at `times`: `H_f` evolution, switching to `M(t_freeze)` after
/// `t_freeze` when a freeze is given. Also returns `psi(t_freeze)`.
fn trajectory(
    psi0: &StateVector,
    hf: &Propagator,
    freeze: Option<(f64, &Propagator)>,
    times: &[f64],
) -> Result<(Vec<StateVector>, Option<StateVector>)> {
    let Some((tf, m)) = freeze else {
        return Ok((hf.series(psi0, times)?, None));
    };
    let split = times.partition_point(|&t| t <= tf);
    let mut states = hf.series(psi0, &times[..split])?;
    let at_freeze = hf.propagate(psi0, tf)?;
    let deltas: Vec<f64> = times[split..].iter().map(|t| t - tf).collect();
    states.extend(m.series(&at_freeze, &deltas)?);
    Ok((states, Some(at_freeze)))
}

fn freeze_propagator(
    variant: EmergentVariant,
    model: &Model,
    basis: &Arc<FockBasis>,
    tf: f64,
) -> Result<Propagator> {
    let m = emergent::build(variant, model, Some(basis), tf)?;
    Propagator::auto(Generator::try_from(m)?)
}

fn fig2_entropy(r: &Resolved) -> Result<Vec<ResultTable>> {
    let parts: Vec<ResultTable> = r
        .chain_lengths
        .par_iter()
        .map(|&len| -> Result<ResultTable> {
            let g = LatticeGeometry::chain(len)?;
            let model = Model::Chain { len };
            let psi0 = initial(r, g)?;
            let basis = psi0.basis().clone();
            let hf = Propagator::auto(model.hf(&basis)?)?;
            let mp = match r.t_freeze {
                Some(tf) => Some((tf, freeze_propagator(r.variant.unwrap_or(EmergentVariant::Exact1d), &model, &basis, tf)?)),
                None => None,
            };
            let (states, _) = trajectory(&psi0, &hf, mp.as_ref().map(|(t, p)| (*t, p)), &r.times)?;
            let cut = Bipartition::half_chain(len)?;
            let max = len as f64 / 2.0;
            let mut t = ResultTable::new("fig2_entropy", &["t", "entropy_bits", "entropy_over_max", "L"]);
            for (time, psi) in r.times.iter().zip(&states) {
                let s = entropy_schmidt(psi, &cut)?;
                t.push(vec![*time, s, s / max, len as f64]);
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    Ok(vec![concat(parts)])
}

fn concat(parts: Vec<ResultTable>) -> ResultTable {
    let mut it = parts.into_iter();
    let mut first = it.next().expect("at least one part");
    for p in it {
        first.extend(p);
    }
    first
}

fn fig2_hamming_schmidt(r: &Resolved) -> Result<Vec<ResultTable>> {
    let parts: Vec<ResultTable> = r
        .chain_lengths
        .par_iter()
        .map(|&len| -> Result<ResultTable> {
            let g = LatticeGeometry::chain(len)?;
            let psi0 = initial(r, g)?;
            let reference = psi0.basis().state(
                psi0.amplitudes()
                    .iter()
                    .position(|a| a.norm() > 0.5)
                    .expect("product state"),
            );
            let hf = Propagator::auto(Model::Chain { len }.hf(psi0.basis())?)?;
            let states = hf.series(&psi0, &r.times)?;
            let cut = Bipartition::half_chain(len)?;
            let mut t = ResultTable::new(
                "fig2_hamming_schmidt",
                &["t", "L", "index", "hamming_weight", "schmidt_lambda"],
            );
            for (time, psi) in r.times.iter().zip(&states) {
                let ham = hamming_distribution(psi, reference)?;
                let lam = schmidt_spectrum(psi, &cut)?;
                let n = ham.len().max(lam.len());
                for k in 0..n {
                    let h = ham.get(k).map_or(0.0, |p| p.1);
                    let l = lam.get(k).copied().unwrap_or(0.0);
                    t.push(vec![*time, len as f64, k as f64, h, l]);
                }
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    Ok(vec![concat(parts)])
}

fn fig3_single_particle(r: &Resolved) -> Result<Vec<ResultTable>> {
    let [lx, ly] = r.rectangles[0];
    let g = LatticeGeometry::rectangle(lx, ly)?;
    let psi0 = initial(r, g)?;
    if psi0.basis().n_particles() != 1 {
        return domain("fig3_single_particle needs a single excitation");
    }
    let basis = psi0.basis().clone();
    let ns = g.n_sites();
    let mut columns: Vec<String> = [
        "t", "model", "entropy_bits", "s1x", "s1y", "s1z", "s2x", "s2y", "s2z", "Lx", "Ly",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    columns.extend((0..ns).map(|k| format!("n_{k}")));
    let cut = Bipartition::bottom_rows(lx, ly)?;

    let models = [
        (Model::Rect { lx, ly, j_cross: 0.0 }, EmergentVariant::Exact2dNn),
        (Model::TwoSpin { lx, ly }, EmergentVariant::Exact2dTwoSpinNnn),
    ];
    let parts: Vec<ResultTable> = models
        .par_iter()
        .enumerate()
        .map(|(code, (model, variant))| -> Result<ResultTable> {
            let hf = Propagator::new(model.hf(&basis)?, crate::evolution::Method::DenseEigen)?;
            let mp = match r.t_freeze {
                Some(tf) => Some((tf, freeze_propagator(*variant, model, &basis, tf)?)),
                None => None,
            };
            let (states, _) = trajectory(&psi0, &hf, mp.as_ref().map(|(t, p)| (*t, p)), &r.times)?;
            let bloch = bloch_trajectory(&states, lx, ly)?;
            let mut t = ResultTable::with_columns("fig3_single_particle", columns.clone());
            for ((time, psi), b) in r.times.iter().zip(&states).zip(&bloch) {
                let mut row = vec![*time, code as f64, entropy_schmidt(psi, &cut)?];
                row.extend_from_slice(b);
                row.extend([lx as f64, ly as f64]);
                row.extend(site_densities(psi));
                t.push(row);
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    Ok(vec![concat(parts)])
}

/// `<psi|M|psi>/||M psi||` along a trajectory for one emergent variant.
fn overlap_series(
    variant: EmergentVariant,
    model: &Model,
    basis: &Arc<FockBasis>,
    states: &[StateVector],
    times: &[f64],
) -> Result<Vec<f64>> {
    match variant {
        EmergentVariant::Trunc1 | EmergentVariant::Trunc2 => {
            let order = if variant == EmergentVariant::Trunc1 { 1 } else { 2 };
            let nc = NestedCommutators::new(&model.hf(basis)?, &model.h0(basis)?, order)?;
            times
                .iter()
                .zip(states)
                .map(|(&t, psi)| {
                    let v = psi.amplitudes();
                    let mut mv = nc.h0.matrix().matvec(v);
                    mv.axpy(C64::new(0.0, -t), &nc.h1.matrix().matvec(v), C64::new(1.0, 0.0));
                    if let Some(h2) = &nc.h2 {
                        mv.axpy(C64::new(-t * t / 2.0, 0.0), &h2.matrix().matvec(v), C64::new(1.0, 0.0));
                    }
                    metric(v, &mv)
                })
                .collect()
        }
        _ => times
            .iter()
            .zip(states)
            .map(|(&t, psi)| {
                let m = emergent::build(variant, model, Some(basis), t)?;
                let op = m
                    .as_action()
                    .ok_or_else(|| Error::Domain("overlap needs a lattice operator".into()))?;
                crate::observables::overlap_metric(op, psi)
            })
            .collect(),
    }
}

fn metric(v: &nalgebra::DVector<C64>, mv: &nalgebra::DVector<C64>) -> Result<f64> {
    let n = mv.norm();
    if n < 1e-14 {
        return Err(Error::DegenerateMetric(n));
    }
    Ok(v.dotc(mv).re / n)
}

fn fig4_overlap(r: &Resolved) -> Result<Vec<ResultTable>> {
    let points: Vec<([usize; 2], f64)> = r
        .rectangles
        .iter()
        .flat_map(|&rc| r.j_cross.iter().map(move |&j| (rc, j)))
        .collect();
    let parts: Vec<ResultTable> = points
        .par_iter()
        .map(|&([lx, ly], j)| -> Result<ResultTable> {
            let g = LatticeGeometry::rectangle(lx, ly)?;
            let model = Model::Rect { lx, ly, j_cross: j };
            let psi0 = initial(r, g)?;
            let basis = psi0.basis().clone();
            let states = Propagator::auto(model.hf(&basis)?)?.series(&psi0, &r.times)?;
            let m1 = overlap_series(EmergentVariant::Trunc1, &model, &basis, &states, &r.times)?;
            let m2 = overlap_series(EmergentVariant::Trunc2, &model, &basis, &states, &r.times)?;
            let ms = if j == 0.0 {
                overlap_series(EmergentVariant::SpinPromoted, &model, &basis, &states, &r.times)?
            } else {
                vec![f64::NAN; r.times.len()]
            };
            let mut t = ResultTable::new(
                "fig4_overlap",
                &["t", "overlap_m1", "overlap_m2", "overlap_mspin", "Lx", "Ly", "J_cross"],
            );
            for k in 0..r.times.len() {
                t.push(vec![r.times[k], m1[k], m2[k], ms[k], lx as f64, ly as f64, j]);
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    Ok(vec![concat(parts)])
}

fn fig5_overlap_jcross(r: &Resolved) -> Result<Vec<ResultTable>> {
    let variant = r.variant.unwrap_or(EmergentVariant::Trunc2);
    let points: Vec<([usize; 2], f64)> = r
        .rectangles
        .iter()
        .flat_map(|&rc| r.j_cross.iter().map(move |&j| (rc, j)))
        .collect();
    let parts: Vec<ResultTable> = points
        .par_iter()
        .map(|&([lx, ly], j)| -> Result<ResultTable> {
            let g = LatticeGeometry::rectangle(lx, ly)?;
            let model = Model::Rect { lx, ly, j_cross: j };
            let psi0 = initial(r, g)?;
            let basis = psi0.basis().clone();
            let states = Propagator::auto(model.hf(&basis)?)?.series(&psi0, &r.times)?;
            let ov = overlap_series(variant, &model, &basis, &states, &r.times)?;
            let mut t = ResultTable::new("fig5_overlap_jcross", &["t", "overlap", "J_cross", "Lx", "Ly"]);
            for (time, o) in r.times.iter().zip(ov) {
                t.push(vec![*time, o, j, lx as f64, ly as f64]);
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    Ok(vec![concat(parts)])
}

fn fig6_spectral(r: &Resolved) -> Result<Vec<ResultTable>> {
    let n = r.particles.expect("validated");
    let mut times: Vec<f64> = r.times.iter().chain(&r.snapshots).copied().collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let points: Vec<([usize; 2], f64)> = r
        .rectangles
        .iter()
        .flat_map(|&rc| r.j_cross.iter().map(move |&j| (rc, j)))
        .collect();
    let results: Vec<(ResultTable, ResultTable)> = points
        .iter()
        .map(|&([lx, ly], j)| -> Result<(ResultTable, ResultTable)> {
            let g = LatticeGeometry::rectangle(lx, ly)?;
            let basis = Arc::new(FockBasis::new(g, n)?);
            let model = Model::Rect { lx, ly, j_cross: j };
            let cap = crate::linalg::DEFAULT_DENSE_CAP;
            if basis.dim() > cap {
                return Err(Error::Capacity { dim: basis.dim(), cap });
            }
            let hf = model.hf(&basis)?.to_dense();
            let h0 = model.h0(&basis)?.to_dense();
            let stats = stats_timeseries(&hf, &h0, &times, r.bins)?;
            let tail = [lx as f64, ly as f64, n as f64, j];
            let mut main = ResultTable::new(
                "fig6_spectral",
                &[
                    "t", "diag_mean", "diag_std", "offdiag_std_re", "offdiag_std_im", "r_ratio",
                    "offdiag_std", "offdiag_mean_re", "offdiag_mean_im", "Lx", "Ly", "particles", "J_cross",
                ],
            );
            let mut hist = ResultTable::new(
                "fig6_histograms",
                &["t", "class", "bin_left", "bin_right", "density", "Lx", "Ly", "particles", "J_cross"],
            );
            for s in &stats {
                let mut row = vec![
                    s.t, s.diag_mean, s.diag_std, s.offdiag_re_std, s.offdiag_im_std, s.r_ratio,
                    s.offdiag_std, s.offdiag_re_mean, s.offdiag_im_mean,
                ];
                row.extend(tail);
                main.push(row);
                if r.snapshots.contains(&s.t) {
                    push_histograms(&mut hist, s, &tail);
                }
            }
            Ok((main, hist))
        })
        .collect::<Result<_>>()?;
    let (mains, hists): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(vec![concat(mains), concat(hists)])
}

fn push_histograms(table: &mut ResultTable, s: &ElementStats, tail: &[f64]) {
    for (class, h) in [(0.0, &s.hist_diag), (1.0, &s.hist_re), (2.0, &s.hist_im)] {
        for (k, d) in h.density.iter().enumerate() {
            let mut row = vec![s.t, class, h.edges[k], h.edges[k + 1], *d];
            row.extend_from_slice(tail);
            table.push(row);
        }
    }
}

fn fig7_ghz(r: &Resolved) -> Result<Vec<ResultTable>> {
    let parts: Vec<ResultTable> = r
        .qubits
        .par_iter()
        .map(|&l| -> Result<ResultTable> {
            let fid = match r.t_freeze {
                None => oat::ghz_fidelity_series(l, r.lambda, &r.times)?,
                Some(tf) => {
                    let split = r.times.partition_point(|&t| t <= tf);
                    let mut f = oat::ghz_fidelity_series(l, r.lambda, &r.times[..split])?;
                    let deltas: Vec<f64> = r.times[split..].iter().map(|t| t - tf).collect();
                    f.extend(oat::oat_freeze(l, r.lambda, tf, &deltas)?.fidelities);
                    f
                }
            };
            let mut t = ResultTable::new("fig7_ghz", &["t", "fidelity", "L"]);
            for (time, f) in r.times.iter().zip(fid) {
                t.push(vec![*time, f, l as f64]);
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    Ok(vec![concat(parts)])
}

/// `freeze_demo` and `custom`: one lattice, optional freeze, generic
/// diagnostics along the trajectory.
fn lattice_run(r: &Resolved) -> Result<Vec<ResultTable>> {
    let j = r.j_cross[0];
    let (g, model) = match (r.chain_lengths.first(), r.rectangles.first()) {
        (Some(&len), None) => (LatticeGeometry::chain(len)?, Model::Chain { len }),
        (None, Some(&[lx, ly])) => (LatticeGeometry::rectangle(lx, ly)?, Model::Rect { lx, ly, j_cross: j }),
        _ => return domain("exactly one lattice is required"),
    };
    let psi0 = initial(r, g)?;
    let basis = psi0.basis().clone();
    let hf = Propagator::auto(model.hf(&basis)?)?;
    let h0: SparseHermitian = model.h0(&basis)?;
    let freeze = match (r.t_freeze, r.variant) {
        (Some(tf), Some(v)) => Some((tf, freeze_propagator(v, &model, &basis, tf)?)),
        (Some(_), None) => return domain("a freeze time needs an emergent variant"),
        _ => None,
    };
    let (states, at_freeze) = trajectory(&psi0, &hf, freeze.as_ref().map(|(t, p)| (*t, p)), &r.times)?;
    let cut = Bipartition::half(g)?;
    let mut cols = vec!["t", "entropy_bits", "return_overlap", "energy_h0"];
    if at_freeze.is_some() {
        cols.push("frozen_overlap");
    }
    let name = r.experiment.name();
    let mut t = ResultTable::new(name, &cols);
    for (time, psi) in r.times.iter().zip(&states) {
        let mut row = vec![
            *time,
            entropy_schmidt(psi, &cut)?,
            psi0.inner(psi)?.norm(),
            expectation(&h0 as &dyn HermitianAction, psi)?,
        ];
        if let Some(f) = &at_freeze {
            row.push(f.inner(psi)?.norm());
        }
        t.push(row);
    }
    Ok(vec![t])
}
