//! Acceptance suite. Prints one PASS/FAIL line per criterion, followed by the
//! failing sub-checks, and exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use emfreeze::emergent::{
    self, trunc_appendix_nn, trunc_appendix_nnn, trunc_numeric, unitary_exact, Conjugator, EmergentVariant,
    Model, NestedCommutators,
};
use emfreeze::evolution::{run_freeze, FreezePlan, Generator, Method, Propagator};
use emfreeze::lattice::hamming_distribution;
use emfreeze::linalg::{max_abs_diff, HermitianEigen, DEFAULT_DENSE_CAP};
use emfreeze::observables::{
    bell_product_state, chain_single_particle_hf, entropy_freefermion_1d, entropy_schmidt, schmidt_spectrum,
    product_state, site_densities, Bipartition, NamedState, SlaterState,
};
use emfreeze::runner::{self, parse_config, ExperimentKind, ResultTable};
use emfreeze::sparse::{apply, expectation, realize, HermitianAction};
use emfreeze::spectral::{spectrum_check, stats_timeseries};
use emfreeze::{oat, C64};
use emfreeze::{FockBasis, LatticeGeometry, Result, StateVector};

#[derive(Default)]
struct Checks {
    items: Vec<(String, bool)>,
    notes: Vec<String>,
}

impl Checks {
    fn check(&mut self, label: impl Into<String>, ok: bool) {
        self.items.push((label.into(), ok));
    }

    /// Diagnostic printed with the criterion, never gating.
    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn chain_state(len: usize, s: NamedState) -> Result<(StateVector, Propagator)> {
    let psi0 = s.state(LatticeGeometry::chain(len)?)?;
    let hf = Model::Chain { len }.hf(psi0.basis())?;
    Ok((psi0, Propagator::auto(hf)?))
}

fn half_entropy(psi: &StateVector) -> Result<f64> {
    entropy_schmidt(psi, &Bipartition::half(psi.basis().geometry())?)
}

fn c1_max_entanglement(ck: &mut Checks) -> Result<()> {
    for len in [8, 12, 16] {
        let (psi0, hf) = chain_state(len, NamedState::DensityWave)?;
        let psi = hf.propagate(&psi0, PI / 2.0)?;
        let part = Bipartition::half_chain(len)?;
        let smax = len as f64 / 2.0;
        let ratio = entropy_schmidt(&psi, &part)? / smax;
        ck.check(format!("L={len} S/Smax={ratio:.12}"), (ratio - 1.0).abs() < 1e-8);

        let lam = schmidt_spectrum(&psi, &part)?;
        let want = 2f64.powf(-(len as f64) / 4.0);
        let n_flat = lam.iter().filter(|&&l| (l - want).abs() < 1e-8).count();
        ck.check(
            format!("L={len} Schmidt count={} flat={n_flat} expected {}", lam.len(), 1usize << (len / 2)),
            lam.len() == 1 << (len / 2) && n_flat == lam.len(),
        );

        let sites: Vec<usize> = (0..len).step_by(2).collect();
        let h1 = HermitianEigen::new(&chain_single_particle_hf(len));
        let slater = SlaterState::from_sites(len, &sites)?.evolve(&h1, PI / 2.0);
        let ff = entropy_freefermion_1d(&slater, psi0.basis().geometry(), &part)?;
        ck.check(format!("L={len} free-fermion S={ff:.12}"), (ff - smax).abs() < 1e-8);
    }
    Ok(())
}

fn c2_bell_product(ck: &mut Checks) -> Result<()> {
    for len in [4, 8, 12] {
        let (psi0, hf) = chain_state(len, NamedState::DensityWave)?;
        let psi = hf.propagate(&psi0, PI / 2.0)?;
        let bell = bell_product_state(len)?;
        let ov = bell.inner(&psi)?.norm();
        ck.check(format!("L={len} |<bell|psi(pi/2)>|={ov:.12}"), ov >= 1.0 - 1e-8);
        let conj = StateVector::new(bell.basis().clone(), bell.amplitudes().map(|z| z.conj()))?;
        let ov_conj = conj.inner(&psi)?.norm();
        let ov_3 = bell.inner(&hf.propagate(&psi0, 1.5 * PI)?)?.norm();
        ck.note(format!(
            "L={len} |<bell*|psi(pi/2)>|={ov_conj:.12} |<bell|psi(3pi/2)>|={ov_3:.12}"
        ));
    }
    Ok(())
}

fn c3_period_flip(ck: &mut Checks) -> Result<()> {
    for len in [8, 12] {
        let (psi0, hf) = chain_state(len, NamedState::DensityWave)?;
        let back = hf.propagate(&psi0, 2.0 * PI)?;
        let ov = psi0.inner(&back)?.norm();
        ck.check(format!("L={len} |<psi0|psi(2pi)>|={ov:.12}"), ov >= 1.0 - 1e-8);

        let flipped = hf.propagate(&psi0, PI)?;
        let reference = NamedState::DensityWave.mask(psi0.basis().geometry())?;
        let w = hamming_distribution(&flipped, reference)?[len].1;
        ck.check(format!("L={len} Hamming weight at d=L {w:.12}"), w >= 1.0 - 1e-8);

        let dw_max = half_entropy(&hf.propagate(&psi0, PI / 2.0)?)?;
        let (dw0, dwp) = chain_state(len, NamedState::DomainWall)?;
        let dw = half_entropy(&dwp.propagate(&dw0, PI / 2.0)?)?;
        ck.check(
            format!("L={len} domain wall S={dw:.6} < density wave S={dw_max:.6}"),
            dw < dw_max - 1e-6,
        );
    }
    Ok(())
}

fn c4_exact_freeze(ck: &mut Checks) -> Result<()> {
    let len = 8;
    let psi0 = NamedState::DensityWave.state(LatticeGeometry::chain(len)?)?;
    let plan = FreezePlan {
        model: Model::Chain { len },
        variant: EmergentVariant::Exact1d,
        t_freeze: 1.5 * PI,
        post_times: vec![1.0, 5.0, 10.0, 50.0],
    };
    let run = run_freeze(&psi0, &plan)?;
    let s0 = half_entropy(&run.at_freeze)?;
    for ((dt, ov), psi) in plan.post_times.iter().zip(run.overlaps()?).zip(&run.post) {
        let ds = (half_entropy(psi)? - s0).abs();
        ck.check(format!("Delta={dt} overlap={ov:.12}"), ov >= 1.0 - 1e-7);
        ck.check(format!("Delta={dt} |dS|={ds:.2e}"), ds < 1e-8);
    }
    Ok(())
}

fn eigen_residual(op: &dyn HermitianAction, psi: &StateVector) -> Result<f64> {
    let e = expectation(op, psi)?;
    let (mv, _) = apply(op, psi)?;
    Ok((mv - psi.amplitudes() * C64::new(e, 0.0)).norm())
}

fn c5_single_particle_2d(ck: &mut Checks) -> Result<()> {
    let (lx, ly) = (4, 4);
    let g = LatticeGeometry::rectangle(lx, ly)?;
    let psi0 = NamedState::SingleCorner.state(g)?;
    let basis = psi0.basis().clone();
    let cut = Bipartition::bottom_rows(lx, ly)?;

    let nn = Model::Rect { lx, ly, j_cross: 0.0 };
    let prop = Propagator::new(nn.hf(&basis)?, Method::DenseEigen)?;
    let grid = linspace(0.0, PI, 201);
    let states = prop.series(&psi0, &grid)?;
    let ent: Vec<f64> = states.iter().map(|p| entropy_schmidt(p, &cut)).collect::<Result<_>>()?;
    let (kmax, smax) = ent.iter().enumerate().fold((0, f64::MIN), |a, (k, &s)| if s > a.1 { (k, s) } else { a });
    let at_half = ent[100];
    ck.check(format!("NN S(pi/2)={at_half:.12}"), (at_half - 1.0).abs() < 1e-8);
    ck.check(
        format!("NN max S={smax:.12} at t={:.4}", grid[kmax]),
        smax <= 1.0 + 1e-8 && (grid[kmax] - PI / 2.0).abs() <= grid[1] + 1e-12,
    );
    let corner = site_densities(&states[200])[g.site(lx - 1, ly - 1)];
    ck.check(format!("NN opposite corner n(pi)={corner:.12}"), corner >= 1.0 - 1e-8);

    let m = Generator::try_from(emergent::build(EmergentVariant::Exact2dNn, &nn, Some(&basis), PI)?)?;
    let res = eigen_residual(&m, &states[200])?;
    ck.check(format!("NN freeze eigen residual={res:.2e}"), res < 1e-9);
    let run = run_freeze(
        &psi0,
        &FreezePlan { model: nn, variant: EmergentVariant::Exact2dNn, t_freeze: PI, post_times: vec![1.0, 10.0, 40.0] },
    )?;
    let worst = run.overlaps()?.into_iter().fold(1.0f64, f64::min);
    ck.check(format!("NN freeze 1-min overlap={:.2e}", 1.0 - worst), 1.0 - worst < 1e-9);

    let ts = Model::TwoSpin { lx, ly };
    let prop = Propagator::new(ts.hf(&basis)?, Method::DenseEigen)?;
    let grid = linspace(0.0, 2.0 * PI, 201);
    let ent: Vec<f64> = prop
        .series(&psi0, &grid)?
        .iter()
        .map(|p| entropy_schmidt(p, &cut))
        .collect::<Result<_>>()?;
    let smax = ent.iter().cloned().fold(f64::MIN, f64::max);
    ck.check(format!("two-spin S(pi)={:.12}", ent[100]), (ent[100] - 1.0).abs() < 1e-8);
    ck.check(format!("two-spin max S={smax:.12}"), smax <= 1.0 + 1e-8);

    for (n, period) in [(4, 4.0 * PI), (5, 2.0 * PI)] {
        let g = LatticeGeometry::rectangle(n, n)?;
        let psi0 = NamedState::SingleCorner.state(g)?;
        let hf = Model::TwoSpin { lx: n, ly: n }.hf(psi0.basis())?;
        let back = Propagator::new(hf, Method::DenseEigen)?.propagate(&psi0, period)?;
        let ov = psi0.inner(&back)?.norm();
        ck.check(format!("two-spin {n}x{n} recurrence={ov:.12}"), ov >= 1.0 - 1e-8);
    }
    Ok(())
}

fn c6_appendix_oracle(ck: &mut Checks) -> Result<()> {
    for (lx, ly, n) in [(4, 4, 2), (4, 4, 3), (3, 5, 2)] {
        let basis = Arc::new(FockBasis::new(LatticeGeometry::rectangle(lx, ly)?, n)?);
        let nn = Model::Rect { lx, ly, j_cross: 0.0 };
        let nc = NestedCommutators::new(&nn.hf(&basis)?, &nn.h0(&basis)?, 2)?;
        let j = 0.35;
        let nnn = Model::Rect { lx, ly, j_cross: j };
        let nc_x = NestedCommutators::new(&nnn.hf(&basis)?, &nnn.h0(&basis)?, 1)?;
        let mut worst = [0.0f64; 3];
        for t in [0.1, 0.7, 1.9] {
            for order in [1, 2] {
                let closed = realize(&trunc_appendix_nn(lx, ly, t, order)?, &basis)?.to_dense();
                let numeric = nc.series(t, order)?.to_dense();
                worst[order - 1] = worst[order - 1].max(max_abs_diff(&closed, &numeric));
            }
            let closed = realize(&trunc_appendix_nnn(lx, ly, j, t)?, &basis)?.to_dense();
            worst[2] = worst[2].max(max_abs_diff(&closed, &nc_x.series(t, 1)?.to_dense()));
        }
        for (name, w) in ["NN order 1", "NN order 2", "NNN order 1"].iter().zip(worst) {
            ck.check(format!("{lx}x{ly}/{n} {name} max diff={w:.2e}"), w < 1e-10);
        }
    }
    Ok(())
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn c7_truncation_scaling(ck: &mut Checks) -> Result<()> {
    let (lx, ly) = (4, 4);
    // For the two-corner state H_2 psi_0 = 0 and the first-order error starts at
    // t^3, so the slope is measured on the adjacent pair (0,0),(1,0).
    let g = LatticeGeometry::rectangle(lx, ly)?;
    let psi0 = product_state(g, 1 | 1 << g.site(1, 0))?;
    let basis = psi0.basis().clone();
    let model = Model::Rect { lx, ly, j_cross: 0.0 };
    let (hf, h0) = (model.hf(&basis)?, model.h0(&basis)?);
    let prop = Propagator::new(hf.clone(), Method::DenseEigen)?;
    let times: Vec<f64> = (0..13).map(|k| 10f64.powf(-3.0 + k as f64 / 6.0)).collect();
    for order in [1, 2] {
        let mut lx_ = Vec::new();
        let mut ly_ = Vec::new();
        for &t in &times {
            let psi = prop.propagate(&psi0, t)?;
            let exact = unitary_exact(&hf, &h0, t, DEFAULT_DENSE_CAP)?;
            let trunc = trunc_numeric(&hf, &h0, t, order)?;
            let err = (trunc.act(psi.amplitudes()) - exact.act(psi.amplitudes())).norm();
            lx_.push(t.ln());
            ly_.push(err.ln());
        }
        let s = slope(&lx_, &ly_);
        ck.check(format!("order {order} slope={s:.4} target {}", order + 1), (s - (order + 1) as f64).abs() <= 0.15);
    }
    Ok(())
}

fn run_table(toml: &str, name: &str) -> Result<ResultTable> {
    let cfg = parse_config(toml)?;
    Ok(runner::compute(&cfg)?
        .into_iter()
        .find(|t| t.name == name)
        .expect("experiment table present"))
}

fn c8_overlap_hierarchy(ck: &mut Checks) -> Result<()> {
    let t4 = run_table(
        "experiment = \"fig4_overlap\"\n[system]\nrectangles = [[6, 6], [10, 10]]\ninitial_state = \"two_corners\"\n[time]\npoints = [0.5, 1.0, 1.5]\n",
        "fig4_overlap",
    )?;
    let col = |c: &str| t4.column(c).unwrap();
    let (t, m1, m2, ms, lx) = (col("t"), col("overlap_m1"), col("overlap_m2"), col("overlap_mspin"), col("Lx"));
    for k in 0..t.len() {
        let n = lx[k] as usize;
        let text = format!(
            "{n}x{n} t={} spin={:.8} M2={:.8} M1={:.8} gaps {:.1e}, {:.1e}",
            t[k],
            ms[k],
            m2[k],
            m1[k],
            ms[k] - m2[k],
            m2[k] - m1[k]
        );
        if t[k] == 0.5 {
            ck.check(format!("{text} (need >= 1e-4)"), ms[k] - m2[k] >= 1e-4 && m2[k] - m1[k] >= 1e-4);
            ck.check(format!("{n}x{n} t=0.5 ordering spin > M2 > M1"), ms[k] > m2[k] && m2[k] > m1[k]);
        } else {
            ck.note(text);
        }
    }

    let t5 = run_table(
        "experiment = \"fig5_overlap_jcross\"\nvariant = \"trunc2\"\n[system]\nrectangles = [[6, 6]]\ninitial_state = \"three_corner_cluster\"\nj_cross = [0.0, 0.2, 0.4, 0.6]\n[time]\npoints = [1.0]\n",
        "fig5_overlap_jcross",
    )?;
    let ov = t5.column("overlap").unwrap();
    let shown: Vec<String> = ov.iter().map(|o| format!("{o:.6}")).collect();
    ck.check(
        format!("6x6 t=1 overlap over J=0,.2,.4,.6: {}", shown.join(", ")),
        ov.windows(2).all(|w| w[1] < w[0]),
    );

    let ts = run_table(
        "experiment = \"fig5_overlap_jcross\"\nvariant = \"trunc2\"\n[system]\nrectangles = [[4, 4], [6, 6]]\ninitial_state = \"three_corner_cluster\"\nj_cross = [0.2]\n[time]\npoints = [1.0]\n",
        "fig5_overlap_jcross",
    )?;
    let ov = ts.column("overlap").unwrap();
    ck.check(format!("J=0.2 t=1 overlap 4x4={:.6} > 6x6={:.6}", ov[0], ov[1]), ov[1] < ov[0]);
    Ok(())
}

fn c9_spectral(ck: &mut Checks) -> Result<()> {
    let (lx, ly, n, j) = (4, 4, 3, 0.6);
    let basis = Arc::new(FockBasis::new(LatticeGeometry::rectangle(lx, ly)?, n)?);
    let model = Model::Rect { lx, ly, j_cross: j };
    let hf = model.hf(&basis)?.to_dense();
    let h0 = model.h0(&basis)?.to_dense();

    let conj = Conjugator::new(&hf, &h0);
    for t in [0.5, 5.0, 40.0] {
        let d = spectrum_check(&conj.at(t), &h0)?.max_deviation;
        ck.check(format!("isospectral t={t} dev={d:.2e}"), d < 1e-9);
    }

    let mut times = linspace(0.0, 40.0, 81);
    times.extend([0.5, 5.0]);
    times.sort_by(f64::total_cmp);
    times.dedup();
    let stats = stats_timeseries(&hf, &h0, &times, None)?;
    let drift = stats.iter().map(|s| (s.diag_mean - stats[0].diag_mean).abs()).fold(0.0, f64::max);
    ck.check(format!("diag_mean drift={drift:.2e}"), drift < 1e-9);
    ck.check(format!("sigma_off(0)={:.2e}", stats[0].offdiag_std), stats[0].offdiag_std < 1e-12);

    let late: Vec<f64> = stats.iter().filter(|s| s.t >= 30.0).map(|s| s.offdiag_std).collect();
    let (lo, hi) = late.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    let rel = (hi - lo) / hi;
    ck.check(format!("sigma_off relative change over [30,40]={rel:.4}"), rel < 0.2);

    let r = stats.last().unwrap().r_ratio;
    let rmean = stats.iter().filter(|s| s.t >= 30.0).map(|s| s.r_ratio).sum::<f64>() / late.len() as f64;
    ck.check(
        format!("r(40)={r:.4} (mean over [30,40] {rmean:.4}) in [0.55,0.72] and < 1/sqrt2+0.02"),
        (0.55..=0.72).contains(&r) && r < 0.5f64.sqrt() + 0.02,
    );
    Ok(())
}

fn c10_oat_ghz(ck: &mut Checks) -> Result<()> {
    let lambda = 1.0;
    for l in [4, 8, 12] {
        let grid = linspace(0.0, 2.0 * PI, 801);
        let f = oat::ghz_fidelity_series(l, lambda, &grid)?;
        let fh = oat::ghz_fidelity_series(l, lambda, &[PI / 2.0])?[0];
        ck.check(format!("L={l} F(pi/2)={fh:.12}"), fh >= 1.0 - 1e-9);
        let kmax = (0..f.len()).fold(0, |a, k| if f[k] > f[a] { k } else { a });
        ck.check(
            format!("L={l} argmax F at t={:.5}", grid[kmax]),
            (grid[kmax] - PI / 2.0).abs() <= grid[1] + 1e-12,
        );

        let a = oat::ghz_state(l, PI / 2.0)?;
        let b = oat::ghz_state(l, 1.5 * PI)?;
        let ip = a.inner(&b)?.norm();
        ck.check(format!("L={l} <GHZ_pi/2|GHZ_3pi/2>={ip:.1e}"), ip < 1e-15);

        let sy = oat::spin_ops(l).sy;
        let d0 = max_abs_diff(&oat::oat_emergent(l, lambda, 0.0)?, &sy);
        let dpi = max_abs_diff(&oat::oat_emergent(l, lambda, PI / lambda)?, &(-&sy));
        ck.check(format!("L={l} M(0)-Sy={d0:.1e} M(pi)+Sy={dpi:.1e}"), d0 < 1e-12 && dpi < 1e-12);

        let conj = Conjugator::new(&oat::oat_hamiltonian(l, lambda)?, &sy);
        let worst = linspace(0.0, 2.0 * PI, 20)
            .into_iter()
            .map(|t| Ok(max_abs_diff(&oat::oat_emergent(l, lambda, t)?, &conj.at(t))))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        ck.check(format!("L={l} closed form vs conjugation={worst:.1e}"), worst < 1e-11);

        let fr = oat::oat_freeze(l, lambda, PI / 2.0 + 2.0 * PI, &linspace(0.0, 20.0, 41))?;
        let spread = fr.fidelities.iter().map(|x| (x - fr.fidelities[0]).abs()).fold(0.0, f64::max);
        ck.check(format!("L={l} freeze F spread={spread:.1e}"), spread < 1e-9);
        ck.check(format!("L={l} freeze residual={:.1e}", fr.residual), fr.residual < 1e-9);
        ck.check(
            format!("L={l} freeze E0={:.12}", fr.energy),
            (fr.energy + l as f64 / 2.0).abs() < 1e-9,
        );
    }
    Ok(())
}

fn csv_bodies(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|x| x == "csv"));
    files.sort();
    files
        .into_iter()
        .map(|p| Ok((p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p)?)))
        .collect()
}

fn c11_determinism(ck: &mut Checks) -> Result<()> {
    let root = tempfile::tempdir()?;
    for kind in ExperimentKind::NAMED {
        if kind == ExperimentKind::FreezeDemo {
            continue;
        }
        let cfg = parse_config(&format!("experiment = \"{kind}\"\n"))?;
        let a = root.path().join(format!("{kind}_a"));
        let b = root.path().join(format!("{kind}_b"));
        runner::run_experiment(&cfg, Some(&a))?;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().expect("thread pool");
        pool.install(|| runner::run_experiment(&cfg, Some(&b)))?;
        let (fa, fb) = (csv_bodies(&a)?, csv_bodies(&b)?);
        ck.check(
            format!("{kind}: {} file(s) byte-identical", fa.len()),
            !fa.is_empty() && fa == fb,
        );
    }
    Ok(())
}

type Criterion = fn(&mut Checks) -> Result<()>;

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(u32, &str, Criterion); 11] = [
        (1, "1D maximal entanglement", c1_max_entanglement),
        (2, "Bell-product identity", c2_bell_product),
        (3, "period and flip", c3_period_flip),
        (4, "exact freeze", c4_exact_freeze),
        (5, "2D single particle", c5_single_particle_2d),
        (6, "appendix oracle", c6_appendix_oracle),
        (7, "truncation-order scaling", c7_truncation_scaling),
        (8, "overlap hierarchy", c8_overlap_hierarchy),
        (9, "spectral statistics", c9_spectral),
        (10, "OAT/GHZ", c10_oat_ghz),
        (11, "determinism", c11_determinism),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if let Some(f) = &filter {
            if f != &id.to_string() && !(f.parse::<u32>().is_err() && name.contains(f.as_str())) {
                continue;
            }
        }
        let start = Instant::now();
        let mut ck = Checks::default();
        let outcome = run(&mut ck);
        let ok = outcome.is_ok() && ck.items.iter().all(|(_, ok)| *ok);
        println!(
            "{} [{id:>2}] {name} ({} checks, {:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            ck.items.len(),
            start.elapsed().as_secs_f64()
        );
        if std::env::var_os("EMFREEZE_ACCEPT_VERBOSE").is_some() {
            for (label, ok) in &ck.items {
                println!("       {} {label}", if *ok { "ok  " } else { "FAIL" });
            }
        } else {
            for (label, _) in ck.items.iter().filter(|(_, ok)| !ok) {
                println!("       FAIL {label}");
            }
        }
        for n in &ck.notes {
            println!("       note {n}");
        }
        if let Err(e) = outcome {
            println!("       error: {e}");
        }
        if !ok {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
