//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion followed by a summary table.
//!
//! The process exits successfully even when a criterion fails, so the suite
//! can run inside `cargo test --workspace`. Set `ACCEPTANCE_STRICT=1` to turn
//! any FAIL into a non-zero exit status.

use std::time::{Duration, Instant};

use fsck_core::dataset::{label_states, sample_states};
use fsck_core::kdist::{build_kdist, gauss_chebyshev, ExactOracle, QuadratureSet};
use fsck_core::lookup::{FsckTable, TableAxes};
use fsck_core::mlp::{
    grad, load_model, param_count, save_model, train, Adam, MlpModel, OutputTransform, TrainConfig,
    TrainData, SFM_INPUT_BOX, SFM_LAYERS,
};
use fsck_core::rte::{
    expint, planck_mean_lbl, solve_slab, solve_slab_lbl, Comparison, DiscreteModel, ExactModel,
    GrayModel, RteSolution, SfmModel, SlabProblem, Solver,
};
use fsck_core::spectra::planck::{planck_intensity, STEFAN_BOLTZMANN};
use fsck_core::spectra::{LineCatalog, SpectralGrid, ThermoState, DEFAULT_CATALOG_SEED};
use fsck_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

struct Ctx {
    oracle: ExactOracle,
    q8: QuadratureSet,
    q32: QuadratureSet,
    model: Option<MlpModel>,
    /// (run label, energy residual) of every slab solve.
    energy: Vec<(String, f64)>,
}

impl Ctx {
    fn record(&mut self, label: impl Into<String>, s: &RteSolution) {
        self.energy.push((label.into(), energy_residual(s)));
    }
}

/// |∫∇·q dx − (q(L) − q(0))| over max(Σ|∇·q|Δx, |q(L) − q(0)|).
fn energy_residual(s: &RteSolution) -> f64 {
    let mut integral = 0.0;
    let mut scale = 0.0;
    for (i, d) in s.divq.iter().enumerate() {
        let h = s.faces[i + 1] - s.faces[i];
        integral += d * h;
        scale += d.abs() * h;
    }
    let jump = s.q[s.q.len() - 1] - s.q[0];
    let scale = f64::max(scale, jump.abs());
    if scale == 0.0 {
        0.0
    } else {
        (integral - jump).abs() / scale
    }
}

fn c1_reordering(ctx: &mut Ctx) -> Result<Outcome> {
    let states = sample_states(200, 101);
    let grid = *ctx.oracle.cache().grid();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut bad_order, mut bad_ends, mut worst_probe) = (0, 0, 0.0f64);
    for (state, _) in &states {
        let t = state.temperature();
        let field = ctx.oracle.spectrum(state)?;
        let dist = build_kdist(&field, t)?;
        if dist.k().windows(2).any(|w| w[0] > w[1]) || dist.g().windows(2).any(|w| w[0] > w[1]) {
            bad_order += 1;
        }
        let kmin = field.kappa().iter().copied().fold(f64::INFINITY, f64::min);
        let kmax = field
            .kappa()
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if dist.invert(0.0)? != kmin || dist.invert(1.0)? != kmax {
            bad_ends += 1;
        }

        // re-sort oracle: stable sort of (κ, I_b) pairs and a running sum
        let mut pairs: Vec<(f64, f64)> = field
            .kappa()
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, planck_intensity(t, grid.eta(i)).unwrap()))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let mut cum = Vec::with_capacity(pairs.len());
        let mut acc = 0.0;
        for p in &pairs {
            acc += p.1;
            cum.push(acc / total);
        }
        for _ in 0..50 {
            let g: f64 = rng.random_range(0.0..1.0);
            let i = cum.partition_point(|&c| c < g).min(pairs.len() - 1);
            let expect = pairs[i].0;
            let got = dist.invert(g)?;
            worst_probe =
                worst_probe.max((got - expect).abs() / expect.abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(Outcome {
        pass: bad_order == 0 && bad_ends == 0 && worst_probe <= 1e-12,
        detail: format!(
            "200 states: {bad_order} non-monotone, {bad_ends} endpoint mismatches, worst probe rel err {worst_probe:.1e} (tol 1e-12)"
        ),
    })
}

fn c2_stretch(ctx: &mut Ctx) -> Result<Outcome> {
    let mut worst_unit = 0.0f64;
    for (state, _) in sample_states(50, 202) {
        for q in [&ctx.q8, &ctx.q32] {
            let p = ctx.oracle.stretch(&state, state.temperature(), q.nodes())?;
            for a in &p.a {
                worst_unit = worst_unit.max((a - 1.0).abs());
            }
        }
    }
    let n = 2001;
    let g0: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let h = 1.0 / (n - 1) as f64;
    let (mut worst_int, mut failing) = (0.0f64, 0);
    for (state, t0) in sample_states(50, 203) {
        let p = ctx.oracle.stretch(&state, t0, &g0)?;
        let integral = h * (p.a.iter().sum::<f64>() - 0.5 * (p.a[0] + p.a[n - 1]));
        let dev = (integral - 1.0).abs();
        worst_int = worst_int.max(dev);
        if dev > 5e-3 {
            failing += 1;
        }
    }
    Ok(Outcome {
        pass: worst_unit <= 1e-10 && failing == 0,
        detail: format!(
            "max |a - 1| at T = T0: {worst_unit:.1e} (tol 1e-10); trapezoid integral of a: {failing}/50 states off by > 0.5%, worst |integral - 1| {worst_int:.2e}"
        ),
    })
}

fn c3_emission(ctx: &mut Ctx) -> Result<Outcome> {
    let (mut worst32, mut worst8) = (0.0f64, 0.0f64);
    let (mut fail32, mut fail8) = (0, 0);
    for (state, t0) in sample_states(20, 303) {
        let field = ctx.oracle.spectrum(&state)?;
        let lbl = planck_mean_lbl(&field, state.temperature())?;
        for (q, tol, worst, fails) in [
            (&ctx.q32, 0.01, &mut worst32, &mut fail32),
            (&ctx.q8, 0.04, &mut worst8, &mut fail8),
        ] {
            let nodes = ctx.oracle.kdist_at_state(&state, t0, q)?;
            let sum = q.integrate(&nodes.iter().map(|v| v.ka).collect::<Vec<_>>());
            let dev = (sum - lbl).abs() / lbl;
            *worst = worst.max(dev);
            if dev > tol {
                *fails += 1;
            }
        }
    }
    let model = ctx
        .model
        .as_ref()
        .expect("criterion 6 trains the model first");
    let (mut worst_sfm, mut fail_sfm, mut tested) = (0.0f64, 0, 0);
    let mut worst_vs_exact = 0.0f64;
    for (state, t0) in sample_states(60, 304)
        .into_iter()
        .filter(|(s, _)| s.temperature() >= 1000.0)
        .take(20)
    {
        let field = ctx.oracle.spectrum(&state)?;
        let lbl = planck_mean_lbl(&field, state.temperature())?;
        let nodes = model.predict_nodes(&state, t0, ctx.q8.nodes())?;
        let sum = ctx
            .q8
            .integrate(&nodes.iter().map(|v| v.ka).collect::<Vec<_>>());
        let dev = (sum - lbl).abs() / lbl;
        worst_sfm = worst_sfm.max(dev);
        let exact = ctx.oracle.kdist_at_state(&state, t0, &ctx.q8)?;
        let exact_sum = ctx
            .q8
            .integrate(&exact.iter().map(|v| v.ka).collect::<Vec<_>>());
        worst_vs_exact = worst_vs_exact.max((sum - exact_sum).abs() / exact_sum);
        tested += 1;
        if dev > 0.05 {
            fail_sfm += 1;
        }
    }
    Ok(Outcome {
        pass: fail32 == 0 && fail8 == 0 && fail_sfm == 0,
        detail: format!(
            "Planck mean vs line-by-line: 32-pt {fail32}/20 over 1% (worst {:.2}%), 8-pt {fail8}/20 over 4% (worst {:.2}%), SFM at T >= 1000 K {fail_sfm}/{tested} over 5% (worst {:.2}%; worst SFM vs exact 8-pt sum {:.2}%)",
            100.0 * worst32,
            100.0 * worst8,
            100.0 * worst_sfm,
            100.0 * worst_vs_exact
        ),
    })
}

fn c4_quadrature(ctx: &mut Ctx) -> Result<Outcome> {
    let s8 = (ctx.q8.weights().iter().sum::<f64>() - 1.0).abs();
    let s32 = (ctx.q32.weights().iter().sum::<f64>() - 1.0).abs();
    let mut worst_poly = 0.0f64;
    for p in 0..=5 {
        let v: Vec<f64> = ctx.q32.nodes().iter().map(|g| g.powi(p)).collect();
        worst_poly = worst_poly.max((ctx.q32.integrate(&v) - 1.0 / (p as f64 + 1.0)).abs());
    }
    Ok(Outcome {
        pass: s8 <= 2e-3 && s32 <= 1e-4 && worst_poly <= 5e-3,
        detail: format!("|sum w - 1|: n=8 {s8:.1e}, n=32 {s32:.1e}; worst monomial error (deg <= 5, n=32) {worst_poly:.2e}"),
    })
}

/// Straight-line evaluation from the flat parameter vector.
fn reference_forward(m: &MlpModel, input: &[f64]) -> Vec<f64> {
    let sizes = m.sizes();
    let p = m.params();
    let mut x: Vec<f64> = input
        .iter()
        .zip(m.input_box())
        .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
        .collect();
    let mut off = 0;
    for l in 0..sizes.len() - 1 {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let w = &p[off..off + n_in * n_out];
        let b = &p[off + n_in * n_out..off + n_in * n_out + n_out];
        off += n_in * n_out + n_out;
        let last = l + 2 == sizes.len();
        x = (0..n_out)
            .map(|o| {
                let z = b[o] + (0..n_in).map(|i| w[o * n_in + i] * x[i]).sum::<f64>();
                if last {
                    z
                } else {
                    z.max(0.0)
                }
            })
            .collect();
    }
    x.iter()
        .zip(m.outputs())
        .map(|(y, t)| match t {
            OutputTransform::Identity => *y,
            OutputTransform::Log10 { .. } => 10f64.powf(*y),
        })
        .collect()
}

fn c5_mlp(_ctx: &mut Ctx) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst_fwd = 0.0f64;
    for seed in 0..5 {
        let m = MlpModel::sfm(seed);
        for _ in 0..200 {
            let x: Vec<f64> = SFM_INPUT_BOX
                .iter()
                .map(|(lo, hi)| rng.random_range(*lo..=*hi))
                .collect();
            let a = m.forward(&x)?;
            let b = reference_forward(&m, &x);
            for (u, v) in a.iter().zip(&b) {
                worst_fwd = worst_fwd.max((u - v).abs() / v.abs());
            }
        }
    }

    let mut worst_grad = 0.0f64;
    for seed in 0..4 {
        let bx = vec![(0.0, 1.0); 3];
        let m = MlpModel::he_init(
            &[3, 7, 5, 2],
            bx,
            vec![OutputTransform::Identity; 2],
            60 + seed,
        )?;
        let xs: Vec<f64> = (0..3 * 16).map(|_| rng.random_range(0.0..1.0)).collect();
        let ys: Vec<f64> = (0..2 * 16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let data = TrainData::new(&m, &xs, &ys)?;
        let l2 = 1e-3;
        let (_, g) = grad(&m, &data, l2)?;
        let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..m.param_count() {
            let h = 1e-6;
            let mut plus = m.clone();
            plus.params_mut()[i] += h;
            let mut minus = m.clone();
            minus.params_mut()[i] -= h;
            let fd = (grad(&plus, &data, l2)?.0 - grad(&minus, &data, l2)?.0) / (2.0 * h);
            worst_grad = worst_grad.max((fd - g[i]).abs() / g[i].abs().max(1e-3 * gmax));
        }
    }

    let lr = 1.246e-3;
    let mut adam = Adam::new(64, lr);
    let g0: Vec<f64> = (0..64).map(|_| rng.random_range(-5.0..5.0)).collect();
    let mut p = vec![0.0; 64];
    adam.step(&mut p, &g0)?;
    let worst_adam = p
        .iter()
        .zip(&g0)
        .map(|(d, g)| (-d - lr * g / (g.abs() + 1e-8)).abs() / lr)
        .fold(0.0f64, f64::max);
    let step_ratio = p
        .iter()
        .map(|d| d.abs() / lr)
        .fold(0.0f64, |a, r| a.max((r - 1.0).abs()));

    let m = MlpModel::sfm(9);
    let bytes = m.to_bytes();
    let back = MlpModel::from_bytes(&bytes)?;
    let dir = tempfile::tempdir().map_err(|e| fsck_core::Error::io(".", e))?;
    let path = dir.path().join("m.sfmw");
    save_model(&m, &path)?;
    let loaded = load_model(&path)?;
    let on_disk = std::fs::metadata(&path)
        .map_err(|e| fsck_core::Error::io(&path, e))?
        .len();
    let bitwise = back
        .params()
        .iter()
        .zip(m.params())
        .all(|(a, b)| a.to_bits() == b.to_bits())
        && loaded.to_bytes() == bytes
        && back == m;
    let count = param_count(&SFM_LAYERS);

    Ok(Outcome {
        pass: worst_fwd <= 1e-12
            && worst_grad <= 1e-6
            && worst_adam <= 1e-12
            && step_ratio <= 1e-6
            && bitwise
            && count == 30_122
            && m.param_count() == 30_122
            && (on_disk as f64) < 0.43e6,
        detail: format!(
            "forward vs reference {worst_fwd:.1e}; gradient vs central differences {worst_grad:.1e}; Adam first step vs closed form {worst_adam:.1e} (|step|/lr - 1 <= {step_ratio:.1e}); round trip bitwise {bitwise}; {count} parameters; file {on_disk} bytes"
        ),
    })
}

fn c6_training(ctx: &mut Ctx) -> Result<Outcome> {
    let rows = label_states(&sample_states(2000, 7), &ctx.q8, &ctx.oracle)?;
    let template = MlpModel::sfm(7);
    let data = TrainData::from_rows(&template, &rows)?;
    let config = TrainConfig::default();
    let (model, history) = train(&template, &data, &config)?;
    let (again, history2) = train(&template, &data, &config)?;
    let deterministic = model == again && history == history2;
    let metric = history.best_metric;
    ctx.model = Some(model);
    Ok(Outcome {
        pass: metric < 5e-3 && deterministic,
        detail: format!(
            "{} rows, lr {}, l2 {}: validation metric {metric:.3e} (tol 5e-3, full-scale reference 5e-4) at epoch {} of {}; deterministic {deterministic}",
            rows.len(),
            config.learning_rate,
            config.l2_reg,
            history.best_epoch + 1,
            history.val_metric.len()
        ),
    })
}

/// Wall flux of an isothermal gray slab with cold walls by marching the
/// intensity along many directions through a fine mesh.
fn brute_force_wall_flux(kappa: f64, length: f64, ib: f64) -> f64 {
    let (n_mu, n_x) = (4000, 4000);
    let dx = length / n_x as f64;
    let dmu = 1.0 / n_mu as f64;
    let mut q = 0.0;
    for k in 0..n_mu {
        let mu = (k as f64 + 0.5) * dmu;
        let att = (-kappa * dx / mu).exp();
        let mut i = 0.0;
        for _ in 0..n_x {
            i = i * att + ib * (1.0 - att);
        }
        q += 2.0 * std::f64::consts::PI * mu * i * dmu;
    }
    q
}

fn c7_slab(ctx: &mut Ctx) -> Result<Outcome> {
    let desk = SlabProblem::desk();
    let t = desk.cells()[0].temperature();
    let kappa_cm = 0.02;
    let tau = kappa_cm * 100.0 * desk.length();
    let gray = solve_slab(&desk, &GrayModel::new(kappa_cm)?, &ctx.q8, Solver::Exact)?;
    ctx.record("gray desk slab", &gray);
    let closed = STEFAN_BOLTZMANN * t.powi(4) * (1.0 - 2.0 * expint(3, tau)?);
    let brute = brute_force_wall_flux(
        kappa_cm * 100.0,
        desk.length(),
        STEFAN_BOLTZMANN * t.powi(4) / std::f64::consts::PI,
    );
    let solved = gray.q[gray.q.len() - 1];
    let gray_dev = [
        (solved - closed) / closed,
        (brute - closed) / closed,
        (solved - brute) / brute,
    ]
    .iter()
    .fold(0.0f64, |a, v| a.max(v.abs()));

    let model = ctx
        .model
        .as_ref()
        .expect("criterion 6 trains the model first");
    let exact = solve_slab(
        &desk,
        &ExactModel {
            oracle: &ctx.oracle,
        },
        &ctx.q8,
        Solver::Exact,
    )?;
    let sfm = solve_slab(&desk, &SfmModel { model }, &ctx.q8, Solver::Exact)?;
    ctx.record("desk slab exact", &exact);
    ctx.record("desk slab sfm", &sfm);
    let cmp = Comparison::from_solutions(vec![exact, sfm]);
    let d = cmp.deviation("sfm").unwrap().divq;
    Ok(Outcome {
        pass: gray_dev <= 2e-3 && d.max_rel <= 0.05,
        detail: format!(
            "gray wall flux (tau {tau}) solver/closed form/march agree to {:.1e} (tol 2e-3); SFM vs exact divergence of flux max rel {:.2}% (tol 5%, peak-normalised {:.2}%)",
            gray_dev,
            100.0 * d.max_rel,
            100.0 * d.peak_rel
        ),
    })
}

fn c8_degradation(ctx: &mut Ctx) -> Result<Outcome> {
    let (mut tested, mut worse) = (0, 0);
    let mut ratios = Vec::new();
    for (state, t0) in sample_states(20, 808) {
        if state.temperature() == t0 {
            continue;
        }
        let exact = ctx.oracle.kdist_at_state(&state, t0, &ctx.q8)?;
        let err = |n: usize| -> Result<f64> {
            let d = ctx.oracle.discrete_at_state(&state, t0, &ctx.q8, n)?;
            Ok(d.iter()
                .zip(&exact)
                .map(|(u, v)| (u.a() - v.a()).abs() / v.a())
                .sum::<f64>()
                / exact.len() as f64)
        };
        let (e32, e512) = (err(32)?, err(512)?);
        tested += 1;
        ratios.push(e32 / e512);
        if e32 > e512 {
            worse += 1;
        }
    }

    let mut exact_wins = 0;
    let profiles = 10;
    for seed in 1..=profiles {
        let problem = SlabProblem::random_profile(seed, 0.5, 20)?;
        let lbl = solve_slab_lbl(&problem, &ctx.oracle)?;
        let exact = solve_slab(
            &problem,
            &ExactModel {
                oracle: &ctx.oracle,
            },
            &ctx.q8,
            Solver::Exact,
        )?;
        let disc = solve_slab(
            &problem,
            &DiscreteModel {
                oracle: &ctx.oracle,
                n_points: 32,
            },
            &ctx.q8,
            Solver::Exact,
        )?;
        ctx.record(format!("profile {seed} lbl"), &lbl);
        ctx.record(format!("profile {seed} exact"), &exact);
        ctx.record(format!("profile {seed} discrete32"), &disc);
        let cmp = Comparison::from_solutions(vec![lbl, exact, disc]);
        if cmp.deviation("exact").unwrap().divq.peak_rel
            < cmp.deviation("discrete32").unwrap().divq.peak_rel
        {
            exact_wins += 1;
        }
    }
    ratios.sort_by(f64::total_cmp);
    Ok(Outcome {
        pass: worse == tested && 10 * exact_wins >= 8 * profiles,
        detail: format!(
            "32-node a-values worse than 512-node on {worse}/{tested} states (min error ratio {:.2}); exact-ka beats 32-node model against line-by-line on {exact_wins}/{profiles} profiles (need 80%)",
            ratios.first().copied().unwrap_or(f64::NAN)
        ),
    })
}

fn random_box_states(n: usize, seed: u64) -> Vec<(ThermoState, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let t = rng.random_range(300.0..=3000.0);
        let t0 = rng.random_range(300.0..=3000.0);
        let x = [
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..=1.0),
            rng.random_range(0.0..=0.5),
        ];
        if x.iter().sum::<f64>() > 1.0 || x.iter().all(|&v| v == 0.0) {
            continue;
        }
        if let Ok(s) = ThermoState::new(t, x[0], x[1], x[2]) {
            out.push((s, t0));
        }
    }
    out
}

fn c9_benchmark(ctx: &mut Ctx) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    pool.install(|| {
        let model = ctx.model.as_ref().expect("criterion 6 trains the model first");
        let axes = TableAxes::desk();
        // interpolation cost does not depend on the stored values
        let n = axes.points() * ctx.q8.len();
        let table = FsckTable::new(axes, ctx.q8.clone(), vec![1.0; n], vec![1.0; n])?;
        let states = random_box_states(10_000, 909);
        let nodes = ctx.q8.nodes();

        let mut sink = 0.0;
        for (s, t0) in &states[..100] {
            sink += table.interp(s, *t0)?[0].ka;
        }
        let start = Instant::now();
        for (s, t0) in &states {
            sink += table.interp(s, *t0)?.iter().map(|v| v.ka).sum::<f64>();
        }
        let t_table = start.elapsed().as_secs_f64() / states.len() as f64;

        let mut batch = Vec::with_capacity(states.len() * nodes.len() * 6);
        for (s, t0) in &states {
            for &g in nodes {
                batch.extend_from_slice(&[s.temperature(), *t0, s.x_co2(), s.x_h2o(), s.x_co(), g]);
            }
        }
        sink += model.forward_batch(&batch[..600])?[0];
        let start = Instant::now();
        sink += model.forward_batch(&batch)?.iter().sum::<f64>();
        let sfm_batch = start.elapsed().as_secs_f64();
        let t_sfm = sfm_batch / states.len() as f64;

        let n_exact = 20;
        sink += ctx.oracle.kdist_at_state(&states[0].0, states[0].1, &ctx.q8)?[0].ka;
        let start = Instant::now();
        for (s, t0) in &states[1..=n_exact] {
            sink += ctx.oracle.kdist_at_state(s, *t0, &ctx.q8)?[0].ka;
        }
        let t_exact = start.elapsed().as_secs_f64() / n_exact as f64;
        assert!(sink.is_finite());

        Ok(Outcome {
            pass: t_table < t_sfm && t_sfm < t_exact && sfm_batch < 5.0,
            detail: format!(
                "per state: table {t_table:.2e} s < SFM {t_sfm:.2e} s < exact {t_exact:.2e} s; 10,000-state SFM batch {sfm_batch:.2} s single-threaded (tol 5 s, reference 0.59 s)"
            ),
        })
    })
}

fn c10_energy(ctx: &mut Ctx) -> Result<Outcome> {
    let desk = SlabProblem::desk();
    let p1 = solve_slab(
        &desk,
        &ExactModel {
            oracle: &ctx.oracle,
        },
        &ctx.q8,
        Solver::P1,
    )?;
    ctx.record("desk slab exact P1", &p1);
    let walls = desk.clone().with_walls([1200.0, 600.0])?;
    for solver in [Solver::Exact, Solver::P1] {
        let s = solve_slab(
            &walls,
            &ExactModel {
                oracle: &ctx.oracle,
            },
            &ctx.q8,
            solver,
        )?;
        ctx.record(format!("hot-wall desk slab {solver:?}"), &s);
    }
    let worst = ctx
        .energy
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .unwrap_or_default();
    let failing = ctx.energy.iter().filter(|(_, r)| *r > 1e-3).count();
    Ok(Outcome {
        pass: failing == 0 && !ctx.energy.is_empty(),
        detail: format!(
            "{} slab runs, {failing} with residual over 0.1%; worst {:.1e} ({})",
            ctx.energy.len(),
            worst.1,
            worst.0
        ),
    })
}

type Criterion = (
    usize,
    &'static str,
    Option<Duration>,
    fn(&mut Ctx) -> Result<Outcome>,
);

fn main() {
    let grid = SpectralGrid::default();
    let mut ctx = Ctx {
        oracle: ExactOracle::new(LineCatalog::for_grid(DEFAULT_CATALOG_SEED, &grid), grid)
            .expect("default oracle"),
        q8: gauss_chebyshev(8).unwrap(),
        q32: gauss_chebyshev(32).unwrap(),
        model: None,
        energy: Vec::new(),
    };
    let min = |m: u64| Some(Duration::from_secs(60 * m));
    // run order: the trained model feeds 3, 7 and 9; 10 audits every slab run
    let criteria: [Criterion; 10] = [
        (1, "reordering correctness", min(1), c1_reordering),
        (2, "stretch-factor identities", min(2), c2_stretch),
        (4, "quadrature sanity", None, c4_quadrature),
        (5, "MLP engine", min(2), c5_mlp),
        (6, "training at desk scale", min(30), c6_training),
        (3, "emission preservation", min(5), c3_emission),
        (7, "slab verification", min(5), c7_slab),
        (8, "degradation demonstration", None, c8_degradation),
        (9, "benchmark ordering", None, c9_benchmark),
        (10, "energy consistency", None, c10_energy),
    ];
    let mut results = Vec::new();
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let out = run(&mut ctx).unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("error: {e}"),
        });
        let took = start.elapsed();
        let in_time = limit.is_none_or(|l| took <= l);
        let pass = out.pass && in_time;
        let timing = match limit {
            Some(l) => format!("{:.1} s of {} s", took.as_secs_f64(), l.as_secs()),
            None => format!("{:.1} s", took.as_secs_f64()),
        };
        let line = format!(
            "criterion {id:>2} {}: {name}: {} [{timing}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail
        );
        println!("{line}");
        results.push((id, pass, line));
    }
    results.sort_by_key(|r| r.0);
    println!("\nacceptance summary");
    for (_, _, line) in &results {
        println!("  {line}");
    }
    let passed = results.iter().filter(|r| r.1).count();
    println!("{passed}/{} criteria pass", results.len());
    if passed < results.len() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
