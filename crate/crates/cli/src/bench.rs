//! Per-query cost of the three ways to obtain node values: table
//! interpolation, network evaluation and exact labelling.

use std::fmt::Write as _;
use std::fs;
use std::time::{Duration, Instant};

use fsck_core::kdist::ExactOracle;
use fsck_core::lookup::FsckTable;
use fsck_core::mlp::{load_model, MlpModel, SFM_INPUT_BOX};
use fsck_core::spectra::ThermoState;
use fsck_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::commands::{oracle, quad};
use crate::config::RunConfig;

pub static DEFAULTS: std::sync::LazyLock<Vec<(&'static str, &'static str)>> =
    std::sync::LazyLock::new(|| {
        vec![
            ("seed", "7"),
            ("out_dir", "."),
            ("grid_start", "150"),
            ("grid_end", "9300"),
            ("grid_step", "0.1"),
            ("catalog_seed", "7"),
            ("n_states", "10000"),
            ("exact_states", "200"),
            ("warmup", "100"),
            ("quad_nodes", "8"),
            ("model", ""),
            ("table", ""),
            ("threads", "1"),
            ("cold", "false"),
        ]
    });

/// Reported next to the measurements, not compared against them.
const REFERENCE: [(&str, f64); 2] = [("table", 0.09), ("sfm", 0.59)];

/// Uniform states inside the network's input box with Σx ≤ 1 and some
/// absorber present.
pub fn random_states(n: usize, seed: u64) -> Vec<(ThermoState, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let b = SFM_INPUT_BOX;
    while out.len() < n {
        let t = rng.random_range(b[0].0..=b[0].1);
        let t0 = rng.random_range(b[1].0..=b[1].1);
        let x = [
            rng.random_range(b[2].0..=b[2].1),
            rng.random_range(b[3].0..=b[3].1),
            rng.random_range(b[4].0..=b[4].1),
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

fn table_phase(table: &FsckTable, states: &[(ThermoState, f64)]) -> Result<f64> {
    states
        .par_iter()
        .map(|(s, t0)| Ok(table.interp(s, *t0)?.iter().map(|v| v.ka).sum::<f64>()))
        .sum()
}

fn sfm_phase(model: &MlpModel, nodes: &[f64], states: &[(ThermoState, f64)]) -> Result<f64> {
    states
        .par_chunks(1000)
        .map(|chunk| {
            let mut x = Vec::with_capacity(chunk.len() * nodes.len() * 6);
            for (s, t0) in chunk {
                for &g in nodes {
                    x.extend_from_slice(&[s.temperature(), *t0, s.x_co2(), s.x_h2o(), s.x_co(), g]);
                }
            }
            Ok(model.forward_batch(&x)?.iter().sum::<f64>())
        })
        .sum()
}

fn exact_phase(
    oracle: &ExactOracle,
    quad: &fsck_core::kdist::QuadratureSet,
    states: &[(ThermoState, f64)],
) -> Result<f64> {
    states
        .par_iter()
        .map(|(s, t0)| {
            Ok(oracle
                .kdist_at_state(s, *t0, quad)?
                .iter()
                .map(|v| v.ka)
                .sum::<f64>())
        })
        .sum()
}

struct Phase {
    name: &'static str,
    states: usize,
    elapsed: Duration,
}

impl Phase {
    fn per_state(&self) -> f64 {
        self.elapsed.as_secs_f64() / self.states as f64
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, Duration)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed()))
}

pub fn bench(cfg: &RunConfig) -> Result<()> {
    let threads: usize = cfg.get("threads")?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run(cfg))
}

fn run(cfg: &RunConfig) -> Result<()> {
    let n: usize = cfg.get("n_states")?;
    let n_exact: usize = cfg.get::<usize>("exact_states")?.min(n);
    let warmup: usize = cfg.get::<usize>("warmup")?.min(n);
    let cold: bool = cfg.get("cold")?;
    if n == 0 {
        return Err(Error::Config("n_states must be positive".into()));
    }
    let quad = quad(cfg)?;
    let states = random_states(n, cfg.get("seed")?);

    // initialization
    let (model, model_load) = timed(|| load_model(cfg.require_path("model")?))?;
    let (table, table_load) = timed(|| FsckTable::load(cfg.require_path("table")?))?;
    let (oracle, oracle_load) = timed(|| oracle(cfg))?;
    if table.quad().nodes() != quad.nodes() {
        return Err(Error::Shape(format!(
            "table holds {} nodes, bench uses {}",
            table.quad().len(),
            quad.len()
        )));
    }

    // calculation, after a warm-up pass
    table_phase(&table, &states[..warmup])?;
    let (_, t_table) = timed(|| table_phase(&table, &states))?;
    sfm_phase(&model, quad.nodes(), &states[..warmup])?;
    let (_, t_sfm) = timed(|| sfm_phase(&model, quad.nodes(), &states))?;
    exact_phase(&oracle, &quad, &states[..warmup.min(n_exact).min(5)])?;
    let (_, t_exact) = timed(|| exact_phase(&oracle, &quad, &states[..n_exact]))?;

    let extra = |load: Duration| if cold { load } else { Duration::ZERO };
    let phases = [
        Phase {
            name: "table",
            states: n,
            elapsed: t_table + extra(table_load),
        },
        Phase {
            name: "sfm",
            states: n,
            elapsed: t_sfm + extra(model_load),
        },
        Phase {
            name: "exact",
            states: n_exact,
            elapsed: t_exact + extra(oracle_load),
        },
    ];
    drop((model, table, oracle));

    let mut csv = String::from("phase,states,seconds,per_state_s,seconds_for_n_states\n");
    for p in &phases {
        let _ = writeln!(
            csv,
            "{},{},{:.6e},{:.6e},{:.6e}",
            p.name,
            p.states,
            p.elapsed.as_secs_f64(),
            p.per_state(),
            p.per_state() * n as f64
        );
    }
    let ordered = phases[0].per_state() < phases[1].per_state()
        && phases[1].per_state() < phases[2].per_state();
    let mut summary = format!(
        "n_states = {n}\nquad_nodes = {}\nthreads = {}\ncold = {cold}\nordering_table_lt_sfm_lt_exact = {ordered}\n",
        quad.len(),
        rayon::current_num_threads()
    );
    for (name, secs) in REFERENCE {
        let _ = writeln!(summary, "reference.{name}.seconds_for_10000 = {secs}");
    }
    let dir = cfg.out_dir();
    let path = dir.join("bench.csv");
    fs::write(&path, &csv).map_err(|e| Error::io(&path, e))?;
    let path = dir.join("bench_summary.txt");
    fs::write(&path, &summary).map_err(|e| Error::io(&path, e))?;
    print!("{csv}{summary}");
    Ok(())
}
