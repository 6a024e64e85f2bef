//! Subcommand bodies. Each one reads the resolved configuration, calls the
//! library and writes its artifacts into `out_dir`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fsck_core::dataset::{
    label_states, read_corpus, sample_states, write_corpus, CorpusManifest, CORPUS_HEADER,
};
use fsck_core::kdist::{
    self, gauss_chebyshev, stretch_exact, write_kdist_csv, write_stretch_csv, ExactOracle,
    QuadratureSet,
};
use fsck_core::lookup::{build_table, FsckTable, TableAxes};
use fsck_core::mlp::{
    self, load_model, metric, save_model, MlpModel, SearchSpace, TrainConfig, TrainData,
    TuneConfig, TuneMode,
};
use fsck_core::rte::{
    planck_mean_fsck, planck_mean_lbl, solve_slab, solve_slab_lbl, Comparison, DiscreteModel,
    ExactModel, GrayModel, SfmModel, SlabProblem, Solver, SpectralModel, TableModel,
};
use fsck_core::spectra::{
    load_spectrum_csv, write_spectrum_csv, LineCatalog, SpectralGrid, ThermoState,
    LINES_PER_SPECIES,
};
use fsck_core::{Error, Result};

use crate::config::RunConfig;

const COMMON: [(&str, &str); 2] = [("seed", "7"), ("out_dir", ".")];
const SPECTRAL: [(&str, &str); 4] = [
    ("grid_start", "150"),
    ("grid_end", "9300"),
    ("grid_step", "0.1"),
    ("catalog_seed", "7"),
];
const STATE: [(&str, &str); 4] = [
    ("temperature", "1750"),
    ("x_co2", "0.075"),
    ("x_h2o", "0.175"),
    ("x_co", "0.025"),
];
const TRAINING: [(&str, &str); 6] = [
    ("learning_rate", "1.246e-3"),
    ("l2_reg", "1e-7"),
    ("batch_size", "1024"),
    ("max_epochs", "2000"),
    ("patience", "20"),
    ("validation_fraction", "0.1"),
];

macro_rules! defaults {
    ($name:ident = [$($group:expr),*] + [$(($k:expr, $v:expr)),* $(,)?]) => {
        pub static $name: std::sync::LazyLock<Vec<(&'static str, &'static str)>> = std::sync::LazyLock::new(|| {
            let mut v: Vec<(&'static str, &'static str)> = Vec::new();
            $(v.extend_from_slice(&$group);)*
            $(v.push(($k, $v));)*
            v
        });
    };
}

defaults!(GEN_SPECTRUM = [COMMON, SPECTRAL, STATE] + []);
defaults!(
    BUILD_KDIST =
        [COMMON, SPECTRAL, STATE] + [("t0", "950"), ("spectrum", ""), ("quad_nodes", "8")]
);
defaults!(MAKE_CORPUS = [COMMON, SPECTRAL] + [("n_states", "2000"), ("quad_nodes", "8")]);
defaults!(TRAIN = [COMMON, TRAINING] + [("corpus", "")]);
defaults!(
    TUNE = [COMMON, TRAINING]
        + [
            ("corpus", ""),
            ("budget", "100"),
            ("mode", "bayesian"),
            ("initial", "5"),
            ("candidates", "2000"),
            ("lr_min", "1e-5"),
            ("lr_max", "1e-1"),
            ("l2_min", "1e-9"),
            ("l2_max", "1e-3"),
        ]
);
defaults!(INFER = [COMMON] + [("model", ""), ("input", "")]);
defaults!(TABLE_BUILD = [COMMON, SPECTRAL] + [("axes", "desk"), ("quad_nodes", "8")]);
defaults!(
    SLAB = [COMMON, SPECTRAL, STATE]
        + [
            ("t0", "950"),
            ("models", "exact,discrete"),
            ("solver", "exact"),
            ("profile", "uniform"),
            ("length", "0.5"),
            ("cells", "50"),
            ("wall_t_left", "0"),
            ("wall_t_right", "0"),
            ("quad_nodes", "8"),
            ("discrete_points", "32"),
            ("gray_kappa", "0.01"),
            ("model", ""),
            ("table", ""),
        ]
);
defaults!(
    PLANCK_MEAN = [COMMON, SPECTRAL, STATE]
        + [
            ("t0", "950"),
            ("quad_nodes", "8"),
            ("model", ""),
            ("table", "")
        ]
);

pub(crate) fn grid(cfg: &RunConfig) -> Result<SpectralGrid> {
    SpectralGrid::from_range(
        cfg.get("grid_start")?,
        cfg.get("grid_end")?,
        cfg.get("grid_step")?,
    )
}

pub(crate) fn oracle(cfg: &RunConfig) -> Result<ExactOracle> {
    let grid = grid(cfg)?;
    ExactOracle::new(LineCatalog::for_grid(cfg.get("catalog_seed")?, &grid), grid)
}

fn state(cfg: &RunConfig) -> Result<ThermoState> {
    ThermoState::new(
        cfg.get("temperature")?,
        cfg.get("x_co2")?,
        cfg.get("x_h2o")?,
        cfg.get("x_co")?,
    )
}

pub(crate) fn quad(cfg: &RunConfig) -> Result<QuadratureSet> {
    gauss_chebyshev(cfg.get("quad_nodes")?).map_err(|e| Error::Config(format!("quad_nodes: {e}")))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn train_config(cfg: &RunConfig) -> Result<TrainConfig> {
    let c = TrainConfig {
        learning_rate: cfg.get("learning_rate")?,
        l2_reg: cfg.get("l2_reg")?,
        batch_size: cfg.get("batch_size")?,
        max_epochs: cfg.get("max_epochs")?,
        patience: cfg.get("patience")?,
        seed: cfg.get("seed")?,
        validation_fraction: cfg.get("validation_fraction")?,
    };
    c.validate()?;
    Ok(c)
}

pub fn gen_spectrum(cfg: &RunConfig) -> Result<()> {
    let oracle = oracle(cfg)?;
    let field = oracle.spectrum(&state(cfg)?)?;
    let out = cfg.out_dir().join("spectrum.csv");
    write_spectrum_csv(&field, &out)?;
    println!("{} points -> {}", field.len(), out.display());
    Ok(())
}

pub fn build_kdist(cfg: &RunConfig) -> Result<()> {
    let t: f64 = cfg.get("temperature")?;
    let t0: f64 = cfg.get("t0")?;
    let field = match cfg.path("spectrum") {
        Some(p) => load_spectrum_csv(p)?,
        None => oracle(cfg)?.spectrum(&state(cfg)?)?,
    };
    let dist = kdist::build_kdist(&field, t)?;
    let quad = quad(cfg)?;
    let profile = stretch_exact(&field, t, t0, quad.nodes())?;
    let dir = cfg.out_dir();
    write_kdist_csv(&dist, dir.join("kdist.csv"))?;
    write_stretch_csv(&profile, dir.join("stretch.csv"))?;
    println!(
        "{} levels, k in [{:.4e}, {:.4e}] cm-1",
        dist.levels(),
        dist.min_k(),
        dist.max_k()
    );
    Ok(())
}

pub fn make_corpus(cfg: &RunConfig) -> Result<()> {
    let oracle = oracle(cfg)?;
    let quad = quad(cfg)?;
    let n: usize = cfg.get("n_states")?;
    let seed: u64 = cfg.get("seed")?;
    let states = sample_states(n, seed);
    let rows = label_states(&states, &quad, &oracle)?;
    let dir = cfg.out_dir();
    write_corpus(&rows, dir.join("corpus.csv"))?;
    CorpusManifest {
        seed,
        n_states: n,
        quad_nodes: quad.len(),
        grid: *oracle.cache().grid(),
        catalog_seed: cfg.get("catalog_seed")?,
        lines_per_species: LINES_PER_SPECIES,
        rows: rows.len(),
    }
    .write(dir.join("corpus.manifest"))?;
    println!(
        "{} states, {} rows -> {}",
        n,
        rows.len(),
        dir.join("corpus.csv").display()
    );
    Ok(())
}

fn load_training(cfg: &RunConfig) -> Result<(MlpModel, TrainData)> {
    let rows = read_corpus(cfg.require_path("corpus")?)?;
    let template = MlpModel::sfm(cfg.get("seed")?);
    let data = TrainData::from_rows(&template, &rows)?;
    Ok((template, data))
}

pub fn train(cfg: &RunConfig) -> Result<()> {
    let config = train_config(cfg)?;
    let (template, data) = load_training(cfg)?;
    let (model, history) = mlp::train(&template, &data, &config)?;
    let dir = cfg.out_dir();
    save_model(&model, dir.join("model.sfmw"))?;
    let mut csv = String::from("epoch,train_loss,val_metric\n");
    for (e, (l, m)) in history
        .train_loss
        .iter()
        .zip(&history.val_metric)
        .enumerate()
    {
        let _ = writeln!(csv, "{e},{l:.10e},{m:.10e}");
    }
    write(&dir.join("train_history.csv"), &csv)?;
    let summary = format!(
        "rows = {}\nepochs = {}\nbest_epoch = {}\nbest_val_metric = {:.6e}\nstopped_early = {}\n",
        data.len(),
        history.val_metric.len(),
        history.best_epoch,
        history.best_metric,
        history.stopped_early
    );
    write(&dir.join("train_summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

pub fn tune(cfg: &RunConfig) -> Result<()> {
    let base = train_config(cfg)?;
    let (template, data) = load_training(cfg)?;
    let space = SearchSpace {
        lr: (cfg.get("lr_min")?, cfg.get("lr_max")?),
        l2: (cfg.get("l2_min")?, cfg.get("l2_max")?),
    };
    let mode = match cfg.raw("mode") {
        "bayesian" => TuneMode::Bayesian,
        "random" => TuneMode::Random,
        other => {
            return Err(Error::Config(format!(
                "mode must be bayesian or random, got `{other}`"
            )))
        }
    };
    let tc = TuneConfig {
        budget: cfg.get("budget")?,
        seed: cfg.get("seed")?,
        mode,
        initial: cfg.get("initial")?,
        candidates: cfg.get("candidates")?,
    };
    let (best, trace) = mlp::tune(&template, &data, &base, &space, &tc)?;
    let dir = cfg.out_dir();
    let mut csv = String::from("sample,learning_rate,l2_reg,value,best_so_far\n");
    for (i, (s, b)) in trace.samples.iter().zip(&trace.best_so_far).enumerate() {
        let _ = writeln!(
            csv,
            "{i},{:.10e},{:.10e},{:.10e},{:.10e}",
            s.learning_rate, s.l2_reg, s.value, b
        );
    }
    write(&dir.join("tune_trace.csv"), &csv)?;
    let best_cfg = format!(
        "learning_rate = {:e}\nl2_reg = {:e}\n",
        best.learning_rate, best.l2_reg
    );
    write(&dir.join("tune_best.config"), &best_cfg)?;
    print!("{best_cfg}");
    Ok(())
}

/// Corpus-format rows; the label columns are optional.
fn read_inputs(path: &Path) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Empty(format!("{} has no header", path.display())))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let expect: Vec<&str> = CORPUS_HEADER.split(',').collect();
    let labelled = match names.len() {
        6 if names[..] == expect[..6] => false,
        8 if names[..] == expect[..] => true,
        _ => {
            return Err(Error::parse(
                path,
                1,
                format!(
                    "expected header `{}` (label columns optional)",
                    CORPUS_HEADER
                ),
            ));
        }
    };
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for (i, line) in lines {
        let vals = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        if vals.len() != names.len() {
            return Err(Error::parse(
                path,
                i + 1,
                format!("{} fields, header has {}", vals.len(), names.len()),
            ));
        }
        inputs.extend_from_slice(&vals[..6]);
        targets.extend_from_slice(&vals[6..]);
    }
    if inputs.is_empty() {
        return Err(Error::Empty(format!("{} has no rows", path.display())));
    }
    Ok((inputs, labelled.then_some(targets)))
}

pub fn infer(cfg: &RunConfig) -> Result<()> {
    let model = load_model(cfg.require_path("model")?)?;
    let (inputs, targets) = read_inputs(&cfg.require_path("input")?)?;
    let pred = model.forward_batch(&inputs)?;
    let dir = cfg.out_dir();
    let mut csv = String::from("T,T0,xco2,xh2o,xco,g,k,ka\n");
    for (x, y) in inputs.chunks(6).zip(pred.chunks(2)) {
        for v in x {
            let _ = write!(csv, "{v:.16e},");
        }
        let _ = writeln!(csv, "{:.16e},{:.16e}", y[0], y[1]);
    }
    write(&dir.join("predictions.csv"), &csv)?;
    if let Some(t) = targets {
        let mut summary = format!("rows = {}\n", pred.len() / 2);
        for (o, name) in ["k", "ka"].iter().enumerate() {
            let tr = model.outputs()[o];
            let y: Vec<f64> = t.iter().skip(o).step_by(2).map(|&v| tr.encode(v)).collect();
            let p: Vec<f64> = pred
                .iter()
                .skip(o)
                .step_by(2)
                .map(|&v| tr.encode(v))
                .collect();
            let max_rel = t
                .iter()
                .skip(o)
                .step_by(2)
                .zip(pred.iter().skip(o).step_by(2))
                .map(|(a, b)| ((b - a) / a).abs())
                .fold(0.0, f64::max);
            let _ = writeln!(summary, "{name}.metric = {:.6e}", metric(&y, &p)?);
            let _ = writeln!(summary, "{name}.max_rel = {max_rel:.6e}");
        }
        write(&dir.join("infer_summary.txt"), &summary)?;
        print!("{summary}");
    }
    Ok(())
}

pub fn table_build(cfg: &RunConfig) -> Result<()> {
    let axes = match cfg.raw("axes") {
        "desk" => TableAxes::desk(),
        "table1" => TableAxes::table1(),
        other => {
            return Err(Error::Config(format!(
                "axes must be desk or table1, got `{other}`"
            )))
        }
    };
    let oracle = oracle(cfg)?;
    let table = build_table(&axes, &quad(cfg)?, &oracle)?;
    let out = cfg.out_dir().join("table.fskt");
    table.save(&out)?;
    println!("{} grid points -> {}", axes.points(), out.display());
    Ok(())
}

fn slab_problem(cfg: &RunConfig) -> Result<SlabProblem> {
    let length: f64 = cfg.get("length")?;
    let cells: usize = cfg.get("cells")?;
    let p = match cfg.raw("profile") {
        "uniform" => SlabProblem::uniform(length, cells, state(cfg)?, cfg.get("t0")?)?,
        "random" => SlabProblem::random_profile(cfg.get("seed")?, length, cells)?,
        other => {
            return Err(Error::Config(format!(
                "profile must be uniform or random, got `{other}`"
            )))
        }
    };
    p.with_walls([cfg.get("wall_t_left")?, cfg.get("wall_t_right")?])
}

/// Spectral models named in `models`, with the files they need loaded.
struct Models {
    oracle: ExactOracle,
    sfm: Option<MlpModel>,
    table: Option<FsckTable>,
}

impl Models {
    fn load(cfg: &RunConfig, names: &[String]) -> Result<Self> {
        let needs = |n: &str| names.iter().any(|m| m == n);
        Ok(Self {
            oracle: oracle(cfg)?,
            sfm: if needs("sfm") {
                Some(load_model(cfg.require_path("model")?)?)
            } else {
                None
            },
            table: if needs("table") {
                Some(FsckTable::load(cfg.require_path("table")?)?)
            } else {
                None
            },
        })
    }

    fn get<'a>(&'a self, cfg: &RunConfig, name: &str) -> Result<Box<dyn SpectralModel + 'a>> {
        Ok(match name {
            "exact" => Box::new(ExactModel {
                oracle: &self.oracle,
            }),
            "discrete" => Box::new(DiscreteModel {
                oracle: &self.oracle,
                n_points: cfg.get("discrete_points")?,
            }),
            "sfm" => Box::new(SfmModel {
                model: self.sfm.as_ref().expect("loaded"),
            }),
            "table" => Box::new(TableModel {
                table: self.table.as_ref().expect("loaded"),
            }),
            "gray" => Box::new(GrayModel::new(cfg.get("gray_kappa")?)?),
            other => return Err(Error::Config(format!("unknown spectral model `{other}`"))),
        })
    }
}

pub fn slab(cfg: &RunConfig) -> Result<()> {
    let names = cfg.list("models");
    if names.is_empty() {
        return Err(Error::Config("models is empty".into()));
    }
    let solver = match cfg.raw("solver") {
        "exact" => Solver::Exact,
        "p1" => Solver::P1,
        other => {
            return Err(Error::Config(format!(
                "solver must be exact or p1, got `{other}`"
            )))
        }
    };
    let problem = slab_problem(cfg)?;
    let quad = quad(cfg)?;
    let models = Models::load(cfg, &names)?;
    let mut solutions = Vec::with_capacity(names.len());
    for name in &names {
        let sol = if name == "lbl" {
            solve_slab_lbl(&problem, &models.oracle)?
        } else {
            solve_slab(&problem, models.get(cfg, name)?.as_ref(), &quad, solver)?
        };
        log::info!(
            "{}: wall flux {:.6e} W/m2",
            sol.model,
            sol.q[problem.n_cells()]
        );
        solutions.push(sol);
    }
    let cmp = Comparison::from_solutions(solutions);
    let dir = cfg.out_dir();
    cmp.write(dir.join("slab.csv"), dir.join("slab_summary.txt"))?;
    for d in &cmp.deviations[1..] {
        println!(
            "{}: emission {:.3e}  q {:.3e}  divq {:.3e} (max rel vs {})",
            d.model, d.emission.max_rel, d.q.max_rel, d.divq.max_rel, cmp.deviations[0].model
        );
    }
    Ok(())
}

pub fn planck_mean(cfg: &RunConfig) -> Result<()> {
    let s = state(cfg)?;
    let t0: f64 = cfg.get("t0")?;
    let quad = quad(cfg)?;
    let mut names = vec!["exact".to_string()];
    if cfg.path("model").is_some() {
        names.push("sfm".into());
    }
    if cfg.path("table").is_some() {
        names.push("table".into());
    }
    let models = Models::load(cfg, &names)?;
    let lbl = planck_mean_lbl(&models.oracle.spectrum(&s)?, s.temperature())?;
    let mut out = format!("lbl = {lbl:.10e}\n");
    for name in &names {
        let nodes = models.get(cfg, name)?.node_values(&s, t0, &quad)?;
        let kp = planck_mean_fsck(&nodes, &quad)?;
        let _ = writeln!(
            out,
            "{name} = {kp:.10e}\n{name}.rel_dev = {:.6e}",
            (kp - lbl) / lbl
        );
    }
    write(&cfg.out_dir().join("planck_mean.txt"), &out)?;
    print!("{out}");
    Ok(())
}
