//! `fsck-sfm`: generate spectra and k-distributions, label corpora, train
//! and tune the surrogate, build look-up tables, run slab comparisons and
//! time the spectral models.

mod bench;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fsck_core::error::ErrorClass;

use config::{parse_override, RunConfig};

#[derive(Args, Default)]
struct Common {
    /// RNG seed for sampling, initialisation and search.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for every output file (created if missing).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Flat `key = value` file; command-line flags win over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override any config key.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override, global = true)]
    set: Vec<(String, String)>,
}

#[derive(Args, Default)]
struct StateArgs {
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    x_co2: Option<f64>,
    #[arg(long)]
    x_h2o: Option<f64>,
    #[arg(long)]
    x_co: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthetic absorption spectrum at one state, as CSV.
    GenSpectrum {
        #[command(flatten)]
        state: StateArgs,
    },
    /// k-distribution at T and the stretch profile against T0.
    BuildKdist {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        t0: Option<f64>,
        /// Spectrum CSV to reorder instead of synthesising one.
        #[arg(long)]
        spectrum: Option<PathBuf>,
        #[arg(long)]
        quad_nodes: Option<usize>,
    },
    /// Sample the training envelope and label it with the exact oracle.
    MakeCorpus {
        #[arg(long)]
        n_states: Option<usize>,
        #[arg(long)]
        quad_nodes: Option<usize>,
    },
    /// Train the surrogate network on a corpus.
    Train {
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Search learning rate and L2 factor.
    Tune {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        budget: Option<usize>,
        /// bayesian or random
        #[arg(long)]
        mode: Option<String>,
    },
    /// Evaluate a trained model on corpus-format inputs.
    Infer {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Build the multilinear look-up table.
    TableBuild {
        /// desk or table1
        #[arg(long)]
        axes: Option<String>,
        #[arg(long)]
        quad_nodes: Option<usize>,
    },
    /// Solve a 1-D slab with several spectral models and compare them.
    Slab {
        /// Comma list of lbl, exact, discrete, sfm, table, gray; the first is the reference.
        #[arg(long)]
        models: Option<String>,
        /// exact or p1
        #[arg(long)]
        solver: Option<String>,
        /// uniform or random
        #[arg(long)]
        profile: Option<String>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Planck-mean absorption coefficient: line-by-line vs quadrature sums.
    PlanckMean {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Time table interpolation, network evaluation and exact labelling.
    Bench {
        #[arg(long)]
        n_states: Option<usize>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        table: Option<PathBuf>,
        /// Worker threads; 0 uses every core.
        #[arg(long)]
        threads: Option<usize>,
        /// Include model and table loading in the timings.
        #[arg(long)]
        cold: bool,
    },
}

#[derive(Parser)]
#[command(
    name = "fsck-sfm",
    version,
    about = "FSCK spectral models: labelling, surrogate training and slab verification"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

struct Overrides(Vec<(String, String)>);

impl Overrides {
    fn put<T: ToString>(&mut self, key: &str, v: Option<T>) {
        if let Some(v) = v {
            self.0.push((key.to_string(), v.to_string()));
        }
    }

    fn path(&mut self, key: &str, v: Option<PathBuf>) {
        self.put(key, v.map(|p| p.display().to_string()));
    }

    fn state(&mut self, s: StateArgs) {
        self.put("temperature", s.temperature);
        self.put("x_co2", s.x_co2);
        self.put("x_h2o", s.x_h2o);
        self.put("x_co", s.x_co);
    }
}

fn run(top: Cli) -> fsck_core::Result<()> {
    let Common {
        seed,
        out_dir,
        config,
        set,
    } = top.common;
    let mut o = Overrides(Vec::new());
    o.put("seed", seed);
    o.path("out_dir", out_dir);
    let (name, defaults, handler): (
        &str,
        Vec<(&str, &str)>,
        fn(&RunConfig) -> fsck_core::Result<()>,
    ) = match top.cmd {
        Cmd::GenSpectrum { state } => {
            o.state(state);
            (
                "gen-spectrum",
                commands::GEN_SPECTRUM.to_vec(),
                commands::gen_spectrum,
            )
        }
        Cmd::BuildKdist {
            state,
            t0,
            spectrum,
            quad_nodes,
        } => {
            o.state(state);
            o.put("t0", t0);
            o.path("spectrum", spectrum);
            o.put("quad_nodes", quad_nodes);
            (
                "build-kdist",
                commands::BUILD_KDIST.to_vec(),
                commands::build_kdist,
            )
        }
        Cmd::MakeCorpus {
            n_states,
            quad_nodes,
        } => {
            o.put("n_states", n_states);
            o.put("quad_nodes", quad_nodes);
            (
                "make-corpus",
                commands::MAKE_CORPUS.to_vec(),
                commands::make_corpus,
            )
        }
        Cmd::Train { corpus } => {
            o.path("corpus", corpus);
            ("train", commands::TRAIN.to_vec(), commands::train)
        }
        Cmd::Tune {
            corpus,
            budget,
            mode,
        } => {
            o.path("corpus", corpus);
            o.put("budget", budget);
            o.put("mode", mode);
            ("tune", commands::TUNE.to_vec(), commands::tune)
        }
        Cmd::Infer { model, input } => {
            o.path("model", model);
            o.path("input", input);
            ("infer", commands::INFER.to_vec(), commands::infer)
        }
        Cmd::TableBuild { axes, quad_nodes } => {
            o.put("axes", axes);
            o.put("quad_nodes", quad_nodes);
            (
                "table-build",
                commands::TABLE_BUILD.to_vec(),
                commands::table_build,
            )
        }
        Cmd::Slab {
            models,
            solver,
            profile,
            model,
            table,
        } => {
            o.put("models", models);
            o.put("solver", solver);
            o.put("profile", profile);
            o.path("model", model);
            o.path("table", table);
            ("slab", commands::SLAB.to_vec(), commands::slab)
        }
        Cmd::PlanckMean {
            state,
            t0,
            model,
            table,
        } => {
            o.state(state);
            o.put("t0", t0);
            o.path("model", model);
            o.path("table", table);
            (
                "planck-mean",
                commands::PLANCK_MEAN.to_vec(),
                commands::planck_mean,
            )
        }
        Cmd::Bench {
            n_states,
            model,
            table,
            threads,
            cold,
        } => {
            o.put("n_states", n_states);
            o.path("model", model);
            o.path("table", table);
            o.put("threads", threads);
            if cold {
                o.put("cold", Some(true));
            }
            ("bench", bench::DEFAULTS.to_vec(), bench::bench)
        }
    };
    o.0.extend(set);
    let cfg = RunConfig::resolve(name, &defaults, config.as_deref(), &o.0)?;
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir).map_err(|e| fsck_core::Error::io(&dir, e))?;
    cfg.echo()?;
    handler(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let top = Cli::parse();
    match run(top) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Data => 3,
                ErrorClass::Numeric => 4,
            })
        }
    }
}
