//! Sampling of the thermodynamic envelope, oracle labelling and the
//! training corpus CSV.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kdist::{ExactOracle, QuadratureSet};
use crate::spectra::{SpectralGrid, ThermoState};

/// CO₂ and H₂O mole-fraction values (dense below 0.05).
pub const TABLE1_X_MAJOR: [f64; 18] = [
    0.0, 0.005, 0.01, 0.015, 0.02, 0.025, 0.03, 0.035, 0.04, 0.045, 0.05, 0.1, 0.15, 0.2, 0.25,
    0.5, 0.75, 1.0,
];

/// CO mole-fraction values.
pub const TABLE1_X_CO: [f64; 9] = [0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.1, 0.25, 0.5];

/// 300, 400, …, 3000 K.
pub fn table1_temperatures() -> Vec<f64> {
    (3..=30).map(|i| 100.0 * i as f64).collect()
}

pub const CORPUS_HEADER: &str = "T,T0,xco2,xh2o,xco,g,k,ka";

/// Uniform draws of (state, T0) from the Table-1 value sets.
///
/// T and T0 are drawn independently. The three mole fractions are drawn
/// independently and the triple is redrawn when it sums past one or is
/// all zero.
pub fn sample_states(n: usize, seed: u64) -> Vec<(ThermoState, f64)> {
    let temps = table1_temperatures();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let t = temps[rng.random_range(0..temps.len())];
            let t0 = temps[rng.random_range(0..temps.len())];
            let x = loop {
                let x = [
                    TABLE1_X_MAJOR[rng.random_range(0..TABLE1_X_MAJOR.len())],
                    TABLE1_X_MAJOR[rng.random_range(0..TABLE1_X_MAJOR.len())],
                    TABLE1_X_CO[rng.random_range(0..TABLE1_X_CO.len())],
                ];
                let sum: f64 = x.iter().sum();
                if sum > 0.0 && sum <= 1.0 {
                    break x;
                }
            };
            let state =
                ThermoState::new(t, x[0], x[1], x[2]).expect("Table-1 values are in the envelope");
            (state, t0)
        })
        .collect()
}

/// One corpus row: network inputs and the two labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingRow {
    pub t: f64,
    pub t0: f64,
    pub x_co2: f64,
    pub x_h2o: f64,
    pub x_co: f64,
    pub g: f64,
    pub k: f64,
    pub ka: f64,
}

impl TrainingRow {
    /// `[T, T0, x_CO2, x_H2O, x_CO, g]`.
    pub fn inputs(&self) -> [f64; 6] {
        [self.t, self.t0, self.x_co2, self.x_h2o, self.x_co, self.g]
    }

    pub fn targets(&self) -> [f64; 2] {
        [self.k, self.ka]
    }

    fn check(&self) -> std::result::Result<(), String> {
        let fields = [
            self.t, self.t0, self.x_co2, self.x_h2o, self.x_co, self.g, self.k, self.ka,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err("non-finite value".into());
        }
        for (name, t) in [("T", self.t), ("T0", self.t0)] {
            if !(ThermoState::T_MIN..=ThermoState::T_MAX).contains(&t) {
                return Err(format!("{name} = {t} outside [300, 3000] K"));
            }
        }
        if let Err(e) = ThermoState::new(self.t, self.x_co2, self.x_h2o, self.x_co) {
            return Err(e.to_string());
        }
        if !(self.g > 0.0 && self.g < 1.0) {
            return Err(format!("g = {} outside (0, 1)", self.g));
        }
        if !(self.k > 0.0 && self.ka > 0.0) {
            return Err(format!(
                "labels must be positive, got k = {}, ka = {}",
                self.k, self.ka
            ));
        }
        Ok(())
    }
}

/// Labels every state with the exact oracle at the quadrature nodes.
///
/// States are processed in parallel; rows come out in state order × node order.
pub fn label_states(
    states: &[(ThermoState, f64)],
    quad: &QuadratureSet,
    oracle: &ExactOracle,
) -> Result<Vec<TrainingRow>> {
    let per_state: Vec<Vec<TrainingRow>> = states
        .par_iter()
        .map(|(state, t0)| {
            let nodes = oracle.kdist_at_state(state, *t0, quad).map_err(|e| {
                Error::Domain(format!(
                    "labelling failed at T = {}, T0 = {t0}, x = {:?}: {e}",
                    state.temperature(),
                    state.fractions()
                ))
            })?;
            Ok(nodes
                .into_iter()
                .map(|v| TrainingRow {
                    t: state.temperature(),
                    t0: *t0,
                    x_co2: state.x_co2(),
                    x_h2o: state.x_h2o(),
                    x_co: state.x_co(),
                    g: v.g,
                    k: v.kstar,
                    ka: v.ka,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_state.into_iter().flatten().collect())
}

pub fn write_corpus(rows: &[TrainingRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(fs::File::create(path).map_err(io)?);
    writeln!(out, "{CORPUS_HEADER}").map_err(io)?;
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t, r.t0, r.x_co2, r.x_h2o, r.x_co, r.g, r.k, r.ka
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Reads and validates a corpus file. An empty file, or one with only a
/// header, is an error.
pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<TrainingRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        None => return Err(Error::Empty(format!("corpus {} is empty", path.display()))),
        Some((_, h)) if h.trim() != CORPUS_HEADER => {
            return Err(Error::parse(
                path,
                1,
                format!("expected header `{CORPUS_HEADER}`, found `{}`", h.trim()),
            ));
        }
        Some(_) => {}
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 8 fields, found {}", fields.len()),
            ));
        }
        let mut v = [0.0; 8];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f.trim().parse().map_err(|_| {
                Error::parse(path, line_no, format!("not a number: `{}`", f.trim()))
            })?;
        }
        let row = TrainingRow {
            t: v[0],
            t0: v[1],
            x_co2: v[2],
            x_h2o: v[3],
            x_co: v[4],
            g: v[5],
            k: v[6],
            ka: v[7],
        };
        row.check().map_err(|m| Error::parse(path, line_no, m))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Empty(format!(
            "corpus {} has no rows",
            path.display()
        )));
    }
    Ok(rows)
}

/// Checks that every row's g is one of the quadrature nodes.
pub fn check_nodes(rows: &[TrainingRow], quad: &QuadratureSet) -> Result<()> {
    for (i, r) in rows.iter().enumerate() {
        if !quad.nodes().iter().any(|&g| (g - r.g).abs() <= 1e-12) {
            return Err(Error::Domain(format!(
                "row {} has g = {} which is not a node of the {}-point quadrature",
                i + 1,
                r.g,
                quad.len()
            )));
        }
    }
    Ok(())
}

/// Provenance record written next to a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusManifest {
    pub seed: u64,
    pub n_states: usize,
    pub quad_nodes: usize,
    pub grid: SpectralGrid,
    pub catalog_seed: u64,
    pub lines_per_species: usize,
    pub rows: usize,
}

impl CorpusManifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "n_states = {}", self.n_states);
        let _ = writeln!(s, "rows = {}", self.rows);
        let _ = writeln!(s, "quad = gauss-chebyshev");
        let _ = writeln!(s, "quad_nodes = {}", self.quad_nodes);
        let _ = writeln!(s, "grid_start = {}", self.grid.start());
        let _ = writeln!(s, "grid_step = {}", self.grid.step());
        let _ = writeln!(s, "grid_len = {}", self.grid.len());
        let _ = writeln!(s, "catalog_seed = {}", self.catalog_seed);
        let _ = writeln!(s, "lines_per_species = {}", self.lines_per_species);
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }
}
