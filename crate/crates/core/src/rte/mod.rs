//! One-dimensional slab radiative transfer with correlated-k spectral
//! models: exact and P1 solvers, a line-by-line reference, Planck-mean
//! absorption coefficients and model comparison reports.
//!
//! Lengths are in metres and absorption coefficients from spectral models
//! in cm⁻¹; fluxes come out in W/m² and divergences in W/m³.

mod compare;
mod expint;
mod gray;
mod lbl;
mod models;

pub use compare::{compare_models, Comparison, Deviation, FieldDeviation};
pub use expint::expint;
pub use gray::P1_KAPPA_FLOOR;
pub use lbl::{planck_mean_fsck, planck_mean_lbl, solve_slab_lbl};
pub use models::{DiscreteModel, ExactModel, GrayModel, SfmModel, SpectralModel, TableModel};

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kdist::QuadratureSet;
use crate::spectra::planck::blackbody_intensity;
use crate::spectra::{check_temperature, ThermoState};

/// cm⁻¹ → m⁻¹.
pub(crate) const PER_CM: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Exact,
    P1,
}

/// Slab of uniform cells between two black walls.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabProblem {
    length: f64,
    cells: Vec<ThermoState>,
    wall_temperatures: [f64; 2],
    reference_temperature: f64,
}

impl SlabProblem {
    /// `wall_temperatures` of 0 mean cold walls; any other value must lie
    /// in the temperature envelope.
    pub fn new(
        length: f64,
        cells: Vec<ThermoState>,
        wall_temperatures: [f64; 2],
        reference_temperature: f64,
    ) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain(format!(
                "slab length must be positive, got {length}"
            )));
        }
        if cells.len() < 2 {
            return Err(Error::Domain(format!(
                "slab needs at least 2 cells, got {}",
                cells.len()
            )));
        }
        for &tw in &wall_temperatures {
            if tw != 0.0 {
                check_temperature("wall temperature", tw)?;
            }
        }
        check_temperature("reference temperature", reference_temperature)?;
        Ok(Self {
            length,
            cells,
            wall_temperatures,
            reference_temperature,
        })
    }

    pub fn uniform(
        length: f64,
        n_cells: usize,
        state: ThermoState,
        reference_temperature: f64,
    ) -> Result<Self> {
        Self::new(
            length,
            vec![state; n_cells],
            [0.0, 0.0],
            reference_temperature,
        )
    }

    /// Cells sampled from `profile` at their centres, given as x/L ∈ (0, 1).
    pub fn from_profile<F>(
        length: f64,
        n_cells: usize,
        reference_temperature: f64,
        profile: F,
    ) -> Result<Self>
    where
        F: Fn(f64) -> Result<ThermoState>,
    {
        let cells = (0..n_cells)
            .map(|i| profile((i as f64 + 0.5) / n_cells as f64))
            .collect::<Result<Vec<_>>>()?;
        Self::new(length, cells, [0.0, 0.0], reference_temperature)
    }

    /// Homogeneous isothermal slab at 1 750 K, 7.5 % CO₂, 17.5 % H₂O,
    /// 2.5 % CO, reference temperature 950 K, 0.5 m, 50 cells, cold walls.
    pub fn desk() -> Self {
        let state =
            ThermoState::new(1750.0, 0.075, 0.175, 0.025).expect("desk state is in the envelope");
        Self::uniform(0.5, 50, state, 950.0).expect("desk slab is valid")
    }

    /// Seeded random flame-like profile: a temperature bump between cool
    /// edges and composition following the temperature. The reference
    /// temperature is the cell-mean temperature rounded to 1 K.
    pub fn random_profile(seed: u64, length: f64, n_cells: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t_edge = rng.random_range(400.0..1000.0);
        let t_peak = rng.random_range(1400.0..2400.0);
        let centre = rng.random_range(0.3..0.7);
        let width = rng.random_range(0.15..0.35);
        let co2 = rng.random_range(0.02..0.15);
        let h2o = rng.random_range(0.05..0.25);
        let co = rng.random_range(0.0..0.05);
        let shape = |s: f64| (-((s - centre) / width).powi(2)).exp();
        let mean_t = (0..n_cells)
            .map(|i| t_edge + (t_peak - t_edge) * shape((i as f64 + 0.5) / n_cells as f64))
            .sum::<f64>()
            / n_cells as f64;
        Self::from_profile(length, n_cells, mean_t.round(), |s| {
            let f = shape(s);
            ThermoState::new(
                t_edge + (t_peak - t_edge) * f,
                co2 * (0.3 + 0.7 * f),
                h2o * (0.3 + 0.7 * f),
                co * f,
            )
        })
    }

    pub fn with_walls(mut self, wall_temperatures: [f64; 2]) -> Result<Self> {
        for &tw in &wall_temperatures {
            if tw != 0.0 {
                check_temperature("wall temperature", tw)?;
            }
        }
        self.wall_temperatures = wall_temperatures;
        Ok(self)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[ThermoState] {
        &self.cells
    }

    pub fn wall_temperatures(&self) -> [f64; 2] {
        self.wall_temperatures
    }

    pub fn reference_temperature(&self) -> f64 {
        self.reference_temperature
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells.len() as f64
    }

    pub fn faces(&self) -> Vec<f64> {
        (0..=self.n_cells()).map(|i| i as f64 * self.dx()).collect()
    }

    pub fn centres(&self) -> Vec<f64> {
        (0..self.n_cells())
            .map(|i| (i as f64 + 0.5) * self.dx())
            .collect()
    }
}

/// Radiative fields on the slab mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct RteSolution {
    pub model: String,
    pub faces: Vec<f64>,
    pub centres: Vec<f64>,
    /// Gas emission 4π·Σ w·ka·I_b(T) per cell (W/m³).
    pub emission: Vec<f64>,
    /// Flux at faces (W/m²), positive towards +x.
    pub q: Vec<f64>,
    /// Incident radiation per cell (W/m²).
    pub incident: Vec<f64>,
    /// Flux divergence per cell (W/m³).
    pub divq: Vec<f64>,
}

impl RteSolution {
    /// Flux averaged to cell centres.
    pub fn q_centres(&self) -> Vec<f64> {
        self.q.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// |∫∇·q dx − (q(L) − q(0))| relative to Σ|∇·q|Δx (or the flux jump,
    /// whichever is larger). Zero for an all-zero field.
    pub fn energy_residual(&self) -> f64 {
        let mut integral = 0.0;
        let mut abs = 0.0;
        for (c, d) in self.divq.iter().enumerate() {
            let h = self.faces[c + 1] - self.faces[c];
            integral += d * h;
            abs += d.abs() * h;
        }
        let jump = self.q[self.q.len() - 1] - self.q[0];
        let scale = abs.max(jump.abs());
        if scale == 0.0 {
            0.0
        } else {
            (integral - jump).abs() / scale
        }
    }
}

/// Per-node optical data of a slab under one spectral model.
pub(crate) struct NodeFields {
    /// [node][cell] k* in m⁻¹.
    kappa: Vec<Vec<f64>>,
    /// [node][cell] a·I_b(T).
    source: Vec<Vec<f64>>,
    /// [node] wall intensities.
    walls: Vec<[f64; 2]>,
    emission: Vec<f64>,
}

fn node_fields(
    problem: &SlabProblem,
    model: &dyn SpectralModel,
    quad: &QuadratureSet,
) -> Result<NodeFields> {
    let t0 = problem.reference_temperature();
    let per_cell = problem
        .cells()
        .par_iter()
        .map(|s| model.node_values(s, t0, quad))
        .collect::<Result<Vec<_>>>()?;
    let nq = quad.len();
    let n = problem.n_cells();
    let mut kappa = vec![vec![0.0; n]; nq];
    let mut source = vec![vec![0.0; n]; nq];
    let mut emission = vec![0.0; n];
    for (c, nodes) in per_cell.iter().enumerate() {
        if nodes.len() != nq {
            return Err(Error::Shape(format!(
                "{} returned {} nodes, expected {nq}",
                model.name(),
                nodes.len()
            )));
        }
        let ib = blackbody_intensity(problem.cells()[c].temperature());
        for (j, v) in nodes.iter().enumerate() {
            if v.kstar < 0.0 || v.ka < 0.0 {
                return Err(Error::Domain(format!(
                    "{} returned negative k* or ka in cell {c}, node {j}",
                    model.name()
                )));
            }
            kappa[j][c] = v.kstar * PER_CM;
            source[j][c] = if v.kstar > 0.0 {
                v.ka / v.kstar * ib
            } else {
                0.0
            };
        }
        emission[c] = 4.0
            * PI
            * PER_CM
            * ib
            * quad.integrate(&nodes.iter().map(|v| v.ka).collect::<Vec<_>>());
    }
    let mut walls = vec![[0.0; 2]; nq];
    for (side, &tw) in problem.wall_temperatures().iter().enumerate() {
        if tw == 0.0 {
            continue;
        }
        let adjacent = if side == 0 {
            problem.cells()[0]
        } else {
            problem.cells()[n - 1]
        };
        let nodes = model.node_values(&adjacent.with_temperature(tw)?, t0, quad)?;
        let ib = blackbody_intensity(tw);
        for (j, v) in nodes.iter().enumerate() {
            walls[j][side] = if v.kstar > 0.0 {
                v.ka / v.kstar * ib
            } else {
                ib
            };
        }
    }
    Ok(NodeFields {
        kappa,
        source,
        walls,
        emission,
    })
}

/// Solves every quadrature node as a gray problem and sums with the
/// quadrature weights (in node order).
pub fn solve_slab(
    problem: &SlabProblem,
    model: &dyn SpectralModel,
    quad: &QuadratureSet,
    solver: Solver,
) -> Result<RteSolution> {
    let fields = node_fields(problem, model, quad)?;
    let dx = vec![problem.dx(); problem.n_cells()];
    let per_node = (0..quad.len())
        .into_par_iter()
        .map(|j| match solver {
            Solver::Exact => {
                gray::gray_exact(&dx, &fields.kappa[j], &fields.source[j], fields.walls[j])
            }
            Solver::P1 => gray::gray_p1(&dx, &fields.kappa[j], &fields.source[j], fields.walls[j]),
        })
        .collect::<Result<Vec<_>>>()?;
    let n = problem.n_cells();
    let mut q = vec![0.0; n + 1];
    let mut incident = vec![0.0; n];
    let mut divq = vec![0.0; n];
    for (node, w) in per_node.iter().zip(quad.weights()) {
        for (a, b) in q.iter_mut().zip(&node.q) {
            *a += w * b;
        }
        for (a, b) in incident.iter_mut().zip(&node.g) {
            *a += w * b;
        }
        for (a, b) in divq.iter_mut().zip(&node.divq) {
            *a += w * b;
        }
    }
    Ok(RteSolution {
        model: model.name(),
        faces: problem.faces(),
        centres: problem.centres(),
        emission: fields.emission,
        q,
        incident,
        divq,
    })
}

/// Exact-kernel slab solution.
pub fn solve_slab_exact(
    problem: &SlabProblem,
    quad: &QuadratureSet,
    model: &dyn SpectralModel,
) -> Result<RteSolution> {
    solve_slab(problem, model, quad, Solver::Exact)
}

/// P1 slab solution.
pub fn solve_slab_p1(
    problem: &SlabProblem,
    quad: &QuadratureSet,
    model: &dyn SpectralModel,
) -> Result<RteSolution> {
    solve_slab(problem, model, quad, Solver::P1)
}
