//! Lorentz line-superposition spectra.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

use super::catalog::REFERENCE_TEMPERATURE;
use super::planck::planck_on_grid;
use super::{check_temperature, LineCatalog, Species, SpectralField, SpectralGrid, ThermoState};

/// Second radiation constant used in the line-strength Boltzmann factor (cm·K).
const LINE_C2: f64 = 1.4388;

/// Absorption coefficient per unit partial pressure (cm⁻¹·atm⁻¹) of one
/// species at temperature `t`: Σ_lines S(T)·(γ/π)/((η−η_c)² + γ²).
///
/// Lines are accumulated in catalog order at every grid point, so the result
/// is independent of how the work is split.
pub fn unit_spectrum(
    catalog: &LineCatalog,
    species: Species,
    t: f64,
    grid: &SpectralGrid,
) -> Vec<f64> {
    let lines = catalog.lines(species);
    let etas: Vec<f64> = (0..grid.len()).map(|i| grid.eta(i)).collect();
    let mut kappa = vec![0.0; grid.len()];
    let ratio = REFERENCE_TEMPERATURE / t;
    for l in 0..lines.len() {
        let center = lines.centers[l];
        let (amplitude, gamma2) = line_shape(
            lines.strengths[l],
            lines.lower_energies[l],
            lines.half_widths[l],
            t,
            ratio,
        );
        for (k, &eta) in kappa.iter_mut().zip(&etas) {
            let d = eta - center;
            *k += amplitude / (d * d + gamma2);
        }
    }
    kappa
}

/// (S(T)·γ/π, γ²) for one line.
#[inline]
pub(crate) fn line_shape(
    s0: f64,
    lower_energy: f64,
    gamma0: f64,
    t: f64,
    ratio: f64,
) -> (f64, f64) {
    let strength = s0
        * ratio.powf(1.5)
        * (-LINE_C2 * lower_energy * (1.0 / t - 1.0 / REFERENCE_TEMPERATURE)).exp();
    let gamma = gamma0 * ratio.sqrt();
    (strength * gamma / PI, gamma * gamma)
}

/// Per-species unit spectra at one temperature.
#[derive(Debug, Clone)]
pub struct UnitSpectra {
    temperature: f64,
    species: [Vec<f64>; 3],
}

impl UnitSpectra {
    pub fn compute(catalog: &LineCatalog, t: f64, grid: &SpectralGrid) -> Self {
        Self {
            temperature: t,
            species: Species::ALL.map(|s| unit_spectrum(catalog, s, t, grid)),
        }
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn species(&self, s: Species) -> &[f64] {
        &self.species[s.index()]
    }

    /// κ_η = p·Σ_s x_s·K_s, summed in [`Species::ALL`] order.
    pub fn combine(&self, fractions: [f64; 3]) -> Vec<f64> {
        let coef = fractions.map(|x| ThermoState::PRESSURE * x);
        let [a, b, c] = &self.species;
        a.iter()
            .zip(b)
            .zip(c)
            .map(|((ka, kb), kc)| 0.0 + coef[0] * ka + coef[1] * kb + coef[2] * kc)
            .collect()
    }
}

fn check_coverage(catalog: &LineCatalog, grid: &SpectralGrid) -> Result<()> {
    let (lo, hi) = catalog.eta_bounds();
    if lo < grid.start() || hi > grid.end() {
        return Err(Error::Domain(format!(
            "grid [{}, {}] does not cover the catalog range [{lo}, {hi}]",
            grid.start(),
            grid.end()
        )));
    }
    Ok(())
}

/// Absorption spectrum of `state` on `grid`.
pub fn synth_spectrum(
    state: &ThermoState,
    catalog: &LineCatalog,
    grid: &SpectralGrid,
) -> Result<SpectralField> {
    check_temperature("temperature", state.temperature())?;
    check_coverage(catalog, grid)?;
    let units = UnitSpectra::compute(catalog, state.temperature(), grid);
    SpectralField::new(*grid, units.combine(state.fractions()), Some(*state))
}

const CACHE_CAPACITY: usize = 64;

/// Shared, bounded cache of unit spectra and Planck weights keyed by
/// temperature. Training temperatures come from a small discrete set, so
/// labelling thousands of states only synthesises a few dozen spectra.
#[derive(Debug)]
pub struct SpectrumCache {
    catalog: LineCatalog,
    grid: SpectralGrid,
    units: Mutex<HashMap<u64, Arc<UnitSpectra>>>,
    planck: Mutex<HashMap<u64, Arc<Vec<f64>>>>,
}

impl SpectrumCache {
    pub fn new(catalog: LineCatalog, grid: SpectralGrid) -> Result<Self> {
        check_coverage(&catalog, &grid)?;
        Ok(Self {
            catalog,
            grid,
            units: Mutex::new(HashMap::new()),
            planck: Mutex::new(HashMap::new()),
        })
    }

    pub fn catalog(&self) -> &LineCatalog {
        &self.catalog
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn unit_spectra(&self, t: f64) -> Arc<UnitSpectra> {
        if let Some(hit) = self.units.lock().unwrap().get(&t.to_bits()) {
            return Arc::clone(hit);
        }
        let computed = Arc::new(UnitSpectra::compute(&self.catalog, t, &self.grid));
        let mut map = self.units.lock().unwrap();
        if map.len() >= CACHE_CAPACITY {
            map.clear();
        }
        Arc::clone(map.entry(t.to_bits()).or_insert(computed))
    }

    /// I_bη(t) at every grid point.
    pub fn planck_weights(&self, t: f64) -> Arc<Vec<f64>> {
        if let Some(hit) = self.planck.lock().unwrap().get(&t.to_bits()) {
            return Arc::clone(hit);
        }
        let computed = Arc::new(planck_on_grid(&self.grid, t));
        let mut map = self.planck.lock().unwrap();
        if map.len() >= CACHE_CAPACITY {
            map.clear();
        }
        Arc::clone(map.entry(t.to_bits()).or_insert(computed))
    }

    /// Same result as [`synth_spectrum`], with the per-species work cached.
    pub fn spectrum(&self, state: &ThermoState) -> Result<SpectralField> {
        check_temperature("temperature", state.temperature())?;
        let units = self.unit_spectra(state.temperature());
        SpectralField::new(self.grid, units.combine(state.fractions()), Some(*state))
    }
}
