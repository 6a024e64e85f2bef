//! Absorption spectra of CO₂–H₂O–CO–N₂ mixtures and blackbody functions.
//!
//! Spectra are synthesised from a seeded Lorentz line catalog (see
//! [`LineCatalog`]) or imported from a two-column CSV file.

mod catalog;
mod io;
pub mod planck;
mod synth;

pub use catalog::{LineCatalog, SpeciesLines, DEFAULT_CATALOG_SEED, LINES_PER_SPECIES};
pub use io::{load_spectrum_csv, write_spectrum_csv, SPECTRUM_CSV_HEADER};
pub use planck::planck_intensity;
pub use synth::{synth_spectrum, unit_spectrum, SpectrumCache, UnitSpectra};

use crate::error::{Error, Result};

/// Absorbing species, in the fixed order used for every per-species array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    CO2,
    H2O,
    CO,
}

impl Species {
    pub const ALL: [Species; 3] = [Species::CO2, Species::H2O, Species::CO];

    pub fn index(self) -> usize {
        match self {
            Species::CO2 => 0,
            Species::H2O => 1,
            Species::CO => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Species::CO2 => "CO2",
            Species::H2O => "H2O",
            Species::CO => "CO",
        }
    }
}

/// Local thermodynamic state: gas temperature and absorber mole fractions
/// at a fixed total pressure of 1 atm. The remainder of the mixture is N₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoState {
    temperature: f64,
    fractions: [f64; 3],
}

impl ThermoState {
    pub const T_MIN: f64 = 300.0;
    pub const T_MAX: f64 = 3000.0;
    pub const X_CO_MAX: f64 = 0.5;
    /// Total pressure (atm).
    pub const PRESSURE: f64 = 1.0;

    pub fn new(temperature: f64, x_co2: f64, x_h2o: f64, x_co: f64) -> Result<Self> {
        let state = Self::new_relaxed(temperature, [x_co2, x_h2o, x_co])?;
        let total: f64 = state.fractions.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::Range {
                quantity: "sum of absorber mole fractions",
                value: total,
                min: 0.0,
                max: 1.0,
            });
        }
        Ok(state)
    }

    /// Like [`ThermoState::new`] but without the Σx ≤ 1 check.
    ///
    /// Spectra are linear in the mole fractions, so the spectral oracle is
    /// well defined there; look-up table corners with Σx > 1 are built this way.
    pub fn new_relaxed(temperature: f64, fractions: [f64; 3]) -> Result<Self> {
        check_temperature("temperature", temperature)?;
        for (species, &x) in Species::ALL.iter().zip(&fractions) {
            let max = if *species == Species::CO {
                Self::X_CO_MAX
            } else {
                1.0
            };
            if !(0.0..=max).contains(&x) {
                return Err(Error::Range {
                    quantity: match species {
                        Species::CO2 => "x_CO2",
                        Species::H2O => "x_H2O",
                        Species::CO => "x_CO",
                    },
                    value: x,
                    min: 0.0,
                    max,
                });
            }
        }
        Ok(Self {
            temperature,
            fractions,
        })
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn x_co2(&self) -> f64 {
        self.fractions[0]
    }

    pub fn x_h2o(&self) -> f64 {
        self.fractions[1]
    }

    pub fn x_co(&self) -> f64 {
        self.fractions[2]
    }

    pub fn fractions(&self) -> [f64; 3] {
        self.fractions
    }

    pub fn pressure(&self) -> f64 {
        Self::PRESSURE
    }

    /// Same composition at another temperature.
    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        check_temperature("temperature", temperature)?;
        Ok(Self {
            temperature,
            fractions: self.fractions,
        })
    }
}

/// Range check for any temperature that enters the model (gas, Planck or
/// reference temperature).
pub fn check_temperature(quantity: &'static str, t: f64) -> Result<()> {
    if !(ThermoState::T_MIN..=ThermoState::T_MAX).contains(&t) {
        return Err(Error::Range {
            quantity,
            value: t,
            min: ThermoState::T_MIN,
            max: ThermoState::T_MAX,
        });
    }
    Ok(())
}

/// Uniform wavenumber grid `start + i·step`, `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl Default for SpectralGrid {
    /// 150–9300 cm⁻¹ at 0.1 cm⁻¹ (91,501 points).
    fn default() -> Self {
        Self {
            start: 150.0,
            step: 0.1,
            len: 91_501,
        }
    }
}

impl SpectralGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(start > 0.0) || !start.is_finite() {
            return Err(Error::Domain(format!(
                "grid start must be positive, got {start}"
            )));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Domain(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if len < 2 {
            return Err(Error::Domain(format!(
                "grid needs at least 2 points, got {len}"
            )));
        }
        Ok(Self { start, step, len })
    }

    /// Grid covering `[start, end]` inclusive.
    pub fn from_range(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(end > start) {
            return Err(Error::Domain(format!(
                "empty spectral range [{start}, {end}]"
            )));
        }
        let len = ((end - start) / step).round() as usize + 1;
        Self::new(start, step, len)
    }

    #[inline]
    pub fn eta(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.eta(self.len - 1)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Same range, step divided by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            start: self.start,
            step: self.step / factor as f64,
            len: (self.len - 1) * factor + 1,
        }
    }
}

/// Absorption coefficient κ_η (cm⁻¹) on a uniform wavenumber grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: SpectralGrid,
    kappa: Vec<f64>,
    state: Option<ThermoState>,
}

impl SpectralField {
    /// Validates κ ≥ 0, finite, and length agreement with the grid.
    pub fn new(grid: SpectralGrid, kappa: Vec<f64>, state: Option<ThermoState>) -> Result<Self> {
        if kappa.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} absorption coefficients for {} grid points",
                kappa.len(),
                grid.len()
            )));
        }
        if let Some(i) = kappa.iter().position(|k| !(*k >= 0.0) || !k.is_finite()) {
            return Err(Error::Domain(format!(
                "absorption coefficient {} at eta = {} must be finite and non-negative",
                kappa[i],
                grid.eta(i)
            )));
        }
        Ok(Self { grid, kappa, state })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn state(&self) -> Option<&ThermoState> {
        self.state.as_ref()
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.kappa
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &k| {
                (lo.min(k), hi.max(k))
            })
    }
}
