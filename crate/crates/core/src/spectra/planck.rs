//! Planck's law in wavenumber form.
//!
//! Wavenumbers are in cm⁻¹, temperatures in K, spectral intensities in
//! W·m⁻²·sr⁻¹·(cm⁻¹)⁻¹ and total intensities in W·m⁻²·sr⁻¹.

use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::SpectralGrid;

/// Planck constant (J·s).
const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum (m/s).
const LIGHT_SPEED: f64 = 299_792_458.0;
/// Boltzmann constant (J/K).
const BOLTZMANN: f64 = 1.380_649e-23;

/// First radiation constant 2hc², rescaled for wavenumbers in cm⁻¹.
pub const FIRST_RADIATION_CONSTANT: f64 = 2.0 * PLANCK * LIGHT_SPEED * LIGHT_SPEED * 1.0e8;
/// Second radiation constant hc/k (cm·K).
pub const SECOND_RADIATION_CONSTANT: f64 = PLANCK * LIGHT_SPEED / BOLTZMANN * 100.0;
/// Stefan–Boltzmann constant (W·m⁻²·K⁻⁴).
pub const STEFAN_BOLTZMANN: f64 = 5.670_374_419e-8;

/// π⁴/15, the value of ∫₀^∞ t³/(eᵗ − 1) dt.
const PLANCK_INTEGRAL: f64 = PI * PI * PI * PI / 15.0;

/// Spectral blackbody intensity I_bη(T).
pub fn planck_intensity(temperature: f64, eta: f64) -> Result<f64> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::Domain(format!(
            "Planck temperature must be positive, got {temperature}"
        )));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Domain(format!(
            "wavenumber must be positive, got {eta}"
        )));
    }
    Ok(planck_unchecked(temperature, eta))
}

#[inline]
pub(crate) fn planck_unchecked(temperature: f64, eta: f64) -> f64 {
    FIRST_RADIATION_CONSTANT * eta * eta * eta
        / (SECOND_RADIATION_CONSTANT * eta / temperature).exp_m1()
}

/// Total blackbody intensity σT⁴/π.
pub fn blackbody_intensity(temperature: f64) -> f64 {
    STEFAN_BOLTZMANN * temperature.powi(4) / PI
}

/// Fraction of blackbody emission at `temperature` below wavenumber `eta`.
pub fn fraction_below(temperature: f64, eta: f64) -> f64 {
    if eta <= 0.0 {
        return 0.0;
    }
    let x = SECOND_RADIATION_CONSTANT * eta / temperature;
    if x < 0.5 {
        lower_series(x) / PLANCK_INTEGRAL
    } else {
        1.0 - upper_tail(x) / PLANCK_INTEGRAL
    }
}

/// ∫₀ˣ t³/(eᵗ − 1) dt from the Bernoulli expansion, integrated term by term.
fn lower_series(x: f64) -> f64 {
    let x2 = x * x;
    let x3 = x2 * x;
    x3 / 3.0 - x3 * x / 8.0 + x3 * x2 / 60.0 - x3 * x2 * x2 / 5040.0 + x3 * x2 * x2 * x2 / 272_160.0
        - x3 * x2 * x2 * x2 * x2 / 13_305_600.0
}

/// ∫ₓ^∞ t³/(eᵗ − 1) dt as a geometric series in e⁻ˣ.
fn upper_tail(x: f64) -> f64 {
    let (x2, x3) = (x * x, x * x * x);
    let mut sum = 0.0;
    for n in 1..=200 {
        let nf = n as f64;
        let term = (-nf * x).exp()
            * (x3 / nf + 3.0 * x2 / (nf * nf) + 6.0 * x / nf.powi(3) + 6.0 / nf.powi(4));
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Blackbody intensity emitted between two wavenumbers, evaluated analytically.
pub fn band_intensity(temperature: f64, eta_lo: f64, eta_hi: f64) -> f64 {
    let lo = fraction_below(temperature, eta_lo);
    let hi = fraction_below(temperature, eta_hi);
    (hi - lo) * blackbody_intensity(temperature)
}

/// ∫₀^∞ I_bη dη: composite trapezoid over `grid` plus analytic tails on
/// both sides of it.
pub fn integrated_intensity(grid: &SpectralGrid, temperature: f64) -> f64 {
    let n = grid.len();
    let mut interior = 0.0;
    for i in 0..n {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        interior += w * planck_unchecked(temperature, grid.eta(i));
    }
    interior *= grid.step();
    let total = blackbody_intensity(temperature);
    let below = fraction_below(temperature, grid.start()) * total;
    let above = (1.0 - fraction_below(temperature, grid.end())) * total;
    interior + below + above
}

/// Planck intensities at every grid point.
pub fn planck_on_grid(grid: &SpectralGrid, temperature: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|i| planck_unchecked(temperature, grid.eta(i)))
        .collect()
}

/// In-band blackbody intensity Σ I_bη Δη on the grid (rectangle rule, the
/// same weighting used when reordering spectra).
pub fn grid_intensity(grid: &SpectralGrid, temperature: f64) -> f64 {
    planck_on_grid(grid, temperature).iter().sum::<f64>() * grid.step()
}
