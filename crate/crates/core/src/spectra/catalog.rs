//! Seeded synthetic line catalogs.
//!
//! Each species gets a handful of vibration–rotation bands placed near the
//! real CO₂, H₂O and CO band centres. Lines are scattered across each band;
//! the lower-state energy grows quadratically away from the band centre
//! (high rotational levels sit in the band wings) and a fraction of lines
//! are hot-band lines with an extra vibrational offset. This reproduces the
//! qualitative temperature behaviour of real spectra: bands broaden and
//! weak high-energy lines strengthen as the gas heats up.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::planck::SECOND_RADIATION_CONSTANT;
use super::{Species, SpectralGrid};

pub const LINES_PER_SPECIES: usize = 200;
pub const DEFAULT_CATALOG_SEED: u64 = 7;

/// Reference temperature of tabulated line strengths (K).
pub(crate) const REFERENCE_TEMPERATURE: f64 = 300.0;

struct Band {
    /// Band centre (cm⁻¹).
    center: f64,
    /// Half-width of the region populated by lines (cm⁻¹).
    half_width: f64,
    /// Fraction of the species' lines placed in this band.
    share: f64,
    /// Integrated band strength at 300 K (cm⁻²·atm⁻¹).
    strength: f64,
}

const CO2_BANDS: &[Band] = &[
    Band {
        center: 667.0,
        half_width: 90.0,
        share: 0.3,
        strength: 220.0,
    },
    Band {
        center: 1000.0,
        half_width: 90.0,
        share: 0.1,
        strength: 0.5,
    },
    Band {
        center: 2349.0,
        half_width: 80.0,
        share: 0.35,
        strength: 2700.0,
    },
    Band {
        center: 3700.0,
        half_width: 110.0,
        share: 0.25,
        strength: 80.0,
    },
];

const H2O_BANDS: &[Band] = &[
    Band {
        center: 420.0,
        half_width: 260.0,
        share: 0.3,
        strength: 500.0,
    },
    Band {
        center: 1595.0,
        half_width: 220.0,
        share: 0.3,
        strength: 300.0,
    },
    Band {
        center: 3756.0,
        half_width: 220.0,
        share: 0.3,
        strength: 230.0,
    },
    Band {
        center: 5330.0,
        half_width: 150.0,
        share: 0.1,
        strength: 30.0,
    },
];

const CO_BANDS: &[Band] = &[
    Band {
        center: 2143.0,
        half_width: 130.0,
        share: 0.8,
        strength: 270.0,
    },
    Band {
        center: 4260.0,
        half_width: 110.0,
        share: 0.2,
        strength: 2.0,
    },
];

fn bands(species: Species) -> &'static [Band] {
    match species {
        Species::CO2 => CO2_BANDS,
        Species::H2O => H2O_BANDS,
        Species::CO => CO_BANDS,
    }
}

/// Line parameters of one species, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesLines {
    /// Line centres η_c (cm⁻¹).
    pub centers: Vec<f64>,
    /// Strengths at 300 K (cm⁻²·atm⁻¹).
    pub strengths: Vec<f64>,
    /// Lower-state energies E″ (cm⁻¹).
    pub lower_energies: Vec<f64>,
    /// Lorentz half-widths at 300 K (cm⁻¹).
    pub half_widths: Vec<f64>,
}

impl SpeciesLines {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Deterministic line catalog for CO₂, H₂O and CO.
#[derive(Debug, Clone, PartialEq)]
pub struct LineCatalog {
    seed: u64,
    species: [SpeciesLines; 3],
}

impl LineCatalog {
    /// Default catalog for `grid`: [`LINES_PER_SPECIES`] lines per species.
    pub fn for_grid(seed: u64, grid: &SpectralGrid) -> Self {
        Self::generate(seed, LINES_PER_SPECIES, grid.start(), grid.end())
            .expect("default band layout fits the default grid")
    }

    /// Draws `lines_per_species` lines per species, all centred inside
    /// `[eta_min, eta_max]`.
    pub fn generate(
        seed: u64,
        lines_per_species: usize,
        eta_min: f64,
        eta_max: f64,
    ) -> Result<Self> {
        if lines_per_species == 0 {
            return Err(Error::Domain(
                "catalog needs at least one line per species".into(),
            ));
        }
        if !(eta_max > eta_min) {
            return Err(Error::Domain(format!(
                "empty spectral range [{eta_min}, {eta_max}]"
            )));
        }
        let species =
            Species::ALL.map(|s| generate_species(seed, s, lines_per_species, eta_min, eta_max));
        for (s, lines) in Species::ALL.iter().zip(&species) {
            if lines.is_empty() {
                return Err(Error::Domain(format!(
                    "no {} band overlaps [{eta_min}, {eta_max}]",
                    s.name()
                )));
            }
        }
        Ok(Self { seed, species })
    }

    /// Builds a catalog from explicit line lists (all species in
    /// [`Species::ALL`] order).
    pub fn from_lines(seed: u64, species: [SpeciesLines; 3]) -> Result<Self> {
        for lines in &species {
            let n = lines.centers.len();
            if lines.strengths.len() != n
                || lines.lower_energies.len() != n
                || lines.half_widths.len() != n
            {
                return Err(Error::Shape(
                    "line parameter columns differ in length".into(),
                ));
            }
            if lines.strengths.iter().any(|s| !(*s > 0.0))
                || lines.half_widths.iter().any(|g| !(*g > 0.0))
            {
                return Err(Error::Domain(
                    "line strengths and half-widths must be positive".into(),
                ));
            }
        }
        Ok(Self { seed, species })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn lines(&self, species: Species) -> &SpeciesLines {
        &self.species[species.index()]
    }

    pub fn eta_bounds(&self) -> (f64, f64) {
        self.species
            .iter()
            .flat_map(|s| s.centers.iter())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
                (lo.min(c), hi.max(c))
            })
    }
}

fn generate_species(
    seed: u64,
    species: Species,
    n: usize,
    eta_min: f64,
    eta_max: f64,
) -> SpeciesLines {
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed ^ (0x9e37_79b9_7f4a_7c15_u64.wrapping_mul(species.index() as u64 + 1)),
    );
    let bands: Vec<&Band> = bands(species)
        .iter()
        .filter(|b| b.center + b.half_width > eta_min && b.center - b.half_width < eta_max)
        .collect();
    let total_share: f64 = bands.iter().map(|b| b.share).sum();

    let mut lines = SpeciesLines {
        centers: Vec::with_capacity(n),
        strengths: Vec::with_capacity(n),
        lower_energies: Vec::with_capacity(n),
        half_widths: Vec::with_capacity(n),
    };
    let mut assigned = 0;
    for (b, band) in bands.iter().enumerate() {
        let count = if b + 1 == bands.len() {
            n - assigned
        } else {
            ((band.share / total_share) * n as f64).round() as usize
        };
        assigned += count;

        let lo = (band.center - band.half_width).max(eta_min);
        let hi = (band.center + band.half_width).min(eta_max);
        let mut intrinsic = Vec::with_capacity(count);
        let start = lines.centers.len();
        for _ in 0..count {
            let center = rng.random_range(lo..hi);
            let offset = ((center - band.center) / band.half_width).abs().min(1.0);
            let hot = if rng.random::<f64>() < 0.3 {
                rng.random_range(500.0..2500.0)
            } else {
                0.0
            };
            let lower_energy = 3000.0 * offset * offset + hot + rng.random_range(0.0..50.0);
            // Two decades of intrinsic strength scatter.
            let scatter = 10f64.powf(rng.random_range(-2.0..0.0));
            let half_width = rng.random_range(0.05..0.5);
            lines.centers.push(center);
            lines.lower_energies.push(lower_energy);
            lines.half_widths.push(half_width);
            intrinsic.push(
                scatter * (-SECOND_RADIATION_CONSTANT * lower_energy / REFERENCE_TEMPERATURE).exp(),
            );
        }
        let norm: f64 = intrinsic.iter().sum();
        lines
            .strengths
            .extend(intrinsic.iter().map(|s| band.strength * s / norm));
        debug_assert_eq!(lines.centers.len(), start + count);
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_seed() {
        let a = LineCatalog::generate(11, 50, 150.0, 9300.0).unwrap();
        let b = LineCatalog::generate(11, 50, 150.0, 9300.0).unwrap();
        let c = LineCatalog::generate(12, 50, 150.0, 9300.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn lines_inside_range_with_positive_parameters() {
        let grid = SpectralGrid::default();
        let cat = LineCatalog::for_grid(DEFAULT_CATALOG_SEED, &grid);
        for s in Species::ALL {
            let lines = cat.lines(s);
            assert_eq!(lines.len(), LINES_PER_SPECIES);
            assert!(lines
                .centers
                .iter()
                .all(|c| (grid.start()..=grid.end()).contains(c)));
            assert!(lines.strengths.iter().all(|v| *v > 0.0));
            assert!(lines.half_widths.iter().all(|v| (0.05..0.5).contains(v)));
        }
    }

    #[test]
    fn band_strength_is_preserved_at_reference_temperature() {
        let cat = LineCatalog::generate(3, 200, 150.0, 9300.0).unwrap();
        let total: f64 = cat.lines(Species::CO).strengths.iter().sum();
        assert!((total - 272.0).abs() < 1e-9);
    }
}
