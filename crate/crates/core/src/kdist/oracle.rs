use crate::error::Result;
use crate::spectra::{
    check_temperature, LineCatalog, SpectralField, SpectralGrid, SpectrumCache, ThermoState,
};

use super::distribution::{ensure_absorbing, KDistribution, Reordering};
use super::quadrature::{gauss_chebyshev, QuadratureSet};
use super::stretch::{stretch_discrete, stretch_from_distributions, StretchProfile};

/// One quadrature node of a spectral model: (g_j, k*_j, (ka)_j).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeValues {
    pub g: f64,
    pub kstar: f64,
    pub ka: f64,
}

impl NodeValues {
    pub fn a(&self) -> f64 {
        if self.kstar > 0.0 {
            self.ka / self.kstar
        } else {
            1.0
        }
    }
}

/// Exact spectral oracle: synthesise → reorder → stretch.
///
/// Produces the labels for training data and look-up tables. Unit spectra and
/// Planck weights are cached per temperature, so the oracle is cheap to call
/// repeatedly on the discrete training temperatures.
#[derive(Debug)]
pub struct ExactOracle {
    cache: SpectrumCache,
}

impl ExactOracle {
    pub fn new(catalog: LineCatalog, grid: SpectralGrid) -> Result<Self> {
        Ok(Self {
            cache: SpectrumCache::new(catalog, grid)?,
        })
    }

    pub fn cache(&self) -> &SpectrumCache {
        &self.cache
    }

    pub fn spectrum(&self, state: &ThermoState) -> Result<SpectralField> {
        self.cache.spectrum(state)
    }

    /// Distributions of the local spectrum weighted at the gas temperature
    /// and at `t0`.
    pub fn distributions(
        &self,
        state: &ThermoState,
        t0: f64,
    ) -> Result<(KDistribution, KDistribution)> {
        check_temperature("reference temperature", t0)?;
        let field = self.cache.spectrum(state)?;
        ensure_absorbing(&field)?;
        let reordering = Reordering::new(field.kappa());
        let t = state.temperature();
        let dist_t0 = reordering.distribution(&self.cache.planck_weights(t0), t0, Some(*state));
        let dist_t = if t == t0 {
            dist_t0.clone()
        } else {
            reordering.distribution(&self.cache.planck_weights(t), t, Some(*state))
        };
        Ok((dist_t, dist_t0))
    }

    /// Exact stretch profile at arbitrary g0 nodes.
    pub fn stretch(
        &self,
        state: &ThermoState,
        t0: f64,
        g0_nodes: &[f64],
    ) -> Result<StretchProfile> {
        let (dist_t, dist_t0) = self.distributions(state, t0)?;
        stretch_from_distributions(&dist_t, &dist_t0, g0_nodes)
    }

    /// Labelling pipeline: (g_j, k*_j, (ka)_j) at the quadrature nodes.
    pub fn kdist_at_state(
        &self,
        state: &ThermoState,
        t0: f64,
        quad: &QuadratureSet,
    ) -> Result<Vec<NodeValues>> {
        let p = self.stretch(state, t0, quad.nodes())?;
        Ok(nodes_from_profile(&p))
    }

    /// [`ExactOracle::kdist_at_state`] for several reference temperatures,
    /// sharing one synthesis and sort of the local spectrum.
    pub fn kdist_at_state_multi(
        &self,
        state: &ThermoState,
        t0s: &[f64],
        quad: &QuadratureSet,
    ) -> Result<Vec<Vec<NodeValues>>> {
        for &t0 in t0s {
            check_temperature("reference temperature", t0)?;
        }
        let field = self.cache.spectrum(state)?;
        ensure_absorbing(&field)?;
        let reordering = Reordering::new(field.kappa());
        let t = state.temperature();
        let dist_t = reordering.distribution(&self.cache.planck_weights(t), t, Some(*state));
        t0s.iter()
            .map(|&t0| {
                let p = if t0 == t {
                    stretch_from_distributions(&dist_t, &dist_t, quad.nodes())?
                } else {
                    let dist_t0 =
                        reordering.distribution(&self.cache.planck_weights(t0), t0, Some(*state));
                    stretch_from_distributions(&dist_t, &dist_t0, quad.nodes())?
                };
                Ok(nodes_from_profile(&p))
            })
            .collect()
    }

    /// Degraded variant: both k-distributions are only known at
    /// `n_points` Gauss–Chebyshev nodes, a-values come from finite
    /// differences and everything is interpolated onto `quad`.
    pub fn discrete_at_state(
        &self,
        state: &ThermoState,
        t0: f64,
        quad: &QuadratureSet,
        n_points: usize,
    ) -> Result<Vec<NodeValues>> {
        let (dist_t, dist_t0) = self.distributions(state, t0)?;
        let coarse = gauss_chebyshev(n_points)?;
        let table = |d: &KDistribution| -> Vec<(f64, f64)> {
            coarse.nodes().iter().map(|&g| (g, d.quantile(g))).collect()
        };
        let p = stretch_discrete(&table(&dist_t), &table(&dist_t0), n_points)?;
        Ok(nodes_from_profile(&p.resample(quad.nodes())))
    }
}

pub(crate) fn nodes_from_profile(p: &StretchProfile) -> Vec<NodeValues> {
    (0..p.len())
        .map(|j| NodeValues {
            g: p.g0[j],
            kstar: p.kstar[j],
            ka: p.ka[j],
        })
        .collect()
}

/// One-shot form of [`ExactOracle::kdist_at_state`] without caching.
pub fn kdist_at_state(
    state: &ThermoState,
    t0: f64,
    quad: &QuadratureSet,
    catalog: &LineCatalog,
    grid: &SpectralGrid,
) -> Result<Vec<NodeValues>> {
    ExactOracle::new(catalog.clone(), *grid)?.kdist_at_state(state, t0, quad)
}
