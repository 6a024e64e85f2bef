//! Spectral models: sources of (k*, ka) at the quadrature nodes.

use crate::error::{Error, Result};
use crate::kdist::{ExactOracle, NodeValues, QuadratureSet};
use crate::lookup::FsckTable;
use crate::mlp::MlpModel;
use crate::spectra::ThermoState;

pub trait SpectralModel: Sync {
    fn name(&self) -> String;

    /// Correlated k-values and k·a products (cm⁻¹) at the nodes of `quad`
    /// for a local state and reference temperature `t0`.
    fn node_values(
        &self,
        state: &ThermoState,
        t0: f64,
        quad: &QuadratureSet,
    ) -> Result<Vec<NodeValues>>;
}

/// Exact reordering of the synthetic spectrum.
pub struct ExactModel<'a> {
    pub oracle: &'a ExactOracle,
}

impl SpectralModel for ExactModel<'_> {
    fn name(&self) -> String {
        "exact".into()
    }

    fn node_values(
        &self,
        state: &ThermoState,
        t0: f64,
        quad: &QuadratureSet,
    ) -> Result<Vec<NodeValues>> {
        self.oracle.kdist_at_state(state, t0, quad)
    }
}

/// k-distributions known only at `n_points` nodes; a-values by finite
/// differences.
pub struct DiscreteModel<'a> {
    pub oracle: &'a ExactOracle,
    pub n_points: usize,
}

impl SpectralModel for DiscreteModel<'_> {
    fn name(&self) -> String {
        format!("discrete{}", self.n_points)
    }

    fn node_values(
        &self,
        state: &ThermoState,
        t0: f64,
        quad: &QuadratureSet,
    ) -> Result<Vec<NodeValues>> {
        self.oracle
            .discrete_at_state(state, t0, quad, self.n_points)
    }
}

pub struct SfmModel<'a> {
    pub model: &'a MlpModel,
}

impl SpectralModel for SfmModel<'_> {
    fn name(&self) -> String {
        "sfm".into()
    }

    fn node_values(
        &self,
        state: &ThermoState,
        t0: f64,
        quad: &QuadratureSet,
    ) -> Result<Vec<NodeValues>> {
        self.model.predict_nodes(state, t0, quad.nodes())
    }
}

pub struct TableModel<'a> {
    pub table: &'a FsckTable,
}

impl SpectralModel for TableModel<'_> {
    fn name(&self) -> String {
        "table".into()
    }

    fn node_values(
        &self,
        state: &ThermoState,
        t0: f64,
        quad: &QuadratureSet,
    ) -> Result<Vec<NodeValues>> {
        if self.table.quad().nodes() != quad.nodes() {
            return Err(Error::Shape(format!(
                "table holds {} nodes, the solver uses a different {}-node set",
                self.table.quad().len(),
                quad.len()
            )));
        }
        self.table.interp(state, t0)
    }
}

/// Constant absorption coefficient with a ≡ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrayModel {
    kappa: f64,
}

impl GrayModel {
    /// `kappa` in cm⁻¹.
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::Domain(format!(
                "gray absorption coefficient must be ≥ 0, got {kappa}"
            )));
        }
        Ok(Self { kappa })
    }
}

impl SpectralModel for GrayModel {
    fn name(&self) -> String {
        "gray".into()
    }

    fn node_values(
        &self,
        _state: &ThermoState,
        _t0: f64,
        quad: &QuadratureSet,
    ) -> Result<Vec<NodeValues>> {
        Ok(quad
            .nodes()
            .iter()
            .map(|&g| NodeValues {
                g,
                kstar: self.kappa,
                ka: self.kappa,
            })
            .collect())
    }
}
