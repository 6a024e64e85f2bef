//! Feed-forward surrogate: model, inference, training, tuning and the
//! binary model file.
//!
//! One engine serves every architecture. The SFM network is
//! `[6, 120, 120, 120, 2]` with rectified-linear hidden layers, an identity
//! output layer on log10 targets and inputs `[T, T0, x_CO2, x_H2O, x_CO, g]`
//! min–max normalised over the thermodynamic envelope.

mod io;
mod train;
mod tune;

pub use io::{load_model, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use train::{
    grad, metric, train, validation_metric, Adam, TrainConfig, TrainData, TrainHistory,
};
pub use tune::{tune, tune_objective, SearchSpace, TuneConfig, TuneMode, TuneSample, TuneTrace};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::kdist::NodeValues;
use crate::spectra::ThermoState;

/// Layer sizes of the SFM network.
pub const SFM_LAYERS: [usize; 5] = [6, 120, 120, 120, 2];

/// Floor applied before taking log10 of a target (cm⁻¹).
pub const LOG_FLOOR: f64 = 1e-30;

/// Input names in SFM order.
pub const SFM_INPUTS: [&str; 6] = ["T", "T0", "x_CO2", "x_H2O", "x_CO", "g"];

/// Normalisation box of the SFM inputs.
pub const SFM_INPUT_BOX: [(f64, f64); 6] = [
    (ThermoState::T_MIN, ThermoState::T_MAX),
    (ThermoState::T_MIN, ThermoState::T_MAX),
    (0.0, 1.0),
    (0.0, 1.0),
    (0.0, ThermoState::X_CO_MAX),
    (0.0, 1.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Relu),
            _ => None,
        }
    }
}

/// Map between a physical output and the space the network predicts in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputTransform {
    Identity,
    /// y = log10(max(v, floor)); decoded as 10^y.
    Log10 {
        floor: f64,
    },
}

impl OutputTransform {
    pub fn code(self) -> u8 {
        match self {
            OutputTransform::Identity => 0,
            OutputTransform::Log10 { .. } => 1,
        }
    }

    pub fn floor(self) -> f64 {
        match self {
            OutputTransform::Identity => 0.0,
            OutputTransform::Log10 { floor } => floor,
        }
    }

    pub fn encode(self, v: f64) -> f64 {
        match self {
            OutputTransform::Identity => v,
            OutputTransform::Log10 { floor } => v.max(floor).log10(),
        }
    }

    pub fn decode(self, y: f64) -> f64 {
        match self {
            OutputTransform::Identity => y,
            OutputTransform::Log10 { .. } => 10f64.powf(y),
        }
    }
}

/// Dense feed-forward network.
///
/// Parameters live in one flat vector, layer by layer: the row-major
/// `out × in` weight matrix followed by the `out` biases. This is also the
/// order of gradients and of the model file body.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    sizes: Vec<usize>,
    activations: Vec<Activation>,
    params: Vec<f64>,
    input_box: Vec<(f64, f64)>,
    outputs: Vec<OutputTransform>,
}

impl MlpModel {
    /// Zero-initialised model; hidden layers are ReLU, the output layer identity.
    pub fn zeros(
        sizes: &[usize],
        input_box: Vec<(f64, f64)>,
        outputs: Vec<OutputTransform>,
    ) -> Result<Self> {
        let activations = (1..sizes.len())
            .map(|l| {
                if l + 1 == sizes.len() {
                    Activation::Identity
                } else {
                    Activation::Relu
                }
            })
            .collect();
        Self::from_parts(
            sizes.to_vec(),
            activations,
            vec![0.0; param_count(sizes)],
            input_box,
            outputs,
        )
    }

    pub fn from_parts(
        sizes: Vec<usize>,
        activations: Vec<Activation>,
        params: Vec<f64>,
        input_box: Vec<(f64, f64)>,
        outputs: Vec<OutputTransform>,
    ) -> Result<Self> {
        if sizes.len() < 2 || sizes.iter().any(|&n| n == 0) {
            return Err(Error::Shape(format!("invalid layer sizes {sizes:?}")));
        }
        if activations.len() != sizes.len() - 1 {
            return Err(Error::Shape(format!(
                "{} activations for {} weight layers",
                activations.len(),
                sizes.len() - 1
            )));
        }
        if params.len() != param_count(&sizes) {
            return Err(Error::Shape(format!(
                "{} parameters, layer sizes need {}",
                params.len(),
                param_count(&sizes)
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("model parameters".into()));
        }
        if input_box.len() != sizes[0] {
            return Err(Error::Shape(format!(
                "{} input ranges for {} inputs",
                input_box.len(),
                sizes[0]
            )));
        }
        if input_box
            .iter()
            .any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && hi > lo))
        {
            return Err(Error::Domain(
                "input ranges must be finite with max > min".into(),
            ));
        }
        if outputs.len() != sizes[sizes.len() - 1] {
            return Err(Error::Shape(format!(
                "{} output transforms for {} outputs",
                outputs.len(),
                sizes[sizes.len() - 1]
            )));
        }
        if outputs
            .iter()
            .any(|o| matches!(o, OutputTransform::Log10 { floor } if !(*floor > 0.0 && floor.is_finite())))
        {
            return Err(Error::Domain("log10 floor must be positive".into()));
        }
        Ok(Self {
            sizes,
            activations,
            params,
            input_box,
            outputs,
        })
    }

    /// He-initialised model: weights ~ N(0, 2/fan_in), zero biases.
    pub fn he_init(
        sizes: &[usize],
        input_box: Vec<(f64, f64)>,
        outputs: Vec<OutputTransform>,
        seed: u64,
    ) -> Result<Self> {
        let mut model = Self::zeros(sizes, input_box, outputs)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in 0..model.n_layers() {
            let fan_in = model.sizes[l];
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
            let (w, _) = model.layer_offsets(l);
            let n = model.sizes[l] * model.sizes[l + 1];
            for p in &mut model.params[w..w + n] {
                *p = normal.sample(&mut rng);
            }
        }
        Ok(model)
    }

    /// Freshly initialised SFM network.
    pub fn sfm(seed: u64) -> Self {
        Self::he_init(
            &SFM_LAYERS,
            SFM_INPUT_BOX.to_vec(),
            vec![OutputTransform::Log10 { floor: LOG_FLOOR }; 2],
            seed,
        )
        .expect("SFM layout is valid")
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn input_box(&self) -> &[(f64, f64)] {
        &self.input_box
    }

    pub fn outputs(&self) -> &[OutputTransform] {
        &self.outputs
    }

    pub fn n_inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn n_outputs(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    /// Number of weight layers.
    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Offsets of the weights and biases of weight layer `l` in [`Self::params`].
    pub fn layer_offsets(&self, l: usize) -> (usize, usize) {
        let mut off = 0;
        for i in 0..l {
            off += self.sizes[i] * self.sizes[i + 1] + self.sizes[i + 1];
        }
        (off, off + self.sizes[l] * self.sizes[l + 1])
    }

    pub fn weights(&self, l: usize) -> &[f64] {
        let (w, b) = self.layer_offsets(l);
        &self.params[w..b]
    }

    pub fn biases(&self, l: usize) -> &[f64] {
        let (_, b) = self.layer_offsets(l);
        &self.params[b..b + self.sizes[l + 1]]
    }

    /// Maps raw inputs into the unit box, rejecting anything outside it.
    pub fn normalize_input(&self, input: &[f64], out: &mut [f64]) -> Result<()> {
        if input.len() != self.n_inputs() {
            return Err(Error::Shape(format!(
                "expected {} inputs, got {}",
                self.n_inputs(),
                input.len()
            )));
        }
        for (i, ((&v, &(lo, hi)), o)) in input
            .iter()
            .zip(&self.input_box)
            .zip(out.iter_mut())
            .enumerate()
        {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("input {i}")));
            }
            if v < lo || v > hi {
                return Err(Error::Range {
                    quantity: input_name(self.n_inputs(), i),
                    value: v,
                    min: lo,
                    max: hi,
                });
            }
            *o = (v - lo) / (hi - lo);
        }
        Ok(())
    }

    /// Network output in the transformed (training) space for a normalised input.
    pub fn forward_normalized(&self, x: &[f64]) -> Vec<f64> {
        let width = self.sizes.iter().copied().max().unwrap_or(0);
        let mut a = vec![0.0; width];
        let mut b = vec![0.0; width];
        a[..x.len()].copy_from_slice(x);
        self.run(&mut a, &mut b);
        a[..self.n_outputs()].to_vec()
    }

    /// Propagates `cur[..sizes[0]]` through every layer; the result ends in
    /// `cur[..n_outputs]`. Dot products accumulate in input order.
    fn run(&self, cur: &mut Vec<f64>, next: &mut Vec<f64>) {
        for l in 0..self.n_layers() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = self.weights(l);
            let bias = self.biases(l);
            let relu = self.activations[l] == Activation::Relu;
            for o in 0..n_out {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut acc = bias[o];
                for i in 0..n_in {
                    acc += row[i] * cur[i];
                }
                next[o] = if relu && acc <= 0.0 { 0.0 } else { acc };
            }
            std::mem::swap(cur, next);
        }
    }

    /// Physical outputs for one raw input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let width = self.sizes.iter().copied().max().unwrap_or(0);
        let mut a = vec![0.0; width];
        let mut b = vec![0.0; width];
        self.normalize_input(input, &mut a)?;
        self.run(&mut a, &mut b);
        self.decode(&a[..self.n_outputs()])
    }

    fn decode(&self, y: &[f64]) -> Result<Vec<f64>> {
        y.iter()
            .zip(&self.outputs)
            .map(|(&v, t)| {
                let out = t.decode(v);
                if out.is_finite() {
                    Ok(out)
                } else {
                    Err(Error::NonFinite(format!("network output {v}")))
                }
            })
            .collect()
    }

    /// Row-major `n × n_inputs` batch → row-major `n × n_outputs`. Every row
    /// is evaluated by the same kernel as [`Self::forward`], so results are
    /// bitwise identical to a row-by-row loop.
    pub fn forward_batch(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let n_in = self.n_inputs();
        if inputs.len() % n_in != 0 {
            return Err(Error::Shape(format!(
                "batch of {} values is not a multiple of {n_in} inputs",
                inputs.len()
            )));
        }
        let width = self.sizes.iter().copied().max().unwrap_or(0);
        let mut a = vec![0.0; width];
        let mut b = vec![0.0; width];
        let mut out = Vec::with_capacity(inputs.len() / n_in * self.n_outputs());
        for row in inputs.chunks_exact(n_in) {
            self.normalize_input(row, &mut a)?;
            self.run(&mut a, &mut b);
            out.extend(self.decode(&a[..self.n_outputs()])?);
        }
        Ok(out)
    }

    /// SFM query: (g, k*, ka) at each g-node for one local state and
    /// reference temperature.
    pub fn predict_nodes(
        &self,
        state: &ThermoState,
        t0: f64,
        nodes: &[f64],
    ) -> Result<Vec<NodeValues>> {
        if self.n_inputs() != 6 || self.n_outputs() != 2 {
            return Err(Error::Shape(
                "model does not have the 6-input, 2-output SFM layout".into(),
            ));
        }
        let mut batch = Vec::with_capacity(6 * nodes.len());
        for &g in nodes {
            batch.extend_from_slice(&[
                state.temperature(),
                t0,
                state.x_co2(),
                state.x_h2o(),
                state.x_co(),
                g,
            ]);
        }
        let out = self.forward_batch(&batch)?;
        Ok(nodes
            .iter()
            .zip(out.chunks_exact(2))
            .map(|(&g, y)| NodeValues {
                g,
                kstar: y[0],
                ka: y[1],
            })
            .collect())
    }
}

fn input_name(n_inputs: usize, i: usize) -> &'static str {
    if n_inputs == SFM_INPUTS.len() {
        SFM_INPUTS[i]
    } else {
        "network input"
    }
}

/// Weights plus biases of a dense network with the given layer sizes.
pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Straight-line reference: column-by-column accumulation, explicit
    /// normalisation and decoding, no shared code with the engine.
    fn reference_forward(m: &MlpModel, input: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = input
            .iter()
            .zip(m.input_box())
            .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
            .collect();
        let sizes = m.sizes().to_vec();
        for l in 0..sizes.len() - 1 {
            let w = m.weights(l);
            let b = m.biases(l);
            let mut y = b.to_vec();
            for i in 0..sizes[l] {
                for o in 0..sizes[l + 1] {
                    y[o] += w[o * sizes[l] + i] * x[i];
                }
            }
            if l + 2 < sizes.len() {
                for v in &mut y {
                    *v = v.max(0.0);
                }
            }
            x = y;
        }
        x.iter()
            .zip(m.outputs())
            .map(|(v, t)| t.decode(*v))
            .collect()
    }

    fn random_input(rng: &mut ChaCha8Rng) -> [f64; 6] {
        let mut v = [0.0; 6];
        for (i, (lo, hi)) in SFM_INPUT_BOX.iter().enumerate() {
            v[i] = rng.random_range(*lo..*hi);
        }
        v
    }

    #[test]
    fn sfm_parameter_count() {
        assert_eq!(param_count(&SFM_LAYERS), 30_122);
        let m = MlpModel::sfm(0);
        assert_eq!(m.param_count(), 30_122);
        let weights: usize = (0..4).map(|l| m.weights(l).len()).sum();
        let biases: usize = (0..4).map(|l| m.biases(l).len()).sum();
        assert_eq!((weights, biases), (29_760, 362));
    }

    #[test]
    fn dead_network_returns_output_biases() {
        let mut m = MlpModel::zeros(
            &SFM_LAYERS,
            SFM_INPUT_BOX.to_vec(),
            vec![OutputTransform::Log10 { floor: LOG_FLOOR }; 2],
        )
        .unwrap();
        let (_, b) = m.layer_offsets(3);
        m.params_mut()[b] = -2.5;
        m.params_mut()[b + 1] = 0.75;
        let y = m.forward(&[1000.0, 1200.0, 0.1, 0.2, 0.0, 0.5]).unwrap();
        assert_eq!(y, vec![10f64.powf(-2.5), 10f64.powf(0.75)]);
    }

    #[test]
    fn single_path_network_by_hand() {
        // 6-2-2: hidden unit 0 reads normalised input 1 (T0), output 1 reads hidden 0.
        let box6 = vec![(0.0, 10.0); 6];
        let mut m = MlpModel::zeros(&[6, 2, 2], box6, vec![OutputTransform::Identity; 2]).unwrap();
        let p = m.params_mut();
        p[1] = 3.0; // W0[0][1]
        p[12] = 0.5; // b0[0]
                     // layer 1 weights start at 14: W1[1][0] = index 14 + 2
        p[16] = -2.0;
        p[19] = 1.0; // b1[1]
        let y = m.forward(&[0.0, 4.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        // h0 = relu(3·0.4 + 0.5) = 1.7; y1 = −2·1.7 + 1 = −2.4
        assert_eq!(y[0], 0.0);
        assert!((y[1] + 2.4).abs() < 1e-15);
        // Negative pre-activation is clipped: h0 = relu(3·0 + 0.5 − …) stays ≥ 0.
        let y = m.forward(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((y[1] - 0.0).abs() < 1e-15);
    }

    #[test]
    fn matches_independent_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for seed in 0..3 {
            let mut m = MlpModel::sfm(seed);
            for p in m.params_mut() {
                *p += rng.random_range(-0.05..0.05);
            }
            for _ in 0..100 {
                let x = random_input(&mut rng);
                let y = m.forward(&x).unwrap();
                let r = reference_forward(&m, &x);
                for (a, b) in y.iter().zip(&r) {
                    assert!((a - b).abs() <= 1e-12 * b.abs(), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn range_and_shape_errors() {
        let m = MlpModel::sfm(1);
        assert!(matches!(
            m.forward(&[250.0, 1000.0, 0.1, 0.1, 0.1, 0.5]),
            Err(Error::Range { quantity: "T", .. })
        ));
        assert!(matches!(
            m.forward(&[1000.0, 1000.0, 0.1, 0.1, 0.6, 0.5]),
            Err(Error::Range {
                quantity: "x_CO",
                ..
            })
        ));
        assert!(matches!(m.forward(&[1000.0; 5]), Err(Error::Shape(_))));
        assert!(matches!(
            m.forward(&[f64::NAN, 1000.0, 0.1, 0.1, 0.1, 0.5]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            m.forward_batch(&[1000.0; 7]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn batch_matches_loop_and_permutes() {
        let m = MlpModel::sfm(3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<[f64; 6]> = (0..200).map(|_| random_input(&mut rng)).collect();
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let batch = m.forward_batch(&flat).unwrap();
        for (i, r) in rows.iter().enumerate() {
            let y = m.forward(r).unwrap();
            assert_eq!(y[0].to_bits(), batch[2 * i].to_bits());
            assert_eq!(y[1].to_bits(), batch[2 * i + 1].to_bits());
        }
        let rev: Vec<f64> = rows.iter().rev().flatten().copied().collect();
        let out = m.forward_batch(&rev).unwrap();
        for i in 0..rows.len() {
            let j = rows.len() - 1 - i;
            assert_eq!(out[2 * i], batch[2 * j]);
            assert_eq!(out[2 * i + 1], batch[2 * j + 1]);
        }
        assert_eq!(
            m.forward_batch(&flat[..6]).unwrap(),
            m.forward(&rows[0]).unwrap()
        );
    }

    #[test]
    fn outputs_are_positive() {
        let m = MlpModel::sfm(5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let y = m.forward(&random_input(&mut rng)).unwrap();
            assert!(y.iter().all(|v| *v > 0.0));
        }
    }

    #[test]
    fn invalid_parts_rejected() {
        let b = SFM_INPUT_BOX.to_vec();
        let o = vec![OutputTransform::Identity; 2];
        assert!(MlpModel::zeros(&[6], b.clone(), o.clone()).is_err());
        assert!(MlpModel::zeros(&[6, 0, 2], b.clone(), o.clone()).is_err());
        assert!(MlpModel::zeros(&[5, 2], b.clone(), o.clone()).is_err());
        assert!(MlpModel::zeros(&[6, 3], b.clone(), o.clone()).is_err());
        let mut m = MlpModel::zeros(&[6, 2], b.clone(), o.clone()).unwrap();
        m.params_mut()[0] = f64::NAN;
        assert!(MlpModel::from_parts(
            vec![6, 2],
            vec![Activation::Identity],
            m.params().to_vec(),
            b,
            o
        )
        .is_err());
    }
}
