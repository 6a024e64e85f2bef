//! Backpropagation, Adam and the early-stopped training loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::MlpModel;
use crate::dataset::TrainingRow;
use crate::error::{Error, Result};

/// Rows in normalised input space and transformed target space.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainData {
    n_in: usize,
    n_out: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl TrainData {
    /// Normalises raw inputs and encodes raw targets with the model's
    /// input box and output transforms. Both slices are row-major.
    pub fn new(model: &MlpModel, inputs: &[f64], targets: &[f64]) -> Result<Self> {
        let (n_in, n_out) = (model.n_inputs(), model.n_outputs());
        if inputs.len() % n_in != 0
            || targets.len() % n_out != 0
            || inputs.len() / n_in != targets.len() / n_out
        {
            return Err(Error::Shape(format!(
                "{} input values and {} target values do not form {n_in}→{n_out} rows",
                inputs.len(),
                targets.len()
            )));
        }
        let mut x = vec![0.0; inputs.len()];
        for (raw, norm) in inputs.chunks_exact(n_in).zip(x.chunks_exact_mut(n_in)) {
            model.normalize_input(raw, norm)?;
        }
        let mut y = Vec::with_capacity(targets.len());
        for row in targets.chunks_exact(n_out) {
            for (&v, t) in row.iter().zip(model.outputs()) {
                let e = t.encode(v);
                if !e.is_finite() {
                    return Err(Error::NonFinite(format!("target {v}")));
                }
                y.push(e);
            }
        }
        Ok(Self { n_in, n_out, x, y })
    }

    /// Corpus rows as SFM training data.
    pub fn from_rows(model: &MlpModel, rows: &[TrainingRow]) -> Result<Self> {
        let inputs: Vec<f64> = rows.iter().flat_map(|r| r.inputs()).collect();
        let targets: Vec<f64> = rows.iter().flat_map(|r| r.targets()).collect();
        Self::new(model, &inputs, &targets)
    }

    pub fn len(&self) -> usize {
        self.x.len() / self.n_in
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn n_inputs(&self) -> usize {
        self.n_in
    }

    pub fn n_outputs(&self) -> usize {
        self.n_out
    }

    pub fn inputs(&self) -> &[f64] {
        &self.x
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        let mut x = Vec::with_capacity(rows.len() * self.n_in);
        let mut y = Vec::with_capacity(rows.len() * self.n_out);
        for &r in rows {
            x.extend_from_slice(&self.x[r * self.n_in..(r + 1) * self.n_in]);
            y.extend_from_slice(&self.y[r * self.n_out..(r + 1) * self.n_out]);
        }
        Self {
            n_in: self.n_in,
            n_out: self.n_out,
            x,
            y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub l2_reg: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1.246e-3,
            l2_reg: 1e-7,
            batch_size: 1024,
            max_epochs: 2000,
            patience: 20,
            seed: 7,
            validation_fraction: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.l2_reg >= 0.0 && self.l2_reg.is_finite()) {
            return Err(Error::Config(format!(
                "l2 factor must be non-negative, got {}",
                self.l2_reg
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max epochs must be at least 1".into()));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Config(format!(
                "validation fraction must lie in (0, 1), got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

/// Σ(y−ŷ)² / Σ(y−ȳ)².
pub fn metric(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape(format!(
            "{} targets vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.len() < 2 {
        return Err(Error::InsufficientData(
            "metric needs at least two samples".into(),
        ));
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for (&y, &p) in y_true.iter().zip(y_pred) {
        num += (y - p) * (y - p);
        den += (y - mean) * (y - mean);
    }
    if den == 0.0 {
        return Err(Error::Degenerate(
            "constant targets give a zero metric denominator".into(),
        ));
    }
    Ok(num / den)
}

/// Activations of every layer for a batch, stored row-major (`rows × width`).
struct Tape {
    acts: Vec<Vec<f64>>,
}

fn forward_tape(model: &MlpModel, x: &[f64], rows: usize) -> Result<Tape> {
    let sizes = model.sizes();
    let mut acts = Vec::with_capacity(sizes.len());
    acts.push(x.to_vec());
    for l in 0..model.n_layers() {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let bias = model.biases(l);
        let mut z = Vec::with_capacity(rows * n_out);
        for _ in 0..rows {
            z.extend_from_slice(bias);
        }
        let w = model.weights(l);
        let a = &acts[l];
        // Z += A · Wᵀ
        unsafe {
            matrixmultiply::dgemm(
                rows,
                n_in,
                n_out,
                1.0,
                a.as_ptr(),
                n_in as isize,
                1,
                w.as_ptr(),
                1,
                n_in as isize,
                1.0,
                z.as_mut_ptr(),
                n_out as isize,
                1,
            );
        }
        if model.activations()[l] == super::Activation::Relu {
            for v in &mut z {
                if *v <= 0.0 {
                    *v = 0.0;
                }
            }
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("activations of layer {}", l + 1)));
        }
        acts.push(z);
    }
    Ok(Tape { acts })
}

/// Loss-weighted hidden layers: every weight layer except the output one.
fn regularised(model: &MlpModel, l: usize) -> bool {
    l + 1 < model.n_layers()
}

fn loss_of(model: &MlpModel, pred: &[f64], y: &[f64], l2: f64) -> f64 {
    let mse = pred
        .iter()
        .zip(y)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / y.len() as f64;
    let mut reg = 0.0;
    for l in 0..model.n_layers() {
        if regularised(model, l) {
            reg += model.weights(l).iter().map(|w| w * w).sum::<f64>();
        }
    }
    mse + l2 * reg
}

/// Loss and its exact gradient over `batch`:
/// mean squared error over all outputs plus `l2 · Σ‖W_hidden‖²`.
/// The gradient uses the flat parameter layout of [`MlpModel::params`].
pub fn grad(model: &MlpModel, batch: &TrainData, l2: f64) -> Result<(f64, Vec<f64>)> {
    let mut g = vec![0.0; model.param_count()];
    let loss = grad_into(model, batch.inputs(), batch.targets(), l2, &mut g)?;
    Ok((loss, g))
}

fn grad_into(model: &MlpModel, x: &[f64], y: &[f64], l2: f64, g: &mut [f64]) -> Result<f64> {
    let n_in = model.n_inputs();
    if x.is_empty() || x.len() % n_in != 0 || x.len() / n_in * model.n_outputs() != y.len() {
        return Err(Error::Shape("gradient batch is empty or misshapen".into()));
    }
    let rows = x.len() / n_in;
    let tape = forward_tape(model, x, rows)?;
    let sizes = model.sizes();
    let last = model.n_layers();
    let pred = &tape.acts[last];
    let loss = loss_of(model, pred, y, l2);
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("loss at output layer {last}")));
    }

    let scale = 2.0 / y.len() as f64;
    let mut dz: Vec<f64> = pred.iter().zip(y).map(|(p, t)| scale * (p - t)).collect();
    for l in (0..last).rev() {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let (wo, bo) = model.layer_offsets(l);
        let a_prev = &tape.acts[l];
        {
            let dw = &mut g[wo..bo];
            // dW = dZᵀ · A_prev
            unsafe {
                matrixmultiply::dgemm(
                    n_out,
                    rows,
                    n_in,
                    1.0,
                    dz.as_ptr(),
                    1,
                    n_out as isize,
                    a_prev.as_ptr(),
                    n_in as isize,
                    1,
                    0.0,
                    dw.as_mut_ptr(),
                    n_in as isize,
                    1,
                );
            }
            if regularised(model, l) {
                for (d, w) in dw.iter_mut().zip(model.weights(l)) {
                    *d += 2.0 * l2 * w;
                }
            }
        }
        let db = &mut g[bo..bo + n_out];
        db.fill(0.0);
        for row in dz.chunks_exact(n_out) {
            for (d, v) in db.iter_mut().zip(row) {
                *d += v;
            }
        }
        if l == 0 {
            break;
        }
        // dA_prev = dZ · W, masked by the ReLU derivative (0 at 0)
        let mut da = vec![0.0; rows * n_in];
        unsafe {
            matrixmultiply::dgemm(
                rows,
                n_out,
                n_in,
                1.0,
                dz.as_ptr(),
                n_out as isize,
                1,
                model.weights(l).as_ptr(),
                n_in as isize,
                1,
                0.0,
                da.as_mut_ptr(),
                n_in as isize,
                1,
            );
        }
        if model.activations()[l - 1] == super::Activation::Relu {
            for (d, a) in da.iter_mut().zip(a_prev) {
                if *a <= 0.0 {
                    *d = 0.0;
                }
            }
        }
        if da.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "back-propagated error at layer {l}"
            )));
        }
        dz = da;
    }
    Ok(loss)
}

/// Predictions in transformed space for normalised rows.
fn predict(model: &MlpModel, x: &[f64]) -> Result<Vec<f64>> {
    const CHUNK: usize = 4096;
    let n_in = model.n_inputs();
    let mut out = Vec::with_capacity(x.len() / n_in * model.n_outputs());
    for part in x.chunks(CHUNK * n_in) {
        let tape = forward_tape(model, part, part.len() / n_in)?;
        out.extend_from_slice(&tape.acts[model.n_layers()]);
    }
    Ok(out)
}

/// Metric per output column in transformed space, averaged over outputs.
pub fn validation_metric(model: &MlpModel, data: &TrainData) -> Result<f64> {
    let pred = predict(model, data.inputs())?;
    let n_out = data.n_outputs();
    let mut sum = 0.0;
    for c in 0..n_out {
        let yt: Vec<f64> = data
            .targets()
            .iter()
            .skip(c)
            .step_by(n_out)
            .copied()
            .collect();
        let yp: Vec<f64> = pred.iter().skip(c).step_by(n_out).copied().collect();
        sum += metric(&yt, &yp)?;
    }
    Ok(sum / n_out as f64)
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "optimizer sized for {} parameters, got {} and {}",
                self.m.len(),
                params.len(),
                grad.len()
            )));
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient".into()));
        }
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (vh.sqrt() + self.eps);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    /// Mean training loss per epoch.
    pub train_loss: Vec<f64>,
    /// Validation metric per epoch.
    pub val_metric: Vec<f64>,
    /// 0-based epoch of the returned snapshot.
    pub best_epoch: usize,
    pub best_metric: f64,
    pub stopped_early: bool,
}

/// Trains a freshly He-initialised copy of `template` (sizes, input box and
/// output transforms are kept) and returns the best-validation snapshot.
pub fn train(
    template: &MlpModel,
    data: &TrainData,
    config: &TrainConfig,
) -> Result<(MlpModel, TrainHistory)> {
    config.validate()?;
    if data.n_inputs() != template.n_inputs() || data.n_outputs() != template.n_outputs() {
        return Err(Error::Shape(
            "training data does not match the model layout".into(),
        ));
    }
    let n = data.len();
    let n_val = ((n as f64) * config.validation_fraction).round() as usize;
    if n_val < 2 || n - n_val < 1 {
        return Err(Error::InsufficientData(format!(
            "{n} rows cannot be split for validation"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let val = data.subset(&order[..n_val]);
    let mut train_rows = order[n_val..].to_vec();

    let mut model = MlpModel::he_init(
        template.sizes(),
        template.input_box().to_vec(),
        template.outputs().to_vec(),
        config.seed,
    )?;
    let mut adam = Adam::new(model.param_count(), config.learning_rate);
    let mut g = vec![0.0; model.param_count()];
    let mut best = model.clone();
    let mut history = TrainHistory {
        best_metric: f64::INFINITY,
        ..Default::default()
    };
    let (n_in, n_out) = (data.n_inputs(), data.n_outputs());
    let mut bx = Vec::with_capacity(config.batch_size * n_in);
    let mut by = Vec::with_capacity(config.batch_size * n_out);

    for epoch in 0..config.max_epochs {
        train_rows.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for (b, chunk) in train_rows.chunks(config.batch_size).enumerate() {
            bx.clear();
            by.clear();
            for &r in chunk {
                bx.extend_from_slice(&data.x[r * n_in..(r + 1) * n_in]);
                by.extend_from_slice(&data.y[r * n_out..(r + 1) * n_out]);
            }
            let loss = grad_into(&model, &bx, &by, config.l2_reg, &mut g)
                .map_err(|e| Error::NonFinite(format!("epoch {epoch}, batch {b}: {e}")))?;
            adam.step(model.params_mut(), &g)
                .map_err(|e| Error::NonFinite(format!("epoch {epoch}, batch {b}: {e}")))?;
            loss_sum += loss;
            batches += 1;
        }
        let vm = validation_metric(&model, &val).map_err(|e| match e {
            Error::NonFinite(m) => Error::NonFinite(format!("epoch {epoch}, validation: {m}")),
            other => other,
        })?;
        history.train_loss.push(loss_sum / batches as f64);
        history.val_metric.push(vm);
        log::debug!(
            "epoch {epoch}: loss {:.4e}, validation metric {vm:.4e}",
            loss_sum / batches as f64
        );
        if vm < history.best_metric {
            history.best_metric = vm;
            history.best_epoch = epoch;
            best.params_mut().copy_from_slice(model.params());
        } else if epoch - history.best_epoch >= config.patience {
            history.stopped_early = true;
            break;
        }
    }
    Ok((best, history))
}
