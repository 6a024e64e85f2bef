//! Self-describing little-endian model file.
//!
//! Layout: magic `SFMW`, u32 version, u32 layer count L, L × u32 sizes,
//! (L−1) × u8 activation codes, per input f64 (min, max), per output
//! u8 transform code + f64 floor, then the flat parameter vector.

use std::fs;
use std::path::Path;

use super::{Activation, MlpModel, OutputTransform};
use crate::binio::{Reader, Writer};
use crate::error::{Error, FormatError, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"SFMW";
pub const MODEL_VERSION: u32 = 1;

const MAX_LAYERS: usize = 64;

impl MlpModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new(MODEL_MAGIC, MODEL_VERSION);
        w.u32(self.sizes.len() as u32);
        for &n in &self.sizes {
            w.u32(n as u32);
        }
        for a in &self.activations {
            w.u8(a.code());
        }
        for &(lo, hi) in &self.input_box {
            w.f64(lo);
            w.f64(hi);
        }
        for o in &self.outputs {
            w.u8(o.code());
            w.f64(o.floor());
        }
        w.f64s(&self.params);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::open(bytes, MODEL_MAGIC, MODEL_VERSION)?;
        let n_sizes = r.u32("layer count")? as usize;
        if !(2..=MAX_LAYERS).contains(&n_sizes) {
            return Err(FormatError::Shape(format!("layer count {n_sizes}")).into());
        }
        let mut sizes = Vec::with_capacity(n_sizes);
        for _ in 0..n_sizes {
            let n = r.u32("layer size")? as usize;
            if n == 0 {
                return Err(FormatError::Shape("zero-width layer".into()).into());
            }
            sizes.push(n);
        }
        let mut activations = Vec::with_capacity(n_sizes - 1);
        for _ in 1..n_sizes {
            let code = r.u8("activation code")?;
            activations.push(Activation::from_code(code).ok_or(FormatError::UnknownCode {
                field: "activation",
                code,
            })?);
        }
        let mut input_box = Vec::with_capacity(sizes[0]);
        for _ in 0..sizes[0] {
            input_box.push((r.f64("input range")?, r.f64("input range")?));
        }
        let mut outputs = Vec::with_capacity(sizes[n_sizes - 1]);
        for _ in 0..sizes[n_sizes - 1] {
            let code = r.u8("output transform code")?;
            let floor = r.f64("output floor")?;
            outputs.push(match code {
                0 => OutputTransform::Identity,
                1 => OutputTransform::Log10 { floor },
                _ => {
                    return Err(FormatError::UnknownCode {
                        field: "output transform",
                        code,
                    }
                    .into())
                }
            });
        }
        let params = r.f64s(super::param_count(&sizes), "parameters")?;
        r.finish()?;
        MlpModel::from_parts(sizes, activations, params, input_box, outputs).map_err(|e| match e {
            Error::Shape(m) | Error::Domain(m) | Error::NonFinite(m) => {
                FormatError::Shape(m).into()
            }
            other => other,
        })
    }
}

pub fn save_model(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    MlpModel::from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
