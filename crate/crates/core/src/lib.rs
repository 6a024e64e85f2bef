//! Full-spectrum correlated k-distribution toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectra`] synthesises absorption spectra and evaluates Planck's law,
//! * [`kdist`] reorders spectra into k-distributions and computes the
//!   correlated k-values and nongray stretch factors used as training labels,
//! * [`lookup`] is the multilinear look-up table baseline,
//! * [`mlp`] is the feed-forward surrogate (inference, training, tuning, file format),
//! * [`dataset`] samples the thermodynamic envelope and writes the training corpus,
//! * [`rte`] solves the 1-D slab radiative transfer problem for every spectral model.

mod binio;
pub mod dataset;
pub mod error;
pub mod kdist;
pub mod lookup;
pub mod mlp;
pub mod rte;
pub mod spectra;

pub use error::{Error, Result};
