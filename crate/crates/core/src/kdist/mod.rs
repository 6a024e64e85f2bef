//! Reordering of spectra into k-distributions, correlated k-values and
//! nongray stretch factors, and the g-space quadrature.

mod distribution;
mod io;
mod oracle;
mod quadrature;
mod stretch;

pub use distribution::{build_kdist, invert_k, KDistribution, Reordering};
pub use io::{write_kdist_csv, write_stretch_csv};
pub use oracle::{kdist_at_state, ExactOracle, NodeValues};
pub use quadrature::{gauss_chebyshev, QuadratureSet};
pub use stretch::{
    stretch_discrete, stretch_exact, stretch_from_distributions, StretchProfile,
    MAX_WINDOW_DECADES, WINDOW_DECADES,
};
