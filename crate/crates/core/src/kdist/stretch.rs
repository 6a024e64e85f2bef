//! Nongray stretch factors a = dg_T / dg_T0 and correlated k-values.

use crate::error::{Error, Result};
use crate::spectra::planck::planck_on_grid;
use crate::spectra::{check_temperature, SpectralField, ThermoState};

use super::distribution::{ensure_absorbing, KDistribution, Reordering};

/// Initial half-width of the log-k window used for the a-value differential (decades).
pub const WINDOW_DECADES: f64 = 5e-2;
/// Largest half-width the window may grow to when it captures no mass.
pub const MAX_WINDOW_DECADES: f64 = 0.5;

/// Correlated k-values and stretch factors at a set of reference-space nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct StretchProfile {
    pub g0: Vec<f64>,
    /// Correlated k-values k* (cm⁻¹).
    pub kstar: Vec<f64>,
    pub a: Vec<f64>,
    /// k*·a (cm⁻¹).
    pub ka: Vec<f64>,
    pub planck_t: f64,
    pub reference_t: f64,
    pub state: Option<ThermoState>,
}

impl StretchProfile {
    pub fn len(&self) -> usize {
        self.g0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g0.is_empty()
    }

    /// Interpolates the profile onto other g0 nodes: k* linearly in log k,
    /// a linearly; nodes outside the tabulated range take the end segment's
    /// linear extension (a clamped positive).
    pub fn resample(&self, nodes: &[f64]) -> StretchProfile {
        let mut kstar = Vec::with_capacity(nodes.len());
        let mut a = Vec::with_capacity(nodes.len());
        for &g in nodes {
            let j = self
                .g0
                .partition_point(|&x| x < g)
                .clamp(1, self.g0.len() - 1);
            let (g_lo, g_hi) = (self.g0[j - 1], self.g0[j]);
            let t = (g - g_lo) / (g_hi - g_lo);
            let (k_lo, k_hi) = (self.kstar[j - 1], self.kstar[j]);
            let k = if k_lo > 0.0 && k_hi > 0.0 {
                (k_lo.ln() + t * (k_hi.ln() - k_lo.ln())).exp()
            } else {
                (k_lo + t * (k_hi - k_lo)).max(0.0)
            };
            let av = (self.a[j - 1] + t * (self.a[j] - self.a[j - 1])).max(f64::MIN_POSITIVE);
            kstar.push(k);
            a.push(av);
        }
        let ka = kstar.iter().zip(&a).map(|(k, a)| k * a).collect();
        StretchProfile {
            g0: nodes.to_vec(),
            kstar,
            a,
            ka,
            planck_t: self.planck_t,
            reference_t: self.reference_t,
            state: self.state,
        }
    }
}

/// Stretch factors from a high-resolution differential of the two
/// cumulative distributions of the same spectrum.
///
/// k*(g0) is the quantile of the distribution weighted at `t0`;
/// a(g0) is the ratio of the weights the two distributions place in the
/// window `[k*·10^−δ, k*·10^δ]`, δ starting at [`WINDOW_DECADES`].
pub fn stretch_exact(
    field: &SpectralField,
    t: f64,
    t0: f64,
    g0_nodes: &[f64],
) -> Result<StretchProfile> {
    check_temperature("Planck temperature", t)?;
    check_temperature("reference temperature", t0)?;
    ensure_absorbing(field)?;
    let reordering = Reordering::new(field.kappa());
    let state = field.state().copied();
    let dist_t0 = reordering.distribution(&planck_on_grid(field.grid(), t0), t0, state);
    let dist_t = if t == t0 {
        dist_t0.clone()
    } else {
        reordering.distribution(&planck_on_grid(field.grid(), t), t, state)
    };
    stretch_from_distributions(&dist_t, &dist_t0, g0_nodes)
}

/// [`stretch_exact`] on prebuilt distributions of one spectrum.
pub fn stretch_from_distributions(
    dist_t: &KDistribution,
    dist_t0: &KDistribution,
    g0_nodes: &[f64],
) -> Result<StretchProfile> {
    let mut kstar = Vec::with_capacity(g0_nodes.len());
    let mut a = Vec::with_capacity(g0_nodes.len());
    for &g0 in g0_nodes {
        let k = dist_t0.invert(g0)?;
        let mut half = WINDOW_DECADES;
        let ratio = loop {
            let scale = 10f64.powf(half);
            let (lo, hi) = (k / scale, k * scale);
            let below = dist_t0.mass_between(lo, hi);
            if below > 0.0 {
                break dist_t.mass_between(lo, hi) / below;
            }
            half *= 2.0;
            if half > MAX_WINDOW_DECADES {
                return Err(Error::Degenerate(format!(
                    "no spectral mass within {MAX_WINDOW_DECADES} decades of k* = {k} at g0 = {g0}"
                )));
            }
        };
        kstar.push(k);
        a.push(ratio);
    }
    let ka = kstar.iter().zip(&a).map(|(k, a)| k * a).collect();
    Ok(StretchProfile {
        g0: g0_nodes.to_vec(),
        kstar,
        a,
        ka,
        planck_t: dist_t.planck_temperature(),
        reference_t: dist_t0.planck_temperature(),
        state: dist_t.state().copied(),
    })
}

/// g(k) read off a coarse `(g, k)` table, linear in log k inside the table
/// and along the end segments outside it, clamped to [0, 1].
fn coarse_cdf(table: &[(f64, f64)], k: f64) -> f64 {
    let n = table.len();
    let j = table.partition_point(|&(_, kk)| kk < k).clamp(1, n - 1);
    // Skip back over flat runs so the bracketing segment has k_lo < k_hi.
    let mut lo = j - 1;
    let mut hi = j;
    while lo > 0 && table[lo].1 == table[hi].1 {
        lo -= 1;
    }
    while hi + 1 < n && table[lo].1 == table[hi].1 {
        hi += 1;
    }
    let (g_lo, k_lo) = table[lo];
    let (g_hi, k_hi) = table[hi];
    if k_lo == k_hi {
        return if k < k_lo {
            0.0
        } else if k > k_lo {
            1.0
        } else {
            0.5 * (g_lo + g_hi)
        };
    }
    let t = if k_lo > 0.0 && k > 0.0 {
        (k.ln() - k_lo.ln()) / (k_hi.ln() - k_lo.ln())
    } else {
        (k - k_lo) / (k_hi - k_lo)
    };
    (g_lo + t * (g_hi - g_lo)).clamp(0.0, 1.0)
}

/// Finite-difference stretch factors from two coarse k-distributions that
/// share their g-nodes.
///
/// At node j the T0 table gives k_j; the stretch factor is
/// [g_T(k_{j+1}) − g_T(k_{j−1})] / [g_{j+1} − g_{j−1}] with one-sided
/// differences at the first and last node, where g_T(k) is interpolated
/// from the T table. A difference over equal k-values falls back to a = 1.
pub fn stretch_discrete(
    kg_t: &[(f64, f64)],
    kg_t0: &[(f64, f64)],
    n_points: usize,
) -> Result<StretchProfile> {
    if n_points < 3 {
        return Err(Error::InsufficientData(format!(
            "stretch_discrete needs at least 3 nodes, got {n_points}"
        )));
    }
    if kg_t.len() != n_points || kg_t0.len() != n_points {
        return Err(Error::Shape(format!(
            "expected {n_points} (g, k) pairs, got {} and {}",
            kg_t.len(),
            kg_t0.len()
        )));
    }
    for (a, b) in kg_t.iter().zip(kg_t0) {
        if (a.0 - b.0).abs() > 1e-12 {
            return Err(Error::Shape(
                "the two tables must share their g-nodes".into(),
            ));
        }
        if !(a.1 >= 0.0 && b.1 >= 0.0) {
            return Err(Error::Domain("k-values must be non-negative".into()));
        }
    }
    if kg_t0.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::Domain("g-nodes must be strictly ascending".into()));
    }
    let a: Vec<f64> = (0..n_points)
        .map(|j| {
            let (lo, hi) = match j {
                0 => (0, 1),
                j if j + 1 == n_points => (j - 1, j),
                j => (j - 1, j + 1),
            };
            let (k_lo, k_hi) = (kg_t0[lo].1, kg_t0[hi].1);
            if k_lo == k_hi {
                return 1.0;
            }
            let dg_t = coarse_cdf(kg_t, k_hi) - coarse_cdf(kg_t, k_lo);
            (dg_t / (kg_t0[hi].0 - kg_t0[lo].0)).max(f64::MIN_POSITIVE)
        })
        .collect();
    let g0: Vec<f64> = kg_t0.iter().map(|p| p.0).collect();
    let kstar: Vec<f64> = kg_t0.iter().map(|p| p.1).collect();
    let ka = kstar.iter().zip(&a).map(|(k, a)| k * a).collect();
    Ok(StretchProfile {
        g0,
        kstar,
        a,
        ka,
        planck_t: f64::NAN,
        reference_t: f64::NAN,
        state: None,
    })
}
