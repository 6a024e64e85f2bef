use crate::error::{Error, Result};
use crate::spectra::planck::planck_on_grid;
use crate::spectra::{check_temperature, SpectralField, ThermoState};

/// Sort order of a spectrum with equal absorption coefficients merged into
/// levels. Shared between the Planck weightings of one field.
#[derive(Debug, Clone)]
pub struct Reordering {
    /// Distinct absorption coefficients, ascending.
    levels: Vec<f64>,
    /// Grid indices in ascending-κ order.
    order: Vec<u32>,
    /// `order[run_start[l]..run_start[l + 1]]` holds the indices of level `l`.
    run_start: Vec<u32>,
}

impl Reordering {
    pub fn new(kappa: &[f64]) -> Self {
        let mut keyed: Vec<(f64, u32)> = kappa
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, i as u32))
            .collect();
        keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut levels = Vec::new();
        let mut run_start = Vec::new();
        let mut order = Vec::with_capacity(keyed.len());
        for (pos, &(k, idx)) in keyed.iter().enumerate() {
            if levels.last() != Some(&k) {
                levels.push(k);
                run_start.push(pos as u32);
            }
            order.push(idx);
        }
        run_start.push(keyed.len() as u32);
        Self {
            levels,
            order,
            run_start,
        }
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Builds the distribution whose per-point weights are `weights`
    /// (Planck intensities; normalisation happens here).
    pub fn distribution(
        &self,
        weights: &[f64],
        planck_t: f64,
        state: Option<ThermoState>,
    ) -> KDistribution {
        let mut mass = Vec::with_capacity(self.levels.len());
        for l in 0..self.levels.len() {
            let run = &self.order[self.run_start[l] as usize..self.run_start[l + 1] as usize];
            mass.push(run.iter().map(|&i| weights[i as usize]).sum::<f64>());
        }
        let mut cumulative = Vec::with_capacity(mass.len() + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for m in &mass {
            acc += m;
            cumulative.push(acc);
        }
        let total = acc;
        let g: Vec<f64> = cumulative.iter().map(|c| c / total).collect();
        let mut k = Vec::with_capacity(self.levels.len() + 1);
        k.push(self.levels[0]);
        k.extend_from_slice(&self.levels);
        KDistribution {
            g,
            k,
            mass: mass.iter().map(|m| m / total).collect(),
            planck_t,
            state,
        }
    }
}

/// Planck-weighted k-distribution of one spectrum.
///
/// Knot 0 is `(0, min κ)`; knot `i ≥ 1` is `(G_i, k_i)` where `k_i` is the
/// i-th distinct absorption coefficient and `G_i` the normalised Planck
/// weight of all wavenumbers with κ ≤ k_i. The last knot is exactly
/// `(1, max κ)`.
#[derive(Debug, Clone)]
pub struct KDistribution {
    g: Vec<f64>,
    k: Vec<f64>,
    /// Normalised weight of each level (knot i + 1).
    mass: Vec<f64>,
    planck_t: f64,
    state: Option<ThermoState>,
}

/// Reorders `field` into its k-distribution at Planck temperature `planck_t`.
pub fn build_kdist(field: &SpectralField, planck_t: f64) -> Result<KDistribution> {
    check_temperature("Planck temperature", planck_t)?;
    ensure_absorbing(field)?;
    let weights = planck_on_grid(field.grid(), planck_t);
    Ok(Reordering::new(field.kappa()).distribution(&weights, planck_t, field.state().copied()))
}

pub(crate) fn ensure_absorbing(field: &SpectralField) -> Result<()> {
    if field.kappa().iter().all(|&k| k == 0.0) {
        return Err(Error::Degenerate(
            "absorption coefficient is zero everywhere (transparent medium)".into(),
        ));
    }
    Ok(())
}

impl KDistribution {
    /// Cumulative values of the knots, from 0 to 1.
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// Absorption coefficients of the knots (cm⁻¹), nondecreasing.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn planck_temperature(&self) -> f64 {
        self.planck_t
    }

    pub fn state(&self) -> Option<&ThermoState> {
        self.state.as_ref()
    }

    pub fn min_k(&self) -> f64 {
        self.k[0]
    }

    pub fn max_k(&self) -> f64 {
        *self.k.last().unwrap()
    }

    /// Number of distinct absorption-coefficient levels.
    pub fn levels(&self) -> usize {
        self.mass.len()
    }

    /// k(g): the smallest tabulated k whose cumulative value reaches `g`.
    ///
    /// Adjacent levels abut in g, so piecewise interpolation through the knots
    /// is a step function; this returns the exact quantile of the discrete
    /// spectrum, with `g = 0` mapping to the minimum and `g = 1` to the
    /// maximum absorption coefficient.
    pub fn invert(&self, g: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::Domain(format!(
                "cumulative value {g} outside [0, 1]"
            )));
        }
        Ok(self.quantile(g))
    }

    #[inline]
    pub(crate) fn quantile(&self, g: f64) -> f64 {
        let i = self.g.partition_point(|&x| x < g).min(self.k.len() - 1);
        self.k[i]
    }

    /// g(k): cumulative weight of all levels ≤ `k`.
    pub fn cdf(&self, k: f64) -> f64 {
        let n = self.k[1..].partition_point(|&x| x <= k);
        self.g[n]
    }

    /// Total weight of the levels inside `[lo, hi]`, summed level by level.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        let levels = &self.k[1..];
        let a = levels.partition_point(|&x| x < lo);
        let b = levels.partition_point(|&x| x <= hi);
        self.mass[a..b].iter().sum()
    }
}

/// `invert_k` in operation form.
pub fn invert_k(dist: &KDistribution, g: f64) -> Result<f64> {
    dist.invert(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::planck::planck_unchecked;
    use crate::spectra::SpectralGrid;

    fn field(kappa: Vec<f64>, start: f64, step: f64) -> SpectralField {
        let grid = SpectralGrid::new(start, step, kappa.len()).unwrap();
        SpectralField::new(grid, kappa, None).unwrap()
    }

    #[test]
    fn gray_field_is_constant() {
        let f = field(vec![0.7; 500], 500.0, 2.0);
        let d = build_kdist(&f, 1000.0).unwrap();
        for g in [0.0, 0.1, 0.5, 0.99, 1.0] {
            assert_eq!(d.invert(g).unwrap(), 0.7);
        }
        assert_eq!(d.levels(), 1);
    }

    #[test]
    fn zero_field_is_degenerate() {
        let f = field(vec![0.0; 10], 500.0, 1.0);
        assert!(matches!(build_kdist(&f, 1000.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn two_level_step() {
        // Two wavenumbers whose Planck weights split 30/70 at T = 1000 K:
        // κ = 1 at 6000 cm⁻¹ and κ = 10 at the point below it, on the
        // decreasing side of the Wien peak, with 7/3 of that intensity.
        let t = 1000.0;
        let eta_one = 6000.0;
        let target = planck_unchecked(t, eta_one) * 0.7 / 0.3;
        let (mut lo, mut hi) = (1961.0, eta_one);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if planck_unchecked(t, mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let eta_ten = 0.5 * (lo + hi);
        let f = field(vec![10.0, 1.0], eta_ten, eta_one - eta_ten);
        let d = build_kdist(&f, t).unwrap();
        assert!((d.g()[1] - 0.3).abs() < 1e-12);
        for g in [0.0, 0.05, 0.2, 0.2999] {
            assert_eq!(d.invert(g).unwrap(), 1.0);
        }
        for g in [0.3001, 0.5, 0.9, 1.0] {
            assert_eq!(d.invert(g).unwrap(), 10.0);
        }
    }

    #[test]
    fn domain_and_endpoints() {
        let f = field(
            (0..100).map(|i| ((i * 37) % 11) as f64 + 0.5).collect(),
            800.0,
            3.0,
        );
        let d = build_kdist(&f, 1500.0).unwrap();
        assert!(d.invert(-0.01).is_err());
        assert!(d.invert(1.01).is_err());
        assert_eq!(d.invert(0.0).unwrap(), 0.5);
        assert_eq!(d.invert(1.0).unwrap(), 10.5);
        assert_eq!(*d.g().last().unwrap(), 1.0);
        assert_eq!(d.levels(), 11);
        for (g, k) in d.g().iter().zip(d.k()) {
            assert_eq!(d.invert(*g).unwrap(), *k);
        }
        assert!((d.mass_between(0.0, 100.0) - 1.0).abs() < 1e-12);
        assert_eq!(d.cdf(0.1), 0.0);
        assert_eq!(d.cdf(11.0), 1.0);
    }

    #[test]
    fn planck_temperature_must_be_in_envelope() {
        let f = field(vec![1.0, 2.0], 800.0, 1.0);
        assert!(build_kdist(&f, 100.0).is_err());
    }
}
