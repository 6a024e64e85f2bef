//! Line-by-line references: Planck-mean absorption coefficients and the
//! spectrally resolved slab solution.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::gray::gray_exact;
use super::{RteSolution, SlabProblem, PER_CM};
use crate::error::{Error, Result};
use crate::kdist::{ExactOracle, NodeValues, QuadratureSet};
use crate::spectra::planck::planck_on_grid;
use crate::spectra::{check_temperature, SpectralField, SpectralGrid};

fn trapezoid_weights(grid: &SpectralGrid) -> Vec<f64> {
    let n = grid.len();
    (0..n)
        .map(|i| {
            if i == 0 || i + 1 == n {
                0.5 * grid.step()
            } else {
                grid.step()
            }
        })
        .collect()
}

/// ∫κ_η I_bη(T) dη / ∫I_bη(T) dη by the trapezoid rule on the field grid (cm⁻¹).
pub fn planck_mean_lbl(field: &SpectralField, temperature: f64) -> Result<f64> {
    check_temperature("Planck temperature", temperature)?;
    let ib = planck_on_grid(field.grid(), temperature);
    let w = trapezoid_weights(field.grid());
    let (mut num, mut den) = (0.0, 0.0);
    for ((k, b), w) in field.kappa().iter().zip(&ib).zip(&w) {
        num += k * b * w;
        den += b * w;
    }
    if !(den > 0.0) {
        return Err(Error::Degenerate(format!(
            "no blackbody emission at {temperature} K on the grid"
        )));
    }
    Ok(num / den)
}

/// Σ w_j (ka)_j (cm⁻¹).
pub fn planck_mean_fsck(nodes: &[NodeValues], quad: &QuadratureSet) -> Result<f64> {
    if nodes.len() != quad.len() {
        return Err(Error::Shape(format!(
            "{} node values for {} quadrature nodes",
            nodes.len(),
            quad.len()
        )));
    }
    if nodes.iter().any(|v| !v.ka.is_finite()) {
        return Err(Error::NonFinite("ka value".into()));
    }
    Ok(quad.integrate(&nodes.iter().map(|v| v.ka).collect::<Vec<_>>()))
}

const CHUNK: usize = 2048;

/// Spectrally resolved slab solution: one exact gray solve per grid
/// wavenumber, integrated with trapezoid weights.
pub fn solve_slab_lbl(problem: &SlabProblem, oracle: &ExactOracle) -> Result<RteSolution> {
    let n = problem.n_cells();
    let grid = *oracle.cache().grid();
    let spectra = problem
        .cells()
        .iter()
        .map(|s| oracle.spectrum(s))
        .collect::<Result<Vec<_>>>()?;
    let planck: Vec<_> = problem
        .cells()
        .iter()
        .map(|s| oracle.cache().planck_weights(s.temperature()))
        .collect();
    let walls: Vec<Option<std::sync::Arc<Vec<f64>>>> = problem
        .wall_temperatures()
        .iter()
        .map(|&t| (t > 0.0).then(|| oracle.cache().planck_weights(t)))
        .collect();
    let w = trapezoid_weights(&grid);
    let dx = vec![problem.dx(); n];

    let chunks: Vec<(usize, usize)> = (0..grid.len())
        .step_by(CHUNK)
        .map(|s| (s, (s + CHUNK).min(grid.len())))
        .collect();
    let partial = chunks
        .par_iter()
        .map(|&(lo, hi)| -> Result<[Vec<f64>; 4]> {
            let mut q = vec![0.0; n + 1];
            let mut g = vec![0.0; n];
            let mut d = vec![0.0; n];
            let mut e = vec![0.0; n];
            let mut kappa = vec![0.0; n];
            let mut source = vec![0.0; n];
            for i in lo..hi {
                for c in 0..n {
                    kappa[c] = spectra[c].kappa()[i] * PER_CM;
                    source[c] = planck[c][i];
                }
                let wall = [
                    walls[0].as_ref().map_or(0.0, |p| p[i]),
                    walls[1].as_ref().map_or(0.0, |p| p[i]),
                ];
                if wall == [0.0, 0.0] && kappa.iter().all(|&k| k == 0.0) {
                    continue;
                }
                let sol = gray_exact(&dx, &kappa, &source, wall)?;
                let wi = w[i];
                for f in 0..=n {
                    q[f] += wi * sol.q[f];
                }
                for c in 0..n {
                    g[c] += wi * sol.g[c];
                    d[c] += wi * sol.divq[c];
                    e[c] += wi * 4.0 * PI * kappa[c] * source[c];
                }
            }
            Ok([q, g, d, e])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut q = vec![0.0; n + 1];
    let mut incident = vec![0.0; n];
    let mut divq = vec![0.0; n];
    let mut emission = vec![0.0; n];
    for [pq, pg, pd, pe] in &partial {
        for (a, b) in q.iter_mut().zip(pq) {
            *a += b;
        }
        for (a, b) in incident.iter_mut().zip(pg) {
            *a += b;
        }
        for (a, b) in divq.iter_mut().zip(pd) {
            *a += b;
        }
        for (a, b) in emission.iter_mut().zip(pe) {
            *a += b;
        }
    }
    Ok(RteSolution {
        model: "lbl".into(),
        faces: problem.faces(),
        centres: problem.centres(),
        emission,
        q,
        incident,
        divq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdist::gauss_chebyshev;
    use crate::spectra::ThermoState;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> SpectralGrid {
        SpectralGrid::from_range(150.0, 9300.0, 1.0).unwrap()
    }

    #[test]
    fn gray_field_mean_is_exact() {
        let f = SpectralField::new(grid(), vec![0.37; grid().len()], None).unwrap();
        assert!((planck_mean_lbl(&f, 1300.0).unwrap() - 0.37).abs() < 1e-15);
    }

    #[test]
    fn two_level_weighted_mean() {
        let g = grid();
        let t = 1500.0;
        let ib = planck_on_grid(&g, t);
        let w = trapezoid_weights(&g);
        let total: f64 = ib.iter().zip(&w).map(|(b, w)| b * w).sum();
        // split where the lower part carries 30 % of the weight
        let mut acc = 0.0;
        let mut split = 0;
        while acc + ib[split] * w[split] <= 0.3 * total {
            acc += ib[split] * w[split];
            split += 1;
        }
        let frac = acc / total;
        assert!((frac - 0.3).abs() < 1e-3);
        let kappa: Vec<f64> = (0..g.len())
            .map(|i| if i < split { 1.0 } else { 10.0 })
            .collect();
        let f = SpectralField::new(g, kappa, None).unwrap();
        let kp = planck_mean_lbl(&f, t).unwrap();
        assert!((kp - (frac + 10.0 * (1.0 - frac))).abs() < 1e-12);
        assert!((kp - 7.3).abs() < 1e-2);
    }

    #[test]
    fn matches_compensated_summation() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let kappa: Vec<f64> = (0..g.len())
            .map(|_| 10f64.powf(rng.random_range(-6.0..2.0)))
            .collect();
        let f = SpectralField::new(g, kappa.clone(), None).unwrap();
        let t = 900.0;
        // Neumaier-compensated sums, evaluated independently
        let neumaier = |terms: &mut dyn Iterator<Item = f64>| {
            let (mut s, mut c) = (0.0f64, 0.0f64);
            for x in terms {
                let t = s + x;
                c += if s.abs() >= x.abs() {
                    (s - t) + x
                } else {
                    (x - t) + s
                };
                s = t;
            }
            s + c
        };
        let n = g.len();
        let b = |i: usize| {
            crate::spectra::planck_intensity(t, g.eta(i)).unwrap()
                * if i == 0 || i + 1 == n { 0.5 } else { 1.0 }
        };
        let num = neumaier(&mut (0..n).map(|i| kappa[i] * b(i)));
        let den = neumaier(&mut (0..n).map(b));
        let kp = planck_mean_lbl(&f, t).unwrap();
        assert!((kp - num / den).abs() < 1e-10 * kp);
    }

    #[test]
    fn fsck_mean_of_constant_profile() {
        let quad = gauss_chebyshev(8).unwrap();
        let nodes: Vec<NodeValues> = quad
            .nodes()
            .iter()
            .map(|&g| NodeValues {
                g,
                kstar: 2.5,
                ka: 2.5,
            })
            .collect();
        assert!((planck_mean_fsck(&nodes, &quad).unwrap() - 2.5).abs() < 1e-12);
        assert!(planck_mean_fsck(&nodes[..3], &quad).is_err());
    }

    #[test]
    fn lbl_slab_of_gray_spectrum_is_gray() {
        // An oracle on a coarse grid; compare emission with its own definition
        let g = SpectralGrid::from_range(150.0, 9300.0, 5.0).unwrap();
        let oracle = ExactOracle::new(crate::spectra::LineCatalog::for_grid(7, &g), g).unwrap();
        let s = ThermoState::new(1200.0, 0.1, 0.1, 0.0).unwrap();
        let p = SlabProblem::uniform(0.3, 8, s, 1200.0).unwrap();
        let sol = solve_slab_lbl(&p, &oracle).unwrap();
        assert!(sol.energy_residual() < 1e-9);
        let field = oracle.spectrum(&s).unwrap();
        let kp = planck_mean_lbl(&field, 1200.0).unwrap();
        let ib_grid: f64 = planck_on_grid(&g, 1200.0)
            .iter()
            .zip(trapezoid_weights(&g))
            .map(|(b, w)| b * w)
            .sum();
        let expect = 4.0 * PI * PER_CM * kp * ib_grid;
        for e in &sol.emission {
            assert!((e - expect).abs() < 1e-10 * expect);
        }
        assert!(sol.divq.iter().all(|&d| d > 0.0 && d < expect));
    }
}
