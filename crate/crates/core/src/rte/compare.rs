//! Side-by-side slab solutions and deviation summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{solve_slab, RteSolution, SlabProblem, Solver, SpectralModel};
use crate::error::{Error, Result};
use crate::kdist::QuadratureSet;

/// Deviation of one field from the reference.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldDeviation {
    /// max |Δ|/|ref| over cells where |ref| ≥ 1e−3·max|ref|.
    pub max_rel: f64,
    /// Mean of the same pointwise ratios.
    pub mean_rel: f64,
    /// max |Δ| / max |ref|.
    pub peak_rel: f64,
}

impl FieldDeviation {
    pub fn of(field: &[f64], reference: &[f64]) -> Self {
        let peak = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            let dev = field.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let r = if dev == 0.0 { 0.0 } else { f64::INFINITY };
            return Self {
                max_rel: r,
                mean_rel: r,
                peak_rel: r,
            };
        }
        let mut max_rel = 0.0f64;
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut max_abs = 0.0f64;
        for (f, r) in field.iter().zip(reference) {
            let d = (f - r).abs();
            max_abs = max_abs.max(d);
            if r.abs() >= 1e-3 * peak {
                max_rel = max_rel.max(d / r.abs());
                sum += d / r.abs();
                count += 1;
            }
        }
        Self {
            max_rel,
            mean_rel: sum / count as f64,
            peak_rel: max_abs / peak,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub model: String,
    pub emission: FieldDeviation,
    /// Flux at cell centres.
    pub q: FieldDeviation,
    pub divq: FieldDeviation,
    pub energy_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// The first solution is the reference.
    pub solutions: Vec<RteSolution>,
    pub deviations: Vec<Deviation>,
}

/// Solves the slab with every model on a shared mesh and quadrature and
/// measures each against the first.
pub fn compare_models(
    problem: &SlabProblem,
    models: &[&dyn SpectralModel],
    quad: &QuadratureSet,
    solver: Solver,
) -> Result<Comparison> {
    if models.is_empty() {
        return Err(Error::Empty("no spectral models to compare".into()));
    }
    let solutions = models
        .iter()
        .map(|m| solve_slab(problem, *m, quad, solver))
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison::from_solutions(solutions))
}

impl Comparison {
    /// Deviations of every solution against `solutions[0]`.
    pub fn from_solutions(solutions: Vec<RteSolution>) -> Self {
        let reference = &solutions[0];
        let ref_q = reference.q_centres();
        let deviations = solutions
            .iter()
            .map(|s| Deviation {
                model: s.model.clone(),
                emission: FieldDeviation::of(&s.emission, &reference.emission),
                q: FieldDeviation::of(&s.q_centres(), &ref_q),
                divq: FieldDeviation::of(&s.divq, &reference.divq),
                energy_residual: s.energy_residual(),
            })
            .collect();
        Self {
            solutions,
            deviations,
        }
    }

    pub fn deviation(&self, model: &str) -> Option<&Deviation> {
        self.deviations.iter().find(|d| d.model == model)
    }

    /// `x,emission_<m>,q_<m>,divq_<m>,…` at cell centres.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x");
        for s in &self.solutions {
            let _ = write!(out, ",emission_{m},q_{m},divq_{m}", m = s.model);
        }
        out.push('\n');
        let qs: Vec<Vec<f64>> = self.solutions.iter().map(|s| s.q_centres()).collect();
        for (c, x) in self.solutions[0].centres.iter().enumerate() {
            let _ = write!(out, "{x:.10e}");
            for (s, q) in self.solutions.iter().zip(&qs) {
                let _ = write!(
                    out,
                    ",{:.10e},{:.10e},{:.10e}",
                    s.emission[c], q[c], s.divq[c]
                );
            }
            out.push('\n');
        }
        out
    }

    /// Key–value summary of the deviations.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "reference = {}", self.solutions[0].model);
        for d in &self.deviations {
            let m = &d.model;
            for (name, f) in [("emission", d.emission), ("q", d.q), ("divq", d.divq)] {
                let _ = writeln!(out, "{m}.{name}.max_rel = {:.6e}", f.max_rel);
                let _ = writeln!(out, "{m}.{name}.mean_rel = {:.6e}", f.mean_rel);
                let _ = writeln!(out, "{m}.{name}.peak_rel = {:.6e}", f.peak_rel);
            }
            let _ = writeln!(out, "{m}.energy_residual = {:.6e}", d.energy_residual);
        }
        out
    }

    pub fn write(&self, csv: impl AsRef<Path>, summary: impl AsRef<Path>) -> Result<()> {
        let csv = csv.as_ref();
        fs::write(csv, self.to_csv()).map_err(|e| Error::io(csv, e))?;
        let summary = summary.as_ref();
        fs::write(summary, self.summary()).map_err(|e| Error::io(summary, e))
    }
}

#[cfg(test)]
mod tests {
    use super::super::GrayModel;
    use super::*;
    use crate::kdist::gauss_chebyshev;
    use crate::spectra::ThermoState;

    #[test]
    fn self_comparison_is_zero() {
        let s = ThermoState::new(1400.0, 0.1, 0.1, 0.01).unwrap();
        let p = SlabProblem::uniform(0.5, 12, s, 1000.0).unwrap();
        let quad = gauss_chebyshev(8).unwrap();
        let g = GrayModel::new(0.02).unwrap();
        let cmp = compare_models(&p, &[&g, &g], &quad, Solver::Exact).unwrap();
        for d in &cmp.deviations {
            assert_eq!(d.divq, FieldDeviation::default());
            assert_eq!(d.q.peak_rel, 0.0);
        }
        let csv = cmp.to_csv();
        assert!(csv.starts_with("x,emission_gray,q_gray,divq_gray,emission_gray"));
        assert_eq!(csv.lines().count(), 13);
        assert!(cmp.summary().contains("gray.divq.max_rel = 0.000000e0"));
    }

    #[test]
    fn deviation_measures() {
        let d = FieldDeviation::of(&[1.1, 2.0, 0.0], &[1.0, 2.0, 1e-9]);
        assert!((d.max_rel - 0.1).abs() < 1e-12);
        assert!((d.mean_rel - 0.05).abs() < 1e-12);
        assert!((d.peak_rel - 0.05).abs() < 1e-12);
        assert!(compare_models(
            &SlabProblem::desk(),
            &[],
            &gauss_chebyshev(8).unwrap(),
            Solver::Exact
        )
        .is_err());
    }
}
