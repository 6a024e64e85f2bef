//! Full-spectrum look-up table over (T, T0, x_CO2, x_H2O, x_CO) with
//! multilinear interpolation, the baseline the surrogate is compared against.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::binio::{Reader, Writer};
use crate::error::{Error, FormatError, Result};
use crate::kdist::{gauss_chebyshev, ExactOracle, NodeValues, QuadratureSet};
use crate::spectra::ThermoState;

pub const TABLE_MAGIC: &[u8; 4] = b"FSKT";
pub const TABLE_VERSION: u32 = 1;

const AXIS_NAMES: [&str; 5] = ["T", "T0", "x_CO2", "x_H2O", "x_CO"];

/// Grid axes, each strictly increasing with at least two values.
#[derive(Debug, Clone, PartialEq)]
pub struct TableAxes {
    axes: [Vec<f64>; 5],
}

impl TableAxes {
    pub fn new(
        t: Vec<f64>,
        t0: Vec<f64>,
        x_co2: Vec<f64>,
        x_h2o: Vec<f64>,
        x_co: Vec<f64>,
    ) -> Result<Self> {
        let axes = [t, t0, x_co2, x_h2o, x_co];
        let bounds = [
            (ThermoState::T_MIN, ThermoState::T_MAX),
            (ThermoState::T_MIN, ThermoState::T_MAX),
            (0.0, 1.0),
            (0.0, 1.0),
            (0.0, ThermoState::X_CO_MAX),
        ];
        for ((axis, name), (lo, hi)) in axes.iter().zip(AXIS_NAMES).zip(bounds) {
            if axis.len() < 2 {
                return Err(Error::Shape(format!("axis {name} needs at least 2 values")));
            }
            if axis.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Domain(format!(
                    "axis {name} must be strictly increasing"
                )));
            }
            for &v in axis {
                if !(lo..=hi).contains(&v) {
                    return Err(Error::Range {
                        quantity: name,
                        value: v,
                        min: lo,
                        max: hi,
                    });
                }
            }
        }
        Ok(Self { axes })
    }

    /// Default desk-scale axes: 10 temperatures each, 6 mole fractions each.
    pub fn desk() -> Self {
        let temps: Vec<f64> = (1..=10).map(|i| 300.0 * i as f64).collect();
        Self::new(
            temps.clone(),
            temps,
            vec![0.0, 0.01, 0.05, 0.2, 0.5, 1.0],
            vec![0.0, 0.01, 0.05, 0.2, 0.5, 1.0],
            vec![0.0, 0.01, 0.05, 0.1, 0.25, 0.5],
        )
        .expect("desk axes are valid")
    }

    /// Full Table-1 value sets (28 × 28 × 18 × 18 × 9 points).
    pub fn table1() -> Self {
        let temps = crate::dataset::table1_temperatures();
        Self::new(
            temps.clone(),
            temps,
            crate::dataset::TABLE1_X_MAJOR.to_vec(),
            crate::dataset::TABLE1_X_MAJOR.to_vec(),
            crate::dataset::TABLE1_X_CO.to_vec(),
        )
        .expect("Table-1 axes are valid")
    }

    pub fn axis(&self, i: usize) -> &[f64] {
        &self.axes[i]
    }

    pub fn lens(&self) -> [usize; 5] {
        [0, 1, 2, 3, 4].map(|i| self.axes[i].len())
    }

    pub fn points(&self) -> usize {
        self.lens().iter().product()
    }

    /// Inserts the midpoint of every interval on every axis.
    pub fn refined(&self) -> Self {
        let refine = |a: &Vec<f64>| {
            let mut out = Vec::with_capacity(2 * a.len() - 1);
            for w in a.windows(2) {
                out.push(w[0]);
                out.push(0.5 * (w[0] + w[1]));
            }
            out.push(*a.last().expect("non-empty axis"));
            out
        };
        Self {
            axes: [0, 1, 2, 3, 4].map(|i| refine(&self.axes[i])),
        }
    }

    /// Row-major flat index of a grid point (T slowest, x_CO fastest).
    pub fn flat_index(&self, idx: [usize; 5]) -> usize {
        let lens = self.lens();
        idx.iter().zip(lens).fold(0, |acc, (&i, n)| acc * n + i)
    }
}

/// k* and a·k* at every grid point and quadrature node.
#[derive(Debug, Clone, PartialEq)]
pub struct FsckTable {
    axes: TableAxes,
    quad: QuadratureSet,
    /// `[point][node]`, points in [`TableAxes::flat_index`] order.
    kstar: Vec<f64>,
    ka: Vec<f64>,
}

impl FsckTable {
    pub fn new(
        axes: TableAxes,
        quad: QuadratureSet,
        kstar: Vec<f64>,
        ka: Vec<f64>,
    ) -> Result<Self> {
        let n = axes.points() * quad.len();
        if kstar.len() != n || ka.len() != n {
            return Err(Error::Shape(format!(
                "expected {n} values per channel, got {} and {}",
                kstar.len(),
                ka.len()
            )));
        }
        if kstar.iter().chain(&ka).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("table values".into()));
        }
        if kstar
            .chunks_exact(quad.len())
            .any(|node_k| node_k.windows(2).any(|w| w[0] > w[1]))
        {
            return Err(Error::Domain(
                "stored k* must be nondecreasing across nodes".into(),
            ));
        }
        Ok(Self {
            axes,
            quad,
            kstar,
            ka,
        })
    }

    pub fn axes(&self) -> &TableAxes {
        &self.axes
    }

    pub fn quad(&self) -> &QuadratureSet {
        &self.quad
    }

    /// Stored (k*, ka) node vectors of one grid point.
    pub fn values_at(&self, idx: [usize; 5]) -> (&[f64], &[f64]) {
        let n = self.quad.len();
        let p = self.axes.flat_index(idx) * n;
        (&self.kstar[p..p + n], &self.ka[p..p + n])
    }

    /// 5-D multilinear interpolation, independently per node and channel.
    pub fn interp(&self, state: &ThermoState, t0: f64) -> Result<Vec<NodeValues>> {
        let q = [
            state.temperature(),
            t0,
            state.x_co2(),
            state.x_h2o(),
            state.x_co(),
        ];
        let mut lo = [0usize; 5];
        let mut frac = [0.0f64; 5];
        for d in 0..5 {
            let a = self.axes.axis(d);
            let v = q[d];
            let (first, last) = (a[0], a[a.len() - 1]);
            if !(v >= first && v <= last) {
                return Err(Error::Extrapolation(format!(
                    "{} = {v} outside table axis [{first}, {last}]",
                    AXIS_NAMES[d]
                )));
            }
            let j = (a.partition_point(|&x| x <= v).max(1) - 1).min(a.len() - 2);
            lo[d] = j;
            frac[d] = (v - a[j]) / (a[j + 1] - a[j]);
        }

        let n = self.quad.len();
        let mut k = vec![0.0; n];
        let mut ka = vec![0.0; n];
        for corner in 0..32u32 {
            let mut w = 1.0;
            let mut idx = lo;
            for d in 0..5 {
                if corner >> d & 1 == 1 {
                    w *= frac[d];
                    idx[d] += 1;
                } else {
                    w *= 1.0 - frac[d];
                }
            }
            if w == 0.0 {
                continue;
            }
            let (ck, cka) = self.values_at(idx);
            for j in 0..n {
                k[j] += w * ck[j];
                ka[j] += w * cka[j];
            }
        }
        Ok(self
            .quad
            .nodes()
            .iter()
            .zip(k.into_iter().zip(ka))
            .map(|(&g, (kstar, ka))| NodeValues { g, kstar, ka })
            .collect())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new(TABLE_MAGIC, TABLE_VERSION);
        for n in self.axes.lens() {
            w.u32(n as u32);
        }
        for d in 0..5 {
            w.f64s(self.axes.axis(d));
        }
        w.u32(self.quad.len() as u32);
        w.f64s(&self.kstar);
        w.f64s(&self.ka);
        w.finish()
    }

    /// Decodes a table file; the Gauss–Chebyshev quadrature is rebuilt from
    /// the stored node count.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::open(bytes, TABLE_MAGIC, TABLE_VERSION)?;
        let mut lens = [0usize; 5];
        for l in &mut lens {
            *l = r.u32("axis length")? as usize;
        }
        let mut axes: [Vec<f64>; 5] = Default::default();
        for d in 0..5 {
            axes[d] = r.f64s(lens[d], "axis values")?;
        }
        let nodes = r.u32("node count")? as usize;
        let points: usize = lens.iter().product();
        let count = points
            .checked_mul(nodes)
            .ok_or_else(|| FormatError::Shape("table size overflows".into()))?;
        let kstar = r.f64s(count, "k* values")?;
        let ka = r.f64s(count, "ka values")?;
        r.finish()?;
        let [t, t0, x1, x2, x3] = axes;
        let axes =
            TableAxes::new(t, t0, x1, x2, x3).map_err(|e| FormatError::Shape(e.to_string()))?;
        let quad = gauss_chebyshev(nodes).map_err(|e| FormatError::Shape(e.to_string()))?;
        Self::new(axes, quad, kstar, ka).map_err(|e| FormatError::Shape(e.to_string()).into())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Evaluates the exact oracle at every grid point.
///
/// Work is split over (T, composition); all reference temperatures of one
/// local state share a single spectrum and sort. Grid points with an
/// all-zero composition store zeros.
pub fn build_table(
    axes: &TableAxes,
    quad: &QuadratureSet,
    oracle: &ExactOracle,
) -> Result<FsckTable> {
    let [nt, nt0, n1, n2, n3] = axes.lens();
    let nq = quad.len();
    let locals: Vec<[usize; 4]> = (0..nt)
        .flat_map(|it| {
            (0..n1).flat_map(move |i1| {
                (0..n2).flat_map(move |i2| (0..n3).map(move |i3| [it, i1, i2, i3]))
            })
        })
        .collect();
    let blocks: Vec<Vec<Vec<NodeValues>>> = locals
        .par_iter()
        .map(|&[it, i1, i2, i3]| {
            let x = [axes.axis(2)[i1], axes.axis(3)[i2], axes.axis(4)[i3]];
            if x.iter().all(|&v| v == 0.0) {
                let zero = quad
                    .nodes()
                    .iter()
                    .map(|&g| NodeValues {
                        g,
                        kstar: 0.0,
                        ka: 0.0,
                    })
                    .collect();
                return Ok(vec![zero; nt0]);
            }
            let state = ThermoState::new_relaxed(axes.axis(0)[it], x)?;
            oracle
                .kdist_at_state_multi(&state, axes.axis(1), quad)
                .map_err(|e| {
                    Error::Domain(format!(
                        "oracle failed at T = {}, x = {x:?}: {e}",
                        state.temperature()
                    ))
                })
        })
        .collect::<Result<_>>()?;

    let mut kstar = vec![0.0; axes.points() * nq];
    let mut ka = vec![0.0; axes.points() * nq];
    for (&[it, i1, i2, i3], block) in locals.iter().zip(&blocks) {
        for (it0, nodes) in block.iter().enumerate() {
            let p = axes.flat_index([it, it0, i1, i2, i3]) * nq;
            for (j, v) in nodes.iter().enumerate() {
                kstar[p + j] = v.kstar;
                ka[p + j] = v.ka;
            }
        }
    }
    FsckTable::new(axes.clone(), quad.clone(), kstar, ka)
}
