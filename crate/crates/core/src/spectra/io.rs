use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{SpectralField, SpectralGrid};

pub const SPECTRUM_CSV_HEADER: &str = "eta_cm-1,kappa_cm-1";

/// Relative spacing tolerance below which a grid is treated as uniform.
const UNIFORM_TOLERANCE: f64 = 1e-6;

/// Reads a two-column `eta,kappa` CSV file.
///
/// Non-uniform grids are resampled by linear interpolation onto a uniform
/// grid whose step does not exceed the smallest input spacing.
pub fn load_spectrum_csv(path: impl AsRef<Path>) -> Result<SpectralField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == SPECTRUM_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(Error::parse(
                path,
                1,
                format!(
                    "expected header `{SPECTRUM_CSV_HEADER}`, found `{}`",
                    header.trim()
                ),
            ))
        }
        None => return Err(Error::Empty(format!("{} has no header", path.display()))),
    }

    let mut etas = Vec::new();
    let mut kappas = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let (Some(e), Some(k), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(Error::parse(path, lineno, "expected exactly two columns"));
        };
        let eta: f64 = e
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("bad wavenumber `{}`", e.trim())))?;
        let kappa: f64 = k.trim().parse().map_err(|_| {
            Error::parse(
                path,
                lineno,
                format!("bad absorption coefficient `{}`", k.trim()),
            )
        })?;
        if !eta.is_finite() || eta <= 0.0 {
            return Err(Error::parse(
                path,
                lineno,
                format!("wavenumber {eta} must be positive"),
            ));
        }
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::parse(
                path,
                lineno,
                format!("absorption coefficient {kappa} must be finite and non-negative"),
            ));
        }
        if let Some(&prev) = etas.last() {
            if eta <= prev {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("wavenumbers must increase strictly ({eta} after {prev})"),
                ));
            }
        }
        etas.push(eta);
        kappas.push(kappa);
    }
    if etas.len() < 2 {
        return Err(Error::Empty(format!(
            "{} holds {} data rows, at least 2 are required",
            path.display(),
            etas.len()
        )));
    }

    let first = etas[0];
    let last = *etas.last().unwrap();
    let mean_step = (last - first) / (etas.len() - 1) as f64;
    let min_step = etas
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let uniform = etas
        .windows(2)
        .all(|w| ((w[1] - w[0]) - mean_step).abs() <= UNIFORM_TOLERANCE * mean_step);
    if uniform {
        let grid = SpectralGrid::new(first, mean_step, etas.len())?;
        return SpectralField::new(grid, kappas, None);
    }

    let n = ((last - first) / min_step).ceil() as usize + 1;
    let grid = SpectralGrid::new(first, (last - first) / (n - 1) as f64, n)?;
    let mut resampled = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let eta = if i + 1 == n { last } else { grid.eta(i) };
        while j + 2 < etas.len() && etas[j + 1] < eta {
            j += 1;
        }
        let t = ((eta - etas[j]) / (etas[j + 1] - etas[j])).clamp(0.0, 1.0);
        resampled.push(kappas[j] + t * (kappas[j + 1] - kappas[j]));
    }
    SpectralField::new(grid, resampled, None)
}

/// Writes `field` with 17 significant digits per value.
pub fn write_spectrum_csv(field: &SpectralField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "{SPECTRUM_CSV_HEADER}").map_err(io)?;
    for (i, k) in field.kappa().iter().enumerate() {
        writeln!(out, "{:.16e},{:.16e}", field.grid().eta(i), k).map_err(io)?;
    }
    out.flush().map_err(io)
}
