//! Gray (single-node) slab kernels on a cell mesh.
//!
//! Inputs are per-cell absorption coefficients κ (m⁻¹), per-cell source
//! intensities S (the medium emits κ·S per steradian) and black-wall
//! intensities. Outputs are face fluxes, cell incident radiation and cell
//! divergence of the flux.

use std::f64::consts::PI;

use super::expint::{e2, e3, self_kernel};
use crate::error::{Error, Result};

/// Lower bound on κ in the P1 diffusion coefficient: 1e−12 cm⁻¹ in m⁻¹.
pub const P1_KAPPA_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GrayField {
    /// Flux at the n + 1 faces (+x positive).
    pub q: Vec<f64>,
    /// Incident radiation per cell.
    pub g: Vec<f64>,
    /// Flux divergence per cell.
    pub divq: Vec<f64>,
}

fn check(dx: &[f64], kappa: &[f64], source: &[f64], walls: [f64; 2]) -> Result<()> {
    let n = dx.len();
    if n == 0 || kappa.len() != n || source.len() != n {
        return Err(Error::Shape(format!(
            "{} cells, {} absorption coefficients, {} sources",
            n,
            kappa.len(),
            source.len()
        )));
    }
    for (i, &k) in kappa.iter().enumerate() {
        if !k.is_finite() {
            return Err(Error::NonFinite(format!(
                "absorption coefficient in cell {i}"
            )));
        }
        if k < 0.0 {
            return Err(Error::Domain(format!(
                "negative absorption coefficient {k} in cell {i}"
            )));
        }
    }
    if source
        .iter()
        .chain(&walls)
        .chain(dx)
        .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite(
            "slab source, wall intensity or mesh".into(),
        ));
    }
    Ok(())
}

/// ½[F(d) − F(d+a) − F(d+b) + F(d+a+b)] with F the self kernel: the double
/// integral of E₁(|t − t'|) over two optical intervals of widths a and b
/// separated by d. Used while all arguments are in the series range.
fn pair_small(d: f64, a: f64, b: f64) -> f64 {
    0.5 * (self_kernel(d) - self_kernel(d + a) - self_kernel(d + b) + self_kernel(d + a + b))
}

/// Exact solution through exponential-integral kernels.
///
/// Faces sit at optical depths τ₀ = 0 < … < τ_n. Face flux is the closed
/// form of the integral solution; the incident radiation is averaged over
/// each cell analytically, so ∇·q = κ(4πS − Ḡ) and its cell integral equals
/// the face flux difference.
pub(crate) fn gray_exact(
    dx: &[f64],
    kappa: &[f64],
    source: &[f64],
    walls: [f64; 2],
) -> Result<GrayField> {
    check(dx, kappa, source, walls)?;
    let n = dx.len();
    let mut tau = Vec::with_capacity(n + 1);
    tau.push(0.0);
    for c in 0..n {
        tau.push(tau[c] + kappa[c] * dx[c]);
    }
    let tau_l = tau[n];
    if !tau_l.is_finite() {
        return Err(Error::NonFinite("optical thickness".into()));
    }
    let m = n + 1;
    let mut e = vec![0.0; m * m];
    for i in 0..m {
        e[i * m + i] = 0.5;
        for j in 0..i {
            let v = e3(tau[i] - tau[j]);
            e[i * m + j] = v;
            e[j * m + i] = v;
        }
    }
    let e3m = |i: usize, j: usize| e[i * m + j];
    let [i0, il] = walls;

    let mut q = vec![0.0; m];
    for (f, qf) in q.iter_mut().enumerate() {
        let mut s = i0 * e3m(f, 0) - il * e3m(n, f);
        for c in 0..f {
            s += source[c] * (e3m(f, c + 1) - e3m(f, c));
        }
        for c in f..n {
            s -= source[c] * (e3m(c, f) - e3m(c + 1, f));
        }
        *qf = 2.0 * PI * s;
    }

    let mut g = vec![0.0; n];
    let mut divq = vec![0.0; n];
    for c in 0..n {
        let a = tau[c + 1] - tau[c];
        if a == 0.0 {
            g[c] = point_incident(&tau, source, walls, c);
            continue;
        }
        let mut s = i0 * (e3m(c, 0) - e3m(c + 1, 0)) + il * (e3m(n, c + 1) - e3m(n, c));
        for c2 in 0..n {
            let b = tau[c2 + 1] - tau[c2];
            if b == 0.0 || source[c2] == 0.0 {
                continue;
            }
            let mk = if c2 == c {
                self_kernel(a)
            } else {
                let (d, lo, hi) = if c2 < c {
                    (tau[c] - tau[c2 + 1], c2, c)
                } else {
                    (tau[c2] - tau[c + 1], c, c2)
                };
                if d + a + b < 0.1 {
                    pair_small(d, a, b)
                } else {
                    // E3(d) − E3(d+a) − E3(d+b) + E3(d+a+b) from face differences
                    e3m(hi, lo + 1) - e3m(hi + 1, lo + 1) - e3m(hi, lo) + e3m(hi + 1, lo)
                }
            };
            s += source[c2] * mk;
        }
        g[c] = 2.0 * PI * s / a;
        divq[c] = kappa[c] * (4.0 * PI * source[c] - g[c]);
    }
    Ok(GrayField { q, g, divq })
}

/// G at the centre of a transparent cell.
fn point_incident(tau: &[f64], source: &[f64], walls: [f64; 2], c: usize) -> f64 {
    let n = source.len();
    let t = tau[c];
    let mut s = walls[0] * e2(t) + walls[1] * e2(tau[n] - t);
    for c2 in 0..n {
        if c2 < c {
            s += source[c2] * (e2(t - tau[c2 + 1]) - e2(t - tau[c2]));
        } else if c2 > c {
            s += source[c2] * (e2(tau[c2] - t) - e2(tau[c2 + 1] - t));
        }
    }
    2.0 * PI * s
}

/// P1 approximation: finite volumes for d/dx(1/(3κ) dG/dx) = κ(G − 4πS)
/// with Marshak conditions at black walls. κ below [`P1_KAPPA_FLOOR`] is
/// raised to it with a warning.
pub(crate) fn gray_p1(
    dx: &[f64],
    kappa: &[f64],
    source: &[f64],
    walls: [f64; 2],
) -> Result<GrayField> {
    check(dx, kappa, source, walls)?;
    let n = dx.len();
    let floored = kappa.iter().filter(|&&k| k < P1_KAPPA_FLOOR).count();
    if floored > 0 {
        log::warn!("P1: {floored} cell(s) with κ below {P1_KAPPA_FLOOR:e} m⁻¹ raised to the floor");
    }
    let k: Vec<f64> = kappa.iter().map(|&v| v.max(P1_KAPPA_FLOOR)).collect();
    // half-cell resistances to flux: (Δx/2)·3κ
    let r: Vec<f64> = (0..n).map(|c| 1.5 * k[c] * dx[c]).collect();
    let b0 = 1.0 / (2.0 + r[0]);
    let bn = 1.0 / (2.0 + r[n - 1]);
    let cf: Vec<f64> = (1..n).map(|f| 1.0 / (r[f - 1] + r[f])).collect(); // face f at cf[f − 1]
    let (w0, wl) = (4.0 * PI * walls[0], 4.0 * PI * walls[1]);

    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for c in 0..n {
        let absorb = dx[c] * k[c];
        diag[c] = absorb;
        rhs[c] = absorb * 4.0 * PI * source[c];
        if c + 1 < n {
            diag[c] += cf[c];
            upper[c] = -cf[c];
        } else {
            diag[c] += bn;
            rhs[c] += bn * wl;
        }
        if c > 0 {
            diag[c] += cf[c - 1];
            lower[c] = -cf[c - 1];
        } else {
            diag[c] += b0;
            rhs[c] += b0 * w0;
        }
    }
    let g = thomas(&lower, &diag, &upper, &rhs);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("P1 incident radiation".into()));
    }

    let mut q = vec![0.0; n + 1];
    q[0] = b0 * (w0 - g[0]);
    for f in 1..n {
        q[f] = cf[f - 1] * (g[f - 1] - g[f]);
    }
    q[n] = bn * (g[n - 1] - wl);
    let divq = (0..n)
        .map(|c| k[c] * (4.0 * PI * source[c] - g[c]))
        .collect();
    Ok(GrayField { q, g, divq })
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / m;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
