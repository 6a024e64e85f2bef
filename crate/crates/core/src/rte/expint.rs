//! Exponential integrals E_n(x) = ∫₁^∞ e^{−xt} t^{−n} dt for n = 1, 2, 3.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// E_n(x) for n ∈ {1, 2, 3} and x ≥ 0.
pub fn expint(n: u32, x: f64) -> Result<f64> {
    if !(1..=3).contains(&n) {
        return Err(Error::Domain(format!(
            "exponential integral order {n} not in 1..=3"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!(
            "exponential integral argument must be ≥ 0, got {x}"
        )));
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    if x == 0.0 {
        return if n == 1 {
            Ok(f64::INFINITY)
        } else {
            Ok(1.0 / (n - 1) as f64)
        };
    }
    Ok(match n {
        1 => e1(x),
        2 => e2(x),
        _ => e3(x),
    })
}

/// E₁ by its power series below 1 and a continued fraction above.
pub(crate) fn e1(x: f64) -> f64 {
    if x < 1.0 {
        // −γ − ln x − Σ (−x)^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else if x > 740.0 {
        0.0
    } else {
        // modified Lentz on e^{−x} / (x + 1 − 1²/(x + 3 − 2²/(x + 5 − …)))
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..200 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

pub(crate) fn e2(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    (-x).exp() - x * e1(x)
}

pub(crate) fn e3(x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    0.5 * ((-x).exp() - x * e2(x))
}

/// 2Δ − 1 + 2E₃(Δ) = ∫₀^Δ∫₀^Δ E₁(|t − t'|) dt' dt, by series for small Δ
/// where the closed form cancels.
pub(crate) fn self_kernel(d: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    if d < 0.1 {
        // Δ²(1.5 − γ − ln Δ) − 2 Σ_{k≥3} (−Δ)^k / ((k − 2)·k!)
        let mut sum = 0.0;
        let mut pow = d * d / 2.0; // (−Δ)^k / k! at k = 2
        for k in 3..30 {
            pow *= -d / k as f64;
            sum += pow / (k - 2) as f64;
            if pow.abs() < 1e-20 * d * d {
                break;
            }
        }
        d * d * (1.5 - EULER_GAMMA - d.ln()) - 2.0 * sum
    } else {
        2.0 * d - 1.0 + 2.0 * e3(d)
    }
}
