//! Data transport and integration along characteristics `τ ↦ (τ, η − t + τ)`.
//!
//! With equal time and angular steps, a characteristic through node
//! `(k, m)` passes through `(k − 1, m − 1)`, so every sample is a node.

use crate::grid::{CylFn, GridFn1D};
use crate::quad::{self, Quadrature};

use super::TransportError;

/// Number of time cells for a horizon `t_final` when `dt = 1 / ntheta`.
pub fn aligned_steps(t_final: f64, ntheta: usize) -> Result<usize, TransportError> {
    let product = t_final * ntheta as f64;
    let nt = product.round();
    if !(t_final > 0.0) || nt < 1.0 || (product - nt).abs() > 1e-9 * product.max(1.0) {
        return Err(TransportError::Misaligned { product });
    }
    Ok(nt as usize)
}

pub(crate) fn check_aligned(z: &CylFn) -> Result<(), TransportError> {
    let nt = aligned_steps(z.t_final(), z.ntheta())?;
    if nt != z.nt() {
        return Err(TransportError::Misaligned {
            product: z.t_final() * z.ntheta() as f64,
        });
    }
    Ok(())
}

/// Angular samples of periodic data on `[0, 1]`; the duplicate end node is
/// dropped.
pub(crate) fn periodic_samples(y0: &GridFn1D) -> &[f64] {
    &y0.values()[..y0.n()]
}

/// `ȳ₀(t, η) = y₀(η − t)` on `[0, t_final]` with `dt = 1 / N`.
pub fn bar_y0(y0: &GridFn1D, t_final: f64) -> Result<CylFn, TransportError> {
    let n = y0.n();
    let nt = aligned_steps(t_final, n)?;
    let data = periodic_samples(y0);
    let mut values = Vec::with_capacity((nt + 1) * n);
    for k in 0..=nt {
        for m in 0..n {
            values.push(data[(m + n * (k / n + 1) - k) % n]);
        }
    }
    Ok(CylFn::new(t_final, nt, n, values)?)
}

/// `𝓘(a, z)(t, η) = ∫_a^t z(τ, η − t + τ) dτ` for the time node index `a`,
/// signed for `t < a`.
pub fn char_integral(a: usize, z: &CylFn, rule: Quadrature) -> Result<CylFn, TransportError> {
    check_aligned(z)?;
    if a > z.nt() {
        return Err(TransportError::Invalid(format!(
            "start node {a} is beyond the last time node {}",
            z.nt()
        )));
    }
    let n = z.ntheta();
    let dt = z.dt();
    let vals = z.values();
    let mut out = vec![0.0; vals.len()];
    let forward = z.nt() - a + 1;
    let mut buf = vec![0.0; forward.max(a + 1)];
    let mut acc = vec![0.0; buf.len()];
    for d in 0..n {
        // forward along the characteristic that meets row `a` at column `d`
        for j in 0..forward {
            buf[j] = vals[(a + j) * n + (d + j) % n];
        }
        quad::cumulative_into(&buf[..forward], dt, rule, &mut acc[..forward]);
        for j in 0..forward {
            out[(a + j) * n + (d + j) % n] = acc[j];
        }
        // backward: rows a, a-1, ..., 0
        for j in 0..=a {
            buf[j] = vals[(a - j) * n + (d + n * (j / n + 1) - j) % n];
        }
        quad::cumulative_into(&buf[..=a], dt, rule, &mut acc[..=a]);
        for j in 1..=a {
            out[(a - j) * n + (d + n * (j / n + 1) - j) % n] = -acc[j];
        }
    }
    Ok(CylFn::new(z.t_final(), z.nt(), n, out)?)
}

/// Integrals from local row 0 along characteristics for a block of `rows`
/// angular rows of width `n`. `out` row 0 is zero.
pub(crate) fn integrate_block(
    f: &[f64],
    rows: usize,
    n: usize,
    dt: f64,
    rule: Quadrature,
    out: &mut [f64],
) {
    out[..n].fill(0.0);
    match rule {
        Quadrature::Trapezoid => {
            let half = 0.5 * dt;
            for j in 1..rows {
                let (done, rest) = out.split_at_mut(j * n);
                let prev = &done[(j - 1) * n..];
                let fp = &f[(j - 1) * n..j * n];
                let fc = &f[j * n..(j + 1) * n];
                let cur = &mut rest[..n];
                cur[0] = prev[n - 1] + half * (fp[n - 1] + fc[0]);
                for m in 1..n {
                    cur[m] = prev[m - 1] + half * (fp[m - 1] + fc[m]);
                }
            }
        }
        Quadrature::Simpson => {
            let mut buf = vec![0.0; rows];
            let mut acc = vec![0.0; rows];
            for d in 0..n {
                for j in 0..rows {
                    buf[j] = f[j * n + (d + j) % n];
                }
                quad::cumulative_into(&buf, dt, rule, &mut acc);
                for j in 0..rows {
                    out[j * n + (d + j) % n] = acc[j];
                }
            }
        }
    }
}

/// Continuation of a window starting at local row 0: `v + (y − v)` of the
/// start slice, carried along characteristics.
pub(crate) fn continuation(
    v: &[f64],
    start_minus_v: &[f64],
    rows: usize,
    n: usize,
    out: &mut [f64],
) {
    for j in 0..rows {
        for m in 0..n {
            let src = (m + n * (j / n + 1) - j) % n;
            out[j * n + m] = v[j * n + m] + start_minus_v[src];
        }
    }
}
