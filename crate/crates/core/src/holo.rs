//! Complex equation `y′ = φ(η, y)`, `y(0) = y₀` by truncated power series.
//!
//! `φ` is a finite double series in `η` and `ξ`. Coefficients of `y` follow
//! from `(n+1) y_{n+1} = [ηⁿ] φ(η, y(η))`, and radii of convergence are read
//! off the coefficient growth.
//!
//! ```
//! use num_complex::Complex64;
//! use solmap_core::holo::{blowup_family, radius_estimate, taylor_solve, Radius};
//!
//! let phi = blowup_family(3);
//! let y = taylor_solve(Complex64::new(0.5, 0.0), &phi, 200).unwrap();
//! let Radius::Finite(r) = radius_estimate(&y, 0.5).unwrap() else { panic!() };
//! assert!((r - 1.5f64.powf(-0.25)).abs() < 1e-6);
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::fmt17;

/// Coefficient magnitude treated as overflow.
pub const OVERFLOW: f64 = 1e300;
/// Radius estimates above this are reported as a lower bound.
pub const RADIUS_BOUND: f64 = 10.0;

#[derive(Debug, Error)]
pub enum HoloError {
    #[error("coefficient {index} overflowed (|c| = {magnitude:e})")]
    Overflow { index: usize, magnitude: f64 },
    #[error("need at least {need} nonzero coefficients for a radius estimate, got {got}")]
    TooFewCoefficients { need: usize, got: usize },
    #[error("invalid series input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Truncated series `c₀ + c₁η + … + c_Nη^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<Complex64>,
}

impl PowerSeries {
    /// Needs at least two finite coefficients.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, HoloError> {
        if coeffs.len() < 2 {
            return Err(HoloError::Invalid(
                "truncation order must be at least 1".into(),
            ));
        }
        if let Some(i) = coeffs
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(HoloError::Invalid(format!("coefficient {i} is not finite")));
        }
        Ok(PowerSeries { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self, HoloError> {
        PowerSeries::new(coeffs.iter().map(|c| Complex64::new(*c, 0.0)).collect())
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order.max(1) + 1];
        coeffs[0] = c;
        PowerSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        PowerSeries::constant(Complex64::new(0.0, 0.0), order)
    }

    /// `exp(c η)` to order `order`.
    pub fn exp_linear(c: Complex64, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..=order.max(1) {
            coeffs.push(term);
            term = term * c / (n + 1) as f64;
        }
        PowerSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> PowerSeries {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order.max(1) + 1, Complex64::new(0.0, 0.0));
        PowerSeries { coeffs }
    }

    pub fn add(&self, other: &PowerSeries) -> PowerSeries {
        let n = self.order().min(other.order());
        PowerSeries {
            coeffs: (0..=n).map(|i| self.coeffs[i] + other.coeffs[i]).collect(),
        }
    }

    pub fn sub(&self, other: &PowerSeries) -> PowerSeries {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, a: Complex64) -> PowerSeries {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// Cauchy product truncated to the smaller order.
    pub fn mul(&self, other: &PowerSeries) -> PowerSeries {
        let n = self.order().min(other.order());
        PowerSeries {
            coeffs: cauchy(&self.coeffs, &other.coeffs, n),
        }
    }

    /// Term-wise derivative; the order drops by one (but stays at least 1).
    pub fn derivative(&self) -> PowerSeries {
        let mut coeffs: Vec<Complex64> = (1..=self.order())
            .map(|i| self.coeffs[i] * i as f64)
            .collect();
        if coeffs.len() < 2 {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        PowerSeries { coeffs }
    }

    /// `∫₀^η`, kept at the same order.
    pub fn integral(&self) -> PowerSeries {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for i in 1..coeffs.len() {
            coeffs[i] = self.coeffs[i - 1] / i as f64;
        }
        PowerSeries { coeffs }
    }

    /// `exp` of the series via `E′ = a′E`.
    pub fn exp(&self) -> PowerSeries {
        let n = self.order();
        let da: Vec<Complex64> = (1..=n).map(|i| self.coeffs[i] * i as f64).collect();
        let mut e = vec![Complex64::new(0.0, 0.0); n + 1];
        e[0] = self.coeffs[0].exp();
        for k in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..=k {
                acc += da[j] * e[k - j];
            }
            e[k + 1] = acc / (k + 1) as f64;
        }
        PowerSeries { coeffs: e }
    }

    /// `log` of a series with nonzero constant term, via `L′ = a′/a`.
    pub fn log(&self) -> Result<PowerSeries, HoloError> {
        let a0 = self.coeffs[0];
        if a0 == Complex64::new(0.0, 0.0) {
            return Err(HoloError::Invalid(
                "log of a series with zero constant term".into(),
            ));
        }
        let n = self.order();
        // q = a′ / a, then L = log a0 + ∫ q
        let mut q = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let mut acc = self.coeffs[k + 1] * (k + 1) as f64;
            for j in 0..k {
                acc -= q[j] * self.coeffs[k - j];
            }
            q[k] = acc / a0;
        }
        let mut l = vec![a0.ln(); n + 1];
        for k in 1..=n {
            l[k] = q[k - 1] / k as f64;
        }
        Ok(PowerSeries { coeffs: l })
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Largest coefficient difference on the common orders.
    pub fn max_abs_diff(&self, other: &PowerSeries) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Header `index,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), HoloError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "re", "im"])?;
        for (i, c) in self.coeffs.iter().enumerate() {
            out.write_record([i.to_string(), fmt17(c.re), fmt17(c.im)])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<PowerSeries, HoloError> {
        let mut rd = csv::Reader::from_reader(r);
        let mut coeffs = Vec::new();
        for (row, rec) in rd.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| -> Result<&str, HoloError> {
                rec.get(i)
                    .ok_or_else(|| HoloError::Invalid(format!("row {row}: missing column {i}")))
            };
            let index: usize = field(0)?
                .trim()
                .parse()
                .map_err(|_| HoloError::Invalid(format!("row {row}: bad index")))?;
            if index != row {
                return Err(HoloError::Invalid(format!(
                    "row {row}: index {index} out of order"
                )));
            }
            let num = |s: &str| -> Result<f64, HoloError> {
                s.trim()
                    .parse()
                    .map_err(|_| HoloError::Invalid(format!("row {row}: bad number `{s}`")))
            };
            coeffs.push(Complex64::new(num(field(1)?)?, num(field(2)?)?));
        }
        PowerSeries::new(coeffs)
    }
}

fn cauchy(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    (0..=n)
        .map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum())
        .collect()
}

/// `φ(η, ξ) = Σ c_{m,k} η^m ξ^k` with finite support.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BiSeries {
    terms: Vec<(usize, usize, Complex64)>,
}

impl BiSeries {
    pub fn new() -> Self {
        BiSeries::default()
    }

    /// Adds `c η^m ξ^k`.
    pub fn with_term(mut self, m: usize, k: usize, c: Complex64) -> Self {
        self.terms.push((m, k, c));
        self
    }

    pub fn terms(&self) -> &[(usize, usize, Complex64)] {
        &self.terms
    }

    pub fn max_xi_degree(&self) -> usize {
        self.terms.iter().map(|t| t.1).max().unwrap_or(0)
    }

    pub fn eval(&self, eta: Complex64, xi: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, k, c)| c * eta.powu(*m as u32) * xi.powu(*k as u32))
            .sum()
    }
}

/// `n(n+1) ηⁿ ξ²`, whose solution from `y₀ = ε` is `ε / (1 − nε η^{n+1})`.
pub fn blowup_family(n: usize) -> BiSeries {
    BiSeries::new().with_term(n, 2, Complex64::new((n * (n + 1)) as f64, 0.0))
}

/// The closed-form solution of the [`blowup_family`] at `ε`.
pub fn blowup_solution(n: usize, epsilon: f64, eta: Complex64) -> Complex64 {
    let e = Complex64::new(epsilon, 0.0);
    e / (1.0 - n as f64 * epsilon * eta.powu(n as u32 + 1))
}

/// Coefficients `y₀ … y_N` of the solution.
pub fn taylor_solve(y0: Complex64, phi: &BiSeries, order: usize) -> Result<PowerSeries, HoloError> {
    if order < 1 {
        return Err(HoloError::Invalid(
            "truncation order must be at least 1".into(),
        ));
    }
    if !(y0.re.is_finite() && y0.im.is_finite()) {
        return Err(HoloError::Invalid("initial value must be finite".into()));
    }
    let kmax = phi.max_xi_degree();
    let zero = Complex64::new(0.0, 0.0);
    let mut y = vec![zero; order + 1];
    y[0] = y0;
    // powers[k][j] = [η^j] y^k, grown one degree per step
    let mut powers: Vec<Vec<Complex64>> = vec![vec![zero; order + 1]; kmax + 1];
    powers[0][0] = Complex64::new(1.0, 0.0);
    for n in 0..order {
        for k in 1..=kmax {
            let (lower, upper) = powers.split_at_mut(k);
            let prev = &lower[k - 1];
            let mut acc = zero;
            for j in 0..=n {
                acc += prev[j] * y[n - j];
            }
            upper[0][n] = acc;
        }
        let mut rhs = zero;
        for (m, k, c) in &phi.terms {
            if *m <= n {
                rhs += c * powers[*k][n - m];
            }
        }
        let next = rhs / (n + 1) as f64;
        let magnitude = next.norm();
        if !(magnitude <= OVERFLOW) {
            return Err(HoloError::Overflow {
                index: n + 1,
                magnitude,
            });
        }
        y[n + 1] = next;
    }
    PowerSeries::new(y)
}

/// Coefficients of `y′ − φ(η, y)`, exact up to order `N − 1`.
pub fn series_residual(y: &PowerSeries, phi: &BiSeries) -> PowerSeries {
    let n = y.order() - 1;
    let dy = y.derivative().truncate(n);
    let mut acc = PowerSeries::zero(n);
    let yt = y.truncate(n);
    for (m, k, c) in &phi.terms {
        let mut p = PowerSeries::constant(Complex64::new(1.0, 0.0), n);
        for _ in 0..*k {
            p = p.mul(&yt);
        }
        let mut shifted = vec![Complex64::new(0.0, 0.0); n + 1];
        for j in 0..=n {
            if j + m <= n {
                shifted[j + m] = p.coeffs[j] * c;
            }
        }
        acc = acc.add(&PowerSeries { coeffs: shifted });
    }
    dy.sub(&acc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Finite(f64),
    /// The estimate exceeded [`RADIUS_BOUND`].
    AtLeast(f64),
}

impl Radius {
    pub fn value(self) -> f64 {
        match self {
            Radius::Finite(r) | Radius::AtLeast(r) => r,
        }
    }
}

/// `exp(−b)` where `b` is the least-squares slope of `log|c_n|` against `n`
/// over the last `tail` fraction of the nonzero coefficients.
pub fn radius_estimate(s: &PowerSeries, tail: f64) -> Result<Radius, HoloError> {
    if !(tail > 0.0 && tail <= 1.0) {
        return Err(HoloError::Invalid(format!(
            "tail fraction {tail} not in (0, 1]"
        )));
    }
    let nonzero: Vec<(f64, f64)> = s
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(i, c)| (i as f64, c.norm().ln()))
        .collect();
    let need = 20;
    let take = ((nonzero.len() as f64 * tail).ceil() as usize).min(nonzero.len());
    if nonzero.len() < need || take < 2 {
        return Err(HoloError::TooFewCoefficients {
            need,
            got: nonzero.len(),
        });
    }
    let pts = &nonzero[nonzero.len() - take..];
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let r = (-sxy / sxx).exp();
    Ok(if r > RADIUS_BOUND {
        Radius::AtLeast(RADIUS_BOUND)
    } else {
        Radius::Finite(r)
    })
}

/// `u = e^{A}(u₀ + ∫₀^η e^{−A} v′)` with `A = ∫₀^η a`, the solution of
/// `u′ = a u + v′`, `u(0) = u₀`.
pub fn linearized_holo_solve(
    a: &PowerSeries,
    u0: Complex64,
    v: &PowerSeries,
) -> Result<PowerSeries, HoloError> {
    let n = a.order().min(v.order());
    let big_a = a.truncate(n).integral();
    let ea = big_a.exp();
    let ema = big_a.scale(Complex64::new(-1.0, 0.0)).exp();
    let dv = v.truncate(n).derivative().truncate(n);
    let inner = ema.mul(&dv).integral();
    let u = ea.mul(&inner.add(&PowerSeries::constant(u0, n)));
    if let Some(index) = u.coeffs.iter().position(|c| !(c.norm() <= OVERFLOW)) {
        return Err(HoloError::Overflow {
            index,
            magnitude: u.coeffs[index].norm(),
        });
    }
    Ok(u)
}

/// Sup over `|η| = r` (2048 points) of `|y_n − y¹|` with
/// `y_n = a_n s/(s − a_n² η)`, `a_n = 1 − 1/n` and `y¹ = s/(s − η)`.
pub fn counterexample_distance(r: f64, s: f64, n: usize) -> f64 {
    let a = 1.0 - 1.0 / n as f64;
    let sc = Complex64::new(s, 0.0);
    (0..2048)
        .map(|j| {
            let eta = Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / 2048.0);
            let yn = a * sc / (sc - a * a * eta);
            let y1 = sc / (sc - eta);
            (yn - y1).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    /// `(n, sup distance)` for `n = 1..=n_max`.
    pub distances: Vec<(usize, f64)>,
    /// `d(2n) / d(n)` for every `n` with `2n ≤ n_max`, `n ≥ 2`.
    pub halving_ratios: Vec<(usize, f64)>,
    /// Radius of the series of `y¹`, solved from `y′ = y²/s`, `y(0) = 1`.
    pub radius: Radius,
}

pub fn counterexample_run(
    r: f64,
    s: f64,
    n_max: usize,
    order: usize,
) -> Result<Counterexample, HoloError> {
    if !(0.0 < r && r < s && s < 1.0) {
        return Err(HoloError::Invalid(format!(
            "need 0 < r < s < 1, got r={r}, s={s}"
        )));
    }
    if n_max < 1 {
        return Err(HoloError::Invalid("n_max must be at least 1".into()));
    }
    let distances: Vec<(usize, f64)> = (1..=n_max)
        .map(|n| (n, counterexample_distance(r, s, n)))
        .collect();
    let halving_ratios = (2..=n_max / 2)
        .map(|n| (n, distances[2 * n - 1].1 / distances[n - 1].1))
        .collect();
    let phi = BiSeries::new().with_term(0, 2, Complex64::new(1.0 / s, 0.0));
    let y1 = taylor_solve(Complex64::new(1.0, 0.0), &phi, order)?;
    Ok(Counterexample {
        distances,
        halving_ratios,
        radius: radius_estimate(&y1, 0.5)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmptyInterior {
    /// `None` when the series vanishes beyond the constant term.
    pub estimate: Option<Radius>,
    /// `(nε)^{−1/(n+1)}`, infinite for `ε = 0`.
    pub analytic: f64,
    pub blows_up_inside: bool,
}

/// Solves the [`blowup_family`] from `y₀ = ε` and checks whether the radius
/// estimate lies below `1 − 1e−3`.
pub fn empty_interior_demo(
    epsilon: f64,
    n: usize,
    order: usize,
) -> Result<EmptyInterior, HoloError> {
    if n == 0 {
        return Err(HoloError::Invalid("family index must be positive".into()));
    }
    let y = taylor_solve(Complex64::new(epsilon, 0.0), &blowup_family(n), order)?;
    let analytic = if epsilon == 0.0 {
        f64::INFINITY
    } else {
        (n as f64 * epsilon.abs()).powf(-1.0 / (n as f64 + 1.0))
    };
    let estimate = match radius_estimate(&y, 0.5) {
        Ok(r) => Some(r),
        Err(HoloError::TooFewCoefficients { .. })
            if y.coeffs[1..].iter().all(|c| c.norm() == 0.0) =>
        {
            None
        }
        Err(e) => return Err(e),
    };
    let blows_up_inside = matches!(estimate, Some(Radius::Finite(r)) if r < 1.0 - 1e-3);
    Ok(EmptyInterior {
        estimate,
        analytic,
        blows_up_inside,
    })
}
