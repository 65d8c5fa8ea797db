//! Two-point boundary value problem `y″ = φ(s, y, y′)`, `y(0) = η₀`,
//! `y(1) = η₁`.
//!
//! The unknown is split as `y = η̄ + w` with `η̄` the affine interpolant of
//! the boundary values and `w` vanishing at both ends. On the `N` interior
//! nodes of a uniform grid with `h = 1/(N+1)` the equation becomes
//! `D₂w − φ(s, η̄ + w, η̄′ + D₁w) = 0` with second-order central stencils, and
//! Newton's method runs on the dense Jacobian `D₂ − diag(p₃) D₁ − diag(p₂)`.
//! The reported residual is the fixed-point defect `f₀ = w − ℓ φ(…)` with
//! `ℓ = D₂⁻¹`.
//!
//! Resonances of the linearization `u″ − p₃u′ − p₂u` appear as dips of its
//! smallest singular value; for constant `p₂ = r`, `p₃ = 0` they sit at the
//! discrete eigenvalues near `r = −n²π²`.
//!
//! ```
//! use solmap_core::bvp::{newton_solve, BvpOptions, BvProblem};
//!
//! let p = BvProblem::parse(0.0, 0.0, "2", 200).unwrap();
//! let sol = newton_solve(&p, None, &BvpOptions::default()).unwrap();
//! let mid = sol.y.values()[100];
//! let s = sol.y.node(100);
//! assert!((mid - s * (s - 1.0)).abs() < 1e-8);
//! ```

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::expr::{Expression, ParseError};
use crate::grid::{GridError, GridFn1D};
use crate::jet::{eval_at, rebind, JetError, JetEvalError, JetPhi};
use crate::quad::{cumulative, integrate, Quadrature};

pub use crate::jet::VARS;

#[derive(Debug, Error)]
pub enum BvpError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Eval(#[from] JetEvalError),
    #[error("invalid boundary value problem: {0}")]
    Invalid(String),
    #[error("linearization is singular: sigma_min = {sigma_min:e}, operator norm {norm:e}")]
    Singular { sigma_min: f64, norm: f64 },
    #[error("Newton did not converge in {steps} steps (|f0| = {residual:e})")]
    NoConvergence { steps: usize, residual: f64 },
}

impl BvpError {
    pub fn is_domain(&self) -> bool {
        matches!(self, BvpError::Eval(_))
    }
}

#[derive(Debug, Clone)]
pub struct BvProblem {
    eta0: f64,
    eta1: f64,
    phi: JetPhi,
    interior: usize,
}

impl BvProblem {
    /// `interior` is the number of interior nodes `N`.
    pub fn new(eta0: f64, eta1: f64, phi: &Expression, interior: usize) -> Result<Self, BvpError> {
        if interior < 16 {
            return Err(BvpError::Invalid(format!(
                "need at least 16 interior nodes, got {interior}"
            )));
        }
        if !(eta0.is_finite() && eta1.is_finite()) {
            return Err(BvpError::Invalid("boundary values must be finite".into()));
        }
        Ok(BvProblem {
            eta0,
            eta1,
            phi: JetPhi::new(phi)?,
            interior,
        })
    }

    pub fn parse(eta0: f64, eta1: f64, phi: &str, interior: usize) -> Result<Self, BvpError> {
        BvProblem::new(eta0, eta1, &Expression::parse(phi, &VARS)?, interior)
    }

    pub fn eta(&self) -> (f64, f64) {
        (self.eta0, self.eta1)
    }

    pub fn phi(&self) -> &JetPhi {
        &self.phi
    }

    pub fn interior(&self) -> usize {
        self.interior
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.interior + 1) as f64
    }

    pub fn with_eta(&self, eta0: f64, eta1: f64) -> Result<Self, BvpError> {
        BvProblem::new(eta0, eta1, &self.phi.value, self.interior)
    }

    pub fn with_phi(&self, phi: &Expression) -> Result<Self, BvpError> {
        BvProblem::new(self.eta0, self.eta1, phi, self.interior)
    }
}

/// `ℓz = z₂ − z₂(1)s` with `z₂ = ∫₀^s ∫₀^t z`, both integrals by composite
/// Simpson. The result vanishes at both ends exactly.
pub fn green_ell(z: &GridFn1D) -> Result<GridFn1D, BvpError> {
    let h = z.h();
    let z1 = cumulative(z.values(), h, Quadrature::Simpson);
    let z2 = cumulative(&z1, h, Quadrature::Simpson);
    let last = z2[z2.len() - 1];
    let n = z.n();
    let mut y: Vec<f64> = (0..=n)
        .map(|i| z2[i] - last * (i as f64 / n as f64))
        .collect();
    y[0] = 0.0;
    y[n] = 0.0;
    Ok(GridFn1D::new(z.a(), z.b(), y)?)
}

/// The affine interpolant `η₀ + (η₁ − η₀)s` on `n` cells of `[0, 1]`.
pub fn eta_bar(eta0: f64, eta1: f64, n: usize) -> Result<GridFn1D, BvpError> {
    Ok(GridFn1D::from_fn(0.0, 1.0, n, |s| {
        eta0 + (eta1 - eta0) * s
    })?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvpOptions {
    /// Sup-norm tolerance on `f₀`.
    pub tolerance: f64,
    pub max_steps: usize,
    pub max_halvings: usize,
    /// `σ_min ≤ threshold · ‖J‖` flags the linearization as singular.
    pub singular_threshold: f64,
}

impl Default for BvpOptions {
    fn default() -> Self {
        BvpOptions {
            tolerance: 1e-12,
            max_steps: 50,
            max_halvings: 30,
            singular_threshold: 1e-8,
        }
    }
}

/// The discrete operator `u ↦ u″ − p₃u′ − p₂u` on the interior nodes.
#[derive(Debug, Clone)]
pub struct LinearizedBvp {
    pub p2: Vec<f64>,
    pub p3: Vec<f64>,
    pub h: f64,
    pub matrix: DMatrix<f64>,
}

impl LinearizedBvp {
    /// `p2`, `p3` hold values at the interior nodes.
    pub fn assemble(p2: &[f64], p3: &[f64], h: f64) -> Result<Self, BvpError> {
        let n = p2.len();
        if p3.len() != n || n == 0 {
            return Err(BvpError::Invalid("coefficient lengths differ".into()));
        }
        let (c2, c1) = (1.0 / (h * h), 1.0 / (2.0 * h));
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = -2.0 * c2 - p2[i];
            if i > 0 {
                m[(i, i - 1)] = c2 + p3[i] * c1;
            }
            if i + 1 < n {
                m[(i, i + 1)] = c2 - p3[i] * c1;
            }
        }
        Ok(LinearizedBvp {
            p2: p2.to_vec(),
            p3: p3.to_vec(),
            h,
            matrix: m,
        })
    }

    /// Constant coefficients on `n` interior nodes.
    pub fn constant(p2: f64, p3: f64, n: usize) -> Result<Self, BvpError> {
        LinearizedBvp::assemble(&vec![p2; n], &vec![p3; n], 1.0 / (n + 1) as f64)
    }

    pub fn dim(&self) -> usize {
        self.p2.len()
    }

    /// Two-norm, the largest singular value.
    pub fn norm(&self) -> f64 {
        self.matrix.singular_values().max()
    }

    /// Smallest singular value by inverse power iteration on `JᵀJ`.
    pub fn sigma_min(&self) -> f64 {
        let n = self.dim();
        let lu = self.matrix.clone().lu();
        let lut = self.matrix.transpose().lu();
        let mut x = start_vector(n);
        let mut est = f64::INFINITY;
        for _ in 0..200 {
            let Some(y) = lut.solve(&x) else { return 0.0 };
            let Some(z) = lu.solve(&y) else { return 0.0 };
            let nz = z.norm();
            if !nz.is_finite() || nz == 0.0 {
                return 0.0;
            }
            let next = 1.0 / nz.sqrt();
            x = z / nz;
            if (next - est).abs() <= 1e-12 * next {
                return next;
            }
            est = next;
        }
        est
    }

    /// Whether `σ_min > threshold · ‖J‖`, with both values.
    pub fn regularity(&self, threshold: f64) -> (bool, f64, f64) {
        let (s, n) = (self.sigma_min(), self.norm());
        (s > threshold * n, s, n)
    }

    /// Solves `J u = rhs` after checking regularity.
    pub fn solve(&self, rhs: &[f64], threshold: f64) -> Result<Vec<f64>, BvpError> {
        let (regular, sigma_min, norm) = self.regularity(threshold);
        if !regular {
            return Err(BvpError::Singular { sigma_min, norm });
        }
        self.solve_unchecked(rhs)
    }

    fn solve_unchecked(&self, rhs: &[f64]) -> Result<Vec<f64>, BvpError> {
        let b = DVector::from_column_slice(rhs);
        let x = self
            .matrix
            .clone()
            .lu()
            .solve(&b)
            .ok_or(BvpError::Singular {
                sigma_min: 0.0,
                norm: self.norm(),
            })?;
        Ok(x.iter().copied().collect())
    }
}

fn start_vector(n: usize) -> DVector<f64> {
    let v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * ((i * 7 % 13) as f64 / 13.0));
    let norm = v.norm();
    v / norm
}

/// Solves `u″ − p₃u′ − p₂u = rhs` with zero boundary values. The
/// coefficient and right-hand side grids include the two boundary nodes;
/// the result does too.
pub fn linearized_bvp_solve(
    p2: &GridFn1D,
    p3: &GridFn1D,
    rhs: &GridFn1D,
    threshold: f64,
) -> Result<GridFn1D, BvpError> {
    if !(p2.same_grid(p3) && p2.same_grid(rhs)) || p2.a() != 0.0 || p2.b() != 1.0 {
        return Err(
            GridError::Mismatch("coefficients and rhs must share a grid on [0, 1]".into()).into(),
        );
    }
    let n = p2.n() - 1;
    let op = LinearizedBvp::assemble(&p2.values()[1..=n], &p3.values()[1..=n], p2.h())?;
    let u = op.solve(&rhs.values()[1..=n], threshold)?;
    Ok(GridFn1D::new(0.0, 1.0, with_boundary(&u, 0.0, 0.0))?)
}

fn with_boundary(interior: &[f64], left: f64, right: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(interior.len() + 2);
    v.push(left);
    v.extend_from_slice(interior);
    v.push(right);
    v
}

/// Newton history and regularity at the solution.
#[derive(Debug, Clone, PartialEq)]
pub struct BvpReport {
    /// `‖f₀‖` before each step and after the last.
    pub residuals: Vec<f64>,
    pub steps: usize,
    pub halvings: usize,
    pub sigma_min: f64,
    pub operator_norm: f64,
    pub regular: bool,
}

impl BvpReport {
    /// Largest `e_{k+1} / e_k²` over steps with `1e-14 < e_k ≤ 1e-3` and
    /// `e_{k+1}` above rounding level.
    pub fn quadratic_constant(&self) -> Option<f64> {
        self.residuals
            .windows(2)
            .filter(|w| w[0] <= 1e-3 && w[0] > 1e-14 && w[1] > 1e-13)
            .map(|w| w[1] / (w[0] * w[0]))
            .reduce(f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct BvpSolution {
    /// Full solution including the boundary nodes.
    pub y: GridFn1D,
    pub report: BvpReport,
    pub linearization: LinearizedBvp,
}

struct Discrete<'a> {
    problem: &'a BvProblem,
    n: usize,
    h: f64,
    ell: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Discrete<'_> {
    fn s(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.h
    }

    /// Full values `η̄ + w` including boundary nodes.
    fn full(&self, w: &[f64]) -> Vec<f64> {
        let (e0, e1) = self.problem.eta();
        let mut y = with_boundary(w, e0, e1);
        for (i, yi) in y.iter_mut().enumerate().take(self.n + 1).skip(1) {
            *yi += e0 + (e1 - e0) * (i as f64 * self.h);
        }
        y
    }

    fn jets(&self, w: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let y = self.full(w);
        let d1 = (0..self.n)
            .map(|i| (y[i + 2] - y[i]) / (2.0 * self.h))
            .collect();
        (y[1..=self.n].to_vec(), d1)
    }

    fn residual(&self, w: &[f64]) -> Result<(Vec<f64>, f64), BvpError> {
        let full = self.full(w);
        let (y, d1) = self.jets(w);
        let phi = self.problem.phi();
        let c2 = 1.0 / (self.h * self.h);
        let mut f = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let d2 = (full[i + 2] - 2.0 * full[i + 1] + full[i]) * c2;
            f.push(d2 - phi.eval(self.s(i), y[i], d1[i])?);
        }
        let f0 = self
            .ell
            .solve(&DVector::from_column_slice(&f))
            .map(|v| v.amax())
            .unwrap_or(f64::INFINITY);
        Ok((f, f0))
    }

    fn linearization(&self, w: &[f64]) -> Result<LinearizedBvp, BvpError> {
        let (y, d1) = self.jets(w);
        let phi = self.problem.phi();
        let mut p2 = Vec::with_capacity(self.n);
        let mut p3 = Vec::with_capacity(self.n);
        for i in 0..self.n {
            p2.push(phi.p2(self.s(i), y[i], d1[i])?);
            p3.push(phi.p3(self.s(i), y[i], d1[i])?);
        }
        LinearizedBvp::assemble(&p2, &p3, self.h)
    }
}

/// Damped Newton on the zero-boundary increment, from `init` (full values
/// including boundary nodes, whose boundary entries are ignored) or `η̄`.
pub fn newton_solve(
    problem: &BvProblem,
    init: Option<&GridFn1D>,
    opts: &BvpOptions,
) -> Result<BvpSolution, BvpError> {
    let n = problem.interior;
    let h = problem.h();
    let d2 = LinearizedBvp::constant(0.0, 0.0, n)?;
    let disc = Discrete {
        problem,
        n,
        h,
        ell: d2.matrix.clone().lu(),
    };
    let mut w = vec![0.0; n];
    if let Some(init) = init {
        if init.n() != n + 1 {
            return Err(GridError::Mismatch(format!(
                "initial guess has {} nodes, expected {}",
                init.n() + 1,
                n + 2
            ))
            .into());
        }
        let bar = disc.full(&w);
        for i in 0..n {
            w[i] = init.values()[i + 1] - bar[i + 1];
        }
    }
    let (mut f, mut f0) = disc.residual(&w)?;
    let mut residuals = vec![f0];
    let (mut steps, mut halvings) = (0, 0);
    while f0 > opts.tolerance {
        if steps == opts.max_steps {
            return Err(BvpError::NoConvergence {
                steps,
                residual: f0,
            });
        }
        let jac = disc.linearization(&w)?;
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = jac.solve_unchecked(&neg)?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = w.iter().zip(&delta).map(|(a, b)| a + lambda * b).collect();
            if let Ok((ft, f0t)) = disc.residual(&trial) {
                if f0t < f0 || f0t <= opts.tolerance {
                    accepted = Some((trial, ft, f0t));
                    break;
                }
            }
            lambda *= 0.5;
            halvings += 1;
        }
        let Some((wn, fnew, f0new)) = accepted else {
            return Err(BvpError::NoConvergence {
                steps,
                residual: f0,
            });
        };
        w = wn;
        f = fnew;
        f0 = f0new;
        residuals.push(f0);
        steps += 1;
    }
    let lin = disc.linearization(&w)?;
    let (regular, sigma_min, operator_norm) = lin.regularity(opts.singular_threshold);
    Ok(BvpSolution {
        y: GridFn1D::new(0.0, 1.0, disc.full(&w))?,
        report: BvpReport {
            residuals,
            steps,
            halvings,
            sigma_min,
            operator_norm,
            regular,
        },
        linearization: lin,
    })
}

/// Directional derivative of the solution map along
/// `(δη₀, δη₁, ψ)`: `u = δη̄ + v` where `J v = ψ + p₃(δη₁ − δη₀) + p₂ δη̄`.
pub fn variation(
    solution: &BvpSolution,
    d_eta: (f64, f64),
    d_phi: &Expression,
    threshold: f64,
) -> Result<GridFn1D, BvpError> {
    let psi = rebind(d_phi)?;
    let lin = &solution.linearization;
    let n = lin.dim();
    let h = lin.h;
    let y = solution.y.values();
    let (a, b) = d_eta;
    let mut rhs = Vec::with_capacity(n);
    let mut bar = Vec::with_capacity(n);
    for i in 0..n {
        let s = (i + 1) as f64 * h;
        let d1 = (y[i + 2] - y[i]) / (2.0 * h);
        let db = a + (b - a) * s;
        bar.push(db);
        rhs.push(eval_at(&psi, s, y[i + 1], d1)? + lin.p3[i] * (b - a) + lin.p2[i] * db);
    }
    let v = lin.solve(&rhs, threshold)?;
    let u: Vec<f64> = v.iter().zip(&bar).map(|(x, y)| x + y).collect();
    Ok(GridFn1D::new(0.0, 1.0, with_boundary(&u, a, b))?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub r: f64,
    pub sigma_min: f64,
}

/// Smallest singular value of `u″ − r u` on `interior` nodes for `steps`
/// equally spaced `r` in `[r_min, r_max]`. `map` evaluates the points and may
/// fan them out; it must preserve order.
pub fn resonance_scan_with<M>(
    r_min: f64,
    r_max: f64,
    steps: usize,
    interior: usize,
    map: M,
) -> Result<Vec<ScanPoint>, BvpError>
where
    M: FnOnce(&[f64], &(dyn Fn(f64) -> f64 + Sync)) -> Vec<f64>,
{
    if !(r_min <= r_max) || !r_min.is_finite() || !r_max.is_finite() {
        return Err(BvpError::Invalid(format!(
            "bad scan range [{r_min}, {r_max}]"
        )));
    }
    if interior < 2 {
        return Err(BvpError::Invalid("need at least 2 interior nodes".into()));
    }
    let rs: Vec<f64> = match steps {
        0 => Vec::new(),
        1 => vec![r_min],
        _ => (0..steps)
            .map(|i| r_min + (r_max - r_min) * i as f64 / (steps - 1) as f64)
            .collect(),
    };
    let eval = move |r: f64| {
        LinearizedBvp::constant(r, 0.0, interior)
            .map(|op| op.sigma_min())
            .unwrap_or(f64::NAN)
    };
    let sig = map(&rs, &eval);
    Ok(rs
        .into_iter()
        .zip(sig)
        .map(|(r, sigma_min)| ScanPoint { r, sigma_min })
        .collect())
}

/// Serial [`resonance_scan_with`].
pub fn resonance_scan(
    r_min: f64,
    r_max: f64,
    steps: usize,
    interior: usize,
) -> Result<Vec<ScanPoint>, BvpError> {
    resonance_scan_with(r_min, r_max, steps, interior, |rs, f| {
        rs.iter().map(|r| f(*r)).collect()
    })
}

/// Interior strict local minima of `sigma_min` along the scan.
pub fn local_minima(scan: &[ScanPoint]) -> Vec<ScanPoint> {
    scan.windows(3)
        .filter(|w| w[1].sigma_min < w[0].sigma_min && w[1].sigma_min <= w[2].sigma_min)
        .map(|w| w[1])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orthogonality {
    /// Relative least-squares residual of `J u = v″` with singular values
    /// at or below the threshold dropped.
    pub residual: f64,
    /// `∫₀¹ v sin(nπs)` by composite Simpson.
    pub integral: f64,
    pub solvable: bool,
}

/// Solvability of `u″ + n²π²u = v″` at the `n`-th resonance. `v` lives on
/// `[0, 1]` with zero boundary values; `v″` is its discrete second
/// difference.
pub fn range_orthogonality_check(
    n: u32,
    v: &GridFn1D,
    threshold: f64,
) -> Result<Orthogonality, BvpError> {
    if v.a() != 0.0 || v.b() != 1.0 || v.n() < 3 || n == 0 {
        return Err(BvpError::Invalid("need v on [0, 1] and n ≥ 1".into()));
    }
    let interior = v.n() - 1;
    let r = -((n as f64) * std::f64::consts::PI).powi(2);
    let op = LinearizedBvp::constant(r, 0.0, interior)?;
    let vals = v.values();
    let c2 = 1.0 / (v.h() * v.h());
    let b = DVector::from_fn(interior, |i, _| {
        (vals[i + 2] - 2.0 * vals[i + 1] + vals[i]) * c2
    });
    let svd = op.matrix.clone().svd(true, true);
    let cut = threshold * svd.singular_values.max();
    let u = svd
        .solve(&b, cut)
        .map_err(|e| BvpError::Invalid(e.to_string()))?;
    let r_vec = &op.matrix * &u - &b;
    let scale = b.norm();
    let residual = if scale == 0.0 {
        r_vec.norm()
    } else {
        r_vec.norm() / scale
    };
    let weighted: Vec<f64> = (0..=v.n())
        .map(|i| vals[i] * (n as f64 * std::f64::consts::PI * v.node(i)).sin())
        .collect();
    let integral = integrate(&weighted, v.h(), Quadrature::Simpson);
    Ok(Orthogonality {
        residual,
        integral,
        solvable: residual <= 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn green_operator_examples() {
        let zero = GridFn1D::constant(0.0, 1.0, 64, 0.0).unwrap();
        assert!(green_ell(&zero).unwrap().values().iter().all(|v| *v == 0.0));
        let two = GridFn1D::constant(0.0, 1.0, 64, 2.0).unwrap();
        let y = green_ell(&two).unwrap();
        for (i, v) in y.values().iter().enumerate() {
            let s = y.node(i);
            assert!((v - s * (s - 1.0)).abs() < 1e-14);
        }
        let z = GridFn1D::from_fn(0.0, 1.0, 33, |s| (3.0 * s).exp()).unwrap();
        let y = green_ell(&z).unwrap();
        assert_eq!((y.values()[0], y.values()[33]), (0.0, 0.0));
    }

    #[test]
    fn eta_bar_examples() {
        assert!(eta_bar(0.0, 0.0, 10)
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == 0.0));
        assert!(eta_bar(1.0, 1.0, 10)
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == 1.0));
        assert_eq!(eta_bar(0.0, 1.0, 10).unwrap().values()[5], 0.5);
    }

    #[test]
    fn newton_examples() {
        let opts = BvpOptions::default();
        let lin = newton_solve(&BvProblem::parse(0.0, 1.0, "0", 50).unwrap(), None, &opts).unwrap();
        for (i, v) in lin.y.values().iter().enumerate() {
            assert!((v - lin.y.node(i)).abs() < 1e-14);
        }
        let q = newton_solve(&BvProblem::parse(0.0, 0.0, "2", 200).unwrap(), None, &opts).unwrap();
        for (i, v) in q.y.values().iter().enumerate() {
            let s = q.y.node(i);
            assert!((v - s * (s - 1.0)).abs() <= 1e-8);
        }
        let res = newton_solve(
            &BvProblem::parse(0.0, 0.0, "-pi^2*xi1", 200).unwrap(),
            None,
            &opts,
        )
        .unwrap();
        assert!(res.y.sup_norm() == 0.0);
        assert!(!res.report.regular);
    }

    #[test]
    fn newton_is_locally_quadratic() {
        let p = BvProblem::parse(0.0, 1.0, "xi1^2 + xi2 + exp(s)", 100).unwrap();
        let sol = newton_solve(&p, None, &BvpOptions::default()).unwrap();
        assert!(sol.report.regular);
        assert!(sol.report.steps >= 3);
        assert!(sol.report.quadratic_constant().unwrap_or(0.0) < 1e3);
    }

    #[test]
    fn linearized_examples() {
        let g = |c: f64| GridFn1D::constant(0.0, 1.0, 201, c).unwrap();
        let u = linearized_bvp_solve(&g(0.0), &g(0.0), &g(2.0), 1e-8).unwrap();
        for (i, v) in u.values().iter().enumerate() {
            let s = u.node(i);
            assert!((v - s * (s - 1.0)).abs() < 1e-10);
        }
        let u = linearized_bvp_solve(&g(3.0), &g(1.0), &g(0.0), 1e-8).unwrap();
        assert!(u.sup_norm() == 0.0);
        assert!(matches!(
            linearized_bvp_solve(&g(-PI * PI), &g(0.0), &g(1.0), 1e-8),
            Err(BvpError::Singular { .. })
        ));
    }

    #[test]
    fn sigma_min_matches_svd() {
        for r in [-9.8, -3.0, 5.0, -40.0] {
            let op = LinearizedBvp::constant(r, 0.7, 40).unwrap();
            let svd = op.matrix.clone().svd(false, false);
            let exact_min = svd.singular_values.min();
            let exact_max = svd.singular_values.max();
            assert!((op.sigma_min() - exact_min).abs() < 1e-6 * exact_max, "{r}");
            assert!((op.norm() - exact_max).abs() < 1e-6 * exact_max);
        }
    }

    #[test]
    fn scan_examples() {
        let scan = resonance_scan(-100.0, 0.0, 400, 60).unwrap();
        let dips = local_minima(&scan);
        for n in 1..=3 {
            let target = -((n * n) as f64) * PI * PI;
            assert!(
                dips.iter().any(|d| (d.r - target).abs() < 0.5),
                "{n}: {dips:?}"
            );
        }
        assert!(local_minima(&resonance_scan(1.0, 10.0, 50, 60).unwrap()).is_empty());
        assert!(resonance_scan(0.0, 1.0, 0, 60).unwrap().is_empty());
    }

    #[test]
    fn orthogonality_examples() {
        let mode = |k: f64| GridFn1D::from_fn(0.0, 1.0, 201, |s| (k * PI * s).sin()).unwrap();
        let ok = range_orthogonality_check(1, &mode(2.0), 1e-8).unwrap();
        assert!(ok.solvable && ok.integral.abs() < 1e-8);
        let bad = range_orthogonality_check(1, &mode(1.0), 1e-8).unwrap();
        assert!(!bad.solvable && bad.residual > 1e-3);
        assert!((bad.integral - 0.5).abs() < 1e-6);
        let zero = GridFn1D::constant(0.0, 1.0, 201, 0.0).unwrap();
        assert!(range_orthogonality_check(1, &zero, 1e-8).unwrap().solvable);
    }

    #[test]
    fn boundary_variation_is_affine_for_zero_phi() {
        let p = BvProblem::parse(0.0, 1.0, "0", 40).unwrap();
        let sol = newton_solve(&p, None, &BvpOptions::default()).unwrap();
        let zero = Expression::constant(0.0, &VARS).unwrap();
        let u = variation(&sol, (1.0, -1.0), &zero, 1e-8).unwrap();
        for (i, v) in u.values().iter().enumerate() {
            assert!((v - (1.0 - 2.0 * u.node(i))).abs() < 1e-12);
        }
    }
}
