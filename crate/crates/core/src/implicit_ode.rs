//! Implicit initial value problem `φ(s, y(s), y′(s)) = 0`, `y(0) = η` on
//! `[0, 1]`.
//!
//! The slope is resolved pointwise by Newton's method and the resulting
//! explicit equation `y′ = ψ(s, y)` is stepped with classical RK4. The pair
//! is regular when `p₃ = ∂_{xi2}φ ∘ [id; y, y′]` has no zero, and then the
//! linearized problem `p₃ u′ + p₂ u = g` is solved by an integrating factor.
//!
//! ```
//! use solmap_core::implicit_ode::{integrate, ImplicitIvp, IvpOptions};
//!
//! let ivp = ImplicitIvp::parse(1.0, "xi2 - xi1", 100).unwrap();
//! let sol = integrate(&ivp, &IvpOptions::default()).unwrap();
//! assert!((sol.y.values()[100] - 1f64.exp()).abs() < 1e-8);
//! assert!(sol.trace.regular);
//! ```

use thiserror::Error;

use crate::expr::{Expression, ParseError};
use crate::grid::{GridError, GridFn1D};
use crate::jet::{eval_at, rebind, JetError, JetEvalError, JetPhi};
use crate::quad::{cumulative, Quadrature};

pub use crate::jet::VARS;

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX: usize = 60;
const NUDGES: usize = 8;

#[derive(Debug, Error)]
pub enum IvpError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid implicit problem: {0}")]
    Invalid(String),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Eval(#[from] JetEvalError),
    #[error("∂φ/∂xi2 vanishes at (s={s}, y={y}, w={w}); the slope cannot be resolved")]
    SingularSlope { s: f64, y: f64, w: f64 },
    #[error("Newton found no slope at (s={s}, y={y}) after {iterations} iterations (|φ| = {residual:e})")]
    NoRoot {
        s: f64,
        y: f64,
        iterations: usize,
        residual: f64,
    },
    #[error("slope resolution failed after s={last_good_s}: {source}")]
    Trajectory {
        last_good_s: f64,
        #[source]
        source: Box<IvpError>,
    },
    #[error("linearization is singular: min |p3| = {min_abs_p3:e} at s={at}")]
    Irregular { min_abs_p3: f64, at: f64 },
}

impl IvpError {
    pub fn is_domain(&self) -> bool {
        match self {
            IvpError::Eval(_) => true,
            IvpError::Trajectory { source, .. } => source.is_domain(),
            _ => false,
        }
    }

    /// The failure is a vanishing `∂φ/∂xi2`, directly or along the trajectory.
    pub fn is_singular(&self) -> bool {
        match self {
            IvpError::SingularSlope { .. } | IvpError::Irregular { .. } => true,
            IvpError::Trajectory { source, .. } => source.is_singular(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImplicitIvp {
    eta: f64,
    phi: JetPhi,
    steps: usize,
}

impl ImplicitIvp {
    pub fn new(eta: f64, phi: &Expression, steps: usize) -> Result<Self, IvpError> {
        if steps < 8 {
            return Err(IvpError::Invalid(format!(
                "need at least 8 steps, got {steps}"
            )));
        }
        if !eta.is_finite() {
            return Err(IvpError::Invalid("initial value must be finite".into()));
        }
        Ok(ImplicitIvp {
            eta,
            phi: JetPhi::new(phi)?,
            steps,
        })
    }

    pub fn parse(eta: f64, phi: &str, steps: usize) -> Result<Self, IvpError> {
        ImplicitIvp::new(eta, &Expression::parse(phi, &VARS)?, steps)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn phi(&self) -> &JetPhi {
        &self.phi
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self, IvpError> {
        ImplicitIvp::new(eta, &self.phi.value, self.steps)
    }

    pub fn with_phi(&self, phi: &Expression) -> Result<Self, IvpError> {
        ImplicitIvp::new(self.eta, phi, self.steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions {
    /// Newton start for the slope at `s = 0`.
    pub slope_guess: f64,
    /// `min |p₃|` at or below which the pair is flagged irregular.
    pub regularity_threshold: f64,
}

impl Default for IvpOptions {
    fn default() -> Self {
        IvpOptions {
            slope_guess: 0.0,
            regularity_threshold: 1e-8,
        }
    }
}

/// Solves `φ(s, y, w) = 0` for `w` by Newton's method from `guess`, with
/// backtracking. A start where `∂φ/∂w` vanishes is nudged a few times before
/// giving up.
pub fn resolve_slope(phi: &JetPhi, s: f64, y: f64, guess: f64) -> Result<f64, IvpError> {
    let mut w = guess;
    let mut f = phi.eval(s, y, w)?;
    let mut nudges = 0;
    for _ in 0..NEWTON_MAX {
        if f.abs() <= NEWTON_TOL {
            return Ok(w);
        }
        let d = phi.p3(s, y, w)?;
        if d.abs() <= 1e-14 * (1.0 + f.abs()) || !d.is_finite() {
            if nudges == NUDGES {
                return Err(IvpError::SingularSlope { s, y, w });
            }
            let sign = if nudges % 2 == 0 { 1.0 } else { -1.0 };
            w = guess + sign * 1e-3 * (1.0 + guess.abs()) * (1 + nudges / 2) as f64;
            f = phi.eval(s, y, w)?;
            nudges += 1;
            continue;
        }
        let step = f / d;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = w - lambda * step;
            if let Ok(ft) = phi.eval(s, y, trial) {
                if ft.abs() < f.abs() {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((wn, fn_)) => {
                w = wn;
                f = fn_;
            }
            None => break,
        }
    }
    if f.abs() <= NEWTON_TOL {
        return Ok(w);
    }
    Err(IvpError::NoRoot {
        s,
        y,
        iterations: NEWTON_MAX,
        residual: f.abs(),
    })
}

/// `p₂`, `p₃` at the nodes of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityTrace {
    pub p2: GridFn1D,
    pub p3: GridFn1D,
    pub min_abs_p3: f64,
    /// Node where `min |p₃|` is attained.
    pub argmin: f64,
    pub regular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IvpSolution {
    pub y: GridFn1D,
    pub slope: GridFn1D,
    pub trace: RegularityTrace,
    /// `max |φ(s, y, y′)|` over the nodes.
    pub residual: f64,
}

/// RK4 on `y′ = ψ(s, y)` with `ψ` resolved by [`resolve_slope`], each stage
/// warm-started from the previous one.
pub fn integrate(problem: &ImplicitIvp, opts: &IvpOptions) -> Result<IvpSolution, IvpError> {
    let n = problem.steps;
    let h = 1.0 / n as f64;
    let phi = &problem.phi;
    let mut y = vec![0.0; n + 1];
    let mut w = vec![0.0; n + 1];
    y[0] = problem.eta;
    let fail = |last_good_s: f64| {
        move |e: IvpError| IvpError::Trajectory {
            last_good_s,
            source: Box::new(e),
        }
    };
    w[0] = resolve_slope(phi, 0.0, y[0], opts.slope_guess).map_err(fail(0.0))?;
    for i in 0..n {
        let s = i as f64 * h;
        let psi = |at: f64, y: f64, guess: f64| resolve_slope(phi, at, y, guess).map_err(fail(s));
        let k1 = w[i];
        let k2 = psi(s + 0.5 * h, y[i] + 0.5 * h * k1, k1)?;
        let k3 = psi(s + 0.5 * h, y[i] + 0.5 * h * k2, k2)?;
        let k4 = psi(s + h, y[i] + h * k3, k3)?;
        y[i + 1] = y[i] + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        w[i + 1] = psi((i + 1) as f64 * h, y[i + 1], k4)?;
    }
    let mut p2 = vec![0.0; n + 1];
    let mut p3 = vec![0.0; n + 1];
    let mut residual = 0.0_f64;
    for i in 0..=n {
        let s = i as f64 * h;
        p2[i] = phi.p2(s, y[i], w[i])?;
        p3[i] = phi.p3(s, y[i], w[i])?;
        residual = residual.max(phi.eval(s, y[i], w[i])?.abs());
    }
    let (imin, min_abs_p3) =
        p3.iter()
            .map(|v| v.abs())
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
            );
    Ok(IvpSolution {
        y: GridFn1D::new(0.0, 1.0, y)?,
        slope: GridFn1D::new(0.0, 1.0, w)?,
        trace: RegularityTrace {
            p2: GridFn1D::new(0.0, 1.0, p2)?,
            p3: GridFn1D::new(0.0, 1.0, p3)?,
            min_abs_p3,
            argmin: imin as f64 * h,
            regular: min_abs_p3 > opts.regularity_threshold,
        },
        residual,
    })
}

/// Solves `p₃ u′ + p₂ u = g`, `u(0) = u0` as
/// `u = e^{−A}(u0 + ∫₀ e^{A} g / p₃)` with `A = ∫₀ p₂ / p₃`, both integrals
/// by composite Simpson.
pub fn variational_solve(
    trace: &RegularityTrace,
    u0: f64,
    g: &GridFn1D,
) -> Result<GridFn1D, IvpError> {
    if !trace.regular {
        return Err(IvpError::Irregular {
            min_abs_p3: trace.min_abs_p3,
            at: trace.argmin,
        });
    }
    if !g.same_grid(&trace.p3) {
        return Err(GridError::Mismatch("right-hand side and trace grids differ".into()).into());
    }
    let h = g.h();
    let (p2, p3) = (trace.p2.values(), trace.p3.values());
    let ratio: Vec<f64> = p2.iter().zip(p3).map(|(a, b)| a / b).collect();
    let big_a = cumulative(&ratio, h, Quadrature::Simpson);
    let weighted: Vec<f64> = g
        .values()
        .iter()
        .zip(p3)
        .zip(&big_a)
        .map(|((gi, pi), ai)| ai.exp() * gi / pi)
        .collect();
    let inner = cumulative(&weighted, h, Quadrature::Simpson);
    let u = big_a
        .iter()
        .zip(&inner)
        .map(|(ai, ii)| (-ai).exp() * (u0 + ii))
        .collect();
    Ok(GridFn1D::new(g.a(), g.b(), u)?)
}

/// Directional derivative of the solution map along `(d_eta, d_phi)`: the
/// linearized problem with `u(0) = d_eta` and `g = −d_phi ∘ [id; y, y′]`.
pub fn variation(
    solution: &IvpSolution,
    d_eta: f64,
    d_phi: &Expression,
) -> Result<GridFn1D, IvpError> {
    let psi = rebind(d_phi)?;
    let (y, w) = (solution.y.values(), solution.slope.values());
    let mut g = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        let s = solution.y.node(i);
        g.push(-eval_at(&psi, s, y[i], w[i])?);
    }
    variational_solve(&solution.trace, d_eta, &GridFn1D::new(0.0, 1.0, g)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub parameter: f64,
    /// `None` when the trajectory could not be computed.
    pub min_abs_p3: Option<f64>,
    pub regular: bool,
    pub error: Option<String>,
}

/// `min |p₃|` for each value of the parameter `c` in `family`, which is an
/// expression over `s, t, xi1, xi2, c`.
pub fn regularity_scan(
    family: &Expression,
    parameters: &[f64],
    eta: f64,
    steps: usize,
    opts: &IvpOptions,
) -> Result<Vec<ScanEntry>, IvpError> {
    if family.var_index("c").is_none() && !parameters.is_empty() {
        return Err(IvpError::Invalid(
            "family must declare the parameter `c`".into(),
        ));
    }
    Ok(parameters
        .iter()
        .map(|&c| {
            let run = family
                .substitute("c", c)
                .map_err(IvpError::from)
                .and_then(|phi| ImplicitIvp::new(eta, &phi, steps))
                .and_then(|p| integrate(&p, opts));
            match run {
                Ok(sol) => ScanEntry {
                    parameter: c,
                    min_abs_p3: Some(sol.trace.min_abs_p3),
                    regular: sol.trace.regular,
                    error: None,
                },
                Err(e) => ScanEntry {
                    parameter: c,
                    min_abs_p3: None,
                    regular: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(text: &str) -> JetPhi {
        JetPhi::parse(text).unwrap()
    }

    #[test]
    fn affine_slopes() {
        assert_eq!(resolve_slope(&phi("xi2 - t"), 0.5, 7.0, 0.0).unwrap(), 0.5);
        assert_eq!(
            resolve_slope(&phi("xi2 - xi1"), 0.3, 2.0, 0.0).unwrap(),
            2.0
        );
    }

    #[test]
    fn cubic_slope_matches_bisection() {
        let f = |w: f64| w * w * w + w - 1.0;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let w = resolve_slope(&phi("xi2^3 + xi2 - 1"), 0.0, 0.0, 0.0).unwrap();
        assert!((w - lo).abs() < 1e-12);
        assert!((w - 0.6823278).abs() < 1e-7);
    }

    #[test]
    fn singular_slope_reported() {
        let e = resolve_slope(&phi("xi2^2 + 1"), 0.0, 0.0, 0.0).unwrap_err();
        assert!(matches!(
            e,
            IvpError::NoRoot { .. } | IvpError::SingularSlope { .. }
        ));
    }

    #[test]
    fn closed_form_trajectories() {
        let opts = IvpOptions::default();
        let sq = integrate(&ImplicitIvp::parse(0.0, "xi2 - t", 100).unwrap(), &opts).unwrap();
        for (i, v) in sq.y.values().iter().enumerate() {
            let s = sq.y.node(i);
            assert!((v - 0.5 * s * s).abs() <= 1e-10);
        }
        let ex = integrate(&ImplicitIvp::parse(1.0, "xi2 - xi1", 100).unwrap(), &opts).unwrap();
        for (i, v) in ex.y.values().iter().enumerate() {
            assert!((v - ex.y.node(i).exp()).abs() <= 1e-8);
        }
        let flat = integrate(&ImplicitIvp::parse(3.0, "xi2", 50).unwrap(), &opts).unwrap();
        assert!(flat.y.values().iter().all(|v| *v == 3.0));
        assert!(ex.residual <= 1e-10 && sq.residual <= 1e-10);
    }

    #[test]
    fn vanishing_p3_flags_irregular() {
        let p = ImplicitIvp::parse(0.0, "xi2^2 - t", 100).unwrap();
        match integrate(&p, &IvpOptions::default()) {
            Ok(sol) => {
                assert!(!sol.trace.regular);
                assert_eq!(sol.trace.argmin, 0.0);
            }
            Err(e) => assert!(e.is_singular(), "{e}"),
        }
    }

    fn trace(p2: f64, p3: f64) -> RegularityTrace {
        RegularityTrace {
            p2: GridFn1D::constant(0.0, 1.0, 100, p2).unwrap(),
            p3: GridFn1D::constant(0.0, 1.0, 100, p3).unwrap(),
            min_abs_p3: p3.abs(),
            argmin: 0.0,
            regular: true,
        }
    }

    #[test]
    fn integrating_factor_examples() {
        let one = GridFn1D::constant(0.0, 1.0, 100, 1.0).unwrap();
        let zero = GridFn1D::constant(0.0, 1.0, 100, 0.0).unwrap();
        let u = variational_solve(&trace(0.0, 1.0), 0.0, &one).unwrap();
        for (i, v) in u.values().iter().enumerate() {
            assert!((v - u.node(i)).abs() < 1e-14);
        }
        let u = variational_solve(&trace(1.0, 1.0), 1.0, &zero).unwrap();
        for (i, v) in u.values().iter().enumerate() {
            assert!((v - (-u.node(i)).exp()).abs() <= 1e-8);
        }
        let u = variational_solve(&trace(3.0, -2.0), 0.0, &zero).unwrap();
        assert!(u.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn variation_in_initial_value() {
        // y = η e^s, so ∂y/∂η = e^s
        let p = ImplicitIvp::parse(1.0, "xi2 - xi1", 200).unwrap();
        let sol = integrate(&p, &IvpOptions::default()).unwrap();
        let zero = Expression::constant(0.0, &VARS).unwrap();
        let u = variation(&sol, 1.0, &zero).unwrap();
        for (i, v) in u.values().iter().enumerate() {
            assert!((v - u.node(i).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn scan_examples() {
        let fam = Expression::parse("xi2 - c", &["s", "t", "xi1", "xi2", "c"]).unwrap();
        let opts = IvpOptions::default();
        let table = regularity_scan(&fam, &[-1.0, 0.0, 2.5], 0.0, 20, &opts).unwrap();
        assert!(table.iter().all(|e| e.regular && e.min_abs_p3 == Some(1.0)));
        assert!(regularity_scan(&fam, &[], 0.0, 20, &opts)
            .unwrap()
            .is_empty());
        let fam = Expression::parse("xi2^2 - t - c", &["s", "t", "xi1", "xi2", "c"]).unwrap();
        let table = regularity_scan(&fam, &[0.0], 0.0, 20, &opts).unwrap();
        assert!(!table[0].regular);
    }
}
