//! Semilinear transport `∂_t y + ∂_η y = φ(t, η, y)` on `[0, T] × S¹`.
//!
//! The equation is solved in integral form `y = ȳ₀ + 𝓘(0, φ∘[id, y])` where
//! `ȳ₀(t, η) = y₀(η − t)` and `𝓘` integrates along characteristics. The time
//! step equals the angular step, so characteristics run diagonally through
//! grid nodes. [`solve`] advances window by window with Picard iteration;
//! window lengths come from explicit contraction constants (see
//! [`constants`]).
//!
//! ```
//! use solmap_core::grid::GridFn1D;
//! use solmap_core::transport::{solve, PicardConfig, TransportProblem};
//!
//! let y0 = GridFn1D::constant(0.0, 1.0, 64, 0.5).unwrap();
//! let problem = TransportProblem::parse(y0, "xi^2", 0.5).unwrap();
//! let report = solve(&problem, &PicardConfig::default()).unwrap();
//! let y_end = report.solution.get(32, 0);
//! assert!((y_end - 2.0 / 3.0).abs() < 1e-3);
//! ```

mod characteristics;
mod constants;
mod cutoff;
mod linear;
mod picard;

use thiserror::Error;

use crate::expr::{EvalError, Expression, ParseError};
use crate::grid::{CylFn, GridError, GridFn1D, StencilOrder};
use crate::quad::Quadrature;

pub use characteristics::{aligned_steps, bar_y0, char_integral};
pub use constants::{constants, Constants};
pub use cutoff::{bump_mass, cutoff_chi};
pub use linear::{
    apriori_check, linearized_solve, linearized_solve_from, lipschitz_probe, residual,
    AprioriMargin, LinearOptions, LinearSolve, LipschitzProbe,
};
pub use picard::{picard_step, solve, solve_from, uniqueness_probe, PicardStep};

/// Variable names of a transport nonlinearity, in evaluation order.
pub const VARS: [&str; 3] = ["t", "eta", "xi"];

#[derive(Debug, Error)]
pub enum TransportError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid transport problem: {0}")]
    Invalid(String),
    #[error("time grid misaligned: T·N = {product} is not a positive integer")]
    Misaligned { product: f64 },
    #[error("evaluation failed at (t={t}, eta={eta}, xi={xi}): {source}")]
    Eval {
        t: f64,
        eta: f64,
        xi: f64,
        #[source]
        source: EvalError,
    },
    #[error("no convergence on the window starting at t={t0} after {iterations} iterations (last update {last_update:e})")]
    NoConvergence {
        t0: f64,
        iterations: usize,
        last_update: f64,
    },
    #[error("step length fell below one time cell at t={t_reached}; blow-up expected near t={blowup_estimate}")]
    StepStagnation {
        t_reached: f64,
        blowup_estimate: f64,
        partial: Option<Box<CylFn>>,
    },
}

impl TransportError {
    /// True for evaluation failures of the nonlinearity.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            TransportError::Eval { .. } | TransportError::Grid(GridError::Eval { .. })
        )
    }
}

pub(crate) fn eval3(e: &Expression, t: f64, eta: f64, xi: f64) -> Result<f64, TransportError> {
    e.eval(&[t, eta, xi])
        .map_err(|source| TransportError::Eval { t, eta, xi, source })
}

/// A nonlinearity together with the partials the solver needs.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    pub value: Expression,
    pub d_eta: Expression,
    pub d_xi: Expression,
    pub d_eta_xi: Expression,
    pub d_xi_xi: Expression,
}

impl Nonlinearity {
    /// Accepts any expression whose variables are among `t`, `eta`, `xi`.
    pub fn new(phi: &Expression) -> Result<Self, TransportError> {
        let value = canonical(phi)?;
        let d_eta = value.differentiate("eta")?;
        let d_xi = value.differentiate("xi")?;
        let d_eta_xi = d_xi.differentiate("eta")?;
        let d_xi_xi = d_xi.differentiate("xi")?;
        Ok(Nonlinearity {
            value,
            d_eta,
            d_xi,
            d_eta_xi,
            d_xi_xi,
        })
    }

    pub fn parse(text: &str) -> Result<Self, TransportError> {
        Nonlinearity::new(&Expression::parse(text, &VARS)?)
    }
}

/// Re-expresses `e` over exactly [`VARS`].
pub(crate) fn canonical(e: &Expression) -> Result<Expression, TransportError> {
    e.rebind(&VARS).map_err(|err| match err {
        ParseError::UndeclaredVariable { name, .. } => {
            TransportError::Invalid(format!("variable `{name}` is not one of t, eta, xi"))
        }
        other => other.into(),
    })
}

/// Initial data, nonlinearity and horizon.
#[derive(Debug, Clone)]
pub struct TransportProblem {
    y0: GridFn1D,
    phi: Nonlinearity,
    t_final: f64,
    nt: usize,
}

impl TransportProblem {
    /// `y0` lives on `[0, 1]` with `N + 1` nodes and must be periodic.
    pub fn new(y0: GridFn1D, phi: &Expression, t_final: f64) -> Result<Self, TransportError> {
        if y0.a() != 0.0 || (y0.b() - 1.0).abs() > 1e-12 {
            return Err(TransportError::Invalid(format!(
                "initial data must live on [0, 1], got [{}, {}]",
                y0.a(),
                y0.b()
            )));
        }
        if y0.n() < 7 {
            return Err(TransportError::Invalid(format!(
                "need at least 7 angular cells, got {}",
                y0.n()
            )));
        }
        let v = y0.values();
        let gap = (v[0] - v[y0.n()]).abs();
        if gap > 1e-9 * (1.0 + y0.sup_norm()) {
            return Err(TransportError::Invalid(format!(
                "initial data is not periodic: y0(0) and y0(1) differ by {gap:e}"
            )));
        }
        let nt = aligned_steps(t_final, y0.n())?;
        Ok(TransportProblem {
            y0,
            phi: Nonlinearity::new(phi)?,
            t_final,
            nt,
        })
    }

    pub fn parse(y0: GridFn1D, phi: &str, t_final: f64) -> Result<Self, TransportError> {
        TransportProblem::new(y0, &Expression::parse(phi, &VARS)?, t_final)
    }

    pub fn y0(&self) -> &GridFn1D {
        &self.y0
    }

    pub fn phi(&self) -> &Expression {
        &self.phi.value
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.phi
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn ntheta(&self) -> usize {
        self.y0.n()
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.nt as f64
    }

    pub fn with_y0(&self, y0: GridFn1D) -> Result<Self, TransportError> {
        TransportProblem::new(y0, &self.phi.value, self.t_final)
    }

    pub fn with_phi(&self, phi: &Expression) -> Result<Self, TransportError> {
        TransportProblem::new(self.y0.clone(), phi, self.t_final)
    }

    pub fn with_horizon(&self, t_final: f64) -> Result<Self, TransportError> {
        TransportProblem::new(self.y0.clone(), &self.phi.value, t_final)
    }
}

/// Half-width of the sampled ξ range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiWindow {
    /// Chosen per window from the a-priori bound of the window.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// Active when `∂_ξ φ` grows beyond the sampled window.
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPolicy {
    /// Window length from the contraction constants.
    Contraction,
    /// A fixed number of equal windows over `[0, T]`.
    FixedSteps(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub xi_window: XiWindow,
    pub cutoff: Cutoff,
    pub step_policy: StepPolicy,
    /// Inflation applied to sampled suprema.
    pub safety: f64,
    /// Number of ξ samples (made odd so that 0 is included).
    pub xi_samples: usize,
    pub quadrature: Quadrature,
    pub stencil: StencilOrder,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            tolerance: 1e-12,
            max_iterations: 200,
            xi_window: XiWindow::Auto,
            cutoff: Cutoff::Auto,
            step_policy: StepPolicy::Contraction,
            safety: 1.25,
            xi_samples: 9,
            quadrature: Quadrature::Trapezoid,
            stencil: StencilOrder::Fourth,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<(), TransportError> {
        let bad = |msg: &str| Err(TransportError::Invalid(msg.to_string()));
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if let XiWindow::Fixed(x) = self.xi_window {
            if !(x > 0.0 && x.is_finite()) {
                return bad("xi window must be positive");
            }
        }
        if let StepPolicy::FixedSteps(0) = self.step_policy {
            return bad("fixed step count must be positive");
        }
        if !(self.safety >= 1.0) {
            return bad("safety factor must be at least 1");
        }
        if self.xi_samples < 3 {
            return bad("need at least 3 xi samples");
        }
        Ok(())
    }
}

/// Diagnostics of one Picard window `[t0, t2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t0: f64,
    pub t2: f64,
    pub cells: usize,
    pub constants: Constants,
    pub iterations: usize,
    pub ratios: Vec<f64>,
    pub cutoff_active: bool,
    /// Largest `|z|` over all iterates of the window.
    pub iterate_sup: f64,
}

impl StepRecord {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: CylFn,
    pub steps: Vec<StepRecord>,
    pub residual: f64,
    /// The linearized equation at the solution was solved.
    pub regular: bool,
}

impl SolveReport {
    pub fn max_alpha(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.constants.alpha)
            .fold(0.0, f64::max)
    }

    pub fn max_ratio(&self) -> f64 {
        self.steps
            .iter()
            .map(StepRecord::max_ratio)
            .fold(0.0, f64::max)
    }

    pub fn total_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.iterations).sum()
    }

    /// Every iterate stayed inside its window's ξ range.
    pub fn iterates_in_window(&self) -> bool {
        self.steps
            .iter()
            .all(|s| s.iterate_sup <= s.constants.xi_window)
    }
}
