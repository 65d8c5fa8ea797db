//! Finite-difference derivatives of solution maps against their variational
//! equations.
//!
//! A solution map is handled as a function of one or two scalar step sizes
//! along fixed directions, so the same central and mixed stencils serve
//! every solver. Corner solves of a stencil run concurrently.

use thiserror::Error;

use crate::bvp::{self, BvProblem, BvpError, BvpOptions};
use crate::expr::{Expression, ParseError};
use crate::grid::{max_abs_diff, sup, CylFn, GridError, GridFn1D};
use crate::implicit_ode::{self, ImplicitIvp, IvpError, IvpOptions};
use crate::transport::{
    bar_y0, char_integral, linearized_solve, solve, LinearOptions, PicardConfig, TransportError,
    TransportProblem,
};

/// Floor of the reference norm in relative errors.
pub const NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SensitivityError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Ivp(#[from] IvpError),
    #[error(transparent)]
    Bvp(#[from] BvpError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("compared fields differ in length ({0} vs {1})")]
    Mismatch(usize, usize),
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub abs_error: f64,
    pub reference_norm: f64,
    /// `abs_error / max(reference_norm, NORM_FLOOR)`.
    pub relative: f64,
}

impl Comparison {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.relative <= tolerance
    }
}

pub fn compare(fd: &[f64], variational: &[f64]) -> Result<Comparison, SensitivityError> {
    if fd.len() != variational.len() {
        return Err(SensitivityError::Mismatch(fd.len(), variational.len()));
    }
    let abs_error = max_abs_diff(fd, variational);
    let reference_norm = sup(variational);
    Ok(Comparison {
        abs_error,
        reference_norm,
        relative: abs_error / reference_norm.max(NORM_FLOOR),
    })
}

fn check_step(eps: f64) -> Result<(), SensitivityError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(SensitivityError::BadStep(eps))
    }
}

/// `(f(ε) − f(−ε)) / 2ε`.
pub fn central_difference<F>(f: F, eps: f64) -> Result<Vec<f64>, SensitivityError>
where
    F: Fn(f64) -> Result<Vec<f64>, SensitivityError> + Sync,
{
    check_step(eps)?;
    let (plus, minus) = rayon::join(|| f(eps), || f(-eps));
    let (plus, minus) = (plus?, minus?);
    if plus.len() != minus.len() {
        return Err(SensitivityError::Mismatch(plus.len(), minus.len()));
    }
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| (p - m) / (2.0 * eps))
        .collect())
}

/// `((f(ε,ε) + f(−ε,−ε)) − (f(ε,−ε) + f(−ε,ε))) / 4ε²`. Swapping the two
/// arguments of `f` swaps the two inner corners only, so the result is
/// unchanged bit for bit when `f` is symmetric.
pub fn mixed_difference<F>(f: F, eps: f64) -> Result<Vec<f64>, SensitivityError>
where
    F: Fn(f64, f64) -> Result<Vec<f64>, SensitivityError> + Sync,
{
    check_step(eps)?;
    let ((pp, mm), (pm, mp)) = rayon::join(
        || rayon::join(|| f(eps, eps), || f(-eps, -eps)),
        || rayon::join(|| f(eps, -eps), || f(-eps, eps)),
    );
    let (pp, mm, pm, mp) = (pp?, mm?, pm?, mp?);
    let n = pp.len();
    if [mm.len(), pm.len(), mp.len()].iter().any(|l| *l != n) {
        return Err(SensitivityError::Mismatch(n, mm.len()));
    }
    let d = 4.0 * eps * eps;
    Ok((0..n)
        .map(|i| ((pp[i] + mm[i]) - (pm[i] + mp[i])) / d)
        .collect())
}

/// First-derivative check at one step size, with an ε-order estimate from
/// the errors at `ε` and `ε/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivReport {
    pub fd: Vec<f64>,
    pub variational: Vec<f64>,
    pub eps: f64,
    pub comparison: Comparison,
    /// `log₂(e(ε) / e(ε/2))`; `None` when `e(ε/2)` vanishes.
    pub order: Option<f64>,
}

/// Compares the central difference of `f` with `variational` at `ε` and
/// `ε/2`.
pub fn derivative_check<F>(
    f: F,
    variational: Vec<f64>,
    eps: f64,
) -> Result<DerivReport, SensitivityError>
where
    F: Fn(f64) -> Result<Vec<f64>, SensitivityError> + Sync,
{
    let (fd, half) = rayon::join(
        || central_difference(&f, eps),
        || central_difference(&f, 0.5 * eps),
    );
    let (fd, half) = (fd?, half?);
    let comparison = compare(&fd, &variational)?;
    let e_half = compare(&half, &variational)?.abs_error;
    let order = (e_half > 0.0).then(|| (comparison.abs_error / e_half).log2());
    Ok(DerivReport {
        fd,
        variational,
        eps,
        comparison,
        order,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondVariation {
    pub mixed: Vec<f64>,
    /// The stencil with the directions exchanged equals `mixed` exactly.
    pub swap_symmetric: bool,
    /// The second variation from the linearized equation, when available.
    pub analytic: Option<Vec<f64>>,
    pub comparison: Option<Comparison>,
    pub eps: f64,
}

/// A perturbation `(δ data, δφ)`.
#[derive(Debug, Clone)]
pub struct Direction<D> {
    pub data: D,
    pub phi: Expression,
}

pub type TransportDirection = Direction<GridFn1D>;
pub type IvpDirection = Direction<f64>;
pub type BvpDirection = Direction<(f64, f64)>;

impl TransportDirection {
    /// Zero data perturbation on the grid of `problem`.
    pub fn phi_only(problem: &TransportProblem, phi: &str) -> Result<Self, SensitivityError> {
        let n = problem.ntheta();
        Ok(Direction {
            data: GridFn1D::constant(0.0, 1.0, n, 0.0)?,
            phi: Expression::parse(phi, &crate::transport::VARS)?,
        })
    }

    pub fn data_only(d_y0: GridFn1D) -> Result<Self, SensitivityError> {
        Ok(Direction {
            data: d_y0,
            phi: Expression::constant(0.0, &crate::transport::VARS)?,
        })
    }

    pub fn parse(d_y0: GridFn1D, phi: &str) -> Result<Self, SensitivityError> {
        Ok(Direction {
            data: d_y0,
            phi: Expression::parse(phi, &crate::transport::VARS)?,
        })
    }
}

/// `problem` moved to `x + s₁h₁ (+ s₂h₂)`.
pub fn transport_at(
    problem: &TransportProblem,
    first: (&TransportDirection, f64),
    second: Option<(&TransportDirection, f64)>,
) -> Result<TransportProblem, SensitivityError> {
    let (h1, s1) = first;
    let (data, phi) = match second {
        None => (
            problem.y0().add(&h1.data.scale(s1)?)?,
            problem
                .phi()
                .perturbed(&h1.phi.rebind(&crate::transport::VARS)?, s1)?,
        ),
        Some((h2, s2)) => {
            let step = h1.data.scale(s1)?.add(&h2.data.scale(s2)?)?;
            let phi = problem.phi().perturbed2(
                &h1.phi.rebind(&crate::transport::VARS)?,
                s1,
                &h2.phi.rebind(&crate::transport::VARS)?,
                s2,
            )?;
            (problem.y0().add(&step)?, phi)
        }
    };
    Ok(TransportProblem::new(data, &phi, problem.t_final())?)
}

/// `δy = bar(δy₀) + 𝓘(0, ψ∘[id, y]) + 𝓘(0, a·δy)` with `a = ∂_ξφ∘[id, y]`.
pub fn variational_transport(
    problem: &TransportProblem,
    y: &CylFn,
    h: &TransportDirection,
    cfg: &PicardConfig,
) -> Result<CylFn, SensitivityError> {
    let a = y.compose(&problem.nonlinearity().d_xi)?;
    let psi = y.compose(&h.phi.rebind(&crate::transport::VARS)?)?;
    let v = bar_y0(&h.data, problem.t_final())?.add(&char_integral(0, &psi, cfg.quadrature)?)?;
    let opts = LinearOptions {
        quadrature: cfg.quadrature,
        ..LinearOptions::default()
    };
    Ok(linearized_solve(&a, &v, &opts)?.u)
}

/// FD versus variational derivative of the transport solution map.
pub fn transport_check(
    problem: &TransportProblem,
    cfg: &PicardConfig,
    h: &TransportDirection,
    eps: f64,
) -> Result<DerivReport, SensitivityError> {
    let base = solve(problem, cfg)?;
    let var = variational_transport(problem, &base.solution, h, cfg)?;
    derivative_check(
        |s| {
            Ok(solve(&transport_at(problem, (h, s), None)?, cfg)?
                .solution
                .into_values())
        },
        var.into_values(),
        eps,
    )
}

/// Mixed second difference of the transport map along `h1`, `h2`, with the
/// analytic second variation
/// `w = 𝓘(0, ∂_ξ²φ u₁u₂ + ∂_ξψ₁ u₂ + ∂_ξψ₂ u₁) + 𝓘(0, a·w)`.
pub fn transport_second_variation(
    problem: &TransportProblem,
    cfg: &PicardConfig,
    h1: &TransportDirection,
    h2: &TransportDirection,
    eps: f64,
) -> Result<SecondVariation, SensitivityError> {
    let corner = |a: &TransportDirection, b: &TransportDirection, s1: f64, s2: f64| {
        let p = transport_at(problem, (a, s1), Some((b, s2)))?;
        Ok(solve(&p, cfg)?.solution.into_values())
    };
    let (mixed, swapped) = rayon::join(
        || mixed_difference(|s1, s2| corner(h1, h2, s1, s2), eps),
        || mixed_difference(|s1, s2| corner(h2, h1, s1, s2), eps),
    );
    let (mixed, swapped) = (mixed?, swapped?);
    let swap_symmetric = mixed
        .iter()
        .zip(&swapped)
        .all(|(a, b)| a.to_bits() == b.to_bits());

    let y = solve(problem, cfg)?.solution;
    let u1 = variational_transport(problem, &y, h1, cfg)?;
    let u2 = variational_transport(problem, &y, h2, cfg)?;
    let phi = problem.nonlinearity();
    let vars = &crate::transport::VARS;
    let dpsi1 = y.compose(&h1.phi.rebind(vars)?.differentiate("xi")?)?;
    let dpsi2 = y.compose(&h2.phi.rebind(vars)?.differentiate("xi")?)?;
    let source = y
        .compose(&phi.d_xi_xi)?
        .mul(&u1)?
        .mul(&u2)?
        .add(&dpsi1.mul(&u2)?)?
        .add(&dpsi2.mul(&u1)?)?;
    let a = y.compose(&phi.d_xi)?;
    let v = char_integral(0, &source, cfg.quadrature)?;
    let opts = LinearOptions {
        quadrature: cfg.quadrature,
        ..LinearOptions::default()
    };
    let w = linearized_solve(&a, &v, &opts)?.u.into_values();
    let comparison = compare(&mixed, &w)?;
    Ok(SecondVariation {
        mixed,
        swap_symmetric,
        analytic: Some(w),
        comparison: Some(comparison),
        eps,
    })
}

fn ivp_at(
    problem: &ImplicitIvp,
    h: &IvpDirection,
    s: f64,
) -> Result<ImplicitIvp, SensitivityError> {
    let psi = crate::jet::rebind(&h.phi).map_err(IvpError::from)?;
    let phi = problem.phi().value.perturbed(&psi, s)?;
    Ok(ImplicitIvp::new(
        problem.eta() + s * h.data,
        &phi,
        problem.steps(),
    )?)
}

/// FD versus integrating-factor derivative of the implicit IVP map.
pub fn ivp_check(
    problem: &ImplicitIvp,
    opts: &IvpOptions,
    h: &IvpDirection,
    eps: f64,
) -> Result<DerivReport, SensitivityError> {
    let base = implicit_ode::integrate(problem, opts)?;
    let var = implicit_ode::variation(&base, h.data, &h.phi)?;
    derivative_check(
        |s| {
            Ok(implicit_ode::integrate(&ivp_at(problem, h, s)?, opts)?
                .y
                .into_values())
        },
        var.into_values(),
        eps,
    )
}

fn bvp_at(problem: &BvProblem, h: &BvpDirection, s: f64) -> Result<BvProblem, SensitivityError> {
    let psi = crate::jet::rebind(&h.phi).map_err(BvpError::from)?;
    let phi = problem.phi().value.perturbed(&psi, s)?;
    let (e0, e1) = problem.eta();
    Ok(BvProblem::new(
        e0 + s * h.data.0,
        e1 + s * h.data.1,
        &phi,
        problem.interior(),
    )?)
}

/// FD versus linear-system derivative of the boundary value map. Perturbed
/// solves start from the base solution.
pub fn bvp_check(
    problem: &BvProblem,
    opts: &BvpOptions,
    h: &BvpDirection,
    eps: f64,
) -> Result<DerivReport, SensitivityError> {
    let base = bvp::newton_solve(problem, None, opts)?;
    let var = bvp::variation(&base, h.data, &h.phi, opts.singular_threshold)?;
    derivative_check(
        |s| {
            let p = bvp_at(problem, h, s)?;
            Ok(bvp::newton_solve(&p, Some(&base.y), opts)?.y.into_values())
        },
        var.into_values(),
        eps,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn compare_examples() {
        let a = vec![1.0, -0.5, 0.25];
        assert_eq!(compare(&a, &a).unwrap().relative, 0.0);
        let z = vec![0.0; 4];
        let c = compare(&z, &z).unwrap();
        assert_eq!((c.relative, c.reference_norm), (0.0, 0.0));
        let v = vec![1.0, 0.0, -0.3];
        let f: Vec<f64> = v.iter().map(|x| x + 1e-4).collect();
        assert!((compare(&f, &v).unwrap().relative - 1e-4).abs() < 1e-15);
        assert!(matches!(
            compare(&z, &a),
            Err(SensitivityError::Mismatch(4, 3))
        ));
    }

    #[test]
    fn stencils_on_polynomials() {
        let cubic = |s: f64| Ok(vec![s * s * s + 2.0 * s, 5.0]);
        let d = central_difference(cubic, 0.1).unwrap();
        assert!((d[0] - (2.0 + 0.01)).abs() < 1e-12 && d[1] == 0.0);
        let m = mixed_difference(|a, b| Ok(vec![a * b + a * a]), 0.1).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-12);
        assert!(central_difference(cubic, 0.0).is_err());
    }

    fn half(n: usize) -> GridFn1D {
        GridFn1D::constant(0.0, 1.0, n, 0.5).unwrap()
    }

    #[test]
    fn transport_examples() {
        let cfg = PicardConfig::default();
        let zero = TransportProblem::parse(half(32), "0", 0.5).unwrap();
        let y = solve(&zero, &cfg).unwrap().solution;
        let h = TransportDirection::phi_only(&zero, "1").unwrap();
        let u = variational_transport(&zero, &y, &h, &cfg).unwrap();
        let t = CylFn::from_fn(0.5, 16, 32, |t, _| t).unwrap();
        assert!(u.max_abs_diff(&t).unwrap() < 1e-14);
        let none = TransportDirection::phi_only(&zero, "0").unwrap();
        assert_eq!(
            variational_transport(&zero, &y, &none, &cfg)
                .unwrap()
                .sup_norm(),
            0.0
        );
    }

    #[test]
    fn affine_transport_map_is_exact() {
        let y0 = GridFn1D::from_fn(0.0, 1.0, 64, |x| (2.0 * PI * x).sin()).unwrap();
        let p = TransportProblem::parse(y0, "0.5*xi + cos(t)", 0.25).unwrap();
        let cfg = PicardConfig {
            step_policy: crate::transport::StepPolicy::FixedSteps(4),
            ..PicardConfig::default()
        };
        let h = TransportDirection::parse(
            GridFn1D::from_fn(0.0, 1.0, 64, |x| (4.0 * PI * x).cos()).unwrap(),
            "eta*t",
        )
        .unwrap();
        for eps in [1e-1, 1e-3] {
            let r = transport_check(&p, &cfg, &h, eps).unwrap();
            assert!(r.comparison.relative < 1e-9, "{eps}: {:?}", r.comparison);
        }
    }

    #[test]
    fn quadratic_data_direction_matches_family() {
        let n = 64;
        let cfg = PicardConfig::default();
        let p = TransportProblem::parse(half(n), "xi^2", 0.5).unwrap();
        let h =
            TransportDirection::data_only(GridFn1D::constant(0.0, 1.0, n, 1.0).unwrap()).unwrap();
        let r = transport_check(&p, &cfg, &h, 1e-3).unwrap();
        assert!(r.comparison.relative <= 1e-3);
        let order = r.order.unwrap();
        assert!((1.8..=2.2).contains(&order), "{order}");
    }

    #[test]
    fn ivp_and_bvp_checks() {
        let ivp = ImplicitIvp::parse(1.0, "xi2 - xi1^2/4 - sin(t)", 100).unwrap();
        let h = Direction {
            data: 0.5,
            phi: Expression::parse("xi1*t", &crate::jet::VARS).unwrap(),
        };
        let r = ivp_check(&ivp, &IvpOptions::default(), &h, 1e-3).unwrap();
        assert!(r.comparison.relative <= 1e-3, "{:?}", r.comparison);
        let bvp = BvProblem::parse(0.0, 1.0, "xi1^3 + s", 60).unwrap();
        let h = Direction {
            data: (1.0, -0.5),
            phi: Expression::parse("xi2 * s", &crate::jet::VARS).unwrap(),
        };
        let r = bvp_check(&bvp, &BvpOptions::default(), &h, 1e-3).unwrap();
        assert!(r.comparison.relative <= 1e-6, "{:?}", r.comparison);
    }
}
