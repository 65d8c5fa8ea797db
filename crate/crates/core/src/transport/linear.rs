use crate::grid::{sup, CylFn, Level, StencilOrder};
use crate::quad::Quadrature;

use super::characteristics::{char_integral, check_aligned, continuation};
use super::constants::{angular_nodes, suprema, xi_samples};
use super::picard::{fixed_point, Block};
use super::{Nonlinearity, PicardConfig, TransportError};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearOptions {
    /// Sup-norm update tolerance relative to `1 + ‖v‖`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub quadrature: Quadrature,
}

impl Default for LinearOptions {
    fn default() -> Self {
        LinearOptions {
            tolerance: 1e-13,
            max_iterations: 200,
            quadrature: Quadrature::Trapezoid,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearSolve {
    pub u: CylFn,
    pub iterations: usize,
    pub windows: usize,
}

/// Solves `u = v + 𝓘(0, a·u)` by Picard iteration on windows of length at
/// most `1 / (12 sup|a|)`.
pub fn linearized_solve(
    a: &CylFn,
    v: &CylFn,
    opts: &LinearOptions,
) -> Result<LinearSolve, TransportError> {
    linearized_solve_from(a, v, opts, None)
}

/// As [`linearized_solve`], iterating from the rows of `init`.
pub fn linearized_solve_from(
    a: &CylFn,
    v: &CylFn,
    opts: &LinearOptions,
    init: Option<&CylFn>,
) -> Result<LinearSolve, TransportError> {
    check_aligned(v)?;
    if !a.same_grid(v) || init.is_some_and(|i| !i.same_grid(v)) {
        return Err(TransportError::Invalid("linear solve grids differ".into()));
    }
    let (n, nt, dt) = (v.ntheta(), v.nt(), v.dt());
    let sup_a = a.sup_norm();
    let cells = if sup_a > 0.0 {
        ((1.0 / (12.0 * sup_a * dt)).floor() as usize).clamp(1, nt)
    } else {
        nt
    };
    let tol = opts.tolerance * (1.0 + v.sup_norm());
    let (vv, av) = (v.values(), a.values());
    let mut u = vec![0.0; vv.len()];
    u[..n].copy_from_slice(&vv[..n]);
    let mut start_minus_v = vec![0.0; n];
    let (mut k0, mut iterations, mut windows) = (0, 0, 0);
    while k0 < nt {
        let c = cells.min(nt - k0);
        let rows = c + 1;
        let span = k0 * n..(k0 + rows) * n;
        for m in 0..n {
            start_minus_v[m] = u[k0 * n + m] - vv[k0 * n + m];
        }
        let mut z0 = vec![0.0; rows * n];
        continuation(&vv[span.clone()], &start_minus_v, rows, n, &mut z0);
        let block = Block {
            rows,
            n,
            dt,
            rule: opts.quadrature,
            t0: k0 as f64 * dt,
        };
        let coeff = &av[span.clone()];
        let sweep = fixed_point(
            &block,
            &z0,
            init.map(|i| &i.values()[span.clone()]),
            tol,
            opts.max_iterations,
            |j, m, x| Ok(coeff[j * n + m] * x),
        )?;
        u[span].copy_from_slice(&sweep.values);
        iterations += sweep.iterations;
        windows += 1;
        k0 += c;
    }
    Ok(LinearSolve {
        u: CylFn::new(v.t_final(), nt, n, u)?,
        iterations,
        windows,
    })
}

/// Result of [`apriori_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriMargin {
    pub level: Level,
    /// `(1 + ‖v‖) e^{L M_i} − 1`.
    pub bound: f64,
    pub norm: f64,
    pub data_norm: f64,
    pub m_i: f64,
    pub length: f64,
    /// `bound − norm`.
    pub margin: f64,
}

fn row_times(y: &CylFn) -> Vec<f64> {
    (0..=y.nt()).map(|k| y.t(k)).collect()
}

/// Checks `‖y‖_{C^{0,i}} ≤ (1 + ‖v‖_{C^{0,i}}) e^{L M_i} − 1` for a solution of
/// `y = v + 𝓘(0, φ∘[id, y])` on `[0, L]`, `L` the horizon of `y`. The
/// suprema entering `M_i` are sampled over the grid and the range of `y`.
pub fn apriori_check(
    v: &CylFn,
    phi: &Nonlinearity,
    y: &CylFn,
    level: Level,
    cfg: &PicardConfig,
) -> Result<AprioriMargin, TransportError> {
    if level.0 > 1 {
        return Err(TransportError::Invalid(
            "a-priori bound is stated for levels 0 and 1".into(),
        ));
    }
    if !v.same_grid(y) {
        return Err(TransportError::Invalid(
            "data and solution grids differ".into(),
        ));
    }
    let half_width = y.sup_norm().max(1e-12);
    let xis = xi_samples(half_width, cfg.xi_samples.max(33));
    let s = suprema(phi, &row_times(y), &angular_nodes(y.ntheta()), &xis)?;
    let m_i = if level.0 == 0 {
        s.m0(cfg.safety)
    } else {
        s.m1(cfg.safety)
    };
    let length = y.t_final();
    let data_norm = v.c0i_norm(level, cfg.stencil)?;
    let norm = y.c0i_norm(level, cfg.stencil)?;
    let bound = (1.0 + data_norm) * (length * m_i).exp() - 1.0;
    Ok(AprioriMargin {
        level,
        bound,
        norm,
        data_norm,
        m_i,
        length,
        margin: bound - norm,
    })
}

/// Both sides of the Lipschitz estimate for `z ↦ 𝓘(0, φ∘[id, z])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzProbe {
    /// `‖𝓘(0, φ∘u) − 𝓘(0, φ∘v)‖_{C^{0,1}}`.
    pub lhs: f64,
    /// `L M (2 + R) ‖u − v‖_{C^{0,1}}`.
    pub rhs: f64,
    pub length: f64,
    pub m: f64,
    pub radius: f64,
}

pub fn lipschitz_probe(
    phi: &Nonlinearity,
    u: &CylFn,
    v: &CylFn,
    cfg: &PicardConfig,
) -> Result<LipschitzProbe, TransportError> {
    check_aligned(u)?;
    if !u.same_grid(v) {
        return Err(TransportError::Invalid("probe grids differ".into()));
    }
    let c01 = |z: &CylFn| z.c0i_norm(Level(1), cfg.stencil);
    let radius = c01(u)?.max(c01(v)?);
    let half_width = u.sup_norm().max(v.sup_norm()).max(1e-12);
    let xis = xi_samples(half_width, cfg.xi_samples.max(33));
    let s = suprema(phi, &row_times(u), &angular_nodes(u.ntheta()), &xis)?;
    let m = s.m(cfg.safety);
    let fu = u.compose(&phi.value)?;
    let fv = v.compose(&phi.value)?;
    let diff = char_integral(0, &fu.sub(&fv)?, cfg.quadrature)?;
    let length = u.t_final();
    Ok(LipschitzProbe {
        lhs: c01(&diff)?,
        rhs: length * m * (2.0 + radius) * c01(&u.sub(v)?)?,
        length,
        m,
        radius,
    })
}

/// `sup |∂_t y + ∂_η y − φ(t, η, y)|` over all nodes, with fourth-order
/// differences (one-sided at `t = 0` and `t = T`).
pub fn residual(y: &CylFn, phi: &Nonlinearity) -> Result<f64, TransportError> {
    let dt = y.d_time()?;
    let de = y.d_theta(1, StencilOrder::Fourth)?;
    let f = y.compose(&phi.value)?;
    let r = dt.add(&de)?.sub(&f)?;
    Ok(sup(r.values()))
}

#[cfg(test)]
mod tests {
    use super::super::{bar_y0, solve, TransportProblem};
    use super::*;
    use crate::grid::GridFn1D;
    use std::f64::consts::PI;

    #[test]
    fn zero_coefficient_returns_data() {
        let v = CylFn::from_fn(1.0, 32, 32, |t, eta| t + (2.0 * PI * eta).sin()).unwrap();
        let a = CylFn::zeros(1.0, 32, 32).unwrap();
        let r = linearized_solve(&a, &v, &LinearOptions::default()).unwrap();
        assert_eq!(r.u, v);
    }

    #[test]
    fn unit_coefficient_gives_exponential() {
        let a = CylFn::constant(1.0, 256, 256, 1.0).unwrap();
        let v = a.clone();
        let exact = CylFn::from_fn(1.0, 256, 256, |t, _| t.exp()).unwrap();
        let trap = linearized_solve(&a, &v, &LinearOptions::default()).unwrap();
        assert!(trap.u.max_abs_diff(&exact).unwrap() < 1e-5);
        let opts = LinearOptions {
            quadrature: Quadrature::Simpson,
            ..LinearOptions::default()
        };
        let simpson = linearized_solve(&a, &v, &opts).unwrap();
        assert!(simpson.u.max_abs_diff(&exact).unwrap() < 1e-6);
    }

    #[test]
    fn zero_data_zero_solution() {
        let a = CylFn::from_fn(1.0, 32, 32, |t, eta| 3.0 * t * (2.0 * PI * eta).cos()).unwrap();
        let v = CylFn::zeros(1.0, 32, 32).unwrap();
        assert_eq!(
            linearized_solve(&a, &v, &LinearOptions::default())
                .unwrap()
                .u,
            v
        );
    }

    #[test]
    fn linear_in_data() {
        let n = 64;
        let a = CylFn::from_fn(1.0, n, n, |t, eta| 1.0 + t * (2.0 * PI * eta).sin()).unwrap();
        let v1 = CylFn::from_fn(1.0, n, n, |_, eta| (2.0 * PI * eta).cos()).unwrap();
        let v2 = CylFn::from_fn(1.0, n, n, |t, _| t * t).unwrap();
        let opts = LinearOptions::default();
        let u = |v: &CylFn| linearized_solve(&a, v, &opts).unwrap().u;
        let combo = u(&v1.scale(2.0).unwrap().axpy(-3.0, &v2).unwrap());
        let parts = u(&v1).scale(2.0).unwrap().axpy(-3.0, &u(&v2)).unwrap();
        let rel = combo.max_abs_diff(&parts).unwrap() / parts.sup_norm();
        assert!(rel < 1e-10, "{rel}");
    }

    #[test]
    fn residual_examples() {
        let n = 256;
        let y0 = GridFn1D::from_fn(0.0, 1.0, n, |x| (2.0 * PI * x).sin()).unwrap();
        let v = bar_y0(&y0, 1.0).unwrap();
        let zero = Nonlinearity::parse("0").unwrap();
        assert!(residual(&v, &zero).unwrap() <= 1e-6);
        let t = Nonlinearity::parse("t").unwrap();
        let y = CylFn::zeros(1.5, 24, 16).unwrap();
        assert!((residual(&y, &t).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn apriori_margin_for_zero_nonlinearity() {
        let n = 32;
        let y0 = GridFn1D::from_fn(0.0, 1.0, n, |x| (2.0 * PI * x).sin()).unwrap();
        let v = bar_y0(&y0, 0.5).unwrap();
        let zero = Nonlinearity::parse("0").unwrap();
        for level in [Level(0), Level(1)] {
            let m = apriori_check(&v, &zero, &v, level, &PicardConfig::default()).unwrap();
            assert_eq!(m.bound, m.data_norm);
            assert!(m.margin.abs() < 1e-12);
        }
        let z = CylFn::zeros(0.5, 16, 32).unwrap();
        let xi = Nonlinearity::parse("xi").unwrap();
        let m = apriori_check(&z, &xi, &z, Level(0), &PicardConfig::default()).unwrap();
        assert!(m.bound >= 0.0);
        assert_eq!(m.margin, m.bound);
    }

    #[test]
    fn apriori_margin_quadratic() {
        let y0 = GridFn1D::constant(0.0, 1.0, 128, 0.5).unwrap();
        let p = TransportProblem::parse(y0, "xi^2", 1.0).unwrap();
        let r = solve(&p, &PicardConfig::default()).unwrap();
        let v = bar_y0(p.y0(), 1.0).unwrap();
        for level in [Level(0), Level(1)] {
            let m = apriori_check(
                &v,
                p.nonlinearity(),
                &r.solution,
                level,
                &PicardConfig::default(),
            )
            .unwrap();
            assert!(m.margin >= 0.0, "{m:?}");
        }
    }
}
