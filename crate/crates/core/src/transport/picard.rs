use crate::grid::{row_c0i, sup, CylFn, Level};
use crate::quad::Quadrature;

use super::characteristics::{bar_y0, continuation, integrate_block};
use super::constants::{angular_nodes, suprema, xi_samples, Constants};
use super::cutoff::cutoff_chi;
use super::linear::{linearized_solve, residual, LinearOptions};
use super::{
    eval3, Cutoff, PicardConfig, SolveReport, StepPolicy, StepRecord, TransportError,
    TransportProblem, XiWindow,
};

const XI_FLOOR: f64 = 1e-3;
const XI_MARGIN: f64 = 1.05;
/// Upper end of the automatic ξ range, reached only when the Gronwall bound of a
/// long fixed window does not close.
const XI_CAP: f64 = 1e6;

/// Outcome of a fixed-point sweep on one window.
pub(crate) struct Sweep {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub ratios: Vec<f64>,
    pub max_abs: f64,
}

pub(crate) struct Block {
    pub rows: usize,
    pub n: usize,
    pub dt: f64,
    pub rule: Quadrature,
    pub t0: f64,
}

/// Iterates `z ↦ z0 + 𝓘(0, F(z))` on a block until the sup update is at most
/// `tol`. `rhs(j, m, ξ)` evaluates `F` at local row `j`.
pub(crate) fn fixed_point(
    block: &Block,
    z0: &[f64],
    init: Option<&[f64]>,
    tol: f64,
    max_iterations: usize,
    mut rhs: impl FnMut(usize, usize, f64) -> Result<f64, TransportError>,
) -> Result<Sweep, TransportError> {
    let (rows, n) = (block.rows, block.n);
    let mut z = init.unwrap_or(z0).to_vec();
    let mut f = vec![0.0; rows * n];
    let mut integral = vec![0.0; rows * n];
    let mut ratios = Vec::new();
    let mut max_abs = sup(&z);
    let mut previous: Option<f64> = None;
    let mut update = f64::INFINITY;
    for it in 1..=max_iterations {
        for j in 0..rows {
            for m in 0..n {
                f[j * n + m] = rhs(j, m, z[j * n + m])?;
            }
        }
        integrate_block(&f, rows, n, block.dt, block.rule, &mut integral);
        update = 0.0;
        let mut size = 0.0_f64;
        for i in 0..rows * n {
            let next = z0[i] + integral[i];
            update = update.max((next - z[i]).abs());
            size = size.max(next.abs());
            z[i] = next;
        }
        max_abs = max_abs.max(size);
        if !update.is_finite() {
            break;
        }
        if let Some(p) = previous {
            if p > 1e-14 * (1.0 + size) {
                ratios.push(update / p);
            }
        }
        if update <= tol {
            return Ok(Sweep {
                values: z,
                iterations: it,
                ratios,
                max_abs,
            });
        }
        previous = Some(update);
    }
    Err(TransportError::NoConvergence {
        t0: block.t0,
        iterations: max_iterations,
        last_update: update,
    })
}

/// Result of [`picard_step`].
#[derive(Debug, Clone)]
pub struct PicardStep {
    pub z: CylFn,
    pub iterations: usize,
    pub ratios: Vec<f64>,
}

/// Fixed point of `z ↦ z0 + 𝓘(t0, φ∘[id, z])` on one window. `z0` is a
/// window-local grid function whose row 0 sits at time node `k0` of the
/// problem. With `cutoff_level = Some(B)` the nonlinearity is replaced by
/// `χ(ξ/B)·φ`.
pub fn picard_step(
    problem: &TransportProblem,
    k0: usize,
    z0: &CylFn,
    cfg: &PicardConfig,
    cutoff_level: Option<f64>,
    init: Option<&CylFn>,
) -> Result<PicardStep, TransportError> {
    cfg.validate()?;
    if z0.ntheta() != problem.ntheta() || (z0.dt() - problem.dt()).abs() > 1e-12 * problem.dt() {
        return Err(TransportError::Invalid(
            "window grid does not match the problem grid".into(),
        ));
    }
    if k0 + z0.nt() > problem.nt() {
        return Err(TransportError::Invalid("window extends beyond T".into()));
    }
    if let Some(i) = init {
        if !i.same_grid(z0) {
            return Err(TransportError::Invalid(
                "initial iterate grid mismatch".into(),
            ));
        }
    }
    let block = Block {
        rows: z0.nt() + 1,
        n: z0.ntheta(),
        dt: problem.dt(),
        rule: cfg.quadrature,
        t0: k0 as f64 * problem.dt(),
    };
    let sweep = window_sweep(
        problem,
        &block,
        k0,
        z0.values(),
        init.map(CylFn::values),
        cfg,
        cutoff_level,
    )?;
    Ok(PicardStep {
        z: CylFn::new(z0.t_final(), z0.nt(), z0.ntheta(), sweep.values)?,
        iterations: sweep.iterations,
        ratios: sweep.ratios,
    })
}

fn window_sweep(
    problem: &TransportProblem,
    block: &Block,
    k0: usize,
    z0: &[f64],
    init: Option<&[f64]>,
    cfg: &PicardConfig,
    cutoff_level: Option<f64>,
) -> Result<Sweep, TransportError> {
    let phi = &problem.nonlinearity().value;
    let dt = problem.dt();
    let inv_n = 1.0 / block.n as f64;
    fixed_point(
        block,
        z0,
        init,
        cfg.tolerance,
        cfg.max_iterations,
        |j, m, xi| {
            let t = (k0 + j) as f64 * dt;
            let eta = m as f64 * inv_n;
            match cutoff_level {
                Some(b) if xi.abs() > b => Ok(cutoff_chi(xi / b) * eval3(phi, t, eta, xi)?),
                _ => eval3(phi, t, eta, xi),
            }
        },
    )
}

struct WindowPlan {
    cells: usize,
    constants: Constants,
    cutoff: Option<f64>,
}

/// Chooses the ξ range, constants and length of the window starting at `k0`.
fn plan_window(
    problem: &TransportProblem,
    cfg: &PicardConfig,
    k0: usize,
    slice: &[f64],
    previous_cells: Option<usize>,
) -> Result<WindowPlan, TransportError> {
    let nt = problem.nt();
    let dt = problem.dt();
    let remaining = nt - k0;
    let fixed = match cfg.step_policy {
        StepPolicy::FixedSteps(s) => Some(nt.div_ceil(s).min(remaining)),
        StepPolicy::Contraction => None,
    };
    let probe = match (fixed, previous_cells) {
        (Some(c), _) => c,
        (None, Some(c)) => remaining.min((2 * c).max(2)),
        (None, None) => remaining,
    };
    let times: Vec<f64> = (k0..=k0 + probe).map(|k| k as f64 * dt).collect();
    let etas = angular_nodes(problem.ntheta());
    let s0 = sup(slice);
    let a = row_c0i(slice, Level(1), cfg.stencil);

    let evaluate = |xi: f64| -> Result<(Constants, usize), TransportError> {
        let s = suprema(
            problem.nonlinearity(),
            &times,
            &etas,
            &xi_samples(xi, cfg.xi_samples),
        )?;
        let c = Constants::from_suprema(&s, cfg.safety, a, xi, 0.0, probe as f64 * dt);
        let cells = match fixed {
            Some(f) => f,
            None => ((c.l / dt) * (1.0 + 1e-12)).floor().min(probe as f64) as usize,
        };
        Ok((c, cells))
    };

    let (mut constants, mut cells, xi) = match cfg.xi_window {
        XiWindow::Fixed(xi) => {
            let (c, cells) = evaluate(xi)?;
            (c, cells, xi)
        }
        XiWindow::Auto => {
            let mut xi = (XI_MARGIN * s0).max(XI_FLOOR);
            let (mut c, mut cells) = evaluate(xi)?;
            for _ in 0..60 {
                let length = cells.max(1) as f64 * dt;
                let bound = (1.0 + s0) * (length * c.m0).exp() - 1.0;
                let wanted = (XI_MARGIN * bound.max(s0)).max(XI_FLOOR);
                if wanted <= xi {
                    break;
                }
                xi = if wanted.is_finite() {
                    wanted.min(XI_CAP)
                } else {
                    XI_CAP
                };
                (c, cells) = evaluate(xi)?;
                if xi == XI_CAP {
                    break;
                }
            }
            (c, cells, xi)
        }
    };
    if cells == 0 {
        return Ok(WindowPlan {
            cells,
            constants,
            cutoff: None,
        });
    }
    constants = constants.with_length(cells as f64 * dt);
    if fixed.is_none() {
        cells = cells.min(remaining);
    }
    let active = match cfg.cutoff {
        Cutoff::On => true,
        Cutoff::Off => false,
        Cutoff::Auto => {
            let inner = xi_samples(xi, cfg.xi_samples);
            let outer = xi_samples(2.0 * xi, 2 * cfg.xi_samples);
            let phi = problem.nonlinearity();
            let d_in = super::constants::sup_sampled(&phi.d_xi, &times, &etas, &inner)?;
            let d_out = super::constants::sup_sampled(&phi.d_xi, &times, &etas, &outer)?;
            d_out > d_in * (1.0 + 1e-12)
        }
    };
    Ok(WindowPlan {
        cells,
        constants,
        cutoff: active.then_some(xi),
    })
}

/// Solves the transport problem from `ȳ₀`.
pub fn solve(
    problem: &TransportProblem,
    cfg: &PicardConfig,
) -> Result<SolveReport, TransportError> {
    solve_from(problem, cfg, None)
}

/// As [`solve`], starting the iteration on each window from the rows of
/// `init` instead of the continued data.
pub fn solve_from(
    problem: &TransportProblem,
    cfg: &PicardConfig,
    init: Option<&CylFn>,
) -> Result<SolveReport, TransportError> {
    cfg.validate()?;
    let v = bar_y0(problem.y0(), problem.t_final())?;
    if let Some(i) = init {
        if !i.same_grid(&v) {
            return Err(TransportError::Invalid(
                "initial iterate grid mismatch".into(),
            ));
        }
    }
    let (n, nt, dt) = (problem.ntheta(), problem.nt(), problem.dt());
    let vv = v.values();
    let mut y = vec![0.0; vv.len()];
    y[..n].copy_from_slice(&vv[..n]);
    let mut steps = Vec::new();
    let mut k0 = 0;
    let mut previous_cells = None;
    let mut start_minus_v = vec![0.0; n];
    while k0 < nt {
        let slice = y[k0 * n..(k0 + 1) * n].to_vec();
        let plan = plan_window(problem, cfg, k0, &slice, previous_cells)?;
        if plan.cells == 0 {
            return Err(stagnation(problem, &y, k0)?);
        }
        let cells = plan.cells;
        let rows = cells + 1;
        let span = k0 * n..(k0 + rows) * n;
        for m in 0..n {
            start_minus_v[m] = slice[m] - vv[k0 * n + m];
        }
        let mut z0 = vec![0.0; rows * n];
        continuation(&vv[span.clone()], &start_minus_v, rows, n, &mut z0);
        let block = Block {
            rows,
            n,
            dt,
            rule: cfg.quadrature,
            t0: k0 as f64 * dt,
        };
        let init_rows = init.map(|i| &i.values()[span.clone()]);
        let sweep = window_sweep(problem, &block, k0, &z0, init_rows, cfg, plan.cutoff)?;
        y[span].copy_from_slice(&sweep.values);
        steps.push(StepRecord {
            t0: k0 as f64 * dt,
            t2: (k0 + cells) as f64 * dt,
            cells,
            constants: plan.constants,
            iterations: sweep.iterations,
            ratios: sweep.ratios,
            cutoff_active: plan.cutoff.is_some(),
            iterate_sup: sweep.max_abs,
        });
        previous_cells = Some(cells);
        k0 += cells;
    }
    let solution = CylFn::new(problem.t_final(), nt, n, y)?;
    let res = residual(&solution, problem.nonlinearity())?;
    let a = solution.compose(&problem.nonlinearity().d_xi)?;
    let regular = linearized_solve(&a, &v, &LinearOptions::default()).is_ok();
    Ok(SolveReport {
        solution,
        steps,
        residual: res,
        regular,
    })
}

fn stagnation(
    problem: &TransportProblem,
    y: &[f64],
    k0: usize,
) -> Result<TransportError, TransportError> {
    let n = problem.ntheta();
    let t = k0 as f64 * problem.dt();
    let slice = &y[k0 * n..(k0 + 1) * n];
    let mut rate = 0.0_f64;
    for (m, &value) in slice.iter().enumerate() {
        let eta = m as f64 / n as f64;
        rate = rate.max(eval3(&problem.nonlinearity().value, t, eta, value)?.abs());
    }
    let blowup_estimate = if rate > 0.0 {
        t + sup(slice) / rate
    } else {
        f64::INFINITY
    };
    let partial = if k0 > 0 {
        Some(Box::new(CylFn::new(t, k0, n, y[..(k0 + 1) * n].to_vec())?))
    } else {
        None
    };
    Ok(TransportError::StepStagnation {
        t_reached: t,
        blowup_estimate,
        partial,
    })
}

/// Sup distance between the solutions reached from two initial iterates.
pub fn uniqueness_probe(
    problem: &TransportProblem,
    cfg: &PicardConfig,
    init1: &CylFn,
    init2: &CylFn,
) -> Result<f64, TransportError> {
    let a = solve_from(problem, cfg, Some(init1))?;
    let b = solve_from(problem, cfg, Some(init2))?;
    Ok(a.solution.max_abs_diff(&b.solution)?)
}
