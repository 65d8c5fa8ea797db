use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use solmap_core::bvp::{self, BvProblem, BvpOptions};
use solmap_core::harness::{self, LevelLadder};
use solmap_core::holo::{self, Radius};
use solmap_core::implicit_ode::{self, ImplicitIvp, IvpOptions};
use solmap_core::sensitivity::{self, Direction, SecondVariation, TransportDirection};
use solmap_core::transport::{
    self, Cutoff, LinearOptions, PicardConfig, SolveReport, StepPolicy, TransportError,
    TransportProblem, XiWindow,
};
use solmap_core::{CylFn, Expression, Quadrature};

use crate::config::{key, required, Key, RunConfig};
use crate::data::DataSource;
use crate::error::CliError;
use crate::output::{Artifacts, Cell, Table};

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: fn() -> Vec<Key>,
    pub run: fn(&RunConfig, &mut Artifacts) -> Result<String, CliError>,
}

pub const COMMANDS: [Command; 11] = [
    Command {
        name: "transport-solve",
        about: "solve the periodic transport problem by windowed Picard iteration",
        keys: transport_solve_keys,
        run: transport_solve,
    },
    Command {
        name: "transport-sensitivity",
        about: "finite differences against the variational solution of the transport map",
        keys: transport_sensitivity_keys,
        run: transport_sensitivity,
    },
    Command {
        name: "ivp",
        about: "integrate the implicit first-order problem and trace its regularity",
        keys: ivp_keys,
        run: ivp,
    },
    Command {
        name: "ivp-sensitivity",
        about: "finite differences against the integrating-factor derivative",
        keys: ivp_sensitivity_keys,
        run: ivp_sensitivity,
    },
    Command {
        name: "bvp",
        about: "solve the two-point boundary value problem by Newton's method",
        keys: bvp_keys,
        run: bvp_solve,
    },
    Command {
        name: "bvp-resonance-scan",
        about: "smallest singular value of u'' - r u over a range of r",
        keys: scan_keys,
        run: resonance_scan,
    },
    Command {
        name: "holo",
        about: "Taylor solve of the blow-up family and its radius of convergence",
        keys: holo_keys,
        run: holo_solve,
    },
    Command {
        name: "holo-counterexample",
        about: "distances of the polynomial sequence and the radius of its limit",
        keys: counterexample_keys,
        run: holo_counterexample,
    },
    Command {
        name: "harness-consistency",
        about: "restriction consistency, bijectivity and uniqueness over a ladder of horizons",
        keys: consistency_keys,
        run: harness_consistency,
    },
    Command {
        name: "harness-exp",
        about: "levels on which log x exists",
        keys: exp_keys,
        run: harness_exp,
    },
    Command {
        name: "convergence-study",
        about: "sup error against an exact solution over a list of resolutions",
        keys: convergence_keys,
        run: convergence_study,
    },
];

pub fn find(name: &str) -> Option<&'static Command> {
    COMMANDS.iter().find(|c| c.name == name)
}

const PICARD_KEYS: [Key; 8] = [
    key("tol", "1e-12", "fixed-point tolerance"),
    key("max-iter", "200", "iterations per window"),
    key(
        "policy",
        "contraction",
        "window rule: contraction or fixed:K",
    ),
    key(
        "xi-window",
        "auto",
        "sampled xi half-width: auto or a number",
    ),
    key("cutoff", "auto", "auto, on or off"),
    key("quadrature", "trapezoid", "trapezoid or simpson"),
    key("safety", "1.25", "inflation of sampled suprema"),
    key("xi-samples", "9", "xi samples per constant"),
];

fn transport_base(horizon: Key, cells: Key) -> Vec<Key> {
    let mut k = vec![
        required("y0", "initial data in eta: expression, [list] or CSV path"),
        required("phi", "nonlinearity in t, eta, xi"),
        horizon,
        cells,
    ];
    k.extend(PICARD_KEYS);
    k
}

fn transport_solve_keys() -> Vec<Key> {
    let mut k = transport_base(required("T", "horizon"), key("n", "256", "angular cells"));
    k.push(key("exact", "", "exact solution in t, eta"));
    k
}

fn transport_sensitivity_keys() -> Vec<Key> {
    let mut k = transport_base(required("T", "horizon"), key("n", "256", "angular cells"));
    k.extend([
        key("dy0", "0", "data direction"),
        key("dphi", "0", "nonlinearity direction"),
        key("eps", "1e-3", "difference step"),
        key("dy0-2", "", "data part of a second direction"),
        key("dphi-2", "", "nonlinearity part of a second direction"),
    ]);
    k
}

fn consistency_keys() -> Vec<Key> {
    let mut k = transport_base(
        key("ladder", "0.5,1.0,1.5", "increasing horizons"),
        key("n", "256", "angular cells"),
    );
    k.extend([
        key("trials", "10", "random right-hand sides per level"),
        key("seed", "0", "seed of the random right-hand sides"),
    ]);
    k
}

fn convergence_keys() -> Vec<Key> {
    let mut k = transport_base(
        required("T", "horizon"),
        key("n-list", "256,512,1024", "angular cell counts"),
    );
    k.push(required("exact", "exact solution in t, eta"));
    k
}

fn ivp_keys() -> Vec<Key> {
    vec![
        required("phi", "implicit relation in s (or t), xi1, xi2"),
        key("eta", "0", "initial value"),
        key("steps", "100", "RK4 steps on [0, 1]"),
        key("slope-guess", "0", "Newton start for the initial slope"),
        key(
            "threshold",
            "1e-8",
            "min |p3| at or below which the trajectory is irregular",
        ),
    ]
}

fn ivp_sensitivity_keys() -> Vec<Key> {
    let mut k = ivp_keys();
    k.extend([
        key("d-eta", "1", "initial value direction"),
        key("dphi", "0", "relation direction"),
        key("eps", "1e-3", "difference step"),
    ]);
    k
}

fn bvp_keys() -> Vec<Key> {
    vec![
        required("phi", "relation in s (or t), xi1, xi2 with y'' = phi"),
        key("eta0", "0", "value at s = 0"),
        key("eta1", "0", "value at s = 1"),
        key("n", "200", "interior nodes"),
        key("tol", "1e-12", "Newton tolerance"),
        key("max-steps", "50", "Newton steps"),
        key("max-halvings", "30", "step halvings per Newton step"),
        key("threshold", "1e-8", "relative singular value threshold"),
    ]
}

fn scan_keys() -> Vec<Key> {
    vec![
        key("rmin", "-100", "scan start"),
        key("rmax", "0", "scan end"),
        key("steps", "2000", "scan points"),
        key("n", "200", "interior nodes"),
        key("threshold", "1e-8", "relative singular value threshold"),
        key("mode", "1", "resonance index for the solvability check"),
        key("v", "", "right-hand side v in s for the solvability check"),
    ]
}

fn holo_keys() -> Vec<Key> {
    vec![
        key("n", "3", "family index"),
        key("epsilon", "0.5", "initial value"),
        key("order", "200", "Taylor coefficients"),
    ]
}

fn counterexample_keys() -> Vec<Key> {
    vec![
        key("r", "0.5", "inner radius"),
        key("s", "0.8", "outer radius"),
        key("n-max", "20", "largest sequence index"),
        key("order", "200", "Taylor coefficients of the limit"),
    ]
}

fn exp_keys() -> Vec<Key> {
    vec![
        required("x", "function of s on [-levels, levels]"),
        key("levels", "2", "number of levels"),
        key("cells", "400", "grid cells"),
    ]
}

fn picard_config(cfg: &RunConfig) -> Result<PicardConfig, CliError> {
    let policy = match cfg.raw("policy").trim() {
        "contraction" => StepPolicy::Contraction,
        other => match other.strip_prefix("fixed:").map(str::parse::<usize>) {
            Some(Ok(k)) => StepPolicy::FixedSteps(k),
            _ => return Err(CliError::Usage(format!("bad policy `{other}`"))),
        },
    };
    let xi_window = match cfg.raw("xi-window").trim() {
        "auto" => XiWindow::Auto,
        _ => XiWindow::Fixed(cfg.f64("xi-window")?),
    };
    let cutoff = match cfg.raw("cutoff").trim() {
        "auto" => Cutoff::Auto,
        "on" => Cutoff::On,
        "off" => Cutoff::Off,
        other => return Err(CliError::Usage(format!("bad cutoff `{other}`"))),
    };
    let pc = PicardConfig {
        tolerance: cfg.f64("tol")?,
        max_iterations: cfg.usize("max-iter")?,
        xi_window,
        cutoff,
        step_policy: policy,
        safety: cfg.f64("safety")?,
        xi_samples: cfg.usize("xi-samples")?,
        quadrature: quadrature(cfg.raw("quadrature"))?,
        ..PicardConfig::default()
    };
    pc.validate()?;
    Ok(pc)
}

fn quadrature(text: &str) -> Result<Quadrature, CliError> {
    match text.trim() {
        "trapezoid" => Ok(Quadrature::Trapezoid),
        "simpson" => Ok(Quadrature::Simpson),
        other => Err(CliError::Usage(format!("bad quadrature `{other}`"))),
    }
}

fn transport_problem(
    cfg: &RunConfig,
    t_final: f64,
    n: usize,
) -> Result<TransportProblem, CliError> {
    let y0 = DataSource::parse(cfg.raw("y0"))?.sample("eta", 0.0, 1.0, n, true)?;
    Ok(TransportProblem::parse(y0, cfg.raw("phi"), t_final)?)
}

fn record_grid(art: &mut Artifacts, p: &TransportProblem) {
    art.record("grid.ntheta", p.ntheta());
    art.record("grid.nt", p.nt());
    art.num("grid.dt", p.dt());
    art.num("grid.T", p.t_final());
}

fn cyl_table(y: &CylFn, columns: &[&str], extra: &[&[f64]]) -> Table {
    let mut header = vec!["t", "eta"];
    header.extend_from_slice(columns);
    let mut t = Table::new(&header).blocked_by(0);
    for k in 0..=y.nt() {
        for m in 0..y.ntheta() {
            let i = k * y.ntheta() + m;
            let mut row: Vec<Cell> = vec![y.t(k).into(), y.eta(m).into()];
            row.extend(extra.iter().map(|col| Cell::Num(col[i])));
            t.push(row);
        }
    }
    t
}

/// `sup |y − exact|` over all nodes, the pointwise error alongside.
fn exact_error(y: &CylFn, text: &str) -> Result<(f64, Vec<f64>), CliError> {
    let e = Expression::parse(text, &["t", "eta"])?;
    let mut err = Vec::with_capacity(y.values().len());
    for k in 0..=y.nt() {
        for m in 0..y.ntheta() {
            let v = e.eval(&[y.t(k), y.eta(m)])?;
            err.push(y.get(k, m as isize) - v);
        }
    }
    let sup = err.iter().map(|e| e.abs()).fold(0.0, f64::max);
    Ok((sup, err))
}

fn record_windows(art: &mut Artifacts, report: &SolveReport) {
    let mut t = Table::new(&[
        "t0",
        "t2",
        "cells",
        "data_bound",
        "xi_window",
        "m0",
        "m1",
        "m",
        "r",
        "l",
        "alpha",
        "iterations",
        "max_ratio",
        "cutoff_active",
    ]);
    for s in &report.steps {
        let c = &s.constants;
        t.push(vec![
            s.t0.into(),
            s.t2.into(),
            s.cells.into(),
            c.data_bound.into(),
            c.xi_window.into(),
            c.m0.into(),
            c.m1.into(),
            c.m.into(),
            c.r.into(),
            c.l.into(),
            c.alpha.into(),
            s.iterations.into(),
            s.max_ratio().into(),
            s.cutoff_active.into(),
        ]);
    }
    art.table("windows", t, false);
    if let Some(first) = report.steps.first() {
        let c = &first.constants;
        art.num("constants.A", c.data_bound);
        art.num("constants.M", c.m);
        art.num("constants.R", c.r);
        art.num("constants.L", c.l);
        art.num("constants.alpha", c.alpha);
    }
    art.record("windows", report.steps.len());
    art.record("iterations", report.total_iterations());
    art.num("max_alpha", report.max_alpha());
    art.num("max_ratio", report.max_ratio());
    art.num("residual", report.residual);
    art.record("regular", report.regular);
}

/// Records a stagnation with its partial solution before handing the error on.
fn solve_recording(
    art: &mut Artifacts,
    p: &TransportProblem,
    pc: &PicardConfig,
) -> Result<SolveReport, CliError> {
    match transport::solve(p, pc) {
        Ok(r) => Ok(r),
        Err(e) => {
            let msg = e.to_string();
            if let TransportError::StepStagnation {
                t_reached,
                blowup_estimate,
                partial,
            } = &e
            {
                art.num("t_reached", *t_reached);
                art.num("blowup_estimate", *blowup_estimate);
                if let Some(y) = partial {
                    art.table("partial", cyl_table(y, &["value"], &[y.values()]), true);
                }
                return Err(CliError::NoConvergence(msg));
            }
            Err(e.into())
        }
    }
}

fn transport_solve(cfg: &RunConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let n = cfg.usize("n")?;
    let p = transport_problem(cfg, cfg.f64("T")?, n)?;
    let pc = picard_config(cfg)?;
    record_grid(art, &p);
    let report = solve_recording(art, &p, &pc)?;
    record_windows(art, &report);
    let y = &report.solution;
    let mut summary = format!(
        "transport-solve: N={n} T={} windows={} residual={:.3e}",
        p.t_final(),
        report.steps.len(),
        report.residual
    );
    match cfg.opt("exact") {
        Some(text) => {
            let (sup, err) = exact_error(y, text)?;
            art.num("sup_error", sup);
            art.table(
                "solution",
                cyl_table(y, &["value", "error"], &[y.values(), &err]),
                true,
            );
            summary.push_str(&format!(" sup_error={sup:.6e}"));
        }
        None => art.table("solution", cyl_table(y, &["value"], &[y.values()]), true),
    }
    if !report.regular {
        return Err(CliError::Regularity(
            "the linearized equation at the solution was not solved".into(),
        ));
    }
    Ok(summary)
}

fn transport_sensitivity(cfg: &RunConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let n = cfg.usize("n")?;
    let p = transport_problem(cfg, cfg.f64("T")?, n)?;
    let pc = picard_config(cfg)?;
    let eps = cfg.f64("eps")?;
    record_grid(art, &p);
    let direction = |data: &str, phi: &str| -> Result<TransportDirection, CliError> {
        let d = DataSource::parse(data)?.sample("eta", 0.0, 1.0, n, true)?;
        Ok(TransportDirection::parse(d, phi)?)
    };
    let h1 = direction(cfg.raw("dy0"), cfg.raw("dphi"))?;
    let rep = sensitivity::transport_check(&p, &pc, &h1, eps)?;
    let shape = CylFn::zeros(p.t_final(), p.nt(), p.ntheta())?;
    art.table(
        "derivative",
        cyl_table(&shape, &["fd", "variational"], &[&rep.fd, &rep.variational]),
        true,
    );
    art.num("eps", eps);
    art.num("abs_error", rep.comparison.abs_error);
    art.num("reference_norm", rep.comparison.reference_norm);
    art.num("relative_error", rep.comparison.relative);
    art.record(
        "order",
        rep.order
            .map(|o| Cell::Num(o).to_string())
            .unwrap_or_default(),
    );
    let mut summary = format!(
        "transport-sensitivity: relative_error={:.3e} order={}",
        rep.comparison.relative,
        rep.order.map_or("n/a".into(), |o| format!("{o:.3}"))
    );
    if cfg.opt("dy0-2").is_some() || cfg.opt("dphi-2").is_some() {
        let h2 = direction(
            cfg.opt("dy0-2").unwrap_or("0"),
            cfg.opt("dphi-2").unwrap_or("0"),
        )?;
        let second: SecondVariation =
            sensitivity::transport_second_variation(&p, &pc, &h1, &h2, eps)?;
        let analytic = second
            .analytic
            .clone()
            .unwrap_or_else(|| vec![f64::NAN; second.mixed.len()]);
        art.table(
            "second_variation",
            cyl_table(&shape, &["mixed", "analytic"], &[&second.mixed, &analytic]),
            true,
        );
        art.record("swap_symmetric", second.swap_symmetric);
        if let Some(c) = second.comparison {
            art.num("second.relative_error", c.relative);
            summary.push_str(&format!(" second_relative_error={:.3e}", c.relative));
        }
    }
    Ok(summary)
}

fn ivp_problem(cfg: &RunConfig) -> Result<(ImplicitIvp, IvpOptions), CliError> {
    let p = ImplicitIvp::parse(cfg.f64("eta")?, cfg.raw("phi"), cfg.usize("steps")?)?;
    let opts = IvpOptions {
        slope_guess: cfg.f64("slope-guess")?,
        regularity_threshold: cfg.f64("threshold")?,
    };
    Ok((p, opts))
}

fn ivp(cfg: &RunConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let (p, opts) = ivp_problem(cfg)?;
    let sol = implicit_ode::integrate(&p, &opts)?;
    let mut t = Table::new(&["s", "y", "slope", "p2", "p3"]);
    for i in 0..=sol.y.n() {
        t.push(vec![
            sol.y.node(i).into(),
            sol.y.values()[i].into(),
            sol.slope.values()[i].into(),
            sol.trace.p2.values()[i].into(),
            sol.trace.p3.values()[i].into(),
        ]);
    }
    art.table("trajectory", t, true);
    art.num("min_abs_p3", sol.trace.min_abs_p3);
    art.num("argmin", sol.trace.argmin);
    art.num("residual", sol.residual);
    art.record("regular", sol.trace.regular);
    if !sol.trace.regular {
        return Err(CliError::Regularity(format!(
            "min |p3| = {:e} at s = {}",
            sol.trace.min_abs_p3, sol.trace.argmin
        )));
    }
    Ok(format!(
        "ivp: steps={} y(1)={:.12} min_abs_p3={:.3e}",
        p.steps(),
        sol.y.values()[sol.y.n()],
        sol.trace.min_abs_p3
    ))
}

fn derivative_table(
    art: &mut Artifacts,
    rep: &sensitivity::DerivReport,
    nodes: impl Fn(usize) -> f64,
) {
    let mut t = Table::new(&["s", "fd", "variational"]);
    for i in 0..rep.fd.len() {
        t.push(vec![
            nodes(i).into(),
            rep.fd[i].into(),
            rep.variational[i].into(),
        ]);
    }
    art.table("derivative", t, true);
    art.num("eps", rep.eps);
    art.num("abs_error", rep.comparison.abs_error);
    art.num("relative_error", rep.comparison.relative);
    art.record(
        "order",
        rep.order
            .map(|o| Cell::Num(o).to_string())
            .unwrap_or_default(),
    );
}

fn ivp_sensitivity(cfg: &RunConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let (p, opts) = ivp_problem(cfg)?;
    let h = Direction {
        data: cfg.f64("d-eta")?,
        phi: Expression::parse(cfg.raw("dphi"), &solmap_core::jet::VARS)?,
    };
    let rep = sensitivity::ivp_check(&p, &opts, &h, cfg.f64("eps")?)?;
    let n = p.steps();
    derivative_table(art, &rep, |i| i as f64 / n as f64);
    Ok(format!(
        "ivp-sensitivity: relative_error={:.3e}",
        rep.comparison.relative
    ))
}

fn bvp_setup(cfg: &RunConfig) -> Result<(BvProblem, BvpOptions), CliError> {
    let p = BvProblem::parse(
        cfg.f64("eta0")?,
        cfg.f64("eta1")?,
        cfg.raw("phi"),
        cfg.usize("n")?,
    )?;
    let opts = BvpOptions {
        tolerance: cfg.f64("tol")?,
        max_steps: cfg.usize("max-steps")?,
        max_halvings: cfg.usize("max-halvings")?,
        singular_threshold: cfg.f64("threshold")?,
    };
    Ok((p, opts))
}

fn bvp_solve(cfg: &RunConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let (p, opts) = bvp_setup(cfg)?;
    let sol = bvp::newton_solve(&p, None, &opts)?;
    let mut t = Table::new(&["s", "y"]);
    for i in 0..=sol.y.n() {
        t.push(vec![sol.y.node(i).into(), sol.y.values()[i].into()]);
    }
    art.table("solution", t, true);
    let mut h = Table::new(&["step", "residual"]);
    for (i, r) in sol.report.residuals.iter().enumerate() {
        h.push(vec![i.into(), (*r).into()]);
    }
    art.table("newton", h, false);
    let r = &sol.report;
    art.record("grid.interior", p.interior());
    art.num("grid.h", p.h());
    art.record("steps", r.steps);
    art.record("halvings", r.halvings);
    art.num("sigma_min", r.sigma_min);
    art.num("operator_norm", r.operator_norm);
    art.record("regular", r.regular);
    if let Some(c) = r.quadratic_constant() {
        art.num("quadratic_constant", c);
    }
    if !r.regular {
        return Err(CliError::Regularity(format!(
            "sigma_min = {:e} against operator norm {:e}",
            r.sigma_min, r.operator_norm
        )));
    }
    Ok(format!(
        "bvp: interior={} steps={} sigma_min={:.3e}",
        p.interior(),
        r.steps,
        r.sigma_min
    ))
}

fn resonance_scan(cfg: &RunConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let interior = cfg.usize("n")?;
    let scan = bvp::resonance_scan_with(
        cfg.f64("rmin")?,
        cfg.f64("rmax")?,
        cfg.usize("steps")?,
        interior,
        |rs, f| rs.par_iter().map(|r| f(*r)).collect(),
    )?;
    let mut t = Table::new(&["r", "sigma_min"]);
    for p in &scan {
        t.push(vec![p.r.into(), p.sigma_min.into()]);
    }
    art.table("scan", t, true);
    let minima = bvp::local_minima(&scan);
    let mut m = Table::new(&["r", "sigma_min"]);
    for p in &minima {
        m.push(vec![p.r.into(), p.sigma_min.into()]);
    }
    art.table("minima", m, false);
    art.record("grid.interior", interior);
    art.record(
        "minima",
        minima
            .iter()
            .map(|p| Cell::Num(p.r).to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    let mut summary = format!(
        "bvp-resonance-scan: {} points, minima at [{}]",
        scan.len(),
        minima
            .iter()
            .map(|p| format!("{:.3}", p.r))
            .collect::<Vec<_>>()
            .join(", ")
    );
    if let Some(v) = cfg.opt("v") {
        let mode: u32 = cfg
            .raw("mode")
            .trim()
            .parse()
            .map_err(|_| CliError::Usage("--mode expects a positive integer".into()))?;
        let v = DataSource::parse(v)?.sample("s", 0.0, 1.0, interior + 1, false)?;
        let o = bvp::range_orthogonality_check(mode, &v, cfg.f64("threshold")?)?;
        art.num("solvability.residual", o.residual);
        art.num("solvability.integral", o.integral);
        art.record("solvability.solvable", o.solvable);
        summary.push_str(&format!(" solvable={}", o.solvable));
    }
    Ok(summary)
}

fn radius_text(r: Radius) -> String {
    match r {
        Radius::Finite(x) => Cell::Num(x).to_string(),
        Radius::AtLeast(x) => format!(">={}", Cell::Num(x)),
    }
}

fn holo_solve(cfg: &RunConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let n = cfg.usize("n")?;
    let eps = cfg.f64("epsilon")?;
    let order = cfg.usize("order")?;
    let y = holo::taylor_solve(Complex64::new(eps, 0.0), &holo::blowup_family(n), order)?;
    let mut t = Table::new(&["index", "re", "im"]);
    for (i, c) in y.coeffs().iter().enumerate() {
        t.push(vec![i.into(), c.re.into(), c.im.into()]);
    }
    art.table("coefficients", t, false);
    let demo = holo::empty_interior_demo(eps, n, order)?;
    art.num("analytic_radius", demo.analytic);
    art.record("blows_up_inside", demo.blows_up_inside);
    let est = match demo.estimate {
        Some(r) => {
            art.record("radius_estimate", radius_text(r));
            radius_text(r)
        }
        None => {
            art.record("radius_estimate", "inf");
            "inf".into()
        }
    };
    Ok(format!(
        "holo: n={n} epsilon={eps} radius_estimate={est} analytic={:.6}",
        demo.analytic
    ))
}

fn holo_counterexample(cfg: &RunConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let run = holo::counterexample_run(
        cfg.f64("r")?,
        cfg.f64("s")?,
        cfg.usize("n-max")?,
        cfg.usize("order")?,
    )?;
    let mut d = Table::new(&["n", "distance"]);
    for (n, v) in &run.distances {
        d.push(vec![(*n).into(), (*v).into()]);
    }
    art.table("distances", d, true);
    let mut r = Table::new(&["n", "ratio"]);
    for (n, v) in &run.halving_ratios {
        r.push(vec![(*n).into(), (*v).into()]);
    }
    art.table("ratios", r, false);
    art.record("limit_radius", radius_text(run.radius));
    Ok(format!(
        "holo-counterexample: limit radius {}",
        radius_text(run.radius)
    ))
}

fn harness_consistency(cfg: &RunConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let ladder = LevelLadder::new(cfg.f64_list("ladder")?)?;
    let top = *ladder.horizons().last().expect("ladder is non-empty");
    let n = cfg.usize("n")?;
    let p = transport_problem(cfg, top, n)?;
    let pc = picard_config(cfg)?;
    let trials = cfg.usize("trials")?;
    let seed = cfg.u64("seed")?;
    record_grid(art, &p);
    let report = harness::consistency_check(&p, &ladder, &pc);
    let mut t = Table::new(&["lower", "upper", "error"]);
    for pe in &report.pairs {
        t.push(vec![pe.lower.into(), pe.upper.into(), pe.error.into()]);
    }
    art.table("restriction", t, false);
    art.num("max_restriction_error", report.max_error());

    let opts = LinearOptions {
        quadrature: pc.quadrature,
        ..LinearOptions::default()
    };
    let mut b = Table::new(&["T", "trials", "max_residual", "max_kernel"]);
    let mut worst = 0.0f64;
    for (i, (t_level, y)) in report.solutions.iter().enumerate() {
        let a = y.compose(&p.nonlinearity().d_xi)?;
        let probe = harness::bijectivity_probe(&a, trials, seed.wrapping_add(i as u64), &opts)?;
        worst = worst.max(probe.max_residual);
        b.push(vec![
            (*t_level).into(),
            trials.into(),
            probe.max_residual.into(),
            probe.max_kernel.into(),
        ]);
    }
    art.table("bijectivity", b, false);
    art.num("max_bijectivity_residual", worst);
    if trials == 0 {
        art.record("warning", "no bijectivity trials were run");
    }

    let zeros = CylFn::zeros(top, p.nt(), p.ntheta())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = harness::random_trig(&mut rng, top, p.nt(), p.ntheta(), 3)?;
    let distance = transport::uniqueness_probe(&p, &pc, &zeros, &start)?;
    art.num("uniqueness_distance", distance);

    if let Some((t_level, msg)) = report.failures.first() {
        return Err(CliError::NoConvergence(format!("level T={t_level}: {msg}")));
    }
    Ok(format!(
        "harness-consistency: max_restriction_error={:.3e} max_bijectivity_residual={worst:.3e} uniqueness_distance={distance:.3e}",
        report.max_error()
    ))
}

fn harness_exp(cfg: &RunConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let levels = cfg.usize("levels")?;
    if levels == 0 {
        return Err(CliError::Usage("--levels must be positive".into()));
    }
    let l = levels as f64;
    let x = DataSource::parse(cfg.raw("x"))?.sample("s", -l, l, cfg.usize("cells")?, false)?;
    let table = harness::exp_counterexample(&x, levels)?;
    let mut t = Table::new(&[
        "level",
        "min",
        "success",
        "log_sup",
        "multiplier_min",
        "multiplier_max",
    ]);
    for lv in &table {
        t.push(vec![
            lv.level.into(),
            lv.min.into(),
            lv.success.into(),
            lv.log_sup.into(),
            lv.multiplier.0.into(),
            lv.multiplier.1.into(),
        ]);
    }
    art.table("verdicts", t, false);
    let verdicts: Vec<String> = table
        .iter()
        .map(|lv| format!("{}:{}", lv.level, if lv.success { "ok" } else { "fail" }))
        .collect();
    art.record("verdicts", verdicts.join(","));
    let summary = format!("harness-exp: {}", verdicts.join(" "));
    if let Some(first) = table.iter().find(|lv| !lv.success) {
        art.record("first_failure", first.level);
        return Err(CliError::Regularity(format!(
            "{summary}; log x fails on level {} (min x = {})",
            first.level, first.min
        )));
    }
    Ok(summary)
}

fn convergence_study(cfg: &RunConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let ns = cfg.usize_list("n-list")?;
    let t_final = cfg.f64("T")?;
    let pc = picard_config(cfg)?;
    let exact = cfg.raw("exact");
    let errors: Vec<Result<f64, CliError>> = ns
        .par_iter()
        .map(|&n| {
            let p = transport_problem(cfg, t_final, n)?;
            let y = transport::solve(&p, &pc)?.solution;
            Ok(exact_error(&y, exact)?.0)
        })
        .collect();
    let errors: Vec<f64> = errors.into_iter().collect::<Result<_, _>>()?;
    let mut t = Table::new(&["n", "sup_error", "ratio", "order"]);
    let mut orders = Vec::new();
    for i in 0..ns.len() {
        let (ratio, order) = if i == 0 {
            (None, None)
        } else {
            let ratio = errors[i - 1] / errors[i];
            let order = ratio.log2() / (ns[i] as f64 / ns[i - 1] as f64).log2();
            orders.push(order);
            (Some(ratio), Some(order))
        };
        t.push(vec![
            ns[i].into(),
            errors[i].into(),
            ratio.into(),
            order.into(),
        ]);
    }
    art.table("convergence", t, true);
    art.record(
        "orders",
        orders
            .iter()
            .map(|o| Cell::Num(*o).to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    Ok(format!(
        "convergence-study: errors [{}]",
        errors
            .iter()
            .map(|e| format!("{e:.3e}"))
            .collect::<Vec<_>>()
            .join(", ")
    ))
}
