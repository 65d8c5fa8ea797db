//! Checks across a ladder of levels: restriction consistency between
//! horizons, bijectivity of the linearized transport operator, regularity
//! under grid refinement, and the logarithm example whose domain shrinks
//! with the level.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{CylFn, GridError, GridFn1D, Level};
use crate::transport::{
    char_integral, linearized_solve, linearized_solve_from, solve, LinearOptions, PicardConfig,
    TransportError, TransportProblem,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid ladder: {0}")]
    Ladder(String),
}

/// Horizons `T₁ < T₂ < …` on a shared angular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLadder {
    horizons: Vec<f64>,
}

impl LevelLadder {
    pub fn new(horizons: Vec<f64>) -> Result<Self, HarnessError> {
        if horizons.is_empty() {
            return Err(HarnessError::Ladder("no levels".into()));
        }
        if horizons.windows(2).any(|w| !(w[0] < w[1])) || !(horizons[0] > 0.0) {
            return Err(HarnessError::Ladder(
                "horizons must be positive and increasing".into(),
            ));
        }
        Ok(LevelLadder { horizons })
    }

    /// `Tᵢ = i·T₁` for `i = 1..=levels`.
    pub fn uniform(t1: f64, levels: usize) -> Result<Self, HarnessError> {
        LevelLadder::new((1..=levels).map(|i| i as f64 * t1).collect())
    }

    pub fn horizons(&self) -> &[f64] {
        &self.horizons
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairError {
    pub lower: f64,
    pub upper: f64,
    /// `‖restrict(y_upper, T_lower) − y_lower‖`.
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub pairs: Vec<PairError>,
    /// Levels whose solve failed, with the message.
    pub failures: Vec<(f64, String)>,
    /// Solutions of the levels that succeeded, by horizon.
    pub solutions: Vec<(f64, CylFn)>,
}

impl ConsistencyReport {
    pub fn max_error(&self) -> f64 {
        self.pairs.iter().map(|p| p.error).fold(0.0, f64::max)
    }
}

/// Solves `problem` at every horizon of the ladder and compares each pair
/// `Tᵢ < Tⱼ` after restriction.
pub fn consistency_check(
    problem: &TransportProblem,
    ladder: &LevelLadder,
    cfg: &PicardConfig,
) -> ConsistencyReport {
    let solved: Vec<(f64, Result<CylFn, String>)> = ladder
        .horizons
        .par_iter()
        .map(|&t| {
            let run = problem
                .with_horizon(t)
                .and_then(|p| solve(&p, cfg))
                .map(|r| r.solution)
                .map_err(|e| e.to_string());
            (t, run)
        })
        .collect();
    let mut pairs = Vec::new();
    let mut failures = Vec::new();
    for (i, (ti, yi)) in solved.iter().enumerate() {
        let Ok(yi) = yi else {
            failures.push((*ti, yi.clone().unwrap_err()));
            continue;
        };
        for (tj, yj) in &solved[i + 1..] {
            let Ok(yj) = yj else { continue };
            let error = yj
                .restrict(*ti)
                .and_then(|r| r.max_abs_diff(yi))
                .unwrap_or(f64::INFINITY);
            pairs.push(PairError {
                lower: *ti,
                upper: *tj,
                error,
            });
        }
    }
    let solutions = solved
        .into_iter()
        .filter_map(|(t, y)| y.ok().map(|y| (t, y)))
        .collect();
    ConsistencyReport {
        pairs,
        failures,
        solutions,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BijectivityReport {
    pub trials: usize,
    /// `max ‖u − v − 𝓘(0, a·u)‖` over the surjectivity trials.
    pub max_residual: f64,
    /// `max ‖u‖` for `v = 0` started from random iterates.
    pub max_kernel: f64,
    /// Set when no trial was run.
    pub vacuous: bool,
}

/// Random trigonometric polynomial in `η` with polynomial time modulation,
/// coefficients uniform in `[−1, 1]`.
pub fn random_trig(
    rng: &mut ChaCha8Rng,
    t_final: f64,
    nt: usize,
    n: usize,
    modes: usize,
) -> Result<CylFn, GridError> {
    let coeffs: Vec<[f64; 4]> = (0..=modes)
        .map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..=1.0)))
        .collect();
    CylFn::from_fn(t_final, nt, n, |t, eta| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let x = std::f64::consts::TAU * k as f64 * eta;
                (c[0] + c[1] * t) * x.cos() + (c[2] + c[3] * t * t) * x.sin()
            })
            .sum::<f64>()
            / (1 + modes) as f64
    })
}

/// Solves `u = v + 𝓘(0, a·u)` for `trials` random `v` and checks the
/// residual, then solves with `v = 0` from random starts.
pub fn bijectivity_probe(
    a: &CylFn,
    trials: usize,
    seed: u64,
    opts: &LinearOptions,
) -> Result<BijectivityReport, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (t, nt, n) = (a.t_final(), a.nt(), a.ntheta());
    let mut data = Vec::with_capacity(trials);
    for _ in 0..trials {
        let v = random_trig(&mut rng, t, nt, n, 4)?;
        let start = random_trig(&mut rng, t, nt, n, 3)?;
        data.push((v, start));
    }
    let zero = CylFn::zeros(t, nt, n)?;
    let results: Vec<Result<(f64, f64), HarnessError>> = data
        .par_iter()
        .map(|(v, start)| {
            let u = linearized_solve(a, v, opts)?.u;
            let au = char_integral(0, &a.mul(&u)?, opts.quadrature)?;
            let residual = u.sub(v)?.sub(&au)?.sup_norm();
            let k = linearized_solve_from(a, &zero, opts, Some(start))?
                .u
                .sup_norm();
            Ok((residual, k))
        })
        .collect();
    let mut report = BijectivityReport {
        trials,
        max_residual: 0.0,
        max_kernel: 0.0,
        vacuous: trials == 0,
    };
    for r in results {
        let (res, k) = r?;
        report.max_residual = report.max_residual.max(res);
        report.max_kernel = report.max_kernel.max(k);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapRow {
    pub ntheta: usize,
    /// `‖y‖_{C^{0,i}}` for `i = 0..=max_level`.
    pub norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapTable {
    pub rows: Vec<BootstrapRow>,
}

impl BootstrapTable {
    /// `|n(N) − n(2N)| / |n(2N) − n(4N)|` for level `i` over consecutive row
    /// triples; `None` where the later difference vanishes.
    pub fn shrink_factors(&self, level: usize) -> Vec<Option<f64>> {
        self.rows
            .windows(3)
            .map(|w| {
                let d1 = (w[0].norms[level] - w[1].norms[level]).abs();
                let d2 = (w[1].norms[level] - w[2].norms[level]).abs();
                (d2 > 0.0).then(|| d1 / d2)
            })
            .collect()
    }
}

/// Solves on `N, 2N, …` (`refinements` in total) angular grids, sampling the
/// initial data from `y0` and tabulating `C^{0,i}` norms at the horizon's
/// solution.
pub fn bootstrap_check(
    y0: impl Fn(f64) -> f64 + Sync,
    phi: &crate::expr::Expression,
    t_final: f64,
    base_n: usize,
    refinements: usize,
    max_level: usize,
    cfg: &PicardConfig,
) -> Result<BootstrapTable, HarnessError> {
    if max_level > 4 {
        return Err(HarnessError::Ladder(
            "levels above 4 are not tabulated".into(),
        ));
    }
    let sizes: Vec<usize> = (0..refinements).map(|k| base_n << k).collect();
    let rows: Vec<Result<BootstrapRow, HarnessError>> = sizes
        .par_iter()
        .map(|&n| {
            let data = GridFn1D::from_fn(0.0, 1.0, n, &y0)?;
            let p = TransportProblem::new(data, phi, t_final)?;
            let y = solve(&p, cfg)?.solution;
            let norms = (0..=max_level)
                .map(|i| y.c0i_norm(Level(i), cfg.stencil))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(BootstrapRow { ntheta: n, norms })
        })
        .collect();
    Ok(BootstrapTable {
        rows: rows.into_iter().collect::<Result<_, _>>()?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpLevel {
    pub level: usize,
    /// `min x` over the nodes of `[−i, i]`.
    pub min: f64,
    pub success: bool,
    /// `sup |log x|` on `[−i, i]` when it exists.
    pub log_sup: Option<f64>,
    /// The linearization multiplier `exp ∘ y = x`, its range on `[−i, i]`.
    pub multiplier: (f64, f64),
}

/// For each level `i = 1..=levels`, whether `y = log x` exists on `[−i, i]`.
pub fn exp_counterexample(x: &GridFn1D, levels: usize) -> Result<Vec<ExpLevel>, HarnessError> {
    let need = levels as f64;
    if x.a() > -need + 1e-12 || x.b() < need - 1e-12 {
        return Err(HarnessError::Ladder(format!(
            "x lives on [{}, {}], need [−{levels}, {levels}]",
            x.a(),
            x.b()
        )));
    }
    let tol = 1e-9 * x.h();
    Ok((1..=levels)
        .map(|i| {
            let r = i as f64;
            let vals: Vec<f64> = (0..=x.n())
                .filter(|&k| x.node(k).abs() <= r + tol)
                .map(|k| x.values()[k])
                .collect();
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let success = min > 0.0;
            let log_sup = success.then(|| vals.iter().map(|v| v.ln().abs()).fold(0.0, f64::max));
            ExpLevel {
                level: i,
                min,
                success,
                log_sup,
                multiplier: (min, max),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::transport::VARS;
    use std::f64::consts::{PI, TAU};

    fn half(n: usize) -> GridFn1D {
        GridFn1D::constant(0.0, 1.0, n, 0.5).unwrap()
    }

    #[test]
    fn consistency_examples() {
        let cfg = PicardConfig::default();
        let y0 = GridFn1D::from_fn(0.0, 1.0, 32, |x| (TAU * x).sin()).unwrap();
        let zero = TransportProblem::parse(y0, "0", 0.5).unwrap();
        let ladder = LevelLadder::new(vec![0.25, 0.5, 1.0]).unwrap();
        let r = consistency_check(&zero, &ladder, &cfg);
        assert_eq!(r.pairs.len(), 3);
        assert_eq!(r.max_error(), 0.0);
        let single = LevelLadder::new(vec![0.5]).unwrap();
        assert!(consistency_check(&zero, &single, &cfg).pairs.is_empty());
        assert!(LevelLadder::new(vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn quadratic_ladder_is_consistent() {
        let p = TransportProblem::parse(half(128), "xi^2", 0.5).unwrap();
        let ladder = LevelLadder::new(vec![0.25, 0.5, 0.75]).unwrap();
        let r = consistency_check(&p, &ladder, &PicardConfig::default());
        assert!(r.failures.is_empty());
        assert!(r.max_error() <= 1e-10, "{}", r.max_error());
    }

    #[test]
    fn bijectivity_examples() {
        let opts = LinearOptions::default();
        let a = CylFn::zeros(0.5, 16, 32).unwrap();
        let r = bijectivity_probe(&a, 3, 7, &opts).unwrap();
        assert_eq!(r.max_residual, 0.0);
        assert_eq!(r.max_kernel, 0.0);
        assert!(bijectivity_probe(&a, 0, 7, &opts).unwrap().vacuous);
        let a = CylFn::from_fn(1.0, 64, 64, |t, _| 2.0 / (2.0 - t)).unwrap();
        let r = bijectivity_probe(&a, 4, 11, &opts).unwrap();
        assert!(r.max_residual <= 1e-9 && r.max_kernel <= 1e-12, "{r:?}");
    }

    #[test]
    fn random_trig_is_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(
            random_trig(&mut a, 1.0, 8, 16, 3).unwrap(),
            random_trig(&mut b, 1.0, 8, 16, 3).unwrap()
        );
    }

    #[test]
    fn bootstrap_single_mode_limit() {
        // φ = ξ: y = e^t sin(2π(η − t)), so ‖y(T)‖_{C^{0,1}} → 2π e^T
        let phi = Expression::parse("xi", &VARS).unwrap();
        let cfg = PicardConfig {
            step_policy: crate::transport::StepPolicy::FixedSteps(8),
            ..PicardConfig::default()
        };
        let t = 0.5;
        let table = bootstrap_check(|x| (TAU * x).sin(), &phi, t, 64, 3, 1, &cfg).unwrap();
        let last = table.rows.last().unwrap();
        assert!((last.norms[1] - TAU * t.exp()).abs() < 1e-3 * TAU * t.exp());
        let flat = Expression::parse("0", &VARS).unwrap();
        let table = bootstrap_check(|x| (PI * 2.0 * x).cos(), &flat, t, 32, 3, 2, &cfg).unwrap();
        for row in &table.rows {
            assert!((row.norms[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exp_examples() {
        let x = GridFn1D::from_fn(-2.0, 2.0, 400, |s| s + 1.5).unwrap();
        let v = exp_counterexample(&x, 2).unwrap();
        assert!(v[0].success && (v[0].min - 0.5).abs() < 1e-12);
        assert!(!v[1].success && (v[1].min + 0.5).abs() < 1e-12);
        let one = GridFn1D::constant(-3.0, 3.0, 60, 1.0).unwrap();
        assert!(exp_counterexample(&one, 3)
            .unwrap()
            .iter()
            .all(|l| l.success && l.log_sup == Some(0.0)));
        let neg = GridFn1D::constant(-3.0, 3.0, 60, -1.0).unwrap();
        assert!(exp_counterexample(&neg, 3)
            .unwrap()
            .iter()
            .all(|l| !l.success));
    }
}
