use crate::expr::Expression;

use super::{eval3, Nonlinearity, PicardConfig, TransportError, TransportProblem};

/// Contraction constants of one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Bound on the data of the window in the `C^{0,1}` norm.
    pub data_bound: f64,
    /// Half-width of the sampled ξ range.
    pub xi_window: f64,
    pub m0: f64,
    pub m1: f64,
    pub m: f64,
    pub r: f64,
    pub l: f64,
    pub alpha: f64,
}

/// Raw suprema over a sampled box, before the safety factor.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Suprema {
    pub at_zero: f64,
    pub d_eta: f64,
    pub d_xi: f64,
    pub d_eta_xi: f64,
    pub d_xi_xi: f64,
}

impl Suprema {
    pub fn m0(&self, safety: f64) -> f64 {
        safety * self.at_zero.max(self.d_xi)
    }

    pub fn m1(&self, safety: f64) -> f64 {
        safety * self.at_zero.max(self.d_eta).max(self.d_xi)
    }

    pub fn m(&self, safety: f64) -> f64 {
        safety * self.d_xi.max(self.d_eta_xi).max(self.d_xi_xi)
    }
}

/// `count` uniform samples of `[-half_width, half_width]`, odd so that 0 is
/// one of them.
pub(crate) fn xi_samples(half_width: f64, count: usize) -> Vec<f64> {
    let count = count.max(3) | 1;
    let mid = (count / 2) as f64;
    (0..count)
        .map(|i| half_width * (i as f64 - mid) / mid)
        .collect()
}

/// Sup of `|e|` over the product of the sample sets, skipping coordinates
/// that do not occur in `e`.
pub(crate) fn sup_sampled(
    e: &Expression,
    times: &[f64],
    etas: &[f64],
    xis: &[f64],
) -> Result<f64, TransportError> {
    if e.is_zero() {
        return Ok(0.0);
    }
    let zero = [0.0];
    let pick = |name: &str, s: &'_ [f64]| -> Vec<f64> {
        if e.uses(name) {
            s.to_vec()
        } else {
            zero.to_vec()
        }
    };
    let (ts, es, xs) = (pick("t", times), pick("eta", etas), pick("xi", xis));
    let mut best = 0.0_f64;
    for &t in &ts {
        for &eta in &es {
            for &xi in &xs {
                best = best.max(eval3(e, t, eta, xi)?.abs());
            }
        }
    }
    Ok(best)
}

pub(crate) fn suprema(
    phi: &Nonlinearity,
    times: &[f64],
    etas: &[f64],
    xis: &[f64],
) -> Result<Suprema, TransportError> {
    Ok(Suprema {
        at_zero: sup_sampled(&phi.value, times, etas, &[0.0])?,
        d_eta: sup_sampled(&phi.d_eta, times, etas, xis)?,
        d_xi: sup_sampled(&phi.d_xi, times, etas, xis)?,
        d_eta_xi: sup_sampled(&phi.d_eta_xi, times, etas, xis)?,
        d_xi_xi: sup_sampled(&phi.d_xi_xi, times, etas, xis)?,
    })
}

impl Constants {
    pub(crate) fn from_suprema(
        s: &Suprema,
        safety: f64,
        data_bound: f64,
        xi_window: f64,
        elapsed: f64,
        length: f64,
    ) -> Constants {
        let m = s.m(safety);
        let growth = m * elapsed * (m * elapsed).exp();
        let r = 4.0 * (1.0 + data_bound) * (1.0 + growth);
        let l = if m * r > 0.0 {
            length.min(1.0 / (3.0 * m * r))
        } else {
            length
        };
        Constants {
            data_bound,
            xi_window,
            m0: s.m0(safety),
            m1: s.m1(safety),
            m,
            r,
            l,
            alpha: l * m * (2.0 + r),
        }
    }

    /// Same suprema on a window of a different length.
    pub(crate) fn with_length(&self, length: f64) -> Constants {
        let l = length;
        Constants {
            l,
            alpha: l * self.m * (2.0 + self.r),
            ..*self
        }
    }
}

/// Constants for the window `[t0, t2]`: sampled suprema of `|φ(·,·,0)|` and of
/// the partials over the time nodes of the window, all angular nodes and
/// `[-xi_window, xi_window]`, inflated by the safety factor; then
/// `R = 4(1 + A)(1 + M t₁ e^{M t₁})` with `t₁ = elapsed`,
/// `L = min(t2 − t0, 1/(3MR))` and `α = LM(2 + R)`.
pub fn constants(
    problem: &TransportProblem,
    window: (f64, f64),
    data_bound: f64,
    xi_window: f64,
    elapsed: f64,
    cfg: &PicardConfig,
) -> Result<Constants, TransportError> {
    let (t0, t2) = window;
    let tol = 1e-9 * problem.dt();
    if !(0.0 <= t0 && t0 <= t2 && t2 <= problem.t_final() + tol) {
        return Err(TransportError::Invalid(format!(
            "window [{t0}, {t2}] is not inside [0, {}]",
            problem.t_final()
        )));
    }
    let times: Vec<f64> = (0..=problem.nt())
        .map(|k| k as f64 * problem.dt())
        .filter(|t| *t >= t0 - tol && *t <= t2 + tol)
        .collect();
    let etas = angular_nodes(problem.ntheta());
    let xis = xi_samples(xi_window, cfg.xi_samples);
    let s = suprema(problem.nonlinearity(), &times, &etas, &xis)?;
    Ok(Constants::from_suprema(
        &s,
        cfg.safety,
        data_bound,
        xi_window,
        elapsed,
        t2 - t0,
    ))
}

pub(crate) fn angular_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|m| m as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridFn1D;

    fn problem(phi: &str) -> TransportProblem {
        let y0 = GridFn1D::constant(0.0, 1.0, 32, 0.5).unwrap();
        TransportProblem::parse(y0, phi, 1.0).unwrap()
    }

    #[test]
    fn zero_nonlinearity() {
        let c = constants(
            &problem("0"),
            (0.0, 0.5),
            1.0,
            2.0,
            0.0,
            &PicardConfig::default(),
        )
        .unwrap();
        assert_eq!((c.m0, c.m1, c.m, c.alpha), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(c.l, 0.5);
    }

    #[test]
    fn linear_nonlinearity() {
        for xi in [0.1, 3.0, 40.0] {
            let c = constants(
                &problem("xi"),
                (0.0, 1.0),
                0.0,
                xi,
                0.0,
                &PicardConfig::default(),
            )
            .unwrap();
            assert_eq!(c.m, 1.25);
        }
    }

    #[test]
    fn quadratic_nonlinearity() {
        let c = constants(
            &problem("xi^2"),
            (0.0, 1.0),
            0.5,
            2.0,
            0.0,
            &PicardConfig::default(),
        )
        .unwrap();
        // oracle: dense sampling of |2ξ| and |2| over [-2, 2]
        let dense = (0..=4000)
            .map(|i| -2.0 + i as f64 * 1e-3)
            .map(|x: f64| (2.0 * x).abs().max(2.0))
            .fold(0.0, f64::max);
        assert!((c.m - 1.25 * dense).abs() < 1e-12);
        assert_eq!(c.m, 5.0);
        assert_eq!(c.r, 6.0);
        assert!((c.l - 1.0 / 90.0).abs() < 1e-15);
        assert!(c.alpha <= 0.5);
    }

    #[test]
    fn samples_include_zero_and_ends() {
        let s = xi_samples(2.0, 8);
        assert_eq!(s.len(), 9);
        assert_eq!(s[4], 0.0);
        assert_eq!((s[0], s[8]), (-2.0, 2.0));
    }
}
