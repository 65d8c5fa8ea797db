//! Smooth cutoff equal to 1 on `[-1, 1]` and 0 outside `(-2, 2)`.

use std::sync::OnceLock;

use crate::quad::gauss_legendre;

const PANELS: usize = 16;
const ORDER: usize = 20;

fn bump(s: f64) -> f64 {
    if s > 1.0 && s < 2.0 {
        (1.0 / ((s - 1.0) * (s - 2.0))).exp()
    } else {
        0.0
    }
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// `∫_1^x` of the bump, composite Gauss–Legendre.
fn bump_integral(x: f64) -> f64 {
    let (nodes, weights) = rule();
    let x = x.clamp(1.0, 2.0);
    let h = (x - 1.0) / PANELS as f64;
    let mut total = 0.0;
    for p in 0..PANELS {
        let mid = 1.0 + (p as f64 + 0.5) * h;
        for (u, w) in nodes.iter().zip(weights) {
            total += 0.5 * h * w * bump(mid + 0.5 * h * u);
        }
    }
    total
}

/// Total mass of the bump on `(1, 2)`.
pub fn bump_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| bump_integral(2.0))
}

/// The cutoff `χ(s)`.
pub fn cutoff_chi(s: f64) -> f64 {
    let a = s.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        (1.0 - bump_integral(a) / bump_mass()).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, Quadrature};

    #[test]
    fn plateau_and_tails() {
        assert_eq!(cutoff_chi(3.0), 0.0);
        assert_eq!(cutoff_chi(-3.0), 0.0);
        assert_eq!(cutoff_chi(0.0), 1.0);
        assert_eq!(cutoff_chi(-1.0), 1.0);
        assert!((cutoff_chi(1.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mass_matches_independent_quadrature() {
        // mass of σ ↦ bump(−σ) over (−∞, 0], by fine Simpson on [−2, −1]
        let n = 20_000;
        let h = 1.0 / n as f64;
        let f: Vec<f64> = (0..=n).map(|i| bump(-(-2.0 + i as f64 * h))).collect();
        let oracle = integrate(&f, h, Quadrature::Simpson);
        assert!((oracle / bump_mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn monotone_on_transition() {
        let mut last = 1.0;
        for i in 0..=200 {
            let v = cutoff_chi(1.0 + i as f64 / 200.0);
            assert!(v <= last + 1e-15);
            last = v;
        }
        assert!(last.abs() < 1e-15);
    }
}
