//! Cumulative quadrature on uniformly spaced samples.

/// Rule used for running integrals along a sample sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Composite trapezoid, second order. Running integrals are exactly
    /// additive: the integral from `a` to `c` equals `a..b` plus `b..c`.
    #[default]
    Trapezoid,
    /// Composite Simpson with a 3/8 tail for odd counts, fourth order.
    Simpson,
}

/// Running integrals `out[k] = ∫_{x_0}^{x_k} f` for samples `f` spaced `h`.
pub fn cumulative(f: &[f64], h: f64, rule: Quadrature) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    cumulative_into(f, h, rule, &mut out);
    out
}

/// As [`cumulative`], writing into `out` (which must have `f.len()` slots).
pub fn cumulative_into(f: &[f64], h: f64, rule: Quadrature, out: &mut [f64]) {
    debug_assert_eq!(f.len(), out.len());
    if f.is_empty() {
        return;
    }
    out[0] = 0.0;
    match rule {
        Quadrature::Trapezoid => {
            let half = 0.5 * h;
            for k in 1..f.len() {
                out[k] = out[k - 1] + half * (f[k - 1] + f[k]);
            }
        }
        Quadrature::Simpson => simpson_running(f, h, out),
    }
}

fn simpson_running(f: &[f64], h: f64, out: &mut [f64]) {
    let n = f.len();
    // even[j] = Simpson integral over [x_0, x_{2j}]
    let mut even = Vec::with_capacity(n / 2 + 1);
    even.push(0.0);
    let mut j = 2;
    while j < n {
        let last = *even.last().unwrap();
        even.push(last + h / 3.0 * (f[j - 2] + 4.0 * f[j - 1] + f[j]));
        j += 2;
    }
    for k in 1..n {
        out[k] = if k % 2 == 0 {
            even[k / 2]
        } else if k >= 3 {
            let s = k - 3;
            even[s / 2] + 3.0 * h / 8.0 * (f[s] + 3.0 * f[s + 1] + 3.0 * f[s + 2] + f[s + 3])
        } else if n >= 3 {
            // quadratic through x_0, x_1, x_2 integrated over the first cell
            h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2])
        } else {
            0.5 * h * (f[0] + f[1])
        };
    }
}

/// Integral over the whole sample range.
pub fn integrate(f: &[f64], h: f64, rule: Quadrature) -> f64 {
    cumulative(f, h, rule).last().copied().unwrap_or(0.0)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
