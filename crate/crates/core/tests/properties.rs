use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;

use solmap_core::harness::exp_counterexample;
use solmap_core::holo::{linearized_holo_solve, taylor_solve, BiSeries, PowerSeries};
use solmap_core::implicit_ode::{variational_solve, RegularityTrace};
use solmap_core::transport::{linearized_solve, LinearOptions, VARS};
use solmap_core::{CylFn, Expression, GridFn1D, Level, StencilOrder};

fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("t".to_string()),
        Just("eta".to_string()),
        Just("xi".to_string()),
        (-3.0f64..3.0).prop_map(|c| format!("({c:?})")),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(0.3*{a})")),
            inner.clone().prop_map(|a| format!("({a})^2")),
            inner.prop_map(|a| format!("-{a}")),
        ]
    })
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0]
}

fn trig_field(c: [f64; 4], t_final: f64, nt: usize, n: usize) -> CylFn {
    CylFn::from_fn(t_final, nt, n, |t, eta| {
        c[0] + c[1] * (TAU * eta).sin() + c[2] * t * (2.0 * TAU * eta).cos() + c[3] * t * t
    })
    .unwrap()
}

fn coeffs() -> impl Strategy<Value = [f64; 4]> {
    [-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_matches_difference_quotient(text in expr_text(), p in point(), var in 0usize..3) {
        let e = Expression::parse(&text, &VARS).unwrap();
        let d = e.differentiate(VARS[var]).unwrap();
        let h = 1e-5;
        let shifted = |s: f64| {
            let mut q = p;
            q[var] += s;
            e.eval(&q).unwrap()
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        let exact = d.eval(&p).unwrap();
        let scale = 1.0 + exact.abs() + e.eval(&p).unwrap().abs();
        prop_assert!((fd - exact).abs() <= 1e-5 * scale, "{text}: fd {fd} vs {exact}");
    }

    #[test]
    fn printing_round_trips(text in expr_text(), p in point()) {
        let e = Expression::parse(&text, &VARS).unwrap();
        let back = Expression::parse(&e.to_string(), &VARS).unwrap();
        prop_assert_eq!(e.eval(&p).unwrap().to_bits(), back.eval(&p).unwrap().to_bits());
        prop_assert_eq!(back.to_string(), e.to_string());
    }

    #[test]
    fn angular_derivative_is_linear(c1 in coeffs(), c2 in coeffs(), a in -2.0f64..2.0, l in 1usize..3) {
        let f = trig_field(c1, 0.5, 16, 64);
        let g = trig_field(c2, 0.5, 16, 64);
        let lhs = f.axpy(a, &g).unwrap().d_theta(l, StencilOrder::Fourth).unwrap();
        let rhs = f
            .d_theta(l, StencilOrder::Fourth)
            .unwrap()
            .axpy(a, &g.d_theta(l, StencilOrder::Fourth).unwrap())
            .unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-9 * (1.0 + rhs.sup_norm()));
    }

    #[test]
    fn norms_are_seminorms(c1 in coeffs(), c2 in coeffs(), a in -3.0f64..3.0, level in 0usize..3) {
        let f = trig_field(c1, 0.5, 16, 64);
        let g = trig_field(c2, 0.5, 16, 64);
        let norm = |z: &CylFn| z.c0i_norm(Level(level), StencilOrder::Fourth).unwrap();
        let sum = f.add(&g).unwrap();
        prop_assert!(norm(&sum) <= (norm(&f) + norm(&g)) * (1.0 + 1e-12));
        let scaled = f.scale(a).unwrap();
        prop_assert!((norm(&scaled) - a.abs() * norm(&f)).abs() <= 1e-12 * (1.0 + norm(&scaled)));
        if level > 0 {
            let lower = f.c0i_norm(Level(level - 1), StencilOrder::Fourth).unwrap();
            prop_assert!(lower <= norm(&f));
        }
    }

    #[test]
    fn restriction_composes(c in coeffs(), k1 in 1usize..16, k2 in 1usize..16) {
        let f = trig_field(c, 1.0, 16, 32);
        let (lo, hi) = (k1.min(k2) as f64 / 16.0, k1.max(k2) as f64 / 16.0);
        let two = f.restrict(hi).unwrap().restrict(lo).unwrap();
        prop_assert_eq!(two, f.restrict(lo).unwrap());
    }

    #[test]
    fn exp_verdicts_follow_the_minimum(c in -3.0f64..3.0, d in -2.0f64..2.0) {
        let x = GridFn1D::from_fn(-3.0, 3.0, 300, |s| c + d * s).unwrap();
        for lv in exp_counterexample(&x, 3).unwrap() {
            let r = lv.level as f64;
            let min = (0..=x.n())
                .filter(|&k| x.node(k).abs() <= r + 1e-9)
                .map(|k| x.values()[k])
                .fold(f64::INFINITY, f64::min);
            prop_assert_eq!(lv.success, min > 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linearized_transport_is_linear(ca in coeffs(), c1 in coeffs(), c2 in coeffs(), b in -2.0f64..2.0) {
        let opts = LinearOptions::default();
        let a = trig_field(ca, 0.5, 16, 32).scale(0.5).unwrap();
        let v1 = trig_field(c1, 0.5, 16, 32);
        let v2 = trig_field(c2, 0.5, 16, 32);
        let u = |v: &CylFn| linearized_solve(&a, v, &opts).unwrap().u;
        let lhs = u(&v1.axpy(b, &v2).unwrap());
        let rhs = u(&v1).axpy(b, &u(&v2)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-10 * (1.0 + rhs.sup_norm()));
    }

    #[test]
    fn integrating_factor_solve_is_linear(p2 in -2.0f64..2.0, p3 in 0.5f64..2.0, u1 in -1.0f64..1.0, u2 in -1.0f64..1.0, b in -2.0f64..2.0) {
        let n = 64;
        let trace = RegularityTrace {
            p2: GridFn1D::from_fn(0.0, 1.0, n, |s| p2 * (1.0 + s)).unwrap(),
            p3: GridFn1D::from_fn(0.0, 1.0, n, |s| p3 + 0.1 * s).unwrap(),
            min_abs_p3: p3,
            argmin: 0.0,
            regular: true,
        };
        let g1 = GridFn1D::from_fn(0.0, 1.0, n, |s| s.sin()).unwrap();
        let g2 = GridFn1D::from_fn(0.0, 1.0, n, |s| 1.0 - s * s).unwrap();
        let lhs = variational_solve(&trace, u1 + b * u2, &g1.axpy(b, &g2).unwrap()).unwrap();
        let rhs = variational_solve(&trace, u1, &g1)
            .unwrap()
            .axpy(b, &variational_solve(&trace, u2, &g2).unwrap())
            .unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12 * (1.0 + rhs.sup_norm()));
    }

    #[test]
    fn holomorphic_linearization_is_linear(a in prop::collection::vec(-1.0f64..1.0, 8), v1 in prop::collection::vec(-1.0f64..1.0, 8), v2 in prop::collection::vec(-1.0f64..1.0, 8), u in -1.0f64..1.0, b in -2.0f64..2.0) {
        let a = PowerSeries::from_real(&a).unwrap();
        let s1 = PowerSeries::from_real(&v1).unwrap();
        let s2 = PowerSeries::from_real(&v2).unwrap();
        let c = |x: f64| Complex64::new(x, 0.0);
        let lhs = linearized_holo_solve(&a, c(u * (1.0 + b)), &s1.add(&s2.scale(c(b)))).unwrap();
        let rhs = linearized_holo_solve(&a, c(u), &s1)
            .unwrap()
            .add(&linearized_holo_solve(&a, c(u), &s2).unwrap().scale(c(b)));
        let scale = 1.0 + rhs.coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * scale);
    }

    #[test]
    fn taylor_truncation_agrees(y0 in -0.5f64..0.5, c1 in -1.0f64..1.0, c2 in -1.0f64..1.0, short in 5usize..20) {
        let phi = BiSeries::new()
            .with_term(0, 1, Complex64::new(c1, 0.0))
            .with_term(1, 2, Complex64::new(c2, 0.0))
            .with_term(2, 0, Complex64::new(0.5, 0.0));
        let y = Complex64::new(y0, 0.0);
        let long = taylor_solve(y, &phi, 40).unwrap();
        let brief = taylor_solve(y, &phi, short).unwrap();
        prop_assert!(long.truncate(short).max_abs_diff(&brief) <= 1e-12 * (1.0 + brief.coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max)));
    }
}
