use proptest::prelude::*;

use nonlocal_sir::cubature::product_disk_rule;
use nonlocal_sir::grid::{Field, Grid};
use nonlocal_sir::integrators::{adaptive_bound, euler_step, Stepper};
use nonlocal_sir::interp::{sample, InterpMethod, Interpolant};
use nonlocal_sir::model::{assemble_t, Kernel, Params, SemiDiscrete, State};
use nonlocal_sir::properties::{check_step, Tolerances};

fn field_strategy(max: f64) -> impl Strategy<Value = Field> {
    (2usize..8, 2usize..8, 0.05f64..0.5, 0.05f64..0.5).prop_flat_map(move |(p1, p2, h1, h2)| {
        prop::collection::vec(0.0..max, p1 * p2)
            .prop_map(move |v| Field::from_values(Grid::new(p1, p2, h1, h2).unwrap(), v).unwrap())
    })
}

fn state_strategy(p: usize) -> impl Strategy<Value = State> {
    let g = Grid::over(1.0, 1.0, p, p).unwrap();
    let n = p * p;
    (
        prop::collection::vec(0.0f64..30.0, n),
        prop::collection::vec(0.0f64..30.0, n),
        prop::collection::vec(0.0f64..30.0, n),
    )
        .prop_map(move |(s, i, r)| {
            State::new(
                Field::from_values(g, s).unwrap(),
                Field::from_values(g, i).unwrap(),
                Field::from_values(g, r).unwrap(),
                0.0,
            )
            .unwrap()
        })
}

fn params_strategy() -> impl Strategy<Value = Params> {
    (
        1.0f64..300.0,
        0.005f64..1.0,
        0.0f64..0.1,
        0.03f64..0.3,
        0.0f64..6.3,
        0.0f64..2.0,
    )
        .prop_map(|(a, b, c, delta, alpha, beta)| Params {
            a,
            b,
            c,
            delta,
            alpha,
            beta,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn local_methods_stay_in_data_range(f in field_strategy(7.0), pts in prop::collection::vec((-0.3f64..1.0, -0.3f64..1.0), 1..40)) {
        for m in [InterpMethod::Bilinear, InterpMethod::MonotoneCubic] {
            let it = Interpolant::new(&f, m);
            for &(u, v) in &pts {
                let x = u / 0.7 * f.grid.l1();
                let y = v / 0.7 * f.grid.l2();
                let s = it.sample(x, y).unwrap();
                prop_assert!((-1e-14..=7.0 + 1e-12).contains(&s), "{:?} at ({}, {}) gave {}", m, x, y, s);
            }
        }
    }

    #[test]
    fn linear_methods_are_linear(f in field_strategy(5.0), a in -3.0f64..3.0, b in -3.0f64..3.0, x in -0.1f64..1.0, y in -0.1f64..1.0) {
        let g = f.grid;
        let h = Field::from_fn(g, |x, y| (x * 7.0).cos() + y);
        let combo = Field::from_values(g, f.values.iter().zip(&h.values).map(|(p, q)| a * p + b * q).collect()).unwrap();
        let (x, y) = (x * g.l1(), y * g.l2());
        for m in [InterpMethod::Bilinear, InterpMethod::CubicSpline] {
            let lhs = sample(&combo, m, x, y).unwrap();
            let rhs = a * sample(&f, m, x, y).unwrap() + b * sample(&h, m, x, y).unwrap();
            let scale = a.abs() * f.max_abs() + b.abs() * h.max_abs() + 1.0;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale * 10.0, "{:?}: {} vs {}", m, lhs, rhs);
        }
    }

    #[test]
    fn nonlocal_term_bounded_and_lipschitz(
        params in params_strategy(),
        i1 in prop::collection::vec(0.0f64..10.0, 64),
        i2 in prop::collection::vec(0.0f64..10.0, 64),
    ) {
        let g = Grid::over(1.0, 1.0, 8, 8).unwrap();
        let k = Kernel::new(params).unwrap();
        let rule = product_disk_rule(4, params.delta).unwrap();
        let bound = rule.total_weight() * k.kappa1() * k.kappa2();
        let f1 = Field::from_values(g, i1).unwrap();
        let f2 = Field::from_values(g, i2).unwrap();
        for m in [InterpMethod::Bilinear, InterpMethod::MonotoneCubic] {
            let t = assemble_t(&f1, &k, &rule, m).unwrap();
            prop_assert!(t.min() >= 0.0);
            prop_assert!(t.max() <= bound * f1.max() * (1.0 + 1e-12));
        }
        let t1 = assemble_t(&f1, &k, &rule, InterpMethod::Bilinear).unwrap();
        let t2 = assemble_t(&f2, &k, &rule, InterpMethod::Bilinear).unwrap();
        let dt = t1.values.iter().zip(&t2.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let di = f1.values.iter().zip(&f2.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(dt <= bound * di * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn nonlocal_term_linear_in_i(
        i1 in prop::collection::vec(0.0f64..10.0, 49),
        i2 in prop::collection::vec(-5.0f64..10.0, 49),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let g = Grid::over(1.0, 1.0, 7, 7).unwrap();
        let p = Params { delta: 0.2, ..Params::default() };
        let k = Kernel::new(p).unwrap();
        let rule = product_disk_rule(3, 0.2).unwrap();
        let f1 = Field::from_values(g, i1).unwrap();
        let f2 = Field::from_values(g, i2).unwrap();
        let combo = Field::from_values(g, f1.values.iter().zip(&f2.values).map(|(x, y)| a * x + b * y).collect()).unwrap();
        for m in [InterpMethod::Bilinear, InterpMethod::CubicSpline] {
            let t1 = assemble_t(&f1, &k, &rule, m).unwrap();
            let t2 = assemble_t(&f2, &k, &rule, m).unwrap();
            let tc = assemble_t(&combo, &k, &rule, m).unwrap();
            let scale = a.abs() * t1.max_abs() + b.abs() * t2.max_abs() + 1e-300;
            for n in 0..g.len() {
                prop_assert!((tc.values[n] - (a * t1.values[n] + b * t2.values[n])).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn every_stepper_conserves_the_total(q in state_strategy(6), tau in 0.001f64..5.0) {
        let sd = SemiDiscrete::new(q.grid(), Params::default(), product_disk_rule(3, 0.05).unwrap(), InterpMethod::Bilinear).unwrap();
        for name in ["fe", "ssprk22", "ssprk33", "ssprk104", "integral"] {
            let st: Stepper = name.parse().unwrap();
            let next = st.step(&sd, &q, tau).unwrap();
            let rep = check_step(&q, &next, f64::INFINITY, 1e-12).unwrap();
            prop_assert!(rep.d2_ok, "{}: drift {}", name, rep.conservation_drift);
        }
    }

    #[test]
    fn report_invariant_under_reflection(q in state_strategy(5), p in state_strategy(5), tol in 0.0f64..1.0) {
        let flip = |f: &Field| Field::from_fn(f.grid, |x, y| {
            let g = f.grid;
            let k = ((g.l1() - x) / g.h1).round() as usize;
            let l = (y / g.h2).round() as usize;
            f.get(k, l)
        });
        let flip_state = |s: &State| State::new(flip(&s.s), flip(&s.i), flip(&s.r), s.t).unwrap();
        let a = check_step(&q, &p, tol, tol).unwrap();
        let b = check_step(&flip_state(&q), &flip_state(&p), tol, tol).unwrap();
        prop_assert_eq!((a.d1_ok, a.d2_ok, a.d3_ok, a.d4_ok), (b.d1_ok, b.d2_ok, b.d3_ok, b.d4_ok));
        if let (Some(la), Some(lb)) = (a.location, b.location) {
            prop_assert_eq!(la.species, lb.species);
        }
        let looser = check_step(&q, &p, tol * 2.0 + 0.1, tol * 2.0 + 0.1).unwrap();
        prop_assert!(!a.d1_ok || looser.d1_ok);
        prop_assert!(!a.d2_ok || looser.d2_ok);
        prop_assert!(!a.d3_ok || looser.d3_ok);
        prop_assert!(!a.d4_ok || looser.d4_ok);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn euler_at_adaptive_bound_keeps_d1_to_d4(q in state_strategy(5), params in params_strategy()) {
        let sd = SemiDiscrete::new(q.grid(), params, product_disk_rule(3, params.delta).unwrap(), InterpMethod::Bilinear).unwrap();
        let t = sd.t_field(&q.i).unwrap();
        let tau = adaptive_bound(&t, &params);
        let next = euler_step(&sd, &q, tau).unwrap();
        let tol = Tolerances::for_state(&q);
        let rep = check_step(&q, &next, tol.neg, tol.cons).unwrap();
        prop_assert!(rep.all_ok(), "{}", rep.describe());
    }
}

#[test]
fn monotone_cubic_is_not_linear() {
    let g = Grid::new(6, 2, 1.0, 1.0).unwrap();
    let f = Field::from_fn(g, |x, _| if x < 2.5 { 0.0 } else { 1.0 });
    let h = Field::from_fn(g, |x, _| x * x * 0.3);
    let sum = Field::from_values(
        g,
        f.values.iter().zip(&h.values).map(|(a, b)| a + b).collect(),
    )
    .unwrap();
    let m = InterpMethod::MonotoneCubic;
    let gap = (sample(&sum, m, 2.3, 0.5).unwrap()
        - sample(&f, m, 2.3, 0.5).unwrap()
        - sample(&h, m, 2.3, 0.5).unwrap())
    .abs();
    assert!(gap > 1e-6, "limiter made no difference: {gap}");
}
