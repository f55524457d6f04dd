//! Acceptance suite. Each test prints one `ACCEPTANCE <n> <name>: PASS|FAIL`
//! line; run with `cargo test -p fracsiv --test acceptance -- --nocapture`.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{classical_pr_step, max_diff, random_field, report, smooth_state, to_grid, Rates};
use fracsiv::adi::{self, AdiWorkspace};
use fracsiv::oracle::{self, ode, GlobalSystem};
use fracsiv::scenario::{self, Mode, Scenario};
use fracsiv::solver::build_slice_system;
use fracsiv::{
    grunwald_weights, AdiStepper, Axis, Coefficient, Compartment, Diffusion, Dirichlet, Field2D, FractionalOperator,
    SchemeConfig, Side, SivParams, SivState,
};

fn within_budget(start: Instant, budget: Duration) -> (bool, String) {
    let t = start.elapsed();
    (
        t < budget,
        format!("{:.2}s of {:.0}s budget", t.as_secs_f64(), budget.as_secs_f64()),
    )
}

/// `(-1)^k * binom(alpha, k)` in exact rational arithmetic.
fn exact_weight(alpha: &BigRational, k: usize) -> BigRational {
    let mut num = BigRational::one();
    for j in 0..k {
        num *= alpha - BigRational::from_integer(BigInt::from(j));
        num /= BigRational::from_integer(BigInt::from(j + 1));
    }
    if k % 2 == 1 {
        -num
    } else {
        num
    }
}

fn decimal(text: &str) -> BigRational {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    let digits: BigInt = format!("{int}{frac}").parse().unwrap();
    BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32))
}

#[test]
fn criterion_1_grunwald_weights() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut zero_ok = true;
    for text in ["1.1", "1.2", "1.5", "1.8", "2.0"] {
        let alpha: f64 = text.parse().unwrap();
        let w = grunwald_weights(alpha, 65).unwrap();
        let exact_alpha = decimal(text);
        for k in 0..=64 {
            let exact = exact_weight(&exact_alpha, k);
            if exact.is_zero() {
                zero_ok &= w.coeffs()[k] == 0.0;
                continue;
            }
            let e = exact.to_f64().unwrap();
            worst = worst.max((w.coeffs()[k] - e).abs() / e.abs());
        }
    }
    let two = grunwald_weights(2.0, 65).unwrap();
    let classical = two.coeffs()[..3] == [1.0, -2.0, 1.0] && two.coeffs()[3..].iter().all(|&g| g == 0.0);
    let (fast, timing) = within_budget(start, Duration::from_secs(1));
    let pass = worst <= 1e-12 && zero_ok && classical && fast;
    assert!(report(
        1,
        "grunwald-weights",
        pass,
        format!("max rel err {worst:.2e} (tol 1e-12), alpha=2 exact: {classical}, {timing}")
    ));
}

fn classical_rates() -> Rates {
    Rates {
        mu: 0.02,
        beta: 0.4,
        gamma: 0.1,
        theta: 0.3,
        nu: 0.05,
    }
}

fn params_from(r: &Rates, diffusion: [(f64, f64); 3]) -> SivParams {
    let mut p = SivParams::new(r.mu, r.beta, r.gamma, r.theta, r.nu);
    for c in Compartment::ALL {
        let (a, b) = diffusion[c.index()];
        p = p.with_diffusion(c, Diffusion::constant(a, b));
    }
    p
}

#[test]
fn criterion_2_classical_limit() {
    let start = Instant::now();
    let (n, dt) = (8, 0.1);
    let diffusion = [(0.01, 0.02), (0.03, 0.015), (0.005, 0.04)];
    let rates = classical_rates();
    let params = params_from(&rates, diffusion);
    let cfg = SchemeConfig::new(2.0, 2.0, dt, n, n);
    let ws = AdiWorkspace::new(&cfg, &params).unwrap();
    let h = 1.0 / n as f64;

    let mut exact = true;
    for c in Compartment::ALL {
        for (axis, coeff) in [(Axis::X, diffusion[c.index()].0), (Axis::Y, diffusion[c.index()].1)] {
            let k = coeff / (h * h) * (dt / 2.0);
            let expected = DMatrix::from_fn(n - 1, n - 1, |r, col| match r.abs_diff(col) {
                0 => 1.0 + 2.0 * k,
                1 => -k,
                _ => 0.0,
            });
            for slice in 1..n {
                exact &= ws.systems(c, axis).get(slice).matrix() == &expected;
            }
        }
    }

    let state = smooth_state(n, n, 7);
    let ours = adi::step(&ws, &cfg, &params, &state).unwrap();
    let reference = classical_pr_step(
        n,
        n,
        dt,
        diffusion,
        &rates,
        &[to_grid(state.s()), to_grid(state.i()), to_grid(state.v())],
    );
    let gap = Compartment::ALL
        .iter()
        .map(|&c| max_diff(ours[c].as_slice(), &reference[c.index()]))
        .fold(0.0, f64::max);
    let (fast, timing) = within_budget(start, Duration::from_secs(1));
    let pass = exact && gap <= 1e-12 && fast;
    assert!(report(
        2,
        "classical-limit",
        pass,
        format!("matrices exact: {exact}, step gap {gap:.2e} (tol 1e-12), {timing}")
    ));
}

#[test]
fn criterion_3_splitting_order() {
    let start = Instant::now();
    let n = 12;
    let params = SivParams::new(0.0, 0.0, 0.0, 0.0, 0.0).with_uniform_diffusion(1.0, 1.0);
    let state = smooth_state(n, n, 11);
    let gaps: Vec<f64> = (0..6)
        .map(|k| {
            let dt = 1e-2 / f64::from(1u32 << k);
            let cfg = SchemeConfig::new(1.5, 1.5, dt, n, n);
            let ws = AdiWorkspace::new(&cfg, &params).unwrap();
            let split = adi::step(&ws, &cfg, &params, &state).unwrap();
            let unsplit = oracle::unsplit_cn_step(&params, &cfg, &state).unwrap();
            split.max_abs_diff(&unsplit)
        })
        .collect();
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[0] / w[1]).collect();
    let in_window = ratios.iter().all(|r| (3.2..=4.8).contains(r));
    let (fast, timing) = within_budget(start, Duration::from_secs(10));
    let pass = in_window && fast;
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    assert!(report(
        3,
        "splitting-order",
        pass,
        format!("halving ratios [{}] (window [3.2, 4.8]), {timing}", shown.join(", "))
    ));
}

#[test]
fn criterion_4_eigenmode_decay() {
    let start = Instant::now();
    let (n, a, t_end) = (64usize, 1.0, 0.05);
    let steps = 200;
    let dt = t_end / steps as f64;
    let params = SivParams::new(0.0, 0.0, 0.0, 0.0, 0.0).with_uniform_diffusion(a, a);
    let stepper = AdiStepper::new(SchemeConfig::new(2.0, 2.0, dt, n, n), params).unwrap();
    let h = 1.0 / n as f64;
    let mode = Field2D::from_fn(n, n, |i, j| (PI * i as f64 * h).sin() * (PI * j as f64 * h).sin());
    let mut state = SivState::new(Field2D::zeros(n, n), mode.clone(), Field2D::zeros(n, n)).unwrap();
    for k in 0..steps {
        state = stepper.step(&state, k as f64 * dt).unwrap();
    }
    let amplitude = state.i().max_abs() / mode.max_abs();

    let continuous = (-2.0 * PI * PI * a * t_end).exp();
    let rel_continuous = (amplitude - continuous).abs() / continuous;

    let lambda = -4.0 * a / (h * h) * (PI * h / 2.0).sin().powi(2);
    let z = dt * lambda / 2.0;
    let factor = ((1.0 + z) / (1.0 - z)).powi(2);
    let discrete = factor.powi(steps);
    let rel_discrete = (amplitude - discrete).abs() / discrete;

    let (fast, timing) = within_budget(start, Duration::from_secs(30));
    let pass = rel_continuous <= 0.02 && rel_discrete <= 1e-6 && fast;
    assert!(report(
        4,
        "eigenmode-decay",
        pass,
        format!(
            "amplitude {amplitude:.8}, exp decay rel err {rel_continuous:.2e} (tol 2e-2), discrete rel err {rel_discrete:.2e} (tol 1e-6), {timing}"
        )
    ));
}

#[test]
fn criterion_5_ode_limit() {
    let start = Instant::now();
    let rates = Rates {
        mu: 1e-4,
        beta: 0.2,
        gamma: 0.1,
        theta: 0.2,
        nu: 0.1,
    };
    let (n, dt, days) = (4usize, 0.02f64, 180usize);
    let per_day = (1.0 / dt).round() as usize;
    let params = params_from(&rates, [(0.0, 0.0); 3]);
    let stepper = AdiStepper::new(SchemeConfig::new(1.5, 1.5, dt, n, n), params).unwrap();
    let y0 = [0.95, 0.05, 0.01];
    let mut state = SivState::uniform_interior(n, n, y0[0], y0[1], y0[2]);

    let times: Vec<f64> = (1..=days).map(|d| d as f64).collect();
    let reference = ode::integrate(
        |_, y: &[f64; 3]| common::siv_rhs(&rates, y[0], y[1], y[2]),
        0.0,
        y0,
        &times,
        1e-13,
        1e-15,
    )
    .unwrap();

    let mut worst: f64 = 0.0;
    for (day, expected) in reference.iter().enumerate() {
        for k in 0..per_day {
            state = stepper.step(&state, (day * per_day + k) as f64 * dt).unwrap();
        }
        for c in Compartment::ALL {
            for j in 1..n {
                for i in 1..n {
                    worst = worst.max((state[c].get(i, j) - expected[c.index()]).abs());
                }
            }
        }
    }
    let (fast, timing) = within_budget(start, Duration::from_secs(5));
    let pass = worst <= 1e-6 && fast;
    assert!(report(
        5,
        "ode-limit",
        pass,
        format!("max error over {days} days {worst:.2e} (tol 1e-6, dt {dt}), {timing}")
    ));
}

#[test]
fn criterion_6_front_radius_ordering() {
    let start = Instant::now();
    let mut fractional = Scenario {
        mode: Mode::Fractional,
        ..Scenario::default()
    };
    fractional.scheme.alpha1 = 1.2;
    fractional.scheme.alpha2 = 1.2;
    let mut classical = fractional.clone();
    classical.mode = Mode::Classical;

    let radii = |sc: &Scenario| -> Vec<(f64, f64)> {
        scenario::simulate(sc)
            .unwrap()
            .into_iter()
            .filter(|r| r.snapshot.compartment == Compartment::I && r.snapshot.time > 0.0)
            .map(|r| (r.snapshot.time, r.metrics.front_radius))
            .collect()
    };
    let (rf, rc) = (radii(&fractional), radii(&classical));
    let times: Vec<f64> = rf.iter().map(|(t, _)| *t).collect();
    assert_eq!(times, vec![60.0, 120.0, 180.0]);
    let never_behind = rf.iter().zip(&rc).all(|(f, c)| f.1 >= c.1);
    let ahead_once = rf.iter().zip(&rc).any(|(f, c)| f.1 > c.1);
    let (fast, timing) = within_budget(start, Duration::from_secs(120));
    let pass = never_behind && ahead_once && fast;
    let rows: Vec<String> = rf
        .iter()
        .zip(&rc)
        .map(|(f, c)| format!("t={} {:.4}>={:.4}", f.0, f.1, c.1))
        .collect();
    assert!(report(
        6,
        "front-radius-ordering",
        pass,
        format!("{}, {timing}", rows.join(" "))
    ));
}

fn invariant(name: &str, pass: bool, detail: String) -> bool {
    println!("  invariant {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    pass
}

fn fractional_cfg(dt: f64, nx: usize, ny: usize) -> SchemeConfig {
    let mut cfg = SchemeConfig::new(1.3, 1.7, dt, nx, ny);
    cfg.r1 = 0.3;
    cfg.r2 = 0.8;
    cfg
}

#[test]
fn criterion_7_invariant_suite() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    let mut all = true;

    let cfg = fractional_cfg(0.2, 10, 9);
    let params = params_from(&classical_rates(), [(0.02, 0.01), (0.03, 0.02), (0.01, 0.05)]);
    let stepper = AdiStepper::new(cfg.clone(), params.clone()).unwrap();
    // births feed S at rate mu from an empty population, so the empty state is
    // only an equilibrium when mu = 0
    let no_births = SivParams {
        mu: 0.0,
        ..params.clone()
    };
    let zero = SivState::zeros(10, 9);
    let out = AdiStepper::new(cfg.clone(), no_births)
        .unwrap()
        .step(&zero, 0.0)
        .unwrap();
    all &= invariant(
        "zero-state",
        out == zero,
        format!("mu = 0, max |u| {:.1e} (exact)", out.max_abs()),
    );

    let data = |c: Compartment, x: f64, y: f64, t: f64| 0.1 * (c.index() as f64 + 1.0) * (1.0 + x * y + 0.5 * t);
    let prescribed = stepper.clone().with_boundary(Dirichlet::prescribed(data));
    let mut state = smooth_state(10, 9, 3);
    Dirichlet::prescribed(data).impose_all(&cfg, &mut state, 0.0);
    let mut boundary_ok = true;
    let mut homogeneous = smooth_state(10, 9, 4);
    for k in 0..5 {
        let t = k as f64 * cfg.dt;
        state = prescribed.step(&state, t).unwrap();
        homogeneous = stepper.step(&homogeneous, t).unwrap();
        for c in Compartment::ALL {
            for j in 0..=9 {
                for i in 0..=10 {
                    if state[c].is_boundary(i, j) {
                        boundary_ok &= state[c].get(i, j) == data(c, cfg.x(i), cfg.y(j), t + cfg.dt);
                        boundary_ok &= homogeneous[c].get(i, j) == 0.0;
                    }
                }
            }
        }
    }
    all &= invariant("dirichlet-boundary", boundary_ok, "5 steps, exact".into());

    let diffusion_only = params.without_reaction();
    let ws = AdiWorkspace::new(&cfg, &diffusion_only).unwrap();
    let mut lin: f64 = 0.0;
    for _ in 0..20 {
        let u = SivState::from([0; 3].map(|_| random_field(10, 9, &mut rng)));
        let v = SivState::from([0; 3].map(|_| random_field(10, 9, &mut rng)));
        let lambda = rng.random_range(-2.0..2.0);
        let combo = SivState::from(std::array::from_fn(|c| {
            let (a, b) = (u.fields()[c].as_slice(), v.fields()[c].as_slice());
            Field2D::from_vec(10, 9, a.iter().zip(b).map(|(x, y)| x + lambda * y).collect()).unwrap()
        }));
        let (su, sv) = (
            adi::step(&ws, &cfg, &diffusion_only, &u).unwrap(),
            adi::step(&ws, &cfg, &diffusion_only, &v).unwrap(),
        );
        let sc = adi::step(&ws, &cfg, &diffusion_only, &combo).unwrap();
        for c in 0..3 {
            let expect: Vec<f64> = su.fields()[c]
                .as_slice()
                .iter()
                .zip(sv.fields()[c].as_slice())
                .map(|(x, y)| x + lambda * y)
                .collect();
            lin = lin.max(max_diff(sc.fields()[c].as_slice(), &expect));
        }
    }
    all &= invariant("linearity", lin <= 1e-12, format!("max gap {lin:.2e} (tol 1e-12)"));

    let mut mf: f64 = 0.0;
    let shape = fracsiv::Shape::new(7, 3);
    let w = grunwald_weights(1.5, 9).unwrap();
    for side in [Side::Minus, Side::Plus] {
        let op = FractionalOperator::new(1.5, side, Axis::X, 0.25, Coefficient::Constant(1.0), shape).unwrap();
        for _ in 0..20 {
            let field = random_field(7, 3, &mut rng);
            let direct = op.apply(&w, &field, 1).unwrap();
            let asm = op.matrix(&w, 1).unwrap();
            let line = field.row(1);
            let via = &asm.matrix * DVector::from_column_slice(&line[1..7]) + asm.boundary_load(line[0], line[7]);
            mf = mf.max(max_diff(&direct, via.as_slice()));
        }
    }
    all &= invariant(
        "matrix-free-vs-assembled",
        mf <= 1e-13,
        format!("max gap {mf:.2e} (tol 1e-13)"),
    );

    let small = fractional_cfg(0.1, 9, 8);
    let global = GlobalSystem::assemble(&small, &params).unwrap();
    let mut gm: f64 = 0.0;
    for c in Compartment::ALL {
        let mut field = random_field(9, 8, &mut rng);
        field.fill_boundary(0.0);
        let dense = global.operator(c) * DVector::from_vec(field.interior());
        let lines = global.apply_lines(c, &field).unwrap();
        gm = gm.max(max_diff(dense.as_slice(), &lines.interior()));
    }
    all &= invariant("global-vs-lines", gm <= 1e-12, format!("max gap {gm:.2e} (tol 1e-12)"));

    let (mut rt, mut res, mut fact): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for alpha in [1.2, 1.5, 2.0] {
        let n = 16;
        let shape = fracsiv::Shape::new(n, n);
        let w = Arc::new(grunwald_weights(alpha, n + 2).unwrap());
        let coeff = Coefficient::Field(Arc::new(Field2D::from_fn(n, n, |i, j| 0.5 + 0.01 * (i * j) as f64)));
        let minus = FractionalOperator::new(alpha, Side::Minus, Axis::Y, 1.0 / n as f64, coeff.clone(), shape).unwrap();
        let plus = FractionalOperator::new(alpha, Side::Plus, Axis::Y, 1.0 / n as f64, coeff, shape).unwrap();
        for slice in 1..n {
            let sys = build_slice_system(Axis::Y, slice, 0.05, 0.4, &minus, &plus, &w).unwrap();
            let u = DVector::from_fn(n - 1, |_, _| rng.random_range(-1.0..1.0));
            let rhs = sys.matrix() * &u;
            let back = DVector::from_vec(sys.solve(rhs.as_slice()).unwrap());
            rt = rt.max((&back - &u).amax() / u.amax());
            res = res.max((sys.matrix() * &back - &rhs).amax() / rhs.amax());
            fact = fact.max(sys.factorization_residual());
        }
    }
    all &= invariant(
        "solver-round-trip",
        rt <= 1e-10 && res <= 1e-10 && fact <= 1e-12,
        format!("rel err {rt:.2e}, residual {res:.2e} (tol 1e-10), factorization {fact:.2e} (tol 1e-12)"),
    );

    let (fast, timing) = within_budget(start, Duration::from_secs(30));
    assert!(report(7, "invariant-suite", all && fast, timing));
}
