//! Boundary-controlled waves against closed forms and each other.

use num_complex::Complex64;
use proptest::prelude::*;
use slwave::boundary_control::{control_to_kernel, fdtd_oracle_with, support_report, WaveMethod, WaveSystem};
use slwave::control::{ControlSignal, Signal};
use slwave::grid::Grid;
use slwave::potential::Potential;

fn free(n: usize, modes: usize) -> (Grid, WaveSystem) {
    let g = Grid::new(1.0, n).unwrap();
    (g, WaveSystem::build(&Potential::zero(g), modes).unwrap())
}

#[test]
fn dalembert_from_both_ends() {
    let (g, sys) = free(1000, 200);
    let f0 = Signal::bump(0.08, 0.05, 1.0).unwrap();
    let fl = Signal::bump(0.1, 0.06, -0.5).unwrap();
    let c = ControlSignal::new(f0.clone(), fl.clone(), 0.01).unwrap();
    let h = control_to_kernel(&c, sys.kernel_basis());
    for t in [0.15, 0.3, 0.45] {
        let u = sys.smooth_wave(&h, t).unwrap();
        // left wave f0(t - x) plus right wave fl(t - (l - x)), no reflections yet
        let exact = g.sample_real(|x| {
            let left = if x < t { f0.value(t - x, 0) } else { 0.0 };
            let right = if 1.0 - x < t { fl.value(t - (1.0 - x), 0) } else { 0.0 };
            left + right
        });
        let err = (&u - &exact).sup_norm();
        assert!(err < 2e-3, "t = {t}: {err}");
    }
}

#[test]
fn zero_control_gives_zero_everywhere() {
    let (g, sys) = free(200, 30);
    let u = sys.smooth_wave(&control_to_kernel(&ControlSignal::zero(), sys.kernel_basis()), 0.7).unwrap();
    assert_eq!(u.sup_norm(), 0.0);
    let field = fdtd_oracle_with(&ControlSignal::zero(), 0.5, &Potential::zero(g), 0.5, 5).unwrap();
    assert!(field.frames().iter().all(|f| f.sup_norm() == 0.0));
}

#[test]
fn direct_and_accelerated_forms_agree() {
    let g = Grid::new(1.0, 1000).unwrap();
    let q = Potential::parse(g, "1 + sin(0.5, 4)").unwrap();
    let acc = WaveSystem::build(&q, 150).unwrap();
    let direct = acc.clone().with_method(WaveMethod::Direct);
    let c = ControlSignal::parse("bump(0.12, 0.08, 1)", "0.3*bump(0.2, 0.1, 1)", 0.01).unwrap();
    let h = control_to_kernel(&c, acc.kernel_basis());
    let (a, d) = (acc.smooth_wave(&h, 0.35).unwrap(), direct.smooth_wave(&h, 0.35).unwrap());
    assert!((&a - &d).norm() < 2e-3 * a.norm().max(1e-12));
}

#[test]
fn fdtd_agrees_at_moderate_resolution() {
    let g = Grid::new(1.0, 800).unwrap();
    let q = Potential::parse(g, "2 + cos(1, 3)").unwrap();
    let sys = WaveSystem::build(&q, 200).unwrap();
    let c = ControlSignal::parse("bump(0.15, 0.1, 1)", "", 0.005).unwrap();
    let field = fdtd_oracle_with(&c, 0.8, &q, 0.5, 2).unwrap();
    let h = control_to_kernel(&c, sys.kernel_basis());
    for (t, f) in field.times().iter().zip(field.frames()) {
        let diff = (&sys.smooth_wave(&h, *t).unwrap() - f).norm();
        assert!(diff < 5e-3, "t = {t}: {diff}");
    }
}

fn bump_strategy() -> impl Strategy<Value = (f64, f64, f64)> {
    // (onset offset, half width, amplitude)
    (0.0..0.1f64, 0.02..0.06f64, -1.0..1.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn waves_are_linear_in_the_control(a in bump_strategy(), b in bump_strategy(), s in -2.0..2.0f64) {
        let (_, sys) = free(200, 40);
        let dead = 0.01;
        let c1 = ControlSignal::left(Signal::bump(dead + 1e-3 + a.0 + a.1, a.1, a.2).unwrap(), dead).unwrap();
        let c2 = ControlSignal::new(Signal::zero(), Signal::bump(dead + 1e-3 + b.0 + b.1, b.1, b.2).unwrap(), dead).unwrap();
        let sum = ControlSignal::new(c1.f0.scaled(s), c2.fl.clone(), dead).unwrap();
        let kb = sys.kernel_basis();
        let t = 0.3;
        let u1 = sys.smooth_wave(&control_to_kernel(&c1, kb), t).unwrap();
        let u2 = sys.smooth_wave(&control_to_kernel(&c2, kb), t).unwrap();
        let us = sys.smooth_wave(&control_to_kernel(&sum, kb), t).unwrap();
        let expect = &(&u1 * Complex64::new(s, 0.0)) + &u2;
        prop_assert!((&us - &expect).sup_norm() <= 1e-10 * (1.0 + expect.sup_norm()));
    }

    #[test]
    fn waves_stay_in_the_reachable_region(a in (0.0..0.1f64, 0.04..0.08f64, -1.0..1.0f64), t in 0.2..0.45f64) {
        let (_, sys) = free(400, 120);
        let dead = 0.01;
        let c = ControlSignal::left(Signal::bump(dead + 1e-3 + a.0 + a.1, a.1, a.2).unwrap(), dead).unwrap();
        let u = sys.smooth_wave(&control_to_kernel(&c, sys.kernel_basis()), t).unwrap();
        // 120 modes resolve half-widths down to about 0.04
        prop_assert!(support_report(&u, t, 1e-6).unwrap().pass);
    }
}
