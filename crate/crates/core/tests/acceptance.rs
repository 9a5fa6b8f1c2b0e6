//! Acceptance criteria, one printed line each.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slwave::boundary_control::{control_to_kernel, fdtd_oracle_with, support_report, WaveSystem};
use slwave::control::{ControlSignal, Signal};
use slwave::geometry::{eikonal_metric, Atom};
use slwave::grid::Grid;
use slwave::model_operator::{
    assemble_coefficients, graph_consistency, graph_sample, intertwine_residual, intertwine_residual_samples,
    recover_potential, test_battery, RecoveryPath,
};
use slwave::potential::Potential;
use slwave::sl_solver::{dirichlet_eigensystem, kernel_basis};
use slwave::wave_model::{default_gauge, form_limit_check, parseval_residual};

const N: usize = 2000;
const MODES: usize = 300;
const COS: &str = "2 + cos(1, 3)";

fn q_cos(x: f64) -> f64 {
    2.0 + (3.0 * x).cos()
}

struct Line {
    id: usize,
    pass: bool,
    text: String,
}

fn record(lines: &mut Vec<Line>, id: usize, pass: bool, text: String) {
    // through the handle, not println!, so the table shows without --nocapture
    let line = format!("criterion {id:>2}: {} {text}\n", if pass { "PASS" } else { "FAIL" });
    std::io::stdout().write_all(line.as_bytes()).unwrap();
    lines.push(Line { id, pass, text });
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn c1_spectrum(lines: &mut Vec<Line>) {
    let (err, dt) = timed(|| {
        let g = Grid::new(PI, N).unwrap();
        let es = dirichlet_eigensystem(&Potential::zero(g), 10).unwrap();
        es.eigenvalues()
            .iter()
            .enumerate()
            .map(|(k, lam)| (lam - ((k + 1) * (k + 1)) as f64).abs() / ((k + 1) * (k + 1)) as f64)
            .fold(0.0, f64::max)
    });
    let pass = err <= 1e-7 && dt < Duration::from_secs(5);
    record(lines, 1, pass, format!("Dirichlet spectrum q=0 l=pi: max rel err {err:.3e} (<= 1e-7), {:.2?} (< 5 s)", dt));
}

fn c2_dalembert(lines: &mut Vec<Line>) {
    let (err, dt) = timed(|| {
        let g = Grid::new(1.0, N).unwrap();
        let sys = WaveSystem::build(&Potential::zero(g), MODES).unwrap();
        let f0 = Signal::bump(0.1, 0.05, 1.0).unwrap();
        let c = ControlSignal::left(f0.clone(), 0.005).unwrap();
        let t = 0.2;
        let u = sys.smooth_wave(&control_to_kernel(&c, sys.kernel_basis()), t).unwrap();
        // f0(t - x) for x < t, zero ahead of the front
        (0..g.len())
            .map(|j| {
                let x = g.x(j);
                let exact = if x < t { f0.value(t - x, 0) } else { 0.0 };
                (u.at(j) - Complex64::new(exact, 0.0)).norm()
            })
            .fold(0.0, f64::max)
    });
    let pass = err <= 2e-3 && dt < Duration::from_secs(10);
    record(lines, 2, pass, format!("d'Alembert q=0 t=0.2l N=300: sup diff {err:.3e} (<= 2e-3), {:.2?} (< 10 s)", dt));
}

/// Builds the shared `q = 2 + cos 3x` system inside the timed region.
fn c3_fdtd(lines: &mut Vec<Line>, q: &Potential) -> WaveSystem {
    let ((sys, err), dt) = timed(|| {
        let sys = WaveSystem::build(q, MODES).unwrap();
        let c = ControlSignal::new(
            Signal::bump(0.1, 0.05, 1.0).unwrap(),
            Signal::bump(0.3, 0.1, 0.5).unwrap(),
            0.005,
        )
        .unwrap();
        let field = fdtd_oracle_with(&c, 1.0, q, 0.5, 4).unwrap();
        let h = control_to_kernel(&c, sys.kernel_basis());
        let err = field
            .times()
            .iter()
            .zip(field.frames())
            .map(|(t, f)| (&sys.smooth_wave(&h, *t).unwrap() - f).norm())
            .fold(0.0, f64::max);
        (sys, err)
    });
    let pass = err <= 1e-3 && dt < Duration::from_secs(30);
    record(lines, 3, pass, format!("spectral vs FDTD q=2+cos3x t<=l: max L2 diff {err:.3e} (<= 1e-3), {:.2?} (< 30 s)", dt));
    sys
}

fn c4_support(lines: &mut Vec<Line>, sys: &WaveSystem) {
    let c = ControlSignal::new(
        Signal::bump(0.03, 0.02, 1.0).unwrap(),
        Signal::bump(0.05, 0.03, -0.7).unwrap(),
        0.005,
    )
    .unwrap();
    let h = control_to_kernel(&c, sys.kernel_basis());
    let mut worst: f64 = 0.0;
    for t in [0.1, 0.2, 0.4] {
        let u = sys.smooth_wave(&h, t).unwrap();
        worst = worst.max(support_report(&u, t, 1e-6).unwrap().ratio);
    }
    record(lines, 4, worst <= 1e-6, format!("finite propagation t in {{0.1,0.2,0.4}}l: max outside mass ratio {worst:.3e} (<= 1e-6)"));
}

fn c5_span(lines: &mut Vec<Line>, sys: &WaveSystem) {
    let prof = sys.reachable_span_estimate(0.6, 96, 24, 20240601).unwrap();
    let r = prof.condition_ratio();
    record(lines, 5, r >= 1e-6, format!("snapshot SVD t=0.6l, 24 nodes, 96 controls: sigma_min/sigma_max {r:.3e} (>= 1e-6)"));
}

fn c6_gauge(lines: &mut Vec<Line>) {
    let g = Grid::new(1.0, N).unwrap();
    let (mut gram, mut inv) = (0.0f64, 0.0f64);
    for src in ["0", "1", COS] {
        let q = Potential::parse(g, src).unwrap();
        let gd = default_gauge(&q, &kernel_basis(&q).unwrap()).unwrap();
        for (j, node) in gd.nodes().iter().enumerate() {
            if node.det_t.norm() <= 1e-8 {
                continue;
            }
            // G from the boundary form against rho T T* from T
            gram = gram.max(gd.gram_residual(j));
            let lhs = node.t.adjoint() * node.g.try_inverse().unwrap() * node.t;
            let r = 1.0 / node.rho;
            let res = [(0, 0, r), (0, 1, 0.0), (1, 0, 0.0), (1, 1, r)]
                .iter()
                .map(|&(a, b, v)| (lhs[(a, b)] - v).norm())
                .fold(0.0, f64::max);
            inv = inv.max(res);
        }
    }
    let pass = gram <= 1e-12 && inv <= 1e-10;
    record(lines, 6, pass, format!("gauge identities q in {{0,1,2+cos3x}}: G-rhoTT* {gram:.3e} (<= 1e-12), T*G^-1T-I/rho {inv:.3e} (<= 1e-10)"));
}

fn c7_parseval(lines: &mut Vec<Line>) {
    let g = Grid::new(1.0, N).unwrap();
    let mut worst: f64 = 0.0;
    for src in ["0", COS] {
        let q = Potential::parse(g, src).unwrap();
        let es = dirichlet_eigensystem(&q, 2).unwrap();
        let gd = default_gauge(&q, &kernel_basis(&q).unwrap()).unwrap();
        let battery = [
            es.function(0),
            es.function(1),
            g.sample_real(|_| 1.0),
            g.sample_real(|x| x * (1.0 - x)),
            gd.e(),
        ];
        for i in 0..5 {
            for k in i..5 {
                worst = worst.max(parseval_residual(&battery[i], &battery[k], &gd).unwrap().residual);
            }
        }
    }
    record(lines, 7, worst <= 1e-6, format!("Parseval, 15 pairs, q in {{0,2+cos3x}}: max residual {worst:.3e} (<= 1e-6)"));
}

fn c8_intertwining(lines: &mut Vec<Line>) {
    let g = Grid::new(1.0, N).unwrap();
    let q = Potential::parse(g, COS).unwrap();
    let kb = kernel_basis(&q).unwrap();
    let gd = default_gauge(&q, &kb).unwrap();
    let mc = assemble_coefficients(&gd, &q).unwrap();
    let battery = test_battery(1.0)
        .iter()
        .map(|f| intertwine_residual(f, &q, &gd, &mc).unwrap())
        .fold(0.0, f64::max);
    let mut kernel: f64 = 0.0;
    for s in [&kb.phi0, &kb.phil] {
        let d2 = s.u.map(|x, v| v * q_cos(x));
        kernel = kernel.max(intertwine_residual_samples(&s.u, &s.du, &d2, &q, &gd, &mc).unwrap());
    }
    let pass = battery <= 1e-6 && kernel <= 1e-8;
    record(lines, 8, pass, format!("intertwining q=2+cos3x: 5 test functions {battery:.3e} (<= 1e-6), kernel {kernel:.3e} (<= 1e-8)"));
}

fn c9_eikonal(lines: &mut Vec<Line>) {
    let g = Grid::new(1.0, N).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let atoms: Vec<Atom> = (0..20).map(|_| Atom::new(rng.random_range(0.0..=0.5), 1.0).unwrap()).collect();
    let mut worst: f64 = 0.0;
    for p in atoms.chunks(2) {
        let sup = g.nodes().map(|y| (p[0].distance(y) - p[1].distance(y)).abs()).fold(0.0, f64::max);
        worst = worst.max((sup - (p[0].x() - p[1].x()).abs()).abs());
    }
    let d = |a: &Atom, b: &Atom| eikonal_metric(a, b, g).unwrap();
    let mut axioms = true;
    for a in &atoms {
        axioms &= d(a, a) == 0.0;
        for b in &atoms {
            axioms &= d(a, b) >= 0.0 && d(a, b) == d(b, a);
            for c in &atoms {
                axioms &= d(a, b) <= d(a, c) + d(c, b);
            }
        }
    }
    let pass = worst <= g.h() && axioms;
    record(lines, 9, pass, format!("eikonal metric, 10 pairs: max |sup|d1-d2| - |x1-x2|| {worst:.3e} (<= h = {:.1e}), axioms {axioms}", g.h()));
}

fn c10_recovery(lines: &mut Vec<Line>) {
    let g = Grid::new(1.0, N).unwrap();
    let q = Potential::parse(g, COS).unwrap();
    let gd = default_gauge(&q, &kernel_basis(&q).unwrap()).unwrap();
    let mc = assemble_coefficients(&gd, &q).unwrap();
    let (a, b) = (3.0 * g.h(), 0.5 - 3.0 * g.h());
    let err = |path| recover_potential(&mc, path, 1e-6).unwrap().max_error(q_cos, 1.0, a, b);
    let (an, ob) = (err(RecoveryPath::Analytic), err(RecoveryPath::Observer));
    let pass = an <= 1e-6 && ob <= 1e-3;
    record(lines, 10, pass, format!("potential recovery q=2+cos3x on [3h, l/2-3h]: analytic {an:.3e} (<= 1e-6), observer {ob:.3e} (<= 1e-3)"));
}

fn c11_form_limit(lines: &mut Vec<Line>) {
    let g = Grid::new(1.0, N).unwrap();
    let radii: Vec<f64> = [10.0, 20.0, 30.0, 40.0].iter().map(|k| (k + 0.5) * g.h()).collect();
    let one = g.sample_real(|_| 1.0);
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for src in ["0", COS] {
        let q = Potential::parse(g, src).unwrap();
        let gd = default_gauge(&q, &kernel_basis(&q).unwrap()).unwrap();
        let e = gd.e();
        for j in [200, 500] {
            let x = g.x(j);
            let rep = form_limit_check(&one, x, &gd, &radii, 1e-4).unwrap();
            // boundary-value ratio straight from the gauge samples
            let target = 2.0 / (e.at(j).norm_sqr() + e.at(N - j).norm_sqr());
            if src == "0" && j == 500 {
                assert!((target - 1.6).abs() < 1e-12);
            }
            worst = worst.max((rep.extrapolated - target).abs());
            monotone &= rep.monotone;
        }
    }
    let pass = worst <= 1e-4 && monotone;
    record(lines, 11, pass, format!("form limit u=1, x in {{0.1l,0.25l}}: max |limit - ratio| {worst:.3e} (<= 1e-4), monotone {monotone}"));
}

fn c12_graph(lines: &mut Vec<Line>, sys: &WaveSystem, q: &Potential) {
    let gd = default_gauge(q, sys.kernel_basis()).unwrap();
    let mc = assemble_coefficients(&gd, q).unwrap();
    let controls = [
        ControlSignal::new(Signal::bump(0.15, 0.1, 1.0).unwrap(), Signal::zero(), 0.005).unwrap(),
        ControlSignal::new(Signal::bump(0.12, 0.1, 0.6).unwrap(), Signal::bump(0.2, 0.1, -0.5).unwrap(), 0.005)
            .unwrap(),
    ];
    let worst = controls
        .iter()
        .map(|c| graph_consistency(&graph_sample(c, 0.4, sys, &gd).unwrap(), &gd, &mc).unwrap())
        .fold(0.0, f64::max);
    record(lines, 12, worst <= 2e-3, format!("graph sampling, 2 bump controls: max rel mismatch {worst:.3e} (<= 2e-3)"));
}

#[test]
fn acceptance_criteria() {
    let mut lines = Vec::new();
    c1_spectrum(&mut lines);
    c2_dalembert(&mut lines);

    let g = Grid::new(1.0, N).unwrap();
    let q = Potential::parse(g, COS).unwrap();
    let sys = c3_fdtd(&mut lines, &q);
    c4_support(&mut lines, &sys);
    c5_span(&mut lines, &sys);
    c6_gauge(&mut lines);
    c7_parseval(&mut lines);
    c8_intertwining(&mut lines);
    c9_eikonal(&mut lines);
    c10_recovery(&mut lines);
    c11_form_limit(&mut lines);
    c12_graph(&mut lines, &sys, &q);

    let failed: Vec<String> = lines.iter().filter(|l| !l.pass).map(|l| format!("{}: {}", l.id, l.text)).collect();
    assert_eq!(lines.len(), 12);
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
