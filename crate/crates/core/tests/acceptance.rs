//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Built without the libtest harness so the report is never captured:
//! `cargo test -p landscape-core --test acceptance`. Exits nonzero on any
//! unexpected FAIL, and also when a check listed in `EXPECTED_FAILURES`
//! starts passing.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use landscape_core::estimators::{
    cheeger_limit_estimate, continuum_p_oracles, dv_lower_bound, kernel_hoelder_bounds, parabolic_lower_bound,
    resolvent_kernel, HoelderNorm, KernelMode, CHEEGER_P_SEQUENCE,
};
use landscape_core::heat::{heat_bound_report, heat_kernel_bound, heat_mu_grid, mercer_kernel, mode_landscapes};
use landscape_core::landscape::{
    antimaximum_probe, decades, iterated_landscape, parabolic_envelope, resolvent_envelope, resolvent_landscape,
};
use landscape_core::lattice::{gauge_argmax, gauge_norm, modulus_generator};
use landscape_core::operator::{
    build_bilaplacian_1d, build_graph_laplacian, build_laplacian_1d, build_magnetic_laplacian, build_schroedinger_1d,
    build_signless_laplacian, Edge,
};
use landscape_core::plap::{
    plap_apply, plap_ground_state, plap_solve, plap_torsion, verify_nonlinear_bound, PLaplaceProblem,
};
use landscape_core::verify::{magnetic_eigen_bounds, verify_eigenvector_bound, verify_semigroup_domination};
use landscape_core::{
    BiharmonicBc, Eigenpair, Graph, Grid1D, MagneticSignature, MatrixOperator, PotentialVector, WeightVector,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Checks that are implemented literally and known to fail, with the reason.
const EXPECTED_FAILURES: &[(&str, &str)] = &[
    (
        "8c",
        "2^p (p/(p-1))^(p-1) at p = 1.001 equals 2.01526; the p -> 1 approach is \
         logarithmically slow, so the distance to 2 is 0.0153 > 1e-2",
    ),
    (
        "9b",
        "the exact torsion has v_1 = 3^(1/3) = 1.4422495703, while the quoted digits \
         read 1.442249595; the quoted values are 2.5e-8 off, see 9d",
    ),
];

struct Check {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn check(id: &'static str, pass: bool, detail: String) -> Check {
    Check { id, pass, detail }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

const N_FINE: usize = 999;

fn fine_laplacian() -> &'static MatrixOperator {
    static OP: OnceLock<MatrixOperator> = OnceLock::new();
    OP.get_or_init(|| {
        let op = build_laplacian_1d(&Grid1D::new(N_FINE).unwrap());
        op.eigen().unwrap();
        op
    })
}

fn lambda1() -> f64 {
    fine_laplacian().eigen().unwrap().eigenvalues()[0]
}

fn criterion_1() -> Vec<Check> {
    let op = fine_laplacian();
    let dv = dv_lower_bound(op, &WeightVector::ones(N_FINE)).unwrap();
    let l1 = lambda1();
    vec![check(
        "1",
        (7.99..=8.01).contains(&dv.value) && dv.value <= l1 && within(l1, PI * PI, 1e-3),
        format!(
            "torsion bound {:.6} in [7.99, 8.01], lambda_1 = {l1:.8}, |lambda_1 - pi^2| = {:.2e}",
            dv.value,
            (l1 - PI * PI).abs()
        ),
    )]
}

fn criterion_2() -> Vec<Check> {
    let grid = Grid1D::new(N_FINE).unwrap();
    let ones = WeightVector::ones(N_FINE);
    let hinged = build_bilaplacian_1d(&grid, BiharmonicBc::Hinged).unwrap();
    let clamped = build_bilaplacian_1d(&grid, BiharmonicBc::Clamped).unwrap();
    let (bh, bc) = (dv_lower_bound(&hinged, &ones).unwrap().value, dv_lower_bound(&clamped, &ones).unwrap().value);
    let lh = hinged.eigen().unwrap().eigenvalues()[0];
    let lc = clamped.eigen().unwrap().eigenvalues()[0];
    let pi4 = PI.powi(4);
    vec![
        check(
            "2a",
            within(bh, 76.8, 0.5) && bh <= lh && within(lh, pi4, 0.1),
            format!(
                "hinged: bound {bh:.4} (76.8 +- 0.5) <= lambda_1 = {lh:.4}, |lambda_1 - pi^4| = {:.2e}",
                (lh - pi4).abs()
            ),
        ),
        check(
            "2b",
            within(bc, 384.0, 2.0) && bc <= lc,
            format!("clamped: bound {bc:.3} (384 +- 2) <= lambda_1 = {lc:.3}"),
        ),
    ]
}

/// `(4/pi) sum_{odd k} e^{t(lambda - pi^2 k^2)}/k sin(pi k x)` over 150 odd terms.
fn heat_series(t: f64, lambda: f64, x: f64) -> f64 {
    let s: f64 = (0..150)
        .map(|m| {
            let k = (2 * m + 1) as f64;
            (t * (lambda - PI * PI * k * k)).exp() / k * (PI * k * x).sin()
        })
        .sum();
    4.0 / PI * s
}

fn criterion_3() -> Vec<Check> {
    let op = fine_laplacian();
    let ones = WeightVector::ones(N_FINE);
    let mu_grid = [-PI * PI + 1e-5, 10.0, 1e2, 1e3, 1e4, 1e5];
    let t_grid = decades(-5, 2);
    let mut worst_res = f64::INFINITY;
    let mut worst_par = f64::INFINITY;
    let mut ok = true;
    for k in 0..10 {
        let pair = Eigenpair::from_operator(op, k).unwrap();
        let env = resolvent_envelope(op, pair.lambda, &ones, &mu_grid).unwrap();
        let r1 = verify_eigenvector_bound(&pair, &env, &ones, None).unwrap();
        let par = parabolic_envelope(op, pair.lambda, &ones, &t_grid).unwrap();
        let r2 = verify_eigenvector_bound(&pair, &par, &ones, None).unwrap();
        worst_res = worst_res.min(r1.min_slack);
        worst_par = worst_par.min(r2.min_slack);
        ok &= r1.certified && r2.certified;
    }
    let mid = Grid1D::new(N_FINE).unwrap().nearest_index(0.5);
    let par1 = parabolic_envelope(op, lambda1(), &ones, &t_grid).unwrap();
    let series = t_grid.iter().map(|&t| heat_series(t, PI * PI, 0.5)).fold(f64::INFINITY, f64::min);
    let gap = (par1.values[mid] - series).abs();
    vec![
        check("3a", ok && worst_res >= -1e-8, format!("resolvent envelope, k = 1..10: min slack {worst_res:.3e}")),
        check("3b", ok && worst_par >= -1e-8, format!("parabolic envelope, k = 1..10: min slack {worst_par:.3e}")),
        check(
            "3c",
            gap <= 1e-6,
            format!(
                "parabolic envelope at x = 1/2: {:.9} vs odd-mode series {series:.9}, gap {gap:.2e}",
                par1.values[mid]
            ),
        ),
    ]
}

fn criterion_4() -> Vec<Check> {
    let op = fine_laplacian();
    let ones = WeightVector::ones(N_FINE);
    let pair = Eigenpair::from_operator(op, 0).unwrap();
    let probe = antimaximum_probe(op, &ones, &[0.5, 1.0, 2.0, 5.0, 7.0], pair.lambda).unwrap();
    let report = verify_eigenvector_bound(&pair, &probe.landscape, &ones, None).unwrap();
    let gap = {
        let e = op.eigen().unwrap().eigenvalues();
        e[1] - e[0]
    };
    vec![check(
        "4",
        probe.eps_max == 7.0 && 7.0 < gap && report.certified,
        format!(
            "eps_max = {} (gap {gap:.4}), rejected {:?}, min slack {:.3e}",
            probe.eps_max, probe.rejected, report.min_slack
        ),
    )]
}

fn criterion_5() -> Vec<Check> {
    let n = 199;
    let grid = Grid1D::new(n).unwrap();
    let op = build_laplacian_1d(&grid);
    let h = grid.h();
    let modes = mode_landscapes(&op, &WeightVector::ones(n), 150, h, &heat_mu_grid(&op).unwrap()).unwrap();
    let eig = op.eigen().unwrap();
    let report_at = |t: f64| {
        let kernel = mercer_kernel(eig, t, 150, h).unwrap();
        let bound = heat_kernel_bound(&modes, t).unwrap();
        heat_bound_report(&kernel, &bound, 1e-8).unwrap()
    };
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for t in [1e-3, 1e-2, 1e-1, 0.3] {
        let r = report_at(t);
        ok &= r.certified && r.min_slack >= -1e-8;
        worst = worst.min(r.min_slack);
    }
    let small = report_at(1e-5);
    vec![
        check("5a", ok, format!("t in {{1e-3, 1e-2, 1e-1, 0.3}}: min slack {worst:.3e}")),
        check(
            "5b",
            small.loose && small.min_slack >= -1e-8,
            format!(
                "t = 1e-5: loose = {}, mass ratio {:.3e}, tail converged = {}, min slack {:.3e}",
                small.loose, small.mass_ratio, small.tail_converged, small.min_slack
            ),
        ),
    ]
}

fn criterion_6() -> Vec<Check> {
    let op = fine_laplacian();
    let lb = parabolic_lower_bound(op, &WeightVector::ones(N_FINE), &decades(-5, 1)).unwrap();
    let target = PI * PI - (4.0 / PI).ln() / 10.0;
    let l1 = lambda1();
    vec![check(
        "6",
        within(lb.value, target, 1e-3) && lb.value <= l1,
        format!("t_max = 10: {:.6} vs {target:.6}, lambda_1 = {l1:.6}", lb.value),
    )]
}

fn criterion_7() -> Vec<Check> {
    let grid = Grid1D::new(N_FINE).unwrap();
    let h = grid.h();
    let kernel = resolvent_kernel(fine_laplacian(), 0.0, h).unwrap();
    let w = vec![h; N_FINE];
    let mode = KernelMode::Resolvent { mu: 0.0 };
    let row = kernel_hoelder_bounds(&kernel, &w, mode, HoelderNorm::RowSup).unwrap().value;
    let col = kernel_hoelder_bounds(&kernel, &w, mode, HoelderNorm::ColumnSup).unwrap().value;
    let l2 = kernel_hoelder_bounds(&kernel, &w, mode, HoelderNorm::L2).unwrap().value;
    vec![
        check(
            "7a",
            within(row, 8.0, 1e-3) && within(col, 8.0, 1e-3),
            format!("row sup {row:.6}, column sup {col:.6} (8 +- 1e-3)"),
        ),
        check(
            "7b",
            within(l2, 90f64.sqrt(), 1e-2) && l2 <= PI * PI,
            format!("L2 {l2:.6} vs sqrt(90) = {:.6}, <= pi^2", 90f64.sqrt()),
        ),
    ]
}

fn criterion_8() -> Vec<Check> {
    let grid = Grid1D::new(N_FINE).unwrap();
    let mut worst_torsion = 0.0f64;
    let mut order_ok = true;
    let mut solved = true;
    for p in [1.12, 1.15, 1.2, 1.25, 1.5, 2.0, 4.0] {
        let o = continuum_p_oracles(p).unwrap();
        match PLaplaceProblem::grid(grid, p).and_then(|prob| plap_torsion(&prob)) {
            Ok(v) => {
                let m = v.values.iter().fold(0.0f64, |a, x| a.max(*x));
                worst_torsion = worst_torsion.max((m - o.torsion_max).abs());
            }
            Err(e) => {
                eprintln!("p = {p}: {e}");
                solved = false;
            }
        }
        order_ok &= o.closed_form_bound <= o.lambda_min;
    }
    let bounds: Vec<f64> =
        CHEEGER_P_SEQUENCE.iter().map(|&p| continuum_p_oracles(p).unwrap().closed_form_bound).collect();
    let est = cheeger_limit_estimate(&CHEEGER_P_SEQUENCE, &bounds).unwrap();
    vec![
        check(
            "8a",
            solved && worst_torsion <= 5e-3,
            format!("discrete torsion max, worst gap to closed form {worst_torsion:.3e}"),
        ),
        check("8b", order_ok, "closed-form bound <= (p-1) pi_p^p for every p".into()),
        check(
            "8c",
            within(est.last, 2.0, 1e-2),
            format!("bound at p = 1.001: {:.6} (extrapolated {:.6}), target 2 +- 1e-2", est.last, est.richardson),
        ),
    ]
}

/// Minimize `2(a^4 + (1-a)^4)/(2a^4 + 1)` over `a` by golden-section search.
fn p5_ground_state_oracle() -> (f64, f64) {
    let r = |a: f64| 2.0 * (a.powi(4) + (1.0 - a).powi(4)) / (2.0 * a.powi(4) + 1.0);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.3, 0.8);
    for _ in 0..200 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if r(x1) < r(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let a = 0.5 * (lo + hi);
    (a, r(a))
}

fn criterion_9() -> Vec<Check> {
    let p5 = Graph::path(5).unwrap().with_dirichlet(vec![0, 4]).unwrap();
    let prob = PLaplaceProblem::graph(p5.clone(), 4.0).unwrap();
    let v = plap_torsion(&prob).unwrap();
    let c = 1.5f64.cbrt();
    let expected = [0.0, c, c + 0.5f64.cbrt(), c, 0.0];
    let gap1 = v.values.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let deg = PLaplaceProblem::graph(p5.with_degree_weights(), 4.0).unwrap();
    let vd = plap_torsion(&deg).unwrap();
    let quoted = [0.0, 1.442249595, 2.442249595, 1.442249595, 0.0];
    let gap2 = vd.values.iter().zip(quoted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let t = 3f64.cbrt();
    let exact = [0.0, t, t + 1.0, t, 0.0];
    let gap3 = vd.values.iter().zip(exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let (a, lambda) = p5_ground_state_oracle();
    let mut pair = Eigenpair::from_real(lambda, &[0.0, a, 1.0, a, 0.0], 0.0);
    pair.p = Some(4.0);
    let report = verify_nonlinear_bound(&pair, &v, 4.0).unwrap();
    let solved = plap_ground_state(&prob).unwrap();
    let gs_gap = (solved.lambda - lambda).abs().max((solved.vector[1].re - a).abs());
    vec![
        check("9a", gap1 <= 1e-9, format!("nu = 1 torsion vs closed form: {gap1:.2e}")),
        check("9b", gap2 <= 1e-8, format!("nu = deg torsion vs quoted values: {gap2:.2e}")),
        check("9d", gap3 <= 1e-9, format!("nu = deg torsion vs closed form (3^(1/3), 3^(1/3) + 1): {gap3:.2e}")),
        check(
            "9c",
            report.min_slack >= -1e-8 && gs_gap <= 1e-6,
            format!(
                "oracle a = {a:.10}, lambda = {lambda:.10}; bound min slack {:.3e}; solver gap {gs_gap:.2e}; \
                 quoted (lambda ~ 0.233665, a ~ 0.4575) kept as reference only",
                report.min_slack
            ),
        ),
    ]
}

fn random_graph(rng: &mut ChaCha8Rng) -> (Graph, MagneticSignature, PotentialVector) {
    loop {
        let n = rng.gen_range(2..=8);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(0.5) {
                    edges.push(Edge { u, v, weight: rng.gen_range(0.5..2.0) });
                }
            }
        }
        let dirichlet: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.25)).collect();
        let Ok(graph) = Graph::new(n, edges, vec![1.0; n], dirichlet) else {
            continue;
        };
        let angles = (0..graph.edges().len()).map(|_| rng.gen_range(-PI..PI)).collect();
        let alpha = MagneticSignature::new(&graph, angles).unwrap();
        let pot = PotentialVector::new((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
        return (graph, alpha, pot);
    }
}

fn criterion_10() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let ts = [0.1, 1.0, 10.0];
    let (mut dom_ok, mut bounds_ok) = (true, true);
    let mut worst_rel = f64::NEG_INFINITY;
    let mut worst_slack = f64::INFINITY;
    for _ in 0..20 {
        let (g, alpha, pot) = random_graph(&mut rng);
        let la = build_magnetic_laplacian(&g, &alpha).unwrap();
        let l = build_graph_laplacian(&g);
        let q = build_signless_laplacian(&g);
        let d1 = verify_semigroup_domination(&la, &l, &ts, None).unwrap();
        let d2 = verify_semigroup_domination(&la.scaled(-1.0), &q.scaled(-1.0), &ts, None).unwrap();
        for (_, r) in d1.per_time.iter().chain(&d2.per_time) {
            worst_rel = worst_rel.max(r.excess - r.tol);
        }
        dom_ok &= d1.dominated && d2.dominated;
        let indices: Vec<usize> = (0..la.dim()).collect();
        for b in magnetic_eigen_bounds(&g, &alpha, &pot, &indices, None).unwrap() {
            bounds_ok &= b.lower.certified && b.upper.certified;
            worst_slack = worst_slack.min(b.lower.min_slack).min(b.upper.min_slack);
        }
    }
    vec![
        check("10a", dom_ok, format!("20 graphs, t in {{0.1, 1, 10}}: worst excess over tolerance {worst_rel:.3e}")),
        check(
            "10b",
            bounds_ok,
            format!("lower and upper magnetic bounds, every eigenpair: min slack {worst_slack:.3e}"),
        ),
    ]
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> MatrixOperator {
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(rng.gen_range(-2.0..4.0), 0.0);
        for j in i + 1..n {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    MatrixOperator::from_complex("random", m).unwrap()
}

fn criterion_11() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    // Gauge norm is attained at the reported index and bounds every entry.
    let mut gauge_ok = true;
    for _ in 0..200 {
        let n = rng.gen_range(1..40);
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let rho = WeightVector::new((0..n).map(|_| rng.gen_range(0.1..3.0)).collect(), "r").unwrap();
        let g = gauge_norm(&f, &rho).unwrap();
        let i = gauge_argmax(&f, &rho).unwrap();
        gauge_ok &= f[i].abs() / rho.values()[i] == g;
        gauge_ok &= f.iter().zip(rho.values()).all(|(x, r)| x.abs() <= g * r * (1.0 + 1e-15));
    }

    // Envelopes sit below every member and do not grow when the grid grows.
    let mut env_ok = true;
    for _ in 0..10 {
        let n = 40;
        let grid = Grid1D::new(n).unwrap();
        let pot = PotentialVector::new((0..n).map(|_| rng.gen_range(0.0..50.0)).collect()).unwrap();
        let op = build_schroedinger_1d(&grid, &pot).unwrap();
        let rho = WeightVector::ones(n);
        let lambda = op.eigen().unwrap().eigenvalues()[0];
        let small = resolvent_envelope(&op, lambda, &rho, &[1.0, 100.0]).unwrap();
        let big = resolvent_envelope(&op, lambda, &rho, &[1.0, 10.0, 100.0, 1e4]).unwrap();
        env_ok &= big.values.iter().zip(&small.values).all(|(b, s)| b <= s);
        for mu in [1.0, 10.0, 100.0, 1e4] {
            let m = resolvent_landscape(&op, mu, lambda, &rho).unwrap();
            env_ok &= big.values.iter().zip(&m.values).all(|(b, x)| b <= x);
        }
    }

    // A^{-k} 1 decreases in k for the Dirichlet Laplacian, since A^{-1} 1 <= 1.
    let it = iterated_landscape(&build_laplacian_1d(&Grid1D::new(99).unwrap()), &WeightVector::ones(99), 6).unwrap();
    let iter_ok = it.submarkov && it.monotone;

    // |exp(-tA)| <= exp(-tA#) for random Hermitian A.
    let mut modulus_ok = true;
    for _ in 0..50 {
        let n = rng.gen_range(2..=6);
        let a = random_hermitian(&mut rng, n);
        let dom = verify_semigroup_domination(&a, &modulus_generator(&a), &[0.1, 1.0, 3.0], None).unwrap();
        modulus_ok &= dom.dominated;
    }

    // (p-1)-homogeneity of L_p and order preservation of its inverse.
    let mut hom_ok = true;
    let mut order_ok = true;
    for p in [1.5, 2.0, 3.0, 4.0] {
        let prob = PLaplaceProblem::graph(Graph::path(8).unwrap().with_dirichlet(vec![0, 7]).unwrap(), p).unwrap();
        for _ in 0..10 {
            let mut f: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            f[0] = 0.0;
            f[7] = 0.0;
            let c: f64 = rng.gen_range(-3.0..3.0);
            let cf: Vec<f64> = f.iter().map(|x| c * x).collect();
            let lhs = plap_apply(&prob, &cf).unwrap();
            let rhs = plap_apply(&prob, &f).unwrap();
            let scale = c.signum() * c.abs().powf(p - 1.0);
            hom_ok &= lhs.iter().zip(&rhs).all(|(a, b)| (a - scale * b).abs() <= 1e-12 * (1.0 + (scale * b).abs()));

            let b1: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..1.0)).collect();
            let b2: Vec<f64> = b1.iter().map(|x| x + rng.gen_range(0.0..1.0)).collect();
            let (u1, u2) = (plap_solve(&prob, &b1).unwrap(), plap_solve(&prob, &b2).unwrap());
            order_ok &= u1.values.iter().zip(&u2.values).all(|(a, b)| *a <= b + 1e-10);
        }
    }

    vec![
        check("11a", gauge_ok, "gauge-norm attainment, 200 random pairs".into()),
        check("11b", env_ok, "envelope below members and monotone in the grid, 10 random potentials".into()),
        check("11c", iter_ok, "iterated landscape decreases on the Dirichlet Laplacian".into()),
        check("11d", modulus_ok, "modulus-generator domination, 50 random Hermitian matrices".into()),
        check("11e", hom_ok && order_ok, format!("p-homogeneity {hom_ok}, order preservation {order_ok}")),
    ]
}

fn main() {
    let start = Instant::now();
    fine_laplacian();
    let runs: [fn() -> Vec<Check>; 11] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
    ];
    let results: Vec<Vec<Check>> = std::thread::scope(|s| {
        let handles: Vec<_> = runs.iter().map(|f| s.spawn(f)).collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    });

    let mut unexpected = Vec::new();
    for c in results.iter().flatten() {
        let expected = EXPECTED_FAILURES.iter().find(|(id, _)| *id == c.id);
        let tag = match (c.pass, expected) {
            (true, None) => "PASS",
            (false, Some(_)) => "FAIL (expected)",
            (false, None) => {
                unexpected.push(format!("{} failed", c.id));
                "FAIL"
            }
            (true, Some(_)) => {
                unexpected.push(format!("{} passed but is listed as an expected failure", c.id));
                "PASS (unexpected)"
            }
        };
        println!("{tag:<17} [{:>3}] {}", c.id, c.detail);
        if let (false, Some((_, why))) = (c.pass, expected) {
            println!("{:<17}       reason: {why}", "");
        }
    }
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    if !unexpected.is_empty() {
        eprintln!("acceptance: {unexpected:?}");
        std::process::exit(1);
    }
}
