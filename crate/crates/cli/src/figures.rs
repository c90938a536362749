//! Figure suites fig1..fig6. Grids come from the scenario; the figure
//! aliases prefill fixed grids in `scenario::figure_defaults`.

use anyhow::{bail, Context, Result};
use landscape_core::estimators::continuum_p_oracles;
use landscape_core::heat::{heat_bound_report, heat_kernel_bound, heat_mu_grid, mercer_kernel, mode_landscapes};
use landscape_core::landscape::{
    antimaximum_probe, parabolic_envelope, parabolic_landscape, pointwise_min, resolvent_envelope, resolvent_landscape,
    torsion,
};
use landscape_core::lattice::{gauge_norm, spectral_bound_neg};
use landscape_core::plap::{plap_torsion, PLaplaceProblem};
use landscape_core::verify::verify_eigenvector_bound;
use landscape_core::{Eigenpair, LandscapeFunction, WeightVector};

use crate::output::ResultTable;
use crate::run::{build_operator, Built, Certification, RunOutput};
use crate::scenario::{Figure, Scenario};

pub fn run_figure(f: Figure, s: &Scenario) -> Result<RunOutput> {
    let b = build_operator(&s.operator)?;
    match f {
        Figure::Fig1 => fig1(&b),
        Figure::Fig2 => fig2(s, &b),
        Figure::Fig3 => fig3(s, &b),
        Figure::Fig4 => fig4(s, &b),
        Figure::Fig5 => fig5(s, &b),
        Figure::Fig6 => fig6(s, &b),
    }
}

/// Points of `lo * (hi/lo)^{j/(n-1)}`.
fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = (hi / lo).ln();
    (0..n).map(|j| lo * (r * j as f64 / (n - 1) as f64).exp()).collect()
}

fn ground_lambda(s: &Scenario, b: &Built) -> Result<f64> {
    Ok(s.lambda.unwrap_or(b.op.eigen()?.eigenvalues()[0]))
}

/// `|phi| / ||phi||_rho`.
fn scaled_abs(pair: &Eigenpair, rho: &WeightVector) -> Result<Vec<f64>> {
    let a = pair.abs();
    let g = gauge_norm(&a, rho)?;
    Ok(a.iter().map(|x| x / g).collect())
}

/// Envelope built from explicit members, with the verification attached.
fn certify(
    out: &mut RunOutput,
    label: &str,
    pair: &Eigenpair,
    lf: &LandscapeFunction,
    rho: &WeightVector,
) -> Result<()> {
    let r = verify_eigenvector_bound(pair, lf, rho, None)?;
    out.certifications.push(Certification::from_report(label, &r));
    Ok(())
}

fn min_landscape(members: &[&LandscapeFunction], template: &LandscapeFunction) -> LandscapeFunction {
    let rows: Vec<Vec<f64>> = members.iter().map(|m| m.values.clone()).collect();
    LandscapeFunction { values: pointwise_min(&rows), warnings: Vec::new(), ..template.clone() }
}

/// `sup_x (mu - s) (mu + A)^{-1} 1` for `mu` from just above `s` to 200.
fn fig1(b: &Built) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let s = spectral_bound_neg(&b.op)?;
    if !(s < 200.0) {
        bail!("spectral bound {s} is not below 200");
    }
    let ones = WeightVector::ones(b.op.dim());
    let center = b.op.dim() / 2;
    let mut t = ResultTable::new("fig1", &["mu", "sup_landscape", "center_value"]);
    for delta in geomspace(1e-5, 200.0 - s, 121) {
        let mu = s + delta;
        let lf = resolvent_landscape(&b.op, mu, -s, &ones)?;
        t.push(vec![mu, lf.max(), lf.values[center]])?;
    }
    out.plotted(t, "Sup of the resolvent landscape over mu");
    Ok(out)
}

/// Two resolvent members, their envelope, `lambda A^{-1} 1` and the ground state.
fn fig2(s: &Scenario, b: &Built) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let lambda = ground_lambda(s, b)?;
    let ones = WeightVector::ones(b.op.dim());
    let grid = s.mu_grid.clone().context("fig2 needs a mu grid")?;
    let pair = Eigenpair::from_operator(&b.op, 0)?;
    let mut cols: Vec<(String, Vec<f64>)> = vec![("x".into(), b.xs.clone())];
    for &mu in &grid {
        cols.push((format!("resolvent_mu_{mu:e}"), resolvent_landscape(&b.op, mu, lambda, &ones)?.values));
    }
    let env = resolvent_envelope(&b.op, lambda, &ones, &grid)?;
    let canonical: Vec<f64> = torsion(&b.op, &ones)?.values.iter().map(|v| lambda.abs() * v).collect();
    cols.push(("envelope".into(), env.values.clone()));
    cols.push(("torsion_landscape".into(), canonical));
    cols.push(("ground_state".into(), scaled_abs(&pair, &ones)?));
    certify(&mut out, "fig2 ground state under envelope", &pair, &env, &ones)?;
    out.plotted(ResultTable::from_columns("fig2", cols)?, "Resolvent landscapes and their envelope");
    Ok(out)
}

/// Anti-maximum members combined with resolvent members, for rho = 1 and
/// rho = 4x(1-x), then the two-member parabolic envelope.
fn fig3(s: &Scenario, b: &Built) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let lambda = ground_lambda(s, b)?;
    let n = b.op.dim();
    let pair = Eigenpair::from_operator(&b.op, 0)?;
    let grid = s.mu_grid.clone().context("fig3 needs a mu grid")?;
    let mu_max = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let ones = WeightVector::ones(n);
    let anti = antimaximum_probe(&b.op, &ones, &s.eps_grid, lambda)?;
    let env = resolvent_envelope(&b.op, lambda, &ones, &grid)?;
    let combined = min_landscape(&[&anti.landscape, &env], &env);
    certify(&mut out, "fig3 rho = 1 combined bound", &pair, &combined, &ones)?;
    let t = ResultTable::from_columns(
        "fig3_ones",
        vec![
            ("x", b.xs.clone()),
            ("ground_state", scaled_abs(&pair, &ones)?),
            ("antimaximum", anti.landscape.values.clone()),
            ("resolvent_envelope", env.values.clone()),
            ("combined", combined.values),
        ],
    )?;
    out.plotted(t, "Anti-maximum and resolvent landscapes, rho = 1");

    let weights: Vec<f64> = b.xs.iter().map(|x| 4.0 * x * (1.0 - x)).collect();
    let rho = WeightVector::new(weights, "4x(1-x)").context("fig3 needs a grid on (0, 1)")?;
    let anti_w = antimaximum_probe(&b.op, &rho, &s.eps_grid, lambda)?;
    let res_w = resolvent_landscape(&b.op, mu_max, lambda, &rho)?;
    let combined_w = min_landscape(&[&anti_w.landscape, &res_w], &res_w);
    certify(&mut out, "fig3 rho = 4x(1-x) combined bound", &pair, &combined_w, &rho)?;
    let t = ResultTable::from_columns(
        "fig3_weighted",
        vec![
            ("x", b.xs.clone()),
            ("ground_state", scaled_abs(&pair, &rho)?),
            ("antimaximum", anti_w.landscape.values.clone()),
            ("resolvent", res_w.values.clone()),
            ("combined", combined_w.values),
        ],
    )?;
    out.plotted(t, "Anti-maximum and resolvent landscapes, rho = 4x(1-x)");

    let mut cols: Vec<(String, Vec<f64>)> =
        vec![("x".into(), b.xs.clone()), ("ground_state".into(), scaled_abs(&pair, &ones)?)];
    for &t in &s.t_grid {
        cols.push((format!("parabolic_t_{t:e}"), parabolic_landscape(&b.op, t, lambda, &ones)?.values));
    }
    let par = parabolic_envelope(&b.op, lambda, &ones, &s.t_grid)?;
    out.note_warnings("fig3", &par.warnings);
    certify(&mut out, "fig3 parabolic envelope", &pair, &par, &ones)?;
    cols.push(("envelope".into(), par.values));
    out.plotted(ResultTable::from_columns("fig3_parabolic", cols)?, "Parabolic landscapes");
    Ok(out)
}

/// Higher eigenvectors against their resolvent envelopes.
fn fig4(s: &Scenario, b: &Built) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let ones = WeightVector::ones(b.op.dim());
    let grid = s.mu_grid.clone().context("fig4 needs a mu grid")?;
    for &k in &s.k_list {
        if k > b.op.dim() {
            bail!("k = {k} exceeds the dimension {}", b.op.dim());
        }
        let pair = Eigenpair::from_operator(&b.op, k - 1)?;
        let env = resolvent_envelope(&b.op, pair.lambda, &ones, &grid)?;
        certify(&mut out, &format!("fig4 k = {k} envelope"), &pair, &env, &ones)?;
        let t = ResultTable::from_columns(
            format!("fig4_k{k}"),
            vec![("x", b.xs.clone()), ("eigenvector", scaled_abs(&pair, &ones)?), ("envelope", env.values)],
        )?;
        out.plotted(t, &format!("Eigenvector {k} and its landscape bound"));
    }
    Ok(out)
}

/// Heat kernel `p_t(., 1/2)` against the landscape bound, one table per time.
fn fig5(s: &Scenario, b: &Built) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let n = b.op.dim();
    let terms = s.terms.min(n);
    let eig = b.op.eigen()?;
    let modes = mode_landscapes(&b.op, &WeightVector::ones(n), terms, b.h, &heat_mu_grid(&b.op)?)?;
    let center = n / 2;
    for &t in &s.t_grid {
        let kernel = mercer_kernel(eig, t, terms, b.h)?;
        let bound = heat_kernel_bound(&modes, t)?;
        let r = heat_bound_report(&kernel, &bound, 1e-8)?;
        if r.loose {
            out.notes.push(format!("t = {t:e}: bound is loose (mass ratio {:.1})", r.mass_ratio));
        }
        out.certifications.push(Certification::new(
            format!("fig5 t = {t:e}"),
            r.certified,
            format!("min slack {:.3e}, mass ratio {:.2}", r.min_slack, r.mass_ratio),
        ));
        let table = ResultTable::from_columns(
            format!("fig5_t{t:e}"),
            vec![
                ("x", b.xs.clone()),
                ("kernel", kernel.values.column(center).iter().copied().collect()),
                ("bound", bound.matrix.values.column(center).iter().copied().collect()),
            ],
        )?;
        out.plotted(table, &format!("Heat kernel at y = 1/2, t = {t:e}"));
    }
    Ok(out)
}

/// Closed-form eigenvalue against the torsion bound over p, then rescaled
/// discrete p-torsion functions.
fn fig6(s: &Scenario, b: &Built) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let mut t = ResultTable::new("fig6_bounds", &["p", "lambda_min", "closed_form_bound"]);
    let mut ordered = true;
    for j in 1..=180 {
        let p = 1.0 + 0.05 * j as f64;
        let o = continuum_p_oracles(p)?;
        ordered &= o.closed_form_bound <= o.lambda_min;
        t.push(vec![p, o.lambda_min, o.closed_form_bound])?;
    }
    out.certifications.push(Certification::new("fig6 bound below eigenvalue", ordered, "p in [1.05, 10]"));
    out.plotted(t, "Smallest p-eigenvalue and its torsion bound");

    let grid = b.grid.context("fig6 needs a grid operator")?;
    let mut cols: Vec<(String, Vec<f64>)> = vec![("x".into(), b.xs.clone())];
    for &p in &s.p_list {
        let v = plap_torsion(&PLaplaceProblem::grid(grid, p)?).with_context(|| format!("p = {p}"))?;
        out.note_warnings(&format!("p = {p}"), &v.warnings);
        let scale = continuum_p_oracles(p)?.lambda_min.powf(1.0 / (p - 1.0));
        cols.push((format!("scaled_torsion_p{p}"), v.values.iter().map(|x| scale * x).collect()));
    }
    out.plotted(ResultTable::from_columns("fig6_torsion", cols)?, "Rescaled p-torsion functions");
    Ok(out)
}
