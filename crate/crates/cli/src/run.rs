//! Task dispatch: a validated scenario in, result tables and certifications out.

use anyhow::{anyhow, bail, Context, Result};
use landscape_core::estimators::{
    continuum_p_oracles, dv_lower_bound, nonlinear_lower_bound, parabolic_lower_bound, resolvent_optimized_lower_bound,
};
use landscape_core::heat::{heat_bound_report, heat_kernel_bound, heat_mu_grid, mercer_kernel, mode_landscapes};
use landscape_core::landscape::{decades, default_mu_grid, parabolic_envelope, resolvent_envelope, torsion};
use landscape_core::lattice::gauge_norm;
use landscape_core::operator::{
    build_bilaplacian_1d, build_laplacian_1d, build_magnetic_laplacian, build_schroedinger_1d,
};
use landscape_core::plap::{plap_ground_state, plap_torsion, verify_nonlinear_bound, PLaplaceProblem};
use landscape_core::verify::{magnetic_eigen_bounds, verify_eigenvector_bound};
use landscape_core::{
    BoundReport, Eigenpair, Graph, Grid1D, MagneticSignature, MatrixOperator, PotentialVector, WeightVector,
};

use crate::figures;
use crate::output::{PlotSpec, ResultTable};
use crate::scenario::{OperatorSpec, PotentialSpec, RhoSpec, Scenario, Task};

/// Outcome of one requested check.
#[derive(Debug, Clone, PartialEq)]
pub struct Certification {
    pub label: String,
    pub certified: bool,
    pub detail: String,
}

impl Certification {
    pub fn new(label: impl Into<String>, certified: bool, detail: impl Into<String>) -> Self {
        Self { label: label.into(), certified, detail: detail.into() }
    }

    pub fn from_report(label: impl Into<String>, r: &BoundReport) -> Self {
        Self::new(label, r.certified, format!("min slack {:.3e} (tol {:.1e})", r.min_slack, r.tol))
    }
}

#[derive(Debug, Clone)]
pub struct Artifact {
    pub table: ResultTable,
    pub plot: Option<PlotSpec>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub certifications: Vec<Certification>,
    /// Warnings from the numerics worth showing to the user.
    pub notes: Vec<String>,
}

impl RunOutput {
    pub fn all_certified(&self) -> bool {
        self.certifications.iter().all(|c| c.certified)
    }

    pub(crate) fn table(&mut self, table: ResultTable) {
        self.artifacts.push(Artifact { table, plot: None });
    }

    pub(crate) fn plotted(&mut self, table: ResultTable, title: &str) {
        let plot = PlotSpec::all_against_first(&table, title);
        self.artifacts.push(Artifact { table, plot: Some(plot) });
    }

    pub(crate) fn note_warnings(&mut self, context: &str, warnings: &[String]) {
        self.notes.extend(warnings.iter().map(|w| format!("{context}: {w}")));
    }
}

/// An operator plus what the tasks need to interpret its entries.
pub struct Built {
    pub op: MatrixOperator,
    /// Abscissa per unknown: grid points, or vertex indices of free vertices.
    pub xs: Vec<f64>,
    /// Quadrature weight of one unknown: mesh width on grids, 1 on graphs.
    pub h: f64,
    pub grid: Option<Grid1D>,
    pub graph: Option<GraphParts>,
}

pub struct GraphParts {
    pub graph: Graph,
    pub alpha: MagneticSignature,
    /// Indexed by all vertices.
    pub potential: PotentialVector,
}

pub fn build_operator(spec: &OperatorSpec) -> Result<Built> {
    let on_grid = |n: usize, op: MatrixOperator| -> Result<Built> {
        let grid = Grid1D::new(n)?;
        Ok(Built { op, xs: grid.points(), h: grid.h(), grid: Some(grid), graph: None })
    };
    match spec {
        OperatorSpec::Laplacian1d { n } => on_grid(*n, build_laplacian_1d(&Grid1D::new(*n)?)),
        OperatorSpec::Schroedinger1d { n, potential } => {
            let grid = Grid1D::new(*n)?;
            let pot = match potential {
                PotentialSpec::Values(v) => PotentialVector::new(v.clone())?,
                PotentialSpec::Indicator { lo, hi, depth } => PotentialVector::indicator(&grid, *lo, *hi, *depth),
            };
            on_grid(*n, build_schroedinger_1d(&grid, &pot)?)
        }
        OperatorSpec::Bilaplacian1d { n, bc } => on_grid(*n, build_bilaplacian_1d(&Grid1D::new(*n)?, *bc)?),
        OperatorSpec::Graph { document, potential } => {
            let (graph, alpha) = Graph::from_json_value(document.clone())?;
            let potential = match potential {
                Some(v) if v.len() != graph.n_vertices() => {
                    bail!("operator potential has {} entries, graph has {} vertices", v.len(), graph.n_vertices())
                }
                Some(v) => PotentialVector::new(v.clone())?,
                None => PotentialVector::zeros(graph.n_vertices()),
            };
            let free = graph.free_vertices();
            let v: Vec<f64> = free.iter().map(|&i| potential.values()[i]).collect();
            let op = build_magnetic_laplacian(&graph, &alpha)?.plus_diagonal(&v)?;
            let xs = free.iter().map(|&i| i as f64).collect();
            Ok(Built { op, xs, h: 1.0, grid: None, graph: Some(GraphParts { graph, alpha, potential }) })
        }
    }
}

pub fn resolve_rho(spec: &RhoSpec, op: &MatrixOperator) -> Result<WeightVector> {
    match spec {
        RhoSpec::Ones => Ok(WeightVector::ones(op.dim())),
        RhoSpec::Torsion => {
            let v = torsion(op, &WeightVector::ones(op.dim())).context("rho = torsion")?;
            Ok(WeightVector::new(v.values, "torsion").context("rho = torsion")?)
        }
        RhoSpec::Values(v) if v.len() != op.dim() => {
            bail!("rho has {} entries, operator has dimension {}", v.len(), op.dim())
        }
        RhoSpec::Values(v) => Ok(WeightVector::new(v.clone(), "rho")?),
    }
}

pub fn run_scenario(s: &Scenario) -> Result<RunOutput> {
    let name = s.task.name();
    let run = || -> Result<RunOutput> {
        if let Task::Figure(f) = s.task {
            return figures::run_figure(f, s);
        }
        let built = build_operator(&s.operator)?;
        match s.task {
            Task::Spectrum => spectrum(s, &built),
            Task::Landscape => landscape(s, &built),
            Task::Verify => verify(s, &built),
            Task::LowerBound => lowerbound(s, &built),
            Task::HeatKernel => heatkernel(s, &built),
            Task::Plap => plap(s, &built),
            Task::Magnetic => magnetic(s, &built),
            Task::Figure(_) => unreachable!("handled above"),
        }
    };
    run().with_context(|| format!("task `{name}` on {} operator", s.operator.kind()))
}

/// 1-based indices that exist for an operator of dimension `dim`.
fn valid_k(s: &Scenario, dim: usize, out: &mut RunOutput) -> Vec<usize> {
    let (keep, skip): (Vec<usize>, Vec<usize>) = s.k_list.iter().partition(|&&k| k <= dim);
    if !skip.is_empty() {
        out.notes.push(format!("k_list entries {skip:?} exceed the dimension {dim} and were skipped"));
    }
    keep
}

fn mu_grid_for(s: &Scenario, op: &MatrixOperator) -> Result<Vec<f64>> {
    match &s.mu_grid {
        Some(g) => Ok(g.clone()),
        None => Ok(default_mu_grid(op)?),
    }
}

fn spectrum(s: &Scenario, b: &Built) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let mut t = ResultTable::new("spectrum", &["k", "lambda", "residual"]);
    for k in valid_k(s, b.op.dim(), &mut out) {
        let pair = Eigenpair::from_operator(&b.op, k - 1)?;
        t.push(vec![k as f64, pair.lambda, pair.residual])?;
    }
    out.table(t);
    Ok(out)
}

fn landscape(s: &Scenario, b: &Built) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let rho = resolve_rho(&s.rho, &b.op)?;
    let pair = Eigenpair::from_operator(&b.op, 0)?;
    let lambda = s.lambda.unwrap_or(pair.lambda);
    let g = gauge_norm(&pair.abs(), &rho)?;
    let v = torsion(&b.op, &rho)?;
    let res = resolvent_envelope(&b.op, lambda, &rho, &mu_grid_for(s, &b.op)?)?;
    let par = parabolic_envelope(&b.op, lambda, &rho, &s.t_grid)?;
    for lf in [&v, &res, &par] {
        out.note_warnings("landscape", &lf.warnings);
    }
    let t = ResultTable::from_columns(
        "landscape",
        vec![
            ("x", b.xs.clone()),
            ("phi_over_gauge", pair.abs().iter().map(|a| a / g).collect()),
            ("torsion_bound", v.values.iter().map(|x| lambda.abs() * x).collect()),
            ("resolvent_envelope", res.values),
            ("parabolic_envelope", par.values),
        ],
    )?;
    out.plotted(t, "Ground state and landscape bounds");
    Ok(out)
}

fn verify(s: &Scenario, b: &Built) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let rho = resolve_rho(&s.rho, &b.op)?;
    let mu_grid = mu_grid_for(s, &b.op)?;
    let mut t = ResultTable::new("verify", &["k", "lambda", "resolvent_min_slack", "parabolic_min_slack", "certified"]);
    for k in valid_k(s, b.op.dim(), &mut out) {
        let pair = Eigenpair::from_operator(&b.op, k - 1)?;
        let res = resolvent_envelope(&b.op, pair.lambda, &rho, &mu_grid).with_context(|| format!("k = {k}"))?;
        let par = parabolic_envelope(&b.op, pair.lambda, &rho, &s.t_grid).with_context(|| format!("k = {k}"))?;
        out.note_warnings(&format!("k = {k}"), &par.warnings);
        let r1 = verify_eigenvector_bound(&pair, &res, &rho, None)?;
        let r2 = verify_eigenvector_bound(&pair, &par, &rho, None)?;
        let ok = r1.certified && r2.certified;
        t.push(vec![k as f64, pair.lambda, r1.min_slack, r2.min_slack, flag(ok)])?;
        out.certifications.push(Certification::from_report(format!("k = {k} resolvent envelope"), &r1));
        out.certifications.push(Certification::from_report(format!("k = {k} parabolic envelope"), &r2));
    }
    out.table(t);
    Ok(out)
}

fn lowerbound(s: &Scenario, b: &Built) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let rho = resolve_rho(&s.rho, &b.op)?;
    let lambda_min = b.op.eigen()?.eigenvalues()[0];
    let mu_grid = s.mu_grid.clone().unwrap_or_else(|| {
        let mut g = vec![0.0];
        g.extend(decades(-3, 5));
        g
    });
    let mut rho_set = vec![rho.clone()];
    if rho.values().iter().any(|&w| w != 1.0) {
        rho_set.push(WeightVector::ones(b.op.dim()));
    }
    let bounds = [
        dv_lower_bound(&b.op, &rho)?,
        resolvent_optimized_lower_bound(&b.op, &rho_set, &mu_grid)?,
        parabolic_lower_bound(&b.op, &rho, &s.t_grid)?,
    ];
    let mut t = ResultTable::new("lowerbound", &["lambda_min", "torsion", "resolvent_optimized", "parabolic"]);
    t.push(std::iter::once(lambda_min).chain(bounds.iter().map(|r| r.value)).collect())?;
    for r in &bounds {
        out.note_warnings(r.method, &r.warnings);
        let ok = r.clone().with_target(lambda_min).is_certified().unwrap_or(false);
        out.certifications.push(Certification::new(
            format!("{} lower bound", r.method),
            ok,
            format!("{:.10} <= lambda_min {:.10}", r.value, lambda_min),
        ));
    }
    out.table(t);
    Ok(out)
}

fn heatkernel(s: &Scenario, b: &Built) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let rho = resolve_rho(&s.rho, &b.op)?;
    let terms = s.terms.min(b.op.dim());
    let eig = b.op.eigen()?;
    let modes = mode_landscapes(&b.op, &rho, terms, b.h, &heat_mu_grid(&b.op)?)?;
    let center = b.op.dim() / 2;
    let mut summary = ResultTable::new(
        "heatkernel_summary",
        &["t", "min_slack", "max_ratio", "mass_ratio", "tail_converged", "loose", "certified"],
    );
    for (i, &t) in s.t_grid.iter().enumerate() {
        let kernel = mercer_kernel(eig, t, terms, b.h)?;
        let bound = heat_kernel_bound(&modes, t)?;
        let r = heat_bound_report(&kernel, &bound, 1e-8)?;
        let table = ResultTable::from_columns(
            format!("heatkernel_{i}"),
            vec![
                ("x", b.xs.clone()),
                ("kernel", kernel.values.column(center).iter().copied().collect()),
                ("bound", bound.matrix.values.column(center).iter().copied().collect()),
            ],
        )?;
        out.plotted(table, &format!("Heat kernel and bound at t = {t:e}"));
        summary.push(vec![
            t,
            r.min_slack,
            r.max_ratio,
            r.mass_ratio,
            flag(r.tail_converged),
            flag(r.loose),
            flag(r.certified),
        ])?;
        if r.loose {
            out.notes.push(format!("t = {t:e}: bound is loose (mass ratio {:.1})", r.mass_ratio));
        }
        out.certifications.push(Certification::new(
            format!("heat kernel bound at t = {t:e}"),
            r.certified,
            format!("min slack {:.3e}", r.min_slack),
        ));
    }
    out.table(summary);
    Ok(out)
}

fn plap(s: &Scenario, b: &Built) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    match (&b.grid, &b.graph) {
        (Some(grid), _) => {
            let mut cols: Vec<(String, Vec<f64>)> = vec![("x".into(), b.xs.clone())];
            let mut summary = ResultTable::new(
                "plap_summary",
                &["p", "torsion_max", "lower_bound", "continuum_lambda_min", "continuum_bound"],
            );
            for &p in &s.p_list {
                let v = plap_torsion(&PLaplaceProblem::grid(*grid, p)?).with_context(|| format!("p = {p}"))?;
                out.note_warnings(&format!("p = {p}"), &v.warnings);
                let lb = nonlinear_lower_bound(p, &v.values, &WeightVector::ones(v.values.len()))?;
                let o = continuum_p_oracles(p)?;
                let peak = v.values.iter().fold(0.0f64, |m, x| m.max(*x));
                summary.push(vec![p, peak, lb.value, o.lambda_min, o.closed_form_bound])?;
                cols.push((format!("torsion_p{p}"), v.values));
            }
            let table = ResultTable::from_columns("plap_torsion", cols)?;
            out.plotted(table, "p-torsion");
            out.table(summary);
        }
        (None, Some(parts)) => {
            if parts.alpha.angles().iter().any(|a| *a != 0.0) || parts.potential.values().iter().any(|v| *v != 0.0) {
                out.notes.push("plap ignores magnetic angles and the potential".into());
            }
            let xs: Vec<f64> = (0..parts.graph.n_vertices()).map(|i| i as f64).collect();
            let mut cols: Vec<(String, Vec<f64>)> = vec![("vertex".into(), xs)];
            let mut summary = ResultTable::new(
                "plap_summary",
                &["p", "torsion_max", "lower_bound", "lambda", "min_slack", "certified"],
            );
            for &p in &s.p_list {
                let prob = PLaplaceProblem::graph(parts.graph.clone(), p)?;
                let v = plap_torsion(&prob).with_context(|| format!("p = {p}"))?;
                let pair = plap_ground_state(&prob).with_context(|| format!("p = {p}"))?;
                let lb = nonlinear_lower_bound(p, &v.values, &WeightVector::ones(v.values.len()))?;
                let r = verify_nonlinear_bound(&pair, &v, p)?;
                let ordered = lb.value <= pair.lambda * (1.0 + 1e-8);
                let peak = v.values.iter().fold(0.0f64, |m, x| m.max(*x));
                summary.push(vec![p, peak, lb.value, pair.lambda, r.min_slack, flag(r.certified && ordered)])?;
                out.certifications.push(Certification::from_report(format!("p = {p} eigenvector bound"), &r));
                out.certifications.push(Certification::new(
                    format!("p = {p} eigenvalue lower bound"),
                    ordered,
                    format!("{:.10} <= {:.10}", lb.value, pair.lambda),
                ));
                cols.push((format!("torsion_p{p}"), v.values));
            }
            out.table(ResultTable::from_columns("plap_torsion", cols)?);
            out.table(summary);
        }
        (None, None) => bail!("plap needs a grid or graph operator"),
    }
    Ok(out)
}

fn magnetic(s: &Scenario, b: &Built) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let parts = b.graph.as_ref().ok_or_else(|| anyhow!("magnetic needs a graph operator"))?;
    let indices: Vec<usize> = valid_k(s, b.op.dim(), &mut out).iter().map(|k| k - 1).collect();
    let bounds = magnetic_eigen_bounds(&parts.graph, &parts.alpha, &parts.potential, &indices, s.mu_grid.as_deref())?;
    let mut t = ResultTable::new("magnetic", &["k", "lambda", "lower_min_slack", "upper_min_slack", "certified"]);
    for m in &bounds {
        let k = m.index + 1;
        t.push(vec![
            k as f64,
            m.lambda,
            m.lower.min_slack,
            m.upper.min_slack,
            flag(m.lower.certified && m.upper.certified),
        ])?;
        out.certifications.push(Certification::from_report(format!("k = {k} lower comparison"), &m.lower));
        out.certifications.push(Certification::from_report(format!("k = {k} upper comparison"), &m.upper));
    }
    out.table(t);
    Ok(out)
}

pub(crate) fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}
