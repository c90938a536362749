//! Scenario documents: JSON in, validated [`Scenario`] out.
//!
//! Validation walks the document by hand so every error carries the JSON
//! pointer of the offending field.

use std::f64::consts::PI;
use std::path::PathBuf;

use landscape_core::BiharmonicBc;
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("scenario error at {pointer}: {message}")]
pub struct ScenarioError {
    pub pointer: String,
    pub message: String,
}

fn err<T>(pointer: &str, message: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError { pointer: pointer.into(), message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Figure {
    pub const ALL: [Figure; 6] = [Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::Fig6];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Spectrum,
    Landscape,
    Verify,
    LowerBound,
    HeatKernel,
    Plap,
    Magnetic,
    Figure(Figure),
}

impl Task {
    pub const NAMES: [&'static str; 8] =
        ["spectrum", "landscape", "verify", "lowerbound", "heatkernel", "plap", "magnetic", "figure"];

    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Landscape => "landscape",
            Task::Verify => "verify",
            Task::LowerBound => "lowerbound",
            Task::HeatKernel => "heatkernel",
            Task::Plap => "plap",
            Task::Magnetic => "magnetic",
            Task::Figure(f) => f.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Values(Vec<f64>),
    /// `depth` on `[lo, hi]`, zero elsewhere.
    Indicator {
        lo: f64,
        hi: f64,
        depth: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Laplacian1d {
        n: usize,
    },
    Schroedinger1d {
        n: usize,
        potential: PotentialSpec,
    },
    Bilaplacian1d {
        n: usize,
        bc: BiharmonicBc,
    },
    /// Edge-list graph document plus a potential indexed by all vertices.
    Graph {
        document: Value,
        potential: Option<Vec<f64>>,
    },
}

impl OperatorSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            OperatorSpec::Laplacian1d { .. } => "laplacian_1d",
            OperatorSpec::Schroedinger1d { .. } => "schroedinger_1d",
            OperatorSpec::Bilaplacian1d { .. } => "bilaplacian_1d",
            OperatorSpec::Graph { .. } => "graph",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RhoSpec {
    Ones,
    /// `A^{-1} 1`.
    Torsion,
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub task: Task,
    pub operator: OperatorSpec,
    pub rho: RhoSpec,
    /// `None` means the operator-dependent default grid.
    pub mu_grid: Option<Vec<f64>>,
    pub t_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub p_list: Vec<f64>,
    /// 1-based eigenvalue indices.
    pub k_list: Vec<usize>,
    pub lambda: Option<f64>,
    /// Mercer terms for the heat kernel.
    pub terms: usize,
    pub output: Option<PathBuf>,
}

const FIG5_TIMES: [f64; 6] = [1e-5, 1e-4, 1e-3, 1e-2, 3e-1, 1e-1];

const TOP_KEYS: [&str; 12] = [
    "task", "figure", "operator", "rho", "mu_grid", "t_grid", "eps_grid", "p_list", "k_list", "lambda", "terms",
    "output",
];

pub fn parse_scenario_str(text: &str) -> Result<Scenario, ScenarioError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ScenarioError { pointer: String::new(), message: e.to_string() })?;
    parse_scenario(&value)
}

pub fn parse_scenario(doc: &Value) -> Result<Scenario, ScenarioError> {
    let obj = object(doc, "")?;
    reject_unknown(obj, "", &TOP_KEYS)?;
    let task = match obj.get("task") {
        None => return err("/task", "missing required field"),
        Some(v) => string(v, "/task")?,
    };
    let figure = obj.get("figure").map(|v| string(v, "/figure")).transpose()?;
    let task = match (task, figure) {
        ("figure", Some(f)) => match Figure::parse(f) {
            Some(f) => Task::Figure(f),
            None => return err("/figure", format!("unknown figure `{f}`, expected fig1..fig6")),
        },
        ("figure", None) => return err("/figure", "missing required field for task `figure`"),
        (_, Some(_)) => return err("/figure", "only valid with task `figure`"),
        (t, None) => match t {
            "spectrum" => Task::Spectrum,
            "landscape" => Task::Landscape,
            "verify" => Task::Verify,
            "lowerbound" => Task::LowerBound,
            "heatkernel" => Task::HeatKernel,
            "plap" => Task::Plap,
            "magnetic" => Task::Magnetic,
            other => match Figure::parse(other) {
                Some(f) => Task::Figure(f),
                None => {
                    return err("/task", format!("unknown task `{other}`, expected one of {}", Task::NAMES.join(", ")))
                }
            },
        },
    };

    let mut s = match task {
        Task::Figure(f) => figure_defaults(f),
        _ => Scenario {
            task,
            operator: OperatorSpec::Laplacian1d { n: 0 },
            rho: RhoSpec::Ones,
            mu_grid: None,
            t_grid: landscape_core::landscape::default_t_grid(),
            eps_grid: vec![0.5, 1.0, 2.0, 5.0, 7.0],
            p_list: vec![2.0],
            k_list: (1..=10).collect(),
            lambda: None,
            terms: 150,
            output: None,
        },
    };

    match (obj.get("operator"), task) {
        (Some(v), _) => s.operator = operator(v, "/operator")?,
        (None, Task::Figure(_)) => {}
        (None, _) => return err("/operator", "missing required field"),
    }
    if let Some(v) = obj.get("rho") {
        s.rho = match v {
            Value::String(r) if r == "ones" => RhoSpec::Ones,
            Value::String(r) if r == "torsion" => RhoSpec::Torsion,
            Value::Array(_) => {
                let values = floats(v, "/rho")?;
                if let Some(i) = values.iter().position(|x| !(*x > 0.0)) {
                    return err(&format!("/rho/{i}"), "weights must be positive");
                }
                RhoSpec::Values(values)
            }
            _ => return err("/rho", "expected \"ones\", \"torsion\" or an array of positive numbers"),
        };
    }
    if let Some(v) = obj.get("mu_grid") {
        s.mu_grid = Some(grid(v, "/mu_grid")?);
    }
    if let Some(v) = obj.get("t_grid") {
        s.t_grid = grid(v, "/t_grid")?;
        positive(&s.t_grid, "/t_grid")?;
    }
    if let Some(v) = obj.get("eps_grid") {
        s.eps_grid = grid(v, "/eps_grid")?;
        positive(&s.eps_grid, "/eps_grid")?;
    }
    if let Some(v) = obj.get("p_list") {
        s.p_list = grid(v, "/p_list")?;
        if let Some(i) = s.p_list.iter().position(|p| !(*p > 1.0)) {
            return err(&format!("/p_list/{i}"), "exponents must exceed 1");
        }
    }
    if let Some(v) = obj.get("k_list") {
        let Value::Array(items) = v else {
            return err("/k_list", "expected an array of positive integers");
        };
        if items.is_empty() {
            return err("/k_list", "must be nonempty");
        }
        s.k_list = items
            .iter()
            .enumerate()
            .map(|(i, x)| match x.as_u64() {
                Some(k) if k >= 1 => Ok(k as usize),
                _ => err(&format!("/k_list/{i}"), "expected a positive integer"),
            })
            .collect::<Result<_, _>>()?;
    }
    if let Some(v) = obj.get("lambda") {
        s.lambda = Some(float(v, "/lambda")?);
    }
    if let Some(v) = obj.get("terms") {
        s.terms = match v.as_u64() {
            Some(t) if t >= 1 => t as usize,
            _ => return err("/terms", "expected a positive integer"),
        };
    }
    if let Some(v) = obj.get("output") {
        s.output = Some(PathBuf::from(string(v, "/output")?));
    }
    check_task_fields(&s)?;
    Ok(s)
}

/// Hard-coded grids for the figure aliases.
fn figure_defaults(f: Figure) -> Scenario {
    let pi2 = PI * PI;
    let base = Scenario {
        task: Task::Figure(f),
        operator: OperatorSpec::Laplacian1d { n: 999 },
        rho: RhoSpec::Ones,
        mu_grid: None,
        t_grid: landscape_core::landscape::default_t_grid(),
        eps_grid: vec![7.0],
        p_list: vec![2.0],
        k_list: vec![1],
        lambda: None,
        terms: 150,
        output: None,
    };
    match f {
        // The sweep solves one dense system per grid point; n = 199 keeps it quick.
        Figure::Fig1 => Scenario { operator: OperatorSpec::Laplacian1d { n: 199 }, ..base },
        Figure::Fig2 => Scenario { mu_grid: Some(vec![-pi2 + 1e-5, 1e5]), ..base },
        Figure::Fig3 => Scenario { mu_grid: Some(vec![-pi2 + 1e-5, 1e5]), t_grid: vec![1e-5, 1e5], ..base },
        Figure::Fig4 => {
            let mut mu = vec![1e-5];
            mu.extend(landscape_core::landscape::decades(1, 5));
            Scenario { mu_grid: Some(mu), k_list: vec![2, 10], ..base }
        }
        Figure::Fig5 => {
            Scenario { operator: OperatorSpec::Laplacian1d { n: 199 }, t_grid: FIG5_TIMES.to_vec(), ..base }
        }
        Figure::Fig6 => Scenario {
            operator: OperatorSpec::Laplacian1d { n: 199 },
            p_list: vec![1.12, 1.15, 1.2, 1.25, 1.5],
            ..base
        },
    }
}

fn check_task_fields(s: &Scenario) -> Result<(), ScenarioError> {
    let graph = matches!(s.operator, OperatorSpec::Graph { .. });
    match s.task {
        Task::Magnetic if !graph => err("/operator/kind", "task `magnetic` needs a graph operator"),
        Task::Plap
            if matches!(s.operator, OperatorSpec::Schroedinger1d { .. } | OperatorSpec::Bilaplacian1d { .. }) =>
        {
            err("/operator/kind", "task `plap` needs laplacian_1d or graph")
        }
        Task::HeatKernel if matches!(s.operator, OperatorSpec::Bilaplacian1d { .. }) => {
            err("/operator/kind", "task `heatkernel` needs an inverse-positive operator")
        }
        _ => Ok(()),
    }
}

fn operator(v: &Value, ptr: &str) -> Result<OperatorSpec, ScenarioError> {
    let obj = object(v, ptr)?;
    let kind_ptr = format!("{ptr}/kind");
    let kind = match obj.get("kind") {
        Some(k) => string(k, &kind_ptr)?,
        None => return err(&kind_ptr, "missing required field"),
    };
    let n = || -> Result<usize, ScenarioError> {
        let p = format!("{ptr}/n");
        match obj.get("n").map(Value::as_u64) {
            None => err(&p, "missing required field"),
            Some(Some(n)) if n >= 1 => Ok(n as usize),
            Some(_) => err(&p, "expected a positive integer"),
        }
    };
    match kind {
        "laplacian_1d" => {
            reject_unknown(obj, ptr, &["kind", "n"])?;
            Ok(OperatorSpec::Laplacian1d { n: n()? })
        }
        "schroedinger_1d" => {
            reject_unknown(obj, ptr, &["kind", "n", "potential"])?;
            let n = n()?;
            let pp = format!("{ptr}/potential");
            let potential = match obj.get("potential") {
                None => return err(&pp, "missing required field"),
                Some(p @ Value::Array(_)) => {
                    let values = floats(p, &pp)?;
                    if values.len() != n {
                        return err(&pp, format!("expected {n} values, got {}", values.len()));
                    }
                    PotentialSpec::Values(values)
                }
                Some(p @ Value::Object(o)) => {
                    reject_unknown(o, &pp, &["kind", "lo", "hi", "depth"])?;
                    let kp = format!("{pp}/kind");
                    match o.get("kind").map(|k| string(k, &kp)).transpose()? {
                        Some("indicator") => {}
                        _ => return err(&kp, "expected \"indicator\""),
                    }
                    let field = |k: &str| -> Result<f64, ScenarioError> {
                        let fp = format!("{pp}/{k}");
                        match p.get(k) {
                            Some(x) => float(x, &fp),
                            None => err(&fp, "missing required field"),
                        }
                    };
                    let (lo, hi, depth) = (field("lo")?, field("hi")?, field("depth")?);
                    if !(lo < hi) {
                        return err(&format!("{pp}/hi"), "must exceed lo");
                    }
                    PotentialSpec::Indicator { lo, hi, depth }
                }
                Some(_) => return err(&pp, "expected an array or an indicator object"),
            };
            Ok(OperatorSpec::Schroedinger1d { n, potential })
        }
        "bilaplacian_1d" => {
            reject_unknown(obj, ptr, &["kind", "n", "bc"])?;
            let bp = format!("{ptr}/bc");
            let bc = match obj.get("bc").map(|b| string(b, &bp)).transpose()? {
                None | Some("hinged") => BiharmonicBc::Hinged,
                Some("clamped") => BiharmonicBc::Clamped,
                Some(other) => return err(&bp, format!("unknown boundary condition `{other}`")),
            };
            Ok(OperatorSpec::Bilaplacian1d { n: n()?, bc })
        }
        "graph" => {
            reject_unknown(obj, ptr, &["kind", "graph", "potential"])?;
            let gp = format!("{ptr}/graph");
            let document = match obj.get("graph") {
                Some(g @ Value::Object(_)) => g.clone(),
                Some(_) => return err(&gp, "expected an edge-list object"),
                None => return err(&gp, "missing required field"),
            };
            landscape_core::Graph::from_json_value(document.clone())
                .map_err(|e| ScenarioError { pointer: gp.clone(), message: e.to_string() })?;
            let potential = obj.get("potential").map(|p| floats(p, &format!("{ptr}/potential"))).transpose()?;
            Ok(OperatorSpec::Graph { document, potential })
        }
        other => err(
            &kind_ptr,
            format!("unknown operator `{other}`, expected laplacian_1d, schroedinger_1d, bilaplacian_1d or graph"),
        ),
    }
}

fn object<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>, ScenarioError> {
    v.as_object().ok_or_else(|| ScenarioError { pointer: ptr.into(), message: "expected an object".into() })
}

fn reject_unknown(obj: &Map<String, Value>, ptr: &str, allowed: &[&str]) -> Result<(), ScenarioError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => err(&format!("{ptr}/{}", escape_pointer(k)), "unknown field"),
        None => Ok(()),
    }
}

fn escape_pointer(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn string<'a>(v: &'a Value, ptr: &str) -> Result<&'a str, ScenarioError> {
    v.as_str().ok_or_else(|| ScenarioError { pointer: ptr.into(), message: "expected a string".into() })
}

fn float(v: &Value, ptr: &str) -> Result<f64, ScenarioError> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => err(ptr, "expected a finite number"),
    }
}

fn floats(v: &Value, ptr: &str) -> Result<Vec<f64>, ScenarioError> {
    let Value::Array(items) = v else {
        return err(ptr, "expected an array of numbers");
    };
    items.iter().enumerate().map(|(i, x)| float(x, &format!("{ptr}/{i}"))).collect()
}

fn grid(v: &Value, ptr: &str) -> Result<Vec<f64>, ScenarioError> {
    let g = floats(v, ptr)?;
    if g.is_empty() {
        return err(ptr, "must be nonempty");
    }
    Ok(g)
}

fn positive(g: &[f64], ptr: &str) -> Result<(), ScenarioError> {
    match g.iter().position(|x| !(*x > 0.0)) {
        Some(i) => err(&format!("{ptr}/{i}"), "must be positive"),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn minimal_lowerbound_scenario() {
        let s = parse_scenario(&json!({"operator": {"kind": "laplacian_1d", "n": 999}, "task": "lowerbound"})).unwrap();
        assert_eq!(s.task, Task::LowerBound);
        assert_eq!(s.operator, OperatorSpec::Laplacian1d { n: 999 });
        assert_eq!(s.rho, RhoSpec::Ones);
        assert!(s.mu_grid.is_none());
        assert_eq!(s.t_grid, landscape_core::landscape::default_t_grid());
    }

    #[test]
    fn missing_operator_points_at_operator() {
        let e = parse_scenario(&json!({"task": "verify"})).unwrap_err();
        assert_eq!(e.pointer, "/operator");
    }

    #[test]
    fn nested_errors_carry_pointers() {
        let cases = [
            (json!({"task": "landscape", "operator": {"kind": "laplacian_1d"}}), "/operator/n"),
            (
                json!({"task": "landscape", "operator": {"kind": "laplacian_1d", "n": 5}, "t_grid": [1, -1]}),
                "/t_grid/1",
            ),
            (json!({"task": "landscape", "operator": {"kind": "laplacian_1d", "n": 5}, "mu_grid": []}), "/mu_grid"),
            (json!({"task": "landscape", "operator": {"kind": "laplacian_1d", "n": 5}, "bogus": 1}), "/bogus"),
            (json!({"task": "landscape", "operator": {"kind": "cube", "n": 5}}), "/operator/kind"),
            (
                json!({"task": "landscape", "operator": {"kind": "schroedinger_1d", "n": 5, "potential": {"kind": "indicator", "lo": 0.5, "hi": 0.2, "depth": 1}}}),
                "/operator/potential/hi",
            ),
            (json!({"task": "magnetic", "operator": {"kind": "laplacian_1d", "n": 5}}), "/operator/kind"),
            (json!({"task": "verify", "operator": {"kind": "laplacian_1d", "n": 5}, "k_list": [1, 0]}), "/k_list/1"),
            (json!({"task": "figure", "figure": "fig9"}), "/figure"),
            (
                json!({"task": "verify", "operator": {"kind": "graph", "graph": {"vertices": [0], "extra": 1}}}),
                "/operator/graph",
            ),
        ];
        for (doc, ptr) in cases {
            assert_eq!(parse_scenario(&doc).unwrap_err().pointer, ptr, "{doc}");
        }
    }

    #[test]
    fn fig2_expands_to_caption_grid() {
        let s = parse_scenario(&json!({"task": "figure", "figure": "fig2"})).unwrap();
        assert_eq!(s.task, Task::Figure(Figure::Fig2));
        assert_eq!(s.operator, OperatorSpec::Laplacian1d { n: 999 });
        assert_eq!(s.mu_grid, Some(vec![-PI * PI + 1e-5, 1e5]));
    }

    #[test]
    fn figure_names_work_as_task_aliases() {
        let s = parse_scenario(&json!({"task": "fig5"})).unwrap();
        assert_eq!(s.task, Task::Figure(Figure::Fig5));
        assert_eq!(s.t_grid, FIG5_TIMES.to_vec());
    }
}
