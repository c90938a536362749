//! Finite-dimensional operators: 1D finite differences on the unit interval
//! and (magnetic) graph Laplacians with Dirichlet restriction.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, EigenDecomposition};

const HERMITIAN_RTOL: f64 = 1e-12;

/// Uniform grid of interior points on (0, 1) with Dirichlet ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n_interior: usize,
}

impl Grid1D {
    pub fn new(n_interior: usize) -> Result<Self> {
        if n_interior == 0 {
            return Err(Error::InvalidGrid("need at least one interior point".into()));
        }
        Ok(Self { n_interior })
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    /// Grid spacing `1 / (n + 1)`.
    pub fn h(&self) -> f64 {
        1.0 / (self.n_interior as f64 + 1.0)
    }

    /// Coordinates of the interior points, `x_j = j h` for `j = 1..=n`.
    pub fn points(&self) -> Vec<f64> {
        let h = self.h();
        (1..=self.n_interior).map(|j| j as f64 * h).collect()
    }

    /// Index of the interior point closest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let j = (x / self.h()).round() as isize - 1;
        j.clamp(0, self.n_interior as isize - 1) as usize
    }
}

/// Boundary condition for the fourth-order operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiharmonicBc {
    /// `u = u'' = 0`; the square of the Dirichlet Laplacian.
    Hinged,
    /// `u = u' = 0`, imposed through the ghost point `u(-h) = u(h)`.
    Clamped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Finite weighted undirected graph with a Dirichlet vertex set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    names: Vec<String>,
    edges: Vec<Edge>,
    nu: Vec<f64>,
    dirichlet: Vec<usize>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<Edge>, nu: Vec<f64>, dirichlet: Vec<usize>) -> Result<Self> {
        let names = (0..n).map(|i| i.to_string()).collect();
        Self::with_names(names, edges, nu, dirichlet)
    }

    pub fn with_names(names: Vec<String>, edges: Vec<Edge>, nu: Vec<f64>, mut dirichlet: Vec<usize>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if nu.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: nu.len() });
        }
        if let Some((i, w)) = nu.iter().enumerate().find(|(_, w)| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidGraph(format!("vertex weight nu[{i}] = {w} is not positive")));
        }
        let mut seen = HashSet::new();
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidGraph(format!("edge ({}, {}) out of range", e.u, e.v)));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("self loop at vertex {}", e.u)));
            }
            if !(e.weight > 0.0) || !e.weight.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has non-positive weight {}",
                    e.u, e.v, e.weight
                )));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", e.u, e.v)));
            }
        }
        dirichlet.sort_unstable();
        dirichlet.dedup();
        if let Some(&d) = dirichlet.iter().find(|&&d| d >= n) {
            return Err(Error::InvalidGraph(format!("Dirichlet vertex {d} out of range")));
        }
        if dirichlet.len() == n {
            return Err(Error::InvalidGraph("Dirichlet set must be a proper subset".into()));
        }
        Ok(Self { names, edges, nu, dirichlet })
    }

    /// Unweighted path `0 - 1 - ... - (n-1)`, `nu = 1`, no Dirichlet vertices.
    pub fn path(n: usize) -> Result<Self> {
        let edges = (1..n).map(|i| Edge { u: i - 1, v: i, weight: 1.0 }).collect();
        Self::new(n, edges, vec![1.0; n], Vec::new())
    }

    /// Unweighted complete graph on `n` vertices.
    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push(Edge { u, v, weight: 1.0 });
            }
        }
        Self::new(n, edges, vec![1.0; n], Vec::new())
    }

    pub fn with_dirichlet(mut self, dirichlet: Vec<usize>) -> Result<Self> {
        self.dirichlet = dirichlet;
        Self::with_names(self.names, self.edges, self.nu, self.dirichlet)
    }

    /// Same graph with vertex weights replaced by the weighted degrees.
    pub fn with_degree_weights(mut self) -> Self {
        self.nu = self.degrees();
        self
    }

    pub fn n_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn dirichlet(&self) -> &[usize] {
        &self.dirichlet
    }

    pub fn is_dirichlet(&self, v: usize) -> bool {
        self.dirichlet.binary_search(&v).is_ok()
    }

    /// Vertices that survive the Dirichlet restriction, in increasing order.
    pub fn free_vertices(&self) -> Vec<usize> {
        (0..self.n_vertices()).filter(|&v| !self.is_dirichlet(v)).collect()
    }

    /// Weighted degrees `sum_w mu_vw`.
    pub fn degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.n_vertices()];
        for e in &self.edges {
            deg[e.u] += e.weight;
            deg[e.v] += e.weight;
        }
        deg
    }

    /// Parse the edge-list JSON document
    /// `{"vertices":[...], "edges":[{"u":..,"v":..,"w":..,"alpha":..}], "nu":{..}, "dirichlet":[..]}`.
    ///
    /// Vertex ids may be strings or integers. Missing `nu` entries default to 1,
    /// missing `w` to 1 and missing `alpha` to 0.
    pub fn from_json_str(text: &str) -> Result<(Graph, MagneticSignature)> {
        let doc: GraphDocument = serde_json::from_str(text)?;
        doc.into_graph()
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<(Graph, MagneticSignature)> {
        let doc: GraphDocument = serde_json::from_value(value)?;
        doc.into_graph()
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum VertexId {
    Int(i64),
    Str(String),
}

impl VertexId {
    fn key(&self) -> String {
        match self {
            VertexId::Int(i) => i.to_string(),
            VertexId::Str(s) => s.clone(),
        }
    }
}

#[derive(Debug, Deserialize)]
struct EdgeDocument {
    u: VertexId,
    v: VertexId,
    #[serde(default = "one")]
    w: f64,
    #[serde(default)]
    alpha: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDocument {
    vertices: Vec<VertexId>,
    #[serde(default)]
    edges: Vec<EdgeDocument>,
    #[serde(default)]
    nu: BTreeMap<String, f64>,
    #[serde(default)]
    dirichlet: Vec<VertexId>,
}

impl GraphDocument {
    fn into_graph(self) -> Result<(Graph, MagneticSignature)> {
        let names: Vec<String> = self.vertices.iter().map(VertexId::key).collect();
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        if index.len() != names.len() {
            return Err(Error::InvalidGraph("duplicate vertex id".into()));
        }
        let lookup = |id: &VertexId| -> Result<usize> {
            let key = id.key();
            index.get(key.as_str()).copied().ok_or_else(|| Error::InvalidGraph(format!("unknown vertex `{key}`")))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut angles = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            edges.push(Edge { u: lookup(&e.u)?, v: lookup(&e.v)?, weight: e.w });
            angles.push(e.alpha);
        }
        let mut nu = vec![1.0; names.len()];
        for (key, w) in &self.nu {
            let i = index
                .get(key.as_str())
                .copied()
                .ok_or_else(|| Error::InvalidGraph(format!("nu given for unknown vertex `{key}`")))?;
            nu[i] = *w;
        }
        let dirichlet = self.dirichlet.iter().map(lookup).collect::<Result<Vec<_>>>()?;
        let graph = Graph::with_names(names, edges, nu, dirichlet)?;
        let alpha = MagneticSignature::new(&graph, angles)?;
        Ok((graph, alpha))
    }
}

/// Antisymmetric edge phases. `angles[e]` is the phase for the orientation
/// `edges[e].u -> edges[e].v`; the reverse orientation carries the negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagneticSignature {
    angles: Vec<f64>,
}

impl MagneticSignature {
    pub fn new(graph: &Graph, angles: Vec<f64>) -> Result<Self> {
        if angles.len() != graph.edges().len() {
            return Err(Error::SignatureMismatch(format!("{} angles for {} edges", angles.len(), graph.edges().len())));
        }
        if let Some(a) = angles.iter().find(|a| !a.is_finite()) {
            return Err(Error::SignatureMismatch(format!("non-finite angle {a}")));
        }
        Ok(Self { angles: angles.into_iter().map(wrap_angle).collect() })
    }

    pub fn zero(graph: &Graph) -> Self {
        Self { angles: vec![0.0; graph.edges().len()] }
    }

    /// `alpha = pi` on every edge; yields the signless Laplacian.
    pub fn signless(graph: &Graph) -> Self {
        Self { angles: vec![PI; graph.edges().len()] }
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Phase for the ordered pair `(a, b)`, zero when they are not adjacent.
    pub fn angle(&self, graph: &Graph, a: usize, b: usize) -> f64 {
        for (e, edge) in graph.edges().iter().enumerate() {
            if edge.u == a && edge.v == b {
                return self.angles[e];
            }
            if edge.u == b && edge.v == a {
                return -self.angles[e];
            }
        }
        0.0
    }
}

/// Map to `(-pi, pi]`.
fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = a.rem_euclid(two_pi);
    if r > PI {
        r -= two_pi;
    }
    r
}

/// Real potential, stored with its split `V = V+ - V-`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialVector {
    values: Vec<f64>,
}

impl PotentialVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite potential value {v}")));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n] }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self { values: vec![c; n] }
    }

    /// Piecewise-constant potential on a grid: `depth` on the points with
    /// `lo <= x <= hi`, zero elsewhere.
    pub fn indicator(grid: &Grid1D, lo: f64, hi: f64, depth: f64) -> Self {
        let values = grid.points().into_iter().map(|x| if x >= lo && x <= hi { depth } else { 0.0 }).collect();
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn positive_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.max(0.0)).collect()
    }

    pub fn negative_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| (-v).max(0.0)).collect()
    }
}

/// Where an operator came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Carrier {
    Grid(Grid1D),
    Graph { n_vertices: usize, free: Vec<usize> },
}

/// Dense storage; real operators stay real so the expensive kernels run in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub enum Entries {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

/// A finite square matrix standing for a discretized or graph operator.
#[derive(Debug, Clone)]
pub struct MatrixOperator {
    entries: Entries,
    hermitian: bool,
    label: String,
    carrier: Option<Carrier>,
    eigen: OnceLock<EigenDecomposition>,
    inverse_positive: OnceLock<bool>,
}

impl MatrixOperator {
    pub fn from_real(label: impl Into<String>, m: DMatrix<f64>) -> Result<Self> {
        Self::from_entries(label.into(), Entries::Real(m))
    }

    pub fn from_complex(label: impl Into<String>, m: DMatrix<Complex64>) -> Result<Self> {
        Self::from_entries(label.into(), Entries::Complex(m))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real("identity", DMatrix::identity(n, n)).expect("identity is valid")
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::from_real("diagonal", DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    fn from_entries(label: String, entries: Entries) -> Result<Self> {
        let (rows, cols, finite) = match &entries {
            Entries::Real(m) => (m.nrows(), m.ncols(), m.iter().all(|x| x.is_finite())),
            Entries::Complex(m) => (m.nrows(), m.ncols(), m.iter().all(|z| z.re.is_finite() && z.im.is_finite())),
        };
        if rows != cols {
            return Err(Error::DimensionMismatch { expected: rows, got: cols });
        }
        if !finite {
            return Err(Error::NonFinite(format!("entries of `{label}`")));
        }
        let mut op = Self {
            entries,
            hermitian: false,
            label,
            carrier: None,
            eigen: OnceLock::new(),
            inverse_positive: OnceLock::new(),
        };
        op.hermitian = op.hermitian_defect() <= HERMITIAN_RTOL * op.max_abs_entry();
        Ok(op)
    }

    fn with_carrier(mut self, carrier: Carrier) -> Self {
        self.carrier = Some(carrier);
        self
    }

    pub fn dim(&self) -> usize {
        match &self.entries {
            Entries::Real(m) => m.nrows(),
            Entries::Complex(m) => m.nrows(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn carrier(&self) -> Option<&Carrier> {
        self.carrier.as_ref()
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_real(&self) -> bool {
        matches!(self.entries, Entries::Real(_))
    }

    pub fn real(&self) -> Option<&DMatrix<f64>> {
        match &self.entries {
            Entries::Real(m) => Some(m),
            Entries::Complex(_) => None,
        }
    }

    pub fn require_real(&self) -> Result<&DMatrix<f64>> {
        self.real().ok_or_else(|| Error::ComplexOperator(self.label.clone()))
    }

    pub fn require_hermitian(&self) -> Result<()> {
        if self.hermitian {
            Ok(())
        } else {
            Err(Error::NotHermitian(self.label.clone()))
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match &self.entries {
            Entries::Real(m) => m.map(|x| Complex64::new(x, 0.0)),
            Entries::Complex(m) => m.clone(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.entries {
            Entries::Real(m) => Complex64::new(m[(i, j)], 0.0),
            Entries::Complex(m) => m[(i, j)],
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        match &self.entries {
            Entries::Real(m) => m.iter().fold(0.0, |acc, x| acc.max(x.abs())),
            Entries::Complex(m) => m.iter().fold(0.0, |acc, z| acc.max(z.norm())),
        }
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Induced infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        match &self.entries {
            Entries::Real(m) => m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max),
            Entries::Complex(m) => m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.require_real()?;
        check_len(self.dim(), x.len())?;
        Ok((m * DVector::from_column_slice(x)).as_slice().to_vec())
    }

    pub fn matvec_complex(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.dim(), x.len())?;
        let v = DVector::from_column_slice(x);
        let y = match &self.entries {
            Entries::Real(m) => m.map(|a| Complex64::new(a, 0.0)) * v,
            Entries::Complex(m) => m * v,
        };
        Ok(y.as_slice().to_vec())
    }

    /// `mu I + A`.
    pub fn shifted(&self, mu: f64) -> MatrixOperator {
        let label = format!("{mu} + {}", self.label);
        let entries = match &self.entries {
            Entries::Real(m) => {
                let mut m = m.clone();
                for i in 0..m.nrows() {
                    m[(i, i)] += mu;
                }
                Entries::Real(m)
            }
            Entries::Complex(m) => {
                let mut m = m.clone();
                for i in 0..m.nrows() {
                    m[(i, i)] += mu;
                }
                Entries::Complex(m)
            }
        };
        self.derived(label, entries)
    }

    /// `c A`.
    pub fn scaled(&self, c: f64) -> MatrixOperator {
        let label = format!("{c} * {}", self.label);
        let entries = match &self.entries {
            Entries::Real(m) => Entries::Real(m * c),
            Entries::Complex(m) => Entries::Complex(m * Complex64::new(c, 0.0)),
        };
        self.derived(label, entries)
    }

    /// `A + diag(d)`.
    pub fn plus_diagonal(&self, d: &[f64]) -> Result<MatrixOperator> {
        check_len(self.dim(), d.len())?;
        let label = format!("{} + diag", self.label);
        let entries = match &self.entries {
            Entries::Real(m) => {
                let mut m = m.clone();
                for (i, di) in d.iter().enumerate() {
                    m[(i, i)] += di;
                }
                Entries::Real(m)
            }
            Entries::Complex(m) => {
                let mut m = m.clone();
                for (i, di) in d.iter().enumerate() {
                    m[(i, i)] += di;
                }
                Entries::Complex(m)
            }
        };
        Ok(self.derived(label, entries))
    }

    fn derived(&self, label: String, entries: Entries) -> MatrixOperator {
        let mut op = Self::from_entries(label, entries).expect("finite entries stay finite");
        op.carrier = self.carrier.clone();
        op
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Hermitian eigendecomposition, computed once and cached.
    pub fn eigen(&self) -> Result<&EigenDecomposition> {
        if let Some(e) = self.eigen.get() {
            return Ok(e);
        }
        let e = numerics::eig_hermitian(self)?;
        let _ = self.eigen.set(e);
        Ok(self.eigen.get().expect("just set"))
    }

    /// The eigendecomposition if it has already been computed.
    pub fn cached_eigen(&self) -> Option<&EigenDecomposition> {
        self.eigen.get()
    }

    pub(crate) fn cached_inverse_positivity(&self) -> Option<bool> {
        self.inverse_positive.get().copied()
    }

    pub(crate) fn cache_inverse_positivity(&self, positive: bool) {
        let _ = self.inverse_positive.set(positive);
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Dirichlet Laplacian `-d^2/dx^2`: `2/h^2` on the diagonal, `-1/h^2` beside it.
pub fn build_laplacian_1d(grid: &Grid1D) -> MatrixOperator {
    let n = grid.n_interior();
    let h2 = grid.h() * grid.h();
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 / h2
        } else if i.abs_diff(j) == 1 {
            -1.0 / h2
        } else {
            0.0
        }
    });
    MatrixOperator::from_real(format!("laplacian_1d(n={n})"), m).expect("finite").with_carrier(Carrier::Grid(*grid))
}

/// `-d^2/dx^2 + V`.
pub fn build_schroedinger_1d(grid: &Grid1D, potential: &PotentialVector) -> Result<MatrixOperator> {
    check_len(grid.n_interior(), potential.len())?;
    let op = build_laplacian_1d(grid).plus_diagonal(potential.values())?;
    Ok(op.with_label(format!("schroedinger_1d(n={})", grid.n_interior())))
}

/// Fourth derivative with hinged or clamped ends.
pub fn build_bilaplacian_1d(grid: &Grid1D, bc: BiharmonicBc) -> Result<MatrixOperator> {
    let n = grid.n_interior();
    if n < 3 {
        return Err(Error::InvalidGrid(format!("bi-Laplacian needs n >= 3, got {n}")));
    }
    let h4 = grid.h().powi(4);
    let mut m = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 6.0,
        1 => -4.0,
        2 => 1.0,
        _ => 0.0,
    });
    // u_0 = 0 at the wall; the ghost value u_{-1} is -u_1 (hinged, u'' = 0)
    // or +u_1 (clamped, u' = 0), which folds into the first diagonal entry.
    let corner = match bc {
        BiharmonicBc::Hinged => 5.0,
        BiharmonicBc::Clamped => 7.0,
    };
    m[(0, 0)] = corner;
    m[(n - 1, n - 1)] = corner;
    m /= h4;
    let name = match bc {
        BiharmonicBc::Hinged => "hinged",
        BiharmonicBc::Clamped => "clamped",
    };
    Ok(MatrixOperator::from_real(format!("bilaplacian_1d({name}, n={n})"), m)?.with_carrier(Carrier::Grid(*grid)))
}

/// Magnetic Laplacian `L_alpha` restricted to the free vertices: diagonal
/// `deg(v)/nu_v`, off-diagonal `-mu_vw exp(i alpha_vw)/nu_v`.
///
/// The result is Hermitian when `nu` is constant; for other vertex weights it
/// is self-adjoint in the `nu`-weighted inner product only, and the Hermitian
/// flag is left unset.
pub fn build_magnetic_laplacian(graph: &Graph, alpha: &MagneticSignature) -> Result<MatrixOperator> {
    if alpha.angles().len() != graph.edges().len() {
        return Err(Error::SignatureMismatch(format!(
            "{} angles for {} edges",
            alpha.angles().len(),
            graph.edges().len()
        )));
    }
    let free = graph.free_vertices();
    let mut pos = vec![usize::MAX; graph.n_vertices()];
    for (k, &v) in free.iter().enumerate() {
        pos[v] = k;
    }
    let n = free.len();
    let deg = graph.degrees();
    let nu = graph.nu();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (k, &v) in free.iter().enumerate() {
        m[(k, k)] = Complex64::new(deg[v] / nu[v], 0.0);
    }
    for (e, edge) in graph.edges().iter().enumerate() {
        let a = alpha.angles()[e];
        let (pu, pv) = (pos[edge.u], pos[edge.v]);
        if pu == usize::MAX || pv == usize::MAX {
            continue;
        }
        let phase = Complex64::from_polar(1.0, a);
        m[(pu, pv)] = -phase * edge.weight / nu[edge.u];
        m[(pv, pu)] = -phase.conj() * edge.weight / nu[edge.v];
    }
    let carrier = Carrier::Graph { n_vertices: graph.n_vertices(), free };
    let label = format!("magnetic_laplacian(n={n})");
    // Snap to real storage when every phase is 0 or pi.
    let imag = m.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()));
    let scale = m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    let op = if imag <= 1e-15 * scale.max(1.0) {
        MatrixOperator::from_real(label, m.map(|z| z.re))?
    } else {
        MatrixOperator::from_complex(label, m)?
    };
    Ok(op.with_carrier(carrier))
}

/// Standard graph Laplacian `L = L_0` with Dirichlet restriction.
pub fn build_graph_laplacian(graph: &Graph) -> MatrixOperator {
    build_magnetic_laplacian(graph, &MagneticSignature::zero(graph))
        .expect("zero signature matches")
        .with_label(format!("graph_laplacian(n={})", graph.free_vertices().len()))
}

/// Signless Laplacian `Q = L_pi` with Dirichlet restriction.
pub fn build_signless_laplacian(graph: &Graph) -> MatrixOperator {
    build_magnetic_laplacian(graph, &MagneticSignature::signless(graph))
        .expect("signless signature matches")
        .with_label(format!("signless_laplacian(n={})", graph.free_vertices().len()))
}

/// Restrict a graph-indexed vector to the free vertices.
pub fn restrict_to_free(graph: &Graph, values: &[f64]) -> Result<Vec<f64>> {
    check_len(graph.n_vertices(), values.len())?;
    Ok(graph.free_vertices().into_iter().map(|v| values[v]).collect())
}
