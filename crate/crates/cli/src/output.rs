//! Result tables and their CSV / SVG renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("table `{table}`: row {row} has {got} entries, expected {expected}")]
    Ragged { table: String, row: usize, got: usize, expected: usize },
    #[error("table `{table}`: non-finite value {value} in column `{column}`")]
    NonFinite { table: String, column: String, value: f64 },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("plot of `{table}` refers to missing column {column}")]
    MissingColumn { table: String, column: usize },
}

/// Rectangular table of finite scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ResultTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(name: impl Into<String>, columns: Vec<String>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<(), OutputError> {
        if row.len() != self.columns.len() {
            return Err(OutputError::Ragged {
                table: self.name.clone(),
                row: self.rows.len(),
                got: row.len(),
                expected: self.columns.len(),
            });
        }
        if let Some((j, v)) = row.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(OutputError::NonFinite {
                table: self.name.clone(),
                column: self.columns[j].clone(),
                value: *v,
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Build from equal-length columns.
    pub fn from_columns<S: Into<String>>(
        name: impl Into<String>,
        columns: Vec<(S, Vec<f64>)>,
    ) -> Result<Self, OutputError> {
        let (names, columns): (Vec<S>, Vec<Vec<f64>>) = columns.into_iter().unzip();
        let mut t = Self::with_columns(name, names.into_iter().map(Into::into).collect());
        let n = columns.first().map_or(0, Vec::len);
        for i in 0..n {
            t.push(columns.iter().map(|v| v.get(i).copied().unwrap_or(f64::NAN)).collect())?;
        }
        Ok(t)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

/// C `%.17g`: 17 significant digits, enough to round-trip every `f64`.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV body: `#` provenance lines, header, then one line per row.
pub fn csv_string(table: &ResultTable, provenance: &[String]) -> String {
    let mut out = String::new();
    for line in provenance {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| format_g17(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_csv(table: &ResultTable, path: &Path, provenance: &[String]) -> Result<(), OutputError> {
    fs::write(path, csv_string(table, provenance)).map_err(|source| OutputError::Io { path: path.into(), source })
}

/// Read a CSV written by [`emit_csv`]; provenance lines are skipped.
pub fn read_csv(path: &Path) -> Result<ResultTable, OutputError> {
    let text = fs::read_to_string(path).map_err(|source| OutputError::Io { path: path.into(), source })?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#'));
    let Some((_, header)) = lines.next() else {
        return Err(OutputError::Parse { path: path.into(), line: 1, message: "missing header".into() });
    };
    let mut table = ResultTable::with_columns(name, header.split(',').map(str::to_string).collect());
    for (i, line) in lines {
        let row = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| OutputError::Parse { path: path.into(), line: i + 1, message: e.to_string() })?;
        table.push(row)?;
    }
    Ok(table)
}

/// Which columns to draw: one polyline per series against column `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x: usize,
    pub series: Vec<usize>,
}

impl PlotSpec {
    /// First column against every other column.
    pub fn all_against_first(table: &ResultTable, title: impl Into<String>) -> Self {
        Self { title: title.into(), x: 0, series: (1..table.columns.len()).collect() }
    }
}

const PALETTE: [&str; 8] = ["#7f7f7f", "#d62728", "#ff7f0e", "#2ca02c", "#1f77b4", "#9467bd", "#8c564b", "#e377c2"];

pub fn svg_string(table: &ResultTable, plot: &PlotSpec) -> Result<String, OutputError> {
    let ncols = table.columns.len();
    if let Some(&bad) = std::iter::once(&plot.x).chain(&plot.series).find(|&&c| c >= ncols) {
        return Err(OutputError::MissingColumn { table: table.name.clone(), column: bad });
    }
    let (w, h) = (800.0, 600.0);
    let (left, right, top, bottom) = (80.0, 170.0, 50.0, 60.0);
    let xs = table.column(plot.x);
    let (x0, x1) = padded_range(xs.iter().copied());
    let (y0, y1) = padded_range(plot.series.iter().flat_map(|&c| table.column(c)));
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let sy = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 600" width="800" height="600">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="800" height="600" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" font-size="16" font-family="sans-serif">{}</text>"#,
        left,
        escape(&plot.title)
    );
    let (ax0, ax1, ay0, ay1) = (left, w - right, top, h - bottom);
    let _ = writeln!(
        s,
        r#"<path d="M{ax0} {ay0} L{ax0} {ay1} L{ax1} {ay1}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    for (v, x, y, anchor) in [(x0, ax0, ay1 + 20.0, "start"), (x1, ax1, ay1 + 20.0, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" font-size="12" font-family="sans-serif" text-anchor="{anchor}">{}</text>"#,
            short(v)
        );
    }
    for (v, y) in [(y0, ay1), (y1, ay0 + 4.0)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" font-size="12" font-family="sans-serif" text-anchor="end">{}</text>"#,
            ax0 - 6.0,
            short(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="13" font-family="sans-serif" text-anchor="middle">{}</text>"#,
        (ax0 + ax1) / 2.0,
        h - 15.0,
        escape(&table.columns[plot.x])
    );
    for (i, &c) in plot.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = table.rows.iter().map(|r| format!("{:.2},{:.2}", sx(r[plot.x]), sy(r[c]))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-name="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            escape(&table.columns[c]),
            points.join(" ")
        );
        let ly = top + 20.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            ax1 + 10.0,
            ax1 + 30.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" font-family="sans-serif">{}</text>"#,
            ax1 + 36.0,
            ly + 4.0,
            escape(&table.columns[c])
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg(table: &ResultTable, path: &Path, plot: &PlotSpec) -> Result<(), OutputError> {
    let body = svg_string(table, plot)?;
    fs::write(path, body).map_err(|source| OutputError::Io { path: path.into(), source })
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn short(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_c_printf() {
        // Reference strings from C printf("%.17g").
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (123456789.0, "123456789"),
            (1e17, "1e+17"),
            (1e16, "10000000000000000"),
            (0.0001, "0.0001"),
            (std::f64::consts::PI, "3.1415926535897931"),
            (6.02214076e23, "6.0221407599999999e+23"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g17(x), want, "{x}");
        }
    }

    #[test]
    fn g17_round_trips() {
        let mut x = 1.234567e-300f64;
        while x < 1e300 {
            for v in [x, -x, x * 7.77, 1.0 / x] {
                assert_eq!(format_g17(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
            }
            x *= 123.456;
        }
    }

    #[test]
    fn rejects_ragged_and_non_finite_rows() {
        let mut t = ResultTable::new("t", &["a", "b"]);
        assert!(matches!(t.push(vec![1.0]), Err(OutputError::Ragged { .. })));
        assert!(matches!(t.push(vec![1.0, f64::NAN]), Err(OutputError::NonFinite { .. })));
        t.push(vec![1.0, 2.0]).unwrap();
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = ResultTable::new("t", &["x", "y"]);
        assert_eq!(csv_string(&t, &[]), "x,y\n");
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let t =
            ResultTable::from_columns("t", vec![("x", vec![0.0, 1.0]), ("a", vec![1.0, 2.0]), ("b", vec![0.5, 0.5])])
                .unwrap();
        let s = svg_string(&t, &PlotSpec::all_against_first(&t, "demo")).unwrap();
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains(r#"viewBox="0 0 800 600""#));
    }
}
