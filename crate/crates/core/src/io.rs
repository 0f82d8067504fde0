//! File formats: two-column CSV tables, numeric CSV output, SVG line plots and
//! binary phase-space snapshots.
//!
//! Snapshot byte layout (little endian):
//!
//! | offset | type  | content          |
//! |--------|-------|------------------|
//! | 0      | u64   | `n_x`            |
//! | 8      | u64   | `n_v`            |
//! | 16     | f64   | `V`              |
//! | 24     | f64   | `t`              |
//! | 32     | f64[] | `f(x_i, v_j)` row-major, `j` fastest |

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{DistributionState, PhaseSpaceGrid};

/// Reads a headed CSV with exactly two numeric columns.
pub fn read_two_columns(path: impl AsRef<Path>) -> Result<(Vec<f64>, Vec<f64>)> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if record.len() != 2 {
            return Err(Error::Parse(format!(
                "{}: data row {} has {} columns, expected 2",
                path.display(),
                row + 1,
                record.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                Error::Parse(format!(
                    "{}: data row {}: '{s}' is not a number",
                    path.display(),
                    row + 1
                ))
            })
        };
        a.push(parse(&record[0])?);
        b.push(parse(&record[1])?);
    }
    Ok((a, b))
}

/// Formats a float in `%.12e`-style scientific notation with 12 fractional digits.
pub fn fmt_sci(x: f64) -> String {
    fmt_sci_digits(x, 12)
}

pub fn fmt_sci_digits(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.digits$e}");
    // Rust prints `1.5e3`; normalise the exponent to a signed two-digit form.
    let (mantissa, exp) = s.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Column-oriented numeric table written as RFC-4180 CSV.
#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_numeric(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| fmt_sci(x)).collect());
    }

    pub fn push_raw(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }
}

/// One named polyline of an SVG plot.
#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Renders series as a self-contained SVG line plot; non-positive values are skipped on log axes.
pub fn svg_line_plot(title: &str, x_label: &str, series: &[Series], log_y: bool) -> String {
    const W: f64 = 720.0;
    const H: f64 = 440.0;
    const M: f64 = 60.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || *y > 0.0))
                .map(|&(x, y)| (x, ty(y)))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<path d="M{M},{M} V{} H{}" fill="none" stroke="black"/>"#,
        H - M,
        W - M
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let ylab = if log_y { format!("1e{yv:.1}") } else { format!("{yv:.3e}") };
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{xv:.3}</text><text x="{}" y="{:.1}" text-anchor="end">{ylab}</text>"#,
            px(xv),
            H - M + 18.0,
            M - 6.0,
            py(yv) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 12.0,
        escape(x_label)
    );
    for (idx, (s, p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let coords: Vec<String> = p
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            W - M - 150.0,
            M + 16.0 * idx as f64,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes a state as a binary snapshot (layout in the module docs).
pub fn write_snapshot(path: impl AsRef<Path>, state: &DistributionState) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let g = state.grid();
    w.write_all(&(g.n_x as u64).to_le_bytes())?;
    w.write_all(&(g.n_v as u64).to_le_bytes())?;
    w.write_all(&g.v_max.to_le_bytes())?;
    w.write_all(&state.time().to_le_bytes())?;
    for f in state.values() {
        w.write_all(&f.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a binary snapshot; `dt` is attached to the reconstructed grid.
pub fn read_snapshot(path: impl AsRef<Path>, dt: f64) -> Result<DistributionState> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 32 {
        return Err(Error::Parse("snapshot shorter than its header".into()));
    }
    let word = |i: usize| -> [u8; 8] { bytes[8 * i..8 * i + 8].try_into().expect("8 bytes") };
    let n_x = u64::from_le_bytes(word(0)) as usize;
    let n_v = u64::from_le_bytes(word(1)) as usize;
    let v_max = f64::from_le_bytes(word(2));
    let time = f64::from_le_bytes(word(3));
    let grid = PhaseSpaceGrid::new(n_x, n_v, v_max, dt)?;
    let expected = 32 + 8 * grid.len();
    if bytes.len() != expected {
        return Err(Error::Parse(format!(
            "snapshot has {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let values = (0..grid.len()).map(|i| f64::from_le_bytes(word(4 + i))).collect();
    DistributionState::from_values(grid, time, values)
}
