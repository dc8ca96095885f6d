//! Deterministic file writers: CSV with round-trip-safe floats, JSON with
//! stable key order, and a structural log-log SVG plot.

use std::io::Write;
use std::path::Path;

use retrialq_core::{Error, Result};

/// A CSV cell; floats print with 17 significant digits so parsing the file
/// back reproduces the exact bit pattern.
#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v:.16e}"),
            Cell::Bool(v) => write!(f, "{v}"),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Numerical(format!("cannot write {}: {e}", path.display()))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let mut buf = String::with_capacity(rows.len() * header.len() * 16);
    buf.push_str(&header.join(","));
    buf.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let mut first = true;
        for cell in row {
            if !first {
                buf.push(',');
            }
            first = false;
            buf.push_str(&cell.to_string());
        }
        buf.push('\n');
    }
    write_atomic(path, buf.as_bytes())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    write_atomic(path, format!("{text}\n").as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(bytes).map_err(|e| io_err(path, e))?;
    Ok(())
}

/// The sidecar path of an output: same stem, `.json` extension.
pub fn sidecar(path: &Path) -> std::path::PathBuf {
    path.with_extension("json")
}

/// One curve on the log-log plot.
pub struct PlotSeries<'a> {
    pub name: &'a str,
    pub color: &'a str,
    pub dashed: bool,
    /// (j, value) points; nonpositive values are skipped.
    pub points: Vec<(f64, f64)>,
}

/// Renders tail curves on a log-log grid spanning at least two decades of j.
/// The output is plain SVG 1.1 with one polyline per series and per-decade
/// grid lines.
pub fn write_svg(path: &Path, title: &str, series: &[PlotSeries<'_>]) -> Result<()> {
    let (width, height) = (760.0, 520.0);
    let (ml, mr, mt, mb) = (70.0, 160.0, 40.0, 50.0);

    let mut x_max: f64 = 100.0;
    let mut y_min: f64 = f64::INFINITY;
    let mut y_max: f64 = f64::NEG_INFINITY;
    for s in series {
        for &(j, v) in &s.points {
            if j >= 1.0 && v > 0.0 {
                x_max = x_max.max(j);
                y_min = y_min.min(v);
                y_max = y_max.max(v);
            }
        }
    }
    if !y_min.is_finite() {
        y_min = 1e-8;
        y_max = 1.0;
    }
    let lx_min = 0.0f64;
    let lx_max = x_max.log10().ceil().max(2.0);
    let ly_min = y_min.log10().floor();
    let ly_max = y_max.log10().ceil();

    let px = |lx: f64| ml + (lx - lx_min) / (lx_max - lx_min) * (width - ml - mr);
    let py = |ly: f64| mt + (ly_max - ly) / (ly_max - ly_min) * (height - mt - mb);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">{title}</text>\n",
        ml
    ));

    // Decade grid.
    let mut d = lx_min;
    while d <= lx_max + 1e-9 {
        let x = px(d);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>\n",
            py(ly_max),
            py(ly_min)
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">1e{d:.0}</text>\n",
            py(ly_min) + 18.0
        ));
        d += 1.0;
    }
    let mut d = ly_min;
    while d <= ly_max + 1e-9 {
        let y = py(d);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>\n",
            px(lx_min),
            px(lx_max)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e{d:.0}</text>\n",
            px(lx_min) - 6.0
        ));
        d += 1.0;
    }
    svg.push_str(&format!(
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>\n",
        px(lx_min),
        py(ly_max),
        px(lx_max) - px(lx_min),
        py(ly_min) - py(ly_max)
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">level j</text>\n",
        (px(lx_min) + px(lx_max)) / 2.0,
        height - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {:.2})\" text-anchor=\"middle\">tail probability</text>\n",
        (py(ly_min) + py(ly_max)) / 2.0,
        (py(ly_min) + py(ly_max)) / 2.0
    ));

    for (i, s) in series.iter().enumerate() {
        let mut pts = String::new();
        for &(j, v) in &s.points {
            if j >= 1.0 && v > 0.0 {
                pts.push_str(&format!("{:.2},{:.2} ", px(j.log10()), py(v.log10())));
            }
        }
        let dash = if s.dashed {
            " stroke-dasharray=\"6 4\""
        } else {
            ""
        };
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\"{dash} points=\"{}\"/>\n",
            s.color,
            pts.trim_end()
        ));
        let ly = mt + 16.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{}\" stroke-width=\"1.6\"{dash}/>\n",
            width - mr + 10.0,
            width - mr + 34.0,
            s.color
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            width - mr + 40.0,
            ly + 4.0,
            s.name
        ));
    }
    svg.push_str("</svg>\n");
    write_atomic(path, svg.as_bytes())
}
