//! Run artifacts: `result.csv`, `manifest.json` and an optional `plot.svg`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::{Series, SweepResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Git-style object hash (`sha256("blob <len>\0" + content)`), hex encoded.
pub fn content_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    h.finalize()
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Hash of any serializable run description, over its compact JSON form.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    content_hash(
        serde_json::to_string(value)
            .expect("config serializes")
            .as_bytes(),
    )
}

/// Axis and series columns as read back from a result CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub series: Vec<Series>,
}

impl From<&SweepResult> for SweepTable {
    fn from(r: &SweepResult) -> Self {
        Self {
            axis_name: r.axis_name.clone(),
            axis: r.axis.clone(),
            series: r.series.clone(),
        }
    }
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Parse {
        row: 0,
        message: e.to_string(),
    }
}

/// Header row plus one line per grid point; gaps are empty fields. Floats are
/// written in shortest round-trip form.
pub fn to_csv(result: &SweepResult) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![result.axis_name.clone()];
    header.extend(result.series.iter().map(|s| s.name.clone()));
    w.write_record(&header).expect("in-memory write");
    for (i, x) in result.axis.iter().enumerate() {
        let mut row = vec![x.to_string()];
        row.extend(
            result
                .series
                .iter()
                .map(|s| s.values[i].map(|v| v.to_string()).unwrap_or_default()),
        );
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

pub fn read_csv(text: &str) -> Result<SweepTable> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.clone();
    if header.is_empty() {
        return Err(Error::Parse {
            row: 1,
            message: "missing header".into(),
        });
    }
    let mut axis = Vec::new();
    let mut series: Vec<Series> = header
        .iter()
        .skip(1)
        .map(|name| Series {
            name: name.to_string(),
            values: Vec::new(),
        })
        .collect();
    for (i, rec) in r.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        let num = |f: &str| {
            f.parse::<f64>().map_err(|_| Error::Parse {
                row,
                message: format!("`{f}` is not a number"),
            })
        };
        axis.push(num(&rec[0])?);
        for (s, field) in series.iter_mut().zip(rec.iter().skip(1)) {
            s.values.push(if field.is_empty() {
                None
            } else {
                Some(num(field)?)
            });
        }
    }
    Ok(SweepTable {
        axis_name: header[0].to_string(),
        axis,
        series,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub run_id: &'a str,
    pub config_hash: &'a str,
    pub seed: u64,
    pub run: &'a C,
    pub sweep: &'a crate::harness::SweepMeta,
}

/// Writes `result.csv`, `manifest.json` and optionally `plot.svg` into
/// `out_dir/run_id/`, returning that directory.
pub fn write_run<C: Serialize>(
    out_dir: &Path,
    run_id: &str,
    run: &C,
    result: &SweepResult,
    svg: bool,
) -> Result<PathBuf> {
    let dir = out_dir.join(run_id);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let hash = config_hash(run);
    let manifest = Manifest {
        tool: "rfda",
        tool_version: TOOL_VERSION,
        run_id,
        config_hash: &hash,
        seed: result.meta.seed,
        run,
        sweep: &result.meta,
    };
    write(&dir.join("result.csv"), to_csv(result).as_bytes())?;
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&dir.join("manifest.json"), json.as_bytes())?;
    if svg {
        write(&dir.join("plot.svg"), line_chart(result).as_bytes())?;
    }
    Ok(dir)
}

pub(crate) fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

/// Minimal standalone SVG line chart, one polyline per series. Standard-error
/// columns (`*_se`) are not drawn.
pub fn line_chart(result: &SweepResult) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 20.0, 20.0, 60.0);
    let drawn: Vec<&Series> = result
        .series
        .iter()
        .filter(|s| !s.name.ends_with("_se"))
        .collect();

    let xs = &result.axis;
    let (x0, x1) = bounds(xs.iter().copied());
    let (y0, y1) = bounds(
        drawn
            .iter()
            .flat_map(|s| s.values.iter().flatten().copied()),
    );
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let sy = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<g stroke="black" fill="none"><line x1="{left}" y1="{yb}" x2="{xr}" y2="{yb}"/><line x1="{left}" y1="{top}" x2="{left}" y2="{yb}"/></g>"#,
        yb = h - bottom,
        xr = w - right
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            sx(fx),
            h - bottom + 16.0,
            tick(fx)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#,
            left - 6.0,
            sy(fy) + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
        (left + w - right) / 2.0,
        h - 18.0,
        escape(&result.axis_name)
    );
    for (i, s) in drawn.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        // infeasible points break the line
        let mut segment = Vec::new();
        let mut segments = Vec::new();
        for (x, v) in xs.iter().zip(&s.values) {
            match v {
                Some(y) => segment.push(format!("{:.2},{:.2}", sx(*x), sy(*y))),
                None => segments.push(std::mem::take(&mut segment)),
            }
        }
        segments.push(segment);
        for seg in segments.into_iter().filter(|s| !s.is_empty()) {
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
                seg.join(" ")
            );
        }
        let ly = top + 14.0 + 16.0 * i as f64;
        let lx = w - right - 150.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}" font-size="12">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
