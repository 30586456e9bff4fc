//! CSV, JSON and SVG writers.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use arcsim_core::bounds::BoundReport;
use serde::Serialize;

use crate::config::{ExperimentConfig, XKind};
use crate::ensemble::{EnsembleResult, ProbabilityTrace};
use crate::error::{HarnessError, HarnessResult};

pub const FIDELITY_HEADER: [&str; 6] =
    ["protocol", "x_kind", "x_value", "mean_fidelity", "stderr", "trajectories"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// Bound report attached to one plan point.
#[derive(Debug, Clone, Serialize)]
pub struct PointBounds {
    pub x_kind: XKind,
    pub x_value: f64,
    pub report: BoundReport,
}

#[derive(Serialize)]
struct RunDocument<'a> {
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    result: &'a EnsembleResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<&'a [PointBounds]>,
}

#[derive(Serialize)]
struct TraceDocument<'a> {
    config: &'a ExperimentConfig,
    trace: &'a ProbabilityTrace,
}

#[derive(Serialize)]
struct BoundsDocument<'a> {
    config: &'a ExperimentConfig,
    bounds: &'a [PointBounds],
}

/// Fidelity table as CSV text.
pub fn fidelity_csv(result: &EnsembleResult) -> HarnessResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FIDELITY_HEADER)?;
    for p in &result.points {
        w.write_record([
            p.protocol.name().to_string(),
            p.x_kind.name().to_string(),
            p.x_value.to_string(),
            p.mean_fidelity.to_string(),
            p.stderr.to_string(),
            p.trajectories.to_string(),
        ])?;
    }
    finish(w)
}

/// Probability trace as CSV text; one `p` column per term.
pub fn trace_csv(trace: &ProbabilityTrace) -> HarnessResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_string()];
    header.extend((1..=trace.labels.len()).map(|k| format!("p{k}")));
    header.push("sampled_index".into());
    header.push("tau".into());
    w.write_record(&header)?;
    for r in &trace.rows {
        let mut row = vec![r.step.to_string()];
        row.extend(r.probabilities.iter().map(|p| p.to_string()));
        row.push(r.sampled_index.to_string());
        row.push(r.tau.to_string());
        w.write_record(&row)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> HarnessResult<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::Csv(csv::Error::from(e.into_error())))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Config(e.to_string()))
}

pub fn run_json(
    config: &ExperimentConfig,
    result: &EnsembleResult,
    bounds: Option<&[PointBounds]>,
) -> HarnessResult<String> {
    Ok(serde_json::to_string_pretty(&RunDocument { config, result, bounds })?)
}

pub fn trace_json(config: &ExperimentConfig, trace: &ProbabilityTrace) -> HarnessResult<String> {
    Ok(serde_json::to_string_pretty(&TraceDocument { config, trace })?)
}

pub fn bounds_json(config: &ExperimentConfig, bounds: &[PointBounds]) -> HarnessResult<String> {
    Ok(serde_json::to_string_pretty(&BoundsDocument { config, bounds })?)
}

/// Writes `text` to `path`.
pub fn write_text(path: &Path, text: &str) -> HarnessResult<()> {
    let mut f = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

pub fn emit(
    config: &ExperimentConfig,
    result: &EnsembleResult,
    bounds: Option<&[PointBounds]>,
    format: Format,
    path: &Path,
) -> HarnessResult<()> {
    let text = match format {
        Format::Csv => fidelity_csv(result)?,
        Format::Json => run_json(config, result, bounds)?,
    };
    write_text(path, &text)
}

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Line chart of mean fidelity against the swept value.
pub fn svg(result: &EnsembleResult) -> HarnessResult<String> {
    if result.points.is_empty() {
        return Err(HarnessError::Config("nothing to plot".into()));
    }
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &result.points {
        x0 = x0.min(p.x_value);
        x1 = x1.max(p.x_value);
        y0 = y0.min(p.mean_fidelity);
        y1 = y1.max(p.mean_fidelity);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-6 {
        y0 -= 0.005;
        y1 += 0.005;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let kind = result.points[0].x_kind.name();
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{kind} ({x0:.3} to {x1:.3})</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="10" y="{}" font-size="12">fidelity {y0:.4} to {y1:.4}</text>"#,
        MARGIN - 20.0
    );

    let mut protocols: Vec<_> = result.points.iter().map(|p| p.protocol).collect();
    protocols.dedup();
    for (k, protocol) in protocols.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut series = result.series(*protocol);
        series.sort_by(|a, b| a.x_value.total_cmp(&b.x_value));
        let pts: Vec<String> = series
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.x_value), sy(p.mean_fidelity)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"><title>{protocol}</title></polyline>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" fill="{colour}">{protocol}</text>"#,
            WIDTH - MARGIN + 5.0,
            MARGIN + 15.0 * k as f64
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_svg(result: &EnsembleResult, path: &Path) -> HarnessResult<()> {
    write_text(path, &svg(result)?)
}
