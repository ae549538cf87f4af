//! Plain-text tables, CSV and SVG charts for evaluation results.
//!
//! CSV columns, in order: `predictor,dataset,split,category,n,accuracy,mode,seed,lambda`.
//! Each report is four consecutive rows (All, YesNo, Nb, Other); `accuracy`
//! is empty for empty cells and `lambda` is empty when not applicable.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::report::{Cell, EvalMode, EvalReport};
use super::sweep::SweepCurve;
use crate::domain::{CategoryFilter, SplitTag};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 9] = ["predictor", "dataset", "split", "category", "n", "accuracy", "mode", "seed", "lambda"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Csv,
    Svg,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    predictor: String,
    dataset: String,
    split: String,
    category: String,
    n: usize,
    accuracy: Option<f64>,
    mode: String,
    seed: u64,
    lambda: Option<f64>,
}

fn fmt_acc(a: Option<f64>) -> String {
    a.map_or_else(|| "--".to_string(), |a| format!("{a:.2}"))
}

/// Aligned table, one row per report; empty cells print as `--`.
pub fn format_table<'a>(reports: impl IntoIterator<Item = &'a EvalReport>) -> String {
    let mut rows: Vec<Vec<String>> = vec![["predictor", "dataset", "split", "All", "YesNo", "Nb", "Other", "n"]
        .iter()
        .map(|s| s.to_string())
        .collect()];
    for r in reports {
        let mut row = vec![r.predictor.clone(), r.dataset.clone(), r.split.to_string()];
        row.extend(r.cells.iter().map(|c| fmt_acc(c.accuracy)));
        row.push(r.cells[0].n.to_string());
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(j, (s, &w))| if j < 3 { format!("{s:<w$}") } else { format!("{s:>w$}") })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn to_csv<'a>(reports: impl IntoIterator<Item = &'a EvalReport>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in reports {
        for (filter, cell) in CategoryFilter::COLUMNS.iter().zip(&r.cells) {
            w.serialize(CsvRow {
                predictor: r.predictor.clone(),
                dataset: r.dataset.clone(),
                split: r.split.to_string(),
                category: filter.label().to_string(),
                n: cell.n,
                accuracy: cell.accuracy,
                mode: r.mode.to_string(),
                seed: r.seed,
                lambda: r.lambda,
            })
            .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

/// Inverse of [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<EvalReport>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(Error::invalid(format!("unexpected CSV header {header:?}")));
    }
    let rows: Vec<CsvRow> = r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err)?;
    if !rows.len().is_multiple_of(4) {
        return Err(Error::invalid("report rows must come in groups of four categories"));
    }
    rows.chunks(4)
        .map(|group| {
            let first = &group[0];
            let mut cells = [Cell::default(); 4];
            for (i, (row, filter)) in group.iter().zip(CategoryFilter::COLUMNS).enumerate() {
                let same = row.predictor == first.predictor
                    && row.dataset == first.dataset
                    && row.split == first.split
                    && row.mode == first.mode
                    && row.seed == first.seed
                    && row.lambda.map(f64::to_bits) == first.lambda.map(f64::to_bits);
                if !same || CategoryFilter::from_label(&row.category) != Some(filter) {
                    return Err(Error::invalid(format!(
                        "row {} breaks the All/YesNo/Nb/Other grouping",
                        row.category
                    )));
                }
                cells[i] = Cell { n: row.n, accuracy: row.accuracy };
            }
            Ok(EvalReport {
                predictor: first.predictor.clone(),
                dataset: first.dataset.clone(),
                split: first.split.parse::<SplitTag>()?,
                mode: first.mode.parse::<EvalMode>()?,
                seed: first.seed,
                lambda: first.lambda,
                cells,
            })
        })
        .collect()
}

/// Line chart of mean validation and test accuracy against λ. A single
/// point renders as markers only.
pub fn curve_svg(curve: &SweepCurve, filter: CategoryFilter) -> String {
    const W: f64 = 480.0;
    const H: f64 = 320.0;
    const PAD: f64 = 48.0;
    let lambdas = curve.lambdas();
    type Series<'a> = (&'a str, &'a str, Vec<(f64, f64)>);
    let series: Vec<Series> = [("val", "#1f77b4"), ("test", "#d62728")]
        .into_iter()
        .map(|(name, color)| {
            let pts = curve
                .points()
                .iter()
                .filter_map(|p| {
                    let (m, _) = if name == "val" { p.val_summary(filter) } else { p.test_summary(filter) };
                    m.map(|m| (p.lambda, m))
                })
                .collect();
            (name, color, pts)
        })
        .collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.2.iter().map(|p| p.1)).collect();
    let (mut y0, mut y1) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if !y0.is_finite() {
        (y0, y1) = (0.0, 100.0);
    }
    if y1 - y0 < 1e-9 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let x0 = lambdas.first().copied().unwrap_or(0.0);
    let x1 = lambdas.last().copied().unwrap_or(1.0);
    let sx = |x: f64| {
        if x1 > x0 {
            PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD)
        } else {
            W / 2.0
        }
    };
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">lambda</text>"#,
        W / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">{} accuracy</text>"#,
        H / 2.0,
        H / 2.0,
        filter.label()
    );
    for x in [x0, x1] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" font-size="10" text-anchor="middle">{x}</text>"#, sx(x), H - PAD + 14.0);
    }
    for y in [y0, y1] {
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" font-size="10" text-anchor="end">{y:.1}</text>"#, PAD - 4.0, sy(y));
    }
    for (i, (name, color, pts)) in series.iter().enumerate() {
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
        }
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, sx(x), sy(y));
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{name}</text>"#,
            W - PAD - 40.0,
            PAD + 14.0 * i as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes reports as a table or CSV; SVG needs a curve.
pub fn emit_reports(reports: &[EvalReport], format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Table => format_table(reports),
        ReportFormat::Csv => to_csv(reports)?,
        ReportFormat::Svg => return Err(Error::invalid("SVG output is only available for lambda sweeps")),
    };
    write_text(path, &text)
}

pub fn emit_curve(curve: &SweepCurve, format: ReportFormat, filter: CategoryFilter, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Table => format_table(curve.reports()),
        ReportFormat::Csv => to_csv(curve.reports())?,
        ReportFormat::Svg => curve_svg(curve, filter),
    };
    write_text(path, &text)
}
