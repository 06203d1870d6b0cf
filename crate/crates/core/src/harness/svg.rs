//! Rollout CSV to SVG trajectory figure: reference and actual (x, y) paths
//! overlaid with axes and a legend, aspect ratio preserved.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;

struct RolloutPoint {
    x: f64,
    y: f64,
    x_d: f64,
    y_d: f64,
}

fn parse_rollout(path: &Path) -> Result<Vec<RolloutPoint>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::CsvParse {
        path: path.to_path_buf(),
        row: 1,
        msg: "empty file, expected a header row".into(),
    })?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = |name: &str| -> Result<usize> {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::CsvParse {
                path: path.to_path_buf(),
                row: 1,
                msg: format!("missing column '{name}'"),
            })
    };
    let (cx, cy, cxd, cyd) = (col("x")?, col("y")?, col("x_d")?, col("y_d")?);
    let mut points = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let field = |c: usize| -> Result<f64> {
            fields
                .get(c)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| Error::CsvParse {
                    path: path.to_path_buf(),
                    row: idx + 1,
                    msg: format!("bad numeric field in column {c}"),
                })
        };
        points.push(RolloutPoint {
            x: field(cx)?,
            y: field(cy)?,
            x_d: field(cxd)?,
            y_d: field(cyd)?,
        });
    }
    Ok(points)
}

/// Renders the trajectory overlay for a rollout CSV.
pub fn emit_svg(csv_path: &Path, svg_path: &Path) -> Result<()> {
    let points = parse_rollout(csv_path)?;
    let svg = render(&points);
    std::fs::write(svg_path, svg).map_err(|e| Error::io(svg_path, e))
}

fn render(points: &[RolloutPoint]) -> String {
    // world bounding box over both paths, with a margin; a default box keeps
    // the degenerate cases (empty or single point) well formed
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        for (x, y) in [(p.x, p.y), (p.x_d, p.y_d)] {
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
    }
    if points.is_empty() {
        (min_x, max_x, min_y, max_y) = (-1.0, 1.0, -1.0, 1.0);
    }
    let pad = 0.05 * ((max_x - min_x).max(max_y - min_y)).max(1.0);
    min_x -= pad;
    max_x += pad;
    min_y -= pad;
    max_y += pad;

    // uniform scale preserves the aspect ratio
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let scale = (plot_w / (max_x - min_x)).min(plot_h / (max_y - min_y));
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN + (x - min_x) * scale,
            HEIGHT - MARGIN - (y - min_y) * scale,
        )
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    // axes
    let x0 = MARGIN;
    let y0 = HEIGHT - MARGIN;
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#,
        WIDTH - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{MARGIN}" stroke="black"/>"#
    );
    for i in 0..=5 {
        let fx = min_x + (max_x - min_x) * i as f64 / 5.0;
        let (px, _) = to_px(fx, min_y);
        if px <= WIDTH - MARGIN + 1.0 {
            let _ = writeln!(
                svg,
                r#"<line x1="{px}" y1="{y0}" x2="{px}" y2="{}" stroke="black"/>"#,
                y0 + 5.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{px}" y="{}" font-size="11" text-anchor="middle">{fx:.1}</text>"#,
                y0 + 18.0
            );
        }
        let fy = min_y + (max_y - min_y) * i as f64 / 5.0;
        let (_, py) = to_px(min_x, fy);
        if py >= MARGIN - 1.0 {
            let _ = writeln!(
                svg,
                r#"<line x1="{}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/>"#,
                x0 - 5.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{fy:.1}</text>"#,
                x0 - 8.0,
                py + 4.0
            );
        }
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">x (m)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">y (m)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    let polyline = |svg: &mut String, coords: Vec<(f64, f64)>, style: &str| {
        if coords.len() == 1 {
            let (px, py) = coords[0];
            let _ = writeln!(svg, r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" {style}/>"#);
            return;
        }
        if coords.is_empty() {
            return;
        }
        let pts: Vec<String> = coords
            .iter()
            .map(|(px, py)| format!("{px:.2},{py:.2}"))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" {style}/>"#,
            pts.join(" ")
        );
    };
    polyline(
        &mut svg,
        points.iter().map(|p| to_px(p.x_d, p.y_d)).collect(),
        r#"stroke="blue" stroke-width="1.5""#,
    );
    polyline(
        &mut svg,
        points.iter().map(|p| to_px(p.x, p.y)).collect(),
        r#"stroke="red" stroke-width="1.5" stroke-dasharray="6 4""#,
    );

    // legend
    let lx = WIDTH - MARGIN - 150.0;
    let ly = MARGIN + 10.0;
    let _ = writeln!(
        svg,
        r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="blue" stroke-width="1.5"/>"#,
        lx + 30.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12">reference</text>"#,
        lx + 38.0,
        ly + 4.0
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="red" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
        ly + 20.0,
        lx + 30.0,
        ly + 20.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12">actual</text>"#,
        lx + 38.0,
        ly + 24.0
    );
    svg.push_str("</svg>\n");
    svg
}
