//! CSV and SVG rendering of ratio reports.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::verify::RatioReport;

fn dims(report: &RatioReport) -> (usize, usize) {
    report
        .points
        .iter()
        .fold((0, 0), |(dx, dy), p| (dx.max(p.x.len()), dy.max(p.y.len())))
}

fn axis_headers(name: &str, d: usize) -> Vec<String> {
    if d <= 1 {
        vec![name.to_string()]
    } else {
        (1..=d).map(|i| format!("{name}{i}")).collect()
    }
}

fn push_coords(fields: &mut Vec<String>, v: &[f64], d: usize) {
    for i in 0..d.max(1) {
        fields.push(v.get(i).map_or_else(String::new, |c| c.to_string()));
    }
}

/// CSV with header `t,x,y,empirical,stderr,shape,ratio`; coordinates are split into
/// `x1..xd`, `y1..yd` in dimension `d ≥ 2`. Floats use the shortest round-trip form.
pub fn to_csv(report: &RatioReport) -> String {
    let (dx, dy) = dims(report);
    let mut header = vec!["t".to_string()];
    header.extend(axis_headers("x", dx));
    header.extend(axis_headers("y", dy));
    header.extend(["empirical", "stderr", "shape", "ratio"].map(String::from));
    let mut out = header.join(",");
    out.push('\n');
    for p in &report.points {
        let mut fields = vec![p.t.map_or_else(String::new, |t| t.to_string())];
        push_coords(&mut fields, &p.x, dx);
        push_coords(&mut fields, &p.y, dy);
        for v in [p.empirical, p.stderr, p.shape, p.ratio] {
            fields.push(v.to_string());
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn with_path(path: &Path, e: io::Error) -> io::Error {
    io::Error::new(e.kind(), format!("{}: {e}", path.display()))
}

pub fn emit_csv(report: &RatioReport, path: &Path) -> io::Result<()> {
    std::fs::write(path, to_csv(report)).map_err(|e| with_path(path, e))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Log-log scatter of the included ratios against `t` (or point index when `t` is
/// absent), with the band `[min_ratio, max_ratio]` shaded.
pub fn to_svg(report: &RatioReport) -> String {
    let pts: Vec<(f64, f64)> = report
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.included)
        .map(|(i, p)| (p.t.unwrap_or((i + 1) as f64), p.ratio))
        .collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="20" font-size="12">{} ({}) spread {:.4}</text>"#,
        escape(&report.shape),
        escape(&report.grid),
        report.spread
    );
    if !pts.is_empty() {
        let lx = |v: f64| v.log10();
        let (mut x0, mut x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(lx(p.0)), b.max(lx(p.0))));
        let (mut y0, mut y1) = (lx(report.min_ratio), lx(report.max_ratio));
        if x1 - x0 < 1e-9 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-9 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let (pad_y0, pad_y1) = (y0 - 0.1 * (y1 - y0), y1 + 0.1 * (y1 - y0));
        let sx = |v: f64| MARGIN + (lx(v) - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |v: f64| HEIGHT - MARGIN - (lx(v) - pad_y0) / (pad_y1 - pad_y0) * (HEIGHT - 2.0 * MARGIN);
        let (top, bottom) = (sy(report.max_ratio), sy(report.min_ratio));
        let _ = writeln!(
            s,
            r##"<rect x="{MARGIN}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="#dde8f4"/>"##,
            WIDTH - 2.0 * MARGIN,
            (bottom - top).max(0.5)
        );
        for (t, r) in &pts {
            let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#1f4e79"/>"##, sx(*t), sy(*r));
        }
        let _ = writeln!(
            s,
            r#"<text x="{MARGIN}" y="{:.0}" font-size="10">log10 t from {x0:.3} to {x1:.3}; log10 ratio from {y0:.3} to {y1:.3}</text>"#,
            HEIGHT - 15.0
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(report: &RatioReport, path: &Path) -> io::Result<()> {
    std::fs::write(path, to_svg(report)).map_err(|e| with_path(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::RatioPoint;

    fn sample() -> RatioReport {
        RatioReport::new(
            "grid <a&b>",
            "c11",
            vec![
                RatioPoint::new(Some(0.05), vec![0.1], vec![-0.3], 1.5, 0.01, 3.0),
                RatioPoint::new(Some(0.5), vec![0.1], vec![0.2], 0.25, 0.002, 0.125),
            ],
        )
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv(&sample());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,x,y,empirical,stderr,shape,ratio"));
        assert_eq!(lines.next(), Some("0.05,0.1,-0.3,1.5,0.01,3,0.5"));
        assert_eq!(lines.next(), Some("0.5,0.1,0.2,0.25,0.002,0.125,2"));
        let empty = RatioReport::new("g", "s", Vec::new());
        assert_eq!(to_csv(&empty), "t,x,y,empirical,stderr,shape,ratio\n");
    }

    #[test]
    fn csv_in_two_dims() {
        let r = RatioReport::new("g", "green", vec![RatioPoint::new(None, vec![0.1, 0.2], vec![0.3, 0.4], 1.0, 0.1, 2.0)]);
        let csv = to_csv(&r);
        assert!(csv.starts_with("t,x1,x2,y1,y2,empirical,stderr,shape,ratio\n"));
        assert!(csv.contains("\n,0.1,0.2,0.3,0.4,1,0.1,2,0.5\n"));
    }

    #[test]
    fn svg_is_well_formed() {
        for r in [sample(), RatioReport::new("g", "s", Vec::new())] {
            let svg = to_svg(&r);
            let doc = roxmltree::Document::parse(&svg).unwrap();
            assert_eq!(doc.root_element().tag_name().name(), "svg");
        }
        let doc_svg = to_svg(&sample());
        let doc = roxmltree::Document::parse(&doc_svg).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 2);
    }

    #[test]
    fn write_errors_name_the_path() {
        let err = emit_csv(&sample(), Path::new("/nonexistent/dir/out.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
    }
}
