use std::fmt::Write;

use super::Layout;

const AXIS_GAP: f64 = 6.0;
const COIL_AMPLITUDE: f64 = 4.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Standalone SVG rendering: flow lines as stroked paths whose width
/// follows the segment widths, the time axis as a coil per slice (one turn
/// per day, capped by the slice width) and labels as text.
pub fn to_svg(layout: &Layout) -> String {
    let axis_y = layout.canvas.h + AXIS_GAP + COIL_AMPLITUDE;
    let height = axis_y + COIL_AMPLITUDE + AXIS_GAP;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{height:.1}" viewBox="0 0 {w:.1} {height:.1}">"#,
        w = layout.canvas.w
    );

    let _ = writeln!(out, r##"<g class="axis" fill="none" stroke="#555" stroke-width="1">"##);
    for a in &layout.axis {
        let width = a.x1 - a.x0;
        let turns = (a.coil_density * width).round().clamp(1.0, (width / 2.0).floor().max(1.0)) as usize;
        let step = width / (2 * turns) as f64;
        let mut d = format!("M{:.2},{:.2}", a.x0, axis_y);
        for k in 0..2 * turns {
            let dy = if k % 2 == 0 { -COIL_AMPLITUDE } else { COIL_AMPLITUDE };
            let _ = write!(d, " L{:.2},{:.2}", a.x0 + (k as f64 + 0.5) * step, axis_y + dy);
        }
        let _ = write!(d, " L{:.2},{:.2}", a.x1, axis_y);
        let _ = writeln!(out, r#"<path d="{d}"/>"#);
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r##"<g class="lines" fill="none" stroke="#3b6ea5" stroke-opacity="0.8" stroke-linecap="butt">"##);
    for line in &layout.lines {
        let tok = escape(&line.token);
        for s in &line.segments {
            let _ = writeln!(
                out,
                r#"<path data-token="{tok}" stroke-width="{:.2}" d="M{:.2},{:.2} H{:.2}"/>"#,
                s.width, s.x0, s.y, s.x1
            );
        }
        for (c, pair) in line.connectors().iter().zip(line.segments.windows(2).filter(|w| w[1].slice == w[0].slice + 1)) {
            let _ = writeln!(
                out,
                r#"<path data-token="{tok}" stroke-width="{:.2}" d="M{:.2},{:.2} C{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}"/>"#,
                0.5 * (pair[0].width + pair[1].width),
                c[0].0, c[0].1, c[1].0, c[1].1, c[2].0, c[2].1, c[3].0, c[3].1
            );
        }
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="labels" font-family="sans-serif" dominant-baseline="middle" text-anchor="middle">"#);
    for l in &layout.labels {
        let _ = writeln!(
            out,
            r#"<text data-token="{}" x="{:.2}" y="{:.2}" font-size="{:.1}">{}</text>"#,
            escape(&l.token),
            l.x + 0.5 * l.w,
            l.y + 0.5 * l.h,
            0.8 * l.h,
            escape(&l.token)
        );
    }
    let _ = writeln!(out, "</g>\n</svg>");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{AxisSlice, Canvas, FlowLine, LabelPlacement, Segment};
    use chrono::{Duration, TimeZone, Utc};

    #[test]
    fn renders_every_element() {
        let t = Utc.with_ymd_and_hms(2013, 1, 1, 0, 0, 0).unwrap();
        let layout = Layout {
            canvas: Canvas { w: 200.0, h: 100.0 },
            axis: vec![
                AxisSlice { x0: 0.0, x1: 60.0, coil_density: 1.0 / 60.0, start: t, end: t + Duration::days(1) },
                AxisSlice { x0: 60.0, x1: 160.0, coil_density: 0.3, start: t + Duration::days(1), end: t + Duration::days(31) },
            ],
            lines: vec![FlowLine {
                token: "a<b".into(),
                segments: vec![
                    Segment { slice: 0, x0: 15.0, x1: 45.0, y: 50.0, width: 3.0 },
                    Segment { slice: 1, x0: 85.0, x1: 135.0, y: 20.0, width: 5.0 },
                ],
                gaps: vec![],
            }],
            labels: vec![LabelPlacement { token: "a<b".into(), slice: 1, x: 90.0, y: 14.0, w: 25.0, h: 12.0, score: 0.0 }],
        };
        let svg = to_svg(&layout);
        assert_eq!(svg.matches("data-token=\"a&lt;b\"").count(), 4);
        assert!(svg.contains("stroke-width=\"4.00\""));
        assert!(svg.contains(">a&lt;b</text>"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
