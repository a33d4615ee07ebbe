//! Minimal SVG plots of polygons. Coordinates are rendered from the exact
//! values with fixed decimal rounding, so output is reproducible.

use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::polygon::Polygon;
use crate::rational::{fmt_decimal, fmt_q, qi, Q};

const WIDTH: i64 = 640;
const HEIGHT: i64 = 420;
const MARGIN: i64 = 40;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series<'a> {
    pub label: String,
    pub polygon: &'a Polygon,
}

/// Overlays the given polygons on common axes.
pub fn render(title: &str, series: &[Series<'_>]) -> String {
    let mut max_x = Q::one();
    let mut min_y = Q::zero();
    let mut max_y = Q::one();
    for s in series {
        for (x, y) in s.polygon.points() {
            if *x > max_x {
                max_x = x.clone();
            }
            if *y > max_y {
                max_y = y.clone();
            }
            if *y < min_y {
                min_y = y.clone();
            }
        }
    }
    let span_y = max_y.clone() - &min_y;
    let plot_w = qi(WIDTH - 2 * MARGIN);
    let plot_h = qi(HEIGHT - 2 * MARGIN);
    let sx = |x: &Q| fmt_decimal(&(qi(MARGIN) + x * &plot_w / &max_x), 2);
    let sy = |y: &Q| fmt_decimal(&(qi(HEIGHT - MARGIN) - (y - &min_y) * &plot_h / &span_y), 2);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let origin_y = sy(&Q::zero());
    let _ = writeln!(
        out,
        r##"<line x1="{m}" y1="{origin_y}" x2="{x2}" y2="{origin_y}" stroke="#888888"/>"##,
        m = MARGIN,
        x2 = WIDTH - MARGIN
    );
    let _ = writeln!(
        out,
        r##"<line x1="{m}" y1="{m}" x2="{m}" y2="{y2}" stroke="#888888"/>"##,
        m = MARGIN,
        y2 = HEIGHT - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
        WIDTH - MARGIN,
        HEIGHT - MARGIN / 4,
        fmt_q(&max_x)
    );
    let _ = writeln!(out, r#"<text x="4" y="{}" font-size="11">{}</text>"#, MARGIN - 8, fmt_q(&max_y));

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s.polygon.points().iter().map(|(x, y)| format!("{},{}", sx(x), sy(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        for (x, y) in s.polygon.points() {
            let _ = writeln!(
                out,
                r#"<circle cx="{}" cy="{}" r="3" fill="{color}"><title>({}, {})</title></circle>"#,
                sx(x),
                sy(y),
                fmt_q(x),
                fmt_q(y)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            MARGIN + 8,
            MARGIN + 14 * (i as i64 + 1),
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::{hodge_polygon, reversed_hodge};
    use crate::signature::Signature;

    #[test]
    fn overlay_contains_both_series() {
        let s = Signature::parse("{f:2,p:7,h:3,q:[1,2]}").unwrap();
        let (a, b) = (hodge_polygon(&s), reversed_hodge(&s));
        let svg = render(
            "sig",
            &[Series { label: "hodge".into(), polygon: &a }, Series { label: "reversed_hodge".into(), polygon: &b }],
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("(3, 3/2)"));
    }
}
