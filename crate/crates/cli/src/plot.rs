//! A small SVG line plot, enough to eyeball a reconstruction.

use std::fmt::Write as _;

use pswf_radon::SampledFunction1D;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 50.0;

/// Stroke styles mirroring the usual legend: preimage dotted, PSWF
/// reconstruction bold, naive inverse dashed.
#[derive(Debug, Clone, Copy)]
pub enum Style {
    Dotted,
    Bold,
    Dashed,
}

impl Style {
    fn attrs(self) -> &'static str {
        match self {
            Style::Dotted => r#"stroke="black" stroke-width="1.5" stroke-dasharray="2,3""#,
            Style::Bold => r##"stroke="#1f4e9c" stroke-width="2.5""##,
            Style::Dashed => r##"stroke="#b03030" stroke-width="1.5" stroke-dasharray="8,5""##,
        }
    }
}

pub struct Series<'a> {
    pub label: &'a str,
    pub f: &'a SampledFunction1D,
    pub style: Style,
}

/// Renders the real parts of `series` on shared axes.
pub fn render(title: &str, series: &[Series<'_>]) -> String {
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        x0 = x0.min(s.f.grid.a);
        x1 = x1.max(s.f.grid.b);
        for v in &s.f.values {
            if v.re.is_finite() {
                y0 = y0.min(v.re);
                y1 = y1.max(v.re);
            }
        }
    }
    if y1.partial_cmp(&y0) != Some(std::cmp::Ordering::Greater) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    // axes and ticks
    let _ = writeln!(
        svg,
        r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#,
        l = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for k in 0..=4 {
        let x = x0 + (x1 - x0) * k as f64 / 4.0;
        let y = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x:.2}</text>"#,
            px(x),
            HEIGHT - MARGIN + 16.0
        );
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y:.2}</text>"#, MARGIN - 6.0, py(y) + 4.0);
    }
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{z:.1}" x2="{}" y2="{z:.1}" stroke="grey" stroke-width="0.5"/>"#,
            MARGIN,
            WIDTH - MARGIN,
            z = py(0.0)
        );
    }
    for (k, s) in series.iter().enumerate() {
        let mut d = String::new();
        let mut pen_down = false;
        for (x, v) in s.f.nodes().into_iter().zip(&s.f.values) {
            if !v.re.is_finite() {
                pen_down = false;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, px(x), py(v.re));
            pen_down = true;
        }
        let _ = writeln!(svg, r#"<path d="{}" fill="none" {}/>"#, d.trim_end(), s.style.attrs());
        let ly = MARGIN + 8.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN - 150.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" {}/><text x="{}" y="{}">{}</text>"#,
            lx + 30.0,
            s.style.attrs(),
            lx + 38.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
