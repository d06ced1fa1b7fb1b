//! A tiny static SVG writer: axes, polylines, circles and triangles.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Circle,
    /// Downward-pointing triangle.
    Triangle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub color: String,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub color: String,
    pub dashed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
    /// Draw the `y = x` reference line.
    pub diagonal: bool,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Figure {
    fn frame(&self) -> Frame {
        let xs = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.0))
            .chain(self.markers.iter().map(|m| m.x));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .chain(self.markers.iter().map(|m| m.y));
        let (mut xlo, mut xhi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (mut ylo, mut yhi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if self.diagonal {
            xlo = xlo.min(ylo);
            ylo = xlo;
            xhi = xhi.max(yhi);
            yhi = xhi;
        }
        let (x0, x1) = padded(xlo, xhi);
        let (y0, y1) = padded(ylo, yhi);
        Frame { x0, x1, y0, y1 }
    }

    pub fn render(&self) -> String {
        let f = self.frame();
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        self.axes(&mut out, &f);

        if self.diagonal {
            let lo = f.x0.max(f.y0);
            let hi = f.x1.min(f.y1);
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555" stroke-dasharray="6,4"/>"##,
                f.px(lo),
                f.py(lo),
                f.px(hi),
                f.py(hi)
            );
        }
        for s in &self.series {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
                .collect();
            let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
                pts.join(" "),
                s.color
            );
            for &(x, y) in &s.points {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#,
                    f.px(x),
                    f.py(y),
                    s.color
                );
            }
        }
        for m in &self.markers {
            let (cx, cy, r) = (f.px(m.x), f.py(m.y), m.radius);
            match m.shape {
                Shape::Circle => {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="{}" stroke="black" stroke-width="0.5"/>"#,
                        m.color
                    );
                }
                Shape::Triangle => {
                    let _ = writeln!(
                        out,
                        r#"<polygon class="worse" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{}" stroke="black" stroke-width="0.5"/>"#,
                        cx - r,
                        cy - r,
                        cx + r,
                        cy - r,
                        cx,
                        cy + r,
                        m.color
                    );
                }
            }
        }
        self.legend(&mut out);
        out.push_str("</svg>\n");
        out
    }

    fn axes(&self, out: &mut String, f: &Frame) {
        let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(
            out,
            r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#
        );
        for i in 0..=4 {
            let frac = i as f64 / 4.0;
            let xv = f.x0 + frac * (f.x1 - f.x0);
            let yv = f.y0 + frac * (f.y1 - f.y0);
            let (xp, yp) = (f.px(xv), f.py(yv));
            let _ = writeln!(
                out,
                r#"<line x1="{xp:.2}" y1="{b}" x2="{xp:.2}" y2="{:.2}" stroke="black"/><text x="{xp:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                b + 5.0,
                b + 18.0,
                tick(xv)
            );
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{yp:.2}" x2="{l}" y2="{yp:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                l - 5.0,
                l - 8.0,
                yp + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (l + r) / 2.0,
            HEIGHT - 18.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            (t + b) / 2.0,
            (t + b) / 2.0,
            escape(&self.y_label)
        );
    }

    fn legend(&self, out: &mut String) {
        for (i, s) in self.series.iter().enumerate() {
            let y = TOP + 14.0 + 16.0 * i as f64;
            let x = WIDTH - RIGHT - 150.0;
            let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
            let _ = writeln!(
                out,
                r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
                x + 24.0,
                s.color,
                x + 30.0,
                y + 4.0,
                escape(&s.name)
            );
        }
    }
}

fn tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e4).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.2}");
        if s == "-0.00" { "0.00".into() } else { s }
    }
}

/// Maps `t ∈ [0,1]` onto a blue → green → yellow ramp.
pub fn color_ramp(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 4] = [
        (68.0, 1.0, 84.0),
        (49.0, 104.0, 142.0),
        (53.0, 183.0, 121.0),
        (253.0, 231.0, 37.0),
    ];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let pos = t * (STOPS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(STOPS.len() - 2);
    let w = pos - i as f64;
    let lerp = |a: f64, b: f64| (a + w * (b - a)).round() as u8;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    format!("#{:02x}{:02x}{:02x}", lerp(a.0, b.0), lerp(a.1, b.1), lerp(a.2, b.2))
}
