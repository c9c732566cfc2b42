//! Minimal self-contained SVG scatter plots. Each file embeds its data as a
//! CSV table inside `<metadata>` so the numbers survive without the CSV.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Draw a polyline through the points instead of markers.
    pub line: bool,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLOURS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn transform(v: f64, scale: Scale) -> Option<f64> {
    match scale {
        Scale::Linear => v.is_finite().then_some(v),
        Scale::Log => (v > 0.0 && v.is_finite()).then(|| v.log10()),
    }
}

fn ticks(lo: f64, hi: f64, scale: Scale) -> Vec<f64> {
    match scale {
        Scale::Log => (lo.floor() as i32..=hi.ceil() as i32)
            .map(f64::from)
            .filter(|t| *t >= lo - 1e-9 && *t <= hi + 1e-9)
            .collect(),
        Scale::Linear => {
            let span = (hi - lo).max(1e-300);
            let raw = span / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| span / s <= 6.0)
                .unwrap_or(10.0 * mag);
            let start = (lo / step).ceil() as i64;
            let end = (hi / step).floor() as i64;
            (start..=end).map(|i| i as f64 * step).collect()
        }
    }
}

fn tick_label(t: f64, scale: Scale) -> String {
    match scale {
        Scale::Log => format!("1e{}", t as i32),
        Scale::Linear => format!("{}", (t * 1e6).round() / 1e6),
    }
}

impl Plot {
    pub fn render(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter_map(|&(x, y)| Some((transform(x, self.x_scale)?, transform(y, self.y_scale)?)))
            .collect();
        let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
        );
        if pts.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: &mut f64, hi: &mut f64| {
            let span = *hi - *lo;
            let p = if span > 0.0 { 0.05 * span } else { 0.5 };
            *lo -= p;
            *hi += p;
        };
        pad(&mut x0, &mut x1);
        pad(&mut y0, &mut y1);
        let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
        let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(s, "<metadata>");
        let _ = writeln!(s, "series,x,y");
        for sr in &self.series {
            for (x, y) in &sr.points {
                let _ = writeln!(s, "{},{x:e},{y:e}", escape(&sr.label));
            }
        }
        let _ = writeln!(s, "</metadata>");
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            escape(&self.title)
        );
        let (bx0, bx1, by0, by1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        let _ = writeln!(
            s,
            r#"<rect x="{bx0}" y="{by0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            bx1 - bx0,
            by1 - by0
        );
        for t in ticks(x0, x1, self.x_scale) {
            let x = px(t);
            let _ = writeln!(s, r#"<line x1="{x:.1}" y1="{by1}" x2="{x:.1}" y2="{}" stroke="black"/>"#, by1 + 5.0);
            let _ = writeln!(
                s,
                r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#,
                by1 + 18.0,
                tick_label(t, self.x_scale)
            );
        }
        for t in ticks(y0, y1, self.y_scale) {
            let y = py(t);
            let _ = writeln!(s, r#"<line x1="{}" y1="{y:.1}" x2="{bx0}" y2="{y:.1}" stroke="black"/>"#, bx0 - 5.0);
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
                bx0 - 8.0,
                y + 4.0,
                tick_label(t, self.y_scale)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (bx0 + bx1) / 2.0,
            H - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            (by0 + by1) / 2.0,
            escape(&self.y_label)
        );
        for (i, sr) in self.series.iter().enumerate() {
            let colour = COLOURS[i % COLOURS.len()];
            let mapped: Vec<(f64, f64)> = sr
                .points
                .iter()
                .filter_map(|&(x, y)| Some((px(transform(x, self.x_scale)?), py(transform(y, self.y_scale)?))))
                .collect();
            if sr.line {
                let path: Vec<String> = mapped.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-dasharray="6 3"/>"#,
                    path.join(" ")
                );
            } else {
                for (x, y) in mapped {
                    let _ = writeln!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="4" fill="{colour}"/>"#);
                }
            }
            let ly = by0 + 16.0 + 16.0 * i as f64;
            let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{colour}"/>"#, bx0 + 10.0, ly - 9.0);
            let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, bx0 + 26.0, escape(&sr.label));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_points_and_embeds_data() {
        let p = Plot {
            title: "a < b".into(),
            x_label: "m".into(),
            y_label: "area".into(),
            x_scale: Scale::Log,
            y_scale: Scale::Log,
            series: vec![Series {
                label: "data".into(),
                points: vec![(0.1, 2.0), (0.2, 3.0), (0.0, 1.0)],
                line: false,
            }],
        };
        let svg = p.render();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        // the zero point cannot be drawn on a log axis but stays in the table
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains("data,0e0,1e0"));
        assert!(svg.contains("a &lt; b"));
    }

    #[test]
    fn linear_ticks_are_round() {
        let t = ticks(0.0, 1.0, Scale::Linear);
        assert_eq!(t.len(), 6);
        assert!((t[1] - 0.2).abs() < 1e-15 && (t[5] - 1.0).abs() < 1e-15);
        assert_eq!(ticks(-2.3, 0.4, Scale::Log), vec![-2.0, -1.0, 0.0]);
    }
}
