//! Minimal SVG plotting. Line series are emitted inside a transformed group
//! so that their path data is in plot (data) coordinates.

use std::fmt::Write as _;

pub const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub fn colour(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Shortest decimal with at most six fractional digits.
pub fn fmt(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub struct Line {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

pub struct Bar {
    pub group: String,
    pub series: String,
    pub value: f64,
    pub err: Option<f64>,
}

pub enum Body {
    Lines(Vec<Line>),
    Bars(Vec<Bar>),
    Scatter(Vec<(String, Vec<[f64; 2]>)>),
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub body: Body,
}

const PAD: f64 = 48.0;

pub struct Sheet {
    pub cols: usize,
    pub cell: (f64, f64),
    pub panels: Vec<Panel>,
}

impl Sheet {
    pub fn single(panel: Panel) -> Self {
        Self { cols: 1, cell: (480.0, 400.0), panels: vec![panel] }
    }

    pub fn render(&self) -> String {
        let rows = self.panels.len().div_ceil(self.cols.max(1)).max(1);
        let (cw, ch) = self.cell;
        let (w, h) = (cw * self.cols as f64, ch * rows as f64);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="11">"#,
            fmt(w),
            fmt(h),
            fmt(w),
            fmt(h)
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        for (i, p) in self.panels.iter().enumerate() {
            let ox = (i % self.cols) as f64 * cw;
            let oy = (i / self.cols) as f64 * ch;
            p.render(&mut s, ox + PAD, oy + PAD / 1.5, cw - 1.5 * PAD, ch - 2.0 * PAD);
        }
        s.push_str("</svg>\n");
        s
    }
}

impl Panel {
    fn render(&self, s: &mut String, ox: f64, oy: f64, w: f64, h: f64) {
        let (x0, x1) = self.x;
        let (y0, y1) = self.y;
        let sx = w / (x1 - x0).max(f64::EPSILON);
        let sy = h / (y1 - y0).max(f64::EPSILON);
        let px = |x: f64| ox + (x - x0) * sx;
        let py = |y: f64| oy + h - (y - y0) * sy;
        let _ = writeln!(s, r#"<g class="panel">"#);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-weight="bold">{}</text>"#, fmt(ox), fmt(oy - 6.0), esc(&self.title));
        let _ =
            writeln!(s, r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444"/>"##, fmt(ox), fmt(oy), fmt(w), fmt(h));
        for (v, anchor, x) in [(x0, "start", ox), (x1, "end", ox + w)] {
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="{anchor}">{}</text>"#, fmt(x), fmt(oy + h + 12.0), fmt(v));
        }
        for (v, y) in [(y0, oy + h), (y1, oy + 8.0)] {
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, fmt(ox - 4.0), fmt(y), fmt(v));
        }
        let _ =
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, fmt(ox + w / 2.0), fmt(oy + h + 26.0), esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text transform="translate({} {}) rotate(-90)" text-anchor="middle">{}</text>"#,
            fmt(ox - 30.0),
            fmt(oy + h / 2.0),
            esc(&self.y_label)
        );
        let mut legend = Vec::new();
        match &self.body {
            Body::Lines(lines) => {
                let _ = writeln!(
                    s,
                    r#"<g class="plot" transform="translate({} {}) scale({} {}) translate({} {})">"#,
                    fmt(ox),
                    fmt(oy + h),
                    fmt(sx),
                    fmt(-sy),
                    fmt(-x0),
                    fmt(-y0)
                );
                for (i, l) in lines.iter().enumerate() {
                    if l.points.is_empty() {
                        continue;
                    }
                    let mut d = String::new();
                    for (j, (x, y)) in l.points.iter().enumerate() {
                        let _ = write!(d, "{}{} {}", if j == 0 { "M" } else { " L" }, fmt(*x), fmt(*y));
                    }
                    let c = if l.dashed { "#999" } else { colour(i) };
                    let dash = if l.dashed { r#" stroke-dasharray="4 3""# } else { "" };
                    let _ = writeln!(
                        s,
                        r#"<path data-series="{}" d="{d}" fill="none" stroke="{c}" stroke-width="1.5"{dash} vector-effect="non-scaling-stroke"/>"#,
                        esc(&l.name)
                    );
                    if !l.dashed {
                        legend.push((l.name.clone(), c));
                    }
                }
                s.push_str("</g>\n");
            }
            Body::Bars(bars) => {
                let mut groups: Vec<&str> = Vec::new();
                let mut series: Vec<&str> = Vec::new();
                for b in bars {
                    if !groups.contains(&b.group.as_str()) {
                        groups.push(&b.group);
                    }
                    if !series.contains(&b.series.as_str()) {
                        series.push(&b.series);
                    }
                }
                let gw = w / groups.len().max(1) as f64;
                let bw = gw * 0.8 / series.len().max(1) as f64;
                for b in bars {
                    let gi = groups.iter().position(|g| *g == b.group).unwrap_or(0);
                    let si = series.iter().position(|x| *x == b.series).unwrap_or(0);
                    let x = ox + gi as f64 * gw + gw * 0.1 + si as f64 * bw;
                    let v = if b.value.is_finite() { b.value.clamp(y0, y1) } else { y0 };
                    let _ = writeln!(
                        s,
                        r#"<rect data-group="{}" data-series="{}" data-value="{}" x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                        esc(&b.group),
                        esc(&b.series),
                        fmt(b.value),
                        fmt(x),
                        fmt(py(v)),
                        fmt(bw * 0.9),
                        fmt(py(y0) - py(v)),
                        colour(si)
                    );
                    if let Some(e) = b.err.filter(|e| e.is_finite() && *e > 0.0) {
                        let cx = x + bw * 0.45;
                        let _ = writeln!(
                            s,
                            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#222"/>"##,
                            fmt(cx),
                            fmt(py((v - e).max(y0))),
                            fmt(cx),
                            fmt(py((v + e).min(y1)))
                        );
                    }
                }
                for (gi, g) in groups.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                        fmt(ox + (gi as f64 + 0.5) * gw),
                        fmt(oy + h + 12.0),
                        esc(g)
                    );
                }
                legend.extend(series.iter().enumerate().map(|(i, n)| (n.to_string(), colour(i))));
            }
            Body::Scatter(groups) => {
                for (i, (name, pts)) in groups.iter().enumerate() {
                    let c = colour(i);
                    for p in pts {
                        let _ =
                            writeln!(s, r#"<circle cx="{}" cy="{}" r="2.5" fill="{c}" fill-opacity="0.7"/>"#, fmt(px(p[0])), fmt(py(p[1])));
                    }
                    legend.push((name.clone(), c));
                }
            }
        }
        for (i, (name, c)) in legend.iter().enumerate() {
            let y = oy + 12.0 + i as f64 * 13.0;
            let _ = writeln!(s, r#"<rect x="{}" y="{}" width="9" height="9" fill="{c}"/>"#, fmt(ox + w - 110.0), fmt(y - 8.0));
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, fmt(ox + w - 97.0), fmt(y), esc(name));
        }
        s.push_str("</g>\n");
    }
}

/// Padded range over all coordinates, for axes without a natural range.
pub fn range(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.into_iter().filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-9);
    (lo - pad, hi + pad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_compact() {
        assert_eq!(fmt(0.0), "0");
        assert_eq!(fmt(1.0), "1");
        assert_eq!(fmt(-0.0000001), "0");
        assert_eq!(fmt(0.25), "0.25");
        assert_eq!(fmt(1.0 / 3.0), "0.333333");
    }

    #[test]
    fn line_paths_use_plot_coordinates() {
        let p = Panel {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            x: (0.0, 1.0),
            y: (0.0, 1.0),
            body: Body::Lines(vec![Line { name: "a".into(), points: vec![(0.0, 0.0), (0.5, 0.75), (1.0, 1.0)], dashed: false }]),
        };
        let svg = Sheet::single(p).render();
        assert!(svg.contains(r#"d="M0 0 L0.5 0.75 L1 1""#), "{svg}");
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn degenerate_range_is_widened() {
        let (a, b) = range([2.0, 2.0]);
        assert!(a < 2.0 && b > 2.0);
        assert_eq!(range([f64::NAN]), (0.0, 1.0));
    }
}
