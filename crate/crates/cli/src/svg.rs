//! Minimal self-contained SVG plots: line plots and heatmaps.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

pub const PALETTE: [&str; 6] = [
    "#d62728", "#1f77b4", "#7f7f7f", "#2ca02c", "#9467bd", "#ff7f0e",
];

const VIRIDIS: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

pub fn viridis(t: f64) -> String {
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let x = t * (VIRIDIS.len() - 1) as f64;
    let k = (x.floor() as usize).min(VIRIDIS.len() - 2);
    let f = x - k as f64;
    let (a, b) = (VIRIDIS[k], VIRIDIS[k + 1]);
    let c = |u: f64, v: f64| (u + (v - u) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(a.0, b.0), c(a.1, b.1), c(a.2, b.2))
}

/// Short tick label.
pub fn tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        esc(title)
    );
    s
}

struct Map {
    lo: f64,
    hi: f64,
    log: bool,
    a: f64,
    b: f64,
}

impl Map {
    fn new(lo: f64, hi: f64, log: bool, a: f64, b: f64) -> Self {
        let (lo, hi) = if log {
            (lo.log10(), hi.log10())
        } else {
            (lo, hi)
        };
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        };
        Self { lo, hi, log, a, b }
    }

    fn at(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        self.a + (v - self.lo) / (self.hi - self.lo) * (self.b - self.a)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..5)
            .map(|k| self.lo + (self.hi - self.lo) * k as f64 / 4.0)
            .map(|v| if self.log { 10f64.powf(v) } else { v })
            .collect()
    }
}

fn axes(s: &mut String, x: &Map, y: &Map, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for v in x.ticks() {
        let px = x.at(v);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}" stroke="black"/>"#,
            y0 + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            tick(v)
        );
    }
    for v in y.ticks() {
        let py = y.at(v);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py + 4.0,
            tick(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 15.0,
        esc(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        esc(ylabel)
    );
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub color: &'static str,
    pub dashed: bool,
}

fn finite_range<'a>(vals: impl Iterator<Item = &'a f64>, positive: bool) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in vals {
        if v.is_finite() && (!positive || v > 0.0) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo > hi {
        if positive {
            (0.1, 1.0)
        } else {
            (0.0, 1.0)
        }
    } else {
        (lo, hi)
    }
}

pub fn line_plot(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series],
    y_log: bool,
) -> String {
    let (xlo, xhi) = finite_range(series.iter().flat_map(|s| s.xs.iter()), false);
    let (mut ylo, yhi) = finite_range(series.iter().flat_map(|s| s.ys.iter()), y_log);
    if y_log {
        ylo = ylo.max(yhi * 1e-12);
    }
    let x = Map::new(xlo, xhi, false, LEFT, W - RIGHT);
    let y = Map::new(ylo, yhi, y_log, H - BOTTOM, TOP);
    let mut s = header(title);
    axes(&mut s, &x, &y, xlabel, ylabel);
    for (k, se) in series.iter().enumerate() {
        let mut d = String::new();
        let mut pen = false;
        for (&xv, &yv) in se.xs.iter().zip(&se.ys) {
            if !xv.is_finite() || !yv.is_finite() || (y_log && yv < ylo) {
                pen = false;
                continue;
            }
            let _ = write!(
                d,
                "{}{:.2} {:.2} ",
                if pen { "L" } else { "M" },
                x.at(xv),
                y.at(yv)
            );
            pen = true;
        }
        let dash = if se.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
            d.trim_end(),
            se.color
        );
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = W - RIGHT + 8.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"{dash}/>"#,
            lx + 20.0,
            se.color
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 24.0,
            ly + 4.0,
            esc(&se.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Cell edges for grid centres `c`.
fn edges(c: &[f64]) -> Vec<f64> {
    if c.len() == 1 {
        return vec![c[0] - 0.5, c[0] + 0.5];
    }
    let mut e = Vec::with_capacity(c.len() + 1);
    e.push(c[0] - 0.5 * (c[1] - c[0]));
    for k in 1..c.len() {
        e.push(0.5 * (c[k - 1] + c[k]));
    }
    e.push(c[c.len() - 1] + 0.5 * (c[c.len() - 1] - c[c.len() - 2]));
    e
}

/// Colour of each cell, with the legend drawn to its right.
pub enum Fill<'a> {
    /// Continuous values (`None` cells are left blank) with a colour bar.
    Scalar {
        values: &'a [Option<f64>],
        label: &'a str,
    },
    /// Category index per cell and the category names.
    Categorical {
        values: &'a [Option<usize>],
        names: &'a [String],
    },
}

/// Heatmap over centres `xs × ys`; values are row-major with `x` fastest.
pub fn heatmap(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    xs: &[f64],
    ys: &[f64],
    fill: Fill<'_>,
) -> String {
    let (ex, ey) = (edges(xs), edges(ys));
    let x = Map::new(ex[0], ex[ex.len() - 1], false, LEFT, W - RIGHT);
    let y = Map::new(ey[0], ey[ey.len() - 1], false, H - BOTTOM, TOP);
    let mut s = header(title);
    let (lo, hi) = match &fill {
        Fill::Scalar { values, .. } => finite_range(values.iter().flatten(), false),
        Fill::Categorical { .. } => (0.0, 1.0),
    };
    for iy in 0..ys.len() {
        for ix in 0..xs.len() {
            let k = iy * xs.len() + ix;
            let color = match &fill {
                Fill::Scalar { values, .. } => match values[k] {
                    Some(v) if v.is_finite() => {
                        viridis(if hi > lo { (v - lo) / (hi - lo) } else { 0.5 })
                    }
                    _ => continue,
                },
                Fill::Categorical { values, .. } => match values[k] {
                    Some(c) => PALETTE[c % PALETTE.len()].to_string(),
                    None => continue,
                },
            };
            let (px0, px1) = (x.at(ex[ix]), x.at(ex[ix + 1]));
            let (py0, py1) = (y.at(ey[iy + 1]), y.at(ey[iy]));
            let _ = writeln!(
                s,
                r#"<rect x="{px0:.2}" y="{py0:.2}" width="{:.2}" height="{:.2}" fill="{color}" stroke="{color}" stroke-width="0.3"/>"#,
                px1 - px0,
                py1 - py0
            );
        }
    }
    axes(&mut s, &x, &y, xlabel, ylabel);
    let bx = W - RIGHT + 12.0;
    match fill {
        Fill::Scalar { label, .. } => {
            let steps = 32;
            let h = (H - BOTTOM - TOP) / steps as f64;
            for k in 0..steps {
                let t = (k as f64 + 0.5) / steps as f64;
                let py = H - BOTTOM - (k + 1) as f64 * h;
                let _ = writeln!(
                    s,
                    r#"<rect x="{bx}" y="{py:.2}" width="16" height="{:.2}" fill="{}"/>"#,
                    h + 0.3,
                    viridis(t)
                );
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}">{}</text>"#,
                bx + 20.0,
                H - BOTTOM,
                tick(lo)
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}">{}</text>"#,
                bx + 20.0,
                TOP + 10.0,
                tick(hi)
            );
            let _ = writeln!(
                s,
                r#"<text x="{bx}" y="{}">{}</text>"#,
                TOP - 6.0,
                esc(label)
            );
        }
        Fill::Categorical { names, .. } => {
            for (k, name) in names.iter().enumerate() {
                let py = TOP + 18.0 * k as f64;
                let _ = writeln!(
                    s,
                    r#"<rect x="{bx}" y="{py}" width="12" height="12" fill="{}"/>"#,
                    PALETTE[k % PALETTE.len()]
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}">{}</text>"#,
                    bx + 16.0,
                    py + 10.0,
                    esc(name)
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
