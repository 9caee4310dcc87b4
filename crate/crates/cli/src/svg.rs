//! Self-contained SVG rendering of sweep results.

use std::fmt::Write as _;

use optomech::pipeline::Status;
use optomech::sweep::{AxisScale, SweepResult};

const PLOT: f64 = 480.0;
const LEFT: f64 = 80.0;
const TOP: f64 = 50.0;
const LEGEND_W: f64 = 190.0;
const BOTTOM: f64 = 60.0;

/// Ten-step sequential ramp, dark to light.
const RAMP: [&str; 10] = [
    "#440154", "#482878", "#3e4989", "#31688e", "#26828e", "#1f9e89", "#35b779", "#6ece58", "#b5de2b", "#fde725",
];
const MISSING: &str = "#ffffff";
const HATCH_BG: &str = "#d0d0d0";
const HATCH_FG: &str = "#808080";

fn header(s: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse"><rect width="6" height="6" fill="{HATCH_BG}"/><path d="M0,6 L6,0 M-1,1 L1,-1 M5,7 L7,5" stroke="{HATCH_FG}" stroke-width="1"/></pattern></defs>"#
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + PLOT / 2.0,
        escape(title)
    );
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn axis_label(result: &SweepResult, k: usize) -> String {
    let axis = &result.spec.axes[k];
    match axis.scale {
        AxisScale::Linear => axis.param.name().to_string(),
        AxisScale::Log => format!("{} (log scale)", axis.param.name()),
    }
}

struct Ramp {
    lo: f64,
    hi: f64,
    /// Flag columns (only 0 and 1) get a two-tone legend.
    binary: bool,
}

impl Ramp {
    fn new(values: impl Iterator<Item = f64>) -> Option<Self> {
        let mut binary = true;
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            binary &= v == 0.0 || v == 1.0;
            (lo.min(v), hi.max(v))
        });
        lo.is_finite().then_some(Self { lo, hi, binary })
    }

    fn bin(&self, v: f64) -> usize {
        if self.hi <= self.lo || self.binary {
            if self.binary && v < 0.5 {
                return 0;
            }
            return RAMP.len() - 1;
        }
        let t = (v - self.lo) / (self.hi - self.lo);
        ((t * RAMP.len() as f64) as usize).min(RAMP.len() - 1)
    }

    fn edge(&self, k: usize) -> f64 {
        self.lo + (self.hi - self.lo) * k as f64 / RAMP.len() as f64
    }
}

fn legend_box(s: &mut String, x: f64, y: f64, fill: &str, label: &str) {
    let _ = writeln!(
        s,
        r#"<rect x="{x}" y="{y}" width="16" height="14" fill="{fill}" stroke="black" stroke-width="0.5"/><text x="{}" y="{}">{}</text>"#,
        x + 22.0,
        y + 11.5,
        escape(label)
    );
}

pub fn render(result: &SweepResult) -> String {
    if result.spec.axes.len() == 2 {
        heatmap(result)
    } else {
        line_plot(result)
    }
}

fn heatmap(result: &SweepResult) -> String {
    let column = result.spec.plot_column();
    let (nx, ny) = (result.spec.axes[0].count, result.spec.axes[1].count);
    let (cw, ch) = (PLOT / nx as f64, PLOT / ny as f64);
    let values = result.series(column);
    let ramp = Ramp::new(values.iter().flatten().copied());
    let width = LEFT + PLOT + LEGEND_W;
    let height = TOP + PLOT + BOTTOM;
    let mut s = String::new();
    header(&mut s, width, height, &format!("{} : {column}", result.spec.name));

    let mut any_missing = false;
    let mut any_unstable = false;
    s.push_str("<g shape-rendering=\"crispEdges\">\n");
    for (idx, cell) in result.cells.iter().enumerate() {
        let (i, k) = (idx / ny, idx % ny);
        let x = LEFT + i as f64 * cw;
        let y = TOP + PLOT - (k + 1) as f64 * ch;
        let fill = if cell.status == Status::Unstable {
            any_unstable = true;
            "url(#hatch)".to_string()
        } else {
            match (values[idx], &ramp) {
                (Some(v), Some(r)) => RAMP[r.bin(v)].to_string(),
                _ => {
                    any_missing = true;
                    MISSING.to_string()
                }
            }
        };
        let _ = writeln!(
            s,
            r#"<rect x="{x:.3}" y="{y:.3}" width="{:.3}" height="{:.3}" fill="{fill}"/>"#,
            cw + 0.05,
            ch + 0.05
        );
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    );
    axes_ticks(&mut s, result, true);

    let lx = LEFT + PLOT + 20.0;
    let mut ly = TOP;
    let _ = writeln!(s, r#"<text x="{lx}" y="{}">{}</text>"#, ly + 10.0, escape(column));
    ly += 20.0;
    if let Some(r) = ramp.as_ref().filter(|r| r.binary) {
        for (v, label) in [(1.0, "1"), (0.0, "0")] {
            if v >= r.lo && v <= r.hi {
                legend_box(&mut s, lx, ly, RAMP[r.bin(v)], label);
                ly += 18.0;
            }
        }
    } else if let Some(r) = &ramp {
        let used = if r.hi <= r.lo { RAMP.len() - 1..RAMP.len() } else { 0..RAMP.len() };
        for k in used.rev() {
            let label = if r.hi <= r.lo {
                tick(r.lo)
            } else {
                format!("{} to {}", tick(r.edge(k)), tick(r.edge(k + 1)))
            };
            legend_box(&mut s, lx, ly, RAMP[k], &label);
            ly += 18.0;
        }
    }
    ly += 8.0;
    if any_unstable {
        legend_box(&mut s, lx, ly, "url(#hatch)", "unstable");
        ly += 18.0;
    }
    if any_missing {
        legend_box(&mut s, lx, ly, MISSING, "no value");
    }
    s.push_str("</svg>\n");
    s
}

fn axes_ticks(s: &mut String, result: &SweepResult, two_d: bool) {
    let xs = result.spec.axes[0].values();
    for (frac, v) in [(0.0, xs[0]), (0.5, xs[xs.len() / 2]), (1.0, xs[xs.len() - 1])] {
        let x = LEFT + frac * PLOT;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + PLOT,
            TOP + PLOT + 5.0,
            TOP + PLOT + 18.0,
            tick(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + PLOT / 2.0,
        TOP + PLOT + 40.0,
        escape(&axis_label(result, 0))
    );
    if two_d {
        let ys = result.spec.axes[1].values();
        for (frac, v) in [(0.0, ys[0]), (0.5, ys[ys.len() / 2]), (1.0, ys[ys.len() - 1])] {
            y_tick(s, frac, v);
        }
        y_label(s, &axis_label(result, 1));
    }
}

fn y_tick(s: &mut String, frac: f64, v: f64) {
    let y = TOP + PLOT - frac * PLOT;
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{}</text>"#,
        LEFT - 5.0,
        LEFT - 8.0,
        y + 4.0,
        tick(v)
    );
}

fn y_label(s: &mut String, label: &str) {
    let (x, y) = (22.0, TOP + PLOT / 2.0);
    let _ = writeln!(
        s,
        r#"<text x="{x}" y="{y}" text-anchor="middle" transform="rotate(-90 {x} {y})">{}</text>"#,
        escape(label)
    );
}

fn line_plot(result: &SweepResult) -> String {
    let column = result.spec.plot_column();
    let values = result.series(column);
    let n = values.len();
    let width = LEFT + PLOT + LEGEND_W;
    let height = TOP + PLOT + BOTTOM;
    let mut s = String::new();
    header(&mut s, width, height, &format!("{} : {column}", result.spec.name));
    let dx = PLOT / (n - 1) as f64;

    let mut any_unstable = false;
    for (k, cell) in result.cells.iter().enumerate() {
        if cell.status == Status::Unstable {
            any_unstable = true;
            let x = (LEFT + (k as f64 - 0.5) * dx).max(LEFT);
            let w = (dx).min(LEFT + PLOT - x);
            let _ = writeln!(
                s,
                r#"<rect x="{x:.3}" y="{TOP}" width="{w:.3}" height="{PLOT}" fill="url(#hatch)"/>"#
            );
        }
    }

    let range = Ramp::new(values.iter().flatten().copied());
    if let Some(r) = &range {
        let (lo, hi) = if r.hi > r.lo { (r.lo, r.hi) } else { (r.lo - 0.5, r.lo + 0.5) };
        let pad = 0.05 * (hi - lo);
        let (lo, hi) = (lo - pad, hi + pad);
        let y_of = |v: f64| TOP + PLOT - (v - lo) / (hi - lo) * PLOT;
        let mut segment: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, s: &mut String| {
            if seg.len() > 1 {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.6" points="{}"/>"#,
                    RAMP[2],
                    seg.join(" ")
                );
            } else if let Some(p) = seg.first() {
                let (x, y) = p.split_once(',').unwrap();
                let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="1.8" fill="{}"/>"#, RAMP[2]);
            }
            seg.clear();
        };
        for (k, v) in values.iter().enumerate() {
            match v {
                Some(v) => segment.push(format!("{:.3},{:.3}", LEFT + k as f64 * dx, y_of(*v))),
                None => flush(&mut segment, &mut s),
            }
        }
        flush(&mut segment, &mut s);
        for frac in [0.0, 0.5, 1.0] {
            y_tick(&mut s, frac, lo + frac * (hi - lo));
        }
    } else {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">no values</text>"#,
            LEFT + PLOT / 2.0,
            TOP + PLOT / 2.0
        );
    }
    y_label(&mut s, column);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    );
    axes_ticks(&mut s, result, false);

    let lx = LEFT + PLOT + 20.0;
    let _ = writeln!(
        s,
        r#"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="1.6"/><text x="{}" y="{}">{}</text>"#,
        TOP + 7.0,
        lx + 16.0,
        TOP + 7.0,
        RAMP[2],
        lx + 22.0,
        TOP + 11.5,
        escape(column)
    );
    if any_unstable {
        legend_box(&mut s, lx, TOP + 22.0, "url(#hatch)", "unstable");
    }
    s.push_str("</svg>\n");
    s
}
