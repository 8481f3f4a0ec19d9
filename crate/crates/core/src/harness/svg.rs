//! Minimal log-log SVG plot of a sweep: mean error with a one-sigma band
//! and the two forward-error bound curves.

use std::fmt::Write as _;

use crate::harness::sweep::SweepRecord;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    /// Decade-aligned log axis covering `[min, max]`.
    fn log(min: f64, max: f64, px_lo: f64, px_hi: f64) -> Self {
        let mut lo = min.log10().floor();
        let mut hi = max.log10().ceil();
        if hi <= lo {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        let t = (v.log10() - self.lo) / (self.hi - self.lo);
        self.px_lo + t * (self.px_hi - self.px_lo)
    }

    fn decades(&self) -> impl Iterator<Item = i32> {
        (self.lo.ceil() as i32)..=(self.hi.floor() as i32)
    }
}

fn polyline(out: &mut String, pts: &[(f64, f64)], color: &str, dash: Option<&str>) {
    if pts.is_empty() {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let dash = dash.map(|d| format!(" stroke-dasharray=\"{d}\"")).unwrap_or_default();
    writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"{dash} points=\"{}\"/>",
        coords.join(" ")
    )
    .unwrap();
}

type Curve = (&'static str, &'static str, Option<&'static str>, fn(&SweepRecord) -> f64);

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

/// Render the sweep as a standalone SVG document.
pub fn render_sweep_svg(records: &[SweepRecord], title: &str) -> String {
    let pts: Vec<&SweepRecord> = records.iter().filter(|r| positive(r.cond_target)).collect();
    let mut ys: Vec<f64> = Vec::new();
    for r in &pts {
        ys.extend([r.mean_rel_err, r.bound_final, r.bound_final_cond2, r.mean_rel_err + r.std_rel_err]);
    }
    ys.retain(|&v| positive(v));
    let (ymin, ymax) = if ys.is_empty() {
        (1e-6, 1.0)
    } else {
        (
            ys.iter().copied().fold(f64::INFINITY, f64::min),
            ys.iter().copied().fold(0.0, f64::max),
        )
    };
    let xs: Vec<f64> = pts.iter().map(|r| r.cond_target).collect();
    let (xmin, xmax) = if xs.is_empty() {
        (1.0, 10.0)
    } else {
        (
            xs.iter().copied().fold(f64::INFINITY, f64::min),
            xs.iter().copied().fold(0.0, f64::max),
        )
    };
    let xa = Axis::log(xmin, xmax, LEFT, WIDTH - RIGHT);
    let ya = Axis::log(ymin, ymax, HEIGHT - BOTTOM, TOP);
    let floor = 10f64.powf(ya.lo);

    let mut s = String::new();
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    )
    .unwrap();
    writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    writeln!(
        s,
        "<text x=\"{:.1}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    )
    .unwrap();

    // grid and tick labels
    for d in xa.decades() {
        let x = xa.map(10f64.powi(d));
        writeln!(s, "<line x1=\"{x:.2}\" y1=\"{TOP}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#ddd\"/>", HEIGHT - BOTTOM).unwrap();
        writeln!(s, "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">1e{d}</text>", HEIGHT - BOTTOM + 18.0).unwrap();
    }
    for d in ya.decades() {
        let y = ya.map(10f64.powi(d));
        writeln!(s, "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>", WIDTH - RIGHT).unwrap();
        writeln!(s, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">1e{d}</text>", LEFT - 6.0, y + 4.0).unwrap();
    }
    writeln!(
        s,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        WIDTH - RIGHT - LEFT,
        HEIGHT - BOTTOM - TOP
    )
    .unwrap();
    writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">cond2(H)</text>",
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 15.0
    )
    .unwrap();
    writeln!(
        s,
        "<text x=\"20\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.1})\">relative error</text>",
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0
    )
    .unwrap();

    // one-sigma band around the mean error
    let band: Vec<&&SweepRecord> = pts.iter().filter(|r| positive(r.mean_rel_err)).collect();
    if band.len() >= 2 {
        let mut poly: Vec<String> = band
            .iter()
            .map(|r| {
                let hi = r.mean_rel_err + r.std_rel_err.max(0.0);
                format!("{:.2},{:.2}", xa.map(r.cond_target), ya.map(hi))
            })
            .collect();
        for r in band.iter().rev() {
            let lo = (r.mean_rel_err - r.std_rel_err.max(0.0)).max(floor);
            poly.push(format!("{:.2},{:.2}", xa.map(r.cond_target), ya.map(lo)));
        }
        writeln!(s, "<polygon fill=\"#1f77b4\" fill-opacity=\"0.2\" stroke=\"none\" points=\"{}\"/>", poly.join(" ")).unwrap();
    }

    let series = |f: fn(&SweepRecord) -> f64| -> Vec<(f64, f64)> {
        pts.iter()
            .filter(|r| positive(f(r)))
            .map(|r| (xa.map(r.cond_target), ya.map(f(r))))
            .collect()
    };
    let curves: [Curve; 3] = [
        ("mean error", "#1f77b4", None, |r| r.mean_rel_err),
        ("bound (condF form)", "#ff7f0e", None, |r| r.bound_final),
        ("bound (cond2^2 form)", "#ff7f0e", Some("6 4"), |r| r.bound_final_cond2),
    ];
    for (k, (label, color, dash, f)) in curves.iter().enumerate() {
        polyline(&mut s, &series(*f), color, *dash);
        let ly = TOP + 20.0 + 22.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let dash_attr = dash.map(|d| format!(" stroke-dasharray=\"{d}\"")).unwrap_or_default();
        writeln!(
            s,
            "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"{dash_attr}/>",
            lx + 25.0
        )
        .unwrap();
        writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\">{label}</text>", lx + 32.0, ly + 4.0).unwrap();
    }
    let ly = TOP + 20.0 + 22.0 * 3.0;
    let lx = WIDTH - RIGHT + 15.0;
    writeln!(
        s,
        "<rect x=\"{lx:.1}\" y=\"{:.1}\" width=\"25\" height=\"10\" fill=\"#1f77b4\" fill-opacity=\"0.2\"/>",
        ly - 5.0
    )
    .unwrap();
    writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\">mean ± 1 std</text>", lx + 32.0, ly + 4.0).unwrap();
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
