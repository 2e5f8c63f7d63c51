//! Minimal hand-written SVG plots.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(title: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" font-family=\"sans-serif\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Axis { lo: 0.0, hi: 1.0 };
        }
        let pad = if hi > lo {
            0.05 * (hi - lo)
        } else {
            lo.abs().max(1.0) * 0.1
        };
        Axis {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0)
            .collect()
    }
}

fn frame(out: &mut String, x: Axis, y: Axis, x_label: &str, y_label: &str) {
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    let _ = writeln!(
        out,
        "<rect x=\"{l}\" y=\"{t}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        r - l,
        b - t
    );
    for v in x.ticks() {
        let px = x.map(v, l, r);
        let _ = writeln!(
            out,
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">{}</text>",
            b + 16.0,
            tick_label(v)
        );
    }
    for v in y.ticks() {
        let py = y.map(v, b, t);
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{py:.1}\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">{}</text>",
            l - 6.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">{}</text>",
        W / 2.0,
        H - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" transform=\"rotate(-90 16 {})\">{}</text>",
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Taps, centroids and soft-decision taps in the complex plane.
pub fn scatter(
    taps: &[(f64, f64)],
    centroids: &[(f64, f64)],
    soft: &[bool],
    title: &str,
) -> String {
    let all = || taps.iter().chain(centroids);
    let x = Axis::fit(all().map(|p| p.0));
    let y = Axis::fit(all().map(|p| p.1));
    let mut out = header(title);
    frame(&mut out, x, y, "real", "imaginary");
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    for (p, &is_soft) in taps
        .iter()
        .zip(soft.iter().chain(std::iter::repeat(&false)))
    {
        let (px, py) = (x.map(p.0, l, r), y.map(p.1, b, t));
        let _ = writeln!(
            out,
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"2.5\" fill=\"steelblue\"/>"
        );
        if is_soft {
            let _ = writeln!(out, "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"5\" fill=\"none\" stroke=\"darkorange\"/>");
        }
    }
    for c in centroids {
        let (px, py) = (x.map(c.0, l, r), y.map(c.1, b, t));
        let _ = writeln!(
            out,
            "<path d=\"M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}\" stroke=\"crimson\" stroke-width=\"2\"/>",
            px - 5.0, py - 5.0, px + 5.0, py + 5.0, px - 5.0, py + 5.0, px + 5.0, py - 5.0
        );
    }
    out.push_str("</svg>\n");
    out
}

fn polyline(out: &mut String, x: Axis, y: Axis, pts: &[(f64, f64)], style: &str) {
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    let coords: Vec<String> = pts
        .iter()
        .filter(|p| p.1.is_finite())
        .map(|p| format!("{:.2},{:.2}", x.map(p.0, l, r), y.map(p.1, b, t)))
        .collect();
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" {style}/>",
        coords.join(" ")
    );
}

/// Q factor against the swept parameter, with RMPS on a secondary axis.
pub fn q_and_rmps(points: &[(f64, f64, f64)], x_label: &str, title: &str) -> String {
    let x = Axis::fit(points.iter().map(|p| p.0));
    let yq = Axis::fit(points.iter().map(|p| p.1));
    let yr = Axis::fit(points.iter().map(|p| p.2));
    let mut out = header(title);
    frame(&mut out, x, yq, x_label, "Q factor (dB)");
    let (r, t, b) = (W - MARGIN, MARGIN, H - MARGIN);
    for v in yr.ticks() {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" font-family=\"sans-serif\" fill=\"gray\">{}</text>",
            r + 6.0,
            yr.map(v, b, t),
            tick_label(v)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" fill=\"gray\" transform=\"rotate(90 {} {})\">RMPS</text>",
        W - 14.0,
        H / 2.0,
        W - 14.0,
        H / 2.0
    );
    let q: Vec<(f64, f64)> = points.iter().map(|p| (p.0, p.1)).collect();
    let rm: Vec<(f64, f64)> = points.iter().map(|p| (p.0, p.2)).collect();
    polyline(
        &mut out,
        x,
        yq,
        &q,
        "stroke=\"steelblue\" stroke-width=\"2\"",
    );
    polyline(
        &mut out,
        x,
        yr,
        &rm,
        "stroke=\"gray\" stroke-dasharray=\"6 4\"",
    );
    out.push_str("</svg>\n");
    out
}
