//! Static SVG polyline plots.

use std::fmt::Write as _;

const W: f64 = 720.0;
const H: f64 = 420.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One polyline per series over the shared abscissae. Non-finite values
/// break the line.
pub fn svg_profiles(title: &str, xs: &[f64], series: &[(String, Vec<f64>)]) -> String {
    let finite = || series.iter().flat_map(|s| s.1.iter().copied()).filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let (x0, x1) = (xs.first().copied().unwrap_or(0.0), xs.last().copied().unwrap_or(1.0));
    let span = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |x: f64| PAD + (x - x0) / span * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - lo) / (hi - lo) * (H - 2.0 * PAD);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<path d="M{PAD},{PAD} V{} H{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD
    );
    for (v, y) in [(lo, H - PAD), (hi, PAD)] {
        let _ = writeln!(out, r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="end">{v:.3}</text>"#, PAD - 4.0);
    }
    for (v, x) in [(x0, PAD), (x1, W - PAD)] {
        let _ = writeln!(out, r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{v}</text>"#, H - PAD + 16.0);
    }
    for (i, (label, ys)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        let mut pen = false;
        for (&x, &y) in xs.iter().zip(ys) {
            if y.is_finite() {
                let _ = write!(d, "{}{:.2},{:.2} ", if pen { "L" } else { "M" }, px(x), py(y));
                pen = true;
            } else {
                pen = false;
            }
        }
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#, d.trim_end());
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            W - PAD - 110.0,
            PAD + 14.0 * (i as f64 + 1.0),
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breaks_lines_at_nan() {
        let s = svg_profiles("t", &[0.0, 1.0, 2.0], &[("a".into(), vec![0.0, f64::NAN, 1.0])]);
        assert_eq!(s.matches('M').count() - s.matches("M50,50").count(), 2);
        assert!(s.starts_with("<svg"));
    }
}
