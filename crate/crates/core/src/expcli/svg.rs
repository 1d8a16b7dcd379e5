//! ECDF plots as plain SVG polylines.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 56.0;
const MAX_VERTICES: usize = 600;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[pos.min(sorted.len() - 1)]
}

/// Renders the ECDFs of `curves`, clipped to the pooled 0.5%–99.5% range.
pub fn ecdf_svg(title: &str, curves: &[(String, Vec<f64>)], config_sha256: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, "<!-- config_sha256={config_sha256} -->");
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));

    let mut pooled: Vec<f64> = curves.iter().flat_map(|(_, v)| v.iter().copied()).filter(|x| x.is_finite()).collect();
    pooled.sort_by(f64::total_cmp);
    if pooled.is_empty() {
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">no distributional series</text>"#, WIDTH / 2.0, HEIGHT / 2.0);
        out.push_str("</svg>\n");
        return out;
    }
    let (mut lo, mut hi) = (quantile(&pooled, 0.005), quantile(&pooled, 0.995));
    if hi <= lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let px = |x: f64| x0 + (x.clamp(lo, hi) - lo) / (hi - lo) * (x1 - x0);
    let py = |p: f64| y0 + p * (y1 - y0);

    let _ = writeln!(out, r#"<g stroke="black" fill="none"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#);
    for i in 0..=4 {
        let p = i as f64 / 4.0;
        let x = lo + p * (hi - lo);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, px(x), y0 + 16.0, fmt_tick(x));
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{p:.2}</text>"#, x0 - 6.0, py(p) + 4.0);
    }

    for (c, (label, values)) in curves.iter().enumerate() {
        let color = COLORS[c % COLORS.len()];
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            continue;
        }
        v.sort_by(f64::total_cmp);
        let stride = v.len().div_ceil(MAX_VERTICES / 2).max(1);
        let mut pts = format!("{:.2},{:.2}", px(lo), py(0.0));
        let mut prev = 0.0;
        for i in (0..v.len()).step_by(stride).chain(std::iter::once(v.len() - 1)) {
            let f = (i + 1) as f64 / v.len() as f64;
            let _ = write!(pts, " {:.2},{:.2} {:.2},{:.2}", px(v[i]), py(prev), px(v[i]), py(f));
            prev = f;
        }
        let _ = write!(pts, " {:.2},{:.2}", px(hi), py(1.0));
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>"#);
        let ly = MARGIN + 16.0 * c as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x0 + 12.0,
            x0 + 36.0,
            x0 + 42.0,
            ly + 4.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn fmt_tick(x: f64) -> String {
    if x == 0.0 || (1e-2..1e4).contains(&x.abs()) {
        format!("{x:.2}")
    } else {
        format!("{x:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
