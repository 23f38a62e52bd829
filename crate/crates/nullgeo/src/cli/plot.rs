//! Minimal static SVG line plots for scenario outputs.

/// Render one polyline series as a static SVG document with axes and
/// min/max tick labels.  Returns the SVG text.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const ML: f64 = 70.0; // left margin
    const MR: f64 = 20.0;
    const MT: f64 = 40.0;
    const MB: f64 = 55.0;

    let finite: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if finite.is_empty() {
        x0 = 0.0;
        x1 = 1.0;
        y0 = 0.0;
        y1 = 1.0;
    }
    if x1 - x0 < 1e-300 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-300 {
        let pad = y0.abs().max(1.0) * 0.1;
        y0 -= pad;
        y1 += pad;
    }
    let px = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let py = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let mut path = String::new();
    for (i, &(x, y)) in finite.iter().enumerate() {
        path.push_str(if i == 0 { "M" } else { " L" });
        path.push_str(&format!("{:.2},{:.2}", px(x), py(y)));
    }

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"monospace\" font-size=\"13\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{:.0}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        W / 2.0,
        escape(title)
    ));
    // Axes.
    s.push_str(&format!(
        "<path d=\"M{ML},{MT} L{ML},{b} L{r},{b}\" stroke=\"black\" fill=\"none\"/>\n",
        b = H - MB,
        r = W - MR
    ));
    // Tick labels.
    s.push_str(&format!(
        "<text x=\"{ML}\" y=\"{:.0}\" text-anchor=\"middle\">{:.4e}</text>\n",
        H - MB + 18.0,
        x0
    ));
    s.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"middle\">{:.4e}</text>\n",
        W - MR,
        H - MB + 18.0,
        x1
    ));
    s.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"end\">{:.4e}</text>\n",
        ML - 6.0,
        H - MB,
        y0
    ));
    s.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"end\">{:.4e}</text>\n",
        ML - 6.0,
        MT + 5.0,
        y1
    ));
    // Axis labels.
    s.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"middle\">{}</text>\n",
        (ML + W - MR) / 2.0,
        H - 12.0,
        escape(xlabel)
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{:.0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.0})\">{}</text>\n",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0,
        escape(ylabel)
    ));
    s.push_str(&format!(
        "<path d=\"{path}\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" fill=\"none\"/>\n"
    ));
    for &(x, y) in &finite {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.2\" fill=\"#1f5fa8\"/>\n",
            px(x),
            py(y)
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
