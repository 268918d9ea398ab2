use ripsbar::reduce::PersistenceDiagram;

const SIZE: f64 = 420.0;
const MARGIN: f64 = 45.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Renders the diagram as a standalone SVG: finite pairs as dots above the
/// diagonal, essential classes as triangles pinned to the top edge, one color
/// per dimension.
pub fn diagram_svg(diagram: &PersistenceDiagram) -> String {
    let max_finite = diagram
        .pairs
        .iter()
        .flat_map(|p| [p.birth, p.death])
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let top = if max_finite > 0.0 { max_finite * 1.05 } else { 1.0 };
    let scale = (SIZE - 2.0 * MARGIN) / top;
    let sx = |v: f64| MARGIN + v * scale;
    let sy = |v: f64| SIZE - MARGIN - v * scale;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" \
         viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    ));
    out.push_str(&format!(
        "  <rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>\n"
    ));
    // Axes and the diagonal.
    out.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        sx(0.0), sy(0.0), sx(top), sy(0.0)
    ));
    out.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        sx(0.0), sy(0.0), sx(0.0), sy(top)
    ));
    out.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#aaaaaa\" \
         stroke-dasharray=\"4 3\"/>\n",
        sx(0.0), sy(0.0), sx(top), sy(top)
    ));
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\">birth</text>\n",
        sx(top / 2.0) - 14.0, sy(0.0) + 30.0
    ));
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 {} {})\">death</text>\n",
        sx(0.0) - 30.0, sy(top / 2.0), sx(0.0) - 30.0, sy(top / 2.0)
    ));

    for p in &diagram.pairs {
        let color = COLORS[p.dim % COLORS.len()];
        if p.death.is_finite() {
            out.push_str(&format!(
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"{}\" fill-opacity=\"0.8\">\
                 <title>dim {} [{}, {})</title></circle>\n",
                sx(p.birth), sy(p.death), color, p.dim, p.birth, p.death
            ));
        } else {
            let (x, y) = (sx(p.birth), sy(top));
            out.push_str(&format!(
                "  <polygon points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\" fill=\"{}\">\
                 <title>dim {} [{}, inf)</title></polygon>\n",
                x, y - 4.5, x - 4.0, y + 3.5, x + 4.0, y + 3.5, color, p.dim, p.birth
            ));
        }
    }

    // Legend, one entry per dimension present.
    let mut dims: Vec<usize> = diagram.pairs.iter().map(|p| p.dim).collect();
    dims.sort_unstable();
    dims.dedup();
    for (k, dim) in dims.iter().enumerate() {
        let y = MARGIN + 16.0 * k as f64;
        out.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"/>\n",
            SIZE - MARGIN - 60.0, y, COLORS[dim % COLORS.len()]
        ));
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\">H{}</text>\n",
            SIZE - MARGIN - 50.0, y + 4.0, dim
        ));
    }
    out.push_str("</svg>\n");
    out
}
