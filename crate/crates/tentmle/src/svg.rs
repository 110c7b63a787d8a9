//! SVG figures for planar results: the hull, the optimal subdivision's
//! edges, and per-cell shading by density. One-dimensional configurations
//! get a polyline profile of the log-density instead.

use crate::geometry::{PointConfiguration, Subdivision};

/// Render a solved instance. `d = 2` draws the subdivision with cells shaded
/// by their mean density; `d = 1` draws the piecewise-linear log-density.
/// Other dimensions return a one-line placeholder note.
pub(crate) fn render(
    config: &PointConfiguration,
    heights: &[f64],
    subdivision: &Subdivision,
) -> String {
    match config.dim() {
        1 => render_profile(config, heights),
        2 => render_planar(config, heights, subdivision),
        d => format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"320\" height=\"40\">\
             <text x=\"8\" y=\"24\">no figure for d = {d}</text></svg>\n"
        ),
    }
}

fn render_planar(config: &PointConfiguration, heights: &[f64], sub: &Subdivision) -> String {
    let pts = config.points();
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in pts {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    }
    let span = (xmax - xmin).max(ymax - ymin).max(1e-9);
    let margin = 0.06 * span;
    let width = 640.0;
    let scale = (width - 2.0 * 20.0) / (span + 2.0 * margin);
    let sx = |x: f64| 20.0 + (x - xmin + margin) * scale;
    // SVG y grows downward.
    let sy = |y: f64| 20.0 + (ymax + margin - y) * scale;
    let height = sy(ymin - margin) + 20.0;

    // Shade cells by mean log-density.
    let cell_levels: Vec<f64> = sub
        .cells()
        .iter()
        .map(|c| c.iter().map(|&i| heights[i]).sum::<f64>() / c.len() as f64)
        .collect();
    let lo = cell_levels.iter().cloned().fold(f64::MAX, f64::min);
    let hi = cell_levels.iter().cloned().fold(f64::MIN, f64::max);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width} {height:.0}\">\n"
    );
    for (cell, level) in sub.cells().iter().zip(&cell_levels) {
        let ring = cell_ring(pts, cell);
        let path: Vec<String> = ring
            .iter()
            .map(|&i| format!("{:.2},{:.2}", sx(pts[i][0]), sy(pts[i][1])))
            .collect();
        let t = if hi > lo {
            (level - lo) / (hi - lo)
        } else {
            0.5
        };
        // Light blue to deep blue with density.
        let shade = (230.0 - 150.0 * t) as u8;
        out.push_str(&format!(
            "  <polygon points=\"{}\" fill=\"rgb({},{},230)\" stroke=\"black\" stroke-width=\"1.4\"/>\n",
            path.join(" "),
            shade,
            shade
        ));
    }
    for (i, p) in pts.iter().enumerate() {
        out.push_str(&format!(
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"black\"/>\n  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\">{}</text>\n",
            sx(p[0]),
            sy(p[1]),
            sx(p[0]) + 7.0,
            sy(p[1]) - 7.0,
            i + 1
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Boundary ring of a planar cell in counterclockwise order (angular sort
/// around the centroid; adequate for convex cells).
fn cell_ring(points: &[Vec<f64>], cell: &[usize]) -> Vec<usize> {
    let cx: f64 = cell.iter().map(|&i| points[i][0]).sum::<f64>() / cell.len() as f64;
    let cy: f64 = cell.iter().map(|&i| points[i][1]).sum::<f64>() / cell.len() as f64;
    let mut ring = cell.to_vec();
    ring.sort_by(|&a, &b| {
        let ta = (points[a][1] - cy).atan2(points[a][0] - cx);
        let tb = (points[b][1] - cy).atan2(points[b][0] - cx);
        ta.partial_cmp(&tb).unwrap_or(std::cmp::Ordering::Equal)
    });
    ring
}

fn render_profile(config: &PointConfiguration, heights: &[f64]) -> String {
    let mut order: Vec<usize> = (0..config.n()).collect();
    order.sort_by(|&a, &b| {
        config.point(a)[0]
            .partial_cmp(&config.point(b)[0])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let xs: Vec<f64> = order.iter().map(|&i| config.point(i)[0]).collect();
    let ys: Vec<f64> = order.iter().map(|&i| heights[i]).collect();
    let (xmin, xmax) = (xs[0], xs[xs.len() - 1]);
    let ymin = ys.iter().cloned().fold(f64::MAX, f64::min);
    let ymax = ys.iter().cloned().fold(f64::MIN, f64::max);
    let xspan = (xmax - xmin).max(1e-9);
    let yspan = (ymax - ymin).max(1e-9);
    let sx = |x: f64| 30.0 + (x - xmin) / xspan * 580.0;
    let sy = |y: f64| 20.0 + (ymax - y) / yspan * 280.0;
    let pts: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"340\" viewBox=\"0 0 640 340\">\n",
    );
    out.push_str(&format!(
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n",
        pts.join(" ")
    ));
    for (x, y) in xs.iter().zip(&ys) {
        out.push_str(&format!(
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"black\"/>\n",
            sx(*x),
            sy(*y)
        ));
    }
    out.push_str("</svg>\n");
    out
}
