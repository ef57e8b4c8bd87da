//! Static SVG plots: learning curves and top-down path plots. Plain string
//! assembly, no display dependencies.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 48.0;

/// Distinguishable path colors, cycled for overlays.
pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn open_svg(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n<title>{title}</title>\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    )
}

/// Learning curve: mean reward against epoch.
pub fn learning_curve(points: &[(f64, f64)], title: &str) -> String {
    let mut s = open_svg(title);
    if points.len() >= 2 {
        let (x0, x1) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
        let (y0, y1) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
        let xspan = (x1 - x0).max(1e-12);
        let yspan = (y1 - y0).max(1e-12);
        let px = |x: f64| MARGIN + (x - x0) / xspan * (W - 2.0 * MARGIN);
        let py = |y: f64| H - MARGIN - (y - y0) / yspan * (H - 2.0 * MARGIN);

        let _ = write!(
            s,
            "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
             <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
            m = MARGIN,
            r = W - MARGIN,
            t = MARGIN,
            b = H - MARGIN
        );
        let _ = write!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">epoch</text>\n\
             <text x=\"8\" y=\"{}\" font-size=\"12\">mean reward</text>\n",
            W / 2.0 - 20.0,
            H - 12.0,
            MARGIN - 8.0
        );
        let pts: Vec<String> =
            points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = write!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            pts.join(" "),
            PALETTE[0]
        );
        let _ = write!(
            s,
            "<text x=\"{m}\" y=\"{}\" font-size=\"10\">{y0:.2}</text>\n\
             <text x=\"{m}\" y=\"{}\" font-size=\"10\">{y1:.2}</text>\n",
            H - MARGIN + 12.0,
            MARGIN - 4.0,
            m = MARGIN
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Top-down path plot: arena boundary, goals, obstacles, and one polyline
/// per path, colored from [`PALETTE`].
pub fn path_plot(
    arena_radius: f64,
    paths: &[Vec<(f64, f64)>],
    goals: &[(f64, f64)],
    obstacles: &[(f64, f64, f64)],
    title: &str,
) -> String {
    let half = (W.min(H) - 2.0 * MARGIN) / 2.0;
    let scale = half / arena_radius.max(1e-9);
    let px = |x: f64| W / 2.0 + x * scale;
    let py = |y: f64| H / 2.0 - y * scale;

    let mut s = open_svg(title);
    let _ = write!(
        s,
        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n",
        W / 2.0,
        H / 2.0,
        arena_radius * scale
    );
    for &(x, y, r) in obstacles {
        let _ = write!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"#cccccc\" stroke=\"#555555\"/>\n",
            px(x),
            py(y),
            r * scale
        );
    }
    for &(x, y) in goals {
        let _ = write!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n",
            px(x),
            py(y)
        );
    }
    for (i, path) in paths.iter().enumerate() {
        if path.is_empty() {
            continue;
        }
        let pts: Vec<String> =
            path.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = write!(
            s,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"/>\n",
            pts.join(" "),
            PALETTE[i % PALETTE.len()]
        );
    }
    s.push_str("</svg>\n");
    s
}
