//! Deterministic SVG rendering: flat-colored Voronoi regions, dark
//! interface polylines, red Voronoi vertices, and the dual mesh in black.

use std::fmt::Write as _;

use crate::dual::DualMesh;
use crate::geometry::Point2;
use crate::primal::PrimalDiagram;

const WIDTH_PX: f64 = 800.0;

/// Fixed pastel palette keyed by site index: golden-ratio hue walk so any
/// site count gets distinct, stable colors.
pub fn site_color(k: usize) -> String {
    let h = (k as f64 * 0.618033988749895).fract() * 360.0;
    let (s, l) = (0.55, 0.82);
    // hsl -> rgb
    let c = (1.0 - (2.0 * l - 1.0f64).abs()) * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0f64).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to8 = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", to8(r1), to8(g1), to8(b1))
}

/// Render the primal diagram (and optionally its dual) as an SVG document.
/// Element order, coordinates, and colors are pure functions of the input.
pub fn render_svg(pd: &PrimalDiagram, dm: Option<&DualMesh>) -> String {
    let grid = pd.grid;
    let r = grid.rect;
    let h_px = WIDTH_PX * r.height() / r.width();
    let px = |p: Point2| -> (f64, f64) {
        (
            (p.x - r.x0) / r.width() * WIDTH_PX,
            (r.y1 - p.y) / r.height() * h_px,
        )
    };
    let f = |v: f64| format!("{:.3}", v);

    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\">",
        f(WIDTH_PX),
        f(h_px)
    )
    .unwrap();

    // Regions: per-row runs of equal label merged into one rect each.
    writeln!(out, "<g stroke=\"none\">").unwrap();
    let cw = WIDTH_PX / grid.nx as f64;
    let ch = h_px / grid.ny as f64;
    for j in 0..grid.ny {
        let y = (grid.ny - 1 - j) as f64 * ch;
        let mut i = 0;
        while i < grid.nx {
            let l = pd.label[grid.index(i, j)];
            let mut i1 = i + 1;
            while i1 < grid.nx && pd.label[grid.index(i1, j)] == l {
                i1 += 1;
            }
            writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                f(i as f64 * cw),
                f(y),
                f((i1 - i) as f64 * cw),
                f(ch),
                site_color(l as usize)
            )
            .unwrap();
            i = i1;
        }
    }
    writeln!(out, "</g>").unwrap();

    // Interfaces: one path per site pair, all its lattice segments as
    // subpaths.
    writeln!(
        out,
        "<g stroke=\"#333333\" stroke-width=\"1\" fill=\"none\">"
    )
    .unwrap();
    for edge in pd.edges.values() {
        let mut d = String::new();
        for &(c0, c1) in &edge.segments {
            let (x0, y0) = px(pd.corner_pos(c0));
            let (x1, y1) = px(pd.corner_pos(c1));
            write!(d, "M{} {}L{} {}", f(x0), f(y0), f(x1), f(y1)).unwrap();
        }
        writeln!(out, "<path d=\"{}\"/>", d).unwrap();
    }
    writeln!(out, "</g>").unwrap();

    // Dual mesh in black straight segments over the top.
    if let Some(dm) = dm {
        writeln!(
            out,
            "<g stroke=\"#000000\" stroke-width=\"2\" fill=\"none\">"
        )
        .unwrap();
        for &(a, b) in &dm.edges {
            let (x0, y0) = px(dm.positions[a]);
            let (x1, y1) = px(dm.positions[b]);
            writeln!(
                out,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                f(x0),
                f(y0),
                f(x1),
                f(y1)
            )
            .unwrap();
        }
        writeln!(out, "</g>").unwrap();
        writeln!(out, "<g fill=\"#000000\">").unwrap();
        for p in &dm.positions {
            let (x, y) = px(*p);
            writeln!(out, "<circle cx=\"{}\" cy=\"{}\" r=\"3\"/>", f(x), f(y)).unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }

    // Voronoi vertices in red.
    writeln!(out, "<g fill=\"#cc0000\">").unwrap();
    for v in &pd.vertices {
        let (x, y) = px(v.position);
        writeln!(out, "<circle cx=\"{}\" cy=\"{}\" r=\"4\"/>", f(x), f(y)).unwrap();
    }
    writeln!(out, "</g>").unwrap();

    writeln!(out, "</svg>").unwrap();
    out
}
