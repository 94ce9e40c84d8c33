//! The straight-edge dual of the primal diagram: one mesh vertex per site,
//! one edge per nonempty pairwise interface, one convex face per Voronoi
//! vertex, plus fan triangulation and the text dump format.

use std::fmt::Write as _;

use crate::geometry::{orient2d, polygon_area_signed, Point2};
use crate::primal::PrimalDiagram;
use crate::sites::SiteSet;

/// Issues collected while building the dual. Any of these means the
/// orphan-freedom premise did not deliver a clean mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DualIssue {
    /// A pairwise interface split into several components: the dual pair
    /// would need a multi-edge.
    MultiComponentInterface { pair: (usize, usize), components: usize },
    /// Two Voronoi vertices share an identical incident-site set.
    DuplicateFaceSites { faces: (usize, usize) },
    /// Newton did not converge for this face's Voronoi vertex.
    UnrefinedVertex { face: usize },
}

impl std::fmt::Display for DualIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DualIssue::MultiComponentInterface { pair, components } => write!(
                f,
                "interface ({}, {}) has {} components",
                pair.0, pair.1, components
            ),
            DualIssue::DuplicateFaceSites { faces } => {
                write!(f, "faces {} and {} share one site set", faces.0, faces.1)
            }
            DualIssue::UnrefinedVertex { face } => {
                write!(f, "vertex of face {} did not converge", face)
            }
        }
    }
}

/// A dual face: the incident sites of one Voronoi vertex, ordered clockwise
/// around it, starting from the lowest site index.
#[derive(Debug, Clone)]
pub struct DualFace {
    pub cycle: Vec<usize>,
    /// The generating Voronoi vertex.
    pub center: Point2,
    pub mu: f64,
    /// Whether the witness vertex converged during refinement.
    pub refined: bool,
}

/// The dual polygonal mesh. Vertex `k` is site `k`.
#[derive(Debug, Clone)]
pub struct DualMesh {
    pub positions: Vec<Point2>,
    /// Unordered pairs (a < b), ascending.
    pub edges: Vec<(usize, usize)>,
    /// Edges whose primal interface reaches the domain border.
    pub boundary_edges: Vec<(usize, usize)>,
    pub faces: Vec<DualFace>,
    pub issues: Vec<DualIssue>,
}

impl DualMesh {
    /// V - E + F; equals 1 for a disk-topology complex (outer face not
    /// counted).
    pub fn euler_characteristic(&self) -> isize {
        self.positions.len() as isize - self.edges.len() as isize + self.faces.len() as isize
    }
}

/// Sort `cycle` clockwise by angle around `center`, then rotate so the
/// lowest index comes first. Deterministic for distinct positions.
pub fn order_face_cycle(positions: &[Point2], cycle: &[usize], center: Point2) -> Vec<usize> {
    let mut out = cycle.to_vec();
    out.sort_by(|&a, &b| {
        let pa = positions[a];
        let pb = positions[b];
        let ta = (pa.y - center.y).atan2(pa.x - center.x);
        let tb = (pb.y - center.y).atan2(pb.x - center.x);
        tb.total_cmp(&ta).then(a.cmp(&b))
    });
    let k = out
        .iter()
        .enumerate()
        .min_by_key(|&(_, &s)| s)
        .map(|(i, _)| i)
        .unwrap_or(0);
    out.rotate_left(k);
    out
}

/// Triangulate a convex face as a fan from its lowest-index corner, which
/// `order_face_cycle` puts first. Orientation follows the cycle.
pub fn fan_triangulate(cycle: &[usize]) -> Vec<[usize; 3]> {
    assert!(cycle.len() >= 3);
    (1..cycle.len() - 1)
        .map(|i| [cycle[0], cycle[i], cycle[i + 1]])
        .collect()
}

/// Build the dual mesh of an extracted (and vertex-refined) primal diagram.
/// Structural anomalies are collected in `issues` rather than failing the
/// build, so callers can report exactly which premise broke.
pub fn build_dual(pd: &PrimalDiagram, sites: &SiteSet) -> DualMesh {
    let mut issues = Vec::new();
    let mut edges = Vec::new();
    let mut boundary_edges = Vec::new();
    for (&(a, b), e) in &pd.edges {
        let (a, b) = (a as usize, b as usize);
        edges.push((a, b));
        if e.components.len() != 1 {
            issues.push(DualIssue::MultiComponentInterface {
                pair: (a, b),
                components: e.components.len(),
            });
        }
        if e.unbounded {
            boundary_edges.push((a, b));
        }
    }

    let mut faces = Vec::with_capacity(pd.vertices.len());
    for (fi, v) in pd.vertices.iter().enumerate() {
        if !v.refined {
            issues.push(DualIssue::UnrefinedVertex { face: fi });
        }
        let cycle0: Vec<usize> = v.incident_sites.iter().map(|&k| k as usize).collect();
        let cycle = order_face_cycle(&sites.sites, &cycle0, v.position);
        faces.push(DualFace {
            cycle,
            center: v.position,
            mu: v.mu,
            refined: v.refined,
        });
    }
    for i in 0..faces.len() {
        for j in i + 1..faces.len() {
            let mut a = faces[i].cycle.clone();
            let mut b = faces[j].cycle.clone();
            a.sort_unstable();
            b.sort_unstable();
            if a == b {
                issues.push(DualIssue::DuplicateFaceSites { faces: (i, j) });
            }
        }
    }

    DualMesh {
        positions: sites.sites.clone(),
        edges,
        boundary_edges,
        faces,
        issues,
    }
}

/// The dual of fully colinear sites: a path joining consecutive sites along
/// the supporting line, independent of the metric.
pub fn colinear_chain(positions: &[Point2]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&i, &j| {
        positions[i]
            .x
            .total_cmp(&positions[j].x)
            .then(positions[i].y.total_cmp(&positions[j].y))
    });
    order
        .windows(2)
        .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
        .collect()
}

/// A triangulated dual mesh ready for the text dump and the one-form
/// machinery.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<(usize, usize)>,
}

/// Fan-triangulate every face of the dual.
pub fn build_trimesh(dm: &DualMesh) -> TriMesh {
    let mut triangles = Vec::new();
    for face in &dm.faces {
        triangles.extend(fan_triangulate(&face.cycle));
    }
    TriMesh {
        vertices: dm.positions.clone(),
        triangles,
        boundary: dm.boundary_edges.clone(),
    }
}

/// 12 significant digits, locale-free; shared by every text artifact.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{:.11e}", x);
    // Normalize "1.50000000000e2" style into plain decimal where short.
    match s.parse::<f64>() {
        Ok(v) => {
            let plain = format!("{}", v);
            if plain.parse::<f64>() == Ok(v) {
                plain
            } else {
                s
            }
        }
        Err(_) => s,
    }
}

impl TriMesh {
    /// Text dump: `v x y` per vertex, `f i j k` per triangle, `b i j` per
    /// boundary edge; indices 1-based.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            writeln!(out, "v {} {}", sig12(v.x), sig12(v.y)).unwrap();
        }
        for t in &self.triangles {
            writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
        }
        for &(a, b) in &self.boundary {
            writeln!(out, "b {} {}", a + 1, b + 1).unwrap();
        }
        out
    }
}

/// |area| of a dual face given its cycle.
pub fn face_area(dm: &DualMesh, face: &DualFace) -> f64 {
    let pts: Vec<Point2> = face.cycle.iter().map(|&k| dm.positions[k]).collect();
    polygon_area_signed(&pts).abs()
}

/// True iff the face cycle is strictly convex and clockwise.
pub fn face_is_convex_cw(dm: &DualMesh, face: &DualFace) -> bool {
    let n = face.cycle.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|i| {
        let a = dm.positions[face.cycle[i]];
        let b = dm.positions[face.cycle[(i + 1) % n]];
        let c = dm.positions[face.cycle[(i + 2) % n]];
        orient2d(a, b, c) < 0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, Rect};
    use crate::metric::{MetricField, Spd2};
    use crate::primal::{compute_labels_bruteforce, extract_primal, refine_vertices};

    fn run_primal(
        field: &MetricField,
        sites: &SiteSet,
        grid: GridSpec,
    ) -> crate::primal::PrimalDiagram {
        let lg = compute_labels_bruteforce(field, sites, grid).unwrap();
        let mut pd = extract_primal(&lg);
        refine_vertices(&mut pd, field, sites).unwrap();
        pd
    }

    #[test]
    fn triangle_dual() {
        let rect = Rect::new(-2.0, -2.0, 3.0, 3.0);
        let field = MetricField::sample(5, 5, rect, |_| Spd2::identity());
        let sites = SiteSet::explicit(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let pd = run_primal(&field, &sites, GridSpec::new(100, 100, rect));
        let dm = build_dual(&pd, &sites);
        assert!(dm.issues.is_empty());
        assert_eq!(dm.edges, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(dm.boundary_edges.len(), 3);
        assert_eq!(dm.faces.len(), 1);
        assert_eq!(dm.euler_characteristic(), 1);
        let f = &dm.faces[0];
        assert_eq!(f.cycle[0], 0);
        assert!(face_is_convex_cw(&dm, f));
        assert!((face_area(&dm, f) - 0.5).abs() < 1e-12);
        let tm = build_trimesh(&dm);
        assert_eq!(tm.triangles.len(), 1);
    }

    #[test]
    fn square_corner_quad_face() {
        let rect = Rect::new(-1.0, -1.0, 2.0, 2.0);
        let field = MetricField::sample(5, 5, rect, |_| Spd2::identity());
        let sites = SiteSet::explicit(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let pd = run_primal(&field, &sites, GridSpec::new(101, 101, rect));
        let dm = build_dual(&pd, &sites);
        // Cocircular sites: the exact diagram has one degree-4 vertex, but
        // grid extraction may split it into two degree-3 vertices. Either
        // way the faces tile the unit quad around (0.5, 0.5).
        assert!(dm.faces.len() == 1 || dm.faces.len() == 2, "{}", dm.faces.len());
        for f in &dm.faces {
            assert!(face_is_convex_cw(&dm, f));
            assert!(f.center.dist(Point2::new(0.5, 0.5)) < 1e-8);
        }
        let tm = build_trimesh(&dm);
        assert_eq!(tm.triangles.len(), 2);
        let area: f64 = tm
            .triangles
            .iter()
            .map(|t| {
                polygon_area_signed(&[tm.vertices[t[0]], tm.vertices[t[1]], tm.vertices[t[2]]])
                    .abs()
            })
            .sum();
        assert!((area - 1.0).abs() < 1e-12);
        assert_eq!(dm.euler_characteristic(), 1);
    }

    #[test]
    fn order_face_cycle_is_clockwise_and_starts_low() {
        let center = Point2::new(0.3, -0.2);
        // Points in scrambled order around the center.
        let pts = vec![
            Point2::new(1.3, -0.2),  // angle 0
            Point2::new(0.3, 0.8),   // angle 90
            Point2::new(-0.7, -0.2), // angle 180
            Point2::new(0.3, -1.2),  // angle -90
            Point2::new(1.0, 0.5),   // angle 45
        ];
        let cyc = order_face_cycle(&pts, &[2, 0, 4, 1, 3], center);
        assert_eq!(cyc[0], 0);
        // Clockwise: every consecutive triple turns right.
        let n = cyc.len();
        for i in 0..n {
            let a = pts[cyc[i]];
            let b = pts[cyc[(i + 1) % n]];
            let c = pts[cyc[(i + 2) % n]];
            assert!(orient2d(a, b, c) < 0, "not clockwise at {}", i);
        }
        assert_eq!(cyc, vec![0, 3, 2, 1, 4]);
    }

    #[test]
    fn fan_area_matches_shoelace_on_pentagon() {
        let pts: Vec<Point2> = (0..5)
            .map(|k| {
                let t = -2.0 * std::f64::consts::PI * k as f64 / 5.0;
                Point2::new(2.0 * t.cos(), 2.0 * t.sin())
            })
            .collect();
        let cycle: Vec<usize> = (0..5).collect();
        let total: f64 = fan_triangulate(&cycle)
            .iter()
            .map(|t| polygon_area_signed(&[pts[t[0]], pts[t[1]], pts[t[2]]]).abs())
            .sum();
        let shoelace = polygon_area_signed(&pts).abs();
        assert!((total - shoelace).abs() < 1e-12);
    }

    #[test]
    fn colinear_chain_orders_along_line() {
        let pts = vec![
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
        ];
        assert_eq!(colinear_chain(&pts), vec![(1, 2), (0, 2)]);
        // Vertical line: falls back to y order.
        let pts = vec![
            Point2::new(0.0, 3.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.0, 2.0),
        ];
        assert_eq!(colinear_chain(&pts), vec![(1, 2), (0, 2)]);
    }

    #[test]
    fn multi_component_interface_is_an_issue() {
        let rect = Rect::new(0.0, 0.0, 2.0, 1.0);
        let field = MetricField::sample(5, 5, rect, |_| Spd2::identity());
        let sites =
            SiteSet::explicit(vec![Point2::new(0.5, 0.5), Point2::new(1.5, 0.5)]).unwrap();
        let grid = GridSpec::new(64, 32, rect);
        let lg = compute_labels_bruteforce(&field, &sites, grid).unwrap();
        let mut lg = lg;
        // Inject a detached sliver of label 1 inside region 0.
        let (ci, cj) = grid.cell_of(Point2::new(0.2, 0.5));
        lg.label[grid.index(ci, cj)] = 1;
        let pd = extract_primal(&lg);
        let dm = build_dual(&pd, &sites);
        assert!(dm
            .issues
            .iter()
            .any(|i| matches!(i, DualIssue::MultiComponentInterface { pair: (0, 1), .. })));
    }

    #[test]
    fn mesh_dump_format() {
        let tm = TriMesh {
            vertices: vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 0.5),
            ],
            triangles: vec![[0, 1, 2]],
            boundary: vec![(0, 1), (0, 2), (1, 2)],
        };
        assert_eq!(
            tm.to_text(),
            "v 0 0\nv 1 0\nv 0 0.5\nf 1 2 3\nb 1 2\nb 1 3\nb 2 3\n"
        );
    }

    #[test]
    fn sig12_roundtrip() {
        for &x in &[0.0, 1.0, -2.5, 1.0 / 3.0, 1e-17, 123456.789012345] {
            let s = sig12(x);
            let back: f64 = s.parse().unwrap();
            assert!((back - x).abs() <= 1e-11 * x.abs().max(1e-300), "{} -> {}", x, s);
        }
    }
}
