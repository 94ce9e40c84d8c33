//! Structural verification of the dual mesh: empty circum-ellipses,
//! non-degeneracy, boundary-equals-hull, embeddedness, foldover freedom via
//! discrete one-forms, and the index sum.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dual::{face_area, face_is_convex_cw, DualMesh, TriMesh};
use crate::geometry::{
    convex_hull, dist_point_segment, orient2d, point_in_face, segment_intersection, Containment,
    GeometryError, Point2, Segment2, SegmentIntersection,
};
use crate::metric::{ellipse_contains_with, Ellipse, MetricError, MetricField};

/// Relative guard band around face boundaries for the cover probe.
pub const PROBE_GUARD_REL: f64 = 1e-6;

/// Probe resolution per axis for the single-cover check.
pub const PROBE_N: usize = 64;

/// Minimal face area relative to the domain area.
pub const MIN_FACE_AREA_REL: f64 = 1e-12;

/// Relative genericity threshold for one-form directions.
pub const GENERIC_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("mesh is non-manifold at vertex {0}")]
    NonManifold(usize),
    #[error("no generic direction found after {0} attempts")]
    NoGenericDirection(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Empty circum-ellipse violations: (face, site, Q_c-norm ratio d2/mu2).
#[derive(Debug, Clone, Default)]
pub struct EceReport {
    pub faces_checked: usize,
    pub violations: Vec<(usize, usize, f64)>,
    /// Non-incident sites inside the boundary band: reported, not failed.
    pub marginal: Vec<(usize, usize, f64)>,
    /// Faces checked with a widened band because their witness never
    /// converged; treat their verdicts as low-confidence.
    pub low_confidence: Vec<usize>,
}

/// Every face's canonical witness ellipse (center = Voronoi vertex, shape =
/// the metric there, radius = the common distance) must contain no
/// non-incident site in its interior. `dx` is the label-grid spacing; it
/// widens the band for unrefined witnesses, whose position error is of that
/// order.
pub fn check_ece(field: &MetricField, dm: &DualMesh, dx: f64) -> Result<EceReport, VerifyError> {
    let mut rep = EceReport { faces_checked: dm.faces.len(), ..Default::default() };
    let gamma = field.anisotropy_bound();
    for (fi, face) in dm.faces.iter().enumerate() {
        let q = field.eval(face.center)?;
        let ell = Ellipse { center: face.center, q, radius_sq: face.mu * face.mu };
        let delta = if face.refined {
            crate::metric::ELLIPSE_DELTA_REL
        } else {
            rep.low_confidence.push(fi);
            crate::metric::ELLIPSE_DELTA_REL.max(4.0 * gamma * dx / face.mu.max(dx))
        };
        for (si, s) in dm.positions.iter().enumerate() {
            if face.cycle.contains(&si) {
                continue;
            }
            let d2 = q.quad_form(s.x - face.center.x, s.y - face.center.y);
            match ellipse_contains_with(&ell, *s, delta) {
                Containment::Inside => rep.violations.push((fi, si, d2 / ell.radius_sq)),
                Containment::Boundary => rep.marginal.push((fi, si, d2 / ell.radius_sq)),
                Containment::Outside => {}
            }
        }
    }
    Ok(rep)
}

/// Faces that are too small or not strictly convex.
#[derive(Debug, Clone, Default)]
pub struct DegeneracyReport {
    pub tiny_faces: Vec<(usize, f64)>,
    pub nonconvex_faces: Vec<usize>,
}

pub fn check_nondegenerate(dm: &DualMesh, domain_area: f64) -> DegeneracyReport {
    let mut rep = DegeneracyReport::default();
    let min_area = MIN_FACE_AREA_REL * domain_area;
    for (fi, face) in dm.faces.iter().enumerate() {
        let a = face_area(dm, face);
        if a <= min_area {
            rep.tiny_faces.push((fi, a));
        }
        if !face_is_convex_cw(dm, face) {
            rep.nonconvex_faces.push(fi);
        }
    }
    rep
}

/// Outcome of comparing the boundary edge set against the convex hull chain.
#[derive(Debug, Clone)]
pub struct BoundaryReport {
    /// None when the sites are colinear and there is no polygon boundary.
    pub matches: Option<bool>,
    pub missing_from_boundary: Vec<(usize, usize)>,
    pub extra_in_boundary: Vec<(usize, usize)>,
}

pub fn check_boundary_equals_hull(dm: &DualMesh) -> Result<BoundaryReport, VerifyError> {
    let hull = convex_hull(&dm.positions)?;
    if hull.colinear {
        return Ok(BoundaryReport {
            matches: None,
            missing_from_boundary: Vec::new(),
            extra_in_boundary: Vec::new(),
        });
    }
    let hull_edges = hull.edge_set();
    let mut boundary: Vec<(usize, usize)> = dm.boundary_edges.clone();
    boundary.sort_unstable();
    let missing: Vec<(usize, usize)> = hull_edges
        .iter()
        .filter(|e| boundary.binary_search(e).is_err())
        .copied()
        .collect();
    let extra: Vec<(usize, usize)> = boundary
        .iter()
        .filter(|e| hull_edges.binary_search(e).is_err())
        .copied()
        .collect();
    Ok(BoundaryReport {
        matches: Some(missing.is_empty() && extra.is_empty()),
        missing_from_boundary: missing,
        extra_in_boundary: extra,
    })
}

/// Embedding failures: crossing edge pairs and probe points covered by a
/// face count other than one.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingReport {
    pub crossings: Vec<((usize, usize), (usize, usize))>,
    /// (probe point, number of covering faces).
    pub bad_probes: Vec<(Point2, usize)>,
    pub probes_used: usize,
}

/// Edge-level and cover-level embedding test. Edges may only be disjoint or
/// share a mesh vertex; away from face boundaries (guard band relative to
/// the hull diameter) every interior hull point must lie in exactly one
/// face.
pub fn check_embedding(dm: &DualMesh) -> Result<EmbeddingReport, VerifyError> {
    let mut rep = EmbeddingReport::default();
    let seg = |e: (usize, usize)| Segment2 { a: dm.positions[e.0], b: dm.positions[e.1] };
    for i in 0..dm.edges.len() {
        for j in i + 1..dm.edges.len() {
            let (e, f) = (dm.edges[i], dm.edges[j]);
            if e.0 == f.0 || e.0 == f.1 || e.1 == f.0 || e.1 == f.1 {
                // Sharing a site is fine unless they also overlap.
                if segment_intersection(seg(e), seg(f)) == SegmentIntersection::Overlapping {
                    rep.crossings.push((e, f));
                }
                continue;
            }
            match segment_intersection(seg(e), seg(f)) {
                SegmentIntersection::Disjoint => {}
                _ => rep.crossings.push((e, f)),
            }
        }
    }

    if dm.faces.is_empty() {
        return Ok(rep);
    }
    let hull = convex_hull(&dm.positions)?;
    if hull.colinear {
        return Ok(rep);
    }
    let hull_pts: Vec<Point2> = hull.vertices.iter().map(|&i| dm.positions[i]).collect();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &hull_pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let guard = PROBE_GUARD_REL * ((x1 - x0).hypot(y1 - y0));
    let face_pts: Vec<Vec<Point2>> = dm
        .faces
        .iter()
        .map(|f| f.cycle.iter().map(|&k| dm.positions[k]).collect())
        .collect();
    for jj in 0..PROBE_N {
        for ii in 0..PROBE_N {
            let p = Point2::new(
                x0 + (ii as f64 + 0.5) / PROBE_N as f64 * (x1 - x0),
                y0 + (jj as f64 + 0.5) / PROBE_N as f64 * (y1 - y0),
            );
            if point_in_face(p, &hull_pts)? != Containment::Inside {
                continue;
            }
            // Skip probes near any face edge or the hull boundary.
            let near_hull = (0..hull_pts.len()).any(|k| {
                dist_point_segment(p, hull_pts[k], hull_pts[(k + 1) % hull_pts.len()]) < guard
            });
            if near_hull {
                continue;
            }
            let near_face_edge = face_pts.iter().any(|pts| {
                (0..pts.len())
                    .any(|k| dist_point_segment(p, pts[k], pts[(k + 1) % pts.len()]) < guard)
            });
            if near_face_edge {
                continue;
            }
            rep.probes_used += 1;
            let mut cover = 0usize;
            for pts in &face_pts {
                if point_in_face(p, pts)? == Containment::Inside {
                    cover += 1;
                }
            }
            if cover != 1 {
                rep.bad_probes.push((p, cover));
            }
        }
    }
    Ok(rep)
}

/// Folded interior edges: both incident triangles' opposite vertices lie
/// strictly on the same side of the edge's supporting line.
pub fn detect_foldovers(tm: &TriMesh) -> Vec<(usize, usize)> {
    let mut opposite: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for t in &tm.triangles {
        for k in 0..3 {
            let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            opposite.entry((a.min(b), a.max(b))).or_default().push(c);
        }
    }
    let mut folded = Vec::new();
    for (&(a, b), opp) in &opposite {
        if opp.len() != 2 {
            continue;
        }
        let s0 = orient2d(tm.vertices[a], tm.vertices[b], tm.vertices[opp[0]]);
        let s1 = orient2d(tm.vertices[a], tm.vertices[b], tm.vertices[opp[1]]);
        if s0 != 0 && s0 == s1 {
            folded.push((a, b));
        }
    }
    folded
}

/// The combinatorial star of a mesh vertex: its neighbors in rotation
/// order, and whether the star closes into a cycle (interior vertex).
#[derive(Debug, Clone)]
pub struct VertexStar {
    pub order: Vec<usize>,
    pub closed: bool,
}

/// Combinatorial rotation order of neighbors around each vertex, derived
/// from the triangle corners (not from geometry, so branch points and folds
/// stay visible to the one-form indices).
pub fn vertex_rotations(tm: &TriMesh) -> Result<Vec<VertexStar>, VerifyError> {
    let nv = tm.vertices.len();
    // Corner map at v: neighbor u -> neighbor w when some triangle reads
    // v -> u -> w.
    let mut corner: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); nv];
    for t in &tm.triangles {
        for k in 0..3 {
            let (v, u, w) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            if corner[v].insert(u, w).is_some() {
                return Err(VerifyError::NonManifold(v));
            }
        }
    }
    let mut rotations = Vec::with_capacity(nv);
    for v in 0..nv {
        let c = &corner[v];
        if c.is_empty() {
            rotations.push(VertexStar { order: Vec::new(), closed: false });
            continue;
        }
        // Start at a boundary corner (a key never produced as a value), or
        // anywhere if the star is closed.
        let values: Vec<usize> = c.values().copied().collect();
        let start = c
            .keys()
            .copied()
            .find(|u| !values.contains(u))
            .unwrap_or_else(|| *c.keys().next().unwrap());
        let mut order = vec![start];
        let mut cur = start;
        let mut closed = false;
        while let Some(&next) = c.get(&cur) {
            if next == start {
                closed = true;
                break;
            }
            if order.contains(&next) {
                return Err(VerifyError::NonManifold(v));
            }
            order.push(next);
            cur = next;
        }
        // A connected star visits every distinct neighbor exactly once
        // (corners + 1 on the boundary, corners in a closed cycle).
        let mut neighbors: Vec<usize> = c.keys().chain(c.values()).copied().collect();
        neighbors.sort_unstable();
        neighbors.dedup();
        if order.len() != neighbors.len() {
            return Err(VerifyError::NonManifold(v));
        }
        rotations.push(VertexStar { order, closed });
    }
    Ok(rotations)
}

fn mesh_edges(tm: &TriMesh) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for t in &tm.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            edges.push((a.min(b), a.max(b)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// A seeded unit direction n with |n . e| above the genericity threshold
/// for every mesh edge (fan edges included). Bounded rejection sampling.
pub fn pick_generic_direction(tm: &TriMesh, seed: u64) -> Result<Point2, VerifyError> {
    use rand::Rng;
    use rand::SeedableRng;
    const MAX_TRIES: usize = 64;
    let edges = mesh_edges(tm);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x6f6e65_666f726d);
    for _ in 0..MAX_TRIES {
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let n = Point2::new(theta.cos(), theta.sin());
        let ok = edges.iter().all(|&(a, b)| {
            let e = Point2::new(
                tm.vertices[b].x - tm.vertices[a].x,
                tm.vertices[b].y - tm.vertices[a].y,
            );
            (n.x * e.x + n.y * e.y).abs() > GENERIC_TOL * e.x.hypot(e.y)
        });
        if ok {
            return Ok(n);
        }
    }
    Err(VerifyError::NoGenericDirection(MAX_TRIES))
}

/// The discrete one-form of a generic direction: antisymmetric values on
/// directed edges, xi_ij = n.v_i - n.v_j.
#[derive(Debug, Clone)]
pub struct OneForm {
    pub direction: Point2,
    pub xi: BTreeMap<(usize, usize), f64>,
}

pub fn build_oneform(tm: &TriMesh, n: Point2) -> Result<OneForm, VerifyError> {
    let mut xi = BTreeMap::new();
    for &(a, b) in &mesh_edges(tm) {
        let v = oneform_value(tm, n, a, b);
        if v == 0.0 {
            return Err(VerifyError::NoGenericDirection(0));
        }
        xi.insert((a, b), v);
        xi.insert((b, a), -v);
    }
    Ok(OneForm { direction: n, xi })
}

/// One-form value on the half-edge from `i` to `j`.
pub fn oneform_value(tm: &TriMesh, n: Point2, i: usize, j: usize) -> f64 {
    let (a, b) = (tm.vertices[i], tm.vertices[j]);
    (n.x * a.x + n.y * a.y) - (n.x * b.x + n.y * b.y)
}

fn cyclic_sign_changes(signs: &[bool]) -> usize {
    let n = signs.len();
    (0..n).filter(|&k| signs[k] != signs[(k + 1) % n]).count()
}

/// Per-vertex and per-face one-form indices, index = 1 - sc/2 where sc is
/// the cyclic sign-change count. The outer face is not counted.
#[derive(Debug, Clone)]
pub struct IndexReport {
    pub direction: Point2,
    pub vertex_indices: Vec<i64>,
    pub face_indices: Vec<i64>,
    pub vertex_sc: Vec<usize>,
    pub face_sc: Vec<usize>,
    /// Whether each vertex's star is a closed cycle.
    pub vertex_interior: Vec<bool>,
    pub total: i64,
}

pub fn compute_indices(tm: &TriMesh, form: &OneForm) -> Result<IndexReport, VerifyError> {
    let rotations = vertex_rotations(tm)?;
    let mut vertex_indices = Vec::with_capacity(tm.vertices.len());
    let mut vertex_sc = Vec::with_capacity(tm.vertices.len());
    let mut vertex_interior = Vec::with_capacity(tm.vertices.len());
    for (v, star) in rotations.iter().enumerate() {
        vertex_interior.push(star.closed);
        if star.order.is_empty() {
            vertex_indices.push(0);
            vertex_sc.push(0);
            continue;
        }
        let signs: Vec<bool> = star.order.iter().map(|&u| form.xi[&(v, u)] > 0.0).collect();
        let sc = cyclic_sign_changes(&signs);
        assert!(sc % 2 == 0, "odd sign-change count on a cycle");
        vertex_indices.push(1 - sc as i64 / 2);
        vertex_sc.push(sc);
    }
    let mut face_indices = Vec::with_capacity(tm.triangles.len());
    let mut face_sc = Vec::with_capacity(tm.triangles.len());
    for t in &tm.triangles {
        let signs: Vec<bool> = (0..3)
            .map(|k| form.xi[&(t[k], t[(k + 1) % 3])] > 0.0)
            .collect();
        let sc = cyclic_sign_changes(&signs);
        assert!(sc % 2 == 0, "odd sign-change count on a cycle");
        face_indices.push(1 - sc as i64 / 2);
        face_sc.push(sc);
    }
    let total = vertex_indices.iter().sum::<i64>() + face_indices.iter().sum::<i64>();
    Ok(IndexReport {
        direction: form.direction,
        vertex_indices,
        face_indices,
        vertex_sc,
        face_sc,
        vertex_interior,
        total,
    })
}

/// Index sum over `dirs` seeded generic directions; each must equal 2 on a
/// foldover-free disk mesh.
pub fn check_index_sum(tm: &TriMesh, dirs: usize) -> Result<Vec<IndexReport>, VerifyError> {
    (0..dirs as u64)
        .map(|k| {
            let n = pick_generic_direction(tm, k)?;
            let form = build_oneform(tm, n)?;
            compute_indices(tm, &form)
        })
        .collect()
}
