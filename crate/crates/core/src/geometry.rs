//! Planar predicates and constructions shared by the rest of the crate.
//!
//! Sign decisions (orientation, hull turns, crossing tests) go through
//! adaptive-precision predicates so they never flap near degeneracy.

use thiserror::Error;

/// A point in the plane. Coordinates are finite by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite());
        Point2 { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

/// A segment with distinct endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2 {
    pub a: Point2,
    pub b: Point2,
}

impl Segment2 {
    pub fn new(a: Point2, b: Point2) -> Self {
        debug_assert!(a != b, "degenerate segment");
        Segment2 { a, b }
    }
}

/// Convex hull of a point set, as indices into the input list, in clockwise
/// order. Points strictly interior to a hull segment are not chain vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullChain {
    pub vertices: Vec<usize>,
    /// All input points colinear: the chain degenerates to the two extreme
    /// points and carries no area.
    pub colinear: bool,
}

impl HullChain {
    /// Hull edges as unordered index pairs (lo, hi).
    pub fn edge_set(&self) -> Vec<(usize, usize)> {
        let n = self.vertices.len();
        if n < 2 {
            return Vec::new();
        }
        if n == 2 {
            let (a, b) = (self.vertices[0], self.vertices[1]);
            return vec![(a.min(b), a.max(b))];
        }
        let mut edges: Vec<(usize, usize)> = (0..n)
            .map(|i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        edges
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("convex hull needs at least 2 distinct points, got {0}")]
    TooFewDistinctPoints(usize),
    #[error("point_in_face requires a simple polygon")]
    NonSimplePolygon,
}

/// Sign of the doubled signed area of triangle `abc`: +1 counter-clockwise,
/// -1 clockwise, 0 colinear. Exact via adaptive-precision arithmetic.
pub fn orient2d(a: Point2, b: Point2, c: Point2) -> i32 {
    let det = robust::orient2d(
        robust::Coord { x: a.x, y: a.y },
        robust::Coord { x: b.x, y: b.y },
        robust::Coord { x: c.x, y: c.y },
    );
    if det > 0.0 {
        1
    } else if det < 0.0 {
        -1
    } else {
        0
    }
}

/// Clockwise convex hull by monotone chain. Colinear points interior to a
/// hull edge are dropped; a fully colinear input yields a 2-vertex chain
/// with the `colinear` flag set.
pub fn convex_hull(points: &[Point2]) -> Result<HullChain, GeometryError> {
    // Indices sorted lexicographically, duplicates removed.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i]
            .x
            .partial_cmp(&points[j].x)
            .unwrap()
            .then(points[i].y.partial_cmp(&points[j].y).unwrap())
    });
    order.dedup_by(|&mut i, &mut j| points[i] == points[j]);
    if order.len() < 2 {
        return Err(GeometryError::TooFewDistinctPoints(order.len()));
    }

    // Build upper and lower chains with strict turns only.
    let build = |idx: &[usize], sign: i32| -> Vec<usize> {
        let mut chain: Vec<usize> = Vec::with_capacity(idx.len());
        for &i in idx {
            while chain.len() >= 2 {
                let a = points[chain[chain.len() - 2]];
                let b = points[chain[chain.len() - 1]];
                if orient2d(a, b, points[i]) * sign <= 0 {
                    chain.pop();
                } else {
                    break;
                }
            }
            chain.push(i);
        }
        chain
    };
    let all_colinear = order
        .windows(3)
        .all(|w| orient2d(points[w[0]], points[w[1]], points[w[2]]) == 0);
    if all_colinear {
        // Lexicographic extremes of the supporting line.
        return Ok(HullChain {
            vertices: vec![order[0], order[order.len() - 1]],
            colinear: true,
        });
    }

    // sign = -1 keeps clockwise turns: upper chain left-to-right, then
    // lower chain right-to-left, gives a clockwise cycle.
    let upper = build(&order, -1);
    let rev: Vec<usize> = order.iter().rev().copied().collect();
    let lower = build(&rev, -1);

    let mut vertices = upper;
    vertices.extend_from_slice(&lower[1..lower.len() - 1]);
    Ok(HullChain {
        vertices,
        colinear: false,
    })
}

/// How two segments meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentIntersection {
    Disjoint,
    /// Contact at a shared endpoint and nowhere else.
    SharedEndpointOnly,
    /// A single intersection point that is not a shared endpoint
    /// (includes an endpoint of one segment interior to the other).
    ProperCrossing,
    /// Colinear with a positive-length common piece.
    Overlapping,
}

fn on_segment_colinear(p: Point2, s: Segment2) -> bool {
    // Assumes p colinear with s.
    p.x >= s.a.x.min(s.b.x)
        && p.x <= s.a.x.max(s.b.x)
        && p.y >= s.a.y.min(s.b.y)
        && p.y <= s.a.y.max(s.b.y)
}

/// Exact classification of how segments `s` and `t` intersect.
pub fn segment_intersection(s: Segment2, t: Segment2) -> SegmentIntersection {
    let o1 = orient2d(s.a, s.b, t.a);
    let o2 = orient2d(s.a, s.b, t.b);
    let o3 = orient2d(t.a, t.b, s.a);
    let o4 = orient2d(t.a, t.b, s.b);

    if o1 == 0 && o2 == 0 {
        // Colinear. Measure 1-D overlap along the common line.
        let pts = [t.a, t.b];
        let on: Vec<bool> = pts.iter().map(|&p| on_segment_colinear(p, s)).collect();
        let son: Vec<bool> = [s.a, s.b]
            .iter()
            .map(|&p| on_segment_colinear(p, t))
            .collect();
        if !on[0] && !on[1] && !son[0] && !son[1] {
            return SegmentIntersection::Disjoint;
        }
        // Project on the dominant axis to compare extents.
        let key = |p: Point2| {
            if (s.b.x - s.a.x).abs() >= (s.b.y - s.a.y).abs() {
                p.x
            } else {
                p.y
            }
        };
        let (s0, s1) = (key(s.a).min(key(s.b)), key(s.a).max(key(s.b)));
        let (t0, t1) = (key(t.a).min(key(t.b)), key(t.a).max(key(t.b)));
        let lo = s0.max(t0);
        let hi = s1.min(t1);
        if lo < hi {
            SegmentIntersection::Overlapping
        } else if lo == hi {
            SegmentIntersection::SharedEndpointOnly
        } else {
            SegmentIntersection::Disjoint
        }
    } else {
        let shared = s.a == t.a || s.a == t.b || s.b == t.a || s.b == t.b;
        let straddle = |u: i32, v: i32| (u > 0 && v < 0) || (u < 0 && v > 0);
        let touches = |u: i32, v: i32| u == 0 || v == 0 || straddle(u, v);
        if !(touches(o1, o2) && touches(o3, o4)) {
            return SegmentIntersection::Disjoint;
        }
        if straddle(o1, o2) && straddle(o3, o4) {
            return SegmentIntersection::ProperCrossing;
        }
        // Some endpoint lies on the other segment's line; check it is within
        // the segment's extent.
        let mut contact = false;
        if o1 == 0 && on_segment_colinear(t.a, s) {
            contact = true;
            if t.a != s.a && t.a != s.b {
                return SegmentIntersection::ProperCrossing;
            }
        }
        if o2 == 0 && on_segment_colinear(t.b, s) {
            contact = true;
            if t.b != s.a && t.b != s.b {
                return SegmentIntersection::ProperCrossing;
            }
        }
        if o3 == 0 && on_segment_colinear(s.a, t) {
            contact = true;
            if s.a != t.a && s.a != t.b {
                return SegmentIntersection::ProperCrossing;
            }
        }
        if o4 == 0 && on_segment_colinear(s.b, t) {
            contact = true;
            if s.b != t.a && s.b != t.b {
                return SegmentIntersection::ProperCrossing;
            }
        }
        if contact && shared {
            SegmentIntersection::SharedEndpointOnly
        } else if contact {
            SegmentIntersection::ProperCrossing
        } else {
            SegmentIntersection::Disjoint
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

/// Point-in-polygon classification for a simple polygon given as an ordered
/// vertex list (either orientation).
pub fn point_in_face(p: Point2, face: &[Point2]) -> Result<Containment, GeometryError> {
    if face.len() < 3 {
        return Err(GeometryError::NonSimplePolygon);
    }
    let n = face.len();
    // Boundary first: exact via orientation + extent.
    for i in 0..n {
        let (a, b) = (face[i], face[(i + 1) % n]);
        if a == b {
            return Err(GeometryError::NonSimplePolygon);
        }
        if orient2d(a, b, p) == 0 && on_segment_colinear(p, Segment2 { a, b }) {
            return Ok(Containment::Boundary);
        }
    }
    // Winding by crossing count against the upward ray through p.
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (face[i], face[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let side = orient2d(a, b, p);
            if (b.y > a.y && side > 0) || (b.y < a.y && side < 0) {
                inside = !inside;
            }
        }
    }
    Ok(if inside {
        Containment::Inside
    } else {
        Containment::Outside
    })
}

/// Euclidean distance from `p` to the closed segment `ab`.
pub fn dist_point_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let (ex, ey) = (b.x - a.x, b.y - a.y);
    let len2 = ex * ex + ey * ey;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * ex + (p.y - a.y) * ey) / len2).clamp(0.0, 1.0);
    p.dist(Point2::new(a.x + t * ex, a.y + t * ey))
}

/// Shoelace area: positive for counter-clockwise, negative for clockwise.
pub fn polygon_area_signed(face: &[Point2]) -> f64 {
    let n = face.len();
    let mut s = 0.0;
    for i in 0..n {
        let (a, b) = (face[i], face[(i + 1) % n]);
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn orient2d_basic_signs() {
        assert_eq!(orient2d(p(0., 0.), p(1., 0.), p(0., 1.)), 1);
        assert_eq!(orient2d(p(0., 0.), p(1., 0.), p(2., 0.)), 0);
        assert_eq!(orient2d(p(0., 0.), p(1., 0.), p(0., -1.)), -1);
    }

    #[test]
    fn orient2d_antisymmetric() {
        let (a, b, c) = (p(0.1, 0.7), p(2.3, -0.4), p(1.0, 5.0));
        assert_eq!(orient2d(a, b, c), -orient2d(b, a, c));
        assert_eq!(orient2d(a, b, c), -orient2d(a, c, b));
        assert_eq!(orient2d(a, b, c), -orient2d(c, b, a));
    }

    #[test]
    fn hull_unit_square() {
        let pts = [p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)];
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices.len(), 4);
        assert!(!h.colinear);
        // Clockwise orientation: consecutive turns are all clockwise.
        for i in 0..4 {
            let a = pts[h.vertices[i]];
            let b = pts[h.vertices[(i + 1) % 4]];
            let c = pts[h.vertices[(i + 2) % 4]];
            assert_eq!(orient2d(a, b, c), -1);
        }
    }

    #[test]
    fn hull_excludes_interior_and_edge_midpoints() {
        let pts = [
            p(0., 0.),
            p(1., 0.),
            p(1., 1.),
            p(0., 1.),
            p(0.5, 0.5),
            p(0.5, 0.0), // interior to the bottom edge
        ];
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices.len(), 4);
        assert!(!h.vertices.contains(&4));
        assert!(!h.vertices.contains(&5));
    }

    #[test]
    fn hull_colinear_input() {
        let pts = [p(0., 0.), p(1., 1.), p(2., 2.), p(3., 3.)];
        let h = convex_hull(&pts).unwrap();
        assert!(h.colinear);
        assert_eq!(h.vertices, vec![0, 3]);
    }

    #[test]
    fn hull_rejects_coincident_points() {
        let pts = [p(1., 1.), p(1., 1.), p(1., 1.)];
        assert_eq!(
            convex_hull(&pts),
            Err(GeometryError::TooFewDistinctPoints(1))
        );
    }

    /// O(n^3) oracle: a point is a hull vertex iff some half-plane through
    /// it excludes all other points.
    fn hull_vertices_bruteforce(pts: &[Point2]) -> Vec<usize> {
        let mut out = Vec::new();
        'outer: for i in 0..pts.len() {
            for j in 0..pts.len() {
                if j == i {
                    continue;
                }
                // Line through pts[i] and pts[j]: all others strictly on one side,
                // with pts[i] an endpoint of the hull edge.
                let mut pos = 0usize;
                let mut neg = 0usize;
                let mut on = 0usize;
                for k in 0..pts.len() {
                    if k == i || k == j {
                        continue;
                    }
                    match orient2d(pts[i], pts[j], pts[k]) {
                        1 => pos += 1,
                        -1 => neg += 1,
                        _ => on += 1,
                    }
                }
                if on == 0 && (pos == 0 || neg == 0) {
                    out.push(i);
                    continue 'outer;
                }
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn hull_matches_bruteforce_oracle() {
        // Deterministic pseudo-random points.
        let mut pts = Vec::new();
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..20 {
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64
            };
            let (x, y) = (next(), next());
            pts.push(p(x * 10.0 - 5.0, y * 10.0 - 5.0));
        }
        let h = convex_hull(&pts).unwrap();
        let mut got = h.vertices.clone();
        got.sort_unstable();
        assert_eq!(got, hull_vertices_bruteforce(&pts));
    }

    #[test]
    fn hull_is_input_order_independent() {
        let pts = [p(0., 0.), p(3., 1.), p(1., 4.), p(-2., 2.), p(1., 1.)];
        let h1 = convex_hull(&pts).unwrap();
        let perm = [4usize, 2, 0, 3, 1];
        let pts2: Vec<Point2> = perm.iter().map(|&i| pts[i]).collect();
        let h2 = convex_hull(&pts2).unwrap();
        let set1: std::collections::BTreeSet<_> = h1.vertices.iter().copied().collect();
        let set2: std::collections::BTreeSet<_> = h2.vertices.iter().map(|&i| perm[i]).collect();
        assert_eq!(set1, set2);
    }

    #[test]
    fn segment_classification() {
        let seg = |ax, ay, bx, by| Segment2::new(p(ax, ay), p(bx, by));
        assert_eq!(
            segment_intersection(seg(0., 0., 1., 1.), seg(0., 1., 1., 0.)),
            SegmentIntersection::ProperCrossing
        );
        assert_eq!(
            segment_intersection(seg(0., 0., 1., 0.), seg(1., 0., 2., 0.)),
            SegmentIntersection::SharedEndpointOnly
        );
        assert_eq!(
            segment_intersection(seg(0., 0., 2., 0.), seg(1., 0., 3., 0.)),
            SegmentIntersection::Overlapping
        );
        assert_eq!(
            segment_intersection(seg(0., 0., 1., 0.), seg(0., 1., 1., 1.)),
            SegmentIntersection::Disjoint
        );
        // Endpoint of one interior to the other: not a clean contact.
        assert_eq!(
            segment_intersection(seg(0., 0., 2., 0.), seg(1., 0., 1., 1.)),
            SegmentIntersection::ProperCrossing
        );
        // Shared endpoint, colinear, no interior overlap.
        assert_eq!(
            segment_intersection(seg(0., 0., 1., 1.), seg(1., 1., 2., 2.)),
            SegmentIntersection::SharedEndpointOnly
        );
    }

    #[test]
    fn segment_intersection_symmetric() {
        let cases = [
            (Segment2::new(p(0., 0.), p(1., 1.)), Segment2::new(p(0., 1.), p(1., 0.))),
            (Segment2::new(p(0., 0.), p(1., 0.)), Segment2::new(p(1., 0.), p(2., 0.))),
            (Segment2::new(p(0., 0.), p(2., 0.)), Segment2::new(p(1., 0.), p(3., 0.))),
            (Segment2::new(p(0., 0.), p(1., 0.)), Segment2::new(p(5., 5.), p(6., 6.))),
        ];
        for (s, t) in cases {
            assert_eq!(segment_intersection(s, t), segment_intersection(t, s));
        }
    }

    #[test]
    fn point_in_face_triangle() {
        let tri = [p(0., 0.), p(1., 0.), p(0., 1.)];
        assert_eq!(
            point_in_face(p(1. / 3., 1. / 3.), &tri).unwrap(),
            Containment::Inside
        );
        assert_eq!(point_in_face(p(0.5, 0.), &tri).unwrap(), Containment::Boundary);
        assert_eq!(point_in_face(p(5., 5.), &tri).unwrap(), Containment::Outside);
    }
}
