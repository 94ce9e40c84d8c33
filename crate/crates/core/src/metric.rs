//! The metric field Q, the site-to-point distance, matrix square roots,
//! anisotropy bounds, and metric ellipses.
//!
//! Whatever their analytic origin, metrics are sampled onto a node grid and
//! bilinearly interpolated, so every consumer sees the same continuous field.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{Containment, Point2};
use crate::grid::Rect;

/// Symmetric positive definite 2x2 tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spd2 {
    pub q11: f64,
    pub q12: f64,
    pub q22: f64,
}

impl Spd2 {
    pub fn new(q11: f64, q12: f64, q22: f64) -> Self {
        let q = Spd2 { q11, q12, q22 };
        assert!(q.is_spd(), "tensor is not SPD: {:?}", q);
        q
    }

    pub fn identity() -> Self {
        Spd2 { q11: 1.0, q12: 0.0, q22: 1.0 }
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Spd2::new(a, 0.0, b)
    }

    /// diag(a, b) rotated so the `a` axis points along angle `theta`.
    pub fn rotated_diag(a: f64, b: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Spd2::new(
            a * c * c + b * s * s,
            (a - b) * s * c,
            a * s * s + b * c * c,
        )
    }

    pub fn is_spd(&self) -> bool {
        self.q11.is_finite()
            && self.q12.is_finite()
            && self.q22.is_finite()
            && self.q11 > 0.0
            && self.det() > 0.0
    }

    pub fn det(&self) -> f64 {
        self.q11 * self.q22 - self.q12 * self.q12
    }

    /// d^t Q d for displacement d.
    pub fn quad_form(&self, dx: f64, dy: f64) -> f64 {
        self.q11 * dx * dx + 2.0 * self.q12 * dx * dy + self.q22 * dy * dy
    }

    /// Eigenvalues (lambda1, lambda2) with lambda2 >= lambda1 > 0, closed form.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_tr = 0.5 * (self.q11 + self.q22);
        let disc = (0.5 * (self.q11 - self.q22)).hypot(self.q12);
        (half_tr - disc, half_tr + disc)
    }

    /// Unit eigenvector for the larger eigenvalue.
    fn major_axis(&self) -> (f64, f64) {
        let (_, l2) = self.eigenvalues();
        // Two candidate expressions; take the numerically larger one.
        let (ax, ay) = (l2 - self.q22, self.q12);
        let (bx, by) = (self.q12, l2 - self.q11);
        let (vx, vy) = if ax.hypot(ay) >= bx.hypot(by) { (ax, ay) } else { (bx, by) };
        let n = vx.hypot(vy);
        if n == 0.0 {
            (1.0, 0.0) // isotropic: any direction
        } else {
            (vx / n, vy / n)
        }
    }

    fn lerp(a: Spd2, b: Spd2, t: f64) -> Spd2 {
        // Convex combinations of SPD tensors stay SPD.
        Spd2 {
            q11: a.q11 + t * (b.q11 - a.q11),
            q12: a.q12 + t * (b.q12 - a.q12),
            q22: a.q22 + t * (b.q22 - a.q22),
        }
    }
}

/// Symmetric square roots of a tensor: `m` squares back to Q, `mprime`
/// squares back to Q / lambda1 and has eigenvalues in [1, gamma].
#[derive(Debug, Clone, Copy)]
pub struct SqrtPair {
    pub m: [f64; 3],      // (m11, m12, m22)
    pub mprime: [f64; 3], // (m11, m12, m22)
    pub lambda1: f64,
    pub lambda2: f64,
}

impl SqrtPair {
    pub fn apply_mprime(&self, p: Point2) -> Point2 {
        Point2::new(
            self.mprime[0] * p.x + self.mprime[1] * p.y,
            self.mprime[1] * p.x + self.mprime[2] * p.y,
        )
    }

    pub fn apply_mprime_inv(&self, p: Point2) -> Point2 {
        let [a, b, c] = self.mprime;
        let det = a * c - b * b;
        Point2::new((c * p.x - b * p.y) / det, (-b * p.x + a * p.y) / det)
    }
}

/// Unique symmetric positive definite square roots of Q, via the closed-form
/// 2x2 eigendecomposition.
pub fn sqrt_pair(q: Spd2) -> SqrtPair {
    let (l1, l2) = q.eigenvalues();
    let (ux, uy) = q.major_axis();
    // M = sqrt(l2) u u^t + sqrt(l1) (I - u u^t); M' uses (sqrt(l2/l1), 1).
    let build = |s2: f64, s1: f64| {
        [
            s2 * ux * ux + s1 * uy * uy,
            (s2 - s1) * ux * uy,
            s2 * uy * uy + s1 * ux * ux,
        ]
    };
    SqrtPair {
        m: build(l2.sqrt(), l1.sqrt()),
        mprime: build((l2 / l1).sqrt(), 1.0),
        lambda1: l1,
        lambda2: l2,
    }
}

/// Open metric ellipse: points p with (p-c)^t Q_c (p-c) < radius_sq.
#[derive(Debug, Clone, Copy)]
pub struct Ellipse {
    pub center: Point2,
    pub q: Spd2,
    pub radius_sq: f64,
}

/// Relative tolerance of the ellipse boundary band.
pub const ELLIPSE_DELTA_REL: f64 = 1e-6;

/// Classify `p` against the ellipse with a relative boundary band.
pub fn ellipse_contains(e: &Ellipse, p: Point2) -> Containment {
    ellipse_contains_with(e, p, ELLIPSE_DELTA_REL)
}

pub fn ellipse_contains_with(e: &Ellipse, p: Point2, delta_rel: f64) -> Containment {
    let v = e.q.quad_form(p.x - e.center.x, p.y - e.center.y);
    if v < e.radius_sq * (1.0 - delta_rel) {
        Containment::Inside
    } else if v > e.radius_sq * (1.0 + delta_rel) {
        Containment::Outside
    } else {
        Containment::Boundary
    }
}

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("point ({0}, {1}) outside metric domain")]
    OutOfDomain(f64, f64),
    #[error("bad metric spec '{0}': {1}")]
    BadSpec(String, String),
    #[error("bad metric grid file: {0}")]
    BadFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Closed-form metrics that can be sampled onto a field grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinMetric {
    Identity,
    Diag { a: f64, b: f64 },
    /// Principal axis of diag(4, 1) rotated by `strength * (x + y)`.
    Swirl { strength: f64 },
    /// Eigenvalues varying sinusoidally between 1 and 1 + amp.
    Sine { amp: f64, freq: f64 },
    /// Identity with the y-eigenvalue pinched down to `delta` inside a
    /// smooth bump of radius `r` around (cx, cy). Localized perturbations
    /// of this kind can create orphans.
    Pinch { cx: f64, cy: f64, r: f64, delta: f64 },
}

impl BuiltinMetric {
    pub fn parse(spec: &str) -> Result<Self, MetricError> {
        let bad = |msg: &str| MetricError::BadSpec(spec.to_string(), msg.to_string());
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n, a),
            None => (spec, ""),
        };
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| bad(&e.to_string()))?
        };
        match (name, nums.as_slice()) {
            ("identity", []) => Ok(BuiltinMetric::Identity),
            ("diag", [a, b]) if *a > 0.0 && *b > 0.0 => Ok(BuiltinMetric::Diag { a: *a, b: *b }),
            ("swirl", [s]) => Ok(BuiltinMetric::Swirl { strength: *s }),
            ("sine", [amp, freq]) if *amp >= 0.0 => Ok(BuiltinMetric::Sine { amp: *amp, freq: *freq }),
            ("pinch", [cx, cy, r, d]) if *r > 0.0 && *d > 0.0 && *d <= 1.0 => {
                Ok(BuiltinMetric::Pinch { cx: *cx, cy: *cy, r: *r, delta: *d })
            }
            _ => Err(bad("unknown metric name or wrong parameters")),
        }
    }

    pub fn eval(&self, p: Point2) -> Spd2 {
        match *self {
            BuiltinMetric::Identity => Spd2::identity(),
            BuiltinMetric::Diag { a, b } => Spd2::diag(a, b),
            BuiltinMetric::Swirl { strength } => {
                Spd2::rotated_diag(4.0, 1.0, strength * (p.x + p.y))
            }
            BuiltinMetric::Sine { amp, freq } => Spd2::diag(
                1.0 + 0.5 * amp * (1.0 + (freq * p.x).sin()),
                1.0 + 0.5 * amp * (1.0 + (freq * p.y).sin()),
            ),
            BuiltinMetric::Pinch { cx, cy, r, delta } => {
                let t = ((p.x - cx).hypot(p.y - cy) / r).min(1.0);
                let s = t * t * (3.0 - 2.0 * t); // smoothstep, 0 at center
                Spd2::diag(1.0, delta + (1.0 - delta) * s)
            }
        }
    }
}

/// The metric field: SPD tensors on an `nx x ny` node lattice over a
/// rectangle, bilinearly interpolated in between. Immutable once built.
#[derive(Debug, Clone)]
pub struct MetricField {
    nx: usize,
    ny: usize,
    rect: Rect,
    nodes: Vec<Spd2>,
}

impl MetricField {
    pub fn from_nodes(nx: usize, ny: usize, rect: Rect, nodes: Vec<Spd2>) -> Self {
        assert!(nx >= 2 && ny >= 2);
        assert_eq!(nodes.len(), nx * ny);
        MetricField { nx, ny, rect, nodes }
    }

    /// Sample an analytic tensor function on the node lattice.
    pub fn sample(nx: usize, ny: usize, rect: Rect, f: impl Fn(Point2) -> Spd2) -> Self {
        let mut nodes = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                nodes.push(f(Self::node_pos_of(nx, ny, rect, i, j)));
            }
        }
        MetricField::from_nodes(nx, ny, rect, nodes)
    }

    pub fn sample_builtin(builtin: BuiltinMetric, nx: usize, ny: usize, rect: Rect) -> Self {
        Self::sample(nx, ny, rect, |p| builtin.eval(p))
    }

    pub fn rect(&self) -> Rect {
        self.rect
    }

    pub fn node_counts(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    fn node_pos_of(nx: usize, ny: usize, rect: Rect, i: usize, j: usize) -> Point2 {
        Point2::new(
            rect.x0 + rect.width() * i as f64 / (nx - 1) as f64,
            rect.y0 + rect.height() * j as f64 / (ny - 1) as f64,
        )
    }

    pub fn node_pos(&self, i: usize, j: usize) -> Point2 {
        Self::node_pos_of(self.nx, self.ny, self.rect, i, j)
    }

    pub fn node(&self, i: usize, j: usize) -> Spd2 {
        self.nodes[j * self.nx + i]
    }

    /// Bilinear interpolation of the node tensors; exact at nodes.
    pub fn eval(&self, p: Point2) -> Result<Spd2, MetricError> {
        if !self.rect.contains(p) {
            return Err(MetricError::OutOfDomain(p.x, p.y));
        }
        let fx = (p.x - self.rect.x0) / self.rect.width() * (self.nx - 1) as f64;
        let fy = (p.y - self.rect.y0) / self.rect.height() * (self.ny - 1) as f64;
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let bottom = Spd2::lerp(self.node(i, j), self.node(i + 1, j), tx);
        let top = Spd2::lerp(self.node(i, j + 1), self.node(i + 1, j + 1), tx);
        Ok(Spd2::lerp(bottom, top, ty))
    }

    /// D(v, p) = [(p - v)^t Q_p (p - v)]^{1/2}. The form is taken at the
    /// query point p, not the site: D is asymmetric.
    pub fn distance(&self, v: Point2, p: Point2) -> Result<f64, MetricError> {
        Ok(self.distance_sq(v, p)?.sqrt())
    }

    pub fn distance_sq(&self, v: Point2, p: Point2) -> Result<f64, MetricError> {
        let q = self.eval(p)?;
        Ok(q.quad_form(p.x - v.x, p.y - v.y))
    }

    /// Nodal anisotropy bound: max over nodes of sqrt(lambda2/lambda1),
    /// padded by a 1 + 1e-9 safety factor. Interpolated interior ratios can
    /// exceed this slightly; reports label it the nodal bound.
    pub fn anisotropy_bound(&self) -> f64 {
        let mut worst: f64 = 1.0;
        for q in &self.nodes {
            let (l1, l2) = q.eigenvalues();
            worst = worst.max(l2 / l1);
        }
        worst.sqrt() * (1.0 + 1e-9)
    }

    /// Blend toward the identity outside the origin-centered ball of radius
    /// `rho`, with the default unit-width ramp.
    pub fn blend_to_identity(&self, rho: f64) -> MetricField {
        self.blend_to_identity_with_ramp(rho, rho + 1.0)
    }

    /// Blend with an explicit ramp end (`ramp_end = 2 * rho` reproduces the
    /// proportional ramp). Q' = Q (1 - w) + I w, with w ramping 0 -> 1 over
    /// [rho, ramp_end] on the node norm.
    pub fn blend_to_identity_with_ramp(&self, rho: f64, ramp_end: f64) -> MetricField {
        assert!(rho > 0.0 && ramp_end > rho);
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                let p = self.node_pos(i, j);
                let norm = p.x.hypot(p.y);
                let w = ((norm - rho) / (ramp_end - rho)).clamp(0.0, 1.0);
                nodes.push(Spd2::lerp(self.node(i, j), Spd2::identity(), w));
            }
        }
        MetricField::from_nodes(self.nx, self.ny, self.rect, nodes)
    }

    /// Plain-text grid format: header "nx ny x0 y0 x1 y1", then one
    /// "q11 q12 q22" line per node, row-major.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{} {} {} {} {} {}",
            self.nx, self.ny, self.rect.x0, self.rect.y0, self.rect.x1, self.rect.y1
        )
        .unwrap();
        for q in &self.nodes {
            writeln!(out, "{} {} {}", q.q11, q.q12, q.q22).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<MetricField, MetricError> {
        let bad = |msg: &str| MetricError::BadFile(msg.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("missing header"))?;
        let h: Vec<f64> = header
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(&e.to_string()))?;
        if h.len() != 6 {
            return Err(bad("header must be 'nx ny x0 y0 x1 y1'"));
        }
        let (nx, ny) = (h[0] as usize, h[1] as usize);
        if nx < 2 || ny < 2 {
            return Err(bad("grid must be at least 2x2"));
        }
        let rect = Rect::new(h[2], h[3], h[4], h[5]);
        let mut nodes = Vec::with_capacity(nx * ny);
        for line in lines {
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| bad(&e.to_string()))?;
            if v.len() != 3 {
                return Err(bad("node lines must be 'q11 q12 q22'"));
            }
            let q = Spd2 { q11: v[0], q12: v[1], q22: v[2] };
            if !q.is_spd() {
                return Err(bad(&format!("node {} is not SPD", nodes.len())));
            }
            nodes.push(q);
        }
        if nodes.len() != nx * ny {
            return Err(bad(&format!(
                "expected {} nodes, found {}",
                nx * ny,
                nodes.len()
            )));
        }
        Ok(MetricField::from_nodes(nx, ny, rect, nodes))
    }

    pub fn load(path: &std::path::Path) -> Result<MetricField, MetricError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_rect() -> Rect {
        Rect::new(0.0, 0.0, 1.0, 1.0)
    }

    fn seeded_spd(k: u64) -> Spd2 {
        // Deterministic SPD tensor from an integer key.
        let mut s = k.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let a = 0.5 + 4.0 * next();
        let b = 0.5 + 4.0 * next();
        let theta = std::f64::consts::TAU * next();
        Spd2::rotated_diag(a.max(b), a.min(b), theta)
    }

    #[test]
    fn eval_constant_identity() {
        let f = MetricField::sample(5, 5, unit_rect(), |_| Spd2::identity());
        let q = f.eval(Point2::new(0.37, 0.81)).unwrap();
        assert_eq!(q, Spd2::identity());
    }

    #[test]
    fn eval_linear_interpolation_midpoint() {
        // Identity on the left column, diag(4,1) on the right column.
        let f = MetricField::sample(2, 2, unit_rect(), |p| {
            if p.x < 0.5 { Spd2::identity() } else { Spd2::diag(4.0, 1.0) }
        });
        let q = f.eval(Point2::new(0.5, 0.25)).unwrap();
        assert!((q.q11 - 2.5).abs() < 1e-12);
        assert!((q.q22 - 1.0).abs() < 1e-12);
        assert_eq!(q.q12, 0.0);
    }

    #[test]
    fn eval_cell_center_is_mean_of_corners() {
        let f = MetricField::sample(4, 4, unit_rect(), |p| {
            seeded_spd((p.x * 1000.0) as u64 ^ ((p.y * 1000.0) as u64) << 17)
        });
        // Center of the node cell with corners (1,1),(2,1),(1,2),(2,2).
        let c = Point2::new(
            0.5 * (f.node_pos(1, 1).x + f.node_pos(2, 1).x),
            0.5 * (f.node_pos(1, 1).y + f.node_pos(1, 2).y),
        );
        let q = f.eval(c).unwrap();
        let mean = |g: fn(&Spd2) -> f64| {
            (g(&f.node(1, 1)) + g(&f.node(2, 1)) + g(&f.node(1, 2)) + g(&f.node(2, 2))) / 4.0
        };
        assert!((q.q11 - mean(|q| q.q11)).abs() < 1e-12);
        assert!((q.q12 - mean(|q| q.q12)).abs() < 1e-12);
        assert!((q.q22 - mean(|q| q.q22)).abs() < 1e-12);
    }

    #[test]
    fn eval_outside_domain_errors() {
        let f = MetricField::sample(3, 3, unit_rect(), |_| Spd2::identity());
        assert!(f.eval(Point2::new(1.5, 0.5)).is_err());
    }

    #[test]
    fn distance_euclidean_and_scaled() {
        let rect = Rect::new(-10.0, -10.0, 10.0, 10.0);
        let id = MetricField::sample(3, 3, rect, |_| Spd2::identity());
        let d = id
            .distance(Point2::new(0.0, 0.0), Point2::new(3.0, 4.0))
            .unwrap();
        assert!((d - 5.0).abs() < 1e-12);

        let sq = MetricField::sample(3, 3, rect, |_| Spd2::diag(4.0, 1.0));
        let d = sq
            .distance(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0))
            .unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn midpoint_equidistance() {
        // Sanity check: the midpoint of two sites is equidistant to
        // both under any field, since both displacements share Q_p.
        let rect = Rect::new(-5.0, -5.0, 5.0, 5.0);
        let f = MetricField::sample(9, 9, rect, |p| {
            Spd2::rotated_diag(3.0, 1.0, p.x * 0.7 - p.y * 0.3)
        });
        for k in 0..20u64 {
            let v = Point2::new(
                -4.0 + 8.0 * ((k * 7 + 1) % 13) as f64 / 13.0,
                -4.0 + 8.0 * ((k * 5 + 2) % 11) as f64 / 11.0,
            );
            let w = Point2::new(
                -4.0 + 8.0 * ((k * 3 + 4) % 17) as f64 / 17.0,
                -4.0 + 8.0 * ((k * 11 + 6) % 7) as f64 / 7.0,
            );
            if v == w {
                continue;
            }
            let m = v.midpoint(w);
            let dv = f.distance(v, m).unwrap();
            let dw = f.distance(w, m).unwrap();
            assert!((dv - dw).abs() < 1e-12 * (1.0 + dv));
        }
    }

    #[test]
    fn midpoint_is_only_equidistant_point_on_supporting_line() {
        // Dense 1-D scan along the supporting line: the sign of
        // D(v,p) - D(w,p) flips only at t = 1/2.
        let rect = Rect::new(-5.0, -5.0, 5.0, 5.0);
        let f = MetricField::sample(17, 17, rect, |p| {
            Spd2::rotated_diag(4.0, 1.0, 0.9 * p.x + 0.2 * p.y)
        });
        let v = Point2::new(-2.0, -1.0);
        let w = Point2::new(2.5, 1.5);
        let mut crossings = Vec::new();
        let steps = 2000;
        let mut prev: Option<f64> = None;
        for k in 0..=steps {
            let t = -0.4 + 1.8 * k as f64 / steps as f64;
            let p = Point2::new(v.x + t * (w.x - v.x), v.y + t * (w.y - v.y));
            if !rect.contains(p) {
                continue;
            }
            let diff = f.distance(v, p).unwrap() - f.distance(w, p).unwrap();
            if diff != 0.0 {
                if let Some(pd) = prev {
                    if pd.signum() != diff.signum() {
                        crossings.push(t);
                    }
                }
                prev = Some(diff);
            }
        }
        assert_eq!(crossings.len(), 1, "crossings at {:?}", crossings);
        assert!((crossings[0] - 0.5).abs() < 2.0 * 1.8 / steps as f64 + 1e-9);
    }

    #[test]
    fn sqrt_pair_identity_and_diag() {
        let s = sqrt_pair(Spd2::identity());
        assert_eq!(s.m, [1.0, 0.0, 1.0]);
        assert_eq!(s.mprime, [1.0, 0.0, 1.0]);
        assert_eq!((s.lambda1, s.lambda2), (1.0, 1.0));

        let s = sqrt_pair(Spd2::diag(4.0, 1.0));
        assert!((s.m[0] - 2.0).abs() < 1e-12 && (s.m[2] - 1.0).abs() < 1e-12);
        assert!((s.mprime[0] - 2.0).abs() < 1e-12 && (s.mprime[2] - 1.0).abs() < 1e-12);
        assert!((s.lambda2 / s.lambda1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_pair_multiplies_back() {
        for k in 0..50u64 {
            let q = seeded_spd(k);
            let s = sqrt_pair(q);
            let [a, b, c] = s.m;
            let back = [a * a + b * b, a * b + b * c, b * b + c * c];
            assert!((back[0] - q.q11).abs() < 1e-12 * (1.0 + q.q11.abs()));
            assert!((back[1] - q.q12).abs() < 1e-12 * (1.0 + q.q12.abs()));
            assert!((back[2] - q.q22).abs() < 1e-12 * (1.0 + q.q22.abs()));
            // M' eigenvalues in [1, ratio^(1/2)].
            let mp = Spd2 { q11: s.mprime[0], q12: s.mprime[1], q22: s.mprime[2] };
            let (l1, l2) = mp.eigenvalues();
            let gamma = (s.lambda2 / s.lambda1).sqrt();
            assert!(l1 >= 1.0 - 1e-12 && l2 <= gamma + 1e-12);
        }
    }

    #[test]
    fn anisotropy_bound_matches_scan() {
        let id = MetricField::sample(5, 5, unit_rect(), |_| Spd2::identity());
        assert!((id.anisotropy_bound() - 1.0).abs() < 1e-8);
        let d = MetricField::sample(5, 5, unit_rect(), |_| Spd2::diag(4.0, 1.0));
        assert!((d.anisotropy_bound() - 2.0).abs() < 1e-8);

        let f = MetricField::sample(8, 8, unit_rect(), |p| {
            seeded_spd((p.x * 997.0) as u64 ^ ((p.y * 991.0) as u64) << 21)
        });
        let mut worst: f64 = 1.0;
        for j in 0..8 {
            for i in 0..8 {
                let (l1, l2) = f.node(i, j).eigenvalues();
                worst = worst.max((l2 / l1).sqrt());
            }
        }
        assert!((f.anisotropy_bound() - worst * (1.0 + 1e-9)).abs() < 1e-12 * worst);
    }

    #[test]
    fn blend_identity_is_noop_and_far_field_is_identity() {
        let rect = Rect::new(-8.0, -8.0, 8.0, 8.0);
        let id = MetricField::sample(9, 9, rect, |_| Spd2::identity());
        let blended = id.blend_to_identity(2.0);
        for j in 0..9 {
            for i in 0..9 {
                assert_eq!(blended.node(i, j), Spd2::identity());
            }
        }

        let aniso = MetricField::sample(17, 17, rect, |_| Spd2::diag(4.0, 1.0));
        let blended = aniso.blend_to_identity(2.0);
        // Inside the ball: untouched; beyond the ramp end: identity.
        let near = blended.eval(Point2::new(1.0, 0.0)).unwrap();
        assert!((near.q11 - 4.0).abs() < 1e-9);
        let far = blended.node(0, 0); // corner node, norm ~ 11.3 > 3
        assert_eq!(far, Spd2::identity());
    }

    #[test]
    fn blend_ramp_midpoint_value() {
        // At node norm rho + 0.5 the blend weight is exactly 1/2.
        let rect = Rect::new(0.0, -1.0, 5.0, 1.0);
        let f = MetricField::sample(21, 9, rect, |_| Spd2::diag(4.0, 1.0));
        let rho = 2.0;
        let blended = f.blend_to_identity(rho);
        // Node at (2.5, 0): x grid is 0..5 over 21 nodes, so i=10, y j=4.
        let p = blended.node_pos(10, 4);
        assert!((p.x - 2.5).abs() < 1e-12 && p.y.abs() < 1e-12);
        let q = blended.node(10, 4);
        assert!((q.q11 - 2.5).abs() < 1e-12);
        assert!((q.q22 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ellipse_classification() {
        let e = Ellipse {
            center: Point2::new(0.0, 0.0),
            q: Spd2::identity(),
            radius_sq: 1.0,
        };
        assert_eq!(ellipse_contains(&e, Point2::new(0.5, 0.0)), Containment::Inside);
        assert_eq!(ellipse_contains(&e, Point2::new(1.0, 0.0)), Containment::Boundary);
        assert_eq!(ellipse_contains(&e, Point2::new(2.0, 0.0)), Containment::Outside);
    }

    #[test]
    fn metric_text_roundtrip() {
        let f = MetricField::sample(4, 3, unit_rect(), |p| {
            Spd2::rotated_diag(2.0 + p.x, 1.0, p.y)
        });
        let g = MetricField::from_text(&f.to_text()).unwrap();
        assert_eq!(f.node_counts(), g.node_counts());
        for j in 0..3 {
            for i in 0..4 {
                let (a, b) = (f.node(i, j), g.node(i, j));
                assert!((a.q11 - b.q11).abs() < 1e-15);
                assert!((a.q12 - b.q12).abs() < 1e-15);
                assert!((a.q22 - b.q22).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn builtin_parse() {
        assert_eq!(BuiltinMetric::parse("identity").unwrap(), BuiltinMetric::Identity);
        assert_eq!(
            BuiltinMetric::parse("diag:4,1").unwrap(),
            BuiltinMetric::Diag { a: 4.0, b: 1.0 }
        );
        assert!(BuiltinMetric::parse("swirl:0.5").is_ok());
        assert!(BuiltinMetric::parse("sine:3,2").is_ok());
        assert!(BuiltinMetric::parse("pinch:1,0.75,1,0.01").is_ok());
        assert!(BuiltinMetric::parse("diag:-1,1").is_err());
        assert!(BuiltinMetric::parse("nope").is_err());
    }
}
