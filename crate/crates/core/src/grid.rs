//! Rectangular domains and the raster used for discretization.

use crate::geometry::Point2;

/// Axis-aligned rectangle `[x0,x1] x [y0,y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        assert!(x1 > x0 && y1 > y0, "empty rectangle");
        Rect { x0, y0, x1, y1 }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point2 {
        Point2::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn diameter(&self) -> f64 {
        (self.width().powi(2) + self.height().powi(2)).sqrt()
    }

    /// Bounding box of a point set, grown by `factor` on each side
    /// (total size scales by `2*factor + 1` relative to the box).
    pub fn bbox_inflated(points: &[Point2], factor: f64) -> Rect {
        assert!(!points.is_empty());
        let mut x0 = f64::INFINITY;
        let mut y0 = f64::INFINITY;
        let mut x1 = f64::NEG_INFINITY;
        let mut y1 = f64::NEG_INFINITY;
        for p in points {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        // Degenerate boxes (colinear sites) still need an extent.
        let w = (x1 - x0).max(1e-9);
        let h = (y1 - y0).max(1e-9);
        let pad = factor * w.max(h);
        Rect::new(x0 - pad, y0 - pad, x1 + pad, y1 + pad)
    }
}

/// A raster of `nx * ny` cells covering a rectangle. Cell `(i, j)` spans one
/// pixel; evaluation points are cell centers. Row-major indexing, `j * nx + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub rect: Rect,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, rect: Rect) -> Self {
        assert!(nx >= 2 && ny >= 2);
        GridSpec { nx, ny, rect }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.rect.width() / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.rect.height() / self.ny as f64
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point2 {
        Point2::new(
            self.rect.x0 + (i as f64 + 0.5) * self.dx(),
            self.rect.y0 + (j as f64 + 0.5) * self.dy(),
        )
    }

    /// Cell containing `p`, clamped to the grid.
    pub fn cell_of(&self, p: Point2) -> (usize, usize) {
        let i = ((p.x - self.rect.x0) / self.dx()).floor() as isize;
        let j = ((p.y - self.rect.y0) / self.dy()).floor() as isize;
        (
            i.clamp(0, self.nx as isize - 1) as usize,
            j.clamp(0, self.ny as isize - 1) as usize,
        )
    }

    pub fn is_border_cell(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }
}
