//! The discretized primal diagram: per-cell nearest-site labels, region /
//! edge / vertex extraction, Newton refinement of Voronoi vertices, and the
//! primal-side structural checks.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::Point2;
use crate::grid::GridSpec;
use crate::metric::{MetricError, MetricField};
use crate::sites::SiteSet;

/// Relative tie tolerance on squared distances.
pub const TAU_TIE: f64 = 1e-9;

/// Relative residual target for refined Voronoi vertices.
pub const VERTEX_RESIDUAL_REL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum PrimalError {
    #[error("need at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("site {0} is outside the label grid domain")]
    SiteOutsideDomain(usize),
    #[error("site {site}'s own cell is labeled to site {got}: grid resolution too coarse")]
    SubResolution { site: usize, got: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Per-cell nearest-site index and distance over the working rectangle.
#[derive(Debug, Clone)]
pub struct LabelGrid {
    pub grid: GridSpec,
    pub label: Vec<u32>,
    pub dist: Vec<f64>,
    /// Second-best within the tie tolerance.
    pub tie: Vec<bool>,
    /// Max times any grid cell was examined during front propagation
    /// (0 for brute force).
    pub max_visits: u32,
}

impl LabelGrid {
    /// Text raster: header "nx ny", then one row of label indices per line,
    /// row-major from j = 0.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.grid.nx, self.grid.ny).unwrap();
        for j in 0..self.grid.ny {
            let row: Vec<String> = (0..self.grid.nx)
                .map(|i| self.label[self.grid.index(i, j)].to_string())
                .collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        out
    }
}

fn check_sites(sites: &SiteSet, grid: GridSpec) -> Result<(), PrimalError> {
    if sites.len() < 2 {
        return Err(PrimalError::TooFewSites(sites.len()));
    }
    for (k, s) in sites.sites.iter().enumerate() {
        if !grid.rect.contains(*s) {
            return Err(PrimalError::SiteOutsideDomain(k));
        }
    }
    Ok(())
}

/// Direct evaluation of the region definition: per cell center, the argmin
/// site under D. Ties (relative tolerance on squared distances) resolve to
/// the lowest site index and are flagged.
pub fn compute_labels_bruteforce(
    field: &MetricField,
    sites: &SiteSet,
    grid: GridSpec,
) -> Result<LabelGrid, PrimalError> {
    check_sites(sites, grid)?;
    let n = grid.len();
    let mut label = vec![0u32; n];
    let mut dist = vec![0.0f64; n];
    let mut tie = vec![false; n];
    for idx in 0..n {
        let (i, j) = grid.coords(idx);
        let p = grid.cell_center(i, j);
        let q = field.eval(p)?;
        let mut best = f64::INFINITY;
        let mut second = f64::INFINITY;
        let mut best_site = 0u32;
        for (k, v) in sites.sites.iter().enumerate() {
            let d2 = q.quad_form(p.x - v.x, p.y - v.y);
            if d2 < best {
                second = best;
                best = d2;
                best_site = k as u32;
            } else if d2 < second {
                second = d2;
            }
        }
        label[idx] = best_site;
        dist[idx] = best.sqrt();
        tie[idx] = second.is_finite() && second - best <= TAU_TIE * (best + 1e-300);
    }
    Ok(LabelGrid { grid, label, dist, tie, max_visits: 0 })
}

#[derive(Debug, Clone, Copy)]
struct FrontEntry {
    d: f64,
    idx: u32,
    site: u32,
}

impl PartialEq for FrontEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for FrontEntry {}
impl PartialOrd for FrontEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FrontEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance; index and site break ties deterministically.
        other
            .d
            .total_cmp(&self.d)
            .then(other.idx.cmp(&self.idx))
            .then(other.site.cmp(&self.site))
    }
}

/// Triangulated-grid neighborhood: 4-neighbors plus one diagonal pair,
/// giving every interior vertex valence six.
const NEIGHBORS6: [(isize, isize); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)];

/// Multi-source front propagation over the 6-neighborhood. Each cell adopts
/// the label whose closed-form distance (not an accumulated path length) is
/// smallest among the fronts that reach it; propagation order comes from a
/// priority queue, so fronts expand outward from the sites.
pub fn compute_labels_frontprop(
    field: &MetricField,
    sites: &SiteSet,
    grid: GridSpec,
) -> Result<LabelGrid, PrimalError> {
    check_sites(sites, grid)?;
    let n = grid.len();
    let mut best = vec![f64::INFINITY; n];
    let mut label = vec![u32::MAX; n];
    let mut pushed: HashMap<(u32, u32), f64> = HashMap::new();
    let mut visits = vec![0u32; n];
    let mut heap: BinaryHeap<FrontEntry> = BinaryHeap::new();

    // Slack band: a site can be optimal somewhere inside a cell while losing
    // at the cell center by up to the distance gradient (bounded by the
    // larger metric eigenvalue's square root) times the cell radius, for
    // each of the two competing sites; the factor 4 absorbs metric
    // variation across the cell. Fronts inside the band are relayed but
    // never adopted, so a label reaches every cell its continuous region
    // intersects even where the region is thinner than a cell.
    let r_cell = 0.5 * grid.dx().hypot(grid.dy());
    let mut slack = vec![f64::NAN; n];
    let slack_of = |slack: &mut Vec<f64>, idx: usize| -> Result<f64, PrimalError> {
        if slack[idx].is_nan() {
            let (i, j) = grid.coords(idx);
            let q = field.eval(grid.cell_center(i, j))?;
            slack[idx] = 4.0 * q.eigenvalues().1.sqrt() * r_cell;
        }
        Ok(slack[idx])
    };

    for (k, v) in sites.sites.iter().enumerate() {
        let (i, j) = grid.cell_of(*v);
        let idx = grid.index(i, j);
        let d = field.distance(*v, grid.cell_center(i, j))?;
        heap.push(FrontEntry { d, idx: idx as u32, site: k as u32 });
        pushed.insert((idx as u32, k as u32), d);
    }

    while let Some(FrontEntry { d, idx, site }) = heap.pop() {
        let idx = idx as usize;
        let adopt = d < best[idx];
        if adopt {
            best[idx] = d;
            label[idx] = site;
        } else if d > best[idx] + slack_of(&mut slack, idx)? {
            continue;
        }
        let (i, j) = grid.coords(idx);
        let v = sites.sites[site as usize];
        for (di, dj) in NEIGHBORS6 {
            let (ni, nj) = (i as isize + di, j as isize + dj);
            if ni < 0 || nj < 0 || ni >= grid.nx as isize || nj >= grid.ny as isize {
                continue;
            }
            let nidx = grid.index(ni as usize, nj as usize);
            if adopt {
                visits[nidx] += 1;
            }
            let nd = field.distance(v, grid.cell_center(ni as usize, nj as usize))?;
            if nd > best[nidx] + slack_of(&mut slack, nidx)? {
                continue;
            }
            let gate = pushed.entry((nidx as u32, site)).or_insert(f64::INFINITY);
            if nd < *gate {
                *gate = nd;
                heap.push(FrontEntry { d: nd, idx: nidx as u32, site });
            }
        }
    }

    // Unreached cells (possible only if fronts cannot pass between sites at
    // this resolution) fall back to a direct scan.
    let mut dist = vec![0.0f64; n];
    let mut tie = vec![false; n];
    for idx in 0..n {
        let (i, j) = grid.coords(idx);
        let p = grid.cell_center(i, j);
        if label[idx] == u32::MAX {
            let q = field.eval(p)?;
            let mut bd = f64::INFINITY;
            for (k, v) in sites.sites.iter().enumerate() {
                let d2 = q.quad_form(p.x - v.x, p.y - v.y);
                if d2 < bd {
                    bd = d2;
                    label[idx] = k as u32;
                }
            }
            best[idx] = bd.sqrt();
        }
        dist[idx] = best[idx];
    }

    // Tie flags from the local label neighborhood: only interface cells can
    // tie, and the competing site is always adjacent there.
    for idx in 0..n {
        let (i, j) = grid.coords(idx);
        let p = grid.cell_center(i, j);
        let own = label[idx];
        let best_sq = dist[idx] * dist[idx];
        'nb: for dj in -1isize..=1 {
            for di in -1isize..=1 {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                if ni < 0 || nj < 0 || ni >= grid.nx as isize || nj >= grid.ny as isize {
                    continue;
                }
                let other = label[grid.index(ni as usize, nj as usize)];
                if other == own {
                    continue;
                }
                let w = sites.sites[other as usize];
                let d2 = field.distance_sq(w, p)?;
                if d2 - best_sq <= TAU_TIE * (best_sq + 1e-300) {
                    tie[idx] = true;
                    break 'nb;
                }
            }
        }
    }

    let max_visits = visits.iter().copied().max().unwrap_or(0);
    Ok(LabelGrid { grid, label, dist, tie, max_visits })
}

/// A Voronoi region at grid resolution: its cells grouped into 4-connected
/// components.
#[derive(Debug, Clone)]
pub struct Region {
    pub components: Vec<Vec<usize>>,
    pub unbounded: bool,
}

/// The cell-boundary interface between two labels, decomposed into
/// connected polyline components.
#[derive(Debug, Clone)]
pub struct PrimalEdge {
    /// Segments as corner-lattice index pairs.
    pub segments: Vec<(usize, usize)>,
    /// Segment indices grouped by connected component.
    pub components: Vec<Vec<usize>>,
    /// Per component: does it reach the domain border?
    pub component_unbounded: Vec<bool>,
    pub unbounded: bool,
}

/// A cluster of grid-corner vertex candidates sharing one label set.
#[derive(Debug, Clone)]
pub struct VertexCluster {
    pub sites: Vec<u32>,
    pub guess: Point2,
}

/// A refined Voronoi vertex: equidistant to its incident sites.
#[derive(Debug, Clone)]
pub struct VoronoiVertex {
    pub position: Point2,
    /// Incident site indices, ascending.
    pub incident_sites: Vec<u32>,
    /// Common distance D(v_i, position).
    pub mu: f64,
    /// Worst |D(v_i, position) - mu| over incident sites.
    pub residual: f64,
    pub refined: bool,
}

/// The extracted primal diagram at grid resolution.
#[derive(Debug, Clone)]
pub struct PrimalDiagram {
    pub grid: GridSpec,
    pub label: Vec<u32>,
    pub tie: Vec<bool>,
    pub n_sites: usize,
    pub regions: Vec<Region>,
    pub edges: BTreeMap<(u32, u32), PrimalEdge>,
    pub vertex_clusters: Vec<VertexCluster>,
    pub vertices: Vec<VoronoiVertex>,
    /// Site pairs whose tie cells form a 2-D blob: the instance may violate
    /// the null-measure interface assumption.
    pub degenerate_pairs: Vec<(u32, u32)>,
}

impl PrimalDiagram {
    pub fn corner_pos(&self, ci: usize) -> Point2 {
        let g = &self.grid;
        let (i, j) = (ci % (g.nx + 1), ci / (g.nx + 1));
        Point2::new(g.rect.x0 + i as f64 * g.dx(), g.rect.y0 + j as f64 * g.dy())
    }

}

fn connected_components(
    cells: &[usize],
    grid: GridSpec,
    member: impl Fn(usize) -> bool,
) -> Vec<Vec<usize>> {
    let mut seen: BTreeMap<usize, bool> = cells.iter().map(|&c| (c, false)).collect();
    let mut out = Vec::new();
    for &start in cells {
        if seen[&start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        *seen.get_mut(&start).unwrap() = true;
        while let Some(c) = stack.pop() {
            comp.push(c);
            let (i, j) = grid.coords(c);
            for (di, dj) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                if ni < 0 || nj < 0 || ni >= grid.nx as isize || nj >= grid.ny as isize {
                    continue;
                }
                let nidx = grid.index(ni as usize, nj as usize);
                if member(nidx) {
                    if let Some(v) = seen.get_mut(&nidx) {
                        if !*v {
                            *v = true;
                            stack.push(nidx);
                        }
                    }
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out.sort_by_key(|c| c[0]);
    out
}

/// Group cells by label into regions, trace pairwise interfaces, and collect
/// Voronoi vertex candidates at grid corners. Vertices are not yet refined.
pub fn extract_primal(lg: &LabelGrid) -> PrimalDiagram {
    let grid = lg.grid;
    let n_sites = lg.label.iter().copied().max().map_or(0, |m| m as usize + 1);

    // Regions: cells grouped per label, 4-connected components.
    let mut per_label: Vec<Vec<usize>> = vec![Vec::new(); n_sites];
    for (idx, &l) in lg.label.iter().enumerate() {
        per_label[l as usize].push(idx);
    }
    let regions: Vec<Region> = per_label
        .iter()
        .enumerate()
        .map(|(l, cells)| {
            let l = l as u32;
            let components = connected_components(cells, grid, |c| lg.label[c] == l);
            let unbounded = cells.iter().any(|&c| {
                let (i, j) = grid.coords(c);
                grid.is_border_cell(i, j)
            });
            Region { components, unbounded }
        })
        .collect();

    // Interfaces between horizontally / vertically adjacent differing cells,
    // as segments on the corner lattice.
    let cw = grid.nx + 1;
    let mut edges: BTreeMap<(u32, u32), PrimalEdge> = BTreeMap::new();
    let mut add_seg = |a: u32, b: u32, c0: usize, c1: usize| {
        let key = (a.min(b), a.max(b));
        edges
            .entry(key)
            .or_insert_with(|| PrimalEdge {
                segments: Vec::new(),
                components: Vec::new(),
                component_unbounded: Vec::new(),
                unbounded: false,
            })
            .segments
            .push((c0, c1));
    };
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let l = lg.label[grid.index(i, j)];
            if i + 1 < grid.nx {
                let r = lg.label[grid.index(i + 1, j)];
                if r != l {
                    add_seg(l, r, j * cw + (i + 1), (j + 1) * cw + (i + 1));
                }
            }
            if j + 1 < grid.ny {
                let u = lg.label[grid.index(i, j + 1)];
                if u != l {
                    add_seg(l, u, (j + 1) * cw + i, (j + 1) * cw + (i + 1));
                }
            }
        }
    }

    // Split each interface into connected polyline components by shared
    // corner endpoints.
    let total_corners = (grid.nx + 1) * (grid.ny + 1);
    let corner_border = |ci: usize| {
        let (i, j) = (ci % cw, ci / cw);
        i == 0 || j == 0 || i == grid.nx || j == grid.ny
    };
    for edge in edges.values_mut() {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (si, &(a, b)) in edge.segments.iter().enumerate() {
            adj.entry(a).or_default().push(si);
            adj.entry(b).or_default().push(si);
        }
        let mut seen = vec![false; edge.segments.len()];
        for s0 in 0..edge.segments.len() {
            if seen[s0] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![s0];
            seen[s0] = true;
            while let Some(s) = stack.pop() {
                comp.push(s);
                let (a, b) = edge.segments[s];
                for &c in [a, b].iter() {
                    for &t in &adj[&c] {
                        if !seen[t] {
                            seen[t] = true;
                            stack.push(t);
                        }
                    }
                }
            }
            comp.sort_unstable();
            let unbounded = comp.iter().any(|&s| {
                let (a, b) = edge.segments[s];
                corner_border(a) || corner_border(b)
            });
            edge.components.push(comp);
            edge.component_unbounded.push(unbounded);
        }
        edge.unbounded = edge.component_unbounded.iter().any(|&u| u);
    }

    // Vertex candidates: interior corners whose 4 incident cells carry >= 3
    // distinct labels; adjacent candidates with the same label set merge
    // into one cluster.
    let mut candidate_sets: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for j in 1..grid.ny {
        for i in 1..grid.nx {
            let mut labels = vec![
                lg.label[grid.index(i - 1, j - 1)],
                lg.label[grid.index(i, j - 1)],
                lg.label[grid.index(i - 1, j)],
                lg.label[grid.index(i, j)],
            ];
            labels.sort_unstable();
            labels.dedup();
            if labels.len() >= 3 {
                candidate_sets.insert(j * cw + i, labels);
            }
        }
    }
    let mut cluster_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (&ci, set) in &candidate_sets {
        if cluster_of.contains_key(&ci) {
            continue;
        }
        let id = clusters.len();
        let mut stack = vec![ci];
        cluster_of.insert(ci, id);
        let mut members = Vec::new();
        while let Some(c) = stack.pop() {
            members.push(c);
            let (i, j) = (c % cw, c / cw);
            for dj in -1isize..=1 {
                for di in -1isize..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as isize + di, j as isize + dj);
                    if ni < 0 || nj < 0 || ni as usize > grid.nx || nj as usize > grid.ny {
                        continue;
                    }
                    let nc = nj as usize * cw + ni as usize;
                    if nc >= total_corners || cluster_of.contains_key(&nc) {
                        continue;
                    }
                    if candidate_sets.get(&nc) == Some(set) {
                        cluster_of.insert(nc, id);
                        stack.push(nc);
                    }
                }
            }
        }
        clusters.push(members);
    }
    let corner_pos = |ci: usize| {
        let (i, j) = (ci % cw, ci / cw);
        Point2::new(
            grid.rect.x0 + i as f64 * grid.dx(),
            grid.rect.y0 + j as f64 * grid.dy(),
        )
    };
    let vertex_clusters: Vec<VertexCluster> = clusters
        .iter()
        .map(|members| {
            let sites = candidate_sets[&members[0]].clone();
            let (mut sx, mut sy) = (0.0, 0.0);
            for &c in members {
                let p = corner_pos(c);
                sx += p.x;
                sy += p.y;
            }
            let k = members.len() as f64;
            VertexCluster { sites, guess: Point2::new(sx / k, sy / k) }
        })
        .collect();

    // Degeneracy monitor: a 4-connected tie-cell component that is two-
    // dimensional (area well above its bounding-box perimeter) suggests a
    // non-null-measure interface.
    let tie_cells: Vec<usize> = (0..grid.len()).filter(|&c| lg.tie[c]).collect();
    let mut degenerate_pairs: Vec<(u32, u32)> = Vec::new();
    for comp in connected_components(&tie_cells, grid, |c| lg.tie[c]) {
        let (mut i0, mut j0, mut i1, mut j1) = (usize::MAX, usize::MAX, 0usize, 0usize);
        for &c in &comp {
            let (i, j) = grid.coords(c);
            i0 = i0.min(i);
            j0 = j0.min(j);
            i1 = i1.max(i);
            j1 = j1.max(j);
        }
        let bbox_perim = 2 * ((i1 - i0 + 1) + (j1 - j0 + 1));
        if comp.len() > 2 * bbox_perim {
            let mut labels: Vec<u32> = comp.iter().map(|&c| lg.label[c]).collect();
            labels.sort_unstable();
            labels.dedup();
            if labels.len() >= 2 {
                degenerate_pairs.push((labels[0], labels[1]));
            }
        }
    }
    degenerate_pairs.sort_unstable();
    degenerate_pairs.dedup();

    PrimalDiagram {
        grid,
        label: lg.label.clone(),
        tie: lg.tie.clone(),
        n_sites,
        regions,
        edges,
        vertex_clusters,
        vertices: Vec::new(),
        degenerate_pairs,
    }
}

/// Newton refinement of a Voronoi vertex from a grid-level guess. Solves
/// equidistance of the first three incident sites; the stored residual is
/// the worst deviation over all incident sites. Non-convergence keeps the
/// guess and clears the `refined` flag.
pub fn refine_voronoi_vertex(
    field: &MetricField,
    incident_sites: &[u32],
    site_positions: &[Point2],
    guess: Point2,
) -> Result<VoronoiVertex, PrimalError> {
    assert!(incident_sites.len() >= 3);
    let v: Vec<Point2> = incident_sites
        .iter()
        .map(|&k| site_positions[k as usize])
        .collect();
    let rect = field.rect();
    let clamp = |p: Point2| {
        let mx = 1e-12 * rect.width().max(1.0);
        Point2::new(
            p.x.clamp(rect.x0 + mx, rect.x1 - mx),
            p.y.clamp(rect.y0 + mx, rect.y1 - mx),
        )
    };
    let f = |p: Point2| -> Result<[f64; 2], PrimalError> {
        let d0 = field.distance_sq(v[0], p)?;
        let d1 = field.distance_sq(v[1], p)?;
        let d2 = field.distance_sq(v[2], p)?;
        Ok([d0 - d1, d1 - d2])
    };
    let finish = |p: Point2, refined: bool| -> Result<VoronoiVertex, PrimalError> {
        let mut ds = Vec::with_capacity(v.len());
        for &s in &v {
            ds.push(field.distance(s, p)?);
        }
        let mu = (ds[0] + ds[1] + ds[2]) / 3.0;
        let residual = ds.iter().map(|d| (d - mu).abs()).fold(0.0, f64::max);
        Ok(VoronoiVertex {
            position: p,
            incident_sites: incident_sites.to_vec(),
            mu,
            residual,
            refined,
        })
    };

    let mut p = clamp(guess);
    let scale = rect.diameter();
    for _ in 0..50 {
        let fval = f(p)?;
        // Distance-level residual on the solved triple.
        let d: Vec<f64> = (0..3)
            .map(|k| field.distance(v[k], p))
            .collect::<Result<_, _>>()?;
        let mu = (d[0] + d[1] + d[2]) / 3.0;
        let res = d.iter().map(|x| (x - mu).abs()).fold(0.0, f64::max);
        if res < VERTEX_RESIDUAL_REL * (1.0 + mu) {
            return finish(p, true);
        }
        let h = 1e-7 * scale;
        let fx1 = f(clamp(Point2::new(p.x + h, p.y)))?;
        let fx0 = f(clamp(Point2::new(p.x - h, p.y)))?;
        let fy1 = f(clamp(Point2::new(p.x, p.y + h)))?;
        let fy0 = f(clamp(Point2::new(p.x, p.y - h)))?;
        let jac = [
            [(fx1[0] - fx0[0]) / (2.0 * h), (fy1[0] - fy0[0]) / (2.0 * h)],
            [(fx1[1] - fx0[1]) / (2.0 * h), (fy1[1] - fy0[1]) / (2.0 * h)],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-30 {
            return finish(p, false);
        }
        let dx = (-fval[0] * jac[1][1] + fval[1] * jac[0][1]) / det;
        let dy = (-jac[0][0] * fval[1] + jac[1][0] * fval[0]) / det;
        // Cap the step at one grid diameter to keep Newton local.
        let step = dx.hypot(dy);
        let cap = 0.05 * scale;
        let (dx, dy) = if step > cap {
            (dx * cap / step, dy * cap / step)
        } else {
            (dx, dy)
        };
        p = clamp(Point2::new(p.x + dx, p.y + dy));
    }
    finish(p, false)
}

/// Refine every extracted vertex cluster and store the results on the
/// diagram. Clusters that refine to the same point merge.
pub fn refine_vertices(
    pd: &mut PrimalDiagram,
    field: &MetricField,
    sites: &SiteSet,
) -> Result<(), PrimalError> {
    let mut vertices: Vec<VoronoiVertex> = Vec::new();
    let merge_tol = 0.5 * pd.grid.dx().min(pd.grid.dy());
    for cluster in &pd.vertex_clusters {
        let v = refine_voronoi_vertex(field, &cluster.sites, &sites.sites, cluster.guess)?;
        let dup = vertices.iter().any(|u| {
            u.incident_sites == v.incident_sites && u.position.dist(v.position) < merge_tol
        });
        if !dup {
            vertices.push(v);
        }
    }
    pd.vertices = vertices;
    Ok(())
}

/// Per-site orphan components: everything except the component containing
/// the generating site.
pub fn detect_orphans(
    pd: &PrimalDiagram,
    sites: &SiteSet,
) -> Result<Vec<(u32, Vec<usize>)>, PrimalError> {
    let mut out = Vec::new();
    for (k, site) in sites.sites.iter().enumerate() {
        let (i, j) = pd.grid.cell_of(*site);
        let own = pd.grid.index(i, j);
        let got = pd.label[own];
        if got != k as u32 {
            return Err(PrimalError::SubResolution { site: k, got: got as usize });
        }
        let region = &pd.regions[k];
        let mother = region
            .components
            .iter()
            .position(|c| c.binary_search(&own).is_ok())
            .expect("site cell must be in one component of its region");
        let orphans: Vec<usize> = (0..region.components.len())
            .filter(|&c| c != mother)
            .collect();
        if !orphans.is_empty() {
            out.push((k as u32, orphans));
        }
    }
    Ok(out)
}

/// A region is hole-free iff every complement component reaches the domain
/// border.
pub fn check_region_simply_connected(pd: &PrimalDiagram) -> Vec<bool> {
    let grid = pd.grid;
    let mut out = Vec::with_capacity(pd.n_sites);
    for l in 0..pd.n_sites as u32 {
        // Flood the complement from the border frame.
        let mut reached = vec![false; grid.len()];
        let mut stack = Vec::new();
        for idx in 0..grid.len() {
            let (i, j) = grid.coords(idx);
            if grid.is_border_cell(i, j) && pd.label[idx] != l && !reached[idx] {
                reached[idx] = true;
                stack.push(idx);
            }
        }
        while let Some(c) = stack.pop() {
            let (i, j) = grid.coords(c);
            for (di, dj) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                if ni < 0 || nj < 0 || ni >= grid.nx as isize || nj >= grid.ny as isize {
                    continue;
                }
                let nidx = grid.index(ni as usize, nj as usize);
                if pd.label[nidx] != l && !reached[nidx] {
                    reached[nidx] = true;
                    stack.push(nidx);
                }
            }
        }
        let hole = (0..grid.len()).any(|c| pd.label[c] != l && !reached[c]);
        out.push(!hole);
    }
    out
}

/// Every pairwise interface must form a single connected component.
pub fn check_edges_connected(pd: &PrimalDiagram) -> BTreeMap<(u32, u32), bool> {
    pd.edges
        .iter()
        .map(|(&k, e)| (k, e.components.len() == 1))
        .collect()
}

/// True iff no refined vertex lies within `margin` of the domain border:
/// evidence that the working rectangle is large enough.
pub fn check_vertices_bounded(pd: &PrimalDiagram, margin: f64) -> bool {
    let r = pd.grid.rect;
    pd.vertices.iter().all(|v| {
        let p = v.position;
        p.x - r.x0 > margin && r.x1 - p.x > margin && p.y - r.y0 > margin && r.y1 - p.y > margin
    })
}
