//! End-to-end orchestration: metric -> sites -> labels -> primal -> dual ->
//! checks -> artifacts. Everything downstream of the config is
//! deterministic, so artifacts are byte-stable for a fixed (config, seed).

use std::path::PathBuf;

use thiserror::Error;

use crate::dual::{build_dual, build_trimesh, colinear_chain, sig12};
use crate::grid::{GridSpec, Rect};
use crate::metric::{BuiltinMetric, MetricError, MetricField};
use crate::primal::{
    compute_labels_bruteforce, compute_labels_frontprop, detect_orphans, extract_primal,
    refine_vertices, check_edges_connected, check_region_simply_connected,
    check_vertices_bounded, LabelGrid, PrimalError,
};
use crate::render::render_svg;
use crate::report::VerificationReport;
use crate::sites::{
    farthest_point_net, net_epsilon, random_sites, NetTarget, SiteError, SiteProvenance,
    SiteSet, EPS_SIGMA_GATE,
};
use crate::verify::{
    check_boundary_equals_hull, check_ece, check_embedding, check_index_sum,
    check_nondegenerate, detect_foldovers, VerifyError,
};

/// Node lattice resolution used when sampling a builtin metric onto the
/// working rectangle.
pub const METRIC_NODES: usize = 65;

/// Brute-force cross-check runs automatically when cells * sites is at or
/// below this budget (512 * 512 * 64), or always under `force_oracle`.
pub const ORACLE_COST_BUDGET: usize = 512 * 512 * 64;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Sites(#[from] SiteError),
    #[error(transparent)]
    Primal(#[from] PrimalError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One run's configuration. `explicit_sites` short-circuits the site source
/// for library callers; the CLI fills it from `--sites file:PATH`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Builtin spec ("identity", "diag:4,1", "swirl:1", "sine:3,5",
    /// "pinch:cx,cy,r,delta") or "file:PATH" for a metric grid file.
    pub metric: String,
    pub grid: (usize, usize),
    /// Working rectangle = generation domain scaled about its center.
    pub inflate: f64,
    /// "random:N" | "net:N" | "net-eps:E" | "file:PATH".
    pub sites: String,
    pub seed: u64,
    /// Metric variation constant, user-supplied, for the eps-sigma gate.
    pub sigma: Option<f64>,
    /// Check names to run; None = all.
    pub checks: Option<Vec<String>>,
    /// Force the brute-force cross-check regardless of instance size.
    pub force_oracle: bool,
    pub explicit_sites: Option<SiteSet>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            metric: "identity".into(),
            grid: (256, 256),
            inflate: 3.0,
            sites: "random:16".into(),
            seed: 1,
            sigma: None,
            checks: None,
            force_oracle: false,
            explicit_sites: None,
        }
    }
}

/// Everything a run produces; the CLI decides what to write where.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report: VerificationReport,
    pub svg: String,
    pub labels_text: String,
    pub mesh_text: String,
    /// False iff some non-skipped check failed.
    pub ok: bool,
}

fn scale_about_center(r: Rect, factor: f64) -> Rect {
    let c = r.center();
    let (hw, hh) = (0.5 * r.width() * factor, 0.5 * r.height() * factor);
    Rect::new(c.x - hw, c.y - hh, c.x + hw, c.y + hh)
}

fn safe_bbox(sites: &[crate::geometry::Point2]) -> Rect {
    let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
    let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in sites {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    // Degenerate (colinear / coincident) boxes still need extent on both
    // axes.
    let h = (0.5 * (x1 - x0).max(y1 - y0)).max(0.5);
    let c = crate::geometry::Point2::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
    Rect::new(
        x0.min(c.x - h),
        y0.min(c.y - h),
        x1.max(c.x + h),
        y1.max(c.y + h),
    )
}

enum SiteSpec {
    Random(usize),
    Net(NetTarget),
    File(PathBuf),
}

fn parse_sites(spec: &str) -> Result<SiteSpec, PipelineError> {
    let bad = |m: &str| PipelineError::BadConfig(format!("sites '{}': {}", spec, m));
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| bad("expected kind:value"))?;
    match kind {
        "random" => Ok(SiteSpec::Random(
            arg.parse().map_err(|_| bad("bad count"))?,
        )),
        "net" => Ok(SiteSpec::Net(NetTarget::Count(
            arg.parse().map_err(|_| bad("bad count"))?,
        ))),
        "net-eps" => Ok(SiteSpec::Net(NetTarget::Epsilon(
            arg.parse().map_err(|_| bad("bad epsilon"))?,
        ))),
        "file" => Ok(SiteSpec::File(PathBuf::from(arg))),
        _ => Err(bad("unknown site source")),
    }
}

pub fn run(config: &RunConfig) -> Result<RunArtifacts, PipelineError> {
    let (nx, ny) = config.grid;
    if nx < 64 || ny < 64 {
        return Err(PipelineError::BadConfig(format!(
            "grid {}x{} below the 64-per-side minimum",
            nx, ny
        )));
    }
    if config.inflate < 1.0 {
        return Err(PipelineError::BadConfig("inflate must be >= 1".into()));
    }
    let selected = |name: &str| -> bool {
        match &config.checks {
            None => true,
            Some(list) => list.iter().any(|c| c == name || c == "all"),
        }
    };

    // Working rectangle and metric field. A metric file fixes the domain;
    // builtin metrics are sampled onto the inflated generation domain so
    // downstream code only ever sees the interpolated field.
    let metric_file = config.metric.strip_prefix("file:");
    let site_spec = match &config.explicit_sites {
        Some(s) => {
            s.validate_distinct()?;
            None
        }
        None => Some(parse_sites(&config.sites)?),
    };
    let mut explicit = config.explicit_sites.clone();
    if let Some(SiteSpec::File(path)) = &site_spec {
        explicit = Some(SiteSet::from_text(&std::fs::read_to_string(path)?)?);
    }

    let gen_domain = if let Some(path) = metric_file {
        let field = MetricField::load(std::path::Path::new(path))?;
        scale_about_center(field.rect(), 1.0 / config.inflate)
    } else if let Some(s) = &explicit {
        safe_bbox(&s.sites)
    } else {
        Rect::new(0.0, 0.0, 1.0, 1.0)
    };
    let rect = if let Some(path) = metric_file {
        MetricField::load(std::path::Path::new(path))?.rect()
    } else {
        scale_about_center(gen_domain, config.inflate)
    };
    let field = if let Some(path) = metric_file {
        MetricField::load(std::path::Path::new(path))?
    } else {
        let builtin = BuiltinMetric::parse(&config.metric)?;
        MetricField::sample_builtin(builtin, METRIC_NODES, METRIC_NODES, rect)
    };
    let grid = GridSpec::new(nx, ny, rect);

    let sites = match (&explicit, site_spec) {
        (Some(s), _) => s.clone(),
        (None, Some(SiteSpec::Random(n))) => {
            // Keep sites several cells apart so each site's own cell and
            // 4-neighborhood stay resolvable on the label grid.
            let sep = (0.01 * gen_domain.diameter()).max(4.0 * grid.dx().max(grid.dy()));
            random_sites(gen_domain, n, config.seed, sep)?
        }
        (None, Some(SiteSpec::Net(target))) => {
            farthest_point_net(&field, grid, target, config.seed, false)?
        }
        _ => unreachable!(),
    };
    for (k, s) in sites.sites.iter().enumerate() {
        if !rect.contains(*s) {
            return Err(PipelineError::BadConfig(format!(
                "site {} outside the working domain",
                k
            )));
        }
    }

    let mut report = VerificationReport::default();
    report.meta("metric", config.metric.clone());
    report.meta("grid", format!("{}x{}", nx, ny));
    report.meta(
        "domain",
        format!(
            "{} {} {} {}",
            sig12(rect.x0),
            sig12(rect.y0),
            sig12(rect.x1),
            sig12(rect.y1)
        ),
    );
    report.meta("seed", config.seed.to_string());
    report.meta("sites", sites.len().to_string());
    report.meta(
        "site-source",
        match sites.provenance {
            SiteProvenance::Random => "random",
            SiteProvenance::Net => "net",
            SiteProvenance::Explicit => "explicit",
        },
    );
    let gamma = field.anisotropy_bound();
    report.meta_f64("gamma-nodal", gamma);

    // Labels: front propagation, cross-checked against brute force when the
    // budget allows. The brute-force grid is authoritative whenever it was
    // computed, so orphan geometry survives even if the fronts cannot
    // represent it.
    let fp = compute_labels_frontprop(&field, &sites, grid)?;
    report.meta("front-max-visits", fp.max_visits.to_string());
    let cost = grid.len().saturating_mul(sites.len());
    let do_oracle = config.force_oracle || cost <= ORACLE_COST_BUDGET;
    let lg: LabelGrid;
    if do_oracle {
        let bf = compute_labels_bruteforce(&field, &sites, grid)?;
        if selected("oracle-crosscheck") {
            let mismatches = (0..grid.len())
                .filter(|&i| !bf.tie[i] && bf.label[i] != fp.label[i])
                .count();
            report.check(
                "oracle-crosscheck",
                mismatches == 0,
                format!("{} label mismatches on non-tie cells", mismatches),
            );
        } else {
            report.skip("oracle-crosscheck", "not selected");
        }
        lg = bf;
    } else {
        report.skip("oracle-crosscheck", "instance above cost budget");
        lg = fp;
    }

    let mut pd = extract_primal(&lg);
    refine_vertices(&mut pd, &field, &sites)?;

    if selected("site-interior") {
        let mut bad = Vec::new();
        for (k, s) in sites.sites.iter().enumerate() {
            let (i, j) = grid.cell_of(*s);
            let mut ok = pd.label[grid.index(i, j)] == k as u32;
            for (di, dj) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                if ni < 0 || nj < 0 || ni >= nx as isize || nj >= ny as isize {
                    ok = false;
                    continue;
                }
                ok &= pd.label[grid.index(ni as usize, nj as usize)] == k as u32;
            }
            if !ok {
                bad.push(k);
            }
        }
        report.check(
            "site-interior",
            bad.is_empty(),
            format!("sites without an interior own-label neighborhood: {:?}", bad),
        );
    } else {
        report.skip("site-interior", "not selected");
    }

    let mut unsupported_premise = false;
    if selected("orphans") {
        match detect_orphans(&pd, &sites) {
            Ok(orphans) if orphans.is_empty() => {
                report.pass("orphans", "0 orphan components");
            }
            Ok(orphans) => {
                unsupported_premise = true;
                let detail: Vec<String> = orphans
                    .iter()
                    .map(|(s, comps)| format!("site {} has {} orphan(s)", s, comps.len()))
                    .collect();
                report.fail("orphans", detail.join("; "));
            }
            Err(e) => {
                unsupported_premise = true;
                report.fail("orphans", e.to_string());
            }
        }
    } else {
        report.skip("orphans", "not selected");
    }

    if selected("simply-connected") {
        let sc = check_region_simply_connected(&pd);
        let holes: Vec<usize> = (0..sc.len()).filter(|&k| !sc[k]).collect();
        report.check(
            "simply-connected",
            holes.is_empty(),
            format!("regions with holes: {:?}", holes),
        );
    } else {
        report.skip("simply-connected", "not selected");
    }

    if selected("edges-connected") {
        let ec = check_edges_connected(&pd);
        let split: Vec<(u32, u32)> = ec
            .iter()
            .filter(|&(_, &ok)| !ok)
            .map(|(&k, _)| k)
            .collect();
        report.check(
            "edges-connected",
            split.is_empty(),
            format!("multi-component interfaces: {:?}", split),
        );
    } else {
        report.skip("edges-connected", "not selected");
    }

    if selected("vertices-bounded") {
        let margin = 2.0 * grid.dx().max(grid.dy());
        report.check(
            "vertices-bounded",
            check_vertices_bounded(&pd, margin),
            format!("margin {}", sig12(margin)),
        );
    } else {
        report.skip("vertices-bounded", "not selected");
    }

    if selected("degenerate-interfaces") {
        report.check(
            "degenerate-interfaces",
            pd.degenerate_pairs.is_empty(),
            format!("tie blobs for pairs: {:?}", pd.degenerate_pairs),
        );
    } else {
        report.skip("degenerate-interfaces", "not selected");
    }

    let dm = build_dual(&pd, &sites);
    let tm = build_trimesh(&dm);
    if unsupported_premise {
        report.meta("unsupported-premise", "true");
    }

    if selected("dual-structure") {
        let detail: Vec<String> = dm.issues.iter().map(|i| i.to_string()).collect();
        report.check("dual-structure", dm.issues.is_empty(), detail.join("; "));
    } else {
        report.skip("dual-structure", "not selected");
    }

    let hull = crate::geometry::convex_hull(&sites.sites)
        .map_err(|e| PipelineError::BadConfig(e.to_string()))?;
    if selected("colinear-chain") {
        if hull.colinear {
            let mut expect = colinear_chain(&sites.sites);
            expect.sort_unstable();
            let mut got = dm.edges.clone();
            got.sort_unstable();
            report.check(
                "colinear-chain",
                got == expect,
                format!("expected {:?}, got {:?}", expect, got),
            );
        } else {
            report.skip("colinear-chain", "sites not colinear");
        }
    } else {
        report.skip("colinear-chain", "not selected");
    }

    if selected("ece") {
        let ece = check_ece(&field, &dm, grid.dx().max(grid.dy()))?;
        let detail = format!(
            "{} faces, {} violations, {} marginal, {} low-confidence",
            ece.faces_checked,
            ece.violations.len(),
            ece.marginal.len(),
            ece.low_confidence.len()
        );
        let detail = if ece.violations.is_empty() {
            detail
        } else {
            format!("{}; first: face {} contains site {}", detail, ece.violations[0].0, ece.violations[0].1)
        };
        report.check("ece", ece.violations.is_empty(), detail);
    } else {
        report.skip("ece", "not selected");
    }

    let deg = check_nondegenerate(&dm, rect.area());
    if selected("nondegenerate") {
        report.check(
            "nondegenerate",
            deg.tiny_faces.is_empty(),
            format!("tiny faces: {:?}", deg.tiny_faces),
        );
    } else {
        report.skip("nondegenerate", "not selected");
    }
    if selected("convexity") {
        report.check(
            "convexity",
            deg.nonconvex_faces.is_empty(),
            format!("non-convex faces: {:?}", deg.nonconvex_faces),
        );
    } else {
        report.skip("convexity", "not selected");
    }

    if selected("boundary-hull") {
        match check_boundary_equals_hull(&dm)?.matches {
            None => report.skip("boundary-hull", "colinear sites"),
            Some(ok) => {
                let rep = check_boundary_equals_hull(&dm)?;
                report.check(
                    "boundary-hull",
                    ok,
                    format!(
                        "missing {:?}, extra {:?}",
                        rep.missing_from_boundary, rep.extra_in_boundary
                    ),
                );
            }
        }
    } else {
        report.skip("boundary-hull", "not selected");
    }

    if selected("embedding") {
        let emb = check_embedding(&dm)?;
        report.check(
            "embedding",
            emb.crossings.is_empty() && emb.bad_probes.is_empty(),
            format!(
                "{} crossings, {} bad probes of {}",
                emb.crossings.len(),
                emb.bad_probes.len(),
                emb.probes_used
            ),
        );
    } else {
        report.skip("embedding", "not selected");
    }

    if selected("foldovers") {
        let folds = detect_foldovers(&tm);
        report.check(
            "foldovers",
            folds.is_empty(),
            format!("folded edges: {:?}", folds),
        );
    } else {
        report.skip("foldovers", "not selected");
    }

    if selected("indices") {
        if tm.triangles.is_empty() {
            report.skip("indices", "no faces");
        } else {
            // A corrupt complex (for example from a pinched region) shows up
            // as a non-manifold rotation; report it as a failed check rather
            // than aborting the run.
            match check_index_sum(&tm, 5) {
                Ok(reps) => {
                    let totals: Vec<i64> = reps.iter().map(|r| r.total).collect();
                    let all_two = totals.iter().all(|&t| t == 2);
                    let faces_nonpos = reps
                        .iter()
                        .all(|r| r.face_indices.iter().all(|&i| i <= 0));
                    report.check(
                        "indices",
                        all_two && faces_nonpos,
                        format!("totals over 5 directions: {:?}", totals),
                    );
                }
                Err(VerifyError::NonManifold(v)) => {
                    report.fail("indices", format!("mesh is non-manifold at vertex {}", v));
                }
                Err(e) => return Err(e.into()),
            }
        }
    } else {
        report.skip("indices", "not selected");
    }

    // Euler characteristic as context; a disk complex gives 1.
    report.meta("euler", dm.euler_characteristic().to_string());

    if selected("eps-sigma-gate") {
        if sites.provenance == SiteProvenance::Net {
            let eps = net_epsilon(&field, &sites, grid)?;
            report.meta_f64("epsilon", eps);
            match config.sigma {
                Some(sigma) => {
                    let product = eps * sigma;
                    report.check(
                        "eps-sigma-gate",
                        product <= EPS_SIGMA_GATE,
                        format!("eps*sigma = {} vs {}", sig12(product), sig12(EPS_SIGMA_GATE)),
                    );
                }
                None => report.skip("eps-sigma-gate", "sigma not supplied"),
            }
        } else {
            report.skip("eps-sigma-gate", "sites are not a net");
        }
    } else {
        report.skip("eps-sigma-gate", "not selected");
    }

    let svg = render_svg(&pd, Some(&dm));
    let ok = !report.failed();
    Ok(RunArtifacts {
        report,
        svg,
        labels_text: lg.to_text(),
        mesh_text: tm.to_text(),
        ok,
    })
}
