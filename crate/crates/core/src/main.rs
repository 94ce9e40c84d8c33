//! `avd`: build an anisotropic Voronoi diagram, extract its dual mesh, run
//! the structural checks, and emit SVG / report / dump artifacts.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use aniso_voronoi::pipeline::{run, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "avd", about = "anisotropic Voronoi diagrams and their dual meshes")]
struct Cli {
    /// Builtin metric spec ("identity", "diag:4,1", "swirl:1", "sine:3,5",
    /// "pinch:cx,cy,r,delta") or "file:PATH" for a metric grid file.
    #[arg(long)]
    metric: Option<String>,
    /// Label grid resolution, e.g. 256x256.
    #[arg(long)]
    grid: Option<String>,
    /// Working-domain inflation factor (>= 1).
    #[arg(long)]
    inflate: Option<f64>,
    /// Site source: random:N | net:N | net-eps:E | file:PATH.
    #[arg(long)]
    sites: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Metric variation constant for the eps*sigma gate (user-supplied).
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    out_svg: Option<PathBuf>,
    #[arg(long)]
    out_report: Option<PathBuf>,
    /// Comma-separated check names, or "all".
    #[arg(long)]
    checks: Option<String>,
    /// Force the brute-force label cross-check regardless of instance size.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    dump_labels: Option<PathBuf>,
    #[arg(long)]
    dump_mesh: Option<PathBuf>,
    /// key=value config file mirroring the flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("bad grid '{}': expected NXxNY", s))?;
    let nx = a.trim().parse().map_err(|e| format!("bad grid '{}': {}", s, e))?;
    let ny = b.trim().parse().map_err(|e| format!("bad grid '{}': {}", s, e))?;
    Ok((nx, ny))
}

fn load_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))?;
    let mut map = BTreeMap::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), ln + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn build_config(cli: &Cli) -> Result<RunConfig, String> {
    let file = match &cli.config {
        Some(p) => load_config_file(p)?,
        None => BTreeMap::new(),
    };
    let get = |key: &str| file.get(key).cloned();
    let mut cfg = RunConfig::default();

    if let Some(m) = cli.metric.clone().or_else(|| get("metric")) {
        cfg.metric = m;
    }
    if let Some(g) = cli.grid.clone().or_else(|| get("grid")) {
        cfg.grid = parse_grid(&g)?;
    }
    if let Some(f) = cli
        .inflate
        .map(Ok)
        .or_else(|| get("inflate").map(|v| v.parse().map_err(|e| format!("bad inflate: {}", e))))
    {
        cfg.inflate = f?;
    }
    if let Some(s) = cli.sites.clone().or_else(|| get("sites")) {
        cfg.sites = s;
    }
    if let Some(s) = cli
        .seed
        .map(Ok)
        .or_else(|| get("seed").map(|v| v.parse().map_err(|e| format!("bad seed: {}", e))))
    {
        cfg.seed = s?;
    }
    if let Some(s) = cli
        .sigma
        .map(Ok)
        .or_else(|| get("sigma").map(|v| v.parse().map_err(|e| format!("bad sigma: {}", e))))
    {
        cfg.sigma = Some(s?);
    }
    if let Some(c) = cli.checks.clone().or_else(|| get("checks")) {
        if c != "all" {
            cfg.checks = Some(c.split(',').map(|s| s.trim().to_string()).collect());
        }
    }
    cfg.force_oracle = cli.oracle || get("oracle").map_or(false, |v| v == "true" || v == "1");
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("avd: {}", e);
            return ExitCode::from(2);
        }
    };
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("avd: {}", e);
            return ExitCode::from(2);
        }
    };

    let write = |path: &Option<PathBuf>, content: &str| -> Result<(), String> {
        if let Some(p) = path {
            std::fs::write(p, content).map_err(|e| format!("{}: {}", p.display(), e))?;
        }
        Ok(())
    };
    let report_text = out.report.to_text();
    let io = write(&cli.out_svg, &out.svg)
        .and_then(|_| write(&cli.out_report, &report_text))
        .and_then(|_| write(&cli.dump_labels, &out.labels_text))
        .and_then(|_| write(&cli.dump_mesh, &out.mesh_text));
    if let Err(e) = io {
        eprintln!("avd: {}", e);
        return ExitCode::from(2);
    }
    if cli.out_report.is_none() {
        print!("{}", report_text);
    }
    if out.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
