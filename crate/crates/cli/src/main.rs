//! Command-line front end: parse a problem file, run the requested
//! analysis, print a deterministic plain-text report, and optionally write
//! CSV next to it.
//!
//! Exit codes: 0 on success — verdicts like `fails` or a refused comparison
//! are results, not errors; 2 on unusable input (unparseable files, bad
//! flags, points outside the region); 3 when the numerics cannot certify an
//! answer at a directly requested point (degenerate corner, set-valued
//! boundary normal).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pareto_tame_core::asymptotics::{
    estimate_limit_set, stationary_values, AsymptoticsError, LimitEstimate, LimitMode,
    LimitOptions, ProbePath,
};
use pareto_tame_core::existence::{
    condition_sufficiency, equivalence_harness, inclusion_existence,
    restricted_inclusion_existence,
};
use pareto_tame_core::feasible::FeasibleError;
use pareto_tame_core::sections::{
    descent_chain, front, index_set, section_sample, GridSpec, SectionParams, SectionsError,
    SublevelSet,
};
use pareto_tame_core::stationarity::{
    nu, nu_restricted, nu_sweep, tangency, tangency_sweep, NuOptions, StationarityError,
};
use pareto_tame_core::{Region, DEFAULT_TOL};

use pareto_tame_cli::fixtures;
use pareto_tame_cli::report;
use pareto_tame_cli::problem::{parse_floats, parse_problem, parse_resolution, Problem};
use pareto_tame_cli::report::{fmt12, fmt_point, heading, line};

/// Step budget of the `descent-chain` command. Each step pins one objective
/// component at its sampled minimum for good, so anything beyond the number
/// of components is slack for tolerance-sized wobble.
const DESCENT_BUDGET: usize = 64;

/// Residuals, tangency certificates, sampled limit sets, and existence
/// checks for nonsmooth vector-optimization problem files.
#[derive(Parser)]
#[command(name = "pareto-tame", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Problem file to analyze
    file: PathBuf,

    /// Directory to receive CSV output (created if missing)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Membership / verdict tolerance, overriding the file's [tolerances]
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,

    /// Grid window override: "lo1,hi1,lo2,hi2,…", one pair per axis
    #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
    window: Option<String>,

    /// Grid resolution override: per-axis CSV, or one value for all axes
    #[arg(long, value_name = "INT[,INT…]")]
    res: Option<String>,

    /// Objective selection override: 1-based components, comma-separated
    #[arg(long, value_name = "CSV")]
    index_set: Option<String>,

    /// Only use the probe with this label (repeatable)
    #[arg(long, value_name = "LABEL")]
    probe: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Stationarity residual at a point, or swept over the grid
    Rabier {
        #[command(flatten)]
        common: Common,
        /// Evaluate at this point ("c1,c2,…") instead of sweeping
        #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
        at: Option<String>,
        /// Selected objectives over the anchor's sublevel set
        #[arg(long)]
        restricted: bool,
    },
    /// Tangency-variety membership at a point, or swept over the grid
    Tangency {
        #[command(flatten)]
        common: Common,
        /// Evaluate at this point ("c1,c2,…") instead of sweeping
        #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
        at: Option<String>,
        /// Selected objectives over the anchor's sublevel set
        #[arg(long)]
        restricted: bool,
    },
    /// Image-section samples and the boundedness-below verdict
    Sections {
        #[command(flatten)]
        common: Common,
    },
    /// Objective components constant on the sampled sublevel set
    IndexSet {
        #[command(flatten)]
        common: Common,
    },
    /// Grid descent through successively smaller sublevel sets
    DescentChain {
        #[command(flatten)]
        common: Common,
    },
    /// Brute-force weak and strong optima of the sampled grid
    Front {
        #[command(flatten)]
        common: Common,
    },
    /// Asymptotic limit-set estimates along the declared probes
    LimitSets {
        #[command(flatten)]
        common: Common,
        /// Selected objectives over the anchor's sublevel set
        #[arg(long)]
        restricted: bool,
    },
    /// Existence and equivalence checks (4.4, 5.1, 5.4, 5.3c)
    Check {
        #[command(flatten)]
        common: Common,
        /// Which check to run: 4.4, 5.1, 5.4, or 5.3c
        #[arg(long, value_name = "ID")]
        theorem: String,
    },
    /// The four asymptotic conditions side by side (same as --theorem 4.4)
    Equivalence {
        #[command(flatten)]
        common: Common,
    },
    /// Every analysis of one problem file, in a fixed order
    Report {
        #[command(flatten)]
        common: Common,
    },
    /// List the bundled example problems, or write them out as files
    Fixtures {
        /// Write each bundled problem file into this directory
        #[arg(long, value_name = "DIR")]
        write: Option<PathBuf>,
    },
}

// ---------------------------------------------------------------------------
// Failure → exit code

enum Failure {
    /// Unusable input: exit 2.
    Input(String),
    /// The numerics could not certify an answer where one was directly
    /// requested: exit 3.
    Numerical(String),
}

impl Failure {
    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

fn from_feasible(e: &FeasibleError) -> Failure {
    match e {
        FeasibleError::DegenerateCorner { .. }
        | FeasibleError::NonsmoothActiveConstraint { .. } => Failure::Numerical(e.to_string()),
        _ => Failure::Input(e.to_string()),
    }
}

fn from_sections(e: &SectionsError) -> Failure {
    match e {
        SectionsError::Feasible(f) => from_feasible(f),
        _ => Failure::Input(e.to_string()),
    }
}

fn from_stationarity(e: &StationarityError) -> Failure {
    match e {
        StationarityError::Feasible(f) => from_feasible(f),
        StationarityError::Sections(s) => from_sections(s),
        _ => Failure::Input(e.to_string()),
    }
}

fn from_asymptotics(e: &AsymptoticsError) -> Failure {
    match e {
        AsymptoticsError::Feasible(f) => from_feasible(f),
        AsymptoticsError::Stationarity(s) => from_stationarity(s),
        AsymptoticsError::Sections(s) => from_sections(s),
        _ => Failure::Input(e.to_string()),
    }
}

fn from_csv(path: &Path, e: csv::Error) -> Failure {
    Failure::Input(format!("writing {}: {e}", path.display()))
}

// ---------------------------------------------------------------------------
// Loaded context

/// A parsed problem with every command-line override already applied.
struct Ctx {
    problem: Problem,
    tol: f64,
    grid: GridSpec,
    /// 0-based selected objective components.
    index: Vec<usize>,
    probes: Vec<ProbePath>,
    /// Labels aligned with `probes` (for rendering).
    labels: Vec<String>,
    out: Option<PathBuf>,
    /// Per-stage resolution for the section sampler when --res was given.
    sections_res: Option<usize>,
}

impl Ctx {
    fn nu_opts(&self) -> NuOptions {
        NuOptions {
            tol: self.tol,
            ..NuOptions::default()
        }
    }

    fn limit_opts(&self) -> LimitOptions {
        LimitOptions {
            membership_tol: self.tol,
            sublevel_slack: self.tol,
            trend_tol: self.tol,
            nu: self.nu_opts(),
            ..LimitOptions::default()
        }
    }

    fn section_params(&self) -> SectionParams {
        let mut p = SectionParams {
            tol: self.tol,
            ..SectionParams::default()
        };
        if let Some(res) = self.sections_res {
            p.resolution = res;
        }
        p
    }
}

fn load(common: &Common) -> Result<Ctx, Failure> {
    let text = std::fs::read_to_string(&common.file)
        .map_err(|e| Failure::Input(format!("reading {}: {e}", common.file.display())))?;
    let problem = parse_problem(&common.file.display().to_string(), &text)
        .map_err(|e| Failure::Input(e.to_string()))?;

    let tol = common.tol.unwrap_or_else(|| problem.tol.unwrap_or(DEFAULT_TOL));
    if !(tol.is_finite() && tol > 0.0 && tol < 1.0) {
        return Err(Failure::Input(format!(
            "tolerance must be in (0, 1), got {tol}"
        )));
    }

    let index = match &common.index_set {
        Some(s) => parse_index_flag(s, problem.objectives.len())?,
        None => problem.index_set.clone(),
    };

    let mut grid = problem.grid_or_default();
    if let Some(w) = &common.window {
        grid.window = parse_window_flag(w, problem.dim)?;
    }
    let mut sections_res = None;
    if let Some(r) = &common.res {
        let vals = parse_floats(r).map_err(|m| Failure::Input(format!("--res: {m}")))?;
        let res = parse_resolution(&vals, problem.dim)
            .map_err(|m| Failure::Input(format!("--res: {m}")))?;
        sections_res = Some(res[0]);
        grid.resolution = res;
    }

    if !problem.region.contains(&problem.x0, tol) {
        return Err(Failure::Input(format!(
            "anchor {} is not in the region (tolerance {tol:e})",
            fmt_point(&problem.x0)
        )));
    }

    let (probes, labels) = if common.probe.is_empty() {
        (
            problem.paths(),
            problem.probes.iter().map(|n| n.label.clone()).collect(),
        )
    } else {
        let probes = problem
            .selected_paths(&common.probe)
            .map_err(Failure::Input)?;
        (probes, common.probe.clone())
    };

    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::Input(format!("creating {}: {e}", dir.display())))?;
    }

    Ok(Ctx {
        problem,
        tol,
        grid,
        index,
        probes,
        labels,
        out: common.out.clone(),
        sections_res,
    })
}

fn parse_index_flag(s: &str, components: usize) -> Result<Vec<usize>, Failure> {
    let vals = parse_floats(s).map_err(|m| Failure::Input(format!("--index-set: {m}")))?;
    let mut out = Vec::new();
    for v in vals {
        if v.fract() != 0.0 || v < 1.0 || v > components as f64 {
            return Err(Failure::Input(format!(
                "--index-set: component {v} is not one of 1..={components}"
            )));
        }
        out.push(v as usize - 1);
    }
    if out.is_empty() {
        return Err(Failure::Input(
            "--index-set: at least one component is required".to_string(),
        ));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn parse_window_flag(s: &str, dim: usize) -> Result<Vec<(f64, f64)>, Failure> {
    let vals = parse_floats(s).map_err(|m| Failure::Input(format!("--window: {m}")))?;
    if vals.len() != 2 * dim {
        return Err(Failure::Input(format!(
            "--window: expected {} values (lo,hi per axis), got {}",
            2 * dim,
            vals.len()
        )));
    }
    let mut out = Vec::with_capacity(dim);
    for pair in vals.chunks(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Failure::Input(format!(
                "--window: [{lo}, {hi}] is not an ordered finite interval"
            )));
        }
        out.push((lo, hi));
    }
    Ok(out)
}

fn parse_point(s: &str, dim: usize) -> Result<Vec<f64>, Failure> {
    let vals = parse_floats(s).map_err(|m| Failure::Input(format!("--at: {m}")))?;
    if vals.len() != dim {
        return Err(Failure::Input(format!(
            "--at: expected {dim} coordinates, got {}",
            vals.len()
        )));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Failure::Input(
            "--at: coordinates must be finite".to_string(),
        ));
    }
    Ok(vals)
}

// ---------------------------------------------------------------------------
// Commands

fn cmd_rabier(ctx: &Ctx, at: Option<&str>, restricted: bool) -> Result<String, Failure> {
    let p = &ctx.problem;
    let opts = ctx.nu_opts();
    let mut buf = String::new();
    let tag = if restricted { " restricted" } else { "" };
    heading(&mut buf, &format!("rabier{tag} {}", p.name));

    match at {
        Some(s) => {
            let x = parse_point(s, p.dim)?;
            let v = if restricted {
                nu_restricted(&p.objectives, &ctx.index, &p.region, &p.x0, &x, &opts)
            } else {
                nu(&p.objectives, &p.region, &x, &opts)
            }
            .map_err(|e| from_stationarity(&e))?;
            report::render_nu(&mut buf, &x, &v);
        }
        None => {
            let (points, results) = if restricted {
                let sub = SublevelSet::at_point(&p.objectives, &p.region, &p.x0, ctx.tol)
                    .map_err(|e| from_sections(&e))?;
                let fi = p.objectives.restrict(&ctx.index);
                let points = sub.grid(&ctx.grid.window, &ctx.grid.resolution);
                let results = nu_sweep(&fi, &sub, &points, &opts);
                (points, results)
            } else {
                let points = p.region.grid(&ctx.grid.window, &ctx.grid.resolution);
                let results = nu_sweep(&p.objectives, &p.region, &points, &opts);
                (points, results)
            };
            report::render_nu_sweep(&mut buf, &points, &results, ctx.tol);
            if let Some(dir) = &ctx.out {
                let name = if restricted {
                    "sweep_restricted.csv"
                } else {
                    "sweep.csv"
                };
                let path = dir.join(name);
                report::write_nu_sweep_csv(&path, &points, &results)
                    .map_err(|e| from_csv(&path, e))?;
            }
        }
    }
    Ok(buf)
}

fn cmd_tangency(ctx: &Ctx, at: Option<&str>, restricted: bool) -> Result<String, Failure> {
    let p = &ctx.problem;
    let opts = ctx.nu_opts();
    let mut buf = String::new();
    let tag = if restricted { " restricted" } else { "" };
    heading(&mut buf, &format!("tangency{tag} {}", p.name));

    // The restricted variant tests the selected objectives over the
    // anchor's sublevel set; build that pair once either way.
    let restricted_data = if restricted {
        let sub = SublevelSet::at_point(&p.objectives, &p.region, &p.x0, ctx.tol)
            .map_err(|e| from_sections(&e))?;
        Some((p.objectives.restrict(&ctx.index), sub))
    } else {
        None
    };

    match at {
        Some(s) => {
            let x = parse_point(s, p.dim)?;
            let c = match &restricted_data {
                Some((fi, sub)) => tangency(fi, sub, &x, &opts),
                None => tangency(&p.objectives, &p.region, &x, &opts),
            }
            .map_err(|e| from_stationarity(&e))?;
            report::render_tangency(&mut buf, &x, &c);
        }
        None => {
            let (points, results) = match &restricted_data {
                Some((fi, sub)) => {
                    let points = sub.grid(&ctx.grid.window, &ctx.grid.resolution);
                    let results = tangency_sweep(fi, sub, &points, &opts);
                    (points, results)
                }
                None => {
                    let points = p.region.grid(&ctx.grid.window, &ctx.grid.resolution);
                    let results = tangency_sweep(&p.objectives, &p.region, &points, &opts);
                    (points, results)
                }
            };
            report::render_tangency_sweep(&mut buf, &points, &results);
            if let Some(dir) = &ctx.out {
                let name = if restricted {
                    "tangency_restricted.csv"
                } else {
                    "tangency.csv"
                };
                let path = dir.join(name);
                report::write_tangency_sweep_csv(&path, &points, &results)
                    .map_err(|e| from_csv(&path, e))?;
            }
        }
    }
    Ok(buf)
}

fn cmd_sections(ctx: &Ctx) -> Result<String, Failure> {
    let p = &ctx.problem;
    let r = section_sample(
        &p.objectives,
        &ctx.index,
        &p.region,
        &p.x0,
        &ctx.section_params(),
    )
    .map_err(|e| from_sections(&e))?;
    let mut buf = String::new();
    heading(&mut buf, &format!("sections {}", p.name));
    report::render_section(&mut buf, &r);
    if let Some(dir) = &ctx.out {
        let path = dir.join("sections.csv");
        report::write_sections_csv(&path, &r).map_err(|e| from_csv(&path, e))?;
    }
    Ok(buf)
}

fn cmd_index_set(ctx: &Ctx) -> Result<String, Failure> {
    let p = &ctx.problem;
    let r = index_set(&p.objectives, &p.region, &p.x0, &ctx.grid, ctx.tol)
        .map_err(|e| from_sections(&e))?;
    let mut buf = String::new();
    heading(&mut buf, &format!("index-set {}", p.name));
    report::render_index_report(&mut buf, &r);
    Ok(buf)
}

fn cmd_descent(ctx: &Ctx) -> Result<String, Failure> {
    let p = &ctx.problem;
    let t = descent_chain(
        &p.objectives,
        &p.region,
        &p.x0,
        &ctx.grid,
        ctx.tol,
        DESCENT_BUDGET,
    )
    .map_err(|e| from_sections(&e))?;
    let mut buf = String::new();
    heading(&mut buf, &format!("descent-chain {}", p.name));
    report::render_descent(&mut buf, &t);
    Ok(buf)
}

fn cmd_front(ctx: &Ctx) -> Result<String, Failure> {
    let p = &ctx.problem;
    let r = front(&p.objectives, &p.region, &ctx.grid);
    let mut buf = String::new();
    heading(&mut buf, &format!("front {}", p.name));
    report::render_front_summary(&mut buf, &r);
    if let Some(dir) = &ctx.out {
        let path = dir.join("front.csv");
        report::write_front_csv(&path, &r, p.dim, p.objectives.len())
            .map_err(|e| from_csv(&path, e))?;
    }
    Ok(buf)
}

fn cmd_limit_sets(ctx: &Ctx, restricted: bool) -> Result<String, Failure> {
    let p = &ctx.problem;
    let opts = ctx.limit_opts();
    let modes = [LimitMode::Nu, LimitMode::ScaledNu, LimitMode::Tangency];
    let mut estimates: Vec<(LimitMode, LimitEstimate)> = Vec::new();

    if restricted {
        let fi = p.objectives.restrict(&ctx.index);
        let sub = SublevelSet::at_point(&p.objectives, &p.region, &p.x0, ctx.tol)
            .map_err(|e| from_sections(&e))?;
        let y0 = fi.eval(&p.x0);
        let all: Vec<usize> = (0..fi.len()).collect();
        for mode in modes {
            let e = estimate_limit_set(&fi, &all, &sub, &y0, &ctx.probes, mode, &opts)
                .map_err(|e| from_asymptotics(&e))?;
            estimates.push((mode, e));
        }
    } else {
        let y0 = p.objectives.eval(&p.x0);
        for mode in modes {
            let e = estimate_limit_set(
                &p.objectives,
                &ctx.index,
                &p.region,
                &y0,
                &ctx.probes,
                mode,
                &opts,
            )
            .map_err(|e| from_asymptotics(&e))?;
            estimates.push((mode, e));
        }
    }

    let mut buf = String::new();
    let tag = if restricted { " restricted" } else { "" };
    heading(&mut buf, &format!("limit-sets{tag} {}", p.name));
    for (i, (mode, e)) in estimates.iter().enumerate() {
        if i > 0 {
            buf.push('\n');
        }
        report::render_limit_estimate(&mut buf, *mode, &ctx.labels, e);
    }
    if let Some(dir) = &ctx.out {
        let name = if restricted {
            "limits_restricted.csv"
        } else {
            "limits.csv"
        };
        let path = dir.join(name);
        let rows: Vec<(LimitMode, &LimitEstimate)> =
            estimates.iter().map(|(m, e)| (*m, e)).collect();
        report::write_limits_csv(&path, &rows, &ctx.labels).map_err(|e| from_csv(&path, e))?;
    }
    Ok(buf)
}

fn cmd_stationary(ctx: &Ctx) -> Result<String, Failure> {
    let p = &ctx.problem;
    let y0 = p.objectives.eval(&p.x0);
    let sv = stationary_values(
        &p.objectives,
        &ctx.index,
        &p.region,
        &y0,
        &ctx.grid,
        &ctx.limit_opts(),
    )
    .map_err(|e| from_asymptotics(&e))?;
    let mut buf = String::new();
    heading(&mut buf, &format!("stationary {}", p.name));
    report::render_stationary(&mut buf, &sv);
    if let Some(dir) = &ctx.out {
        let path = dir.join("stationary.csv");
        report::write_stationary_csv(&path, &sv, ctx.index.len())
            .map_err(|e| from_csv(&path, e))?;
    }
    Ok(buf)
}

fn cmd_check(ctx: &Ctx, theorem: &str) -> Result<String, Failure> {
    let p = &ctx.problem;
    let opts = ctx.limit_opts();
    let sp = ctx.section_params();
    let mut buf = String::new();
    match theorem {
        "5.1" => {
            let r = inclusion_existence(
                &p.objectives,
                &ctx.index,
                &p.region,
                &p.x0,
                &ctx.probes,
                &ctx.grid,
                &sp,
                &opts,
            )
            .map_err(|e| from_asymptotics(&e))?;
            heading(&mut buf, &format!("check 5.1 {}", p.name));
            report::render_existence(&mut buf, &ctx.labels, &r);
        }
        "5.4" => {
            let r = restricted_inclusion_existence(
                &p.objectives,
                &ctx.index,
                &p.region,
                &p.x0,
                &ctx.probes,
                &ctx.grid,
                &sp,
                &opts,
            )
            .map_err(|e| from_asymptotics(&e))?;
            heading(&mut buf, &format!("check 5.4 {}", p.name));
            report::render_existence(&mut buf, &ctx.labels, &r);
        }
        "4.4" => {
            let r = equivalence_harness(
                &p.objectives,
                &ctx.index,
                &p.region,
                &p.x0,
                &ctx.probes,
                &sp,
                &opts,
            )
            .map_err(|e| from_asymptotics(&e))?;
            heading(&mut buf, &format!("check 4.4 {}", p.name));
            report::render_equivalence(&mut buf, &ctx.labels, &r);
        }
        "5.3c" => {
            let r = condition_sufficiency(
                &p.objectives,
                &ctx.index,
                &p.region,
                &p.x0,
                &ctx.probes,
                &sp,
                &opts,
            )
            .map_err(|e| from_asymptotics(&e))?;
            heading(&mut buf, &format!("check 5.3c {}", p.name));
            report::render_sufficiency(&mut buf, &ctx.labels, &r);
        }
        other => {
            return Err(Failure::Input(format!(
                "unknown --theorem `{other}` (expected 4.4, 5.1, 5.4, or 5.3c)"
            )))
        }
    }
    Ok(buf)
}

fn cmd_equivalence(ctx: &Ctx) -> Result<String, Failure> {
    let p = &ctx.problem;
    let r = equivalence_harness(
        &p.objectives,
        &ctx.index,
        &p.region,
        &p.x0,
        &ctx.probes,
        &ctx.section_params(),
        &ctx.limit_opts(),
    )
    .map_err(|e| from_asymptotics(&e))?;
    let mut buf = String::new();
    heading(&mut buf, &format!("equivalence {}", p.name));
    report::render_equivalence(&mut buf, &ctx.labels, &r);
    Ok(buf)
}

fn cmd_report(ctx: &Ctx) -> Result<String, Failure> {
    let p = &ctx.problem;

    let mut summary = String::new();
    heading(&mut summary, &format!("problem {}", p.name));
    line(&mut summary, "dimension", p.dim.to_string());
    line(&mut summary, "objectives", p.objectives.len().to_string());
    line(&mut summary, "anchor", fmt_point(&p.x0));
    line(&mut summary, "index_set", one_based(&ctx.index));
    line(
        &mut summary,
        "probes",
        if ctx.labels.is_empty() {
            "(none)".to_string()
        } else {
            ctx.labels.join(", ")
        },
    );
    line(&mut summary, "grid", grid_text(&ctx.grid));
    line(&mut summary, "tol", fmt12(ctx.tol));

    let parts = vec![
        summary,
        cmd_sections(ctx)?,
        cmd_index_set(ctx)?,
        cmd_descent(ctx)?,
        cmd_front(ctx)?,
        cmd_rabier(ctx, None, false)?,
        cmd_tangency(ctx, None, false)?,
        cmd_rabier(ctx, None, true)?,
        cmd_limit_sets(ctx, false)?,
        cmd_limit_sets(ctx, true)?,
        cmd_stationary(ctx)?,
        cmd_check(ctx, "5.1")?,
        cmd_check(ctx, "5.4")?,
        cmd_check(ctx, "4.4")?,
        cmd_check(ctx, "5.3c")?,
    ];
    Ok(parts.join("\n"))
}

fn cmd_fixtures(write: Option<&Path>) -> Result<String, Failure> {
    let mut buf = String::new();
    heading(&mut buf, "fixtures");
    match write {
        None => {
            for f in fixtures::FIXTURES {
                line(&mut buf, f.name, f.blurb);
            }
        }
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| Failure::Input(format!("creating {}: {e}", dir.display())))?;
            for f in fixtures::FIXTURES {
                let path = dir.join(format!("{}.prob", f.name));
                std::fs::write(&path, f.text)
                    .map_err(|e| Failure::Input(format!("writing {}: {e}", path.display())))?;
                line(&mut buf, f.name, path.display().to_string());
            }
        }
    }
    Ok(buf)
}

// ---------------------------------------------------------------------------
// Small formatting helpers

fn one_based(index: &[usize]) -> String {
    index
        .iter()
        .map(|i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn grid_text(g: &GridSpec) -> String {
    let mut s = String::new();
    for (i, (lo, hi)) in g.window.iter().enumerate() {
        if i > 0 {
            s.push_str(" x ");
        }
        let _ = write!(s, "[{lo}, {hi}]");
    }
    s.push_str(" @ ");
    for (i, r) in g.resolution.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{r}");
    }
    s
}

// ---------------------------------------------------------------------------
// Entry

fn configure_threads() -> Result<(), Failure> {
    match std::env::var("PARETO_TAME_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| {
                Failure::Input(format!(
                    "PARETO_TAME_THREADS must be a positive integer, got `{v}`"
                ))
            })?;
            if n == 0 {
                return Err(Failure::Input(
                    "PARETO_TAME_THREADS must be at least 1".to_string(),
                ));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::Input(format!("thread pool: {e}")))?;
            Ok(())
        }
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(Failure::Input(format!("PARETO_TAME_THREADS: {e}"))),
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Rabier {
            common,
            at,
            restricted,
        } => cmd_rabier(&load(&common)?, at.as_deref(), restricted),
        Command::Tangency {
            common,
            at,
            restricted,
        } => cmd_tangency(&load(&common)?, at.as_deref(), restricted),
        Command::Sections { common } => cmd_sections(&load(&common)?),
        Command::IndexSet { common } => cmd_index_set(&load(&common)?),
        Command::DescentChain { common } => cmd_descent(&load(&common)?),
        Command::Front { common } => cmd_front(&load(&common)?),
        Command::LimitSets { common, restricted } => {
            cmd_limit_sets(&load(&common)?, restricted)
        }
        Command::Check { common, theorem } => cmd_check(&load(&common)?, &theorem),
        Command::Equivalence { common } => cmd_equivalence(&load(&common)?),
        Command::Report { common } => cmd_report(&load(&common)?),
        Command::Fixtures { write } => cmd_fixtures(write.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message());
        return ExitCode::from(f.code());
    }
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
