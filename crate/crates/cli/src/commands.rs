use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use nosecone::model::{
    drag_reduced, frustum_optimize, make_shape, NoseConeGeometry, ShapeKind, ShapeProfile,
};
use nosecone::shooting::{shoot_bisection, shoot_secant, ShootingResult, DEFAULT_SHOOTING_STEP};
use nosecone::similarity::{sweep_f, SweepRow};
use nosecone::transform::{solve_newton_fbp, TmResult, TransformConfig};
use nosecone::ode::DEFAULT_MAX_STEPS;

use crate::args::{
    Command, CompareArgs, Common, Format, RootFinder, RunConfig, ShootArgs, SolveArgs, SweepArgs,
};
use crate::output::{opt_sig, sig, to_csv, to_json};
use crate::CliError;

const DRAG_QUADRATURE_STEP: f64 = 1e-4;
const FRUSTUM_TOLERANCE: f64 = 1e-10;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn positive(name: &str, value: f64) -> Result<(), CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("{name} > 0 required, got {value}")))
    }
}

fn validate(common: &Common) -> Result<NoseConeGeometry, CliError> {
    positive("r", common.r)?;
    positive("h", common.h)?;
    positive("a* (--astar)", common.a_star)?;
    positive("step", common.step)?;
    Ok(NoseConeGeometry {
        r: common.r,
        h: common.h,
    })
}

fn transform_config(common: &Common) -> TransformConfig {
    TransformConfig {
        a_star: common.a_star,
        step: common.step,
        method: common.method,
        locator: common.locator.into(),
        max_steps: DEFAULT_MAX_STEPS,
    }
}

fn render<R: Serialize, W: Serialize>(
    format: Format,
    config: &RunConfig,
    result: Option<&R>,
    rows: &[W],
    text: impl FnOnce() -> String,
) -> Result<String, CliError> {
    match format {
        Format::Text => {
            let echo = serde_json::to_string(config).map_err(CliError::encode)?;
            Ok(format!("config: {echo}\n{}", text()))
        }
        Format::Json => {
            let rows = if rows.is_empty() { None } else { Some(rows) };
            to_json(config, result, rows)
        }
        Format::Csv => to_csv(config, rows),
    }
}

/// Result of running one subcommand.
#[derive(Debug)]
pub struct Outcome {
    pub rendered: String,
    pub exit_code: i32,
}

pub fn run(command: &Command) -> Result<Outcome, CliError> {
    let (rendered, exit_code) = match command {
        Command::Solve(args) => {
            let report = cmd_solve(args)?;
            if let Some(path) = &args.profile {
                write_file(path, &profile_csv(&report.tm)?)?;
            }
            (report.render(args.common.format)?, 0)
        }
        Command::Shoot(args) => (cmd_shoot(args)?.render(args.common.format)?, 0),
        Command::DragTable(common) => (cmd_drag_table(common)?.render(common.format)?, 0),
        Command::Sweep(args) => {
            let report = cmd_sweep(args)?;
            let ok = report.rows.iter().any(|r| r.status == "ok");
            let code = if ok { 0 } else { crate::EXIT_NUMERICAL };
            (report.render(args.common.format)?, code)
        }
        Command::Compare(args) => (cmd_compare(args)?.render(args.common.format)?, 0),
    };
    Ok(Outcome {
        rendered,
        exit_code,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

// ---------------------------------------------------------------- solve

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub free_boundary: f64,
    pub lambda: f64,
    pub terminal_slope: f64,
    pub last_step: f64,
    pub r_star: f64,
    pub end_abscissa: f64,
    pub k_star: f64,
    pub steps: usize,
    pub rhs_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub x: f64,
    pub y: f64,
    pub dydx: f64,
    pub x_star: f64,
    pub y_star: f64,
    pub dydx_star: f64,
}

pub struct SolveReport {
    pub config: RunConfig,
    pub summary: SolveSummary,
    pub tm: TmResult,
}

impl SolveReport {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let s = &self.summary;
        render(format, &self.config, Some(s), std::slice::from_ref(s), || {
            let mut t = String::new();
            let _ = writeln!(t, "free boundary a     {}", sig(s.free_boundary));
            let _ = writeln!(t, "group parameter     {}", sig(s.lambda));
            let _ = writeln!(t, "terminal slope      {}", sig(s.terminal_slope));
            let _ = writeln!(t, "last step           {}", sig(s.last_step));
            let _ = writeln!(t, "r*                  {}", sig(s.r_star));
            let _ = writeln!(t, "end abscissa        {}", sig(s.end_abscissa));
            let _ = writeln!(t, "k*                  {}", sig(s.k_star));
            let _ = writeln!(t, "steps               {}", s.steps);
            let _ = writeln!(t, "rhs evaluations     {}", s.rhs_evaluations);
            t
        })
    }
}

pub fn cmd_solve(args: &SolveArgs) -> Result<SolveReport, CliError> {
    let geometry = validate(&args.common)?;
    let tm = solve_newton_fbp(geometry, &transform_config(&args.common))?;
    let shape = ShapeProfile::numerical(geometry, tm.solution.clone())?;
    let k_star = drag_reduced(&shape, geometry, args.common.step)?.k_star;
    Ok(SolveReport {
        config: RunConfig::new("solve", &args.common),
        summary: SolveSummary {
            free_boundary: tm.free_boundary,
            lambda: tm.lambda,
            terminal_slope: tm.terminal_slope,
            last_step: tm.last_step,
            r_star: tm.r_star,
            end_abscissa: tm.end_abscissa(),
            k_star,
            steps: tm.steps,
            rhs_evaluations: tm.rhs_evaluations,
        },
        tm,
    })
}

pub fn profile_rows(tm: &TmResult) -> Vec<ProfileRow> {
    tm.solution
        .nodes()
        .zip(tm.auxiliary.nodes())
        .map(|((x, y, dydx), (x_star, y_star, dydx_star))| ProfileRow {
            x,
            y,
            dydx,
            x_star,
            y_star,
            dydx_star,
        })
        .collect()
}

pub fn profile_csv(tm: &TmResult) -> Result<String, CliError> {
    crate::output::csv_table(&profile_rows(tm))
}

// ---------------------------------------------------------------- shoot

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootSummary {
    pub root_finder: String,
    pub free_boundary: f64,
    pub terminal_slope: f64,
    pub iterations: usize,
    pub converged: bool,
    pub rhs_evaluations: usize,
}

#[derive(Serialize)]
struct ShootJson<'a> {
    #[serde(flatten)]
    summary: &'a ShootSummary,
    history: &'a [(f64, f64)],
}

pub struct ShootReport {
    pub config: RunConfig,
    pub summary: ShootSummary,
    pub result: ShootingResult,
}

impl ShootReport {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let s = &self.summary;
        let json = ShootJson {
            summary: s,
            history: &self.result.history,
        };
        let rows = std::slice::from_ref(s);
        match format {
            Format::Json => to_json(&self.config, Some(&json), None::<&[ShootSummary]>),
            _ => render(format, &self.config, Some(s), rows, || {
                let mut t = String::new();
                let _ = writeln!(t, "root finder         {}", s.root_finder);
                let _ = writeln!(t, "free boundary a     {}", sig(s.free_boundary));
                let _ = writeln!(t, "terminal slope      {}", sig(s.terminal_slope));
                let _ = writeln!(t, "iterations          {}", s.iterations);
                let _ = writeln!(t, "converged           {}", s.converged);
                let _ = writeln!(t, "rhs evaluations     {}", s.rhs_evaluations);
                let _ = writeln!(t, "history (a_k, F(a_k)):");
                for (a, f) in &self.result.history {
                    let _ = writeln!(t, "  {}  {}", sig(*a), sig(*f));
                }
                t
            }),
        }
    }
}

fn check_seed(name: &str, a: f64, r: f64) -> Result<(), CliError> {
    if a > 0.0 && a < r {
        Ok(())
    } else {
        Err(usage(format!("{name} must lie in (0, r = {r}), got {a}")))
    }
}

fn run_shoot(
    finder: RootFinder,
    geometry: NoseConeGeometry,
    seeds: &crate::args::Seeds,
    step: f64,
    method: nosecone::Method,
) -> Result<ShootingResult, CliError> {
    Ok(match finder {
        RootFinder::Bisection => {
            check_seed("--a-lo", seeds.a_lo, geometry.r)?;
            check_seed("--a-hi", seeds.a_hi, geometry.r)?;
            shoot_bisection(geometry, seeds.a_lo, seeds.a_hi, step, method)?
        }
        RootFinder::Secant => {
            check_seed("--a0", seeds.a0, geometry.r)?;
            check_seed("--a1", seeds.a1, geometry.r)?;
            if seeds.a0 == seeds.a1 {
                return Err(usage("secant seeds --a0 and --a1 must differ"));
            }
            shoot_secant(geometry, seeds.a0, seeds.a1, step, method)?
        }
    })
}

pub fn cmd_shoot(args: &ShootArgs) -> Result<ShootReport, CliError> {
    let geometry = validate(&args.common)?;
    let step = args.seeds.shoot_step.unwrap_or(DEFAULT_SHOOTING_STEP);
    positive("shoot step", step)?;
    let result = run_shoot(args.root_finder, geometry, &args.seeds, step, args.common.method)?;
    let mut config = RunConfig::new("shoot", &args.common);
    config.root_finder = Some(args.root_finder);
    config.shoot_step = Some(step);
    match args.root_finder {
        RootFinder::Bisection => config.bracket = Some([args.seeds.a_lo, args.seeds.a_hi]),
        RootFinder::Secant => config.secant_seeds = Some([args.seeds.a0, args.seeds.a1]),
    }
    let name = match args.root_finder {
        RootFinder::Bisection => "bisection",
        RootFinder::Secant => "secant",
    };
    Ok(ShootReport {
        config,
        summary: ShootSummary {
            root_finder: name.into(),
            free_boundary: result.free_boundary,
            terminal_slope: result.terminal_slope,
            iterations: result.iterations,
            converged: result.converged,
            rhs_evaluations: result.rhs_evaluations,
        },
        result,
    })
}

// ---------------------------------------------------------------- drag-table

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DragRow {
    pub shape: String,
    pub k_star: Option<f64>,
    pub tip_radius: Option<f64>,
    pub error: Option<String>,
}

pub struct DragTable {
    pub config: RunConfig,
    pub rows: Vec<DragRow>,
}

impl DragTable {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        render(format, &self.config, None::<&()>, &self.rows, || {
            let mut t = format!("{:<26} {:>8} {:>10}\n", "shape", "k*", "tip a");
            for row in &self.rows {
                match (&row.k_star, &row.error) {
                    (Some(k), _) => {
                        let _ = writeln!(
                            t,
                            "{:<26} {:>8.4} {:>10.6}",
                            row.shape,
                            k,
                            row.tip_radius.unwrap_or(0.0)
                        );
                    }
                    (None, err) => {
                        let _ = writeln!(t, "{:<26} {}", row.shape, err.as_deref().unwrap_or("-"));
                    }
                }
            }
            t
        })
    }

    pub fn k_star(&self, shape: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.shape == shape).and_then(|r| r.k_star)
    }
}

fn drag_row(shape: &str, outcome: Result<(f64, f64), nosecone::Error>) -> DragRow {
    match outcome {
        Ok((k, a)) => DragRow {
            shape: shape.into(),
            k_star: Some(k),
            tip_radius: Some(a),
            error: None,
        },
        Err(e) => DragRow {
            shape: shape.into(),
            k_star: None,
            tip_radius: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn cmd_drag_table(common: &Common) -> Result<DragTable, CliError> {
    let geometry = validate(common)?;
    let closed = |kind: ShapeKind| {
        make_shape(kind, geometry, None)
            .and_then(|s| drag_reduced(&s, geometry, DRAG_QUADRATURE_STEP))
            .map(|d| (d.k_star, d.tip_radius))
    };
    let (a_frustum, k_frustum) = frustum_optimize(geometry, FRUSTUM_TOLERANCE);
    let newton = solve_newton_fbp(geometry, &transform_config(common)).and_then(|tm| {
        let a = tm.free_boundary;
        let shape = ShapeProfile::numerical(geometry, tm.solution)?;
        Ok((drag_reduced(&shape, geometry, common.step)?.k_star, a))
    });
    let rows = vec![
        drag_row("hemisphere", closed(ShapeKind::Hemisphere)),
        drag_row("pointed_cone", closed(ShapeKind::PointedCone)),
        drag_row("paraboloid", closed(ShapeKind::Paraboloid)),
        drag_row("optimal_conical_frustum", Ok((k_frustum, a_frustum))),
        drag_row("newton_optimal", newton),
    ];
    Ok(DragTable {
        config: RunConfig::new("drag-table", common),
        rows,
    })
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    pub r: f64,
    pub h: f64,
    pub r_over_h: f64,
    pub a: Option<f64>,
    pub f: Option<f64>,
    pub slope_at_r: Option<f64>,
    pub k_star: Option<f64>,
    pub parabola_0p3r2: f64,
    pub status: String,
}

impl From<&SweepRow> for SweepCsvRow {
    fn from(row: &SweepRow) -> Self {
        SweepCsvRow {
            r: row.r,
            h: row.h,
            r_over_h: row.r_over_h,
            a: row.free_boundary,
            f: row.f_value,
            slope_at_r: row.terminal_slope,
            k_star: row.k_star,
            parabola_0p3r2: row.parabola,
            status: row.error.clone().unwrap_or_else(|| "ok".into()),
        }
    }
}

#[derive(Debug)]
pub struct SweepReport {
    pub config: RunConfig,
    pub rows: Vec<SweepCsvRow>,
}

impl SweepReport {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        render(format, &self.config, None::<&()>, &self.rows, || {
            let mut t = format!(
                "{:>8} {:>8} {:>18} {:>18} {:>18} {:>10}  status\n",
                "r", "h", "f = a/h", "slope at r", "k*", "0.3(r/h)^2"
            );
            for row in &self.rows {
                let _ = writeln!(
                    t,
                    "{:>8} {:>8} {:>18} {:>18} {:>18} {:>10.4}  {}",
                    row.r,
                    row.h,
                    opt_sig(row.f),
                    opt_sig(row.slope_at_r),
                    opt_sig(row.k_star),
                    row.parabola_0p3r2,
                    row.status
                );
            }
            t
        })
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<SweepReport, CliError> {
    let common = &args.common;
    if args.r_values.is_empty() {
        return Err(usage("sweep grid --r-values is empty"));
    }
    for &r in &args.r_values {
        positive("r", r)?;
    }
    positive("h", common.h)?;
    positive("a* (--astar)", common.a_star)?;
    positive("step", common.step)?;
    let table = sweep_f(&args.r_values, common.h, &transform_config(common))?;
    let mut config = RunConfig::new("sweep", common);
    config.r_values = Some(args.r_values.clone());
    Ok(SweepReport {
        config,
        rows: table.rows.iter().map(SweepCsvRow::from).collect(),
    })
}

// ---------------------------------------------------------------- compare

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub solver: String,
    pub free_boundary: f64,
    pub terminal_slope: f64,
    pub iterations: usize,
    pub rhs_evaluations: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    /// RHS evaluations of the secant shooting run over those of the
    /// non-iterative solve.
    pub secant_to_non_iterative_rhs_ratio: f64,
    pub bisection_to_non_iterative_rhs_ratio: f64,
    pub max_free_boundary_gap: f64,
}

pub struct CompareReport {
    pub config: RunConfig,
    pub rows: Vec<CompareRow>,
    pub summary: CompareSummary,
}

impl CompareReport {
    pub fn row(&self, solver: &str) -> &CompareRow {
        self.rows.iter().find(|r| r.solver == solver).expect("known solver")
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        render(format, &self.config, Some(&self.summary), &self.rows, || {
            let mut t = format!(
                "{:<14} {:>18} {:>18} {:>10} {:>10} {:>12}\n",
                "solver", "a", "slope at r", "iterations", "rhs evals", "wall time s"
            );
            for row in &self.rows {
                let _ = writeln!(
                    t,
                    "{:<14} {:>18} {:>18} {:>10} {:>10} {:>12.6}",
                    row.solver,
                    sig(row.free_boundary),
                    sig(row.terminal_slope),
                    row.iterations,
                    row.rhs_evaluations,
                    row.wall_time_s
                );
            }
            let s = &self.summary;
            let _ = writeln!(
                t,
                "rhs evaluation ratio secant/non-iterative {:.2}, bisection/non-iterative {:.2}",
                s.secant_to_non_iterative_rhs_ratio, s.bisection_to_non_iterative_rhs_ratio
            );
            let _ = writeln!(t, "largest gap in a between solvers {:.3e}", s.max_free_boundary_gap);
            t
        })
    }
}

pub fn cmd_compare(args: &CompareArgs) -> Result<CompareReport, CliError> {
    let geometry = validate(&args.common)?;
    let step = args.seeds.shoot_step.unwrap_or(args.common.step);
    positive("shoot step", step)?;
    let method = args.common.method;

    let clock = Instant::now();
    let tm = solve_newton_fbp(geometry, &transform_config(&args.common))?;
    let tm_time = clock.elapsed().as_secs_f64();

    let mut shots = Vec::new();
    for finder in [RootFinder::Bisection, RootFinder::Secant] {
        let clock = Instant::now();
        let res = run_shoot(finder, geometry, &args.seeds, step, method)?;
        shots.push((finder, res, clock.elapsed().as_secs_f64()));
    }

    let mut rows = vec![CompareRow {
        solver: "non_iterative".into(),
        free_boundary: tm.free_boundary,
        terminal_slope: tm.terminal_slope,
        iterations: 1,
        rhs_evaluations: tm.rhs_evaluations,
        wall_time_s: tm_time,
    }];
    for (finder, res, time) in &shots {
        rows.push(CompareRow {
            solver: match finder {
                RootFinder::Bisection => "bisection".into(),
                RootFinder::Secant => "secant".into(),
            },
            free_boundary: res.free_boundary,
            terminal_slope: res.terminal_slope,
            iterations: res.iterations,
            rhs_evaluations: res.rhs_evaluations,
            wall_time_s: *time,
        });
    }
    let evals = |i: usize| rows[i].rhs_evaluations as f64;
    let a: Vec<f64> = rows.iter().map(|r| r.free_boundary).collect();
    let gap = a.iter().fold(0.0f64, |g, x| a.iter().fold(g, |g, y| g.max((x - y).abs())));
    let summary = CompareSummary {
        secant_to_non_iterative_rhs_ratio: evals(2) / evals(0),
        bisection_to_non_iterative_rhs_ratio: evals(1) / evals(0),
        max_free_boundary_gap: gap,
    };

    let mut config = RunConfig::new("compare", &args.common);
    config.bracket = Some([args.seeds.a_lo, args.seeds.a_hi]);
    config.secant_seeds = Some([args.seeds.a0, args.seeds.a1]);
    config.shoot_step = Some(step);
    Ok(CompareReport {
        config,
        rows,
        summary,
    })
}
