//! Batch front end: a versioned JSON run configuration, one command per run,
//! deterministic JSON reports and CSV tables in an output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::audit::{audit_pair, check_skew_symmetry, SkewSymmetry, UniquenessReport};
use crate::error::{Error, Result};
use crate::geometry::{make_polar_grid, write_field_csv, write_grid_metadata, RegionSpec, TensorField};
use crate::invading::{run_invading, LadderResolution};
use crate::solver::{solve_disk, test_battery, DiskSolution, DiskSummary, SolveConfig, StreamSpace};
use crate::sources::{
    build_forcing, build_vector_source, lift_vector_source, pairing_residual, SourceKind, SourceSpec,
    ZERO_MEAN_TOLERANCE,
};
use crate::weighted::{estimate_hardy_constant, estimate_poincare_constant, ConstantEstimate};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Invade,
    Audit,
    Constants,
    Lift,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Invade => "invade",
            Command::Audit => "audit",
            Command::Constants => "constants",
            Command::Lift => "lift",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub radius: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvadeSpec {
    pub radii: Vec<f64>,
    pub monitor_radius: f64,
    pub rings_per_unit: f64,
    pub n_theta: usize,
}

/// Settings of the second run in an audit; unset fields copy the first run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondRun {
    pub mu: Option<[f64; 2]>,
    pub homotopy_steps: Option<usize>,
    pub damping: Option<f64>,
    pub picard_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSpec {
    #[serde(default)]
    pub second: SecondRun,
    /// Defaults to the boundary constant `μ + c` of the second run.
    pub u_inf: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantsWhich {
    Poincare,
    Hardy,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSpec {
    pub which: ConstantsWhich,
    pub anchor: RegionSpec,
}

fn default_battery() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftSpec {
    pub omega: RegionSpec,
    /// Number of test stream functions for the pairing residual.
    #[serde(default = "default_battery")]
    pub battery: usize,
}

/// A complete run description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub command: Command,
    pub grid: Option<GridSpec>,
    pub solver: Option<SolveConfig>,
    /// Absent means zero forcing for `solve`.
    pub source: Option<SourceSpec>,
    pub invade: Option<InvadeSpec>,
    pub audit: Option<AuditSpec>,
    pub constants: Option<ConstantsSpec>,
    pub lift: Option<LiftSpec>,
    /// Used when no output directory is given on the command line.
    pub output: Option<PathBuf>,
}

fn missing(command: Command, field: &str) -> Error {
    Error::InvalidConfig(format!("command `{}` needs a `{field}` section", command.name()))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Schema version, required sections and cross-field consistency.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let c = self.command;
        let need_grid = !matches!(c, Command::Invade);
        if need_grid && self.grid.is_none() {
            return Err(missing(c, "grid"));
        }
        if matches!(c, Command::Solve | Command::Invade | Command::Audit) {
            self.solver.as_ref().ok_or_else(|| missing(c, "solver"))?.validate()?;
        }
        if matches!(c, Command::Invade | Command::Audit | Command::Lift) && self.source.is_none() {
            return Err(missing(c, "source"));
        }
        if let Some(source) = &self.source {
            source.validate()?;
        }
        match c {
            Command::Invade => {
                let inv = self.invade.as_ref().ok_or_else(|| missing(c, "invade"))?;
                let omega = &self.solver.as_ref().unwrap().omega;
                if omega.max_extent() > inv.monitor_radius {
                    return Err(Error::InvalidConfig(format!(
                        "anchor region {} does not fit in the monitor disk of radius {}",
                        omega.describe(),
                        inv.monitor_radius
                    )));
                }
                if let Some(&first) = inv.radii.first() {
                    if inv.monitor_radius >= first {
                        return Err(Error::MonitorTooLarge {
                            monitor: inv.monitor_radius,
                            radius: first,
                        });
                    }
                }
            }
            Command::Constants => {
                self.constants.as_ref().ok_or_else(|| missing(c, "constants"))?;
            }
            Command::Lift => {
                self.lift.as_ref().ok_or_else(|| missing(c, "lift"))?;
                if self.source.as_ref().unwrap().kind != SourceKind::VectorCompact {
                    return Err(Error::WrongSourceKind {
                        kind: self.source.as_ref().unwrap().kind.name(),
                        operation: "lift",
                    });
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Report of the `lift` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    pub integrals: [f64; 2],
    pub l1_norm: f64,
    pub gate_tolerance: f64,
    pub forcing_norm: f64,
    pub battery: usize,
    /// Largest relative `⟨f, φ⟩ + ⟨F, ∇φ⟩` over the battery.
    pub max_pairing_residual: f64,
}

/// Report of the `audit` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditOutput {
    pub uniqueness: UniquenessReport,
    /// Skew defect of `⟨u·∇ṽ, ṽ⟩` with `ṽ = ũ − u∞`.
    pub skew_symmetry: SkewSymmetry,
    pub first: DiskSummary,
    pub second: DiskSummary,
}

/// Outcome of a successful run; `exit_code` is nonzero when the run finished
/// with a recorded failure (an incomplete ladder).
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
    pub exit_code: i32,
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.path(name);
        fs::write(p, serde_json::to_string_pretty(value)? + "\n")?;
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(p, text)?;
        Ok(())
    }
}

fn grid_of(config: &RunConfig) -> Result<std::sync::Arc<crate::geometry::PolarGrid>> {
    let g = config.grid.as_ref().expect("validated");
    make_polar_grid(g.radius, g.n_r, g.n_theta)
}

fn forcing_of(config: &RunConfig, grid: &std::sync::Arc<crate::geometry::PolarGrid>, omega: &RegionSpec) -> Result<TensorField> {
    match &config.source {
        Some(spec) => build_forcing(spec, grid, omega),
        None => Ok(TensorField::zeros(grid)),
    }
}

fn iterations_csv(sol: &DiskSolution) -> String {
    let mut out = String::from("lambda,iteration,residual,grad_v_norm\n");
    for it in &sol.iterations {
        let _ = writeln!(
            out,
            "{:.16e},{},{:.16e},{:.16e}",
            it.lambda, it.iteration, it.residual, it.grad_v_norm
        );
    }
    out
}

fn write_solution(out: &mut Output, prefix: &str, sol: &DiskSolution) -> Result<()> {
    out.json(&format!("{prefix}report.json"), &sol.summary())?;
    out.text(&format!("{prefix}iterations.csv"), &iterations_csv(sol))?;
    let p = out.path(&format!("{prefix}u.csv"));
    write_field_csv(&p, &sol.u)?;
    let p = out.path(&format!("{prefix}grid.json"));
    write_grid_metadata(&p, &sol.grid)
}

fn run_solve(config: &RunConfig, out: &mut Output) -> Result<String> {
    let solver = config.solver.as_ref().expect("validated");
    let grid = grid_of(config)?;
    let forcing = forcing_of(config, &grid, &solver.omega)?;
    let sol = solve_disk(&grid, &forcing, solver)?;
    write_solution(out, "", &sol)?;
    Ok(format!(
        "solve: c = ({:.6e}, {:.6e}), grad_norm = {:.6e}, {} iterations",
        sol.c[0],
        sol.c[1],
        sol.grad_norm,
        sol.iterations.len()
    ))
}

fn run_invade(config: &RunConfig, out: &mut Output) -> Result<(String, i32)> {
    let solver = config.solver.as_ref().expect("validated");
    let inv = config.invade.as_ref().expect("validated");
    let source = config.source.as_ref().expect("validated");
    let resolution = LadderResolution {
        rings_per_unit: inv.rings_per_unit,
        n_theta: inv.n_theta,
    };
    let report = run_invading(&inv.radii, source, solver, inv.monitor_radius, resolution)?;
    out.json("report.json", &report)?;
    out.text("convergence.csv", &report.convergence_csv())?;
    if let Some(sol) = &report.final_solution {
        let p = out.path("final_u.csv");
        write_field_csv(&p, &sol.u)?;
        let p = out.path("final_grid.json");
        write_grid_metadata(&p, &sol.grid)?;
    }
    let summary = format!(
        "invade: {} radii, complete = {}, distances decreasing = {}",
        report.radii.len(),
        report.complete,
        report.distances_decreasing
    );
    Ok((summary, if report.complete { 0 } else { 3 }))
}

fn run_audit(config: &RunConfig, out: &mut Output) -> Result<String> {
    let first_cfg = config.solver.as_ref().expect("validated");
    let spec = config.audit.clone().unwrap_or_default();
    let mut second_cfg = first_cfg.clone();
    if let Some(mu) = spec.second.mu {
        second_cfg.mu = mu;
    }
    if let Some(s) = spec.second.homotopy_steps {
        second_cfg.homotopy_steps = s;
    }
    if let Some(d) = spec.second.damping {
        second_cfg.damping = d;
    }
    if let Some(t) = spec.second.picard_tol {
        second_cfg.picard_tol = t;
    }
    second_cfg.validate()?;
    let grid = grid_of(config)?;
    let forcing = forcing_of(config, &grid, &first_cfg.omega)?;
    let first = solve_disk(&grid, &forcing, first_cfg)?;
    let second = solve_disk(&grid, &forcing, &second_cfg)?;
    let u_inf = spec.u_inf.unwrap_or_else(|| second.far_value());
    let uniqueness = audit_pair(&first, &second, u_inf, &first_cfg.omega)?;
    let v_tilde = second.u.add_constant([-u_inf[0], -u_inf[1]]);
    let skew_symmetry = check_skew_symmetry(&first.u, &v_tilde)?;
    let line = uniqueness.verdict_line();
    out.json(
        "report.json",
        &AuditOutput {
            uniqueness,
            skew_symmetry,
            first: first.summary(),
            second: second.summary(),
        },
    )?;
    Ok(line)
}

fn run_constants(config: &RunConfig, out: &mut Output) -> Result<String> {
    let spec = config.constants.as_ref().expect("validated");
    let grid = grid_of(config)?;
    let mut estimates: Vec<ConstantEstimate> = Vec::new();
    if matches!(spec.which, ConstantsWhich::Poincare | ConstantsWhich::Both) {
        estimates.push(estimate_poincare_constant(&grid, &spec.anchor)?);
    }
    if matches!(spec.which, ConstantsWhich::Hardy | ConstantsWhich::Both) {
        estimates.push(estimate_hardy_constant(&grid, &spec.anchor)?);
    }
    out.json("report.json", &estimates)?;
    let parts: Vec<String> = estimates
        .iter()
        .map(|e| format!("{:?} = {:.6}", e.inequality, e.value))
        .collect();
    Ok(format!("constants: {}", parts.join(", ")))
}

fn run_lift(config: &RunConfig, out: &mut Output) -> Result<String> {
    let spec = config.lift.as_ref().expect("validated");
    let source = config.source.as_ref().expect("validated");
    let grid = grid_of(config)?;
    let f = build_vector_source(source, &grid)?;
    let lifted = lift_vector_source(&f, &grid, &spec.omega)?;
    let space = StreamSpace::new(&grid)?;
    let mut max_pairing_residual: f64 = 0.0;
    for chi in test_battery(&space, spec.battery) {
        max_pairing_residual = max_pairing_residual.max(pairing_residual(&space, &f, &lifted.forcing, &chi)?);
    }
    let report = LiftReport {
        integrals: lifted.integrals,
        l1_norm: lifted.l1_norm,
        gate_tolerance: ZERO_MEAN_TOLERANCE * lifted.l1_norm,
        forcing_norm: crate::geometry::l2_norm(&lifted.forcing, None)?,
        battery: spec.battery,
        max_pairing_residual,
    };
    out.json("report.json", &report)?;
    let p = out.path("forcing.csv");
    write_field_csv(&p, &lifted.forcing)?;
    Ok(format!(
        "lift: gate passed, max pairing residual {:.3e} over {} fields",
        report.max_pairing_residual, report.battery
    ))
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    threads: usize,
    started_unix_seconds: u64,
    elapsed_seconds: f64,
}

/// Executes a validated configuration, writing every artifact into `out_dir`.
/// Timing data goes to `metadata.json`; all other files depend only on the
/// configuration.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunOutcome> {
    config.validate()?;
    let mut out = Output::new(out_dir)?;
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let (summary, exit_code) = match config.command {
        Command::Solve => (run_solve(config, &mut out)?, 0),
        Command::Invade => run_invade(config, &mut out)?,
        Command::Audit => (run_audit(config, &mut out)?, 0),
        Command::Constants => (run_constants(config, &mut out)?, 0),
        Command::Lift => (run_lift(config, &mut out)?, 0),
    };
    out.json(
        "metadata.json",
        &Metadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: config.command.name(),
            threads: rayon::current_num_threads(),
            started_unix_seconds: started,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
        },
    )?;
    Ok(RunOutcome {
        files: out.files,
        summary,
        exit_code,
    })
}

/// Machine-readable error record, written as `error.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
            exit_code: e.exit_code(),
        }
    }
}

pub fn write_error_record(out_dir: &Path, error: &Error) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(
        out_dir.join("error.json"),
        serde_json::to_string_pretty(&ErrorRecord::from(error))? + "\n",
    )?;
    Ok(())
}
