//! Batch front end: config parsing, experiment orchestration, output.
//!
//! A run is described by a TOML document with the sections
//!
//! ```text
//! model = "gradient_free"            # or "standard"
//!
//! [grid]      dim, m, eps
//! [flow]      lambda1_o, lambda2_o, dt, t_end
//! [constraints] volume, perimeter   (optional, default off)
//! [shape]     exactly one of ball / union / xor / cuboid / random_balls
//! [output]    dir, csv_stride, snapshot_stride   (optional)
//! [numerics]  fp_tol, fp_max_iters, dealias      (optional)
//! ```
//!
//! Unknown keys are hard errors, every numeric constraint is validated
//! before any allocation, and step sizes beyond the reliable guidance
//! produce warnings rather than rejections (the solver reports genuine
//! divergence at run time). Outputs are a `trajectory.csv` with the
//! fixed column schema, binary snapshots named `<step>.snap`, and for
//! radius benchmarks a joined `bench_radius.csv` against the
//! sharp-interface ODE. All output is deterministic: two runs of the
//! same config produce bit-identical files. The environment variable
//! `PHASEFLOW_OUTPUT_DIR` overrides the configured output directory.

use crate::energies::energy_report;
use crate::flows::{run_simulation, FlowError, FlowParams, Observer, Scheme, TrajectoryPoint};
use crate::geometry::{initialize, ShapeSpec};
use crate::profile1d::ProfileModel;
use crate::reference::{integrate_radius, RadiusState};
use crate::spectral::{read_snapshot, write_snapshot, ScalarField, TorusGrid};
use serde::Deserialize;
use std::error::Error;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "PHASEFLOW_OUTPUT_DIR";

/// Header of the trajectory CSV, fixed across runs.
pub const TRAJECTORY_HEADER: &str =
    "time,perimeter_ag,willmore_ag,perimeter_ch,willmore_ch,mass,radius_estimate,fp_iterations";

#[derive(Debug)]
pub enum CliError {
    Parse { message: String },
    Validation { message: String },
    Io { context: String, source: std::io::Error },
    Failed { operation: String, message: String },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse { message } => write!(f, "cli::parse_config: {message}"),
            CliError::Validation { message } => {
                write!(f, "cli::parse_config validation: {message}")
            }
            CliError::Io { context, source } => write!(f, "{context}: {source}"),
            CliError::Failed { operation, message } => write!(f, "{operation}: {message}"),
        }
    }
}

impl Error for CliError {
    fn source(&self) -> Option<&(dyn Error + 'static)> {
        match self {
            CliError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

fn flow_err(operation: &str) -> impl FnOnce(FlowError) -> CliError + '_ {
    move |e| CliError::Failed {
        operation: operation.to_string(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub grid: GridConfig,
    pub flow: FlowConfig,
    #[serde(default)]
    pub constraints: ConstraintsConfig,
    pub shape: ShapeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    GradientFree,
    Standard,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub m: usize,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub lambda1_o: f64,
    pub lambda2_o: f64,
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsConfig {
    #[serde(default)]
    pub volume: bool,
    #[serde(default)]
    pub perimeter: bool,
}

/// One shape node. Exactly one variant field must be present; this is
/// enforced by validation rather than an enum tag because tagged enums
/// cannot reject unknown keys, and silent typos in config files are
/// worse than the slightly clumsier schema.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeConfig {
    pub ball: Option<BallConfig>,
    pub union: Option<Vec<ShapeConfig>>,
    pub xor: Option<Vec<ShapeConfig>>,
    pub cuboid: Option<CuboidConfig>,
    pub random_balls: Option<RandomBallsConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallConfig {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CuboidConfig {
    pub center: Vec<f64>,
    pub half_widths: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomBallsConfig {
    pub count: usize,
    pub radius_range: [f64; 2],
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_output_dir")]
    pub dir: String,
    #[serde(default = "default_stride")]
    pub csv_stride: usize,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_output_dir(),
            csv_stride: default_stride(),
            snapshot_stride: default_stride(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(default = "default_fp_tol")]
    pub fp_tol: f64,
    #[serde(default = "default_fp_max_iters")]
    pub fp_max_iters: usize,
    #[serde(default)]
    pub dealias: bool,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            fp_tol: default_fp_tol(),
            fp_max_iters: default_fp_max_iters(),
            dealias: false,
        }
    }
}

fn default_output_dir() -> String {
    "phaseflow_out".to_string()
}

fn default_stride() -> usize {
    10
}

fn default_fp_tol() -> f64 {
    1e-9
}

fn default_fp_max_iters() -> usize {
    200
}

fn validation(message: impl Into<String>) -> CliError {
    CliError::Validation {
        message: message.into(),
    }
}

fn shape_from_config(node: &ShapeConfig, dim: usize, path: &str) -> Result<ShapeSpec, CliError> {
    let mut present = 0;
    for p in [
        node.ball.is_some(),
        node.union.is_some(),
        node.xor.is_some(),
        node.cuboid.is_some(),
        node.random_balls.is_some(),
    ] {
        present += usize::from(p);
    }
    if present != 1 {
        return Err(validation(format!(
            "{path}: a shape node needs exactly one of ball, union, xor, cuboid, random_balls \
             (found {present})"
        )));
    }
    let check_center = |center: &[f64], extent: &dyn Fn(usize) -> f64| -> Result<(), CliError> {
        if center.len() != dim {
            return Err(validation(format!(
                "{path}: center has {} coordinates but the grid dimension is {dim}",
                center.len()
            )));
        }
        for (i, c) in center.iter().enumerate() {
            if !c.is_finite() || c.abs() + extent(i) > 0.5 + 1e-12 {
                return Err(validation(format!(
                    "{path}: the shape leaves the fundamental cell along axis {i} \
                     (|{c}| + {} > 1/2)",
                    extent(i)
                )));
            }
        }
        Ok(())
    };
    if let Some(b) = &node.ball {
        if !(b.radius > 0.0 && b.radius < 0.5) {
            return Err(validation(format!(
                "{path}: ball radius must lie in (0, 1/2), got {}",
                b.radius
            )));
        }
        check_center(&b.center, &|_| b.radius)?;
        return Ok(ShapeSpec::Ball {
            center: b.center.clone(),
            radius: b.radius,
        });
    }
    if let Some(members) = &node.union {
        if members.is_empty() {
            return Err(validation(format!("{path}: union must not be empty")));
        }
        let shapes = members
            .iter()
            .enumerate()
            .map(|(i, m)| shape_from_config(m, dim, &format!("{path}.union[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(ShapeSpec::Union(shapes));
    }
    if let Some(members) = &node.xor {
        if members.is_empty() {
            return Err(validation(format!("{path}: xor must not be empty")));
        }
        let shapes = members
            .iter()
            .enumerate()
            .map(|(i, m)| shape_from_config(m, dim, &format!("{path}.xor[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(ShapeSpec::Xor(shapes));
    }
    if let Some(c) = &node.cuboid {
        if c.half_widths.len() != dim {
            return Err(validation(format!(
                "{path}: cuboid has {} half widths but the grid dimension is {dim}",
                c.half_widths.len()
            )));
        }
        for hw in &c.half_widths {
            if !(hw > &0.0 && hw < &0.5) {
                return Err(validation(format!(
                    "{path}: cuboid half widths must lie in (0, 1/2), got {hw}"
                )));
            }
        }
        check_center(&c.center, &|i| c.half_widths[i])?;
        return Ok(ShapeSpec::Cuboid {
            center: c.center.clone(),
            half_widths: c.half_widths.clone(),
        });
    }
    let rb = node.random_balls.as_ref().unwrap();
    let (lo, hi) = (rb.radius_range[0], rb.radius_range[1]);
    if rb.count == 0 {
        return Err(validation(format!("{path}: random_balls count must be >= 1")));
    }
    if !(lo > 0.0 && lo <= hi && hi < 0.5) {
        return Err(validation(format!(
            "{path}: radius_range must satisfy 0 < lo <= hi < 1/2, got [{lo}, {hi}]"
        )));
    }
    Ok(ShapeSpec::RandomBalls {
        count: rb.count,
        radius_range: (lo, hi),
        rng_seed: rb.rng_seed,
    })
}

/// Parses and fully validates a config document. Returns the config and
/// any step-size guidance warnings; unknown keys and violated
/// constraints are hard errors.
pub fn parse_config(text: &str) -> Result<(RunConfig, Vec<String>), CliError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Parse {
        message: e.to_string(),
    })?;
    let mut warnings = Vec::new();

    let g = &config.grid;
    if !(1..=3).contains(&g.dim) {
        return Err(validation(format!("grid.dim must be 1, 2 or 3, got {}", g.dim)));
    }
    if !(g.m >= 8 && g.m.is_power_of_two()) {
        return Err(validation(format!(
            "grid.m must be a power of two >= 8, got {}",
            g.m
        )));
    }
    if !(g.eps > 0.0 && g.eps.is_finite() && g.eps < 0.5) {
        return Err(validation(format!(
            "grid.eps must lie in (0, 1/2), got {}",
            g.eps
        )));
    }

    let f = &config.flow;
    for (name, v) in [("lambda1_o", f.lambda1_o), ("lambda2_o", f.lambda2_o)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(validation(format!("flow.{name} must be >= 0, got {v}")));
        }
    }
    if !(f.dt > 0.0 && f.dt.is_finite()) {
        return Err(validation(format!("flow.dt must be positive, got {}", f.dt)));
    }
    if !(f.t_end >= 0.0 && f.t_end.is_finite()) {
        return Err(validation(format!(
            "flow.t_end must be >= 0, got {}",
            f.t_end
        )));
    }
    let eps2 = g.eps * g.eps;
    let dt_cap = if f.lambda1_o == 0.0 { 2.0 * eps2 } else { eps2 };
    if f.dt > dt_cap {
        return Err(validation(format!(
            "flow.dt = {} exceeds the hard cap {dt_cap} for eps = {}",
            f.dt, g.eps
        )));
    }
    if f.lambda1_o > 0.0 && f.dt > 20.0 * eps2 * eps2 {
        warnings.push(format!(
            "flow.dt = {} is above the eps^4 guidance ({:.3e}) for bending flow; \
             the fixed-point iteration may diverge",
            f.dt,
            eps2 * eps2
        ));
    }
    if f.lambda1_o == 0.0 && f.dt > eps2 {
        warnings.push(format!(
            "flow.dt = {} is above the eps^2 guidance ({eps2:.3e}) for perimeter flow",
            f.dt
        ));
    }

    let n = &config.numerics;
    if !(n.fp_tol > 0.0 && n.fp_tol.is_finite()) {
        return Err(validation(format!(
            "numerics.fp_tol must be positive, got {}",
            n.fp_tol
        )));
    }
    if n.fp_max_iters == 0 {
        return Err(validation("numerics.fp_max_iters must be >= 1".to_string()));
    }
    let o = &config.output;
    if o.csv_stride == 0 || o.snapshot_stride == 0 {
        return Err(validation("output strides must be >= 1".to_string()));
    }
    if o.dir.is_empty() {
        return Err(validation("output.dir must not be empty".to_string()));
    }

    shape_from_config(&config.shape, g.dim, "shape")?;
    Ok((config, warnings))
}

/// Builds the domain objects a validated config describes.
fn build_problem(config: &RunConfig) -> Result<(TorusGrid, ScalarField, FlowParams), CliError> {
    let grid = TorusGrid::new(config.grid.dim, config.grid.m, config.grid.eps);
    let shape = shape_from_config(&config.shape, config.grid.dim, "shape")?;
    let u0 = initialize(grid, &shape);
    let mut p = FlowParams::new(
        config.grid.eps,
        config.flow.lambda1_o,
        config.flow.lambda2_o,
        config.flow.dt,
    )
    .map_err(flow_err("flows::FlowParams::new"))?;
    p.fp_tol = config.numerics.fp_tol;
    p.fp_max_iters = config.numerics.fp_max_iters;
    p.dealias = config.numerics.dealias;
    p.conserve_volume = config.constraints.volume;
    p.conserve_perimeter = config.constraints.perimeter;
    Ok((grid, u0, p))
}

fn scheme_of(model: ModelKind) -> Scheme {
    match model {
        ModelKind::GradientFree => Scheme::GradientFree,
        ModelKind::Standard => Scheme::Standard,
    }
}

/// Output directory for a run: the environment override if set,
/// otherwise the configured directory.
pub fn resolve_output_dir(config: &RunConfig) -> PathBuf {
    match std::env::var(OUTPUT_DIR_ENV) {
        Ok(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(&config.output.dir),
    }
}

/// Formats one trajectory CSV row. Floats print in Rust's shortest
/// round-trip form, which is deterministic across runs.
fn trajectory_row(point: &TrajectoryPoint) -> String {
    let r = &point.report;
    format!(
        "{},{},{},{},{},{},{},{}",
        r.time,
        r.perimeter_ag,
        r.willmore_ag,
        r.perimeter_ch,
        r.willmore_ch,
        r.mass,
        point.radius_estimate,
        point.diag.fp_iterations
    )
}

/// Writes snapshots at the configured stride and remembers the latest
/// state so the final one can be written after the run.
struct SnapshotObserver {
    dir: PathBuf,
    stride: usize,
    last_written: Option<usize>,
    pending: Option<(usize, ScalarField, f64)>,
}

impl SnapshotObserver {
    fn new(dir: PathBuf, stride: usize) -> Self {
        SnapshotObserver {
            dir,
            stride,
            last_written: None,
            pending: None,
        }
    }

    fn write(&mut self, step: usize, u: &ScalarField, time: f64) -> Result<(), String> {
        let path = self.dir.join(format!("{step}.snap"));
        write_snapshot(&path, u, time).map_err(|e| format!("writing {}: {e}", path.display()))?;
        self.last_written = Some(step);
        Ok(())
    }

    fn finish(&mut self) -> Result<(), String> {
        if let Some((step, u, time)) = self.pending.take() {
            if self.last_written != Some(step) {
                self.write(step, &u, time)?;
            }
        }
        Ok(())
    }
}

impl Observer for SnapshotObserver {
    fn observe(&mut self, u: &ScalarField, point: &TrajectoryPoint) -> Result<(), String> {
        if point.step % self.stride == 0 {
            self.write(point.step, u, point.report.time)?;
        }
        self.pending = Some((point.step, u.clone(), point.report.time));
        Ok(())
    }
}

/// Runs a simulation config end to end: trajectory CSV plus snapshots.
pub fn cmd_run(config_path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(io_err(format!("reading {}", config_path.display())))?;
    let (config, warnings) = parse_config(&text)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let (_grid, u0, p) = build_problem(&config)?;
    let out_dir = resolve_output_dir(&config);
    fs::create_dir_all(&out_dir).map_err(io_err(format!("creating {}", out_dir.display())))?;

    let mut snapshots = SnapshotObserver::new(out_dir.clone(), config.output.snapshot_stride);
    let trajectory = run_simulation(
        &u0,
        &p,
        scheme_of(config.model),
        config.flow.t_end,
        &mut [&mut snapshots],
    )
    .map_err(flow_err("flows::run_simulation"))?;
    snapshots.finish().map_err(|message| CliError::Failed {
        operation: "spectral::write_snapshot".to_string(),
        message,
    })?;

    let csv_path = out_dir.join("trajectory.csv");
    let mut csv = String::with_capacity(trajectory.len() * 64);
    csv.push_str(TRAJECTORY_HEADER);
    csv.push('\n');
    let last = trajectory.len() - 1;
    for (i, point) in trajectory.iter().enumerate() {
        if point.step % config.output.csv_stride == 0 || i == last {
            csv.push_str(&trajectory_row(point));
            csv.push('\n');
        }
    }
    fs::write(&csv_path, csv).map_err(io_err(format!("writing {}", csv_path.display())))?;

    let end = trajectory.last().expect("trajectory always has the initial point");
    println!(
        "completed {} steps to t = {}; final radius estimate {}; wrote {}",
        end.step,
        end.report.time,
        end.radius_estimate,
        csv_path.display()
    );
    Ok(())
}

/// Prints the transition-profile constants and a table of both wells.
pub fn cmd_profile() -> Result<(), CliError> {
    let model = ProfileModel::new();
    let norm_qp_sq = model.c0 / model.sigma;
    println!("c0 = {}", model.c0);
    println!("int_qprime_sq = {norm_qp_sq}");
    println!("sigma = {}", model.sigma);
    println!();
    println!("r,w,w_p,w_pp,wo,wo_p,wo_pp");
    let lo = -1.0 - model.extension_margin;
    let steps = (2.0 * (1.0 + model.extension_margin) / 0.01).round() as usize;
    for i in 0..=steps {
        let r = lo + 0.01 * i as f64;
        let (w, wp, wpp) = model.w_all(r);
        let (wo, wop, wopp) = model.wo_all(r);
        println!("{r},{w},{wp},{wpp},{wo},{wop},{wopp}");
    }
    Ok(())
}

/// Reads a snapshot and prints its energy report as one CSV row.
pub fn cmd_energy(snapshot_path: &Path) -> Result<(), CliError> {
    let (u, time) = read_snapshot(snapshot_path).map_err(|e| CliError::Failed {
        operation: "spectral::read_snapshot".to_string(),
        message: format!("{}: {e}", snapshot_path.display()),
    })?;
    let model = ProfileModel::new();
    let report = energy_report(&u, &model, time).map_err(|e| CliError::Failed {
        operation: "energies::energy_report".to_string(),
        message: e.to_string(),
    })?;
    println!("time,perimeter_ag,willmore_ag,perimeter_ch,willmore_ch,mass");
    println!(
        "{},{},{},{},{},{}",
        report.time,
        report.perimeter_ag,
        report.willmore_ag,
        report.perimeter_ch,
        report.willmore_ch,
        report.mass
    );
    Ok(())
}

/// Runs both diffuse schemes and the sharp-interface ODE on a ball
/// config and writes the joined radius comparison.
pub fn cmd_bench_radius(config_path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(io_err(format!("reading {}", config_path.display())))?;
    let (config, warnings) = parse_config(&text)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let r0 = match shape_from_config(&config.shape, config.grid.dim, "shape")? {
        ShapeSpec::Ball { radius, .. } => radius,
        _ => {
            return Err(validation(
                "bench radius requires a single ball shape".to_string(),
            ))
        }
    };
    if config.grid.dim < 2 {
        return Err(validation(
            "bench radius requires dim 2 or 3 (circles or spheres)".to_string(),
        ));
    }
    let (_grid, u0, p) = build_problem(&config)?;
    let t_end = config.flow.t_end;

    // A scheme that diverges mid-run still contributes its completed
    // prefix; the remaining rows are filled with NaN so the comparison
    // stays honest about where it stopped.
    let run_scheme = |scheme: Scheme| -> (Vec<f64>, Option<String>) {
        match run_simulation(&u0, &p, scheme, t_end, &mut []) {
            Ok(traj) => (traj.iter().map(|pt| pt.radius_estimate).collect(), None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        }
    };
    let (r_standard, err_standard) = run_scheme(Scheme::Standard);
    let (r_gf, err_gf) = run_scheme(Scheme::GradientFree);
    for (name, err) in [("standard", err_standard), ("gradient_free", err_gf)] {
        if let Some(message) = err {
            eprintln!("warning: {name} scheme failed, column filled with NaN: {message}");
        }
    }

    let ode = integrate_radius(
        RadiusState {
            r: r0,
            n: config.grid.dim as u32,
            t: 0.0,
        },
        config.flow.lambda1_o,
        config.flow.lambda2_o,
        t_end,
        config.flow.dt,
    )
    .map_err(|e| CliError::Failed {
        operation: "reference::integrate_radius".to_string(),
        message: e.to_string(),
    })?;

    let n_rows = ode
        .samples
        .len()
        .max(r_standard.len())
        .max(r_gf.len());
    let pick = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(f64::NAN);
    let out_dir = resolve_output_dir(&config);
    fs::create_dir_all(&out_dir).map_err(io_err(format!("creating {}", out_dir.display())))?;
    let path = out_dir.join("bench_radius.csv");
    let mut csv = String::new();
    csv.push_str("t,r_diffuse_standard,r_diffuse_gf,r_ode\n");
    for i in 0..n_rows {
        if i % config.output.csv_stride != 0 && i != n_rows - 1 {
            continue;
        }
        let t = (i as f64 * config.flow.dt).min(t_end);
        let r_ode = ode.samples.get(i).map(|s| s.r).unwrap_or(f64::NAN);
        csv.push_str(&format!(
            "{t},{},{},{r_ode}\n",
            pick(&r_standard, i),
            pick(&r_gf, i)
        ));
    }
    fs::write(&path, csv).map_err(io_err(format!("writing {}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}
