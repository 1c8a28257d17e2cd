//! Time integration of the diffuse gradient flows.
//!
//! Two steppers advance a phase field `u` on the torus, both driving the
//! weighted energy `(lambda1/2) willmore + lambda2 perimeter` downhill
//! in their respective diffuse models.
//!
//! # Gradient-free scheme
//!
//! The flow of the gradient-free functionals,
//!
//! ```text
//! eps dt_t u = -(lambda1/2) dW_ag/du - lambda2 dP_ag/du,
//! ```
//!
//! is discretized implicitly in the pair `(u, w)` with `w = eps H_eps(u)
//! = B u + W'(u)/2` and `B = Id - A`. One time step solves
//!
//! ```text
//! u+ = u^n - (lambda1 dt/eps^4) B w+ - (lambda2 dt/eps^2) w+
//!          - (lambda1 dt/(2 eps^4)) W''(u+) w+
//! w+ = B u+ + W'(u+)/2
//! ```
//!
//! by a fixed-point iteration: the `W`-nonlinearities are frozen at the
//! current iterate, the remaining constant-coefficient 2x2 block is
//! inverted exactly per Fourier mode through the resolvent
//! `(Id + d B^2)^{-1}` with `d = lambda1 dt / eps^4`. Large `d` pushes
//! the pure iteration past its contraction range, so the update is
//! damped adaptively: `x <- x + theta (phi(x) - x)` with `theta` halved
//! after repeated residual growth, down to a floor of 1/16. Persistent
//! growth at the floor is reported as `FixedPointDiverged`. The iteration
//! stops only when both the damped update and the measured residual of
//! the two block equations drop below `fp_tol` in relative sup-norm.
//!
//! # Standard scheme
//!
//! The classical flow built from the gradient model,
//!
//! ```text
//! eps dt_t u = -(lambda1_o/eps) (-eps Lap + W_o''(u)/eps)(-eps Lap u + W_o'(u)/eps)
//!              - lambda2_o (-eps Lap u + W_o'(u)/eps),
//! ```
//!
//! is advanced by the usual semi-implicit splitting: the
//! constant-coefficient stiff part `lambda1_o Lap^2 - lambda2_o Lap` is
//! treated implicitly through its symbol, every `W_o`-dependent term
//! explicitly from the current state. Note the sharp-interface weights
//! `lambda*_o` enter this scheme directly, while the gradient-free
//! scheme uses the rescaled `lambda1 = lambda1_o / sigma^2`,
//! `lambda2 = lambda2_o / sigma`; with those choices both schemes track
//! the same sharp-interface law, circles obeying
//! `r' = lambda1_o (1/2) / r^3 - lambda2_o / r` in 2D.
//!
//! # Constraints
//!
//! `project_volume` pins the zero Fourier mode (a constant shift), and
//! `project_perimeter` runs the auxiliary flow `s eps dt_t v =
//! -H_eps(v)/sigma` with `s = sgn(P(v) - c)` until the diffuse perimeter
//! crosses its target, locating the stopping time by bisection.
//! `run_simulation` orchestrates stepping, projections, per-step energy
//! reports, and observer callbacks.

use crate::energies::{energy_report, radius_estimate, EnergyReport};
use crate::profile1d::ProfileModel;
use crate::spectral::{
    dealias_mask, multiplier_a, multiplier_b, multiplier_neg_laplacian, resolvent_symbol,
    ScalarField, SpectralError, Transformer,
};
use rustfft::num_complex::Complex64;
use std::error::Error;
use std::fmt;

/// Smallest damping factor tried before the iteration gives up.
const THETA_FLOOR: f64 = 1.0 / 16.0;

/// Absolute tolerance on `|perimeter_ag - c|` for the projection.
const PERIMETER_TOL: f64 = 1e-7;

/// Pseudo-time step of the perimeter projection flow, in units of eps^2.
const PROJECTION_DTAU_FACTOR: f64 = 0.25;

/// Pseudo-time budget of the projection march, in inner steps.
const MAX_PROJECTION_STEPS: usize = 1000;

/// Bisection budget for the projection stopping time.
const MAX_BISECTIONS: usize = 60;

#[derive(Debug)]
pub enum FlowError {
    Spectral(SpectralError),
    InvalidParams { reason: String },
    FixedPointDiverged { iterations: usize, residual: f64 },
    NonFinite { context: &'static str },
    ProjectionStalled { target: f64, achieved: f64 },
    ObserverAbort { message: String },
    AtStep { step: usize, source: Box<FlowError> },
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::Spectral(e) => write!(f, "spectral failure: {e}"),
            FlowError::InvalidParams { reason } => write!(f, "invalid flow parameters: {reason}"),
            FlowError::FixedPointDiverged {
                iterations,
                residual,
            } => write!(
                f,
                "fixed-point iteration diverged after {iterations} sweeps \
                 (residual {residual:.3e}); the time step is too large for \
                 the contraction"
            ),
            FlowError::NonFinite { context } => {
                write!(f, "non-finite values produced by {context}")
            }
            FlowError::ProjectionStalled { target, achieved } => write!(
                f,
                "perimeter projection stalled at {achieved:.9} before \
                 reaching {target:.9}"
            ),
            FlowError::ObserverAbort { message } => write!(f, "observer aborted: {message}"),
            FlowError::AtStep { step, source } => write!(f, "at step {step}: {source}"),
        }
    }
}

impl Error for FlowError {
    fn source(&self) -> Option<&(dyn Error + 'static)> {
        match self {
            FlowError::Spectral(e) => Some(e),
            FlowError::AtStep { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}

impl From<SpectralError> for FlowError {
    fn from(e: SpectralError) -> Self {
        FlowError::Spectral(e)
    }
}

fn at_step(step: usize, source: FlowError) -> FlowError {
    FlowError::AtStep {
        step,
        source: Box::new(source),
    }
}

/// Parameters of one simulation.
///
/// `lambda1_o` and `lambda2_o` are the sharp-interface weights; the
/// derived fields `lambda1 = lambda1_o / sigma^2` and `lambda2 =
/// lambda2_o / sigma` are the ones the gradient-free scheme consumes,
/// with `sigma` taken from the owned profile model. The constructor
/// enforces a hard step-size cap at the eps^2 scale (2 eps^2 for pure
/// perimeter flow, eps^2 otherwise); within that cap, steps too large
/// for the fixed-point contraction surface at run time as
/// `FixedPointDiverged`, and eps^4-scale steps are the reliable choice
/// whenever `lambda1_o > 0`.
#[derive(Debug, Clone)]
pub struct FlowParams {
    pub eps: f64,
    pub lambda1_o: f64,
    pub lambda2_o: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub dt: f64,
    pub fp_tol: f64,
    pub fp_max_iters: usize,
    pub conserve_volume: bool,
    pub conserve_perimeter: bool,
    pub dealias: bool,
    pub model: ProfileModel,
}

impl FlowParams {
    pub fn new(eps: f64, lambda1_o: f64, lambda2_o: f64, dt: f64) -> Result<Self, FlowError> {
        let invalid = |reason: String| FlowError::InvalidParams { reason };
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid(format!("eps must be positive and finite, got {eps}")));
        }
        if !(lambda1_o >= 0.0 && lambda1_o.is_finite()) {
            return Err(invalid(format!("lambda1_o must be >= 0, got {lambda1_o}")));
        }
        if !(lambda2_o >= 0.0 && lambda2_o.is_finite()) {
            return Err(invalid(format!("lambda2_o must be >= 0, got {lambda2_o}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("dt must be positive and finite, got {dt}")));
        }
        let dt_max = if lambda1_o == 0.0 {
            2.0 * eps * eps
        } else {
            eps * eps
        };
        if dt > dt_max {
            return Err(invalid(format!(
                "dt = {dt} exceeds the cap {dt_max} for eps = {eps}"
            )));
        }
        let model = ProfileModel::new();
        Ok(FlowParams {
            eps,
            lambda1_o,
            lambda2_o,
            lambda1: lambda1_o / (model.sigma * model.sigma),
            lambda2: lambda2_o / model.sigma,
            dt,
            fp_tol: 1e-9,
            fp_max_iters: 200,
            conserve_volume: false,
            conserve_perimeter: false,
            dealias: false,
            model,
        })
    }
}

/// Per-step solver bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepDiagnostics {
    pub fp_iterations: usize,
    pub fp_residual: f64,
    pub perimeter_projection_time: f64,
    pub perimeter_projection_sign: i8,
}

/// Which time stepper advances the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    GradientFree,
    Standard,
}

/// One row of a simulation trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub report: EnergyReport,
    pub radius_estimate: f64,
    pub diag: StepDiagnostics,
}

/// Callback invoked after the initial report and after every step.
pub trait Observer {
    fn observe(&mut self, u: &ScalarField, point: &TrajectoryPoint) -> Result<(), String>;
}

fn check_grid(u: &ScalarField, p: &FlowParams) {
    assert!(
        (u.grid.eps - p.eps).abs() <= 1e-15 * p.eps,
        "grid eps {} does not match flow eps {}",
        u.grid.eps,
        p.eps
    );
}

struct GradientFreeEngine {
    tr: Transformer,
    b_hat: Vec<f64>,
    resolvent: Vec<f64>,
    mask: Option<Vec<f64>>,
    /// d = lambda1 dt / eps^4, the block coupling strength.
    d: f64,
    /// lambda1 dt / (2 eps^4), coefficient of W''(u) w in the explicit part.
    c_wpp: f64,
    /// lambda2 dt / eps^2, coefficient of w in the explicit part.
    c_w: f64,
}

impl GradientFreeEngine {
    fn new(grid: crate::spectral::TorusGrid, p: &FlowParams, dt: f64) -> Self {
        let eps2 = p.eps * p.eps;
        let eps4 = eps2 * eps2;
        GradientFreeEngine {
            tr: Transformer::new(grid),
            b_hat: multiplier_b(grid),
            resolvent: resolvent_symbol(grid, p.lambda1, dt),
            mask: if p.dealias {
                Some(dealias_mask(grid))
            } else {
                None
            },
            d: p.lambda1 * dt / eps4,
            c_wpp: p.lambda1 * dt / (2.0 * eps4),
            c_w: p.lambda2 * dt / eps2,
        }
    }

    fn apply_mask(&self, spec: &mut [Complex64]) {
        if let Some(mask) = &self.mask {
            for (c, s) in spec.iter_mut().zip(mask) {
                *c *= *s;
            }
        }
    }
}

/// Sup-norm residual of the two block equations at the state `(u, w)`,
/// relative to the state's own scale. The explicit side is evaluated at
/// the same state, so a genuine fixed point scores zero regardless of
/// the path the iteration took.
#[allow(clippy::too_many_arguments)]
fn block_residual(
    engine: &mut GradientFreeEngine,
    u: &[f64],
    w: &[f64],
    u_hat: &[Complex64],
    w_hat: &[Complex64],
    u_n: &[f64],
    model: &ProfileModel,
    conserve_volume: bool,
) -> Result<f64, FlowError> {
    let n = u.len();
    let mut bw_hat = w_hat.to_vec();
    for (c, b) in bw_hat.iter_mut().zip(&engine.b_hat) {
        *c *= *b;
    }
    let bw = engine.tr.inverse(bw_hat)?;
    let mut bu_hat = u_hat.to_vec();
    for (c, b) in bu_hat.iter_mut().zip(&engine.b_hat) {
        *c *= *b;
    }
    let bu = engine.tr.inverse(bu_hat)?;

    let mut r1 = vec![0.0; n];
    let mut sup2 = 0.0f64;
    let mut scale = 1.0f64;
    for i in 0..n {
        let (_, wp, wpp) = model.w_all(u[i]);
        let explicit = u_n[i] - engine.c_wpp * wpp * w[i] - engine.c_w * w[i];
        r1[i] = u[i] + engine.d * bw[i] - explicit;
        let r2 = w[i] - bu[i] - 0.5 * wp;
        sup2 = sup2.max(r2.abs());
        scale = scale.max(u[i].abs()).max(w[i].abs());
    }
    if conserve_volume {
        // The pinned zero mode replaces the first equation's mean part,
        // so only the oscillatory component counts.
        let mean = r1.iter().sum::<f64>() / n as f64;
        for v in &mut r1 {
            *v -= mean;
        }
    }
    let sup1 = r1.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(sup1.max(sup2) / scale)
}

fn gradient_free_step_with_dt(
    u_n: &ScalarField,
    p: &FlowParams,
    dt: f64,
) -> Result<(ScalarField, ScalarField, StepDiagnostics), FlowError> {
    check_grid(u_n, p);
    let grid = u_n.grid;
    let n = u_n.values.len();
    let model = &p.model;
    let mut engine = GradientFreeEngine::new(grid, p, dt);
    let mean0 = u_n.mean();

    // Initial iterate: (u^n, B u^n + W'(u^n)/2), physical and spectral.
    let mut u_hat = engine.tr.forward(&u_n.values);
    let mut f_init = vec![0.0; n];
    for i in 0..n {
        let (_, wp, _) = model.w_all(u_n.values[i]);
        f_init[i] = 0.5 * wp;
    }
    let f_init_hat = engine.tr.forward(&f_init);
    let mut w_hat: Vec<Complex64> = u_hat
        .iter()
        .zip(&engine.b_hat)
        .zip(&f_init_hat)
        .map(|((uh, b), fh)| uh * *b + fh)
        .collect();
    let mut w = engine.tr.inverse(w_hat.clone())?;
    let mut u = u_n.values.clone();

    let mut theta = 1.0f64;
    let mut growth = 0usize;
    let mut res_prev = f64::INFINITY;
    let mut res_min = f64::INFINITY;
    let mut last_res = f64::INFINITY;

    for iter in 1..=p.fp_max_iters {
        // Explicit side from the current iterate.
        let mut e_vals = vec![0.0; n];
        let mut f_vals = vec![0.0; n];
        for i in 0..n {
            let (_, wp, wpp) = model.w_all(u[i]);
            e_vals[i] = u_n.values[i] - engine.c_wpp * wpp * w[i] - engine.c_w * w[i];
            f_vals[i] = 0.5 * wp;
        }
        let mut e_hat = engine.tr.forward(&e_vals);
        let mut f_hat = engine.tr.forward(&f_vals);
        engine.apply_mask(&mut e_hat);
        engine.apply_mask(&mut f_hat);

        // Exact solve of the frozen-coefficient block system.
        let mut u_plus_hat = vec![Complex64::default(); n];
        let mut w_plus_hat = vec![Complex64::default(); n];
        for k in 0..n {
            let r = engine.resolvent[k];
            let b = engine.b_hat[k];
            u_plus_hat[k] = r * (e_hat[k] - engine.d * b * f_hat[k]);
            w_plus_hat[k] = r * (b * e_hat[k] + f_hat[k]);
        }
        if p.conserve_volume {
            u_plus_hat[0] = Complex64::new(mean0, 0.0);
        }
        let u_plus = engine.tr.inverse(u_plus_hat.clone())?;
        let w_plus = engine.tr.inverse(w_plus_hat.clone())?;

        // Undamped increment, measured against the iterate's own scale.
        let mut sup_delta = 0.0f64;
        let mut scale = 1.0f64;
        for i in 0..n {
            sup_delta = sup_delta
                .max((u_plus[i] - u[i]).abs())
                .max((w_plus[i] - w[i]).abs());
            scale = scale.max(u_plus[i].abs()).max(w_plus[i].abs());
        }
        let res = sup_delta / scale;
        last_res = res;
        if !res.is_finite() {
            return Err(FlowError::FixedPointDiverged {
                iterations: iter,
                residual: res,
            });
        }
        if res > res_prev {
            growth += 1;
        } else {
            growth = 0;
        }
        if growth >= 2 && theta > THETA_FLOOR {
            theta = (0.5 * theta).max(THETA_FLOOR);
            growth = 0;
        }
        res_min = res_min.min(res);
        if res > 10.0 * res_min && theta <= THETA_FLOOR * (1.0 + 1e-12) {
            return Err(FlowError::FixedPointDiverged {
                iterations: iter,
                residual: res,
            });
        }
        res_prev = res;

        // Damped update, applied consistently to the physical fields and
        // their spectral mirrors (the update is linear, so the mirrors
        // stay exact transforms).
        for i in 0..n {
            u[i] += theta * (u_plus[i] - u[i]);
            w[i] += theta * (w_plus[i] - w[i]);
            let du_hat = u_plus_hat[i] - u_hat[i];
            let dw_hat = w_plus_hat[i] - w_hat[i];
            u_hat[i] += theta * du_hat;
            w_hat[i] += theta * dw_hat;
        }

        if theta * res <= p.fp_tol {
            let block = block_residual(
                &mut engine,
                &u,
                &w,
                &u_hat,
                &w_hat,
                &u_n.values,
                model,
                p.conserve_volume,
            )?;
            if block <= p.fp_tol {
                let eps = p.eps;
                let h = ScalarField {
                    grid,
                    values: w.iter().map(|v| v / eps).collect(),
                };
                return Ok((
                    ScalarField { grid, values: u },
                    h,
                    StepDiagnostics {
                        fp_iterations: iter,
                        fp_residual: block,
                        ..StepDiagnostics::default()
                    },
                ));
            }
        }
    }
    Err(FlowError::FixedPointDiverged {
        iterations: p.fp_max_iters,
        residual: last_res,
    })
}

/// One implicit step of the gradient-free flow.
///
/// Returns the new field, the diffuse curvature `H` of the new field
/// (the pair variable divided by eps), and solver diagnostics. On
/// success both block equations hold with relative sup-norm residual at
/// most `fp_tol`.
pub fn step_gradient_free(
    u_n: &ScalarField,
    p: &FlowParams,
) -> Result<(ScalarField, ScalarField, StepDiagnostics), FlowError> {
    gradient_free_step_with_dt(u_n, p, p.dt)
}

fn standard_step_with_dt(
    u_n: &ScalarField,
    p: &FlowParams,
    dt: f64,
) -> Result<ScalarField, FlowError> {
    check_grid(u_n, p);
    let grid = u_n.grid;
    let n = u_n.values.len();
    let model = &p.model;
    let mut tr = Transformer::new(grid);
    let lap = multiplier_neg_laplacian(grid);
    let mask = if p.dealias {
        Some(dealias_mask(grid))
    } else {
        None
    };
    let eps2 = p.eps * p.eps;
    let eps4 = eps2 * eps2;

    let u_hat = tr.forward(&u_n.values);
    let delta_u = if p.lambda1_o > 0.0 {
        let mut spec = u_hat.clone();
        for (c, l) in spec.iter_mut().zip(&lap) {
            *c *= -*l;
        }
        Some(tr.inverse(spec)?)
    } else {
        None
    };

    // Pointwise explicit terms: everything involving the well.
    let mut wop_vals = vec![0.0; n];
    let mut rest = vec![0.0; n];
    for i in 0..n {
        let (_, wop, wopp) = model.wo_all(u_n.values[i]);
        wop_vals[i] = wop;
        let mut g = -p.lambda2_o / eps2 * wop;
        if let Some(du) = &delta_u {
            g += p.lambda1_o / eps2 * wopp * du[i] - p.lambda1_o / eps4 * wopp * wop;
        }
        rest[i] = g;
    }
    let mut wop_hat = tr.forward(&wop_vals);
    let mut rest_hat = tr.forward(&rest);
    if let Some(mask) = &mask {
        for ((a, b), s) in wop_hat.iter_mut().zip(rest_hat.iter_mut()).zip(mask) {
            *a *= *s;
            *b *= *s;
        }
    }

    let mut out_hat = vec![Complex64::default(); n];
    for k in 0..n {
        // Explicit forcing: Lap(W_o') contributes -L * wop_hat.
        let g = rest_hat[k] - p.lambda1_o / eps2 * lap[k] * wop_hat[k];
        let denom = 1.0 + dt * (p.lambda1_o * lap[k] * lap[k] + p.lambda2_o * lap[k]);
        out_hat[k] = (u_hat[k] + dt * g) / denom;
    }
    if p.conserve_volume {
        out_hat[0] = u_hat[0];
    }
    let values = tr.inverse(out_hat)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FlowError::NonFinite {
            context: "standard scheme step",
        });
    }
    Ok(ScalarField { grid, values })
}

/// One semi-implicit step of the standard flow.
///
/// The constant-coefficient bi-Laplacian and Laplacian are inverted
/// exactly in Fourier space; all well terms are explicit, so the step is
/// first-order accurate in `dt`.
pub fn step_standard(u_n: &ScalarField, p: &FlowParams) -> Result<ScalarField, FlowError> {
    standard_step_with_dt(u_n, p, p.dt)
}

/// Replaces the zero Fourier mode, i.e. shifts the field by the constant
/// `target_mean - mean(u)`. All other modes are untouched.
pub fn project_volume(u: &ScalarField, target_mean: f64) -> ScalarField {
    let shift = target_mean - u.mean();
    ScalarField {
        grid: u.grid,
        values: u.values.iter().map(|v| v + shift).collect(),
    }
}

/// State of the projection march: the field, its transform, and its
/// diffuse perimeter, kept together so bisection can restart from any
/// stored point without refactoring transforms.
struct ProjectionState {
    values: Vec<f64>,
    hat: Vec<Complex64>,
    perimeter: f64,
}

struct ProjectionEngine {
    tr: Transformer,
    a_hat: Vec<f64>,
    b_hat: Vec<f64>,
    /// 1 / (s sigma eps^2), the mobility of the auxiliary flow.
    mobility: f64,
    eps: f64,
    pin_mean: Option<Complex64>,
}

impl ProjectionEngine {
    /// Advances one semi-implicit inner step of pseudo-time `dtau`:
    /// the screened part `B` implicit, `W'` explicit.
    fn advance(
        &mut self,
        from: &ProjectionState,
        dtau: f64,
        model: &ProfileModel,
    ) -> Result<ProjectionState, FlowError> {
        let n = from.values.len();
        let alpha = dtau * self.mobility;
        let mut f_vals = vec![0.0; n];
        for i in 0..n {
            let (_, wp, _) = model.w_all(from.values[i]);
            f_vals[i] = 0.5 * wp;
        }
        let f_hat = self.tr.forward(&f_vals);
        let mut hat = vec![Complex64::default(); n];
        for k in 0..n {
            hat[k] = (from.hat[k] - alpha * f_hat[k]) / (1.0 + alpha * self.b_hat[k]);
        }
        if let Some(mean) = self.pin_mean {
            hat[0] = mean;
        }
        let values = self.tr.inverse(hat.clone())?;
        // Perimeter of the new state from its spectral data.
        let mut a_spec = hat.clone();
        for (c, a) in a_spec.iter_mut().zip(&self.a_hat) {
            *c *= *a;
        }
        let au = self.tr.inverse(a_spec)?;
        let mut acc = 0.0;
        for i in 0..n {
            let (w, _, _) = model.w_all(values[i]);
            acc += values[i] * (values[i] - au[i]) + w;
        }
        let perimeter = acc / n as f64 / (2.0 * self.eps);
        Ok(ProjectionState {
            values,
            hat,
            perimeter,
        })
    }
}

/// Evolves the auxiliary perimeter flow until `perimeter_ag` meets the
/// target `c` to within 1e-7, locating the stopping time by bisection on
/// the final partial step. The diagnostics carry the accumulated
/// pseudo-time and the flow direction (`+1` shrinking, `-1` growing, `0`
/// if the field already met the target).
pub fn project_perimeter(
    u: &ScalarField,
    c: f64,
    p: &FlowParams,
) -> Result<(ScalarField, StepDiagnostics), FlowError> {
    assert!(c > 0.0, "perimeter target must be positive");
    check_grid(u, p);
    let grid = u.grid;
    let model = &p.model;
    let p0 = crate::energies::perimeter_ag(u, model)?;
    let mut diag = StepDiagnostics::default();
    if (p0 - c).abs() < PERIMETER_TOL {
        return Ok((u.clone(), diag));
    }
    let sign = if p0 > c { 1.0 } else { -1.0 };
    diag.perimeter_projection_sign = sign as i8;

    let eps2 = p.eps * p.eps;
    let dtau = PROJECTION_DTAU_FACTOR * eps2;
    let mut tr = Transformer::new(grid);
    let hat0 = tr.forward(&u.values);
    let mut engine = ProjectionEngine {
        tr,
        a_hat: multiplier_a(grid),
        b_hat: multiplier_b(grid),
        mobility: 1.0 / (sign * model.sigma * eps2),
        eps: p.eps,
        pin_mean: if p.conserve_volume {
            Some(hat0[0])
        } else {
            None
        },
    };
    let mut cur = ProjectionState {
        values: u.values.clone(),
        hat: hat0,
        perimeter: p0,
    };

    for j in 1..=MAX_PROJECTION_STEPS {
        let next = engine.advance(&cur, dtau, model)?;
        if !next.perimeter.is_finite() {
            return Err(FlowError::NonFinite {
                context: "perimeter projection flow",
            });
        }
        if (next.perimeter - c).abs() < PERIMETER_TOL {
            diag.perimeter_projection_time = j as f64 * dtau;
            return Ok((
                ScalarField {
                    grid,
                    values: next.values,
                },
                diag,
            ));
        }
        if (next.perimeter - c) * sign < 0.0 {
            // Crossed the target inside this step: bisect the partial
            // step length from the stored pre-crossing state.
            let mut lo = 0.0f64;
            let mut hi = dtau;
            for _ in 0..MAX_BISECTIONS {
                let mid = 0.5 * (lo + hi);
                let trial = engine.advance(&cur, mid, model)?;
                if (trial.perimeter - c).abs() < PERIMETER_TOL {
                    diag.perimeter_projection_time = (j - 1) as f64 * dtau + mid;
                    return Ok((
                        ScalarField {
                            grid,
                            values: trial.values,
                        },
                        diag,
                    ));
                }
                if (trial.perimeter - c) * sign > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Err(FlowError::ProjectionStalled {
                target: c,
                achieved: cur.perimeter,
            });
        }
        cur = next;
    }
    Err(FlowError::ProjectionStalled {
        target: c,
        achieved: cur.perimeter,
    })
}

/// Advances `u0` to `t_end` with the chosen scheme, applying the enabled
/// projections after every step (volume first, then perimeter, both
/// targeting the initial state's values), reporting every energy after
/// every step, and invoking the observers on each trajectory point
/// including the initial one. The final step is shortened when `t_end`
/// is not a multiple of `dt`. Errors carry the offending step index.
pub fn run_simulation(
    u0: &ScalarField,
    p: &FlowParams,
    scheme: Scheme,
    t_end: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<Vec<TrajectoryPoint>, FlowError> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(FlowError::InvalidParams {
            reason: format!("t_end must be finite and >= 0, got {t_end}"),
        });
    }
    check_grid(u0, p);
    let model = &p.model;
    let target_mean = u0.mean();

    let report0 = energy_report(u0, model, 0.0)?;
    let target_perimeter = report0.perimeter_ag;
    let point0 = TrajectoryPoint {
        step: 0,
        report: report0,
        radius_estimate: radius_estimate(report0.perimeter_ag, u0.grid.dim, model.c0),
        diag: StepDiagnostics::default(),
    };
    for obs in observers.iter_mut() {
        obs.observe(u0, &point0)
            .map_err(|message| at_step(0, FlowError::ObserverAbort { message }))?;
    }
    let mut trajectory = vec![point0];

    let n_steps = if t_end == 0.0 {
        0
    } else {
        (t_end / p.dt - 1e-9).ceil().max(1.0) as usize
    };
    let mut u = u0.clone();
    let mut t_prev = 0.0;
    for step in 1..=n_steps {
        let t_now = (step as f64 * p.dt).min(t_end);
        let dt_k = t_now - t_prev;
        t_prev = t_now;

        let mut diag;
        match scheme {
            Scheme::GradientFree => {
                let (u_new, _h, d) =
                    gradient_free_step_with_dt(&u, p, dt_k).map_err(|e| at_step(step, e))?;
                u = u_new;
                diag = d;
            }
            Scheme::Standard => {
                u = standard_step_with_dt(&u, p, dt_k).map_err(|e| at_step(step, e))?;
                diag = StepDiagnostics::default();
            }
        }
        if p.conserve_volume {
            u = project_volume(&u, target_mean);
        }
        if p.conserve_perimeter {
            let (u_new, pdiag) =
                project_perimeter(&u, target_perimeter, p).map_err(|e| at_step(step, e))?;
            u = u_new;
            diag.perimeter_projection_time = pdiag.perimeter_projection_time;
            diag.perimeter_projection_sign = pdiag.perimeter_projection_sign;
        }

        let report = energy_report(&u, model, t_now).map_err(|e| at_step(step, e.into()))?;
        let point = TrajectoryPoint {
            step,
            report,
            radius_estimate: radius_estimate(report.perimeter_ag, u.grid.dim, model.c0),
            diag,
        };
        for obs in observers.iter_mut() {
            obs.observe(&u, &point)
                .map_err(|message| at_step(step, FlowError::ObserverAbort { message }))?;
        }
        trajectory.push(point);
    }
    Ok(trajectory)
}
