//! Sharp-interface evolution of a single sphere, used as the validation
//! oracle for the phase-field benchmarks.
//!
//! A sphere of radius `r` in dimension `n` moving by the combined Willmore
//! and perimeter gradient flow obeys
//!
//! ```text
//! dr/dt = l1 ((n-1)^2 - (n-1)^3 / 2) / r^3 - l2 (n-1) / r
//! ```
//!
//! where `l1` scales the Willmore part and `l2` the perimeter part. In 2D
//! this is `l1 / (2 r^3) - l2 / r`, giving the closed forms
//! `r = sqrt(R0^2 - 2 l2 t)` for pure shrinkage, `r = (R0^4 + 2 l1 t)^{1/4}`
//! for pure Willmore expansion, and the stable equilibrium
//! `r* = sqrt(l1 / (2 l2))` when both act. In 3D the Willmore term vanishes
//! for spheres.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceError {
    /// The radius reached zero during integration.
    RadiusCollapse { t: f64 },
}

impl fmt::Display for ReferenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceError::RadiusCollapse { t } => {
                write!(f, "sphere radius collapsed to zero near t = {t}")
            }
        }
    }
}

impl std::error::Error for ReferenceError {}

/// Radius, ambient dimension (2 or 3) and current time of a sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusState {
    pub r: f64,
    pub n: u32,
    pub t: f64,
}

/// Trajectory of the radius equation; `collapsed` marks an early halt
/// near radius zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusCurve {
    pub samples: Vec<RadiusState>,
    pub collapsed: bool,
}

/// Right-hand side of the radius equation.
pub fn radius_rhs(s: RadiusState, lambda1_o: f64, lambda2_o: f64) -> f64 {
    assert!(s.n == 2 || s.n == 3, "dimension must be 2 or 3");
    let m = (s.n - 1) as f64;
    lambda1_o * (m * m - 0.5 * m * m * m) / (s.r * s.r * s.r) - lambda2_o * m / s.r
}

/// Integrates the radius equation with classical RK4 at fixed step `dt`,
/// shortening the final step to land on `t_end` exactly.
///
/// Returns the full trajectory including the initial state. When the
/// perimeter term is shrinking the sphere and the remaining lifetime
/// `r^2 / (2 lambda2_o (n-1))` falls below ten steps, integration halts
/// early with `collapsed` set instead of chasing the singularity. A hard
/// `RadiusCollapse` error is returned only if a step or RK4 stage actually
/// produces a nonpositive or nonfinite radius (step too large).
pub fn integrate_radius(
    start: RadiusState,
    lambda1_o: f64,
    lambda2_o: f64,
    t_end: f64,
    dt: f64,
) -> Result<RadiusCurve, ReferenceError> {
    assert!(dt > 0.0 && dt.is_finite(), "step must be positive");
    assert!(t_end >= start.t, "t_end must not precede the start time");
    assert!(start.r > 0.0, "initial radius must be positive");
    let n = start.n;
    let shrink = lambda2_o * (n - 1) as f64;
    let rhs = |r: f64, t: f64| {
        radius_rhs(
            RadiusState { r, n, t },
            lambda1_o,
            lambda2_o,
        )
    };

    let mut samples = vec![start];
    let mut state = start;
    let mut collapsed = false;
    while state.t < t_end - 1e-15 * t_end.max(1.0) {
        if shrink > 0.0 && state.r * state.r < 20.0 * shrink * dt {
            collapsed = true;
            break;
        }
        let h = dt.min(t_end - state.t);
        let r = state.r;
        let guard = |x: f64| -> Result<f64, ReferenceError> {
            if x > 0.0 && x.is_finite() {
                Ok(x)
            } else {
                Err(ReferenceError::RadiusCollapse { t: state.t })
            }
        };
        let k1 = rhs(guard(r)?, state.t);
        let k2 = rhs(guard(r + 0.5 * h * k1)?, state.t + 0.5 * h);
        let k3 = rhs(guard(r + 0.5 * h * k2)?, state.t + 0.5 * h);
        let k4 = rhs(guard(r + h * k3)?, state.t + h);
        let r_next = r + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let t_next = state.t + h;
        if !(r_next > 0.0) || !r_next.is_finite() {
            return Err(ReferenceError::RadiusCollapse { t: t_next });
        }
        state = RadiusState {
            r: r_next,
            n,
            t: t_next,
        };
        samples.push(state);
    }
    Ok(RadiusCurve { samples, collapsed })
}
