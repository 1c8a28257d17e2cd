//! The optimal one-dimensional transition profile and everything derived
//! from it.
//!
//! With `v0(z) = tanh(z/4)` the profile is
//!
//! ```text
//! q(z) = v0(z) - v0''(z) = t (9 - t^2) / 8,      t = tanh(z/4),
//! ```
//!
//! which satisfies `-v0'' + v0 = q`, so `A0 q = v0` for the line operator
//! `A0 = (-d²/dz² + Id)^{-1}`. The profile increases strictly from -1 to 1
//! and its inverse is well defined on (-1, 1).
//!
//! Two double-well potentials are induced by `q`:
//!
//! * `W`, defined through `W'(q(z)) = -v0'(z) v0(z) = -t(1-t^2)/4`. It
//!   enters the model whose curvature term avoids gradients of the phase
//!   field. Closed forms in `t = t(r)`:
//!
//!   ```text
//!   W   = (1-t^2)^2 (4-t^2) / 64
//!   W'  = -t (1-t^2) / 4
//!   W'' = 2 (3t^2 - 1) / (3 (3 - t^2))
//!   ```
//!
//! * `Wo`, the classical well with `Wo(q(z)) = q'(z)^2 / 2`:
//!
//!   ```text
//!   Wo   = 9 (1-t^2)^2 (3-t^2)^2 / 2048
//!   Wo'  = q''(z(r)) = -3 t (1-t^2) (2-t^2) / 32
//!   Wo'' = -(5t^4 - 9t^2 + 2) / (4 (3 - t^2))
//!   ```
//!
//! Both wells vanish to second order at r = +/-1 and are extended beyond
//! [-1, 1] by quadratics matching value, slope and curvature at the edge:
//! `W = (|r|-1)^2 / 3` and `Wo = (|r|-1)^2 / 8`.
//!
//! The map `f(r) = r + W'(r)/2` satisfies `f(q(z)) = v0(z)` exactly; it
//! converts the profile shape into the plain tanh shape and is used by the
//! diffuse curvature field.
//!
//! Constants: `c0 = int v0'^2 dz = 1/3` and `sigma = c0 / int q'^2 dz`
//! with `int q'^2 dz = 207/560`, hence `sigma = 560/621`. Both are computed
//! here by quadrature rather than hardcoded, and the exact fractions are
//! pinned in the tests.

use std::fmt;

/// Errors from profile evaluation and the line convolution.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileError {
    /// Argument outside the open interval (-1, 1), or not finite.
    DomainError { value: f64 },
    /// The sample window for the line convolution does not contain
    /// [-20, 20], so the truncated kernel integral would not be accurate.
    GridTooSmall { z_lo: f64, z_hi: f64 },
}

impl fmt::Display for ProfileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileError::DomainError { value } => {
                write!(f, "argument {value} is outside the profile range (-1, 1)")
            }
            ProfileError::GridTooSmall { z_lo, z_hi } => write!(
                f,
                "convolution window [{z_lo}, {z_hi}] must contain [-20, 20]"
            ),
        }
    }
}

impl std::error::Error for ProfileError {}

/// `tanh(z/4)` with first and second derivatives.
#[inline]
pub fn eval_v0(z: f64) -> (f64, f64, f64) {
    debug_assert!(z.is_finite() || z.is_infinite());
    let t = (0.25 * z).tanh();
    let u = 1.0 - t * t;
    (t, 0.25 * u, -0.125 * t * u)
}

/// The profile `q` with first and second derivatives.
#[inline]
pub fn eval_profile(z: f64) -> (f64, f64, f64) {
    let t = (0.25 * z).tanh();
    let u = 1.0 - t * t;
    let q = 0.125 * t * (9.0 - t * t);
    let dq = 3.0 / 32.0 * u * (3.0 - t * t);
    let ddq = -3.0 / 32.0 * t * u * (2.0 - t * t);
    (q, dq, ddq)
}

/// Solves `t (9 - t^2) / 8 = r` for `t` in [-1, 1].
///
/// Newton from `t0 = r` with a bisection safeguard; the derivative
/// `(9 - 3t^2)/8` stays in [3/4, 9/8] so convergence is fast and the
/// residual in `r` is driven to machine level.
fn t_of_r(r: f64) -> f64 {
    debug_assert!((-1.0..=1.0).contains(&r));
    let g = |t: f64| 0.125 * t * (9.0 - t * t) - r;
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut t = r;
    for _ in 0..100 {
        let gt = g(t);
        if gt.abs() < 1e-16 {
            return t;
        }
        if gt > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let dg = 0.125 * (9.0 - 3.0 * t * t);
        let mut next = t - gt / dg;
        if !(lo..=hi).contains(&next) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() < 1e-16 {
            return next;
        }
        t = next;
    }
    t
}

/// Inverse of the profile: the `z` with `q(z) = r`.
///
/// Fails with `DomainError` for `|r| >= 1` (the profile only reaches
/// +/-1 in the limit). The result satisfies `|q(z) - r| < 1e-13`.
pub fn invert_profile(r: f64) -> Result<f64, ProfileError> {
    if !(r.abs() < 1.0) {
        return Err(ProfileError::DomainError { value: r });
    }
    let t = t_of_r(r);
    Ok(4.0 * t.atanh())
}

/// The well `W` with first and second derivatives, quadratic beyond [-1, 1].
pub fn potential_w(r: f64) -> (f64, f64, f64) {
    if r.abs() <= 1.0 {
        let t = t_of_r(r);
        let u = 1.0 - t * t;
        let w = u * u * (4.0 - t * t) / 64.0;
        let dw = -0.25 * t * u;
        let ddw = 2.0 * (3.0 * t * t - 1.0) / (3.0 * (3.0 - t * t));
        (w, dw, ddw)
    } else {
        let s = r.signum();
        let e = r - s;
        (e * e / 3.0, 2.0 * e / 3.0, 2.0 / 3.0)
    }
}

/// Third derivative of `W`, used by the Hermite tables.
fn potential_w_third(r: f64) -> f64 {
    if r.abs() <= 1.0 {
        let t = t_of_r(r);
        let d = 3.0 - t * t;
        256.0 * t / (9.0 * d * d * d)
    } else {
        0.0
    }
}

/// The classical well `Wo` with first and second derivatives, quadratic
/// beyond [-1, 1].
pub fn potential_wo(r: f64) -> (f64, f64, f64) {
    if r.abs() <= 1.0 {
        let t = t_of_r(r);
        let t2 = t * t;
        let u = 1.0 - t2;
        let d = 3.0 - t2;
        let wo = 9.0 * u * u * d * d / 2048.0;
        let dwo = -3.0 / 32.0 * t * u * (2.0 - t2);
        let ddwo = -(5.0 * t2 * t2 - 9.0 * t2 + 2.0) / (4.0 * d);
        (wo, dwo, ddwo)
    } else {
        let s = r.signum();
        let e = r - s;
        (0.125 * e * e, 0.25 * e, 0.25)
    }
}

/// Third derivative of `Wo`, used by the Hermite tables.
fn potential_wo_third(r: f64) -> f64 {
    if r.abs() <= 1.0 {
        let t = t_of_r(r);
        let t2 = t * t;
        let d = 3.0 - t2;
        20.0 / 3.0 * t * (t2 - 1.0) * (t2 - 5.0) / (d * d * d)
    } else {
        0.0
    }
}

/// The profile-to-tanh map `f(r) = r + W'(r)/2` and its derivative.
pub fn eval_f(r: f64) -> (f64, f64) {
    let (_, dw, ddw) = potential_w(r);
    (r + 0.5 * dw, 1.0 + 0.5 * ddw)
}

/// Adaptive Simpson quadrature, used for the energy constants.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// Computes `(c0, sigma)` by quadrature.
///
/// `c0 = int v0'^2 dz` is the perimeter density of the tanh shape and
/// `sigma = c0 / int q'^2 dz` relates the two diffuse perimeters; it is
/// the mobility factor between the nominal and effective coefficients of
/// the gradient-free flow. Integrands are even and decay like `e^{-z}`,
/// so [0, 80] doubled captures them to machine precision.
pub fn compute_constants() -> (f64, f64) {
    let v0p2 = |z: f64| {
        let (_, d, _) = eval_v0(z);
        d * d
    };
    let qp2 = |z: f64| {
        let (_, d, _) = eval_profile(z);
        d * d
    };
    let c0 = 2.0 * adaptive_simpson(&v0p2, 0.0, 80.0, 1e-15);
    let nq = 2.0 * adaptive_simpson(&qp2, 0.0, 80.0, 1e-15);
    (c0, c0 / nq)
}

/// Applies the line operator `A0 = (-d²/dz² + Id)^{-1}` to samples of `w`
/// by convolution with the Green kernel `J(x) = e^{-|x|}/2`.
///
/// `w[i]` is the sample at `z0 + i h`. The kernel integral is truncated to
/// the sample window and evaluated with the trapezoid rule, using prefix
/// recurrences so the whole output costs O(n). The window must contain
/// [-20, 20]; outside contributions are then below `e^{-20}` for bounded
/// inputs wherever the result is used.
pub fn a0_convolve(z0: f64, h: f64, w: &[f64]) -> Result<Vec<f64>, ProfileError> {
    assert!(h.is_finite() && h > 0.0, "step must be positive");
    assert!(w.len() >= 2, "need at least two samples");
    let z_hi = z0 + h * (w.len() - 1) as f64;
    if z0 > -20.0 || z_hi < 20.0 {
        return Err(ProfileError::GridTooSmall { z_lo: z0, z_hi });
    }
    let n = w.len();
    let decay = (-h).exp();
    let half_h = 0.5 * h;

    // left[i] = trapezoid of int_{z0}^{z_i} e^{-(z_i - s)} w(s) ds
    let mut left = vec![0.0; n];
    for i in 1..n {
        left[i] = decay * left[i - 1] + half_h * (decay * w[i - 1] + w[i]);
    }
    // right[i] = trapezoid of int_{z_i}^{z_hi} e^{-(s - z_i)} w(s) ds
    let mut right = vec![0.0; n];
    for i in (0..n - 1).rev() {
        right[i] = decay * right[i + 1] + half_h * (decay * w[i + 1] + w[i]);
    }
    Ok((0..n).map(|i| 0.5 * (left[i] + right[i])).collect())
}

const TABLE_INTERVALS: usize = 4096;

/// Cubic Hermite tables for `W` and `Wo` on [-1, 1].
///
/// Each node stores value and first three derivatives; value, slope and
/// curvature are interpolated from consecutive derivative pairs, which
/// keeps the three outputs mutually consistent. With 4096 intervals the
/// interpolation error is far below the 1e-9 accuracy contract.
#[derive(Debug, Clone)]
struct PotentialTable {
    inv_h: f64,
    w: Vec<[f64; 4]>,
    wo: Vec<[f64; 4]>,
}

#[inline]
fn hermite(s: f64, h: f64, g0: f64, d0: f64, g1: f64, d1: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * g0
        + h * (s3 - 2.0 * s2 + s) * d0
        + (3.0 * s2 - 2.0 * s3) * g1
        + h * (s3 - s2) * d1
}

impl PotentialTable {
    fn build() -> Self {
        let n = TABLE_INTERVALS;
        let h = 2.0 / n as f64;
        let mut w = Vec::with_capacity(n + 1);
        let mut wo = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let r = (-1.0 + h * i as f64).clamp(-1.0, 1.0);
            let (a, b, c) = potential_w(r);
            w.push([a, b, c, potential_w_third(r)]);
            let (a, b, c) = potential_wo(r);
            wo.push([a, b, c, potential_wo_third(r)]);
        }
        PotentialTable {
            inv_h: 1.0 / h,
            w,
            wo,
        }
    }

    #[inline]
    fn eval(nodes: &[[f64; 4]], inv_h: f64, r: f64) -> (f64, f64, f64) {
        let x = (r + 1.0) * inv_h;
        let i = (x as usize).min(nodes.len() - 2);
        let s = x - i as f64;
        let h = 1.0 / inv_h;
        let a = &nodes[i];
        let b = &nodes[i + 1];
        (
            hermite(s, h, a[0], a[1], b[0], b[1]),
            hermite(s, h, a[1], a[2], b[1], b[2]),
            hermite(s, h, a[2], a[3], b[2], b[3]),
        )
    }
}

/// The profile together with its constants and fast potential tables.
///
/// Building the model computes `c0` and `sigma` by quadrature and fills
/// the Hermite tables; evaluation methods then cost a few flops per call,
/// which matters because the steppers evaluate the wells at every grid
/// point of every fixed-point sweep.
#[derive(Debug, Clone)]
pub struct ProfileModel {
    /// `int v0'^2 dz = 1/3`.
    pub c0: f64,
    /// `c0 / int q'^2 dz = 560/621`.
    pub sigma: f64,
    /// Half-width of the region beyond [-1, 1] covered by the quadratic
    /// well extensions in printed tables.
    pub extension_margin: f64,
    table: PotentialTable,
}

impl Default for ProfileModel {
    fn default() -> Self {
        Self::new()
    }
}

impl ProfileModel {
    pub fn new() -> Self {
        let (c0, sigma) = compute_constants();
        ProfileModel {
            c0,
            sigma,
            extension_margin: 0.5,
            table: PotentialTable::build(),
        }
    }

    /// The tanh shape `v0(z)`.
    #[inline]
    pub fn v0(&self, z: f64) -> f64 {
        (0.25 * z).tanh()
    }

    /// The profile `q(z)`.
    #[inline]
    pub fn q(&self, z: f64) -> f64 {
        eval_profile(z).0
    }

    /// Table lookup of `(W, W', W'')`, falling back to the quadratic
    /// extension outside [-1, 1].
    #[inline]
    pub fn w_all(&self, r: f64) -> (f64, f64, f64) {
        if r.abs() <= 1.0 {
            PotentialTable::eval(&self.table.w, self.table.inv_h, r)
        } else {
            let s = r.signum();
            let e = r - s;
            (e * e / 3.0, 2.0 * e / 3.0, 2.0 / 3.0)
        }
    }

    /// Table lookup of `(Wo, Wo', Wo'')`, falling back to the quadratic
    /// extension outside [-1, 1].
    #[inline]
    pub fn wo_all(&self, r: f64) -> (f64, f64, f64) {
        if r.abs() <= 1.0 {
            PotentialTable::eval(&self.table.wo, self.table.inv_h, r)
        } else {
            let s = r.signum();
            let e = r - s;
            (0.125 * e * e, 0.25 * e, 0.25)
        }
    }

    /// `(f, f')` from the tabulated well.
    #[inline]
    pub fn f_of(&self, r: f64) -> (f64, f64) {
        let (_, dw, ddw) = self.w_all(r);
        (r + 0.5 * dw, 1.0 + 0.5 * ddw)
    }
}
