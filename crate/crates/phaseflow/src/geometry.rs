//! Shape constructors and phase-field initialization.
//!
//! Every experiment starts from `u0 = q(sdist / eps)` where `sdist` is the
//! signed distance to a shape boundary, taken positive inside and
//! evaluated with periodic wrap on the unit box. Balls and cuboids carry
//! exact distances; unions take the max of member distances (exact away
//! from intersection curves, which is all the touching/overlapping initial
//! data need); xor alternates the phase on overlaps, producing the
//! inverted-phases configurations.

use crate::profile1d::eval_profile;
use crate::spectral::{ScalarField, TorusGrid};

/// A shape on the periodic unit box, in grid dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Union(Vec<ShapeSpec>),
    Xor(Vec<ShapeSpec>),
    Cuboid {
        center: Vec<f64>,
        half_widths: Vec<f64>,
    },
    /// `count` balls with radii uniform in `radius_range`, centers placed
    /// so each ball stays inside the fundamental cell. Fully determined
    /// by the seed.
    RandomBalls {
        count: usize,
        radius_range: (f64, f64),
        rng_seed: u64,
    },
}

/// Counter-mode splitmix64: the i-th draw from a seed, reproducible
/// across platforms and independent of call order.
pub(crate) fn splitmix64(seed: u64, i: u64) -> u64 {
    let mut x = seed.wrapping_add((i.wrapping_add(1)).wrapping_mul(0x9e3779b97f4a7c15));
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^= x >> 31;
    x
}

/// Uniform draw in [0, 1).
pub(crate) fn splitmix_unit(seed: u64, i: u64) -> f64 {
    (splitmix64(seed, i) >> 11) as f64 / (1u64 << 53) as f64
}

/// Offset wrapped to the nearest periodic image, in [-1/2, 1/2].
#[inline]
fn wrap(t: f64) -> f64 {
    t - t.round()
}

fn ball_distance(center: &[f64], radius: f64, x: &[f64]) -> f64 {
    let mut d2 = 0.0;
    for (c, xi) in center.iter().zip(x) {
        let o = wrap(xi - c);
        d2 += o * o;
    }
    radius - d2.sqrt()
}

fn cuboid_distance(center: &[f64], half_widths: &[f64], x: &[f64]) -> f64 {
    // Standard box distance: positive part of the per-axis excess gives
    // the outside distance, the largest (negative) excess the inside one.
    let mut out2 = 0.0;
    let mut inside = f64::NEG_INFINITY;
    for ((c, hw), xi) in center.iter().zip(half_widths).zip(x) {
        let e = wrap(xi - c).abs() - hw;
        if e > 0.0 {
            out2 += e * e;
        }
        inside = inside.max(e);
    }
    if out2 > 0.0 {
        -out2.sqrt()
    } else {
        -inside
    }
}

/// Signed distance of the two-set symmetric difference: positive inside
/// exactly one of the sets.
fn xor_pair(a: f64, b: f64) -> f64 {
    a.min(-b).max((-a).min(b))
}

/// Expands `RandomBalls` into the concrete union it denotes; other
/// variants are returned as they are (members expanded recursively).
pub fn expand_random(s: &ShapeSpec, dim: usize) -> ShapeSpec {
    match s {
        ShapeSpec::RandomBalls {
            count,
            radius_range,
            rng_seed,
        } => {
            let (lo, hi) = *radius_range;
            let mut members = Vec::with_capacity(*count);
            let mut draw = 0u64;
            for _ in 0..*count {
                let r = lo + (hi - lo) * splitmix_unit(*rng_seed, draw);
                draw += 1;
                let mut center = Vec::with_capacity(dim);
                for _ in 0..dim {
                    let span = 0.5 - r;
                    let u = splitmix_unit(*rng_seed, draw);
                    draw += 1;
                    center.push((2.0 * u - 1.0) * span);
                }
                members.push(ShapeSpec::Ball { center, radius: r });
            }
            ShapeSpec::Union(members)
        }
        ShapeSpec::Union(ms) => {
            ShapeSpec::Union(ms.iter().map(|m| expand_random(m, dim)).collect())
        }
        ShapeSpec::Xor(ms) => ShapeSpec::Xor(ms.iter().map(|m| expand_random(m, dim)).collect()),
        other => other.clone(),
    }
}

/// Signed distance to the shape boundary at `x`, positive inside, with
/// periodic wrap.
pub fn signed_distance(s: &ShapeSpec, x: &[f64]) -> f64 {
    match s {
        ShapeSpec::Ball { center, radius } => {
            assert_eq!(center.len(), x.len(), "ball dimension mismatch");
            ball_distance(center, *radius, x)
        }
        ShapeSpec::Cuboid {
            center,
            half_widths,
        } => {
            assert_eq!(center.len(), x.len(), "cuboid dimension mismatch");
            cuboid_distance(center, half_widths, x)
        }
        ShapeSpec::Union(ms) => {
            assert!(!ms.is_empty(), "empty union");
            ms.iter()
                .map(|m| signed_distance(m, x))
                .fold(f64::NEG_INFINITY, f64::max)
        }
        ShapeSpec::Xor(ms) => {
            assert!(!ms.is_empty(), "empty xor");
            let mut it = ms.iter().map(|m| signed_distance(m, x));
            let first = it.next().unwrap();
            it.fold(first, xor_pair)
        }
        ShapeSpec::RandomBalls { .. } => signed_distance(&expand_random(s, x.len()), x),
    }
}

/// Largest representable value strictly below 1; initialization clamps to
/// keep `|u0| < 1` even where the profile saturates in f64.
const MAX_PHASE: f64 = 1.0 - f64::EPSILON;

/// Builds the initial phase field `u0 = q(sdist / eps)` on the grid.
pub fn initialize(grid: TorusGrid, s: &ShapeSpec) -> ScalarField {
    let shape = expand_random(s, grid.dim);
    let eps = grid.eps;
    ScalarField::from_fn(grid, |x| {
        let z = signed_distance(&shape, x) / eps;
        eval_profile(z).0.clamp(-MAX_PHASE, MAX_PHASE)
    })
}
