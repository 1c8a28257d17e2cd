//! Pseudospectral phase-field toolkit for diffuse-interface geometric flows
//! on the periodic box [-1/2, 1/2]^n.
//!
//! The crate implements two diffuse approximations of perimeter and Willmore
//! energies and their L^2 gradient flows:
//!
//! * a formulation whose curvature term needs no gradients of the phase
//!   field, built from the smoothing operator `A_eps = (-eps^2 Δ + Id)^{-1}`
//!   and a specially constructed double-well potential `W`, and
//! * the classical Cahn-Hilliard / De Giorgi formulation with its own
//!   potential `Wo`.
//!
//! Modules:
//!
//! * [`profile1d`]: the optimal 1D transition profile, its inverse, the two
//!   potentials with derivatives, the line-convolution kernel, and the
//!   energy constants.
//! * [`spectral`]: torus grids, scalar fields, Fourier multipliers, and
//!   snapshot I/O.
//! * [`energies`]: discrete diffuse perimeters, Willmore energies, and the
//!   diffuse mean curvature field.
//! * [`flows`]: the implicit fixed-point stepper, a semi-implicit stepper
//!   for the classical model, volume and perimeter constraint projections,
//!   and the simulation driver.
//! * [`geometry`]: signed-distance shape constructors and phase-field
//!   initialization.
//! * [`reference`]: the sharp-interface radius ODE used as a validation
//!   oracle for sphere benchmarks.
//! * [`cli`]: config parsing and the batch command entry points.

pub mod cli;
pub mod energies;
pub mod flows;
pub mod geometry;
pub mod profile1d;
pub mod reference;
pub mod spectral;
