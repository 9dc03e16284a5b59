//! Solvers for mean-field equilibrium and kinetic equations of rod-like and
//! composite particles on metric configuration spaces.
//!
//! The crate covers four solver families:
//!
//! * [`maier_saupe`] — spectral branch continuation for the circle
//!   Maier-Saupe model: partition function, Fourier coefficients,
//!   bifurcation at b = 4, and the zero-temperature concentration of the
//!   equilibrium density.
//! * [`kinetics`] — time integration of the associated kinetic equation,
//!   both as a truncated ODE hierarchy for the cosine coefficients and as a
//!   pseudospectral grid PDE used for cross-validation, with free-energy
//!   dissipation monitoring.
//! * [`two_rod`] — the interacting two-rod model: reduction to a scalar
//!   transcendental equation, the rescaled partition integral and its heat
//!   equation, and the transition to configurations concentrated near right
//!   angles.
//! * [`corpus`] — a general Onsager solver on finite metric measure spaces:
//!   damped fixed-point iteration, entropic descent over the probability
//!   simplex, product composition for freely articulated composites, and
//!   concentration diagnostics at large interaction intensity.
//!
//! Shared infrastructure lives in [`grid`], [`density`], [`space`],
//! [`kernel`], and [`energy`].

pub mod corpus;
pub mod density;
pub mod energy;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod kinetics;
pub mod maier_saupe;
pub mod space;
pub mod two_rod;
mod util;

pub use density::{FourierDensity, GridDensity, MeasureSpace, DEFAULT_MODES};
pub use error::{Error, Result};
pub use grid::{periodic_quadrature, CircleGrid, DEFAULT_GRID_N};
pub use kernel::{KernelKind, KernelSpec};
pub use space::DiscreteCorpusSpace;
