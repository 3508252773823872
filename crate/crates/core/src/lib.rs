//! Harmonic analysis on bounded Vilenkin groups.
//!
//! The group is truncated at a level `N`; every object is a level-`N`
//! cylinder function stored as `M_N` complex cell values. On top of the
//! fast Vilenkin-Fourier transform the crate provides Dirichlet, Fejér and
//! Nörlund kernels, Nörlund means and their maximal operators, `L_p`,
//! weak-`L_p` and Hardy quasi-norms, `p`-atoms, and a harness that measures
//! the constants in the classical kernel estimates and in the `(H_p, L_p)`
//! inequalities for Nörlund means with non-decreasing weights.

pub mod cli;
pub mod error;
pub mod group;
pub mod io;
pub mod kernels;
pub mod spaces;
pub mod spectral;
pub mod summability;
pub mod verify;

pub use error::{Error, Result};
pub use group::{haar_integrate, AnnulusCell, GroupSpec, Point};
pub use kernels::{KernelFunction, KernelKind};
pub use spaces::{Atom, QuasiNormReport};
pub use spectral::{CylinderFunction, Spectrum};
pub use summability::{MaximalWeight, WeightKind, WeightSequence};

pub use num_complex::Complex64;
