//! Complete interpolating sequences for Paley-Wiener spaces over finite
//! unions of equal-side cubes.
//!
//! Given `E = Q_0 u ... u Q_{p-1}` with common side `beta`, the lattice
//! `{W n + k_l}` with `W = (2 pi / beta) Id` is a complete interpolating
//! sequence for `PW_E` whenever the shifts `k_l` keep every per-cell
//! exponential system nonsingular. This crate builds such shifts, the
//! biorthogonal kernels `S_l`, the reconstruction series, and numerical
//! certificates (frame bounds, residuals, densities).
//!
//! ```
//! use rieszcube::{CubeUnion, KernelSet};
//!
//! let union = CubeUnion::new(1, 1.0, vec![vec![0.0], vec![2.5]]).unwrap();
//! let kernels = KernelSet::build(union, 0, 1e-3, 64).unwrap();
//! let dev = rieszcube::verify::check_interpolation(&kernels, 3);
//! assert!(dev < 1e-8);
//! ```

pub mod demo;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod reconstruct;
pub mod shifts;
pub mod verify;

pub use geometry::{CubeUnion, GeometryError, Partition, Rect};
pub use kernels::{rect_kernel, solve_coefficients, system_residual, CoefficientTable, KernelError, KernelSet};
pub use reconstruct::{
    bump_oracle, lattice_points, reconstruct_at, sample, synth_from_coeffs, BumpOracle, Lattice, SampleSet,
};
pub use shifts::{choose_shifts, min_normalized_det, system_matrix, ShiftError, ShiftVector};
pub use verify::{DensityReport, GramReport};
