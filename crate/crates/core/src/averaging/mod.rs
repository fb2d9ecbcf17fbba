//! Averaging operators `M_N` on `Z^d`, their kernels and multipliers.

pub mod fourier;
pub mod kernel;
pub mod lattice;
pub mod multiplier;
pub mod ops;
pub mod phi;

pub use fourier::{average_cyclic, fourier_project, frequency, CyclicFunction};
pub use kernel::{build_kernel, KernelSource, SparseKernel};
pub use lattice::{LatticeFunction, LatticeValue, Storage};
pub use multiplier::{e, multiplier_m, MultiplierKind, MultiplierValue};
pub use ops::{average_at, average_direct, average_transform, average_with_kernel, maximal_function};
pub use phi::{phi, phi_linear_closed_form, QuadratureSpec};
