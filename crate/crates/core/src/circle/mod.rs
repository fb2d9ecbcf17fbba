//! Circle-method geometry and the approximating multipliers.

pub mod arcs;
pub mod bump;
pub mod multipliers;
pub mod schedule;

pub use arcs::{
    classify_arc, dirichlet_approx, refine_arc_membership, shell_index, ArcClass, ArcParams, ShellMembership,
};
pub use bump::{bump, bump_difference_l1, bump_kernel_l1, dilated_shift_norm, kernel_grid, scaled_bump};
pub use multipliers::{
    approx_error_grid, lambda_mult, level_terms, level_terms_exhaustive, major_arc_error, nu, nu_terms, omega,
    prepare_grid, sum_terms, sweep_prepared, ApproxErrorPoint, ApproxTarget, CenterTerm, NuOptions, NuValue,
    PreparedGrid, TorusGrid,
};
pub use schedule::{split_schedule, Assignment, SplitSchedule};
