//! Forward, backward and dual parabolic problems on the periodic grid.

mod coefficient;
mod estimates;
mod kernel;
pub mod manufactured;
mod solver;

pub use coefficient::DiffusionCoefficient;
pub use estimates::{
    regularity_ratio, small_time_decay, unit_source_sup_ratio, DecayRow, DecayTable, DecayVariant,
    RegularityRatios, DECAY_HORIZONS,
};
pub use kernel::heat_kernel_oracle;
pub use solver::{
    solve_backward, solve_dual, solve_dual_from, solve_forward, solve_forward_from, step_defect, ProblemKind,
    SolveReport, SolverOptions,
};
