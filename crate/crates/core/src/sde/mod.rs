//! Brownian paths, Euler-Maruyama and Monte-Carlo probes.

mod brownian;
mod coefficient;
mod coupling;
mod estimate;
mod euler;
mod functionals;
mod transformed;

pub use brownian::{BrownianPath, MAX_LEVEL};
pub use coefficient::{Coefficient, Constant, FnCoefficient};
pub use coupling::{coupling_experiment, sup_distance, CouplingRow, CouplingTable};
pub use estimate::{Executor, MCEstimate, MeanVar, Sequential};
pub use euler::{cap_vector, euler_maruyama, EulerOptions, Trajectory};
pub use functionals::{
    girsanov_weight, khasminskii_functional, krylov_mc, KhasminskiiEstimate, McConfig, MIN_SAMPLES,
};
pub use transformed::{zvonkin_simulate, ZvonkinSimulator};
