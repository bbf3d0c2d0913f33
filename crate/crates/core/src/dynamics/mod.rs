//! Classical Hamiltonian orbits, variational (linearized) flow and the
//! transverse monodromy data that feeds the semiclassical scar model.

mod coefficients;
mod monodromy;
mod orbit;

pub use coefficients::{
    action_of_orbit, analytic_saddle_coefficients, coefficients_from_monodromy,
    multi_pass_coefficients, w_zero, TransverseCoefficients,
};
pub use monodromy::{integrate_monodromy, MonodromyMatrix};
pub use orbit::{
    closed_orbit_period, integrate_orbit, IntegratorOrder, OrbitResult, SaddleOrbitSpec,
    TrajectoryState,
};
