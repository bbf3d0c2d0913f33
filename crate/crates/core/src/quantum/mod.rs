//! Exact desk-scale quantum solvers: periodic 1D plane-wave
//! diagonalization, 2D Dirichlet grid eigensolver, split-operator
//! wave-packet propagation, and autocorrelation spectroscopy.

mod grid2d;
mod heller;
mod planewave;
mod splitstep;

pub use grid2d::{solve_dirichlet_1d, solve_grid_2d, GridBox, Spectrum2D};
pub use heller::{
    autocorrelation_from_weights, discrete_weights, expand_in_basis, spectral_transform,
    SpectralWeights,
};
pub use planewave::{solve_periodic_1d, Spectrum1D};
pub use splitstep::{propagate_splitstep, sample_packet, PacketSpec, PropagationGrid, WavePacketRun};
