//! Exact-diagonalization laboratory for energy-filtered states of a
//! spin-1/2 chain: Pauli-string operators, Gaussian energy filters with
//! three backends, unitary dynamics with time-average predictions,
//! entanglement measures, and the replica closed forms they are tested
//! against.

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod filter;
pub mod hamiltonian;
mod linalg;
pub mod pauli;
pub mod quad;
pub mod replica;
pub mod spectral;
pub mod state;
pub mod table;

pub use dynamics::{
    connected_correlator, connected_correlator_prediction, connected_correlator_prediction_pair,
    evolve, filtered_expectation_prediction, filtered_expectation_prediction_even, loschmidt_echo,
    loschmidt_rate_series, observable_series, observable_series_between,
    observable_series_two_sided, time_averaged_density_matrix, DensityMatrix, TimeSeries,
};
pub use entanglement::{
    entropy_sweep, mutual_information, rdm_moment, reduced_density_matrix,
    reduced_density_matrix_mixed, renyi_entropy, renyi_entropy_pure, schmidt_spectrum,
    spectrum_entropy, Region,
};
pub use error::{Error, Result};
pub use filter::{
    apply_gaussian_filter, filter_state, fourier_filter, iterative_filter, phase_aligned_distance,
    variance_prediction, FilterBackend, FilterKernel, FourierGrid,
};
pub use hamiltonian::{
    build_hamiltonian, build_hamiltonian_with_cap, local_observable, shift_hamiltonian, Boundary,
    HamiltonianSpec, HermitianOperator, DEFAULT_DENSE_CAP,
};
pub use pauli::{PauliAxis, PauliSum, PauliTerm};
pub use replica::{
    build_mn, det_m1, det_mn, det_mn_continued, det_nn, fit_growth_rate, gmft_asymptotic,
    gmft_asymptotic_with, medium_entropy_prediction, mn_eigenvalues, nn_eigenvalues, s2_half_chain,
    short_filter_entropy_delta, ReplicaParams, TwistFit,
};
pub use spectral::{
    eigendecompose, energy_moments, overlap_distribution, OverlapSpectrum, SpectralData,
};
pub use state::{expectation, product_state, PureState, SitePattern};
pub use table::{Cell, ResultTable};
