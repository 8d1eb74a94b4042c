//! Disentanglement of two qubits locally coupled to a transverse-field Ising
//! chain after a global quench of the field.
//!
//! The qubits start in the Bell state `(|up up> + |down down>)/sqrt(2)` and
//! the chain in the ground state of `H(lambda_i)`. The field is switched to
//! `lambda_f` at `t = 0+`, after which the chain evolves under one of two
//! channel Hamiltonians depending on the qubit state. The qubit coherence is
//! the overlap of the two evolved chain states; its squared modulus is the
//! Loschmidt echo and its modulus is the concurrence.
//!
//! The echo is computed exactly through free fermions ([`fermion`]) and
//! checked against dense many-body evolution ([`oracle`]).

pub mod error;
pub mod fermion;
pub mod lattice;
mod linalg;


pub use error::{Error, ErrorClass, Result};
pub use fermion::{
    diagonalize, echo_timeseries, evolve_covariance, ground_state_covariance, loschmidt_echo,
    single_defect_echo, uniform_ground_state, BdgDecomposition, CovarianceMatrix, EchoSeries,
    FixedTimeEcho, QuenchDynamics,
};
pub use lattice::{
    build_coupling_matrices, build_single_particle_hamiltonian, channel_fields, Boundary, Channel,
    CouplingMatrices, FieldConfiguration, QuenchProtocol, Stage,
};
pub mod observables;
pub mod oracle;
pub mod runner;
