//! Position-based two-site qubits coupled to a multilevel quantum
//! electromagnetic cavity.
//!
//! The crate is generic over the real scalar ([`Real`], implemented for `f32`
//! and `f64`). The `*64` aliases below fix the common double-precision case.
//!
//! * [`signals`]: closed-form time signals with exact and adaptive integrals.
//! * [`tbq`]: the isolated tight-binding qubit, its spectrum and adiabatic evolution.
//! * [`cavity`]: block Hamiltonians for one or more qubits in the cavity.
//! * [`propagate`]: analytic, exp-of-integral and time-ordered block propagators.
//! * [`observe`]: density matrices, partial traces, entropies and Rabi fits.
//! * [`cli`]: scenario files, simulation runs and parameter sweeps.

pub mod cavity;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod observe;
pub mod propagate;
pub mod scalar;
pub mod signals;
pub mod tbq;

pub use cavity::{
    assemble_general, assemble_general_with_cap, assemble_one_qubit, assemble_two_qubit, cavity_level_energy,
    mode_signal, BlockHamiltonian, CavityParams, DipoleQubit, HermitianBlock, Hop, ModeParity,
};
pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use observe::{
    cavity_population, density_from_state, entropy_closed_form_2x2, multiphoton_probability,
    normalized_joint_probabilities, projector_site, rabi_frequency_estimate, reduce, site_probability,
    von_neumann_entropy, DensityMatrix, JointProbabilities, Site,
};
pub use propagate::{
    block_drives, closed_form_block, exp_of_integral_block, propagate_state, time_ordered_oracle, BlockDrive,
    DriveReading, Method, Propagator,
};
pub use scalar::Real;
pub use signals::{Signal, Trig};
pub use tbq::{adiabatic_evolve, eigenenergies, eigenstates, Basis, QubitParams, StateVector};

pub type Signal64 = Signal<f64>;
pub type QubitParams64 = QubitParams<f64>;
pub type StateVector64 = StateVector<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type CavityParams64 = CavityParams<f64>;
pub type DipoleQubit64 = DipoleQubit<f64>;
pub type BlockHamiltonian64 = BlockHamiltonian<f64>;
pub type BlockDrive64 = BlockDrive<f64>;
pub type Propagator64 = Propagator<f64>;
pub type DensityMatrix64 = DensityMatrix<f64>;

pub type Signal32 = Signal<f32>;
pub type QubitParams32 = QubitParams<f32>;
pub type StateVector32 = StateVector<f32>;
pub type CMatrix32 = CMatrix<f32>;
pub type Propagator32 = Propagator<f32>;
pub type DensityMatrix32 = DensityMatrix<f32>;
