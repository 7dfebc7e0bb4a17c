//! Driven, lossy Kerr/linear resonator pair.
//!
//! Hamiltonians and Fock-space plumbing, closed-form and numeric
//! non-Hermitian spectra, Lindblad steady states, perturbative amplitudes,
//! photon statistics and the loss-sweep experiments built on top.

pub mod error;
pub mod analytic;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod experiments;
pub mod figures;
pub mod validate;
pub mod hilbert;
pub mod liouvillian;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod roots;
pub mod spectral;

pub use error::{Error, Result};
pub use hilbert::{mode_operator, ComplexOperator, FockBasis, LadderKind, Mode, Truncation};
pub use model::{build_hamiltonian, derived_rates, DerivedRates, HamiltonianVariant, SystemParams, UnitSystem};
