//! Energy spectra of particles removed by a complex absorbing potential, one
//! absorption at a time, for one- and two-particle systems in one dimension.
//!
//! The two-particle state is propagated with a split-operator scheme; each
//! absorption feeds a one-particle density matrix, which in turn feeds the
//! vacuum probability. Time-integrated absorption data are projected onto the
//! scattering states of the one-particle Hamiltonian to give `dP2/dε` (first
//! absorption) and `dP1/dε` (second absorption).

pub mod eigenbasis;
pub mod error;
pub mod export;
pub mod grid;
pub mod hamiltonian;
pub mod lindblad;
pub mod matrix;
pub mod pipeline;
pub mod scenario;
pub mod spectra;
pub mod spectral;
pub mod twobody;

pub use error::{Error, Result};
