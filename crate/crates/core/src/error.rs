use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("configuration rejected:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("state {index} has ambiguous parity (|<phi|R phi>| = {overlap:.6})")]
    ParityAmbiguous { index: usize, overlap: f64 },

    #[error("degenerate eigenvalue spacing {spacing:e} in the {family} family near energy {energy}")]
    DegenerateSpacing { family: &'static str, energy: f64, spacing: f64 },

    #[error("too few positive-energy states in the {family} family ({count}, need at least 3)")]
    SparseContinuum { family: &'static str, count: usize },

    #[error(
        "imaginary-time relaxation did not converge after {steps} steps (last energy {energy}, last change {delta:e})"
    )]
    NoConvergence { steps: usize, energy: f64, delta: f64 },

    #[error("propagation blew up at t = {t}: squared norm {norm2} exceeds 1")]
    BlowUp { t: f64, norm2: f64 },

    #[error("initial wave packet has {fraction:.4} of its norm inside the absorber (limit 0.01)")]
    PacketInCap { fraction: f64 },

    #[error("no bound state in the confining potential (lowest energy {energy})")]
    NoBoundState { energy: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter { name, reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
