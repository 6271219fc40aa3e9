//! Two-mode squeezing between an optical cavity and a microwave resonator
//! coupled through a squeezed mechanical mode: effective model, Markovian
//! Lyapunov dynamics and non-Markovian Heisenberg-Langevin dynamics.

pub mod analysis;
pub mod covariance;
pub mod error;
pub mod grid;
mod integrate;
pub mod markov;
pub mod model;
pub mod nonmarkov;
pub mod spectra;

pub use covariance::{Cm4, Cm6, CovarianceMatrix, CovarianceTrajectory};
pub use error::{Error, Result};
pub use grid::{DriveSchedule, TimeGrid};
pub use model::{EffectiveModel, SystemParams};
pub use spectra::{LorentzianBath, Mode};
