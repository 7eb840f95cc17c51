//! Simulation and estimation stack for the minimal two-qubit quantum energy
//! teleportation (QET) protocol.
//!
//! * [`sim`]: exact state-vector / density-matrix engine with seeded sampling.
//! * [`model`]: closed-form Hamiltonians, ground state, protocol angles and energies.
//! * [`protocol`]: deposit/receive circuits and count-based energy estimators.
//! * [`mitigation`]: synthetic readout noise and calibration-matrix correction.
//! * [`analysis`]: sweeps, scans and comparison reports.

pub mod analysis;
pub mod error;
pub mod mitigation;
pub mod model;
pub mod protocol;
pub mod rng;
pub mod sim;

pub use error::{QetError, Result};
pub use mitigation::{CalibrationMatrix, MitigationMethod, ReadoutNoise};
pub use model::{HamiltonianSet, ModelParams, ProtocolAngles};
pub use protocol::{EstimationResult, MeasurementTarget, ProtocolMode, Quantity};
pub use sim::{Circuit, Counts, DensityMatrix, GateStep, Observable, PureState};
