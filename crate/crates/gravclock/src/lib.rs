//! Deterministic simulator and estimation toolkit for two gravitationally
//! coupled two-level quantum clocks.
//!
//! Two clocks held by Alice and Bob, separated by a distance ξ (Planck
//! lengths) with energy gaps ε₁, ε₂ (Planck energies), interact only through
//! the gravitational field of their excited levels. The interaction dilates
//! Bob's effective gap to ε₂′ = ε₂(1 − ε₁/ξ) and entangles the pair at the
//! coupling rate ζ′ = ε₁ε₂/ξ. The crate simulates the joint evolution, the
//! dual-basis synchronization protocol built on it, and the resulting
//! precision limits for estimating the clocks' time offset:
//!
//! - [`qops`] — exact two- and four-dimensional complex state algebra:
//!   basis changes, Born probabilities, conditioning, reduced states,
//!   concurrence.
//! - [`units`] — SI ↔ Planck-unit conversion of clock descriptions.
//! - [`model`] — the evolved joint state, its dual-basis density, derived
//!   couplings, and the entanglement closed form.
//! - [`protocol`] — Alice's conditioning measurement, Bob's outcome
//!   statistics, seeded sampling, and maximum-likelihood offset estimation.
//! - [`metrology`] — quantum and classical Fisher information with
//!   Cramér-Rao bounds, including a cross-check of a closed-form QFI
//!   expression against the numerical ground truth.
//! - [`sweep`] — deterministic parameter sweeps and Monte Carlo estimation
//!   experiments producing stable CSV/JSON tables.
//!
//! All quantities are dimensionless Planck-unit values unless a name says
//! otherwise. Everything is deterministic: sampling takes explicit seeds,
//! parallel grids collect in input order, and repeated runs produce
//! byte-identical tables.

pub mod error;
pub mod exec;
pub mod metrology;
pub mod model;
pub mod protocol;
pub mod provenance;
pub mod qops;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
pub use model::{concurrence_closed_form, dual_joint_density, joint_state, ClockParams, Couplings};
pub use protocol::{
    bob_conditional_state, bob_probability, compare_modes, estimate_delta, sample_outcomes,
    DualOutcome, MeasurementRecord, Mode, ProtocolConfig, Window,
};
pub use metrology::{
    classical_fisher, metrology_report, precision_bound, qfi_closed_form, qfi_numerical,
    MetrologyReport,
};
pub use qops::{Basis, DensityMatrix, Outcome, PureState, Subsystem};
pub use units::{PhysicalConstants, SiClockParams};
