//! Transient decay and dark-state dynamics of a linearized transmon coupled
//! to a mirrored transmission line.
//!
//! The crate provides, layer by layer:
//!
//! * [`params`] — circuit constants and every closed-form rate/frequency,
//!   with builders from dimensionless experiment descriptions;
//! * [`dde`] — a fixed-step method-of-steps integrator for retarded and
//!   neutral delay differential equations with dense output;
//! * [`models`] — the semiclassical and system-reservoir dynamical models as
//!   delay systems, plus energy and emitted-field observables;
//! * [`analytic`] — the inverse-Laplace residue series, final-value steady
//!   states, the weak-damping energy formula, and the coupling spectrum;
//! * [`lattice`] — a discretized LC-ladder oracle that converges to the
//!   continuum mirror dynamics;
//! * [`fit`] — decay-rate fitting and grid norms for post-processing.

pub mod analytic;
pub mod dde;
pub mod fit;
pub mod lattice;
pub mod models;
pub mod params;
pub mod trajectory;

pub use analytic::{
    coupling_spectrum, open_tl_energy_closed_form, steady_state_amplitudes, ResidueSeries,
};
pub use dde::{integrate, DelaySystem, DelayedValues, HistoryBuffer};
pub use models::{
    approx_mirror_system, emitted_fields, full_mirror_system, open_approx_system,
    open_full_system, qubit_energy, system_reservoir_system, trajectory as model_trajectory,
    DampingKind, InitialKind, ModelKind, QubitState,
};
pub use params::{
    build_params, dark_state_energy_ratio, delay_for_placement, derive, CircuitParams,
    DerivedQuantities, DimensionlessSpec, Placement, PlacementSpec,
};
pub use trajectory::{Column, Metadata, Trajectory};
