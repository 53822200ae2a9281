//! Finite-volume tools for the one-dimensional long-range (Dyson) Ising
//! model: exact enumeration, Metropolis sampling, the triangle-contour
//! interface construction, closed-form bounds and field profiles, and three
//! packaged experiments.
//!
//! Pairs are counted once: `H = -sum_{i<j} J(|i-j|) s_i s_j` with
//! `J(1) = j1` and `J(d) = d^-alpha` otherwise.

// `!(x > a)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod contour;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod lattice;
pub mod mc;
pub mod report;
pub mod series;
pub mod system;

pub use analytics::{
    alternating_remainder, b_max, b_observable, boundary_tail_bound, boundary_tail_exact, decoupling_energy,
    f_alpha, field_profile, g_coefficient, BMax, BoundReport, FAlpha, FieldProfileSpec,
};
pub use contour::{
    build_triangles, conditional_profile, interface_analysis, interface_histogram, interface_point,
    spin_flip_points, Engine, FlipPoint, InterfaceHistogram, ThetaGrid, TriangleDiagram,
};
pub use error::{Error, Result};
pub use exact::{exact_conditional_magnetization, exact_gibbs, nested_volume_bracket, ExactEngine, ExactResult};
pub use experiments::{
    run_discontinuity, run_localization, run_wetting, DiscontinuityConfig, LocalizationConfig, WettingConfig,
};
pub use lattice::{
    boundary_field, delta_energy, energy, BoundaryCondition, BoundaryKind, CouplingModel, Hamiltonian, Spin,
    SpinConfig, Volume,
};
pub use mc::{mc_magnetization, mc_sample_stream, Estimate, McParams};
pub use report::{emit_outputs, Cell, ExperimentReport, Table, Verdict};
pub use system::{Constraint, PreparedSystem};
