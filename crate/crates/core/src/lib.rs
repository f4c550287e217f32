//! Steady-state thermal model of modular cryogenic microwave links.
//!
//! The crate computes per-stage temperature and heat-flow profiles along a
//! chain of nodes, adapters, link modules, braids and cooling units, checks
//! operating criteria, sweeps link length, and reduces characterization data
//! to model parameters.

// NaN-rejecting guards are written as negated comparisons on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod defaults;
pub mod error;
pub mod export;
pub mod feasibility;
pub mod fitting;
pub mod geometry;
pub mod loads;
pub mod materials;
pub mod numerics;
pub mod profile;
pub mod solver;
pub mod units;

pub use config::{parse_assembly, parse_config, serialize_config, Config, SCHEMA_VERSION};
pub use error::{Error, Result};
pub use feasibility::{
    channel_loss, check_criteria, evaluate_length, max_feasible_length, sweep_lengths,
    CriteriaReport, Criterion, CriterionResult, LengthSweepResult,
};
pub use fitting::{
    braid_decomposition, effective_flux, fit_mli_lambda, fit_power_law, fit_rrr,
    shield_conductivity_points, FitParameter, FitResult, HeaterSweep, MeasurementKind,
    MeasurementSeries,
};
pub use geometry::{
    prototype_assembly, standard_assembly, CuPlacement, Heater, LinkAssembly, ModuleKind,
    ModuleSpec, PerStage, Stage, StageSpec, VacuumCan,
};
pub use loads::{
    attenuation_lambda, build_line_load, post_load_from_material, radiative_flux, HotSide,
    LineLoadField, LoadCell, PostLoadCurve,
};
pub use materials::{ConductivityModel, CoolingCurve, Domain, ResistanceCurve};
pub use profile::{PointKind, ProfilePoint, SinkRecord, StageProfile};
pub use solver::{
    contact_jump, solve_assembly, solve_stage, solve_stage_with_field, Solution, SolverSettings,
    StageReport,
};
