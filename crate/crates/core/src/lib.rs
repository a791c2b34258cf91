//! Coupled spatially distributed laser resonator model for simultaneous
//! lightwave information and power transfer: ray-matrix cavity analysis,
//! intra-cavity power with frequency doubling, PV harvesting and the
//! second-harmonic duplex link, plus sweep utilities.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod config;
pub mod error;
pub mod harvest;
pub mod link;
pub mod matrix;
pub mod numeric;
pub mod output;
pub mod power;
pub mod sweep;

pub use cavity::{Breakpoints, Cavity, Eigenmode, ProfilePoint, StabilityReport};
pub use config::{load_config, CsdrConfig};
pub use error::{Error, Result, UnstableKind};
pub use harvest::PvOperatingPoint;
pub use link::LinkBudget;
pub use matrix::RayMatrix;
pub use power::{CavityLosses, OperatingPoint, PowerBreakdown};
pub use sweep::{
    run_point, run_sweep, ColumnGroup, PointReport, Status, SweepResult, SweepSpec, VarRange,
};
