//! Configuration, corpus, per-member pipeline and the mass sweep.

mod config;
pub mod corpus;
mod pipeline;
mod row;
mod svg;
mod sweep;

pub use config::{parse_config, CylinderConfig, GeodesicConfig, RunConfig, TauConfig, TauKind, Toggles};
pub use pipeline::{
    mass_stage, member_dir, region_stage, run_member, run_pipeline, solve_stage, RunOutput, Timings,
};
pub use row::{read_rows, write_rows, SweepRow, HEADERS};
pub use svg::{Plot, Scale, Series};
pub use sweep::{
    analyze, power_fit, strictly_decreasing, sweep, write_timings, AreaTrend, PowerFit, SweepFits, SweepReport,
    AREA_EXPONENT, MIN_MEMBERS,
};
