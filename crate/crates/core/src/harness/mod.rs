//! Experiment orchestration: configuration, initial data, convergence
//! sweeps, measurement studies and persistence.

mod config;
mod initial;
mod persist;
mod studies;
mod sweep;

pub use config::{
    BasisConfig, Cell, ExperimentConfig, GroundSetup, InitialConfig, InitialMode, Limits, OmegaRule, OutputConfig,
    PotentialConfig, Profile, ScalingConfig, TimeConfig, MAX_PARTICLES, MAX_SINGLE_DIM,
};
pub use initial::{
    build_initial_data, effective_coupling, profile_field, trapped_ground_state, InitialData, InitialInfo,
    TrappedGround,
};
pub use persist::{
    gap_rows, load_snapshot, read_gaps_csv, read_jsonl, save_snapshot, snapshot_bytes, snapshot_from_bytes,
    write_gaps_csv, write_jsonl, write_sweep, GapRow, ResultLine, SweepFiles, SNAPSHOT_MAGIC, SNAPSHOT_VERSION,
};
pub use studies::{
    cutoff_study, sector_suppression_study, CutoffPoint, SectorExponent, SectorStudyConfig, SectorStudyReport,
};
pub use sweep::{run_convergence_sweep, CellResult, SweepRecord, SweepResult, CODE_VERSION};
