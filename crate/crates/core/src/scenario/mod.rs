//! Scenario configuration, runs with time-series output, checkpoints, and
//! the command-line entry points.

mod checkpoint;
mod config;
mod series;
mod session;

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint, Checkpoint, SeriesAccumulator,
    CHECKPOINT_FORMAT,
};
pub use config::{
    load_config, parse_config, preset, preset_text, sample_modes, CurrentConfig, CurrentMode, DiagnosticsConfig,
    FilterConfig, GeometryConfig, InitialConfig, LawConfig, Mode, OutputConfig, PhysicsConfig, PotentialMode,
    RandomModes, ScenarioConfig, Thresholds, TimeConfig, CONFIG_VERSION, PRESETS,
};
pub use series::{header_lines, read_series, write_series, SeriesWriter, TimeSeriesRow, COLUMNS};
pub use session::{
    high_k_share, resume, run_scenario, sweep_alpha, verify_identities, CheckLine, Flag, RunOptions, RunSummary,
    Scenario, SweepReport, SERIES_FILE, SUMMARY_FILE,
};
