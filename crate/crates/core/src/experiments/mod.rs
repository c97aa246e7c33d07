//! Monte Carlo recovery experiments: single trials, parameter sweeps and the
//! reference presets.

mod presets;
mod sweep;
mod trial;

pub use presets::{preset_example, samples_at_rate, Preset, PresetOptions, PRESET1_M};
pub use sweep::{
    run_sweep, Axis, AxisParam, CellSummary, ExperimentReport, SuccessMetric, SweepReport, SweepSpec, REPORT_HEADER,
};
pub use trial::{run_trial, TrialConfig, TrialResult};
