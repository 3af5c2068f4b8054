//! Configuration files, result bundles and the `llstab` command line.

mod cli;
mod config;
mod results;
mod run;
mod verify;

pub use cli::{EXIT_BLOW_UP, EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAILED, cli_main};
pub use config::{
    ConfigError, ExperimentKind, GainRule, InitialPreset, KEYS, Parsed, RunConfig, keys_help,
    parse_config,
};
pub use results::{
    ResultBundle, ResultsError, SCHEMA_VERSION, StabilizationSummary, read_results, run_file_name,
    write_results,
};
pub use run::{hysteresis, is_blow_up, stabilize, sweep};
pub use verify::{Check, VerifyReport, random_unit, reference_field, seeded_rng, verify_suite};
