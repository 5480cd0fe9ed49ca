//! Scenario runner for `kasner-core`: built-in fixtures, JSON scenarios and
//! the file artifacts (JSONL, CSV, JSON) of each run.

pub mod error;
pub mod fixtures;
pub mod pipeline;
pub mod scenario;

pub use error::{CliError, Result};
pub use pipeline::{detect, execute, run, write_artifacts, RunOutput, RunReport};
pub use scenario::{InitialData, Scenario, Source};

/// Environment variable that replaces the base output directory.
pub const OUT_ENV: &str = "KASNER_LAB_OUT";

/// A scenario from a file path, or a built-in fixture of that name when no such file exists.
pub fn resolve(arg: &str) -> Result<Scenario> {
    let path = std::path::Path::new(arg);
    if path.exists() {
        return Scenario::from_file(path);
    }
    match fixtures::find(arg) {
        Some(f) => Ok((f.scenario)()),
        None if arg.ends_with(".json") => Err(CliError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such scenario file"),
        )),
        None => Err(CliError::UnknownFixture(arg.to_string())),
    }
}
