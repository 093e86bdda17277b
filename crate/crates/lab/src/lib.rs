//! Scenario runner, figure generator and verification suites for conic billiards.

pub mod cli;
pub mod conjugacy;
pub mod figures;
pub mod output;
pub mod scenario;
pub mod suites;
pub mod svg;

use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime stop: {0}")]
    Runtime(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("simulation error: {0}")]
    Sim(#[from] confbill_core::billiard::SimError),
    #[error("geometry error: {0}")]
    Geometry(#[from] confbill_core::geometry::GeometryError),
    #[error("integral error: {0}")]
    Integral(#[from] confbill_core::integrals::IntegralError),
}

impl LabError {
    /// Process exit code: 1 runtime stop, 2 configuration error, 3 verification failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config(_) => 2,
            LabError::Verification(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

/// Create `path` and its parents, then write `contents`.
pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}
