//! TOML configuration file. Every key is optional; command-line flags
//! override whatever the file sets.
//!
//! ```toml
//! output_dir = "out"
//! seed = 7
//! workers = 4
//!
//! [simulation]
//! horizon = 5
//! [simulation.jumps]
//! kind = "stable"
//! beta = 1.0
//!
//! [finite]
//! level = 0.10
//! [finite.truncation]
//! alpha = 8.0
//!
//! [experiment]
//! scenario = "fa_null"
//! replicates = 1000
//!
//! [ingest]
//! delta_seconds = 5.0
//! good_flags = ["0", "E"]
//! [ingest.session]
//! open_seconds = 34200
//! ```

use std::path::{Path, PathBuf};

use jump_activity_core::simulator::SimulationConfig;
use jump_activity_core::{FiniteActivityTestConfig, InfiniteActivityTestConfig};
use serde::{Deserialize, Serialize};

use crate::ingest::SessionConfig;
use crate::montecarlo::ExperimentGrid;
use crate::Error;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "JUMP_ACTIVITY_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// Sampling interval of `simulate` is `simulation.delta` in years.
    pub simulation: SimulationConfig,
    pub finite: FiniteActivityTestConfig,
    pub infinite: InfiniteActivityTestConfig,
    pub experiment: ExperimentGrid,
    pub ingest: IngestConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub delta_seconds: f64,
    /// Flags that mark a good trade; absent keeps every row.
    pub good_flags: Option<Vec<String>>,
    pub alphas: Vec<f64>,
    pub session: SessionConfig,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            delta_seconds: 5.0,
            good_flags: None,
            alphas: vec![6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0],
            session: SessionConfig::default(),
        }
    }
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Input(format!("invalid configuration: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
    }
}
