//! Command-line front end for the `psh` library: named exhaustions, symbols and
//! expressions in, CSV/JSON artifacts out.

pub mod cases;
pub mod config;
pub mod run;
pub mod table;

pub use config::{Command, Format, RunConfig};
pub use run::{run_config, EXIT_ERROR, EXIT_OK, EXIT_VERDICT};
