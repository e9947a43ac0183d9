//! Cross-language maintainability assessment.
//!
//! Source files are lexed through data-driven [`profile::LanguageProfile`]s into a
//! language-neutral token stream. Everything downstream (line classes, units,
//! McCabe and Halstead counts, clone detection, coding rules) works on that
//! stream, which is what makes numbers from a C file and a Python file
//! comparable.
//!
//! The reference models live in [`models`] (Maintainability Index, SQALE debt
//! ratio, SIG ratings). [`composite`] holds the weighted 0..100 scoring used to
//! rank functionally similar candidates written in different languages.

pub mod analysis;
pub mod composite;
pub mod config;
pub mod duplication;
pub mod error;
pub mod lexer;
pub mod lines;
pub mod metrics;
pub mod models;
pub mod profile;
pub mod report;
pub mod rules;
pub mod snapshot;
pub mod units;

pub use error::{Error, Result};

/// Version string recorded in reports and snapshots.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
