//! Reference maintainability models: Maintainability Index, SQALE technical
//! debt ratio, and SIG-style property/characteristic ratings.

pub mod mi;
pub mod sig;
pub mod sqale;

pub use mi::{maintainability_index, MiResult};
pub use sig::{SigConfig, SigResult};
pub use sqale::{production_effort, tdr_grade, technical_debt_ratio, Grade, TdrResult};
