use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ProjectMetrics;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiResult {
    pub a_hv: f64,
    pub a_cc: f64,
    pub a_loc: f64,
    pub mi: f64,
}

/// Visual Studio flavour of the Maintainability Index, on a 0..100 scale:
///
/// `max(0, 100 * (171 - 5.2 ln(aHV) - 0.23 aCC - 16.2 ln(aLOC)) / 171)`
///
/// Averages below 1 are clamped to 1 so the logarithms stay non-negative.
pub fn maintainability_index(a_hv: f64, a_cc: f64, a_loc: f64) -> MiResult {
    let hv = a_hv.max(1.0);
    let loc = a_loc.max(1.0);
    let cc = a_cc.max(0.0);
    let raw = 100.0 * (171.0 - 5.2 * hv.ln() - 0.23 * cc - 16.2 * loc.ln()) / 171.0;
    MiResult {
        a_hv,
        a_cc,
        a_loc,
        mi: raw.max(0.0),
    }
}

/// MI from project averages; fails when the project has no modules.
pub fn project_mi(metrics: &ProjectMetrics) -> Result<MiResult> {
    match (metrics.a_hv, metrics.a_cc, metrics.a_loc) {
        (Some(hv), Some(cc), Some(loc)) => Ok(maintainability_index(hv, cc, loc)),
        _ => Err(Error::MissingUnits),
    }
}
