use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::Violation;

pub const DEFAULT_COST_PER_LINE_MINUTES: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Grade {
    A,
    B,
    C,
    D,
    E,
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Grade::A => "A",
            Grade::B => "B",
            Grade::C => "C",
            Grade::D => "D",
            Grade::E => "E",
        };
        f.write_str(s)
    }
}

/// A = [0, 5%], B = ]5%, 10%], C = ]10%, 20%], D = ]20%, 50%], E above
/// (ratios past 100% included).
pub fn tdr_grade(tdr: f64) -> Result<Grade> {
    if tdr.is_nan() || tdr < 0.0 {
        return Err(Error::NegativeTdr(tdr));
    }
    Ok(if tdr <= 0.05 {
        Grade::A
    } else if tdr <= 0.10 {
        Grade::B
    } else if tdr <= 0.20 {
        Grade::C
    } else if tdr <= 0.50 {
        Grade::D
    } else {
        Grade::E
    })
}

/// Estimated cost to rebuild the code base, in minutes.
pub fn production_effort(total_loc: usize, cost_per_line_minutes: f64) -> f64 {
    total_loc as f64 * cost_per_line_minutes
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdrResult {
    pub remediation_minutes: f64,
    pub production_minutes: f64,
    /// Raw ratio; may exceed 1.
    pub tdr: f64,
    pub grade: Grade,
}

pub fn technical_debt_ratio(
    violations: &[Violation],
    production_minutes: f64,
) -> Result<TdrResult> {
    let remediation: f64 = violations.iter().map(|v| v.effort_minutes).sum();
    tdr_from_minutes(remediation, production_minutes)
}

pub fn tdr_from_minutes(remediation_minutes: f64, production_minutes: f64) -> Result<TdrResult> {
    if production_minutes <= 0.0 {
        return Err(Error::ZeroProductionEffort);
    }
    let tdr = remediation_minutes / production_minutes;
    Ok(TdrResult {
        remediation_minutes,
        production_minutes,
        tdr,
        grade: tdr_grade(tdr)?,
    })
}
