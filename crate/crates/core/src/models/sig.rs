//! SIG-style maintainability ratings.
//!
//! Unit complexity and unit size are rated from risk profiles (share of code
//! lines falling in each risk band); volume, duplication and unit testing from
//! threshold ladders. Property ratings (1..5) are then averaged into the four
//! system characteristics through a configurable mapping matrix.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::UnitMetrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Property {
    Volume,
    Complexity,
    Duplication,
    UnitSize,
    UnitTesting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Characteristic {
    Analysability,
    Changeability,
    Stability,
    Testability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskMetric {
    Cc,
    Loc,
}

/// Share of unit code lines per risk band; sums to 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RiskProfile {
    pub low: f64,
    pub moderate: f64,
    pub high: f64,
    pub very_high: f64,
}

/// Upper bounds of the low, moderate and high bands (closed); anything above is very high.
pub type Bands = [f64; 3];

/// Assigns each unit to a band by `metric` and weighs it by its code lines.
/// Unit sizes are divided by the unit's verbosity factor first, so the bands
/// are expressed in verbosity-neutral lines.
pub fn sig_risk_profile(
    units: &[UnitMetrics],
    metric: RiskMetric,
    bands: Bands,
) -> Result<RiskProfile> {
    if !(bands[0] < bands[1] && bands[1] < bands[2]) {
        return Err(Error::InvalidConfig(format!(
            "risk bands must be strictly increasing, got {bands:?}"
        )));
    }
    let total: usize = units.iter().map(|u| u.loc).sum();
    if total == 0 {
        return Err(Error::NoUnits);
    }
    let mut per_band = [0usize; 4];
    for u in units {
        let value = match metric {
            RiskMetric::Cc => u.cc as f64,
            RiskMetric::Loc => u.loc as f64 / u.verbosity_factor,
        };
        let band = bands.iter().position(|&b| value <= b).unwrap_or(3);
        per_band[band] += u.loc;
    }
    let share = |n: usize| n as f64 / total as f64;
    Ok(RiskProfile {
        low: share(per_band[0]),
        moderate: share(per_band[1]),
        high: share(per_band[2]),
        very_high: share(per_band[3]),
    })
}

/// Maximum band shares allowed for `rating`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskCaps {
    pub rating: u8,
    pub moderate: f64,
    pub high: f64,
    pub very_high: f64,
}

const SHARE_EPS: f64 = 1e-12;

/// Highest rating whose caps are all met; 1 when none is.
pub fn rate_risk_profile(profile: &RiskProfile, caps: &[RiskCaps]) -> u8 {
    caps.iter()
        .filter(|c| {
            profile.moderate <= c.moderate + SHARE_EPS
                && profile.high <= c.high + SHARE_EPS
                && profile.very_high <= c.very_high + SHARE_EPS
        })
        .map(|c| c.rating)
        .max()
        .unwrap_or(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LadderDirection {
    /// Lower values are better: rating applies when `value <= bound`.
    AtMost,
    /// Higher values are better: rating applies when `value >= bound`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub direction: LadderDirection,
    /// `(bound, rating)` steps, best rating first. Values meeting no step rate 1.
    pub steps: Vec<(f64, u8)>,
}

impl Ladder {
    pub fn rate(&self, value: f64) -> u8 {
        self.steps
            .iter()
            .find(|&&(bound, _)| match self.direction {
                LadderDirection::AtMost => value <= bound,
                LadderDirection::AtLeast => value >= bound,
            })
            .map_or(1, |&(_, rating)| rating)
    }

    fn validate(&self, name: &str) -> Result<()> {
        let monotone = self.steps.windows(2).all(|w| {
            let bounds_ok = match self.direction {
                LadderDirection::AtMost => w[0].0 < w[1].0,
                LadderDirection::AtLeast => w[0].0 > w[1].0,
            };
            bounds_ok && w[0].1 > w[1].1
        });
        let in_range = self.steps.iter().all(|s| (1..=5).contains(&s.1));
        if monotone && in_range {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "models.sig.{name}: ladder steps must be monotone with ratings in 1..5"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SigConfig {
    pub cc_bands: Bands,
    /// In verbosity-neutral lines.
    pub unit_size_bands: Bands,
    pub risk_caps: Vec<RiskCaps>,
    /// Rated on total code lines.
    pub volume_ladder: Ladder,
    /// Rated on the duplication ratio consumed by the composite.
    pub duplication_ladder: Ladder,
    /// Rated on externally supplied test coverage in [0, 1].
    pub unit_testing_ladder: Ladder,
    pub matrix: BTreeMap<Characteristic, Vec<Property>>,
}

impl Default for SigConfig {
    fn default() -> Self {
        use Characteristic::*;
        use Property::*;
        Self {
            cc_bands: [10.0, 20.0, 50.0],
            unit_size_bands: [30.0, 60.0, 120.0],
            risk_caps: vec![
                RiskCaps {
                    rating: 5,
                    moderate: 0.25,
                    high: 0.0,
                    very_high: 0.0,
                },
                RiskCaps {
                    rating: 4,
                    moderate: 0.30,
                    high: 0.05,
                    very_high: 0.0,
                },
                RiskCaps {
                    rating: 3,
                    moderate: 0.40,
                    high: 0.10,
                    very_high: 0.0,
                },
                RiskCaps {
                    rating: 2,
                    moderate: 0.50,
                    high: 0.15,
                    very_high: 0.05,
                },
            ],
            volume_ladder: Ladder {
                direction: LadderDirection::AtMost,
                steps: vec![
                    (66_000.0, 5),
                    (246_000.0, 4),
                    (665_000.0, 3),
                    (1_310_000.0, 2),
                ],
            },
            duplication_ladder: Ladder {
                direction: LadderDirection::AtMost,
                steps: vec![(0.03, 5), (0.05, 4), (0.10, 3), (0.20, 2)],
            },
            unit_testing_ladder: Ladder {
                direction: LadderDirection::AtLeast,
                steps: vec![(0.95, 5), (0.80, 4), (0.60, 3), (0.20, 2)],
            },
            matrix: BTreeMap::from([
                (
                    Analysability,
                    vec![Volume, Duplication, UnitSize, UnitTesting],
                ),
                (Changeability, vec![Complexity, Duplication]),
                (Stability, vec![UnitTesting]),
                (Testability, vec![Complexity, UnitSize, UnitTesting]),
            ]),
        }
    }
}

impl SigConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, bands) in [
            ("cc_bands", self.cc_bands),
            ("unit_size_bands", self.unit_size_bands),
        ] {
            if !(bands[0] < bands[1] && bands[1] < bands[2]) {
                return Err(Error::InvalidConfig(format!(
                    "models.sig.{name} must be strictly increasing"
                )));
            }
        }
        self.volume_ladder.validate("volume_ladder")?;
        self.duplication_ladder.validate("duplication_ladder")?;
        self.unit_testing_ladder.validate("unit_testing_ladder")?;
        for c in [
            Characteristic::Analysability,
            Characteristic::Changeability,
            Characteristic::Stability,
            Characteristic::Testability,
        ] {
            if !self.matrix.contains_key(&c) {
                return Err(Error::InvalidConfig(format!(
                    "models.sig.matrix lacks a row for {c:?}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigResult {
    pub property_ratings: BTreeMap<Property, u8>,
    /// Present characteristics only.
    pub characteristic_ratings: BTreeMap<Characteristic, f64>,
    pub overall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complexity_profile: Option<RiskProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit_size_profile: Option<RiskProfile>,
}

/// Averages present property ratings row by row. Rows without any present
/// property are left out, and so is their weight in `overall`.
pub fn sig_characteristics(
    ratings: &BTreeMap<Property, u8>,
    matrix: &BTreeMap<Characteristic, Vec<Property>>,
) -> SigResult {
    let characteristic_ratings: BTreeMap<Characteristic, f64> = matrix
        .iter()
        .filter_map(|(c, props)| {
            let present: Vec<f64> = props
                .iter()
                .filter_map(|p| ratings.get(p))
                .map(|&r| f64::from(r))
                .collect();
            (!present.is_empty()).then(|| (*c, present.iter().sum::<f64>() / present.len() as f64))
        })
        .collect();
    let overall = (!characteristic_ratings.is_empty()).then(|| {
        characteristic_ratings.values().sum::<f64>() / characteristic_ratings.len() as f64
    });
    SigResult {
        property_ratings: ratings.clone(),
        characteristic_ratings,
        overall,
        complexity_profile: None,
        unit_size_profile: None,
    }
}

/// Rates a whole project. Complexity and unit size are absent when there are
/// no units; unit testing is absent without a supplied coverage figure.
pub fn assess(
    units: &[UnitMetrics],
    total_loc: usize,
    duplication_ratio: f64,
    coverage: Option<f64>,
    config: &SigConfig,
) -> Result<SigResult> {
    let mut ratings = BTreeMap::new();
    ratings.insert(
        Property::Volume,
        config.volume_ladder.rate(total_loc as f64),
    );
    ratings.insert(
        Property::Duplication,
        config.duplication_ladder.rate(duplication_ratio),
    );
    if let Some(c) = coverage {
        ratings.insert(Property::UnitTesting, config.unit_testing_ladder.rate(c));
    }
    let (complexity_profile, unit_size_profile) =
        match sig_risk_profile(units, RiskMetric::Cc, config.cc_bands) {
            Ok(cc) => {
                let size = sig_risk_profile(units, RiskMetric::Loc, config.unit_size_bands)?;
                ratings.insert(
                    Property::Complexity,
                    rate_risk_profile(&cc, &config.risk_caps),
                );
                ratings.insert(
                    Property::UnitSize,
                    rate_risk_profile(&size, &config.risk_caps),
                );
                (Some(cc), Some(size))
            }
            Err(Error::NoUnits) => (None, None),
            Err(e) => return Err(e),
        };
    let mut result = sig_characteristics(&ratings, &config.matrix);
    result.complexity_profile = complexity_profile;
    result.unit_size_profile = unit_size_profile;
    Ok(result)
}
