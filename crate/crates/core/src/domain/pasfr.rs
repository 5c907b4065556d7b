use crate::error::{Error, Result};

/// Number of five-year reproductive age groups, 15-19 through 45-49.
pub const PASFR_GROUPS: usize = 7;

/// Start ages of the reproductive groups.
pub const PASFR_AGE_STARTS: [u32; PASFR_GROUPS] = [15, 20, 25, 30, 35, 40, 45];

pub const PASFR_SUM_TOLERANCE: f64 = 1e-9;

/// Proportionate age-specific fertility: seven nonnegative shares summing to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PasfrPattern([f64; PASFR_GROUPS]);

impl PasfrPattern {
    pub fn new(proportions: [f64; PASFR_GROUPS]) -> Result<Self> {
        if let Some(p) = proportions.iter().find(|p| !(p.is_finite() && (0.0..=1.0).contains(*p))) {
            return Err(Error::InvalidPattern(format!("proportion {p} outside [0, 1]")));
        }
        let sum: f64 = proportions.iter().sum();
        if (sum - 1.0).abs() > PASFR_SUM_TOLERANCE {
            return Err(Error::InvalidPattern(format!("proportions sum to {sum}, not 1")));
        }
        Ok(PasfrPattern(proportions))
    }

    /// Rescales nonnegative weights to sum to one.
    pub fn normalized(weights: [f64; PASFR_GROUPS]) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidPattern("weights must be finite and nonnegative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidPattern("weights sum to zero".into()));
        }
        PasfrPattern::new(weights.map(|w| w / sum))
    }

    pub fn uniform() -> Self {
        PasfrPattern([1.0 / PASFR_GROUPS as f64; PASFR_GROUPS])
    }

    pub fn proportions(&self) -> &[f64; PASFR_GROUPS] {
        &self.0
    }

    /// Group midpoints 17.5, 22.5, ..., 47.5.
    pub fn midpoints() -> [f64; PASFR_GROUPS] {
        PASFR_AGE_STARTS.map(|a| a as f64 + 2.5)
    }
}
