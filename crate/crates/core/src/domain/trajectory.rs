use super::period::{is_contiguous, Period};
use crate::error::{Error, Result};

/// Open bounds on plausible life expectancy at birth, in years.
pub const E0_RANGE: (f64, f64) = (20.0, 120.0);

#[derive(Debug, Clone, PartialEq)]
pub struct E0Trajectory {
    pub id: u32,
    pub female: Vec<f64>,
    pub male: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfrTrajectory {
    pub id: u32,
    pub tfr: Vec<f64>,
    /// Start of the post-transition phase, when known for this trajectory.
    pub phase3_start: Option<Period>,
}

/// Future e0 and TFR trajectories for one country over a shared run of periods.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBundle {
    country: String,
    periods: Vec<Period>,
    e0: Vec<E0Trajectory>,
    tfr: Vec<TfrTrajectory>,
}

impl TrajectoryBundle {
    pub fn new(
        country: impl Into<String>,
        periods: Vec<Period>,
        e0: Vec<E0Trajectory>,
        tfr: Vec<TfrTrajectory>,
    ) -> Result<Self> {
        let country = country.into();
        if periods.is_empty() {
            return Err(Error::InvalidTrajectory(format!("{country}: no projection periods")));
        }
        if !is_contiguous(&periods) {
            return Err(Error::InvalidTrajectory(format!(
                "{country}: projection periods are not contiguous five-year steps"
            )));
        }
        let n = periods.len();
        let (lo, hi) = E0_RANGE;
        for t in &e0 {
            if t.female.len() != n || t.male.len() != n {
                return Err(Error::InvalidTrajectory(format!(
                    "{country}: e0 trajectory {} covers {} periods, expected {n}",
                    t.id,
                    t.female.len().min(t.male.len())
                )));
            }
            for (i, &v) in t.female.iter().chain(&t.male).enumerate() {
                if !(v > lo && v < hi) {
                    return Err(Error::InvalidTrajectory(format!(
                        "{country}: e0 trajectory {} has value {v} outside ({lo}, {hi}) at position {}",
                        t.id,
                        i % n
                    )));
                }
            }
        }
        for t in &tfr {
            if t.tfr.len() != n {
                return Err(Error::InvalidTrajectory(format!(
                    "{country}: TFR trajectory {} covers {} periods, expected {n}",
                    t.id,
                    t.tfr.len()
                )));
            }
            if let Some(v) = t.tfr.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidTrajectory(format!(
                    "{country}: TFR trajectory {} has invalid value {v}",
                    t.id
                )));
            }
        }
        for ids in [
            e0.iter().map(|t| t.id).collect::<Vec<_>>(),
            tfr.iter().map(|t| t.id).collect::<Vec<_>>(),
        ] {
            let mut sorted = ids.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidTrajectory(format!("{country}: duplicate trajectory id")));
            }
        }
        Ok(TrajectoryBundle { country, periods, e0, tfr })
    }

    pub fn country(&self) -> &str {
        &self.country
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn first_period(&self) -> Period {
        self.periods[0]
    }

    /// Last projection period.
    pub fn last_period(&self) -> Period {
        *self.periods.last().expect("non-empty")
    }

    pub fn e0(&self) -> &[E0Trajectory] {
        &self.e0
    }

    pub fn tfr(&self) -> &[TfrTrajectory] {
        &self.tfr
    }
}
