//! Shared model types: the abridged age grid, validated mortality schedules and
//! surfaces, future trajectory bundles, fertility patterns, and the numeric
//! helpers (logit, age smoothing) used across the crate.
//!
//! Everything here is immutable once constructed.

mod age;
mod numeric;
mod pasfr;
mod period;
mod schedule;
mod trajectory;

pub use age::{AgeGrid, AgeGroup, CANONICAL_GROUPS, MAX_OPEN_AGE};
pub use numeric::{inverse_logit, logit, logit_clamped, median, smooth_over_age, LOGIT_EPS};
pub use pasfr::{PasfrPattern, PASFR_AGE_STARTS, PASFR_GROUPS, PASFR_SUM_TOLERANCE};
pub use period::{is_contiguous, Period, PERIOD_YEARS};
pub use schedule::{MortalitySchedule, MortalitySurface, Sex};
pub use trajectory::{E0Trajectory, TfrTrajectory, TrajectoryBundle, E0_RANGE};
