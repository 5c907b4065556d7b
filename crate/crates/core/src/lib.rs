//! Conversion of probabilistic life-expectancy and total-fertility
//! trajectories into age- and sex-specific mortality rates and age-specific
//! fertility rates.
//!
//! Mortality: observed rates are extended to 130+ with a coherent Kannisto
//! fit, a Lee-Carter model is estimated per sex with a shared `b_x` that
//! rotates with e0, and each future e0 is matched by bisection over life
//! tables. Fertility: age patterns converge in logit space from the national
//! trend toward a global model pattern on a trajectory-specific schedule.

pub mod domain;
pub mod error;
pub mod fertility;
pub mod kannisto;
pub mod lee_carter;
pub mod life_table;
pub mod mortality;

pub use error::{Error, Result};
