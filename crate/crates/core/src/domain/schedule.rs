use std::fmt;
use std::str::FromStr;

use super::age::AgeGrid;
use super::period::Period;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sex {
    Female,
    Male,
}

impl Sex {
    pub const BOTH: [Sex; 2] = [Sex::Female, Sex::Male];

    pub fn code(self) -> &'static str {
        match self {
            Sex::Female => "F",
            Sex::Male => "M",
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "F" | "f" | "female" | "Female" => Ok(Sex::Female),
            "M" | "m" | "male" | "Male" => Ok(Sex::Male),
            other => Err(Error::InvalidTrajectory(format!("unknown sex '{other}'"))),
        }
    }
}

/// Central death rates by age group. Every rate is finite and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalitySchedule {
    grid: AgeGrid,
    rates: Vec<f64>,
}

impl MortalitySchedule {
    pub fn new(grid: AgeGrid, rates: Vec<f64>) -> Result<Self> {
        if rates.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), actual: rates.len() });
        }
        if let Some((index, &value)) =
            rates.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r > 0.0))
        {
            return Err(Error::InvalidRate { index, value });
        }
        Ok(MortalitySchedule { grid, rates })
    }

    /// Builds a schedule from log-rates, e.g. a Lee-Carter reconstruction.
    pub fn from_log_rates(grid: AgeGrid, log_rates: &[f64]) -> Result<Self> {
        MortalitySchedule::new(grid, log_rates.iter().map(|l| l.exp()).collect())
    }

    pub fn grid(&self) -> &AgeGrid {
        &self.grid
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn log_rates(&self) -> Vec<f64> {
        self.rates.iter().map(|r| r.ln()).collect()
    }

    pub fn into_rates(self) -> Vec<f64> {
        self.rates
    }
}

/// Observed schedules for one sex over consecutive historical periods.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalitySurface {
    sex: Sex,
    periods: Vec<Period>,
    schedules: Vec<MortalitySchedule>,
}

impl MortalitySurface {
    pub fn new(sex: Sex, periods: Vec<Period>, schedules: Vec<MortalitySchedule>) -> Result<Self> {
        if periods.len() != schedules.len() {
            return Err(Error::LengthMismatch { expected: periods.len(), actual: schedules.len() });
        }
        if periods.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "a mortality surface needs at least 2 periods, got {}",
                periods.len()
            )));
        }
        if periods.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTrajectory("surface periods must be strictly increasing".into()));
        }
        let grid = schedules[0].grid();
        if let Some(i) = schedules.iter().position(|s| s.grid() != grid) {
            return Err(Error::InvalidAgeGrid(format!(
                "period {} uses a different age grid than {}",
                periods[i], periods[0]
            )));
        }
        Ok(MortalitySurface { sex, periods, schedules })
    }

    pub fn sex(&self) -> Sex {
        self.sex
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn schedules(&self) -> &[MortalitySchedule] {
        &self.schedules
    }

    pub fn grid(&self) -> &AgeGrid {
        self.schedules[0].grid()
    }

    /// Jump-off (most recent) period.
    pub fn last_period(&self) -> Period {
        *self.periods.last().expect("surface has periods")
    }

    pub fn last_schedule(&self) -> &MortalitySchedule {
        self.schedules.last().expect("surface has periods")
    }

    /// Log-rates as a period-major matrix.
    pub fn log_rates(&self) -> Vec<Vec<f64>> {
        self.schedules.iter().map(MortalitySchedule::log_rates).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_rejects_nonpositive_and_nan() {
        let grid = AgeGrid::abridged(10).unwrap();
        assert!(MortalitySchedule::new(grid.clone(), vec![0.1, 0.01, 0.02, 0.3]).is_ok());
        assert_eq!(
            MortalitySchedule::new(grid.clone(), vec![0.1, -0.01, 0.02, 0.3]).unwrap_err(),
            Error::InvalidRate { index: 1, value: -0.01 }
        );
        assert!(MortalitySchedule::new(grid.clone(), vec![0.1, 0.01, f64::NAN, 0.3]).is_err());
        assert!(MortalitySchedule::new(grid, vec![0.1, 0.01]).is_err());
    }

    #[test]
    fn surface_requires_two_periods_and_one_grid() {
        let g10 = AgeGrid::abridged(10).unwrap();
        let g15 = AgeGrid::abridged(15).unwrap();
        let s10 = MortalitySchedule::new(g10.clone(), vec![0.1; 4]).unwrap();
        let s15 = MortalitySchedule::new(g15, vec![0.1; 5]).unwrap();
        assert!(MortalitySurface::new(Sex::Female, vec![Period(2000)], vec![s10.clone()]).is_err());
        assert!(MortalitySurface::new(
            Sex::Female,
            vec![Period(2000), Period(2005)],
            vec![s10.clone(), s15]
        )
        .is_err());
        let ok = MortalitySurface::new(
            Sex::Male,
            vec![Period(2000), Period(2005)],
            vec![s10.clone(), s10],
        )
        .unwrap();
        assert_eq!(ok.last_period(), Period(2005));
        assert_eq!(ok.grid(), &g10);
    }
}
