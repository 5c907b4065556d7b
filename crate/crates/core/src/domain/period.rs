use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Length of one projection step in years.
pub const PERIOD_YEARS: i32 = 5;

/// A five-year period identified by its start year; `Period(2010)` is 2010-2015.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Period(pub i32);

impl Period {
    pub fn start_year(self) -> i32 {
        self.0
    }

    pub fn end_year(self) -> i32 {
        self.0 + PERIOD_YEARS
    }

    /// The period `steps` five-year steps later (earlier when negative).
    pub fn offset(self, steps: i32) -> Period {
        Period(self.0 + steps * PERIOD_YEARS)
    }

    /// Whole five-year steps from `earlier` to `self`.
    pub fn steps_since(self, earlier: Period) -> i32 {
        (self.0 - earlier.0).div_euclid(PERIOD_YEARS)
    }

    /// The period whose end year equals `year`, e.g. 2100 -> 2095-2100.
    pub fn ending_in(year: i32) -> Period {
        Period(year - PERIOD_YEARS)
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.end_year())
    }
}

/// Accepts either `2010-2015` or a bare start year `2010`.
impl FromStr for Period {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::InvalidTrajectory(format!("cannot parse period '{s}'"));
        match s.split_once('-') {
            Some((a, b)) => {
                let start: i32 = a.trim().parse().map_err(|_| bad())?;
                let end: i32 = b.trim().parse().map_err(|_| bad())?;
                if end - start != PERIOD_YEARS {
                    return Err(Error::InvalidTrajectory(format!(
                        "period '{s}' does not span {PERIOD_YEARS} years"
                    )));
                }
                Ok(Period(start))
            }
            None => s.parse().map(Period).map_err(|_| bad()),
        }
    }
}

/// True when the periods advance by exactly one step each.
pub fn is_contiguous(periods: &[Period]) -> bool {
    periods.windows(2).all(|w| w[1] == w[0].offset(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let p: Period = "2010-2015".parse().unwrap();
        assert_eq!(p, Period(2010));
        assert_eq!(p.to_string(), "2010-2015");
        assert_eq!("1985".parse::<Period>().unwrap(), Period(1985));
        assert!("2010-2020".parse::<Period>().is_err());
        assert!("abc".parse::<Period>().is_err());
    }

    #[test]
    fn arithmetic() {
        let p = Period(2010);
        assert_eq!(p.offset(2), Period(2020));
        assert_eq!(Period(2095).steps_since(p), 17);
        assert_eq!(Period::ending_in(2100), Period(2095));
        assert!(is_contiguous(&[Period(2010), Period(2015), Period(2020)]));
        assert!(!is_contiguous(&[Period(2010), Period(2020)]));
    }
}
