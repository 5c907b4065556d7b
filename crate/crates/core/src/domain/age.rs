use std::fmt;

use crate::error::{Error, Result};

/// Start age of the open interval on the full projection grid.
pub const MAX_OPEN_AGE: u32 = 130;

/// Number of groups on the full grid: 0-1, 1-4, 5-9, ..., 125-129, 130+.
pub const CANONICAL_GROUPS: usize = 28;

/// One abridged age group. `width == None` marks the open interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgeGroup {
    pub start: u32,
    pub width: Option<u32>,
}

impl AgeGroup {
    pub fn closed(start: u32, width: u32) -> Self {
        AgeGroup { start, width: Some(width) }
    }

    pub fn open(start: u32) -> Self {
        AgeGroup { start, width: None }
    }

    pub fn is_open(&self) -> bool {
        self.width.is_none()
    }

    /// Interval midpoint; the open group reports its start age.
    pub fn midpoint(&self) -> f64 {
        match self.width {
            Some(w) => self.start as f64 + w as f64 / 2.0,
            None => self.start as f64,
        }
    }

    pub fn end(&self) -> Option<u32> {
        self.width.map(|w| self.start + w)
    }
}

impl fmt::Display for AgeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.width {
            Some(w) => write!(f, "{}-{}", self.start, self.start + w - 1),
            None => write!(f, "{}+", self.start),
        }
    }
}

/// Abridged age axis: 0-1, 1-4, then five-year groups, ending in one open group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AgeGrid {
    groups: Vec<AgeGroup>,
}

impl AgeGrid {
    pub fn new(groups: Vec<AgeGroup>) -> Result<Self> {
        let n = groups.len();
        if n < 3 {
            return Err(Error::InvalidAgeGrid(format!("need at least 3 groups, got {n}")));
        }
        let mut expected_start = 0;
        for (i, g) in groups.iter().enumerate() {
            if g.start != expected_start {
                return Err(Error::InvalidAgeGrid(format!(
                    "group {i} starts at {} but {expected_start} was expected",
                    g.start
                )));
            }
            let last = i + 1 == n;
            match (g.width, last) {
                (None, true) => {}
                (None, false) => {
                    return Err(Error::InvalidAgeGrid(format!(
                        "open group {g} is not the last group"
                    )))
                }
                (Some(_), true) => {
                    return Err(Error::InvalidAgeGrid("last group must be open".into()))
                }
                (Some(w), false) => {
                    let expected_width = match i {
                        0 => 1,
                        1 => 4,
                        _ => 5,
                    };
                    if w != expected_width {
                        return Err(Error::InvalidAgeGrid(format!(
                            "group {i} has width {w}, expected {expected_width}"
                        )));
                    }
                    expected_start += w;
                }
            }
        }
        Ok(AgeGrid { groups })
    }

    /// Abridged grid whose open group starts at `open_start` (a multiple of 5, at least 5).
    pub fn abridged(open_start: u32) -> Result<Self> {
        if open_start < 5 || !open_start.is_multiple_of(5) {
            return Err(Error::InvalidAgeGrid(format!(
                "open group must start at a positive multiple of 5, got {open_start}"
            )));
        }
        let mut groups = vec![AgeGroup::closed(0, 1), AgeGroup::closed(1, 4)];
        groups.extend((5..open_start).step_by(5).map(|s| AgeGroup::closed(s, 5)));
        groups.push(AgeGroup::open(open_start));
        AgeGrid::new(groups)
    }

    /// The full 28-group grid ending at 130+.
    pub fn canonical() -> Self {
        AgeGrid::abridged(MAX_OPEN_AGE).expect("canonical grid is valid")
    }

    pub fn groups(&self) -> &[AgeGroup] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn open_start(&self) -> u32 {
        self.groups[self.groups.len() - 1].start
    }

    pub fn is_canonical(&self) -> bool {
        self.open_start() == MAX_OPEN_AGE
    }

    pub fn index_of_start(&self, start: u32) -> Option<usize> {
        self.groups.iter().position(|g| g.start == start)
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.groups.iter().map(AgeGroup::midpoint).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_grid_shape() {
        let g = AgeGrid::canonical();
        assert_eq!(g.len(), CANONICAL_GROUPS);
        assert_eq!(g.groups()[0], AgeGroup::closed(0, 1));
        assert_eq!(g.groups()[1], AgeGroup::closed(1, 4));
        assert_eq!(g.groups()[27], AgeGroup::open(130));
        assert_eq!(g.groups()[26].to_string(), "125-129");
        assert_eq!(g.index_of_start(65), Some(14));
    }

    #[test]
    fn midpoints() {
        let g = AgeGrid::canonical();
        assert_eq!(g.groups()[0].midpoint(), 0.5);
        assert_eq!(g.groups()[1].midpoint(), 3.0);
        assert_eq!(g.groups()[17].midpoint(), 82.5);
        assert_eq!(g.groups()[27].midpoint(), 130.0);
    }

    #[test]
    fn rejects_gaps_and_bad_widths() {
        let gap = vec![AgeGroup::closed(0, 1), AgeGroup::closed(1, 4), AgeGroup::open(10)];
        assert!(AgeGrid::new(gap).is_err());
        let wide = vec![AgeGroup::closed(0, 5), AgeGroup::closed(5, 5), AgeGroup::open(10)];
        assert!(AgeGrid::new(wide).is_err());
        let no_open = vec![AgeGroup::closed(0, 1), AgeGroup::closed(1, 4), AgeGroup::closed(5, 5)];
        assert!(AgeGrid::new(no_open).is_err());
        let two_open = vec![AgeGroup::closed(0, 1), AgeGroup::open(1), AgeGroup::open(5)];
        assert!(AgeGrid::new(two_open).is_err());
        assert!(AgeGrid::abridged(87).is_err());
    }
}
