//! Abridged period life tables in the style of the UN Mortpak LIFTB routine.
//!
//! Separation factors `A_x` follow Coale-Demeny West below age 5, a flat 2.5
//! for ages 5-14, and Greville's formula from age 15 up. The closed-group
//! person-years use `L = A l_x + (n - A) l_{x+n}` and the open group uses
//! `L = l / m`. The radix is 1.

use crate::domain::{AgeGrid, MortalitySchedule, Sex};
use crate::error::{Error, Result};

/// Infant rate at or above which the high-mortality Coale-Demeny constants apply.
pub const CD_WEST_INFANT_THRESHOLD: f64 = 0.107;

/// Upper cap on closed-group probabilities of dying, keeping survivors positive.
pub const MAX_CLOSED_QX: f64 = 1.0 - 1e-12;

/// Coale-Demeny West separation factors for ages 0-1 and 1-4.
pub fn coale_demeny_under5(infant_rate: f64, sex: Sex) -> (f64, f64) {
    let m0 = infant_rate;
    if m0 >= CD_WEST_INFANT_THRESHOLD {
        match sex {
            Sex::Male => (0.33, 1.352),
            Sex::Female => (0.35, 1.361),
        }
    } else {
        match sex {
            Sex::Male => (0.045 + 2.684 * m0, 1.651 - 2.816 * m0),
            Sex::Female => (0.053 + 2.800 * m0, 1.522 - 1.518 * m0),
        }
    }
}

/// Greville's separation factor for a five-year group with rate `m` whose
/// neighbours have rates `below` and `above`.
pub fn greville(m: f64, below: f64, above: f64) -> f64 {
    let k = 0.1 * (above / below).ln();
    2.5 - (25.0 / 12.0) * (m - k)
}

fn check_grid(grid: &AgeGrid) -> Result<()> {
    if grid.open_start() < 15 {
        return Err(Error::InvalidAgeGrid(format!(
            "life tables need closed groups through 10-14, grid opens at {}",
            grid.open_start()
        )));
    }
    Ok(())
}

/// `A_x` for group `i`. Closed-group values are kept inside `[0, n]`; the
/// open group reports its mean survival time `1/m`.
fn separation_factor(grid: &AgeGrid, rates: &[f64], i: usize, sex: Sex) -> f64 {
    let g = grid.groups()[i];
    let Some(n) = g.width else {
        return 1.0 / rates[i];
    };
    let raw = match g.start {
        0 => coale_demeny_under5(rates[0], sex).0,
        1 => coale_demeny_under5(rates[0], sex).1,
        5 | 10 => 2.5,
        _ => greville(rates[i], rates[i - 1], rates[i + 1]),
    };
    raw.clamp(0.0, n as f64)
}

/// Separation factors for every group of the schedule.
pub fn separation_factors(m: &MortalitySchedule, sex: Sex) -> Result<Vec<f64>> {
    check_grid(m.grid())?;
    Ok((0..m.grid().len()).map(|i| separation_factor(m.grid(), m.rates(), i, sex)).collect())
}

fn closed_qx(n: f64, m: f64, a: f64) -> f64 {
    (n * m / (1.0 + (n - a) * m)).min(MAX_CLOSED_QX)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifeTable {
    pub grid: AgeGrid,
    pub ax: Vec<f64>,
    pub qx: Vec<f64>,
    pub lx: Vec<f64>,
    pub dx: Vec<f64>,
    pub person_years: Vec<f64>,
    pub tx: Vec<f64>,
    pub ex: Vec<f64>,
}

impl LifeTable {
    pub fn e0(&self) -> f64 {
        self.ex[0]
    }
}

pub fn build_life_table(m: &MortalitySchedule, sex: Sex) -> Result<LifeTable> {
    let grid = m.grid();
    check_grid(grid)?;
    let rates = m.rates();
    let n_groups = grid.len();
    let ax: Vec<f64> = (0..n_groups).map(|i| separation_factor(grid, rates, i, sex)).collect();
    let mut qx = Vec::with_capacity(n_groups);
    let mut lx = Vec::with_capacity(n_groups);
    let mut dx = Vec::with_capacity(n_groups);
    let mut person_years = Vec::with_capacity(n_groups);
    let mut l = 1.0;
    for (i, g) in grid.groups().iter().enumerate() {
        lx.push(l);
        match g.width {
            Some(w) => {
                let n = w as f64;
                let q = closed_qx(n, rates[i], ax[i]);
                let next = l * (1.0 - q);
                qx.push(q);
                dx.push(l - next);
                person_years.push(ax[i] * l + (n - ax[i]) * next);
                l = next;
            }
            None => {
                qx.push(1.0);
                dx.push(l);
                person_years.push(l / rates[i]);
            }
        }
    }
    let mut tx = vec![0.0; n_groups];
    let mut acc = 0.0;
    for i in (0..n_groups).rev() {
        acc += person_years[i];
        tx[i] = acc;
    }
    let ex = tx.iter().zip(&lx).map(|(t, l)| if *l > 0.0 { t / l } else { 0.0 }).collect();
    Ok(LifeTable { grid: grid.clone(), ax, qx, lx, dx, person_years, tx, ex })
}

/// Life expectancy at birth from raw rates on `grid`, without materialising
/// the table. Same arithmetic as [`build_life_table`]; used inside solvers.
pub fn e0_from_rates(grid: &AgeGrid, rates: &[f64], sex: Sex) -> f64 {
    let mut l = 1.0;
    let mut person_years = Vec::with_capacity(grid.len());
    for (i, g) in grid.groups().iter().enumerate() {
        let a = separation_factor(grid, rates, i, sex);
        match g.width {
            Some(w) => {
                let n = w as f64;
                let next = l * (1.0 - closed_qx(n, rates[i], a));
                person_years.push(a * l + (n - a) * next);
                l = next;
            }
            None => person_years.push(l / rates[i]),
        }
    }
    // summed from the oldest group down, as T_x is in the full table
    person_years.iter().rev().sum()
}

pub fn e0_from_mx(m: &MortalitySchedule, sex: Sex) -> Result<f64> {
    check_grid(m.grid())?;
    Ok(e0_from_rates(m.grid(), m.rates(), sex))
}
