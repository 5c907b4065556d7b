//! Synthetic Lee-Carter surfaces generated from known parameters.
#![allow(dead_code)]

use rand::Rng;
use vitalrates_core::domain::{AgeGrid, MortalitySchedule, MortalitySurface, Period, Sex};

pub struct LcTruth {
    pub ax: Vec<f64>,
    pub bx: Vec<f64>,
    pub kt: Vec<f64>,
}

/// Log-rate baseline on the canonical grid with a Gompertz-like adult slope.
pub fn gompertz_ax(level: f64, male_shift: f64) -> Vec<f64> {
    AgeGrid::canonical()
        .groups()
        .iter()
        .map(|g| match g.start {
            0 => (0.02f64 * (1.0 + male_shift)).ln(),
            1 => (0.002f64 * (1.0 + male_shift)).ln(),
            _ => ((5e-4 + level * (0.09 * g.midpoint()).exp()) * (1.0 + male_shift)).min(0.8).ln(),
        })
        .collect()
}

/// Random truth with `sum(b) = 1` and `sum(k) = 0`.
pub fn random_truth<R: Rng>(rng: &mut R, periods: usize) -> LcTruth {
    let raw: Vec<f64> = (0..28).map(|_| rng.gen_range(0.2..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let bx = raw.iter().map(|b| b / s).collect();
    let drift = rng.gen_range(-8.0..-2.0);
    let mut kt: Vec<f64> = (0..periods).map(|t| drift * t as f64 + rng.gen_range(-1.0..1.0)).collect();
    let mean = kt.iter().sum::<f64>() / periods as f64;
    kt.iter_mut().for_each(|k| *k -= mean);
    let ax = gompertz_ax(rng.gen_range(2e-5..8e-5), 0.0).iter().map(|a| a - 0.5).collect();
    LcTruth { ax, bx, kt }
}

pub fn periods_from(start: i32, n: usize) -> Vec<Period> {
    (0..n).map(|i| Period(start + 5 * i as i32)).collect()
}

pub fn surface_from(truth: &LcTruth, sex: Sex, first: i32) -> MortalitySurface {
    let periods = periods_from(first, truth.kt.len());
    let schedules = truth
        .kt
        .iter()
        .map(|k| {
            let logs: Vec<f64> = truth.ax.iter().zip(&truth.bx).map(|(a, b)| a + b * k).collect();
            MortalitySchedule::from_log_rates(AgeGrid::canonical(), &logs).unwrap()
        })
        .collect();
    MortalitySurface::new(sex, periods, schedules).unwrap()
}

/// Observed-style surface on a grid open at `open`, declining over time,
/// males above females.
pub fn observed_surface(sex: Sex, periods: &[Period], open: u32) -> MortalitySurface {
    let grid = AgeGrid::abridged(open).unwrap();
    let shift = if sex == Sex::Male { 0.3 } else { 0.0 };
    let schedules = periods
        .iter()
        .enumerate()
        .map(|(t, _)| {
            let decline = (-0.08 * t as f64).exp();
            let rates = grid
                .groups()
                .iter()
                .map(|g| {
                    let base = match g.start {
                        0 => 0.05 * decline,
                        1 => 0.005 * decline,
                        _ => 4e-4 * decline + 3e-5 * (0.095 * g.midpoint()).exp() * decline.sqrt(),
                    };
                    (base * (1.0 + shift)).min(0.9)
                })
                .collect();
            MortalitySchedule::new(grid.clone(), rates).unwrap()
        })
        .collect();
    MortalitySurface::new(sex, periods.to_vec(), schedules).unwrap()
}
