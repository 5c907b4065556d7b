//! Lee-Carter estimation (`log m_x(t) = a_x + b_x k(t)`), the coherent
//! two-sex `b_x`, and the e0-driven rotation of `b_x` toward an ultimate
//! schedule.

use std::f64::consts::FRAC_PI_2;

use crate::domain::{smooth_over_age, MortalitySurface, CANONICAL_GROUPS};
use crate::error::{Error, Result};

/// How the age baseline `a_x` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxMethod {
    /// Time mean of log rates.
    Average,
    /// Log rates of the jump-off period; forces `k(T) = 0`.
    Latest,
    /// Jump-off log rates smoothed over age, infant value kept.
    LatestSmoothed,
    /// Time-varying baseline for generalized HIV/AIDS epidemics. Its starting
    /// point is the smoothed jump-off baseline.
    HivInterpolated,
}

impl AxMethod {
    pub fn name(self) -> &'static str {
        match self {
            AxMethod::Average => "average",
            AxMethod::Latest => "latest",
            AxMethod::LatestSmoothed => "latest_smoothed",
            AxMethod::HivInterpolated => "hiv_interpolated",
        }
    }
}

impl std::str::FromStr for AxMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "average" => Ok(AxMethod::Average),
            "latest" => Ok(AxMethod::Latest),
            "latest_smoothed" => Ok(AxMethod::LatestSmoothed),
            "hiv_interpolated" => Ok(AxMethod::HivInterpolated),
            other => Err(Error::Config(format!("unknown a_x method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeeCarterParams {
    pub ax: Vec<f64>,
    pub bx: Vec<f64>,
    pub kt: Vec<f64>,
    pub ax_method: AxMethod,
}

/// Time mean of log rates at each age.
pub fn mean_log_rates(surface: &MortalitySurface) -> Vec<f64> {
    let logs = surface.log_rates();
    let t = logs.len() as f64;
    (0..surface.grid().len()).map(|x| logs.iter().map(|row| row[x]).sum::<f64>() / t).collect()
}

pub fn estimate_ax(surface: &MortalitySurface, method: AxMethod) -> Result<Vec<f64>> {
    match method {
        AxMethod::Average => Ok(mean_log_rates(surface)),
        AxMethod::Latest => Ok(surface.last_schedule().log_rates()),
        AxMethod::LatestSmoothed | AxMethod::HivInterpolated => {
            smooth_over_age(&surface.last_schedule().log_rates(), true)
        }
    }
}

/// Period index and age sensitivities given a baseline, normalised so that
/// `sum(b_x) = 1`; `k_t` absorbs the inverse factor so `b_x k_t` is unchanged.
pub fn estimate_kt_bx(surface: &MortalitySurface, ax: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n_ages = surface.grid().len();
    if ax.len() != n_ages {
        return Err(Error::LengthMismatch { expected: n_ages, actual: ax.len() });
    }
    let deviations: Vec<Vec<f64>> = surface
        .log_rates()
        .into_iter()
        .map(|row| row.iter().zip(ax).map(|(l, a)| l - a).collect())
        .collect();
    let mut kt: Vec<f64> = deviations.iter().map(|row| row.iter().sum()).collect();
    let kk: f64 = kt.iter().map(|k| k * k).sum();
    if kk == 0.0 {
        return Err(Error::DegenerateTrend);
    }
    let mut bx: Vec<f64> = (0..n_ages)
        .map(|x| deviations.iter().zip(&kt).map(|(row, k)| row[x] * k).sum::<f64>() / kk)
        .collect();
    let scale: f64 = bx.iter().sum();
    if !scale.is_finite() || scale.abs() < 1e-12 {
        return Err(Error::Singular(format!("b_x sums to {scale}; cannot normalise")));
    }
    bx.iter_mut().for_each(|b| *b /= scale);
    kt.iter_mut().for_each(|k| *k *= scale);
    Ok((kt, bx))
}

pub fn fit_lee_carter(surface: &MortalitySurface, method: AxMethod) -> Result<LeeCarterParams> {
    let ax = estimate_ax(surface, method)?;
    let (kt, bx) = estimate_kt_bx(surface, &ax)?;
    Ok(LeeCarterParams { ax, bx, kt, ax_method: method })
}

/// Element-wise mean of the female and male sensitivities.
pub fn coherent_bx(female: &[f64], male: &[f64]) -> Result<Vec<f64>> {
    if female.len() != male.len() {
        return Err(Error::LengthMismatch { expected: female.len(), actual: male.len() });
    }
    Ok(female.iter().zip(male).map(|(f, m)| (f + m) / 2.0).collect())
}

const IDX_15_19: usize = 4;
const IDX_60_64: usize = 13;
const IDX_65_69: usize = 14;

/// Ultimate sensitivities: flat at the 15-64 mean up to 60-64, the old-age
/// shape rescaled to join that level at 65-69, then normalised to sum one.
pub fn ultimate_bux(bx: &[f64]) -> Result<Vec<f64>> {
    if bx.len() != CANONICAL_GROUPS {
        return Err(Error::LengthMismatch { expected: CANONICAL_GROUPS, actual: bx.len() });
    }
    if bx[IDX_65_69] == 0.0 {
        return Err(Error::Singular("b_x at 65-69 is zero".into()));
    }
    let mean_15_64 = bx[IDX_15_19..=IDX_60_64].iter().sum::<f64>() / 10.0;
    let ratio = mean_15_64 / bx[IDX_65_69];
    let raw: Vec<f64> = bx
        .iter()
        .enumerate()
        .map(|(i, b)| if i <= IDX_60_64 { mean_15_64 } else { b * ratio })
        .collect();
    let total: f64 = raw.iter().sum();
    if !total.is_finite() || total == 0.0 {
        return Err(Error::Singular(format!("ultimate b_x sums to {total}")));
    }
    Ok(raw.into_iter().map(|b| b / total).collect())
}

pub const ROTATION_START_E0: f64 = 80.0;
pub const ROTATION_ULTIMATE_E0: f64 = 102.0;

/// Starting and ultimate sensitivities plus the e0 window over which the
/// rotation happens.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationSchedule {
    pub bx: Vec<f64>,
    pub bux: Vec<f64>,
    pub e0_start: f64,
    pub e0_ultimate: f64,
}

impl RotationSchedule {
    pub fn new(bx: Vec<f64>) -> Result<Self> {
        let bux = ultimate_bux(&bx)?;
        Ok(RotationSchedule { bx, bux, e0_start: ROTATION_START_E0, e0_ultimate: ROTATION_ULTIMATE_E0 })
    }

    /// Smooth weight in [0, 1]: 0 at the start level, 1 at the ultimate level.
    pub fn weight(&self, e0: f64) -> f64 {
        let w = ((e0 - self.e0_start) / (self.e0_ultimate - self.e0_start)).clamp(0.0, 1.0);
        (0.5 * (1.0 + (FRAC_PI_2 * (2.0 * w - 1.0)).sin())).sqrt()
    }

    pub fn rotated_bx(&self, e0: f64) -> Vec<f64> {
        if e0 < self.e0_start {
            return self.bx.clone();
        }
        if e0 >= self.e0_ultimate {
            return self.bux.clone();
        }
        let w = self.weight(e0);
        self.bx.iter().zip(&self.bux).map(|(b, u)| (1.0 - w) * b + w * u).collect()
    }
}
