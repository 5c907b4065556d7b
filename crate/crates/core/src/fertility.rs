//! Projection of proportionate age-specific fertility (PASFR).
//!
//! Each future pattern blends, in logit space, a path that converges to a
//! global model pattern with a continuation of the recent national trend.
//! The weight on the global path grows linearly from the base period `t_r`
//! to the trajectory-specific convergence period `t_g`, which is derived from
//! the trajectory's TFR and its entry into the post-transition phase.

use std::cmp::Ordering;

use crate::domain::{
    inverse_logit, logit_clamped, median, PasfrPattern, Period, TfrTrajectory, PASFR_GROUPS,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FertilityProjectionConfig {
    /// Periods spanned by the national trend window.
    pub trend_window: i32,
    pub global_pattern: PasfrPattern,
    /// TFR at or below which a trajectory counts as low fertility.
    pub low_tfr_threshold: f64,
    /// Periods from the start of the post-transition phase to convergence.
    pub phase3_offset: i32,
    /// Convergence never happens sooner than this many periods after `t_r`.
    pub min_reach: i32,
    /// Upper limit, in periods past `t_e`, for an extrapolated phase start.
    pub extrapolation_cap: i32,
    /// Compute the ultimate TFR only from trajectories already in the
    /// post-transition phase by the last period.
    pub ultimate_from_phase3_only: bool,
}

impl FertilityProjectionConfig {
    pub fn new(global_pattern: PasfrPattern) -> Self {
        FertilityProjectionConfig {
            trend_window: 3,
            global_pattern,
            low_tfr_threshold: 1.8,
            phase3_offset: 5,
            min_reach: 2,
            extrapolation_cap: 10,
            ultimate_from_phase3_only: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trend_window <= 0
            || self.phase3_offset <= 0
            || self.min_reach <= 0
            || self.extrapolation_cap <= 0
            || !(self.low_tfr_threshold > 0.0)
        {
            return Err(Error::Config("fertility thresholds must be positive".into()));
        }
        Ok(())
    }
}

fn logits(p: &PasfrPattern) -> [f64; PASFR_GROUPS] {
    p.proportions().map(logit_clamped)
}

fn from_logits(values: [f64; PASFR_GROUPS]) -> PasfrPattern {
    PasfrPattern::normalized(values.map(inverse_logit)).expect("inverse logits are positive")
}

/// Element-wise mean of recent national patterns, renormalised.
pub fn global_model_pattern(patterns: &[PasfrPattern]) -> Result<PasfrPattern> {
    if patterns.is_empty() {
        return Err(Error::InsufficientData("global pattern needs at least one pattern".into()));
    }
    let n = patterns.len() as f64;
    let mut mean = [0.0; PASFR_GROUPS];
    for p in patterns {
        for (m, v) in mean.iter_mut().zip(p.proportions()) {
            *m += v / n;
        }
    }
    PasfrPattern::normalized(mean)
}

/// Logit-linear move from `base` toward `global`; `tau` is the elapsed
/// fraction of the convergence interval.
pub fn pasfr_toward_global(base: &PasfrPattern, global: &PasfrPattern, tau: f64) -> PasfrPattern {
    let (lb, lg) = (logits(base), logits(global));
    from_logits(std::array::from_fn(|i| lb[i] + tau * (lg[i] - lb[i])))
}

/// Continues the logit change observed from `window_start` to `base_period`.
pub fn pasfr_national_trend(
    base: &PasfrPattern,
    earlier: &PasfrPattern,
    t: Period,
    base_period: Period,
    window_start: Period,
) -> Result<PasfrPattern> {
    let window = base_period.steps_since(window_start);
    if window == 0 {
        return Err(Error::DegenerateInput("national trend window has zero length".into()));
    }
    let slope = t.steps_since(base_period) as f64 / window as f64;
    let (lb, le) = (logits(base), logits(earlier));
    Ok(from_logits(std::array::from_fn(|i| lb[i] + slope * (lb[i] - le[i]))))
}

pub fn pasfr_blend(global_path: &PasfrPattern, trend_path: &PasfrPattern, tau: f64) -> PasfrPattern {
    let (lg, lt) = (logits(global_path), logits(trend_path));
    from_logits(std::array::from_fn(|i| tau * lg[i] + (1.0 - tau) * lt[i]))
}

pub fn mean_age_childbearing(p: &PasfrPattern) -> f64 {
    PasfrPattern::midpoints().iter().zip(p.proportions()).map(|(a, p)| a * p).sum()
}

/// Age-specific rates (births per woman per year) for five-year groups.
pub fn asfr_from_pasfr(p: &PasfrPattern, tfr: f64) -> [f64; PASFR_GROUPS] {
    p.proportions().map(|share| tfr * share / 5.0)
}

/// Median TFR in the last projection period across trajectories.
pub fn ultimate_fertility(
    trajectories: &[TfrTrajectory],
    last_period: Period,
    phase3_only: bool,
) -> Result<f64> {
    let last = |t: &TfrTrajectory| *t.tfr.last().expect("validated non-empty");
    let all: Vec<f64> = trajectories.iter().map(last).collect();
    if phase3_only {
        let in_phase3: Vec<f64> = trajectories
            .iter()
            .filter(|t| t.phase3_start.is_some_and(|p| p <= last_period))
            .map(last)
            .collect();
        if let Some(m) = median(&in_phase3) {
            return Ok(m);
        }
        log::warn!("no trajectory reaches the post-transition phase; ultimate TFR uses all trajectories");
    }
    median(&all).ok_or_else(|| Error::InsufficientData("no TFR trajectories".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TgCase {
    /// Phase start before `t_e`; the ultimate TFR is reached at `t_u`.
    ReachedUltimate { t_u: Period },
    /// Phase start before `t_e`; the ultimate TFR is never reached.
    NeverReachesUltimate,
    /// No phase start by `t_e`, and TFR at `t_e` is already low.
    LowFinalTfr,
    /// Phase start extrapolated from the last four TFR values.
    Extrapolated { phase3: Period },
    /// Extrapolated phase start hit the cap past `t_e`.
    ExtrapolationCapped,
}

impl TgCase {
    /// True for the cases where the phase start precedes the last period.
    pub fn is_case1(self) -> bool {
        matches!(self, TgCase::ReachedUltimate { .. } | TgCase::NeverReachesUltimate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TgEstimate {
    pub t_g: Period,
    pub case: TgCase,
}

/// Least-squares line through `(step, value)` points: (intercept, slope).
fn line_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Period by which the trajectory's pattern reaches the global pattern.
///
/// `periods`/`tfr` is the trajectory's TFR series ending at `t_e`;
/// `ultimate_tfr` is the cross-trajectory median at `t_e`.
pub fn estimate_tg(
    periods: &[Period],
    tfr: &[f64],
    phase3_start: Option<Period>,
    base_period: Period,
    ultimate_tfr: f64,
    cfg: &FertilityProjectionConfig,
) -> Result<TgEstimate> {
    if periods.is_empty() || periods.len() != tfr.len() {
        return Err(Error::LengthMismatch { expected: periods.len(), actual: tfr.len() });
    }
    let t_e = *periods.last().expect("non-empty");
    let earliest = base_period.offset(cfg.min_reach);
    let estimate = match phase3_start {
        Some(p3) if p3 < t_e => {
            let t_u = periods
                .iter()
                .zip(tfr)
                .find(|(t, f)| **f >= ultimate_tfr && **t > p3)
                .map(|(t, _)| *t);
            match t_u {
                Some(t_u) => TgEstimate { t_g: t_u.max(earliest), case: TgCase::ReachedUltimate { t_u } },
                None => TgEstimate {
                    t_g: t_e.max(p3.offset(cfg.phase3_offset)),
                    case: TgCase::NeverReachesUltimate,
                },
            }
        }
        _ => {
            let last_tfr = *tfr.last().expect("non-empty");
            let (phase3, case) = if last_tfr <= cfg.low_tfr_threshold {
                (t_e, TgCase::LowFinalTfr)
            } else {
                if tfr.len() < 4 {
                    return Err(Error::InsufficientData(format!(
                        "extrapolating the phase start needs 4 TFR values, got {}",
                        tfr.len()
                    )));
                }
                let n = tfr.len();
                let points: Vec<(f64, f64)> = periods[n - 4..]
                    .iter()
                    .zip(&tfr[n - 4..])
                    .map(|(p, f)| (p.steps_since(t_e) as f64, *f))
                    .collect();
                let (intercept, slope) = line_fit(&points);
                match (0..=cfg.extrapolation_cap)
                    .find(|&j| intercept + slope * j as f64 <= cfg.low_tfr_threshold)
                {
                    Some(j) if j < cfg.extrapolation_cap => {
                        let p = t_e.offset(j);
                        (p, TgCase::Extrapolated { phase3: p })
                    }
                    _ => (t_e.offset(cfg.extrapolation_cap), TgCase::ExtrapolationCapped),
                }
            };
            TgEstimate { t_g: phase3.offset(cfg.phase3_offset), case }
        }
    };
    Ok(TgEstimate { t_g: estimate.t_g.max(earliest), ..estimate })
}

/// The base pattern and an earlier one anchoring the national trend.
#[derive(Debug, Clone, PartialEq)]
pub struct PasfrHistory {
    pub base_period: Period,
    pub base: PasfrPattern,
    pub window_start: Period,
    pub earlier: PasfrPattern,
}

impl PasfrHistory {
    /// Picks the latest observation as the base and the one `window` periods
    /// before it as the trend anchor, falling back to the earliest available.
    pub fn from_observations(observations: &[(Period, PasfrPattern)], window: i32) -> Result<Self> {
        let mut obs = observations.to_vec();
        obs.sort_by_key(|o| o.0);
        let Some(&(base_period, base)) = obs.last() else {
            return Err(Error::InsufficientData("empty PASFR history".into()));
        };
        let wanted = base_period.offset(-window);
        let (window_start, earlier) = match obs.iter().find(|(p, _)| *p == wanted) {
            Some(&found) => found,
            None => {
                let first = obs[0];
                log::warn!(
                    "PASFR history lacks {wanted}; national trend uses {} instead",
                    first.0
                );
                first
            }
        };
        if window_start == base_period {
            return Err(Error::DegenerateInput(
                "PASFR history needs at least two periods for the national trend".into(),
            ));
        }
        Ok(PasfrHistory { base_period, base, window_start, earlier })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PasfrTrajectory {
    pub trajectory: u32,
    pub periods: Vec<Period>,
    pub patterns: Vec<PasfrPattern>,
    pub t_g: Period,
    pub case: TgCase,
    /// Period of the frozen late-childbearing pattern, if the freeze triggered.
    pub frozen_from: Option<Period>,
}

/// Projects the pattern over `periods` (all after the base period) for one
/// TFR trajectory.
pub fn project_pasfr_trajectory(
    history: &PasfrHistory,
    periods: &[Period],
    trajectory: &TfrTrajectory,
    ultimate_tfr: f64,
    cfg: &FertilityProjectionConfig,
) -> Result<PasfrTrajectory> {
    cfg.validate()?;
    let t_r = history.base_period;
    if periods.first().is_some_and(|p| *p <= t_r) {
        return Err(Error::InvalidTrajectory(format!(
            "projection periods must follow the PASFR base period {t_r}"
        )));
    }
    let tg = estimate_tg(periods, &trajectory.tfr, trajectory.phase3_start, t_r, ultimate_tfr, cfg)?;
    let global = cfg.global_pattern;
    let global_mac = mean_age_childbearing(&global);
    let span = tg.t_g.steps_since(t_r) as f64;

    let mut patterns = Vec::with_capacity(periods.len());
    let mut frozen: Option<(Period, PasfrPattern)> = None;
    let (mut prev_period, mut prev) = (t_r, history.base);
    let mut prev_mac = mean_age_childbearing(&prev);
    for &t in periods {
        if let Some((_, p)) = frozen {
            patterns.push(p);
            continue;
        }
        let p = if t >= tg.t_g {
            global
        } else {
            let tau = t.steps_since(t_r) as f64 / span;
            let toward = pasfr_toward_global(&history.base, &global, tau);
            let trend =
                pasfr_national_trend(&history.base, &history.earlier, t, t_r, history.window_start)?;
            pasfr_blend(&toward, &trend, tau)
        };
        let mac = mean_age_childbearing(&p);
        if tg.case.is_case1()
            && t <= tg.t_g
            && mac.partial_cmp(&prev_mac) == Some(Ordering::Less)
            && prev_mac > global_mac
        {
            frozen = Some((prev_period, prev));
            patterns.push(prev);
            continue;
        }
        patterns.push(p);
        (prev_period, prev, prev_mac) = (t, p, mac);
    }
    Ok(PasfrTrajectory {
        trajectory: trajectory.id,
        periods: periods.to_vec(),
        patterns,
        t_g: tg.t_g,
        case: tg.case,
        frozen_from: frozen.map(|(p, _)| p),
    })
}
