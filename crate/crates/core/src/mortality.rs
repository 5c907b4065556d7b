//! Per-trajectory mortality projection.
//!
//! [`fit_mortality`] does the once-per-country work: old-age extension,
//! baseline and sensitivity estimation, and the rotation schedule. The
//! resulting [`MortalityFit`] is read-only and shared by every call to
//! [`project_trajectory`], which for each future period picks the rotated
//! `B_x`, solves `k` per sex so the life table reproduces the target e0, and
//! rebuilds the rates. When male e0 is below female e0, male rates at ages
//! 100+ are raised to at least the female rates.

use crate::domain::{
    smooth_over_age, AgeGrid, E0Trajectory, MortalitySurface, Period, Sex, CANONICAL_GROUPS,
    E0_RANGE,
};
use crate::error::{Error, Result, ResultExt};
use crate::kannisto::{extend_to_130, KannistoMode};
use crate::lee_carter::{
    coherent_bx, estimate_ax, fit_lee_carter, AxMethod, LeeCarterParams, RotationSchedule,
};
use crate::life_table::e0_from_rates;

pub const MODEL_BX_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionConfig {
    pub k_lo: f64,
    pub k_hi: f64,
    /// Accepted |achieved e0 - target| in years.
    pub e0_tolerance: f64,
    /// Half-width of the final bracket on k.
    pub k_tolerance: f64,
    pub max_iter: usize,
    /// How many times the bracket may be doubled for targets in the
    /// plausible e0 range that the initial bracket cannot reach.
    pub max_doublings: u32,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        BisectionConfig {
            k_lo: -300.0,
            k_hi: 300.0,
            e0_tolerance: 0.01,
            k_tolerance: 1e-6,
            max_iter: 200,
            max_doublings: 4,
        }
    }
}

impl BisectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_lo < self.k_hi) {
            return Err(Error::Config(format!("k bracket [{}, {}] is empty", self.k_lo, self.k_hi)));
        }
        if !(self.e0_tolerance > 0.0 && self.k_tolerance > 0.0) {
            return Err(Error::Config("bisection tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BxSource {
    Estimated,
    /// Sensitivities taken from a regional model life table, on the 28-group grid.
    ModelLifeTable(Vec<f64>),
}

/// Time-varying baseline for countries with a generalized HIV/AIDS epidemic.
#[derive(Debug, Clone, PartialEq)]
pub struct HivConfig {
    /// Periods ending in or before this year form the pre-epidemic baseline.
    pub cutoff_year: i32,
    /// The pre-epidemic baseline is reached in the period ending this year.
    pub target_year: i32,
}

impl Default for HivConfig {
    fn default() -> Self {
        HivConfig { cutoff_year: 1985, target_year: 2100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MortalityProjectionConfig {
    pub ax_method: AxMethod,
    pub bx_source: BxSource,
    pub hiv: Option<HivConfig>,
    pub kannisto_mode: KannistoMode,
    pub bisection: BisectionConfig,
    /// Male rates are floored at female rates from this age when male e0 is lower.
    pub crossover_cap_age: u32,
}

impl Default for MortalityProjectionConfig {
    fn default() -> Self {
        MortalityProjectionConfig {
            ax_method: AxMethod::Average,
            bx_source: BxSource::Estimated,
            hiv: None,
            kannisto_mode: KannistoMode::Coherent,
            bisection: BisectionConfig::default(),
            crossover_cap_age: 100,
        }
    }
}

impl MortalityProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        self.bisection.validate()?;
        if self.hiv.is_some() != (self.ax_method == AxMethod::HivInterpolated) {
            return Err(Error::Config(
                "hiv_interpolated a_x and HIV mode must be enabled together".into(),
            ));
        }
        if self.hiv.is_some() && self.bx_source == BxSource::Estimated {
            return Err(Error::Config("HIV mode needs model life table b_x".into()));
        }
        if let Some(h) = &self.hiv {
            if h.target_year <= h.cutoff_year {
                return Err(Error::Config("HIV target year must follow the cutoff year".into()));
            }
        }
        Ok(())
    }
}

/// Rates `exp(a_x + B_x k)`.
pub fn rates_for(ax: &[f64], bx: &[f64], k: f64) -> Vec<f64> {
    ax.iter().zip(bx).map(|(a, b)| (a + b * k).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSolution {
    pub k: f64,
    pub e0: f64,
    pub iterations: usize,
}

/// Finds `k` such that the life table of `exp(a_x + B_x k)` has the target
/// e0. Plain bisection on the midpoint; e0 falls as k rises when all `B_x > 0`.
pub fn solve_k_for_e0(
    ax: &[f64],
    bx: &[f64],
    target_e0: f64,
    sex: Sex,
    cfg: &BisectionConfig,
) -> Result<KSolution> {
    if ax.len() != CANONICAL_GROUPS || bx.len() != CANONICAL_GROUPS {
        return Err(Error::LengthMismatch {
            expected: CANONICAL_GROUPS,
            actual: if ax.len() != CANONICAL_GROUPS { ax.len() } else { bx.len() },
        });
    }
    cfg.validate()?;
    let grid = AgeGrid::canonical();
    let e0_at = |k: f64| e0_from_rates(&grid, &rates_for(ax, bx, k), sex);

    let (mut lo, mut hi) = (cfg.k_lo, cfg.k_hi);
    let (mut e_lo, mut e_hi) = (e0_at(lo), e0_at(hi));
    // targets are only meaningful inside the trajectory e0 domain
    let plausible = target_e0 > E0_RANGE.0 && target_e0 < E0_RANGE.1;
    let mut doublings = 0;
    while !(plausible && e_hi <= target_e0 && target_e0 <= e_lo) {
        if !plausible || doublings == cfg.max_doublings || !e_lo.is_finite() || !e_hi.is_finite() {
            return Err(Error::UnbracketedTarget {
                target: target_e0,
                min_e0: e_hi.max(E0_RANGE.0),
                max_e0: e_lo.min(E0_RANGE.1),
            });
        }
        if target_e0 > e_lo {
            lo *= 2.0;
            e_lo = e0_at(lo);
        } else {
            hi *= 2.0;
            e_hi = e0_at(hi);
        }
        doublings += 1;
    }

    let mut residual = f64::INFINITY;
    for iteration in 1..=cfg.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        let e = e0_at(mid);
        residual = e - target_e0;
        if residual == 0.0 || (0.5 * (hi - lo) <= cfg.k_tolerance && residual.abs() <= cfg.e0_tolerance) {
            return Ok(KSolution { k: mid, e0: e, iterations: iteration });
        }
        if e > target_e0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence { iterations: cfg.max_iter, residual })
}

/// Baseline moving linearly from the smoothed jump-off pattern to the
/// smoothed pre-epidemic pattern, constant after the target period.
#[derive(Debug, Clone, PartialEq)]
pub struct AxPath {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub from: Period,
    pub to: Period,
}

impl AxPath {
    pub fn at(&self, period: Period) -> Vec<f64> {
        let span = self.to.steps_since(self.from) as f64;
        let f = (period.steps_since(self.from) as f64 / span).clamp(0.0, 1.0);
        self.start.iter().zip(&self.end).map(|(s, e)| (1.0 - f) * s + f * e).collect()
    }
}

pub fn hiv_ax_path(surface: &MortalitySurface, jump_off: Period, cfg: &HivConfig) -> Result<AxPath> {
    let start = smooth_over_age(&surface.last_schedule().log_rates(), true)?;
    let early: Vec<Vec<f64>> = surface
        .periods()
        .iter()
        .zip(surface.schedules())
        .filter(|(p, _)| p.end_year() <= cfg.cutoff_year)
        .map(|(_, s)| s.log_rates())
        .collect();
    if early.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no {} periods ending by {}",
            surface.sex(),
            cfg.cutoff_year
        )));
    }
    let n = early.len() as f64;
    let pre_epidemic: Vec<f64> =
        (0..start.len()).map(|x| early.iter().map(|row| row[x]).sum::<f64>() / n).collect();
    let end = smooth_over_age(&pre_epidemic, true)?;
    let to = Period::ending_in(cfg.target_year);
    if to <= jump_off {
        return Err(Error::Config(format!("HIV target period {to} is not after the jump-off {jump_off}")));
    }
    Ok(AxPath { start, end, from: jump_off, to })
}

/// Validates model-life-table sensitivities and builds the rotation unless
/// the HIV path is active, where `B_x` stays fixed at the model values.
pub fn model_bx_path(model_bx: &[f64], hiv: bool) -> Result<(Vec<f64>, Option<RotationSchedule>)> {
    if model_bx.len() != CANONICAL_GROUPS {
        return Err(Error::LengthMismatch { expected: CANONICAL_GROUPS, actual: model_bx.len() });
    }
    let sum: f64 = model_bx.iter().sum();
    if (sum - 1.0).abs() > MODEL_BX_SUM_TOLERANCE || model_bx.iter().any(|b| !b.is_finite()) {
        return Err(Error::Config(format!("model b_x must sum to 1, sums to {sum}")));
    }
    let rotation = if hiv { None } else { Some(RotationSchedule::new(model_bx.to_vec())?) };
    Ok((model_bx.to_vec(), rotation))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    Fixed(Vec<f64>),
    Hiv(AxPath),
}

impl Baseline {
    pub fn at(&self, period: Period) -> Vec<f64> {
        match self {
            Baseline::Fixed(a) => a.clone(),
            Baseline::Hiv(path) => path.at(period),
        }
    }
}

/// Country-level products shared read-only by every trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MortalityFit {
    pub jump_off: Period,
    pub female_baseline: Baseline,
    pub male_baseline: Baseline,
    /// Per-sex Lee-Carter fits, present when `b_x` was estimated.
    pub female_lc: Option<LeeCarterParams>,
    pub male_lc: Option<LeeCarterParams>,
    /// Common sensitivities used when no rotation applies.
    pub bx: Vec<f64>,
    pub rotation: Option<RotationSchedule>,
    pub extended_female: MortalitySurface,
    pub extended_male: MortalitySurface,
}

impl MortalityFit {
    pub fn baseline(&self, sex: Sex) -> &Baseline {
        match sex {
            Sex::Female => &self.female_baseline,
            Sex::Male => &self.male_baseline,
        }
    }

    /// `B_x` for a combined (two-sex mean) e0.
    pub fn sensitivities(&self, combined_e0: f64) -> Vec<f64> {
        match &self.rotation {
            Some(r) => r.rotated_bx(combined_e0),
            None => self.bx.clone(),
        }
    }
}

pub fn fit_mortality(
    female: &MortalitySurface,
    male: &MortalitySurface,
    cfg: &MortalityProjectionConfig,
) -> Result<MortalityFit> {
    cfg.validate()?;
    let (ext_f, ext_m) = extend_to_130(female, male, cfg.kannisto_mode)?;
    let jump_off = ext_f.last_period();

    if let Some(hiv) = &cfg.hiv {
        let BxSource::ModelLifeTable(model) = &cfg.bx_source else {
            unreachable!("validated above")
        };
        let (bx, rotation) = model_bx_path(model, true)?;
        let path_f = hiv_ax_path(&ext_f, jump_off, hiv).context_with(|| "female HIV baseline".into())?;
        let path_m = hiv_ax_path(&ext_m, jump_off, hiv).context_with(|| "male HIV baseline".into())?;
        return Ok(MortalityFit {
            jump_off,
            female_baseline: Baseline::Hiv(path_f),
            male_baseline: Baseline::Hiv(path_m),
            female_lc: None,
            male_lc: None,
            bx,
            rotation,
            extended_female: ext_f,
            extended_male: ext_m,
        });
    }

    let (female_lc, male_lc, ax_f, ax_m, bx, rotation) = match &cfg.bx_source {
        BxSource::Estimated => {
            let lc_f = fit_lee_carter(&ext_f, cfg.ax_method).context_with(|| "female Lee-Carter".into())?;
            let lc_m = fit_lee_carter(&ext_m, cfg.ax_method).context_with(|| "male Lee-Carter".into())?;
            let bx = coherent_bx(&lc_f.bx, &lc_m.bx)?;
            let rotation = Some(RotationSchedule::new(bx.clone())?);
            let (ax_f, ax_m) = (lc_f.ax.clone(), lc_m.ax.clone());
            (Some(lc_f), Some(lc_m), ax_f, ax_m, bx, rotation)
        }
        BxSource::ModelLifeTable(model) => {
            let (bx, rotation) = model_bx_path(model, false)?;
            let ax_f = estimate_ax(&ext_f, cfg.ax_method)?;
            let ax_m = estimate_ax(&ext_m, cfg.ax_method)?;
            (None, None, ax_f, ax_m, bx, rotation)
        }
    };
    Ok(MortalityFit {
        jump_off,
        female_baseline: Baseline::Fixed(ax_f),
        male_baseline: Baseline::Fixed(ax_m),
        female_lc,
        male_lc,
        bx,
        rotation,
        extended_female: ext_f,
        extended_male: ext_m,
    })
}

/// Projected rates for one e0 trajectory, indexed by period.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedMortality {
    pub trajectory: u32,
    pub periods: Vec<Period>,
    pub female: Vec<Vec<f64>>,
    pub male: Vec<Vec<f64>>,
    pub k_female: Vec<f64>,
    pub k_male: Vec<f64>,
    /// e0 achieved by the solved rates, before the old-age crossover cap.
    pub solved_e0_female: Vec<f64>,
    pub solved_e0_male: Vec<f64>,
}

impl ProjectedMortality {
    pub fn rates(&self, sex: Sex) -> &[Vec<f64>] {
        match sex {
            Sex::Female => &self.female,
            Sex::Male => &self.male,
        }
    }
}

/// Raises male rates to the female level from `cap_age` up. Returns whether
/// anything changed.
pub fn apply_crossover_cap(female: &[f64], male: &mut [f64], cap_age: u32) -> bool {
    let grid = AgeGrid::canonical();
    let mut changed = false;
    for ((g, f), m) in grid.groups().iter().zip(female).zip(male.iter_mut()) {
        if g.start >= cap_age && *m < *f {
            *m = *f;
            changed = true;
        }
    }
    changed
}

pub fn project_trajectory(
    fit: &MortalityFit,
    periods: &[Period],
    e0: &E0Trajectory,
    cfg: &MortalityProjectionConfig,
) -> Result<ProjectedMortality> {
    if e0.female.len() != periods.len() || e0.male.len() != periods.len() {
        return Err(Error::LengthMismatch { expected: periods.len(), actual: e0.female.len() });
    }
    let n = periods.len();
    let mut out = ProjectedMortality {
        trajectory: e0.id,
        periods: periods.to_vec(),
        female: Vec::with_capacity(n),
        male: Vec::with_capacity(n),
        k_female: Vec::with_capacity(n),
        k_male: Vec::with_capacity(n),
        solved_e0_female: Vec::with_capacity(n),
        solved_e0_male: Vec::with_capacity(n),
    };
    for (i, &period) in periods.iter().enumerate() {
        let (target_f, target_m) = (e0.female[i], e0.male[i]);
        let bx = fit.sensitivities(0.5 * (target_f + target_m));
        let mut per_sex = Vec::with_capacity(2);
        for (sex, target) in [(Sex::Female, target_f), (Sex::Male, target_m)] {
            let ax = fit.baseline(sex).at(period);
            let s = solve_k_for_e0(&ax, &bx, target, sex, &cfg.bisection).context_with(|| {
                format!("trajectory {}, period {period}, sex {sex}", e0.id)
            })?;
            per_sex.push((s.k, s.e0, rates_for(&ax, &bx, s.k)));
        }
        let (k_m, e_m, mut m_rates) = per_sex.pop().expect("male");
        let (k_f, e_f, f_rates) = per_sex.pop().expect("female");
        if target_m < target_f && apply_crossover_cap(&f_rates, &mut m_rates, cfg.crossover_cap_age) {
            log::debug!(
                "trajectory {} period {period}: male rates raised to female level from age {}",
                e0.id,
                cfg.crossover_cap_age
            );
        }
        out.female.push(f_rates);
        out.male.push(m_rates);
        out.k_female.push(k_f);
        out.k_male.push(k_m);
        out.solved_e0_female.push(e_f);
        out.solved_e0_male.push(e_m);
    }
    Ok(out)
}
