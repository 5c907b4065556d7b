//! Old-age extension of mortality schedules with the Kannisto logistic law,
//! `logit(m_x) = log c + d x`.
//!
//! The coherent variant fits both sexes jointly with a shared slope `d` and
//! sex-specific levels, so the extended female and male curves are parallel
//! in logit space and cannot cross. The classic variant fits each sex alone.

use crate::domain::{
    inverse_logit, logit, AgeGrid, MortalitySchedule, MortalitySurface, Sex, MAX_OPEN_AGE,
};
use crate::error::{Error, Result, ResultExt};

/// Lowest group start age used in the fit.
pub const FIT_MIN_AGE: u32 = 80;
/// Fit uses closed groups starting below this age.
pub const FIT_MAX_AGE: u32 = 100;
/// Observed grids must be open at this age or later.
pub const MIN_OBSERVED_OPEN_AGE: u32 = 85;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KannistoMode {
    Coherent,
    Classic,
}

impl KannistoMode {
    pub fn name(self) -> &'static str {
        match self {
            KannistoMode::Coherent => "coherent",
            KannistoMode::Classic => "classic",
        }
    }
}

impl std::str::FromStr for KannistoMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "coherent" => Ok(KannistoMode::Coherent),
            "classic" => Ok(KannistoMode::Classic),
            other => Err(Error::Config(format!("unknown Kannisto mode '{other}'"))),
        }
    }
}

/// A single logistic curve in age.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KannistoCurve {
    pub c: f64,
    pub d: f64,
}

impl KannistoCurve {
    pub fn logit_at(&self, age: f64) -> f64 {
        self.c.ln() + self.d * age
    }

    pub fn rate_at(&self, age: f64) -> f64 {
        inverse_logit(self.logit_at(age))
    }
}

/// Jointly fitted coefficients: shared slope, sex-specific levels.
#[derive(Debug, Clone, PartialEq)]
pub struct KannistoCoeffs {
    pub c_female: f64,
    pub c_male: f64,
    pub d: f64,
    pub fit_ages: Vec<f64>,
}

impl KannistoCoeffs {
    pub fn curve(&self, sex: Sex) -> KannistoCurve {
        let c = match sex {
            Sex::Female => self.c_female,
            Sex::Male => self.c_male,
        };
        KannistoCurve { c, d: self.d }
    }
}

/// (midpoint, logit rate) for every closed group starting in [80, 100).
fn fit_points(m: &MortalitySchedule) -> Result<Vec<(f64, f64)>> {
    let mut points = Vec::new();
    for (i, (g, &rate)) in m.grid().groups().iter().zip(m.rates()).enumerate() {
        if g.is_open() || g.start < FIT_MIN_AGE || g.start >= FIT_MAX_AGE {
            continue;
        }
        let y = logit(rate);
        if !y.is_finite() || rate >= 1.0 {
            return Err(Error::InvalidRate { index: i, value: rate });
        }
        points.push((g.midpoint(), y));
    }
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "Kannisto fit needs at least 2 closed age groups in [{FIT_MIN_AGE}, {FIT_MAX_AGE}), found {}",
            points.len()
        )));
    }
    Ok(points)
}

fn centered_sums(points: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (mx, my, sxx, sxy)
}

/// Least squares of logit rates on (1, male indicator, age) over both sexes.
///
/// With a sex indicator in the design the common slope is the pooled
/// within-sex slope and each intercept passes through that sex's centroid.
pub fn fit_coherent_kannisto(
    female: &MortalitySchedule,
    male: &MortalitySchedule,
) -> Result<KannistoCoeffs> {
    if female.grid() != male.grid() {
        return Err(Error::InvalidAgeGrid("female and male schedules use different grids".into()));
    }
    let pf = fit_points(female).context_with(|| "female".into())?;
    let pm = fit_points(male).context_with(|| "male".into())?;
    let (fx, fy, fsxx, fsxy) = centered_sums(&pf);
    let (mx, my, msxx, msxy) = centered_sums(&pm);
    let d = (fsxy + msxy) / (fsxx + msxx);
    let beta0 = fy - d * fx;
    let beta0_plus_beta1 = my - d * mx;
    Ok(KannistoCoeffs {
        c_female: beta0.exp(),
        c_male: beta0_plus_beta1.exp(),
        d,
        fit_ages: pf.iter().map(|p| p.0).collect(),
    })
}

/// Least squares of logit rates on (1, age) for one sex.
pub fn fit_classic_kannisto(m: &MortalitySchedule) -> Result<KannistoCurve> {
    let points = fit_points(m)?;
    let (mx, my, sxx, sxy) = centered_sums(&points);
    let d = sxy / sxx;
    Ok(KannistoCurve { c: (my - d * mx).exp(), d })
}

/// Rebuilds one schedule on the full grid. Observed closed groups below the
/// splice age are copied; everything else takes the fitted curve, with 130+
/// evaluated at age 130.
fn extend_schedule(
    observed: &MortalitySchedule,
    curve: KannistoCurve,
    full: &AgeGrid,
) -> Result<MortalitySchedule> {
    let grid = observed.grid();
    let splice = FIT_MAX_AGE.max(grid.open_start());
    let rates = full
        .groups()
        .iter()
        .map(|g| {
            let kept = grid
                .index_of_start(g.start)
                .filter(|&i| !grid.groups()[i].is_open() && g.start < splice);
            match kept {
                Some(i) => observed.rates()[i],
                None if g.is_open() => curve.rate_at(MAX_OPEN_AGE as f64),
                None => curve.rate_at(g.midpoint()),
            }
        })
        .collect();
    MortalitySchedule::new(full.clone(), rates)
}

/// Extends both sexes' surfaces to the 28-group grid ending at 130+, fitting
/// each period independently.
pub fn extend_to_130(
    female: &MortalitySurface,
    male: &MortalitySurface,
    mode: KannistoMode,
) -> Result<(MortalitySurface, MortalitySurface)> {
    if female.sex() != Sex::Female || male.sex() != Sex::Male {
        return Err(Error::DegenerateInput("surfaces passed in the wrong sex order".into()));
    }
    if female.periods() != male.periods() {
        return Err(Error::DegenerateInput("female and male surfaces cover different periods".into()));
    }
    if female.grid() != male.grid() {
        return Err(Error::InvalidAgeGrid("female and male surfaces use different grids".into()));
    }
    if female.grid().open_start() < MIN_OBSERVED_OPEN_AGE {
        return Err(Error::InvalidAgeGrid(format!(
            "observed open group starts at {}, extension needs at least {MIN_OBSERVED_OPEN_AGE}",
            female.grid().open_start()
        )));
    }
    let full = AgeGrid::canonical();
    let mut out_f = Vec::with_capacity(female.periods().len());
    let mut out_m = Vec::with_capacity(female.periods().len());
    for ((period, sf), sm) in female.periods().iter().zip(female.schedules()).zip(male.schedules()) {
        let (cf, cm) = match mode {
            KannistoMode::Coherent => {
                let k = fit_coherent_kannisto(sf, sm)
                    .context_with(|| format!("Kannisto fit for period {period}"))?;
                (k.curve(Sex::Female), k.curve(Sex::Male))
            }
            KannistoMode::Classic => (
                fit_classic_kannisto(sf)
                    .context_with(|| format!("female Kannisto fit for period {period}"))?,
                fit_classic_kannisto(sm)
                    .context_with(|| format!("male Kannisto fit for period {period}"))?,
            ),
        };
        out_f.push(extend_schedule(sf, cf, &full)?);
        out_m.push(extend_schedule(sm, cm, &full)?);
    }
    Ok((
        MortalitySurface::new(Sex::Female, female.periods().to_vec(), out_f)?,
        MortalitySurface::new(Sex::Male, male.periods().to_vec(), out_m)?,
    ))
}
