//! Deterministic synthetic inputs for demos and end-to-end tests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use vitalrates_core::domain::{AgeGrid, MortalitySchedule, PasfrPattern, Period, Sex, PASFR_GROUPS};
use vitalrates_core::life_table::e0_from_mx;

use crate::error::{PipelineError, Result};
use crate::output::fmt;

pub const SAMPLE_COUNTRY: &str = "SYN";
pub const DEFAULT_SEED: u64 = 20100;
pub const DEFAULT_TRAJECTORIES: usize = 1000;
pub const OBSERVED_PERIODS: usize = 12;
pub const PROJECTED_PERIODS: usize = 18;

#[derive(Debug, Clone, Copy)]
pub struct SampleOptions {
    pub seed: u64,
    pub trajectories: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { seed: DEFAULT_SEED, trajectories: DEFAULT_TRAJECTORIES }
    }
}

pub fn observed_periods() -> Vec<Period> {
    (0..OBSERVED_PERIODS as i32).map(|i| Period(1950).offset(i)).collect()
}

pub fn projected_periods() -> Vec<Period> {
    (0..PROJECTED_PERIODS as i32).map(|i| Period(2010).offset(i)).collect()
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("positive standard deviation")
}

/// Female log-rate level and age pattern of improvement on a grid open at 100.
fn female_structure(grid: &AgeGrid) -> (Vec<f64>, Vec<f64>) {
    let mut ax = Vec::with_capacity(grid.len());
    let mut bx = Vec::with_capacity(grid.len());
    for g in grid.groups() {
        let x = g.start as f64;
        let m = match g.start {
            0 => 0.03,
            1 => 0.002,
            _ => 0.0002 + 0.00025 * (0.095 * (x + 2.5 - 30.0)).exp(),
        };
        ax.push(m.ln());
        bx.push(if x < 60.0 { 1.6 - x / 60.0 } else { 0.6 - 0.5 * (x - 60.0) / 40.0 });
    }
    let total: f64 = bx.iter().sum();
    (ax, bx.into_iter().map(|b| b / total).collect())
}

fn male_excess(start: u32) -> f64 {
    match start {
        15..=34 => 2.2,
        35..=74 => 1.7,
        _ => 1.25,
    }
}

pub struct SampleData {
    pub mortality: String,
    pub e0: String,
    pub tfr: String,
    pub pasfr: String,
    pub config: String,
}

pub fn generate(options: SampleOptions) -> Result<SampleData> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let grid = AgeGrid::abridged(100).map_err(|e| PipelineError::model("sample grid", e))?;
    let (ax, bx) = female_structure(&grid);

    let mut mortality = String::from("country,sex,period,age_start,age_width,mx\n");
    let mut last_female = Vec::new();
    let mut last_male = Vec::new();
    let n = OBSERVED_PERIODS as f64;
    for (t, period) in observed_periods().into_iter().enumerate() {
        let k = 26.0 - 22.0 * t as f64 / (n - 1.0) + normal(1.0).sample(&mut rng);
        let female: Vec<f64> = ax
            .iter()
            .zip(&bx)
            .map(|(a, b)| (a + b * k + normal(0.03).sample(&mut rng)).exp())
            .collect();
        let male: Vec<f64> = female
            .iter()
            .zip(grid.groups())
            .map(|(f, g)| (f * male_excess(g.start)).min(2.5) * (normal(0.03).sample(&mut rng)).exp())
            .collect();
        for (sex, rates) in [(Sex::Female, &female), (Sex::Male, &male)] {
            for (g, m) in grid.groups().iter().zip(rates.iter()) {
                let width = g.width.map(|w| w.to_string()).unwrap_or_else(|| "open".into());
                let _ = writeln!(mortality, "{SAMPLE_COUNTRY},{},{period},{},{width},{}", sex.code(), g.start, fmt(*m));
            }
        }
        last_female = female;
        last_male = male;
    }

    let e0_of = |rates: Vec<f64>, sex| {
        MortalitySchedule::new(grid.clone(), rates)
            .and_then(|s| e0_from_mx(&s, sex))
            .map_err(|e| PipelineError::model("sample jump-off", e))
    };
    let e0_f0 = e0_of(last_female, Sex::Female)?;
    let e0_m0 = e0_of(last_male, Sex::Male)?;
    let gap0 = e0_f0 - e0_m0;

    let periods = projected_periods();
    let mut e0 = String::from("country,trajectory,period,e0_f,e0_m\n");
    let mut tfr = String::from("country,trajectory,period,tfr,phase3_start\n");
    for id in 1..=options.trajectories {
        let pace = rng.gen_range(0.7..1.3);
        let gap_end = rng.gen_range(2.5..5.0);
        let mut female = e0_f0;
        for (i, period) in periods.iter().enumerate() {
            let gain = pace * 1.0 * 0.94f64.powi(i as i32) + normal(0.3).sample(&mut rng);
            female = (female + gain).clamp(40.0, 105.0);
            let share = (i + 1) as f64 / periods.len() as f64;
            let gap = gap0 + (gap_end - gap0) * share + normal(0.4).sample(&mut rng);
            let male = (female - gap).clamp(35.0, 105.0);
            let _ = writeln!(e0, "{SAMPLE_COUNTRY},{id},{period},{},{}", fmt(female), fmt(male));
        }

        let ultimate = (1.85 + normal(0.25).sample(&mut rng)).clamp(1.2, 2.6);
        let speed = rng.gen_range(0.08..0.4);
        let series: Vec<f64> = (0..periods.len())
            .map(|i| {
                let v = ultimate + (2.3 - ultimate) * (-speed * (i + 1) as f64).exp() + normal(0.04).sample(&mut rng);
                v.clamp(0.8, 4.0)
            })
            .collect();
        let phase3 = series
            .iter()
            .position(|v| (v - ultimate).abs() < 0.08)
            .filter(|_| ultimate < 2.1)
            .map(|i| periods[i]);
        for (period, v) in periods.iter().zip(&series) {
            let p3 = phase3.map(|p| p.to_string()).unwrap_or_default();
            let _ = writeln!(tfr, "{SAMPLE_COUNTRY},{id},{period},{},{p3}", fmt(*v));
        }
    }

    let mut pasfr = String::from("country,period,age_start,pasfr\n");
    let mut observed = Vec::new();
    for (i, year) in [1990, 1995, 2000, 2005].into_iter().enumerate() {
        observed.push((SAMPLE_COUNTRY, Period(year), 26.5 + 0.6 * i as f64));
    }
    for (country, centre) in [("G1", 28.0), ("G2", 29.5), ("G3", 31.0)] {
        observed.push((country, Period(2005), centre));
    }
    for (country, period, centre) in observed {
        let pattern = bell_pattern(centre)?;
        for (start, p) in vitalrates_core::domain::PASFR_AGE_STARTS.iter().zip(pattern.proportions()) {
            let _ = writeln!(pasfr, "{country},{period},{start},{}", fmt(*p));
        }
    }

    let config = "\
# Sample run over the synthetic inputs in this directory.
mortality = mortality.csv
e0 = e0.csv
tfr = tfr.csv
pasfr = pasfr.csv
out = out
workers = 4
quantiles = 0.025, 0.1, 0.5, 0.9, 0.975
plot_trajectories = 20
"
    .to_string();

    Ok(SampleData { mortality, e0, tfr, pasfr, config })
}

/// Bell-shaped age pattern centred at `centre`, rounded to six decimals and
/// renormalised so the committed files stay readable.
fn bell_pattern(centre: f64) -> Result<PasfrPattern> {
    let mut w = [0.0; PASFR_GROUPS];
    for (wi, mid) in w.iter_mut().zip(PasfrPattern::midpoints()) {
        *wi = (-0.5 * ((mid - centre) / 6.0).powi(2)).exp();
    }
    let total: f64 = w.iter().sum();
    for wi in w.iter_mut() {
        *wi = (*wi / total * 1e6).round() / 1e6;
    }
    let drift: f64 = 1.0 - w.iter().sum::<f64>();
    let peak = (0..PASFR_GROUPS).max_by(|&a, &b| w[a].total_cmp(&w[b])).expect("non-empty");
    w[peak] += drift;
    PasfrPattern::new(w).map_err(|e| PipelineError::model("sample PASFR", e))
}

/// Writes the sample files into `dir` and returns the config path.
pub fn write_sample(dir: &Path, options: SampleOptions) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    let data = generate(options)?;
    for (name, text) in [
        ("mortality.csv", &data.mortality),
        ("e0.csv", &data.e0),
        ("tfr.csv", &data.tfr),
        ("pasfr.csv", &data.pasfr),
        ("run.conf", &data.config),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| PipelineError::io(&path, e))?;
    }
    Ok(dir.join("run.conf"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let options = SampleOptions { seed: 7, trajectories: 5 };
        let a = generate(options).unwrap();
        let b = generate(options).unwrap();
        assert_eq!(a.mortality, b.mortality);
        assert_eq!(a.e0, b.e0);
        assert_eq!(a.tfr, b.tfr);
    }

    #[test]
    fn patterns_sum_to_one() {
        for c in [25.0, 30.0, 33.0] {
            let p = bell_pattern(c).unwrap();
            assert!((p.proportions().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
