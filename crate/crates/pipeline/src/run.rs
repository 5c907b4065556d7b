//! Country pipelines. Mortality and fertility products are fitted once per
//! country; trajectories are then mapped in parallel and merged in trajectory
//! order, so results do not depend on the worker count.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use vitalrates_core::domain::{PasfrPattern, Period, Sex, PASFR_AGE_STARTS};
use vitalrates_core::fertility::{
    asfr_from_pasfr, global_model_pattern, mean_age_childbearing, project_pasfr_trajectory,
    ultimate_fertility, FertilityProjectionConfig, PasfrHistory, PasfrTrajectory, TgCase,
};
use vitalrates_core::life_table::e0_from_rates;
use vitalrates_core::mortality::{
    fit_mortality, project_trajectory, BxSource, HivConfig, MortalityProjectionConfig,
    ProjectedMortality,
};
use vitalrates_core::lee_carter::AxMethod;

use crate::config::RunConfig;
use crate::error::{PipelineError, Result};
use crate::io::{create_writer, load_inputs, load_model_bx, Inputs};
use crate::manifest::write_manifest;
use crate::output::{fmt, QuantileTable};
use crate::quantiles::summarize_quantiles;

/// Levels used for the plot files: 80% interval and median.
const PLOT_LEVELS: [f64; 3] = [0.1, 0.5, 0.9];

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMortality {
    pub projection: ProjectedMortality,
    /// e0 of the emitted schedules, after the old-age crossover cap.
    pub e0_female: Vec<f64>,
    pub e0_male: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFertility {
    pub pasfr: PasfrTrajectory,
    pub tfr: Vec<f64>,
    pub asfr: Vec<[f64; 7]>,
    pub mac: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryProjection {
    pub country: String,
    pub periods: Vec<Period>,
    pub jump_off: Period,
    pub jump_off_female: Vec<f64>,
    pub jump_off_male: Vec<f64>,
    pub observed_pasfr: Vec<(Period, PasfrPattern)>,
    pub global_pattern: PasfrPattern,
    pub ultimate_tfr: f64,
    pub mortality: Vec<TrajectoryMortality>,
    pub fertility: Vec<TrajectoryFertility>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub completed: Vec<String>,
    pub failed: Vec<(String, String)>,
    pub outputs: Vec<PathBuf>,
}

impl RunReport {
    pub fn success(&self) -> bool {
        self.failed.is_empty()
    }
}

pub fn mortality_config(cfg: &RunConfig, country: &str) -> Result<MortalityProjectionConfig> {
    let o = cfg.country_override(country);
    let bx_source = match &o.model_bx {
        Some(path) => BxSource::ModelLifeTable(load_model_bx(path)?),
        None => BxSource::Estimated,
    };
    let (ax_method, hiv) = if o.hiv {
        (AxMethod::HivInterpolated, Some(HivConfig::default()))
    } else {
        (o.ax_method.unwrap_or(cfg.ax_method), None)
    };
    Ok(MortalityProjectionConfig {
        ax_method,
        bx_source,
        hiv,
        kannisto_mode: cfg.kannisto_mode,
        ..Default::default()
    })
}

/// Mean of the latest pattern of each selected country.
pub fn global_pattern(cfg: &RunConfig, inputs: &Inputs) -> Result<PasfrPattern> {
    let countries: Vec<&String> = if cfg.global_pattern_countries.is_empty() {
        inputs.pasfr.keys().collect()
    } else {
        cfg.global_pattern_countries.iter().collect()
    };
    let latest = countries
        .iter()
        .map(|c| {
            inputs
                .pasfr
                .get(*c)
                .and_then(|h| h.iter().max_by_key(|(p, _)| *p))
                .map(|(_, p)| *p)
                .ok_or_else(|| PipelineError::Config(format!("no PASFR history for global pattern country {c}")))
        })
        .collect::<Result<Vec<_>>>()?;
    global_model_pattern(&latest).map_err(|e| PipelineError::model("global pattern", e))
}

fn first_error<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

pub fn project_country(
    country: &str,
    inputs: &Inputs,
    cfg: &RunConfig,
    global: PasfrPattern,
    pool: &rayon::ThreadPool,
) -> Result<CountryProjection> {
    let missing = |what: &str| PipelineError::Config(format!("no {what} input for {country}"));
    let mortality = inputs.mortality.get(country).ok_or_else(|| missing("mortality"))?;
    let bundle = inputs.trajectories.get(country).ok_or_else(|| missing("trajectory"))?;
    let observed_pasfr = inputs.pasfr.get(country).ok_or_else(|| missing("PASFR"))?;
    let periods = bundle.periods();

    let mcfg = mortality_config(cfg, country)?;
    let fit = fit_mortality(&mortality.female, &mortality.male, &mcfg)
        .map_err(|e| PipelineError::model("mortality fit", e))?;
    if periods[0] <= fit.jump_off {
        return Err(PipelineError::Config(format!(
            "projection starts at {} but observed mortality runs to {}",
            periods[0], fit.jump_off
        )));
    }

    let mut fcfg = FertilityProjectionConfig::new(global);
    fcfg.ultimate_from_phase3_only = cfg.ultimate_tfr_phase3_only;
    let history = PasfrHistory::from_observations(observed_pasfr, fcfg.trend_window)
        .map_err(|e| PipelineError::model("PASFR history", e))?;
    let ultimate_tfr = ultimate_fertility(bundle.tfr(), bundle.last_period(), fcfg.ultimate_from_phase3_only)
        .map_err(|e| PipelineError::model("ultimate TFR", e))?;

    let grid = fit.extended_female.grid().clone();
    let (mortality_results, fertility_results) = pool.install(|| {
        let m: Vec<Result<TrajectoryMortality>> = bundle
            .e0()
            .par_iter()
            .map(|traj| {
                let projection = project_trajectory(&fit, periods, traj, &mcfg)
                    .map_err(|e| PipelineError::model("mortality projection", e))?;
                let e0 = |sex: Sex| -> Vec<f64> {
                    projection.rates(sex).iter().map(|r| e0_from_rates(&grid, r, sex)).collect()
                };
                Ok(TrajectoryMortality { e0_female: e0(Sex::Female), e0_male: e0(Sex::Male), projection })
            })
            .collect();
        let f: Vec<Result<TrajectoryFertility>> = bundle
            .tfr()
            .par_iter()
            .map(|traj| {
                let pasfr = project_pasfr_trajectory(&history, periods, traj, ultimate_tfr, &fcfg)
                    .map_err(|e| PipelineError::model(format!("fertility trajectory {}", traj.id), e))?;
                let asfr = pasfr.patterns.iter().zip(&traj.tfr).map(|(p, f)| asfr_from_pasfr(p, *f)).collect();
                let mac = pasfr.patterns.iter().map(mean_age_childbearing).collect();
                Ok(TrajectoryFertility { pasfr, tfr: traj.tfr.clone(), asfr, mac })
            })
            .collect();
        (m, f)
    });

    Ok(CountryProjection {
        country: country.to_string(),
        periods: periods.to_vec(),
        jump_off: fit.jump_off,
        jump_off_female: fit.extended_female.last_schedule().rates().to_vec(),
        jump_off_male: fit.extended_male.last_schedule().rates().to_vec(),
        observed_pasfr: observed_pasfr.clone(),
        global_pattern: global,
        ultimate_tfr,
        mortality: first_error(mortality_results)?,
        fertility: first_error(fertility_results)?,
    })
}

pub fn selected_countries(cfg: &RunConfig, inputs: &Inputs) -> Vec<String> {
    if cfg.countries.is_empty() {
        inputs.trajectories.keys().cloned().collect()
    } else {
        cfg.countries.clone()
    }
}

pub fn run_pipeline(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    let global = global_pattern(cfg, &inputs)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| PipelineError::Config(format!("cannot start worker pool: {e}")))?;

    let mut report = RunReport::default();
    let mut projections = Vec::new();
    for country in selected_countries(cfg, &inputs) {
        log::info!("projecting {country}");
        match project_country(&country, &inputs, cfg, global, &pool) {
            Ok(p) => {
                report.completed.push(country);
                projections.push(p);
            }
            Err(e) => {
                log::error!("{country}: {e}");
                report.failed.push((country, e.to_string()));
            }
        }
    }

    std::fs::create_dir_all(&cfg.out).map_err(|e| PipelineError::io(&cfg.out, e))?;
    report.outputs = write_outputs(cfg, &projections)?;
    let manifest = cfg.out.join("manifest.json");
    write_manifest(&manifest, cfg, &report)?;
    report.outputs.push(manifest);
    Ok(report)
}

fn period_label(p: Period) -> String {
    p.to_string()
}

fn age_label(start: u32) -> String {
    start.to_string()
}

fn sample_indices(n: usize, k: usize) -> Vec<usize> {
    let k = k.min(n);
    (0..k).map(|i| i * n / k).collect()
}

pub fn case_name(case: TgCase) -> &'static str {
    match case {
        TgCase::ReachedUltimate { .. } => "reached_ultimate",
        TgCase::NeverReachesUltimate => "never_reaches_ultimate",
        TgCase::LowFinalTfr => "low_final_tfr",
        TgCase::Extrapolated { .. } => "extrapolated",
        TgCase::ExtrapolationCapped => "extrapolation_capped",
    }
}

fn build_quantile_tables(cfg: &RunConfig, projections: &[CountryProjection]) -> Result<Vec<(&'static str, QuantileTable)>> {
    let q = &cfg.quantiles;
    let mut mx = QuantileTable::new(&["country", "sex", "period", "age_start"], q);
    let mut e0 = QuantileTable::new(&["country", "sex", "period"], q);
    let mut asfr = QuantileTable::new(&["country", "period", "age_start"], q);
    let mut pasfr = QuantileTable::new(&["country", "period", "age_start"], q);
    let mut mac = QuantileTable::new(&["country", "period"], q);
    let starts: Vec<u32> = vitalrates_core::domain::AgeGrid::canonical().groups().iter().map(|g| g.start).collect();

    for c in projections {
        for sex in Sex::BOTH {
            for (i, &period) in c.periods.iter().enumerate() {
                let key = |extra: &[String]| {
                    let mut k = vec![c.country.clone(), sex.code().to_string(), period_label(period)];
                    k.extend_from_slice(extra);
                    k
                };
                for (x, &start) in starts.iter().enumerate() {
                    let values: Vec<f64> = c.mortality.iter().map(|t| t.projection.rates(sex)[i][x]).collect();
                    mx.push(key(&[age_label(start)]), &values)?;
                }
                let values: Vec<f64> = c
                    .mortality
                    .iter()
                    .map(|t| match sex {
                        Sex::Female => t.e0_female[i],
                        Sex::Male => t.e0_male[i],
                    })
                    .collect();
                e0.push(key(&[]), &values)?;
            }
        }
        for (i, &period) in c.periods.iter().enumerate() {
            for (a, &start) in PASFR_AGE_STARTS.iter().enumerate() {
                let key = vec![c.country.clone(), period_label(period), age_label(start)];
                let values: Vec<f64> = c.fertility.iter().map(|t| t.asfr[i][a]).collect();
                asfr.push(key.clone(), &values)?;
                let values: Vec<f64> = c.fertility.iter().map(|t| t.pasfr.patterns[i].proportions()[a]).collect();
                pasfr.push(key, &values)?;
            }
            let values: Vec<f64> = c.fertility.iter().map(|t| t.mac[i]).collect();
            mac.push(vec![c.country.clone(), period_label(period)], &values)?;
        }
    }
    Ok(vec![
        ("quantiles_mx.csv", mx),
        ("quantiles_e0.csv", e0),
        ("quantiles_asfr.csv", asfr),
        ("quantiles_pasfr.csv", pasfr),
        ("quantiles_mac.csv", mac),
    ])
}

type Writer = csv::Writer<std::io::BufWriter<std::fs::File>>;

struct Out {
    path: PathBuf,
    writer: Writer,
}

impl Out {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let mut writer = create_writer(&path)?;
        writer.write_record(header).map_err(|e| PipelineError::csv(&path, e))?;
        Ok(Out { path, writer })
    }

    fn row(&mut self, record: &[String]) -> Result<()> {
        self.writer.write_record(record).map_err(|e| PipelineError::csv(&self.path, e))
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(|e| PipelineError::io(&self.path, e))?;
        Ok(self.path)
    }
}

fn write_plot_files(cfg: &RunConfig, projections: &[CountryProjection]) -> Result<Vec<PathBuf>> {
    let dir = &cfg.out;
    let starts: Vec<u32> = vitalrates_core::domain::AgeGrid::canonical().groups().iter().map(|g| g.start).collect();
    let mut by_age = Out::create(dir, "plot_mx_by_age.csv", &["country", "sex", "period", "age_start", "series", "value"])?;
    let mut joint = Out::create(
        dir,
        "plot_mx_joint.csv",
        &["country", "period", "age_start", "trajectory", "mx_female", "mx_male"],
    )?;
    let mut pasfr = Out::create(dir, "plot_pasfr.csv", &["country", "period", "age_start", "series", "value"])?;
    let mut mac = Out::create(dir, "plot_mac.csv", &["country", "period", "series", "value"])?;

    for c in projections {
        let last = c.periods.len() - 1;
        let last_label = period_label(c.periods[last]);
        let sampled = sample_indices(c.mortality.len(), cfg.plot_trajectories);
        for sex in Sex::BOTH {
            let jump_off = match sex {
                Sex::Female => &c.jump_off_female,
                Sex::Male => &c.jump_off_male,
            };
            for (x, &start) in starts.iter().enumerate() {
                let base = [c.country.clone(), sex.code().to_string()];
                let mut emit = |period: &str, series: String, value: f64| {
                    let mut r = base.to_vec();
                    r.extend([period.to_string(), age_label(start), series, fmt(value)]);
                    by_age.row(&r)
                };
                emit(&period_label(c.jump_off), "observed".into(), jump_off[x])?;
                let values: Vec<f64> = c.mortality.iter().map(|t| t.projection.rates(sex)[last][x]).collect();
                let q = summarize_quantiles(&values, &PLOT_LEVELS)?;
                emit(&last_label, "lower_80".into(), q[0])?;
                emit(&last_label, "median".into(), q[1])?;
                emit(&last_label, "upper_80".into(), q[2])?;
                for &i in &sampled {
                    let t = &c.mortality[i];
                    emit(&last_label, format!("trajectory_{}", t.projection.trajectory), values[i])?;
                }
            }
        }
        for (x, &start) in starts.iter().enumerate() {
            for t in &c.mortality {
                joint.row(&[
                    c.country.clone(),
                    last_label.clone(),
                    age_label(start),
                    t.projection.trajectory.to_string(),
                    fmt(t.projection.female[last][x]),
                    fmt(t.projection.male[last][x]),
                ])?;
            }
        }

        for (period, pattern) in &c.observed_pasfr {
            for (a, &start) in PASFR_AGE_STARTS.iter().enumerate() {
                pasfr.row(&[c.country.clone(), period_label(*period), age_label(start), "observed".into(), fmt(pattern.proportions()[a])])?;
            }
            mac.row(&[c.country.clone(), period_label(*period), "observed".into(), fmt(mean_age_childbearing(pattern))])?;
        }
        for (a, &start) in PASFR_AGE_STARTS.iter().enumerate() {
            pasfr.row(&[c.country.clone(), String::new(), age_label(start), "global".into(), fmt(c.global_pattern.proportions()[a])])?;
        }
        mac.row(&[c.country.clone(), String::new(), "global".into(), fmt(mean_age_childbearing(&c.global_pattern))])?;
        let sampled = sample_indices(c.fertility.len(), cfg.plot_trajectories);
        for (i, &period) in c.periods.iter().enumerate() {
            for (a, &start) in PASFR_AGE_STARTS.iter().enumerate() {
                let values: Vec<f64> = c.fertility.iter().map(|t| t.pasfr.patterns[i].proportions()[a]).collect();
                let q = summarize_quantiles(&values, &PLOT_LEVELS)?;
                for (series, v) in ["lower_80", "median", "upper_80"].iter().zip(q) {
                    pasfr.row(&[c.country.clone(), period_label(period), age_label(start), series.to_string(), fmt(v)])?;
                }
            }
            let values: Vec<f64> = c.fertility.iter().map(|t| t.mac[i]).collect();
            let q = summarize_quantiles(&values, &PLOT_LEVELS)?;
            for (series, v) in ["lower_80", "median", "upper_80"].iter().zip(q) {
                mac.row(&[c.country.clone(), period_label(period), series.to_string(), fmt(v)])?;
            }
            for &j in &sampled {
                let t = &c.fertility[j];
                mac.row(&[c.country.clone(), period_label(period), format!("trajectory_{}", t.pasfr.trajectory), fmt(t.mac[i])])?;
            }
        }
    }
    Ok(vec![by_age.finish()?, joint.finish()?, pasfr.finish()?, mac.finish()?])
}

fn write_trajectory_files(cfg: &RunConfig, projections: &[CountryProjection]) -> Result<Vec<PathBuf>> {
    let dir = &cfg.out;
    let starts: Vec<u32> = vitalrates_core::domain::AgeGrid::canonical().groups().iter().map(|g| g.start).collect();
    let mut mx = Out::create(dir, "trajectory_mx.csv", &["country", "trajectory", "sex", "period", "age_start", "mx"])?;
    let mut e0 = Out::create(dir, "trajectory_e0.csv", &["country", "trajectory", "period", "e0_f", "e0_m"])?;
    let mut fert = Out::create(
        dir,
        "trajectory_fertility.csv",
        &["country", "trajectory", "period", "age_start", "pasfr", "asfr"],
    )?;
    let mut timing = Out::create(dir, "trajectory_timing.csv", &["country", "trajectory", "t_g", "case", "frozen_from"])?;
    for c in projections {
        for t in &c.mortality {
            let id = t.projection.trajectory.to_string();
            for sex in Sex::BOTH {
                for (i, &period) in c.periods.iter().enumerate() {
                    for (x, &start) in starts.iter().enumerate() {
                        mx.row(&[
                            c.country.clone(),
                            id.clone(),
                            sex.code().to_string(),
                            period_label(period),
                            age_label(start),
                            fmt(t.projection.rates(sex)[i][x]),
                        ])?;
                    }
                }
            }
            for (i, &period) in c.periods.iter().enumerate() {
                e0.row(&[c.country.clone(), id.clone(), period_label(period), fmt(t.e0_female[i]), fmt(t.e0_male[i])])?;
            }
        }
        for t in &c.fertility {
            let id = t.pasfr.trajectory.to_string();
            for (i, &period) in c.periods.iter().enumerate() {
                for (a, &start) in PASFR_AGE_STARTS.iter().enumerate() {
                    fert.row(&[
                        c.country.clone(),
                        id.clone(),
                        period_label(period),
                        age_label(start),
                        fmt(t.pasfr.patterns[i].proportions()[a]),
                        fmt(t.asfr[i][a]),
                    ])?;
                }
            }
            timing.row(&[
                c.country.clone(),
                id,
                period_label(t.pasfr.t_g),
                case_name(t.pasfr.case).to_string(),
                t.pasfr.frozen_from.map(period_label).unwrap_or_default(),
            ])?;
        }
    }
    Ok(vec![mx.finish()?, e0.finish()?, fert.finish()?, timing.finish()?])
}

pub fn write_outputs(cfg: &RunConfig, projections: &[CountryProjection]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (name, table) in build_quantile_tables(cfg, projections)? {
        let path = cfg.out.join(name);
        table.write(&path)?;
        written.push(path);
    }
    written.extend(write_plot_files(cfg, projections)?);
    if cfg.emit_trajectories {
        written.extend(write_trajectory_files(cfg, projections)?);
    }
    Ok(written)
}
