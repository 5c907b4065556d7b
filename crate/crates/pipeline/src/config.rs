//! Run configuration: a flat `key = value` file, one setting per line, with
//! `#` comments. Relative paths resolve against the file's directory.
//!
//! ```text
//! mortality = mortality.csv
//! e0 = e0.csv
//! tfr = tfr.csv
//! pasfr = pasfr.csv
//! countries = SYN
//! workers = 4
//! ax_method.SYN = latest_smoothed
//! hiv.ZWE = true
//! model_bx.ZWE = model_bx.csv
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use vitalrates_core::kannisto::KannistoMode;
use vitalrates_core::lee_carter::AxMethod;

use crate::error::{PipelineError, Result};

pub const DEFAULT_QUANTILES: [f64; 5] = [0.025, 0.1, 0.5, 0.9, 0.975];

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "VITALRATES_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountryOverride {
    pub ax_method: Option<AxMethod>,
    /// Time-varying baseline for generalized HIV/AIDS epidemics.
    pub hiv: bool,
    /// Model life table sensitivities (`age_start,bx` CSV) replacing estimated `b_x`.
    pub model_bx: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mortality: PathBuf,
    pub e0: PathBuf,
    pub tfr: PathBuf,
    pub pasfr: PathBuf,
    /// Countries to run; empty means every country in the e0 file.
    pub countries: Vec<String>,
    pub out: PathBuf,
    pub workers: usize,
    pub quantiles: Vec<f64>,
    pub emit_trajectories: bool,
    pub kannisto_mode: KannistoMode,
    pub ax_method: AxMethod,
    /// Countries whose latest PASFR is averaged into the global pattern;
    /// empty means all countries in the PASFR file.
    pub global_pattern_countries: Vec<String>,
    pub ultimate_tfr_phase3_only: bool,
    /// Individual trajectories included in the plot files.
    pub plot_trajectories: usize,
    pub overrides: BTreeMap<String, CountryOverride>,
}

impl RunConfig {
    /// Config with the given inputs and defaults everywhere else.
    pub fn new(mortality: PathBuf, e0: PathBuf, tfr: PathBuf, pasfr: PathBuf) -> Self {
        RunConfig {
            mortality,
            e0,
            tfr,
            pasfr,
            countries: Vec::new(),
            out: PathBuf::from("out"),
            workers: 1,
            quantiles: DEFAULT_QUANTILES.to_vec(),
            emit_trajectories: false,
            kannisto_mode: KannistoMode::Coherent,
            ax_method: AxMethod::Average,
            global_pattern_countries: Vec::new(),
            ultimate_tfr_phase3_only: false,
            plot_trajectories: 20,
            overrides: BTreeMap::new(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            PipelineError::Config(msg) => PipelineError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut values: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(PipelineError::Config(format!("line {}: expected key = value", i + 1)));
            };
            let key = key.trim().to_string();
            if values.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
                return Err(PipelineError::Config(format!("line {}: duplicate key '{key}'", i + 1)));
            }
        }

        let mut take = |key: &str| values.remove(key).map(|(_, v)| v);
        let path = |v: String| base.join(v);
        let mut required = |key: &str| {
            take(key).map(path).ok_or_else(|| PipelineError::Config(format!("missing required key '{key}'")))
        };
        let mut cfg = RunConfig::new(required("mortality")?, required("e0")?, required("tfr")?, required("pasfr")?);

        let mut take = |key: &str| values.remove(key).map(|(_, v)| v);
        if let Some(v) = take("countries") {
            cfg.countries = parse_list(&v);
        }
        if let Some(v) = take("out") {
            cfg.out = base.join(v);
        }
        if let Some(v) = take("workers") {
            cfg.workers = parse_value("workers", &v)?;
        }
        if let Some(v) = take("quantiles") {
            cfg.quantiles = parse_quantiles(&v)?;
        }
        if let Some(v) = take("emit_trajectories") {
            cfg.emit_trajectories = parse_value("emit_trajectories", &v)?;
        }
        if let Some(v) = take("kannisto") {
            cfg.kannisto_mode = v.parse().map_err(config_err)?;
        }
        if let Some(v) = take("ax_method") {
            cfg.ax_method = v.parse().map_err(config_err)?;
        }
        if let Some(v) = take("global_pattern_countries") {
            cfg.global_pattern_countries = parse_list(&v);
        }
        if let Some(v) = take("ultimate_tfr_phase3_only") {
            cfg.ultimate_tfr_phase3_only = parse_value("ultimate_tfr_phase3_only", &v)?;
        }
        if let Some(v) = take("plot_trajectories") {
            cfg.plot_trajectories = parse_value("plot_trajectories", &v)?;
        }

        for (key, (line, value)) in values {
            let Some((setting, country)) = key.split_once('.') else {
                return Err(PipelineError::Config(format!("line {line}: unknown key '{key}'")));
            };
            let entry = cfg.overrides.entry(country.to_string()).or_default();
            match setting {
                "ax_method" => entry.ax_method = Some(value.parse().map_err(config_err)?),
                "hiv" => entry.hiv = parse_value(&key, &value)?,
                "model_bx" => entry.model_bx = Some(base.join(value)),
                _ => return Err(PipelineError::Config(format!("line {line}: unknown key '{key}'"))),
            }
        }
        Ok(cfg)
    }

    /// Checks settings and that every referenced file exists.
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(PipelineError::Config("workers must be at least 1".into()));
        }
        check_quantiles(&self.quantiles)?;
        let mut files = vec![&self.mortality, &self.e0, &self.tfr, &self.pasfr];
        files.extend(self.overrides.values().filter_map(|o| o.model_bx.as_ref()));
        for f in files {
            if !f.is_file() {
                return Err(PipelineError::Config(format!("input file {} does not exist", f.display())));
            }
        }
        for (country, o) in &self.overrides {
            if o.hiv && o.model_bx.is_none() {
                return Err(PipelineError::Config(format!("{country}: HIV mode needs model_bx.{country}")));
            }
            if o.hiv && o.ax_method.is_some_and(|m| m != AxMethod::HivInterpolated) {
                return Err(PipelineError::Config(format!(
                    "{country}: HIV mode uses the hiv_interpolated a_x method"
                )));
            }
            if !o.hiv && o.ax_method == Some(AxMethod::HivInterpolated) {
                return Err(PipelineError::Config(format!(
                    "{country}: hiv_interpolated a_x needs hiv.{country} = true"
                )));
            }
        }
        if self.ax_method == AxMethod::HivInterpolated {
            return Err(PipelineError::Config(
                "hiv_interpolated can only be enabled per country with hiv.<country>".into(),
            ));
        }
        Ok(())
    }

    pub fn country_override(&self, country: &str) -> CountryOverride {
        self.overrides.get(country).cloned().unwrap_or_default()
    }

    /// Settings that affect results, one per line in a fixed order. Worker
    /// count and output location are excluded.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let file = |p: &PathBuf| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(s, "mortality={}", file(&self.mortality));
        let _ = writeln!(s, "e0={}", file(&self.e0));
        let _ = writeln!(s, "tfr={}", file(&self.tfr));
        let _ = writeln!(s, "pasfr={}", file(&self.pasfr));
        let _ = writeln!(s, "countries={}", self.countries.join(","));
        let q: Vec<String> = self.quantiles.iter().map(|q| q.to_string()).collect();
        let _ = writeln!(s, "quantiles={}", q.join(","));
        let _ = writeln!(s, "emit_trajectories={}", self.emit_trajectories);
        let _ = writeln!(s, "kannisto={}", self.kannisto_mode.name());
        let _ = writeln!(s, "ax_method={}", self.ax_method.name());
        let _ = writeln!(s, "global_pattern_countries={}", self.global_pattern_countries.join(","));
        let _ = writeln!(s, "ultimate_tfr_phase3_only={}", self.ultimate_tfr_phase3_only);
        let _ = writeln!(s, "plot_trajectories={}", self.plot_trajectories);
        for (country, o) in &self.overrides {
            if let Some(m) = o.ax_method {
                let _ = writeln!(s, "ax_method.{country}={}", m.name());
            }
            let _ = writeln!(s, "hiv.{country}={}", o.hiv);
            if let Some(p) = &o.model_bx {
                let _ = writeln!(s, "model_bx.{country}={}", file(p));
            }
        }
        s
    }
}

fn config_err(e: vitalrates_core::Error) -> PipelineError {
    PipelineError::Config(e.to_string())
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| PipelineError::Config(format!("invalid value '{value}' for '{key}'")))
}

pub fn parse_list(value: &str) -> Vec<String> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

pub fn parse_quantiles(value: &str) -> Result<Vec<f64>> {
    let q = parse_list(value)
        .iter()
        .map(|v| parse_value::<f64>("quantiles", v))
        .collect::<Result<Vec<_>>>()?;
    check_quantiles(&q)?;
    Ok(q)
}

fn check_quantiles(q: &[f64]) -> Result<()> {
    if q.is_empty() {
        return Err(PipelineError::Config("at least one quantile is required".into()));
    }
    if q.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(PipelineError::Config("quantiles must lie in (0, 1)".into()));
    }
    if q.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PipelineError::Config("quantiles must be strictly increasing".into()));
    }
    Ok(())
}
