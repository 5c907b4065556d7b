//! CSV input loading with row-level diagnostics.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use csv::StringRecord;
use vitalrates_core::domain::{
    AgeGrid, AgeGroup, E0Trajectory, MortalitySchedule, MortalitySurface, PasfrPattern, Period,
    Sex, TfrTrajectory, TrajectoryBundle, CANONICAL_GROUPS, PASFR_AGE_STARTS, PASFR_GROUPS,
};

use crate::config::RunConfig;
use crate::error::{PipelineError, Result};

/// A header-indexed CSV file read row by row.
pub struct Table {
    path: PathBuf,
    headers: StringRecord,
    reader: csv::Reader<File>,
}

/// One data row with its source line.
pub struct Row<'a> {
    table: &'a Table,
    record: StringRecord,
    line: u64,
}

impl Table {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let headers = reader.headers().map_err(|e| PipelineError::csv(path, e))?.clone();
        Ok(Table { path: path.to_path_buf(), headers, reader })
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.headers.iter().any(|h| h == name)
    }

    pub fn require(&self, columns: &[&str]) -> Result<()> {
        for c in columns {
            if !self.has_column(c) {
                return Err(PipelineError::Input {
                    file: self.path.clone(),
                    message: format!("missing column '{c}'"),
                });
            }
        }
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn headers(&self) -> Vec<String> {
        self.headers.iter().map(String::from).collect()
    }

    /// Visits every data row in file order.
    pub fn for_each_row(mut self, mut f: impl FnMut(&Row<'_>) -> Result<()>) -> Result<()> {
        let mut record = StringRecord::new();
        loop {
            match self.reader.read_record(&mut record) {
                Ok(false) => return Ok(()),
                Ok(true) => {}
                Err(e) => return Err(PipelineError::csv(&self.path, e)),
            }
            let line = record.position().map_or(0, |p| p.line());
            let row = Row { table: &self, record: record.clone(), line };
            f(&row)?;
        }
    }
}

impl Row<'_> {
    pub fn line(&self) -> u64 {
        self.line
    }

    pub fn error(&self, column: &str, message: impl Into<String>) -> PipelineError {
        PipelineError::Row {
            file: self.table.path.clone(),
            line: self.line,
            column: column.to_string(),
            message: message.into(),
        }
    }

    pub fn str(&self, column: &str) -> Result<&str> {
        let idx = self
            .table
            .headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| self.error(column, "missing column"))?;
        self.record.get(idx).ok_or_else(|| self.error(column, "missing cell"))
    }

    pub fn optional(&self, column: &str) -> Result<Option<&str>> {
        if !self.table.has_column(column) {
            return Ok(None);
        }
        let v = self.str(column)?;
        Ok(if v.is_empty() { None } else { Some(v) })
    }

    pub fn parse<T: std::str::FromStr>(&self, column: &str) -> Result<T> {
        let v = self.str(column)?;
        v.parse().map_err(|_| self.error(column, format!("cannot parse '{v}'")))
    }

    pub fn number(&self, column: &str) -> Result<f64> {
        let v: f64 = self.parse(column)?;
        if !v.is_finite() {
            return Err(self.error(column, format!("non-finite value {v}")));
        }
        Ok(v)
    }

    pub fn period(&self, column: &str) -> Result<Period> {
        let v = self.str(column)?;
        v.parse().map_err(|_| self.error(column, format!("invalid period '{v}'")))
    }
}

pub fn create_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryMortality {
    pub female: MortalitySurface,
    pub male: MortalitySurface,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inputs {
    pub mortality: BTreeMap<String, CountryMortality>,
    pub trajectories: BTreeMap<String, TrajectoryBundle>,
    pub pasfr: BTreeMap<String, Vec<(Period, PasfrPattern)>>,
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    Ok(Inputs {
        mortality: load_mortality(&cfg.mortality)?,
        trajectories: load_trajectories(&cfg.e0, &cfg.tfr)?,
        pasfr: load_pasfr(&cfg.pasfr)?,
    })
}

type MortalityKey = (String, Sex, Period);

pub fn load_mortality(path: &Path) -> Result<BTreeMap<String, CountryMortality>> {
    let table = Table::open(path)?;
    table.require(&["country", "sex", "period", "age_start", "age_width", "mx"])?;
    let mut cells: BTreeMap<MortalityKey, BTreeMap<u32, (Option<u32>, f64)>> = BTreeMap::new();
    table.for_each_row(|row| {
        let country = row.str("country")?.to_string();
        let sex: Sex = row.parse("sex")?;
        let period = row.period("period")?;
        let start: u32 = row.parse("age_start")?;
        let width = match row.str("age_width")? {
            "" | "open" | "+" => None,
            _ => Some(row.parse::<u32>("age_width")?),
        };
        let mx = row.number("mx")?;
        if mx <= 0.0 {
            return Err(row.error("mx", format!("death rate must be positive, got {mx}")));
        }
        let groups = cells.entry((country, sex, period)).or_default();
        if groups.insert(start, (width, mx)).is_some() {
            return Err(row.error("age_start", format!("duplicate age group {start}")));
        }
        Ok(())
    })?;

    let input_err = |message: String| PipelineError::Input { file: path.to_path_buf(), message };
    let mut by_country: BTreeMap<String, BTreeMap<Sex, Vec<(Period, MortalitySchedule)>>> = BTreeMap::new();
    for ((country, sex, period), groups) in cells {
        let grid = AgeGrid::new(
            groups.iter().map(|(&start, &(width, _))| AgeGroup { start, width }).collect(),
        )
        .map_err(|e| input_err(format!("{country} {sex} {period}: {e}")))?;
        let rates = groups.values().map(|(_, mx)| *mx).collect();
        let schedule = MortalitySchedule::new(grid, rates)
            .map_err(|e| input_err(format!("{country} {sex} {period}: {e}")))?;
        by_country.entry(country).or_default().entry(sex).or_default().push((period, schedule));
    }

    let mut out = BTreeMap::new();
    for (country, mut sexes) in by_country {
        let mut surface = |sex: Sex| -> Result<MortalitySurface> {
            let rows = sexes
                .remove(&sex)
                .ok_or_else(|| input_err(format!("{country}: no {sex} rates")))?;
            let (periods, schedules) = rows.into_iter().unzip();
            MortalitySurface::new(sex, periods, schedules)
                .map_err(|e| input_err(format!("{country} {sex}: {e}")))
        };
        let female = surface(Sex::Female)?;
        let male = surface(Sex::Male)?;
        if female.periods() != male.periods() || female.grid() != male.grid() {
            return Err(input_err(format!("{country}: female and male rates cover different periods or ages")));
        }
        out.insert(country, CountryMortality { female, male });
    }
    Ok(out)
}

#[derive(Default)]
struct TrajectoryRows {
    e0: BTreeMap<u32, BTreeMap<Period, (f64, f64)>>,
    tfr: BTreeMap<u32, BTreeMap<Period, f64>>,
    phase3: BTreeMap<u32, Option<Period>>,
}

pub fn load_trajectories(e0_path: &Path, tfr_path: &Path) -> Result<BTreeMap<String, TrajectoryBundle>> {
    let mut rows: BTreeMap<String, TrajectoryRows> = BTreeMap::new();

    let table = Table::open(e0_path)?;
    table.require(&["country", "trajectory", "period", "e0_f", "e0_m"])?;
    table.for_each_row(|row| {
        let entry = rows.entry(row.str("country")?.to_string()).or_default();
        let id: u32 = row.parse("trajectory")?;
        let period = row.period("period")?;
        let values = (row.number("e0_f")?, row.number("e0_m")?);
        if entry.e0.entry(id).or_default().insert(period, values).is_some() {
            return Err(row.error("period", format!("duplicate period {period} for trajectory {id}")));
        }
        Ok(())
    })?;

    let table = Table::open(tfr_path)?;
    table.require(&["country", "trajectory", "period", "tfr"])?;
    table.for_each_row(|row| {
        let entry = rows.entry(row.str("country")?.to_string()).or_default();
        let id: u32 = row.parse("trajectory")?;
        let period = row.period("period")?;
        let tfr = row.number("tfr")?;
        if tfr < 0.0 {
            return Err(row.error("tfr", format!("TFR must be nonnegative, got {tfr}")));
        }
        if entry.tfr.entry(id).or_default().insert(period, tfr).is_some() {
            return Err(row.error("period", format!("duplicate period {period} for trajectory {id}")));
        }
        if let Some(v) = row.optional("phase3_start")? {
            let p3: Period =
                v.parse().map_err(|_| row.error("phase3_start", format!("invalid period '{v}'")))?;
            match entry.phase3.insert(id, Some(p3)) {
                Some(Some(prev)) if prev != p3 => {
                    return Err(row.error(
                        "phase3_start",
                        format!("trajectory {id} already has phase start {prev}"),
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    })?;

    let mut out = BTreeMap::new();
    for (country, r) in rows {
        let err = |file: &Path, message: String| PipelineError::Input {
            file: file.to_path_buf(),
            message: format!("{country}: {message}"),
        };
        if r.e0.is_empty() {
            return Err(err(e0_path, "no e0 trajectories".into()));
        }
        if r.tfr.is_empty() {
            return Err(err(tfr_path, "no TFR trajectories".into()));
        }
        let periods: Vec<Period> = {
            let mut all: Vec<Period> = r.e0.values().flat_map(|m| m.keys().copied()).collect();
            all.sort_unstable();
            all.dedup();
            all
        };
        let e0 = r
            .e0
            .iter()
            .map(|(&id, values)| {
                if values.len() != periods.len() {
                    return Err(err(e0_path, format!("trajectory {id} does not cover every period")));
                }
                let (female, male) = values.values().copied().unzip();
                Ok(E0Trajectory { id, female, male })
            })
            .collect::<Result<Vec<_>>>()?;
        let tfr = r
            .tfr
            .iter()
            .map(|(&id, values)| {
                if values.keys().ne(periods.iter()) {
                    return Err(err(tfr_path, format!("trajectory {id} does not match the e0 periods")));
                }
                Ok(TfrTrajectory {
                    id,
                    tfr: values.values().copied().collect(),
                    phase3_start: r.phase3.get(&id).copied().flatten(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let bundle = TrajectoryBundle::new(country.clone(), periods, e0, tfr)
            .map_err(|e| PipelineError::Input { file: e0_path.to_path_buf(), message: e.to_string() })?;
        out.insert(country, bundle);
    }
    Ok(out)
}

pub fn load_pasfr(path: &Path) -> Result<BTreeMap<String, Vec<(Period, PasfrPattern)>>> {
    let table = Table::open(path)?;
    table.require(&["country", "period", "age_start", "pasfr"])?;
    let mut cells: BTreeMap<(String, Period), BTreeMap<u32, f64>> = BTreeMap::new();
    table.for_each_row(|row| {
        let country = row.str("country")?.to_string();
        let period = row.period("period")?;
        let start: u32 = row.parse("age_start")?;
        if !PASFR_AGE_STARTS.contains(&start) {
            return Err(row.error("age_start", format!("{start} is not a childbearing age group")));
        }
        let value = row.number("pasfr")?;
        if !(0.0..=1.0).contains(&value) {
            return Err(row.error("pasfr", format!("proportion {value} outside [0, 1]")));
        }
        if cells.entry((country, period)).or_default().insert(start, value).is_some() {
            return Err(row.error("age_start", format!("duplicate age group {start}")));
        }
        Ok(())
    })?;
    let mut out: BTreeMap<String, Vec<(Period, PasfrPattern)>> = BTreeMap::new();
    for ((country, period), groups) in cells {
        let err = |message: String| PipelineError::Input {
            file: path.to_path_buf(),
            message: format!("{country} {period}: {message}"),
        };
        if groups.len() != PASFR_GROUPS {
            return Err(err(format!("expected {PASFR_GROUPS} age groups, found {}", groups.len())));
        }
        let values: [f64; PASFR_GROUPS] =
            groups.values().copied().collect::<Vec<_>>().try_into().expect("seven groups");
        let pattern = PasfrPattern::new(values).map_err(|e| err(e.to_string()))?;
        out.entry(country).or_default().push((period, pattern));
    }
    Ok(out)
}

/// Model life table sensitivities on the canonical grid (`age_start,bx`).
pub fn load_model_bx(path: &Path) -> Result<Vec<f64>> {
    let table = Table::open(path)?;
    table.require(&["age_start", "bx"])?;
    let mut values: BTreeMap<u32, f64> = BTreeMap::new();
    table.for_each_row(|row| {
        let start: u32 = row.parse("age_start")?;
        if values.insert(start, row.number("bx")?).is_some() {
            return Err(row.error("age_start", format!("duplicate age group {start}")));
        }
        Ok(())
    })?;
    let canonical: Vec<u32> = AgeGrid::canonical().groups().iter().map(|g| g.start).collect();
    if values.len() != CANONICAL_GROUPS || !values.keys().eq(canonical.iter()) {
        return Err(PipelineError::Input {
            file: path.to_path_buf(),
            message: "model b_x must list every age group from 0 to 130+".into(),
        });
    }
    Ok(values.into_values().collect())
}
