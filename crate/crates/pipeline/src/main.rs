use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use vitalrates_core::domain::{Period, Sex};
use vitalrates_core::kannisto::{extend_to_130, KannistoMode};
use vitalrates_core::life_table::build_life_table;
use vitalrates_pipeline::config::{parse_list, parse_quantiles, CONFIG_ENV};
use vitalrates_pipeline::io::load_mortality;
use vitalrates_pipeline::output::fmt;
use vitalrates_pipeline::sample::{write_sample, SampleOptions, DEFAULT_SEED, DEFAULT_TRAJECTORIES};
use vitalrates_pipeline::{run_pipeline, RunConfig};

#[derive(Parser)]
#[command(name = "vitalrates", version, about = "Project mortality and fertility rates from e0 and TFR trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the projection for the countries in a config file.
    Run {
        #[arg(long, env = CONFIG_ENV)]
        config: PathBuf,
        /// Comma-separated country ids; all countries with trajectories by default.
        #[arg(long)]
        countries: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Also write per-trajectory rates.
        #[arg(long)]
        emit_trajectories: bool,
        /// Comma-separated quantile levels, e.g. 0.1,0.5,0.9.
        #[arg(long)]
        quantiles: Option<String>,
    },
    /// Write the synthetic sample inputs and a matching config.
    SampleData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TRAJECTORIES)]
        trajectories: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Print the life table of one observed schedule as CSV.
    LifeTable {
        #[arg(long)]
        mortality: PathBuf,
        #[arg(long)]
        country: String,
        #[arg(long)]
        sex: Sex,
        #[arg(long)]
        period: Period,
        /// Extend the schedule to 130+ before building the table.
        #[arg(long)]
        extend: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config, countries, out, workers, emit_trajectories, quantiles } => {
            let mut cfg = RunConfig::from_file(&config)?;
            if let Some(c) = countries {
                cfg.countries = parse_list(&c);
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if emit_trajectories {
                cfg.emit_trajectories = true;
            }
            if let Some(q) = quantiles {
                cfg.quantiles = parse_quantiles(&q)?;
            }
            let report = run_pipeline(&cfg)?;
            for (country, reason) in &report.failed {
                eprintln!("{country} failed: {reason}");
            }
            println!(
                "{} countries completed, {} failed; outputs in {}",
                report.completed.len(),
                report.failed.len(),
                cfg.out.display()
            );
            Ok(if report.success() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::SampleData { out, trajectories, seed } => {
            let config = write_sample(&out, SampleOptions { seed, trajectories })?;
            println!("wrote {}", config.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::LifeTable { mortality, country, sex, period, extend } => {
            let data = load_mortality(&mortality)?;
            let Some(c) = data.get(&country) else { bail!("no mortality rates for {country}") };
            let (f, m) = if extend {
                extend_to_130(&c.female, &c.male, KannistoMode::Coherent).context("extending to 130+")?
            } else {
                (c.female.clone(), c.male.clone())
            };
            let surface = if sex == Sex::Female { f } else { m };
            let idx = surface
                .periods()
                .iter()
                .position(|p| *p == period)
                .with_context(|| format!("no {period} rates for {country}"))?;
            let table = build_life_table(&surface.schedules()[idx], sex)?;
            println!("age_start,mx,ax,qx,lx,dx,Lx,Tx,ex");
            for (i, g) in table.grid.groups().iter().enumerate() {
                println!(
                    "{},{},{},{},{},{},{},{},{}",
                    g.start,
                    fmt(surface.schedules()[idx].rates()[i]),
                    fmt(table.ax[i]),
                    fmt(table.qx[i]),
                    fmt(table.lx[i]),
                    fmt(table.dx[i]),
                    fmt(table.person_years[i]),
                    fmt(table.tx[i]),
                    fmt(table.ex[i])
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
