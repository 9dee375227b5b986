//! The `poclm` command line: `fit`, `region`, `test` and `simulate`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 fit did not
//! converge (reports are still written), 5 experiment failure, 1 anything else.

pub mod config;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::estimation::{EstimatorKind, FitOptions};
use crate::inference::classify::classify_case;
use crate::inference::fits::Fits;
use crate::inference::hypothesis::{
    test_direction, test_monotonicity, test_no_effect, test_non_monotonicity, TestOptions,
};
use crate::inference::quantile::QuantileFamily;
use crate::inference::region::{cr_grid, RegionKind, RegionSpec, RegionTarget};
use crate::model::data::{encode_design, DesignData, RawTable};
use crate::model::spec::{Direction, ModelSpec};
use crate::simulation::experiment::{run_experiments, ExperimentConfig};

pub use config::RunConfig;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;
pub const EXIT_EXPERIMENT: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "poclm",
    version,
    about = "Cumulative logit models with monotone ordinal predictors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// TOML run or experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// CSV data file, overriding the configuration.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Confidence level.
    #[arg(long)]
    pub level: Option<f64>,
    /// Degrees of freedom of the reference distribution.
    #[arg(long)]
    pub df: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Use the ½χ²_r + ½χ²_{r−1} mixture instead of χ²_r.
    #[arg(long)]
    pub mixture: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Ucr,
    Uccr,
    Ccr,
    Acr,
}

impl From<KindArg> for RegionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Ucr => RegionKind::Ucr,
            KindArg::Uccr => RegionKind::Uccr,
            KindArg::Ccr => RegionKind::Ccr,
            KindArg::Acr => RegionKind::Acr,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum HypothesisArg {
    NoEffect,
    Monotone,
    NonMonotone,
    Iso,
    Anti,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimatorArg {
    Umle,
    Cmle,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit UMLE and CMLE and write a side-by-side report.
    Fit {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a confidence region on a grid and write it as CSV.
    Region {
        #[command(flatten)]
        common: Common,
        /// Ordinal predictor.
        #[arg(long)]
        variable: String,
        /// Category numbers (2 = first non-baseline) of the coefficients on the axes.
        #[arg(long, value_delimiter = ',', conflicts_with = "differences")]
        coords: Option<Vec<usize>>,
        /// Category numbers h whose differences β_h − β_{h−1} form the axes.
        #[arg(long, value_delimiter = ',')]
        differences: Option<Vec<usize>>,
    },
    /// Test a hypothesis about one ordinal predictor.
    Test {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        variable: String,
        #[arg(long, value_enum)]
        hypothesis: HypothesisArg,
        /// Fit the no-effect statistic is centred on.
        #[arg(long, value_enum)]
        estimator: Option<EstimatorArg>,
    },
    /// Run the coverage and/or rejection experiments of a configuration.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidSpec(_)
        | Error::UnknownColumn(_)
        | Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::TooManyDirections(..)
        | Error::GridTooLarge(..)
        | Error::DimensionMismatch { .. } => EXIT_CONFIG,
        Error::EmptyDataset
        | Error::UnknownLevel { .. }
        | Error::InvalidNumber { .. }
        | Error::EmptyCategory(_)
        | Error::Csv(_) => EXIT_DATA,
        Error::Optimizer(_) | Error::ProbabilityUnderflow(_) => EXIT_NOT_CONVERGED,
        Error::Experiment(_) => EXIT_EXPERIMENT,
        _ => 1,
    }
}

/// Parses the process arguments and runs; returns the exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Fit { common } => cmd_fit(&common),
        Command::Region {
            common,
            variable,
            coords,
            differences,
        } => cmd_region(&common, &variable, coords, differences),
        Command::Test {
            common,
            variable,
            hypothesis,
            estimator,
        } => cmd_test(&common, &variable, hypothesis, estimator),
        Command::Simulate { common } => cmd_simulate(&common),
    }
}

struct Loaded {
    cfg: RunConfig,
    spec: ModelSpec,
    data: DesignData,
}

fn load(common: &Common) -> Result<Loaded> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(d) = &common.data {
        cfg.data = Some(d.clone());
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    if let Some(l) = common.level {
        cfg.inference.level = l;
    }
    if common.df.is_some() {
        cfg.inference.df = common.df;
    }
    if let Some(k) = common.kind {
        cfg.inference.kind = k.into();
    }
    if common.mixture {
        cfg.inference.family = QuantileFamily::Mixture;
    }
    if !(cfg.inference.level > 0.0 && cfg.inference.level < 1.0) {
        return Err(Error::Config(format!(
            "level {} outside (0, 1)",
            cfg.inference.level
        )));
    }
    let spec = cfg.model_spec()?;
    let path = cfg
        .data
        .clone()
        .ok_or_else(|| Error::Config("no data file given (`data` or --data)".into()))?;
    let raw = read_table(&path)?;
    let data = encode_design(&raw, &spec)?;
    Ok(Loaded { cfg, spec, data })
}

fn read_table(path: &Path) -> Result<RawTable> {
    let file = fs::File::open(path)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    match RawTable::from_reader(file) {
        Ok(t) => Ok(t),
        Err(Error::Csv(e)) if matches!(e.kind(), csv::ErrorKind::Io(_)) => Err(Error::EmptyDataset),
        Err(e) => Err(e),
    }
}

fn fit_options(cfg: &RunConfig) -> FitOptions {
    let mut o = FitOptions::default();
    if let Some(m) = cfg.max_iterations {
        o.max_iterations = m;
    }
    o
}

fn out_dir(cfg: &RunConfig) -> Result<Option<PathBuf>> {
    match &cfg.out {
        Some(d) => {
            fs::create_dir_all(d)?;
            Ok(Some(d.clone()))
        }
        None => Ok(None),
    }
}

fn convergence_code(fits: &Fits) -> i32 {
    if fits.converged() {
        0
    } else {
        eprintln!("warning: a fit did not converge; see the convergence flags in the report");
        EXIT_NOT_CONVERGED
    }
}

fn cmd_fit(common: &Common) -> Result<i32> {
    let l = load(common)?;
    let fits = Fits::new(&l.data, &l.spec, fit_options(&l.cfg))?;
    let text = report::fit_report(&fits, l.cfg.inference.level);
    print!("{text}");
    if let Some(dir) = out_dir(&l.cfg)? {
        fs::write(dir.join("fit_report.txt"), &text)?;
        report::write_estimates(
            &fits,
            l.cfg.inference.level,
            fs::File::create(dir.join("estimates.csv"))?,
        )?;
    }
    Ok(convergence_code(&fits))
}

fn cmd_region(
    common: &Common,
    variable: &str,
    coords: Option<Vec<usize>>,
    differences: Option<Vec<usize>>,
) -> Result<i32> {
    let l = load(common)?;
    let s = l.spec.ordinal_position(variable)?;
    let target = match (coords, differences) {
        (Some(c), _) => {
            if c.iter().any(|&h| h < 2) {
                return Err(Error::Config(
                    "coordinates are category numbers starting at 2".into(),
                ));
            }
            RegionTarget::Coordinates {
                predictor: s,
                positions: c.iter().map(|h| h - 2).collect(),
            }
        }
        (None, Some(d)) => RegionTarget::differences(&l.spec, s, &d)?,
        (None, None) => RegionTarget::Block(s),
    };
    let whole_block = matches!(target, RegionTarget::Block(_));
    let fits = Fits::new(&l.data, &l.spec, fit_options(&l.cfg))?;
    let region = RegionSpec {
        target,
        kind: l.cfg.inference.kind,
        level: l.cfg.inference.level,
        df: l.cfg.inference.df,
        family: l.cfg.inference.family,
        grid: l.cfg.grid.to_spec(),
    };
    let grid = cr_grid(&region, &fits)?;
    let case = if whole_block {
        Some(classify_case(&fits, s, &grid)?)
    } else {
        None
    };
    let text = report::region_summary(&grid, case.as_ref());
    print!("{text}");
    if let Some(dir) = out_dir(&l.cfg)? {
        grid.write_csv(fs::File::create(
            dir.join(format!("region_{variable}.csv")),
        )?)?;
        fs::write(dir.join(format!("region_{variable}.txt")), &text)?;
    }
    Ok(convergence_code(&fits))
}

fn cmd_test(
    common: &Common,
    variable: &str,
    hypothesis: HypothesisArg,
    estimator: Option<EstimatorArg>,
) -> Result<i32> {
    let l = load(common)?;
    let s = l.spec.ordinal_position(variable)?;
    let fits = Fits::new(&l.data, &l.spec, fit_options(&l.cfg))?;
    let opts = TestOptions {
        level: l.cfg.inference.level,
        df: l.cfg.inference.df,
        family: l.cfg.inference.family,
    };
    let kind = l.cfg.inference.kind;
    let outcome = match hypothesis {
        HypothesisArg::NoEffect => {
            let est = match estimator {
                Some(EstimatorArg::Umle) => EstimatorKind::Umle,
                Some(EstimatorArg::Cmle) => EstimatorKind::Cmle,
                None if matches!(kind, RegionKind::Ccr | RegionKind::Acr) => EstimatorKind::Cmle,
                None => EstimatorKind::Umle,
            };
            test_no_effect(&fits, s, est, &opts)?
        }
        HypothesisArg::Monotone => test_monotonicity(&fits, s, kind, &opts)?,
        HypothesisArg::NonMonotone => test_non_monotonicity(&fits, s, &opts)?,
        HypothesisArg::Iso => test_direction(&fits, s, Direction::Iso, kind, &opts)?,
        HypothesisArg::Anti => test_direction(&fits, s, Direction::Anti, kind, &opts)?,
    };
    let text = report::test_report(variable, &outcome);
    print!("{text}");
    if let Some(dir) = out_dir(&l.cfg)? {
        let name = format!(
            "test_{variable}_{}.txt",
            format!("{hypothesis:?}").to_lowercase()
        );
        fs::write(dir.join(name), &text)?;
    }
    Ok(convergence_code(&fits))
}

fn cmd_simulate(common: &Common) -> Result<i32> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(l) = common.level {
        cfg.level = l;
    }
    if common.df.is_some() {
        cfg.df = common.df;
    }
    if let Some(k) = common.kind {
        cfg.kinds = vec![k.into()];
    }
    if common.mixture {
        cfg.family = QuantileFamily::Mixture;
    }
    cfg.validate()?;
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    println!("{}", cfg.to_toml());
    let reports = run_experiments(&cfg).map_err(|e| match e {
        Error::Config(m) => Error::Config(m),
        other => Error::Experiment(other.to_string()),
    })?;
    for r in &reports {
        let stem = format!("{}_{}", cfg.label(), r.kind_label());
        r.write_csv(fs::File::create(dir.join(format!("{stem}.csv")))?)?;
        fs::write(dir.join(format!("{stem}.txt")), r.full_text())?;
        print!("{}", r.text_table());
        println!();
    }
    Ok(0)
}
