//! Command-line front end: `basket --data trial.csv --out results/`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::cluster::cluster_louvain;
use crate::error::{MemError, Result};
use crate::export::{emit_densities, emit_exchangeogram};
use crate::io::{ingest_csv, read_matrix_csv, DataFormat};
use crate::model::{
    uniform_prior_matrix, Alternative, AnalysisConfig, EssRule, Method, PriorConfig, TrialData, DEFAULT_HPD_ALPHA,
    DEFAULT_MCMC_BURNIN, DEFAULT_MCMC_ITER, DEFAULT_SEED, MAX_EXACT_BASKETS,
};
use crate::report::MemReport;
use crate::summary::fit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Mcmc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlternativeArg {
    Greater,
    Less,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Wide,
    Long,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EssRuleArg {
    EqualTailed,
    Hpd,
}

/// Analyze a basket trial with a multi-source exchangeability model.
#[derive(Debug, Parser)]
#[command(name = "basket", version, about)]
pub struct Args {
    /// Trial data CSV
    #[arg(long)]
    pub data: PathBuf,

    /// Layout of the data file
    #[arg(long, value_enum, default_value = "wide")]
    pub format: FormatArg,

    #[arg(long, value_enum, default_value = "mcmc")]
    pub method: MethodArg,

    /// Null response rate, one value or a comma-separated list per basket
    #[arg(long, default_value = "0.15")]
    pub p0: String,

    #[arg(long, value_enum, default_value = "greater")]
    pub alternative: AlternativeArg,

    /// First beta prior shape, one value or one per basket
    #[arg(long, default_value = "0.5")]
    pub shape1: String,

    /// Second beta prior shape, one value or one per basket
    #[arg(long, default_value = "0.5")]
    pub shape2: String,

    /// Prior exchangeability probability for every pair, or a CSV file holding the full matrix
    #[arg(long, default_value = "0.5")]
    pub prior: String,

    #[arg(long, default_value_t = DEFAULT_HPD_ALPHA)]
    pub hpd_alpha: f64,

    /// Retained MCMC iterations; also the number of posterior draws for the exact method
    #[arg(long, default_value_t = DEFAULT_MCMC_ITER)]
    pub iter: usize,

    #[arg(long, default_value_t = DEFAULT_MCMC_BURNIN)]
    pub burnin: usize,

    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// How the effective-sample-size beta is matched to the HPD interval
    #[arg(long, value_enum, default_value = "equal-tailed")]
    pub ess_rule: EssRuleArg,

    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,

    /// Do not print the summary to standard output
    #[arg(long)]
    pub quiet: bool,
}

/// Parses one real or a comma list and broadcasts a single value to `baskets`.
pub fn real_list(text: &str, baskets: usize, what: &str) -> Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| MemError::InvalidConfig(format!("{what}: '{}' is not a number", v.trim())))
        })
        .collect::<Result<Vec<f64>>>()?;
    match values.len() {
        1 => Ok(vec![values[0]; baskets]),
        n if n == baskets => Ok(values),
        n => Err(MemError::InvalidConfig(format!("{what}: {n} values given for {baskets} baskets"))),
    }
}

impl Args {
    pub fn load_data(&self) -> Result<TrialData> {
        let format = match self.format {
            FormatArg::Wide => DataFormat::Wide,
            FormatArg::Long => DataFormat::Long,
        };
        ingest_csv(&self.data, format)
    }

    pub fn resolve(&self, data: &TrialData) -> Result<(PriorConfig, AnalysisConfig)> {
        let j = data.baskets();
        let matrix = match self.prior.trim().parse::<f64>() {
            Ok(p) => uniform_prior_matrix(j, p),
            Err(_) => read_matrix_csv(Path::new(&self.prior))?,
        };
        let prior = PriorConfig::new(
            real_list(&self.shape1, j, "--shape1")?,
            real_list(&self.shape2, j, "--shape2")?,
            matrix,
        )
        .map_err(|e| MemError::InvalidConfig(e.to_string()))?;

        let mut config = AnalysisConfig::defaults(j);
        config.p0 = real_list(&self.p0, j, "--p0")?;
        config.alternative = match self.alternative {
            AlternativeArg::Greater => Alternative::Greater,
            AlternativeArg::Less => Alternative::Less,
        };
        config.method = match self.method {
            MethodArg::Exact => Method::Exact,
            MethodArg::Mcmc => Method::Mcmc,
        };
        config.ess_rule = match self.ess_rule {
            EssRuleArg::EqualTailed => EssRule::EqualTailed,
            EssRuleArg::Hpd => EssRule::Hpd,
        };
        config.hpd_alpha = self.hpd_alpha;
        config.mcmc_iter = self.iter;
        config.mcmc_burnin = self.burnin;
        config.seed = self.seed;
        config.validate(j)?;
        Ok((prior, config))
    }
}

/// Runs the analysis and writes report.json, summary.txt, densities.csv and exchangeogram.svg.
pub fn run(args: &Args) -> Result<MemReport> {
    let data = args.load_data()?;
    let (prior, config) = args.resolve(&data)?;
    if config.method == Method::Exact {
        if data.baskets() > MAX_EXACT_BASKETS {
            return Err(MemError::TooManyBaskets { baskets: data.baskets(), max: MAX_EXACT_BASKETS });
        }
        if data.baskets() == MAX_EXACT_BASKETS {
            eprintln!("warning: exact enumeration of {} baskets visits 2^21 configurations", data.baskets());
        }
    }

    let fitted = fit(&data, &prior, &config)?;
    let clusters = cluster_louvain(fitted.pep())?;
    let report = MemReport::build(&fitted, &clusters)?;

    fs::create_dir_all(&args.out)?;
    let mut json = report.to_json()?;
    json.push('\n');
    fs::write(args.out.join("report.json"), json)?;
    let text = report.render_text();
    fs::write(args.out.join("summary.txt"), &text)?;
    emit_densities(&fitted, &clusters, &args.out.join("densities.csv"))?;
    emit_exchangeogram(fitted.pep(), data.names(), &args.out.join("exchangeogram.svg"))?;
    if !args.quiet {
        print!("{text}");
    }
    Ok(report)
}

/// Entry point: exit 0 on success, 2 on usage errors, 1 on runtime failures.
pub fn main_with<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(&args) {
        Ok(_) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_usage() { 2 } else { 1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let args = Args::try_parse_from(["basket", "--data", "x.csv"]).unwrap();
        let data = TrialData::unnamed(vec![1, 2], vec![5, 6]).unwrap();
        let (prior, config) = args.resolve(&data).unwrap();
        assert_eq!(config, AnalysisConfig::defaults(2));
        assert_eq!(prior, PriorConfig::reference(2));
        assert_eq!(config.p0, vec![0.15; 2]);
        assert_eq!(config.hpd_alpha, 0.05);
        assert_eq!((config.mcmc_iter, config.mcmc_burnin), (200_000, 50_000));
        assert_eq!(config.method, Method::Mcmc);
        assert_eq!(config.alternative, Alternative::Greater);
        assert_eq!(prior.shape1(), &[0.5, 0.5]);
        assert_eq!(prior.prior_exch()[0][1], 0.5);
        assert_eq!(args.out, PathBuf::from("."));
    }

    #[test]
    fn lists_broadcast_or_match() {
        assert_eq!(real_list("0.2", 3, "x").unwrap(), vec![0.2; 3]);
        assert_eq!(real_list("0.1, 0.2,0.3", 3, "x").unwrap(), vec![0.1, 0.2, 0.3]);
        assert!(real_list("0.1,0.2", 3, "x").unwrap_err().is_usage());
        assert!(real_list("abc", 3, "x").unwrap_err().is_usage());
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let data = TrialData::unnamed(vec![1, 2], vec![5, 6]).unwrap();
        for extra in ["--p0=1.5", "--prior=2", "--shape1=-1", "--hpd-alpha=1"] {
            let args = Args::try_parse_from(["basket", "--data", "x.csv", extra]).unwrap();
            assert!(args.resolve(&data).unwrap_err().is_usage(), "{extra:?}");
        }
    }
}
