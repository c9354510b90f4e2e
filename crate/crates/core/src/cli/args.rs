use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::SyntheticSpec;
use crate::solvers::Rule;

#[derive(Debug, Parser)]
#[command(name = "cdkit", version, about = "Accelerated greedy, semi-greedy and random coordinate descent")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic least-squares instance with a prescribed cond(X^T X).
    Generate {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 100)]
        dim: usize,
        /// Condition number of X^T X, or `inf`.
        #[arg(long, default_value = "100", value_parser = parse_kappa)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance and write its trace.
    Run {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = AlgoName::Agcd)]
        algo: AlgoName,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Assert the one-step descent inequality on every iteration.
        #[arg(long)]
        check_descent: bool,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Run several algorithms over several seeds and aggregate the gaps.
    Compare {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Comma-separated subset of agcd, ascd, arcd, gcd.
        #[arg(long, value_delimiter = ',', default_value = "agcd,ascd,arcd")]
        algos: Vec<AlgoName>,
        /// Comma-separated seeds, or a half-open range `a..b`.
        #[arg(long, default_value = "0")]
        seeds: SeedList,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the greedy ratio constant from one run.
    Gamma {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 20_000)]
        iters: usize,
        #[arg(long, default_value_t = crate::diagnostics::DEFAULT_K_BAR)]
        kbar: usize,
        #[arg(long, value_enum, default_value_t = AlgoName::Agcd)]
        algo: AlgoName,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        record_period: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Either a dataset file or a synthetic specification.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// cdkit-dataset v1 or LIBSVM file.
    #[arg(long, conflicts_with_all = ["samples", "dim", "kappa", "sigma", "data_seed"])]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_parser = parse_kappa)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Seed of the synthetic instance (solver seeds are separate).
    #[arg(long)]
    pub data_seed: Option<u64>,
}

impl DataArgs {
    pub fn synthetic_spec(&self) -> SyntheticSpec {
        let d = SyntheticSpec::default();
        SyntheticSpec {
            n_samples: self.samples.unwrap_or(d.n_samples),
            dim: self.dim.unwrap_or(d.dim),
            kappa: self.kappa.unwrap_or(d.kappa),
            sigma: self.sigma.unwrap_or(d.sigma),
            seed: self.data_seed.unwrap_or(d.seed),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = ModeName::Plain)]
    pub mode: ModeName,
    /// `none`, `exact`, `smallest-positive`, or a value; 0 selects plain mode.
    #[arg(long, default_value = "none")]
    pub mu: MuPolicy,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1)]
    pub record_period: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeName {
    Plain,
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoName {
    Agcd,
    Ascd,
    Arcd,
    Gcd,
}

impl AlgoName {
    pub fn rule(&self) -> Option<Rule> {
        match self {
            AlgoName::Agcd => Some(Rule::Greedy),
            AlgoName::Ascd => Some(Rule::SemiGreedy),
            AlgoName::Arcd => Some(Rule::Random),
            AlgoName::Gcd => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlgoName::Agcd => "agcd",
            AlgoName::Ascd => "ascd",
            AlgoName::Arcd => "arcd",
            AlgoName::Gcd => "gcd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuPolicy {
    None,
    Exact,
    SmallestPositive,
    Given(f64),
}

impl FromStr for MuPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(MuPolicy::None),
            "exact" => Ok(MuPolicy::Exact),
            "smallest-positive" => Ok(MuPolicy::SmallestPositive),
            other => match other.parse::<f64>() {
                Ok(v) if v >= 0.0 && v.is_finite() => Ok(MuPolicy::Given(v)),
                _ => Err(format!(
                    "expected none, exact, smallest-positive or a nonnegative number, got {other:?}"
                )),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

impl FromStr for SeedList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |t: &str| format!("bad seed {t:?}");
        let seeds = if let Some((a, b)) = s.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad(a))?;
            let b: u64 = b.trim().parse().map_err(|_| bad(b))?;
            (a..b).collect()
        } else {
            s.split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|_| bad(t)))
                .collect::<Result<Vec<_>, _>>()?
        };
        if seeds.is_empty() {
            return Err("seed list is empty".into());
        }
        Ok(SeedList(seeds))
    }
}

fn parse_kappa(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "infinity" | "Inf" => Ok(f64::INFINITY),
        _ => match s.parse::<f64>() {
            Ok(v) if v >= 1.0 => Ok(v),
            _ => Err(format!("kappa must be a number >= 1 or `inf`, got {s:?}")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_policy_parsing() {
        assert_eq!("exact".parse::<MuPolicy>().unwrap(), MuPolicy::Exact);
        assert_eq!("1e-5".parse::<MuPolicy>().unwrap(), MuPolicy::Given(1e-5));
        assert_eq!("0".parse::<MuPolicy>().unwrap(), MuPolicy::Given(0.0));
        assert!("-1".parse::<MuPolicy>().is_err());
        assert!("big".parse::<MuPolicy>().is_err());
    }

    #[test]
    fn seed_lists() {
        assert_eq!("3".parse::<SeedList>().unwrap().0, vec![3]);
        assert_eq!("1,2, 5".parse::<SeedList>().unwrap().0, vec![1, 2, 5]);
        assert_eq!("0..4".parse::<SeedList>().unwrap().0, vec![0, 1, 2, 3]);
        assert!("4..4".parse::<SeedList>().is_err());
        assert!("a".parse::<SeedList>().is_err());
    }

    #[test]
    fn kappa_parsing() {
        assert_eq!(parse_kappa("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_kappa("1e3").unwrap(), 1000.0);
        assert!(parse_kappa("0.5").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
