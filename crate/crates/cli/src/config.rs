use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use quadrifold::sections::{Strategy, DEFAULT_BUDGET};

/// Exact computations on quadric surface fibrations over P^1.
#[derive(Clone, Debug, Parser, Serialize)]
#[command(name = "quadrifold", version, about)]
pub struct RunConfig {
    /// Candidate budget for every search.
    #[arg(long, global = true, env = "QUADRIFOLD_BUDGET", default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,

    /// Largest extension degree used for fiber points and roots.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=6))]
    pub max_ext: u32,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    Auto,
    Direct,
    Interpolation,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::Direct => Strategy::Direct,
            StrategyArg::Interpolation => Strategy::Interpolation,
        }
    }
}

#[derive(Clone, Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Command {
    /// Numerical invariants of a fibration.
    Invariants { file: PathBuf },
    /// The discriminant form, its roots and the singular fibers.
    Discriminant { file: PathBuf },
    /// All sections of one height.
    Sections {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        height: i64,
        #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
        strategy: StrategyArg,
    },
    /// The lowest height carrying a section.
    MinHeight {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        max: i64,
    },
    /// Lowest-height section through prescribed fiber points.
    WeakApprox {
        file: PathBuf,
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        max: Option<i64>,
    },
    /// Lines through the values of sections in every smooth fiber.
    Correspondence {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        height: i64,
    },
    /// Searches for sections below -delta/2.
    Stability { file: PathBuf },
    /// Elementary transformation along a line in a smooth rational fiber.
    Hecke {
        file: PathBuf,
        /// Base point as U:V.
        #[arg(long)]
        p: String,
        #[arg(long)]
        line: PathBuf,
        /// Keep the first two coordinates instead of the last two.
        #[arg(long)]
        swap_blocks: bool,
        /// Also transform every section of this height.
        #[arg(long, allow_hyphen_values = true)]
        height: Option<i64>,
    },
    /// Random squarefree members of a census family, checked against the
    /// congruences their degree pattern forces.
    Census {
        #[arg(long = "case", value_parser = clap::value_parser!(u32).range(1..=4))]
        case: u32,
        #[arg(long)]
        n: i64,
        #[arg(long, default_value_t = 20)]
        samples: u32,
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Rejection-sampling attempts per sample.
        #[arg(long, default_value_t = 10_000)]
        tries: u64,
    },
    /// Symbolic check of the height formula in relative dimension n.
    Chow {
        #[arg(long)]
        n: u32,
    },
    /// Number of sections at each height in a range.
    Counts {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        from: i64,
        #[arg(long, allow_hyphen_values = true)]
        to: i64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Invariants { .. } => "invariants",
            Command::Discriminant { .. } => "discriminant",
            Command::Sections { .. } => "sections",
            Command::MinHeight { .. } => "min-height",
            Command::WeakApprox { .. } => "weak-approx",
            Command::Correspondence { .. } => "correspondence",
            Command::Stability { .. } => "stability",
            Command::Hecke { .. } => "hecke",
            Command::Census { .. } => "census",
            Command::Chow { .. } => "chow",
            Command::Counts { .. } => "counts",
        }
    }

    /// The fibration file, for commands that read one.
    pub fn fibration_file(&self) -> Option<&PathBuf> {
        match self {
            Command::Invariants { file }
            | Command::Discriminant { file }
            | Command::Sections { file, .. }
            | Command::MinHeight { file, .. }
            | Command::WeakApprox { file, .. }
            | Command::Correspondence { file, .. }
            | Command::Stability { file }
            | Command::Hecke { file, .. }
            | Command::Counts { file, .. } => Some(file),
            Command::Census { .. } | Command::Chow { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_heights_and_defaults() {
        let cfg = RunConfig::try_parse_from(["quadrifold", "sections", "f.json", "--height", "-3"]).unwrap();
        assert_eq!(cfg.max_ext, 2);
        assert_eq!(cfg.command.name(), "sections");
        assert!(matches!(cfg.command, Command::Sections { height: -3, strategy: StrategyArg::Auto, .. }));
        assert_eq!(cfg.command.fibration_file().unwrap(), std::path::Path::new("f.json"));
    }

    #[test]
    fn global_flags_after_the_subcommand() {
        let cfg = RunConfig::try_parse_from(["quadrifold", "chow", "--n", "2", "--budget", "5", "--seed", "7"]).unwrap();
        assert_eq!((cfg.budget, cfg.seed), (5, 7));
        assert!(cfg.command.fibration_file().is_none());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(RunConfig::try_parse_from(["quadrifold", "--budget", "0", "chow", "--n", "1"]).is_err());
        assert!(RunConfig::try_parse_from(["quadrifold", "census", "--case", "5", "--n", "1"]).is_err());
    }

    #[test]
    fn serializes_with_command_name() {
        let cfg = RunConfig::try_parse_from(["quadrifold", "census", "--case", "2", "--n", "0"]).unwrap();
        let v = serde_json::to_value(&cfg).unwrap();
        assert_eq!(v["command"]["name"], "census");
        assert_eq!(v["command"]["samples"], 20);
        assert!(v.get("output").is_none());
    }
}
