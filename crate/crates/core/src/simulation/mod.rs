//! Seeded Monte Carlo experiments for the sketch and the theory.
//!
//! Every replication draws from its own generator, keyed by the master seed,
//! the sample size and the replication index, so reports do not depend on
//! scheduling or thread count.

mod experiment;
mod sampler;

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::sketch::SketchError;
use crate::theory::{DistributionSpec, TheoryError};

pub use experiment::{run_experiment, ACCURACY_LEVELS, SUMMARY_LEVELS};
pub use sampler::{
    empirical_moments, exact_quantile_oracle, open_uniform, replication_rng, sample, MomentError,
    Moments, Sampler,
};

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error("empty stream")]
    EmptyStream,
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Size,
    Occupancy,
    Gap,
    TailMass,
    DkwCoverage,
    Accuracy,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Size,
        ExperimentKind::Occupancy,
        ExperimentKind::Gap,
        ExperimentKind::TailMass,
        ExperimentKind::DkwCoverage,
        ExperimentKind::Accuracy,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Size => "size",
            ExperimentKind::Occupancy => "occupancy",
            ExperimentKind::Gap => "gap",
            ExperimentKind::TailMass => "tail_mass",
            ExperimentKind::DkwCoverage => "dkw_coverage",
            ExperimentKind::Accuracy => "accuracy",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = SimulationError;

    /// Accepts the canonical names plus `tail` and `dkw`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tail" => Ok(ExperimentKind::TailMass),
            "dkw" => Ok(ExperimentKind::DkwCoverage),
            _ => ExperimentKind::ALL
                .into_iter()
                .find(|k| k.as_str() == s)
                .ok_or_else(|| SimulationError::Plan(format!("unknown experiment {s:?}"))),
        }
    }
}

/// A per-replication statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// Bins spanned by the sketch, from its smallest to its largest occupied bin.
    Size,
    /// `(ln X_(n) − ln X_(1))/ln ρ + 1`.
    SizeLog,
    /// `ln(X_(n)/ν)/ln ρ + 1` for Pareto input.
    Anchored,
    Occupancy,
    Empty,
    LongestGap,
    /// True mass of the bin holding the maximum.
    LastBinMass,
    /// True mass above that bin.
    TailMass,
    /// `1 − TailMass`.
    QMax,
    /// 1 when the DKW band covers the true CDF at every boundary, else 0.
    Covered,
    /// Largest relative quantile error over [`ACCURACY_LEVELS`].
    MaxRelError,
}

impl Statistic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Statistic::Size => "size",
            Statistic::SizeLog => "size_log",
            Statistic::Anchored => "anchored",
            Statistic::Occupancy => "occupancy",
            Statistic::Empty => "empty",
            Statistic::LongestGap => "longest_gap",
            Statistic::LastBinMass => "p_last",
            Statistic::TailMass => "p_tail",
            Statistic::QMax => "q_max",
            Statistic::Covered => "covered",
            Statistic::MaxRelError => "max_rel_error",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub kind: ExperimentKind,
    pub spec: DistributionSpec,
    pub n_grid: Vec<u64>,
    pub reps: u64,
    pub epsilon: f64,
    pub master_seed: u64,
    /// Significance level of the DKW bands.
    pub alpha: f64,
}

impl ExperimentPlan {
    pub fn new(
        kind: ExperimentKind,
        spec: DistributionSpec,
        n_grid: Vec<u64>,
        reps: u64,
        epsilon: f64,
        master_seed: u64,
    ) -> Self {
        Self {
            kind,
            spec,
            n_grid,
            reps,
            epsilon,
            master_seed,
            alpha: 0.05,
        }
    }
}

/// Theory values for a statistic; missing entries have no closed form here.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TheoryOverlay {
    pub lower: Option<f64>,
    pub value: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub n: u64,
    pub rep: u64,
    pub statistic: Statistic,
    pub value: f64,
    /// Theory for the mean of the statistic.
    pub theory: TheoryOverlay,
}

/// Statistics of one statistic across replications at one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub n: u64,
    pub statistic: Statistic,
    /// `None` for a single replication.
    pub moments: Option<Moments>,
    /// `(level, value)` pairs at [`SUMMARY_LEVELS`].
    pub quantiles: Vec<(f64, f64)>,
    pub theory_mean: TheoryOverlay,
    pub theory_variance: TheoryOverlay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub plan: ExperimentPlan,
    /// In plan order: by n, then replication, then statistic.
    pub observations: Vec<Observation>,
    pub summaries: Vec<Summary>,
}

impl ExperimentReport {
    /// Observed values of `statistic` at sample size `n`, by replication.
    pub fn values(&self, n: u64, statistic: Statistic) -> Vec<f64> {
        self.observations
            .iter()
            .filter(|o| o.n == n && o.statistic == statistic)
            .map(|o| o.value)
            .collect()
    }

    pub fn summary(&self, n: u64, statistic: Statistic) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|s| s.n == n && s.statistic == statistic)
    }
}

pub const CSV_HEADER: &str =
    "experiment,distribution,n,rep,statistic,value,theory_lower,theory_value,theory_upper";

fn write_opt<W: Write>(out: &mut W, v: Option<f64>) -> io::Result<()> {
    match v {
        Some(x) => write!(out, ",{x:?}"),
        None => out.write_all(b","),
    }
}

/// Writes one CSV row per observation. Floats use the shortest representation that round-trips.
pub fn report_csv<W: Write>(report: &ExperimentReport, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for o in &report.observations {
        write!(
            out,
            "{},{},{},{},{},{:?}",
            report.plan.kind, report.plan.spec, o.n, o.rep, o.statistic, o.value
        )?;
        write_opt(&mut out, o.theory.lower)?;
        write_opt(&mut out, o.theory.value)?;
        write_opt(&mut out, o.theory.upper)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.as_str().parse::<ExperimentKind>().unwrap(), k);
        }
        assert_eq!(
            "tail".parse::<ExperimentKind>().unwrap(),
            ExperimentKind::TailMass
        );
        assert!("sizes".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn empty_report_is_header_only() {
        let plan = ExperimentPlan::new(
            ExperimentKind::Size,
            DistributionSpec::Exp { lambda: 1.0 },
            vec![10],
            1,
            0.01,
            0,
        );
        let report = ExperimentReport {
            plan,
            observations: Vec::new(),
            summaries: Vec::new(),
        };
        let mut buf = Vec::new();
        report_csv(&report, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }
}
