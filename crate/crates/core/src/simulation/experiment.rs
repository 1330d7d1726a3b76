//! Experiment runners.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::sampler::{empirical_moments, lower_rank, open_uniform, replication_rng, Sampler};
use super::{
    ExperimentKind, ExperimentPlan, ExperimentReport, Observation, SimulationError, Statistic,
    Summary, TheoryOverlay,
};
use crate::sketch::{BinBoundary, ExponentialHistogram, SideStats, SketchConfig};
use crate::theory::{
    applied_gap_bounds, exp_occupancy, exp_size_gumbel, exp_size_moment_bounds, exp_tail_bounds,
    f0_occupancy, f1_occupancy, geometric_gap_bounds, geometric_occupancy, pareto_occupancy,
    pareto_size_moments, pareto_tail_bounds, BoundPair, DistributionSpec, GapLaw, OccupancyLaw,
    SizeVariant, TailMassBounds,
};

/// Quantile levels checked by the accuracy experiment.
pub const ACCURACY_LEVELS: [f64; 101] = {
    let mut levels = [0.0; 101];
    levels[0] = 0.001;
    let mut i = 1;
    while i < 100 {
        levels[i] = i as f64 / 100.0;
        i += 1;
    }
    levels[100] = 0.999;
    levels
};

/// Levels of the per-n quantile summaries.
pub const SUMMARY_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// How draws map to bin indices for occupancy and gap experiments.
#[derive(Debug, Clone)]
enum Binning {
    Sketch(SketchConfig),
    /// Bins `(c·ρ^{k−1}, c·ρ^k]` aligned at the split point `c`; F0 uses `k ≤ 0`, F1 `k ≥ 1`.
    Split {
        cutoff: f64,
        log_rho: f64,
        below: bool,
    },
    /// Geometric draws are bin indices already.
    Integer,
}

impl Binning {
    fn index(&self, x: f64) -> Result<i64, SimulationError> {
        Ok(match self {
            Binning::Sketch(config) => config.bin_index(x)?,
            &Binning::Split {
                cutoff,
                log_rho,
                below,
            } => {
                let k = ((x / cutoff).ln() / log_rho).ceil() as i64;
                if below {
                    k.min(0)
                } else {
                    k.max(1)
                }
            }
            Binning::Integer => x as i64,
        })
    }
}

/// Distinct bin indices seen, stored as a dense bitmap.
#[derive(Debug, Default)]
struct IndexTally {
    lo: i64,
    seen: Vec<bool>,
}

impl IndexTally {
    fn insert(&mut self, k: i64) {
        if self.seen.is_empty() {
            self.lo = k;
            self.seen.push(true);
            return;
        }
        if k < self.lo {
            let shift = (self.lo - k) as usize;
            let grow = shift.max(self.seen.len());
            let mut seen = vec![false; grow + self.seen.len()];
            seen[grow..].copy_from_slice(&self.seen);
            self.seen = seen;
            self.lo -= grow as i64;
        }
        let i = (k - self.lo) as usize;
        if i >= self.seen.len() {
            let len = (i + 1).max(2 * self.seen.len());
            self.seen.resize(len, false);
        }
        self.seen[i] = true;
    }

    fn stats(&self) -> Option<SideStats> {
        let lo = self.lo;
        SideStats::from_sorted_indices(
            self.seen
                .iter()
                .enumerate()
                .filter(|(_, &s)| s)
                .map(|(i, _)| lo + i as i64),
        )
    }
}

fn statistics(plan: &ExperimentPlan) -> Vec<Statistic> {
    match plan.kind {
        ExperimentKind::Size => {
            let mut s = vec![Statistic::Size, Statistic::SizeLog];
            if matches!(plan.spec, DistributionSpec::Pareto { .. }) {
                s.push(Statistic::Anchored);
            }
            s
        }
        ExperimentKind::Occupancy => vec![Statistic::Occupancy, Statistic::Empty],
        ExperimentKind::Gap => vec![Statistic::LongestGap],
        ExperimentKind::TailMass => {
            vec![Statistic::LastBinMass, Statistic::TailMass, Statistic::QMax]
        }
        ExperimentKind::DkwCoverage => vec![Statistic::Covered],
        ExperimentKind::Accuracy => vec![Statistic::MaxRelError],
    }
}

fn plan_error(msg: String) -> SimulationError {
    SimulationError::Plan(msg)
}

fn validate(plan: &ExperimentPlan) -> Result<SketchConfig, SimulationError> {
    if plan.reps < 1 {
        return Err(plan_error("reps must be at least 1".into()));
    }
    if plan.n_grid.is_empty() {
        return Err(plan_error("n grid is empty".into()));
    }
    if let Some(n) = plan.n_grid.iter().find(|&&n| n < 2) {
        return Err(plan_error(format!(
            "sample sizes must be at least 2, got {n}"
        )));
    }
    if !(plan.alpha > 0.0 && plan.alpha < 1.0) {
        return Err(plan_error(format!(
            "alpha must lie in (0, 1), got {}",
            plan.alpha
        )));
    }
    let config = SketchConfig::new(plan.epsilon)?;
    plan.spec.validate()?;
    if let DistributionSpec::F0 { rho, .. } | DistributionSpec::F1 { rho, .. } = plan.spec {
        if ((rho - config.rho()) / config.rho()).abs() > 1e-12 {
            return Err(plan_error(format!(
                "split spec uses rho {rho} but epsilon gives {}",
                config.rho()
            )));
        }
    }
    let supported = match plan.kind {
        ExperimentKind::Size | ExperimentKind::TailMass => plan.spec.is_positive(),
        ExperimentKind::Occupancy | ExperimentKind::Gap => {
            !matches!(plan.spec, DistributionSpec::Gumbel { .. })
        }
        ExperimentKind::DkwCoverage | ExperimentKind::Accuracy => true,
    };
    if !supported {
        return Err(plan_error(format!(
            "{} experiment does not support {}",
            plan.kind, plan.spec
        )));
    }
    Ok(config)
}

fn binning(spec: &DistributionSpec, config: &SketchConfig, sampler: &Sampler) -> Binning {
    match spec {
        DistributionSpec::Geometric { .. } => Binning::Integer,
        DistributionSpec::F0 { rho, .. } | DistributionSpec::F1 { rho, .. } => Binning::Split {
            cutoff: sampler.cutoff(),
            log_rho: rho.ln(),
            below: matches!(spec, DistributionSpec::F0 { .. }),
        },
        _ => Binning::Sketch(config.clone()),
    }
}

/// Smallest and largest of `n` draws. Transforms are monotone, so only the extreme uniforms matter.
fn extremes(sampler: &Sampler, n: u64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let (mut lo, mut hi) = (1.0f64, 0.0f64);
    for _ in 0..n {
        let u = open_uniform(rng);
        lo = lo.min(u);
        hi = hi.max(u);
    }
    let (a, b) = (sampler.transform(lo), sampler.transform(hi));
    (a.min(b), a.max(b))
}

struct Context {
    plan: ExperimentPlan,
    config: SketchConfig,
    sampler: Sampler,
    binning: Binning,
}

impl Context {
    fn replicate(&self, n: u64, rep: u64) -> Result<Vec<f64>, SimulationError> {
        let mut rng = replication_rng(self.plan.master_seed, n, rep);
        let config = &self.config;
        match self.plan.kind {
            ExperimentKind::Size => {
                let (min, max) = extremes(&self.sampler, n, &mut rng);
                let log_rho = config.log_rho();
                let size = config.bin_index(max)? - config.bin_index(min)? + 1;
                let mut out = vec![size as f64, (max / min).ln() / log_rho + 1.0];
                if let DistributionSpec::Pareto { nu, .. } = self.plan.spec {
                    out.push((max / nu).ln() / log_rho + 1.0);
                }
                Ok(out)
            }
            ExperimentKind::TailMass => {
                let (_, max) = extremes(&self.sampler, n, &mut rng);
                let k = config.bin_index(max)?;
                let spec = &self.plan.spec;
                let tail = spec.survival(config.bin_upper(k));
                let last = spec.survival(config.bin_upper(k - 1)) - tail;
                Ok(vec![last, tail, 1.0 - tail])
            }
            ExperimentKind::Occupancy | ExperimentKind::Gap => {
                let mut tally = IndexTally::default();
                for _ in 0..n {
                    tally.insert(self.binning.index(self.sampler.draw(&mut rng))?);
                }
                let s = tally.stats().expect("n >= 2 draws");
                Ok(if self.plan.kind == ExperimentKind::Gap {
                    vec![s.longest_gap as f64]
                } else {
                    vec![s.occupancy as f64, s.empty as f64]
                })
            }
            ExperimentKind::DkwCoverage => {
                let mut sketch = ExponentialHistogram::with_config(config.clone());
                for _ in 0..n {
                    sketch.insert(self.sampler.draw(&mut rng))?;
                }
                let band = sketch.dkw_bands(self.plan.alpha)?;
                let covered = band.entries.iter().all(|e| {
                    let truth = true_cdf(&self.plan.spec, config, e.boundary);
                    e.lower <= truth && truth <= e.upper
                });
                Ok(vec![if covered { 1.0 } else { 0.0 }])
            }
            ExperimentKind::Accuracy => {
                let mut sketch = ExponentialHistogram::with_config(config.clone());
                let mut values = Vec::with_capacity(n as usize);
                for _ in 0..n {
                    let x = self.sampler.draw(&mut rng);
                    sketch.insert(x)?;
                    values.push(x);
                }
                values.sort_by(f64::total_cmp);
                Ok(vec![max_relative_error(&sketch, &values)?])
            }
        }
    }
}

/// Probability of the region a boundary counts, under the input law.
fn true_cdf(spec: &DistributionSpec, config: &SketchConfig, boundary: BinBoundary) -> f64 {
    match boundary {
        BinBoundary::Negative(k) => {
            // Pr(X < −ρ^{k−1}); the laws with negative support are continuous.
            spec.cdf(-config.bin_upper(k - 1))
        }
        BinBoundary::Zero => spec.cdf(0.0),
        BinBoundary::Positive(k) => spec.cdf(config.bin_upper(k)),
    }
}

/// Largest `|estimate − exact|/|exact|` over [`ACCURACY_LEVELS`], with `sorted` the raw stream.
fn max_relative_error(
    sketch: &ExponentialHistogram,
    sorted: &[f64],
) -> Result<f64, SimulationError> {
    let mut worst = 0.0f64;
    for q in ACCURACY_LEVELS {
        let exact = sorted[lower_rank(sorted.len(), q) - 1];
        let estimate = sketch.quantile(q)?.value;
        let err = if exact == 0.0 {
            if estimate == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            ((estimate - exact) / exact).abs()
        };
        worst = worst.max(err);
    }
    Ok(worst)
}

fn bounds(b: BoundPair) -> TheoryOverlay {
    TheoryOverlay {
        lower: Some(b.lower),
        value: None,
        upper: Some(b.upper),
    }
}

fn point(v: f64) -> TheoryOverlay {
    TheoryOverlay {
        value: Some(v),
        ..TheoryOverlay::default()
    }
}

fn occupancy_law(spec: &DistributionSpec, n: u64, rho: f64) -> Option<OccupancyLaw> {
    match *spec {
        DistributionSpec::Exp { lambda } => exp_occupancy(n, lambda, rho).ok().map(|o| o.law),
        DistributionSpec::Pareto { beta, .. } => pareto_occupancy(n, rho, beta).ok(),
        DistributionSpec::Geometric { p } => geometric_occupancy(n, p).ok(),
        DistributionSpec::F0 { rho, .. } => f0_occupancy(n, rho).ok(),
        DistributionSpec::F1 { rho, .. } => f1_occupancy(n, rho).ok(),
        DistributionSpec::Gumbel { .. } => None,
    }
}

fn gap_law(spec: &DistributionSpec, n: u64, rho: f64) -> Option<GapLaw> {
    match *spec {
        DistributionSpec::Geometric { p } => geometric_gap_bounds(n, p).ok(),
        _ => applied_gap_bounds(spec, n, rho).ok().map(|a| a.law),
    }
}

fn tail_bounds(spec: &DistributionSpec, n: u64, rho: f64) -> Option<TailMassBounds> {
    match *spec {
        DistributionSpec::Exp { .. } => exp_tail_bounds(n, rho).ok(),
        DistributionSpec::Pareto { beta, .. } => pareto_tail_bounds(n, rho, beta).ok(),
        _ => None,
    }
}

/// Theory for the mean and the variance of each statistic at sample size `n`.
fn overlays(
    plan: &ExperimentPlan,
    stats: &[Statistic],
    n: u64,
    config: &SketchConfig,
) -> Vec<(TheoryOverlay, TheoryOverlay)> {
    let spec = &plan.spec;
    let rho = config.rho();
    let none = TheoryOverlay::default();
    stats
        .iter()
        .map(|stat| match (stat, spec) {
            (Statistic::SizeLog, DistributionSpec::Exp { .. }) => {
                let Ok(b) = exp_size_moment_bounds(n, rho) else {
                    return (none, none);
                };
                let gumbel = exp_size_gumbel(n, rho).ok();
                let mean = TheoryOverlay {
                    value: gumbel.map(|g| g.mean),
                    ..bounds(b.mean)
                };
                let variance = TheoryOverlay {
                    lower: Some(b.variance_lower_floored),
                    value: gumbel.map(|g| g.variance),
                    upper: Some(b.variance.upper),
                };
                (mean, variance)
            }
            (Statistic::SizeLog | Statistic::Anchored, DistributionSpec::Pareto { beta, .. }) => {
                let variant = if *stat == Statistic::SizeLog {
                    SizeVariant::Max
                } else {
                    SizeVariant::Anchored
                };
                match pareto_size_moments(n, rho, *beta, variant) {
                    Ok(m) => (point(m.mean), point(m.variance)),
                    Err(_) => (none, none),
                }
            }
            (Statistic::LastBinMass | Statistic::TailMass | Statistic::QMax, _) => {
                let Some(t) = tail_bounds(spec, n, rho) else {
                    return (none, none);
                };
                let mean = match stat {
                    Statistic::LastBinMass => TheoryOverlay {
                        upper: Some(t.p_last_upper),
                        ..none
                    },
                    Statistic::TailMass => TheoryOverlay {
                        lower: Some(t.p_tail_lower),
                        value: None,
                        upper: Some(t.p_tail_upper),
                    },
                    _ => TheoryOverlay {
                        lower: Some(1.0 - t.p_tail_upper),
                        value: None,
                        upper: Some(t.q_max_upper),
                    },
                };
                (mean, none)
            }
            (Statistic::Occupancy, _) => match occupancy_law(spec, n, rho) {
                Some(law) => (point(law.expected_occupancy), bounds(law.variance_bound)),
                None => (none, none),
            },
            (Statistic::Empty, _) => match occupancy_law(spec, n, rho) {
                Some(law) => (
                    TheoryOverlay {
                        upper: Some(law.empty_bins_bound),
                        ..none
                    },
                    none,
                ),
                None => (none, none),
            },
            (Statistic::LongestGap, _) => match gap_law(spec, n, rho) {
                Some(law) => (bounds(law.mean_bounds), bounds(law.variance_bounds)),
                None => (none, none),
            },
            (Statistic::Covered, _) => (
                TheoryOverlay {
                    lower: Some(1.0 - plan.alpha),
                    ..none
                },
                none,
            ),
            (Statistic::MaxRelError, _) => (
                TheoryOverlay {
                    upper: Some(plan.epsilon),
                    ..none
                },
                none,
            ),
            _ => (none, none),
        })
        .collect()
}

fn summarize(
    n: u64,
    statistic: Statistic,
    values: &[f64],
    theory: (TheoryOverlay, TheoryOverlay),
) -> Summary {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Summary {
        n,
        statistic,
        moments: empirical_moments(values).ok(),
        quantiles: SUMMARY_LEVELS
            .iter()
            .map(|&q| (q, sorted[lower_rank(sorted.len(), q) - 1]))
            .collect(),
        theory_mean: theory.0,
        theory_variance: theory.1,
    }
}

/// Runs every replication of `plan`. The report is a pure function of the plan.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport, SimulationError> {
    let config = validate(plan)?;
    let sampler = Sampler::new(plan.spec)?;
    let ctx = Context {
        plan: plan.clone(),
        config: config.clone(),
        sampler,
        binning: binning(&plan.spec, &config, &sampler),
    };
    let stats = statistics(plan);
    let jobs: Vec<(u64, u64)> = plan
        .n_grid
        .iter()
        .flat_map(|&n| (0..plan.reps).map(move |rep| (n, rep)))
        .collect();
    let results: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(n, rep)| ctx.replicate(n, rep))
        .collect::<Result<_, _>>()?;

    let mut observations = Vec::with_capacity(results.len() * stats.len());
    let mut summaries = Vec::new();
    for (g, &n) in plan.n_grid.iter().enumerate() {
        let theory = overlays(plan, &stats, n, &config);
        let block = &results[g * plan.reps as usize..(g + 1) * plan.reps as usize];
        for (rep, values) in block.iter().enumerate() {
            for (i, &statistic) in stats.iter().enumerate() {
                observations.push(Observation {
                    n,
                    rep: rep as u64,
                    statistic,
                    value: values[i],
                    theory: theory[i].0,
                });
            }
        }
        for (i, &statistic) in stats.iter().enumerate() {
            let column: Vec<f64> = block.iter().map(|v| v[i]).collect();
            summaries.push(summarize(n, statistic, &column, theory[i]));
        }
    }
    Ok(ExperimentReport {
        plan: plan.clone(),
        observations,
        summaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 0.01;

    fn plan(kind: ExperimentKind, spec: DistributionSpec, n: u64, reps: u64) -> ExperimentPlan {
        ExperimentPlan::new(kind, spec, vec![n], reps, EPS, 11)
    }

    #[test]
    fn tally_matches_sorted_dedup() {
        let ks = [5i64, -3, 17, 5, -40, 2, 100, -41];
        let mut t = IndexTally::default();
        for &k in &ks {
            t.insert(k);
        }
        let mut sorted = ks.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(
            t.stats(),
            SideStats::from_sorted_indices(sorted.iter().copied())
        );
    }

    #[test]
    fn rejects_bad_plans() {
        let exp = DistributionSpec::Exp { lambda: 1.0 };
        let mut p = plan(ExperimentKind::Size, exp, 10, 0);
        assert!(run_experiment(&p).is_err());
        p.reps = 2;
        p.n_grid = vec![1];
        assert!(run_experiment(&p).is_err());
        let g = DistributionSpec::Gumbel {
            mu: 0.0,
            sigma: 1.0,
        };
        assert!(run_experiment(&plan(ExperimentKind::Occupancy, g, 10, 2)).is_err());
        let f0 = DistributionSpec::F0 {
            lambda: 1.0,
            rho: 2.0,
        };
        assert!(run_experiment(&plan(ExperimentKind::Occupancy, f0, 10, 2)).is_err());
    }

    #[test]
    fn accuracy_within_epsilon() {
        for spec in [
            DistributionSpec::Exp { lambda: 1.0 },
            DistributionSpec::Gumbel {
                mu: 0.0,
                sigma: 1.0,
            },
        ] {
            let r = run_experiment(&plan(ExperimentKind::Accuracy, spec, 500, 5)).unwrap();
            assert!(r
                .values(500, Statistic::MaxRelError)
                .iter()
                .all(|&e| e <= EPS));
        }
    }

    #[test]
    fn size_agrees_with_sketch() {
        let spec = DistributionSpec::Pareto { nu: 1.0, beta: 1.0 };
        let p = plan(ExperimentKind::Size, spec, 300, 3);
        let r = run_experiment(&p).unwrap();
        let sizes = r.values(300, Statistic::Size);
        for rep in 0..3 {
            let mut rng = replication_rng(p.master_seed, 300, rep);
            let s = Sampler::new(spec).unwrap();
            let mut sketch = ExponentialHistogram::new(EPS).unwrap();
            for _ in 0..300 {
                sketch.insert(s.draw(&mut rng)).unwrap();
            }
            let side = sketch.structural_stats().positive.unwrap();
            assert_eq!(sizes[rep as usize], side.size as f64);
        }
    }

    #[test]
    fn occupancy_agrees_with_sketch() {
        let spec = DistributionSpec::Exp { lambda: 1.0 };
        let p = plan(ExperimentKind::Occupancy, spec, 2000, 2);
        let r = run_experiment(&p).unwrap();
        let mut rng = replication_rng(p.master_seed, 2000, 1);
        let s = Sampler::new(spec).unwrap();
        let mut sketch = ExponentialHistogram::new(EPS).unwrap();
        for _ in 0..2000 {
            sketch.insert(s.draw(&mut rng)).unwrap();
        }
        let side = sketch.structural_stats().positive.unwrap();
        assert_eq!(
            r.values(2000, Statistic::Occupancy)[1],
            side.occupancy as f64
        );
        assert_eq!(r.values(2000, Statistic::Empty)[1], side.empty as f64);
    }

    #[test]
    fn summaries_cover_grid() {
        let spec = DistributionSpec::Geometric { p: 0.1 };
        let mut p = plan(ExperimentKind::Gap, spec, 100, 4);
        p.n_grid = vec![10, 100];
        let r = run_experiment(&p).unwrap();
        assert_eq!(r.observations.len(), 8);
        assert_eq!(r.summaries.len(), 2);
        let s = r.summary(100, Statistic::LongestGap).unwrap();
        assert!(s.theory_mean.lower.is_some() && s.moments.is_some());
    }
}
