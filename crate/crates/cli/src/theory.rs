//! The `theory` subcommand: closed-form values as `key=value` lines.

use std::fmt::Write;

use clap::{Args, ValueEnum};
use exphist::theory::{
    self, applied_gap_bounds, exp_occupancy, exp_occupancy_mixture, exp_size_cdf, exp_size_gumbel,
    exp_size_moment_bounds, exp_size_quantile, exp_size_quantile_approx, exp_split,
    exp_tail_bounds, f0_occupancy, f1_occupancy, geometric_gap_bounds, geometric_occupancy,
    pareto_occupancy, pareto_size_gumbel, pareto_size_law, pareto_size_moments, pareto_tail_bounds,
    DistributionSpec, GapLaw, GapQualifier, GumbelApprox, OccupancyLaw, SizeVariant, TheoryError,
    MIXTURE_MAX_N,
};

use crate::error::{usage, validation, CliError};
use crate::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Selector {
    SizeCdf,
    SizeQuantile,
    SizeMoments,
    SizeGumbel,
    TailBounds,
    Occupancy,
    EmptyBins,
    GapBounds,
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// Span from the smallest to the largest value.
    Max,
    /// Span from the Pareto location to the largest value.
    Anchored,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// Quantity to evaluate.
    #[arg(long, value_enum)]
    pub what: Selector,
    /// Input distribution, e.g. exp:1 or pareto:1:1.
    #[arg(long)]
    pub dist: String,
    /// Sketch accuracy; sets the bin ratio ρ = (1+ε)/(1−ε).
    #[arg(long, default_value = "0.01")]
    pub epsilon: String,
    /// Sample size. Gap bounds without it are the large-n limits.
    #[arg(long, value_parser = parse::count)]
    pub n: Option<u64>,
    /// Size at which to evaluate size-cdf.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Level for size-quantile.
    #[arg(long)]
    pub q: Option<f64>,
    /// Gap length for the gap CDF bounds.
    #[arg(long, value_parser = parse::count)]
    pub l: Option<u64>,
    /// Size variant for Pareto input.
    #[arg(long, value_enum, default_value = "max")]
    pub variant: Variant,
}

struct Lines(String);

impl Lines {
    fn num(&mut self, key: &str, v: f64) {
        writeln!(self.0, "{key}={v:?}").unwrap();
    }

    fn text(&mut self, key: &str, v: &str) {
        writeln!(self.0, "{key}={v}").unwrap();
    }
}

fn theory_err(e: TheoryError) -> CliError {
    validation(e)
}

fn need<T>(v: Option<T>, flag: &str, what: Selector) -> Result<T, CliError> {
    v.ok_or_else(|| usage(format!("--{flag} is required for {what:?}")))
}

fn unsupported(what: Selector, spec: &DistributionSpec) -> CliError {
    usage(format!("{what:?} is not available for {spec}"))
}

fn gumbel(out: &mut Lines, g: &GumbelApprox) {
    out.num("mu", g.mu);
    out.num("sigma", g.sigma);
    out.num("mean", g.mean);
    out.num("variance", g.variance);
    out.num("skewness", g.skewness);
    out.text("qualifier", "asymptotic");
}

fn occupancy_lines(out: &mut Lines, prefix: &str, law: &OccupancyLaw) {
    out.num(
        &format!("{prefix}expected_occupancy"),
        law.expected_occupancy,
    );
    out.num(&format!("{prefix}variance_lower"), law.variance_bound.lower);
    out.num(&format!("{prefix}variance_upper"), law.variance_bound.upper);
    out.text(
        &format!("{prefix}variance_is_limit"),
        &law.variance_is_limit.to_string(),
    );
    out.num(&format!("{prefix}empty_bins_upper"), law.empty_bins_bound);
}

fn occupancy_law(
    spec: &DistributionSpec,
    n: u64,
    rho: f64,
    what: Selector,
) -> Result<OccupancyLaw, CliError> {
    match *spec {
        DistributionSpec::Pareto { beta, .. } => pareto_occupancy(n, rho, beta),
        DistributionSpec::Geometric { p } => geometric_occupancy(n, p),
        DistributionSpec::F0 { rho, .. } => f0_occupancy(n, rho),
        DistributionSpec::F1 { rho, .. } => f1_occupancy(n, rho),
        _ => return Err(unsupported(what, spec)),
    }
    .map_err(theory_err)
}

fn gap_lines(out: &mut Lines, law: &GapLaw, l: Option<u64>) -> Result<(), CliError> {
    out.num("mean_lower", law.mean_bounds.lower);
    out.num("mean_upper", law.mean_bounds.upper);
    out.num("second_moment_lower", law.second_moment_bounds.lower);
    out.num("second_moment_upper", law.second_moment_bounds.upper);
    out.num("variance_lower", law.variance_bounds.lower);
    out.num("variance_upper", law.variance_bounds.upper);
    if let Some(l) = l {
        out.num("cdf_lower", law.cdf_lower(l).map_err(theory_err)?);
        out.num("cdf_upper", law.cdf_upper(l).map_err(theory_err)?);
    }
    Ok(())
}

/// Default n for quantities whose bound does not depend on it.
const LARGE_N: u64 = 1_000_000;

pub fn run(args: &TheoryArgs) -> Result<String, CliError> {
    let config = parse::epsilon(&args.epsilon)?;
    let rho = config.rho();
    let spec = parse::distribution(&args.dist, &config)?;
    let what = args.what;
    let variant = match args.variant {
        Variant::Max => SizeVariant::Max,
        Variant::Anchored => SizeVariant::Anchored,
    };
    let mut out = Lines(String::new());
    out.num("rho", rho);
    let e = theory_err;
    match (what, spec) {
        (Selector::SizeCdf, DistributionSpec::Exp { .. }) => {
            let (n, mu) = (need(args.n, "n", what)?, need(args.mu, "mu", what)?);
            out.num("cdf", exp_size_cdf(n, rho, mu).map_err(e)?);
            out.num("pdf", theory::exp_size_pdf(n, rho, mu).map_err(e)?);
            out.text("qualifier", "exact");
        }
        (Selector::SizeCdf, DistributionSpec::Pareto { beta, .. }) => {
            let (n, mu) = (need(args.n, "n", what)?, need(args.mu, "mu", what)?);
            let law = pareto_size_law(n, rho, beta, variant).map_err(e)?;
            out.num("cdf", law.cdf(mu));
            out.num("pdf", law.pdf(mu));
            out.text("qualifier", "exact");
        }
        (Selector::SizeQuantile, DistributionSpec::Exp { .. }) => {
            let (n, q) = (need(args.n, "n", what)?, need(args.q, "q", what)?);
            out.num("quantile", exp_size_quantile(n, rho, q).map_err(e)?);
            let a = exp_size_quantile_approx(n, rho, q).map_err(e)?;
            out.num("quantile_approx", a.primary);
            out.num("quantile_approx_summary", a.summary);
        }
        (Selector::SizeQuantile, DistributionSpec::Pareto { beta, .. }) => {
            let (n, q) = (need(args.n, "n", what)?, need(args.q, "q", what)?);
            let law = pareto_size_law(n, rho, beta, variant).map_err(e)?;
            out.num("quantile", law.quantile(q).map_err(e)?);
            out.num(
                "quantile_asymptotic",
                law.quantile_asymptotic(q).map_err(e)?,
            );
        }
        (Selector::SizeMoments, DistributionSpec::Exp { .. }) => {
            let b = exp_size_moment_bounds(need(args.n, "n", what)?, rho).map_err(e)?;
            out.num("mean_lower", b.mean.lower);
            out.num("mean_upper", b.mean.upper);
            out.num("variance_lower", b.variance.lower);
            out.num("variance_lower_floored", b.variance_lower_floored);
            out.num("variance_upper", b.variance.upper);
            out.num("lambda1", b.lambda1);
            out.num("lambda2", b.lambda2);
            out.num("delta1", b.delta1);
            out.num("delta2", b.delta2);
            out.text("qualifier", "bounds");
        }
        (Selector::SizeMoments, DistributionSpec::Pareto { beta, .. }) => {
            let m = pareto_size_moments(need(args.n, "n", what)?, rho, beta, variant).map_err(e)?;
            out.num("mean", m.mean);
            out.num("variance", m.variance);
            out.num("skewness", m.skewness);
            out.text("qualifier", "exact");
        }
        (Selector::SizeGumbel, DistributionSpec::Exp { .. }) => {
            gumbel(
                &mut out,
                &exp_size_gumbel(need(args.n, "n", what)?, rho).map_err(e)?,
            );
        }
        (Selector::SizeGumbel, DistributionSpec::Pareto { beta, .. }) => {
            let n = need(args.n, "n", what)?;
            gumbel(
                &mut out,
                &pareto_size_gumbel(n, rho, beta, variant).map_err(e)?,
            );
        }
        (Selector::TailBounds, DistributionSpec::Exp { .. } | DistributionSpec::Pareto { .. }) => {
            let n = need(args.n, "n", what)?;
            let t = match spec {
                DistributionSpec::Pareto { beta, .. } => pareto_tail_bounds(n, rho, beta),
                _ => exp_tail_bounds(n, rho),
            }
            .map_err(e)?;
            out.num("p_last_upper", t.p_last_upper);
            out.num("p_tail_lower", t.p_tail_lower);
            out.num("p_tail_upper", t.p_tail_upper);
            out.num("q_max_upper", t.q_max_upper);
        }
        (Selector::Occupancy, DistributionSpec::Exp { lambda }) => {
            let n = need(args.n, "n", what)?;
            let o = exp_occupancy(n, lambda, rho).map_err(e)?;
            occupancy_lines(&mut out, "", &o.law);
            out.num("n0", o.n0);
            out.num("n1", o.n1);
            occupancy_lines(&mut out, "below_", &o.below);
            occupancy_lines(&mut out, "above_", &o.above);
            if n <= MIXTURE_MAX_N {
                let mix = exp_occupancy_mixture(n, lambda, rho).map_err(e)?;
                out.num("split_aligned_expected_occupancy", mix);
            }
            out.text("qualifier", "asymptotic");
        }
        (Selector::Occupancy, _) => {
            let law = occupancy_law(&spec, need(args.n, "n", what)?, rho, what)?;
            occupancy_lines(&mut out, "", &law);
            out.text("qualifier", "asymptotic");
        }
        (Selector::EmptyBins, DistributionSpec::Exp { lambda }) => {
            let o = exp_occupancy(args.n.unwrap_or(LARGE_N), lambda, rho).map_err(e)?;
            out.num("empty_bins_upper", o.law.empty_bins_bound);
            out.num("below_empty_bins_upper", o.below.empty_bins_bound);
            out.num("above_empty_bins_upper", o.above.empty_bins_bound);
            out.text("qualifier", "asymptotic upper");
        }
        (Selector::EmptyBins, _) => {
            let law = occupancy_law(&spec, args.n.unwrap_or(LARGE_N), rho, what)?;
            out.num("empty_bins_upper", law.empty_bins_bound);
            out.text("qualifier", "asymptotic upper");
        }
        (Selector::GapBounds, DistributionSpec::Geometric { p }) => {
            let law = geometric_gap_bounds(args.n.unwrap_or(u64::MAX), p).map_err(e)?;
            gap_lines(&mut out, &law, args.l)?;
            out.text("qualifier", "proven");
        }
        (
            Selector::GapBounds,
            DistributionSpec::F0 { .. }
            | DistributionSpec::F1 { .. }
            | DistributionSpec::Pareto { .. },
        ) => {
            let applied = applied_gap_bounds(&spec, args.n.unwrap_or(u64::MAX), rho).map_err(e)?;
            if args.n.is_some() {
                gap_lines(&mut out, &applied.law, args.l)?;
            } else {
                out.num("mean_lower", applied.limit_mean.lower);
                out.num("mean_upper", applied.limit_mean.upper);
                out.num("variance_lower", applied.limit_variance.lower);
                out.num("variance_upper", applied.limit_variance.upper);
            }
            let q = match applied.qualifier {
                GapQualifier::Proven => "proven",
                GapQualifier::Conjectured => "conjectured",
                GapQualifier::AlmostSureZero => "almost sure zero",
            };
            out.text("qualifier", q);
        }
        (Selector::Split, DistributionSpec::Exp { lambda }) => {
            let s = exp_split(lambda, rho).map_err(e)?;
            out.num("kappa", s.kappa);
            out.num("p0", s.p0);
            out.num("cutoff", s.cutoff);
        }
        _ => return Err(unsupported(what, &spec)),
    }
    Ok(out.0)
}
