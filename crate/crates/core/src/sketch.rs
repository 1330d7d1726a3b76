//! The exponential-histogram sketch.
//!
//! Positive inputs are counted in bins `(ρ^{k−1}, ρ^k]` with
//! `ρ = (1+ε)/(1−ε)`, negative inputs in the same bins of `|x|`, and zeros in
//! a separate counter. Reporting the midpoint `2ρ^k/(ρ+1)` of the bin holding
//! a requested order statistic keeps the relative error at most ε.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SketchError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("value {0} outside the domain")]
    Domain(f64),
    #[error("incompatible sketches: epsilon {left} vs {right}")]
    Incompatible { left: String, right: String },
    #[error("sketch is empty")]
    Empty,
    #[error("sketch holds no {0} values")]
    AbsentSide(Sign),
    #[error("count overflow")]
    CountOverflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
        })
    }
}

/// Accuracy parameter and the bin ratio derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchConfig {
    epsilon: f64,
    epsilon_text: String,
    rho: f64,
    log_rho: f64,
}

impl SketchConfig {
    pub fn new(epsilon: f64) -> Result<Self, SketchError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(SketchError::InvalidConfig(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        let rho = (1.0 + epsilon) / (1.0 - epsilon);
        let log_rho = (2.0 * epsilon / (1.0 - epsilon)).ln_1p();
        if !(rho > 1.0 && rho.is_finite() && log_rho > 0.0) {
            return Err(SketchError::InvalidConfig(format!(
                "epsilon {epsilon} gives a degenerate bin ratio"
            )));
        }
        Ok(Self {
            epsilon,
            epsilon_text: format!("{epsilon}"),
            rho,
            log_rho,
        })
    }

    /// Parses a decimal epsilon such as `"0.01"`.
    pub fn from_decimal(text: &str) -> Result<Self, SketchError> {
        let epsilon: f64 = text
            .trim()
            .parse()
            .map_err(|_| SketchError::InvalidConfig(format!("cannot parse epsilon {text:?}")))?;
        Self::new(epsilon)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Canonical decimal form of epsilon, used for compatibility checks and files.
    pub fn epsilon_text(&self) -> &str {
        &self.epsilon_text
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn log_rho(&self) -> f64 {
        self.log_rho
    }

    /// Upper edge `ρ^k` of bin `k`.
    pub fn bin_upper(&self, k: i64) -> f64 {
        self.rho.powf(k as f64)
    }

    /// Midpoint estimate `2ρ^k/(ρ+1)` for bin `k`.
    pub fn bin_midpoint(&self, k: i64) -> f64 {
        2.0 * self.bin_upper(k) / (self.rho + 1.0)
    }

    /// Index `k` with `ρ^{k−1} < x ≤ ρ^k`.
    pub fn bin_index(&self, x: f64) -> Result<i64, SketchError> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(SketchError::Domain(x));
        }
        Ok(self.bin_index_unchecked(x))
    }

    fn bin_index_unchecked(&self, x: f64) -> i64 {
        let t = x.ln() / self.log_rho;
        let mut k = t.ceil() as i64;
        // Far from a boundary the ceiling is already correct.
        let slack = 1e-9 * (1.0 + t.abs());
        if (t - t.round()).abs() > slack {
            return k;
        }
        while self.bin_upper(k - 1) >= x {
            k -= 1;
        }
        while self.bin_upper(k) < x {
            k += 1;
        }
        k
    }
}

/// A point on the global ordering at which cumulative counts are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinBoundary {
    /// Values strictly below `−ρ^{k−1}`, i.e. negative bins with index `≥ k`.
    Negative(i64),
    /// Values `≤ 0`.
    Zero,
    /// Values `≤ ρ^k`.
    Positive(i64),
}

/// Where a quantile estimate was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantileBin {
    Negative(i64),
    Zero,
    Positive(i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileEstimate {
    pub q: f64,
    pub rank: u64,
    pub bin: QuantileBin,
    pub value: f64,
}

/// Structure of the occupied bins on one side of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SideStats {
    pub min_index: i64,
    pub max_index: i64,
    pub size: u64,
    pub occupancy: u64,
    pub empty: u64,
    pub longest_gap: u64,
}

impl SideStats {
    /// Computes the statistics of a strictly increasing sequence of bin indices.
    pub fn from_sorted_indices<I: IntoIterator<Item = i64>>(indices: I) -> Option<Self> {
        let mut iter = indices.into_iter();
        let first = iter.next()?;
        let mut prev = first;
        let mut occupancy = 1u64;
        let mut longest_gap = 0u64;
        for k in iter {
            debug_assert!(k > prev);
            longest_gap = longest_gap.max((k - prev - 1) as u64);
            occupancy += 1;
            prev = k;
        }
        let size = (prev - first) as u64 + 1;
        Some(Self {
            min_index: first,
            max_index: prev,
            size,
            occupancy,
            empty: size - occupancy,
            longest_gap,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuralStats {
    pub n: u64,
    pub zero_count: u64,
    pub positive: Option<SideStats>,
    pub negative: Option<SideStats>,
}

impl StructuralStats {
    pub fn side(&self, sign: Sign) -> Result<SideStats, SketchError> {
        match sign {
            Sign::Positive => self.positive,
            Sign::Negative => self.negative,
        }
        .ok_or(SketchError::AbsentSide(sign))
    }

    /// Sizes, occupancies and empty counts summed over both signs; the
    /// longest gap is the larger of the two.
    pub fn combined(&self) -> Option<SideStats> {
        match (self.positive, self.negative) {
            (None, None) => None,
            (Some(s), None) | (None, Some(s)) => Some(s),
            (Some(p), Some(n)) => Some(SideStats {
                min_index: p.min_index.min(n.min_index),
                max_index: p.max_index.max(n.max_index),
                size: p.size + n.size,
                occupancy: p.occupancy + n.occupancy,
                empty: p.empty + n.empty,
                longest_gap: p.longest_gap.max(n.longest_gap),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DkwEntry {
    pub boundary: BinBoundary,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DkwBand {
    pub alpha: f64,
    pub half_width: f64,
    pub entries: Vec<DkwEntry>,
}

/// Half-width `sqrt(ln(2/α)/(2n))` of a DKW confidence band.
pub fn dkw_half_width(n: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialHistogram {
    config: SketchConfig,
    pos: BTreeMap<i64, u64>,
    neg: BTreeMap<i64, u64>,
    zero_count: u64,
    n_total: u64,
}

impl ExponentialHistogram {
    pub fn new(epsilon: f64) -> Result<Self, SketchError> {
        Ok(Self::with_config(SketchConfig::new(epsilon)?))
    }

    pub fn with_config(config: SketchConfig) -> Self {
        Self {
            config,
            pos: BTreeMap::new(),
            neg: BTreeMap::new(),
            zero_count: 0,
            n_total: 0,
        }
    }

    /// Assembles a sketch from raw parts, checking every invariant.
    pub fn from_parts(
        config: SketchConfig,
        pos: BTreeMap<i64, u64>,
        neg: BTreeMap<i64, u64>,
        zero_count: u64,
        n_total: u64,
    ) -> Result<Self, SketchError> {
        let mut total = zero_count;
        for &count in pos.values().chain(neg.values()) {
            if count == 0 {
                return Err(SketchError::InvalidConfig(
                    "stored bin count is zero".into(),
                ));
            }
            total = total.checked_add(count).ok_or(SketchError::CountOverflow)?;
        }
        if total != n_total {
            return Err(SketchError::InvalidConfig(format!(
                "n_total {n_total} does not equal the sum of counts {total}"
            )));
        }
        Ok(Self {
            config,
            pos,
            neg,
            zero_count,
            n_total,
        })
    }

    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    pub fn positive_bins(&self) -> &BTreeMap<i64, u64> {
        &self.pos
    }

    pub fn negative_bins(&self) -> &BTreeMap<i64, u64> {
        &self.neg
    }

    pub fn zero_count(&self) -> u64 {
        self.zero_count
    }

    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn is_empty(&self) -> bool {
        self.n_total == 0
    }

    pub fn insert(&mut self, x: f64) -> Result<(), SketchError> {
        if !x.is_finite() {
            return Err(SketchError::Domain(x));
        }
        let n_total = self
            .n_total
            .checked_add(1)
            .ok_or(SketchError::CountOverflow)?;
        if x == 0.0 {
            self.zero_count += 1;
        } else {
            let (map, k) = if x > 0.0 {
                (&mut self.pos, self.config.bin_index_unchecked(x))
            } else {
                (&mut self.neg, self.config.bin_index_unchecked(-x))
            };
            *map.entry(k).or_insert(0) += 1;
        }
        self.n_total = n_total;
        Ok(())
    }

    /// Adds every count of `other` into `self`.
    pub fn merge_from(&mut self, other: &Self) -> Result<(), SketchError> {
        if self.config.epsilon_text != other.config.epsilon_text {
            return Err(SketchError::Incompatible {
                left: self.config.epsilon_text.clone(),
                right: other.config.epsilon_text.clone(),
            });
        }
        let n_total = self
            .n_total
            .checked_add(other.n_total)
            .ok_or(SketchError::CountOverflow)?;
        for (map, src) in [(&mut self.pos, &other.pos), (&mut self.neg, &other.neg)] {
            for (&k, &c) in src {
                let slot = map.entry(k).or_insert(0);
                *slot = slot.checked_add(c).ok_or(SketchError::CountOverflow)?;
            }
        }
        self.zero_count += other.zero_count;
        self.n_total = n_total;
        Ok(())
    }

    /// Returns the bin-wise sum of two sketches with the same epsilon.
    pub fn merge(a: &Self, b: &Self) -> Result<Self, SketchError> {
        let mut out = a.clone();
        out.merge_from(b)?;
        Ok(out)
    }

    fn negative_total(&self) -> u64 {
        self.neg.values().sum()
    }

    /// Number of values at or below a boundary of the global ordering.
    pub fn count_at(&self, boundary: BinBoundary) -> u64 {
        match boundary {
            BinBoundary::Negative(k) => self.neg.range(k..).map(|(_, c)| c).sum(),
            BinBoundary::Zero => self.negative_total() + self.zero_count,
            BinBoundary::Positive(k) => {
                self.negative_total()
                    + self.zero_count
                    + self.pos.range(..=k).map(|(_, c)| c).sum::<u64>()
            }
        }
    }

    /// Fraction of values at or below a boundary of the global ordering.
    pub fn cdf_at(&self, boundary: BinBoundary) -> Result<f64, SketchError> {
        if self.is_empty() {
            return Err(SketchError::Empty);
        }
        Ok(self.count_at(boundary) as f64 / self.n_total as f64)
    }

    /// Fraction of values `≤ ρ^k`.
    pub fn rank_cdf(&self, k: i64) -> Result<f64, SketchError> {
        self.cdf_at(BinBoundary::Positive(k))
    }

    pub fn quantile(&self, q: f64) -> Result<QuantileEstimate, SketchError> {
        if !(0.0..=1.0).contains(&q) {
            return Err(SketchError::Domain(q));
        }
        if self.is_empty() {
            return Err(SketchError::Empty);
        }
        let rank = ((1.0 + (self.n_total - 1) as f64 * q).floor() as u64).clamp(1, self.n_total);
        let mut seen = 0u64;
        for (&k, &c) in self.neg.iter().rev() {
            seen += c;
            if seen >= rank {
                return Ok(QuantileEstimate {
                    q,
                    rank,
                    bin: QuantileBin::Negative(k),
                    value: -self.config.bin_midpoint(k),
                });
            }
        }
        seen += self.zero_count;
        if seen >= rank {
            return Ok(QuantileEstimate {
                q,
                rank,
                bin: QuantileBin::Zero,
                value: 0.0,
            });
        }
        for (&k, &c) in &self.pos {
            seen += c;
            if seen >= rank {
                return Ok(QuantileEstimate {
                    q,
                    rank,
                    bin: QuantileBin::Positive(k),
                    value: self.config.bin_midpoint(k),
                });
            }
        }
        unreachable!("counts sum to n_total")
    }

    pub fn structural_stats(&self) -> StructuralStats {
        StructuralStats {
            n: self.n_total,
            zero_count: self.zero_count,
            positive: SideStats::from_sorted_indices(self.pos.keys().copied()),
            negative: SideStats::from_sorted_indices(self.neg.keys().copied()),
        }
    }

    /// DKW confidence band at every boundary between the extreme occupied bins.
    pub fn dkw_bands(&self, alpha: f64) -> Result<DkwBand, SketchError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(SketchError::Domain(alpha));
        }
        if self.is_empty() {
            return Err(SketchError::Empty);
        }
        let n = self.n_total as f64;
        let half_width = dkw_half_width(self.n_total, alpha);
        let band = |boundary: BinBoundary, count: u64| {
            let f = count as f64 / n;
            DkwEntry {
                boundary,
                lower: (f - half_width).max(0.0),
                upper: (f + half_width).min(1.0),
            }
        };
        let mut entries = Vec::new();
        let mut count = 0u64;
        if let (Some(&lo), Some(&hi)) = (self.neg.keys().next(), self.neg.keys().next_back()) {
            for k in (lo..=hi).rev() {
                count += self.neg.get(&k).copied().unwrap_or(0);
                entries.push(band(BinBoundary::Negative(k), count));
            }
        }
        if !self.neg.is_empty() || self.zero_count > 0 {
            count += self.zero_count;
            entries.push(band(BinBoundary::Zero, count));
        }
        if let (Some(&lo), Some(&hi)) = (self.pos.keys().next(), self.pos.keys().next_back()) {
            for k in lo..=hi {
                count += self.pos.get(&k).copied().unwrap_or(0);
                entries.push(band(BinBoundary::Positive(k), count));
            }
        }
        Ok(DkwBand {
            alpha,
            half_width,
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sketch_of(epsilon: f64, xs: &[f64]) -> ExponentialHistogram {
        let mut s = ExponentialHistogram::new(epsilon).unwrap();
        for &x in xs {
            s.insert(x).unwrap();
        }
        s
    }

    #[test]
    fn config_rho() {
        let c = SketchConfig::new(0.01).unwrap();
        assert!((c.rho() - 101.0 / 99.0).abs() < 1e-15);
        // ρ carries one rounding error, which (ρ−1)/(ρ+1) scales by 1/(ρ+1).
        assert!(((c.rho() - 1.0) / (c.rho() + 1.0) - 0.01).abs() <= 2.0 * f64::EPSILON);
        assert_eq!(SketchConfig::new(0.5).unwrap().rho(), 3.0);
        assert!(SketchConfig::new(1.0).is_err());
        assert!(SketchConfig::new(0.0).is_err());
        assert!(SketchConfig::new(f64::NAN).is_err());
        assert_eq!(SketchConfig::new(0.01).unwrap().epsilon_text(), "0.01");
    }

    #[test]
    fn bin_index_edges() {
        let c = SketchConfig::new(0.01).unwrap();
        assert_eq!(c.bin_index(1.0).unwrap(), 0);
        assert_eq!(c.bin_index(c.bin_upper(1)).unwrap(), 1);
        assert_eq!(c.bin_index(c.bin_upper(-7)).unwrap(), -7);
        assert!(c.bin_index(0.0).is_err());
        assert!(c.bin_index(-1.0).is_err());
        assert!(c.bin_index(f64::INFINITY).is_err());
        let c3 = SketchConfig::new(0.5).unwrap();
        assert_eq!(c3.bin_index(1.0).unwrap(), 0);
        assert_eq!(c3.bin_index(2.0).unwrap(), 1);
        assert_eq!(c3.bin_index(3.0).unwrap(), 1);
        assert_eq!(c3.bin_index(f64::MIN_POSITIVE).unwrap(), -644);
    }

    #[test]
    fn insert_and_zero() {
        let mut s = ExponentialHistogram::new(0.01).unwrap();
        s.insert(5.0).unwrap();
        assert_eq!(s.n_total(), 1);
        assert_eq!(s.positive_bins().len(), 1);
        s.insert(0.0).unwrap();
        assert_eq!(s.zero_count(), 1);
        assert_eq!(s.positive_bins().len(), 1);
        let before = s.clone();
        assert!(s.insert(f64::NAN).is_err());
        assert_eq!(s, before);
    }

    #[test]
    fn quantile_single_value() {
        let s = sketch_of(0.01, &[5.0]);
        let v = s.quantile(0.5).unwrap().value;
        assert!((v - 5.0).abs() <= 0.01 * 5.0);
        assert!(s.quantile(1.5).is_err());
        assert_eq!(
            ExponentialHistogram::new(0.01).unwrap().quantile(0.5),
            Err(SketchError::Empty)
        );
    }

    #[test]
    fn quantile_endpoints_and_signs() {
        let s = sketch_of(0.1, &[-8.0, -1.0, 0.0, 0.0, 2.0, 30.0]);
        let c = s.config().clone();
        let q0 = s.quantile(0.0).unwrap();
        assert_eq!(q0.rank, 1);
        assert_eq!(q0.value, -c.bin_midpoint(c.bin_index(8.0).unwrap()));
        let q1 = s.quantile(1.0).unwrap();
        assert_eq!(q1.rank, 6);
        assert_eq!(q1.value, c.bin_midpoint(c.bin_index(30.0).unwrap()));
        let mid = s.quantile(0.5).unwrap();
        assert_eq!(mid.rank, 3);
        assert_eq!(mid.bin, QuantileBin::Zero);
        assert_eq!(mid.value, 0.0);
    }

    #[test]
    fn rank_cdf_counts() {
        let s = sketch_of(0.5, &[-2.0, 0.0, 1.0, 2.0, 3.0, 10.0]);
        assert_eq!(s.rank_cdf(0).unwrap(), 3.0 / 6.0);
        assert_eq!(s.rank_cdf(1).unwrap(), 5.0 / 6.0);
        assert_eq!(s.rank_cdf(3).unwrap(), 1.0);
        assert_eq!(s.cdf_at(BinBoundary::Zero).unwrap(), 2.0 / 6.0);
        assert_eq!(s.cdf_at(BinBoundary::Negative(1)).unwrap(), 1.0 / 6.0);
        assert_eq!(s.cdf_at(BinBoundary::Negative(2)).unwrap(), 0.0);
        assert!(ExponentialHistogram::new(0.5).unwrap().rank_cdf(0).is_err());
    }

    #[test]
    fn structural_counts() {
        let s = sketch_of(0.01, &[1.0]);
        let st = s.structural_stats().side(Sign::Positive).unwrap();
        assert_eq!((st.size, st.occupancy, st.longest_gap), (1, 1, 0));
        assert_eq!(
            s.structural_stats().side(Sign::Negative),
            Err(SketchError::AbsentSide(Sign::Negative))
        );

        let st = SideStats::from_sorted_indices([0, 3, 4]).unwrap();
        assert_eq!(
            (st.size, st.occupancy, st.empty, st.longest_gap),
            (5, 3, 2, 2)
        );
        assert_eq!(SideStats::from_sorted_indices(std::iter::empty()), None);
    }

    #[test]
    fn merge_rules() {
        let a = sketch_of(0.01, &[1.0, 2.0, -3.0]);
        let empty = ExponentialHistogram::new(0.01).unwrap();
        assert_eq!(ExponentialHistogram::merge(&empty, &a).unwrap(), a);
        let b = sketch_of(0.02, &[1.0]);
        assert!(matches!(
            ExponentialHistogram::merge(&a, &b),
            Err(SketchError::Incompatible { .. })
        ));
    }

    #[test]
    fn dkw_half_width_values() {
        assert!((dkw_half_width(1000, 0.05) - (40f64.ln() / 2000.0).sqrt()).abs() < 1e-15);
        assert!((dkw_half_width(1000, 0.05) - 0.04295).abs() < 1e-5);
        let near_one = dkw_half_width(500, 1.0 - 1e-12);
        assert!((near_one - (2f64.ln() / 1000.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn dkw_band_entries() {
        let s = sketch_of(0.5, &[-2.0, 1.0, 10.0]);
        let band = s.dkw_bands(0.05).unwrap();
        assert_eq!(band.entries.len(), 1 + 1 + 4);
        for e in &band.entries {
            assert!(e.lower >= 0.0 && e.upper <= 1.0);
            assert!(e.upper - e.lower <= 2.0 * band.half_width + 1e-15);
        }
        assert!(s.dkw_bands(0.0).is_err());
        assert!(s.dkw_bands(1.0).is_err());
    }

    #[test]
    fn overflow_is_checked() {
        let cfg = SketchConfig::new(0.1).unwrap();
        let mut pos = BTreeMap::new();
        pos.insert(0, u64::MAX);
        let mut s =
            ExponentialHistogram::from_parts(cfg, pos, BTreeMap::new(), 0, u64::MAX).unwrap();
        assert_eq!(s.insert(1.0), Err(SketchError::CountOverflow));
        let t = sketch_of(0.1, &[1.0]);
        assert_eq!(s.merge_from(&t), Err(SketchError::CountOverflow));
    }
}
