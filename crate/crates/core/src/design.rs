//! Center-frequency selection, Q-factors and frequency coverage.
//!
//! Bands are indexed `b = 1..=N_b` in the formulas and stored 0-based. Center
//! frequencies are equidistant on the chosen scale between `f_min` and
//! `f_max`. Coverage of a pair of neighboring bands is half the sum of their
//! bandwidths over the distance between their centers; `1` is gap-free for
//! brick-wall filters.
//!
//! On the logarithmic scale with a constant Q-factor, and on a linear-ERB scale
//! with bandwidths proportional to the ERB, the coverage is the same for every
//! pair. [`coverage_closed_form_log`] and [`coverage_closed_form_linear_erb`]
//! give those constants directly.

use serde::Serialize;

use crate::scales::{ErbModel, ScaleFunction};
use crate::{Error, FrequencyHz, Result};

/// Largest band count [`solve_n_bands`] will consider.
pub const MAX_BANDS: usize = 4096;

/// How band bandwidths are derived from center frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BandwidthRule {
    /// `f_B = f_C / eta_b`
    ConstantQ { eta_b: f64 },
    /// `f_B = k · ERB(f_C)`
    ErbScaled { k: f64, erb: ErbModel },
}

impl BandwidthRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            BandwidthRule::ConstantQ { eta_b } => {
                if !(eta_b.is_finite() && *eta_b > 0.0) {
                    return Err(Error::invalid(format!("Q-factor must be positive, got {eta_b}")));
                }
            }
            BandwidthRule::ErbScaled { k, erb } => {
                if !(k.is_finite() && *k > 0.0) {
                    return Err(Error::invalid(format!("ERB scale factor K must be positive, got {k}")));
                }
                erb.validate()?;
            }
        }
        Ok(())
    }

    pub fn bandwidth(&self, center: FrequencyHz) -> Result<FrequencyHz> {
        match *self {
            BandwidthRule::ConstantQ { eta_b } => Ok(FrequencyHz(center.hz() / eta_b)),
            BandwidthRule::ErbScaled { k, erb } => Ok(FrequencyHz(k * erb.erb(center)?.hz())),
        }
    }

    /// Closed-form coverage of the design this rule pairs with.
    ///
    /// A constant-Q rule, or an ERB-scaled rule over the logarithmic ERB, pairs
    /// with the logarithmic scale; an ERB-scaled rule over a linear ERB pairs
    /// with that ERB's own scale.
    pub fn closed_form_coverage(&self, f_min: FrequencyHz, f_max: FrequencyHz, n_bands: usize) -> Result<f64> {
        match *self {
            BandwidthRule::ConstantQ { eta_b } => coverage_closed_form_log(f_min, f_max, n_bands, eta_b),
            BandwidthRule::ErbScaled {
                k,
                erb: ErbModel::Logarithmic { a },
            } => coverage_closed_form_log(f_min, f_max, n_bands, a / k),
            BandwidthRule::ErbScaled {
                k,
                erb: ErbModel::Linear { d, e },
            } => coverage_closed_form_linear_erb(f_min, f_max, n_bands, d, e, k),
            BandwidthRule::ErbScaled {
                erb: ErbModel::Polynomial { .. },
                ..
            } => Err(Error::invalid("no closed-form coverage for a polynomial ERB")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignRequest {
    pub f_min: FrequencyHz,
    pub f_max: FrequencyHz,
    pub n_bands: usize,
    pub scale: ScaleFunction,
    pub bandwidth_rule: BandwidthRule,
}

impl DesignRequest {
    pub fn new(
        f_min: FrequencyHz,
        f_max: FrequencyHz,
        n_bands: usize,
        scale: ScaleFunction,
        bandwidth_rule: BandwidthRule,
    ) -> Result<Self> {
        let req = DesignRequest {
            f_min,
            f_max,
            n_bands,
            scale,
            bandwidth_rule,
        };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<()> {
        check_range(self.f_min, self.f_max)?;
        check_bands(self.n_bands)?;
        let floor = self.scale.floor().hz();
        if self.scale.is_logarithmic() && !(self.f_min.hz() > floor) {
            return Err(Error::invalid(format!(
                "f_min ({}) must lie above f_m ({floor}) on the logarithmic scale",
                self.f_min.hz()
            )));
        }
        self.bandwidth_rule.validate()
    }
}

fn check_range(f_min: FrequencyHz, f_max: FrequencyHz) -> Result<()> {
    let (lo, hi) = (f_min.hz(), f_max.hz());
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::invalid(format!("need f_max > f_min > 0, got [{lo}, {hi}]")));
    }
    Ok(())
}

fn check_bands(n_bands: usize) -> Result<()> {
    if n_bands < 2 {
        return Err(Error::invalid(format!("need at least 2 bands, got {n_bands}")));
    }
    Ok(())
}

/// Centers equidistant on `req.scale`, from `f_min` to `f_max` inclusive.
pub fn center_frequencies(req: &DesignRequest) -> Result<Vec<FrequencyHz>> {
    req.validate()?;
    let n = req.n_bands;
    let u_min = req.scale.erbs(req.f_min)?;
    let u_max = req.scale.erbs(req.f_max)?;
    let span = (n - 1) as f64;
    let mut centers = Vec::with_capacity(n);
    centers.push(req.f_min);
    for b in 2..n {
        // Interpolation written as a weighted sum so that a design with
        // 2·(N_b − 1) intervals reproduces this one's centers bit for bit.
        let u = ((n - b) as f64 * u_min + (b - 1) as f64 * u_max) / span;
        centers.push(req.scale.erbs_inverse(u)?);
    }
    centers.push(req.f_max);
    Ok(centers)
}

/// Logarithmic-scale centers `f_min^((N−b)/(N−1)) · f_max^((b−1)/(N−1))`,
/// which do not depend on `A`, `C` or `f_m`.
pub fn centers_closed_form_log(f_min: FrequencyHz, f_max: FrequencyHz, n_bands: usize) -> Result<Vec<FrequencyHz>> {
    check_range(f_min, f_max)?;
    check_bands(n_bands)?;
    let (ln_lo, ln_hi) = (f_min.hz().ln(), f_max.hz().ln());
    let span = (n_bands - 1) as f64;
    Ok((1..=n_bands)
        .map(|b| {
            let w_lo = (n_bands - b) as f64 / span;
            let w_hi = (b - 1) as f64 / span;
            FrequencyHz((w_lo * ln_lo + w_hi * ln_hi).exp())
        })
        .collect())
}

/// Linear-ERB-scale centers
/// `(1/D')·[(1+D'f_min)^(N−b)·(1+D'f_max)^(b−1)]^(1/(N−1)) − 1/D'`.
pub fn centers_closed_form_linear_erb(
    f_min: FrequencyHz,
    f_max: FrequencyHz,
    n_bands: usize,
    d: f64,
    e: f64,
) -> Result<Vec<FrequencyHz>> {
    if !(f_min.hz() >= 0.0 && f_max.hz() > f_min.hz() && f_max.hz().is_finite()) {
        return Err(Error::invalid(format!(
            "need f_max > f_min >= 0, got [{}, {}]",
            f_min.hz(),
            f_max.hz()
        )));
    }
    check_bands(n_bands)?;
    ErbModel::Linear { d, e }.validate()?;
    if d == 0.0 {
        return Err(Error::invalid("linear-ERB centers need D > 0"));
    }
    let d_prime = e / d;
    let ln_lo = (d_prime * f_min.hz()).ln_1p();
    let ln_hi = (d_prime * f_max.hz()).ln_1p();
    let span = (n_bands - 1) as f64;
    Ok((1..=n_bands)
        .map(|b| {
            let l = ((n_bands - b) as f64 * ln_lo + (b - 1) as f64 * ln_hi) / span;
            FrequencyHz(l.exp_m1() / d_prime)
        })
        .collect())
}

pub fn bandwidths(req: &DesignRequest, centers: &[FrequencyHz]) -> Result<Vec<FrequencyHz>> {
    centers.iter().map(|&c| req.bandwidth_rule.bandwidth(c)).collect()
}

/// Coverage of each pair of consecutive bands; `N_b − 1` values.
pub fn coverage_per_band(centers: &[FrequencyHz], bandwidths: &[FrequencyHz]) -> Result<Vec<f64>> {
    if centers.len() != bandwidths.len() {
        return Err(Error::invalid(format!(
            "{} centers but {} bandwidths",
            centers.len(),
            bandwidths.len()
        )));
    }
    if centers.len() < 2 {
        return Err(Error::invalid("coverage needs at least 2 bands"));
    }
    centers
        .windows(2)
        .zip(bandwidths.windows(2))
        .enumerate()
        .map(|(i, (c, bw))| {
            let delta = c[1].hz() - c[0].hz();
            if !(delta > 0.0) {
                return Err(Error::invalid(format!(
                    "centers must be strictly increasing (bands {} and {})",
                    i + 1,
                    i + 2
                )));
            }
            Ok(0.5 * (bw[1].hz() + bw[0].hz()) / delta)
        })
        .collect()
}

/// `(r + 1) / (r − 1)` for `r = exp(x)`, via `expm1` for accuracy at small `x`.
fn ratio_term(log_ratio: f64, n_bands: usize) -> f64 {
    let m1 = (log_ratio / (n_bands - 1) as f64).exp_m1();
    (m1 + 2.0) / m1
}

/// Constant coverage of a constant-Q design on the logarithmic scale.
pub fn coverage_closed_form_log(f_min: FrequencyHz, f_max: FrequencyHz, n_bands: usize, eta_b: f64) -> Result<f64> {
    check_range(f_min, f_max)?;
    check_bands(n_bands)?;
    if !(eta_b.is_finite() && eta_b > 0.0) {
        return Err(Error::invalid(format!("Q-factor must be positive, got {eta_b}")));
    }
    let log_ratio = (f_max.hz() / f_min.hz()).ln();
    Ok(ratio_term(log_ratio, n_bands) / (2.0 * eta_b))
}

/// Constant coverage of an ERB-scaled design on the linear-ERB scale.
pub fn coverage_closed_form_linear_erb(
    f_min: FrequencyHz,
    f_max: FrequencyHz,
    n_bands: usize,
    d: f64,
    e: f64,
    k: f64,
) -> Result<f64> {
    let (lo, hi) = (f_min.hz(), f_max.hz());
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
        return Err(Error::invalid(format!("need f_max > f_min >= 0, got [{lo}, {hi}]")));
    }
    check_bands(n_bands)?;
    ErbModel::Linear { d, e }.validate()?;
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::invalid(format!("ERB scale factor K must be positive, got {k}")));
    }
    let erb_lo = d + e * lo;
    if erb_lo == 0.0 {
        return Err(Error::invalid("ERB is zero at f_min (D = 0 and f_min = 0)"));
    }
    let log_ratio = ((d + e * hi) / erb_lo).ln();
    Ok(0.5 * e * k * ratio_term(log_ratio, n_bands))
}

/// Smallest `N_b >= 2` whose closed-form coverage reaches `target`.
///
/// The scale is implied by the rule, as in
/// [`BandwidthRule::closed_form_coverage`].
pub fn solve_n_bands(f_min: FrequencyHz, f_max: FrequencyHz, target: f64, rule: &BandwidthRule) -> Result<usize> {
    rule.validate()?;
    if !target.is_finite() {
        return Err(Error::invalid(format!("target coverage must be finite, got {target}")));
    }
    let cov = |n| rule.closed_form_coverage(f_min, f_max, n);
    let floor = cov(2)?;
    let ceiling = cov(MAX_BANDS)?;
    if target <= floor || target > ceiling {
        return Err(Error::Unreachable {
            target,
            floor,
            ceiling,
            max_bands: MAX_BANDS,
        });
    }
    // coverage increases strictly with the band count
    let (mut lo, mut hi) = (2, MAX_BANDS);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if cov(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// A complete filterbank layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterbankDesign {
    pub centers: Vec<FrequencyHz>,
    pub bandwidths: Vec<FrequencyHz>,
    pub q_factors: Vec<f64>,
    pub coverages: Vec<f64>,
}

impl FilterbankDesign {
    pub fn build(req: &DesignRequest) -> Result<Self> {
        let centers = center_frequencies(req)?;
        let bandwidths = bandwidths(req, &centers)?;
        let q_factors = centers.iter().zip(&bandwidths).map(|(c, b)| c.hz() / b.hz()).collect();
        let coverages = coverage_per_band(&centers, &bandwidths)?;
        Ok(FilterbankDesign {
            centers,
            bandwidths,
            q_factors,
            coverages,
        })
    }

    pub fn n_bands(&self) -> usize {
        self.centers.len()
    }
}

/// JSON export layout of a design.
#[derive(Debug, Clone, Serialize)]
pub struct DesignExport<'a> {
    pub request: &'a DesignRequest,
    pub centers_hz: Vec<f64>,
    pub bandwidths_hz: Vec<f64>,
    pub q_factors: Vec<f64>,
    pub coverages: Vec<f64>,
}

impl<'a> DesignExport<'a> {
    pub fn new(request: &'a DesignRequest, design: &FilterbankDesign) -> Self {
        DesignExport {
            request,
            centers_hz: design.centers.iter().map(|f| f.hz()).collect(),
            bandwidths_hz: design.bandwidths.iter().map(|f| f.hz()).collect(),
            q_factors: design.q_factors.clone(),
            coverages: design.coverages.clone(),
        }
    }
}
