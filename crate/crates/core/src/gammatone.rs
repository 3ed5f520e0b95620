//! Gammatone filters matched to an ERB model.
//!
//! The impulse response is `g(t) = t^(n−1)·exp(−2π·b·t)·cos(2π·f_C·t)`. Its
//! ERB is `a_n·b` with `a_n = π(2n−2)!·2^−(2n−2)/((n−1)!)²`, and its 3-dB
//! bandwidth is `2b·√(2^(1/n) − 1)`, so the ratio of 3-dB bandwidth to ERB is
//! the order-only constant [`k_of_n`]. Filters are synthesized directly in the
//! time domain and applied with FFT convolution.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::design::FilterbankDesign;
use crate::fft::{convolve_truncated, power_spectrum};
use crate::scales::ErbModel;
use crate::{Error, FrequencyHz, Result};

/// Highest order for which the factorials stay exact in `f64`.
pub const MAX_ORDER: u32 = 12;
/// Envelope level, relative to its peak, at which the impulse response is cut.
pub const ENVELOPE_FLOOR: f64 = 1e-6;
/// Minimum number of FFT bins across the 3-dB width for a measurement.
pub const MIN_BINS_PER_BANDWIDTH: usize = 32;
const MIN_MEASURE_FFT: usize = 1 << 16;

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::invalid("signal must not be empty"));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(SampledSignal {
            samples,
            sample_rate_hz,
        })
    }

    pub fn zeros(len: usize, sample_rate_hz: f64) -> Result<Self> {
        Self::new(vec![0.0; len], sample_rate_hz)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn rms(&self) -> f64 {
        (self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64).sqrt()
    }
}

fn check_order(n: u32) -> Result<()> {
    if !(1..=MAX_ORDER).contains(&n) {
        return Err(Error::invalid(format!(
            "gammatone order must be in 1..={MAX_ORDER}, got {n}"
        )));
    }
    Ok(())
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Ratio of a gammatone filter's ERB to its decay parameter `b`.
pub fn erb_factor(n: u32) -> Result<f64> {
    check_order(n)?;
    let m = 2 * n - 2;
    Ok(PI * factorial(m) * 2f64.powi(-(m as i32)) / factorial(n - 1).powi(2))
}

/// Ratio of the 3-dB bandwidth to the ERB for an order-`n` gammatone filter.
pub fn k_of_n(n: u32) -> Result<f64> {
    let a_n = erb_factor(n)?;
    Ok(2.0 * (2f64.powf(1.0 / f64::from(n)) - 1.0).sqrt() / a_n)
}

/// Q-factor of an order-`n` gammatone filter whose ERB is `f / a`.
pub fn gammatone_q_factor(n: u32, a: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::invalid(format!("A must be positive, got {a}")));
    }
    Ok(a / k_of_n(n)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammatoneFilter {
    pub order: u32,
    pub center_hz: FrequencyHz,
    /// Target ERB.
    pub erb_hz: FrequencyHz,
    /// Envelope decay parameter `b` (Hz).
    pub decay_hz: f64,
    /// Length of the truncated impulse response.
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    gain: f64,
}

impl GammatoneFilter {
    pub fn new(order: u32, center: FrequencyHz, erb: FrequencyHz, sample_rate_hz: f64) -> Result<Self> {
        let a_n = erb_factor(order)?;
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        let fc = center.hz();
        if !(fc > 0.0 && fc < 0.5 * sample_rate_hz) {
            return Err(Error::invalid(format!(
                "center {fc} Hz must lie in (0, {}) for sample rate {sample_rate_hz}",
                0.5 * sample_rate_hz
            )));
        }
        let erb_hz = erb.hz();
        if !(erb_hz.is_finite() && erb_hz > 0.0) {
            return Err(Error::invalid(format!("ERB must be positive, got {erb_hz}")));
        }
        if fc / erb_hz < 2.0 {
            log::warn!("gammatone at {fc} Hz has ERB {erb_hz} Hz; f_C/ERB < 2 distorts the bandwidth relations");
        }
        let decay_hz = erb_hz / a_n;
        let mut filter = GammatoneFilter {
            order,
            center_hz: center,
            erb_hz: erb,
            decay_hz,
            duration_s: envelope_duration(order, decay_hz),
            sample_rate_hz,
            gain: 1.0,
        };
        let (re, im) = filter.response_at(fc);
        filter.gain = 1.0 / re.hypot(im);
        Ok(filter)
    }

    /// Analytic 3-dB bandwidth, `k(n)·ERB`.
    pub fn bw3db_hz(&self) -> f64 {
        k_of_n(self.order).expect("order checked at construction") * self.erb_hz.hz()
    }

    /// Number of impulse-response samples.
    pub fn impulse_len(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).ceil() as usize + 1
    }

    /// Sampled impulse response, scaled for unit gain at the center frequency.
    pub fn impulse_response(&self) -> Vec<f64> {
        let w = 2.0 * PI * self.center_hz.hz();
        let decay = 2.0 * PI * self.decay_hz;
        let p = (self.order - 1) as i32;
        (0..self.impulse_len())
            .map(|i| {
                let t = i as f64 / self.sample_rate_hz;
                self.gain * t.powi(p) * (-decay * t).exp() * (w * t).cos()
            })
            .collect()
    }

    /// Discrete-time frequency response at `freq_hz` as `(re, im)`.
    pub fn response_at(&self, freq_hz: f64) -> (f64, f64) {
        let w = 2.0 * PI * freq_hz / self.sample_rate_hz;
        self.impulse_response()
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(re, im), (k, &h)| {
                let ph = w * k as f64;
                (re + h * ph.cos(), im - h * ph.sin())
            })
    }

    /// `(freq_hz, magnitude_db)` over `0..=fs/2` from an `n_fft`-point FFT.
    pub fn magnitude_response_db(&self, n_fft: usize) -> Result<Vec<(f64, f64)>> {
        let ir = self.impulse_response();
        if n_fft < ir.len() {
            return Err(Error::invalid(format!(
                "FFT length {n_fft} shorter than impulse response ({})",
                ir.len()
            )));
        }
        let df = self.sample_rate_hz / n_fft as f64;
        Ok(power_spectrum(&ir, n_fft)
            .into_iter()
            .enumerate()
            .map(|(i, p)| (i as f64 * df, 10.0 * p.max(1e-300).log10()))
            .collect())
    }
}

/// Time after the envelope peak at which `t^(n−1)·e^(−2πbt)` drops to
/// [`ENVELOPE_FLOOR`] of its maximum.
fn envelope_duration(order: u32, decay_hz: f64) -> f64 {
    let rate = 2.0 * PI * decay_hz;
    let drop = -ENVELOPE_FLOOR.ln();
    if order == 1 {
        return drop / rate;
    }
    let p = f64::from(order - 1);
    let t_peak = p / rate;
    // log of envelope relative to its peak, plus the allowed drop
    let g = |t: f64| p * (t / t_peak).ln() - rate * (t - t_peak) + drop;
    let mut hi = 2.0 * t_peak;
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = t_peak;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    hi
}

/// Builds a filter whose ERB equals `erb_model` at `center`.
pub fn make_filter(
    order: u32,
    center: FrequencyHz,
    erb_model: &ErbModel,
    sample_rate_hz: f64,
) -> Result<GammatoneFilter> {
    if !(center.hz() < 0.5 * sample_rate_hz) {
        return Err(Error::invalid(format!(
            "center {} Hz is at or above the Nyquist frequency {}",
            center.hz(),
            0.5 * sample_rate_hz
        )));
    }
    let erb = erb_model.erb(center)?;
    GammatoneFilter::new(order, center, erb, sample_rate_hz)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthMeasurement {
    /// `∫|H|² df / max|H|²` over positive frequencies.
    pub erb_hz: f64,
    /// Width of the region where `|H|² >= max|H|² / 2`.
    pub bw3db_hz: f64,
}

/// Measures ERB and 3-dB bandwidth from the zero-padded FFT of the impulse
/// response.
pub fn measure_bandwidth(filter: &GammatoneFilter) -> Result<BandwidthMeasurement> {
    let n_fft = (8 * filter.impulse_len()).max(MIN_MEASURE_FFT).next_power_of_two();
    measure_bandwidth_with_fft_len(filter, n_fft)
}

pub fn measure_bandwidth_with_fft_len(filter: &GammatoneFilter, n_fft: usize) -> Result<BandwidthMeasurement> {
    let ir = filter.impulse_response();
    if n_fft < 8 * ir.len() {
        return Err(Error::invalid(format!(
            "FFT length {n_fft} is below 8x the impulse response length ({})",
            ir.len()
        )));
    }
    let power = power_spectrum(&ir, n_fft);
    bandwidth_from_power(&power, filter.sample_rate_hz / n_fft as f64)
}

/// ERB and 3-dB width of a one-sided power spectrum with bin spacing `df`.
fn bandwidth_from_power(power: &[f64], df: f64) -> Result<BandwidthMeasurement> {
    let (peak, max) = power
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, p)| if p > acc.1 { (i, p) } else { acc });
    if !(max > 0.0) {
        return Err(Error::Numerical {
            what: "impulse response has no energy".into(),
            achieved: 0.0,
        });
    }
    let erb_hz = power.iter().sum::<f64>() * df / max;

    let half = 0.5 * max;
    // fractional bin of the half-power crossing between bins i and j
    let crossing = |i: usize, j: usize| {
        let (pi, pj) = (power[i], power[j]);
        i as f64 + (half - pi) / (pj - pi) * (j as f64 - i as f64)
    };
    let mut l = peak;
    while l > 0 && power[l - 1] >= half {
        l -= 1;
    }
    let left = if l == 0 { 0.0 } else { crossing(l - 1, l) };
    let mut r = peak;
    while r + 1 < power.len() && power[r + 1] >= half {
        r += 1;
    }
    let right = if r + 1 == power.len() {
        r as f64
    } else {
        crossing(r, r + 1)
    };
    let bins = right - left;
    if bins < MIN_BINS_PER_BANDWIDTH as f64 {
        return Err(Error::Resolution {
            bins,
            required: MIN_BINS_PER_BANDWIDTH,
        });
    }
    Ok(BandwidthMeasurement {
        erb_hz,
        bw3db_hz: bins * df,
    })
}

/// Gammatone filters for every band of `design`, with ERB `bandwidth / k(n)`.
pub fn design_filters(design: &FilterbankDesign, order: u32, sample_rate_hz: f64) -> Result<Vec<GammatoneFilter>> {
    let k = k_of_n(order)?;
    let nyquist = 0.5 * sample_rate_hz;
    let offending: Vec<String> = design
        .centers
        .iter()
        .enumerate()
        .filter(|(_, c)| !(c.hz() < nyquist))
        .map(|(i, c)| format!("{} ({} Hz)", i + 1, c.hz()))
        .collect();
    if !offending.is_empty() {
        return Err(Error::invalid(format!(
            "bands at or above Nyquist {nyquist} Hz: {}",
            offending.join(", ")
        )));
    }
    design
        .centers
        .iter()
        .zip(&design.bandwidths)
        .map(|(&c, bw)| GammatoneFilter::new(order, c, FrequencyHz(bw.hz() / k), sample_rate_hz))
        .collect()
}

/// Filters `signal` through every band; one output per band, in band order.
pub fn apply_filterbank(design: &FilterbankDesign, order: u32, signal: &SampledSignal) -> Result<Vec<SampledSignal>> {
    let fs = signal.sample_rate_hz();
    let filters = design_filters(design, order, fs)?;
    Ok(filters
        .par_iter()
        .map(|f| SampledSignal {
            samples: convolve_truncated(signal.samples(), &f.impulse_response()),
            sample_rate_hz: fs,
        })
        .collect())
}
