//! Harmonic speaker synthesis.
//!
//! A speaker is a sum of cosines at integer multiples of a fundamental, each
//! with a non-negative amplitude envelope and a constant phase.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::gammatone::SampledSignal;
use crate::{Error, FrequencyHz, Result};

/// Amplitude track of one harmonic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Envelope {
    Constant {
        amplitude: f64,
    },
    /// `(time_s, amplitude)` pairs, linearly interpolated and held constant
    /// outside the first and last breakpoint.
    Breakpoints {
        breakpoints: Vec<(f64, f64)>,
    },
}

impl Envelope {
    pub fn constant(amplitude: f64) -> Self {
        Envelope::Constant { amplitude }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Envelope::Constant { amplitude } => {
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(Error::invalid(format!("amplitude must be >= 0, got {amplitude}")));
                }
            }
            Envelope::Breakpoints { breakpoints } => {
                if breakpoints.is_empty() {
                    return Err(Error::invalid("envelope needs at least one breakpoint"));
                }
                for &(t, a) in breakpoints {
                    if !(t.is_finite() && a.is_finite() && a >= 0.0) {
                        return Err(Error::invalid(format!("bad breakpoint ({t}, {a})")));
                    }
                }
                if breakpoints.windows(2).any(|w| w[1].0 < w[0].0) {
                    return Err(Error::invalid("breakpoint times must be non-decreasing"));
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Envelope::Constant { amplitude } => *amplitude,
            Envelope::Breakpoints { breakpoints } => {
                let i = breakpoints.partition_point(|&(bt, _)| bt <= t);
                if i == 0 {
                    return breakpoints[0].1;
                }
                if i == breakpoints.len() {
                    return breakpoints[i - 1].1;
                }
                let (t0, a0) = breakpoints[i - 1];
                let (t1, a1) = breakpoints[i];
                a0 + (a1 - a0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    /// Multiple of the fundamental, starting at 1.
    pub order: u32,
    #[serde(flatten)]
    pub envelope: Envelope,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSpeaker {
    pub f0_hz: FrequencyHz,
    pub harmonics: Vec<Harmonic>,
}

impl HarmonicSpeaker {
    /// Harmonics `1..=count`, all with the same constant amplitude and zero phase.
    pub fn uniform(f0_hz: f64, count: u32, amplitude: f64) -> Self {
        HarmonicSpeaker {
            f0_hz: FrequencyHz(f0_hz),
            harmonics: (1..=count)
                .map(|order| Harmonic {
                    order,
                    envelope: Envelope::constant(amplitude),
                    phase: 0.0,
                })
                .collect(),
        }
    }

    /// Highest harmonic order present.
    pub fn num_harmonics(&self) -> u32 {
        self.harmonics.iter().map(|h| h.order).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let f0 = self.f0_hz.hz();
        if !(f0.is_finite() && f0 > 0.0) {
            return Err(Error::invalid(format!("f0 must be positive, got {f0}")));
        }
        if self.harmonics.is_empty() {
            return Err(Error::invalid("speaker needs at least one harmonic"));
        }
        for h in &self.harmonics {
            if h.order == 0 {
                return Err(Error::invalid("harmonic order starts at 1"));
            }
            if !h.phase.is_finite() {
                return Err(Error::invalid(format!("harmonic {} has non-finite phase", h.order)));
            }
            h.envelope.validate()?;
        }
        Ok(())
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let sp: HarmonicSpeaker =
            serde_json::from_str(src).map_err(|e| Error::invalid(format!("speaker spec: {e}")))?;
        sp.validate()?;
        Ok(sp)
    }
}

fn sample_count(duration_s: f64, sample_rate_hz: f64) -> Result<usize> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::invalid(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    let n = (duration_s * sample_rate_hz).round();
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::invalid(format!("duration {duration_s} s yields no samples")));
    }
    Ok(n as usize)
}

/// Samples `speaker` for `duration_s` seconds.
pub fn synthesize(speaker: &HarmonicSpeaker, duration_s: f64, sample_rate_hz: f64) -> Result<SampledSignal> {
    let n = sample_count(duration_s, sample_rate_hz)?;
    let mut out = vec![0.0; n];
    add_speaker(&mut out, speaker, sample_rate_hz)?;
    SampledSignal::new(out, sample_rate_hz)
}

fn add_speaker(out: &mut [f64], speaker: &HarmonicSpeaker, fs: f64) -> Result<()> {
    speaker.validate()?;
    let f0 = speaker.f0_hz.hz();
    let nyquist = 0.5 * fs;
    let mut orders: Vec<u32> = speaker.harmonics.iter().map(|h| h.order).collect();
    orders.sort_unstable();
    if let Some(&bad) = orders.iter().find(|&&o| f64::from(o) * f0 >= nyquist) {
        return Err(Error::invalid(format!(
            "harmonic {bad} at {} Hz is at or above Nyquist ({nyquist} Hz)",
            f64::from(bad) * f0
        )));
    }
    for h in &speaker.harmonics {
        let w = 2.0 * PI * f64::from(h.order) * f0;
        for (i, y) in out.iter_mut().enumerate() {
            let t = i as f64 / fs;
            *y += h.envelope.at(t) * (w * t + h.phase).cos();
        }
    }
    Ok(())
}

/// Sample-wise sum of several speakers.
pub fn mix(speakers: &[HarmonicSpeaker], duration_s: f64, sample_rate_hz: f64) -> Result<SampledSignal> {
    let n = sample_count(duration_s, sample_rate_hz)?;
    let mut out = vec![0.0; n];
    for sp in speakers {
        add_speaker(&mut out, sp, sample_rate_hz)?;
    }
    SampledSignal::new(out, sample_rate_hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_harmonic_is_a_cosine() {
        let s = synthesize(&HarmonicSpeaker::uniform(100.0, 1, 1.0), 0.1, 16000.0).unwrap();
        for (i, &x) in s.samples().iter().enumerate() {
            let t = i as f64 / 16000.0;
            assert!((x - (2.0 * PI * 100.0 * t).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_power_adds() {
        let s = synthesize(&HarmonicSpeaker::uniform(100.0, 3, 1.0), 1.0, 16000.0).unwrap();
        assert!((s.rms().powi(2) - 1.5).abs() < 1e-3);
    }

    #[test]
    fn zero_envelope_is_silent() {
        let s = synthesize(&HarmonicSpeaker::uniform(100.0, 5, 0.0), 0.05, 16000.0).unwrap();
        assert!(s.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn aliasing_names_first_offending_harmonic() {
        let err = synthesize(&HarmonicSpeaker::uniform(1000.0, 12, 1.0), 0.01, 16000.0).unwrap_err();
        assert!(err.to_string().contains("harmonic 8 "), "{err}");
    }

    #[test]
    fn breakpoint_envelope() {
        let env = Envelope::Breakpoints {
            breakpoints: vec![(0.0, 0.0), (1.0, 2.0), (2.0, 0.0)],
        };
        assert_eq!(env.at(-1.0), 0.0);
        assert_eq!(env.at(0.5), 1.0);
        assert_eq!(env.at(1.0), 2.0);
        assert_eq!(env.at(1.75), 0.5);
        assert_eq!(env.at(5.0), 0.0);
        let bad = Envelope::Breakpoints {
            breakpoints: vec![(1.0, 0.0), (0.0, 1.0)],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn mix_of_one_is_synthesis() {
        let sp = HarmonicSpeaker::uniform(110.0, 4, 0.5);
        assert_eq!(
            mix(std::slice::from_ref(&sp), 0.2, 16000.0).unwrap(),
            synthesize(&sp, 0.2, 16000.0).unwrap()
        );
    }

    #[test]
    fn negated_speaker_cancels() {
        let sp = HarmonicSpeaker::uniform(150.0, 6, 0.3);
        let mut neg = sp.clone();
        for h in &mut neg.harmonics {
            h.phase = PI;
        }
        let m = mix(&[sp, neg], 0.1, 16000.0).unwrap();
        assert!(m.samples().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn speaker_json() {
        let src = r#"{"f0_hz": 120, "harmonics": [
            {"order": 1, "amplitude": 1.0},
            {"order": 2, "breakpoints": [[0, 0.0], [0.5, 1.0]], "phase": 0.25}
        ]}"#;
        let sp = HarmonicSpeaker::from_json(src).unwrap();
        assert_eq!(sp.num_harmonics(), 2);
        assert_eq!(sp.harmonics[0].phase, 0.0);
        assert_eq!(
            sp.harmonics[1].envelope,
            Envelope::Breakpoints {
                breakpoints: vec![(0.0, 0.0), (0.5, 1.0)]
            }
        );
        assert!(HarmonicSpeaker::from_json(r#"{"f0_hz": -1, "harmonics": [{"order": 1, "amplitude": 1}]}"#).is_err());
        assert!(HarmonicSpeaker::from_json(r#"{"f0_hz": 100, "harmonics": [{"order": 1}]}"#).is_err());
    }
}
