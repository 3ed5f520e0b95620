//! 16-bit PCM mono WAV input and output.

use std::path::Path;

use crate::gammatone::SampledSignal;
use crate::{Error, Result};

const FULL_SCALE: f64 = i16::MAX as f64;

fn spec(sample_rate_hz: f64) -> Result<hound::WavSpec> {
    let rate = sample_rate_hz.round();
    if !(rate >= 1.0 && rate <= f64::from(u32::MAX)) || (rate - sample_rate_hz).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "WAV needs an integer sample rate, got {sample_rate_hz}"
        )));
    }
    Ok(hound::WavSpec {
        channels: 1,
        sample_rate: rate as u32,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    })
}

fn quantize(x: f64) -> i16 {
    (x.clamp(-1.0, 1.0) * FULL_SCALE).round() as i16
}

/// Writes `signal` as 16-bit PCM; samples outside `[-1, 1]` are clipped.
pub fn write_wav(path: &Path, signal: &SampledSignal) -> Result<()> {
    let clipped = signal.samples().iter().filter(|x| x.abs() > 1.0).count();
    if clipped > 0 {
        log::warn!("{}: {clipped} samples clipped to full scale", path.display());
    }
    let mut w = hound::WavWriter::create(path, spec(signal.sample_rate_hz())?)?;
    for &x in signal.samples() {
        w.write_sample(quantize(x))?;
    }
    w.finalize()?;
    Ok(())
}

/// Reads a mono 16-bit PCM WAV into `[-1, 1]` samples.
pub fn read_wav(path: &Path) -> Result<SampledSignal> {
    let mut r = hound::WavReader::open(path)?;
    let s = r.spec();
    if s.channels != 1 || s.bits_per_sample != 16 || s.sample_format != hound::SampleFormat::Int {
        return Err(Error::invalid(format!(
            "{}: expected mono 16-bit PCM, got {} channel(s), {} bits, {:?}",
            path.display(),
            s.channels,
            s.bits_per_sample,
            s.sample_format
        )));
    }
    let samples = r
        .samples::<i16>()
        .map(|v| v.map(|v| f64::from(v) / FULL_SCALE))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    SampledSignal::new(samples, f64::from(s.sample_rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let x: Vec<f64> = (0..500).map(|i| (i as f64 * 0.05).sin() * 0.8).collect();
        write_wav(&path, &SampledSignal::new(x.clone(), 16000.0).unwrap()).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.sample_rate_hz(), 16000.0);
        for (a, b) in x.iter().zip(back.samples()) {
            assert!((a - b).abs() <= 0.5 / FULL_SCALE + 1e-12);
        }
    }

    #[test]
    fn header_is_16_bit_mono() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        write_wav(&path, &SampledSignal::new(vec![0.5, -2.0], 8000.0).unwrap()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[0..4], b"RIFF");
        assert_eq!(u16::from_le_bytes([bytes[22], bytes[23]]), 1);
        assert_eq!(u16::from_le_bytes([bytes[34], bytes[35]]), 16);
        // clipped sample
        assert_eq!(i16::from_le_bytes([bytes[46], bytes[47]]), -i16::MAX);
    }

    #[test]
    fn rejects_garbage_and_fractional_rates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.wav");
        std::fs::write(&path, b"not a wav").unwrap();
        assert!(read_wav(&path).is_err());
        assert!(write_wav(&path, &SampledSignal::new(vec![0.0], 100.5).unwrap()).is_err());
    }
}
