use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

fn spectrum(signal: &[f64], n_fft: usize, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(n_fft, Complex64::new(0.0, 0.0));
    planner.plan_fft_forward(n_fft).process(&mut buf);
    buf
}

/// `|X(k)|²` for bins `0..=n_fft/2` of the zero-padded signal.
pub(crate) fn power_spectrum(signal: &[f64], n_fft: usize) -> Vec<f64> {
    let mut planner = FftPlanner::new();
    spectrum(signal, n_fft, &mut planner)[..=n_fft / 2]
        .iter()
        .map(|c| c.norm_sqr())
        .collect()
}

/// Linear convolution of `x` with `h`, truncated to `x.len()` samples.
pub(crate) fn convolve_truncated(x: &[f64], h: &[f64]) -> Vec<f64> {
    let out_len = x.len();
    if out_len == 0 || h.is_empty() {
        return vec![0.0; out_len];
    }
    let h = &h[..h.len().min(out_len)];
    let n_fft = (x.len() + h.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let xs = spectrum(x, n_fft, &mut planner);
    let mut prod: Vec<Complex64> = spectrum(h, n_fft, &mut planner)
        .iter()
        .zip(&xs)
        .map(|(a, b)| a * b)
        .collect();
    planner.plan_fft_inverse(n_fft).process(&mut prod);
    let scale = 1.0 / n_fft as f64;
    prod[..out_len].iter().map(|c| c.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(x: &[f64], h: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|n| (0..=n).filter(|&k| k < h.len()).map(|k| h[k] * x[n - k]).sum())
            .collect()
    }

    #[test]
    fn matches_direct_convolution() {
        let x: Vec<f64> = (0..100).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        let h: Vec<f64> = (0..23).map(|i| (i as f64 * 0.3).sin()).collect();
        let fast = convolve_truncated(&x, &h);
        for (a, b) in fast.iter().zip(direct(&x, &h)) {
            assert!((a - b).abs() < 1e-12);
        }
        // impulse response longer than the signal
        let long: Vec<f64> = (0..300).map(|i| (i as f64 * 0.01).cos()).collect();
        let fast = convolve_truncated(&x, &long);
        for (a, b) in fast.iter().zip(direct(&x, &long)) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn parseval() {
        let x: Vec<f64> = (0..64).map(|i| (i as f64).sqrt().sin()).collect();
        let p = power_spectrum(&x, 64);
        let energy: f64 = x.iter().map(|v| v * v).sum();
        let spec: f64 = p[0] + p[32] + 2.0 * p[1..32].iter().sum::<f64>();
        assert!((spec / 64.0 - energy).abs() < 1e-10);
    }
}
