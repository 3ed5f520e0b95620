use std::io::Write;
use std::path::{Path, PathBuf};

use filterbank_core::design::{self, BandwidthRule, DesignExport, DesignRequest, FilterbankDesign};
use filterbank_core::gammatone::{self, GammatoneFilter};
use filterbank_core::scales::{self, ErbModel, ScaleFunction};
use filterbank_core::signals::{self, HarmonicSpeaker};
use filterbank_core::{wav, FrequencyHz};
use serde_json::Value;

use crate::output::{self, num};
use crate::{BandCount, CliError, CliResult, DesignArgs, Format, ModelArgs, RangeArgs, ScaleArg};

fn usage(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("invalid value for --{flag}: {msg}"))
}

fn positive(flag: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(usage(flag, format!("must be a positive number, got {v}")))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Fails early when the directory that would hold `path` does not exist.
fn check_writable(flag: &str, path: Option<&Path>) -> CliResult {
    let Some(path) = path else { return Ok(()) };
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        if !dir.is_dir() {
            return Err(usage(flag, format!("directory {} does not exist", dir.display())));
        }
    }
    if path.is_dir() {
        return Err(usage(flag, format!("{} is a directory", path.display())));
    }
    Ok(())
}

fn check_model(m: &ModelArgs) -> CliResult {
    if !(1..=gammatone::MAX_ORDER).contains(&m.order) {
        return Err(usage(
            "order",
            format!("must be in 1..={}, got {}", gammatone::MAX_ORDER, m.order),
        ));
    }
    positive("a", m.a)?;
    positive("fm", m.fm)?;
    positive("d", m.d)?;
    positive("e", m.e)?;
    Ok(())
}

fn check_range(r: &RangeArgs) -> CliResult {
    positive("fmin", r.fmin)?;
    positive("fmax", r.fmax)?;
    if r.fmax <= r.fmin {
        return Err(usage(
            "fmax",
            format!("must exceed --fmin ({}), got {}", r.fmin, r.fmax),
        ));
    }
    Ok(())
}

fn scale_and_rule(scale: ScaleArg, m: &ModelArgs) -> CliResult<(ScaleFunction, BandwidthRule)> {
    Ok(match scale {
        ScaleArg::Log => (
            ScaleFunction::logarithmic(m.a, FrequencyHz(m.fm))?,
            BandwidthRule::ConstantQ {
                eta_b: gammatone::gammatone_q_factor(m.order, m.a)?,
            },
        ),
        ScaleArg::LinearErb => (
            ScaleFunction::linear_erb(m.d, m.e)?,
            BandwidthRule::ErbScaled {
                k: gammatone::k_of_n(m.order)?,
                erb: ErbModel::Linear { d: m.d, e: m.e },
            },
        ),
    })
}

/// Validated request plus the target coverage when the band count was solved for.
fn build_request(args: &DesignArgs) -> CliResult<(DesignRequest, Option<f64>)> {
    check_range(&args.range)?;
    check_model(&args.model)?;
    if args.scale == ScaleArg::Log && args.range.fmin <= args.model.fm {
        return Err(usage(
            "fmin",
            format!(
                "must exceed --fm ({}) on the log scale, got {}",
                args.model.fm, args.range.fmin
            ),
        ));
    }
    let (scale, rule) = scale_and_rule(args.scale, &args.model)?;
    let (lo, hi) = (FrequencyHz(args.range.fmin), FrequencyHz(args.range.fmax));
    let (n_bands, target) = match args.count {
        BandCount { nbands: Some(n), .. } => {
            if n < 2 {
                return Err(usage("nbands", format!("need at least 2 bands, got {n}")));
            }
            (n, None)
        }
        BandCount { coverage: Some(c), .. } => {
            positive("coverage", c)?;
            let n = design::solve_n_bands(lo, hi, c, &rule).map_err(|e| usage("coverage", e))?;
            (n, Some(c))
        }
        _ => return Err(CliError::Usage("one of --nbands or --coverage is required".into())),
    };
    Ok((DesignRequest::new(lo, hi, n_bands, scale, rule)?, target))
}

pub fn design(args: &DesignArgs, format: Format, out: Option<&Path>, reproducible: bool) -> CliResult {
    check_writable("out", out)?;
    let (req, target) = build_request(args)?;
    let fb = FilterbankDesign::build(&req)?;
    let mut w = output::open(out).map_err(io_err(out.unwrap_or(Path::new("-"))))?;
    let path = out.unwrap_or(Path::new("-"));
    match format {
        Format::Json => {
            let mut v = serde_json::to_value(DesignExport::new(&req, &fb)).expect("design serializes");
            output::round_json(&mut v);
            let obj = v.as_object_mut().expect("export is an object");
            if let Some(c) = target {
                obj.insert("target_coverage".into(), Value::from(c));
            }
            if !reproducible {
                obj.insert("generated_at".into(), Value::from(chrono::Utc::now().to_rfc3339()));
            }
            serde_json::to_writer_pretty(&mut w, &v).map_err(|e| io_err(path)(e.into()))?;
            writeln!(w).map_err(io_err(path))?;
        }
        Format::Csv => {
            output::row(
                &mut w,
                &["band", "center_hz", "bandwidth_hz", "q_factor"].map(String::from),
            )
            .map_err(io_err(path))?;
            for (b, ((c, bw), q)) in fb.centers.iter().zip(&fb.bandwidths).zip(&fb.q_factors).enumerate() {
                output::row(&mut w, &[(b + 1).to_string(), num(c.hz()), num(bw.hz()), num(*q)])
                    .map_err(io_err(path))?;
            }
        }
    }
    w.flush().map_err(io_err(path))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

pub fn scale_export(
    range: &RangeArgs,
    nbands: usize,
    (grid_min, grid_max, points): (f64, f64, usize),
    model: &ModelArgs,
    out: Option<&Path>,
) -> CliResult {
    check_writable("out", out)?;
    check_range(range)?;
    check_model(model)?;
    positive("grid-min", grid_min)?;
    if !(grid_max.is_finite() && grid_max > grid_min) {
        return Err(usage(
            "grid-max",
            format!("must exceed --grid-min ({grid_min}), got {grid_max}"),
        ));
    }
    if points < 2 {
        return Err(usage("points", format!("need at least 2, got {points}")));
    }
    if nbands < 2 {
        return Err(usage("nbands", format!("need at least 2 bands, got {nbands}")));
    }
    if range.fmin <= model.fm {
        return Err(usage(
            "fmin",
            format!("must exceed --fm ({}), got {}", model.fm, range.fmin),
        ));
    }
    let lin = ScaleFunction::linear_erb(model.d, model.e)?;
    let log = ScaleFunction::logarithmic(model.a, FrequencyHz(model.fm))?;
    let path = out.unwrap_or(Path::new("-"));
    let mut w = output::open(out).map_err(io_err(path))?;
    output::row(&mut w, &["freq_hz", "erbs_linear", "erbs_log"].map(String::from)).map_err(io_err(path))?;
    for f in std::iter::once(0.0).chain(log_grid(grid_min, grid_max, points)) {
        let f = FrequencyHz(f);
        output::row(&mut w, &[num(f.hz()), num(lin.erbs(f)?), num(log.erbs(f)?)]).map_err(io_err(path))?;
    }
    // selected centers: only the column of their own scale is filled
    for (scale, col) in [(lin, 1), (log, 2)] {
        let req = DesignRequest::new(
            FrequencyHz(range.fmin),
            FrequencyHz(range.fmax),
            nbands,
            scale,
            BandwidthRule::ConstantQ { eta_b: 1.0 },
        )?;
        for c in design::center_frequencies(&req)? {
            let mut cells = vec![num(c.hz()), String::new(), String::new()];
            cells[col] = num(scale.erbs(c)?);
            output::row(&mut w, &cells).map_err(io_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn coverage_sweep(range: &RangeArgs, nbands_max: usize, model: &ModelArgs, out: Option<&Path>) -> CliResult {
    check_writable("out", out)?;
    check_range(range)?;
    check_model(model)?;
    if nbands_max < 2 {
        return Err(usage("nbands-max", format!("must be at least 2, got {nbands_max}")));
    }
    let eta = gammatone::gammatone_q_factor(model.order, model.a)?;
    let k = gammatone::k_of_n(model.order)?;
    let (lo, hi) = (FrequencyHz(range.fmin), FrequencyHz(range.fmax));
    let path = out.unwrap_or(Path::new("-"));
    let mut w = output::open(out).map_err(io_err(path))?;
    output::row(
        &mut w,
        &["nbands", "coverage_log", "coverage_linear_erb"].map(String::from),
    )
    .map_err(io_err(path))?;
    for n in 2..=nbands_max {
        let log = design::coverage_closed_form_log(lo, hi, n, eta)?;
        let lin = design::coverage_closed_form_linear_erb(lo, hi, n, model.d, model.e, k)?;
        output::row(&mut w, &[n.to_string(), num(log), num(lin)]).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn qfactor_sweep(range: &RangeArgs, points: usize, model: &ModelArgs, out: Option<&Path>) -> CliResult {
    check_writable("out", out)?;
    check_range(range)?;
    check_model(model)?;
    if points < 2 {
        return Err(usage("points", format!("need at least 2, got {points}")));
    }
    let k = gammatone::k_of_n(model.order)?;
    let log = ErbModel::Logarithmic { a: model.a };
    let lin = ErbModel::Linear { d: model.d, e: model.e };
    let path = out.unwrap_or(Path::new("-"));
    let mut w = output::open(out).map_err(io_err(path))?;
    output::row(&mut w, &["freq_hz", "q_log", "q_linear_erb"].map(String::from)).map_err(io_err(path))?;
    for f in log_grid(range.fmin, range.fmax, points) {
        let q = |m: &ErbModel| -> CliResult<f64> { Ok(f / (k * m.erb(FrequencyHz(f))?.hz())) };
        output::row(&mut w, &[num(f), num(q(&log)?), num(q(&lin)?)]).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn fit(input: &Path, d: f64, e: f64, out: Option<&Path>) -> CliResult {
    check_writable("out", out)?;
    positive("d", d)?;
    positive("e", e)?;
    let mut points = scales::read_measurements_file(input).map_err(|err| match err {
        filterbank_core::Error::Io(source) => CliError::Io {
            path: input.to_path_buf(),
            source,
        },
        other => other.into(),
    })?;
    let a = scales::fit_log_erb_slope(&points)?;
    let rms = scales::fit_residual_rms(&points, a);
    eprintln!("fitted_a={}", num(a));
    eprintln!("residual_rms_hz={}", num(rms));

    points.sort_by(|x, y| x.0.hz().total_cmp(&y.0.hz()));
    let path = out.unwrap_or(Path::new("-"));
    let mut w = output::open(out).map_err(io_err(path))?;
    output::row(
        &mut w,
        &["freq_hz", "erb_measured", "erb_log_fit", "erb_linear"].map(String::from),
    )
    .map_err(io_err(path))?;
    for (f, erb) in points {
        output::row(
            &mut w,
            &[num(f.hz()), num(erb.hz()), num(f.hz() / a), num(d + e * f.hz())],
        )
        .map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn synth(speakers: &[PathBuf], duration: f64, sample_rate: u32, out: &Path) -> CliResult {
    check_writable("out", Some(out))?;
    positive("duration", duration)?;
    if sample_rate == 0 {
        return Err(usage("sample-rate", "must be positive"));
    }
    let specs = speakers
        .iter()
        .map(|p| {
            let src = std::fs::read_to_string(p).map_err(io_err(p))?;
            HarmonicSpeaker::from_json(&src).map_err(|e| usage("speaker", format!("{}: {e}", p.display())))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let signal = signals::mix(&specs, duration, f64::from(sample_rate))?;
    wav::write_wav(out, &signal)?;
    Ok(())
}

pub fn filter(input: &Path, args: &DesignArgs, out_prefix: &Path, rms_out: Option<&Path>) -> CliResult {
    check_writable("rms-out", rms_out)?;
    check_writable("out-prefix", Some(out_prefix))?;
    let (req, _) = build_request(args)?;
    let signal = wav::read_wav(input)?;
    let fb = FilterbankDesign::build(&req)?;
    let bands = gammatone::apply_filterbank(&fb, args.model.order, &signal)?;

    let path = rms_out.unwrap_or(Path::new("-"));
    let mut w = output::open(rms_out).map_err(io_err(path))?;
    output::row(&mut w, &["band", "center_hz", "rms"].map(String::from)).map_err(io_err(path))?;
    for (b, (band, c)) in bands.iter().zip(&fb.centers).enumerate() {
        let mut name = out_prefix.as_os_str().to_os_string();
        name.push(format!("_band{}.wav", b + 1));
        wav::write_wav(Path::new(&name), band)?;
        output::row(&mut w, &[(b + 1).to_string(), num(c.hz()), num(band.rms())]).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn response(
    center: f64,
    scale: ScaleArg,
    sample_rate: u32,
    fft_len: Option<usize>,
    model: &ModelArgs,
    out: Option<&Path>,
) -> CliResult {
    check_writable("out", out)?;
    check_model(model)?;
    positive("center", center)?;
    let fs = f64::from(sample_rate);
    if center >= 0.5 * fs {
        return Err(usage(
            "center",
            format!("must be below Nyquist ({} Hz), got {center}", 0.5 * fs),
        ));
    }
    let erb = match scale {
        ScaleArg::Log => ErbModel::Logarithmic { a: model.a },
        ScaleArg::LinearErb => ErbModel::Linear { d: model.d, e: model.e },
    };
    let filter: GammatoneFilter = gammatone::make_filter(model.order, FrequencyHz(center), &erb, fs)?;
    let n_fft = match fft_len {
        Some(n) if n < filter.impulse_len() => {
            return Err(usage(
                "fft-len",
                format!("must be at least the impulse response length {}", filter.impulse_len()),
            ))
        }
        Some(n) => n,
        None => (8 * filter.impulse_len()).next_power_of_two(),
    };
    let path = out.unwrap_or(Path::new("-"));
    let mut w = output::open(out).map_err(io_err(path))?;
    output::row(&mut w, &["freq_hz", "magnitude_db"].map(String::from)).map_err(io_err(path))?;
    for (f, db) in filter.magnitude_response_db(n_fft)? {
        output::row(&mut w, &[num(f), num(db)]).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
