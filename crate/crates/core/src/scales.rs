//! ERB functions and ERB-rate (frequency-warping) scales.
//!
//! An [`ErbModel`] gives the equivalent rectangular bandwidth as a function of
//! center frequency. Integrating `1 / ERB(f)` yields the ERB-rate scale, which
//! is represented by [`ScaleFunction`] with an exact inverse for the linear and
//! logarithmic families.
//!
//! Logarithms in the logarithmic family are natural logarithms; a general base
//! `B` only rescales `A`.

use std::f64::consts::{LN_10, LOG10_E};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::quadrature::{adaptive_simpson, DEFAULT_ABS_TOL, DEFAULT_MAX_DEPTH};
use crate::{Error, FrequencyHz, Result};

/// Linear ERB intercept (Hz) of the Glasberg & Moore approximation.
pub const GM_D: f64 = 24.7;
/// Linear ERB slope of the Glasberg & Moore approximation.
pub const GM_E: f64 = 0.108;
/// Slope parameter of the logarithmic ERB `f / A`.
pub const LOG_A: f64 = 7.7;
/// Default upper limit of inaudible frequencies, where the log scale is zero.
pub const DEFAULT_F_M: f64 = 20.0;

/// Bandwidth as a function of center frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ErbModel {
    /// `a·f² + b·f + c`
    Polynomial { a: f64, b: f64, c: f64 },
    /// `d + e·f`
    Linear { d: f64, e: f64 },
    /// `f / a`
    Logarithmic { a: f64 },
}

impl ErbModel {
    pub const GLASBERG_MOORE: ErbModel = ErbModel::Linear { d: GM_D, e: GM_E };
    pub const LOG_DEFAULT: ErbModel = ErbModel::Logarithmic { a: LOG_A };

    pub fn validate(&self) -> Result<()> {
        match *self {
            ErbModel::Polynomial { a, b, c } => {
                if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                    return Err(Error::invalid("polynomial ERB coefficients must be finite"));
                }
                if !(c > 0.0) {
                    return Err(Error::invalid(format!(
                        "polynomial ERB must be positive at 0 Hz, got c = {c}"
                    )));
                }
            }
            ErbModel::Linear { d, e } => {
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::invalid(format!("linear ERB requires D >= 0, got {d}")));
                }
                if !(e.is_finite() && e > 0.0) {
                    return Err(Error::invalid(format!("linear ERB requires E > 0, got {e}")));
                }
            }
            ErbModel::Logarithmic { a } => {
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::invalid(format!("logarithmic ERB requires A > 0, got {a}")));
                }
            }
        }
        Ok(())
    }

    /// Bandwidth at `f`.
    pub fn erb(&self, f: FrequencyHz) -> Result<FrequencyHz> {
        self.validate()?;
        let f = f.hz();
        if !f.is_finite() {
            return Err(Error::invalid(format!("frequency must be finite, got {f}")));
        }
        let bw = match *self {
            ErbModel::Polynomial { a, b, c } => {
                if f < 0.0 {
                    return Err(Error::invalid(format!("polynomial ERB needs f >= 0, got {f}")));
                }
                let bw = (a * f + b) * f + c;
                if !(bw > 0.0) {
                    return Err(Error::invalid(format!(
                        "polynomial ERB is not positive at {f} Hz ({bw})"
                    )));
                }
                bw
            }
            ErbModel::Linear { d, e } => {
                if f < 0.0 {
                    return Err(Error::invalid(format!("linear ERB needs f >= 0, got {f}")));
                }
                let bw = d + e * f;
                if !(bw > 0.0) {
                    return Err(Error::invalid("linear ERB with D = 0 is zero at 0 Hz"));
                }
                bw
            }
            ErbModel::Logarithmic { a } => {
                if !(f > 0.0) {
                    return Err(Error::invalid(format!("logarithmic ERB needs f > 0, got {f}")));
                }
                f / a
            }
        };
        Ok(FrequencyHz(bw))
    }
}

/// Shorthand for [`ErbModel::erb`].
pub fn erb(model: &ErbModel, f: FrequencyHz) -> Result<FrequencyHz> {
    model.erb(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ScaleKind {
    /// `E'·lg(1 + D'·f)` with `D' = E/D`, `E' = 1/(E·lg e)`.
    LinearErb { d: f64, e: f64, d_prime: f64, e_prime: f64 },
    /// `A·ln f + C` above `f_m`, zero below, with `C = -A·ln f_m`.
    Logarithmic { a: f64, c: f64, f_m: f64 },
}

/// An ERB-rate scale with its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ScaleFunction(ScaleKind);

impl ScaleFunction {
    /// ERB-rate scale of the linear ERB `d + e·f`, anchored at `ERBS(0) = 0`.
    pub fn linear_erb(d: f64, e: f64) -> Result<Self> {
        ErbModel::Linear { d, e }.validate()?;
        if d == 0.0 {
            return Err(Error::invalid(
                "linear ERB-rate scale needs D > 0 (ERB(0) = 0 makes the integral diverge)",
            ));
        }
        Ok(ScaleFunction(ScaleKind::LinearErb {
            d,
            e,
            d_prime: e / d,
            e_prime: 1.0 / (e * LOG10_E),
        }))
    }

    /// Logarithmic scale for the ERB `f / a`, anchored at `Υ(f_m) = 0`.
    pub fn logarithmic(a: f64, f_m: FrequencyHz) -> Result<Self> {
        ErbModel::Logarithmic { a }.validate()?;
        let f_m = f_m.hz();
        if !(f_m.is_finite() && f_m > 0.0) {
            return Err(Error::invalid(format!("f_m must be positive, got {f_m}")));
        }
        Ok(ScaleFunction(ScaleKind::Logarithmic {
            a,
            c: -a * f_m.ln(),
            f_m,
        }))
    }

    pub fn glasberg_moore() -> Self {
        Self::linear_erb(GM_D, GM_E).expect("constants are valid")
    }

    pub fn log_default() -> Self {
        Self::logarithmic(LOG_A, FrequencyHz(DEFAULT_F_M)).expect("constants are valid")
    }

    /// Scale belonging to `model`. `f_m` is only used by the logarithmic family.
    pub fn from_model(model: &ErbModel, f_m: FrequencyHz) -> Result<Self> {
        match *model {
            ErbModel::Linear { d, e } => Self::linear_erb(d, e),
            ErbModel::Logarithmic { a } => Self::logarithmic(a, f_m),
            ErbModel::Polynomial { .. } => Err(Error::invalid(
                "the polynomial ERB has no closed-form scale; use erbs_numeric",
            )),
        }
    }

    pub fn model(&self) -> ErbModel {
        match self.0 {
            ScaleKind::LinearErb { d, e, .. } => ErbModel::Linear { d, e },
            ScaleKind::Logarithmic { a, .. } => ErbModel::Logarithmic { a },
        }
    }

    /// Lowest frequency at which the scale is strictly increasing.
    pub fn floor(&self) -> FrequencyHz {
        match self.0 {
            ScaleKind::LinearErb { .. } => FrequencyHz(0.0),
            ScaleKind::Logarithmic { f_m, .. } => FrequencyHz(f_m),
        }
    }

    /// `(D', E')` for the linear-ERB scale.
    pub fn linear_constants(&self) -> Option<(f64, f64)> {
        match self.0 {
            ScaleKind::LinearErb { d_prime, e_prime, .. } => Some((d_prime, e_prime)),
            ScaleKind::Logarithmic { .. } => None,
        }
    }

    /// `(A, C, f_m)` for the logarithmic scale.
    pub fn log_constants(&self) -> Option<(f64, f64, FrequencyHz)> {
        match self.0 {
            ScaleKind::Logarithmic { a, c, f_m } => Some((a, c, FrequencyHz(f_m))),
            ScaleKind::LinearErb { .. } => None,
        }
    }

    pub fn is_logarithmic(&self) -> bool {
        matches!(self.0, ScaleKind::Logarithmic { .. })
    }

    /// Scale value at `f`.
    pub fn erbs(&self, f: FrequencyHz) -> Result<f64> {
        let f = f.hz();
        if !(f.is_finite() && f >= 0.0) {
            return Err(Error::invalid(format!("scale needs a finite f >= 0, got {f}")));
        }
        Ok(match self.0 {
            ScaleKind::LinearErb { d_prime, e_prime, .. } => e_prime * (d_prime * f).ln_1p() / LN_10,
            ScaleKind::Logarithmic { a, c, f_m } => {
                if f <= f_m {
                    0.0
                } else {
                    a * f.ln() + c
                }
            }
        })
    }

    /// Inverse of [`erbs`](Self::erbs). For the logarithmic scale `u = 0`
    /// maps to `f_m`.
    pub fn erbs_inverse(&self, u: f64) -> Result<FrequencyHz> {
        if !(u.is_finite() && u >= 0.0) {
            return Err(Error::invalid(format!("scale value must be finite and >= 0, got {u}")));
        }
        let f = match self.0 {
            ScaleKind::LinearErb { d_prime, e_prime, .. } => (u * LN_10 / e_prime).exp_m1() / d_prime,
            ScaleKind::Logarithmic { a, c, f_m } => {
                if u == 0.0 {
                    f_m
                } else {
                    ((u - c) / a).exp()
                }
            }
        };
        if !f.is_finite() {
            return Err(Error::invalid(format!(
                "scale value {u} is above the representable range"
            )));
        }
        Ok(FrequencyHz(f))
    }
}

/// Shorthand for [`ScaleFunction::erbs`].
pub fn erbs(scale: &ScaleFunction, f: FrequencyHz) -> Result<f64> {
    scale.erbs(f)
}

/// Shorthand for [`ScaleFunction::erbs_inverse`].
pub fn erbs_inverse(scale: &ScaleFunction, u: f64) -> Result<FrequencyHz> {
    scale.erbs_inverse(u)
}

/// Integral of `1 / ERB` from `f_ref` to `f`, by adaptive Simpson quadrature.
pub fn erbs_numeric(model: &ErbModel, f: FrequencyHz, f_ref: FrequencyHz) -> Result<f64> {
    model.validate()?;
    let (f, f_ref) = (f.hz(), f_ref.hz());
    if !(f.is_finite() && f_ref.is_finite()) {
        return Err(Error::invalid("integration limits must be finite"));
    }
    if f < f_ref {
        return Err(Error::invalid(format!("need f >= f_ref, got f = {f}, f_ref = {f_ref}")));
    }
    if f == f_ref {
        return Ok(0.0);
    }
    // Domain checks at both ends; ERB is monotone or convex between them for
    // the linear and log families and checked pointwise for polynomials.
    model.erb(FrequencyHz(f_ref))?;
    model.erb(FrequencyHz(f))?;
    let mut bad = None;
    let q = adaptive_simpson(
        |x| match model.erb(FrequencyHz(x)) {
            Ok(bw) => 1.0 / bw.hz(),
            Err(_) => {
                bad.get_or_insert(x);
                f64::NAN
            }
        },
        f_ref,
        f,
        DEFAULT_ABS_TOL,
        DEFAULT_MAX_DEPTH,
    );
    if let Some(x) = bad {
        return Err(Error::invalid(format!(
            "ERB is not positive at {x} Hz inside the integration range"
        )));
    }
    Ok(q?.value)
}

/// Least-squares slope `A` of the model `erb = f / A` through the origin.
pub fn fit_log_erb_slope(points: &[(FrequencyHz, FrequencyHz)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::invalid(format!("need at least 2 points, got {}", points.len())));
    }
    let mut sff = 0.0;
    let mut sfe = 0.0;
    for (i, &(f, e)) in points.iter().enumerate() {
        let (f, e) = (f.hz(), e.hz());
        if !(f.is_finite() && f > 0.0 && e.is_finite() && e > 0.0) {
            return Err(Error::invalid(format!(
                "point {} must have positive frequency and ERB, got ({f}, {e})",
                i + 1
            )));
        }
        sff += f * f;
        sfe += f * e;
    }
    Ok(sff / sfe)
}

/// Residual RMS (Hz) of the fitted `f / a` model over `points`.
pub fn fit_residual_rms(points: &[(FrequencyHz, FrequencyHz)], a: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let ss: f64 = points
        .iter()
        .map(|&(f, e)| {
            let r = e.hz() - f.hz() / a;
            r * r
        })
        .sum();
    (ss / points.len() as f64).sqrt()
}

#[derive(Debug, Deserialize)]
struct MeasurementRow {
    freq_hz: f64,
    erb_hz: f64,
}

/// Reads a `freq_hz,erb_hz` measurement CSV.
pub fn read_measurements<R: Read>(reader: R, source: &Path) -> Result<Vec<(FrequencyHz, FrequencyHz)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        msg,
    };
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.is_empty() {
        return Err(parse_err(1, "empty file".into()));
    }
    if headers.iter().collect::<Vec<_>>() != ["freq_hz", "erb_hz"] {
        return Err(parse_err(
            1,
            format!(
                "expected header `freq_hz,erb_hz`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.deserialize::<MeasurementRow>() {
        let row = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        out.push((FrequencyHz(row.freq_hz), FrequencyHz(row.erb_hz)));
    }
    if out.is_empty() {
        return Err(parse_err(2, "no measurement rows".into()));
    }
    Ok(out)
}

pub fn read_measurements_file(path: &Path) -> Result<Vec<(FrequencyHz, FrequencyHz)>> {
    let file = std::fs::File::open(path)?;
    read_measurements(std::io::BufReader::new(file), path)
}
