use std::fmt;

use serde::{Deserialize, Serialize};

/// A frequency in Hz.
///
/// Only finiteness is an invariant of the type; each operation checks its own
/// positivity domain.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyHz(pub f64);

impl FrequencyHz {
    #[inline]
    pub fn hz(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl From<f64> for FrequencyHz {
    fn from(v: f64) -> Self {
        FrequencyHz(v)
    }
}

impl fmt::Display for FrequencyHz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} Hz", self.0)
    }
}
