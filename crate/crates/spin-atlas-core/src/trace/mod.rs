//! Photoluminescence traces and multi-Lorentzian dip fits.
//!
//! A trace is modelled as a linear baseline times one minus a sum of
//! Lorentzian dips, pl(B) = (a + b·B)·(1 − Σ_j d_j·w_j²/((B − c_j)² + w_j²)).
//! The depth d_j is therefore relative to the local baseline and the contrast
//! of a dip is 100·d_j percent.

mod fit;

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{math, Error, Result};

pub use fit::{fit_dips, refit, side_peak_separations, Dip, DipFit, FitOptions};

/// Minimum number of samples in a trace.
pub const MIN_TRACE_LEN: usize = 16;

/// Why a trace was rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TraceDefect {
    /// Field and PL columns differ in length.
    LengthMismatch {
        /// Field samples.
        field: usize,
        /// PL samples.
        pl: usize,
    },
    /// Fewer than [`MIN_TRACE_LEN`] samples.
    TooShort(usize),
    /// field[index] ≤ field[index − 1].
    NonMonotonic {
        /// First offending row.
        index: usize,
    },
    /// NaN or infinite value.
    NonFinite {
        /// First offending row.
        index: usize,
    },
}

impl fmt::Display for TraceDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceDefect::LengthMismatch { field, pl } => {
                write!(f, "length mismatch: {field} field values, {pl} pl values")
            }
            TraceDefect::TooShort(n) => write!(f, "{n} samples, need at least {MIN_TRACE_LEN}"),
            TraceDefect::NonMonotonic { index } => write!(f, "field not strictly increasing at row {index}"),
            TraceDefect::NonFinite { index } => write!(f, "non-finite value at row {index}"),
        }
    }
}

/// A PL-versus-field measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    field: Vec<f64>,
    pl: Vec<f64>,
    temperature: Option<f64>,
}

impl Trace {
    /// Validated trace: equal lengths, at least 16 samples, finite values and
    /// strictly increasing field.
    pub fn new(field: Vec<f64>, pl: Vec<f64>, temperature: Option<f64>) -> Result<Self> {
        let bad = |d| Err(Error::InvalidTrace(d));
        if field.len() != pl.len() {
            return bad(TraceDefect::LengthMismatch { field: field.len(), pl: pl.len() });
        }
        if field.len() < MIN_TRACE_LEN {
            return bad(TraceDefect::TooShort(field.len()));
        }
        if let Some(index) = field.iter().zip(&pl).position(|(b, p)| !b.is_finite() || !p.is_finite()) {
            return bad(TraceDefect::NonFinite { index });
        }
        if let Some(k) = field.windows(2).position(|w| !(w[1] > w[0])) {
            return bad(TraceDefect::NonMonotonic { index: k + 1 });
        }
        Ok(Trace { field, pl, temperature })
    }

    /// Field samples, G.
    pub fn field(&self) -> &[f64] {
        &self.field
    }

    /// PL samples.
    pub fn pl(&self) -> &[f64] {
        &self.pl
    }

    /// Temperature metadata, K.
    pub fn temperature(&self) -> Option<f64> {
        self.temperature
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.field.len()
    }

    /// Always false for a validated trace.
    pub fn is_empty(&self) -> bool {
        self.field.is_empty()
    }

    /// Mean sample spacing, G.
    pub fn spacing(&self) -> f64 {
        (self.field[self.len() - 1] - self.field[0]) / (self.len() - 1) as f64
    }

    /// Field range covered.
    pub fn range(&self) -> (f64, f64) {
        (self.field[0], self.field[self.len() - 1])
    }

    /// Straight line through the medians of the first and last tenth of the
    /// trace, as (a, b) with baseline = a + b·B.
    pub fn edge_baseline(&self) -> (f64, f64) {
        let n = self.len();
        let k = (n / 10).max(2);
        let (bl, pl) = (math::median(&self.field[..k]), math::median(&self.pl[..k]));
        let (br, pr) = (math::median(&self.field[n - k..]), math::median(&self.pl[n - k..]));
        let b = (pr - pl) / (br - bl);
        (pl - b * bl, b)
    }
}

/// Local minima whose prominence exceeds `factor` times the robust noise of
/// the detrended trace (1.4826 × median absolute deviation).
///
/// Returns fields of the minima in ascending order.
pub fn auto_seeds(trace: &Trace, factor: f64) -> Vec<f64> {
    let (a, b) = trace.edge_baseline();
    let r: Vec<f64> = trace.field.iter().zip(&trace.pl).map(|(x, p)| p / (a + b * x) - 1.0).collect();
    let med = math::median(&r);
    let dev: Vec<f64> = r.iter().map(|v| (v - med).abs()).collect();
    let noise = 1.4826 * math::median(&dev);
    let n = r.len();
    let mut out = Vec::new();
    for k in 1..n - 1 {
        if !(r[k] < r[k - 1] && r[k] <= r[k + 1]) {
            continue;
        }
        // walk outward until a deeper point or the edge; the higher of the two
        // side maxima sets the prominence
        let side = |range: &mut dyn Iterator<Item = usize>| {
            let mut top = r[k];
            for j in range {
                if r[j] < r[k] {
                    break;
                }
                top = top.max(r[j]);
            }
            top
        };
        let left = side(&mut (0..k).rev());
        let right = side(&mut (k + 1..n));
        if left.min(right) - r[k] > factor * noise {
            out.push(trace.field[k]);
        }
    }
    out
}
