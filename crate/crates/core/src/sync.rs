//! Windowed Pearson correlation between local observables and the
//! synchronized / anti-synchronized / time-delayed verdict derived from it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::ObservableSeries;

/// Sliding-window layout: windows of length `window` whose neighbours share `overlap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub window: f64,
    pub overlap: f64,
}

/// Fewest grid samples a window may hold.
pub const MIN_SAMPLES_PER_WINDOW: usize = 8;

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            window: 9.0,
            overlap: 6.0,
        }
    }
}

impl WindowConfig {
    pub fn hop(&self) -> f64 {
        self.window - self.overlap
    }

    /// Checks `0 ≤ overlap < window` and that a window spans enough samples
    /// of a grid with the given step.
    pub fn validate(&self, sample_step: f64) -> Result<()> {
        if !(self.overlap >= 0.0 && self.overlap < self.window) {
            return Err(Error::InvalidArgument(format!(
                "window overlap must satisfy 0 ≤ overlap < window, got overlap {} window {}",
                self.overlap, self.window
            )));
        }
        let samples = (self.window / sample_step + 1e-9).floor() as usize;
        if samples < MIN_SAMPLES_PER_WINDOW {
            return Err(Error::InvalidArgument(format!(
                "window {} holds only {samples} samples at step {sample_step}; need at least {MIN_SAMPLES_PER_WINDOW}",
                self.window
            )));
        }
        Ok(())
    }
}

/// Verdict thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncThresholds {
    /// `(anti-)synchronized` when the settled mean is within this of ±1.
    pub sync: f64,
    /// Settled when trailing windows stay within this of their mean.
    pub settle: f64,
    /// Fraction of windows (from the end) inspected for settling.
    pub settle_fraction: f64,
}

impl Default for SyncThresholds {
    fn default() -> Self {
        Self {
            sync: 0.05,
            settle: 0.02,
            settle_fraction: 0.25,
        }
    }
}

/// Pearson coefficients of one atom pair, window by window. `None` marks a
/// window where one series has zero variance.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedSeries {
    pub pair: (usize, usize),
    pub window: f64,
    pub centers: Vec<f64>,
    pub values: Vec<Option<f64>>,
}

impl WindowedSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(center, value)` of every defined window.
    pub fn defined(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.centers
            .iter()
            .zip(&self.values)
            .filter_map(|(&c, v)| v.map(|v| (c, v)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyncKind {
    Synchronized,
    AntiSynchronized,
    TimeDelayed,
    Unsettled,
}

impl fmt::Display for SyncKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyncKind::Synchronized => "synchronized",
            SyncKind::AntiSynchronized => "anti-synchronized",
            SyncKind::TimeDelayed => "time-delayed",
            SyncKind::Unsettled => "unsettled",
        })
    }
}

impl std::str::FromStr for SyncKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synchronized" => Ok(SyncKind::Synchronized),
            "anti-synchronized" => Ok(SyncKind::AntiSynchronized),
            "time-delayed" => Ok(SyncKind::TimeDelayed),
            "unsettled" => Ok(SyncKind::Unsettled),
            other => Err(Error::InvalidArgument(format!("unknown verdict `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncVerdict {
    pub kind: SyncKind,
    pub final_value: Option<f64>,
    pub settled_at: Option<f64>,
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "pearson needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument(
            "pearson needs at least two samples".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let denom = (sxx * syy).sqrt();
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / denom).clamp(-1.0, 1.0))
}

/// Pearson coefficient over windows starting at the first grid time and
/// advancing by `window − overlap`; partial trailing windows are dropped.
pub fn sliding_pearson(
    x: &ObservableSeries,
    y: &ObservableSeries,
    cfg: &WindowConfig,
) -> Result<WindowedSeries> {
    if x.times != y.times {
        return Err(Error::InvalidArgument(
            "series must share the same time grid".into(),
        ));
    }
    if x.values.len() != x.times.len() || y.values.len() != y.times.len() {
        return Err(Error::InvalidArgument("series length does not match its grid".into()));
    }
    if !(cfg.overlap >= 0.0 && cfg.overlap < cfg.window) {
        return Err(Error::InvalidArgument(format!(
            "window overlap must satisfy 0 ≤ overlap < window, got overlap {} window {}",
            cfg.overlap, cfg.window
        )));
    }
    let times = &x.times;
    let mut out = WindowedSeries {
        pair: (x.atom, y.atom),
        window: cfg.window,
        centers: Vec::new(),
        values: Vec::new(),
    };
    let (Some(&t0), Some(&t_end)) = (times.first(), times.last()) else {
        return Ok(out);
    };
    let eps = 1e-9 * cfg.window.max(1.0);
    let hop = cfg.hop();
    let mut k = 0usize;
    loop {
        let start = t0 + k as f64 * hop;
        let end = start + cfg.window;
        if end > t_end + eps {
            break;
        }
        let lo = times.partition_point(|&t| t < start - eps);
        let hi = times.partition_point(|&t| t < end - eps);
        let value = if hi - lo >= 2 {
            match pearson(&x.values[lo..hi], &y.values[lo..hi]) {
                Ok(v) => Some(v),
                Err(Error::UndefinedCorrelation) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        out.centers.push(start + 0.5 * cfg.window);
        out.values.push(value);
        k += 1;
    }
    Ok(out)
}

/// Settled when every defined value among the trailing `settle_fraction` of
/// windows lies within `settle` of their mean; the settled mean then decides
/// between synchronized, anti-synchronized and time-delayed.
pub fn classify(series: &WindowedSeries, thresholds: &SyncThresholds) -> SyncVerdict {
    let final_value = series.values.iter().rev().find_map(|v| *v);
    let unsettled = SyncVerdict {
        kind: SyncKind::Unsettled,
        final_value,
        settled_at: None,
    };
    let n = series.len();
    if n == 0 || final_value.is_none() {
        return unsettled;
    }
    let tail_len = ((thresholds.settle_fraction * n as f64).ceil() as usize).clamp(1, n);
    let tail: Vec<f64> = series.values[n - tail_len..].iter().filter_map(|v| *v).collect();
    if tail.is_empty() {
        return unsettled;
    }
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    if tail.iter().any(|v| (v - mean).abs() >= thresholds.settle) {
        return unsettled;
    }

    let mut settled_idx = n - 1;
    for idx in (0..n).rev() {
        match series.values[idx] {
            Some(v) if (v - mean).abs() >= thresholds.settle => break,
            _ => settled_idx = idx,
        }
    }
    // skip leading missing windows so the settle time points at data
    while series.values[settled_idx].is_none() && settled_idx + 1 < n {
        settled_idx += 1;
    }

    let kind = if mean >= 1.0 - thresholds.sync {
        SyncKind::Synchronized
    } else if mean <= -1.0 + thresholds.sync {
        SyncKind::AntiSynchronized
    } else {
        SyncKind::TimeDelayed
    };
    SyncVerdict {
        kind,
        final_value,
        settled_at: Some(series.centers[settled_idx]),
    }
}

/// Value of the last defined window that ends at or before `final_time`.
pub fn final_pearson(series: &WindowedSeries, final_time: f64) -> Option<f64> {
    let eps = 1e-9 * series.window.max(1.0);
    series
        .centers
        .iter()
        .zip(&series.values)
        .rev()
        .filter(|(&c, _)| c + 0.5 * series.window <= final_time + eps)
        .find_map(|(_, v)| *v)
}
