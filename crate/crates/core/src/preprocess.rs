//! Analysis-window extraction around a self-report and bandpass filtering.

use alloc::vec::Vec;

use crate::filter::{BandpassFilter, DesignError};
use crate::model::PpgSession;

/// A contiguous run of PPG values taken from one session.
#[derive(Debug, Clone, PartialEq)]
pub struct PpgSegment {
    pub values: Vec<f64>,
    pub sample_rate_hz: f64,
    /// Timestamp of `values[0]`.
    pub start_ms: i64,
    pub filtered: bool,
}

impl PpgSegment {
    pub fn duration_s(&self) -> f64 {
        self.values.len() as f64 / self.sample_rate_hz
    }

    /// Timestamp of sample `index`, in ms (may be fractional).
    pub fn time_ms(&self, index: f64) -> f64 {
        self.start_ms as f64 + index * 1000.0 / self.sample_rate_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PreprocessError {
    #[error("window holds {actual_s:.2} s of signal, {required_s:.2} s required")]
    WindowTooShort { actual_s: f64, required_s: f64 },
    #[error("no samples inside the analysis window")]
    EmptyWindow,
    #[error(transparent)]
    InvalidBand(#[from] DesignError),
    #[error("segment is already filtered")]
    AlreadyFiltered,
}

impl PreprocessError {
    pub fn code(&self) -> &'static str {
        match self {
            PreprocessError::WindowTooShort { .. } => "window_too_short",
            PreprocessError::EmptyWindow => "empty_window",
            PreprocessError::InvalidBand(_) => "invalid_band",
            PreprocessError::AlreadyFiltered => "already_filtered",
        }
    }
}

/// Default half width of the analysis window, seconds.
pub const DEFAULT_HALF_WIDTH_S: f64 = 30.0;

/// Collects the samples with timestamps in `[report - half, report + half)`.
///
/// Windows cut short by a session edge are kept as long as they still hold at
/// least `half_width_s` seconds of signal.
pub fn extract_window(
    session: &PpgSession,
    report_time_ms: i64,
    half_width_s: f64,
) -> Result<PpgSegment, PreprocessError> {
    let half_ms = libm::round(half_width_s * 1000.0) as i64;
    let (lo, hi) = (report_time_ms - half_ms, report_time_ms + half_ms);
    let start = session.samples.partition_point(|s| s.timestamp_ms < lo);
    let end = session.samples.partition_point(|s| s.timestamp_ms < hi);
    if start >= end {
        return Err(PreprocessError::EmptyWindow);
    }
    let window = &session.samples[start..end];
    let segment = PpgSegment {
        values: window.iter().map(|s| s.value).collect(),
        sample_rate_hz: session.sample_rate_hz,
        start_ms: window[0].timestamp_ms,
        filtered: false,
    };
    let actual_s = segment.duration_s();
    // tolerate float noise in count / rate
    if actual_s + 1e-9 < half_width_s || segment.values.len() < 2 {
        return Err(PreprocessError::WindowTooShort { actual_s, required_s: half_width_s });
    }
    Ok(segment)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandpassConfig {
    pub low_hz: f64,
    pub high_hz: f64,
    pub order: usize,
}

impl Default for BandpassConfig {
    fn default() -> Self {
        BandpassConfig { low_hz: 0.5, high_hz: 8.0, order: 2 }
    }
}

/// Zero-phase Butterworth bandpass. Pads `3 * order` samples per side by odd
/// reflection before filtering forward and backward.
pub fn bandpass(segment: &PpgSegment, config: &BandpassConfig) -> Result<PpgSegment, PreprocessError> {
    if segment.filtered {
        return Err(PreprocessError::AlreadyFiltered);
    }
    let filter = BandpassFilter::design(config.order, config.low_hz, config.high_hz, segment.sample_rate_hz)?;
    Ok(PpgSegment {
        values: filter.filtfilt(&segment.values, 3 * config.order),
        sample_rate_hz: segment.sample_rate_hz,
        start_ms: segment.start_ms,
        filtered: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PpgSample;
    use core::f64::consts::PI;

    fn session_25hz(seconds: i64) -> PpgSession {
        let samples = (0..seconds * 25).map(|i| PpgSample { timestamp_ms: i * 40, value: 500.0 }).collect();
        PpgSession::new("s", "p", 25.0, samples)
    }

    fn segment(values: Vec<f64>) -> PpgSegment {
        PpgSegment { values, sample_rate_hz: 25.0, start_ms: 0, filtered: false }
    }

    fn central(values: &[f64]) -> &[f64] {
        // central 40 s of a 60 s, 25 Hz record
        &values[250..1250]
    }

    fn peak_abs(values: &[f64]) -> f64 {
        values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    #[test]
    fn centered_window_has_sixty_seconds() {
        let seg = extract_window(&session_25hz(200), 100_000, 30.0).unwrap();
        assert_eq!(seg.values.len(), 1500);
        assert_eq!(seg.start_ms, 70_000);
        assert!(!seg.filtered);
    }

    #[test]
    fn truncated_window_at_session_start_is_accepted() {
        let seg = extract_window(&session_25hz(200), 0, 30.0).unwrap();
        assert_eq!(seg.values.len(), 750);
        assert_eq!(seg.start_ms, 0);
    }

    #[test]
    fn report_after_session_end_is_too_short() {
        let err = extract_window(&session_25hz(200), 210_000, 30.0).unwrap_err();
        match err {
            PreprocessError::WindowTooShort { actual_s, .. } => assert!((actual_s - 20.0).abs() < 1e-9),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(extract_window(&session_25hz(200), 500_000, 30.0), Err(PreprocessError::EmptyWindow));
    }

    #[test]
    fn window_timestamps_stay_inside_interval() {
        let s = session_25hz(100);
        for report in [13_017i64, 50_000, 61_111, 79_999] {
            let Ok(seg) = extract_window(&s, report, 30.0) else { continue };
            let first = seg.start_ms;
            let last = seg.start_ms + (seg.values.len() as i64 - 1) * 40;
            assert!(first >= report - 30_000 && last < report + 30_000);
        }
    }

    const NARROW: BandpassConfig = BandpassConfig { low_hz: 0.5, high_hz: 4.0, order: 2 };

    fn sine(freq_hz: f64) -> Vec<f64> {
        (0..1500).map(|i| (2.0 * PI * freq_hz * i as f64 / 25.0).sin()).collect()
    }

    #[test]
    fn dc_is_removed() {
        for cfg in [BandpassConfig::default(), NARROW] {
            let y = bandpass(&segment(vec![812.5; 1500]), &cfg).unwrap();
            assert!(y.filtered);
            assert!(peak_abs(central(&y.values)) < 1e-6 * 812.5);
        }
    }

    #[test]
    fn heart_band_sinusoid_passes() {
        for cfg in [BandpassConfig::default(), NARROW] {
            let y = bandpass(&segment(sine(1.2)), &cfg).unwrap();
            assert!(peak_abs(central(&y.values)) >= 0.9);
        }
    }

    #[test]
    fn slow_drift_is_rejected() {
        for cfg in [BandpassConfig::default(), NARROW] {
            let y = bandpass(&segment(sine(0.05)), &cfg).unwrap();
            assert!(peak_abs(central(&y.values)) <= 0.1);
        }
    }

    #[test]
    fn filtering_twice_is_refused() {
        let y = bandpass(&segment(vec![1.0; 100]), &BandpassConfig::default()).unwrap();
        assert_eq!(bandpass(&y, &BandpassConfig::default()), Err(PreprocessError::AlreadyFiltered));
        let bad = BandpassConfig { low_hz: 4.0, high_hz: 0.5, order: 2 };
        assert!(matches!(bandpass(&segment(vec![1.0; 100]), &bad), Err(PreprocessError::InvalidBand(_))));
    }
}
