//! Beat detection, NN-interval cleaning and the twelve HRV features.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};
use core::fmt;

use num_complex::Complex64;

use crate::model::{HrvFeatures, NnSeries};
use crate::num::{diffs, mean, median, pop_std};
use crate::preprocess::PpgSegment;

/// Threshold elevations tried by [`detect_peaks`], as fractions of the
/// segment's peak-to-peak amplitude added to the moving average.
pub const ELEVATIONS: [f64; 8] = [0.05, 0.10, 0.15, 0.20, 0.30, 0.40, 0.60, 1.0];
pub const MOVING_AVERAGE_S: f64 = 0.75;
pub const PLAUSIBLE_BPM: (f64, f64) = (40.0, 180.0);
pub const NN_BOUNDS_MS: (f64, f64) = (300.0, 2000.0);
/// Largest accepted relative change from the previous accepted interval.
pub const MAX_SUCCESSIVE_CHANGE: f64 = 0.30;
pub const MIN_INTERVALS: usize = 10;
/// Smallest share of raw intervals that must survive rejection.
pub const MIN_ACCEPTED_FRACTION: f64 = 0.7;
pub const BREATHING_BAND_HZ: (f64, f64) = (0.1, 0.4);
pub const MIN_BREATHING_SPAN_S: f64 = 20.0;
const RESAMPLE_HZ: f64 = 4.0;
const SPECTRUM_STEP_HZ: f64 = 0.001;
const MIN_PEAK_POWER: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum HrvError {
    #[error("segment has not been bandpass filtered")]
    NotFiltered,
    #[error("no threshold elevation yields a plausible heart rate")]
    NoPlausiblePeaks,
    #[error("only {accepted} intervals survived artifact rejection")]
    TooFewIntervals { accepted: usize },
    #[error("artifact rejection kept {accepted} of {raw} intervals")]
    TooManyRejected { accepted: usize, raw: usize },
    #[error("{got} intervals given, {needed} needed")]
    NotEnoughIntervals { needed: usize, got: usize },
    #[error("interval series spans {span_s:.1} s, below the breathing-rate minimum")]
    SpanTooShort { span_s: f64 },
    #[error("no respiratory power in the NN series")]
    NoRespiratoryPower,
}

impl HrvError {
    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            HrvError::NotFiltered => "not_filtered",
            HrvError::NoPlausiblePeaks => "no_plausible_peaks",
            HrvError::TooFewIntervals { .. } => "too_few_intervals",
            HrvError::TooManyRejected { .. } => "too_many_rejected",
            HrvError::NotEnoughIntervals { .. } => "not_enough_intervals",
            HrvError::SpanTooShort { .. } => "span_too_short",
            HrvError::NoRespiratoryPower => "no_respiratory_power",
        }
    }
}

/// Pipeline stage a feature row was lost at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    PeakDetection,
    IntervalCleaning,
    Features,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::PeakDetection => "peak_detection",
            Stage::IntervalCleaning => "interval_cleaning",
            Stage::Features => "features",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureError {
    pub stage: Stage,
    pub error: HrvError,
}

impl fmt::Display for FeatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage.name(), self.error)
    }
}

impl core::error::Error for FeatureError {}

fn centered_moving_average(x: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

const REFINE_HALF_SPAN: usize = 4;
const REFINE_STEPS: usize = 100;

/// Sub-sample location of the local maximum near sample `at`, from a cubic
/// spline through the neighbouring samples searched at 1/100-sample steps.
fn refine_peak(x: &[f64], at: usize) -> f64 {
    let lo = at.saturating_sub(REFINE_HALF_SPAN);
    let hi = (at + REFINE_HALF_SPAN + 1).min(x.len());
    let knots: Vec<f64> = (lo..hi).map(|i| i as f64).collect();
    let spline = CubicSpline::new(&knots, &x[lo..hi]);
    let origin = at as f64 - 1.0;
    (0..=2 * REFINE_STEPS)
        .map(|k| origin + k as f64 / REFINE_STEPS as f64)
        .fold((at as f64, x[at]), |best, pos| {
            let v = spline.eval(pos);
            if v > best.1 {
                (pos, v)
            } else {
                best
            }
        })
        .0
}

/// Fractional sample positions of the maxima of every run above `threshold`.
/// Runs whose maximum sits on the first or last sample are not peaks.
fn region_maxima(x: &[f64], threshold: &[f64]) -> Vec<f64> {
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < x.len() {
        if x[i] <= threshold[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < x.len() && x[i] > threshold[i] {
            i += 1;
        }
        let run = &x[start..i];
        let rel = run.iter().enumerate().fold(0, |best, (k, v)| if *v > run[best] { k } else { best });
        let at = start + rel;
        if at > 0 && at + 1 < x.len() {
            peaks.push(refine_peak(x, at));
        }
    }
    peaks
}

/// Adaptive-threshold beat detection on a filtered segment.
///
/// For each candidate elevation the threshold is the 0.75 s moving average
/// raised by that fraction of the segment amplitude; the maximum of every run
/// above it is a beat. Among elevations whose implied heart rate is within
/// 40..=180 BPM, the one with the least RR-interval spread wins. The returned
/// series carries peak times and raw successive intervals.
pub fn detect_peaks(segment: &PpgSegment) -> Result<NnSeries, HrvError> {
    if !segment.filtered {
        return Err(HrvError::NotFiltered);
    }
    let x = &segment.values;
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let amplitude = hi - lo;
    if !amplitude.is_finite() || amplitude <= 0.0 {
        return Err(HrvError::NoPlausiblePeaks);
    }
    let width = (libm::round(MOVING_AVERAGE_S * segment.sample_rate_hz) as usize).max(1);
    let average = centered_moving_average(x, width);

    let mut best: Option<(f64, Vec<f64>)> = None;
    for elevation in ELEVATIONS {
        let threshold: Vec<f64> = average.iter().map(|m| m + elevation * amplitude).collect();
        let positions = region_maxima(x, &threshold);
        if positions.len() < 2 {
            continue;
        }
        let times: Vec<f64> = positions.iter().map(|&p| segment.time_ms(p)).collect();
        let rr = diffs(&times);
        let bpm = 60_000.0 / mean(&rr);
        if !(PLAUSIBLE_BPM.0..=PLAUSIBLE_BPM.1).contains(&bpm) {
            continue;
        }
        let spread = pop_std(&rr);
        if best.as_ref().is_none_or(|(s, _)| spread < *s) {
            best = Some((spread, times));
        }
    }
    let (_, peak_times_ms) = best.ok_or(HrvError::NoPlausiblePeaks)?;
    Ok(NnSeries { intervals_ms: diffs(&peak_times_ms), peak_times_ms })
}

/// Successive peak differences with artifact rejection: intervals outside
/// 300..=2000 ms or changing by more than 30 % from the previous accepted
/// interval are dropped. At least ten, and at least 70 % of the raw
/// intervals, must survive.
pub fn nn_intervals(peaks: &NnSeries) -> Result<NnSeries, HrvError> {
    let raw = diffs(&peaks.peak_times_ms);
    let mut accepted: Vec<f64> = Vec::with_capacity(raw.len());
    for &rr in &raw {
        if !(NN_BOUNDS_MS.0..=NN_BOUNDS_MS.1).contains(&rr) {
            continue;
        }
        if let Some(&prev) = accepted.last() {
            if libm::fabs(rr - prev) > MAX_SUCCESSIVE_CHANGE * prev {
                continue;
            }
        }
        accepted.push(rr);
    }
    if accepted.len() < MIN_INTERVALS {
        return Err(HrvError::TooFewIntervals { accepted: accepted.len() });
    }
    if (accepted.len() as f64) < MIN_ACCEPTED_FRACTION * raw.len() as f64 {
        return Err(HrvError::TooManyRejected { accepted: accepted.len(), raw: raw.len() });
    }
    Ok(NnSeries { intervals_ms: accepted, peak_times_ms: peaks.peak_times_ms.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomain {
    pub bpm: f64,
    pub ibi: f64,
    pub sdnn: f64,
    pub rmssd: f64,
    pub pnn20: f64,
    pub pnn50: f64,
    pub hr_mad: f64,
}

fn need(nn: &[f64], needed: usize) -> Result<(), HrvError> {
    if nn.len() < needed {
        Err(HrvError::NotEnoughIntervals { needed, got: nn.len() })
    } else {
        Ok(())
    }
}

/// Time-domain statistics of an NN series (ms). Standard deviations are
/// population estimates; pNN thresholds are strict.
pub fn time_domain_features(nn: &[f64]) -> Result<TimeDomain, HrvError> {
    need(nn, 2)?;
    let ibi = mean(nn);
    let d = diffs(nn);
    let rmssd = libm::sqrt(d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64);
    let share_above =
        |limit: f64| d.iter().filter(|v| libm::fabs(**v) > limit).count() as f64 / d.len() as f64;
    let center = median(nn);
    let deviations: Vec<f64> = nn.iter().map(|v| libm::fabs(v - center)).collect();
    Ok(TimeDomain {
        bpm: 60_000.0 / ibi,
        ibi,
        sdnn: pop_std(nn),
        rmssd,
        pnn20: share_above(20.0),
        pnn50: share_above(50.0),
        hr_mad: median(&deviations),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poincare {
    pub sd1: f64,
    pub sd2: f64,
    /// Ellipse area π·sd1·sd2.
    pub s: f64,
    /// `None` when `sd2` is zero.
    pub sd1_sd2: Option<f64>,
}

/// Poincaré descriptors over the pairs `(nn[i], nn[i + 1])`.
pub fn poincare_features(nn: &[f64]) -> Result<Poincare, HrvError> {
    need(nn, 2)?;
    let minor: Vec<f64> = nn.windows(2).map(|w| (w[1] - w[0]) / SQRT_2).collect();
    let major: Vec<f64> = nn.windows(2).map(|w| (w[1] + w[0]) / SQRT_2).collect();
    let sd1 = pop_std(&minor);
    let sd2 = pop_std(&major);
    Ok(Poincare { sd1, sd2, s: PI * sd1 * sd2, sd1_sd2: (sd2 > 0.0).then(|| sd1 / sd2) })
}

/// Natural cubic spline through `(xs, ys)`, `xs` strictly increasing.
struct CubicSpline<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    second: Vec<f64>,
}

impl<'a> CubicSpline<'a> {
    fn new(xs: &'a [f64], ys: &'a [f64]) -> Self {
        let n = xs.len();
        let mut second = alloc::vec![0.0; n];
        if n > 2 {
            // tridiagonal system for interior second derivatives
            let mut c_prime = alloc::vec![0.0; n];
            let mut d_prime = alloc::vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let a = h0;
                let b = 2.0 * (h0 + h1);
                let c = h1;
                let d = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
                let denom = b - a * c_prime[i - 1];
                c_prime[i] = c / denom;
                d_prime[i] = (d - a * d_prime[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                second[i] = d_prime[i] - c_prime[i] * second[i + 1];
            }
        }
        CubicSpline { xs, ys, second }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let k = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1);
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * self.ys[k - 1]
            + b * self.ys[k]
            + ((a * a * a - a) * self.second[k - 1] + (b * b * b - b) * self.second[k]) * h * h / 6.0
    }
}

/// Dominant respiratory frequency (Hz) of an NN series.
///
/// The series is placed at cumulative beat times, interpolated with a natural
/// cubic spline onto a 4 Hz grid, mean-centered, and its periodogram searched
/// on a 0.001 Hz grid over 0.1..=0.4 Hz.
pub fn breathing_rate(nn: &[f64]) -> Result<f64, HrvError> {
    need(nn, MIN_INTERVALS)?;
    let mut times = Vec::with_capacity(nn.len());
    let mut t = 0.0;
    for v in nn {
        t += v / 1000.0;
        times.push(t);
    }
    let span_s = times[times.len() - 1] - times[0];
    if span_s < MIN_BREATHING_SPAN_S {
        return Err(HrvError::SpanTooShort { span_s });
    }
    let spline = CubicSpline::new(&times, nn);
    let dt = 1.0 / RESAMPLE_HZ;
    let count = libm::floor(span_s * RESAMPLE_HZ) as usize + 1;
    let mut grid: Vec<f64> = (0..count).map(|k| spline.eval(times[0] + k as f64 * dt)).collect();
    let m = mean(&grid);
    grid.iter_mut().for_each(|v| *v -= m);

    let steps = libm::round((BREATHING_BAND_HZ.1 - BREATHING_BAND_HZ.0) / SPECTRUM_STEP_HZ) as usize;
    let mut best = (BREATHING_BAND_HZ.0, f64::NEG_INFINITY);
    for s in 0..=steps {
        let f = BREATHING_BAND_HZ.0 + s as f64 * SPECTRUM_STEP_HZ;
        let w = 2.0 * PI * f * dt;
        let step = Complex64::new(libm::cos(w), -libm::sin(w));
        let mut phasor = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for v in &grid {
            acc += phasor * v;
            phasor *= step;
        }
        let (re, im) = (acc.re, acc.im);
        let power = (re * re + im * im) * dt / count as f64;
        if power > best.1 {
            best = (f, power);
        }
    }
    if best.1 < MIN_PEAK_POWER {
        return Err(HrvError::NoRespiratoryPower);
    }
    Ok(best.0)
}

/// Full feature extraction for one filtered segment. Failure at peak
/// detection, interval cleaning or the core features loses the whole row;
/// an unavailable breathing rate only leaves that feature empty.
pub fn compute_features(segment: &PpgSegment) -> Result<HrvFeatures, FeatureError> {
    let tag = |stage| move |error| FeatureError { stage, error };
    let peaks = detect_peaks(segment).map_err(tag(Stage::PeakDetection))?;
    let nn = nn_intervals(&peaks).map_err(tag(Stage::IntervalCleaning))?;
    features_from_nn(&nn.intervals_ms).map_err(tag(Stage::Features))
}

/// All twelve features from a cleaned NN series.
pub fn features_from_nn(nn: &[f64]) -> Result<HrvFeatures, HrvError> {
    let td = time_domain_features(nn)?;
    let pc = poincare_features(nn)?;
    Ok(HrvFeatures {
        bpm: td.bpm,
        ibi: td.ibi,
        sdnn: td.sdnn,
        rmssd: td.rmssd,
        pnn20: td.pnn20,
        pnn50: td.pnn50,
        hr_mad: td.hr_mad,
        sd1: pc.sd1,
        sd2: pc.sd2,
        s: pc.s,
        sd1_sd2: pc.sd1_sd2,
        breathing_rate: breathing_rate(nn).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{bandpass, extract_window, BandpassConfig};
    use crate::synth::{gen_ppg, IbiSource, SynthSpec};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn peaks_at(times: &[f64]) -> NnSeries {
        NnSeries { intervals_ms: diffs(times), peak_times_ms: times.to_vec() }
    }

    fn filtered_synth(ibis: Vec<f64>, noise_sd: f64) -> (PpgSegment, crate::synth::GroundTruth) {
        let spec = SynthSpec { ibi: IbiSource::Sequence(ibis), noise_sd, sample_rate_hz: 25.0, seed: 3 };
        let (session, truth) = gen_ppg(&spec, "s", "p", 0).unwrap();
        let end = session.samples.last().unwrap().timestamp_ms;
        let seg = extract_window(&session, end / 2, (end / 2) as f64 / 1000.0).unwrap();
        (bandpass(&seg, &BandpassConfig::default()).unwrap(), truth)
    }

    #[test]
    fn constant_peaks_give_constant_intervals() {
        let nn = peaks_at(&[0.0, 1000.0, 2000.0, 3000.0]);
        assert_eq!(diffs(&nn.peak_times_ms), vec![1000.0; 3]);
        // the cleaner itself needs ten survivors
        assert_eq!(nn_intervals(&nn), Err(HrvError::TooFewIntervals { accepted: 3 }));
        let long: Vec<f64> = (0..12).map(|k| 1000.0 * k as f64).collect();
        assert_eq!(nn_intervals(&peaks_at(&long)).unwrap().intervals_ms, vec![1000.0; 11]);
    }

    #[test]
    fn mostly_rejected_series_is_unusable() {
        // 12 good intervals followed by 8 wild ones
        let mut times: Vec<f64> = (0..13).map(|k| 1000.0 * k as f64).collect();
        for k in 0..8 {
            let last = *times.last().unwrap();
            times.push(last + if k % 2 == 0 { 400.0 } else { 1900.0 });
        }
        assert_eq!(nn_intervals(&peaks_at(&times)), Err(HrvError::TooManyRejected { accepted: 12, raw: 20 }));
    }

    #[test]
    fn abrupt_change_is_rejected() {
        let mut times = vec![0.0, 1000.0, 2000.0, 2600.0, 3600.0];
        let accepted = |times: &[f64]| match nn_intervals(&peaks_at(times)) {
            Ok(nn) => nn.intervals_ms,
            Err(HrvError::TooFewIntervals { accepted }) => vec![f64::NAN; accepted],
            Err(e) => panic!("{e}"),
        };
        assert_eq!(accepted(&times).len(), 3);
        // extend with regular beats so the series clears the minimum
        for k in 1..=8 {
            times.push(3600.0 + 1000.0 * k as f64);
        }
        let nn = accepted(&times);
        assert_eq!(nn, vec![1000.0; 11]);
    }

    #[test]
    fn out_of_bounds_interval_leaves_too_few() {
        assert_eq!(nn_intervals(&peaks_at(&[0.0, 250.0])), Err(HrvError::TooFewIntervals { accepted: 0 }));
    }

    #[test]
    fn constant_series_time_domain() {
        let td = time_domain_features(&[1000.0; 12]).unwrap();
        assert_eq!(td.bpm, 60.0);
        assert_eq!(td.ibi, 1000.0);
        assert_eq!((td.sdnn, td.rmssd, td.pnn20, td.pnn50, td.hr_mad), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn two_point_series() {
        let td = time_domain_features(&[800.0, 1000.0]).unwrap();
        assert!(close(td.sdnn, 100.0, 1e-9));
        assert!(close(td.rmssd, 200.0, 1e-9));
    }

    #[test]
    fn pnn_and_mad_by_hand() {
        let td = time_domain_features(&[800.0, 860.0, 865.0]).unwrap();
        assert!(close(td.pnn50, 0.5, 1e-12));
        assert!(close(td.pnn20, 0.5, 1e-12));
        assert!(close(td.hr_mad, 5.0, 1e-12));
    }

    #[test]
    fn pnn_threshold_is_strict() {
        let td = time_domain_features(&[800.0, 820.0, 870.0]).unwrap();
        assert_eq!(td.pnn20, 0.5);
        assert_eq!(td.pnn50, 0.0);
    }

    #[test]
    fn poincare_constant_alternating_monotone() {
        let c = poincare_features(&[900.0; 12]).unwrap();
        assert_eq!((c.sd1, c.sd2, c.s, c.sd1_sd2), (0.0, 0.0, 0.0, None));

        let alt = poincare_features(&[800.0, 1000.0, 800.0, 1000.0, 800.0]).unwrap();
        assert!(close(alt.sd1, 200.0 / SQRT_2, 1e-9));
        assert!(close(alt.sd1, 141.421, 1e-3));
        assert!(close(alt.sd2, 0.0, 1e-9));
        assert!(close(alt.s, 0.0, 1e-6));

        let mono = poincare_features(&[800.0, 850.0, 900.0, 950.0, 1000.0]).unwrap();
        assert!(close(mono.sd1, 0.0, 1e-9));
        assert!(mono.sd2 > 0.0);
    }

    fn modulated_nn(freq_hz: f64, seconds: f64) -> Vec<f64> {
        let mut t = 0.0;
        let mut nn = Vec::new();
        while t < seconds {
            let v = 1000.0 + 100.0 * (2.0 * PI * freq_hz * t).sin();
            nn.push(v);
            t += v / 1000.0;
        }
        nn
    }

    #[test]
    fn breathing_rate_recovers_modulation() {
        for f in [0.25, 0.15] {
            let est = breathing_rate(&modulated_nn(f, 60.0)).unwrap();
            assert!(close(est, f, 0.02), "{f}: {est}");
        }
    }

    #[test]
    fn breathing_rate_missing_for_constant_or_short() {
        assert_eq!(breathing_rate(&[1000.0; 40]), Err(HrvError::NoRespiratoryPower));
        assert!(matches!(breathing_rate(&[1000.0; 15]), Err(HrvError::SpanTooShort { .. })));
        assert!(matches!(breathing_rate(&[1000.0; 5]), Err(HrvError::NotEnoughIntervals { .. })));
    }

    #[test]
    fn spline_interpolates_knots_and_lines() {
        let xs = [0.0, 1.0, 2.5, 3.0, 5.0];
        let ys = [1.0, 3.0, 6.0, 7.0, 11.0];
        let s = CubicSpline::new(&xs, &ys);
        for (x, y) in xs.iter().zip(ys) {
            assert!(close(s.eval(*x), y, 1e-12));
        }
        // a straight line is reproduced everywhere
        assert!(close(s.eval(1.7), 1.0 + 2.0 * 1.7, 1e-12));
    }

    #[test]
    fn detects_every_beat_of_clean_sixty_bpm() {
        let (seg, truth) = filtered_synth(vec![1000.0; 62], 0.0);
        let peaks = detect_peaks(&seg).unwrap();
        let from = seg.start_ms as f64;
        let to = seg.time_ms(seg.values.len() as f64);
        let expected: Vec<f64> =
            truth.beat_times_ms.iter().copied().filter(|t| *t >= from && *t < to).collect();
        assert!((59..=61).contains(&peaks.peak_times_ms.len()), "{}", peaks.peak_times_ms.len());
        for t in &expected {
            let nearest = peaks.peak_times_ms.iter().fold(f64::INFINITY, |m, p| m.min((p - t).abs()));
            assert!(nearest <= 40.0, "beat {t} off by {nearest}");
        }
    }

    #[test]
    fn flat_segment_has_no_peaks() {
        let seg = PpgSegment { values: vec![0.0; 1500], sample_rate_hz: 25.0, start_ms: 0, filtered: true };
        assert_eq!(detect_peaks(&seg), Err(HrvError::NoPlausiblePeaks));
        let raw = PpgSegment { filtered: false, ..seg };
        assert_eq!(detect_peaks(&raw), Err(HrvError::NotFiltered));
    }

    #[test]
    fn extreme_rates_are_tracked() {
        for bpm in [45.0, 170.0] {
            let ibi = 60_000.0 / bpm;
            let n = (62_000.0 / ibi) as usize;
            let (seg, _) = filtered_synth(vec![ibi; n], 0.0);
            let f = compute_features(&seg).unwrap();
            assert!((f.bpm - bpm).abs() / bpm < 0.02, "{bpm}: {}", f.bpm);
        }
    }

    #[test]
    fn seventy_two_bpm_within_one_percent() {
        let ibi = 60_000.0 / 72.0;
        let (seg, _) = filtered_synth(vec![ibi; 75], 0.0);
        let f = compute_features(&seg).unwrap();
        assert!((f.bpm - 72.0).abs() / 72.0 < 0.01);
        assert!((f.bpm * f.ibi - 60_000.0).abs() / 60_000.0 < 1e-9);
    }

    #[test]
    fn white_noise_loses_the_row() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..1500).map(|_| rng.random_range(-1.0..1.0)).collect();
        let seg = PpgSegment { values, sample_rate_hz: 25.0, start_ms: 0, filtered: false };
        let seg = bandpass(&seg, &BandpassConfig::default()).unwrap();
        let err = compute_features(&seg).unwrap_err();
        assert!(matches!(err.stage, Stage::PeakDetection | Stage::IntervalCleaning), "{err}");
    }
}
