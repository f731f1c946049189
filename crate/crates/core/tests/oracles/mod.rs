//! Reference computations shared by the integration and acceptance tests.
#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, StudentsT};
use valence_core::hrv;
use valence_core::preprocess::{self, BandpassConfig};
use valence_core::synth::{gen_ppg, IbiParams, IbiSource, SynthSpec};
use valence_core::Label;

/// Textbook single-pass sums formula for Pearson's r.
pub fn direct_r(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt()
}

/// Two-sided p-value through statrs' Student's t CDF.
pub fn reference_p(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    2.0 * StudentsT::new(0.0, 1.0, df).unwrap().cdf(-t.abs())
}

fn population_sd(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct NnStats {
    pub bpm: f64,
    pub sdnn: f64,
    pub rmssd: f64,
    pub sd1: f64,
    pub sd2: f64,
}

impl NnStats {
    pub fn from_nn(nn: &[f64]) -> NnStats {
        let mean = nn.iter().sum::<f64>() / nn.len() as f64;
        let diffs: Vec<f64> = nn.windows(2).map(|w| w[1] - w[0]).collect();
        let sums: Vec<f64> = nn.windows(2).map(|w| w[1] + w[0]).collect();
        NnStats {
            bpm: 60_000.0 / mean,
            sdnn: population_sd(nn),
            rmssd: (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt(),
            sd1: population_sd(&diffs) / 2f64.sqrt(),
            sd2: population_sd(&sums) / 2f64.sqrt(),
        }
    }

    /// Relative errors of bpm, sdnn, rmssd, sd1, sd2 against `truth`.
    pub fn rel_errors(&self, truth: &NnStats) -> [f64; 5] {
        let rel = |a: f64, b: f64| (a - b) / b;
        [
            rel(self.bpm, truth.bpm),
            rel(self.sdnn, truth.sdnn),
            rel(self.rmssd, truth.rmssd),
            rel(self.sd1, truth.sd1),
            rel(self.sd2, truth.sd2),
        ]
    }
}

/// Outcome of extracting features from clean synthetic signal `index` of 100,
/// spanning 45 to 170 BPM.
#[derive(Debug, Clone)]
pub struct HrvCase {
    pub index: u64,
    pub bpm: f64,
    pub result: Result<[f64; 5], String>,
}

impl HrvCase {
    pub fn passes(&self) -> bool {
        match &self.result {
            Ok(e) => e[0].abs() <= 0.01 && e[1..].iter().all(|v| v.abs() <= 0.02),
            Err(_) => false,
        }
    }
}

pub fn hrv_case(index: u64) -> HrvCase {
    let bpm = 45.0 + 125.0 * index as f64 / 99.0;
    let ibi = 60_000.0 / bpm;
    let sdnn = 0.06 * ibi;
    let spec = SynthSpec {
        ibi: IbiSource::Generated(IbiParams {
            mean_ibi_ms: ibi,
            sdnn_target_ms: sdnn,
            respiratory_mod_hz: 0.15 + 0.002 * index as f64,
            respiratory_mod_depth_ms: sdnn,
            duration_s: 70.0,
        }),
        noise_sd: 0.0,
        sample_rate_hz: 25.0,
        seed: index,
    };
    let result = (|| {
        let (session, truth) = gen_ppg(&spec, "s", "p", 0).map_err(|e| e.to_string())?;
        let window = preprocess::extract_window(&session, 35_000, 30.0).map_err(|e| e.to_string())?;
        let filtered =
            preprocess::bandpass(&window, &BandpassConfig::default()).map_err(|e| e.to_string())?;
        let peaks = hrv::detect_peaks(&filtered).map_err(|e| e.to_string())?;
        let features = hrv::compute_features(&filtered).map_err(|e| e.to_string())?;
        // the true intervals between the beats the detector spanned
        let first = peaks.peak_times_ms[0];
        let last = *peaks.peak_times_ms.last().unwrap();
        let nn = truth.nn_within(first - 100.0, last + 100.0);
        let got = NnStats {
            bpm: features.bpm,
            sdnn: features.sdnn,
            rmssd: features.rmssd,
            sd1: features.sd1,
            sd2: features.sd2,
        };
        Ok(got.rel_errors(&NnStats::from_nn(&nn)))
    })();
    HrvCase { index, bpm, result }
}

/// Exact Naive Bayes decision with every value a multiple of 1/2 and alpha 1.
///
/// Values are given doubled (0, 1, 2). Squaring both class posteriors turns
/// every exponent into an integer, so the comparison is done on integer
/// products with no rounding at all. Ties go to high.
pub fn exact_mnb_argmax(train: &[Vec<u8>], labels: &[Label], x: &[u8]) -> Label {
    let f = x.len();
    let class = |want: Label| {
        let rows: Vec<&Vec<u8>> =
            train.iter().zip(labels).filter(|(_, l)| **l == want).map(|(r, _)| r).collect();
        let sums: Vec<u128> = (0..f).map(|j| rows.iter().map(|r| u128::from(r[j])).sum()).collect();
        let total: u128 = sums.iter().sum();
        // doubled theta: (sum + 2) / (total + 2F)
        let num: Vec<u128> = sums.iter().map(|s| s + 2).collect();
        (rows.len() as u128, num, total + 2 * f as u128)
    };
    let (nh, num_h, den_h) = class(Label::High);
    let (nl, num_l, den_l) = class(Label::Low);
    let e: u32 = x.iter().map(|&v| u32::from(v)).sum();
    let prod = |num: &[u128]| x.iter().zip(num).map(|(&v, n)| n.pow(u32::from(v))).product::<u128>();
    // nh² Πθh^(2x) vs nl² Πθl^(2x) with denominators cleared
    let high = nh * nh * prod(&num_h) * den_l.pow(e);
    let low = nl * nl * prod(&num_l) * den_h.pow(e);
    if high >= low {
        Label::High
    } else {
        Label::Low
    }
}

/// Every vector of length `f` over `{0, 1, 2}`.
pub fn grid(f: usize) -> Vec<Vec<u8>> {
    (0..3usize.pow(f as u32))
        .map(|mut k| {
            (0..f)
                .map(|_| {
                    let v = (k % 3) as u8;
                    k /= 3;
                    v
                })
                .collect()
        })
        .collect()
}
