//! Synthetic PPG and cohort generator with known beat timing.
//!
//! The waveform is deliberately simple: a skewed raised-cosine pulse per beat
//! on top of a constant baseline, a 0.05 Hz drift and white Gaussian noise.
//! What matters is that every beat time is known exactly.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::model::{Emotion, PpgSample, PpgSession, SurveyResponse};

pub const MIN_IBI_MS: f64 = 300.0;
pub const MAX_IBI_MS: f64 = 2000.0;

const PULSE_RISE_MS: f64 = 120.0;
const PULSE_FALL_MS: f64 = 180.0;
const PULSE_AMPLITUDE: f64 = 120.0;
const BASELINE: f64 = 2000.0;
const DRIFT_HZ: f64 = 0.05;
const DRIFT_AMPLITUDE: f64 = 40.0;

/// Parameters for a generated interbeat-interval sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbiParams {
    pub mean_ibi_ms: f64,
    /// Target standard deviation of the whole sequence.
    pub sdnn_target_ms: f64,
    pub respiratory_mod_hz: f64,
    /// Amplitude (ms) of the sinusoidal respiratory modulation.
    pub respiratory_mod_depth_ms: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IbiSource {
    /// Explicit intervals; beat `k` falls at the sum of the first `k + 1`.
    Sequence(Vec<f64>),
    Generated(IbiParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub ibi: IbiSource,
    pub noise_sd: f64,
    pub sample_rate_hz: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.noise_sd.is_nan() || self.noise_sd < 0.0 {
            return Err(SynthError::InvalidSpec("noise_sd must be non-negative"));
        }
        if self.sample_rate_hz.is_nan() || self.sample_rate_hz <= 0.0 {
            return Err(SynthError::InvalidSpec("sample rate must be positive"));
        }
        match &self.ibi {
            IbiSource::Sequence(seq) => {
                if seq.is_empty() {
                    return Err(SynthError::InvalidSpec("empty interval sequence"));
                }
                if seq.iter().any(|x| !(MIN_IBI_MS..=MAX_IBI_MS).contains(x)) {
                    return Err(SynthError::InvalidSpec("interval outside 300..=2000 ms"));
                }
            }
            IbiSource::Generated(p) => {
                if !(MIN_IBI_MS..=MAX_IBI_MS).contains(&p.mean_ibi_ms) {
                    return Err(SynthError::InvalidSpec("mean interval outside 300..=2000 ms"));
                }
                if !(p.sdnn_target_ms >= 0.0 && p.respiratory_mod_depth_ms >= 0.0) {
                    return Err(SynthError::InvalidSpec("negative variability"));
                }
                if p.duration_s.is_nan() || p.duration_s <= 0.0 {
                    return Err(SynthError::InvalidSpec("duration must be positive"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(&'static str),
}

/// Ground truth for a generated session.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Absolute beat (pulse peak) times, ms.
    pub beat_times_ms: Vec<f64>,
    /// Intervals between consecutive beats; `nn_ms[k]` ends at `beat_times_ms[k]`.
    pub nn_ms: Vec<f64>,
}

impl GroundTruth {
    /// Intervals whose both end beats lie in `[from_ms, to_ms)`.
    pub fn nn_within(&self, from_ms: f64, to_ms: f64) -> Vec<f64> {
        self.beat_times_ms
            .windows(2)
            .filter(|w| w[0] >= from_ms && w[1] < to_ms)
            .map(|w| w[1] - w[0])
            .collect()
    }
}

/// Draws an interval sequence: mean + respiratory sinusoid (evaluated at the
/// previous beat time) + white noise sized so the total SD meets the target.
pub fn generate_ibis<R: Rng>(params: &IbiParams, rng: &mut R) -> Vec<f64> {
    let sine_var = params.respiratory_mod_depth_ms * params.respiratory_mod_depth_ms / 2.0;
    let target_var = params.sdnn_target_ms * params.sdnn_target_ms;
    let noise_sd = libm::sqrt((target_var - sine_var).max(0.0));
    let noise = Normal::new(0.0, noise_sd).expect("finite non-negative sd");
    let phase = rng.random::<f64>() * 2.0 * PI;
    let total_ms = params.duration_s * 1000.0;
    let mut out = Vec::new();
    let mut t = 0.0;
    while t < total_ms {
        let resp = params.respiratory_mod_depth_ms
            * libm::sin(2.0 * PI * params.respiratory_mod_hz * t / 1000.0 + phase);
        let ibi = (params.mean_ibi_ms + resp + noise.sample(rng)).clamp(MIN_IBI_MS, MAX_IBI_MS);
        out.push(ibi);
        t += ibi;
    }
    out
}

fn pulse(dt_ms: f64) -> f64 {
    if (-PULSE_RISE_MS..=0.0).contains(&dt_ms) {
        0.5 * (1.0 + libm::cos(PI * dt_ms / PULSE_RISE_MS))
    } else if (0.0..=PULSE_FALL_MS).contains(&dt_ms) {
        0.5 * (1.0 + libm::cos(PI * dt_ms / PULSE_FALL_MS))
    } else {
        0.0
    }
}

/// Renders a PPG session whose first sample sits at `start_ms`. The session
/// spans the full interval sequence; beat `k` peaks at `start_ms + Σ ibi[..=k]`.
pub fn gen_ppg(
    spec: &SynthSpec,
    session_id: &str,
    participant_id: &str,
    start_ms: i64,
) -> Result<(PpgSession, GroundTruth), SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ibis = match &spec.ibi {
        IbiSource::Sequence(seq) => seq.clone(),
        IbiSource::Generated(p) => generate_ibis(p, &mut rng),
    };
    let mut beat_times_ms = Vec::with_capacity(ibis.len());
    let mut t = start_ms as f64;
    for ibi in &ibis {
        t += ibi;
        beat_times_ms.push(t);
    }
    let total_ms: f64 = ibis.iter().sum();
    let period_ms = 1000.0 / spec.sample_rate_hz;
    let n = libm::ceil(total_ms / period_ms) as usize;
    let times: Vec<i64> = (0..n).map(|i| start_ms + libm::round(i as f64 * period_ms) as i64).collect();

    let drift_phase = rng.random::<f64>() * 2.0 * PI;
    let mut values: Vec<f64> = times
        .iter()
        .map(|&ts| {
            let sec = (ts - start_ms) as f64 / 1000.0;
            BASELINE + DRIFT_AMPLITUDE * libm::sin(2.0 * PI * DRIFT_HZ * sec + drift_phase)
        })
        .collect();
    for &beat in &beat_times_ms {
        let first = times.partition_point(|&ts| (ts as f64) < beat - PULSE_RISE_MS);
        for (ts, v) in times[first..].iter().zip(values[first..].iter_mut()) {
            let dt = *ts as f64 - beat;
            if dt > PULSE_FALL_MS {
                break;
            }
            *v += PULSE_AMPLITUDE * pulse(dt);
        }
    }
    if spec.noise_sd > 0.0 {
        let noise = Normal::new(0.0, spec.noise_sd).expect("validated sd");
        for v in values.iter_mut() {
            *v += noise.sample(&mut rng);
        }
    }
    let samples = times
        .into_iter()
        .zip(values)
        .map(|(timestamp_ms, value)| PpgSample { timestamp_ms, value })
        .collect();
    let session = PpgSession::new(session_id, participant_id, spec.sample_rate_hz, samples);
    Ok((session, GroundTruth { beat_times_ms, nn_ms: ibis }))
}

/// Ground-truth valence class a cohort response was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valence {
    /// Positive affect ≥ 17.
    High,
    /// Positive affect 15 or 16.
    Neutral,
    /// Positive affect ≤ 14.
    Low,
}

impl Valence {
    pub fn name(self) -> &'static str {
        match self {
            Valence::High => "high",
            Valence::Neutral => "neutral",
            Valence::Low => "low",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortSpec {
    pub participants: usize,
    pub responses_per_participant: usize,
    /// IBI shortening of high- relative to low-valence responses, in units of
    /// the baseline spread.
    pub effect: f64,
    pub seed: u64,
    /// Exact fraction of responses reported on the phone (no signal).
    pub phone_only_fraction: f64,
    pub noise_sd: f64,
    pub sample_rate_hz: f64,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            participants: 15,
            responses_per_participant: 20,
            effect: 2.0,
            seed: 7,
            phone_only_fraction: 0.0,
            noise_sd: 2.0,
            sample_rate_hz: 25.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortResponse {
    pub survey: SurveyResponse,
    /// `None` for phone-reported responses.
    pub session: Option<PpgSession>,
    pub valence: Valence,
    pub mean_ibi_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub responses: Vec<CohortResponse>,
}

/// Half-range of the per-response baseline mean IBI, ms.
pub const BASELINE_SPREAD_MS: f64 = 60.0;
const BASELINE_IBI_MS: f64 = 850.0;
/// Seconds of signal recorded either side of a report.
pub const SESSION_HALF_SPAN_S: f64 = 35.0;
/// 2023-11-14T00:00:00Z.
pub const COHORT_EPOCH_MS: i64 = 1_699_920_000_000;

fn draw_items<R: Rng>(rng: &mut R, accept: impl Fn(u32) -> bool) -> [u8; 5] {
    loop {
        let items: [u8; 5] = core::array::from_fn(|_| rng.random_range(1..=5u8));
        if accept(items.iter().map(|&v| v as u32).sum()) {
            return items;
        }
    }
}

fn draw_negative_item<R: Rng>(rng: &mut R) -> u8 {
    // right-skewed, most reports sit at the floor
    const CUMULATIVE: [f64; 4] = [0.5, 0.75, 0.88, 0.96];
    let u: f64 = rng.random();
    CUMULATIVE.iter().position(|&c| u < c).map_or(5, |i| i as u8 + 1)
}

/// Builds a cohort whose high-valence responses have shorter mean IBI.
///
/// Each participant draws from its own generator seeded with `seed + index`;
/// the phone-only subset is chosen with exactly `round(fraction * total)`
/// members from a generator seeded with `seed` alone.
pub fn gen_cohort(spec: &CohortSpec) -> Result<Cohort, SynthError> {
    if spec.effect.is_nan() || spec.effect < 0.0 {
        return Err(SynthError::InvalidSpec("effect must be non-negative"));
    }
    if !(0.0..=1.0).contains(&spec.phone_only_fraction) {
        return Err(SynthError::InvalidSpec("phone-only fraction outside 0..=1"));
    }
    let total = spec.participants * spec.responses_per_participant;
    let phone_count = libm::round(spec.phone_only_fraction * total as f64) as usize;
    let mut phone_only = alloc::vec![false; total];
    let mut selector = ChaCha8Rng::seed_from_u64(spec.seed);
    for i in rand::seq::index::sample(&mut selector, total, phone_count) {
        phone_only[i] = true;
    }

    let mut responses = Vec::with_capacity(total);
    for p in 0..spec.participants {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(p as u64));
        let participant_id = format!("p{:02}", p + 1);
        let participant_offset = rng.random_range(-0.5..0.5) * BASELINE_SPREAD_MS;
        for j in 0..spec.responses_per_participant {
            let u: f64 = rng.random();
            let valence = if u < 0.45 {
                Valence::High
            } else if u < 0.9 {
                Valence::Low
            } else {
                Valence::Neutral
            };
            let positive = match valence {
                Valence::High => draw_items(&mut rng, |s| s >= 17),
                Valence::Low => draw_items(&mut rng, |s| s <= 14),
                Valence::Neutral => draw_items(&mut rng, |s| s == 15 || s == 16),
            };
            let mut scores = [0u8; 10];
            scores[..5].copy_from_slice(&positive);
            for slot in scores[5..].iter_mut() {
                *slot = draw_negative_item(&mut rng);
            }
            let cognitive_load = rng.random_range(1..=5u8);

            let day = (j / 3) as i64;
            let slot_hour = [9i64, 14, 19][j % 3];
            let jitter_ms = rng.random_range(0..3 * 3_600_000i64);
            let timestamp_ms = COHORT_EPOCH_MS + day * 86_400_000 + slot_hour * 3_600_000 + jitter_ms;

            let shift = match valence {
                Valence::High => spec.effect,
                Valence::Neutral => spec.effect / 2.0,
                Valence::Low => 0.0,
            } * BASELINE_SPREAD_MS;
            let jitter = rng.random_range(-0.5..0.5) * BASELINE_SPREAD_MS;
            let mean_ibi_ms = (BASELINE_IBI_MS + participant_offset + jitter - shift).max(400.0);
            let sdnn = rng.random_range(30.0..70.0);
            let params = IbiParams {
                mean_ibi_ms,
                sdnn_target_ms: sdnn,
                respiratory_mod_hz: rng.random_range(0.15..0.35),
                respiratory_mod_depth_ms: sdnn,
                duration_s: 2.0 * SESSION_HALF_SPAN_S,
            };
            let ppg_seed: u64 = rng.random();
            let index = p * spec.responses_per_participant + j;
            let session_id = format!("{participant_id}-s{:03}", j + 1);
            let session = if phone_only[index] {
                None
            } else {
                let synth = SynthSpec {
                    ibi: IbiSource::Generated(params),
                    noise_sd: spec.noise_sd,
                    sample_rate_hz: spec.sample_rate_hz,
                    seed: ppg_seed,
                };
                let start = timestamp_ms - libm::round(SESSION_HALF_SPAN_S * 1000.0) as i64;
                Some(gen_ppg(&synth, &session_id, &participant_id, start)?.0)
            };
            let survey = SurveyResponse::new(
                participant_id.clone(),
                session.as_ref().map(|_| session_id.clone()),
                timestamp_ms,
                scores,
                cognitive_load,
            )
            .expect("generated scores are in range");
            responses.push(CohortResponse { survey, session, valence, mean_ibi_ms });
        }
    }
    Ok(Cohort { responses })
}

impl Cohort {
    pub fn sessions(&self) -> impl Iterator<Item = &PpgSession> {
        self.responses.iter().filter_map(|r| r.session.as_ref())
    }

    pub fn surveys(&self) -> impl Iterator<Item = &SurveyResponse> {
        self.responses.iter().map(|r| &r.survey)
    }
}

/// Positive items of a response, for checking valence draws.
pub fn positive_sum(survey: &SurveyResponse) -> u32 {
    Emotion::POSITIVE.iter().map(|&e| survey.score(e) as u32).sum()
}
