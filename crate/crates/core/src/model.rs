//! Domain types shared by every stage of the pipeline.
//!
//! Timestamps are integer milliseconds since the Unix epoch (UTC) throughout.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpgSample {
    pub timestamp_ms: i64,
    /// Raw PPG-green ADC reading.
    pub value: f64,
}

/// One participant-session of raw PPG samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PpgSession {
    pub session_id: String,
    pub participant_id: String,
    /// Nominal sampling rate (the watch streams at 25 Hz).
    pub sample_rate_hz: f64,
    pub samples: Vec<PpgSample>,
}

pub const NOMINAL_SAMPLE_RATE_HZ: f64 = 25.0;

/// A failed [`PpgSession`] invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptySessionId,
    NonPositiveSampleRate,
    NegativeTimestamp { index: usize },
    NonFiniteValue { index: usize },
    NonIncreasingTimestamp { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptySessionId => f.write_str("empty session_id"),
            Violation::NonPositiveSampleRate => f.write_str("non-positive sample rate"),
            Violation::NegativeTimestamp { index } => {
                write!(f, "negative timestamp at index {index}")
            }
            Violation::NonFiniteValue { index } => write!(f, "non-finite value at index {index}"),
            Violation::NonIncreasingTimestamp { index } => {
                write!(f, "non-increasing timestamp at index {index}")
            }
        }
    }
}

impl PpgSession {
    pub fn new(
        session_id: impl Into<String>,
        participant_id: impl Into<String>,
        sample_rate_hz: f64,
        samples: Vec<PpgSample>,
    ) -> Self {
        PpgSession {
            session_id: session_id.into(),
            participant_id: participant_id.into(),
            sample_rate_hz,
            samples,
        }
    }

    /// Lists every broken invariant. Never aborts early.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.session_id.is_empty() {
            out.push(Violation::EmptySessionId);
        }
        if self.sample_rate_hz.is_nan() || self.sample_rate_hz <= 0.0 {
            out.push(Violation::NonPositiveSampleRate);
        }
        for (index, s) in self.samples.iter().enumerate() {
            if s.timestamp_ms < 0 {
                out.push(Violation::NegativeTimestamp { index });
            }
            if !s.value.is_finite() {
                out.push(Violation::NonFiniteValue { index });
            }
            if index > 0 && s.timestamp_ms <= self.samples[index - 1].timestamp_ms {
                out.push(Violation::NonIncreasingTimestamp { index });
            }
        }
        out
    }
}

pub fn validate_session(session: &PpgSession) -> Vec<Violation> {
    session.validate()
}

/// The ten PANAS-10 items, in survey column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Emotion {
    Active,
    Inspired,
    Attentive,
    Determined,
    Alert,
    Hostile,
    Nervous,
    Upset,
    Afraid,
    Ashamed,
}

impl Emotion {
    pub const ALL: [Emotion; 10] = [
        Emotion::Active,
        Emotion::Inspired,
        Emotion::Attentive,
        Emotion::Determined,
        Emotion::Alert,
        Emotion::Hostile,
        Emotion::Nervous,
        Emotion::Upset,
        Emotion::Afraid,
        Emotion::Ashamed,
    ];
    pub const POSITIVE: [Emotion; 5] =
        [Emotion::Active, Emotion::Inspired, Emotion::Attentive, Emotion::Determined, Emotion::Alert];
    pub const NEGATIVE: [Emotion; 5] =
        [Emotion::Hostile, Emotion::Nervous, Emotion::Upset, Emotion::Afraid, Emotion::Ashamed];

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Active => "active",
            Emotion::Inspired => "inspired",
            Emotion::Attentive => "attentive",
            Emotion::Determined => "determined",
            Emotion::Alert => "alert",
            Emotion::Hostile => "hostile",
            Emotion::Nervous => "nervous",
            Emotion::Upset => "upset",
            Emotion::Afraid => "afraid",
            Emotion::Ashamed => "ashamed",
        }
    }

    /// Case-insensitive lookup; unknown names are rejected.
    pub fn from_name(name: &str) -> Option<Emotion> {
        Emotion::ALL.into_iter().find(|e| e.name().eq_ignore_ascii_case(name.trim()))
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_positive(self) -> bool {
        self.index() < 5
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SurveyError {
    #[error("score {value} for {emotion} outside 1..=5")]
    ScoreOutOfRange { emotion: Emotion, value: u8 },
    #[error("cognitive load {0} outside 1..=5")]
    CognitiveLoadOutOfRange(u8),
}

/// One PANAS-10 + cognitive-load self-report.
///
/// Construction validates every Likert score, so a value of this type always
/// holds ten scores and a cognitive load in `1..=5`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveyResponse {
    participant_id: String,
    session_id: Option<String>,
    timestamp_ms: i64,
    item_scores: [u8; 10],
    cognitive_load: u8,
}

impl SurveyResponse {
    /// `item_scores` is indexed by [`Emotion::index`]. An empty session id
    /// is treated as absent (phone-reported, no signal).
    pub fn new(
        participant_id: impl Into<String>,
        session_id: Option<String>,
        timestamp_ms: i64,
        item_scores: [u8; 10],
        cognitive_load: u8,
    ) -> Result<Self, SurveyError> {
        for emotion in Emotion::ALL {
            let value = item_scores[emotion.index()];
            if !(1..=5).contains(&value) {
                return Err(SurveyError::ScoreOutOfRange { emotion, value });
            }
        }
        if !(1..=5).contains(&cognitive_load) {
            return Err(SurveyError::CognitiveLoadOutOfRange(cognitive_load));
        }
        Ok(SurveyResponse {
            participant_id: participant_id.into(),
            session_id: session_id.filter(|s| !s.is_empty()),
            timestamp_ms,
            item_scores,
            cognitive_load,
        })
    }

    pub fn participant_id(&self) -> &str {
        &self.participant_id
    }

    pub fn session_id(&self) -> Option<&str> {
        self.session_id.as_deref()
    }

    pub fn timestamp_ms(&self) -> i64 {
        self.timestamp_ms
    }

    pub fn score(&self, emotion: Emotion) -> u8 {
        self.item_scores[emotion.index()]
    }

    pub fn item_scores(&self) -> &[u8; 10] {
        &self.item_scores
    }

    pub fn cognitive_load(&self) -> u8 {
        self.cognitive_load
    }
}

/// Summed positive and negative affect, each in `5..=25`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffectScores {
    pub positive_affect: u8,
    pub negative_affect: u8,
}

/// The twelve HRV features in output column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureName {
    Bpm,
    Ibi,
    Sdnn,
    Rmssd,
    Pnn20,
    Pnn50,
    HrMad,
    Sd1,
    Sd2,
    S,
    Sd1Sd2,
    BreathingRate,
}

impl FeatureName {
    pub const ALL: [FeatureName; 12] = [
        FeatureName::Bpm,
        FeatureName::Ibi,
        FeatureName::Sdnn,
        FeatureName::Rmssd,
        FeatureName::Pnn20,
        FeatureName::Pnn50,
        FeatureName::HrMad,
        FeatureName::Sd1,
        FeatureName::Sd2,
        FeatureName::S,
        FeatureName::Sd1Sd2,
        FeatureName::BreathingRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureName::Bpm => "bpm",
            FeatureName::Ibi => "ibi",
            FeatureName::Sdnn => "sdnn",
            FeatureName::Rmssd => "rmssd",
            FeatureName::Pnn20 => "pnn20",
            FeatureName::Pnn50 => "pnn50",
            FeatureName::HrMad => "hr_mad",
            FeatureName::Sd1 => "sd1",
            FeatureName::Sd2 => "sd2",
            FeatureName::S => "s",
            FeatureName::Sd1Sd2 => "sd1_sd2",
            FeatureName::BreathingRate => "breathing_rate",
        }
    }

    pub fn from_name(name: &str) -> Option<FeatureName> {
        FeatureName::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(name.trim()))
    }
}

impl fmt::Display for FeatureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// HRV features of one signal window.
///
/// `sd1_sd2` is absent when `sd2` is zero and `breathing_rate` is absent when
/// the NN series is too short or carries no respiratory power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrvFeatures {
    /// Beats per minute.
    pub bpm: f64,
    /// Mean interbeat interval, ms.
    pub ibi: f64,
    pub sdnn: f64,
    pub rmssd: f64,
    pub pnn20: f64,
    pub pnn50: f64,
    /// Median absolute deviation of the NN intervals, ms.
    pub hr_mad: f64,
    pub sd1: f64,
    pub sd2: f64,
    /// Poincaré ellipse area, ms².
    pub s: f64,
    pub sd1_sd2: Option<f64>,
    /// Hz, within 0.1..=0.4 when present.
    pub breathing_rate: Option<f64>,
}

impl HrvFeatures {
    pub fn get(&self, name: FeatureName) -> Option<f64> {
        match name {
            FeatureName::Bpm => Some(self.bpm),
            FeatureName::Ibi => Some(self.ibi),
            FeatureName::Sdnn => Some(self.sdnn),
            FeatureName::Rmssd => Some(self.rmssd),
            FeatureName::Pnn20 => Some(self.pnn20),
            FeatureName::Pnn50 => Some(self.pnn50),
            FeatureName::HrMad => Some(self.hr_mad),
            FeatureName::Sd1 => Some(self.sd1),
            FeatureName::Sd2 => Some(self.sd2),
            FeatureName::S => Some(self.s),
            FeatureName::Sd1Sd2 => self.sd1_sd2,
            FeatureName::BreathingRate => self.breathing_rate,
        }
    }

    /// All twelve values in [`FeatureName::ALL`] order, or `None` if any is missing.
    pub fn to_vector(&self) -> Option<[f64; 12]> {
        let mut out = [0.0; 12];
        for (slot, name) in out.iter_mut().zip(FeatureName::ALL) {
            *slot = self.get(name)?;
        }
        Some(out)
    }
}

/// Binary class label: `High` is +1, `Low` is −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Low,
    High,
}

impl Label {
    pub fn value(self) -> i8 {
        match self {
            Label::High => 1,
            Label::Low => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Label> {
        match v {
            1 => Some(Label::High),
            -1 => Some(Label::Low),
            _ => None,
        }
    }
}

/// A survey joined with its features and labeled for one task.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub participant_id: String,
    pub timestamp_ms: i64,
    pub features: HrvFeatures,
    pub affect: AffectScores,
    pub item_scores: [u8; 10],
    pub label: Label,
}

/// Detected beat times and the interval series built from them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NnSeries {
    pub intervals_ms: Vec<f64>,
    pub peak_times_ms: Vec<f64>,
}
