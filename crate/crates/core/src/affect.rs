//! PANAS aggregation and binary label construction.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{AffectScores, Emotion, HrvFeatures, Label, LabeledSample, SurveyResponse};

/// Sums the five positive and five negative items.
pub fn affect_scores(survey: &SurveyResponse) -> AffectScores {
    let sum = |items: [Emotion; 5]| items.iter().map(|&e| survey.score(e)).sum::<u8>();
    AffectScores { positive_affect: sum(Emotion::POSITIVE), negative_affect: sum(Emotion::NEGATIVE) }
}

/// What a label rule scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelTarget {
    PositiveAffect,
    NegativeAffect,
    Emotion(Emotion),
}

impl LabelTarget {
    pub fn name(self) -> &'static str {
        match self {
            LabelTarget::PositiveAffect => "positive_affect",
            LabelTarget::NegativeAffect => "negative_affect",
            LabelTarget::Emotion(e) => e.name(),
        }
    }

    pub fn parse(name: &str) -> Option<LabelTarget> {
        match name.trim().to_ascii_lowercase().as_str() {
            "positive_affect" => Some(LabelTarget::PositiveAffect),
            "negative_affect" => Some(LabelTarget::NegativeAffect),
            other => Emotion::from_name(other).map(LabelTarget::Emotion),
        }
    }

    pub fn score(self, survey: &SurveyResponse) -> u8 {
        match self {
            LabelTarget::PositiveAffect => affect_scores(survey).positive_affect,
            LabelTarget::NegativeAffect => affect_scores(survey).negative_affect,
            LabelTarget::Emotion(e) => survey.score(e),
        }
    }
}

impl fmt::Display for LabelTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AffectError {
    #[error("low_max {low_max} must be below high_min {high_min}")]
    InvalidRule { high_min: u8, low_max: u8 },
    #[error("no samples labeled {}", .label.value())]
    EmptyClass { label: Label, counts: TaskCounts },
}

impl AffectError {
    pub fn code(&self) -> &'static str {
        match self {
            AffectError::InvalidRule { .. } => "invalid_rule",
            AffectError::EmptyClass { label: Label::High, .. } => "empty_class_high",
            AffectError::EmptyClass { label: Label::Low, .. } => "empty_class_low",
        }
    }
}

/// Scores `>= high_min` are high, `<= low_max` are low, the rest excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelRule {
    target: LabelTarget,
    high_min: u8,
    low_max: u8,
}

impl LabelRule {
    pub fn new(target: LabelTarget, high_min: u8, low_max: u8) -> Result<Self, AffectError> {
        if low_max >= high_min {
            return Err(AffectError::InvalidRule { high_min, low_max });
        }
        Ok(LabelRule { target, high_min, low_max })
    }

    /// 17/14 for the summed affects, 4/2 for single emotions.
    pub fn with_defaults(target: LabelTarget) -> Self {
        let (high_min, low_max) = match target {
            LabelTarget::PositiveAffect | LabelTarget::NegativeAffect => (17, 14),
            LabelTarget::Emotion(_) => (4, 2),
        };
        LabelRule { target, high_min, low_max }
    }

    pub fn target(&self) -> LabelTarget {
        self.target
    }

    pub fn high_min(&self) -> u8 {
        self.high_min
    }

    pub fn low_max(&self) -> u8 {
        self.low_max
    }
}

/// `None` means the score is neutral and the row is excluded.
pub fn apply_label(score: u8, rule: &LabelRule) -> Option<Label> {
    if score >= rule.high_min {
        Some(Label::High)
    } else if score <= rule.low_max {
        Some(Label::Low)
    } else {
        None
    }
}

/// Row accounting for one labeling task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TaskCounts {
    pub high: usize,
    pub low: usize,
    pub excluded: usize,
    pub missing_features: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub rule: LabelRule,
    pub samples: Vec<LabeledSample>,
    pub counts: TaskCounts,
}

/// Labels every row that has a complete feature vector.
///
/// Rows without features (or with any feature missing) and neutral rows are
/// dropped and counted. Each input row lands in exactly one count.
pub fn build_task<'a, I>(rows: I, rule: &LabelRule) -> Result<Task, AffectError>
where
    I: IntoIterator<Item = (&'a SurveyResponse, Option<&'a HrvFeatures>)>,
{
    let mut counts = TaskCounts::default();
    let mut samples = Vec::new();
    for (survey, features) in rows {
        let Some(features) = features.filter(|f| f.to_vector().is_some()) else {
            counts.missing_features += 1;
            continue;
        };
        let Some(label) = apply_label(rule.target.score(survey), rule) else {
            counts.excluded += 1;
            continue;
        };
        match label {
            Label::High => counts.high += 1,
            Label::Low => counts.low += 1,
        }
        samples.push(LabeledSample {
            participant_id: survey.participant_id().to_string(),
            timestamp_ms: survey.timestamp_ms(),
            features: *features,
            affect: affect_scores(survey),
            item_scores: *survey.item_scores(),
            label,
        });
    }
    if counts.high == 0 {
        return Err(AffectError::EmptyClass { label: Label::High, counts });
    }
    if counts.low == 0 {
        return Err(AffectError::EmptyClass { label: Label::Low, counts });
    }
    Ok(Task { rule: *rule, samples, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn survey(scores: [u8; 10]) -> SurveyResponse {
        SurveyResponse::new("p", None, 0, scores, 3).unwrap()
    }

    fn features() -> HrvFeatures {
        HrvFeatures {
            bpm: 70.0,
            ibi: 60_000.0 / 70.0,
            sdnn: 40.0,
            rmssd: 30.0,
            pnn20: 0.4,
            pnn50: 0.1,
            hr_mad: 20.0,
            sd1: 21.0,
            sd2: 50.0,
            s: 3300.0,
            sd1_sd2: Some(0.42),
            breathing_rate: Some(0.25),
        }
    }

    fn with_positive(items: [u8; 5]) -> SurveyResponse {
        let mut scores = [1u8; 10];
        scores[..5].copy_from_slice(&items);
        survey(scores)
    }

    #[test]
    fn affect_sum_extremes_and_hand_case() {
        assert_eq!(affect_scores(&survey([1; 10])), AffectScores { positive_affect: 5, negative_affect: 5 });
        assert_eq!(
            affect_scores(&survey([5; 10])),
            AffectScores { positive_affect: 25, negative_affect: 25 }
        );
        assert_eq!(
            affect_scores(&with_positive([3, 4, 2, 5, 3])),
            AffectScores { positive_affect: 17, negative_affect: 5 }
        );
    }

    #[test]
    fn paper_thresholds() {
        let rule = LabelRule::new(LabelTarget::PositiveAffect, 17, 14).unwrap();
        assert_eq!(apply_label(17, &rule), Some(Label::High));
        assert_eq!(apply_label(14, &rule), Some(Label::Low));
        assert_eq!(apply_label(15, &rule), None);
        assert_eq!(rule, LabelRule::with_defaults(LabelTarget::PositiveAffect));
        assert!(LabelRule::new(LabelTarget::PositiveAffect, 14, 14).is_err());
    }

    #[test]
    fn task_from_positive_affect() {
        // positive affect 20, 10, 15, 17
        let surveys = [
            with_positive([4, 4, 4, 4, 4]),
            with_positive([2, 2, 2, 2, 2]),
            with_positive([3, 3, 3, 3, 3]),
            with_positive([3, 4, 2, 5, 3]),
        ];
        let f = features();
        let rule = LabelRule::with_defaults(LabelTarget::PositiveAffect);
        let task = build_task(surveys.iter().map(|s| (s, Some(&f))), &rule).unwrap();
        let labels: Vec<Label> = task.samples.iter().map(|s| s.label).collect();
        assert_eq!(labels, [Label::High, Label::Low, Label::High]);
        assert_eq!(task.counts, TaskCounts { high: 2, low: 1, excluded: 1, missing_features: 0 });
    }

    #[test]
    fn single_emotion_rule() {
        let rule = LabelRule::with_defaults(LabelTarget::Emotion(Emotion::Alert));
        let labels: Vec<Option<Label>> = [4u8, 2, 3]
            .iter()
            .map(|&v| {
                let mut scores = [3u8; 10];
                scores[Emotion::Alert.index()] = v;
                apply_label(rule.target().score(&survey(scores)), &rule)
            })
            .collect();
        assert_eq!(labels, [Some(Label::High), Some(Label::Low), None]);
    }

    #[test]
    fn all_neutral_is_an_empty_class() {
        let s = with_positive([3, 3, 3, 3, 3]);
        let f = features();
        let rule = LabelRule::with_defaults(LabelTarget::PositiveAffect);
        assert_eq!(
            build_task([(&s, Some(&f)), (&s, Some(&f))], &rule),
            Err(AffectError::EmptyClass {
                label: Label::High,
                counts: TaskCounts { high: 0, low: 0, excluded: 2, missing_features: 0 }
            })
        );
    }

    #[test]
    fn rows_without_complete_features_are_dropped() {
        let hi = with_positive([5; 5]);
        let lo = with_positive([1; 5]);
        let f = features();
        let partial = HrvFeatures { breathing_rate: None, ..f };
        let rule = LabelRule::with_defaults(LabelTarget::PositiveAffect);
        let task = build_task([(&hi, Some(&f)), (&lo, Some(&f)), (&hi, None), (&lo, Some(&partial))], &rule)
            .unwrap();
        assert_eq!(task.samples.len(), 2);
        assert_eq!(task.counts.missing_features, 2);
    }

    #[test]
    fn negative_affect_uses_the_same_machinery() {
        let mut scores = [1u8; 10];
        scores[5..].copy_from_slice(&[4, 4, 4, 4, 4]);
        let rule = LabelRule::with_defaults(LabelTarget::NegativeAffect);
        assert_eq!(apply_label(rule.target().score(&survey(scores)), &rule), Some(Label::High));
        assert_eq!(LabelTarget::parse("Negative_Affect"), Some(LabelTarget::NegativeAffect));
        assert_eq!(LabelTarget::parse("afraid"), Some(LabelTarget::Emotion(Emotion::Afraid)));
        assert_eq!(LabelTarget::parse("joy"), None);
    }

    proptest! {
        #[test]
        fn sums_are_bounded_and_permutation_invariant(
            scores in proptest::array::uniform10(1u8..=5),
            shift in 0usize..5,
        ) {
            let a = affect_scores(&survey(scores));
            prop_assert!((5..=25).contains(&a.positive_affect));
            prop_assert!((5..=25).contains(&a.negative_affect));
            let mut rotated = scores;
            rotated[..5].rotate_left(shift);
            rotated[5..].rotate_right(shift);
            prop_assert_eq!(affect_scores(&survey(rotated)), a);
        }

        #[test]
        fn labeling_is_monotone_and_partitions(score in 5u8..=25, high in 6u8..=25, gap in 1u8..5) {
            let low = high.saturating_sub(gap).max(5);
            prop_assume!(low < high);
            let rule = LabelRule::new(LabelTarget::PositiveAffect, high, low).unwrap();
            let rank = |l: Option<Label>| match l { Some(Label::Low) => 0, None => 1, Some(Label::High) => 2 };
            prop_assert!(rank(apply_label(score, &rule)) <= rank(apply_label(score.saturating_add(1), &rule)));
        }
    }
}
