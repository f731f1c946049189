//! Chronological split, min-max scaling, Multinomial Naive Bayes and metrics.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{Label, LabeledSample};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("no participant contributed a test sample")]
    EmptyTestSet,
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("training set holds a single class ({})", .0.value())]
    SingleClass(Label),
    #[error("negative feature value {value} at row {row}, feature {feature}")]
    NegativeFeature { row: usize, feature: usize, value: f64 },
    #[error("expected {expected} features, got {got}")]
    FeatureMismatch { expected: usize, got: usize },
    #[error("lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("smoothing alpha must be finite and non-negative, got {0}")]
    InvalidAlpha(f64),
}

impl ClassifyError {
    pub fn code(&self) -> &'static str {
        match self {
            ClassifyError::EmptyTestSet => "empty_test_set",
            ClassifyError::EmptyTrainSet => "empty_train_set",
            ClassifyError::SingleClass(Label::High) => "single_class_high",
            ClassifyError::SingleClass(Label::Low) => "single_class_low",
            ClassifyError::NegativeFeature { .. } => "negative_feature",
            ClassifyError::FeatureMismatch { .. } => "feature_mismatch",
            ClassifyError::LengthMismatch { .. } => "length_mismatch",
            ClassifyError::InvalidAlpha(_) => "invalid_alpha",
        }
    }
}

/// Per participant, the earliest `floor(n * num / den)` samples train and the
/// rest test. A participant with a single sample only trains.
pub fn chrono_split_ratio(
    samples: &[LabeledSample],
    num: usize,
    den: usize,
) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>), ClassifyError> {
    let mut by_participant: BTreeMap<&str, Vec<&LabeledSample>> = BTreeMap::new();
    for s in samples {
        by_participant.entry(&s.participant_id).or_default().push(s);
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for group in by_participant.values_mut() {
        group.sort_by_key(|s| s.timestamp_ms);
        let n = group.len();
        let cut = if n == 1 { 1 } else { n * num / den };
        train.extend(group[..cut].iter().map(|s| (*s).clone()));
        test.extend(group[cut..].iter().map(|s| (*s).clone()));
    }
    if test.is_empty() {
        return Err(ClassifyError::EmptyTestSet);
    }
    Ok((train, test))
}

/// [`chrono_split_ratio`] with the first two thirds in training.
pub fn chrono_split(
    samples: &[LabeledSample],
) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>), ClassifyError> {
    chrono_split_ratio(samples, 2, 3)
}

/// Per-feature training range.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Scaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Scaler, ClassifyError> {
        let first = rows.first().ok_or(ClassifyError::EmptyTrainSet)?;
        let mut scaler = Scaler { min: first.clone(), max: first.clone() };
        for row in rows {
            check_width(first.len(), row)?;
            for (f, &v) in row.iter().enumerate() {
                scaler.min[f] = scaler.min[f].min(v);
                scaler.max[f] = scaler.max[f].max(v);
            }
        }
        Ok(scaler)
    }

    /// Maps each feature to `[0, 1]`; out-of-range values are clipped and a
    /// constant training column maps to 0.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, ClassifyError> {
        check_width(self.min.len(), x)?;
        Ok(x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 })
            .collect())
    }
}

fn check_width(expected: usize, x: &[f64]) -> Result<(), ClassifyError> {
    if x.len() != expected {
        return Err(ClassifyError::FeatureMismatch { expected, got: x.len() });
    }
    Ok(())
}

pub fn scale_fit_transform(train: &[Vec<f64>]) -> Result<(Scaler, Vec<Vec<f64>>), ClassifyError> {
    let scaler = Scaler::fit(train)?;
    let scaled = train.iter().map(|x| scaler.apply(x)).collect::<Result<_, _>>()?;
    Ok((scaler, scaled))
}

pub const DEFAULT_SMOOTHING: f64 = 1.0;

fn class_index(label: Label) -> usize {
    match label {
        Label::Low => 0,
        Label::High => 1,
    }
}

/// Log priors and per-class log feature probabilities, indexed low then high.
#[derive(Debug, Clone, PartialEq)]
pub struct MnbModel {
    pub class_log_priors: [f64; 2],
    pub feature_log_likelihoods: [Vec<f64>; 2],
    pub alpha: f64,
}

impl MnbModel {
    pub fn log_prior(&self, label: Label) -> f64 {
        self.class_log_priors[class_index(label)]
    }

    pub fn log_likelihoods(&self, label: Label) -> &[f64] {
        &self.feature_log_likelihoods[class_index(label)]
    }

    pub fn feature_count(&self) -> usize {
        self.feature_log_likelihoods[0].len()
    }
}

pub fn mnb_train(x: &[Vec<f64>], y: &[Label], alpha: f64) -> Result<MnbModel, ClassifyError> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(ClassifyError::InvalidAlpha(alpha));
    }
    if x.len() != y.len() {
        return Err(ClassifyError::LengthMismatch { left: x.len(), right: y.len() });
    }
    let width = x.first().ok_or(ClassifyError::EmptyTrainSet)?.len();
    let mut counts = [0usize; 2];
    let mut sums = [vec![0.0; width], vec![0.0; width]];
    for (row, (xi, &label)) in x.iter().zip(y).enumerate() {
        check_width(width, xi)?;
        let c = class_index(label);
        counts[c] += 1;
        for (feature, &value) in xi.iter().enumerate() {
            if value.is_nan() || value < 0.0 {
                return Err(ClassifyError::NegativeFeature { row, feature, value });
            }
            sums[c][feature] += value;
        }
    }
    if counts[0] == 0 {
        return Err(ClassifyError::SingleClass(Label::High));
    }
    if counts[1] == 0 {
        return Err(ClassifyError::SingleClass(Label::Low));
    }
    let n = x.len() as f64;
    let log_theta = |s: &Vec<f64>| {
        let total: f64 = s.iter().sum::<f64>() + alpha * width as f64;
        s.iter().map(|v| libm::log((v + alpha) / total)).collect::<Vec<f64>>()
    };
    Ok(MnbModel {
        class_log_priors: [libm::log(counts[0] as f64 / n), libm::log(counts[1] as f64 / n)],
        feature_log_likelihoods: [log_theta(&sums[0]), log_theta(&sums[1])],
        alpha,
    })
}

/// Log joint scores, low then high.
pub fn mnb_scores(model: &MnbModel, x: &[f64]) -> Result<[f64; 2], ClassifyError> {
    check_width(model.feature_count(), x)?;
    let score = |c: usize| {
        model.class_log_priors[c]
            + x.iter()
                .zip(&model.feature_log_likelihoods[c])
                .filter(|(v, _)| **v != 0.0)
                .map(|(v, lt)| v * lt)
                .sum::<f64>()
    };
    Ok([score(0), score(1)])
}

/// Relative gap below which two scores count as equal.
const TIE_TOLERANCE: f64 = 1e-12;

/// Most probable label, with equal scores resolved to high.
pub fn mnb_predict(model: &MnbModel, x: &[f64]) -> Result<(Label, [f64; 2]), ClassifyError> {
    let scores = mnb_scores(model, x)?;
    let [low, high] = scores;
    let scale = 1.0f64.max(low.abs()).max(high.abs());
    let label =
        if high >= low || (high - low).abs() <= TIE_TOLERANCE * scale { Label::High } else { Label::Low };
    Ok((label, scores))
}

/// Binary metrics; precision, recall and F1 are averaged weighting each class
/// by its true support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    /// `confusion[true][predicted]`, low then high.
    pub confusion: [[usize; 2]; 2],
}

impl MetricsReport {
    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }
}

pub fn evaluate(y_true: &[Label], y_pred: &[Label]) -> Result<MetricsReport, ClassifyError> {
    if y_true.len() != y_pred.len() {
        return Err(ClassifyError::LengthMismatch { left: y_true.len(), right: y_pred.len() });
    }
    if y_true.is_empty() {
        return Err(ClassifyError::EmptyTestSet);
    }
    let mut confusion = [[0usize; 2]; 2];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        confusion[class_index(t)][class_index(p)] += 1;
    }
    let n = y_true.len() as f64;
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let (mut precision, mut recall, mut f1) = (0.0, 0.0, 0.0);
    for c in 0..2 {
        let support = confusion[c][0] + confusion[c][1];
        let predicted = confusion[0][c] + confusion[1][c];
        let p = ratio(confusion[c][c], predicted);
        let r = ratio(confusion[c][c], support);
        let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        let w = support as f64 / n;
        precision += w * p;
        recall += w * r;
        f1 += w * f;
    }
    Ok(MetricsReport {
        accuracy: (confusion[0][0] + confusion[1][1]) as f64 / n,
        f1,
        precision,
        recall,
        confusion,
    })
}

/// A fitted scaler and model pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub scaler: Scaler,
    pub model: MnbModel,
}

impl Classifier {
    pub fn fit(x: &[Vec<f64>], y: &[Label], alpha: f64) -> Result<Classifier, ClassifyError> {
        let (scaler, scaled) = scale_fit_transform(x)?;
        let model = mnb_train(&scaled, y, alpha)?;
        Ok(Classifier { scaler, model })
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label, ClassifyError> {
        Ok(mnb_predict(&self.model, &self.scaler.apply(x)?)?.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutcome {
    pub classifier: Classifier,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: MetricsReport,
}

fn feature_rows(samples: &[LabeledSample]) -> Vec<Vec<f64>> {
    samples
        .iter()
        .map(|s| s.features.to_vector().map(|v| v.to_vec()).unwrap_or_else(|| vec![f64::NAN; 12]))
        .collect()
}

/// Split chronologically, fit on the training part, score the test part.
pub fn train_and_evaluate(samples: &[LabeledSample], alpha: f64) -> Result<TaskOutcome, ClassifyError> {
    let (train, test) = chrono_split(samples)?;
    if train.is_empty() {
        return Err(ClassifyError::EmptyTrainSet);
    }
    let y_train: Vec<Label> = train.iter().map(|s| s.label).collect();
    let classifier = Classifier::fit(&feature_rows(&train), &y_train, alpha)?;
    let y_pred = feature_rows(&test).iter().map(|x| classifier.predict(x)).collect::<Result<Vec<_>, _>>()?;
    let y_true: Vec<Label> = test.iter().map(|s| s.label).collect();
    Ok(TaskOutcome {
        classifier,
        n_train: train.len(),
        n_test: test.len(),
        metrics: evaluate(&y_true, &y_pred)?,
    })
}
