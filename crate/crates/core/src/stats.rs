//! Pearson correlations with two-sided p-values and significance masking.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::affect::affect_scores;
use crate::model::{Emotion, FeatureName, HrvFeatures, LabeledSample, SurveyResponse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("input has zero variance")]
    ConstantInput,
    #[error("x has {x} values, y has {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("{0} paired values, at least 3 needed")]
    TooFewSamples(usize),
}

/// Pearson's r and its two-sided p-value under the null of no correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { x: x.len(), y: y.len() });
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewSamples(n));
    }
    if x.iter().all(|&v| v == x[0]) || y.iter().all(|&v| v == y[0]) {
        return Err(StatsError::ConstantInput);
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let r = (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0);
    Ok((r, p_value(r, n)))
}

/// Two-sided p-value of `r` for `n` pairs, from Student's t with `n - 2`
/// degrees of freedom.
///
/// With `t = r·sqrt(df / (1 - r²))` the tail mass is `I_{1-r²}(df/2, 1/2)`.
pub fn p_value(r: f64, n: usize) -> f64 {
    debug_assert!(n >= 3);
    let x = 1.0 - r * r;
    if x <= 0.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    regularized_beta(x, df / 2.0, 0.5).clamp(0.0, 1.0)
}

/// Regularized incomplete beta `I_x(a, b)`, continued fraction by modified
/// Lentz iteration.
pub fn regularized_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b) + a * libm::log(x) + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_fraction(1.0 - x, b, a) / b
    }
}

fn beta_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let clamp = |v: f64| if v.abs() < TINY { TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - (a + b) * x / (a + 1.0));
    let mut h = d;
    for m in 1..=20_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 / clamp(1.0 + even * d);
        c = clamp(1.0 + even / c);
        h *= d * c;
        let odd = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 / clamp(1.0 + odd * d);
        c = clamp(1.0 + odd / c);
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// A column of the correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    Emotion(Emotion),
    CognitiveLoad,
    PositiveAffect,
    NegativeAffect,
    Feature(FeatureName),
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::Emotion(e) => e.name(),
            Variable::CognitiveLoad => "cognitive_load",
            Variable::PositiveAffect => "positive_affect",
            Variable::NegativeAffect => "negative_affect",
            Variable::Feature(f) => f.name(),
        }
    }

    pub fn parse(name: &str) -> Option<Variable> {
        let lower = name.trim().to_ascii_lowercase();
        match lower.as_str() {
            "cognitive_load" => Some(Variable::CognitiveLoad),
            "positive_affect" => Some(Variable::PositiveAffect),
            "negative_affect" => Some(Variable::NegativeAffect),
            other => Emotion::from_name(other)
                .map(Variable::Emotion)
                .or_else(|| FeatureName::from_name(other).map(Variable::Feature)),
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Emotions, cognitive load, the two affect sums, then the HRV features.
pub fn default_variables() -> Vec<Variable> {
    Emotion::ALL
        .iter()
        .map(|&e| Variable::Emotion(e))
        .chain([Variable::CognitiveLoad, Variable::PositiveAffect, Variable::NegativeAffect])
        .chain(FeatureName::ALL.iter().map(|&f| Variable::Feature(f)))
        .collect()
}

/// Anything that can supply (possibly missing) values for [`Variable`]s.
pub trait Observation {
    fn value(&self, variable: Variable) -> Option<f64>;
}

/// A self-report together with the features of its session, if any.
#[derive(Debug, Clone, Copy)]
pub struct ReportRow<'a> {
    pub survey: &'a SurveyResponse,
    pub features: Option<&'a HrvFeatures>,
}

impl Observation for ReportRow<'_> {
    fn value(&self, variable: Variable) -> Option<f64> {
        match variable {
            Variable::Emotion(e) => Some(f64::from(self.survey.score(e))),
            Variable::CognitiveLoad => Some(f64::from(self.survey.cognitive_load())),
            Variable::PositiveAffect => Some(f64::from(affect_scores(self.survey).positive_affect)),
            Variable::NegativeAffect => Some(f64::from(affect_scores(self.survey).negative_affect)),
            Variable::Feature(f) => self.features.and_then(|h| h.get(f)),
        }
    }
}

impl Observation for LabeledSample {
    fn value(&self, variable: Variable) -> Option<f64> {
        match variable {
            Variable::Emotion(e) => Some(f64::from(self.item_scores[e.index()])),
            Variable::CognitiveLoad => None,
            Variable::PositiveAffect => Some(f64::from(self.affect.positive_affect)),
            Variable::NegativeAffect => Some(f64::from(self.affect.negative_affect)),
            Variable::Feature(f) => self.features.get(f),
        }
    }
}

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Square matrices stored row-major, indexed like `variables`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub variables: Vec<Variable>,
    /// `None` where the cell is undefined.
    pub r: Vec<Option<f64>>,
    pub p: Vec<Option<f64>>,
    /// Pairwise-complete row counts.
    pub n: Vec<usize>,
    pub alpha: f64,
}

impl CorrelationMatrix {
    pub fn size(&self) -> usize {
        self.variables.len()
    }

    fn at(&self, i: usize, j: usize) -> usize {
        i * self.size() + j
    }

    pub fn r(&self, i: usize, j: usize) -> Option<f64> {
        self.r[self.at(i, j)]
    }

    pub fn p(&self, i: usize, j: usize) -> Option<f64> {
        self.p[self.at(i, j)]
    }

    pub fn n(&self, i: usize, j: usize) -> usize {
        self.n[self.at(i, j)]
    }

    pub fn is_defined(&self, i: usize, j: usize) -> bool {
        self.r(i, j).is_some()
    }

    /// Undefined cells and cells with `p >= alpha` are masked.
    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        self.p(i, j).is_none_or(|p| p >= self.alpha)
    }

    pub fn index_of(&self, variable: Variable) -> Option<usize> {
        self.variables.iter().position(|&v| v == variable)
    }
}

/// Values of `a` and `b` over the rows where both are present.
pub fn paired_values<O: Observation>(rows: &[O], a: Variable, b: Variable) -> (Vec<f64>, Vec<f64>) {
    rows.iter().filter_map(|row| Some((row.value(a)?, row.value(b)?))).unzip()
}

/// Pairwise-complete Pearson matrix over `variables`.
///
/// Cells whose pair is constant or has fewer than three rows are undefined
/// and count as masked. The diagonal is always r = 1, p = 0.
pub fn correlation_matrix<O: Observation>(
    rows: &[O],
    variables: &[Variable],
    alpha: f64,
) -> CorrelationMatrix {
    let k = variables.len();
    let columns: Vec<Vec<Option<f64>>> =
        variables.iter().map(|&v| rows.iter().map(|row| row.value(v)).collect()).collect();
    let mut m = CorrelationMatrix {
        variables: variables.to_vec(),
        r: vec![None; k * k],
        p: vec![None; k * k],
        n: vec![0; k * k],
        alpha,
    };
    for i in 0..k {
        m.r[i * k + i] = Some(1.0);
        m.p[i * k + i] = Some(0.0);
        m.n[i * k + i] = columns[i].iter().flatten().count();
        for j in i + 1..k {
            let (x, y): (Vec<f64>, Vec<f64>) =
                columns[i].iter().zip(&columns[j]).filter_map(|(a, b)| Some(((*a)?, (*b)?))).unzip();
            let n = x.len();
            let cell = pearson(&x, &y).ok();
            for (a, b) in [(i, j), (j, i)] {
                m.r[a * k + b] = cell.map(|c| c.0);
                m.p[a * k + b] = cell.map(|c| c.1);
                m.n[a * k + b] = n;
            }
        }
    }
    m
}
