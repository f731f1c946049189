//! The subcommands. Each builds its output files in memory; [`run`] then
//! writes them atomically into the output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;
use valence_core::affect::{build_task, AffectError, LabelRule, LabelTarget, TaskCounts};
use valence_core::classify::train_and_evaluate;
use valence_core::dataset::{join_dataset, DatasetRow};
use valence_core::hrv::compute_features;
use valence_core::preprocess::{bandpass, extract_window, BandpassConfig};
use valence_core::stats::{correlation_matrix, default_variables, ReportRow};
use valence_core::synth::{gen_cohort, CohortSpec};
use valence_core::{affect, Emotion, HrvFeatures, PpgSession, SurveyResponse};

use crate::cli::{ClassifyArgs, Command, CorrelateArgs, ExtractArgs, ReportArgs, SynthArgs};
use crate::config::{digest_hex, thread_pool, write_atomic, RunConfig};
use crate::error::PipeError;
use crate::formats::{
    parse_features_csv, parse_signal_csv, parse_survey_csv, write_attrition_csv, write_correlation_files,
    write_features_csv, write_histograms_csv, write_metrics_csv, write_signal_csv, write_survey_csv,
    AttritionReport, FeatureRow, Histogram, MetricsRow,
};

pub const SURVEYS_FILE: &str = "surveys.csv";
pub const SIGNALS_DIR: &str = "signals";
pub const FEATURES_FILE: &str = "features.csv";
pub const ATTRITION_FILE: &str = "attrition.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const HISTOGRAM_FILES: [&str; 4] = [
    "histogram_items.csv",
    "histogram_affect.csv",
    "histogram_cognitive_load.csv",
    "histogram_time_of_day.csv",
];

/// Files relative to the output directory, plus a short JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub files: Vec<(String, String)>,
    pub summary: serde_json::Value,
}

/// Validates, computes, then writes every output file.
pub fn run(command: &Command) -> Result<Output, PipeError> {
    let output = compute(command)?;
    let dir = out_dir(command);
    for (name, text) in &output.files {
        write_atomic(dir, name, text)?;
    }
    Ok(output)
}

/// Like [`run`] without touching the output directory.
pub fn compute(command: &Command) -> Result<Output, PipeError> {
    validate(command)?;
    match command {
        Command::Synth(a) => synth(a),
        Command::Extract(a) => extract(a),
        Command::Correlate(a) => correlate(a),
        Command::Classify(a) => classify(a),
        Command::Report(a) => report(a),
    }
}

fn out_dir(command: &Command) -> &Path {
    match command {
        Command::Synth(a) => &a.out,
        Command::Extract(a) => &a.out,
        Command::Correlate(a) => &a.out,
        Command::Classify(a) => &a.out,
        Command::Report(a) => &a.out,
    }
}

fn config_error(message: impl Into<String>) -> PipeError {
    PipeError::Config(message.into())
}

fn require_file(flag: &str, path: &Path) -> Result<(), PipeError> {
    if !path.is_file() {
        return Err(config_error(format!("--{flag} {} is not a file", path.display())));
    }
    Ok(())
}

fn validate(command: &Command) -> Result<(), PipeError> {
    let out = out_dir(command);
    if out.exists() && !out.is_dir() {
        return Err(config_error(format!("--out {} is not a directory", out.display())));
    }
    match command {
        Command::Synth(a) => {
            if a.participants == 0 || a.responses == 0 {
                return Err(config_error("--participants and --responses must be positive"));
            }
            if !(a.effect.is_finite() && a.effect >= 0.0) {
                return Err(config_error("--effect must be finite and non-negative"));
            }
            if !(0.0..=1.0).contains(&a.phone_only) {
                return Err(config_error("--phone-only must lie in [0, 1]"));
            }
            if !(a.noise.is_finite() && a.noise >= 0.0) {
                return Err(config_error("--noise must be finite and non-negative"));
            }
            if !(a.sample_rate.is_finite() && a.sample_rate > 0.0) {
                return Err(config_error("--sample-rate must be positive"));
            }
        }
        Command::Extract(a) => {
            if !a.signals.is_dir() {
                return Err(config_error(format!("--signals {} is not a directory", a.signals.display())));
            }
            require_file("surveys", &a.surveys)?;
            let b = a.band;
            if !(b.low_hz.is_finite() && b.high_hz.is_finite() && 0.0 < b.low_hz && b.low_hz < b.high_hz) {
                return Err(config_error("--band needs 0 < low < high"));
            }
            if !(1..=8).contains(&a.order) {
                return Err(config_error("--order must lie in 1..=8"));
            }
            if !(a.window.is_finite() && a.window > 0.0) {
                return Err(config_error("--window must be positive"));
            }
        }
        Command::Correlate(a) => {
            require_file("surveys", &a.surveys)?;
            require_file("features", &a.features)?;
            if !(a.alpha > 0.0 && a.alpha < 1.0) {
                return Err(config_error("--alpha must lie in (0, 1)"));
            }
        }
        Command::Classify(a) => {
            require_file("surveys", &a.surveys)?;
            require_file("features", &a.features)?;
            if !(a.alpha.is_finite() && a.alpha >= 0.0) {
                return Err(config_error("--alpha must be finite and non-negative"));
            }
            label_rules(a)?;
        }
        Command::Report(a) => require_file("surveys", &a.surveys)?,
    }
    Ok(())
}

/// Tasks to classify: the given targets, or positive affect followed by the
/// alert, afraid and active emotions.
pub fn label_rules(a: &ClassifyArgs) -> Result<Vec<LabelRule>, PipeError> {
    let targets = if a.target.is_empty() {
        vec![
            LabelTarget::PositiveAffect,
            LabelTarget::Emotion(Emotion::Alert),
            LabelTarget::Emotion(Emotion::Afraid),
            LabelTarget::Emotion(Emotion::Active),
        ]
    } else {
        a.target
            .iter()
            .map(|t| LabelTarget::parse(t).ok_or_else(|| config_error(format!("unknown --target {t:?}"))))
            .collect::<Result<_, _>>()?
    };
    match (a.high, a.low) {
        (None, None) => Ok(targets.into_iter().map(LabelRule::with_defaults).collect()),
        (Some(high), Some(low)) if targets.len() == 1 => {
            LabelRule::new(targets[0], high, low).map(|r| vec![r]).map_err(|e| config_error(e.to_string()))
        }
        (Some(_), Some(_)) => Err(config_error("--high/--low need exactly one --target")),
        _ => Err(config_error("--high and --low go together")),
    }
}

fn read_text(path: &Path) -> Result<String, PipeError> {
    fs::read_to_string(path).map_err(PipeError::io(path))
}

fn read_surveys(path: &Path) -> Result<(String, Vec<SurveyResponse>), PipeError> {
    let text = read_text(path)?;
    let surveys = parse_survey_csv(&text).map_err(PipeError::format(path))?;
    Ok((text, surveys))
}

fn synth(a: &SynthArgs) -> Result<Output, PipeError> {
    let spec = CohortSpec {
        participants: a.participants,
        responses_per_participant: a.responses,
        effect: a.effect,
        seed: a.seed,
        phone_only_fraction: a.phone_only,
        noise_sd: a.noise,
        sample_rate_hz: a.sample_rate,
    };
    let cohort = gen_cohort(&spec)?;
    let hash = RunConfig { command: "synth", params: a, inputs: vec![] }.hash();
    let pool = thread_pool()?;
    let sessions: Vec<&PpgSession> = cohort.sessions().collect();
    let mut files: Vec<(String, String)> = pool.install(|| {
        sessions
            .par_iter()
            .map(|s| (format!("{SIGNALS_DIR}/{}.csv", s.session_id), write_signal_csv(s, Some(&hash))))
            .collect()
    });
    let surveys: Vec<SurveyResponse> = cohort.surveys().cloned().collect();
    files.push((SURVEYS_FILE.to_string(), write_survey_csv(&surveys, Some(&hash))));
    Ok(Output {
        files,
        summary: json!({
            "responses": surveys.len(),
            "sessions": sessions.len(),
            "phone_only": surveys.len() - sessions.len(),
            "config_hash": hash,
        }),
    })
}

fn signal_files(dir: &Path) -> Result<Vec<PathBuf>, PipeError> {
    let mut paths = fs::read_dir(dir)
        .map_err(PipeError::io(dir))?
        .map(|e| e.map(|e| e.path()).map_err(PipeError::io(dir)))
        .collect::<Result<Vec<_>, _>>()?;
    paths.retain(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"));
    paths.sort();
    Ok(paths)
}

fn window_features(
    session: &PpgSession,
    report_ms: i64,
    band: &BandpassConfig,
    half_width_s: f64,
) -> Result<HrvFeatures, String> {
    let window =
        extract_window(session, report_ms, half_width_s).map_err(|e| format!("window:{}", e.code()))?;
    let filtered = bandpass(&window, band).map_err(|e| format!("filter:{}", e.code()))?;
    compute_features(&filtered).map_err(|e| format!("{}:{}", e.stage.name(), e.error.code()))
}

pub const NO_SIGNAL: &str = "no_signal";

fn feature_row(row: &DatasetRow, band: &BandpassConfig, half_width_s: f64) -> FeatureRow {
    let survey = &row.survey;
    let result = match &row.session {
        None => Err(NO_SIGNAL.to_string()),
        Some(session) => window_features(session, survey.timestamp_ms(), band, half_width_s),
    };
    FeatureRow {
        participant_id: survey.participant_id().to_string(),
        session_id: survey.session_id().map(str::to_string),
        timestamp_ms: survey.timestamp_ms(),
        features: result.as_ref().ok().copied(),
        missing_reason: result.err(),
    }
}

fn extract(a: &ExtractArgs) -> Result<Output, PipeError> {
    let pool = thread_pool()?;
    let (survey_text, surveys) = read_surveys(&a.surveys)?;
    let paths = signal_files(&a.signals)?;
    let texts = paths.iter().map(|p| read_text(p)).collect::<Result<Vec<_>, _>>()?;
    let sessions = pool.install(|| {
        paths
            .par_iter()
            .zip(&texts)
            .map(|(p, t)| parse_signal_csv(t).map_err(PipeError::format(p)))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut inputs = vec![("surveys".to_string(), digest_hex(survey_text.as_bytes()))];
    for (p, t) in paths.iter().zip(&texts) {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        inputs.push((format!("{SIGNALS_DIR}/{name}"), digest_hex(t.as_bytes())));
    }
    let hash = RunConfig { command: "extract", params: a, inputs }.hash();

    let dataset = join_dataset(sessions, surveys)?;
    let band = BandpassConfig { low_hz: a.band.low_hz, high_hz: a.band.high_hz, order: a.order };
    let rows: Vec<FeatureRow> =
        pool.install(|| dataset.rows.par_iter().map(|r| feature_row(r, &band, a.window)).collect());

    let join = dataset.join_report;
    let mut report = AttritionReport {
        surveys: rows.len(),
        matched: join.matched,
        missing_signal: join.missing_signal,
        orphan_session: join.orphan_session,
        with_features: rows.iter().filter(|r| r.features.is_some()).count(),
        lost: BTreeMap::new(),
    };
    for (row, d) in rows.iter().zip(&dataset.rows) {
        if let (Some(reason), Some(_)) = (&row.missing_reason, &d.session) {
            *report.lost.entry(reason.clone()).or_default() += 1;
        }
    }
    Ok(Output {
        files: vec![
            (FEATURES_FILE.to_string(), write_features_csv(&rows, Some(&hash))),
            (ATTRITION_FILE.to_string(), write_attrition_csv(&report, Some(&hash))),
        ],
        summary: json!({
            "surveys": report.surveys,
            "matched": report.matched,
            "missing_signal": report.missing_signal,
            "orphan_session": report.orphan_session,
            "with_features": report.with_features,
            "config_hash": hash,
        }),
    })
}

/// Features for each survey, matched on participant, timestamp and session.
fn features_for<'a>(
    surveys: &[SurveyResponse],
    rows: &'a [FeatureRow],
    path: &Path,
) -> Result<Vec<Option<&'a HrvFeatures>>, PipeError> {
    let mismatch = |message: String| PipeError::Mismatch { path: path.to_path_buf(), message };
    let mut by_key = BTreeMap::new();
    for r in rows {
        let key = (r.participant_id.as_str(), r.timestamp_ms, r.session_id.as_deref());
        if by_key.insert(key, r.features.as_ref()).is_some() {
            return Err(mismatch(format!("duplicate row for {} at {}", r.participant_id, r.timestamp_ms)));
        }
    }
    surveys
        .iter()
        .map(|s| {
            by_key
                .get(&(s.participant_id(), s.timestamp_ms(), s.session_id()))
                .copied()
                .ok_or_else(|| mismatch(format!("no row for {} at {}", s.participant_id(), s.timestamp_ms())))
        })
        .collect()
}

/// Input names with their content digests.
type Digests = Vec<(String, String)>;

fn read_inputs(
    surveys_path: &Path,
    features_path: &Path,
) -> Result<(Vec<SurveyResponse>, Vec<FeatureRow>, Digests), PipeError> {
    let (survey_text, surveys) = read_surveys(surveys_path)?;
    let feature_text = read_text(features_path)?;
    let features = parse_features_csv(&feature_text).map_err(PipeError::format(features_path))?;
    let inputs = vec![
        ("surveys".to_string(), digest_hex(survey_text.as_bytes())),
        ("features".to_string(), digest_hex(feature_text.as_bytes())),
    ];
    Ok((surveys, features, inputs))
}

fn correlate(a: &CorrelateArgs) -> Result<Output, PipeError> {
    let (surveys, feature_rows, inputs) = read_inputs(&a.surveys, &a.features)?;
    let features = features_for(&surveys, &feature_rows, &a.features)?;
    let rows: Vec<ReportRow> =
        surveys.iter().zip(&features).map(|(survey, f)| ReportRow { survey, features: *f }).collect();
    let m = correlation_matrix(&rows, &default_variables(), a.alpha);
    let hash = RunConfig { command: "correlate", params: a, inputs }.hash();
    let k = m.size();
    let significant =
        (0..k).flat_map(|i| (0..i).map(move |j| (i, j))).filter(|&(i, j)| !m.is_masked(i, j)).count();
    Ok(Output {
        files: write_correlation_files(&m, Some(&hash))
            .into_iter()
            .map(|(n, t)| (n.to_string(), t))
            .collect(),
        summary: json!({
            "rows": rows.len(),
            "feature_rows": features.iter().filter(|f| f.is_some()).count(),
            "significant_pairs": significant,
            "config_hash": hash,
        }),
    })
}

fn task_row(rows: &[(&SurveyResponse, Option<&HrvFeatures>)], rule: &LabelRule, alpha: f64) -> MetricsRow {
    let mut out = MetricsRow {
        task: rule.target().name().to_string(),
        high_min: rule.high_min(),
        low_max: rule.low_max(),
        counts: TaskCounts::default(),
        n_train: 0,
        n_test: 0,
        metrics: None,
        status: "ok".to_string(),
    };
    let task = match build_task(rows.iter().copied(), rule) {
        Ok(task) => task,
        Err(e) => {
            if let AffectError::EmptyClass { counts, .. } = e {
                out.counts = counts;
            }
            out.status = e.code().to_string();
            return out;
        }
    };
    out.counts = task.counts;
    match train_and_evaluate(&task.samples, alpha) {
        Ok(outcome) => {
            out.n_train = outcome.n_train;
            out.n_test = outcome.n_test;
            out.metrics = Some(outcome.metrics);
        }
        Err(e) => out.status = e.code().to_string(),
    }
    out
}

fn classify(a: &ClassifyArgs) -> Result<Output, PipeError> {
    let rules = label_rules(a)?;
    let (surveys, feature_rows, inputs) = read_inputs(&a.surveys, &a.features)?;
    let features = features_for(&surveys, &feature_rows, &a.features)?;
    let rows: Vec<(&SurveyResponse, Option<&HrvFeatures>)> = surveys.iter().zip(features).collect();
    let pool = thread_pool()?;
    let metrics: Vec<MetricsRow> =
        pool.install(|| rules.par_iter().map(|rule| task_row(&rows, rule, a.alpha)).collect());
    let hash = RunConfig { command: "classify", params: a, inputs }.hash();
    let summary: Vec<_> = metrics
        .iter()
        .map(|m| {
            json!({
                "task": m.task,
                "status": m.status,
                "accuracy": m.metrics.map(|r| r.accuracy),
                "f1": m.metrics.map(|r| r.f1),
            })
        })
        .collect();
    Ok(Output {
        files: vec![(METRICS_FILE.to_string(), write_metrics_csv(&metrics, Some(&hash)))],
        summary: json!({ "tasks": summary, "config_hash": hash }),
    })
}

fn histogram<I: IntoIterator<Item = i64>>(
    variable: &str,
    range: std::ops::RangeInclusive<i64>,
    values: I,
) -> Histogram {
    let lo = *range.start();
    let mut counts = vec![0usize; range.clone().count()];
    for v in values {
        counts[(v - lo) as usize] += 1;
    }
    Histogram { variable: variable.to_string(), bins: range.zip(counts).collect() }
}

/// Hour of day (UTC) of a millisecond timestamp.
pub fn hour_of_day(timestamp_ms: i64) -> i64 {
    timestamp_ms.div_euclid(3_600_000).rem_euclid(24)
}

fn report(a: &ReportArgs) -> Result<Output, PipeError> {
    let (text, surveys) = read_surveys(&a.surveys)?;
    let hash = RunConfig {
        command: "report",
        params: a,
        inputs: vec![("surveys".into(), digest_hex(text.as_bytes()))],
    }
    .hash();
    let items: Vec<Histogram> = Emotion::ALL
        .iter()
        .map(|&e| histogram(e.name(), 1..=5, surveys.iter().map(|s| i64::from(s.score(e)))))
        .collect();
    let scores: Vec<_> = surveys.iter().map(affect::affect_scores).collect();
    let affect = vec![
        histogram("positive_affect", 5..=25, scores.iter().map(|s| i64::from(s.positive_affect))),
        histogram("negative_affect", 5..=25, scores.iter().map(|s| i64::from(s.negative_affect))),
    ];
    let load =
        vec![histogram("cognitive_load", 1..=5, surveys.iter().map(|s| i64::from(s.cognitive_load())))];
    let hours = vec![histogram("hour", 0..=23, surveys.iter().map(|s| hour_of_day(s.timestamp_ms())))];
    let files = HISTOGRAM_FILES
        .iter()
        .zip([items, affect, load, hours])
        .map(|(name, h)| (name.to_string(), write_histograms_csv(&h, Some(&hash))))
        .collect();
    Ok(Output { files, summary: json!({ "responses": surveys.len(), "config_hash": hash }) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hours_wrap_before_the_epoch() {
        assert_eq!(hour_of_day(0), 0);
        assert_eq!(hour_of_day(3_600_000 * 25 + 5), 1);
        assert_eq!(hour_of_day(-1), 23);
    }

    #[test]
    fn histogram_bins_cover_the_range() {
        let h = histogram("x", 1..=5, [1, 1, 5]);
        assert_eq!(h.bins, vec![(1, 2), (2, 0), (3, 0), (4, 0), (5, 1)]);
        assert_eq!(h.total(), 3);
    }
}
