//! CSV files read and written by the pipeline.
//!
//! Every file may open with `# key=value` comment lines. Writers put the
//! config hash first when one is given; readers skip keys they do not know.
//! Reals are written in Rust's shortest round-trip form, so parsing a written
//! file gives back the same bits.

use std::collections::BTreeMap;
use std::str::FromStr;

use valence_core::affect::TaskCounts;
use valence_core::classify::MetricsReport;
use valence_core::model::NOMINAL_SAMPLE_RATE_HZ;
use valence_core::stats::{CorrelationMatrix, Variable};
use valence_core::{Emotion, FeatureName, HrvFeatures, PpgSample, PpgSession, SurveyResponse, Violation};

pub const CONFIG_HASH_KEY: &str = "config_hash";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("row {0}: timestamp does not increase")]
    NonMonotonicTimestamp(usize),
    #[error("row {row}: cannot parse {column}")]
    UnparsableValue { row: usize, column: String },
    #[error("row {row}: {column} outside 1..=5")]
    ScoreOutOfRange { row: usize, column: String },
    #[error("missing column {0}")]
    MissingColumn(String),
    #[error("row {row}: {message}")]
    InvalidRow { row: usize, message: String },
}

impl FormatError {
    pub fn code(&self) -> &'static str {
        match self {
            FormatError::MalformedHeader(_) => "malformed_header",
            FormatError::NonMonotonicTimestamp(_) => "non_monotonic_timestamp",
            FormatError::UnparsableValue { .. } => "unparsable_value",
            FormatError::ScoreOutOfRange { .. } => "score_out_of_range",
            FormatError::MissingColumn(_) => "missing_column",
            FormatError::InvalidRow { .. } => "invalid_row",
        }
    }
}

/// Leading `# key=value` lines, and the text after them.
pub fn split_comments(text: &str) -> (Vec<(String, String)>, &str) {
    let mut pairs = Vec::new();
    let mut rest = text;
    while let Some(line_and_more) = rest.strip_prefix('#') {
        let (line, more) = line_and_more.split_once('\n').unwrap_or((line_and_more, ""));
        if let Some((k, v)) = line.trim().split_once('=') {
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        rest = more;
    }
    (pairs, rest)
}

pub fn comment_value<'a>(pairs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

pub fn config_hash_of(text: &str) -> Option<String> {
    comment_value(&split_comments(text).0, CONFIG_HASH_KEY).map(str::to_string)
}

fn comments(config_hash: Option<&str>, pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in config_hash.map(|h| (CONFIG_HASH_KEY, h.to_string())).iter().chain(pairs) {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out
}

pub fn float(v: f64) -> String {
    format!("{v:?}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

fn csv_text<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

struct Table {
    header: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(body: &str) -> Result<Table, FormatError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| FormatError::MalformedHeader(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect::<Vec<_>>();
        if header.is_empty() || header == [""] {
            return Err(FormatError::MalformedHeader("no column header".into()));
        }
        let rows = reader
            .records()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| FormatError::InvalidRow { row: i + 1, message: e.to_string() }))
            .collect::<Result<_, _>>()?;
        Ok(Table { header, rows })
    }

    fn column(&self, name: &str) -> Result<usize, FormatError> {
        self.header.iter().position(|h| h == name).ok_or_else(|| FormatError::MissingColumn(name.to_string()))
    }

    fn expect_header(&self, want: &[&str]) -> Result<(), FormatError> {
        if self.header != want {
            return Err(FormatError::MalformedHeader(format!(
                "expected {:?}, found {:?}",
                want.join(","),
                self.header.join(",")
            )));
        }
        Ok(())
    }
}

fn field<T: FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    row: usize,
    column: &str,
) -> Result<T, FormatError> {
    rec.get(idx)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| FormatError::UnparsableValue { row, column: column.to_string() })
}

fn opt_field<T: FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    row: usize,
    column: &str,
) -> Result<Option<T>, FormatError> {
    match rec.get(idx) {
        Some("") => Ok(None),
        _ => field(rec, idx, row, column).map(Some),
    }
}

fn finite(v: f64, row: usize, column: &str) -> Result<f64, FormatError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FormatError::UnparsableValue { row, column: column.to_string() })
    }
}

fn opt_text(s: &str) -> Option<String> {
    (!s.is_empty()).then(|| s.to_string())
}

pub const SIGNAL_COLUMNS: [&str; 2] = ["timestamp_ms", "ppg_green"];

/// One session per file: id lines in the comment header, then samples.
pub fn parse_signal_csv(text: &str) -> Result<PpgSession, FormatError> {
    let (pairs, body) = split_comments(text);
    let required = |key: &str| {
        comment_value(&pairs, key)
            .filter(|v| !v.is_empty())
            .map(str::to_string)
            .ok_or_else(|| FormatError::MalformedHeader(format!("no `# {key}=` line")))
    };
    let session_id = required("session_id")?;
    let participant_id = required("participant_id")?;
    let sample_rate_hz = match comment_value(&pairs, "sample_rate_hz") {
        None => NOMINAL_SAMPLE_RATE_HZ,
        Some(v) => v
            .parse::<f64>()
            .ok()
            .filter(|r| r.is_finite() && *r > 0.0)
            .ok_or_else(|| FormatError::MalformedHeader(format!("sample_rate_hz {v:?}")))?,
    };
    let table = Table::read(body)?;
    table.expect_header(&SIGNAL_COLUMNS)?;
    let mut samples: Vec<PpgSample> = Vec::with_capacity(table.rows.len());
    for (i, rec) in table.rows.iter().enumerate() {
        let row = i + 1;
        let timestamp_ms: i64 = field(rec, 0, row, "timestamp_ms")?;
        let value = finite(field(rec, 1, row, "ppg_green")?, row, "ppg_green")?;
        if samples.last().is_some_and(|p| p.timestamp_ms >= timestamp_ms) {
            return Err(FormatError::NonMonotonicTimestamp(row));
        }
        samples.push(PpgSample { timestamp_ms, value });
    }
    let session = PpgSession::new(session_id, participant_id, sample_rate_hz, samples);
    if let Some(v) = session.validate().into_iter().next() {
        let row = match v {
            Violation::NegativeTimestamp { index } | Violation::NonFiniteValue { index } => index + 1,
            _ => 0,
        };
        return Err(FormatError::InvalidRow { row, message: v.to_string() });
    }
    Ok(session)
}

pub fn write_signal_csv(session: &PpgSession, config_hash: Option<&str>) -> String {
    let mut out = comments(
        config_hash,
        &[
            ("session_id", session.session_id.clone()),
            ("participant_id", session.participant_id.clone()),
            ("sample_rate_hz", float(session.sample_rate_hz)),
        ],
    );
    out.push_str(&csv_text(
        &SIGNAL_COLUMNS,
        session.samples.iter().map(|s| [s.timestamp_ms.to_string(), float(s.value)]),
    ));
    out
}

pub const SURVEY_COLUMNS: [&str; 14] = [
    "participant_id",
    "session_id",
    "timestamp_ms",
    "active",
    "inspired",
    "attentive",
    "determined",
    "alert",
    "hostile",
    "nervous",
    "upset",
    "afraid",
    "ashamed",
    "cognitive_load",
];

/// Columns are found by name; an empty `session_id` marks a phone-only report.
pub fn parse_survey_csv(text: &str) -> Result<Vec<SurveyResponse>, FormatError> {
    let table = Table::read(split_comments(text).1)?;
    let idx = SURVEY_COLUMNS.iter().map(|c| table.column(c)).collect::<Result<Vec<_>, _>>()?;
    let likert = |rec: &csv::StringRecord, col: usize, row: usize| -> Result<u8, FormatError> {
        let name = SURVEY_COLUMNS[col];
        let v: i64 = field(rec, idx[col], row, name)?;
        if !(1..=5).contains(&v) {
            return Err(FormatError::ScoreOutOfRange { row, column: name.to_string() });
        }
        Ok(v as u8)
    };
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let row = i + 1;
            let mut scores = [0u8; 10];
            for e in Emotion::ALL {
                scores[e.index()] = likert(rec, 3 + e.index(), row)?;
            }
            let load = likert(rec, 13, row)?;
            let participant: String = field(rec, idx[0], row, "participant_id")?;
            if participant.is_empty() {
                return Err(FormatError::UnparsableValue { row, column: "participant_id".into() });
            }
            SurveyResponse::new(
                participant,
                opt_text(&rec[idx[1]]),
                field(rec, idx[2], row, "timestamp_ms")?,
                scores,
                load,
            )
            .map_err(|e| FormatError::InvalidRow { row, message: e.to_string() })
        })
        .collect()
}

pub fn write_survey_csv(surveys: &[SurveyResponse], config_hash: Option<&str>) -> String {
    let mut out = comments(config_hash, &[]);
    out.push_str(&csv_text(
        &SURVEY_COLUMNS,
        surveys.iter().map(|s| {
            let mut row = vec![
                s.participant_id().to_string(),
                s.session_id().unwrap_or_default().to_string(),
                s.timestamp_ms().to_string(),
            ];
            row.extend(Emotion::ALL.iter().map(|&e| s.score(e).to_string()));
            row.push(s.cognitive_load().to_string());
            row
        }),
    ));
    out
}

/// Extraction result for one survey.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub participant_id: String,
    pub session_id: Option<String>,
    pub timestamp_ms: i64,
    pub features: Option<HrvFeatures>,
    /// Why `features` is absent.
    pub missing_reason: Option<String>,
}

fn feature_columns() -> Vec<&'static str> {
    let mut cols = vec!["participant_id", "session_id", "timestamp_ms"];
    cols.extend(FeatureName::ALL.iter().map(|f| f.name()));
    cols.push("missing_reason");
    cols
}

pub fn write_features_csv(rows: &[FeatureRow], config_hash: Option<&str>) -> String {
    let mut out = comments(config_hash, &[]);
    out.push_str(&csv_text(
        &feature_columns(),
        rows.iter().map(|r| {
            let mut fields = vec![
                r.participant_id.clone(),
                r.session_id.clone().unwrap_or_default(),
                r.timestamp_ms.to_string(),
            ];
            fields.extend(FeatureName::ALL.iter().map(|&f| opt_float(r.features.and_then(|h| h.get(f)))));
            fields.push(r.missing_reason.clone().unwrap_or_default());
            fields
        }),
    ));
    out
}

pub fn parse_features_csv(text: &str) -> Result<Vec<FeatureRow>, FormatError> {
    let table = Table::read(split_comments(text).1)?;
    let cols = feature_columns();
    let idx = cols.iter().map(|c| table.column(c)).collect::<Result<Vec<_>, _>>()?;
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let row = i + 1;
            let mut values = [None; 12];
            for (k, name) in FeatureName::ALL.iter().enumerate() {
                values[k] = opt_field::<f64>(rec, idx[3 + k], row, name.name())?
                    .map(|v| finite(v, row, name.name()))
                    .transpose()?;
            }
            let features = if values.iter().all(Option::is_none) {
                None
            } else {
                let need = |k: usize| {
                    values[k].ok_or_else(|| FormatError::InvalidRow {
                        row,
                        message: format!("{} missing from a feature row", FeatureName::ALL[k].name()),
                    })
                };
                Some(HrvFeatures {
                    bpm: need(0)?,
                    ibi: need(1)?,
                    sdnn: need(2)?,
                    rmssd: need(3)?,
                    pnn20: need(4)?,
                    pnn50: need(5)?,
                    hr_mad: need(6)?,
                    sd1: need(7)?,
                    sd2: need(8)?,
                    s: need(9)?,
                    sd1_sd2: values[10],
                    breathing_rate: values[11],
                })
            };
            Ok(FeatureRow {
                participant_id: field(rec, idx[0], row, "participant_id")?,
                session_id: opt_text(&rec[idx[1]]),
                timestamp_ms: field(rec, idx[2], row, "timestamp_ms")?,
                features,
                missing_reason: opt_text(&rec[idx[15]]),
            })
        })
        .collect()
}

/// Cell types that can appear in a matrix file.
pub trait MatrixCell: Sized {
    fn to_field(&self) -> String;
    fn from_field(s: &str) -> Option<Self>;
}

impl MatrixCell for Option<f64> {
    fn to_field(&self) -> String {
        opt_float(*self)
    }

    fn from_field(s: &str) -> Option<Self> {
        if s.is_empty() {
            return Some(None);
        }
        s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some)
    }
}

/// 1 masked, 0 significant.
impl MatrixCell for bool {
    fn to_field(&self) -> String {
        u8::from(*self).to_string()
    }

    fn from_field(s: &str) -> Option<Self> {
        match s {
            "1" => Some(true),
            "0" => Some(false),
            _ => None,
        }
    }
}

impl MatrixCell for usize {
    fn to_field(&self) -> String {
        self.to_string()
    }

    fn from_field(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

/// A square, row-major matrix file with named rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile<T> {
    pub variables: Vec<Variable>,
    pub cells: Vec<T>,
    pub comments: Vec<(String, String)>,
}

pub fn write_matrix_csv<T: MatrixCell>(
    variables: &[Variable],
    cells: &[T],
    extra: &[(&str, String)],
    config_hash: Option<&str>,
) -> String {
    let k = variables.len();
    let mut header = vec!["variable"];
    header.extend(variables.iter().map(|v| v.name()));
    let mut out = comments(config_hash, extra);
    out.push_str(&csv_text(
        &header,
        variables.iter().enumerate().map(|(i, v)| {
            std::iter::once(v.name().to_string())
                .chain(cells[i * k..(i + 1) * k].iter().map(MatrixCell::to_field))
                .collect::<Vec<_>>()
        }),
    ));
    out
}

pub fn parse_matrix_csv<T: MatrixCell>(text: &str) -> Result<MatrixFile<T>, FormatError> {
    let (comments, body) = split_comments(text);
    let table = Table::read(body)?;
    if table.header.first().map(String::as_str) != Some("variable") {
        return Err(FormatError::MalformedHeader("first column must be `variable`".into()));
    }
    let variables = table.header[1..]
        .iter()
        .map(|n| {
            Variable::parse(n).ok_or_else(|| FormatError::MalformedHeader(format!("unknown variable {n:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if table.rows.len() != variables.len() {
        return Err(FormatError::MalformedHeader(format!(
            "{} columns but {} rows",
            variables.len(),
            table.rows.len()
        )));
    }
    let mut cells = Vec::with_capacity(variables.len() * variables.len());
    for (i, rec) in table.rows.iter().enumerate() {
        let row = i + 1;
        if &rec[0] != variables[i].name() {
            return Err(FormatError::InvalidRow {
                row,
                message: format!("row label {:?} out of order", &rec[0]),
            });
        }
        for (j, v) in variables.iter().enumerate() {
            let cell = T::from_field(&rec[j + 1])
                .ok_or_else(|| FormatError::UnparsableValue { row, column: v.name().to_string() })?;
            cells.push(cell);
        }
    }
    Ok(MatrixFile { variables, cells, comments })
}

pub const CORRELATION_R: &str = "correlation_r.csv";
pub const CORRELATION_P: &str = "correlation_p.csv";
pub const CORRELATION_MASK: &str = "correlation_mask.csv";
pub const CORRELATION_N: &str = "correlation_n.csv";

/// r, p, mask and pair-count files for a correlation matrix.
pub fn write_correlation_files(
    m: &CorrelationMatrix,
    config_hash: Option<&str>,
) -> Vec<(&'static str, String)> {
    let k = m.size();
    let alpha = [("alpha", float(m.alpha))];
    let mask: Vec<bool> = (0..k * k).map(|c| m.is_masked(c / k, c % k)).collect();
    vec![
        (CORRELATION_R, write_matrix_csv(&m.variables, &m.r, &alpha, config_hash)),
        (CORRELATION_P, write_matrix_csv(&m.variables, &m.p, &alpha, config_hash)),
        (CORRELATION_MASK, write_matrix_csv(&m.variables, &mask, &alpha, config_hash)),
        (CORRELATION_N, write_matrix_csv(&m.variables, &m.n, &alpha, config_hash)),
    ]
}

/// Rebuilds a matrix from its r, p and count files.
pub fn parse_correlation_files(r: &str, p: &str, n: &str) -> Result<CorrelationMatrix, FormatError> {
    let r = parse_matrix_csv::<Option<f64>>(r)?;
    let p = parse_matrix_csv::<Option<f64>>(p)?;
    let n = parse_matrix_csv::<usize>(n)?;
    if r.variables != p.variables || r.variables != n.variables {
        return Err(FormatError::MalformedHeader("matrix files disagree on variables".into()));
    }
    let alpha = comment_value(&r.comments, "alpha")
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| FormatError::MalformedHeader("no `# alpha=` line".into()))?;
    Ok(CorrelationMatrix { variables: r.variables, r: r.cells, p: p.cells, n: n.cells, alpha })
}

/// One classification task's outcome; `metrics` is absent when the task
/// could not run, and `status` then says why.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub task: String,
    pub high_min: u8,
    pub low_max: u8,
    pub counts: TaskCounts,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: Option<MetricsReport>,
    pub status: String,
}

pub const METRICS_COLUMNS: [&str; 18] = [
    "task",
    "Accuracy",
    "F1",
    "Precision",
    "Recall",
    "high_min",
    "low_max",
    "n_high",
    "n_low",
    "n_excluded",
    "n_missing_features",
    "n_train",
    "n_test",
    "true_low_pred_low",
    "true_low_pred_high",
    "true_high_pred_low",
    "true_high_pred_high",
    "status",
];

pub fn write_metrics_csv(rows: &[MetricsRow], config_hash: Option<&str>) -> String {
    let mut out = comments(config_hash, &[]);
    out.push_str(&csv_text(
        &METRICS_COLUMNS,
        rows.iter().map(|r| {
            let m = r.metrics;
            let mut fields = vec![r.task.clone()];
            fields.extend(
                [m.map(|m| m.accuracy), m.map(|m| m.f1), m.map(|m| m.precision), m.map(|m| m.recall)]
                    .map(opt_float),
            );
            fields.extend(
                [
                    r.high_min as usize,
                    r.low_max as usize,
                    r.counts.high,
                    r.counts.low,
                    r.counts.excluded,
                    r.counts.missing_features,
                    r.n_train,
                    r.n_test,
                ]
                .map(|v| v.to_string()),
            );
            let confusion = m.map(|m| m.confusion);
            fields.extend(
                [(0, 0), (0, 1), (1, 0), (1, 1)]
                    .map(|(t, p)| confusion.map(|c| c[t][p].to_string()).unwrap_or_default()),
            );
            fields.push(r.status.clone());
            fields
        }),
    ));
    out
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<MetricsRow>, FormatError> {
    let table = Table::read(split_comments(text).1)?;
    table.expect_header(&METRICS_COLUMNS)?;
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let row = i + 1;
            let real = |k: usize| opt_field::<f64>(rec, k, row, METRICS_COLUMNS[k]);
            let count = |k: usize| field::<usize>(rec, k, row, METRICS_COLUMNS[k]);
            let cell = |k: usize| opt_field::<usize>(rec, k, row, METRICS_COLUMNS[k]);
            let scores = [real(1)?, real(2)?, real(3)?, real(4)?];
            let confusion = [cell(13)?, cell(14)?, cell(15)?, cell(16)?];
            let metrics = match (scores, confusion) {
                (
                    [Some(accuracy), Some(f1), Some(precision), Some(recall)],
                    [Some(a), Some(b), Some(c), Some(d)],
                ) => Some(MetricsReport { accuracy, f1, precision, recall, confusion: [[a, b], [c, d]] }),
                ([None, None, None, None], [None, None, None, None]) => None,
                _ => return Err(FormatError::InvalidRow { row, message: "partially filled metrics".into() }),
            };
            Ok(MetricsRow {
                task: rec[0].to_string(),
                high_min: field(rec, 5, row, "high_min")?,
                low_max: field(rec, 6, row, "low_max")?,
                counts: TaskCounts {
                    high: count(7)?,
                    low: count(8)?,
                    excluded: count(9)?,
                    missing_features: count(10)?,
                },
                n_train: count(11)?,
                n_test: count(12)?,
                metrics,
                status: rec[17].to_string(),
            })
        })
        .collect()
}

/// Counts per value of one variable, in value order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub variable: String,
    pub bins: Vec<(i64, usize)>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.bins.iter().map(|b| b.1).sum()
    }
}

pub const HISTOGRAM_COLUMNS: [&str; 3] = ["variable", "value", "count"];

pub fn write_histograms_csv(hists: &[Histogram], config_hash: Option<&str>) -> String {
    let mut out = comments(config_hash, &[]);
    out.push_str(&csv_text(
        &HISTOGRAM_COLUMNS,
        hists
            .iter()
            .flat_map(|h| h.bins.iter().map(|(v, c)| [h.variable.clone(), v.to_string(), c.to_string()])),
    ));
    out
}

pub fn parse_histograms_csv(text: &str) -> Result<Vec<Histogram>, FormatError> {
    let table = Table::read(split_comments(text).1)?;
    table.expect_header(&HISTOGRAM_COLUMNS)?;
    let mut hists: Vec<Histogram> = Vec::new();
    for (i, rec) in table.rows.iter().enumerate() {
        let row = i + 1;
        let bin = (field(rec, 1, row, "value")?, field(rec, 2, row, "count")?);
        match hists.last_mut() {
            Some(h) if h.variable == rec[0] => h.bins.push(bin),
            _ => hists.push(Histogram { variable: rec[0].to_string(), bins: vec![bin] }),
        }
    }
    Ok(hists)
}

/// How many surveys reached feature extraction, and where the rest were lost.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttritionReport {
    pub surveys: usize,
    pub matched: usize,
    pub missing_signal: usize,
    pub orphan_session: usize,
    pub with_features: usize,
    /// Matched surveys without features, by reason.
    pub lost: BTreeMap<String, usize>,
}

const LOST_PREFIX: &str = "lost:";

pub fn write_attrition_csv(report: &AttritionReport, config_hash: Option<&str>) -> String {
    let fixed = [
        ("surveys", report.surveys),
        ("matched", report.matched),
        ("missing_signal", report.missing_signal),
        ("orphan_session", report.orphan_session),
        ("with_features", report.with_features),
    ];
    let mut out = comments(config_hash, &[]);
    out.push_str(&csv_text(
        &["metric", "count"],
        fixed
            .iter()
            .map(|(k, v)| [k.to_string(), v.to_string()])
            .chain(report.lost.iter().map(|(k, v)| [format!("{LOST_PREFIX}{k}"), v.to_string()])),
    ));
    out
}

pub fn parse_attrition_csv(text: &str) -> Result<AttritionReport, FormatError> {
    let table = Table::read(split_comments(text).1)?;
    table.expect_header(&["metric", "count"])?;
    let mut report = AttritionReport::default();
    let mut seen = Vec::new();
    for (i, rec) in table.rows.iter().enumerate() {
        let row = i + 1;
        let count: usize = field(rec, 1, row, "count")?;
        let key = &rec[0];
        let slot = match key {
            "surveys" => &mut report.surveys,
            "matched" => &mut report.matched,
            "missing_signal" => &mut report.missing_signal,
            "orphan_session" => &mut report.orphan_session,
            "with_features" => &mut report.with_features,
            other => match other.strip_prefix(LOST_PREFIX) {
                Some(reason) => report.lost.entry(reason.to_string()).or_default(),
                None => {
                    return Err(FormatError::InvalidRow { row, message: format!("unknown metric {other:?}") })
                }
            },
        };
        *slot = count;
        seen.push(key.to_string());
    }
    for key in ["surveys", "matched", "missing_signal", "orphan_session", "with_features"] {
        if !seen.iter().any(|s| s == key) {
            return Err(FormatError::MissingColumn(key.to_string()));
        }
    }
    Ok(report)
}
