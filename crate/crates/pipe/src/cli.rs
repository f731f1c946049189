use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "valence-pipe", version, about = "PPG + PANAS valence pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate a synthetic cohort: one signal CSV per session plus surveys.csv.
    Synth(SynthArgs),
    /// Join surveys to sessions and extract HRV features.
    Extract(ExtractArgs),
    /// Pearson matrices (r, p, mask, n) over self-reports and features.
    Correlate(CorrelateArgs),
    /// Train and score Naive Bayes valence classifiers, one per task.
    Classify(ClassifyArgs),
    /// Histograms of item scores, affect sums, cognitive load and report hour.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Extract(_) => "extract",
            Command::Correlate(_) => "correlate",
            Command::Classify(_) => "classify",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 15)]
    pub participants: usize,
    /// Responses per participant.
    #[arg(long, default_value_t = 20)]
    pub responses: usize,
    /// IBI shortening of high-valence responses, in baseline spreads.
    #[arg(long, default_value_t = 2.0)]
    pub effect: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Share of responses reported on the phone, without a signal.
    #[arg(long = "phone-only", default_value_t = 0.0)]
    pub phone_only: f64,
    /// PPG noise standard deviation.
    #[arg(long, default_value_t = 2.0)]
    pub noise: f64,
    #[arg(long = "sample-rate", default_value_t = 25.0)]
    pub sample_rate: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

/// Passband edges in Hz, written `low:high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub low_hz: f64,
    pub high_hz: f64,
}

impl FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> Result<Band, String> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected low:high, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Band { low_hz: parse(lo)?, high_hz: parse(hi)? })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExtractArgs {
    /// Directory of signal CSVs.
    #[arg(long)]
    #[serde(skip)]
    pub signals: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub surveys: PathBuf,
    #[arg(long, default_value = "0.5:8.0")]
    pub band: Band,
    /// Butterworth order.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Half width of the analysis window, seconds.
    #[arg(long, default_value_t = 30.0)]
    pub window: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CorrelateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub surveys: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub features: PathBuf,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    #[serde(skip)]
    pub surveys: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub features: PathBuf,
    /// Label target, repeatable: positive_affect, negative_affect or an
    /// emotion. Defaults to positive_affect, alert, afraid and active.
    #[arg(long)]
    pub target: Vec<String>,
    /// Lowest score labeled high; needs a single --target.
    #[arg(long)]
    pub high: Option<u8>,
    /// Highest score labeled low; needs a single --target.
    #[arg(long)]
    pub low: Option<u8>,
    /// Laplace smoothing.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    #[arg(long)]
    #[serde(skip)]
    pub surveys: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}
