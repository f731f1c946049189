//! Linking self-reports to the PPG sessions recorded while they were filled in.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::model::{PpgSession, SurveyResponse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct JoinReport {
    pub matched: usize,
    /// Surveys with no session id, or whose session was never received.
    pub missing_signal: usize,
    /// Sessions no survey refers to.
    pub orphan_session: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub survey: SurveyResponse,
    pub session: Option<Arc<PpgSession>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// One row per survey, ordered by (timestamp, participant id).
    pub rows: Vec<DatasetRow>,
    pub join_report: JoinReport,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JoinError {
    #[error("session id {0:?} appears more than once")]
    DuplicateSessionId(String),
}

pub fn join_dataset(sessions: Vec<PpgSession>, surveys: Vec<SurveyResponse>) -> Result<Dataset, JoinError> {
    let mut by_id: BTreeMap<String, Arc<PpgSession>> = BTreeMap::new();
    for session in sessions {
        let id = session.session_id.clone();
        if by_id.insert(id.clone(), Arc::new(session)).is_some() {
            return Err(JoinError::DuplicateSessionId(id));
        }
    }
    let mut report = JoinReport::default();
    let mut used = BTreeSet::new();
    let mut rows: Vec<DatasetRow> = surveys
        .into_iter()
        .map(|survey| {
            let session = survey.session_id().and_then(|id| by_id.get(id)).cloned();
            match &session {
                Some(s) => {
                    report.matched += 1;
                    used.insert(s.session_id.clone());
                }
                None => report.missing_signal += 1,
            }
            DatasetRow { survey, session }
        })
        .collect();
    report.orphan_session = by_id.keys().filter(|id| !used.contains(*id)).count();
    rows.sort_by(|a, b| {
        (a.survey.timestamp_ms(), a.survey.participant_id(), a.survey.session_id()).cmp(&(
            b.survey.timestamp_ms(),
            b.survey.participant_id(),
            b.survey.session_id(),
        ))
    });
    Ok(Dataset { rows, join_report: report })
}
