use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Task,
    Freeplay,
}

/// One line of a session log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionEvent {
    /// Microseconds since the Unix epoch; strictly increasing within a session.
    pub ts: u64,
    pub session_id: String,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventBody {
    SessionStarted {
        mode: Mode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        corpus_digest: Option<String>,
    },
    TrialStarted {
        trial_index: usize,
        /// Pattern id; absent in free play.
        #[serde(default)]
        trial_id: Option<String>,
    },
    StepAdded {
        index: usize,
        program: String,
        /// Helper names referenced by the program.
        #[serde(default)]
        helpers_used: Vec<String>,
    },
    HelperSaved {
        step: usize,
        name: String,
    },
    HelperRemoved {
        name: String,
    },
    Submitted {
        trial_index: usize,
        trial_id: String,
        accuracy: bool,
        points: u32,
    },
    GallerySubmitted {
        #[serde(default)]
        name: Option<String>,
    },
    SessionEnded {},
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            EventBody::SessionStarted { .. } => "session_started",
            EventBody::TrialStarted { .. } => "trial_started",
            EventBody::StepAdded { .. } => "step_added",
            EventBody::HelperSaved { .. } => "helper_saved",
            EventBody::HelperRemoved { .. } => "helper_removed",
            EventBody::Submitted { .. } => "submitted",
            EventBody::GallerySubmitted { .. } => "gallery_submitted",
            EventBody::SessionEnded {} => "session_ended",
        }
    }
}

#[derive(Debug, Error)]
#[error("log line {line}: {message}")]
pub struct LogError {
    pub line: usize,
    pub message: String,
}

/// Serializes events as line-delimited JSON.
pub fn write_log(events: &[SessionEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&to_line(e));
        out.push('\n');
    }
    out
}

pub fn to_line(event: &SessionEvent) -> String {
    serde_json::to_string(event).expect("session events always serialize")
}

/// Parses a line-delimited log. Blank lines are skipped.
pub fn parse_log(text: &str) -> Result<Vec<SessionEvent>, LogError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| LogError {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
