//! Event-sourced task sessions: trials, steps, helpers, submissions and the
//! line-delimited log they are stored as.

pub mod clock;
pub mod event;
pub mod session;
pub mod store;

pub use clock::{Clock, ManualClock, SystemClock};
pub use event::{parse_log, to_line, write_log, EventBody, LogError, Mode, SessionEvent};
pub use session::{
    distinct_helpers, GalleryEntry, ReplayError, Session, SessionError, SessionState, Step,
    SubmitOutcome,
};
pub use store::{log_files, read_log_file, SessionStore, StoreError};
