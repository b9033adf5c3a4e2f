use std::sync::Arc;

use pbt_core::{
    evaluate_with_steps, parse, Canvas, EvalError, Expr, Library, LibraryError, Origin, ParseError,
    PatternCorpus,
};
use thiserror::Error;

use crate::clock::Clock;
use crate::event::{EventBody, Mode, SessionEvent};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("task mode needs a loaded corpus")]
    NoCorpus,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error("no step {0} in the current trial")]
    NoSuchStep(usize),
    #[error("the current trial has no steps")]
    NoSteps,
    #[error("operation requires {0:?} mode")]
    WrongMode(Mode),
    #[error("session is complete")]
    Complete,
    #[error("inconsistent log: {0}")]
    Replay(String),
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("log is empty")]
    Empty,
    #[error("event {seq}: {message}")]
    Inconsistent { seq: usize, message: String },
    #[error("event {seq}: {source}")]
    Rejected {
        seq: usize,
        #[source]
        source: SessionError,
    },
}

/// A rendered step. The canvas is frozen at creation time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub index: usize,
    pub program: Expr,
    pub canvas: Canvas,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GalleryEntry {
    pub name: Option<String>,
    pub canvas: Canvas,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionState {
    pub session_id: String,
    pub mode: Mode,
    /// 0-based position in the corpus (task mode) or count of gallery
    /// submissions (free play).
    pub trial_index: usize,
    pub trial_id: Option<String>,
    pub target: Option<Canvas>,
    pub steps: Vec<Step>,
    /// Built-in primitives followed by saved helpers.
    pub helpers: Library,
    pub points: u32,
    pub gallery: Vec<GalleryEntry>,
    pub created_at: u64,
    pub complete: bool,
    /// Helpers saved so far; default names never repeat.
    pub helpers_saved: usize,
}

impl SessionState {
    pub fn step_canvases(&self) -> Vec<Canvas> {
        self.steps.iter().map(|s| s.canvas).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmitOutcome {
    pub accuracy: bool,
    pub points: u32,
    /// Id of the trial that now starts, if any.
    pub next_trial: Option<String>,
    pub complete: bool,
}

/// A live session: its state plus the log that produced it.
#[derive(Debug, Clone)]
pub struct Session {
    state: SessionState,
    events: Vec<SessionEvent>,
    corpus: Option<Arc<PatternCorpus>>,
}

impl Session {
    pub fn create(
        mode: Mode,
        corpus: Option<Arc<PatternCorpus>>,
        clock: &dyn Clock,
    ) -> Result<Session, SessionError> {
        Session::create_with_id(
            uuid::Uuid::new_v4().simple().to_string(),
            mode,
            corpus,
            clock,
        )
    }

    pub fn create_with_id(
        session_id: String,
        mode: Mode,
        corpus: Option<Arc<PatternCorpus>>,
        clock: &dyn Clock,
    ) -> Result<Session, SessionError> {
        let corpus = match mode {
            Mode::Task => Some(
                corpus
                    .filter(|c| !c.is_empty())
                    .ok_or(SessionError::NoCorpus)?,
            ),
            Mode::Freeplay => None,
        };
        let ts = clock.now_micros();
        let mut session = Session {
            state: blank_state(session_id, mode, ts),
            events: Vec::new(),
            corpus,
        };
        let corpus_digest = session.corpus.as_ref().map(|c| c.digest());
        session.record(
            EventBody::SessionStarted {
                mode,
                corpus_digest,
            },
            clock,
        )?;
        let trial_id = session.corpus.as_ref().map(|c| c.patterns[0].id.clone());
        session.record(
            EventBody::TrialStarted {
                trial_index: 0,
                trial_id,
            },
            clock,
        )?;
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.state.session_id
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn corpus(&self) -> Option<&Arc<PatternCorpus>> {
        self.corpus.as_ref()
    }

    pub fn add_step(
        &mut self,
        program: &str,
        clock: &dyn Clock,
    ) -> Result<(usize, Canvas), SessionError> {
        let expr = parse(program)?;
        let helpers_used = distinct_helpers(&expr);
        let index = self.state.steps.len() + 1;
        self.record(
            EventBody::StepAdded {
                index,
                program: program.trim().to_string(),
                helpers_used,
            },
            clock,
        )?;
        Ok((index, self.state.steps[index - 1].canvas))
    }

    /// Saves step `step` (1-based) as a helper; returns the helper's name.
    pub fn save_helper(
        &mut self,
        step: usize,
        name: Option<&str>,
        clock: &dyn Clock,
    ) -> Result<String, SessionError> {
        let name = match name {
            Some(n) => n.trim().to_string(),
            None => self.default_helper_name(),
        };
        self.record(
            EventBody::HelperSaved {
                step,
                name: name.clone(),
            },
            clock,
        )?;
        Ok(name)
    }

    pub fn remove_helper(&mut self, name: &str, clock: &dyn Clock) -> Result<(), SessionError> {
        self.record(
            EventBody::HelperRemoved {
                name: name.to_string(),
            },
            clock,
        )
    }

    pub fn submit(&mut self, clock: &dyn Clock) -> Result<SubmitOutcome, SessionError> {
        self.check_live()?;
        if self.state.mode != Mode::Task {
            return Err(SessionError::WrongMode(Mode::Task));
        }
        let last = self.state.steps.last().ok_or(SessionError::NoSteps)?;
        let accuracy = Some(last.canvas) == self.state.target;
        let trial_index = self.state.trial_index;
        let trial_id = self.state.trial_id.clone().unwrap_or_default();
        let points = self.state.points + u32::from(accuracy);
        self.record(
            EventBody::Submitted {
                trial_index,
                trial_id,
                accuracy,
                points,
            },
            clock,
        )?;
        let corpus = self.corpus.clone().expect("task sessions carry a corpus");
        let next = trial_index + 1;
        let next_trial = match corpus.get(next) {
            Some(p) => {
                self.record(
                    EventBody::TrialStarted {
                        trial_index: next,
                        trial_id: Some(p.id.clone()),
                    },
                    clock,
                )?;
                Some(p.id.clone())
            }
            None => {
                self.record(EventBody::SessionEnded {}, clock)?;
                None
            }
        };
        Ok(SubmitOutcome {
            accuracy,
            points,
            next_trial,
            complete: self.state.complete,
        })
    }

    pub fn submit_gallery(
        &mut self,
        name: Option<&str>,
        clock: &dyn Clock,
    ) -> Result<GalleryEntry, SessionError> {
        let name = name
            .map(str::trim)
            .filter(|n| !n.is_empty())
            .map(String::from);
        self.record(EventBody::GallerySubmitted { name }, clock)?;
        Ok(self
            .state
            .gallery
            .last()
            .cloned()
            .expect("gallery entry just added"))
    }

    /// Closes the session. Further commands fail.
    pub fn end(&mut self, clock: &dyn Clock) -> Result<(), SessionError> {
        self.record(EventBody::SessionEnded {}, clock)
    }

    /// Rebuilds a session by folding its log. Every event is re-validated,
    /// and recorded outcomes (accuracy, points) must match recomputation.
    pub fn replay(
        events: &[SessionEvent],
        corpus: Option<Arc<PatternCorpus>>,
    ) -> Result<Session, ReplayError> {
        let first = events.first().ok_or(ReplayError::Empty)?;
        let mode = match &first.body {
            EventBody::SessionStarted {
                mode,
                corpus_digest,
            } => {
                if let (Some(d), Some(c)) = (corpus_digest, &corpus) {
                    if *d != c.digest() {
                        return Err(ReplayError::Inconsistent {
                            seq: 0,
                            message: "corpus digest does not match".into(),
                        });
                    }
                }
                *mode
            }
            other => {
                return Err(ReplayError::Inconsistent {
                    seq: 0,
                    message: format!("log starts with {}", other.kind()),
                })
            }
        };
        let corpus = match mode {
            Mode::Task => Some(corpus.ok_or(ReplayError::Rejected {
                seq: 0,
                source: SessionError::NoCorpus,
            })?),
            Mode::Freeplay => None,
        };
        let mut session = Session {
            state: blank_state(first.session_id.clone(), mode, first.ts),
            events: Vec::with_capacity(events.len()),
            corpus,
        };
        for (seq, event) in events.iter().enumerate() {
            if event.session_id != session.state.session_id {
                return Err(ReplayError::Inconsistent {
                    seq,
                    message: format!("foreign session id {}", event.session_id),
                });
            }
            if let Some(prev) = session.events.last() {
                if event.ts <= prev.ts {
                    return Err(ReplayError::Inconsistent {
                        seq,
                        message: "timestamps are not increasing".into(),
                    });
                }
            }
            session
                .apply(&event.body, seq)
                .map_err(|source| ReplayError::Rejected { seq, source })?;
            session.events.push(event.clone());
        }
        Ok(session)
    }

    fn default_helper_name(&self) -> String {
        let mut n = self.state.helpers_saved + 1;
        loop {
            let name = format!("h{n}");
            if !self.state.helpers.contains(&name) {
                return name;
            }
            n += 1;
        }
    }

    fn check_live(&self) -> Result<(), SessionError> {
        if self.state.complete {
            Err(SessionError::Complete)
        } else {
            Ok(())
        }
    }

    /// Stamps, applies and appends one event. Nothing changes on error.
    fn record(&mut self, body: EventBody, clock: &dyn Clock) -> Result<(), SessionError> {
        let seq = self.events.len();
        self.apply(&body, seq)?;
        let ts = match self.events.last() {
            Some(prev) => clock.now_micros().max(prev.ts + 1),
            None => clock.now_micros(),
        };
        self.events.push(SessionEvent {
            ts,
            session_id: self.state.session_id.clone(),
            body,
        });
        Ok(())
    }

    /// The fold step. Validates fully before mutating so that a rejected
    /// event leaves the state untouched.
    fn apply(&mut self, body: &EventBody, seq: usize) -> Result<(), SessionError> {
        let st = &mut self.state;
        if st.complete {
            return Err(SessionError::Complete);
        }
        match body {
            EventBody::SessionStarted { mode, .. } => {
                if seq != 0 || *mode != st.mode {
                    return Err(inconsistent("unexpected session_started"));
                }
            }
            EventBody::TrialStarted {
                trial_index,
                trial_id,
            } => {
                let (expected_index, target, expected_id) = match (&self.corpus, st.mode) {
                    (Some(c), Mode::Task) => {
                        let expected = if seq == 1 { 0 } else { st.trial_index + 1 };
                        let p = c
                            .get(expected)
                            .ok_or_else(|| inconsistent("trial past the end of the corpus"))?;
                        (expected, Some(p.canvas), Some(p.id.clone()))
                    }
                    _ => (st.trial_index, None, None),
                };
                let after_submit = matches!(
                    self.events.last().map(|e| &e.body),
                    Some(EventBody::SessionStarted { .. }) | Some(EventBody::Submitted { .. })
                );
                if !after_submit || *trial_index != expected_index || *trial_id != expected_id {
                    return Err(inconsistent("trial_started out of sequence"));
                }
                st.trial_index = expected_index;
                st.trial_id = expected_id;
                st.target = target;
                st.steps.clear();
            }
            EventBody::StepAdded {
                index,
                program,
                helpers_used,
            } => {
                let expr = parse(program)?;
                let canvas = evaluate_with_steps(&expr, &st.helpers, &st.step_canvases())?;
                if *index != st.steps.len() + 1 {
                    return Err(inconsistent("step index out of sequence"));
                }
                if *helpers_used != distinct_helpers(&expr) {
                    return Err(inconsistent("helpers_used does not match the program"));
                }
                st.steps.push(Step {
                    index: *index,
                    program: expr,
                    canvas,
                });
            }
            EventBody::HelperSaved { step, name } => {
                let s = st
                    .steps
                    .get(step.wrapping_sub(1))
                    .ok_or(SessionError::NoSuchStep(*step))?;
                let (canvas, program) = (s.canvas, s.program.clone());
                st.helpers
                    .push(name.clone(), canvas, Origin::Program(program))?;
                st.helpers_saved += 1;
            }
            EventBody::HelperRemoved { name } => {
                st.helpers.remove(name)?;
            }
            EventBody::Submitted {
                trial_index,
                trial_id,
                accuracy,
                points,
            } => {
                if st.mode != Mode::Task {
                    return Err(SessionError::WrongMode(Mode::Task));
                }
                let last = st.steps.last().ok_or(SessionError::NoSteps)?;
                let ok = Some(last.canvas) == st.target;
                let expected_points = st.points + u32::from(ok);
                if *trial_index != st.trial_index
                    || Some(trial_id) != st.trial_id.as_ref()
                    || *accuracy != ok
                    || *points != expected_points
                {
                    return Err(inconsistent("submission outcome does not match the replay"));
                }
                st.points = expected_points;
                st.steps.clear();
            }
            EventBody::GallerySubmitted { name } => {
                if st.mode != Mode::Freeplay {
                    return Err(SessionError::WrongMode(Mode::Freeplay));
                }
                let last = st.steps.last().ok_or(SessionError::NoSteps)?;
                st.gallery.push(GalleryEntry {
                    name: name.clone(),
                    canvas: last.canvas,
                });
                st.trial_index += 1;
                st.steps.clear();
            }
            EventBody::SessionEnded {} => {
                st.complete = true;
                st.steps.clear();
            }
        }
        Ok(())
    }
}

fn blank_state(session_id: String, mode: Mode, created_at: u64) -> SessionState {
    SessionState {
        session_id,
        mode,
        trial_index: 0,
        trial_id: None,
        target: None,
        steps: Vec::new(),
        helpers: Library::default(),
        points: 0,
        gallery: Vec::new(),
        created_at,
        complete: false,
        helpers_saved: 0,
    }
}

/// Helper names referenced by `expr`, first occurrence order.
pub fn distinct_helpers(expr: &Expr) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for name in expr.helper_refs() {
        if !out.iter().any(|h| h == name) {
            out.push(name.to_string());
        }
    }
    out
}

fn inconsistent(message: &str) -> SessionError {
    SessionError::Replay(message.to_string())
}
