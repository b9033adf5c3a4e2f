//! Random session driver for replay and analysis tests.

use std::sync::Arc;

use pbt_core::PatternCorpus;
use pbt_session::{ManualClock, Mode, Session};
use rand::seq::IndexedRandom;
use rand::Rng;

const LEAVES: [&str; 5] = ["line_h", "line_v", "diag", "square", "triangle"];
const UNARY: [&str; 4] = ["invert", "refl_h", "refl_v", "refl_d"];
const BINARY: [&str; 3] = ["add", "subtract", "overlap"];

/// A random program over primitives, current helpers and earlier steps.
pub fn random_program(rng: &mut impl Rng, session: &Session, depth: u32) -> String {
    let st = session.state();
    if depth == 0 || rng.random_bool(0.35) {
        let helpers: Vec<&str> = st
            .helpers
            .helpers()
            .iter()
            .map(|e| e.name.as_str())
            .collect();
        let roll = rng.random_range(0..10);
        if roll < 2 && !helpers.is_empty() {
            return helpers.choose(rng).unwrap().to_string();
        }
        if roll < 4 && !st.steps.is_empty() {
            return format!("step_{}", rng.random_range(1..=st.steps.len()));
        }
        return LEAVES.choose(rng).unwrap().to_string();
    }
    if rng.random_bool(0.4) {
        format!(
            "{}({})",
            UNARY.choose(rng).unwrap(),
            random_program(rng, session, depth - 1)
        )
    } else {
        format!(
            "{}({},{})",
            BINARY.choose(rng).unwrap(),
            random_program(rng, session, depth - 1),
            random_program(rng, session, depth - 1)
        )
    }
}

/// Drives a session through random commands, including rejected ones.
/// `solutions[i]` solves pattern i and is used now and then so that some
/// submissions are accurate.
pub fn random_session(
    rng: &mut impl Rng,
    mode: Mode,
    corpus: Option<Arc<PatternCorpus>>,
    solutions: &[String],
    clock: &ManualClock,
    max_actions: usize,
) -> Session {
    let mut s = Session::create(mode, corpus, clock).unwrap();
    for _ in 0..max_actions {
        if s.state().complete {
            break;
        }
        clock.advance_micros(rng.random_range(0..3_000_000));
        let n_steps = s.state().steps.len();
        match rng.random_range(0..100) {
            0..=44 => {
                let program = random_program(rng, &s, 3);
                let _ = s.add_step(&program, clock);
            }
            45..=49 => {
                let _ = s.add_step("add(line_h", clock);
                let _ = s.add_step(&format!("step_{}", n_steps + 2), clock);
                let _ = s.add_step("nonexistent_helper", clock);
            }
            50..=57 if n_steps > 0 => {
                let step = rng.random_range(1..=n_steps);
                let name = rng
                    .random_bool(0.3)
                    .then(|| format!("mine{}", rng.random_range(0..4)));
                let _ = s.save_helper(step, name.as_deref(), clock);
            }
            58..=62 => {
                let helpers: Vec<String> = s
                    .state()
                    .helpers
                    .helpers()
                    .iter()
                    .map(|e| e.name.clone())
                    .collect();
                if let Some(name) = helpers.choose(rng) {
                    s.remove_helper(name, clock).unwrap();
                }
            }
            63..=72 => {
                let idx = s.state().trial_index;
                if let (Mode::Task, Some(sol)) = (mode, solutions.get(idx)) {
                    s.add_step(sol, clock).unwrap();
                }
            }
            73..=89 => match mode {
                Mode::Task => {
                    let _ = s.submit(clock);
                }
                Mode::Freeplay => {
                    let name = rng.random_bool(0.5).then_some("creation");
                    let _ = s.submit_gallery(name, clock);
                }
            },
            _ => {}
        }
    }
    s
}

pub const FIXTURE_SOLUTIONS: [&str; 4] = [
    "add(line_h,refl_h(line_h))",
    "add(square,diag)",
    "overlap(triangle,refl_v(triangle))",
    "add(add(line_h,refl_h(line_h)),add(line_v,refl_v(line_v)))",
];

/// A four-pattern corpus with known solutions.
pub fn fixture() -> (Arc<PatternCorpus>, Vec<String>) {
    let lib = pbt_core::Library::default();
    let corpus =
        PatternCorpus::from_patterns(FIXTURE_SOLUTIONS.iter().enumerate().map(|(i, p)| {
            let canvas = pbt_core::evaluate(&pbt_core::parse(p).unwrap(), &lib).unwrap();
            (format!("T{}", i + 1), canvas)
        }));
    (
        Arc::new(corpus),
        FIXTURE_SOLUTIONS.iter().map(|s| s.to_string()).collect(),
    )
}
