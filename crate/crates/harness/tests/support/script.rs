//! Scripted task sessions that keep their own tallies of what they did, as
//! the oracle for session analysis.

use std::collections::BTreeMap;
use std::sync::Arc;

use pbt_core::{evaluate, parse, Library, PatternCorpus};
use pbt_session::{ManualClock, Mode, Session};
use rand::Rng;

pub const SOLUTIONS: [&str; 4] = [
    "add(line_h,refl_h(line_h))",
    "add(square,diag)",
    "overlap(triangle,refl_v(triangle))",
    "add(add(line_h,refl_h(line_h)),add(line_v,refl_v(line_v)))",
];

pub fn corpus() -> Arc<PatternCorpus> {
    let lib = Library::default();
    Arc::new(PatternCorpus::from_patterns(
        SOLUTIONS.iter().enumerate().map(|(i, p)| {
            (
                format!("P{}", i + 1),
                evaluate(&parse(p).unwrap(), &lib).unwrap(),
            )
        }),
    ))
}

/// Totals per pattern, accumulated by the script itself.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Tally {
    pub trials: u64,
    pub steps: u64,
    pub time_us: u64,
    pub helpers_created: u64,
    /// Per trial: (steps naming a helper, steps).
    pub helper_fractions: Vec<(u64, u64)>,
    pub accurate: u64,
}

/// Runs one session over every pattern. Each trial gets 1 to 5 steps; some
/// name a helper, some only reference earlier steps. Returns the session.
pub fn scripted_session(
    rng: &mut impl Rng,
    corpus: &Arc<PatternCorpus>,
    start_us: u64,
    tallies: &mut BTreeMap<String, Tally>,
) -> Session {
    let clock = ManualClock::new(start_us);
    let mut s = Session::create(Mode::Task, Some(corpus.clone()), &clock).unwrap();
    for (t, pattern) in corpus.patterns.iter().enumerate() {
        // trial_started lands 1 µs after the clock reading that preceded
        // it, because the previous event holds that exact timestamp.
        let mut elapsed: u64 = 0;
        let tally = tallies.entry(pattern.id.clone()).or_default();
        let n_steps = rng.random_range(1..=5u64);
        let mut helper_steps = 0;
        for k in 1..=n_steps {
            let dt = rng.random_range(1..=20u64) * 250_000;
            clock.advance_micros(dt);
            elapsed += dt;
            let helpers: Vec<String> = s
                .state()
                .helpers
                .helpers()
                .iter()
                .map(|e| e.name.clone())
                .collect();
            let program = if k == n_steps {
                if rng.random_bool(0.7) {
                    SOLUTIONS[t].to_string()
                } else {
                    "diag".to_string()
                }
            } else if !helpers.is_empty() && rng.random_bool(0.5) {
                helper_steps += 1;
                format!(
                    "add({},square)",
                    helpers[rng.random_range(0..helpers.len())]
                )
            } else if k > 1 && rng.random_bool(0.5) {
                format!("refl_v(step_{})", k - 1)
            } else {
                "triangle".to_string()
            };
            s.add_step(&program, &clock).unwrap();
            if rng.random_bool(0.25) {
                let dt = 100_000;
                clock.advance_micros(dt);
                elapsed += dt;
                s.save_helper(k as usize, None, &clock).unwrap();
                tally.helpers_created += 1;
            }
        }
        let dt = rng.random_range(1..=8u64) * 125_000;
        clock.advance_micros(dt);
        elapsed += dt;
        let out = s.submit(&clock).unwrap();
        tally.trials += 1;
        tally.steps += n_steps;
        tally.time_us += elapsed - 1;
        tally.helper_fractions.push((helper_steps, n_steps));
        tally.accurate += u64::from(out.accuracy);
    }
    s
}

/// Mean of fractions with exact rational arithmetic, rounded once.
pub fn exact_mean(fractions: &[(u64, u64)]) -> f64 {
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let (mut num, mut den) = (0u128, 1u128);
    for &(a, b) in fractions {
        let (a, b) = (a as u128, b as u128);
        num = num * b + a * den;
        den *= b;
        let g = gcd(num, den).max(1);
        num /= g;
        den /= g;
    }
    num as f64 / (den * fractions.len() as u128) as f64
}
