mod support;

use std::collections::{BTreeMap, BTreeSet};

use pbt_core::grid::PrimitiveGeometry;
use pbt_core::synth::StratumOutcome;
use pbt_core::{evaluate, Canvas, Criterion, Enumerator, Library, SearchConfig, Shape, Variant};
use support::brute::{self, Cells};

fn to_cells(c: Canvas) -> Cells {
    brute::cells_of(|r, col| c.get(r, col))
}

fn reduced(shapes: &[Shape]) -> Library {
    Library::reduced(&PrimitiveGeometry::default(), shapes)
}

fn check_against_brute_force(shapes: &[Shape], criterion: Criterion, max_size: usize) {
    let lib = reduced(shapes);
    let leaves: Vec<(&str, Cells)> = shapes
        .iter()
        .map(|s| (s.alias(), brute::primitive(s.alias())))
        .collect();
    let all = brute::all_programs(&leaves, max_size);
    let minimal = brute::minimal_sizes(&all);

    let mut en = Enumerator::new(&lib, criterion, u64::MAX);
    let mut seen_pruned: BTreeSet<Cells> = BTreeSet::new();
    let mut seen_brute: BTreeSet<Cells> = BTreeSet::new();
    for (k, programs) in all.iter().enumerate().skip(1) {
        assert_eq!(en.enumerate_stratum(k, None), StratumOutcome::Complete);
        for (expr, canvas) in en.stratum(k) {
            assert_eq!(evaluate(&expr, &lib).unwrap(), canvas, "unsound rep {expr}");
            assert_eq!(expr.measures().node_count, k);
            let cells = to_cells(canvas);
            assert!(seen_pruned.insert(cells), "canvas retained twice");
            assert_eq!(minimal[&cells], k, "{expr} is not minimal");
        }
        seen_brute.extend(programs.iter().map(|p| p.cells));
        assert_eq!(seen_pruned, seen_brute, "reachable sets differ at size {k}");
    }
}

#[test]
fn pruned_enumeration_matches_brute_force() {
    for pair in [
        [Shape::LineHorizontal, Shape::Diagonal],
        [Shape::Square, Shape::Triangle],
        [Shape::LineVertical, Shape::Triangle],
    ] {
        check_against_brute_force(&pair, Criterion::Length, 6);
        check_against_brute_force(&pair, Criterion::Lexicographic, 6);
    }
}

#[test]
fn single_primitive_to_size_seven() {
    check_against_brute_force(&[Shape::Triangle], Criterion::Length, 7);
}

#[test]
fn candidate_counts_follow_arity_recurrence() {
    let lib = Library::default();
    let mut en = Enumerator::new(&lib, Criterion::Lexicographic, u64::MAX);
    for k in 1..=5 {
        en.enumerate_stratum(k, None);
        let expected = if k == 1 {
            lib.len() as u64
        } else {
            let unary = 4 * en.retained_in(k - 1) as u64;
            let binary: u64 = (1..k - 1)
                .map(|a| (en.retained_in(a) * en.retained_in(k - 1 - a)) as u64)
                .sum();
            unary + 3 * binary
        };
        assert_eq!(en.candidates_in(k), expected, "stratum {k}");
    }
    let total: u64 = (1..=5).map(|k| en.candidates_in(k)).sum();
    assert_eq!(en.nodes_expanded(), total);
    assert!(en.nodes_expanded() >= en.distinct_canvases() as u64);
}

#[test]
fn no_program_below_size_three_denotes_empty() {
    let leaves: Vec<(&str, Cells)> = Shape::ALL
        .iter()
        .map(|s| (s.alias(), brute::primitive(s.alias())))
        .collect();
    let all = brute::all_programs(&leaves, 3);
    let empty = [[false; 10]; 10];
    assert!(all[1].iter().chain(&all[2]).all(|p| p.cells != empty));
    assert!(all[3].iter().any(|p| p.cells == empty));
    let r = pbt_core::solve(Canvas::EMPTY, &lib(), &SearchConfig::new(Variant::Short));
    assert_eq!(r.program.unwrap().measures().node_count, 3);
}

fn lib() -> Library {
    Library::default()
}

#[test]
fn solve_is_deterministic() {
    let target = Canvas::from_fn(|r, c| r == 4 || r == 5 || c == 4 || c == 5);
    for variant in Variant::ALL {
        let config = SearchConfig::new(variant);
        let a = pbt_core::solve(target, &lib(), &config);
        let b = pbt_core::solve(target, &lib(), &config);
        assert!(a.same_outcome(&b));
    }
}

#[test]
fn short_minimal_on_full_library() {
    // every canvas first retained at size k has brute-force minimal size k
    let leaves: Vec<(&str, Cells)> = Shape::ALL
        .iter()
        .map(|s| (s.alias(), brute::primitive(s.alias())))
        .collect();
    let minimal = brute::minimal_sizes(&brute::all_programs(&leaves, 4));
    let lib = lib();
    let mut en = Enumerator::new(&lib, Criterion::Length, u64::MAX);
    let mut found: BTreeMap<Cells, usize> = BTreeMap::new();
    for k in 1..=4 {
        en.enumerate_stratum(k, None);
        for (_, canvas) in en.stratum(k) {
            found.insert(to_cells(canvas), k);
        }
    }
    assert_eq!(found, minimal);
}
