//! Unpruned brute-force program enumerator with its own cell-array
//! semantics. Used as an oracle for the pruned search; shares no code with
//! the evaluator or the enumerator under test.

#![allow(dead_code)]

use std::collections::BTreeMap;

pub type Cells = [[bool; 10]; 10];

pub const UNARY: [&str; 4] = ["invert", "refl_h", "refl_v", "refl_d"];
pub const BINARY: [&str; 3] = ["add", "subtract", "overlap"];

pub fn apply_unary(op: usize, g: &Cells) -> Cells {
    let mut out = [[false; 10]; 10];
    for r in 0..10 {
        for c in 0..10 {
            out[r][c] = match op {
                0 => !g[r][c],
                1 => g[9 - r][c],
                2 => g[r][9 - c],
                3 => g[c][r],
                _ => unreachable!(),
            };
        }
    }
    out
}

pub fn apply_binary(op: usize, a: &Cells, b: &Cells) -> Cells {
    let mut out = [[false; 10]; 10];
    for r in 0..10 {
        for c in 0..10 {
            out[r][c] = match op {
                0 => a[r][c] || b[r][c],
                1 => a[r][c] && !b[r][c],
                2 => a[r][c] && b[r][c],
                _ => unreachable!(),
            };
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct Program {
    pub text: String,
    pub cells: Cells,
    pub leaves: usize,
}

/// Every program of exact node count `1..=max_size` over `leaves`,
/// indexed by size (index 0 empty). No pruning of any kind.
pub fn all_programs(leaves: &[(&str, Cells)], max_size: usize) -> Vec<Vec<Program>> {
    let mut by_size: Vec<Vec<Program>> = vec![Vec::new(); max_size + 1];
    if max_size == 0 {
        return by_size;
    }
    by_size[1] = leaves
        .iter()
        .map(|(name, cells)| Program {
            text: name.to_string(),
            cells: *cells,
            leaves: 1,
        })
        .collect();
    for k in 2..=max_size {
        let mut out = Vec::new();
        for (op, name) in UNARY.iter().enumerate() {
            for p in &by_size[k - 1] {
                out.push(Program {
                    text: format!("{name}({})", p.text),
                    cells: apply_unary(op, &p.cells),
                    leaves: p.leaves,
                });
            }
        }
        for (op, name) in BINARY.iter().enumerate() {
            for a in 1..k - 1 {
                for p in &by_size[a] {
                    for q in &by_size[k - 1 - a] {
                        out.push(Program {
                            text: format!("{name}({},{})", p.text, q.text),
                            cells: apply_binary(op, &p.cells, &q.cells),
                            leaves: p.leaves + q.leaves,
                        });
                    }
                }
            }
        }
        by_size[k] = out;
    }
    by_size
}

/// Smallest node count at which each grid appears.
pub fn minimal_sizes(programs: &[Vec<Program>]) -> BTreeMap<Cells, usize> {
    let mut best = BTreeMap::new();
    for (k, stratum) in programs.iter().enumerate() {
        for p in stratum {
            best.entry(p.cells).or_insert(k);
        }
    }
    best
}

pub fn cells_of(f: impl Fn(usize, usize) -> bool) -> Cells {
    let mut g = [[false; 10]; 10];
    for (r, row) in g.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = f(r, c);
        }
    }
    g
}

/// Canonical primitive geometry, written out independently.
pub fn primitive(name: &str) -> Cells {
    match name {
        "line_h" => cells_of(|r, _| r == 4),
        "line_v" => cells_of(|_, c| c == 4),
        "diag" => cells_of(|r, c| r == c),
        "square" => cells_of(|r, c| r == 0 || r == 9 || c == 0 || c == 9),
        "triangle" => cells_of(|r, c| c <= r),
        other => panic!("no primitive {other}"),
    }
}
