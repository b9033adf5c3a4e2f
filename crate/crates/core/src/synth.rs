//! Bottom-up enumerative search with observational-equivalence pruning and
//! online library learning.
//!
//! Programs are enumerated in strata of exact AST size (`node_count`).
//! Stratum 1 is the library; stratum `k > 1` applies every unary operator to
//! the retained representatives of stratum `k − 1` and every binary operator
//! to pairs of representatives whose sizes sum to `k − 1`. Each constructed
//! candidate counts as one expanded node before any pruning. A candidate
//! whose canvas was first seen in an earlier stratum is dropped; one whose
//! canvas was first seen earlier in the same stratum competes with the
//! incumbent under the ranking criterion.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::grid::{BinaryOp, Canvas, Operator, UnaryOp};
use crate::lang::Expr;
use crate::library::{Library, Origin};

pub const DEFAULT_MAX_NODES: u64 = 1_000_000;
pub const DEFAULT_MAX_SIZE: usize = 15;

/// How observationally equivalent programs are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Preorder token sequences compared under library order, then operator order.
    Lexicographic,
    /// Fewer leaves first, ties broken lexicographically.
    Length,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Baseline,
    Short,
    Library,
    ShortLibrary,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Baseline,
        Variant::Short,
        Variant::Library,
        Variant::ShortLibrary,
    ];

    pub fn criterion(self) -> Criterion {
        match self {
            Variant::Baseline | Variant::Library => Criterion::Lexicographic,
            Variant::Short | Variant::ShortLibrary => Criterion::Length,
        }
    }

    /// Whether solved targets are added to the library.
    pub fn learns_library(self) -> bool {
        matches!(self, Variant::Library | Variant::ShortLibrary)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Short => "short",
            Variant::Library => "library",
            Variant::ShortLibrary => "short_library",
        }
    }

    /// The same ranking criterion without library learning.
    pub fn without_library(self) -> Variant {
        match self {
            Variant::Library => Variant::Baseline,
            Variant::ShortLibrary => Variant::Short,
            v => v,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownVariant(pub String);

impl fmt::Display for UnknownVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown variant `{}` (expected baseline, short, library or short_library)",
            self.0
        )
    }
}

impl std::error::Error for UnknownVariant {}

impl FromStr for Variant {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | '+' | ' '))
            .collect();
        match norm.as_str() {
            "baseline" => Ok(Variant::Baseline),
            "short" => Ok(Variant::Short),
            "library" => Ok(Variant::Library),
            "shortlibrary" => Ok(Variant::ShortLibrary),
            _ => Err(UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub variant: Variant,
    /// Budget on candidates constructed per target.
    pub max_nodes: u64,
    /// Cap on program node count.
    pub max_size: usize,
}

impl SearchConfig {
    pub fn new(variant: Variant) -> Self {
        SearchConfig {
            variant,
            max_nodes: DEFAULT_MAX_NODES,
            max_size: DEFAULT_MAX_SIZE,
        }
    }

    pub fn with_max_nodes(mut self, max_nodes: u64) -> Self {
        self.max_nodes = max_nodes;
        self
    }

    pub fn with_max_size(mut self, max_size: usize) -> Self {
        self.max_size = max_size;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    /// Candidates constructed, counted before pruning.
    pub nodes_expanded: u64,
    /// Canvases retained in the equivalence store.
    pub distinct_canvases: usize,
    pub strata_completed: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub solved: bool,
    pub program: Option<Expr>,
    /// Leaf count of `program`.
    pub program_length: Option<usize>,
    pub stats: SearchStats,
    /// Entries in the library the search ran over.
    pub library_size: usize,
    /// Whether the search stopped on the node budget (rather than the size cap).
    pub budget_exhausted: bool,
}

impl SolveResult {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &SolveResult) -> bool {
        let strip = |r: &SolveResult| {
            let mut r = r.clone();
            r.stats.wall_time = Duration::ZERO;
            r
        };
        strip(self) == strip(other)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Token<'a> {
    Entry(usize),
    Op(usize),
    Step(usize),
    Unresolved(&'a str),
}

fn expr_tokens<'a>(e: &'a Expr, lib: &Library, out: &mut Vec<Token<'a>>) {
    match e {
        Expr::Primitive(shape) => out.push(match lib.position(shape.alias()) {
            Some(i) => Token::Entry(i),
            None => Token::Unresolved(shape.alias()),
        }),
        Expr::Helper(name) => out.push(match lib.position(name) {
            Some(i) => Token::Entry(i),
            None => Token::Unresolved(name),
        }),
        Expr::Step(k) => out.push(Token::Step(*k)),
        Expr::Unary(op, c) => {
            out.push(Token::Op(Operator::Unary(*op).rank()));
            expr_tokens(c, lib, out);
        }
        Expr::Binary(op, l, r) => {
            out.push(Token::Op(Operator::Binary(*op).rank()));
            expr_tokens(l, lib, out);
            expr_tokens(r, lib, out);
        }
    }
}

/// Total order on programs under `criterion`; `Less` means `a` is preferred.
///
/// The token order is library entries in insertion order followed by the
/// operators in declared order, compared over preorder traversals.
pub fn rank(a: &Expr, b: &Expr, criterion: Criterion, lib: &Library) -> Ordering {
    let lex = || {
        let (mut ta, mut tb) = (Vec::new(), Vec::new());
        expr_tokens(a, lib, &mut ta);
        expr_tokens(b, lib, &mut tb);
        ta.cmp(&tb)
    };
    match criterion {
        Criterion::Lexicographic => lex(),
        Criterion::Length => a
            .measures()
            .leaf_count
            .cmp(&b.measures().leaf_count)
            .then_with(lex),
    }
}

type NodeId = u32;

#[derive(Debug, Clone, Copy)]
enum NodeKind {
    Leaf(usize),
    Unary(UnaryOp, NodeId),
    Binary(BinaryOp, NodeId, NodeId),
}

#[derive(Debug, Clone, Copy)]
struct Node {
    canvas: Canvas,
    kind: NodeKind,
    size: u16,
    leaves: u16,
}

/// Result of enumerating one stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StratumOutcome {
    Complete,
    /// The node budget ran out mid-stratum; candidates retained so far are kept.
    BudgetExhausted,
    /// A new canvas equal to the target was retained.
    Found,
}

/// Equivalence store plus the strata enumerated so far for one search.
pub struct Enumerator<'a> {
    lib: &'a Library,
    criterion: Criterion,
    max_nodes: u64,
    nodes: Vec<Node>,
    by_canvas: HashMap<Canvas, NodeId>,
    /// `strata[k]` holds the representatives of size `k`; index 0 is unused.
    strata: Vec<Vec<NodeId>>,
    candidates: Vec<u64>,
    nodes_expanded: u64,
    found: Option<NodeId>,
}

impl<'a> Enumerator<'a> {
    pub fn new(lib: &'a Library, criterion: Criterion, max_nodes: u64) -> Self {
        Enumerator {
            lib,
            criterion,
            max_nodes,
            nodes: Vec::new(),
            by_canvas: HashMap::new(),
            strata: vec![Vec::new()],
            candidates: vec![0],
            nodes_expanded: 0,
            found: None,
        }
    }

    pub fn nodes_expanded(&self) -> u64 {
        self.nodes_expanded
    }

    pub fn distinct_canvases(&self) -> usize {
        self.nodes.len()
    }

    /// Highest stratum enumerated (fully or partially).
    pub fn strata_enumerated(&self) -> usize {
        self.strata.len() - 1
    }

    /// Candidates constructed in stratum `k`, before pruning.
    pub fn candidates_in(&self, k: usize) -> u64 {
        self.candidates.get(k).copied().unwrap_or(0)
    }

    /// Number of representatives retained in stratum `k`.
    pub fn retained_in(&self, k: usize) -> usize {
        self.strata.get(k).map_or(0, Vec::len)
    }

    /// Representatives of stratum `k` in discovery order.
    pub fn stratum(&self, k: usize) -> Vec<(Expr, Canvas)> {
        self.strata
            .get(k)
            .into_iter()
            .flatten()
            .map(|&id| (self.expr(id), self.nodes[id as usize].canvas))
            .collect()
    }

    /// The retained representative for `canvas`, if any.
    pub fn representative(&self, canvas: Canvas) -> Option<Expr> {
        self.by_canvas.get(&canvas).map(|&id| self.expr(id))
    }

    /// The program that hit the target, once found.
    pub fn found(&self) -> Option<Expr> {
        self.found.map(|id| self.expr(id))
    }

    fn expr(&self, id: NodeId) -> Expr {
        match self.nodes[id as usize].kind {
            NodeKind::Leaf(i) => self.leaf_expr(i),
            NodeKind::Unary(op, c) => Expr::unary(op, self.expr(c)),
            NodeKind::Binary(op, l, r) => Expr::binary(op, self.expr(l), self.expr(r)),
        }
    }

    fn leaf_expr(&self, i: usize) -> Expr {
        match self.lib.entries()[i].origin {
            Origin::BuiltIn(shape) => Expr::Primitive(shape),
            _ => Expr::Helper(self.lib.entries()[i].name.clone()),
        }
    }

    fn kind_tokens(&self, kind: NodeKind, out: &mut Vec<Token<'static>>) {
        match kind {
            NodeKind::Leaf(i) => out.push(Token::Entry(i)),
            NodeKind::Unary(op, c) => {
                out.push(Token::Op(Operator::Unary(op).rank()));
                self.kind_tokens(self.nodes[c as usize].kind, out);
            }
            NodeKind::Binary(op, l, r) => {
                out.push(Token::Op(Operator::Binary(op).rank()));
                self.kind_tokens(self.nodes[l as usize].kind, out);
                self.kind_tokens(self.nodes[r as usize].kind, out);
            }
        }
    }

    fn prefers(&self, candidate: NodeKind, leaves: u16, incumbent: &Node) -> bool {
        if self.criterion == Criterion::Length && leaves != incumbent.leaves {
            return leaves < incumbent.leaves;
        }
        let (mut a, mut b) = (Vec::new(), Vec::new());
        self.kind_tokens(candidate, &mut a);
        self.kind_tokens(incumbent.kind, &mut b);
        a < b
    }

    /// Registers one candidate of stratum `k`. Returns `Some` to stop.
    fn consider(
        &mut self,
        k: usize,
        kind: NodeKind,
        canvas: Canvas,
        leaves: u16,
        target: Option<Canvas>,
    ) -> Option<StratumOutcome> {
        if self.nodes_expanded >= self.max_nodes {
            return Some(StratumOutcome::BudgetExhausted);
        }
        self.nodes_expanded += 1;
        self.candidates[k] += 1;
        match self.by_canvas.get(&canvas) {
            None => {
                let id = self.nodes.len() as NodeId;
                self.nodes.push(Node {
                    canvas,
                    kind,
                    size: k as u16,
                    leaves,
                });
                self.by_canvas.insert(canvas, id);
                self.strata[k].push(id);
                if target == Some(canvas) {
                    self.found = Some(id);
                    return Some(StratumOutcome::Found);
                }
            }
            Some(&id) => {
                let incumbent = self.nodes[id as usize];
                if incumbent.size as usize == k && self.prefers(kind, leaves, &incumbent) {
                    let node = &mut self.nodes[id as usize];
                    node.kind = kind;
                    node.leaves = leaves;
                }
            }
        }
        None
    }

    /// Enumerates stratum `k`, which must be the next one after those
    /// already enumerated. Stops early when `target` is retained or the
    /// node budget runs out.
    pub fn enumerate_stratum(&mut self, k: usize, target: Option<Canvas>) -> StratumOutcome {
        assert_eq!(k, self.strata.len(), "strata must be enumerated in order");
        self.strata.push(Vec::new());
        self.candidates.push(0);

        if k == 1 {
            for (i, entry) in self.lib.entries().iter().enumerate() {
                if let Some(stop) = self.consider(1, NodeKind::Leaf(i), entry.canvas, 1, target) {
                    return stop;
                }
            }
            return StratumOutcome::Complete;
        }

        for op in UnaryOp::ALL {
            for idx in 0..self.strata[k - 1].len() {
                let child = self.strata[k - 1][idx];
                let node = self.nodes[child as usize];
                let canvas = node.canvas.apply_unary(op);
                if let Some(stop) =
                    self.consider(k, NodeKind::Unary(op, child), canvas, node.leaves, target)
                {
                    return stop;
                }
            }
        }
        for op in BinaryOp::ALL {
            for left_size in 1..k - 1 {
                let right_size = k - 1 - left_size;
                for li in 0..self.strata[left_size].len() {
                    let l = self.strata[left_size][li];
                    let ln = self.nodes[l as usize];
                    for ri in 0..self.strata[right_size].len() {
                        let r = self.strata[right_size][ri];
                        let rn = self.nodes[r as usize];
                        let canvas = ln.canvas.apply_binary(op, rn.canvas);
                        let kind = NodeKind::Binary(op, l, r);
                        if let Some(stop) =
                            self.consider(k, kind, canvas, ln.leaves + rn.leaves, target)
                        {
                            return stop;
                        }
                    }
                }
            }
        }
        StratumOutcome::Complete
    }
}

/// Searches for a program over `lib` that evaluates to `target`.
pub fn solve(target: Canvas, lib: &Library, config: &SearchConfig) -> SolveResult {
    let start = Instant::now();
    let mut en = Enumerator::new(lib, config.variant.criterion(), config.max_nodes);
    let mut strata_completed = 0;
    let mut budget_exhausted = false;
    let mut program = None;
    for k in 1..=config.max_size {
        match en.enumerate_stratum(k, Some(target)) {
            StratumOutcome::Complete => strata_completed += 1,
            StratumOutcome::Found => {
                program = en.found();
                break;
            }
            StratumOutcome::BudgetExhausted => {
                budget_exhausted = true;
                break;
            }
        }
    }
    let stats = SearchStats {
        nodes_expanded: en.nodes_expanded(),
        distinct_canvases: en.distinct_canvases(),
        strata_completed,
        wall_time: start.elapsed(),
    };
    SolveResult {
        solved: program.is_some(),
        program_length: program.as_ref().map(|p| p.measures().leaf_count),
        program,
        stats,
        library_size: lib.len(),
        budget_exhausted,
    }
}

/// Name given to the library entry learned from the `index`-th target (1-based).
pub fn helper_name(index: usize) -> String {
    format!("helper_{index}")
}

/// Solves `targets` in order starting from the default library.
pub fn solve_sequence(targets: &[Canvas], config: &SearchConfig) -> Vec<SolveResult> {
    solve_sequence_from(targets, Library::default(), config).0
}

/// Solves `targets` in order. Library variants append each solved target as
/// `helper_<i>` before the next search; every target gets a fresh budget and
/// a fresh equivalence store. Returns the results and the final library.
pub fn solve_sequence_from(
    targets: &[Canvas],
    mut lib: Library,
    config: &SearchConfig,
) -> (Vec<SolveResult>, Library) {
    let mut results = Vec::with_capacity(targets.len());
    for (i, &target) in targets.iter().enumerate() {
        let result = solve(target, &lib, config);
        if config.variant.learns_library() {
            if let Some(program) = &result.program {
                let mut name = helper_name(i + 1);
                let mut n = 1;
                while lib.contains(&name) {
                    n += 1;
                    name = format!("{}_{n}", helper_name(i + 1));
                }
                lib.push(name, target, Origin::Program(program.clone()))
                    .expect("generated helper names are valid and unused");
            }
        }
        results.push(result);
    }
    (results, lib)
}
