//! The canvas value domain: a 10×10 boolean grid packed into a `u128`,
//! the five primitive shapes, and the unary/binary transformations.
//!
//! Cells are addressed `(row, col)` with row 0 at the top. The packed
//! encoding is row-major with bit 0 = `(0, 0)` and bit 99 = `(9, 9)`; the
//! top 28 bits of the `u128` are always zero.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Side length of every canvas.
pub const SIZE: usize = 10;
/// Number of cells in a canvas.
pub const CELLS: usize = SIZE * SIZE;

const MASK: u128 = (1u128 << CELLS) - 1;
const ROW_MASK: u128 = (1u128 << SIZE) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("invalid primitive `{0}`")]
    InvalidPrimitive(String),
    #[error("canvas text line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("canvas encoding has bits set beyond cell 99")]
    Overflow,
}

/// A 10×10 boolean grid.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Canvas(u128);

impl Canvas {
    /// The all-false canvas `c₀`.
    pub const EMPTY: Canvas = Canvas(0);
    /// The all-true canvas.
    pub const FULL: Canvas = Canvas(MASK);

    pub const fn empty() -> Self {
        Self::EMPTY
    }

    pub fn from_bits(bits: u128) -> Result<Self, GridError> {
        if bits & !MASK != 0 {
            return Err(GridError::Overflow);
        }
        Ok(Canvas(bits))
    }

    /// Packed 100-bit encoding.
    #[inline]
    pub const fn bits(self) -> u128 {
        self.0
    }

    pub fn from_cells<I: IntoIterator<Item = (usize, usize)>>(cells: I) -> Self {
        let mut canvas = Canvas::EMPTY;
        for (r, c) in cells {
            canvas.set(r, c, true);
        }
        canvas
    }

    /// Builds a canvas from a predicate over `(row, col)`.
    pub fn from_fn(f: impl Fn(usize, usize) -> bool) -> Self {
        let mut canvas = Canvas::EMPTY;
        for r in 0..SIZE {
            for c in 0..SIZE {
                if f(r, c) {
                    canvas.set(r, c, true);
                }
            }
        }
        canvas
    }

    #[inline]
    pub fn get(self, row: usize, col: usize) -> bool {
        assert!(row < SIZE && col < SIZE, "cell ({row}, {col}) out of range");
        (self.0 >> (row * SIZE + col)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(row < SIZE && col < SIZE, "cell ({row}, {col}) out of range");
        let bit = 1u128 << (row * SIZE + col);
        if value {
            self.0 |= bit;
        } else {
            self.0 &= !bit;
        }
    }

    /// Number of true cells.
    #[inline]
    pub fn popcount(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Iterates the coordinates of true cells in row-major order.
    pub fn cells(self) -> impl Iterator<Item = (usize, usize)> {
        (0..CELLS)
            .filter(move |i| (self.0 >> i) & 1 == 1)
            .map(|i| (i / SIZE, i % SIZE))
    }

    #[inline]
    fn row(self, r: usize) -> u128 {
        (self.0 >> (r * SIZE)) & ROW_MASK
    }

    pub fn invert(self) -> Self {
        Canvas(!self.0 & MASK)
    }

    /// Top↔bottom flip: `(r, c) ↦ (9 − r, c)`.
    pub fn reflect_horizontal(self) -> Self {
        let mut out = 0u128;
        for r in 0..SIZE {
            out |= self.row(r) << ((SIZE - 1 - r) * SIZE);
        }
        Canvas(out)
    }

    /// Left↔right flip: `(r, c) ↦ (r, 9 − c)`.
    pub fn reflect_vertical(self) -> Self {
        let mut out = 0u128;
        for r in 0..SIZE {
            out |= (REVERSED_ROWS[self.row(r) as usize] as u128) << (r * SIZE);
        }
        Canvas(out)
    }

    /// Transpose: `(r, c) ↦ (c, r)`.
    pub fn reflect_diag(self) -> Self {
        let mut out = 0u128;
        let mut bits = self.0;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let (r, c) = (i / SIZE, i % SIZE);
            out |= 1u128 << (c * SIZE + r);
        }
        Canvas(out)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Self) -> Self {
        Canvas(self.0 | other.0)
    }

    /// Left minus right.
    pub fn subtract(self, other: Self) -> Self {
        Canvas(self.0 & !other.0)
    }

    pub fn overlap(self, other: Self) -> Self {
        Canvas(self.0 & other.0)
    }

    pub fn apply_unary(self, op: UnaryOp) -> Self {
        match op {
            UnaryOp::Invert => self.invert(),
            UnaryOp::ReflectHorizontal => self.reflect_horizontal(),
            UnaryOp::ReflectVertical => self.reflect_vertical(),
            UnaryOp::ReflectDiag => self.reflect_diag(),
        }
    }

    pub fn apply_binary(self, op: BinaryOp, other: Self) -> Self {
        match op {
            BinaryOp::Add => self.add(other),
            BinaryOp::Subtract => self.subtract(other),
            BinaryOp::Overlap => self.overlap(other),
        }
    }

    /// Renders the 10-line text format (`#` true, `.` false), newline-terminated.
    pub fn to_text(self) -> String {
        let mut s = String::with_capacity(CELLS + SIZE);
        for r in 0..SIZE {
            for c in 0..SIZE {
                s.push(if self.get(r, c) { '#' } else { '.' });
            }
            s.push('\n');
        }
        s
    }

    /// Parses the 10-line text format. A missing newline after the last row
    /// is tolerated; anything else that is not exactly 10 rows of 10 `#`/`.`
    /// characters is rejected.
    pub fn from_text(text: &str) -> Result<Self, GridError> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let lines: Vec<&str> = body.split('\n').collect();
        if lines.len() != SIZE {
            return Err(GridError::Format {
                line: lines.len().min(SIZE + 1),
                message: format!("expected {SIZE} rows, found {}", lines.len()),
            });
        }
        let mut canvas = Canvas::EMPTY;
        for (r, line) in lines.iter().enumerate() {
            parse_row(line, r, &mut canvas).map_err(|message| GridError::Format {
                line: r + 1,
                message,
            })?;
        }
        Ok(canvas)
    }

    /// Lowercase hex of the packed encoding, 25 digits.
    pub fn to_hex(self) -> String {
        format!("{:025x}", self.0)
    }
}

/// Parses one text row into row `r` of `canvas`.
pub(crate) fn parse_row(line: &str, r: usize, canvas: &mut Canvas) -> Result<(), String> {
    let mut n = 0;
    for (c, ch) in line.chars().enumerate() {
        match ch {
            '#' if c < SIZE => canvas.set(r, c, true),
            '.' if c < SIZE => {}
            '#' | '.' => {}
            other => {
                return Err(format!(
                    "unexpected character {other:?} at column {}",
                    c + 1
                ))
            }
        }
        n += 1;
    }
    if n != SIZE {
        return Err(format!("expected {SIZE} columns, found {n}"));
    }
    Ok(())
}

const REVERSED_ROWS: [u16; 1 << SIZE] = {
    let mut table = [0u16; 1 << SIZE];
    let mut v = 0;
    while v < (1 << SIZE) {
        let mut out = 0u16;
        let mut b = 0;
        while b < SIZE {
            if (v >> b) & 1 == 1 {
                out |= 1 << (SIZE - 1 - b);
            }
            b += 1;
        }
        table[v] = out;
        v += 1;
    }
    table
};

impl fmt::Display for Canvas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for Canvas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Canvas({})", self.to_hex())
    }
}

impl FromStr for Canvas {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Canvas::from_text(s)
    }
}

/// The five built-in shapes, in their fixed library order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    LineHorizontal,
    LineVertical,
    Diagonal,
    Square,
    Triangle,
}

impl Shape {
    pub const ALL: [Shape; 5] = [
        Shape::LineHorizontal,
        Shape::LineVertical,
        Shape::Diagonal,
        Shape::Square,
        Shape::Triangle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shape::LineHorizontal => "line_horizontal",
            Shape::LineVertical => "line_vertical",
            Shape::Diagonal => "diagonal",
            Shape::Square => "square",
            Shape::Triangle => "triangle",
        }
    }

    /// Short spelling used in printed programs.
    pub fn alias(self) -> &'static str {
        match self {
            Shape::LineHorizontal => "line_h",
            Shape::LineVertical => "line_v",
            Shape::Diagonal => "diag",
            Shape::Square => "square",
            Shape::Triangle => "triangle",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Accepts either the long name or the alias.
    pub fn from_name(name: &str) -> Option<Shape> {
        Shape::ALL
            .into_iter()
            .find(|s| s.name() == name || s.alias() == name)
    }

    /// The canonical rendering.
    pub fn canvas(self) -> Canvas {
        match self {
            Shape::LineHorizontal => Canvas::from_fn(|r, _| r == 4),
            Shape::LineVertical => Canvas::from_fn(|_, c| c == 4),
            Shape::Diagonal => Canvas::from_fn(|r, c| r == c),
            Shape::Square => Canvas::from_fn(|r, c| r == 0 || r == 9 || c == 0 || c == 9),
            Shape::Triangle => Canvas::from_fn(|r, c| c <= r),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.alias())
    }
}

/// Canonical canvas for a primitive given by long name or alias.
pub fn primitive_canvas(name: &str) -> Result<Canvas, GridError> {
    Shape::from_name(name)
        .map(Shape::canvas)
        .ok_or_else(|| GridError::InvalidPrimitive(name.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Invert,
    ReflectHorizontal,
    ReflectVertical,
    ReflectDiag,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 4] = [
        UnaryOp::Invert,
        UnaryOp::ReflectHorizontal,
        UnaryOp::ReflectVertical,
        UnaryOp::ReflectDiag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Invert => "invert",
            UnaryOp::ReflectHorizontal => "reflect_horizontal",
            UnaryOp::ReflectVertical => "reflect_vertical",
            UnaryOp::ReflectDiag => "reflect_diag",
        }
    }

    pub fn alias(self) -> &'static str {
        match self {
            UnaryOp::Invert => "invert",
            UnaryOp::ReflectHorizontal => "refl_h",
            UnaryOp::ReflectVertical => "refl_v",
            UnaryOp::ReflectDiag => "refl_d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Subtract,
    Overlap,
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 3] = [BinaryOp::Add, BinaryOp::Subtract, BinaryOp::Overlap];

    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Subtract => "subtract",
            BinaryOp::Overlap => "overlap",
        }
    }
}

/// The closed operator set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    Unary(UnaryOp),
    Binary(BinaryOp),
}

impl Operator {
    /// All seven operators in declared order: unary first, then binary.
    pub const ALL: [Operator; 7] = [
        Operator::Unary(UnaryOp::Invert),
        Operator::Unary(UnaryOp::ReflectHorizontal),
        Operator::Unary(UnaryOp::ReflectVertical),
        Operator::Unary(UnaryOp::ReflectDiag),
        Operator::Binary(BinaryOp::Add),
        Operator::Binary(BinaryOp::Subtract),
        Operator::Binary(BinaryOp::Overlap),
    ];

    pub fn arity(self) -> usize {
        match self {
            Operator::Unary(_) => 1,
            Operator::Binary(_) => 2,
        }
    }

    /// Position in the declared order.
    pub fn rank(self) -> usize {
        match self {
            Operator::Unary(op) => op as usize,
            Operator::Binary(op) => UnaryOp::ALL.len() + op as usize,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Operator::Unary(op) => op.name(),
            Operator::Binary(op) => op.name(),
        }
    }

    pub fn alias(self) -> &'static str {
        match self {
            Operator::Unary(op) => op.alias(),
            Operator::Binary(op) => op.name(),
        }
    }

    /// Accepts long names and aliases.
    pub fn from_name(name: &str) -> Option<Operator> {
        Operator::ALL
            .into_iter()
            .find(|op| op.name() == name || op.alias() == name)
    }
}

/// The primitive renderings in force for a library. Defaults to the
/// canonical geometry; a replacement set can be loaded from a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimitiveGeometry {
    canvases: [Canvas; 5],
}

impl Default for PrimitiveGeometry {
    fn default() -> Self {
        PrimitiveGeometry {
            canvases: Shape::ALL.map(Shape::canvas),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("primitive `{0}` has an empty canvas")]
    EmptyPrimitive(&'static str),
    #[error("primitives `{0}` and `{1}` have identical canvases")]
    Duplicate(&'static str, &'static str),
    #[error("primitive `{0}` defined more than once")]
    Redefined(&'static str),
    #[error("primitive `{0}` missing from geometry")]
    Missing(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl PrimitiveGeometry {
    /// Validates that all five canvases are nonempty and pairwise distinct.
    pub fn new(canvases: [Canvas; 5]) -> Result<Self, GeometryError> {
        for (i, a) in canvases.iter().enumerate() {
            if a.is_empty() {
                return Err(GeometryError::EmptyPrimitive(Shape::ALL[i].name()));
            }
            for (j, b) in canvases.iter().enumerate().skip(i + 1) {
                if a == b {
                    return Err(GeometryError::Duplicate(
                        Shape::ALL[i].name(),
                        Shape::ALL[j].name(),
                    ));
                }
            }
        }
        Ok(PrimitiveGeometry { canvases })
    }

    /// Builds a geometry from `(name, canvas)` pairs naming each primitive
    /// exactly once (long names or aliases).
    pub fn from_named<'a, I>(entries: I) -> Result<Self, GeometryError>
    where
        I: IntoIterator<Item = (&'a str, Canvas)>,
    {
        let mut slots: [Option<Canvas>; 5] = [None; 5];
        for (name, canvas) in entries {
            let shape = Shape::from_name(name)
                .ok_or_else(|| GridError::InvalidPrimitive(name.to_string()))?;
            if slots[shape.index()].replace(canvas).is_some() {
                return Err(GeometryError::Redefined(shape.name()));
            }
        }
        let mut canvases = [Canvas::EMPTY; 5];
        for (i, slot) in slots.iter().enumerate() {
            canvases[i] = slot.ok_or(GeometryError::Missing(Shape::ALL[i].name()))?;
        }
        Self::new(canvases)
    }

    pub fn canvas(&self, shape: Shape) -> Canvas {
        self.canvases[shape.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_canvas() -> impl Strategy<Value = Canvas> {
        any::<u128>().prop_map(|b| Canvas(b & MASK))
    }

    #[test]
    fn empty_canvas_has_no_cells() {
        assert_eq!(Canvas::empty().popcount(), 0);
        assert_eq!(Canvas::empty().invert(), Canvas::FULL);
        assert_eq!(Canvas::FULL.popcount(), 100);
    }

    #[test]
    fn canonical_geometry() {
        let h = Shape::LineHorizontal.canvas();
        assert_eq!(h.popcount(), 10);
        assert!(h.cells().all(|(r, _)| r == 4));

        let v = Shape::LineVertical.canvas();
        assert!(v.cells().all(|(_, c)| c == 4));
        assert_eq!(h.reflect_diag(), v);

        let d = Shape::Diagonal.canvas();
        assert_eq!(
            d.cells().collect::<Vec<_>>(),
            (0..10).map(|i| (i, i)).collect::<Vec<_>>()
        );

        assert_eq!(Shape::Square.canvas().popcount(), 36);
        assert_eq!(Shape::Triangle.canvas().popcount(), 55);
    }

    #[test]
    fn primitives_distinct_and_nonempty() {
        assert!(PrimitiveGeometry::new(Shape::ALL.map(Shape::canvas)).is_ok());
    }

    #[test]
    fn primitive_lookup_by_name() {
        assert_eq!(primitive_canvas("diag").unwrap(), Shape::Diagonal.canvas());
        assert_eq!(
            primitive_canvas("line_vertical").unwrap(),
            Shape::LineVertical.canvas()
        );
        assert_eq!(
            primitive_canvas("circle"),
            Err(GridError::InvalidPrimitive("circle".into()))
        );
    }

    #[test]
    fn reflect_horizontal_moves_row_four_to_five() {
        let r = Shape::LineHorizontal.canvas().reflect_horizontal();
        assert_eq!(r, Canvas::from_fn(|r, _| r == 5));
        let thick = Shape::LineHorizontal.canvas().add(r);
        assert_eq!(thick.popcount(), 20);
        assert_eq!(thick, Canvas::from_fn(|r, _| r == 4 || r == 5));
    }

    #[test]
    fn square_is_transpose_symmetric() {
        let sq = Shape::Square.canvas();
        assert_eq!(sq.reflect_diag(), sq);
    }

    #[test]
    fn reflections_move_single_cells() {
        let c = Canvas::from_cells([(1, 3)]);
        assert_eq!(c.reflect_horizontal(), Canvas::from_cells([(8, 3)]));
        assert_eq!(c.reflect_vertical(), Canvas::from_cells([(1, 6)]));
        assert_eq!(c.reflect_diag(), Canvas::from_cells([(3, 1)]));
    }

    #[test]
    fn text_format() {
        let d = Shape::Diagonal.canvas();
        let text = d.to_text();
        assert_eq!(text.lines().next(), Some("#........."));
        assert_eq!(text.lines().count(), 10);
        assert_eq!(Canvas::from_text(&text).unwrap(), d);
        assert_eq!(Canvas::from_text(text.trim_end()).unwrap(), d);

        let bad_char = text.replacen('.', "x", 1);
        assert!(matches!(
            Canvas::from_text(&bad_char),
            Err(GridError::Format { line: 1, .. })
        ));
        let nine: String = text.lines().take(9).map(|l| format!("{l}\n")).collect();
        assert!(Canvas::from_text(&nine).is_err());
        let wide = text.replacen('\n', ".\n", 1);
        assert!(Canvas::from_text(&wide).is_err());
        assert!(Canvas::from_text(&format!("{text}\n")).is_err());
    }

    #[test]
    fn from_bits_rejects_overflow() {
        assert_eq!(Canvas::from_bits(1u128 << 100), Err(GridError::Overflow));
        assert_eq!(Canvas::from_bits(5).unwrap().bits(), 5);
    }

    #[test]
    fn geometry_from_named_requires_all_five() {
        let named = Shape::ALL.map(|s| (s.alias(), s.canvas()));
        assert_eq!(
            PrimitiveGeometry::from_named(named).unwrap(),
            PrimitiveGeometry::default()
        );
        assert!(matches!(
            PrimitiveGeometry::from_named(named.into_iter().take(4)),
            Err(GeometryError::Missing("triangle"))
        ));
        let mut dup = named;
        dup[1].1 = dup[0].1;
        assert!(matches!(
            PrimitiveGeometry::from_named(dup),
            Err(GeometryError::Duplicate("line_horizontal", "line_vertical"))
        ));
    }

    #[test]
    fn operator_table() {
        assert_eq!(Operator::ALL.iter().filter(|o| o.arity() == 1).count(), 4);
        assert_eq!(Operator::ALL.iter().filter(|o| o.arity() == 2).count(), 3);
        for (i, op) in Operator::ALL.iter().enumerate() {
            assert_eq!(op.rank(), i);
            assert_eq!(Operator::from_name(op.name()), Some(*op));
            assert_eq!(Operator::from_name(op.alias()), Some(*op));
        }
    }

    proptest! {
        #[test]
        fn involutions(a in arb_canvas()) {
            prop_assert_eq!(a.invert().invert(), a);
            prop_assert_eq!(a.reflect_horizontal().reflect_horizontal(), a);
            prop_assert_eq!(a.reflect_vertical().reflect_vertical(), a);
            prop_assert_eq!(a.reflect_diag().reflect_diag(), a);
        }

        #[test]
        fn half_turn(a in arb_canvas()) {
            let rotated = Canvas::from_fn(|r, c| a.get(9 - r, 9 - c));
            prop_assert_eq!(a.reflect_horizontal().reflect_vertical(), rotated);
            prop_assert_eq!(a.reflect_vertical().reflect_horizontal(), rotated);
        }

        #[test]
        fn boolean_identities(a in arb_canvas(), b in arb_canvas()) {
            prop_assert_eq!(a.subtract(a), Canvas::EMPTY);
            prop_assert_eq!(a.add(Canvas::EMPTY), a);
            prop_assert_eq!(a.subtract(b), a.overlap(b.invert()));
            prop_assert_eq!(a.overlap(b), a.invert().add(b.invert()).invert());
        }

        #[test]
        fn text_round_trip(a in arb_canvas()) {
            prop_assert_eq!(Canvas::from_text(&a.to_text()).unwrap(), a);
            prop_assert_eq!(Canvas::from_bits(a.bits()).unwrap(), a);
        }
    }
}
