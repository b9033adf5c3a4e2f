//! Pattern corpus files and the named-canvas block format they share with
//! primitive-geometry and helper-library files.
//!
//! ```text
//! = P1
//! ..........
//! (10 canvas rows)
//!
//! = P2
//! ...
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::grid::{self, Canvas, GeometryError, PrimitiveGeometry, SIZE};
use crate::library::{Library, LibraryError, Origin};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { id: String, line: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Library(#[from] LibraryError),
}

/// One `= id` block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub id: String,
    pub canvas: Canvas,
    /// 1-based line of the `=` header.
    pub line: usize,
}

/// Parses concatenated named-canvas blocks. Ids must be unique.
pub fn parse_blocks(text: &str) -> Result<Vec<Block>, CorpusError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut blocks: Vec<Block> = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let line_no = i + 1;
        let line = lines[i];
        if line.trim().is_empty() {
            i += 1;
            continue;
        }
        let id = line
            .strip_prefix('=')
            .map(str::trim)
            .ok_or_else(|| CorpusError::Parse {
                line: line_no,
                message: format!("expected `= <id>` header, found {line:?}"),
            })?;
        if id.is_empty() || id.contains(char::is_whitespace) {
            return Err(CorpusError::Parse {
                line: line_no,
                message: format!("invalid id {id:?}"),
            });
        }
        if blocks.iter().any(|b| b.id == id) {
            return Err(CorpusError::DuplicateId {
                id: id.to_string(),
                line: line_no,
            });
        }
        let mut canvas = Canvas::EMPTY;
        for r in 0..SIZE {
            let row_line = i + 1 + r;
            let row = lines.get(row_line).filter(|l| !l.trim().is_empty());
            let row = row.ok_or_else(|| CorpusError::Parse {
                line: row_line + 1,
                message: format!("pattern `{id}` has {r} rows, expected {SIZE}"),
            })?;
            grid::parse_row(row, r, &mut canvas).map_err(|message| CorpusError::Parse {
                line: row_line + 1,
                message,
            })?;
        }
        i += 1 + SIZE;
        if let Some(extra) = lines.get(i) {
            if !extra.trim().is_empty() && !extra.starts_with('=') {
                return Err(CorpusError::Parse {
                    line: i + 1,
                    message: format!("pattern `{id}` has more than {SIZE} rows"),
                });
            }
        }
        blocks.push(Block {
            id: id.to_string(),
            canvas,
            line: line_no,
        });
    }
    if blocks.is_empty() {
        return Err(CorpusError::Parse {
            line: 1,
            message: "no patterns found".into(),
        });
    }
    Ok(blocks)
}

pub fn render_blocks<'a>(blocks: impl IntoIterator<Item = (&'a str, Canvas)>) -> String {
    let mut out = String::new();
    for (i, (id, canvas)) in blocks.into_iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str("= ");
        out.push_str(id);
        out.push('\n');
        out.push_str(&canvas.to_text());
    }
    out
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub id: String,
    pub canvas: Canvas,
}

/// Target patterns in presentation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternCorpus {
    pub patterns: Vec<Pattern>,
    pub source_path: Option<PathBuf>,
}

impl PatternCorpus {
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let patterns = parse_blocks(text)?
            .into_iter()
            .map(|b| Pattern {
                id: b.id,
                canvas: b.canvas,
            })
            .collect();
        Ok(PatternCorpus {
            patterns,
            source_path: None,
        })
    }

    pub fn from_patterns<I, S>(patterns: I) -> Self
    where
        I: IntoIterator<Item = (S, Canvas)>,
        S: Into<String>,
    {
        PatternCorpus {
            patterns: patterns
                .into_iter()
                .map(|(id, canvas)| Pattern {
                    id: id.into(),
                    canvas,
                })
                .collect(),
            source_path: None,
        }
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Pattern> {
        self.patterns.get(index)
    }

    pub fn canvases(&self) -> Vec<Canvas> {
        self.patterns.iter().map(|p| p.canvas).collect()
    }

    pub fn to_text(&self) -> String {
        render_blocks(self.patterns.iter().map(|p| (p.id.as_str(), p.canvas)))
    }

    /// SHA-256 over ids and canvas encodings, in order.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for p in &self.patterns {
            hasher.update(p.id.as_bytes());
            hasher.update([0u8]);
            hasher.update(p.canvas.bits().to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Reads and validates a corpus file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<PatternCorpus, CorpusError> {
    let path = path.as_ref();
    let mut corpus = PatternCorpus::parse(&read(path)?)?;
    corpus.source_path = Some(path.to_path_buf());
    Ok(corpus)
}

/// Primitive geometry: one block per primitive, named by long name or alias.
pub fn parse_geometry(text: &str) -> Result<PrimitiveGeometry, CorpusError> {
    let blocks = parse_blocks(text)?;
    Ok(PrimitiveGeometry::from_named(
        blocks.iter().map(|b| (b.id.as_str(), b.canvas)),
    )?)
}

pub fn load_geometry(path: impl AsRef<Path>) -> Result<PrimitiveGeometry, CorpusError> {
    parse_geometry(&read(path.as_ref())?)
}

/// Appends each block of `text` to `lib` as a constant helper.
pub fn extend_library(lib: &mut Library, text: &str) -> Result<(), CorpusError> {
    for b in parse_blocks(text)? {
        lib.push(b.id, b.canvas, Origin::Constant)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Shape;

    fn sample() -> String {
        render_blocks([
            ("P1", Shape::Triangle.canvas()),
            ("P2", Shape::Square.canvas()),
        ])
    }

    #[test]
    fn round_trip() {
        let c = PatternCorpus::parse(&sample()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.patterns[1].id, "P2");
        assert_eq!(c.patterns[1].canvas, Shape::Square.canvas());
        assert_eq!(c.to_text(), sample());
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(
            PatternCorpus::parse(""),
            Err(CorpusError::Parse { line: 1, .. })
        ));
        assert!(PatternCorpus::parse("\n\n").is_err());
    }

    #[test]
    fn nine_rows_is_a_dimension_error() {
        let text: String = sample()
            .lines()
            .take(10)
            .map(|l| format!("{l}\n"))
            .collect();
        let err = PatternCorpus::parse(&text).unwrap_err();
        assert!(matches!(err, CorpusError::Parse { line: 11, .. }), "{err}");

        let full = sample();
        let mut lines: Vec<&str> = full.lines().collect();
        lines.remove(5);
        let text = lines.join("\n");
        assert!(matches!(
            PatternCorpus::parse(&text),
            Err(CorpusError::Parse { .. })
        ));
    }

    #[test]
    fn eleven_rows_and_bad_cells_are_rejected() {
        let text = sample().replacen("= P2", "..........\n= P2", 1);
        assert!(matches!(
            PatternCorpus::parse(&text),
            Err(CorpusError::Parse { line: 13, .. })
        ));
        let text = sample().replacen('#', "o", 1);
        assert!(matches!(
            PatternCorpus::parse(&text),
            Err(CorpusError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn duplicate_ids() {
        let text = sample().replace("P2", "P1");
        assert!(matches!(
            PatternCorpus::parse(&text),
            Err(CorpusError::DuplicateId { line: 13, .. })
        ));
    }

    #[test]
    fn digest_tracks_canvases() {
        let a = PatternCorpus::parse(&sample()).unwrap();
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.patterns[0].canvas.set(0, 9, true);
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn geometry_file() {
        let text = render_blocks(Shape::ALL.map(|s| (s.name(), s.canvas())));
        assert_eq!(parse_geometry(&text).unwrap(), PrimitiveGeometry::default());
        let swapped = render_blocks(Shape::ALL.map(|s| {
            let c = if s == Shape::Triangle {
                s.canvas().reflect_vertical()
            } else {
                s.canvas()
            };
            (s.alias(), c)
        }));
        let g = parse_geometry(&swapped).unwrap();
        assert_eq!(
            g.canvas(Shape::Triangle),
            Shape::Triangle.canvas().reflect_vertical()
        );
        assert!(parse_geometry(&render_blocks([("line_h", Shape::Diagonal.canvas())])).is_err());
    }

    #[test]
    fn library_file() {
        let mut lib = Library::default();
        extend_library(&mut lib, &render_blocks([("cross", Canvas::FULL)])).unwrap();
        assert_eq!(lib.get("cross").unwrap().canvas, Canvas::FULL);
        assert!(extend_library(&mut lib, &render_blocks([("add", Canvas::FULL)])).is_err());
    }
}
