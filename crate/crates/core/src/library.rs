//! The ordered primitive set a search (or a session) draws leaves from.

use std::collections::HashMap;

use thiserror::Error;

use crate::grid::{Canvas, PrimitiveGeometry, Shape};
use crate::lang::{self, Expr};

/// Where a library entry came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    BuiltIn(Shape),
    /// Saved from a program; the program is kept for audits and expansion.
    Program(Expr),
    /// Loaded as a bare canvas.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LibraryEntry {
    pub name: String,
    pub canvas: Canvas,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LibraryError {
    #[error("library already has an entry named `{0}`")]
    Duplicate(String),
    #[error("`{0}` is reserved and cannot name a helper")]
    Reserved(String),
    #[error("`{0}` is not a valid identifier")]
    InvalidName(String),
    #[error("no helper named `{0}`")]
    NotFound(String),
}

/// Built-in primitives first, then helpers in insertion order. Entry order
/// fixes enumeration order and the token order used for lexicographic ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Library {
    entries: Vec<LibraryEntry>,
    by_name: HashMap<String, usize>,
    geometry: PrimitiveGeometry,
    builtins: usize,
}

impl Default for Library {
    fn default() -> Self {
        Library::with_geometry(&PrimitiveGeometry::default())
    }
}

impl Library {
    pub fn with_geometry(geometry: &PrimitiveGeometry) -> Self {
        Library::reduced(geometry, &Shape::ALL)
    }

    /// A library whose built-in entries are only `shapes`, in the given
    /// order. Primitives left out still evaluate but are never enumerated.
    pub fn reduced(geometry: &PrimitiveGeometry, shapes: &[Shape]) -> Self {
        let entries: Vec<LibraryEntry> = shapes
            .iter()
            .map(|&shape| LibraryEntry {
                name: shape.alias().to_string(),
                canvas: geometry.canvas(shape),
                origin: Origin::BuiltIn(shape),
            })
            .collect();
        let by_name = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.name.clone(), i))
            .collect();
        Library {
            builtins: entries.len(),
            entries,
            by_name,
            geometry: *geometry,
        }
    }

    /// Number of entries including the built-ins.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LibraryEntry] {
        &self.entries
    }

    /// Entries after the built-ins.
    pub fn helpers(&self) -> &[LibraryEntry] {
        &self.entries[self.builtins..]
    }

    pub fn primitive(&self, shape: Shape) -> Canvas {
        self.geometry.canvas(shape)
    }

    pub fn geometry(&self) -> &PrimitiveGeometry {
        &self.geometry
    }

    /// Looks up a helper (or built-in, by alias) by name.
    pub fn get(&self, name: &str) -> Option<&LibraryEntry> {
        self.by_name.get(name).map(|&i| &self.entries[i])
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    /// Checks that `name` could be added as a new helper.
    pub fn check_name(&self, name: &str) -> Result<(), LibraryError> {
        if !lang::is_identifier(name) {
            return Err(LibraryError::InvalidName(name.to_string()));
        }
        if lang::is_reserved(name) {
            return Err(LibraryError::Reserved(name.to_string()));
        }
        if self.contains(name) {
            return Err(LibraryError::Duplicate(name.to_string()));
        }
        Ok(())
    }

    pub fn push(
        &mut self,
        name: impl Into<String>,
        canvas: Canvas,
        origin: Origin,
    ) -> Result<(), LibraryError> {
        let name = name.into();
        self.check_name(&name)?;
        self.by_name.insert(name.clone(), self.entries.len());
        self.entries.push(LibraryEntry {
            name,
            canvas,
            origin,
        });
        Ok(())
    }

    /// Removes a helper. Built-ins cannot be removed.
    pub fn remove(&mut self, name: &str) -> Result<LibraryEntry, LibraryError> {
        match self.by_name.get(name) {
            Some(&i) if i >= self.builtins => {
                let entry = self.entries.remove(i);
                self.by_name.remove(name);
                for idx in self.by_name.values_mut() {
                    if *idx > i {
                        *idx -= 1;
                    }
                }
                Ok(entry)
            }
            _ => Err(LibraryError::NotFound(name.to_string())),
        }
    }
}
