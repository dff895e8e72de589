//! Fixed-column PDB reader and a canonical writer for the retained fields.

use std::fmt::Write as _;

use crate::geometry::{Aabb, Vec3};

use super::radii::normalize_symbol;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub serial: i64,
    pub name: String,
    pub element: String,
    /// Å
    pub position: Vec3,
    pub occupancy: f64,
    pub alt_loc: Option<char>,
    pub residue_name: String,
    pub chain_id: char,
    pub residue_seq: i32,
    /// Came from a HETATM record.
    pub hetero: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MolecularModel {
    atoms: Vec<Atom>,
    source_id: String,
    bbox: Aabb,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PdbError {
    #[error("no ATOM/HETATM records found")]
    NoAtoms,
    #[error("line {line}: malformed {field} field")]
    MalformedRecord { line: usize, field: &'static str },
}

impl MolecularModel {
    pub fn new(atoms: Vec<Atom>, source_id: impl Into<String>) -> Result<Self, PdbError> {
        let bbox = Aabb::from_points(atoms.iter().map(|a| a.position)).ok_or(PdbError::NoAtoms)?;
        Ok(MolecularModel {
            atoms,
            source_id: source_id.into(),
            bbox,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Box around atom centers (not inflated by radii).
    pub fn bbox(&self) -> Aabb {
        self.bbox
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Record filtering applied while parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub include_hetatm: bool,
    pub include_waters: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            include_hetatm: true,
            include_waters: false,
        }
    }
}

const WATER_NAMES: [&str; 4] = ["HOH", "WAT", "H2O", "DOD"];

/// Parses with [`ParseOptions::default`] and an empty source id.
pub fn parse_pdb(text: &str) -> Result<MolecularModel, PdbError> {
    parse_pdb_with(text, "", &ParseOptions::default())
}

pub fn parse_pdb_with(
    text: &str,
    source_id: &str,
    opts: &ParseOptions,
) -> Result<MolecularModel, PdbError> {
    let mut atoms = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.starts_with("ENDMDL") {
            break;
        }
        let hetero = line.starts_with("HETATM");
        if !(hetero || line.starts_with("ATOM  ")) {
            continue;
        }
        if hetero && !opts.include_hetatm {
            continue;
        }
        let alt_loc = column(line, 17, 17)
            .and_then(|s| s.chars().next())
            .filter(|c| *c != ' ');
        if matches!(alt_loc, Some(c) if c != 'A') {
            continue;
        }
        let residue_name = column(line, 18, 20).unwrap_or("").trim().to_string();
        if !opts.include_waters && WATER_NAMES.contains(&residue_name.as_str()) {
            continue;
        }

        let coord = |a, b, field| -> Result<f64, PdbError> {
            column(line, a, b)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or(PdbError::MalformedRecord {
                    line: line_no,
                    field,
                })
        };
        let position = Vec3::new(
            coord(31, 38, "x")?,
            coord(39, 46, "y")?,
            coord(47, 54, "z")?,
        );

        let name = column(line, 13, 16).unwrap_or("").trim().to_string();
        let element = column(line, 77, 78)
            .map(str::trim)
            .filter(|s| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphabetic()))
            .map(normalize_symbol)
            .or_else(|| {
                name.chars()
                    .find(|c| c.is_ascii_alphabetic())
                    .map(|c| c.to_string())
            })
            .ok_or(PdbError::MalformedRecord {
                line: line_no,
                field: "element",
            })?;

        let serial = column(line, 7, 11)
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(atoms.len() as i64 + 1);
        let occupancy = column(line, 55, 60)
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .map_or(1.0, |v| v.clamp(0.0, 1.0));
        let chain_id = column(line, 22, 22)
            .and_then(|s| s.chars().next())
            .unwrap_or(' ');
        let residue_seq = column(line, 23, 26)
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(0);

        atoms.push(Atom {
            serial,
            name,
            element,
            position,
            occupancy,
            alt_loc,
            residue_name,
            chain_id,
            residue_seq,
            hetero,
        });
    }
    MolecularModel::new(atoms, source_id)
}

/// 1-based inclusive column range; `None` when the line is too short.
fn column(line: &str, first: usize, last: usize) -> Option<&str> {
    let end = last.min(line.len());
    if first > end {
        return None;
    }
    line.get(first - 1..end)
}

/// Writes the retained fields as PDB 3.3 ATOM/HETATM records followed by `END`.
pub fn write_pdb(model: &MolecularModel) -> String {
    let mut out = String::with_capacity(model.len() * 81);
    for a in model.atoms() {
        let record = if a.hetero { "HETATM" } else { "ATOM  " };
        let name = if a.name.len() < 4 && a.element.len() == 1 {
            format!(" {:<3}", a.name)
        } else {
            format!("{:<4}", a.name)
        };
        writeln!(
            out,
            "{record}{:>5} {name}{}{:>3} {}{:>4}    {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}          {:>2}",
            a.serial % 100_000,
            a.alt_loc.unwrap_or(' '),
            a.residue_name,
            a.chain_id,
            a.residue_seq,
            a.position.x,
            a.position.y,
            a.position.z,
            a.occupancy,
            0.0,
            a.element.to_uppercase(),
        )
        .unwrap();
    }
    out.push_str("END\n");
    out
}
