//! Protein structure ingestion: PDB text, van der Waals radii and AlphaFold DB downloads.

mod fetch;
mod pdb;
mod radii;

pub use fetch::{
    fetch_alphafold, is_uniprot_accession, model_file_name, model_url, FetchConfig, FetchError,
    ALPHAFOLD_FILES_URL, CACHE_DIR_ENV,
};
pub use pdb::{parse_pdb, parse_pdb_with, write_pdb, Atom, MolecularModel, ParseOptions, PdbError};
pub use radii::{normalize_symbol, vdw_radius, RadiusTable, RadiusTableError, DEFAULT_RADIUS};
