//! Formal orthogonal matrices for multiqubit unextendible product bases.
//!
//! A formal matrix has vector variables as entries; each variable `x` has a
//! perpendicular `x'`. Two rows are orthogonal when some column holds a
//! perpendicular pair, and an orthogonal matrix that admits no further
//! orthogonal row is a UOM. Generic evaluations of UOMs are UPBs.

pub mod bits;
pub mod budget;
pub mod catalog;
pub mod clique;
pub mod constructions;
pub mod engine;
pub mod equivalence;
pub mod formal;
pub mod numeric;

pub use formal::{
    is_orthogonal_matrix, parse_matrix, rows_orthogonal, stats, FormalMatrix, MatrixStats,
    OrthogonalityError, ParseError, Var, VarRef,
};
pub use engine::{
    decomposition_probe, enumerate_orthogonal_rows, find_extension_row, is_uom,
    max_mutually_orthogonal, uom_diagnostics, DiagnosticsReport, EngineError, OrthogonalRowSet,
};
pub use equivalence::{
    are_equivalent, canonical_form, enumerate_uom_classes, find_uom, symbol, CanonicalForm,
    ClassCensus, EquivalenceError, SymbolOmega, Witness,
};
