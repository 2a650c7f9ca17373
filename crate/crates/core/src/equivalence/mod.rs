//! Matrix equivalence: symbols, canonical forms, witnesses and exhaustive
//! class enumeration.
//!
//! Two matrices are equivalent when one becomes the other by permuting rows,
//! permuting columns and renaming variables compatibly with `x -> x'`.

mod canon;
mod generate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::formal::{FormalMatrix, Var};

pub use canon::{canonical_form, CanonicalForm};
pub use generate::{enumerate_uom_classes, find_uom, ClassCensus};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquivalenceError {
    #[error("symbol leaves row {row} undefined in column {column}")]
    IncompleteSymbol { row: usize, column: usize },
    #[error("symbol column {column} reuses row {row}")]
    OverlappingSymbol { row: usize, column: usize },
    #[error("search budget exhausted")]
    BudgetExceeded,
}

/// One variable class of a column: the rows holding `x` and the rows
/// holding `x'`, stored as an unordered pair (smaller set first).
pub type ClassPair = (BTreeSet<usize>, BTreeSet<usize>);

/// Where every variable and its perpendicular occur, per column. Columns
/// form a multiset and classes within a column a set, so the symbol forgets
/// column order and variable names but keeps row numbering.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SymbolOmega {
    pub m: usize,
    /// Sorted columns, each a sorted list of class pairs.
    pub columns: Vec<Vec<ClassPair>>,
}

impl SymbolOmega {
    pub fn new(m: usize, columns: Vec<Vec<ClassPair>>) -> Self {
        let mut columns: Vec<Vec<ClassPair>> = columns
            .into_iter()
            .map(|col| {
                let mut col: Vec<ClassPair> =
                    col.into_iter().map(|(a, b)| if a <= b { (a, b) } else { (b, a) }).collect();
                col.sort();
                col
            })
            .collect();
        columns.sort();
        SymbolOmega { m, columns }
    }

    /// Apply a row permutation: row `i` becomes `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let map = |s: &BTreeSet<usize>| s.iter().map(|&i| perm[i]).collect::<BTreeSet<usize>>();
        SymbolOmega::new(
            self.m,
            self.columns.iter().map(|c| c.iter().map(|(a, b)| (map(a), map(b))).collect()).collect(),
        )
    }

    /// A matrix with this symbol, one fresh variable class per pair.
    pub fn reconstruct(&self) -> Result<FormalMatrix, EquivalenceError> {
        let n = self.columns.len();
        let mut cells: Vec<Option<Var>> = vec![None; self.m * n];
        for (j, col) in self.columns.iter().enumerate() {
            for (s, (a, b)) in col.iter().enumerate() {
                for (set, primed) in [(a, false), (b, true)] {
                    for &i in set {
                        let cell = &mut cells[i * n + j];
                        if cell.is_some() {
                            return Err(EquivalenceError::OverlappingSymbol { row: i, column: j });
                        }
                        *cell = Some(Var::new(s as u32, primed));
                    }
                }
            }
        }
        let entries = cells
            .iter()
            .enumerate()
            .map(|(k, c)| c.ok_or(EquivalenceError::IncompleteSymbol { row: k / n, column: k % n }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FormalMatrix::new(self.m, n, entries).expect("symbol shape"))
    }
}

impl fmt::Display for SymbolOmega {
    /// Rows are printed 1-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |s: &BTreeSet<usize>| {
            format!("{{{}}}", s.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","))
        };
        let cols: Vec<String> = self
            .columns
            .iter()
            .map(|c| {
                let pairs: Vec<String> =
                    c.iter().map(|(a, b)| format!("{{{}, {}}}", set(a), set(b))).collect();
                format!("{{{}}}", pairs.join(", "))
            })
            .collect();
        write!(f, "{{{}}}", cols.join(", "))
    }
}

pub fn symbol(x: &FormalMatrix) -> SymbolOmega {
    let columns = (0..x.ncols())
        .map(|j| {
            let mut classes: BTreeMap<u32, ClassPair> = BTreeMap::new();
            for (i, v) in x.column(j).enumerate() {
                let e = classes.entry(v.id()).or_default();
                if v.is_primed() { &mut e.1 } else { &mut e.0 }.insert(i);
            }
            classes.into_values().collect()
        })
        .collect();
    SymbolOmega::new(x.nrows(), columns)
}

/// An explicit equivalence `X -> Y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Row `i` of `X` lands on row `row_map[i]` of `Y`.
    pub row_map: Vec<usize>,
    /// Column `j` of `X` lands on column `col_map[j]` of `Y`.
    pub col_map: Vec<usize>,
    /// Per column of `X`: `(id in X, id in Y, flip)`; `x` maps to `y'`
    /// when `flip` is set.
    pub renaming: Vec<Vec<(u32, u32, bool)>>,
}

impl Witness {
    pub fn apply(&self, x: &FormalMatrix) -> FormalMatrix {
        let (m, n) = (x.nrows(), x.ncols());
        let mut entries = vec![Var::new(0, false); m * n];
        for i in 0..m {
            for j in 0..n {
                let v = x.get(i, j);
                let &(_, id, flip) = self.renaming[j]
                    .iter()
                    .find(|(from, _, _)| *from == v.id())
                    .expect("witness renames every occurring id");
                entries[self.row_map[i] * n + self.col_map[j]] = Var::new(id, v.is_primed() ^ flip);
            }
        }
        FormalMatrix::new(m, n, entries).expect("same shape")
    }

    /// The witness for `Y -> X`.
    pub fn inverse(&self) -> Witness {
        let invert = |p: &[usize]| {
            let mut q = vec![0; p.len()];
            for (a, &b) in p.iter().enumerate() {
                q[b] = a;
            }
            q
        };
        let col_map = invert(&self.col_map);
        let renaming = col_map
            .iter()
            .map(|&j| {
                let mut r: Vec<(u32, u32, bool)> =
                    self.renaming[j].iter().map(|&(a, b, f)| (b, a, f)).collect();
                r.sort_unstable();
                r
            })
            .collect();
        Witness { row_map: invert(&self.row_map), col_map, renaming }
    }
}

/// An equivalence `X -> Y` if one exists. The returned witness is checked
/// by applying it.
pub fn are_equivalent(x: &FormalMatrix, y: &FormalMatrix) -> Option<Witness> {
    if x.nrows() != y.nrows() || x.ncols() != y.ncols() {
        return None;
    }
    let cx = canonical_form(x);
    let cy = canonical_form(y);
    if cx.code != cy.code {
        return None;
    }
    let pos_x = cx.row_positions();
    let row_map = (0..x.nrows()).map(|i| cy.row_order[pos_x[i]]).collect();
    let mut col_pos = vec![0; x.ncols()];
    for (q, &j) in cx.col_order.iter().enumerate() {
        col_pos[j] = q;
    }
    let col_map: Vec<usize> = (0..x.ncols()).map(|j| cy.col_order[col_pos[j]]).collect();
    let renaming = (0..x.ncols())
        .map(|j| {
            let target = &cy.renaming[col_map[j]];
            cx.renaming[j]
                .iter()
                .map(|&(id, rank, flip)| {
                    let &(id2, _, flip2) =
                        target.iter().find(|t| t.1 == rank).expect("ranks agree for equal codes");
                    (id, id2, flip != flip2)
                })
                .collect()
        })
        .collect();
    let w = Witness { row_map, col_map, renaming };
    (w.apply(x) == *y).then_some(w)
}
