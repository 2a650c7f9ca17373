//! Isomorph-free generation of UOM classes by canonical augmentation.
//!
//! Matrices grow one row at a time. A child `P + r` is kept only when `r`
//! lies in the automorphism orbit of the row that the canonical labelling
//! of the child places last, so every class has exactly one parent class;
//! equivalent children of one parent are merged. Every pruning rule below is
//! a necessary condition for being a submatrix of an `m x n` UOM, so no
//! class is lost.

use std::collections::{BTreeMap, HashSet};

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use super::canon::canonical_form;
use crate::bits::RowSet;
use crate::budget::Budget;
use crate::engine::{is_uom, max_mutually_orthogonal};
use crate::formal::{stats, FormalMatrix, Var, VarRef};

/// Outcome of an exhaustive class search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassCensus {
    pub m: usize,
    pub n: usize,
    /// Canonical representatives, sorted by canonical code.
    #[serde(serialize_with = "serialize_rows")]
    pub classes: Vec<FormalMatrix>,
    /// `false` when the budget ran out; `classes` is then a lower bound.
    pub complete: bool,
    pub nodes: u64,
}

fn serialize_rows<S: serde::Serializer>(v: &[FormalMatrix], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(FormalMatrix::to_text))
}

impl ClassCensus {
    pub fn count(&self) -> usize {
        self.classes.len()
    }
}

/// Depth below which children are explored in parallel.
const PARALLEL_DEPTH: usize = 4;

struct Generator<'b> {
    m: usize,
    n: usize,
    budget: &'b Budget,
}

impl Generator<'_> {
    fn trivially_empty(&self) -> bool {
        self.m <= self.n || (self.n < 64 && self.m > 1usize << self.n)
    }

    fn root(&self) -> FormalMatrix {
        FormalMatrix::new(1, self.n, vec![Var::new(0, false); self.n]).expect("n >= 1")
    }

    /// Every row orthogonal to `p` whose entries are existing variables of
    /// either sign or one fresh variable per column.
    fn candidate_rows(&self, p: &FormalMatrix) -> Vec<Vec<Var>> {
        let n = p.ncols();
        let cands: Vec<Vec<(Var, RowSet)>> = (0..n)
            .map(|j| {
                let ids = p.column_ids(j);
                let fresh = ids.iter().max().map_or(0, |&k| k + 1);
                let mut c: Vec<(Var, RowSet)> = ids
                    .iter()
                    .flat_map(|&id| [Var::new(id, false), Var::new(id, true)])
                    .map(|v| (v, (0..p.nrows()).filter(|&i| p.get(i, j) == v.perp()).collect()))
                    .collect();
                c.push((Var::new(fresh, false), RowSet::empty()));
                c
            })
            .collect();
        let mut out = Vec::new();
        let mut row = Vec::with_capacity(n);
        self.rows_rec(&cands, 0, RowSet::full(p.nrows()), &mut row, &mut out);
        out
    }

    fn rows_rec(
        &self,
        cands: &[Vec<(Var, RowSet)>],
        j: usize,
        uncovered: RowSet,
        row: &mut Vec<Var>,
        out: &mut Vec<Vec<Var>>,
    ) {
        if j == cands.len() {
            if uncovered.is_empty() {
                out.push(row.clone());
            }
            return;
        }
        // Best coverage still available from columns j.. onward.
        let reach: usize = cands[j..]
            .iter()
            .map(|c| c.iter().map(|(_, o)| o.intersection(&uncovered).len()).max().unwrap_or(0))
            .sum();
        if reach < uncovered.len() {
            return;
        }
        for (v, hit) in &cands[j] {
            row.push(*v);
            self.rows_rec(cands, j + 1, uncovered.difference(hit), row, out);
            row.pop();
        }
    }

    /// Necessary conditions for `p` to sit inside an `m x n` UOM.
    fn admissible(&self, p: &FormalMatrix) -> bool {
        let (m, n, k) = (self.m, self.n, p.nrows());
        if k > m {
            return false;
        }
        let st = stats(p);
        if st.mu_max + n > m {
            return false;
        }
        // Each remaining row supplies at most one missing perpendicular per column.
        for j in 0..n {
            let unpaired = p
                .column_ids(j)
                .into_iter()
                .filter(|&id| {
                    let pos = st.mu.get(&VarRef { column: j, id, primed: false });
                    let neg = st.mu.get(&VarRef { column: j, id, primed: true });
                    pos.is_none() || neg.is_none()
                })
                .count();
            if unpaired > m - k {
                return false;
            }
        }
        // Two variables in distinct columns cover at most m - n + 1 rows.
        let occ: Vec<Vec<RowSet>> = (0..n)
            .map(|j| {
                p.column_vars(j)
                    .into_iter()
                    .map(|v| (0..k).filter(|&i| p.get(i, j) == v).collect())
                    .collect()
            })
            .collect();
        for (j1, j2) in (0..n).tuple_combinations() {
            for a in &occ[j1] {
                for b in &occ[j2] {
                    if a.union(b).len() + n > m + 1 {
                        return false;
                    }
                }
            }
        }
        // Orthogonal submatrices on c columns have at most m - n + c rows,
        // strictly fewer once 2c >= n.
        for c in 2..=3.min(n - 1) {
            let bound = m + c - n;
            for cols in (0..n).combinations(c) {
                let mut proj: Vec<Vec<Var>> =
                    p.rows().map(|r| cols.iter().map(|&j| r[j]).collect()).collect();
                proj.sort_unstable();
                proj.dedup();
                if proj.len() < bound {
                    continue;
                }
                let d = max_mutually_orthogonal(&proj);
                if d > bound || (2 * c >= n && d == bound) {
                    return false;
                }
            }
        }
        true
    }

    /// Accepted children of `p`, one per class.
    fn children(&self, p: &FormalMatrix) -> Vec<FormalMatrix> {
        let k = p.nrows();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for r in self.candidate_rows(p) {
            if !self.budget.tick() {
                break;
            }
            let child = p.with_row(&r).expect("row width");
            if !self.admissible(&child) {
                continue;
            }
            let cf = canonical_form(&child);
            let last = cf.row_order[k];
            if cf.row_orbits[k] != cf.row_orbits[last] {
                continue;
            }
            if seen.insert(cf.code.clone()) {
                out.push(child);
            }
        }
        out
    }

    fn collect(&self, p: FormalMatrix, depth: usize) -> Vec<(Vec<u32>, FormalMatrix)> {
        if self.budget.exhausted() {
            return Vec::new();
        }
        if p.nrows() == self.m {
            if is_uom(&p) {
                let cf = canonical_form(&p);
                let canon = cf.matrix();
                return vec![(cf.code, canon)];
            }
            return Vec::new();
        }
        let kids = self.children(&p);
        if depth < PARALLEL_DEPTH {
            kids.into_par_iter().flat_map(|c| self.collect(c, depth + 1)).collect()
        } else {
            kids.into_iter().flat_map(|c| self.collect(c, depth + 1)).collect()
        }
    }

    fn first(&self, p: FormalMatrix) -> Option<FormalMatrix> {
        if self.budget.exhausted() {
            return None;
        }
        if p.nrows() == self.m {
            return is_uom(&p).then_some(p);
        }
        self.children(&p).into_iter().find_map(|c| self.first(c))
    }
}

/// Representatives of every UOM class in `O(m, n)`.
pub fn enumerate_uom_classes(m: usize, n: usize, budget: &Budget) -> ClassCensus {
    let g = Generator { m, n, budget };
    if n == 0 || g.trivially_empty() {
        return ClassCensus { m, n, classes: Vec::new(), complete: true, nodes: 0 };
    }
    let found = g.collect(g.root(), 0);
    let mut by_code: BTreeMap<Vec<u32>, FormalMatrix> = BTreeMap::new();
    for (code, x) in found {
        let dup = by_code.insert(code, x);
        debug_assert!(dup.is_none(), "canonical augmentation produced a class twice");
    }
    ClassCensus {
        m,
        n,
        classes: by_code.into_values().collect(),
        complete: !budget.exhausted(),
        nodes: budget.nodes(),
    }
}

/// Some UOM in `O(m, n)`, searched depth first. `Ok(None)` means the search
/// finished and none exists.
pub fn find_uom(m: usize, n: usize, budget: &Budget) -> Result<Option<FormalMatrix>, super::EquivalenceError> {
    let g = Generator { m, n, budget };
    if n == 0 || g.trivially_empty() {
        return Ok(None);
    }
    match g.first(g.root()) {
        Some(x) => Ok(Some(x)),
        None if budget.exhausted() => Err(super::EquivalenceError::BudgetExceeded),
        None => Ok(None),
    }
}
