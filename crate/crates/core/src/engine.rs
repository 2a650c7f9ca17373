//! Extendibility: 1-extensions, orthogonal-row enumeration, UOM checks and
//! the necessary-condition battery for UOMs.
//!
//! A row `y` is orthogonal to `X` iff every row of `X` has a column `j` with
//! `x_ij = y_j'`. Writing `z_j = y_j'`, this is a hitting-set problem: pick at
//! most one variable per column, among those occurring there, so that every
//! row contains a picked variable. Rows are bitsets, so covering is a handful
//! of word operations.

use std::collections::HashSet;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::bits::{RowSet, MAX_ROWS};
use crate::clique::Graph;
use crate::formal::{rows_orthogonal_unchecked, stats, FormalMatrix, OrthogonalityError, Var, VarRef};

/// Column count above which the bitmask search refuses to run.
pub const MAX_COLUMNS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("matrix is not orthogonal: {0}")]
    NotOrthogonal(#[from] OrthogonalityError),
    #[error("matrix of size {m}x{n} exceeds the search limits ({MAX_ROWS} rows, {MAX_COLUMNS} columns)")]
    TooLarge { m: usize, n: usize },
}

/// Occurrence sets of the variables of one column.
#[derive(Clone, Debug)]
struct ColumnIndex {
    vars: Vec<Var>,
    occ: Vec<RowSet>,
}

impl ColumnIndex {
    fn occ_of(&self, v: Var) -> RowSet {
        self.vars.iter().position(|&w| w == v).map(|k| self.occ[k]).unwrap_or_default()
    }
}

/// Bitset view of a matrix used by the hitting-set searches.
#[derive(Clone, Debug)]
pub(crate) struct CoverIndex<'a> {
    x: &'a FormalMatrix,
    cols: Vec<ColumnIndex>,
}

impl<'a> CoverIndex<'a> {
    pub(crate) fn new(x: &'a FormalMatrix) -> Result<Self, EngineError> {
        if x.nrows() > MAX_ROWS || x.ncols() > MAX_COLUMNS {
            return Err(EngineError::TooLarge { m: x.nrows(), n: x.ncols() });
        }
        let cols = (0..x.ncols())
            .map(|j| {
                let vars = x.column_vars(j);
                let occ = vars
                    .iter()
                    .map(|&v| (0..x.nrows()).filter(|&i| x.get(i, j) == v).collect())
                    .collect();
                ColumnIndex { vars, occ }
            })
            .collect();
        Ok(CoverIndex { x, cols })
    }

    fn occ(&self, i: usize, j: usize) -> RowSet {
        self.cols[j].occ_of(self.x.get(i, j))
    }

    /// Upper bound on how many of `uncovered` the free columns can still hit.
    fn reach(&self, uncovered: &RowSet, free: u64) -> usize {
        iter_bits(free)
            .map(|j| self.cols[j].occ.iter().map(|o| o.intersection(uncovered).len()).max().unwrap_or(0))
            .sum()
    }

    /// A hitting set using only the columns in `free`, as one optional pick
    /// per column.
    pub(crate) fn find_cover(&self, free: u64) -> Option<Vec<Option<Var>>> {
        let mut picks = vec![None; self.x.ncols()];
        let mut failed = HashSet::new();
        let all = RowSet::full(self.x.nrows());
        self.cover_rec(all, free, &mut picks, &mut failed).then_some(picks)
    }

    fn cover_rec(
        &self,
        uncovered: RowSet,
        free: u64,
        picks: &mut [Option<Var>],
        failed: &mut HashSet<(RowSet, u64)>,
    ) -> bool {
        let Some(r) = uncovered.first() else { return true };
        if failed.contains(&(uncovered, free)) || self.reach(&uncovered, free) < uncovered.len() {
            return false;
        }
        let mut options: Vec<(usize, RowSet)> =
            iter_bits(free).map(|j| (j, self.occ(r, j).intersection(&uncovered))).collect();
        options.sort_by_key(|(j, o)| (std::cmp::Reverse(o.len()), *j));
        for (j, hit) in options {
            picks[j] = Some(self.x.get(r, j));
            if self.cover_rec(uncovered.difference(&hit), free & !(1 << j), picks, failed) {
                return true;
            }
            picks[j] = None;
        }
        failed.insert((uncovered, free));
        false
    }

    /// Every full pick (one occurring variable per column) that hits all rows.
    fn all_full_covers(&self) -> Vec<Vec<Var>> {
        let n = self.x.ncols();
        let mut out = Vec::new();
        let mut picks = vec![None; n];
        let mut forbidden: Vec<Vec<Var>> = vec![Vec::new(); n];
        let all = RowSet::full(self.x.nrows());
        self.enum_rec(all, &mut picks, &mut forbidden, &mut out);
        out
    }

    fn enum_rec(
        &self,
        uncovered: RowSet,
        picks: &mut [Option<Var>],
        forbidden: &mut [Vec<Var>],
        out: &mut Vec<Vec<Var>>,
    ) {
        let n = self.x.ncols();
        let allowed = |j: usize, forbidden: &[Vec<Var>]| -> Vec<Var> {
            self.cols[j].vars.iter().copied().filter(|v| !forbidden[j].contains(v)).collect()
        };
        if uncovered.is_empty() {
            let choices: Vec<Vec<Var>> = (0..n)
                .map(|j| match picks[j] {
                    Some(v) => vec![v],
                    None => allowed(j, forbidden),
                })
                .collect();
            out.extend(choices.into_iter().multi_cartesian_product());
            return;
        }
        let reach: usize = (0..n)
            .filter(|&j| picks[j].is_none())
            .map(|j| {
                self.cols[j]
                    .vars
                    .iter()
                    .zip(&self.cols[j].occ)
                    .filter(|(v, _)| !forbidden[j].contains(v))
                    .map(|(_, o)| o.intersection(&uncovered).len())
                    .max()
                    .unwrap_or(0)
            })
            .sum();
        if reach < uncovered.len() {
            return;
        }
        let options_for = |i: usize, forbidden: &[Vec<Var>]| -> Vec<usize> {
            (0..n)
                .filter(|&j| picks[j].is_none() && !forbidden[j].contains(&self.x.get(i, j)))
                .collect()
        };
        let Some(r) = uncovered.iter().min_by_key(|&i| options_for(i, forbidden).len()) else {
            return;
        };
        let options = options_for(r, forbidden);
        for &j in &options {
            let v = self.x.get(r, j);
            picks[j] = Some(v);
            self.enum_rec(uncovered.difference(&self.occ(r, j)), picks, forbidden, out);
            picks[j] = None;
            forbidden[j].push(v);
        }
        for &j in &options {
            forbidden[j].pop();
        }
    }
}

fn iter_bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |j| mask & (1u64 << j) != 0)
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A row orthogonal to every row of `x`, built from perpendiculars of
/// occurring variables, or `None` when `x` is unextendible.
pub fn find_extension_row(x: &FormalMatrix) -> Result<Option<Vec<Var>>, EngineError> {
    x.ensure_orthogonal()?;
    let index = CoverIndex::new(x)?;
    Ok(index.find_cover(full_mask(x.ncols())).map(|picks| {
        // Unpicked columns may take any occurring variable; choose the first.
        picks
            .iter()
            .enumerate()
            .map(|(j, p)| p.unwrap_or_else(|| x.get(0, j)).perp())
            .collect()
    }))
}

/// Whether `x` is an unextendible orthogonal matrix.
pub fn is_uom(x: &FormalMatrix) -> bool {
    if x.ensure_orthogonal().is_err() {
        return false;
    }
    let verdict = matches!(find_extension_row(x), Ok(None));
    if x.nrows() == x.ncols() + 1 && x.ncols() % 2 == 1 {
        debug_assert_eq!(verdict, stats(x).mu_max == 1, "m = n + 1, n odd: UOM iff mu = 1");
    }
    verdict
}

/// All rows orthogonal to a matrix, over the perpendiculars of occurring
/// variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrthogonalRowSet {
    /// Rows sorted lexicographically by entry code.
    pub rows: Vec<Vec<Var>>,
    /// Columns that some cover leaves unused: those positions also admit
    /// fresh variables, so the orthogonal rows form infinite families.
    pub wildcard_columns: Vec<usize>,
}

impl OrthogonalRowSet {
    pub fn is_finite(&self) -> bool {
        self.wildcard_columns.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

pub fn enumerate_orthogonal_rows(y: &FormalMatrix) -> Result<OrthogonalRowSet, EngineError> {
    y.ensure_orthogonal()?;
    let index = CoverIndex::new(y)?;
    let mut rows: Vec<Vec<Var>> = index
        .all_full_covers()
        .into_iter()
        .map(|picks| picks.into_iter().map(Var::perp).collect())
        .collect();
    rows.sort_unstable();
    rows.dedup();
    let full = full_mask(y.ncols());
    let wildcard_columns =
        (0..y.ncols()).filter(|&j| index.find_cover(full & !(1u64 << j)).is_some()).collect();
    Ok(OrthogonalRowSet { rows, wildcard_columns })
}

/// Largest set of pairwise orthogonal rows.
pub fn max_mutually_orthogonal<R: AsRef<[Var]>>(rows: &[R]) -> usize {
    orthogonality_graph(rows).clique_number()
}

pub(crate) fn orthogonality_graph<R: AsRef<[Var]>>(rows: &[R]) -> Graph {
    Graph::from_fn(rows.len(), |a, b| {
        rows_orthogonal_unchecked(rows[a].as_ref(), rows[b].as_ref())
    })
}

/// Default largest column-subset size for the submatrix bound.
pub const DEFAULT_K_MAX: usize = 3;

/// One violation of the submatrix bound on a column subset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubmatrixViolation {
    pub columns: Vec<usize>,
    /// Largest orthogonal submatrix supported on `columns`.
    pub rows: usize,
    pub bound: usize,
    pub strict: bool,
}

/// Necessary conditions every UOM satisfies. Each field is recomputed from
/// the matrix alone; a failed check refutes a UOM claim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagnosticsReport {
    pub m: usize,
    pub n: usize,
    /// (i) every perpendicular `x'_ij` occurs in column `j`.
    pub perps_occur: bool,
    pub missing_perps: Vec<(usize, usize)>,
    /// (ii), s = 1: `mu(X) <= m - n`.
    pub mu_max: usize,
    pub mu_bound: bool,
    /// (ii), s = 2: rows holding `y1` or `y2` (distinct columns) number at most `m - n + 1`.
    pub pair_bound: bool,
    pub pair_violation: Option<(VarRef, VarRef, usize)>,
    /// (iii) per row, `sum_j mu(x'_ij) >= m - 1`.
    pub row_sums: Vec<usize>,
    pub row_sum_bound: bool,
    /// (iv) for every `(i, j)` some row agrees with `x'_ij` in column `j`
    /// and avoids `x'_is` elsewhere.
    pub witness_rows: bool,
    pub missing_witnesses: Vec<(usize, usize)>,
    /// (v) orthogonal submatrices on `k` columns have at most `m - n + k`
    /// rows, strictly fewer once `2k >= n`; checked for `k <= k_max`.
    pub k_max: usize,
    pub submatrix_bound: bool,
    pub submatrix_violations: Vec<SubmatrixViolation>,
    /// (vi) `sum_j p_j >= m(m-1)/2` with `p_j = sum mu(x) mu(x')` over classes.
    pub pair_product_sum: usize,
    pub pair_product_bound: bool,
    /// `m = n + 1` with `n` odd, where UOM is equivalent to `mu = 1`.
    pub mu_one_criterion_applies: bool,
}

impl DiagnosticsReport {
    pub fn all_pass(&self) -> bool {
        self.perps_occur
            && self.mu_bound
            && self.pair_bound
            && self.row_sum_bound
            && self.witness_rows
            && self.submatrix_bound
            && self.pair_product_bound
    }
}

pub fn uom_diagnostics(x: &FormalMatrix) -> Result<DiagnosticsReport, EngineError> {
    uom_diagnostics_with(x, DEFAULT_K_MAX)
}

pub fn uom_diagnostics_with(x: &FormalMatrix, k_max: usize) -> Result<DiagnosticsReport, EngineError> {
    x.ensure_orthogonal()?;
    let index = CoverIndex::new(x)?;
    let (m, n) = (x.nrows(), x.ncols());
    let st = stats(x);
    let mu_perp = |i: usize, j: usize| st.mu_of(&VarRef::new(j, x.get(i, j).perp()));

    let missing_perps: Vec<(usize, usize)> =
        (0..m).cartesian_product(0..n).filter(|&(i, j)| mu_perp(i, j) == 0).collect();

    let bound_ii = m.saturating_sub(n);
    let mut pair_violation = None;
    'pairs: for (j1, j2) in (0..n).tuple_combinations() {
        for (v1, o1) in index.cols[j1].vars.iter().zip(&index.cols[j1].occ) {
            for (v2, o2) in index.cols[j2].vars.iter().zip(&index.cols[j2].occ) {
                let hit = o1.union(o2).len();
                if hit > bound_ii + 1 {
                    pair_violation = Some((VarRef::new(j1, *v1), VarRef::new(j2, *v2), hit));
                    break 'pairs;
                }
            }
        }
    }

    let row_sums: Vec<usize> = (0..m).map(|i| (0..n).map(|j| mu_perp(i, j)).sum()).collect();

    let missing_witnesses: Vec<(usize, usize)> = (0..m)
        .cartesian_product(0..n)
        .filter(|&(i, j)| {
            !(0..m).any(|r| {
                x.get(r, j) == x.get(i, j).perp()
                    && (0..n).all(|s| s == j || x.get(r, s) != x.get(i, s).perp())
            })
        })
        .collect();

    let mut submatrix_violations = Vec::new();
    for k in 1..=k_max.min(n.saturating_sub(1)) {
        for cols in (0..n).combinations(k) {
            let mut projected: Vec<Vec<Var>> =
                x.rows().map(|r| cols.iter().map(|&j| r[j]).collect()).collect();
            projected.sort_unstable();
            projected.dedup();
            let d = max_mutually_orthogonal(&projected);
            let bound = (m + k).saturating_sub(n);
            let strict = 2 * k >= n;
            if d > bound || (strict && d == bound) {
                submatrix_violations.push(SubmatrixViolation { columns: cols, rows: d, bound, strict });
            }
        }
    }

    let pair_product_sum: usize = (0..n)
        .map(|j| {
            x.column_ids(j)
                .into_iter()
                .map(|id| {
                    st.mu_of(&VarRef { column: j, id, primed: false })
                        * st.mu_of(&VarRef { column: j, id, primed: true })
                })
                .sum::<usize>()
        })
        .sum();

    Ok(DiagnosticsReport {
        m,
        n,
        perps_occur: missing_perps.is_empty(),
        missing_perps,
        mu_max: st.mu_max,
        mu_bound: m >= n && st.mu_max <= bound_ii,
        pair_bound: pair_violation.is_none(),
        pair_violation,
        row_sum_bound: row_sums.iter().all(|&s| s + 1 >= m),
        row_sums,
        witness_rows: missing_witnesses.is_empty(),
        missing_witnesses,
        k_max,
        submatrix_bound: submatrix_violations.is_empty(),
        submatrix_violations,
        pair_product_bound: 2 * pair_product_sum >= m * (m - 1),
        pair_product_sum,
        mu_one_criterion_applies: m == n + 1 && n % 2 == 1,
    })
}

/// A witness `X ~ A |= (B_1, ..., B_r)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    /// Columns of `X` carried by `A`.
    pub a_columns: Vec<usize>,
    /// Remaining columns, carried by the blocks.
    pub b_columns: Vec<usize>,
    pub a: FormalMatrix,
    pub blocks: Vec<FormalMatrix>,
    /// Rows of `X` forming each block, in order.
    pub row_groups: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionProbe {
    /// Some column holds a single variable class.
    pub reducible: bool,
    pub decomposition: Option<Decomposition>,
    /// Largest `A` width searched.
    pub searched_width: usize,
}

/// Look for a decomposition whose `A` part spans at most `max_width` columns.
/// Finding none within the limit does not prove indecomposability unless
/// `max_width >= n - 1`.
pub fn decomposition_probe(x: &FormalMatrix, max_width: usize) -> Result<DecompositionProbe, EngineError> {
    x.ensure_orthogonal()?;
    let n = x.ncols();
    let reducible = (0..n).any(|j| x.column_ids(j).len() == 1);
    let searched_width = max_width.min(n.saturating_sub(1));
    let mut decomposition = None;
    'search: for k in 1..=searched_width {
        for a_columns in (0..n).combinations(k) {
            if let Some(d) = try_decompose(x, &a_columns) {
                decomposition = Some(d);
                break 'search;
            }
        }
    }
    Ok(DecompositionProbe { reducible, decomposition, searched_width })
}

fn try_decompose(x: &FormalMatrix, a_columns: &[usize]) -> Option<Decomposition> {
    let b_columns: Vec<usize> = (0..x.ncols()).filter(|j| !a_columns.contains(j)).collect();
    let mut keys: Vec<Vec<Var>> = Vec::new();
    let mut row_groups: Vec<Vec<usize>> = Vec::new();
    for (i, r) in x.rows().enumerate() {
        let key: Vec<Var> = a_columns.iter().map(|&j| r[j]).collect();
        match keys.iter().position(|k| *k == key) {
            Some(g) => row_groups[g].push(i),
            None => {
                keys.push(key);
                row_groups.push(vec![i]);
            }
        }
    }
    if keys.len() < 2 {
        return None;
    }
    let a = FormalMatrix::from_rows(&keys).ok()?;
    if a.ensure_orthogonal().is_err() {
        return None;
    }
    let blocks = row_groups
        .iter()
        .map(|g| x.select_rows(g).and_then(|b| b.select_columns(&b_columns)))
        .collect::<Result<Vec<_>, _>>()
        .ok()?;
    Some(Decomposition { a_columns: a_columns.to_vec(), b_columns, a, blocks, row_groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::{is_orthogonal_matrix, parse_matrix};

    fn m(text: &str) -> FormalMatrix {
        parse_matrix(text).unwrap()
    }

    const X3: &str = "ace, ADf, bCF, BdE";

    /// Oracle: every row over the candidate perpendiculars, kept if orthogonal.
    fn brute_orthogonal_rows(x: &FormalMatrix) -> Vec<Vec<Var>> {
        let cands: Vec<Vec<Var>> =
            (0..x.ncols()).map(|j| x.column_vars(j).into_iter().map(Var::perp).collect()).collect();
        let mut rows: Vec<Vec<Var>> = cands
            .into_iter()
            .multi_cartesian_product()
            .filter(|r| x.rows().all(|xr| rows_orthogonal_unchecked(r, xr)))
            .collect();
        rows.sort_unstable();
        rows
    }

    #[test]
    fn extension_of_small_matrix() {
        let x = m("ab, Ac, AC");
        let row = find_extension_row(&x).unwrap().expect("three rows in two qubits extend");
        assert!(is_orthogonal_matrix(&x.with_row(&row).unwrap()));
        assert_eq!(enumerate_orthogonal_rows(&x).unwrap().rows, brute_orthogonal_rows(&x));
    }

    #[test]
    fn uoms_have_no_extension() {
        assert_eq!(find_extension_row(&m(X3)).unwrap(), None);
        assert!(is_uom(&m(X3)));
        let full = m("aaa, aaA, aAa, aAA, Aaa, AaA, AAa, AAA");
        assert_eq!(find_extension_row(&full).unwrap(), None);
        let e = enumerate_orthogonal_rows(&full).unwrap();
        assert!(e.is_empty() && e.is_finite());
    }

    #[test]
    fn non_orthogonal_input_rejected() {
        assert!(matches!(find_extension_row(&m("ab, ac")), Err(EngineError::NotOrthogonal(_))));
        assert!(!is_uom(&m("ab, ac")));
    }

    #[test]
    fn merged_three_qubit_uom_extends() {
        // f and f' replaced by e and e'.
        assert!(!is_uom(&m("ace, ADe, bCE, BdE")));
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for text in [X3, "ab, AB", "ab, Ac", "abc, ABd", "abc, Abd, aBD, ABc", "abcd, ABCD, aBcD"] {
            let x = m(text);
            let e = enumerate_orthogonal_rows(&x).unwrap();
            assert_eq!(e.rows, brute_orthogonal_rows(&x), "{text}");
            for r in &e.rows {
                assert!(is_orthogonal_matrix(&x.with_row(r).unwrap()));
            }
        }
    }

    #[test]
    fn wildcard_columns_detected() {
        // [a'] alone is orthogonal to [a]; the second column is free.
        let e = enumerate_orthogonal_rows(&m("ab")).unwrap();
        assert_eq!(e.wildcard_columns, vec![0, 1]);
        assert_eq!(enumerate_orthogonal_rows(&m("abc, ABC")).unwrap().wildcard_columns, vec![0, 1, 2]);
        // Dropping a row from a UOM leaves finitely many orthogonal rows.
        let e = enumerate_orthogonal_rows(&m("ace, ADf, bCF")).unwrap();
        assert!(e.is_finite());
        assert!(e.rows.contains(&m("BdE").row(0).to_vec()));
        assert_eq!(e.rows, brute_orthogonal_rows(&m("ace, ADf, bCF")));
    }

    #[test]
    fn clique_of_full_matrix() {
        let full = m("aaa, aaA, aAa, aAA, Aaa, AaA, AAa, AAA");
        assert_eq!(max_mutually_orthogonal(&full.to_rows()), 8);
        assert_eq!(max_mutually_orthogonal(&[full.row(0)]), 1);
    }

    #[test]
    fn diagnostics_on_three_qubit_uom() {
        let d = uom_diagnostics(&m(X3)).unwrap();
        assert!(d.all_pass(), "{d:?}");
        assert_eq!(d.mu_max, 1);
        assert!(d.mu_one_criterion_applies);
        let bad = uom_diagnostics(&m("ace, ADe, bCE, BdE")).unwrap();
        assert!(!bad.all_pass());
    }

    #[test]
    fn decomposition_of_reducible_matrix() {
        let x = m("xace, xADf, xbCF, xBdE, Xgik, XGjl, XhIL, XHJK");
        let p = decomposition_probe(&x, 3).unwrap();
        assert!(p.reducible);
        let d = p.decomposition.unwrap();
        assert_eq!(d.a_columns, vec![0]);
        assert_eq!(d.blocks.len(), 2);
        assert!(d.blocks.iter().all(is_uom));
    }
}
