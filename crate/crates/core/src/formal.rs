//! Vector variables, formal matrices and their text/JSON forms.
//!
//! A variable is scoped to the column it lives in: the matrix stores, for
//! every cell, a column-local variable id together with a primed flag. This
//! makes the "no variable (or its perpendicular) in two columns" condition
//! structural rather than something to validate.
//!
//! Two text forms are accepted:
//!
//! * compact: one row per line (or comma separated, optionally wrapped in
//!   `[...]`), character `k` belongs to column `k`, lowercase letters are
//!   unprimed and the matching uppercase letter is the perpendicular;
//! * extended: whitespace separated tokens `name` / `name'`, for columns
//!   with more than 26 variables.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A column-local vector variable: an id plus the primed (perpendicular) flag.
///
/// Packed as `id << 1 | primed` so that [`Var::perp`] is a single xor.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

impl Var {
    pub const fn new(id: u32, primed: bool) -> Self {
        Var((id << 1) | primed as u32)
    }

    #[inline]
    pub const fn id(self) -> u32 {
        self.0 >> 1
    }

    #[inline]
    pub const fn is_primed(self) -> bool {
        self.0 & 1 == 1
    }

    /// The perpendicular `x'`. Fixed-point free and an involution.
    #[inline]
    pub const fn perp(self) -> Self {
        Var(self.0 ^ 1)
    }

    /// The unprimed member of `{x, x'}`.
    #[inline]
    pub const fn class(self) -> Self {
        Var(self.0 & !1)
    }

    #[inline]
    pub const fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub const fn from_code(code: u32) -> Self {
        Var(code)
    }

    /// Independent means neither equal nor perpendicular.
    #[inline]
    pub fn is_independent_of(self, other: Var) -> bool {
        self.id() != other.id()
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}{}", self.id(), if self.is_primed() { "'" } else { "" })
    }
}

/// A variable occurrence qualified by its column.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct VarRef {
    pub column: usize,
    pub id: u32,
    pub primed: bool,
}

impl VarRef {
    pub fn new(column: usize, var: Var) -> Self {
        VarRef { column, id: var.id(), primed: var.is_primed() }
    }

    pub fn var(&self) -> Var {
        Var::new(self.id, self.primed)
    }

    pub fn perp(&self) -> Self {
        VarRef { primed: !self.primed, ..*self }
    }

    /// Two references are independent iff they differ in column or in id.
    pub fn is_independent_of(&self, other: &VarRef) -> bool {
        self.column != other.column || self.id != other.id
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty input")]
    EmptyInput,
    #[error("row {}: expected {expected} entries, found {found}", .row + 1)]
    RaggedRows { row: usize, expected: usize, found: usize },
    #[error("row {}, column {}: bad token {token:?}", .row + 1, .column + 1)]
    BadToken { row: usize, column: usize, token: String },
    #[error("matrix must have at least one row and one column")]
    Degenerate,
    #[error("entry count {found} does not match {m}x{n}")]
    ShapeMismatch { m: usize, n: usize, found: usize },
    #[error("compact form needs ids below 26, column {column} uses id {id}")]
    IdOutOfRange { column: usize, id: u32 },
    #[error("invalid JSON matrix: {0}")]
    Json(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrthogonalityError {
    #[error("rows have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("rows {} and {} are identical", .0 + 1, .1 + 1)]
    DuplicateRows(usize, usize),
    #[error("rows {} and {} are not orthogonal", .0 + 1, .1 + 1)]
    NotOrthogonal(usize, usize),
}

/// An `m x n` matrix of column-scoped vector variables (an element of M(m,n)).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormalMatrix {
    m: usize,
    n: usize,
    entries: Vec<Var>,
}

impl FormalMatrix {
    pub fn new(m: usize, n: usize, entries: Vec<Var>) -> Result<Self, ParseError> {
        if m == 0 || n == 0 {
            return Err(ParseError::Degenerate);
        }
        if entries.len() != m * n {
            return Err(ParseError::ShapeMismatch { m, n, found: entries.len() });
        }
        Ok(FormalMatrix { m, n, entries })
    }

    pub fn from_rows<R: AsRef<[Var]>>(rows: &[R]) -> Result<Self, ParseError> {
        let m = rows.len();
        if m == 0 {
            return Err(ParseError::EmptyInput);
        }
        let n = rows[0].as_ref().len();
        let mut entries = Vec::with_capacity(m * n);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(ParseError::RaggedRows { row: i, expected: n, found: r.len() });
            }
            entries.extend_from_slice(r);
        }
        Self::new(m, n, entries)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Var {
        self.entries[i * self.n + j]
    }

    pub fn var_ref(&self, i: usize, j: usize) -> VarRef {
        VarRef::new(j, self.get(i, j))
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Var] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[Var]> + '_ {
        self.entries.chunks_exact(self.n)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = Var> + '_ {
        (0..self.m).map(move |i| self.get(i, j))
    }

    pub fn entries(&self) -> &[Var] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<Var>> {
        self.rows().map(<[Var]>::to_vec).collect()
    }

    /// Distinct variable ids occurring in column `j`, ascending.
    pub fn column_ids(&self, j: usize) -> Vec<u32> {
        let mut ids: Vec<u32> = self.column(j).map(Var::id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Distinct variables (either polarity) occurring in column `j`, ascending.
    pub fn column_vars(&self, j: usize) -> Vec<Var> {
        let mut v: Vec<Var> = self.column(j).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Largest id used in column `j`.
    pub fn max_id(&self, j: usize) -> u32 {
        self.column(j).map(Var::id).max().unwrap_or(0)
    }

    /// Submatrix keeping the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self, ParseError> {
        let picked: Vec<&[Var]> = rows.iter().map(|&i| self.row(i)).collect();
        Self::from_rows(&picked)
    }

    /// Submatrix keeping the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self, ParseError> {
        let rows: Vec<Vec<Var>> =
            self.rows().map(|r| cols.iter().map(|&j| r[j]).collect()).collect();
        Self::from_rows(&rows)
    }

    /// Matrix with the listed rows removed.
    pub fn without_rows(&self, drop: &[usize]) -> Result<Self, ParseError> {
        let keep: Vec<usize> = (0..self.m).filter(|i| !drop.contains(i)).collect();
        self.select_rows(&keep)
    }

    /// Matrix with `row` appended at the bottom.
    pub fn with_row(&self, row: &[Var]) -> Result<Self, ParseError> {
        if row.len() != self.n {
            return Err(ParseError::RaggedRows { row: self.m, expected: self.n, found: row.len() });
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(row);
        Self::new(self.m + 1, self.n, entries)
    }

    /// Stack `other` below `self`.
    pub fn stack(&self, other: &FormalMatrix) -> Result<Self, ParseError> {
        if other.n != self.n {
            return Err(ParseError::RaggedRows { row: self.m, expected: self.n, found: other.n });
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Self::new(self.m + other.m, self.n, entries)
    }

    /// Shift every id in column `j` by `offsets[j]`.
    pub fn with_id_offsets(&self, offsets: &[u32]) -> Self {
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(k, v)| Var::new(v.id() + offsets[k % self.n], v.is_primed()))
            .collect();
        FormalMatrix { m: self.m, n: self.n, entries }
    }

    /// Apply a per-cell mapping.
    pub fn map_entries(&self, mut f: impl FnMut(usize, usize, Var) -> Var) -> Self {
        let n = self.n;
        let entries =
            self.entries.iter().enumerate().map(|(k, &v)| f(k / n, k % n, v)).collect();
        FormalMatrix { m: self.m, n: self.n, entries }
    }

    /// Rename ids to first-appearance order per column, with the first
    /// occurrence of each class unprimed. Equivalent to `self`.
    pub fn normalized(&self) -> Self {
        let mut maps: Vec<HashMap<u32, (u32, bool)>> = vec![HashMap::new(); self.n];
        let mut entries = Vec::with_capacity(self.entries.len());
        for i in 0..self.m {
            for j in 0..self.n {
                let v = self.get(i, j);
                let next = maps[j].len() as u32;
                let &mut (id, flip) = maps[j].entry(v.id()).or_insert((next, v.is_primed()));
                entries.push(Var::new(id, v.is_primed() ^ flip));
            }
        }
        FormalMatrix { m: self.m, n: self.n, entries }
    }

    /// Whether any two rows coincide.
    pub fn duplicate_rows(&self) -> Option<(usize, usize)> {
        let mut seen: HashMap<&[Var], usize> = HashMap::new();
        for (i, r) in self.rows().enumerate() {
            if let Some(&k) = seen.get(r) {
                return Some((k, i));
            }
            seen.insert(r, i);
        }
        None
    }

    /// Checks membership in O(m,n).
    pub fn ensure_orthogonal(&self) -> Result<(), OrthogonalityError> {
        for i in 0..self.m {
            for k in 0..i {
                if self.row(i) == self.row(k) {
                    return Err(OrthogonalityError::DuplicateRows(k, i));
                }
                if !rows_orthogonal_unchecked(self.row(k), self.row(i)) {
                    return Err(OrthogonalityError::NotOrthogonal(k, i));
                }
            }
        }
        Ok(())
    }

    pub fn to_compact(&self) -> Result<String, ParseError> {
        let mut out = String::with_capacity(self.m * (self.n + 1));
        for (i, r) in self.rows().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for (j, v) in r.iter().enumerate() {
                if v.id() >= 26 {
                    return Err(ParseError::IdOutOfRange { column: j, id: v.id() });
                }
                let base = if v.is_primed() { b'A' } else { b'a' };
                out.push((base + v.id() as u8) as char);
            }
        }
        Ok(out)
    }

    /// Extended form of the normalized matrix, tokens `x<id>` / `x<id>'`.
    pub fn to_extended(&self) -> String {
        let norm = self.normalized();
        norm.rows()
            .map(|r| {
                r.iter()
                    .map(|v| format!("x{}{}", v.id(), if v.is_primed() { "'" } else { "" }))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Compact form when every id fits a letter, extended otherwise.
    pub fn to_text(&self) -> String {
        self.to_compact().unwrap_or_else(|_| self.to_extended())
    }

    /// Compact rows of the normalized matrix, or extended rows when a column
    /// has more than 26 classes.
    pub fn normalized_rows(&self) -> Vec<String> {
        self.normalized().to_text().lines().map(str::to_owned).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(MatrixJson::from(self)).expect("matrix json")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, ParseError> {
        let mj: MatrixJson =
            serde_json::from_value(value.clone()).map_err(|e| ParseError::Json(e.to_string()))?;
        Self::try_from(mj)
    }
}

impl Serialize for Var {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Var", 2)?;
        st.serialize_field("id", &self.id())?;
        st.serialize_field("primed", &self.is_primed())?;
        st.end()
    }
}

impl fmt::Debug for FormalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormalMatrix({}x{}: [{}])", self.m, self.n, self.to_text().replace('\n', ", "))
    }
}

impl fmt::Display for FormalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl std::str::FromStr for FormalMatrix {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_matrix(s)
    }
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    id: u32,
    primed: bool,
}

/// JSON interchange form: `{"m":..,"n":..,"rows":[[{"id":..,"primed":..},..],..]}`.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    m: usize,
    n: usize,
    rows: Vec<Vec<EntryJson>>,
}

impl From<&FormalMatrix> for MatrixJson {
    fn from(x: &FormalMatrix) -> Self {
        MatrixJson {
            m: x.m,
            n: x.n,
            rows: x
                .rows()
                .map(|r| {
                    r.iter().map(|v| EntryJson { id: v.id(), primed: v.is_primed() }).collect()
                })
                .collect(),
        }
    }
}

impl TryFrom<MatrixJson> for FormalMatrix {
    type Error = ParseError;

    fn try_from(mj: MatrixJson) -> Result<Self, ParseError> {
        let rows: Vec<Vec<Var>> = mj
            .rows
            .iter()
            .map(|r| r.iter().map(|e| Var::new(e.id, e.primed)).collect())
            .collect();
        let x = FormalMatrix::from_rows(&rows)?;
        if x.m != mj.m || x.n != mj.n {
            return Err(ParseError::ShapeMismatch { m: mj.m, n: mj.n, found: x.m * x.n });
        }
        Ok(x)
    }
}

impl Serialize for FormalMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FormalMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let mj = MatrixJson::deserialize(d)?;
        FormalMatrix::try_from(mj).map_err(serde::de::Error::custom)
    }
}

/// Split a comma- or newline-separated row list into row strings.
fn split_rows(text: &str) -> Vec<&str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(','))
        .map(|r| r.trim().trim_start_matches('[').trim_end_matches(']').trim())
        .filter(|r| !r.is_empty())
        .collect()
}

/// Parse a matrix in compact or extended notation.
pub fn parse_matrix(text: &str) -> Result<FormalMatrix, ParseError> {
    let rows = split_rows(text);
    if rows.is_empty() {
        return Err(ParseError::EmptyInput);
    }
    // Compact rows are letters only; a digit or underscore marks a
    // one-column extended matrix such as `x0 / x0'`.
    let extended = rows.iter().any(|r| r.chars().any(|c| !c.is_ascii_alphabetic()));
    if extended {
        parse_extended(&rows)
    } else {
        parse_compact(&rows)
    }
}

fn parse_compact(rows: &[&str]) -> Result<FormalMatrix, ParseError> {
    let n = rows[0].chars().count();
    let mut entries = Vec::with_capacity(rows.len() * n);
    for (i, r) in rows.iter().enumerate() {
        let len = r.chars().count();
        if len != n {
            return Err(ParseError::RaggedRows { row: i, expected: n, found: len });
        }
        for (j, c) in r.chars().enumerate() {
            if !c.is_ascii_alphabetic() {
                return Err(ParseError::BadToken { row: i, column: j, token: c.to_string() });
            }
            let id = (c.to_ascii_lowercase() as u8 - b'a') as u32;
            entries.push(Var::new(id, c.is_ascii_uppercase()));
        }
    }
    FormalMatrix::new(rows.len(), n, entries)
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_extended(rows: &[&str]) -> Result<FormalMatrix, ParseError> {
    let tokens: Vec<Vec<&str>> = rows.iter().map(|r| r.split_whitespace().collect()).collect();
    let n = tokens[0].len();
    let mut names: Vec<HashMap<&str, u32>> = vec![HashMap::new(); n];
    let mut entries = Vec::with_capacity(rows.len() * n);
    for (i, row) in tokens.iter().enumerate() {
        if row.len() != n {
            return Err(ParseError::RaggedRows { row: i, expected: n, found: row.len() });
        }
        for (j, tok) in row.iter().enumerate() {
            let (name, primed) = match tok.strip_suffix('\'') {
                Some(base) => (base, true),
                None => (*tok, false),
            };
            if !valid_name(name) {
                return Err(ParseError::BadToken { row: i, column: j, token: tok.to_string() });
            }
            let next = names[j].len() as u32;
            let id = *names[j].entry(name).or_insert(next);
            entries.push(Var::new(id, primed));
        }
    }
    FormalMatrix::new(rows.len(), n, entries)
}

/// `r1 ⊥ r2`: some column holds perpendicular entries.
pub fn rows_orthogonal(r1: &[Var], r2: &[Var]) -> Result<bool, OrthogonalityError> {
    if r1.len() != r2.len() {
        return Err(OrthogonalityError::LengthMismatch(r1.len(), r2.len()));
    }
    Ok(rows_orthogonal_unchecked(r1, r2))
}

#[inline]
pub(crate) fn rows_orthogonal_unchecked(r1: &[Var], r2: &[Var]) -> bool {
    r1.iter().zip(r2).any(|(a, b)| a.perp() == *b)
}

/// Every pair of rows is orthogonal.
pub fn is_orthogonal_matrix(x: &FormalMatrix) -> bool {
    (0..x.nrows()).all(|i| (0..i).all(|k| rows_orthogonal_unchecked(x.row(i), x.row(k))))
}

/// Multiplicity and independence statistics of a matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatrixStats {
    /// Occurrence counts of every variable that occurs.
    pub mu: BTreeMap<VarRef, usize>,
    pub mu_max: usize,
    /// Number of independent variable classes per column.
    pub nu_per_column: Vec<usize>,
    pub nu_total: usize,
    pub balanced: bool,
}

impl MatrixStats {
    pub fn mu_of(&self, v: &VarRef) -> usize {
        self.mu.get(v).copied().unwrap_or(0)
    }
}

pub fn stats(x: &FormalMatrix) -> MatrixStats {
    let mut mu = BTreeMap::new();
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            *mu.entry(x.var_ref(i, j)).or_insert(0usize) += 1;
        }
    }
    let mu_max = mu.values().copied().max().unwrap_or(0);
    let nu_per_column: Vec<usize> = (0..x.ncols()).map(|j| x.column_ids(j).len()).collect();
    let nu_total = nu_per_column.iter().sum();
    let balanced = mu.iter().all(|(v, &c)| mu.get(&v.perp()).copied().unwrap_or(0) == c);
    MatrixStats { mu, mu_max, nu_per_column, nu_total, balanced }
}
