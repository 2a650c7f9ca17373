//! Generative constructions and the merge order on matrices.
//!
//! `compose` stacks blocks under the rows of a smaller matrix, `genshift`
//! builds the cyclic `(n+1) x n` UOMs, `double` glues two matrices with a
//! pair of mutually orthogonal square blocks, and `lift_extension` turns an
//! extension of a column prefix into an extension of the whole matrix.
//! `merge_variables` identifies two independent variables of one column;
//! its inverse splits a variable class. Both are used to walk UOM classes
//! level by level.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::budget::Budget;
use crate::engine::is_uom;
use crate::equivalence::canonical_form;
use crate::formal::{stats, FormalMatrix, OrthogonalityError, ParseError, Var};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error(transparent)]
    NotOrthogonal(#[from] OrthogonalityError),
    #[error(transparent)]
    Shape(#[from] ParseError),
    #[error("expected {expected} columns, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("expected {expected} blocks or rows, found {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("variable {id} of column {column} occurs in both inputs")]
    VariableCollision { column: usize, id: u32 },
    #[error("n = {0} is even")]
    EvenN(usize),
    #[error("bad permutation family: {0}")]
    BadFamily(String),
    #[error("split does not match: {0}")]
    SplitMismatch(String),
    #[error("first rows of the extension differ from the column prefix")]
    NotAnExtension,
    #[error("variables {0} and {1} are not independent")]
    DependentPair(u32, u32),
    #[error("variable {id} does not occur in column {column}")]
    NotPresent { column: usize, id: u32 },
    #[error("matrix is not a UOM")]
    NotUom,
}

pub type Result<T> = std::result::Result<T, ConstructionError>;

/// `A |= (B_1, ..., B_r)`: row `k` of `A` is repeated once for every row of
/// `B_k`, with those rows appended on the right.
pub fn compose(a: &FormalMatrix, blocks: &[FormalMatrix]) -> Result<FormalMatrix> {
    if blocks.len() != a.nrows() {
        return Err(ConstructionError::CountMismatch { expected: a.nrows(), found: blocks.len() });
    }
    let w = blocks[0].ncols();
    if let Some(b) = blocks.iter().find(|b| b.ncols() != w) {
        return Err(ConstructionError::WidthMismatch { expected: w, found: b.ncols() });
    }
    a.ensure_orthogonal()?;
    for b in blocks {
        b.ensure_orthogonal()?;
    }
    let rows: Vec<Vec<Var>> = blocks
        .iter()
        .enumerate()
        .flat_map(|(k, b)| b.rows().map(move |r| a.row(k).iter().chain(r).copied().collect()))
        .collect();
    Ok(FormalMatrix::from_rows(&rows)?)
}

/// `compose` after renaming so that no two blocks share a variable.
pub fn compose_disjoint(a: &FormalMatrix, blocks: &[FormalMatrix]) -> Result<FormalMatrix> {
    let mut offset = vec![0u32; blocks.first().map_or(0, FormalMatrix::ncols)];
    let renamed: Vec<FormalMatrix> = blocks
        .iter()
        .map(|b| {
            let r = b.with_id_offsets(&offset[..b.ncols().min(offset.len())]);
            for (j, o) in offset.iter_mut().enumerate().take(b.ncols()) {
                *o = r.max_id(j) + 1;
            }
            r
        })
        .collect();
    compose(a, &renamed)
}

/// The GenShift UOM in `O(n+1, n)` for odd `n`.
///
/// Row `i` is the first row `[0 1' .. p' p .. 1]` shifted right `i` steps;
/// the last row is all `0'`. Symbol `k` in column `j` is variable id `k`.
pub fn genshift(n: usize) -> Result<FormalMatrix> {
    if n % 2 == 0 {
        return Err(ConstructionError::EvenN(n));
    }
    let p = n / 2;
    let first: Vec<Var> = (0..n)
        .map(|k| match k {
            0 => Var::new(0, false),
            k if k <= p => Var::new(k as u32, true),
            k => Var::new((n - k) as u32, false),
        })
        .collect();
    let mut rows: Vec<Vec<Var>> =
        (0..n).map(|i| (0..n).map(|j| first[(j + n - i) % n]).collect()).collect();
    rows.push(vec![Var::new(0, true); n]);
    Ok(FormalMatrix::from_rows(&rows)?)
}

/// A permutation of `0..len`, `self.0[i]` being the image of `i`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Perm(pub Vec<usize>);

impl Perm {
    pub fn identity(len: usize) -> Self {
        Perm((0..len).collect())
    }

    /// Parses cycle notation with 1-based points, e.g. `(12)(34)` or
    /// `(1 4 3 2)`; `()` and `id` are the identity.
    pub fn from_cycles(len: usize, text: &str) -> Result<Self> {
        let bad = |why: &str| ConstructionError::BadFamily(format!("{text:?}: {why}"));
        let mut img: Vec<usize> = (0..len).collect();
        let t = text.trim();
        if t == "id" {
            return Ok(Perm(img));
        }
        let mut seen = BTreeSet::new();
        for cyc in t.split(')').map(str::trim).filter(|c| !c.is_empty()) {
            let body = cyc.strip_prefix('(').ok_or_else(|| bad("expected '('"))?;
            let pts: Vec<usize> = if body.contains([' ', ',']) {
                body.split([' ', ',']).filter(|s| !s.is_empty()).map(|s| s.parse().map_err(|_| bad("bad point"))).collect::<Result<_>>()?
            } else {
                body.chars().map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| bad("bad point"))).collect::<Result<_>>()?
            };
            for (k, &pt) in pts.iter().enumerate() {
                if pt == 0 || pt > len || !seen.insert(pt) {
                    return Err(bad("point out of range or repeated"));
                }
                img[pt - 1] = pts[(k + 1) % pts.len()] - 1;
            }
        }
        Ok(Perm(img))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Perm(inv)
    }

    pub fn pow(&self, k: usize) -> Perm {
        (0..k).fold(Perm::identity(self.len()), |acc, _| self.compose(&acc))
    }

    pub fn is_fixed_point_free(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i != j)
    }

    /// The cyclic group generated by `self`.
    pub fn generated_group(&self) -> Vec<Perm> {
        let id = Perm::identity(self.len());
        let mut out = vec![id.clone()];
        let mut cur = self.clone();
        while cur != id {
            out.push(cur.clone());
            cur = self.compose(&cur);
        }
        out
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut done = vec![false; self.len()];
        let mut any = false;
        for s in 0..self.len() {
            if done[s] || self.0[s] == s {
                continue;
            }
            any = true;
            write!(f, "(")?;
            let mut i = s;
            while !done[i] {
                done[i] = true;
                write!(f, "{}", i + 1)?;
                i = self.0[i];
                if !done[i] && self.len() > 9 {
                    write!(f, " ")?;
                }
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "id")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CosetSide {
    /// `rep ∘ g` for every `g` in the group.
    Left,
    /// `g ∘ rep`.
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// Powers `σ^0, σ^1, ..., σ^(size-1)`.
    Cyclic(Perm),
    Explicit(Vec<Perm>),
    Coset { rep: Perm, group: Vec<Perm>, side: CosetSide },
}

/// Permutations `π_1..π_m` of `0..m` with every `π_j^{-1} π_k` (j ≠ k)
/// fixed-point-free. Equivalently each `π_j(i)` differs from `π_k(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermFamily {
    perms: Vec<Perm>,
}

impl PermFamily {
    pub fn new(perms: Vec<Perm>) -> Result<Self> {
        let m = perms.len();
        if m == 0 {
            return Err(ConstructionError::BadFamily("empty family".into()));
        }
        if let Some(p) = perms.iter().find(|p| p.len() != m) {
            return Err(ConstructionError::BadFamily(format!("{p} does not act on {m} points")));
        }
        for (j, pj) in perms.iter().enumerate() {
            if (0..m).collect::<BTreeSet<_>>() != pj.0.iter().copied().collect() {
                return Err(ConstructionError::BadFamily(format!("entry {} is not a permutation", j + 1)));
            }
            for pk in &perms[j + 1..] {
                if !pj.inverse().compose(pk).is_fixed_point_free() {
                    return Err(ConstructionError::BadFamily(format!("{pj}^-1 {pk} has a fixed point")));
                }
            }
        }
        Ok(PermFamily { perms })
    }

    /// `π_j = σ^j` with `σ(i) = i - 1`: column `j` of `Y2` is rotated `j` steps down.
    pub fn rotations(m: usize) -> Self {
        let sigma = Perm((0..m).map(|i| (i + m - 1) % m).collect());
        PermFamily::new((0..m).map(|j| sigma.pow(j)).collect()).expect("rotations are valid")
    }

    pub fn perms(&self) -> &[Perm] {
        &self.perms
    }

    pub fn size(&self) -> usize {
        self.perms.len()
    }
}

pub fn perm_family(kind: &FamilyKind, size: usize) -> Result<PermFamily> {
    let perms = match kind {
        FamilyKind::Cyclic(sigma) => (0..size).map(|j| sigma.pow(j)).collect(),
        FamilyKind::Explicit(list) => list.clone(),
        FamilyKind::Coset { rep, group, side } => group
            .iter()
            .map(|g| match side {
                CosetSide::Left => rep.compose(g),
                CosetSide::Right => g.compose(rep),
            })
            .collect(),
    };
    let fam = PermFamily::new(perms)?;
    if fam.size() != size {
        return Err(ConstructionError::BadFamily(format!("family has {} members, expected {size}", fam.size())));
    }
    Ok(fam)
}

/// The Klein four-group on four points.
pub fn klein_four() -> Vec<Perm> {
    ["id", "(12)(34)", "(13)(24)", "(14)(23)"]
        .iter()
        .map(|c| Perm::from_cycles(4, c).expect("valid cycles"))
        .collect()
}

/// `Z = [X1 Y1; X2 Y2]` with `Y1[i][j]` fresh variable `i` of column
/// `n + j` and `Y2[i][j] = Y1[π_j(i)][j]'`.
pub fn double(x1: &FormalMatrix, x2: &FormalMatrix, family: &PermFamily) -> Result<FormalMatrix> {
    let (m, n) = (x1.nrows(), x1.ncols());
    if x2.ncols() != n {
        return Err(ConstructionError::WidthMismatch { expected: n, found: x2.ncols() });
    }
    if x2.nrows() != m || family.size() != m {
        let found = if x2.nrows() != m { x2.nrows() } else { family.size() };
        return Err(ConstructionError::CountMismatch { expected: m, found });
    }
    x1.ensure_orthogonal()?;
    x2.ensure_orthogonal()?;
    for j in 0..n {
        let ids1: BTreeSet<u32> = x1.column_ids(j).into_iter().collect();
        if let Some(&id) = x2.column_ids(j).iter().find(|id| ids1.contains(id)) {
            return Err(ConstructionError::VariableCollision { column: j, id });
        }
    }
    let mut rows: Vec<Vec<Var>> = Vec::with_capacity(2 * m);
    for i in 0..m {
        rows.push(x1.row(i).iter().copied().chain((0..m).map(|_| Var::new(i as u32, false))).collect());
    }
    for i in 0..m {
        let y2 = family.perms().iter().map(|p| Var::new(p.apply(i) as u32, true));
        rows.push(x2.row(i).iter().copied().chain(y2).collect());
    }
    Ok(FormalMatrix::from_rows(&rows)?)
}

/// `double` with `X2` a renamed copy of `X1`.
pub fn double_renamed(x1: &FormalMatrix, family: &PermFamily) -> Result<FormalMatrix> {
    let offsets: Vec<u32> = (0..x1.ncols()).map(|j| x1.max_id(j) + 1).collect();
    double(x1, &x1.with_id_offsets(&offsets), family)
}

/// Extends `X = [X1 X2]` (split after column `s`) given an extension `y1`
/// of `X1` whose first `m` rows are `X1`.
///
/// Every row of `y1` is repeated `2^(n-s)` times next to a full matrix
/// `Z_i` on the remaining columns. For `i < m`, `Z_i` must start with row
/// `i` of `X2`. When `z_choices` is `None`, `Z_i` runs through all sign
/// flips of row `i` of `X2` (fresh variables for the added rows).
pub fn lift_extension(
    x: &FormalMatrix,
    s: usize,
    y1: &FormalMatrix,
    z_choices: Option<&[FormalMatrix]>,
) -> Result<FormalMatrix> {
    let (m, n) = (x.nrows(), x.ncols());
    if s == 0 || s > n {
        return Err(ConstructionError::SplitMismatch(format!("split column {s} outside 1..={n}")));
    }
    if y1.ncols() != s {
        return Err(ConstructionError::WidthMismatch { expected: s, found: y1.ncols() });
    }
    x.ensure_orthogonal()?;
    y1.ensure_orthogonal()?;
    let prefix: Vec<usize> = (0..s).collect();
    let x1 = x.select_columns(&prefix)?;
    if y1.nrows() < m || (0..m).any(|i| y1.row(i) != x1.row(i)) {
        return Err(ConstructionError::NotAnExtension);
    }
    if s == n {
        return Ok(y1.clone());
    }
    let w = n - s;
    if w >= 32 {
        return Err(ConstructionError::SplitMismatch(format!("{w} trailing columns is too many")));
    }
    let suffix: Vec<usize> = (s..n).collect();
    let x2 = x.select_columns(&suffix)?;
    let zs: Vec<FormalMatrix> = match z_choices {
        Some(zs) => {
            if zs.len() != y1.nrows() {
                return Err(ConstructionError::CountMismatch { expected: y1.nrows(), found: zs.len() });
            }
            for (i, z) in zs.iter().enumerate() {
                if z.ncols() != w || z.nrows() != 1 << w {
                    return Err(ConstructionError::SplitMismatch(format!("choice {} is not a full {w}-column matrix", i + 1)));
                }
                z.ensure_orthogonal()?;
                if i < m && z.row(0) != x2.row(i) {
                    return Err(ConstructionError::SplitMismatch(format!("choice {} does not start with row {} of the tail", i + 1, i + 1)));
                }
            }
            zs.to_vec()
        }
        None => {
            let mut fresh: Vec<u32> = (0..w).map(|j| x2.max_id(j) + 1).collect();
            (0..y1.nrows())
                .map(|i| {
                    let base: Vec<Var> = if i < m {
                        x2.row(i).to_vec()
                    } else {
                        fresh.iter_mut().map(|f| { *f += 1; Var::new(*f - 1, false) }).collect()
                    };
                    let rows: Vec<Vec<Var>> = (0..1u32 << w)
                        .map(|mask| {
                            base.iter()
                                .enumerate()
                                .map(|(t, &v)| if mask >> t & 1 == 1 { v.perp() } else { v })
                                .collect()
                        })
                        .collect();
                    FormalMatrix::from_rows(&rows)
                })
                .collect::<std::result::Result<_, _>>()?
        }
    };
    let rows: Vec<Vec<Var>> = zs
        .iter()
        .enumerate()
        .flat_map(|(i, z)| z.rows().map(move |r| y1.row(i).iter().chain(r).copied().collect()))
        .collect();
    Ok(FormalMatrix::from_rows(&rows)?)
}

/// Identify variable `merged` of `column` with `target` (or with its
/// perpendicular when `flip`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct OrderMove {
    pub column: usize,
    pub target: u32,
    pub merged: u32,
    pub flip: bool,
}

/// The matrix `Y ≺ X` obtained by applying `mv`. Orthogonality is kept; UOM
/// status need not be.
pub fn merge_variables(x: &FormalMatrix, mv: OrderMove) -> Result<FormalMatrix> {
    if mv.target == mv.merged {
        return Err(ConstructionError::DependentPair(mv.target, mv.merged));
    }
    if mv.column >= x.ncols() {
        return Err(ConstructionError::WidthMismatch { expected: x.ncols(), found: mv.column + 1 });
    }
    let ids = x.column_ids(mv.column);
    for id in [mv.target, mv.merged] {
        if !ids.contains(&id) {
            return Err(ConstructionError::NotPresent { column: mv.column, id });
        }
    }
    Ok(x.map_entries(|_, j, v| {
        if j == mv.column && v.id() == mv.merged {
            Var::new(mv.target, v.is_primed() ^ mv.flip)
        } else {
            v
        }
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Matrices obtained by one merge.
    Down,
    /// Matrices from which one merge gives the input.
    Up,
}

/// Every merge of an independent same-column pair, both orientations.
pub fn merge_moves(x: &FormalMatrix) -> Vec<OrderMove> {
    let mut out = Vec::new();
    for column in 0..x.ncols() {
        let ids = x.column_ids(column);
        for (a, &target) in ids.iter().enumerate() {
            for &merged in &ids[a + 1..] {
                for flip in [false, true] {
                    out.push(OrderMove { column, target, merged, flip });
                }
            }
        }
    }
    out
}

/// Splits of one variable class: the rows in `moved` get a fresh variable
/// with the same sign pattern. The class keeps its smallest row.
fn splits(x: &FormalMatrix) -> Vec<FormalMatrix> {
    let mut out = Vec::new();
    for j in 0..x.ncols() {
        let fresh = x.max_id(j) + 1;
        for id in x.column_ids(j) {
            let occ: Vec<usize> = (0..x.nrows()).filter(|&i| x.get(i, j).id() == id).collect();
            let rest = &occ[1..];
            if rest.len() >= 24 {
                continue;
            }
            for mask in 1u32..(1 << rest.len()) {
                let moved: BTreeSet<usize> =
                    rest.iter().enumerate().filter(|(t, _)| mask >> t & 1 == 1).map(|(_, &i)| i).collect();
                let y = x.map_entries(|i, c, v| {
                    if c == j && moved.contains(&i) { Var::new(fresh, v.is_primed()) } else { v }
                });
                if y.ensure_orthogonal().is_ok() {
                    out.push(y);
                }
            }
        }
    }
    out
}

/// Neighbours of `x` in the merge order, one representative per
/// equivalence class, sorted by canonical code.
pub fn order_neighbors(x: &FormalMatrix, direction: Direction) -> Vec<FormalMatrix> {
    let raw: Vec<FormalMatrix> = match direction {
        Direction::Down => merge_moves(x).into_iter().filter_map(|mv| merge_variables(x, mv).ok()).collect(),
        Direction::Up => splits(x),
    };
    dedup_classes(raw)
}

fn dedup_classes(raw: Vec<FormalMatrix>) -> Vec<FormalMatrix> {
    let mut by_code = BTreeMap::new();
    for y in raw {
        by_code.entry(canonical_form(&y).code).or_insert(y);
    }
    by_code.into_values().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MaximalityStatus {
    pub maximal: bool,
    pub minimal: bool,
    pub isolated: bool,
    /// `ν(X)`, the total number of variable classes.
    pub level: usize,
}

/// Position of a UOM in the merge order. A split of a UOM is a UOM as soon
/// as it is orthogonal, so maximality only needs orthogonal up-neighbours.
pub fn maximality_status(x: &FormalMatrix) -> Result<MaximalityStatus> {
    if !is_uom(x) {
        return Err(ConstructionError::NotUom);
    }
    let maximal = splits(x).is_empty();
    let minimal = !merge_moves(x).into_iter().any(|mv| merge_variables(x, mv).is_ok_and(|y| is_uom(&y)));
    Ok(MaximalityStatus { maximal, minimal, isolated: maximal && minimal, level: stats(x).nu_total })
}

/// UOM class representatives reachable by merging, grouped by level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelCensus {
    #[serde(serialize_with = "serialize_levels")]
    pub levels: BTreeMap<usize, Vec<FormalMatrix>>,
    pub complete: bool,
}

fn serialize_levels<S: serde::Serializer>(
    v: &BTreeMap<usize, Vec<FormalMatrix>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(v.iter().map(|(k, xs)| (k, xs.iter().map(FormalMatrix::to_text).collect::<Vec<_>>())))
}

impl LevelCensus {
    pub fn total(&self) -> usize {
        self.levels.values().map(Vec::len).sum()
    }
}

/// Walks down from `maximal_reps` one level at a time: merges of every
/// class on level `l` that are still UOMs, together with the seeds on level
/// `l - 1`, form level `l - 1`.
pub fn descend_classes(maximal_reps: &[FormalMatrix], budget: &Budget) -> Result<LevelCensus> {
    let mut seeds: BTreeMap<usize, BTreeMap<Vec<u32>, FormalMatrix>> = BTreeMap::new();
    for x in maximal_reps {
        if !is_uom(x) {
            return Err(ConstructionError::NotUom);
        }
        seeds.entry(stats(x).nu_total).or_default().insert(canonical_form(x).code, x.clone());
    }
    let mut levels: BTreeMap<usize, Vec<FormalMatrix>> = BTreeMap::new();
    let Some(&top) = seeds.keys().next_back() else {
        return Ok(LevelCensus { levels, complete: true });
    };
    let bottom = *seeds.keys().next().expect("nonempty");
    let mut frontier: BTreeMap<Vec<u32>, FormalMatrix> = BTreeMap::new();
    let mut level = top;
    let mut complete = true;
    loop {
        if let Some(s) = seeds.remove(&level) {
            for (code, x) in s {
                frontier.entry(code).or_insert(x);
            }
        }
        if !frontier.is_empty() {
            levels.insert(level, frontier.values().cloned().collect());
        }
        if level == 0 || (frontier.is_empty() && level <= bottom) {
            break;
        }
        if budget.exhausted() {
            complete = false;
            break;
        }
        let found: Vec<(Vec<u32>, FormalMatrix)> = frontier
            .par_iter()
            .flat_map_iter(|(_, x)| {
                merge_moves(x)
                    .into_iter()
                    .filter(|_| budget.tick())
                    .filter_map(|mv| merge_variables(x, mv).ok())
                    .filter(is_uom)
                    .map(|y| (canonical_form(&y).code, y))
                    .collect::<Vec<_>>()
            })
            .collect();
        frontier = BTreeMap::new();
        for (code, y) in found {
            frontier.entry(code).or_insert(y);
        }
        level -= 1;
    }
    Ok(LevelCensus { levels, complete: complete && !budget.exhausted() })
}

/// Reference data on UOM sizes: the minimum `θ_n` and the set `Θ'_n` of
/// sizes not ruled out, stored as inclusive ranges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaReference {
    pub n: u32,
    pub theta: u128,
    pub theta_prime: Vec<(u128, u128)>,
}

impl ThetaReference {
    pub fn contains(&self, m: u128) -> bool {
        self.theta_prime.iter().any(|&(a, b)| a <= m && m <= b)
    }

    pub fn values(&self) -> impl Iterator<Item = u128> + '_ {
        self.theta_prime.iter().flat_map(|&(a, b)| a..=b)
    }
}

pub fn theta_reference(n: u32) -> ThetaReference {
    assert!((1..=127).contains(&n), "n must lie in 1..=127");
    let nn = n as u128;
    let theta = match n {
        4 => 6,
        8 => 11,
        _ if n % 2 == 1 => nn + 1,
        _ if n % 4 == 2 => nn + 2,
        _ => nn + 4,
    };
    let full = 1u128 << n;
    let low = if n % 2 == 1 { nn + 3 } else { theta };
    let mut ranges = vec![(theta, theta)];
    if full >= 6 && low <= full - 6 {
        ranges.push((low, full - 6));
    }
    if full >= 4 {
        ranges.push((full - 4, full - 4));
    }
    ranges.push((full, full));
    let mut set: Vec<(u128, u128)> = ranges
        .into_iter()
        .filter_map(|(a, b)| {
            let a = a.max(theta);
            let b = b.min(full);
            (a <= b).then_some((a, b))
        })
        .collect();
    set.sort_unstable();
    let mut merged: Vec<(u128, u128)> = Vec::new();
    for (a, b) in set {
        match merged.last_mut() {
            Some(last) if a <= last.1 + 1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    ThetaReference { n, theta, theta_prime: merged }
}
