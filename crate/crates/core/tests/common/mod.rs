//! Random instances and property checks shared by the property suite and
//! the acceptance run. Each check takes a seed and reports the first
//! violated condition.

#![allow(dead_code)]

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uomkit::catalog::{catalog_list, SourceStatus};
use uomkit::constructions::{compose, double, genshift, merge_moves, merge_variables, Perm, PermFamily};
use uomkit::numeric::{complement_projector, evaluate_rows, generic_evaluation, ProductState, Tolerances, C64};
use uomkit::{
    are_equivalent, canonical_form, is_orthogonal_matrix, is_uom, parse_matrix, rows_orthogonal, stats,
    FormalMatrix, Var,
};

pub type Check = fn(u64) -> Result<(), String>;

pub const PROPERTIES: &[(&str, Check)] = &[
    ("composition is a UOM iff all parts are", compose_biconditional),
    ("doubling blocks are mutually orthogonal", doubling_blocks_orthogonal),
    ("merges keep orthogonality and orthogonal splits of UOMs stay UOMs", merge_order),
    ("canonical form is invariant under 50 relabelings", canonical_invariance),
    ("evaluations are orthonormal and complete with the projector", evaluation_resolution),
    ("(n+1) x n orthogonal matrices with odd n are UOMs iff mu = 1", mu_one_criterion),
];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Catalog UOMs that are not suspect, with at most `max_cols` columns.
pub fn catalog_uoms(max_cols: usize) -> Vec<FormalMatrix> {
    catalog_list()
        .into_iter()
        .filter(|e| e.status != SourceStatus::Suspect && e.claims.uom == Some(true))
        .filter_map(|e| e.matrix().cloned())
        .filter(|x| x.ncols() <= max_cols)
        .collect()
}

/// Random row and column permutation plus a renaming of every class,
/// swapping `x` and `x'` at random.
pub fn relabel(x: &FormalMatrix, rng: &mut impl Rng) -> FormalMatrix {
    let (m, n) = (x.nrows(), x.ncols());
    let mut rows: Vec<usize> = (0..m).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    let renames: Vec<Vec<(u32, u32, bool)>> = (0..n)
        .map(|j| {
            let ids = x.column_ids(j);
            let mut targets: Vec<u32> = (0..ids.len() as u32 + 3).collect();
            targets.shuffle(rng);
            ids.iter().zip(targets).map(|(&id, t)| (id, t, rng.random_bool(0.5))).collect()
        })
        .collect();
    let out: Vec<Vec<Var>> = rows
        .iter()
        .map(|&i| {
            cols.iter()
                .map(|&j| {
                    let v = x.get(i, j);
                    let &(_, id, flip) = renames[j].iter().find(|r| r.0 == v.id()).unwrap();
                    Var::new(id, v.is_primed() ^ flip)
                })
                .collect()
        })
        .collect();
    FormalMatrix::from_rows(&out).unwrap()
}

/// A random nonempty subset of the rows of a UOM: orthogonal, and a UOM
/// exactly when all rows are kept.
fn sub_uom(pool: &[FormalMatrix], rng: &mut impl Rng) -> FormalMatrix {
    let x = pool.choose(rng).unwrap();
    if rng.random_bool(0.5) {
        return relabel(x, rng);
    }
    let m = x.nrows();
    let keep: Vec<usize> = loop {
        let k: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.6)).collect();
        if !k.is_empty() {
            break k;
        }
    };
    relabel(&x.select_rows(&keep).unwrap(), rng)
}

fn small_uoms(width: usize) -> Vec<FormalMatrix> {
    let mut pool: Vec<FormalMatrix> = match width {
        1 => vec![parse_matrix("a, a'").unwrap()],
        2 => ["a b, a b', a' b, a' b'", "a b, a b', a' c, a' c'"].iter().map(|t| parse_matrix(t).unwrap()).collect(),
        _ => Vec::new(),
    };
    pool.extend(catalog_uoms(width).into_iter().filter(|x| x.ncols() == width && x.nrows() <= 8));
    if width % 2 == 1 {
        pool.push(genshift(width).unwrap());
    }
    pool
}

pub fn compose_biconditional(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let a_width = rng.random_range(1..=3);
    let b_width = rng.random_range(1..=3);
    let a = sub_uom(&small_uoms(a_width), &mut rng);
    let pool = small_uoms(b_width);
    let blocks: Vec<FormalMatrix> = (0..a.nrows()).map(|_| sub_uom(&pool, &mut rng)).collect();
    let x = compose(&a, &blocks).map_err(|e| e.to_string())?;
    let parts = is_uom(&a) && blocks.iter().all(is_uom);
    ensure(is_orthogonal_matrix(&x), || format!("composition not orthogonal:\n{x}"))?;
    ensure(is_uom(&x) == parts, || format!("uom(composition) = {} but parts = {parts}\n{x}", is_uom(&x)))
}

/// A random Latin square as a permutation family: `π_j(i) = L[i][j]`.
pub fn random_family(m: usize, rng: &mut impl Rng) -> PermFamily {
    let mut rows: Vec<usize> = (0..m).collect();
    let mut cols: Vec<usize> = (0..m).collect();
    let mut syms: Vec<usize> = (0..m).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    syms.shuffle(rng);
    let perms = (0..m).map(|j| Perm((0..m).map(|i| syms[(rows[i] + cols[j]) % m]).collect())).collect();
    PermFamily::new(perms).unwrap()
}

pub fn doubling_blocks_orthogonal(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let p = [1usize, 3, 5].choose(&mut rng).copied().unwrap();
    let base = genshift(p).unwrap();
    let x1 = relabel(&base, &mut rng);
    let x2 = relabel(&base, &mut rng);
    let offsets: Vec<u32> = (0..p).map(|j| x1.max_id(j) + 1).collect();
    let x2 = x2.with_id_offsets(&offsets);
    let m = p + 1;
    let family = random_family(m, &mut rng);
    let z = double(&x1, &x2, &family).map_err(|e| e.to_string())?;
    let y: Vec<usize> = (p..p + m).collect();
    let blocks = z.select_columns(&y).unwrap();
    for i in 0..m {
        for k in m..2 * m {
            ensure(rows_orthogonal(blocks.row(i), blocks.row(k)).unwrap(), || {
                format!("Y1 row {i} not orthogonal to Y2 row {}\n{z}", k - m)
            })?;
        }
    }
    ensure(is_orthogonal_matrix(&z), || format!("doubled matrix not orthogonal\n{z}"))?;
    // Two disjoint UOMs in O(p+1, p), p odd, double to a UOM with mu = 1.
    ensure(stats(&z).mu_max == 1 && is_uom(&z), || format!("doubling of GenShift({p}) is not a UOM\n{z}"))
}

pub fn merge_order(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let pool = catalog_uoms(8);
    let y = relabel(pool.choose(&mut rng).unwrap(), &mut rng);
    if let Some(&mv) = merge_moves(&y).choose(&mut rng) {
        let merged = merge_variables(&y, mv).map_err(|e| e.to_string())?;
        ensure(is_orthogonal_matrix(&merged), || format!("merge {mv:?} broke orthogonality\n{y}"))?;
    }
    // Split a random class: some of its rows get a fresh variable. Merging
    // the fresh variable back gives `y`, so an orthogonal split is a UOM.
    let j = rng.random_range(0..y.ncols());
    let ids = y.column_ids(j);
    let id = *ids.choose(&mut rng).unwrap();
    let fresh = y.max_id(j) + 1;
    let moved: BTreeSet<usize> =
        (0..y.nrows()).filter(|&i| y.get(i, j).id() == id && rng.random_bool(0.5)).collect();
    let x = y.map_entries(|i, c, v| if c == j && moved.contains(&i) { Var::new(fresh, v.is_primed()) } else { v });
    if moved.is_empty() || moved.len() == y.column(j).filter(|v| v.id() == id).count() || !is_orthogonal_matrix(&x) {
        return Ok(());
    }
    ensure(is_uom(&x), || format!("orthogonal split of a UOM is extendible\n{x}"))?;
    let back = merge_variables(&x, uomkit::constructions::OrderMove { column: j, target: id, merged: fresh, flip: false })
        .map_err(|e| e.to_string())?;
    ensure(back == y, || "merging the split back does not restore the matrix".into())
}

pub fn canonical_invariance(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let pool = catalog_uoms(8);
    let x = pool.choose(&mut rng).unwrap();
    let code = canonical_form(x).code;
    for t in 0..50 {
        let y = relabel(x, &mut rng);
        ensure(canonical_form(&y).code == code, || format!("relabeling {t} changes the canonical code\n{x}\n{y}"))?;
        if t == 0 {
            let w = are_equivalent(x, &y).ok_or("relabeled copy not recognised as equivalent")?;
            ensure(w.apply(x) == y, || "witness does not map the matrix onto its copy".into())?;
        }
    }
    Ok(())
}

pub fn evaluation_resolution(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let pool = catalog_uoms(6);
    let x = relabel(pool.choose(&mut rng).unwrap(), &mut rng);
    let eval = generic_evaluation(&x, rng.random()).map_err(|e| e.to_string())?;
    let states = evaluate_rows(&eval, &x.to_rows()).map_err(|e| e.to_string())?;
    let dense: Vec<_> = states.iter().map(ProductState::dense).collect();
    for (i, a) in dense.iter().enumerate() {
        ensure((a.norm() - 1.0).abs() < 1e-12, || format!("state {i} is not normalised"))?;
        for (k, b) in dense.iter().enumerate().skip(i + 1) {
            let o = a.dotc(b).norm();
            ensure(o < 1e-10, || format!("states {i} and {k} overlap by {o:e}"))?;
        }
    }
    let d = 1usize << x.ncols();
    let proj = complement_projector(&dense, d, &Tolerances::default()).map_err(|e| e.to_string())?;
    let mut total = proj.rho.clone();
    for v in &dense {
        total += v * v.adjoint();
    }
    let err = (total - DMatrix::<C64>::identity(d, d)).norm();
    ensure(err < 1e-12, || format!("sum of projectors misses the identity by {err:e}"))?;
    ensure(proj.rank == d - x.nrows(), || format!("rank {} for {} states in dimension {d}", proj.rank, x.nrows()))
}

/// A random orthogonal `(n+1) x n` matrix. Each new row picks, for every
/// earlier row, a column where it takes the perpendicular entry.
fn random_square_plus_one(n: usize, rng: &mut impl Rng) -> FormalMatrix {
    loop {
        let mut rows: Vec<Vec<Var>> = Vec::new();
        let mut next_id = vec![0u32; n];
        let mut ok = true;
        for _ in 0..=n {
            let mut row: Vec<Option<Var>> = vec![None; n];
            for prev in &rows {
                let mut cols: Vec<usize> = (0..n).collect();
                cols.shuffle(rng);
                if cols.iter().any(|&c| row[c] == Some(prev[c].perp())) {
                    continue;
                }
                match cols.iter().find(|&&c| row[c].is_none()) {
                    Some(&c) => row[c] = Some(prev[c].perp()),
                    None => ok = false,
                }
            }
            if !ok {
                break;
            }
            let filled: Vec<Var> = row
                .into_iter()
                .enumerate()
                .map(|(c, v)| {
                    v.unwrap_or_else(|| {
                        if next_id[c] > 0 && rng.random_bool(0.3) {
                            Var::new(rng.random_range(0..next_id[c]), rng.random_bool(0.5))
                        } else {
                            Var::new(next_id[c], false)
                        }
                    })
                })
                .collect();
            for (c, v) in filled.iter().enumerate() {
                next_id[c] = next_id[c].max(v.id() + 1);
            }
            rows.push(filled);
        }
        if ok {
            let x = FormalMatrix::from_rows(&rows).unwrap();
            if is_orthogonal_matrix(&x) {
                return x;
            }
        }
    }
}

pub fn mu_one_criterion(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let n = [3usize, 5].choose(&mut rng).copied().unwrap();
    let x = match rng.random_range(0..3) {
        0 => relabel(&genshift(n).unwrap(), &mut rng),
        1 => {
            let g = relabel(&genshift(n).unwrap(), &mut rng);
            let mv = *merge_moves(&g).choose(&mut rng).unwrap();
            merge_variables(&g, mv).unwrap()
        }
        _ => random_square_plus_one(n, &mut rng),
    };
    let mu = stats(&x).mu_max;
    ensure(is_uom(&x) == (mu == 1), || format!("uom = {} with mu = {mu}\n{x}", is_uom(&x)))
}
