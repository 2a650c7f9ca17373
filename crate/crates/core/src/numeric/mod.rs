//! Numeric side: generic evaluations of formal matrices as product states,
//! complement projectors, partial-transpose checks and separability
//! certificates for the states built from them.
//!
//! Product vectors are Kronecker products with the first factor most
//! significant. Qubit perpendiculars are `(a, b) -> (-conj b, conj a)`.

mod nnls;
mod qudit;

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::engine::{enumerate_orthogonal_rows, is_uom, EngineError};
use crate::formal::{FormalMatrix, Var};

pub use qudit::{complexify, pyramid_perpendicular, pyramid_upb, pyramid_vector, qudit_orthogonal_product_vectors, qudit_pptes_report, QuditProductSet};

pub type C64 = Complex<f64>;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("could not find a generic evaluation of column {column}")]
    GenericityFailure { column: usize },
    #[error("variable {id} of column {column} has no value")]
    UnknownVariable { column: usize, id: u32 },
    #[error("vectors {0} and {1} overlap by {2:e}")]
    NotOrthogonalSet(usize, usize, f64),
    #[error("matrix deviates from Hermitian by {0:e}")]
    NonHermitian(f64),
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not a UOM")]
    NotUom,
    #[error("row {0} is out of range")]
    BadDrop(usize),
    #[error("assignment {0:?} leaves a continuum of product vectors")]
    UnderConstrained(Vec<usize>),
    #[error("{0} states on {1} factors is too many assignments to enumerate")]
    TooManyAssignments(usize, usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub type Result<T> = std::result::Result<T, NumericError>;

/// Numeric thresholds. Relative ones are scaled by the largest singular
/// value or by the norm of the state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Overlaps `|<x|y>|^2` of independent variables must avoid `[0, g]` and `[1 - g, 1]`.
    pub genericity: f64,
    pub orthogonality: f64,
    /// Relative singular value cutoff.
    pub rank: f64,
    /// Smallest allowed eigenvalue of a partial transpose.
    pub ppt: f64,
    /// Relative residual for a nonnegative reconstruction.
    pub nnls: f64,
    /// Relative residual above which a state is outside the span.
    pub span: f64,
    /// Distance from the range for a listed product vector.
    pub range: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { genericity: 1e-8, orthogonality: 1e-10, rank: 1e-8, ppt: 1e-9, nnls: 1e-8, span: 1e-8, range: 1e-9 }
    }
}

impl Tolerances {
    /// Applies `key=value` overrides, e.g. `ppt=1e-8`.
    pub fn set(&mut self, key: &str, value: f64) -> std::result::Result<(), String> {
        let slot = match key {
            "genericity" => &mut self.genericity,
            "orthogonality" => &mut self.orthogonality,
            "rank" => &mut self.rank,
            "ppt" => &mut self.ppt,
            "nnls" => &mut self.nnls,
            "span" => &mut self.span,
            "range" => &mut self.range,
            _ => return Err(format!("unknown tolerance {key:?}")),
        };
        *slot = value;
        Ok(())
    }
}

/// A tensor product of unit vectors, one per party.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState(pub Vec<CVector>);

impl ProductState {
    pub fn dense(&self) -> CVector {
        let mut out = CVector::from_element(1, C64::new(1.0, 0.0));
        for f in &self.0 {
            out = out.kronecker(f);
        }
        out
    }

    pub fn inner(&self, other: &ProductState) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.dotc(b)).product()
    }

    /// Conjugates the factors of `parties`: the partial transpose of the
    /// rank-one projector on `self`.
    fn conjugate_parties(&self, parties: &[usize]) -> ProductState {
        ProductState(
            self.0.iter().enumerate().map(|(k, f)| if parties.contains(&k) { f.conjugate() } else { f.clone() }).collect(),
        )
    }
}

fn perp2(v: [C64; 2]) -> [C64; 2] {
    [-v[1].conj(), v[0].conj()]
}

/// Values of the variables of a matrix: one unit vector per variable id and
/// column, perpendiculars derived.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub seed: u64,
    pub genericity_tolerance: f64,
    columns: Vec<BTreeMap<u32, [C64; 2]>>,
}

impl Evaluation {
    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn vector(&self, column: usize, v: Var) -> Result<[C64; 2]> {
        let base = self
            .columns
            .get(column)
            .and_then(|c| c.get(&v.id()))
            .ok_or(NumericError::UnknownVariable { column, id: v.id() })?;
        Ok(if v.is_primed() { perp2(*base) } else { *base })
    }

    /// Whether distinct variables of every column are neither parallel nor
    /// perpendicular, within `tol`.
    pub fn is_generic(&self, tol: f64) -> bool {
        self.columns.iter().all(|c| column_generic(c, tol))
    }
}

fn column_generic(col: &BTreeMap<u32, [C64; 2]>, tol: f64) -> bool {
    let vs: Vec<&[C64; 2]> = col.values().collect();
    vs.iter().enumerate().all(|(i, a)| {
        vs[i + 1..].iter().all(|b| {
            let o = (a[0].conj() * b[0] + a[1].conj() * b[1]).norm_sqr();
            o > tol && o < 1.0 - tol
        })
    })
}

fn random_unit(rng: &mut ChaCha8Rng) -> [C64; 2] {
    let mut g = || -> f64 { StandardNormal.sample(rng) };
    let v = [C64::new(g(), g()), C64::new(g(), g())];
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / norm, v[1] / norm]
}

pub fn generic_evaluation(x: &FormalMatrix, seed: u64) -> Result<Evaluation> {
    generic_evaluation_with(x, seed, Tolerances::default().genericity)
}

/// Draws complex Gaussian unit vectors per variable, resampling a column
/// until its variables are pairwise generic.
pub fn generic_evaluation_with(x: &FormalMatrix, seed: u64, tol: f64) -> Result<Evaluation> {
    const RETRIES: usize = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let ids = x.column_ids(j);
        let col = (0..RETRIES)
            .map(|_| ids.iter().map(|&id| (id, random_unit(&mut rng))).collect::<BTreeMap<_, _>>())
            .find(|c| column_generic(c, tol))
            .ok_or(NumericError::GenericityFailure { column: j })?;
        columns.push(col);
    }
    Ok(Evaluation { seed, genericity_tolerance: tol, columns })
}

pub fn evaluate_row(eval: &Evaluation, row: &[Var]) -> Result<ProductState> {
    if row.len() != eval.ncols() {
        return Err(NumericError::DimensionMismatch { expected: eval.ncols(), found: row.len() });
    }
    row.iter()
        .enumerate()
        .map(|(j, &v)| eval.vector(j, v).map(|a| CVector::from_row_slice(&a)))
        .collect::<Result<_>>()
        .map(ProductState)
}

pub fn evaluate_rows<R: AsRef<[Var]>>(eval: &Evaluation, rows: &[R]) -> Result<Vec<ProductState>> {
    rows.iter().map(|r| evaluate_row(eval, r.as_ref())).collect()
}

/// Orthogonal projector onto the complement of an orthonormal set.
#[derive(Clone, Debug)]
pub struct Projector {
    pub rho: CMatrix,
    pub rank: usize,
    /// Largest distance of an eigenvalue from `{0, 1}`.
    pub eigen_deviation: f64,
}

pub fn complement_projector(vectors: &[CVector], d: usize, tol: &Tolerances) -> Result<Projector> {
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != d {
            return Err(NumericError::DimensionMismatch { expected: d, found: v.len() });
        }
        for (j, w) in vectors.iter().enumerate().skip(i + 1) {
            let o = v.dotc(w).norm();
            if o > tol.orthogonality {
                return Err(NumericError::NotOrthogonalSet(i, j, o));
            }
        }
    }
    let mut rho = CMatrix::identity(d, d);
    for v in vectors {
        rho -= v * v.adjoint();
    }
    let eig = rho.clone().symmetric_eigenvalues();
    let eigen_deviation = eig.iter().map(|&l| l.abs().min((1.0 - l).abs())).fold(0.0, f64::max);
    // Singular values of a Hermitian matrix are the moduli of its
    // eigenvalues; a projector's nonzero ones are 1.
    let top = eig.iter().map(|l| l.abs()).fold(1.0, f64::max);
    let rank = eig.iter().filter(|l| l.abs() > tol.rank * top).count();
    Ok(Projector { rho, rank, eigen_deviation })
}

/// One bipartition: the parties whose indices are transposed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PptVerdict {
    pub transposed: Vec<usize>,
    pub min_eigenvalue: f64,
    pub ppt: bool,
}

/// Bipartitions as the transposed side, always containing party 0. Each
/// split of `n` parties appears once.
pub fn bipartitions(n: usize) -> Vec<Vec<usize>> {
    (0u64..1 << n.saturating_sub(1))
        .map(|mask| std::iter::once(0).chain((1..n).filter(|k| mask >> (k - 1) & 1 == 1)).collect::<Vec<_>>())
        .filter(|s| s.len() < n)
        .collect()
}

pub fn partial_transpose(rho: &CMatrix, dims: &[usize], parties: &[usize]) -> CMatrix {
    let d = rho.nrows();
    let mut stride = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        stride[k] = stride[k + 1] * dims[k + 1];
    }
    let digit = |i: usize, k: usize| (i / stride[k]) % dims[k];
    CMatrix::from_fn(d, d, |i, j| {
        let (mut a, mut b) = (i, j);
        for &k in parties {
            let (di, dj) = (digit(i, k), digit(j, k));
            a = a - di * stride[k] + dj * stride[k];
            b = b - dj * stride[k] + di * stride[k];
        }
        rho[(a, b)]
    })
}

/// PPT test by diagonalising every partial transpose of `rho`.
pub fn ppt_check(rho: &CMatrix, dims: &[usize], tol: &Tolerances) -> Result<Vec<PptVerdict>> {
    let d: usize = dims.iter().product();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(NumericError::DimensionMismatch { expected: d, found: rho.nrows() });
    }
    let herm = (rho - rho.adjoint()).camax();
    if herm > 1e-9 * rho.camax().max(1.0) {
        return Err(NumericError::NonHermitian(herm));
    }
    Ok(bipartitions(dims.len())
        .into_iter()
        .map(|t| {
            let pt = partial_transpose(rho, dims, &t);
            let min = pt.symmetric_eigenvalues().min();
            PptVerdict { ppt: min >= -tol.ppt, transposed: t, min_eigenvalue: min }
        })
        .collect())
}

/// PPT test for `I - Σ|ψ><ψ|` with orthonormal product `ψ`. The partial
/// transpose is `I - Σ|φ><φ|` with `φ` the partially conjugated states, so
/// its least eigenvalue is `1 - λmax` of the Gram matrix of the `φ`.
pub fn ppt_check_product(states: &[ProductState], tol: &Tolerances) -> Vec<PptVerdict> {
    let Some(first) = states.first() else {
        return Vec::new();
    };
    let n = first.0.len();
    bipartitions(n)
        .into_iter()
        .map(|t| {
            let phi: Vec<ProductState> = states.iter().map(|s| s.conjugate_parties(&t)).collect();
            let k = phi.len();
            let gram = CMatrix::from_fn(k, k, |i, j| phi[i].inner(&phi[j]));
            let min = 1.0 - gram.symmetric_eigenvalues().max();
            PptVerdict { ppt: min >= -tol.ppt, transposed: t, min_eigenvalue: min }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Outside the span of the product projectors in the range: no
    /// separable decomposition exists.
    Entangled,
    /// A nonnegative combination of product projectors reproduces the state.
    SeparableNumerical,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Separability {
    pub verdict: Verdict,
    pub coefficients: Vec<f64>,
    /// `|rho - Σ c_i P_i|_F / |rho|_F` for the nonnegative fit.
    pub nnls_residual: f64,
    /// Same for the best unconstrained fit.
    pub span_residual: f64,
}

/// Decides separability of `rho` given every product vector in its range.
pub fn separability_verdict(rho: &CMatrix, range: &[CVector], tol: &Tolerances) -> Separability {
    let norm = rho.norm();
    if norm == 0.0 {
        return Separability { verdict: Verdict::SeparableNumerical, coefficients: vec![0.0; range.len()], nnls_residual: 0.0, span_residual: 0.0 };
    }
    if range.is_empty() {
        return Separability { verdict: Verdict::Entangled, coefficients: Vec::new(), nnls_residual: 1.0, span_residual: 1.0 };
    }
    let k = range.len();
    // <P_i, P_j> = |<ψ_i|ψ_j>|^2 and <P_i, rho> = <ψ_i|rho|ψ_i>.
    let g = DMatrix::from_fn(k, k, |i, j| range[i].dotc(&range[j]).norm_sqr());
    let b = DVector::from_fn(k, |i, _| range[i].dotc(&(rho * &range[i])).re);
    let residual = |c: &DVector<f64>| {
        let mut r = rho.clone();
        for (ci, v) in c.iter().zip(range) {
            r -= v * v.adjoint() * C64::new(*ci, 0.0);
        }
        r.norm() / norm
    };
    let c = nnls::nnls_normal(&g, &b, 1e-14);
    let nnls_residual = residual(&c);
    let free = g.clone().svd(true, true).solve(&b, 1e-12).expect("svd computed with u and v");
    let span_residual = residual(&free);
    let verdict = if nnls_residual <= tol.nnls {
        Verdict::SeparableNumerical
    } else if span_residual > tol.span {
        Verdict::Entangled
    } else {
        Verdict::Inconclusive
    };
    Separability { verdict, coefficients: c.iter().copied().collect(), nnls_residual, span_residual }
}

/// A product vector found in the range, with the formal row it evaluates
/// when it comes from a matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangeVector {
    pub row: Option<String>,
    /// Amplitudes as `[re, im]` pairs.
    pub amplitudes: Vec<[f64; 2]>,
    /// `|(I - rho) v|`.
    pub range_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectorReport {
    pub dimension: usize,
    pub dropped: Vec<usize>,
    pub rank: usize,
    /// Number of product vectors in the range.
    pub s: usize,
    pub ppt: Vec<PptVerdict>,
    pub ppt_all: bool,
    pub verdict: Verdict,
    pub separability: Separability,
    pub eigen_deviation: f64,
    /// Columns left free by some cover: the listed range vectors are then
    /// not exhaustive and an entanglement verdict is withheld.
    pub wildcard_columns: Vec<usize>,
    pub vectors: Vec<RangeVector>,
}

/// Largest dimension for which partial transposes are diagonalised
/// directly rather than through the product-state Gram matrices.
pub const DENSE_PPT_LIMIT: usize = 64;

pub(crate) fn amplitudes(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub(crate) fn range_residual(rho: &CMatrix, v: &CVector) -> f64 {
    (v - rho * v).norm()
}

/// The projector onto the complement of the evaluated rows of `x` left
/// after removing `dropped` (0-based), with every product vector in its
/// range. An empty drop set gives the UPB projector.
pub fn secondary_pptes_report(x: &FormalMatrix, dropped: &[usize], seed: u64, tol: &Tolerances) -> Result<ProjectorReport> {
    if let Some(&bad) = dropped.iter().find(|&&i| i >= x.nrows()) {
        return Err(NumericError::BadDrop(bad));
    }
    if !is_uom(x) {
        return Err(NumericError::NotUom);
    }
    let mut dropped = dropped.to_vec();
    dropped.sort_unstable();
    dropped.dedup();
    let y = x.without_rows(&dropped).map_err(|_| NumericError::BadDrop(x.nrows()))?;
    let eval = generic_evaluation_with(x, seed, tol.genericity)?;
    let states = evaluate_rows(&eval, &y.to_rows())?;
    let n = x.ncols();
    let d = 1usize << n;
    let dense: Vec<CVector> = states.iter().map(ProductState::dense).collect();
    let proj = complement_projector(&dense, d, tol)?;
    let ppt = if d <= DENSE_PPT_LIMIT {
        ppt_check(&proj.rho, &vec![2; n], tol)?
    } else {
        ppt_check_product(&states, tol)
    };
    let orth = enumerate_orthogonal_rows(&y)?;
    let mut vectors = Vec::with_capacity(orth.rows.len());
    let mut range = Vec::with_capacity(orth.rows.len());
    for r in &orth.rows {
        let v = evaluate_row(&eval, r)?.dense();
        vectors.push(RangeVector {
            row: Some(FormalMatrix::from_rows(&[r]).expect("one row").to_text()),
            amplitudes: amplitudes(&v),
            range_residual: range_residual(&proj.rho, &v),
        });
        range.push(v);
    }
    let mut separability = separability_verdict(&proj.rho, &range, tol);
    if !orth.wildcard_columns.is_empty() && separability.verdict == Verdict::Entangled {
        separability.verdict = Verdict::Inconclusive;
    }
    Ok(ProjectorReport {
        dimension: d,
        dropped: dropped.iter().map(|i| i + 1).collect(),
        rank: proj.rank,
        s: range.len(),
        ppt_all: ppt.iter().all(|p| p.ppt),
        ppt,
        verdict: separability.verdict,
        separability,
        eigen_deviation: proj.eigen_deviation,
        wildcard_columns: orth.wildcard_columns,
        vectors,
    })
}
