//! Product vectors in the range of a projector built from qudit product
//! states, and the two-qutrit Pyramid UPB.
//!
//! A product vector `a_1 ⊗ .. ⊗ a_n` is orthogonal to a product state
//! exactly when some factor `a_k` is orthogonal to that state's `k`th
//! factor. Assigning every state to one factor turns the search into
//! independent null-space problems per factor.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::Serialize;

use super::{
    amplitudes, complement_projector, ppt_check, range_residual, separability_verdict, CMatrix, CVector,
    NumericError, ProductState, ProjectorReport, RangeVector, Result, Tolerances, C64,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuditProductSet {
    pub dims: Vec<usize>,
    #[serde(serialize_with = "serialize_states")]
    pub states: Vec<ProductState>,
}

fn serialize_states<S: serde::Serializer>(v: &[ProductState], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|p| p.0.iter().map(amplitudes).collect::<Vec<_>>()))
}

impl QuditProductSet {
    pub fn dimension(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn without(&self, dropped: &[usize]) -> QuditProductSet {
        QuditProductSet {
            dims: self.dims.clone(),
            states: self.states.iter().enumerate().filter(|(i, _)| !dropped.contains(i)).map(|(_, s)| s.clone()).collect(),
        }
    }
}

/// Orthonormal basis of the vectors orthogonal to all of `constraints`.
fn null_space(constraints: &[&CVector], dim: usize) -> Vec<CVector> {
    if constraints.is_empty() {
        return (0..dim).map(|k| CVector::from_fn(dim, |i, _| C64::new(if i == k { 1.0 } else { 0.0 }, 0.0))).collect();
    }
    let mut h = CMatrix::zeros(dim, dim);
    for c in constraints {
        h += *c * c.adjoint();
    }
    let eig = h.symmetric_eigen();
    (0..dim).filter(|&k| eig.eigenvalues[k].abs() < 1e-10).map(|k| eig.eigenvectors.column(k).into_owned()).collect()
}

/// `1 - |<x|y>|^2` for unit product vectors.
fn projective_distance(x: &ProductState, y: &ProductState) -> f64 {
    1.0 - x.inner(y).norm_sqr()
}

/// All product vectors orthogonal to every state of `set`, up to phase.
/// Fails when some assignment leaves a continuum of solutions.
pub fn qudit_orthogonal_product_vectors(set: &QuditProductSet) -> Result<QuditProductSet> {
    let n = set.dims.len();
    let k = set.states.len();
    if n == 0 {
        return Ok(QuditProductSet { dims: Vec::new(), states: Vec::new() });
    }
    let total = (n as f64).powi(k as i32);
    if total > 1e7 {
        return Err(NumericError::TooManyAssignments(k, n));
    }
    let mut found: Vec<ProductState> = Vec::new();
    let mut assign = vec![0usize; k];
    loop {
        let spaces: Vec<Vec<CVector>> = (0..n)
            .map(|f| {
                let cons: Vec<&CVector> = (0..k).filter(|&i| assign[i] == f).map(|i| &set.states[i].0[f]).collect();
                null_space(&cons, set.dims[f])
            })
            .collect();
        if spaces.iter().all(|s| !s.is_empty()) {
            if spaces.iter().any(|s| s.len() > 1) {
                return Err(NumericError::UnderConstrained(assign.clone()));
            }
            let p = ProductState(spaces.into_iter().map(|mut s| s.remove(0)).collect());
            if !found.iter().any(|q| projective_distance(q, &p) < 1e-8) {
                found.push(p);
            }
        }
        // Next assignment, odometer style.
        let mut pos = 0;
        while pos < k && assign[pos] + 1 == n {
            assign[pos] = 0;
            pos += 1;
        }
        if pos == k {
            break;
        }
        assign[pos] += 1;
    }
    Ok(QuditProductSet { dims: set.dims.clone(), states: found })
}

/// `v_i = N (cos 2πi/5, sin 2πi/5, h)` with `h = √(1+√5)/2`, `N = 2/√(5+√5)`.
pub fn pyramid_vector(i: usize) -> Vector3<f64> {
    let s5 = 5f64.sqrt();
    let h = 0.5 * (1.0 + s5).sqrt();
    let norm = 2.0 / (5.0 + s5).sqrt();
    let t = 2.0 * PI * (i % 5) as f64 / 5.0;
    Vector3::new(t.cos(), t.sin(), h) * norm
}

pub fn complexify(v: &Vector3<f64>) -> CVector {
    CVector::from_iterator(3, v.iter().map(|&x| C64::new(x, 0.0)))
}

/// The five states `v_i ⊗ v_{2i mod 5}`.
pub fn pyramid_upb() -> QuditProductSet {
    let states = (0..5)
        .map(|i| ProductState(vec![complexify(&pyramid_vector(i)), complexify(&pyramid_vector(2 * i % 5))]))
        .collect();
    QuditProductSet { dims: vec![3, 3], states }
}

/// Unit vector orthogonal to `v_i` and `v_j`.
pub fn pyramid_perpendicular(i: usize, j: usize) -> Vector3<f64> {
    pyramid_vector(i).cross(&pyramid_vector(j)).normalize()
}

/// Projector onto the complement of `set` minus `dropped` (0-based), its
/// PPT status and every product vector in its range.
pub fn qudit_pptes_report(set: &QuditProductSet, dropped: &[usize], tol: &Tolerances) -> Result<ProjectorReport> {
    if let Some(&bad) = dropped.iter().find(|&&i| i >= set.states.len()) {
        return Err(NumericError::BadDrop(bad));
    }
    let kept = set.without(dropped);
    let d = set.dimension();
    let dense: Vec<CVector> = kept.states.iter().map(ProductState::dense).collect();
    let proj = complement_projector(&dense, d, tol)?;
    let ppt = ppt_check(&proj.rho, &set.dims, tol)?;
    let range_states = qudit_orthogonal_product_vectors(&kept)?;
    let range: Vec<CVector> = range_states.states.iter().map(ProductState::dense).collect();
    let vectors = range
        .iter()
        .map(|v| RangeVector { row: None, amplitudes: amplitudes(v), range_residual: range_residual(&proj.rho, v) })
        .collect();
    let separability = separability_verdict(&proj.rho, &range, tol);
    let mut dropped = dropped.to_vec();
    dropped.sort_unstable();
    dropped.dedup();
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
        wildcard_columns: Vec::new(),
        vectors,
    })
}
