//! Exact squared Euclidean distance to polyhedral cones and unions.
//!
//! The projection of a point onto a convex polyhedral cone lies on some
//! face and coincides with the orthogonal projection onto that face's
//! affine hull. Enumerating all faces and keeping the feasible
//! projections therefore yields the exact distance.

use itertools::Itertools;

use super::linalg::{row_basis_indices, solve_linear};
use super::{ConeUnion, PolyhedraError, PolyhedralCone, MAX_DISTANCE_INEQS};
use crate::rat::{dot, norm_sq, sub_vec, Rat};

/// Squared distance from `v` to the cone; zero iff `v` is a member.
pub fn squared_distance_to_cone(
    v: &[Rat],
    cone: &PolyhedralCone,
) -> Result<Rat, PolyhedraError> {
    let dim = cone.dim();
    if v.len() != dim {
        return Err(PolyhedraError::DimensionMismatch { dim, got: v.len() });
    }
    if cone.ineqs().len() > MAX_DISTANCE_INEQS {
        return Err(PolyhedraError::EnumerationLimit {
            what: "distance faces",
            got: cone.ineqs().len(),
            cap: MAX_DISTANCE_INEQS,
        });
    }
    let mut best: Option<Rat> = None;
    let n_ineq = cone.ineqs().len();
    for k in 0..=n_ineq {
        for subset in (0..n_ineq).combinations(k) {
            let mut rows: Vec<Vec<Rat>> = cone.eqs().to_vec();
            for &i in &subset {
                rows.push(cone.ineqs()[i].clone());
            }
            let Some(proj) = project_onto_subspace(v, &rows) else {
                continue;
            };
            if cone.member(&proj)? {
                let d = norm_sq(&sub_vec(v, &proj));
                if best.as_ref().is_none_or(|b| d < *b) {
                    best = Some(d);
                }
            }
        }
    }
    Ok(best.expect("the face holding the true projection is always feasible"))
}

/// Orthogonal projection of `v` onto {w : rows . w = 0}. Returns None
/// only if the normal system is inconsistent, which cannot happen for a
/// homogeneous system.
fn project_onto_subspace(v: &[Rat], rows: &[Vec<Rat>]) -> Option<Vec<Rat>> {
    let basis_idx = row_basis_indices(rows);
    if basis_idx.is_empty() {
        return Some(v.to_vec());
    }
    let b: Vec<&Vec<Rat>> = basis_idx.iter().map(|&i| &rows[i]).collect();
    let g = b.len();
    // Gram system (B B^T) alpha = B v, then w = v - B^T alpha.
    let gram: Vec<Vec<Rat>> = (0..g)
        .map(|i| (0..g).map(|j| dot(b[i], b[j])).collect())
        .collect();
    let rhs: Vec<Rat> = (0..g).map(|i| dot(b[i], v)).collect();
    let sol = solve_linear(&gram, &rhs, g)?;
    let alpha = sol.particular;
    let mut w = v.to_vec();
    for (i, row) in b.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            let delta = &alpha[i] * entry;
            w[j] = &w[j] - &delta;
        }
    }
    Some(w)
}

/// Minimum of the per-piece squared distances; exactly zero iff `v`
/// belongs to some piece.
pub fn squared_distance_to_union(v: &[Rat], u: &ConeUnion) -> Result<Rat, PolyhedraError> {
    let mut best: Option<Rat> = None;
    for piece in u.pieces() {
        let d = squared_distance_to_cone(v, piece)?;
        if best.as_ref().is_none_or(|b| d < *b) {
            best = Some(d);
        }
    }
    best.ok_or(PolyhedraError::EmptyUnion)
}
