//! Exact polyhedral computation: H-representation sets, LP solving,
//! vertex/ray enumeration, membership, set comparison and distances.
//!
//! Everything here is exact rational arithmetic; there are no tolerances
//! in this module. Enumeration is deliberately brute force and capped at
//! desk scale.

mod distance;
mod enumerate;
pub(crate) mod linalg;
mod lp;

pub use distance::{squared_distance_to_cone, squared_distance_to_union};
pub use enumerate::{
    cone_from_generators, enumerate_extreme_rays, enumerate_vertices, RayEnumeration,
    VertexEnumeration,
};
pub use lp::{solve_lp, LpOptimum, LpProblem, LpSolution, Sense};

use num_traits::Zero;
use thiserror::Error;

use crate::expr::RationalMatrix;
use crate::rat::{dot, is_zero_vec, neg_vec, Rat};

/// Enumeration caps. The tool targets the desk scale of worked examples;
/// anything larger is rejected rather than silently approximated.
pub const MAX_ENUM_DIM: usize = 12;
pub const MAX_ENUM_CONSTRAINTS: usize = 24;
pub const MAX_DISTANCE_INEQS: usize = 18;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyhedraError {
    #[error("vector length {got} does not match dimension {dim}")]
    DimensionMismatch { dim: usize, got: usize },
    #[error("enumeration limit exceeded: {what} = {got}, cap {cap}")]
    EnumerationLimit {
        what: &'static str,
        got: usize,
        cap: usize,
    },
    #[error("point is not a member of the polyhedron")]
    NotMember,
    #[error("polyhedron has a nonzero right-hand side; not a cone")]
    NotACone,
    #[error("operation undefined on an empty union of cones")]
    EmptyUnion,
}

/// One linear row `coeffs . v (<=|=) rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinRow {
    pub coeffs: Vec<Rat>,
    pub rhs: Rat,
}

/// H-representation polyhedron {v : A v <= b, E v = d}. An empty
/// constraint list represents the whole space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyhedron {
    dim: usize,
    ineqs: Vec<LinRow>,
    eqs: Vec<LinRow>,
}

impl Polyhedron {
    pub fn whole_space(dim: usize) -> Self {
        Polyhedron {
            dim,
            ineqs: Vec::new(),
            eqs: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ineqs(&self) -> &[LinRow] {
        &self.ineqs
    }

    pub fn eqs(&self) -> &[LinRow] {
        &self.eqs
    }

    /// Adds `coeffs . v <= rhs`. Identically-true zero rows are dropped.
    pub fn add_ineq(&mut self, coeffs: Vec<Rat>, rhs: Rat) {
        use num_traits::Signed;
        assert_eq!(coeffs.len(), self.dim, "row width mismatch");
        if is_zero_vec(&coeffs) && !rhs.is_negative() {
            return;
        }
        self.ineqs.push(LinRow { coeffs, rhs });
    }

    /// Adds `coeffs . v = rhs`. Identically-true zero rows are dropped.
    pub fn add_eq(&mut self, coeffs: Vec<Rat>, rhs: Rat) {
        assert_eq!(coeffs.len(), self.dim, "row width mismatch");
        if is_zero_vec(&coeffs) && rhs.is_zero() {
            return;
        }
        self.eqs.push(LinRow { coeffs, rhs });
    }

    pub fn member(&self, v: &[Rat]) -> Result<bool, PolyhedraError> {
        if v.len() != self.dim {
            return Err(PolyhedraError::DimensionMismatch {
                dim: self.dim,
                got: v.len(),
            });
        }
        for row in &self.eqs {
            if dot(&row.coeffs, v) != row.rhs {
                return Ok(false);
            }
        }
        for row in &self.ineqs {
            if dot(&row.coeffs, v) > row.rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Indices of inequality rows active (tight) at `v`.
    pub fn active_ineq_indices(&self, v: &[Rat]) -> Result<Vec<usize>, PolyhedraError> {
        if v.len() != self.dim {
            return Err(PolyhedraError::DimensionMismatch {
                dim: self.dim,
                got: v.len(),
            });
        }
        Ok(self
            .ineqs
            .iter()
            .enumerate()
            .filter(|(_, row)| dot(&row.coeffs, v) == row.rhs)
            .map(|(i, _)| i)
            .collect())
    }

    /// Decided by an exact phase-1 LP.
    pub fn is_empty(&self) -> bool {
        let lp = LpProblem {
            objective: vec![Rat::zero(); self.dim],
            sense: Sense::Min,
            feasible: self.clone(),
        };
        matches!(solve_lp(&lp), LpSolution::Infeasible)
    }

    /// Tangent cone of the polyhedron at a member point: active
    /// inequality rows become homogeneous inequalities, equalities stay.
    pub fn tangent_cone_at(&self, v: &[Rat]) -> Result<PolyhedralCone, PolyhedraError> {
        if !self.member(v)? {
            return Err(PolyhedraError::NotMember);
        }
        let mut cone = PolyhedralCone::whole_space(self.dim);
        for row in &self.eqs {
            cone.add_eq(row.coeffs.clone());
        }
        for i in self.active_ineq_indices(v)? {
            cone.add_ineq(self.ineqs[i].coeffs.clone());
        }
        Ok(cone)
    }

    /// Recession cone {d : A d <= 0, E d = 0}.
    pub fn recession_cone(&self) -> PolyhedralCone {
        let mut cone = PolyhedralCone::whole_space(self.dim);
        for row in &self.eqs {
            cone.add_eq(row.coeffs.clone());
        }
        for row in &self.ineqs {
            cone.add_ineq(row.coeffs.clone());
        }
        cone
    }

    /// Fixes the first `values.len()` coordinates, producing the slice
    /// polyhedron in the remaining coordinates.
    pub fn fix_prefix(&self, values: &[Rat]) -> Polyhedron {
        assert!(values.len() <= self.dim);
        let rest = self.dim - values.len();
        let mut out = Polyhedron::whole_space(rest);
        for row in &self.ineqs {
            let offset = dot(&row.coeffs[..values.len()], values);
            out.add_ineq(row.coeffs[values.len()..].to_vec(), &row.rhs - &offset);
        }
        for row in &self.eqs {
            let offset = dot(&row.coeffs[..values.len()], values);
            out.add_eq(row.coeffs[values.len()..].to_vec(), &row.rhs - &offset);
        }
        out
    }

    /// Intersection with {c . v = rhs}, used to carve optimal faces.
    pub fn with_eq(&self, coeffs: Vec<Rat>, rhs: Rat) -> Polyhedron {
        let mut out = self.clone();
        out.add_eq(coeffs, rhs);
        out
    }

    fn normal_rows(&self) -> Vec<Vec<Rat>> {
        self.eqs
            .iter()
            .chain(self.ineqs.iter())
            .map(|r| r.coeffs.clone())
            .collect()
    }

    /// Common lineality of the constraint normals: directions along which
    /// every constraint value is constant.
    pub fn normal_lineality(&self) -> Vec<Vec<Rat>> {
        linalg::null_space_of_rows(&self.normal_rows(), self.dim)
    }

    pub fn constraint_count(&self) -> usize {
        self.ineqs.len() + self.eqs.len()
    }
}

/// Polyhedral cone {v : A v <= 0, E v = 0}; homogeneity is structural
/// (rows carry no right-hand side).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyhedralCone {
    dim: usize,
    ineqs: Vec<Vec<Rat>>,
    eqs: Vec<Vec<Rat>>,
}

impl PolyhedralCone {
    pub fn whole_space(dim: usize) -> Self {
        PolyhedralCone {
            dim,
            ineqs: Vec::new(),
            eqs: Vec::new(),
        }
    }

    /// The trivial cone {0}.
    pub fn origin_only(dim: usize) -> Self {
        let mut c = PolyhedralCone::whole_space(dim);
        for i in 0..dim {
            let mut row = vec![Rat::zero(); dim];
            row[i] = Rat::from_integer(1.into());
            c.add_eq(row);
        }
        c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ineqs(&self) -> &[Vec<Rat>] {
        &self.ineqs
    }

    pub fn eqs(&self) -> &[Vec<Rat>] {
        &self.eqs
    }

    pub fn add_ineq(&mut self, coeffs: Vec<Rat>) {
        assert_eq!(coeffs.len(), self.dim, "row width mismatch");
        if is_zero_vec(&coeffs) {
            return;
        }
        self.ineqs.push(coeffs);
    }

    pub fn add_eq(&mut self, coeffs: Vec<Rat>) {
        assert_eq!(coeffs.len(), self.dim, "row width mismatch");
        if is_zero_vec(&coeffs) {
            return;
        }
        self.eqs.push(coeffs);
    }

    pub fn member(&self, v: &[Rat]) -> Result<bool, PolyhedraError> {
        self.as_polyhedron().member(v)
    }

    pub fn as_polyhedron(&self) -> Polyhedron {
        let mut p = Polyhedron::whole_space(self.dim);
        for row in &self.eqs {
            p.add_eq(row.clone(), Rat::zero());
        }
        for row in &self.ineqs {
            p.add_ineq(row.clone(), Rat::zero());
        }
        p
    }

    /// Cone from a polyhedron whose rows are all homogeneous.
    pub fn try_from_polyhedron(p: &Polyhedron) -> Result<Self, PolyhedraError> {
        let mut cone = PolyhedralCone::whole_space(p.dim());
        for row in p.eqs() {
            if !row.rhs.is_zero() {
                return Err(PolyhedraError::NotACone);
            }
            cone.add_eq(row.coeffs.clone());
        }
        for row in p.ineqs() {
            if !row.rhs.is_zero() {
                return Err(PolyhedraError::NotACone);
            }
            cone.add_ineq(row.coeffs.clone());
        }
        Ok(cone)
    }

    pub fn intersect(&self, other: &PolyhedralCone) -> PolyhedralCone {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for row in &other.eqs {
            out.add_eq(row.clone());
        }
        for row in &other.ineqs {
            out.add_ineq(row.clone());
        }
        out
    }

    pub fn constraint_count(&self) -> usize {
        self.ineqs.len() + self.eqs.len()
    }

    /// Canonical sort key used to order pieces deterministically.
    fn sort_key(&self) -> (Vec<Vec<Rat>>, Vec<Vec<Rat>>) {
        let mut eqs = self.eqs.clone();
        let mut ineqs = self.ineqs.clone();
        eqs.sort();
        ineqs.sort();
        (eqs, ineqs)
    }
}

/// `a` contained in the single convex cone `b`: every extreme ray and
/// lineality generator of `a` is a member of `b`.
pub fn cone_subset(a: &PolyhedralCone, b: &PolyhedralCone) -> Result<bool, PolyhedraError> {
    let gens = enumerate_extreme_rays(a)?;
    for r in &gens.rays {
        if !b.member(r)? {
            return Ok(false);
        }
    }
    for l in &gens.lineality {
        if !b.member(l)? || !b.member(&neg_vec(l))? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn cone_set_equal(a: &PolyhedralCone, b: &PolyhedralCone) -> Result<bool, PolyhedraError> {
    Ok(cone_subset(a, b)? && cone_subset(b, a)?)
}

/// Finite union of polyhedral cones of a common dimension; possibly
/// nonconvex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeUnion {
    dim: usize,
    pieces: Vec<PolyhedralCone>,
}

impl ConeUnion {
    pub fn new(dim: usize, pieces: Vec<PolyhedralCone>) -> Self {
        for p in &pieces {
            assert_eq!(p.dim(), dim, "piece dimension mismatch");
        }
        ConeUnion { dim, pieces }
    }

    pub fn empty(dim: usize) -> Self {
        ConeUnion {
            dim,
            pieces: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[PolyhedralCone] {
        &self.pieces
    }

    pub fn is_empty_union(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn member(&self, v: &[Rat]) -> Result<bool, PolyhedraError> {
        for p in &self.pieces {
            if p.member(v)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Drops pieces contained in another piece and orders the remainder
    /// canonically. Containment is tested per pair against one convex
    /// piece, which is exact.
    pub fn normalized(&self) -> Result<ConeUnion, PolyhedraError> {
        let mut keep: Vec<PolyhedralCone> = Vec::new();
        'outer: for piece in &self.pieces {
            for other in &keep {
                if cone_subset(piece, other)? {
                    continue 'outer;
                }
            }
            let mut next = Vec::with_capacity(keep.len() + 1);
            for other in keep {
                if !cone_subset(&other, piece)? {
                    next.push(other);
                }
            }
            next.push(piece.clone());
            keep = next;
        }
        keep.sort_by_key(|c| c.sort_key());
        Ok(ConeUnion::new(self.dim, keep))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConeUnionEquality {
    Equal,
    Differ { witness: Vec<Rat> },
}

impl ConeUnionEquality {
    pub fn is_equal(&self) -> bool {
        matches!(self, ConeUnionEquality::Equal)
    }

    pub fn witness(&self) -> Option<&[Rat]> {
        match self {
            ConeUnionEquality::Equal => None,
            ConeUnionEquality::Differ { witness } => Some(witness),
        }
    }
}

/// Set equality of two cone unions, decided by checking every extreme
/// ray and lineality generator of each piece of one union for membership
/// in the other union, and vice versa. On failure the violating
/// generator is returned as a witness from the symmetric difference.
pub fn cone_union_equal(
    u1: &ConeUnion,
    u2: &ConeUnion,
) -> Result<ConeUnionEquality, PolyhedraError> {
    // Every nonempty union contains the origin, which generators alone
    // cannot witness.
    if u1.is_empty_union() != u2.is_empty_union() {
        let dim = u1.dim().max(u2.dim());
        return Ok(ConeUnionEquality::Differ {
            witness: vec![Rat::zero(); dim],
        });
    }
    if let Some(w) = generators_outside(u1, u2)? {
        return Ok(ConeUnionEquality::Differ { witness: w });
    }
    if let Some(w) = generators_outside(u2, u1)? {
        return Ok(ConeUnionEquality::Differ { witness: w });
    }
    Ok(ConeUnionEquality::Equal)
}

fn generators_outside(
    from: &ConeUnion,
    into: &ConeUnion,
) -> Result<Option<Vec<Rat>>, PolyhedraError> {
    for piece in from.pieces() {
        let gens = enumerate_extreme_rays(piece)?;
        for r in &gens.rays {
            if !into.member(r)? {
                return Ok(Some(r.clone()));
            }
        }
        for l in &gens.lineality {
            if !into.member(l)? {
                return Ok(Some(l.clone()));
            }
            let neg = neg_vec(l);
            if !into.member(&neg)? {
                return Ok(Some(neg));
            }
        }
    }
    Ok(None)
}

/// `p` contained in `q`, both convex polyhedra. Uses the vertex plus
/// recession-generator decomposition of `p`.
pub fn poly_subset(p: &Polyhedron, q: &Polyhedron) -> Result<bool, PolyhedraError> {
    if p.is_empty() {
        return Ok(true);
    }
    // Split off the normals' lineality so the remaining part has vertices.
    let mut pointed = p.clone();
    for l in p.normal_lineality() {
        pointed.add_eq(l, Rat::zero());
    }
    let verts = enumerate_vertices(&pointed)?;
    for v in &verts.vertices {
        if !q.member(v)? {
            return Ok(false);
        }
    }
    let rec_q = q.recession_cone();
    let rec_gens = enumerate_extreme_rays(&p.recession_cone())?;
    for r in &rec_gens.rays {
        if !rec_q.member(r)? {
            return Ok(false);
        }
    }
    for l in &rec_gens.lineality {
        if !rec_q.member(l)? || !rec_q.member(&neg_vec(l))? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn poly_set_equal(p: &Polyhedron, q: &Polyhedron) -> Result<bool, PolyhedraError> {
    Ok(poly_subset(p, q)? && poly_subset(q, p)?)
}

/// The unique point of `p` if `p` is a singleton, else None.
pub fn singleton_point(p: &Polyhedron) -> Result<Option<Vec<Rat>>, PolyhedraError> {
    if p.is_empty() {
        return Ok(None);
    }
    if !p.normal_lineality().is_empty() {
        return Ok(None);
    }
    let rec = enumerate_extreme_rays(&p.recession_cone())?;
    if !rec.rays.is_empty() || !rec.lineality.is_empty() {
        return Ok(None);
    }
    let verts = enumerate_vertices(p)?;
    if verts.vertices.len() == 1 {
        Ok(Some(verts.vertices[0].clone()))
    } else {
        Ok(None)
    }
}

/// Exact rank via rational Gaussian elimination.
pub fn matrix_rank(m: &RationalMatrix) -> usize {
    linalg::rank_of_rows(&m.row_vecs())
}

/// Basis of the null space {v : M v = 0}.
pub fn null_space(m: &RationalMatrix) -> Vec<Vec<Rat>> {
    linalg::null_space_of_rows(&m.row_vecs(), m.cols())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    fn segment_polyhedron() -> Polyhedron {
        // {lambda >= 0 : 2*l1 + l2 = 1}
        let mut p = Polyhedron::whole_space(2);
        p.add_eq(vec![rat(2), rat(1)], rat(1));
        p.add_ineq(vec![rat(-1), rat(0)], rat(0));
        p.add_ineq(vec![rat(0), rat(-1)], rat(0));
        p
    }

    #[test]
    fn member_checks_are_exact() {
        let p = segment_polyhedron();
        assert!(p.member(&[ratio(1, 2), rat(0)]).unwrap());
        assert!(!p.member(&[ratio(1, 2), ratio(1, 1000000)]).unwrap());
        assert!(p
            .member(&[ratio(1, 4), ratio(1, 2)])
            .unwrap());
        assert!(matches!(
            p.member(&[rat(1)]),
            Err(PolyhedraError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn origin_in_any_cone() {
        let mut c = PolyhedralCone::whole_space(3);
        c.add_ineq(vec![rat(1), rat(2), rat(-1)]);
        c.add_eq(vec![rat(0), rat(1), rat(1)]);
        assert!(c.member(&[rat(0), rat(0), rat(0)]).unwrap());
    }

    #[test]
    fn orthant_rejects_negative_coordinates() {
        let mut c = PolyhedralCone::whole_space(2);
        c.add_ineq(vec![rat(-1), rat(0)]);
        c.add_ineq(vec![rat(0), rat(-1)]);
        assert!(!c.member(&[rat(-1), rat(0)]).unwrap());
        assert!(c.member(&[rat(1), rat(0)]).unwrap());
    }

    #[test]
    fn boundary_membership_flips_under_any_perturbation() {
        let mut p = Polyhedron::whole_space(1);
        p.add_ineq(vec![rat(1)], rat(1));
        assert!(p.member(&[rat(1)]).unwrap());
        let mut shifted = Polyhedron::whole_space(1);
        shifted.add_ineq(vec![rat(1)], rat(1) - ratio(1, 1_000_000_000));
        assert!(!shifted.member(&[rat(1)]).unwrap());
    }

    #[test]
    fn fix_prefix_slices_offsets() {
        // x + y <= 3 with x fixed at 1 becomes y <= 2.
        let mut p = Polyhedron::whole_space(2);
        p.add_ineq(vec![rat(1), rat(1)], rat(3));
        let s = p.fix_prefix(&[rat(1)]);
        assert_eq!(s.dim(), 1);
        assert!(s.member(&[rat(2)]).unwrap());
        assert!(!s.member(&[ratio(201, 100)]).unwrap());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(matrix_rank(&RationalMatrix::identity(2)), 2);
        let m = RationalMatrix::from_rows(vec![vec![rat(2), rat(0)], vec![rat(1), rat(0)]]);
        assert_eq!(matrix_rank(&m), 1);
        let z = RationalMatrix::zeros(2, 3);
        assert_eq!(matrix_rank(&z), 0);
        assert_eq!(null_space(&z).len(), 3);
        assert!(null_space(&RationalMatrix::identity(2)).is_empty());
    }
}
