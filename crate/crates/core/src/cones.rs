//! MPEC-specific first-order objects: the VI Lagrangian and its
//! Jacobians, lifted critical cones, directional critical sets, critical
//! multipliers, affine-VI solution sets, and the MPEC linearized cone.
//!
//! The linearized cone is assembled piecewise: for each lower-level
//! multiplier and each forced-active subset of its critical-cone rows,
//! the AVI stationarity condition becomes a polyhedral cone jointly in
//! (dx, dy). Keeping dx symbolic during face enumeration avoids any
//! sampling of upper-level directions.

use itertools::Itertools;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::expr::{jacobian, ExprError, PolyExpr, RationalMatrix};
use crate::instance::{active_sets, EvalPoint, InstanceError, MpecInstance};
use crate::multipliers::{multiplier_polyhedron, multiplier_set, MultipliersError};
use crate::polyhedra::{
    cone_from_generators, enumerate_vertices, poly_set_equal, solve_lp, ConeUnion, LpProblem,
    LpSolution, PolyhedraError, Polyhedron, PolyhedralCone, Sense,
};
use crate::rat::{dot, neg_vec, Rat};

/// Face-enumeration cap for AVI solving.
pub const MAX_AVI_INEQS: usize = 20;

#[derive(Debug, Error)]
pub enum ConesError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Polyhedra(#[from] PolyhedraError),
    #[error(transparent)]
    Multipliers(#[from] MultipliersError),
    #[error("multiplier is not a member of M(z)")]
    LambdaNotInMultiplierSet,
    #[error("M(z) is empty")]
    EmptyMultiplierSet,
    #[error("critical-multiplier LP is unbounded (M(z) has recession rays)")]
    UnboundedCriticalLp,
    #[error("AVI face enumeration limit exceeded: {got} inequality rows, cap {cap}")]
    FaceLimit { got: usize, cap: usize },
    #[error("direction has wrong length: expected {expected}, got {got}")]
    DirectionLength { expected: usize, got: usize },
}

/// Affine variational inequality: find dy in K with
/// (q + M dy)^T (v - dy) >= 0 for all v in K.
#[derive(Debug, Clone)]
pub struct AviProblem {
    pub q: Vec<Rat>,
    pub m_matrix: RationalMatrix,
    pub k_set: Polyhedron,
}

/// One verified face of an AVI solution set.
#[derive(Debug, Clone)]
pub struct SolutionPiece {
    /// Indices of K's inequality rows forced active on this face.
    pub active_pattern: Vec<usize>,
    pub piece: Polyhedron,
}

/// Union of affine pieces describing SOL(q, M, K) exactly.
#[derive(Debug, Clone)]
pub struct SolutionSetDescription {
    pub dim: usize,
    pub pieces: Vec<SolutionPiece>,
}

impl SolutionSetDescription {
    pub fn is_empty_set(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn member(&self, dy: &[Rat]) -> Result<bool, PolyhedraError> {
        for p in &self.pieces {
            if p.piece.member(dy)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// The VI Lagrangian L(z, lambda) = F(z) + sum_i lambda_i grad_y g_i(z)
/// as a vector of polynomials in z for a fixed rational lambda.
pub fn vi_lagrangian(inst: &MpecInstance, lambda: &[Rat]) -> Result<Vec<PolyExpr>, ConesError> {
    if lambda.len() != inst.l {
        return Err(ConesError::DirectionLength {
            expected: inst.l,
            got: lambda.len(),
        });
    }
    let mut out = Vec::with_capacity(inst.m);
    for k in 0..inst.m {
        let mut lk = inst.vi_operator[k].clone();
        for (i, li) in lambda.iter().enumerate() {
            if li.is_zero() {
                continue;
            }
            let dgi = inst.vi_constraints[i].differentiate(inst.n + k)?;
            lk = &lk + &(&dgi * li);
        }
        out.push(lk);
    }
    Ok(out)
}

/// Exact Jacobians of the VI Lagrangian with respect to x and y at z.
pub fn vi_lagrangian_jacobians(
    inst: &MpecInstance,
    z: &EvalPoint,
    lambda: &[Rat],
) -> Result<(RationalMatrix, RationalMatrix), ConesError> {
    inst.check_point(z)?;
    let l = vi_lagrangian(inst, lambda)?;
    let zv = z.as_vec();
    let jx = jacobian(&l, 0..inst.n, &zv)?;
    let jy = jacobian(&l, inst.n..inst.n + inst.m, &zv)?;
    Ok((jx, jy))
}

fn require_lambda_in_m(
    inst: &MpecInstance,
    z: &EvalPoint,
    lambda: &[Rat],
) -> Result<(), ConesError> {
    let m_poly = multiplier_polyhedron(inst, z)?;
    if lambda.len() != inst.l {
        return Err(ConesError::DirectionLength {
            expected: inst.l,
            got: lambda.len(),
        });
    }
    if !m_poly.member(lambda)? {
        return Err(ConesError::LambdaNotInMultiplierSet);
    }
    Ok(())
}

/// Lifted critical cone K(z, lambda) in R^(n+m): active rows with
/// lambda_i = 0 stay inequalities, rows with lambda_i > 0 become
/// equalities, both on the full gradients (grad_x g_i, grad_y g_i).
pub fn lifted_critical_cone(
    inst: &MpecInstance,
    z: &EvalPoint,
    lambda: &[Rat],
) -> Result<PolyhedralCone, ConesError> {
    require_lambda_in_m(inst, z, lambda)?;
    let zv = z.as_vec();
    let sets = active_sets(inst, z)?;
    let mut cone = PolyhedralCone::whole_space(inst.dim());
    for &i in &sets.active {
        let grad = inst.vi_constraints[i].gradient_at(&zv)?;
        if lambda[i].is_positive() {
            cone.add_eq(grad);
        } else {
            cone.add_ineq(grad);
        }
    }
    Ok(cone)
}

/// Directional critical set K(z, lambda; dx): the dx-slice of the lifted
/// critical cone, an affine polyhedron in dy.
pub fn directional_critical_set(
    inst: &MpecInstance,
    z: &EvalPoint,
    lambda: &[Rat],
    dx: &[Rat],
) -> Result<Polyhedron, ConesError> {
    if dx.len() != inst.n {
        return Err(ConesError::DirectionLength {
            expected: inst.n,
            got: dx.len(),
        });
    }
    let cone = lifted_critical_cone(inst, z, lambda)?;
    Ok(cone.as_polyhedron().fix_prefix(dx))
}

#[derive(Debug, Clone)]
pub struct CriticalMultipliers {
    /// M^c(z; dx) as the optimal face of M(z) in H-representation.
    pub face: Polyhedron,
    pub value: Rat,
}

/// Critical multipliers: maximizers of sum_i lambda_i dx.grad_x g_i(z)
/// over M(z).
pub fn critical_multipliers(
    inst: &MpecInstance,
    z: &EvalPoint,
    dx: &[Rat],
) -> Result<CriticalMultipliers, ConesError> {
    if dx.len() != inst.n {
        return Err(ConesError::DirectionLength {
            expected: inst.n,
            got: dx.len(),
        });
    }
    let m_poly = multiplier_polyhedron(inst, z)?;
    let zv = z.as_vec();
    let mut objective = Vec::with_capacity(inst.l);
    for i in 0..inst.l {
        let gx = inst.vi_constraints[i].gradient_at(&zv)?[..inst.n].to_vec();
        objective.push(dot(dx, &gx));
    }
    let lp = LpProblem {
        objective: objective.clone(),
        sense: Sense::Max,
        feasible: m_poly.clone(),
    };
    match solve_lp(&lp) {
        LpSolution::Optimal(opt) => Ok(CriticalMultipliers {
            face: m_poly.with_eq(objective, opt.value.clone()),
            value: opt.value,
        }),
        LpSolution::Infeasible => Err(ConesError::EmptyMultiplierSet),
        LpSolution::Unbounded => Err(ConesError::UnboundedCriticalLp),
    }
}

#[derive(Debug, Clone)]
pub enum DualLpOutcome {
    Optimal { face: Polyhedron, value: Rat },
    Infeasible,
    Unbounded,
}

/// The dual linear program of the critical-multiplier LP:
/// min dy.F(z) s.t. dx.grad_x g_i(z) + dy.grad_y g_i(z) <= 0 for active i.
/// Its optimal face coincides with the directional critical set of every
/// critical multiplier.
pub fn dual_critical_lp(
    inst: &MpecInstance,
    z: &EvalPoint,
    dx: &[Rat],
) -> Result<DualLpOutcome, ConesError> {
    if dx.len() != inst.n {
        return Err(ConesError::DirectionLength {
            expected: inst.n,
            got: dx.len(),
        });
    }
    let zv = z.as_vec();
    let sets = active_sets(inst, z)?;
    let mut feasible = Polyhedron::whole_space(inst.m);
    for &i in &sets.active {
        let grad = inst.vi_constraints[i].gradient_at(&zv)?;
        let offset = dot(dx, &grad[..inst.n]);
        feasible.add_ineq(grad[inst.n..].to_vec(), -offset);
    }
    let objective = inst.f_values(z)?;
    let lp = LpProblem {
        objective: objective.clone(),
        sense: Sense::Min,
        feasible: feasible.clone(),
    };
    Ok(match solve_lp(&lp) {
        LpSolution::Optimal(opt) => DualLpOutcome::Optimal {
            face: feasible.with_eq(objective, opt.value.clone()),
            value: opt.value,
        },
        LpSolution::Infeasible => DualLpOutcome::Infeasible,
        LpSolution::Unbounded => DualLpOutcome::Unbounded,
    })
}

/// Exhaustive face enumeration for AVI(q, M, K). For each subset of K's
/// inequality rows forced active, the stationarity condition
/// -(q + M dy) in cone(active normals) + span(equality normals)
/// is converted to H-form via dual-cone enumeration, verified together
/// with primal feasibility, and emitted as one affine piece.
pub fn solve_avi(p: &AviProblem) -> Result<SolutionSetDescription, ConesError> {
    let dim = p.k_set.dim();
    assert_eq!(p.q.len(), dim, "q width mismatch");
    assert_eq!(p.m_matrix.rows(), dim, "M row mismatch");
    assert_eq!(p.m_matrix.cols(), dim, "M column mismatch");
    let n_ineq = p.k_set.ineqs().len();
    if n_ineq > MAX_AVI_INEQS {
        return Err(ConesError::FaceLimit {
            got: n_ineq,
            cap: MAX_AVI_INEQS,
        });
    }
    let eq_normals: Vec<Vec<Rat>> = p.k_set.eqs().iter().map(|r| r.coeffs.clone()).collect();
    let mut pieces: Vec<SolutionPiece> = Vec::new();
    for k in 0..=n_ineq {
        for subset in (0..n_ineq).combinations(k) {
            let rays: Vec<Vec<Rat>> = subset
                .iter()
                .map(|&i| p.k_set.ineqs()[i].coeffs.clone())
                .collect();
            let normal_cone = cone_from_generators(dim, &rays, &eq_normals)?;
            let mut piece = Polyhedron::whole_space(dim);
            for row in p.k_set.eqs() {
                piece.add_eq(row.coeffs.clone(), row.rhs.clone());
            }
            for (i, row) in p.k_set.ineqs().iter().enumerate() {
                if subset.contains(&i) {
                    piece.add_eq(row.coeffs.clone(), row.rhs.clone());
                } else {
                    piece.add_ineq(row.coeffs.clone(), row.rhs.clone());
                }
            }
            // q + M dy must lie in -C_S: h.(q + M dy) >= 0 on facet
            // normals h, and = 0 on the lineality normals.
            for h in normal_cone.ineqs() {
                let coeffs = neg_vec(&p.m_matrix.vec_mul(h));
                piece.add_ineq(coeffs, dot(h, &p.q));
            }
            for h in normal_cone.eqs() {
                let coeffs = p.m_matrix.vec_mul(h);
                piece.add_eq(coeffs, -dot(h, &p.q));
            }
            if piece.is_empty() {
                continue;
            }
            let mut duplicate = false;
            for existing in &pieces {
                if poly_set_equal(&existing.piece, &piece)? {
                    duplicate = true;
                    break;
                }
            }
            if !duplicate {
                pieces.push(SolutionPiece {
                    active_pattern: subset,
                    piece,
                });
            }
        }
    }
    Ok(SolutionSetDescription { dim, pieces })
}

/// The set-valued linearization map LS_(z,lambda)(dx): the AVI with
/// q = grad_x L . dx, M = grad_y L, K = K(z, lambda; dx).
pub fn linearization_map(
    inst: &MpecInstance,
    z: &EvalPoint,
    lambda: &[Rat],
    dx: &[Rat],
) -> Result<SolutionSetDescription, ConesError> {
    let (jx, jy) = vi_lagrangian_jacobians(inst, z, lambda)?;
    let q = jx.mul_vec(dx);
    let k_set = directional_critical_set(inst, z, lambda, dx)?;
    solve_avi(&AviProblem {
        q,
        m_matrix: jy,
        k_set,
    })
}

/// Tangent cone of the polyhedral upper-level set Z at z; the whole
/// space when no Z block is present.
pub fn upper_tangent_cone(
    inst: &MpecInstance,
    z: &EvalPoint,
) -> Result<PolyhedralCone, ConesError> {
    inst.check_point(z)?;
    match &inst.upper_set {
        None => Ok(PolyhedralCone::whole_space(inst.dim())),
        Some(p) => Ok(p.tangent_cone_at(&z.as_vec())?),
    }
}

/// MPEC linearized cone over the supplied multiplier list: the union of
/// the graphs of the linearization maps, each assembled with dx symbolic
/// and intersected with the tangent cone of Z.
pub fn linearized_cone(
    inst: &MpecInstance,
    z: &EvalPoint,
    multipliers: &[Vec<Rat>],
) -> Result<ConeUnion, ConesError> {
    let dim = inst.dim();
    let t_z = upper_tangent_cone(inst, z)?;
    let zv = z.as_vec();
    let sets = active_sets(inst, z)?;
    let mut pieces: Vec<PolyhedralCone> = Vec::new();
    for lambda in multipliers {
        require_lambda_in_m(inst, z, lambda)?;
        let (jx, jy) = vi_lagrangian_jacobians(inst, z, lambda)?;
        let mut i_zero = Vec::new();
        let mut i_plus = Vec::new();
        for &i in &sets.active {
            if lambda[i].is_positive() {
                i_plus.push(i);
            } else {
                i_zero.push(i);
            }
        }
        if i_zero.len() > MAX_AVI_INEQS {
            return Err(ConesError::FaceLimit {
                got: i_zero.len(),
                cap: MAX_AVI_INEQS,
            });
        }
        let full_grad = |i: usize| inst.vi_constraints[i].gradient_at(&zv);
        let y_grad = |i: usize| -> Result<Vec<Rat>, ExprError> {
            Ok(full_grad(i)?[inst.n..].to_vec())
        };
        let lineality: Vec<Vec<Rat>> = i_plus
            .iter()
            .map(|&i| y_grad(i))
            .collect::<Result<_, _>>()?;
        for k in 0..=i_zero.len() {
            for subset in i_zero.iter().copied().combinations(k) {
                let rays: Vec<Vec<Rat>> = subset
                    .iter()
                    .map(|&i| y_grad(i))
                    .collect::<Result<_, _>>()?;
                let normal_cone = cone_from_generators(inst.m, &rays, &lineality)?;
                let mut piece = PolyhedralCone::whole_space(dim);
                for &i in &i_plus {
                    piece.add_eq(full_grad(i)?);
                }
                for &i in &i_zero {
                    if subset.contains(&i) {
                        piece.add_eq(full_grad(i)?);
                    } else {
                        piece.add_ineq(full_grad(i)?);
                    }
                }
                // Stationarity rows jointly in (dx, dy):
                // h.(grad_x L dx + grad_y L dy) >= 0 on facet normals,
                // = 0 on lineality normals of the face's normal cone.
                for h in normal_cone.ineqs() {
                    let mut row = neg_vec(&jx.vec_mul(h));
                    row.extend(neg_vec(&jy.vec_mul(h)));
                    piece.add_ineq(row);
                }
                for h in normal_cone.eqs() {
                    let mut row = jx.vec_mul(h);
                    row.extend(jy.vec_mul(h));
                    piece.add_eq(row);
                }
                pieces.push(piece.intersect(&t_z));
            }
        }
    }
    Ok(ConeUnion::new(dim, pieces).normalized()?)
}

#[derive(Debug, Clone)]
pub struct MembershipWitness {
    pub member: bool,
    /// The multiplier from the candidate list whose linearization map
    /// contains the direction, when membership holds.
    pub witness: Option<Vec<Rat>>,
}

/// Membership of dz in the linearized cone restricted to the supplied
/// multiplier list: dz must lie in T(z;Z) and its dy part must solve the
/// linearization AVI of some listed multiplier at dx.
pub fn linearized_cone_member(
    inst: &MpecInstance,
    z: &EvalPoint,
    dz: &[Rat],
    multipliers: &[Vec<Rat>],
) -> Result<MembershipWitness, ConesError> {
    if dz.len() != inst.dim() {
        return Err(ConesError::DirectionLength {
            expected: inst.dim(),
            got: dz.len(),
        });
    }
    let t_z = upper_tangent_cone(inst, z)?;
    if !t_z.member(dz)? {
        return Ok(MembershipWitness {
            member: false,
            witness: None,
        });
    }
    let dx = &dz[..inst.n];
    let dy = &dz[inst.n..];
    for lambda in multipliers {
        require_lambda_in_m(inst, z, lambda)?;
        if solves_linearization_avi(inst, z, lambda, dx, dy)? {
            return Ok(MembershipWitness {
                member: true,
                witness: Some(lambda.clone()),
            });
        }
    }
    Ok(MembershipWitness {
        member: false,
        witness: None,
    })
}

/// Direct AVI solution test at a concrete point: dy in K and
/// -(q + M dy) in the normal cone of K at dy.
fn solves_linearization_avi(
    inst: &MpecInstance,
    z: &EvalPoint,
    lambda: &[Rat],
    dx: &[Rat],
    dy: &[Rat],
) -> Result<bool, ConesError> {
    let k_set = directional_critical_set(inst, z, lambda, dx)?;
    if !k_set.member(dy)? {
        return Ok(false);
    }
    let (jx, jy) = vi_lagrangian_jacobians(inst, z, lambda)?;
    let mut w = jx.mul_vec(dx);
    let my = jy.mul_vec(dy);
    for (wi, mi) in w.iter_mut().zip(my) {
        *wi = &*wi + &mi;
    }
    // Normal cone of K at dy, generated by active inequality normals
    // plus the equality normals' span.
    let active = k_set.active_ineq_indices(dy)?;
    let rays: Vec<Vec<Rat>> = active
        .iter()
        .map(|&i| k_set.ineqs()[i].coeffs.clone())
        .collect();
    let lineality: Vec<Vec<Rat>> = k_set.eqs().iter().map(|r| r.coeffs.clone()).collect();
    let normal_cone = cone_from_generators(inst.m, &rays, &lineality)?;
    normal_cone.member(&neg_vec(&w)).map_err(ConesError::from)
}

/// Finite candidate list used for linearized-cone membership at a given
/// dx: the extreme points of M(z) plus the vertices of the critical face
/// M^c(z; dx).
pub fn membership_candidates(
    inst: &MpecInstance,
    z: &EvalPoint,
    dx: &[Rat],
) -> Result<Vec<Vec<Rat>>, ConesError> {
    let ma = multiplier_set(inst, z)?;
    if ma.is_empty {
        return Ok(Vec::new());
    }
    let mut candidates = ma.extreme_points.clone();
    let critical = critical_multipliers(inst, z, dx)?;
    for v in enumerate_vertices(&critical.face)?.vertices {
        if !candidates.contains(&v) {
            candidates.push(v);
        }
    }
    candidates.sort();
    Ok(candidates)
}
