//! The lower-level multiplier polyhedron M(z), its extreme points, and
//! the point-checkable constraint qualifications.
//!
//! M(z) = {lambda : sum_i lambda_i grad_y g_i(z) = -F(z), lambda >= 0,
//! lambda_i = 0 for inactive i}. Inactive components are pinned by
//! explicit equalities so the polyhedron lives in R^l with the paper's
//! index bookkeeping intact.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::expr::{jacobian, ExprError};
use crate::instance::{active_sets, EvalPoint, InstanceError, MpecInstance};
use crate::polyhedra::{
    enumerate_extreme_rays, enumerate_vertices, solve_lp, LpProblem, LpSolution, PolyhedraError,
    Polyhedron, Sense,
};
use crate::rat::{rat, Rat};

#[derive(Debug, Error)]
pub enum MultipliersError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Polyhedra(#[from] PolyhedraError),
}

/// Tri-state verdict for a constraint qualification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CqFlag {
    Holds,
    Fails,
    NotApplicable,
}

impl CqFlag {
    pub fn holds(&self) -> bool {
        matches!(self, CqFlag::Holds)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CqFlag::Holds => "holds",
            CqFlag::Fails => "fails",
            CqFlag::NotApplicable => "not applicable",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MultiplierAnalysis {
    /// M(z) in R^l, with explicit equalities lambda_i = 0 for inactive i.
    pub set: Polyhedron,
    /// Exactly M^e(z), cached.
    pub extreme_points: Vec<Vec<Rat>>,
    pub is_empty: bool,
    pub is_singleton: bool,
    pub licq: CqFlag,
    pub mfcq: CqFlag,
    pub smfcq: CqFlag,
    pub strongly_nondegenerate: CqFlag,
}

/// The H-representation of M(z) alone, without any derived analysis.
pub fn multiplier_polyhedron(
    inst: &MpecInstance,
    z: &EvalPoint,
) -> Result<Polyhedron, MultipliersError> {
    inst.check_point(z)?;
    let zv = z.as_vec();
    let sets = active_sets(inst, z)?;
    let f_vals = inst.f_values(z)?;
    // Rows of grad_y g: l x m; column i of its transpose multiplies lambda_i.
    let jac = jacobian(&inst.vi_constraints, inst.n..inst.n + inst.m, &zv)?;
    let mut p = Polyhedron::whole_space(inst.l);
    for k in 0..inst.m {
        let coeffs: Vec<Rat> = (0..inst.l).map(|i| jac.at(i, k).clone()).collect();
        p.add_eq(coeffs, -&f_vals[k]);
    }
    for i in 0..inst.l {
        let mut row = vec![Rat::zero(); inst.l];
        row[i] = rat(-1);
        p.add_ineq(row, Rat::zero());
    }
    for i in 0..inst.l {
        if !sets.active.contains(&i) {
            let mut row = vec![Rat::zero(); inst.l];
            row[i] = rat(1);
            p.add_eq(row, Rat::zero());
        }
    }
    Ok(p)
}

/// Full multiplier analysis: the polyhedron, extreme points, emptiness
/// and singleton structure, and all point-checkable CQ flags.
pub fn multiplier_set(
    inst: &MpecInstance,
    z: &EvalPoint,
) -> Result<MultiplierAnalysis, MultipliersError> {
    let set = multiplier_polyhedron(inst, z)?;
    let is_empty = set.is_empty();
    let extreme_points = if is_empty {
        Vec::new()
    } else {
        enumerate_vertices(&set)?.vertices
    };
    let recession = enumerate_extreme_rays(&set.recession_cone())?;
    let is_singleton =
        !is_empty && extreme_points.len() == 1 && recession.rays.is_empty() && recession.lineality.is_empty();
    let licq = check_licq(inst, z)?;
    let mfcq = check_mfcq(inst, z)?;
    let smfcq = if is_singleton { CqFlag::Holds } else { CqFlag::Fails };
    let strongly_nondegenerate =
        strong_nondegeneracy_from_parts(inst, z, licq, is_singleton, &extreme_points)?;
    Ok(MultiplierAnalysis {
        set,
        extreme_points,
        is_empty,
        is_singleton,
        licq,
        mfcq,
        smfcq,
        strongly_nondegenerate,
    })
}

/// Exactly M^e(z); empty when M(z) is empty.
pub fn extreme_multipliers(ma: &MultiplierAnalysis) -> &[Vec<Rat>] {
    &ma.extreme_points
}

/// LICQ: the active gradients {grad_y g_i(z) : i in I(z)} have rank
/// |I(z)|. Holds vacuously with no active constraints.
pub fn check_licq(inst: &MpecInstance, z: &EvalPoint) -> Result<CqFlag, MultipliersError> {
    let sets = active_sets(inst, z)?;
    if sets.active.is_empty() {
        return Ok(CqFlag::Holds);
    }
    let zv = z.as_vec();
    let active_g: Vec<_> = sets
        .active
        .iter()
        .map(|&i| inst.vi_constraints[i].clone())
        .collect();
    let jac = jacobian(&active_g, inst.n..inst.n + inst.m, &zv)?;
    if crate::polyhedra::matrix_rank(&jac) == sets.active.len() {
        Ok(CqFlag::Holds)
    } else {
        Ok(CqFlag::Fails)
    }
}

/// MFCQ: existence of d with grad_y g_i(z).d < 0 for every active i,
/// decided by the LP max t s.t. grad_y g_i.d + t <= 0, t <= 1.
pub fn check_mfcq(inst: &MpecInstance, z: &EvalPoint) -> Result<CqFlag, MultipliersError> {
    let sets = active_sets(inst, z)?;
    if sets.active.is_empty() {
        return Ok(CqFlag::Holds);
    }
    let zv = z.as_vec();
    // Variables (d_1..d_m, t).
    let mut p = Polyhedron::whole_space(inst.m + 1);
    for &i in &sets.active {
        let mut row = inst.vi_constraints[i]
            .gradient_at(&zv)
            .map_err(MultipliersError::Expr)?[inst.n..]
            .to_vec();
        row.push(rat(1));
        p.add_ineq(row, Rat::zero());
    }
    let mut t_cap = vec![Rat::zero(); inst.m + 1];
    t_cap[inst.m] = rat(1);
    p.add_ineq(t_cap, rat(1));
    let mut objective = vec![Rat::zero(); inst.m + 1];
    objective[inst.m] = rat(1);
    let lp = LpProblem {
        objective,
        sense: Sense::Max,
        feasible: p,
    };
    match solve_lp(&lp) {
        LpSolution::Optimal(opt) if opt.value.is_positive() => Ok(CqFlag::Holds),
        _ => Ok(CqFlag::Fails),
    }
}

/// SMFCQ: M(z) is a singleton.
pub fn check_smfcq(inst: &MpecInstance, z: &EvalPoint) -> Result<CqFlag, MultipliersError> {
    Ok(multiplier_set(inst, z)?.smfcq)
}

/// Strong nondegeneracy: LICQ (which forces M(z) to be at most a
/// singleton) with a valid multiplier, and strict complementarity read
/// componentwise as lambda_i - g_i(z) > 0 for every i.
pub fn check_strong_nondegeneracy(
    inst: &MpecInstance,
    z: &EvalPoint,
) -> Result<CqFlag, MultipliersError> {
    Ok(multiplier_set(inst, z)?.strongly_nondegenerate)
}

fn strong_nondegeneracy_from_parts(
    inst: &MpecInstance,
    z: &EvalPoint,
    licq: CqFlag,
    is_singleton: bool,
    extreme_points: &[Vec<Rat>],
) -> Result<CqFlag, MultipliersError> {
    if !licq.holds() || !is_singleton {
        return Ok(CqFlag::Fails);
    }
    let lambda = &extreme_points[0];
    let g_vals = inst.g_values(z)?;
    let strict = (0..inst.l).all(|i| (&lambda[i] - &g_vals[i]).is_positive());
    Ok(if strict { CqFlag::Holds } else { CqFlag::Fails })
}
