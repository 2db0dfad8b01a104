//! Primal stationarity over cone unions, the disjunctive primal-dual
//! systems with their NCP specialization, and the KKT reformulation of
//! the lower-level equilibrium.
//!
//! The primal-dual system for a multiplier lambda and a partition
//! (alpha, alpha_bar) of I_0(z, lambda) is linear in (zeta, eta, pi) and
//! is solved as an exact feasibility LP. Complementarity of zeta with
//! the upper-level rows is imposed as zeta_j = 0 on strictly inactive
//! rows, which is unambiguous under exact arithmetic.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::cones::{vi_lagrangian_jacobians, ConesError};
use crate::expr::{ExprError, PolyExpr};
use crate::instance::{active_sets, EvalPoint, InstanceError, MpecInstance};
use crate::multipliers::{multiplier_polyhedron, MultipliersError};
use crate::polyhedra::{
    enumerate_extreme_rays, solve_lp, squared_distance_to_union, ConeUnion, LpProblem,
    LpSolution, PolyhedraError, Polyhedron, PolyhedralCone, Sense,
};
use crate::rat::{dot, neg_vec, norm_sq, rat, Rat};

/// Cap on the number of disjunctive systems per multiplier (2^20).
pub const MAX_PARTITION_BITS: usize = 20;

#[derive(Debug, Error)]
pub enum StationarityError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Polyhedra(#[from] PolyhedraError),
    #[error(transparent)]
    Cones(#[from] ConesError),
    #[error(transparent)]
    Multipliers(#[from] MultipliersError),
    #[error("multiplier is not a member of M(z)")]
    LambdaNotInMultiplierSet,
    #[error("alpha must be a subset of I_0(z, lambda)")]
    AlphaNotInIZero,
    #[error("degenerate index set has {got} elements; partition cap is 2^{cap}")]
    PartitionLimit { got: usize, cap: usize },
    #[error("alpha^2 must dominate |grad f|^2 for the distance condition")]
    AlphaTooSmall,
    #[error("operation requires an NCP-form instance")]
    NotNcpForm,
    #[error("subset is not contained in the degenerate index set beta(z)")]
    SubsetNotInBeta,
    #[error("point is not feasible for the reformulated NLP")]
    InfeasibleNlpPoint,
}

// ---------------------------------------------------------------------
// Primal stationarity
// ---------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct PrimalVerdict {
    pub stationary: bool,
    /// A direction d in the cone with grad f(z).d < 0 when not stationary.
    pub counterexample: Option<Vec<Rat>>,
}

/// Checks grad f(z).d >= 0 over a union of polyhedral cones by testing
/// every extreme ray (>= 0) and lineality generator (= 0) of each piece.
pub fn primal_stationarity(
    inst: &MpecInstance,
    z: &EvalPoint,
    cone: &ConeUnion,
) -> Result<PrimalVerdict, StationarityError> {
    inst.check_point(z)?;
    let grad = inst.objective.gradient_at(&z.as_vec())?;
    for piece in cone.pieces() {
        let gens = enumerate_extreme_rays(piece)?;
        for r in &gens.rays {
            if dot(&grad, r).is_negative() {
                return Ok(PrimalVerdict {
                    stationary: false,
                    counterexample: Some(r.clone()),
                });
            }
        }
        for l in &gens.lineality {
            let inner = dot(&grad, l);
            if !inner.is_zero() {
                let bad = if inner.is_negative() { l.clone() } else { neg_vec(l) };
                return Ok(PrimalVerdict {
                    stationary: false,
                    counterexample: Some(bad),
                });
            }
        }
    }
    Ok(PrimalVerdict {
        stationary: true,
        counterexample: None,
    })
}

/// The distance-form stationarity condition
/// grad f(z).dz + alpha * dist(dz, cone) >= 0,
/// verified by sign analysis on squares so no square root is ever
/// materialized. Requires alpha^2 >= |grad f(z)|^2.
pub fn distance_condition_check(
    inst: &MpecInstance,
    z: &EvalPoint,
    cone: &ConeUnion,
    dz: &[Rat],
    alpha: &Rat,
) -> Result<bool, StationarityError> {
    inst.check_point(z)?;
    let grad = inst.objective.gradient_at(&z.as_vec())?;
    if &(alpha * alpha) < &norm_sq(&grad) {
        return Err(StationarityError::AlphaTooSmall);
    }
    let s = dot(&grad, dz);
    if !s.is_negative() {
        return Ok(true);
    }
    // s < 0: the condition reads alpha * sqrt(d2) >= -s > 0, which for
    // alpha >= 0 is equivalent to alpha^2 d2 >= s^2.
    let d2 = squared_distance_to_union(dz, cone)?;
    Ok(alpha * alpha * d2 >= &s * &s)
}

// ---------------------------------------------------------------------
// Primal-dual systems
// ---------------------------------------------------------------------

/// A multiplier with a partition of its degenerate index set
/// I_0(z, lambda) = {i active : lambda_i = 0} into (alpha, alpha_bar);
/// i_plus collects the strictly positive indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexPartition {
    pub lambda: Vec<Rat>,
    pub alpha: Vec<usize>,
    pub alpha_bar: Vec<usize>,
    pub i_plus: Vec<usize>,
}

/// Builds the partition for `alpha_subset` of I_0(z, lambda).
pub fn make_partition(
    inst: &MpecInstance,
    z: &EvalPoint,
    lambda: &[Rat],
    alpha_subset: &[usize],
) -> Result<IndexPartition, StationarityError> {
    let m_poly = multiplier_polyhedron(inst, z)?;
    if !m_poly.member(lambda)? {
        return Err(StationarityError::LambdaNotInMultiplierSet);
    }
    let sets = active_sets(inst, z)?;
    let mut i_zero = Vec::new();
    let mut i_plus = Vec::new();
    for &i in &sets.active {
        if lambda[i].is_positive() {
            i_plus.push(i);
        } else {
            i_zero.push(i);
        }
    }
    if !alpha_subset.iter().all(|i| i_zero.contains(i)) {
        return Err(StationarityError::AlphaNotInIZero);
    }
    let mut alpha: Vec<usize> = alpha_subset.to_vec();
    alpha.sort_unstable();
    alpha.dedup();
    let alpha_bar: Vec<usize> = i_zero
        .iter()
        .copied()
        .filter(|i| !alpha.contains(i))
        .collect();
    Ok(IndexPartition {
        lambda: lambda.to_vec(),
        alpha,
        alpha_bar,
        i_plus,
    })
}

/// Multipliers solving one disjunctive system exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StationarityCertificate {
    /// One entry per upper-level row (zero on inactive rows).
    pub zeta: Vec<Rat>,
    /// One entry per lower-level constraint (zero on inactive rows).
    pub eta: Vec<Rat>,
    pub pi: Vec<Rat>,
}

struct PdSystem {
    feasible: Polyhedron,
    z_active: Vec<usize>,
    active: Vec<usize>,
    n_z_rows: usize,
}

/// Assembles the linear system of the primal-dual characterization for
/// one (lambda, alpha, alpha_bar) choice. Variables are the active
/// zetas, the active etas and pi; pinned-zero components are excluded
/// and restored on extraction.
fn build_pd_system(
    inst: &MpecInstance,
    z: &EvalPoint,
    p: &IndexPartition,
) -> Result<PdSystem, StationarityError> {
    let zv = z.as_vec();
    let sets = active_sets(inst, z)?;
    let active = sets.active.clone();
    let (jx, jy) = vi_lagrangian_jacobians(inst, z, &p.lambda)?;
    let grad_f = inst.objective.gradient_at(&zv)?;
    let g_grads: Vec<Vec<Rat>> = inst
        .vi_constraints
        .iter()
        .map(|g| g.gradient_at(&zv))
        .collect::<Result<_, _>>()?;

    let (z_active, z_rows, n_z_rows) = match &inst.upper_set {
        None => (Vec::new(), Vec::new(), 0),
        Some(up) => {
            let act = up.active_ineq_indices(&zv)?;
            let rows: Vec<Vec<Rat>> = act.iter().map(|&j| up.ineqs()[j].coeffs.clone()).collect();
            (act, rows, up.ineqs().len())
        }
    };

    let s_act = z_active.len();
    let n_eta = active.len();
    let dim = s_act + n_eta + inst.m;
    let mut sys = Polyhedron::whole_space(dim);

    // Stationarity equations over x then y:
    //   grad f + (G|H)^T zeta + grad g^T eta - grad L^T pi = 0.
    for k in 0..inst.dim() {
        let mut row = Vec::with_capacity(dim);
        for zr in &z_rows {
            row.push(zr[k].clone());
        }
        for &i in &active {
            row.push(g_grads[i][k].clone());
        }
        for pcol in 0..inst.m {
            let entry = if k < inst.n {
                jx.at(pcol, k).clone()
            } else {
                jy.at(pcol, k - inst.n).clone()
            };
            row.push(-entry);
        }
        sys.add_eq(row, -&grad_f[k]);
    }
    // zeta >= 0 on active upper-level rows.
    for j in 0..s_act {
        let mut row = vec![Rat::zero(); dim];
        row[j] = rat(-1);
        sys.add_ineq(row, Rat::zero());
    }
    // eta_i >= 0 on alpha_bar.
    for (pos, &i) in active.iter().enumerate() {
        if p.alpha_bar.contains(&i) {
            let mut row = vec![Rat::zero(); dim];
            row[s_act + pos] = rat(-1);
            sys.add_ineq(row, Rat::zero());
        }
    }
    // pi . grad_y g_i <= 0 on alpha, = 0 on i_plus.
    for &i in p.alpha.iter() {
        let mut row = vec![Rat::zero(); dim];
        for k in 0..inst.m {
            row[s_act + n_eta + k] = g_grads[i][inst.n + k].clone();
        }
        sys.add_ineq(row, Rat::zero());
    }
    for &i in p.i_plus.iter() {
        let mut row = vec![Rat::zero(); dim];
        for k in 0..inst.m {
            row[s_act + n_eta + k] = g_grads[i][inst.n + k].clone();
        }
        sys.add_eq(row, Rat::zero());
    }
    Ok(PdSystem {
        feasible: sys,
        z_active,
        active,
        n_z_rows,
    })
}

/// Solves the disjunctive system for one partition; None is the honest
/// "this system is infeasible" outcome.
pub fn solve_pd_system(
    inst: &MpecInstance,
    z: &EvalPoint,
    partition: &IndexPartition,
) -> Result<Option<StationarityCertificate>, StationarityError> {
    let sys = build_pd_system(inst, z, partition)?;
    let lp = LpProblem {
        objective: vec![Rat::zero(); sys.feasible.dim()],
        sense: Sense::Min,
        feasible: sys.feasible.clone(),
    };
    match solve_lp(&lp) {
        LpSolution::Optimal(opt) => {
            let s_act = sys.z_active.len();
            let mut zeta = vec![Rat::zero(); sys.n_z_rows];
            for (pos, &j) in sys.z_active.iter().enumerate() {
                zeta[j] = opt.point[pos].clone();
            }
            let mut eta = vec![Rat::zero(); inst.l];
            for (pos, &i) in sys.active.iter().enumerate() {
                eta[i] = opt.point[s_act + pos].clone();
            }
            let pi = opt.point[s_act + sys.active.len()..].to_vec();
            Ok(Some(StationarityCertificate { zeta, eta, pi }))
        }
        LpSolution::Infeasible => Ok(None),
        LpSolution::Unbounded => unreachable!("feasibility LP with zero objective"),
    }
}

/// Re-checks every line of the system exactly for a given certificate.
pub fn certificate_satisfies(
    inst: &MpecInstance,
    z: &EvalPoint,
    partition: &IndexPartition,
    cert: &StationarityCertificate,
) -> Result<bool, StationarityError> {
    let zv = z.as_vec();
    let sets = active_sets(inst, z)?;
    let (jx, jy) = vi_lagrangian_jacobians(inst, z, &partition.lambda)?;
    let grad_f = inst.objective.gradient_at(&zv)?;
    if cert.pi.len() != inst.m || cert.eta.len() != inst.l {
        return Ok(false);
    }
    match &inst.upper_set {
        None => {
            if !cert.zeta.is_empty() {
                return Ok(false);
            }
        }
        Some(up) => {
            if cert.zeta.len() != up.ineqs().len() {
                return Ok(false);
            }
            for (j, row) in up.ineqs().iter().enumerate() {
                if cert.zeta[j].is_negative() {
                    return Ok(false);
                }
                let slack = &row.rhs - &dot(&row.coeffs, &zv);
                if !(&cert.zeta[j] * &slack).is_zero() {
                    return Ok(false);
                }
            }
        }
    }
    let g_grads: Vec<Vec<Rat>> = inst
        .vi_constraints
        .iter()
        .map(|g| g.gradient_at(&zv))
        .collect::<Result<_, _>>()?;
    for k in 0..inst.dim() {
        let mut lhs = grad_f[k].clone();
        if let Some(up) = &inst.upper_set {
            for (j, row) in up.ineqs().iter().enumerate() {
                lhs += &cert.zeta[j] * &row.coeffs[k];
            }
        }
        for i in 0..inst.l {
            lhs += &cert.eta[i] * &g_grads[i][k];
        }
        for p in 0..inst.m {
            let entry = if k < inst.n {
                jx.at(p, k)
            } else {
                jy.at(p, k - inst.n)
            };
            lhs -= &cert.pi[p] * entry;
        }
        if !lhs.is_zero() {
            return Ok(false);
        }
    }
    for i in 0..inst.l {
        if !sets.active.contains(&i) && !cert.eta[i].is_zero() {
            return Ok(false);
        }
    }
    for &i in &partition.alpha_bar {
        if cert.eta[i].is_negative() {
            return Ok(false);
        }
    }
    for &i in &partition.alpha {
        let v = dot(&cert.pi, &g_grads[i][inst.n..]);
        if v.is_positive() {
            return Ok(false);
        }
    }
    for &i in &partition.i_plus {
        let v = dot(&cert.pi, &g_grads[i][inst.n..]);
        if !v.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PdVerdict {
    /// Every system over every listed multiplier and partition is feasible.
    Stationary,
    NotStationary,
    /// No multiplier was supplied (M(z) empty): the primal-dual test does
    /// not apply.
    NoMultiplier,
}

#[derive(Debug, Clone)]
pub struct PartitionOutcome {
    pub partition: IndexPartition,
    pub certificate: Option<StationarityCertificate>,
}

#[derive(Debug, Clone)]
pub struct PdStationarityReport {
    pub verdict: PdVerdict,
    pub outcomes: Vec<PartitionOutcome>,
}

/// Iterates every listed multiplier and every partition of its
/// degenerate index set (lexicographic subset order); the stationary
/// verdict requires every system to be feasible.
pub fn full_pd_stationarity(
    inst: &MpecInstance,
    z: &EvalPoint,
    multipliers: &[Vec<Rat>],
) -> Result<PdStationarityReport, StationarityError> {
    if multipliers.is_empty() {
        return Ok(PdStationarityReport {
            verdict: PdVerdict::NoMultiplier,
            outcomes: Vec::new(),
        });
    }
    let mut outcomes = Vec::new();
    let mut all_feasible = true;
    for lambda in multipliers {
        let base = make_partition(inst, z, lambda, &[])?;
        let i_zero: Vec<usize> = base.alpha_bar.clone();
        if i_zero.len() > MAX_PARTITION_BITS {
            return Err(StationarityError::PartitionLimit {
                got: i_zero.len(),
                cap: MAX_PARTITION_BITS,
            });
        }
        for mask in 0u32..(1u32 << i_zero.len()) {
            let alpha: Vec<usize> = i_zero
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask & (1 << bit) != 0)
                .map(|(_, &i)| i)
                .collect();
            let partition = make_partition(inst, z, lambda, &alpha)?;
            let certificate = solve_pd_system(inst, z, &partition)?;
            if certificate.is_none() {
                all_feasible = false;
            }
            outcomes.push(PartitionOutcome {
                partition,
                certificate,
            });
        }
    }
    Ok(PdStationarityReport {
        verdict: if all_feasible {
            PdVerdict::Stationary
        } else {
            PdVerdict::NotStationary
        },
        outcomes,
    })
}

/// The NCP specialization: with g = -y and lambda = F(z), partitions of
/// I_0 correspond bijectively to subsets of the degenerate set beta(z).
/// The chosen subset becomes alpha; the rest of beta becomes alpha_bar.
pub fn ncp_index_systems(
    inst: &MpecInstance,
    z: &EvalPoint,
    beta_subset: &[usize],
) -> Result<PartitionOutcome, StationarityError> {
    if !inst.ncp_form {
        return Err(StationarityError::NotNcpForm);
    }
    let sets = active_sets(inst, z)?;
    let ncp = sets.ncp.as_ref().ok_or(StationarityError::NotNcpForm)?;
    if !beta_subset.iter().all(|i| ncp.beta.contains(i)) {
        return Err(StationarityError::SubsetNotInBeta);
    }
    let lambda = inst.f_values(z)?;
    let partition = make_partition(inst, z, &lambda, beta_subset)?;
    let certificate = solve_pd_system(inst, z, &partition)?;
    Ok(PartitionOutcome {
        partition,
        certificate,
    })
}

// ---------------------------------------------------------------------
// KKT reformulation
// ---------------------------------------------------------------------

/// NLP over (x, y, lambda) whose complementarity structure is explicit:
/// each pair (u, v) contributes u >= 0, v >= 0, u v = 0. The lambda
/// block maps to variables y_{m+1}..y_{m+l} in the printed grammar.
#[derive(Debug, Clone)]
pub struct KktNlpInstance {
    pub n: usize,
    pub m: usize,
    /// Number of lambda variables (0 for the direct complementarity NLP).
    pub l: usize,
    pub objective: PolyExpr,
    /// Equality rows without complementarity structure (the Lagrangian
    /// rows of the KKT form, or the VI operator when l = 0).
    pub plain_equalities: Vec<PolyExpr>,
    /// Complementarity pairs (u, v): u >= 0, v >= 0, u v = 0.
    pub comp_pairs: Vec<(PolyExpr, PolyExpr)>,
    /// Extra affine inequality rows q <= 0 (upper-level Z rows).
    pub plain_inequalities: Vec<PolyExpr>,
}

impl KktNlpInstance {
    pub fn num_vars(&self) -> usize {
        self.n + self.m + self.l
    }

    pub fn arity(&self) -> (usize, usize) {
        (self.n, self.m + self.l)
    }

    /// All equality rows: the plain ones plus one product row per pair.
    pub fn all_equalities(&self) -> Vec<PolyExpr> {
        let mut rows = self.plain_equalities.clone();
        for (u, v) in &self.comp_pairs {
            rows.push(u * v);
        }
        rows
    }

    /// All inequality rows in <= 0 form: -u, -v per pair plus the plain rows.
    pub fn all_inequalities(&self) -> Vec<PolyExpr> {
        let mut rows = Vec::new();
        for (u, v) in &self.comp_pairs {
            rows.push(-u);
            rows.push(-v);
        }
        rows.extend(self.plain_inequalities.iter().cloned());
        rows
    }

    pub fn is_feasible(&self, point: &[Rat]) -> Result<bool, ExprError> {
        for h in self.all_equalities() {
            if !h.evaluate(point)?.is_zero() {
                return Ok(false);
            }
        }
        for q in self.all_inequalities() {
            if q.evaluate(point)?.is_positive() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Standard KKT reformulation of the lower-level VI: variables
/// (x, y, lambda), Lagrangian rows L(x,y,lambda) = 0, complementarity
/// pairs (lambda_i, -g_i), and the upper-level rows carried over.
pub fn kkt_reformulate(inst: &MpecInstance) -> KktNlpInstance {
    let (n, m, l) = (inst.n, inst.m, inst.l);
    let arity = (n, m + l);
    let widen = |p: &PolyExpr| p.widen(n, m + l);
    let lambda_var =
        |i: usize| PolyExpr::variable(arity, n + m + i).expect("lambda index in range");

    let mut plain_equalities = Vec::with_capacity(m);
    for k in 0..m {
        let mut row = widen(&inst.vi_operator[k]);
        for i in 0..l {
            let dgi = inst.vi_constraints[i]
                .differentiate(n + k)
                .expect("y index in range");
            row = &row + &(&widen(&dgi) * &lambda_var(i));
        }
        plain_equalities.push(row);
    }
    let comp_pairs: Vec<(PolyExpr, PolyExpr)> = (0..l)
        .map(|i| (lambda_var(i), -&widen(&inst.vi_constraints[i])))
        .collect();
    let plain_inequalities = upper_rows_as_polys(inst, arity);
    KktNlpInstance {
        n,
        m,
        l,
        objective: widen(&inst.objective),
        plain_equalities,
        comp_pairs,
        plain_inequalities,
    }
}

/// Direct complementarity NLP for an NCP-form instance: variables (x, y)
/// only, pairs (y_i, F_i). This is the KKT reformulation after
/// eliminating lambda = F, which is exact when g = -y.
pub fn complementarity_nlp(inst: &MpecInstance) -> Result<KktNlpInstance, StationarityError> {
    if !inst.ncp_form {
        return Err(StationarityError::NotNcpForm);
    }
    let arity = (inst.n, inst.m);
    let comp_pairs: Vec<(PolyExpr, PolyExpr)> = (0..inst.m)
        .map(|i| {
            let y = PolyExpr::variable(arity, inst.n + i).expect("y index in range");
            (y, inst.vi_operator[i].clone())
        })
        .collect();
    Ok(KktNlpInstance {
        n: inst.n,
        m: inst.m,
        l: 0,
        objective: inst.objective.clone(),
        plain_equalities: Vec::new(),
        comp_pairs,
        plain_inequalities: upper_rows_as_polys(inst, arity),
    })
}

fn upper_rows_as_polys(inst: &MpecInstance, arity: (usize, usize)) -> Vec<PolyExpr> {
    let Some(up) = &inst.upper_set else {
        return Vec::new();
    };
    let mut rows = Vec::new();
    for row in up.ineqs() {
        // row.coeffs . (x, y) - rhs <= 0, widened with zero lambda part.
        let mut p = PolyExpr::constant(arity, -&row.rhs);
        for (k, c) in row.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // (x, y) indices coincide in the widened arity; the lambda
            // block sits after them.
            let var = PolyExpr::variable(arity, k).expect("index in range");
            p = &p + &(&var * c);
        }
        rows.push(p);
    }
    rows
}

/// Classical linearized cone of the reformulated NLP at a feasible
/// point: gradients of active inequalities and all equalities, exact.
/// Identically-zero gradient rows impose nothing and are dropped.
pub fn nlp_linearized_cone(
    nlp: &KktNlpInstance,
    point: &[Rat],
) -> Result<PolyhedralCone, StationarityError> {
    if point.len() != nlp.num_vars() {
        return Err(StationarityError::InfeasibleNlpPoint);
    }
    if !nlp.is_feasible(point)? {
        return Err(StationarityError::InfeasibleNlpPoint);
    }
    let mut cone = PolyhedralCone::whole_space(nlp.num_vars());
    for h in nlp.all_equalities() {
        cone.add_eq(h.gradient_at(point)?);
    }
    for q in nlp.all_inequalities() {
        if q.evaluate(point)?.is_zero() {
            cone.add_ineq(q.gradient_at(point)?);
        }
    }
    Ok(cone)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::load_instance;
    use crate::polyhedra::cone_set_equal;
    use crate::rat::ratio;

    fn q7() -> (MpecInstance, EvalPoint) {
        let doc = r#"{
            "n": 1, "m": 2, "l": 2,
            "f": "x1^2+x1+2*y1+y2^2",
            "F": ["x1^2+x1+y1", "x1^3+y2"],
            "g": ["-y1", "-y2"],
            "Z": null
        }"#;
        (
            load_instance(doc).unwrap(),
            EvalPoint::new(vec![rat(0)], vec![rat(0), rat(0)]),
        )
    }

    fn q1() -> MpecInstance {
        let doc = r#"{
            "n": 1, "m": 1, "l": 1,
            "f": "0",
            "F": ["y1"],
            "g": ["-y1"],
            "Z": null
        }"#;
        load_instance(doc).unwrap()
    }

    #[test]
    fn q7_beta_one_system_admits_the_solved_certificate() {
        let (inst, z) = q7();
        let outcome = ncp_index_systems(&inst, &z, &[0]).unwrap();
        let cert = outcome.certificate.as_ref().expect("system is feasible");
        assert!(certificate_satisfies(&inst, &z, &outcome.partition, cert).unwrap());
        // The solution pair (pi1, pi2) = (1, 0) with eta = (1, 0).
        let solved = StationarityCertificate {
            zeta: vec![],
            eta: vec![rat(1), rat(0)],
            pi: vec![rat(1), rat(0)],
        };
        assert!(certificate_satisfies(&inst, &z, &outcome.partition, &solved).unwrap());
    }

    #[test]
    fn q7_all_four_partitions_feasible() {
        let (inst, z) = q7();
        let lambda = inst.f_values(&z).unwrap();
        let report = full_pd_stationarity(&inst, &z, &[lambda]).unwrap();
        assert_eq!(report.outcomes.len(), 4);
        assert!(report.outcomes.iter().all(|o| o.certificate.is_some()));
        assert_eq!(report.verdict, PdVerdict::Stationary);
    }

    #[test]
    fn empty_beta_subset_is_one_partition_extreme() {
        let (inst, z) = q7();
        let outcome = ncp_index_systems(&inst, &z, &[]).unwrap();
        assert!(outcome.partition.alpha.is_empty());
        assert_eq!(outcome.partition.alpha_bar, vec![0, 1]);
        assert!(outcome.certificate.is_some());
    }

    #[test]
    fn zero_data_admits_zero_certificate() {
        let doc = r#"{
            "n": 1, "m": 1, "l": 1,
            "f": "0",
            "F": ["y1-x1"],
            "g": ["-y1"],
            "Z": null
        }"#;
        let inst = load_instance(doc).unwrap();
        // Interior lower-level point: y = x = 1, F = 0, g = -1 < 0.
        let z = EvalPoint::new(vec![rat(1)], vec![rat(1)]);
        let partition = make_partition(&inst, &z, &[rat(0)], &[]).unwrap();
        let zero = StationarityCertificate {
            zeta: vec![],
            eta: vec![rat(0)],
            pi: vec![rat(0)],
        };
        assert!(certificate_satisfies(&inst, &z, &partition, &zero).unwrap());
        assert!(solve_pd_system(&inst, &z, &partition).unwrap().is_some());
    }

    #[test]
    fn no_multiplier_verdict() {
        let (inst, z) = q7();
        let report = full_pd_stationarity(&inst, &z, &[]).unwrap();
        assert_eq!(report.verdict, PdVerdict::NoMultiplier);
    }

    #[test]
    fn primal_stationarity_on_branch_union() {
        // grad f(0) = (1, 2, 0); rays (1,0,0) and (-1,1,0) both have
        // nonnegative inner product.
        let (inst, z) = q7();
        let mut k1 = PolyhedralCone::whole_space(3);
        k1.add_eq(vec![rat(0), rat(1), rat(0)]);
        k1.add_eq(vec![rat(0), rat(0), rat(1)]);
        k1.add_ineq(vec![rat(-1), rat(0), rat(0)]);
        let mut k2 = PolyhedralCone::whole_space(3);
        k2.add_eq(vec![rat(1), rat(1), rat(0)]);
        k2.add_eq(vec![rat(0), rat(0), rat(1)]);
        k2.add_ineq(vec![rat(1), rat(0), rat(0)]);
        let t = ConeUnion::new(3, vec![k1, k2]);
        let verdict = primal_stationarity(&inst, &z, &t).unwrap();
        assert!(verdict.stationary);
    }

    #[test]
    fn zero_gradient_is_always_stationary() {
        let inst = q1();
        let z = EvalPoint::new(vec![rat(3)], vec![rat(0)]);
        let t = ConeUnion::new(2, vec![PolyhedralCone::whole_space(2)]);
        assert!(primal_stationarity(&inst, &z, &t).unwrap().stationary);
    }

    #[test]
    fn full_space_with_nonzero_gradient_has_descent() {
        let doc = r#"{
            "n": 1, "m": 1, "l": 1,
            "f": "x1",
            "F": ["y1"],
            "g": ["-y1"],
            "Z": null
        }"#;
        let inst = load_instance(doc).unwrap();
        let z = EvalPoint::new(vec![rat(0)], vec![rat(0)]);
        let t = ConeUnion::new(2, vec![PolyhedralCone::whole_space(2)]);
        let verdict = primal_stationarity(&inst, &z, &t).unwrap();
        assert!(!verdict.stationary);
        let d = verdict.counterexample.unwrap();
        let grad = inst.objective.gradient_at(&z.as_vec()).unwrap();
        assert!(dot(&grad, &d).is_negative());
    }

    #[test]
    fn distance_condition_reduces_to_inner_product_inside() {
        let (inst, z) = q7();
        let mut k1 = PolyhedralCone::whole_space(3);
        k1.add_eq(vec![rat(0), rat(1), rat(0)]);
        k1.add_eq(vec![rat(0), rat(0), rat(1)]);
        k1.add_ineq(vec![rat(-1), rat(0), rat(0)]);
        let t = ConeUnion::new(3, vec![k1]);
        let grad = inst.objective.gradient_at(&z.as_vec()).unwrap();
        let alpha = norm_sq(&grad) + rat(1);
        // dz in the cone: distance 0, reduces to grad.dz >= 0.
        assert!(distance_condition_check(&inst, &z, &t, &[rat(1), rat(0), rat(0)], &alpha)
            .unwrap());
        // alpha below |grad f| is rejected.
        assert!(matches!(
            distance_condition_check(&inst, &z, &t, &[rat(1), rat(0), rat(0)], &ratio(1, 10)),
            Err(StationarityError::AlphaTooSmall)
        ));
    }

    #[test]
    fn kkt_reformulation_of_the_scalar_instance() {
        // F = y, g = -y: system y - lambda = 0, lambda * y = 0, y >= 0,
        // lambda >= 0 (lambda prints as y2).
        let nlp = kkt_reformulate(&q1());
        assert_eq!(nlp.l, 1);
        let arity = nlp.arity();
        assert_eq!(
            nlp.plain_equalities,
            vec![crate::expr::parse_expr("y1 - y2", arity).unwrap()]
        );
        assert_eq!(nlp.comp_pairs.len(), 1);
        let (u, v) = &nlp.comp_pairs[0];
        assert_eq!(*u, crate::expr::parse_expr("y2", arity).unwrap());
        assert_eq!(*v, crate::expr::parse_expr("y1", arity).unwrap());
    }

    #[test]
    fn kkt_reformulation_without_constraints_pins_f() {
        let doc = r#"{"n":1,"m":1,"l":0,"f":"x1","F":["y1-x1"],"g":[],"Z":null}"#;
        let inst = load_instance(doc).unwrap();
        let nlp = kkt_reformulate(&inst);
        assert_eq!(nlp.l, 0);
        assert!(nlp.comp_pairs.is_empty());
        assert_eq!(
            nlp.plain_equalities,
            vec![crate::expr::parse_expr("y1-x1", (1, 1)).unwrap()]
        );
    }

    #[test]
    fn q1_nlp_linearized_cone() {
        // At (x, 0, 0): {(a, b, c) : b = c, b >= 0}.
        let nlp = kkt_reformulate(&q1());
        let cone = nlp_linearized_cone(&nlp, &[rat(5), rat(0), rat(0)]).unwrap();
        let mut expected = PolyhedralCone::whole_space(3);
        expected.add_eq(vec![rat(0), rat(1), rat(-1)]);
        expected.add_ineq(vec![rat(0), rat(-1), rat(0)]);
        assert!(cone_set_equal(&cone, &expected).unwrap());
    }

    #[test]
    fn q3_nlp_linearized_cone() {
        let doc = r#"{
            "n": 1, "m": 2, "l": 2,
            "f": "0",
            "F": ["x1^2+x1+y1", "x1^3+y2"],
            "g": ["-y1", "-y2"],
            "Z": null
        }"#;
        let inst = load_instance(doc).unwrap();
        let nlp = complementarity_nlp(&inst).unwrap();
        let cone = nlp_linearized_cone(&nlp, &[rat(0), rat(0), rat(0)]).unwrap();
        // {(a,b,c) : a + b >= 0, b >= 0, c >= 0}
        let mut expected = PolyhedralCone::whole_space(3);
        expected.add_ineq(vec![rat(-1), rat(-1), rat(0)]);
        expected.add_ineq(vec![rat(0), rat(-1), rat(0)]);
        expected.add_ineq(vec![rat(0), rat(0), rat(-1)]);
        assert!(cone_set_equal(&cone, &expected).unwrap());
    }

    #[test]
    fn infeasible_nlp_point_rejected() {
        let nlp = kkt_reformulate(&q1());
        assert!(matches!(
            nlp_linearized_cone(&nlp, &[rat(0), rat(1), rat(0)]),
            Err(StationarityError::InfeasibleNlpPoint)
        ));
    }
}
