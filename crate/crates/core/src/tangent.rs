//! Exact tangent cones of complementarity-constrained feasible sets by
//! branch enumeration, a floating sampling oracle, convex hulls of cone
//! unions, and the tangent-vs-linearized constraint-qualification check.
//!
//! A complementarity system splits into one smooth branch per subset of
//! pairs. Each branch is analyzed at the point through two exact routes
//! before any heuristic: variables that the branch equalities pin as
//! polynomial graphs are eliminated, and when one free variable remains
//! the branch is a curve whose tangent side is decided by univariate
//! leading-term signs. Otherwise the branch is linearized; the
//! linearization always contains the branch tangent cone and is
//! certified equal to it only for exactly-polyhedral rows or under the
//! gradient-independence (LICQ) test.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cones::{linearized_cone, ConesError};
use crate::expr::{ExprError, PolyExpr};
use crate::instance::{EvalPoint, InstanceError, MpecInstance};
use crate::multipliers::{multiplier_set, MultipliersError};
use crate::polyhedra::linalg::rank_of_rows;
use crate::polyhedra::{
    cone_from_generators, cone_union_equal, enumerate_extreme_rays, ConeUnion, PolyhedraError,
    PolyhedralCone,
};
use crate::rat::{neg_vec, rat_to_f64, Rat};
use crate::stationarity::{kkt_reformulate, KktNlpInstance};

#[derive(Debug, Error)]
pub enum TangentError {
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
    #[error("instance is not in the supported structural class for exact tangent cones")]
    UnsupportedStructure,
    #[error("point is infeasible for the branch system")]
    InfeasibleBranchPoint,
}

/// One smooth branch of a complementarity system: forced equalities,
/// kept inequalities, and the label saying which pairs took which side.
#[derive(Debug, Clone)]
pub struct BranchSystem {
    /// Number of variables of the ambient space.
    pub dim: usize,
    pub equalities: Vec<PolyExpr>,
    pub inequalities: Vec<PolyExpr>,
    /// Pair indices forced to the first-component-zero side
    /// (y_i = 0 for NCP branches, lambda_i = 0 for KKT branches).
    pub first_zero: Vec<usize>,
}

/// Branches of an NCP-form instance: one per subset S of pairs, with
/// y_i = 0 on S and F_i = 0 off S, plus the upper-level rows. Branches
/// whose forced equalities fail at the point are pruned.
pub fn enumerate_branches(
    inst: &MpecInstance,
    z: &EvalPoint,
) -> Result<Vec<BranchSystem>, TangentError> {
    if !inst.ncp_form {
        return Err(TangentError::UnsupportedStructure);
    }
    inst.check_point(z)?;
    let arity = (inst.n, inst.m);
    let pairs: Vec<(PolyExpr, PolyExpr)> = (0..inst.m)
        .map(|i| {
            let y = PolyExpr::variable(arity, inst.n + i).expect("index in range");
            (y, inst.vi_operator[i].clone())
        })
        .collect();
    let extra_ineqs = upper_rows(inst, arity);
    branch_subsets(inst.dim(), &pairs, &extra_ineqs, &[], &z.as_vec())
}

/// Branches of a reformulated NLP whose only nonlinearity is the
/// complementarity products; everything else must be affine.
pub fn enumerate_nlp_branches(
    nlp: &KktNlpInstance,
    point: &[Rat],
) -> Result<Vec<BranchSystem>, TangentError> {
    let plain_affine = nlp
        .plain_equalities
        .iter()
        .chain(nlp.plain_inequalities.iter())
        .all(|p| p.is_affine());
    let pairs_affine = nlp
        .comp_pairs
        .iter()
        .all(|(u, v)| u.is_affine() && v.is_affine());
    if !plain_affine || !pairs_affine {
        return Err(TangentError::UnsupportedStructure);
    }
    branch_subsets(
        nlp.num_vars(),
        &nlp.comp_pairs,
        &nlp.plain_inequalities,
        &nlp.plain_equalities,
        point,
    )
}

fn branch_subsets(
    dim: usize,
    pairs: &[(PolyExpr, PolyExpr)],
    extra_ineqs: &[PolyExpr],
    extra_eqs: &[PolyExpr],
    point: &[Rat],
) -> Result<Vec<BranchSystem>, TangentError> {
    let k = pairs.len();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << k) {
        let mut equalities: Vec<PolyExpr> = extra_eqs.to_vec();
        let mut inequalities: Vec<PolyExpr> = Vec::new();
        let mut first_zero = Vec::new();
        for (i, (u, v)) in pairs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                first_zero.push(i);
                equalities.push(u.clone());
                inequalities.push(-v);
            } else {
                equalities.push(v.clone());
                inequalities.push(-u);
            }
        }
        inequalities.extend(extra_ineqs.iter().cloned());
        let violated = equalities
            .iter()
            .map(|e| e.evaluate(point))
            .collect::<Result<Vec<_>, _>>()?
            .iter()
            .any(|v| !v.is_zero());
        if violated {
            continue;
        }
        out.push(BranchSystem {
            dim,
            equalities,
            inequalities,
            first_zero,
        });
    }
    Ok(out)
}

fn upper_rows(inst: &MpecInstance, arity: (usize, usize)) -> Vec<PolyExpr> {
    let Some(up) = &inst.upper_set else {
        return Vec::new();
    };
    let mut rows = Vec::new();
    for row in up.ineqs() {
        let mut p = PolyExpr::constant(arity, -&row.rhs);
        for (kk, c) in row.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let var = PolyExpr::variable(arity, kk).expect("index in range");
            p = &p + &(&var * c);
        }
        rows.push(p);
    }
    rows
}

#[derive(Debug, Clone)]
pub struct BranchCone {
    pub cone: PolyhedralCone,
    /// Set when the computed cone provably equals the true branch
    /// tangent cone (exact elimination, exactly polyhedral rows, or the
    /// gradient-independence test).
    pub regular: bool,
}

/// Tangent cone of one branch at the point. Branch equalities that pin
/// variables as polynomial graphs are eliminated exactly; a branch
/// reduced to one free variable is decided by univariate leading-term
/// analysis. Remaining cases are linearized with a certification flag.
pub fn branch_tangent_cone(branch: &BranchSystem, z: &[Rat]) -> Result<BranchCone, TangentError> {
    let dim = branch.dim;
    // Feasibility and activity, all exact.
    for e in &branch.equalities {
        if !e.evaluate(z)?.is_zero() {
            return Err(TangentError::InfeasibleBranchPoint);
        }
    }
    let mut actives: Vec<PolyExpr> = Vec::new();
    for q in &branch.inequalities {
        let value = q.evaluate(z)?;
        if value.is_positive() {
            return Err(TangentError::InfeasibleBranchPoint);
        }
        if value.is_zero() {
            actives.push(q.translate(z)?);
        }
    }
    let eqs: Vec<PolyExpr> = branch
        .equalities
        .iter()
        .map(|e| e.translate(z))
        .collect::<Result<_, _>>()?;

    if let Some(cone) = eliminate_to_curve(dim, eqs.clone(), actives.clone())? {
        return Ok(BranchCone { cone, regular: true });
    }
    linearize_branch(dim, &eqs, &actives)
}

/// Greedy exact elimination: a variable appearing in some equality only
/// as its pure linear monomial is a polynomial graph over the rest.
/// When at most one variable stays free, the branch is a point or a
/// curve and its tangent cone follows from leading-term signs.
fn eliminate_to_curve(
    dim: usize,
    mut eqs: Vec<PolyExpr>,
    mut actives: Vec<PolyExpr>,
) -> Result<Option<PolyhedralCone>, TangentError> {
    let mut solved: Vec<Option<PolyExpr>> = vec![None; dim];
    loop {
        let mut found = None;
        'search: for (ei, e) in eqs.iter().enumerate() {
            for v in 0..dim {
                if solved[v].is_some() {
                    continue;
                }
                if let Some(c) = pure_linear_coefficient(e, v) {
                    found = Some((ei, v, c));
                    break 'search;
                }
            }
        }
        let Some((ei, v, c)) = found else { break };
        let e = eqs.remove(ei);
        // e = c * delta_v + rest  =>  delta_v = -rest / c.
        let var_poly = PolyExpr::variable(e.arity(), v).expect("index in range");
        let rest = &e - &(&var_poly * &c);
        let replacement = &rest * &(-c.recip());
        for other in eqs.iter_mut() {
            *other = other.substitute(v, &replacement);
        }
        for q in actives.iter_mut() {
            *q = q.substitute(v, &replacement);
        }
        for s in solved.iter_mut().flatten() {
            *s = s.substitute(v, &replacement);
        }
        solved[v] = Some(replacement);
    }
    let remaining: Vec<usize> = (0..dim).filter(|&v| solved[v].is_none()).collect();
    if remaining.len() >= 2 {
        return Ok(None);
    }
    if remaining.is_empty() {
        // Every variable is pinned: the branch is locally the point.
        return Ok(Some(PolyhedralCone::origin_only(dim)));
    }
    let t = remaining[0];
    for e in &eqs {
        if !e.is_zero() {
            // Nonzero univariate residue vanishing at 0: isolated point.
            return Ok(Some(PolyhedralCone::origin_only(dim)));
        }
    }
    let mut allow_plus = true;
    let mut allow_minus = true;
    for q in &actives {
        if q.is_zero() {
            continue;
        }
        let (degree, coeff) = lowest_term_in(q, t);
        if degree % 2 == 0 {
            if coeff.is_positive() {
                allow_plus = false;
                allow_minus = false;
            }
            // Even negative leading term: nonpositive on both sides.
        } else if coeff.is_positive() {
            allow_plus = false;
        } else {
            allow_minus = false;
        }
    }
    // Tangent vector of the curve delta(t): unit in the free variable,
    // linear coefficients of the solved graphs elsewhere.
    let mut w = vec![Rat::zero(); dim];
    w[t] = Rat::one();
    for (v, s) in solved.iter().enumerate() {
        if let Some(p) = s {
            w[v] = linear_coefficient_in(p, t);
        }
    }
    let cone = match (allow_plus, allow_minus) {
        (true, true) => cone_from_generators(dim, &[], &[w])?,
        (true, false) => cone_from_generators(dim, &[w], &[])?,
        (false, true) => cone_from_generators(dim, &[neg_vec(&w)], &[])?,
        (false, false) => PolyhedralCone::origin_only(dim),
    };
    Ok(Some(cone))
}

/// The coefficient of `delta_v` when every occurrence of `v` in `p` is
/// the bare monomial `delta_v`; None otherwise.
fn pure_linear_coefficient(p: &PolyExpr, v: usize) -> Option<Rat> {
    let mut coeff = None;
    for (m, c) in p.terms() {
        if m.0[v] == 0 {
            continue;
        }
        if m.0[v] != 1 || m.support() != vec![v] {
            return None;
        }
        coeff = Some(c.clone());
    }
    coeff
}

/// Lowest-degree term of a univariate-in-`t` polynomial with zero
/// constant term.
fn lowest_term_in(p: &PolyExpr, t: usize) -> (u32, Rat) {
    p.terms()
        .map(|(m, c)| {
            debug_assert!(m.support() == vec![t], "expected univariate polynomial");
            (m.0[t], c.clone())
        })
        .min_by_key(|(d, _)| *d)
        .expect("nonzero polynomial")
}

fn linear_coefficient_in(p: &PolyExpr, t: usize) -> Rat {
    p.terms()
        .find(|(m, _)| m.0[t] == 1 && m.total_degree() == 1)
        .map(|(_, c)| c.clone())
        .unwrap_or_else(Rat::zero)
}

/// How each local expansion around the point behaves.
enum LocalClass {
    IdenticallyZero,
    Affine,
    /// All terms have even exponents and positive coefficients, and every
    /// term touches one of the listed variables, each pinned by a pure
    /// power: the zero set is exactly {those variables = 0}.
    PinsVariables(Vec<usize>),
    /// All terms even with negative coefficients: nonpositive everywhere.
    NonpositiveEverywhere,
    General,
}

fn classify_local(shifted: &PolyExpr) -> LocalClass {
    if shifted.is_zero() {
        return LocalClass::IdenticallyZero;
    }
    if shifted.is_affine() {
        return LocalClass::Affine;
    }
    if !shifted.constant_term().is_zero() {
        return LocalClass::General;
    }
    let all_even = shifted
        .terms()
        .all(|(m, _)| m.0.iter().all(|&e| e % 2 == 0));
    if !all_even {
        return LocalClass::General;
    }
    let all_pos = shifted.terms().all(|(_, c)| c.is_positive());
    let all_neg = shifted.terms().all(|(_, c)| c.is_negative());
    if all_neg {
        return LocalClass::NonpositiveEverywhere;
    }
    if !all_pos {
        return LocalClass::General;
    }
    let pinned: Vec<usize> = shifted
        .terms()
        .filter_map(|(m, _)| {
            let sup = m.support();
            (sup.len() == 1).then(|| sup[0])
        })
        .collect();
    let covered = shifted
        .terms()
        .all(|(m, _)| m.support().iter().any(|i| pinned.contains(i)));
    if covered {
        let mut vars = pinned;
        vars.sort_unstable();
        vars.dedup();
        LocalClass::PinsVariables(vars)
    } else {
        LocalClass::General
    }
}

/// Fallback linearization of a branch (inputs already translated to the
/// point): sign-definite even rows are rewritten exactly, remaining
/// nonlinear rows contribute their gradients, and the certificate is
/// joint linear independence of every retained gradient.
fn linearize_branch(
    dim: usize,
    eqs: &[PolyExpr],
    actives: &[PolyExpr],
) -> Result<BranchCone, TangentError> {
    let origin = vec![Rat::zero(); dim];
    let mut cone = PolyhedralCone::whole_space(dim);
    let mut grad_rows: Vec<Vec<Rat>> = Vec::new();
    let mut kept_nonlinear = false;
    let mut zero_gradient_kept = false;
    let unit_row = |i: usize| {
        let mut row = vec![Rat::zero(); dim];
        row[i] = Rat::one();
        row
    };
    for e in eqs {
        let class = match classify_local(e) {
            LocalClass::NonpositiveEverywhere => classify_local(&(-e)),
            c => c,
        };
        match class {
            LocalClass::IdenticallyZero => {}
            LocalClass::Affine => {
                let g = e.gradient_at(&origin)?;
                grad_rows.push(g.clone());
                cone.add_eq(g);
            }
            LocalClass::PinsVariables(vars) => {
                for i in vars {
                    grad_rows.push(unit_row(i));
                    cone.add_eq(unit_row(i));
                }
            }
            _ => {
                kept_nonlinear = true;
                let g = e.gradient_at(&origin)?;
                if g.iter().all(|c| c.is_zero()) {
                    zero_gradient_kept = true;
                } else {
                    grad_rows.push(g.clone());
                    cone.add_eq(g);
                }
            }
        }
    }
    for q in actives {
        match classify_local(q) {
            LocalClass::IdenticallyZero => {}
            LocalClass::NonpositiveEverywhere => {} // q <= 0 holds identically
            LocalClass::Affine => {
                let g = q.gradient_at(&origin)?;
                grad_rows.push(g.clone());
                cone.add_ineq(g);
            }
            LocalClass::PinsVariables(vars) => {
                // q >= 0 everywhere, so q <= 0 pins the variables to zero.
                for i in vars {
                    grad_rows.push(unit_row(i));
                    cone.add_eq(unit_row(i));
                }
            }
            LocalClass::General => {
                kept_nonlinear = true;
                let g = q.gradient_at(&origin)?;
                if g.iter().all(|c| c.is_zero()) {
                    zero_gradient_kept = true;
                } else {
                    grad_rows.push(g.clone());
                    cone.add_ineq(g);
                }
            }
        }
    }
    let regular = if !kept_nonlinear {
        true
    } else if zero_gradient_kept {
        false
    } else {
        rank_of_rows(&grad_rows) == grad_rows.len()
    };
    Ok(BranchCone { cone, regular })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    Certified,
    Heuristic,
}

impl Certification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Certification::Certified => "certified",
            Certification::Heuristic => "heuristic — validate by sampling",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TangentCone {
    pub union: ConeUnion,
    pub status: Certification,
}

/// Tangent cone of an NCP-form feasible set at the point: the union of
/// branch cones over active branches, certified when every contributing
/// branch is regular.
pub fn tangent_cone(inst: &MpecInstance, z: &EvalPoint) -> Result<TangentCone, TangentError> {
    let branches = enumerate_branches(inst, z)?;
    assemble_tangent(inst.dim(), &branches, &z.as_vec())
}

/// Tangent cone of a reformulated NLP's feasible set.
pub fn nlp_tangent_cone(
    nlp: &KktNlpInstance,
    point: &[Rat],
) -> Result<TangentCone, TangentError> {
    let branches = enumerate_nlp_branches(nlp, point)?;
    assemble_tangent(nlp.num_vars(), &branches, point)
}

fn assemble_tangent(
    dim: usize,
    branches: &[BranchSystem],
    point: &[Rat],
) -> Result<TangentCone, TangentError> {
    let mut pieces = Vec::new();
    let mut all_regular = true;
    for b in branches {
        let bc = branch_tangent_cone(b, point)?;
        all_regular &= bc.regular;
        pieces.push(bc.cone);
    }
    let union = ConeUnion::new(dim, pieces).normalized()?;
    Ok(TangentCone {
        union,
        status: if all_regular {
            Certification::Certified
        } else {
            Certification::Heuristic
        },
    })
}

/// Parameters of the floating sampling oracle. Purely cross-validation
/// evidence; never feeds exact verdicts.
#[derive(Debug, Clone)]
pub struct SampleConfig {
    pub seed: u64,
    pub count: usize,
    /// Radius schedule; later entries should be smaller, and the
    /// smallest successful radius defines each sample's quotient.
    pub radii: Vec<f64>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: 0,
            count: 64,
            radii: vec![1e-1, 1e-2, 1e-3, 1e-4],
        }
    }
}

/// Floating tangent-direction sampler: random starts near the point are
/// Newton-projected onto each branch's equality system at every radius
/// of the schedule, filtered by the branch inequalities (tolerance
/// 1e-9); each direction keeps its smallest-radius difference quotient,
/// and quotients are clustered by proximity 1e-3. Failed solves are
/// skipped, not fatal.
///
/// NCP instances sample their own branches. General instances sample
/// the KKT reformulation in (x, y, lambda), anchored at an extreme
/// multiplier, and project displacements back to (x, y); with an empty
/// multiplier set there is nothing to anchor and no directions come
/// back.
pub fn sample_tangent_directions(
    inst: &MpecInstance,
    z: &EvalPoint,
    config: &SampleConfig,
) -> Result<Vec<Vec<f64>>, TangentError> {
    inst.check_point(z)?;
    let (branches, base) = if inst.ncp_form {
        (enumerate_branches(inst, z)?, z.as_vec())
    } else {
        let ma = multiplier_set(inst, z)?;
        let Some(lambda) = ma.extreme_points.first() else {
            return Ok(Vec::new());
        };
        let nlp = kkt_reformulate(inst);
        let mut point = z.as_vec();
        point.extend(lambda.iter().cloned());
        let branches = branch_subsets(
            nlp.num_vars(),
            &nlp.comp_pairs,
            &nlp.plain_inequalities,
            &nlp.plain_equalities,
            &point,
        )?;
        (branches, point)
    };
    let keep = inst.dim();
    let center: Vec<f64> = base.iter().map(rat_to_f64).collect();
    let dim = center.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for branch in &branches {
        for _ in 0..config.count {
            let dir = random_unit(&mut rng, dim);
            let mut best: Option<Vec<f64>> = None;
            for (ri, &radius) in config.radii.iter().enumerate() {
                let start: Vec<f64> = center
                    .iter()
                    .zip(&dir)
                    .map(|(c, d)| c + radius * d)
                    .collect();
                let quotient = newton_project(&branch.equalities, start).filter(|solved| {
                    branch
                        .inequalities
                        .iter()
                        .all(|q| q.eval_f64(solved) <= 1e-9)
                });
                let Some(solved) = quotient else { continue };
                let disp: Vec<f64> = solved
                    .iter()
                    .zip(&center)
                    .take(keep)
                    .map(|(a, b)| a - b)
                    .collect();
                let norm = disp.iter().map(|v| v * v).sum::<f64>().sqrt();
                // A quotient collapsing far below the radius scale tends
                // to the zero direction, not a unit tangent.
                if norm < 0.05 * radius {
                    continue;
                }
                // Only the smallest scheduled radius stands in for the
                // vanishing-step limit; larger radii carry curvature
                // error beyond the clustering tolerance.
                if ri + 1 == config.radii.len() {
                    best = Some(disp.into_iter().map(|v| v / norm).collect());
                }
            }
            let Some(unit) = best else { continue };
            let near = clusters.iter().any(|rep| {
                rep.iter()
                    .zip(&unit)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
                    <= 1e-3
            });
            if !near {
                clusters.push(unit);
            }
        }
    }
    clusters.sort_by(|a, b| a.partial_cmp(b).expect("finite unit vectors"));
    Ok(clusters)
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Newton iteration with minimal-norm steps on the equality system.
fn newton_project(eqs: &[PolyExpr], mut zf: Vec<f64>) -> Option<Vec<f64>> {
    if eqs.is_empty() {
        return Some(zf);
    }
    let dim = zf.len();
    for _ in 0..60 {
        let vals: Vec<f64> = eqs.iter().map(|e| e.eval_f64(&zf)).collect();
        let err = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if !err.is_finite() {
            return None;
        }
        if err <= 1e-13 {
            return Some(zf);
        }
        let jac: Vec<Vec<f64>> = eqs
            .iter()
            .map(|e| {
                (0..dim)
                    .map(|v| e.differentiate(v).expect("in range").eval_f64(&zf))
                    .collect()
            })
            .collect();
        // Minimal-norm step: delta = J^T w with (J J^T) w = -vals.
        let k = eqs.len();
        let mut gram = vec![vec![0.0; k + 1]; k];
        for i in 0..k {
            for j in 0..k {
                gram[i][j] = jac[i].iter().zip(&jac[j]).map(|(a, b)| a * b).sum();
            }
            gram[i][k] = -vals[i];
        }
        let w = solve_f64(&mut gram)?;
        for v in 0..dim {
            let step: f64 = (0..k).map(|i| w[i] * jac[i][v]).sum();
            zf[v] += step;
        }
    }
    None
}

/// Gaussian elimination with partial pivoting on an augmented system.
fn solve_f64(aug: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let n = aug.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| {
            aug[a][col]
                .abs()
                .partial_cmp(&aug[b][col].abs())
                .expect("finite")
        })?;
        if aug[pivot][col].abs() < 1e-14 {
            return None;
        }
        aug.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let factor = aug[row][col] / aug[col][col];
                for j in col..=n {
                    let delta = factor * aug[col][j];
                    aug[row][j] -= delta;
                }
            }
        }
    }
    Some((0..n).map(|i| aug[i][n] / aug[i][i]).collect())
}

/// Conic hull of a union: the cone generated by every piece's extreme
/// rays and lineality generators, returned in H-representation.
pub fn convex_hull_union(u: &ConeUnion) -> Result<PolyhedralCone, TangentError> {
    let mut rays = Vec::new();
    let mut lineality = Vec::new();
    for piece in u.pieces() {
        let gens = enumerate_extreme_rays(piece)?;
        rays.extend(gens.rays);
        lineality.extend(gens.lineality);
    }
    Ok(cone_from_generators(u.dim(), &rays, &lineality)?)
}

#[derive(Debug, Clone)]
pub enum FullCqVerdict {
    Holds,
    Fails { witness: Vec<Rat> },
    /// The tangent cone is not certified, so equality cannot be decided.
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct FullCqReport {
    pub verdict: FullCqVerdict,
    pub tangent_status: Certification,
    /// The multiplier list the linearized cone was built from; the
    /// caller names its semantics (extreme, full, custom).
    pub multipliers_used: Vec<Vec<Rat>>,
}

/// Compares the tangent cone with the linearized cone built over the
/// supplied multipliers. Holds/fails verdicts carry exact witnesses;
/// an uncertified tangent cone yields "inconclusive".
pub fn check_full_cq(
    inst: &MpecInstance,
    z: &EvalPoint,
    multipliers: &[Vec<Rat>],
) -> Result<FullCqReport, TangentError> {
    let t = tangent_cone(inst, z)?;
    if t.status != Certification::Certified {
        return Ok(FullCqReport {
            verdict: FullCqVerdict::Inconclusive,
            tangent_status: t.status,
            multipliers_used: multipliers.to_vec(),
        });
    }
    let l = linearized_cone(inst, z, multipliers)?;
    let verdict = match cone_union_equal(&t.union, &l)? {
        crate::polyhedra::ConeUnionEquality::Equal => FullCqVerdict::Holds,
        crate::polyhedra::ConeUnionEquality::Differ { witness } => {
            FullCqVerdict::Fails { witness }
        }
    };
    Ok(FullCqReport {
        verdict,
        tangent_status: t.status,
        multipliers_used: multipliers.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::load_instance;
    use crate::polyhedra::cone_set_equal;
    use crate::rat::rat;
    use crate::stationarity::kkt_reformulate;

    fn q2() -> (MpecInstance, EvalPoint) {
        let doc = r#"{
            "n": 1, "m": 2, "l": 2,
            "f": "0",
            "F": ["x1^2+x1+y1", "x1^3+y2"],
            "g": ["-y1", "-y2"],
            "Z": null
        }"#;
        (
            load_instance(doc).unwrap(),
            EvalPoint::new(vec![rat(0)], vec![rat(0), rat(0)]),
        )
    }

    fn q6() -> (MpecInstance, EvalPoint) {
        let doc = r#"{
            "n": 1, "m": 1, "l": 1,
            "f": "x1",
            "F": ["y1^2+x1^2"],
            "g": ["-y1"],
            "Z": {"G": [[-1]], "H": [[0]], "a": [0]}
        }"#;
        (
            load_instance(doc).unwrap(),
            EvalPoint::new(vec![rat(0)], vec![rat(0)]),
        )
    }

    fn q1_nlp() -> (KktNlpInstance, Vec<Rat>) {
        let doc = r#"{"n":1,"m":1,"l":1,"f":"0","F":["y1"],"g":["-y1"],"Z":null}"#;
        let inst = load_instance(doc).unwrap();
        (kkt_reformulate(&inst), vec![rat(4), rat(0), rat(0)])
    }

    fn expected_q2_union() -> ConeUnion {
        // {(a,0,0): a >= 0} and {(-a,a,0): a >= 0}.
        let mut k1 = PolyhedralCone::whole_space(3);
        k1.add_eq(vec![rat(0), rat(1), rat(0)]);
        k1.add_eq(vec![rat(0), rat(0), rat(1)]);
        k1.add_ineq(vec![rat(-1), rat(0), rat(0)]);
        let mut k2 = PolyhedralCone::whole_space(3);
        k2.add_eq(vec![rat(1), rat(1), rat(0)]);
        k2.add_eq(vec![rat(0), rat(0), rat(1)]);
        k2.add_ineq(vec![rat(1), rat(0), rat(0)]);
        ConeUnion::new(3, vec![k1, k2])
    }

    #[test]
    fn q2_branches_cover_the_solved_decomposition() {
        let (inst, z) = q2();
        let branches = enumerate_branches(&inst, &z).unwrap();
        assert_eq!(branches.len(), 4); // all pass the equality pruning at 0
        let full: Vec<_> = branches.iter().filter(|b| b.first_zero == [0, 1]).collect();
        assert_eq!(full.len(), 1);
        let bc = branch_tangent_cone(full[0], &z.as_vec()).unwrap();
        assert!(bc.regular);
        // {(a,0,0): a >= 0}
        let mut expected = PolyhedralCone::whole_space(3);
        expected.add_eq(vec![rat(0), rat(1), rat(0)]);
        expected.add_eq(vec![rat(0), rat(0), rat(1)]);
        expected.add_ineq(vec![rat(-1), rat(0), rat(0)]);
        assert!(cone_set_equal(&bc.cone, &expected).unwrap());
        // Branch with both F components forced to zero: the feasible
        // curve enters from x <= 0, giving {(-a,a,0): a >= 0}.
        let curve: Vec<_> = branches.iter().filter(|b| b.first_zero.is_empty()).collect();
        let bc2 = branch_tangent_cone(curve[0], &z.as_vec()).unwrap();
        assert!(bc2.regular);
        let mut expected2 = PolyhedralCone::whole_space(3);
        expected2.add_eq(vec![rat(1), rat(1), rat(0)]);
        expected2.add_eq(vec![rat(0), rat(0), rat(1)]);
        expected2.add_ineq(vec![rat(1), rat(0), rat(0)]);
        assert!(cone_set_equal(&bc2.cone, &expected2).unwrap());
    }

    #[test]
    fn q2_tangent_cone_certified() {
        let (inst, z) = q2();
        let t = tangent_cone(&inst, &z).unwrap();
        assert_eq!(t.status, Certification::Certified);
        assert!(cone_union_equal(&t.union, &expected_q2_union())
            .unwrap()
            .is_equal());
    }

    #[test]
    fn q6_tangent_cone_is_half_axis() {
        let (inst, z) = q6();
        let t = tangent_cone(&inst, &z).unwrap();
        assert_eq!(t.status, Certification::Certified);
        let mut half_axis = PolyhedralCone::whole_space(2);
        half_axis.add_eq(vec![rat(0), rat(1)]);
        half_axis.add_ineq(vec![rat(-1), rat(0)]);
        let expected = ConeUnion::new(2, vec![half_axis]);
        assert!(cone_union_equal(&t.union, &expected).unwrap().is_equal());
    }

    #[test]
    fn q1_reformulation_tangent_is_x_axis() {
        let (nlp, point) = q1_nlp();
        let t = nlp_tangent_cone(&nlp, &point).unwrap();
        assert_eq!(t.status, Certification::Certified);
        let mut axis = PolyhedralCone::whole_space(3);
        axis.add_eq(vec![rat(0), rat(1), rat(0)]);
        axis.add_eq(vec![rat(0), rat(0), rat(1)]);
        let expected = ConeUnion::new(3, vec![axis]);
        assert!(cone_union_equal(&t.union, &expected).unwrap().is_equal());
    }

    #[test]
    fn affine_branches_are_always_regular() {
        let (nlp, point) = q1_nlp();
        for b in enumerate_nlp_branches(&nlp, &point).unwrap() {
            assert!(branch_tangent_cone(&b, &point).unwrap().regular);
        }
    }

    #[test]
    fn no_pairs_single_branch() {
        let doc = r#"{"n":1,"m":0,"l":0,"f":"0","F":[],"g":[],"Z":null}"#;
        let inst = load_instance(doc).unwrap();
        let z = EvalPoint::new(vec![rat(1)], vec![]);
        let branches = enumerate_branches(&inst, &z).unwrap();
        assert_eq!(branches.len(), 1);
        let t = tangent_cone(&inst, &z).unwrap();
        assert_eq!(t.status, Certification::Certified);
        assert!(t.union.member(&[rat(-5)]).unwrap());
    }

    #[test]
    fn cubic_curve_branches_resolve_exactly() {
        // F = x^3 + y: both branches are graphs over x, so the two
        // half-axis tangents come out exact and certified.
        let doc = r#"{"n":1,"m":1,"l":1,"f":"0","F":["x1^3+y1"],"g":["-y1"],"Z":null}"#;
        let inst = load_instance(doc).unwrap();
        let z = EvalPoint::new(vec![rat(0)], vec![rat(0)]);
        let t = tangent_cone(&inst, &z).unwrap();
        assert_eq!(t.status, Certification::Certified);
        let mut right = PolyhedralCone::whole_space(2);
        right.add_eq(vec![rat(0), rat(1)]);
        right.add_ineq(vec![rat(-1), rat(0)]);
        let mut left = PolyhedralCone::whole_space(2);
        left.add_eq(vec![rat(0), rat(1)]);
        left.add_ineq(vec![rat(1), rat(0)]);
        let expected = ConeUnion::new(2, vec![right, left]);
        assert!(cone_union_equal(&t.union, &expected).unwrap().is_equal());
    }

    #[test]
    fn extra_free_variable_defeats_certification() {
        // With a second upper-level variable the branch manifold is
        // two-dimensional and x1^3 >= 0 cannot be certified pointwise.
        let doc = r#"{"n":2,"m":1,"l":1,"f":"0","F":["x1^3+y1"],"g":["-y1"],"Z":null}"#;
        let inst = load_instance(doc).unwrap();
        let z = EvalPoint::new(vec![rat(0), rat(0)], vec![rat(0)]);
        let t = tangent_cone(&inst, &z).unwrap();
        assert_eq!(t.status, Certification::Heuristic);
    }

    #[test]
    fn sampling_oracle_matches_q2_rays() {
        let (inst, z) = q2();
        let dirs = sample_tangent_directions(&inst, &z, &SampleConfig::default()).unwrap();
        let expected = [
            vec![1.0, 0.0, 0.0],
            vec![-1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0],
        ];
        for e in &expected {
            let hit = dirs.iter().any(|d| {
                d.iter()
                    .zip(e)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
                    < 1e-3
            });
            assert!(hit, "expected direction {e:?} not found in {dirs:?}");
        }
        assert_eq!(dirs.len(), 2, "unexpected clusters: {dirs:?}");
    }

    #[test]
    fn sampling_oracle_q6_single_cluster() {
        let (inst, z) = q6();
        let dirs = sample_tangent_directions(&inst, &z, &SampleConfig::default()).unwrap();
        assert_eq!(dirs.len(), 1, "clusters: {dirs:?}");
        assert!((dirs[0][0] - 1.0).abs() < 1e-6 && dirs[0][1].abs() < 1e-6);
    }

    #[test]
    fn isolated_point_yields_no_directions() {
        // Lower level forces y = 0 and F = x^2 + y = 0 forces x = 0:
        // the feasible set is the origin only.
        let doc = r#"{"n":1,"m":1,"l":1,"f":"0","F":["x1^2+y1"],"g":["-y1"],"Z":
            {"G":[[1],[-1]],"H":[[0],[0]],"a":[0,0]}}"#;
        let inst = load_instance(doc).unwrap();
        let z = EvalPoint::new(vec![rat(0)], vec![rat(0)]);
        let dirs = sample_tangent_directions(&inst, &z, &SampleConfig::default()).unwrap();
        assert!(dirs.is_empty(), "directions: {dirs:?}");
    }

    #[test]
    fn hull_of_q2_tangent_matches_solution() {
        let (inst, z) = q2();
        let t = tangent_cone(&inst, &z).unwrap();
        let hull = convex_hull_union(&t.union).unwrap();
        // {(a,b,0): a+b >= 0, b >= 0}
        let mut expected = PolyhedralCone::whole_space(3);
        expected.add_ineq(vec![rat(-1), rat(-1), rat(0)]);
        expected.add_ineq(vec![rat(0), rat(-1), rat(0)]);
        expected.add_eq(vec![rat(0), rat(0), rat(1)]);
        assert!(cone_set_equal(&hull, &expected).unwrap());
    }

    #[test]
    fn hull_is_monotone_over_pieces() {
        let (inst, z) = q2();
        let t = tangent_cone(&inst, &z).unwrap();
        let hull = convex_hull_union(&t.union).unwrap();
        for piece in t.union.pieces() {
            let gens = enumerate_extreme_rays(piece).unwrap();
            for r in &gens.rays {
                assert!(hull.member(r).unwrap());
            }
        }
    }

    #[test]
    fn single_piece_hull_is_idempotent() {
        let mut c = PolyhedralCone::whole_space(2);
        c.add_ineq(vec![rat(-1), rat(0)]);
        c.add_ineq(vec![rat(0), rat(-1)]);
        let u = ConeUnion::new(2, vec![c.clone()]);
        let hull = convex_hull_union(&u).unwrap();
        assert!(cone_set_equal(&hull, &c).unwrap());
    }

    #[test]
    fn q6_full_cq_fails_with_vertical_witness() {
        let (inst, z) = q6();
        let report = check_full_cq(&inst, &z, &[vec![rat(0)]]).unwrap();
        match report.verdict {
            FullCqVerdict::Fails { witness } => {
                assert_eq!(witness, vec![rat(0), rat(1)]);
            }
            other => panic!("expected failure with witness, got {other:?}"),
        }
    }

    #[test]
    fn identity_lower_level_satisfies_full_cq() {
        // F = y - x with no constraints: T = L = graph of the identity.
        let doc = r#"{"n":1,"m":1,"l":1,"f":"0","F":["y1-x1"],"g":["-y1"],"Z":null}"#;
        let inst = load_instance(doc).unwrap();
        // Point with y = x = 1: single active branch F = 0, y > 0.
        let z = EvalPoint::new(vec![rat(1)], vec![rat(1)]);
        let report = check_full_cq(&inst, &z, &[vec![rat(0)]]).unwrap();
        assert!(matches!(report.verdict, FullCqVerdict::Holds));
    }

    #[test]
    fn uncertified_tangent_gives_inconclusive() {
        let doc = r#"{"n":2,"m":1,"l":1,"f":"0","F":["x1^3+y1"],"g":["-y1"],"Z":null}"#;
        let inst = load_instance(doc).unwrap();
        let z = EvalPoint::new(vec![rat(0), rat(0)], vec![rat(0)]);
        let report = check_full_cq(&inst, &z, &[vec![rat(0)]]).unwrap();
        assert!(matches!(report.verdict, FullCqVerdict::Inconclusive));
    }
}
