//! Independent brute-force oracles used to validate the main
//! implementations, plus seeded random-instance generators.
//!
//! Intentionally slow and simple. `brute_lp` never touches the simplex:
//! it compares objective values over exhaustively enumerated vertices
//! and recession generators. `brute_lcp` enumerates complementary sign
//! patterns directly. These live in the shipped library so the CLI can
//! expose a cross-check mode that runs both paths and diffs results.

use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{Monomial, PolyExpr, RationalMatrix};
use crate::instance::{EvalPoint, MpecInstance};
use crate::polyhedra::linalg::solve_linear;
use crate::polyhedra::{
    enumerate_extreme_rays, enumerate_vertices, LpOptimum, LpProblem, LpSolution, PolyhedraError,
    Polyhedron, Sense,
};
use crate::rat::{dot, rat, Rat};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle limits exceeded: {what} = {got}, cap {cap}")]
    Limits {
        what: &'static str,
        got: usize,
        cap: usize,
    },
    #[error(transparent)]
    Polyhedra(#[from] PolyhedraError),
}

pub const BRUTE_LP_MAX_DIM: usize = 4;
pub const BRUTE_LP_MAX_CONSTRAINTS: usize = 10;
pub const BRUTE_LCP_MAX_DIM: usize = 3;

/// Reference LP solve by full enumeration: the optimum is the best
/// vertex of the lineality-reduced polyhedron unless a recession
/// direction improves the objective (then unbounded); emptiness shows
/// up as the reduced polyhedron having no vertex at all.
pub fn brute_lp(p: &LpProblem) -> Result<LpSolution, OracleError> {
    let dim = p.feasible.dim();
    if dim > BRUTE_LP_MAX_DIM {
        return Err(OracleError::Limits {
            what: "dimension",
            got: dim,
            cap: BRUTE_LP_MAX_DIM,
        });
    }
    if p.feasible.constraint_count() > BRUTE_LP_MAX_CONSTRAINTS {
        return Err(OracleError::Limits {
            what: "constraints",
            got: p.feasible.constraint_count(),
            cap: BRUTE_LP_MAX_CONSTRAINTS,
        });
    }
    let lineality = p.feasible.normal_lineality();
    let mut pointed = p.feasible.clone();
    for l in &lineality {
        pointed.add_eq(l.clone(), Rat::zero());
    }
    let verts = enumerate_vertices(&pointed)?;
    if verts.vertices.is_empty() {
        // The reduced polyhedron is pointed, so no vertex means empty.
        return Ok(LpSolution::Infeasible);
    }
    let improving = |inner: &Rat| match p.sense {
        Sense::Min => inner.is_negative(),
        Sense::Max => inner.is_positive(),
    };
    for l in &lineality {
        if !dot(&p.objective, l).is_zero() {
            return Ok(LpSolution::Unbounded);
        }
    }
    let rec = enumerate_extreme_rays(&pointed.recession_cone())?;
    for r in &rec.rays {
        if improving(&dot(&p.objective, r)) {
            return Ok(LpSolution::Unbounded);
        }
    }
    let mut best: Option<(Rat, Vec<Rat>)> = None;
    for v in &verts.vertices {
        let value = dot(&p.objective, v);
        let better = match &best {
            None => true,
            Some((bv, _)) => match p.sense {
                Sense::Min => value < *bv,
                Sense::Max => value > *bv,
            },
        };
        if better {
            best = Some((value, v.clone()));
        }
    }
    let (value, point) = best.expect("nonempty vertex list");
    let active_ineqs = p.feasible.active_ineq_indices(&point)?;
    Ok(LpSolution::Optimal(LpOptimum {
        value,
        point,
        active_ineqs,
    }))
}

#[derive(Debug, Clone)]
pub struct LcpSolutions {
    pub solutions: Vec<Vec<Rat>>,
    /// Set when some complementary pattern had a singular basis matrix,
    /// in which case a solution family may have been missed.
    pub degenerate: bool,
}

/// All solutions of the LCP y >= 0, M y + q >= 0, y.(M y + q) = 0 by
/// enumerating which components of y are allowed to be nonzero.
pub fn brute_lcp(q: &[Rat], m_matrix: &RationalMatrix) -> Result<LcpSolutions, OracleError> {
    let m = q.len();
    if m > BRUTE_LCP_MAX_DIM {
        return Err(OracleError::Limits {
            what: "dimension",
            got: m,
            cap: BRUTE_LCP_MAX_DIM,
        });
    }
    assert_eq!(m_matrix.rows(), m);
    assert_eq!(m_matrix.cols(), m);
    let mut solutions: Vec<Vec<Rat>> = Vec::new();
    let mut degenerate = false;
    for mask in 0u32..(1u32 << m) {
        let basic: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        // Solve (M y + q)_i = 0 for i in basic with y supported on basic.
        let rows: Vec<Vec<Rat>> = basic
            .iter()
            .map(|&i| basic.iter().map(|&j| m_matrix.at(i, j).clone()).collect())
            .collect();
        let rhs: Vec<Rat> = basic.iter().map(|&i| -&q[i]).collect();
        let Some(sol) = solve_linear(&rows, &rhs, basic.len()) else {
            continue;
        };
        if !sol.nullspace.is_empty() {
            degenerate = true;
            continue;
        }
        let mut y = vec![Rat::zero(); m];
        for (pos, &i) in basic.iter().enumerate() {
            y[i] = sol.particular[pos].clone();
        }
        if y.iter().any(|v| v.is_negative()) {
            continue;
        }
        let w: Vec<Rat> = (0..m)
            .map(|i| &dot(m_matrix.row(i), &y) + &q[i])
            .collect();
        if w.iter().any(|v| v.is_negative()) {
            continue;
        }
        if !solutions.contains(&y) {
            solutions.push(y);
        }
    }
    solutions.sort();
    Ok(LcpSolutions {
        solutions,
        degenerate,
    })
}

/// Seeded random-instance profiles, all constructed to be feasible at a
/// designated point by shifting constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    NcpSmall,
    ViSmall,
    PolyhedralZ,
}

impl std::str::FromStr for Profile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ncp-small" => Ok(Profile::NcpSmall),
            "vi-small" => Ok(Profile::ViSmall),
            "polyhedral-z" => Ok(Profile::PolyhedralZ),
            other => Err(format!(
                "unknown profile `{other}` (expected ncp-small, vi-small or polyhedral-z)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub instance: MpecInstance,
    /// The designated feasible point the construction targets.
    pub point: EvalPoint,
}

/// Deterministic, seed-reproducible instance generator. Coefficients
/// stay in {-5..5} and dimensions at desk scale.
pub fn random_instance(seed: u64, profile: Profile) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match profile {
        Profile::NcpSmall => random_ncp(&mut rng, false),
        Profile::ViSmall => random_vi(&mut rng, false),
        Profile::PolyhedralZ => {
            if rng.gen_bool(0.5) {
                random_ncp(&mut rng, true)
            } else {
                random_vi(&mut rng, true)
            }
        }
    }
}

fn coeff(rng: &mut ChaCha8Rng) -> Rat {
    rat(rng.gen_range(-5i64..=5))
}

fn nonzero_coeff(rng: &mut ChaCha8Rng) -> Rat {
    loop {
        let c = coeff(rng);
        if !c.is_zero() {
            return c;
        }
    }
}

/// Random polynomial of degree <= 2 with a few terms.
fn random_poly(rng: &mut ChaCha8Rng, arity: (usize, usize)) -> PolyExpr {
    let nvars = arity.0 + arity.1;
    let n_terms = rng.gen_range(1..=3);
    let mut terms = Vec::new();
    for _ in 0..n_terms {
        let mut exps = vec![0u32; nvars];
        for _ in 0..rng.gen_range(0..=2u32) {
            let v = rng.gen_range(0..nvars);
            exps[v] += 1;
        }
        terms.push((Monomial(exps), coeff(rng)));
    }
    PolyExpr::from_terms(arity, terms)
}

fn random_ncp(rng: &mut ChaCha8Rng, with_z: bool) -> RandomInstance {
    let n = rng.gen_range(1..=2usize);
    let m = rng.gen_range(1..=2usize);
    let arity = (n, m);
    let x: Vec<Rat> = (0..n).map(|_| rat(rng.gen_range(-2i64..=2))).collect();
    let mut y = Vec::with_capacity(m);
    let mut classes = Vec::with_capacity(m);
    for _ in 0..m {
        // 0 = alpha (y > 0 = F), 1 = beta (both zero), 2 = gamma (F > 0).
        let class = rng.gen_range(0..3u8);
        classes.push(class);
        y.push(if class == 0 {
            rat(rng.gen_range(1i64..=2))
        } else {
            Rat::zero()
        });
    }
    let z = EvalPoint::new(x, y);
    let zv = z.as_vec();
    let mut vi_operator = Vec::with_capacity(m);
    for &class in &classes {
        let raw = random_poly(rng, arity);
        let at_point = raw.evaluate(&zv).expect("arity matches");
        let offset = if class == 2 {
            rat(rng.gen_range(1i64..=3)) - at_point
        } else {
            -at_point
        };
        vi_operator.push(&raw + &PolyExpr::constant(arity, offset));
    }
    let vi_constraints: Vec<PolyExpr> = (0..m)
        .map(|i| -&PolyExpr::variable(arity, n + i).expect("in range"))
        .collect();
    let upper_set = with_z.then(|| random_upper_set(rng, n + m, &zv));
    let instance = MpecInstance::new(
        n,
        m,
        m,
        random_poly(rng, arity),
        vi_operator,
        vi_constraints,
        upper_set,
        Default::default(),
    );
    RandomInstance { instance, point: z }
}

fn random_vi(rng: &mut ChaCha8Rng, with_z: bool) -> RandomInstance {
    let n = rng.gen_range(1..=2usize);
    let m = rng.gen_range(1..=2usize);
    let l = rng.gen_range(1..=3usize);
    let arity = (n, m);
    let x: Vec<Rat> = (0..n).map(|_| rat(rng.gen_range(-2i64..=2))).collect();
    let y: Vec<Rat> = (0..m).map(|_| rat(rng.gen_range(-2i64..=2))).collect();
    let z = EvalPoint::new(x, y);
    let zv = z.as_vec();
    let mut vi_constraints = Vec::with_capacity(l);
    let mut lambda = Vec::with_capacity(l);
    for _ in 0..l {
        let active = rng.gen_bool(0.6);
        let raw = random_poly(rng, arity);
        let at_point = raw.evaluate(&zv).expect("arity matches");
        let offset = if active {
            -at_point
        } else {
            -at_point - rat(rng.gen_range(1i64..=3))
        };
        vi_constraints.push(&raw + &PolyExpr::constant(arity, offset));
        lambda.push(if active {
            rat(rng.gen_range(0i64..=3))
        } else {
            Rat::zero()
        });
    }
    // Shift F so the chosen multiplier satisfies the KKT equation.
    let mut vi_operator = Vec::with_capacity(m);
    for k in 0..m {
        let raw = random_poly(rng, arity);
        let mut residual = raw.evaluate(&zv).expect("arity matches");
        for (i, li) in lambda.iter().enumerate() {
            if li.is_zero() {
                continue;
            }
            let dg = vi_constraints[i]
                .differentiate(n + k)
                .expect("in range")
                .evaluate(&zv)
                .expect("arity matches");
            residual += li * &dg;
        }
        vi_operator.push(&raw + &PolyExpr::constant(arity, -residual));
    }
    let upper_set = with_z.then(|| random_upper_set(rng, n + m, &zv));
    let instance = MpecInstance::new(
        n,
        m,
        l,
        random_poly(rng, arity),
        vi_operator,
        vi_constraints,
        upper_set,
        Default::default(),
    );
    RandomInstance { instance, point: z }
}

fn random_upper_set(rng: &mut ChaCha8Rng, dim: usize, zv: &[Rat]) -> Polyhedron {
    let mut p = Polyhedron::whole_space(dim);
    for _ in 0..rng.gen_range(1..=2usize) {
        let mut coeffs: Vec<Rat> = (0..dim).map(|_| coeff(rng)).collect();
        if coeffs.iter().all(|c| c.is_zero()) {
            coeffs[rng.gen_range(0..dim)] = nonzero_coeff(rng);
        }
        let at_point = dot(&coeffs, zv);
        let rhs = if rng.gen_bool(0.5) {
            at_point // active row
        } else {
            &at_point + &rat(rng.gen_range(1i64..=3))
        };
        p.add_ineq(coeffs, rhs);
    }
    p
}

/// Seeded random LP over a small box of coefficients; mixes
/// inequalities with occasional equalities and both senses.
pub fn random_lp(seed: u64) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.gen_range(1..=4usize);
    let rows = rng.gen_range(1..=8usize);
    let mut feasible = Polyhedron::whole_space(dim);
    for _ in 0..rows {
        let coeffs: Vec<Rat> = (0..dim).map(|_| coeff(&mut rng)).collect();
        let rhs = coeff(&mut rng);
        if rng.gen_bool(0.2) {
            feasible.add_eq(coeffs, rhs);
        } else {
            feasible.add_ineq(coeffs, rhs);
        }
    }
    let objective: Vec<Rat> = (0..dim).map(|_| coeff(&mut rng)).collect();
    let sense = if rng.gen_bool(0.5) {
        Sense::Min
    } else {
        Sense::Max
    };
    LpProblem {
        objective,
        sense,
        feasible,
    }
}
