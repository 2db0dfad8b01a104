//! Exact two-phase simplex with Bland's anti-cycling rule.
//!
//! Free variables are split into positive and negative parts and
//! inequalities receive slack variables, so the tableau works on the
//! standard form `min c.w  s.t.  M w = r, w >= 0`. Bland's rule keeps
//! the method finite under the heavy degeneracy typical of critical
//! cones and multiplier sets.

use num_traits::{One, Signed, Zero};

use super::Polyhedron;
use crate::rat::{dot, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<Rat>,
    pub sense: Sense,
    pub feasible: Polyhedron,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpOptimum {
    pub value: Rat,
    /// A basic optimal solution in the original coordinates.
    pub point: Vec<Rat>,
    /// Inequality rows of the feasible polyhedron tight at `point`.
    pub active_ineqs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpSolution {
    Optimal(LpOptimum),
    Infeasible,
    Unbounded,
}

impl LpSolution {
    pub fn optimum(&self) -> Option<&LpOptimum> {
        match self {
            LpSolution::Optimal(o) => Some(o),
            _ => None,
        }
    }
}

struct Tableau {
    /// rows x (ncols + 1); last column is the right-hand side.
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rat {
        &self.rows[r][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].clone().recip();
        for v in self.rows[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let factor = self.rows[i][c].clone();
            for j in 0..=self.ncols {
                let delta = &factor * &self.rows[r][j];
                self.rows[i][j] = &self.rows[i][j] - &delta;
            }
        }
        self.basis[r] = c;
    }

    /// Primal simplex on the current basis, minimizing `costs` over the
    /// columns in `0..allowed`. Returns false when unbounded.
    fn optimize(&mut self, costs: &[Rat], allowed: usize) -> bool {
        loop {
            // Reduced costs r_j = c_j - c_B . column_j.
            let basic_costs: Vec<Rat> =
                self.basis.iter().map(|&b| costs[b].clone()).collect();
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut rc = costs[j].clone();
                for (i, bc) in basic_costs.iter().enumerate() {
                    if !bc.is_zero() {
                        rc -= bc * &self.rows[i][j];
                    }
                }
                if rc.is_negative() {
                    entering = Some(j);
                    break; // Bland: smallest improving index.
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if a.is_positive() {
                    let ratio = self.rhs(i) / a;
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

/// Exact LP solve. The three statuses cover all cases.
pub fn solve_lp(p: &LpProblem) -> LpSolution {
    let dim = p.feasible.dim();
    assert_eq!(p.objective.len(), dim, "objective width mismatch");
    let n_ineq = p.feasible.ineqs().len();
    let n_rows = n_ineq + p.feasible.eqs().len();

    // Columns: dim positive parts, dim negative parts, slacks, artificials.
    let n_real = 2 * dim + n_ineq;
    let ncols = n_real + n_rows;
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(n_rows);
    let build_row = |coeffs: &[Rat], rhs: &Rat, slack: Option<usize>| {
        let mut row = vec![Rat::zero(); ncols + 1];
        for (j, a) in coeffs.iter().enumerate() {
            row[j] = a.clone();
            row[dim + j] = -a;
        }
        if let Some(s) = slack {
            row[2 * dim + s] = Rat::one();
        }
        row[ncols] = rhs.clone();
        row
    };
    for (i, r) in p.feasible.ineqs().iter().enumerate() {
        rows.push(build_row(&r.coeffs, &r.rhs, Some(i)));
    }
    for r in p.feasible.eqs() {
        rows.push(build_row(&r.coeffs, &r.rhs, None));
    }
    // Normalize right-hand sides and attach artificial columns.
    for (i, row) in rows.iter_mut().enumerate() {
        if row[ncols].is_negative() {
            for v in row.iter_mut() {
                *v = -&*v;
            }
        }
        row[n_real + i] = Rat::one();
    }
    let mut tab = Tableau {
        rows,
        basis: (n_real..n_real + n_rows).collect(),
        ncols,
    };

    // Phase 1: minimize the sum of artificials.
    let mut phase1 = vec![Rat::zero(); ncols];
    for j in n_real..ncols {
        phase1[j] = Rat::one();
    }
    let bounded = tab.optimize(&phase1, ncols);
    debug_assert!(bounded, "phase 1 objective is bounded below by zero");
    let infeasibility: Rat = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n_real)
        .map(|(i, _)| tab.rhs(i).clone())
        .sum();
    if !infeasibility.is_zero() {
        return LpSolution::Infeasible;
    }
    // Pivot zero-level artificials out of the basis where possible;
    // rows that cannot be pivoted are redundant and dropped.
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= n_real {
            match (0..n_real).find(|&j| !tab.rows[r][j].is_zero()) {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    // Phase 2 over the real columns only.
    let mut costs = vec![Rat::zero(); ncols];
    for (j, c) in p.objective.iter().enumerate() {
        let signed = match p.sense {
            Sense::Min => c.clone(),
            Sense::Max => -c,
        };
        costs[j] = signed.clone();
        costs[dim + j] = -signed;
    }
    if !tab.optimize(&costs, n_real) {
        return LpSolution::Unbounded;
    }

    let mut point = vec![Rat::zero(); dim];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < dim {
            point[b] = &point[b] + tab.rhs(i);
        } else if b < 2 * dim {
            point[b - dim] = &point[b - dim] - tab.rhs(i);
        }
    }
    let value = dot(&p.objective, &point);
    let active_ineqs = p
        .feasible
        .active_ineq_indices(&point)
        .expect("point has polyhedron dimension");
    LpSolution::Optimal(LpOptimum {
        value,
        point,
        active_ineqs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, ratio};

    #[test]
    fn multiplier_segment_lp() {
        // max over {2*l1 + l2 = 1, l >= 0} with zero objective.
        let mut p = Polyhedron::whole_space(2);
        p.add_eq(vec![rat(2), rat(1)], rat(1));
        p.add_ineq(vec![rat(-1), rat(0)], rat(0));
        p.add_ineq(vec![rat(0), rat(-1)], rat(0));
        let lp = LpProblem {
            objective: vec![rat(0), rat(0)],
            sense: Sense::Max,
            feasible: p.clone(),
        };
        let sol = solve_lp(&lp);
        let opt = sol.optimum().expect("feasible");
        assert_eq!(opt.value, rat(0));
        assert!(p.member(&opt.point).unwrap());
    }

    #[test]
    fn free_space_with_nonzero_objective_is_unbounded() {
        let lp = LpProblem {
            objective: vec![rat(1), rat(-2)],
            sense: Sense::Min,
            feasible: Polyhedron::whole_space(2),
        };
        assert_eq!(solve_lp(&lp), LpSolution::Unbounded);
    }

    #[test]
    fn dual_critical_direction_lp() {
        // min -dy1 subject to dy1 <= 0: optimum at dy1 = 0.
        let mut p = Polyhedron::whole_space(1);
        p.add_ineq(vec![rat(1)], rat(0));
        let lp = LpProblem {
            objective: vec![rat(-1)],
            sense: Sense::Min,
            feasible: p,
        };
        let opt = solve_lp(&lp);
        let opt = opt.optimum().expect("bounded");
        assert_eq!(opt.value, rat(0));
        assert_eq!(opt.point, vec![rat(0)]);
        assert_eq!(opt.active_ineqs, vec![0]);
    }

    #[test]
    fn infeasible_system_detected() {
        let mut p = Polyhedron::whole_space(1);
        p.add_ineq(vec![rat(1)], rat(0));
        p.add_ineq(vec![rat(-1)], rat(-1));
        let lp = LpProblem {
            objective: vec![rat(0)],
            sense: Sense::Min,
            feasible: p,
        };
        assert_eq!(solve_lp(&lp), LpSolution::Infeasible);
    }

    #[test]
    fn bounded_polytope_optimum_is_a_vertex_value() {
        // min x + y over the triangle x,y >= 0, x + 2y <= 4, 3x + y <= 6.
        let mut p = Polyhedron::whole_space(2);
        p.add_ineq(vec![rat(-1), rat(0)], rat(0));
        p.add_ineq(vec![rat(0), rat(-1)], rat(0));
        p.add_ineq(vec![rat(1), rat(2)], rat(4));
        p.add_ineq(vec![rat(3), rat(1)], rat(6));
        let max = LpProblem {
            objective: vec![rat(1), rat(1)],
            sense: Sense::Max,
            feasible: p,
        };
        let opt = solve_lp(&max);
        let opt = opt.optimum().expect("bounded");
        // Vertex (8/5, 6/5) attains 14/5.
        assert_eq!(opt.value, ratio(14, 5));
        assert_eq!(opt.point, vec![ratio(8, 5), ratio(6, 5)]);
    }

    #[test]
    fn degenerate_equalities_terminate() {
        // Redundant equalities exercising the artificial-drop path.
        let mut p = Polyhedron::whole_space(2);
        p.add_eq(vec![rat(1), rat(1)], rat(1));
        p.add_eq(vec![rat(2), rat(2)], rat(2));
        p.add_ineq(vec![rat(-1), rat(0)], rat(0));
        let lp = LpProblem {
            objective: vec![rat(0), rat(1)],
            sense: Sense::Max,
            feasible: p,
        };
        let opt = solve_lp(&lp);
        let opt = opt.optimum().expect("bounded");
        assert_eq!(opt.value, rat(1));
    }
}
