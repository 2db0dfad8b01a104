//! Exact elimination kernels shared by the polyhedral routines.

use num_traits::Zero;

use crate::rat::Rat;

/// Reduced row echelon form in place; returns the pivot column indices.
pub fn rref(rows: &mut [Vec<Rat>]) -> Vec<usize> {
    let nrows = rows.len();
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(pivot_row) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pivot_row);
        let inv = rows[r][c].clone().recip();
        for v in rows[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..nrows {
            if i != r && !rows[i][c].is_zero() {
                let factor = rows[i][c].clone();
                for j in 0..ncols {
                    let delta = &factor * &rows[r][j];
                    rows[i][j] = &rows[i][j] - &delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_of_rows(rows: &[Vec<Rat>]) -> usize {
    let mut work: Vec<Vec<Rat>> = rows.to_vec();
    rref(&mut work).len()
}

/// Basis of {v : rows * v = 0}; each vector has length `dim`.
pub fn null_space_of_rows(rows: &[Vec<Rat>], dim: usize) -> Vec<Vec<Rat>> {
    let mut work: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), dim);
            r.to_vec()
        })
        .collect();
    let pivots = rref(&mut work);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..dim {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); dim];
        v[free] = Rat::from_integer(1.into());
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = -work[i][free].clone();
        }
        basis.push(v);
    }
    basis
}

pub struct LinearSolution {
    pub particular: Vec<Rat>,
    pub nullspace: Vec<Vec<Rat>>,
}

/// Solves `rows * v = rhs`. Returns None when inconsistent.
pub fn solve_linear(rows: &[Vec<Rat>], rhs: &[Rat], dim: usize) -> Option<LinearSolution> {
    assert_eq!(rows.len(), rhs.len());
    let mut work: Vec<Vec<Rat>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            assert_eq!(r.len(), dim);
            let mut row = r.to_vec();
            row.push(b.clone());
            row
        })
        .collect();
    let pivots = rref(&mut work);
    // A pivot in the rhs column marks inconsistency.
    if pivots.last() == Some(&dim) {
        return None;
    }
    let mut particular = vec![Rat::zero(); dim];
    for (i, &pc) in pivots.iter().enumerate() {
        particular[pc] = work[i][dim].clone();
    }
    let coeff_rows: Vec<Vec<Rat>> = work.iter().map(|r| r[..dim].to_vec()).collect();
    let nullspace = null_space_of_rows(&coeff_rows, dim);
    Some(LinearSolution {
        particular,
        nullspace,
    })
}

/// Indices of a maximal linearly independent subset of `rows`,
/// scanning in order.
pub fn row_basis_indices(rows: &[Vec<Rat>]) -> Vec<usize> {
    let mut chosen: Vec<Vec<Rat>> = Vec::new();
    let mut idx = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut trial = chosen.clone();
        trial.push(row.clone());
        if rank_of_rows(&trial) > chosen.len() {
            chosen.push(row.clone());
            idx.push(i);
        }
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn rank_and_nullspace_of_singular_system() {
        let rows = vec![vec![rat(2), rat(0)], vec![rat(1), rat(0)]];
        assert_eq!(rank_of_rows(&rows), 1);
        let ns = null_space_of_rows(&rows, 2);
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0], vec![rat(0), rat(1)]);
    }

    #[test]
    fn zero_matrix_has_full_nullspace() {
        let rows = vec![vec![rat(0), rat(0), rat(0)]];
        assert_eq!(rank_of_rows(&rows), 0);
        assert_eq!(null_space_of_rows(&rows, 3).len(), 3);
    }

    #[test]
    fn solve_linear_detects_inconsistency() {
        let rows = vec![vec![rat(1), rat(1)], vec![rat(2), rat(2)]];
        assert!(solve_linear(&rows, &[rat(1), rat(3)], 2).is_none());
        let sol = solve_linear(&rows, &[rat(1), rat(2)], 2).unwrap();
        assert_eq!(sol.nullspace.len(), 1);
        let check: Rat = &sol.particular[0] + &sol.particular[1];
        assert_eq!(check, rat(1));
    }

    #[test]
    fn row_basis_skips_dependent_rows() {
        let rows = vec![
            vec![rat(1), rat(0)],
            vec![rat(2), rat(0)],
            vec![rat(0), rat(1)],
        ];
        assert_eq!(row_basis_indices(&rows), vec![0, 2]);
    }
}
