//! Brute-force vertex and extreme-ray enumeration over active subsets.
//!
//! Vertices come from maximal-rank active subsets of constraints, extreme
//! rays from rank dim-1 subsets of the pointed part. Both are exhaustive
//! and capped at desk scale (`MAX_ENUM_DIM` / `MAX_ENUM_CONSTRAINTS`).

use itertools::Itertools;
use num_traits::Signed;

use super::linalg::{null_space_of_rows, rank_of_rows, solve_linear};
use super::{PolyhedraError, Polyhedron, PolyhedralCone, MAX_ENUM_CONSTRAINTS, MAX_ENUM_DIM};
use crate::rat::{dot, neg_vec, normalize_first_nonzero, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexEnumeration {
    /// Extreme points, deduplicated and in increasing lexicographic order.
    pub vertices: Vec<Vec<Rat>>,
    /// False when the polyhedron contains a line, in which case no
    /// vertices exist and the list is empty.
    pub pointed: bool,
}

fn check_limits(dim: usize, constraints: usize) -> Result<(), PolyhedraError> {
    if dim > MAX_ENUM_DIM {
        return Err(PolyhedraError::EnumerationLimit {
            what: "dimension",
            got: dim,
            cap: MAX_ENUM_DIM,
        });
    }
    if constraints > MAX_ENUM_CONSTRAINTS {
        return Err(PolyhedraError::EnumerationLimit {
            what: "constraints",
            got: constraints,
            cap: MAX_ENUM_CONSTRAINTS,
        });
    }
    Ok(())
}

/// Exactly the extreme points of `p`, via exhaustive enumeration of
/// active subsets completing the equality rows to full rank.
pub fn enumerate_vertices(p: &Polyhedron) -> Result<VertexEnumeration, PolyhedraError> {
    let dim = p.dim();
    check_limits(dim, p.constraint_count())?;
    let eq_rows: Vec<Vec<Rat>> = p.eqs().iter().map(|r| r.coeffs.clone()).collect();
    let eq_rhs: Vec<Rat> = p.eqs().iter().map(|r| r.rhs.clone()).collect();
    let all_normals: Vec<Vec<Rat>> = p
        .eqs()
        .iter()
        .chain(p.ineqs().iter())
        .map(|r| r.coeffs.clone())
        .collect();
    if rank_of_rows(&all_normals) < dim {
        // The polyhedron contains a line; no vertices exist.
        return Ok(VertexEnumeration {
            vertices: Vec::new(),
            pointed: false,
        });
    }
    let base_rank = rank_of_rows(&eq_rows);
    let needed = dim - base_rank;
    let mut vertices: Vec<Vec<Rat>> = Vec::new();
    for subset in (0..p.ineqs().len()).combinations(needed) {
        let mut rows = eq_rows.clone();
        let mut rhs = eq_rhs.clone();
        for &i in &subset {
            rows.push(p.ineqs()[i].coeffs.clone());
            rhs.push(p.ineqs()[i].rhs.clone());
        }
        let Some(sol) = solve_linear(&rows, &rhs, dim) else {
            continue;
        };
        if !sol.nullspace.is_empty() {
            continue;
        }
        if p.member(&sol.particular)? && !vertices.contains(&sol.particular) {
            vertices.push(sol.particular);
        }
    }
    vertices.sort();
    Ok(VertexEnumeration {
        vertices,
        pointed: true,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RayEnumeration {
    /// One representative per extreme ray of the pointed part, scaled so
    /// the first nonzero entry is +1 or -1, sorted lexicographically.
    pub rays: Vec<Vec<Rat>>,
    /// Basis of the lineality space. The cone equals the conic hull of
    /// `rays` plus the span of `lineality`.
    pub lineality: Vec<Vec<Rat>>,
}

/// Extreme rays and lineality of a polyhedral cone.
pub fn enumerate_extreme_rays(c: &PolyhedralCone) -> Result<RayEnumeration, PolyhedraError> {
    let dim = c.dim();
    check_limits(dim, c.constraint_count())?;
    let mut normals: Vec<Vec<Rat>> = c.eqs().to_vec();
    normals.extend(c.ineqs().iter().cloned());
    let lineality: Vec<Vec<Rat>> = null_space_of_rows(&normals, dim)
        .into_iter()
        .map(|v| normalize_first_nonzero(&v))
        .collect();

    // Work in the pointed section: the cone intersected with the
    // orthogonal complement of its lineality space.
    let mut eq_rows: Vec<Vec<Rat>> = c.eqs().to_vec();
    eq_rows.extend(lineality.iter().cloned());
    let base_rank = rank_of_rows(&eq_rows);
    if dim == 0 || base_rank + 1 > dim {
        return Ok(RayEnumeration {
            rays: Vec::new(),
            lineality,
        });
    }
    let needed = dim - 1 - base_rank;
    let mut rays: Vec<Vec<Rat>> = Vec::new();
    for subset in (0..c.ineqs().len()).combinations(needed) {
        let mut rows = eq_rows.clone();
        for &i in &subset {
            rows.push(c.ineqs()[i].clone());
        }
        let null = null_space_of_rows(&rows, dim);
        if null.len() != 1 {
            continue;
        }
        let candidate = normalize_first_nonzero(&null[0]);
        let forward = c.ineqs().iter().all(|a| !dot(a, &candidate).is_positive());
        let ray = if forward {
            candidate
        } else {
            let back = neg_vec(&candidate);
            if c.ineqs().iter().all(|a| !dot(a, &back).is_positive()) {
                back
            } else {
                continue;
            }
        };
        if !rays.contains(&ray) {
            rays.push(ray);
        }
    }
    rays.sort();
    Ok(RayEnumeration { rays, lineality })
}

/// H-representation of `cone(rays) + span(lineality)`, obtained by
/// enumerating the extreme rays and lineality of the dual cone: those
/// are exactly the facet normals of the primal.
pub fn cone_from_generators(
    dim: usize,
    rays: &[Vec<Rat>],
    lineality: &[Vec<Rat>],
) -> Result<PolyhedralCone, PolyhedraError> {
    let mut dual = PolyhedralCone::whole_space(dim);
    for r in rays {
        assert_eq!(r.len(), dim, "generator width mismatch");
        dual.add_ineq(r.clone());
    }
    for l in lineality {
        assert_eq!(l.len(), dim, "generator width mismatch");
        dual.add_eq(l.clone());
    }
    let gens = enumerate_extreme_rays(&dual)?;
    let mut out = PolyhedralCone::whole_space(dim);
    for h in gens.rays {
        out.add_ineq(h);
    }
    for h in gens.lineality {
        out.add_eq(h);
    }
    Ok(out)
}
