//! Exact first-order analysis of mathematical programs with equilibrium
//! constraints (MPECs) at a user-supplied feasible point.
//!
//! Everything runs in arbitrary-precision rational arithmetic: the
//! points of interest are degenerate (active constraints, zero
//! multipliers, vanishing gradients) and tolerance-based geometry
//! misclassifies them. The toolkit computes
//!
//! - lower-level multiplier sets, their extreme points, and the
//!   point-checkable constraint qualifications (`multipliers`),
//! - lifted critical cones, directional critical sets, critical
//!   multipliers, affine-VI solution maps and the MPEC linearized cone
//!   (`cones`),
//! - tangent cones of complementarity-constrained feasible sets by
//!   branch enumeration, with certification status (`tangent`),
//! - primal and primal-dual stationarity including the disjunctive
//!   partition systems and the KKT reformulation (`stationarity`),
//! - the exact polyhedral substrate: simplex LP, vertex and extreme-ray
//!   enumeration, membership, set comparison, squared distances
//!   (`polyhedra`),
//! - polynomial parsing and exact differentiation (`expr`),
//! - independent brute-force oracles and seeded generators (`oracle`).

pub mod cones;
pub mod expr;
pub mod instance;
pub mod multipliers;
pub mod oracle;
pub mod polyhedra;
pub mod rat;
pub mod stationarity;
pub mod tangent;

pub use cones::{AviProblem, SolutionSetDescription};
pub use expr::{parse_expr, PolyExpr, RationalMatrix};
pub use instance::{load_instance, ActiveSets, EvalPoint, MpecInstance};
pub use multipliers::{multiplier_set, CqFlag, MultiplierAnalysis};
pub use polyhedra::{ConeUnion, LpProblem, LpSolution, Polyhedron, PolyhedralCone};
pub use rat::Rat;
pub use stationarity::{KktNlpInstance, StationarityCertificate};
pub use tangent::{Certification, TangentCone};
