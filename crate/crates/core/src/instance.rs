//! The MPEC data model: problem definition, evaluation at a point,
//! active-set and complementarity index-set extraction, feasibility
//! reporting.
//!
//! Instances are
//!   min f(x,y)  s.t.  (x,y) in Z,  y in SOL(F(x,.), C(x)),
//! with C(x) = {y : g(x,y) <= 0} and polyhedral Z given by rows
//! G x + H y + a <= 0. The complementarity (NCP) form is recognized
//! exactly when g = -y componentwise.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_expr, ExprError, PolyExpr};
use crate::polyhedra::Polyhedron;
use crate::rat::{fmt_rat, parse_rat, Rat};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("document does not match the instance schema: {0}")]
    Schema(String),
    #[error("field {field}[{index}]: {source}")]
    Expr {
        field: &'static str,
        index: usize,
        source: ExprError,
    },
    #[error("expected {expected} entries in `{field}`, got {got}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("Z block is ragged or its width does not match n+m")]
    ZDimension,
    #[error("unknown asserted CQ `{0}` (expected SBCQ or CRCQ)")]
    UnknownCq(String),
    #[error("point has wrong dimensions: expected x:{n}, y:{m}")]
    PointDimension { n: usize, m: usize },
    #[error("NCP index sets requested on a non-NCP instance")]
    NotNcpForm,
    #[error("component {index} violates complementarity at the point; NCP classification undefined")]
    NcpClassification { index: usize },
    #[error("lower-level multiplier analysis failed: {0}")]
    MultiplierAnalysis(String),
}

/// Constraint qualifications that are asserted by the user rather than
/// verified: both are defined over sequences/neighborhoods and are not
/// finitely checkable from point data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AssertedCq {
    Sbcq,
    Crcq,
}

impl AssertedCq {
    pub fn as_str(&self) -> &'static str {
        match self {
            AssertedCq::Sbcq => "SBCQ",
            AssertedCq::Crcq => "CRCQ",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MpecInstance {
    pub n: usize,
    pub m: usize,
    pub l: usize,
    /// Upper-level objective f(x,y).
    pub objective: PolyExpr,
    /// Lower-level VI operator F(x,y), m components.
    pub vi_operator: Vec<PolyExpr>,
    /// Lower-level constraints g(x,y) <= 0, l components.
    pub vi_constraints: Vec<PolyExpr>,
    /// Polyhedral upper-level set; None means the whole space.
    pub upper_set: Option<Polyhedron>,
    /// True exactly when l == m and g_i == -y_i as polynomials.
    pub ncp_form: bool,
    pub asserted_cqs: BTreeSet<AssertedCq>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPoint {
    pub x: Vec<Rat>,
    pub y: Vec<Rat>,
}

impl EvalPoint {
    pub fn new(x: Vec<Rat>, y: Vec<Rat>) -> Self {
        EvalPoint { x, y }
    }

    pub fn from_vec(n: usize, m: usize, mut v: Vec<Rat>) -> Option<Self> {
        if v.len() != n + m {
            return None;
        }
        let y = v.split_off(n);
        Some(EvalPoint { x: v, y })
    }

    pub fn as_vec(&self) -> Vec<Rat> {
        let mut v = self.x.clone();
        v.extend(self.y.iter().cloned());
        v
    }
}

/// NCP index sets at a point: alpha has y_i > 0 = F_i, beta has both
/// zero (degenerate), gamma has y_i = 0 < F_i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NcpIndexSets {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub gamma: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSets {
    /// I(z) = {i : g_i(z) = 0}, sorted.
    pub active: Vec<usize>,
    /// Present exactly for NCP-form instances.
    pub ncp: Option<NcpIndexSets>,
}

impl ActiveSets {
    pub fn ncp_sets(&self) -> Result<&NcpIndexSets, InstanceError> {
        self.ncp.as_ref().ok_or(InstanceError::NotNcpForm)
    }
}

// ---------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RatDoc {
    Int(i64),
    Str(String),
}

impl RatDoc {
    fn to_rat(&self) -> Result<Rat, InstanceError> {
        match self {
            RatDoc::Int(v) => Ok(Rat::from_integer((*v).into())),
            RatDoc::Str(s) => {
                parse_rat(s).ok_or_else(|| InstanceError::Schema(format!("bad rational `{s}`")))
            }
        }
    }

    fn from_rat(r: &Rat) -> RatDoc {
        if r.is_integer() {
            if let Ok(v) = i64::try_from(r.to_integer()) {
                return RatDoc::Int(v);
            }
        }
        RatDoc::Str(fmt_rat(r))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ZDoc {
    #[serde(rename = "G")]
    g: Vec<Vec<RatDoc>>,
    #[serde(rename = "H")]
    h: Vec<Vec<RatDoc>>,
    a: Vec<RatDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    n: usize,
    m: usize,
    l: usize,
    f: String,
    #[serde(rename = "F")]
    vi_operator: Vec<String>,
    g: Vec<String>,
    #[serde(rename = "Z")]
    z: Option<ZDoc>,
    #[serde(default)]
    asserted_cqs: Vec<String>,
}

/// Parses an instance document (see the JSON schema in the README).
/// The NCP form is auto-detected by exact comparison g_i = -y_i.
pub fn load_instance(document: &str) -> Result<MpecInstance, InstanceError> {
    let doc: InstanceDoc =
        serde_json::from_str(document).map_err(|e| InstanceError::Schema(e.to_string()))?;
    let arity = (doc.n, doc.m);
    let parse_field = |field: &'static str, index: usize, text: &str| {
        parse_expr(text, arity).map_err(|source| InstanceError::Expr {
            field,
            index,
            source,
        })
    };
    if doc.vi_operator.len() != doc.m {
        return Err(InstanceError::LengthMismatch {
            field: "F",
            expected: doc.m,
            got: doc.vi_operator.len(),
        });
    }
    if doc.g.len() != doc.l {
        return Err(InstanceError::LengthMismatch {
            field: "g",
            expected: doc.l,
            got: doc.g.len(),
        });
    }
    let objective = parse_field("f", 0, &doc.f)?;
    let vi_operator = doc
        .vi_operator
        .iter()
        .enumerate()
        .map(|(i, s)| parse_field("F", i, s))
        .collect::<Result<Vec<_>, _>>()?;
    let vi_constraints = doc
        .g
        .iter()
        .enumerate()
        .map(|(i, s)| parse_field("g", i, s))
        .collect::<Result<Vec<_>, _>>()?;

    let upper_set = match &doc.z {
        None => None,
        Some(z) => {
            let rows = z.g.len();
            if z.h.len() != rows || z.a.len() != rows {
                return Err(InstanceError::ZDimension);
            }
            let mut p = Polyhedron::whole_space(doc.n + doc.m);
            for j in 0..rows {
                if z.g[j].len() != doc.n || z.h[j].len() != doc.m {
                    return Err(InstanceError::ZDimension);
                }
                let mut coeffs = Vec::with_capacity(doc.n + doc.m);
                for v in &z.g[j] {
                    coeffs.push(v.to_rat()?);
                }
                for v in &z.h[j] {
                    coeffs.push(v.to_rat()?);
                }
                // G x + H y + a <= 0  <=>  (G|H).(x,y) <= -a
                p.add_ineq(coeffs, -z.a[j].to_rat()?);
            }
            Some(p)
        }
    };

    let mut asserted_cqs = BTreeSet::new();
    for cq in &doc.asserted_cqs {
        match cq.to_ascii_uppercase().as_str() {
            "SBCQ" => {
                asserted_cqs.insert(AssertedCq::Sbcq);
            }
            "CRCQ" => {
                asserted_cqs.insert(AssertedCq::Crcq);
            }
            other => return Err(InstanceError::UnknownCq(other.to_string())),
        }
    }

    Ok(MpecInstance::new(
        doc.n,
        doc.m,
        doc.l,
        objective,
        vi_operator,
        vi_constraints,
        upper_set,
        asserted_cqs,
    ))
}

fn detect_ncp_form(
    m: usize,
    l: usize,
    arity: (usize, usize),
    g: &[PolyExpr],
) -> bool {
    if l != m {
        return false;
    }
    g.iter().enumerate().all(|(i, gi)| {
        let var = PolyExpr::variable(arity, arity.0 + i).expect("index in range");
        *gi == -&var
    })
}

impl MpecInstance {
    /// Builds an instance directly from parsed parts; the NCP form is
    /// auto-detected by exact comparison g_i = -y_i.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        m: usize,
        l: usize,
        objective: PolyExpr,
        vi_operator: Vec<PolyExpr>,
        vi_constraints: Vec<PolyExpr>,
        upper_set: Option<Polyhedron>,
        asserted_cqs: BTreeSet<AssertedCq>,
    ) -> Self {
        assert_eq!(vi_operator.len(), m, "F must have m components");
        assert_eq!(vi_constraints.len(), l, "g must have l components");
        let ncp_form = detect_ncp_form(m, l, (n, m), &vi_constraints);
        MpecInstance {
            n,
            m,
            l,
            objective,
            vi_operator,
            vi_constraints,
            upper_set,
            ncp_form,
            asserted_cqs,
        }
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn check_point(&self, z: &EvalPoint) -> Result<(), InstanceError> {
        if z.x.len() != self.n || z.y.len() != self.m {
            return Err(InstanceError::PointDimension {
                n: self.n,
                m: self.m,
            });
        }
        Ok(())
    }

    pub fn g_values(&self, z: &EvalPoint) -> Result<Vec<Rat>, InstanceError> {
        self.check_point(z)?;
        let v = z.as_vec();
        self.vi_constraints
            .iter()
            .map(|g| {
                g.evaluate(&v).map_err(|source| InstanceError::Expr {
                    field: "g",
                    index: 0,
                    source,
                })
            })
            .collect()
    }

    pub fn f_values(&self, z: &EvalPoint) -> Result<Vec<Rat>, InstanceError> {
        self.check_point(z)?;
        let v = z.as_vec();
        self.vi_operator
            .iter()
            .map(|f| {
                f.evaluate(&v).map_err(|source| InstanceError::Expr {
                    field: "F",
                    index: 0,
                    source,
                })
            })
            .collect()
    }

    /// Canonical document for this instance; load(to_json) round-trips.
    pub fn to_json(&self) -> String {
        let z = self.upper_set.as_ref().map(|p| {
            let mut g = Vec::new();
            let mut h = Vec::new();
            let mut a = Vec::new();
            for row in p.ineqs() {
                g.push(row.coeffs[..self.n].iter().map(RatDoc::from_rat).collect());
                h.push(row.coeffs[self.n..].iter().map(RatDoc::from_rat).collect());
                a.push(RatDoc::from_rat(&-&row.rhs));
            }
            ZDoc { g, h, a }
        });
        let doc = InstanceDoc {
            n: self.n,
            m: self.m,
            l: self.l,
            f: self.objective.to_string(),
            vi_operator: self.vi_operator.iter().map(|p| p.to_string()).collect(),
            g: self.vi_constraints.iter().map(|p| p.to_string()).collect(),
            z,
            asserted_cqs: self
                .asserted_cqs
                .iter()
                .map(|c| c.as_str().to_string())
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("instance documents always serialize")
    }
}

/// Exact active-set classification at a point. For NCP instances the
/// alpha/beta/gamma partition is computed with exact zero tests.
pub fn active_sets(inst: &MpecInstance, z: &EvalPoint) -> Result<ActiveSets, InstanceError> {
    inst.check_point(z)?;
    let g_vals = inst.g_values(z)?;
    let active: Vec<usize> = g_vals
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_zero())
        .map(|(i, _)| i)
        .collect();
    let ncp = if inst.ncp_form {
        let f_vals = inst.f_values(z)?;
        let mut sets = NcpIndexSets {
            alpha: Vec::new(),
            beta: Vec::new(),
            gamma: Vec::new(),
        };
        for i in 0..inst.m {
            let yi = &z.y[i];
            let fi = &f_vals[i];
            if yi.is_positive() && fi.is_zero() {
                sets.alpha.push(i);
            } else if yi.is_zero() && fi.is_zero() {
                sets.beta.push(i);
            } else if yi.is_zero() && fi.is_positive() {
                sets.gamma.push(i);
            } else {
                return Err(InstanceError::NcpClassification { index: i });
            }
        }
        Some(sets)
    } else {
        None
    };
    Ok(ActiveSets { active, ncp })
}

/// Lower-level feasibility evidence carried by a report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LowerLevelEvidence {
    /// NCP case: y >= 0, F >= 0 and y_i F_i = 0, all exact.
    Complementarity { violations: Vec<String> },
    /// General case: existence of a KKT multiplier. This is sufficient
    /// evidence only; equivalence with y in SOL(F,C) needs lower-level
    /// convexity, which the tool does not check.
    KktCertified { multiplier_exists: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub in_upper_set: bool,
    pub upper_violations: Vec<usize>,
    pub g_nonpositive: bool,
    pub g_violations: Vec<usize>,
    pub lower_level: LowerLevelEvidence,
    pub feasible: bool,
}

/// Exact feasibility report: membership in Z, g <= 0, and lower-level
/// evidence (complementarity for NCP instances, KKT-certified multiplier
/// existence otherwise).
pub fn feasibility_report(inst: &MpecInstance, z: &EvalPoint) -> Result<FeasibilityReport, InstanceError> {
    inst.check_point(z)?;
    let v = z.as_vec();
    let (in_upper_set, upper_violations) = match &inst.upper_set {
        None => (true, Vec::new()),
        Some(p) => {
            let mut bad = Vec::new();
            for (j, row) in p.ineqs().iter().enumerate() {
                if crate::rat::dot(&row.coeffs, &v) > row.rhs {
                    bad.push(j);
                }
            }
            (bad.is_empty(), bad)
        }
    };
    let g_vals = inst.g_values(z)?;
    let g_violations: Vec<usize> = g_vals
        .iter()
        .enumerate()
        .filter(|(_, gv)| gv.is_positive())
        .map(|(i, _)| i)
        .collect();
    let g_nonpositive = g_violations.is_empty();

    let lower_level = if inst.ncp_form {
        let f_vals = inst.f_values(z)?;
        let mut violations = Vec::new();
        for i in 0..inst.m {
            if z.y[i].is_negative() {
                violations.push(format!("y{} < 0", i + 1));
            }
            if f_vals[i].is_negative() {
                violations.push(format!("F{} < 0 at the point", i + 1));
            }
            if !(&z.y[i] * &f_vals[i]).is_zero() {
                violations.push(format!("y{} * F{} != 0", i + 1, i + 1));
            }
        }
        LowerLevelEvidence::Complementarity { violations }
    } else {
        let ma = crate::multipliers::multiplier_set(inst, z)
            .map_err(|e| InstanceError::MultiplierAnalysis(e.to_string()))?;
        LowerLevelEvidence::KktCertified {
            multiplier_exists: !ma.is_empty,
        }
    };
    let lower_ok = match &lower_level {
        LowerLevelEvidence::Complementarity { violations } => violations.is_empty(),
        LowerLevelEvidence::KktCertified { multiplier_exists } => *multiplier_exists,
    };
    Ok(FeasibilityReport {
        feasible: in_upper_set && g_nonpositive && lower_ok,
        in_upper_set,
        upper_violations,
        g_nonpositive,
        g_violations,
        lower_level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    pub(crate) const Q2_DOC: &str = r#"{
        "n": 1, "m": 2, "l": 2,
        "f": "0",
        "F": ["x1^2+x1+y1", "x1^3+y2"],
        "g": ["-y1", "-y2"],
        "Z": null,
        "asserted_cqs": []
    }"#;

    #[test]
    fn q2_loads_as_ncp_form() {
        let inst = load_instance(Q2_DOC).unwrap();
        assert!(inst.ncp_form);
        assert_eq!(inst.n, 1);
        assert_eq!(inst.m, 2);
    }

    #[test]
    fn empty_lower_level_is_valid() {
        let doc = r#"{"n":1,"m":0,"l":0,"f":"0","F":[],"g":[],"Z":null,"asserted_cqs":[]}"#;
        let inst = load_instance(doc).unwrap();
        assert_eq!(inst.m, 0);
        assert!(inst.ncp_form); // vacuously: l == m == 0
    }

    #[test]
    fn wrong_g_length_is_schema_error() {
        let doc = r#"{"n":1,"m":1,"l":2,"f":"0","F":["y1"],"g":["-y1"],"Z":null}"#;
        assert!(matches!(
            load_instance(doc),
            Err(InstanceError::LengthMismatch { field: "g", .. })
        ));
    }

    #[test]
    fn round_trip_is_identity() {
        let inst = load_instance(Q2_DOC).unwrap();
        let reloaded = load_instance(&inst.to_json()).unwrap();
        assert_eq!(inst.vi_operator, reloaded.vi_operator);
        assert_eq!(inst.vi_constraints, reloaded.vi_constraints);
        assert_eq!(inst.objective, reloaded.objective);
        assert_eq!(inst.upper_set, reloaded.upper_set);
        assert_eq!(inst.ncp_form, reloaded.ncp_form);
    }

    #[test]
    fn beta_indices_at_origin() {
        let inst = load_instance(Q2_DOC).unwrap();
        let z = EvalPoint::new(vec![rat(0)], vec![rat(0), rat(0)]);
        let sets = active_sets(&inst, &z).unwrap();
        assert_eq!(sets.active, vec![0, 1]);
        let ncp = sets.ncp_sets().unwrap();
        assert_eq!(ncp.beta, vec![0, 1]);
        assert!(ncp.alpha.is_empty());
        assert!(ncp.gamma.is_empty());
    }

    #[test]
    fn projection_instance_active_set() {
        // Lower level: projection onto {y'y <= 1, y1 <= 1} with x=(2,0).
        let doc = r#"{
            "n": 2, "m": 2, "l": 2,
            "f": "y1",
            "F": ["y1-x1", "y2-x2"],
            "g": ["y1^2+y2^2-1", "y1-1"],
            "Z": null,
            "asserted_cqs": []
        }"#;
        let inst = load_instance(doc).unwrap();
        assert!(!inst.ncp_form);
        let z = EvalPoint::new(vec![rat(2), rat(0)], vec![rat(1), rat(0)]);
        let sets = active_sets(&inst, &z).unwrap();
        assert_eq!(sets.active, vec![0, 1]);
        assert!(sets.ncp.is_none());
    }

    #[test]
    fn inactive_everywhere() {
        let doc = r#"{"n":0,"m":1,"l":1,"f":"0","F":["y1"],"g":["-y1-1"],"Z":null}"#;
        let inst = load_instance(doc).unwrap();
        let z = EvalPoint::new(vec![], vec![rat(0)]);
        let sets = active_sets(&inst, &z).unwrap();
        assert!(sets.active.is_empty());
    }

    #[test]
    fn complementarity_violation_reported() {
        let doc = r#"{"n":0,"m":1,"l":1,"f":"0","F":["y1"],"g":["-y1"],"Z":null}"#;
        let inst = load_instance(doc).unwrap();
        // y1 = 1 gives F1 = 1, product 1 != 0.
        let z = EvalPoint::new(vec![], vec![rat(1)]);
        let report = feasibility_report(&inst, &z).unwrap();
        assert!(!report.feasible);
        match report.lower_level {
            LowerLevelEvidence::Complementarity { violations } => {
                assert!(violations.iter().any(|v| v.contains("!= 0")));
            }
            _ => panic!("expected complementarity evidence"),
        }
    }
}
