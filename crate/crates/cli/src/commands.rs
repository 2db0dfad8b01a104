//! One builder per subcommand: load, analyze, assemble the report.

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

use mpec_core::cones::{
    critical_multipliers, directional_critical_set, dual_critical_lp, linearized_cone,
    DualLpOutcome,
};
use mpec_core::expr::RationalMatrix;
use mpec_core::instance::{
    active_sets, feasibility_report, EvalPoint, LowerLevelEvidence, MpecInstance,
};
use mpec_core::multipliers::{extreme_multipliers, multiplier_set};
use mpec_core::oracle::{brute_lcp, brute_lp, random_instance, random_lp, Profile};
use mpec_core::polyhedra::{solve_lp, LpSolution};
use mpec_core::rat::{fmt_rat, fmt_vec, parse_rat, rat, Rat};
use mpec_core::stationarity::{full_pd_stationarity, kkt_reformulate, primal_stationarity, PdVerdict};
use mpec_core::tangent::{
    check_full_cq, convex_hull_union, sample_tangent_directions, tangent_cone, Certification,
    FullCqVerdict, SampleConfig, TangentError,
};
use mpec_core::AviProblem;

use crate::report::{fmt_rat_list, kv, union_body, AnalysisReport, Body, ConeView, PolyView};

pub fn parse_rat_list(text: &str) -> Result<Vec<Rat>> {
    text.split(',')
        .map(|chunk| {
            parse_rat(chunk.trim())
                .ok_or_else(|| anyhow!("cannot parse `{}` as a rational", chunk.trim()))
        })
        .collect()
}

pub fn parse_point(inst: &MpecInstance, text: &str) -> Result<EvalPoint> {
    let values = parse_rat_list(text)?;
    EvalPoint::from_vec(inst.n, inst.m, values).ok_or_else(|| {
        anyhow!(
            "--point must carry n+m = {} rationals for this instance",
            inst.n + inst.m
        )
    })
}

pub fn load(path: &std::path::Path) -> Result<(MpecInstance, String)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read instance file {}", path.display()))?;
    let inst = mpec_core::load_instance(&text)?;
    let digest = hex_digest(&inst.to_json());
    Ok((inst, digest))
}

fn hex_digest(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

fn base_report(command: &str, digest: &str, z: &EvalPoint) -> AnalysisReport {
    let mut r = AnalysisReport::new(command);
    r.instance_digest = Some(digest.to_string());
    r.point = Some(fmt_rat_list(&z.as_vec()));
    r
}

/// Resolves the --multipliers flag: `extreme` or `list:<file>` with a
/// JSON array of rational vectors.
pub fn resolve_multipliers(
    inst: &MpecInstance,
    z: &EvalPoint,
    spec: &str,
    report: &mut AnalysisReport,
) -> Result<Vec<Vec<Rat>>> {
    if spec == "extreme" {
        let ma = multiplier_set(inst, z)?;
        report.note(format!(
            "multiplier list: extreme points M^e(z), {} vectors",
            ma.extreme_points.len()
        ));
        return Ok(ma.extreme_points);
    }
    if let Some(path) = spec.strip_prefix("list:") {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read multiplier list {path}"))?;
        let raw: Vec<Vec<serde_json::Value>> =
            serde_json::from_str(&text).context("multiplier list must be a JSON array of arrays")?;
        let mut out = Vec::new();
        for row in raw {
            let mut lambda = Vec::new();
            for v in row {
                let r = match &v {
                    serde_json::Value::Number(n) => n
                        .as_i64()
                        .map(rat)
                        .ok_or_else(|| anyhow!("non-integer number in multiplier list"))?,
                    serde_json::Value::String(s) => parse_rat(s)
                        .ok_or_else(|| anyhow!("cannot parse `{s}` as a rational"))?,
                    other => bail!("unsupported multiplier entry {other}"),
                };
                lambda.push(r);
            }
            out.push(lambda);
        }
        report.note(format!(
            "multiplier list: user-supplied ({path}), {} vectors",
            out.len()
        ));
        return Ok(out);
    }
    bail!("--multipliers must be `extreme` or `list:<file>`");
}

pub fn check(inst: &MpecInstance, digest: &str, z: &EvalPoint) -> Result<AnalysisReport> {
    let mut report = base_report("check", digest, z);
    let fr = feasibility_report(inst, z)?;
    let mut entries = vec![
        ("feasible", fr.feasible.to_string()),
        ("in upper-level set Z", fr.in_upper_set.to_string()),
        ("g(z) <= 0", fr.g_nonpositive.to_string()),
    ];
    if !fr.upper_violations.is_empty() {
        entries.push(("violated Z rows", format!("{:?}", fr.upper_violations)));
    }
    if !fr.g_violations.is_empty() {
        entries.push(("violated g rows", format!("{:?}", fr.g_violations)));
    }
    match &fr.lower_level {
        LowerLevelEvidence::Complementarity { violations } => {
            entries.push((
                "complementarity",
                if violations.is_empty() {
                    "holds (y >= 0, F >= 0, y_i F_i = 0)".to_string()
                } else {
                    format!("violated: {}", violations.join("; "))
                },
            ));
        }
        LowerLevelEvidence::KktCertified { multiplier_exists } => {
            entries.push((
                "lower-level evidence",
                if *multiplier_exists {
                    "KKT-certified: M(z) is nonempty".to_string()
                } else {
                    "no KKT multiplier: M(z) = (empty)".to_string()
                },
            ));
            report.note(
                "general VI feasibility is certified via KKT multiplier existence; \
                 equivalence requires lower-level convexity, which is not checked",
            );
        }
    }
    report.push("feasibility", kv(entries));
    let sets = active_sets(inst, z)?;
    let mut act = vec![(
        "active I(z)",
        format!("{:?}", sets.active.iter().map(|i| i + 1).collect::<Vec<_>>()),
    )];
    if let Some(ncp) = &sets.ncp {
        let disp = |v: &Vec<usize>| format!("{:?}", v.iter().map(|i| i + 1).collect::<Vec<_>>());
        act.push(("alpha (y > 0 = F)", disp(&ncp.alpha)));
        act.push(("beta (y = 0 = F, degenerate)", disp(&ncp.beta)));
        act.push(("gamma (y = 0 < F)", disp(&ncp.gamma)));
    }
    report.push("active sets", kv(act));
    echo_asserted(inst, &mut report);
    Ok(report)
}

pub fn multipliers_cmd(inst: &MpecInstance, digest: &str, z: &EvalPoint) -> Result<AnalysisReport> {
    let mut report = base_report("multipliers", digest, z);
    let ma = multiplier_set(inst, z)?;
    if ma.is_empty {
        report.push("multiplier set", kv(vec![("M(z)", "(empty)".to_string())]));
    } else {
        report.push(
            "multiplier set",
            Body::Polyhedron {
                set: PolyView::from_polyhedron(&ma.set),
            },
        );
    }
    report.push(
        "extreme points",
        Body::List {
            items: extreme_multipliers(&ma).iter().map(|v| fmt_vec(v)).collect(),
        },
    );
    report.push(
        "constraint qualifications",
        kv(vec![
            ("LICQ", ma.licq.as_str().to_string()),
            ("MFCQ", ma.mfcq.as_str().to_string()),
            ("SMFCQ (singleton M)", ma.smfcq.as_str().to_string()),
            (
                "strong nondegeneracy",
                ma.strongly_nondegenerate.as_str().to_string(),
            ),
        ]),
    );
    report.note(
        "strong nondegeneracy is implemented from the exercise-section statement: \
         LICQ with a valid multiplier and componentwise strict complementarity",
    );
    echo_asserted(inst, &mut report);
    Ok(report)
}

pub fn critical(
    inst: &MpecInstance,
    digest: &str,
    z: &EvalPoint,
    dx: &[Rat],
    lambda: Option<Vec<Rat>>,
) -> Result<AnalysisReport> {
    let mut report = base_report("critical", digest, z);
    report.push(
        "direction",
        kv(vec![("dx", fmt_vec(dx))]),
    );
    let ma = multiplier_set(inst, z)?;
    let lambda = match lambda {
        Some(l) => Some(l),
        None if ma.is_singleton => {
            report.note("lambda defaulted to the unique multiplier");
            Some(ma.extreme_points[0].clone())
        }
        None => None,
    };
    match &lambda {
        Some(l) => {
            let k = directional_critical_set(inst, z, l, dx)?;
            report.push(
                &format!("directional critical set K(z, {}; dx)", fmt_vec(l)),
                Body::Polyhedron {
                    set: PolyView::from_polyhedron(&k),
                },
            );
        }
        None => {
            report.push(
                "directional critical set",
                kv(vec![(
                    "note",
                    "M(z) is not a singleton; pass --lambda to slice a specific multiplier"
                        .to_string(),
                )]),
            );
        }
    }
    if ma.is_empty {
        report.push(
            "critical multipliers",
            kv(vec![("M(z)", "(empty)".to_string())]),
        );
    } else {
        let crit = critical_multipliers(inst, z, dx)?;
        report.push(
            "critical multipliers M^c(z; dx)",
            Body::Polyhedron {
                set: PolyView::from_polyhedron(&crit.face),
            },
        );
        report.push(
            "critical LP",
            kv(vec![("optimal value", fmt_rat(&crit.value))]),
        );
    }
    match dual_critical_lp(inst, z, dx)? {
        DualLpOutcome::Optimal { face, value } => {
            report.push(
                "dual LP optimal set",
                Body::Polyhedron {
                    set: PolyView::from_polyhedron(&face),
                },
            );
            report.push("dual LP", kv(vec![("optimal value", fmt_rat(&value))]));
        }
        DualLpOutcome::Infeasible => {
            report.push("dual LP", kv(vec![("status", "infeasible".to_string())]));
        }
        DualLpOutcome::Unbounded => {
            report.push("dual LP", kv(vec![("status", "unbounded".to_string())]));
        }
    }
    Ok(report)
}

pub fn cones_cmd(
    inst: &MpecInstance,
    digest: &str,
    z: &EvalPoint,
    multipliers_spec: &str,
    sample: &SampleConfig,
) -> Result<AnalysisReport> {
    let mut report = base_report("cones", digest, z);
    let tangent = match tangent_cone(inst, z) {
        Ok(t) => {
            let status = t.status;
            report.push(
                "tangent cone T(z; F)",
                union_body(&t.union, Some(status.as_str().to_string()))?,
            );
            if status != Certification::Certified {
                report.mark_inconclusive();
            }
            Some(t)
        }
        Err(TangentError::UnsupportedStructure) => {
            report.push(
                "tangent cone T(z; F)",
                kv(vec![(
                    "status",
                    "heuristic — exact tangent unavailable for this structural class; \
                     sampling oracle only"
                        .to_string(),
                )]),
            );
            report.mark_inconclusive();
            None
        }
        Err(e) => return Err(e.into()),
    };
    let lambdas = resolve_multipliers(inst, z, multipliers_spec, &mut report)?;
    if lambdas.is_empty() {
        report.push(
            "MPEC linearized cone L(z; F)",
            kv(vec![("M(z)", "(empty) — no linearization".to_string())]),
        );
    } else {
        let l = linearized_cone(inst, z, &lambdas)?;
        report.push("MPEC linearized cone L(z; F)", union_body(&l, None)?);
    }
    if let Some(t) = &tangent {
        let hull = convex_hull_union(&t.union)?;
        report.push(
            "convex hull of T(z; F)",
            Body::Cone {
                cone: ConeView::from_cone(&hull)?,
            },
        );
        let cq = check_full_cq(inst, z, &lambdas)?;
        let verdict = match &cq.verdict {
            FullCqVerdict::Holds => ("holds".to_string(), None),
            FullCqVerdict::Fails { witness } => {
                ("fails".to_string(), Some(fmt_vec(witness)))
            }
            FullCqVerdict::Inconclusive => {
                report.mark_inconclusive();
                ("inconclusive".to_string(), None)
            }
        };
        let mut entries = vec![("verdict", verdict.0)];
        if let Some(w) = verdict.1 {
            entries.push(("witness in the symmetric difference", w));
        }
        report.push("tangent vs linearized (CQ check)", kv(entries));
        report.note(
            "CQ semantics follow the supplied multiplier list: extreme points give the \
             extreme CQ; the full CQ needs all of M(z)",
        );
    }
    let dirs = sample_tangent_directions(inst, z, sample)?;
    report.push(
        "sampled tangent directions (floating oracle)",
        Body::List {
            items: dirs
                .iter()
                .map(|d| {
                    let parts: Vec<String> = d.iter().map(|v| format!("{v:.6}")).collect();
                    format!("({})", parts.join(", "))
                })
                .collect(),
        },
    );
    report.note(format!(
        "sampling oracle: seed {}, {} samples per branch, radii {:?} — DERIVED-quality \
         evidence only",
        sample.seed, sample.count, sample.radii
    ));
    echo_asserted(inst, &mut report);
    Ok(report)
}

pub fn stationarity_cmd(
    inst: &MpecInstance,
    digest: &str,
    z: &EvalPoint,
    multipliers_spec: &str,
    all_partitions: bool,
) -> Result<AnalysisReport> {
    let mut report = base_report("stationarity", digest, z);
    let lambdas = resolve_multipliers(inst, z, multipliers_spec, &mut report)?;
    if lambdas.is_empty() {
        report.push(
            "verdict",
            kv(vec![(
                "stationarity",
                "not applicable — no KKT multiplier (M(z) is empty)".to_string(),
            )]),
        );
        return Ok(report);
    }
    let l_cone = linearized_cone(inst, z, &lambdas)?;
    let primal = primal_stationarity(inst, z, &l_cone)?;
    let mut entries = vec![(
        "primal over L(z; F)",
        if primal.stationary {
            "stationary (grad f . d >= 0 on every generator)".to_string()
        } else {
            "not stationary".to_string()
        },
    )];
    if let Some(d) = &primal.counterexample {
        entries.push(("descent direction", fmt_vec(d)));
    }
    report.push("primal stationarity", kv(entries));

    let pd = full_pd_stationarity(inst, z, &lambdas)?;
    let verdict = match pd.verdict {
        PdVerdict::Stationary => "stationary (all partition systems feasible)",
        PdVerdict::NotStationary => "not stationary (some partition system infeasible)",
        PdVerdict::NoMultiplier => "not applicable — no KKT multiplier",
    };
    report.push(
        "primal-dual stationarity",
        kv(vec![
            ("verdict", verdict.to_string()),
            ("systems solved", pd.outcomes.len().to_string()),
        ]),
    );
    if all_partitions {
        let rows: Vec<Vec<String>> = pd
            .outcomes
            .iter()
            .map(|o| {
                let disp =
                    |v: &Vec<usize>| format!("{:?}", v.iter().map(|i| i + 1).collect::<Vec<_>>());
                vec![
                    fmt_vec(&o.partition.lambda),
                    disp(&o.partition.alpha),
                    disp(&o.partition.alpha_bar),
                    match &o.certificate {
                        Some(c) => format!(
                            "zeta={} eta={} pi={}",
                            fmt_vec(&c.zeta),
                            fmt_vec(&c.eta),
                            fmt_vec(&c.pi)
                        ),
                        None => "infeasible".to_string(),
                    },
                ]
            })
            .collect();
        report.push(
            "partition systems",
            Body::Table {
                header: vec![
                    "lambda".to_string(),
                    "alpha".to_string(),
                    "alpha_bar".to_string(),
                    "certificate".to_string(),
                ],
                rows,
            },
        );
    }
    report.note(
        "the primal-dual verdict enumerates the supplied finite multiplier list; with the \
         extreme points this realizes the finite-verification corollary (CRCQ + extreme CQ)",
    );
    echo_asserted(inst, &mut report);
    Ok(report)
}

pub fn kkt_cmd(inst: &MpecInstance, digest: &str) -> Result<AnalysisReport> {
    let mut report = AnalysisReport::new("kkt-reformulate");
    report.instance_digest = Some(digest.to_string());
    let nlp = kkt_reformulate(inst);
    report.push(
        "variables",
        kv(vec![
            ("x", format!("x1..x{}", nlp.n)),
            ("y", format!("y1..y{}", nlp.m)),
            (
                "lambda",
                format!("printed as y{}..y{}", nlp.m + 1, nlp.m + nlp.l),
            ),
        ]),
    );
    report.push(
        "objective",
        kv(vec![("f", nlp.objective.to_string())]),
    );
    report.push(
        "Lagrangian equalities (= 0)",
        Body::List {
            items: nlp.plain_equalities.iter().map(|p| p.to_string()).collect(),
        },
    );
    report.push(
        "complementarity pairs (u >= 0, v >= 0, u v = 0)",
        Body::List {
            items: nlp
                .comp_pairs
                .iter()
                .map(|(u, v)| format!("u = {u}, v = {v}"))
                .collect(),
        },
    );
    report.push(
        "extra inequalities (<= 0)",
        Body::List {
            items: nlp
                .plain_inequalities
                .iter()
                .map(|p| p.to_string())
                .collect(),
        },
    );
    Ok(report)
}

pub fn cross_check(seed: u64, trials: usize) -> Result<AnalysisReport> {
    let mut report = AnalysisReport::new("cross-check");
    let mut mismatches: Vec<String> = Vec::new();

    for t in 0..trials {
        let lp = random_lp(seed.wrapping_add(t as u64));
        let fast = solve_lp(&lp);
        let slow = brute_lp(&lp)?;
        let agree = match (&fast, &slow) {
            (LpSolution::Optimal(a), LpSolution::Optimal(b)) => a.value == b.value,
            (a, b) => a == b,
        };
        if !agree {
            mismatches.push(format!("lp trial {t}: simplex {fast:?} vs oracle {slow:?}"));
        }
    }

    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x4c43_5021);
    for t in 0..trials {
        let m = rng.gen_range(1..=3usize);
        let q: Vec<Rat> = (0..m).map(|_| rat(rng.gen_range(-5i64..=5))).collect();
        let mut rows = Vec::new();
        for _ in 0..m {
            rows.push((0..m).map(|_| rat(rng.gen_range(-5i64..=5))).collect());
        }
        let m_matrix = RationalMatrix::from_rows(rows);
        let oracle = brute_lcp(&q, &m_matrix)?;
        if oracle.degenerate {
            continue;
        }
        let mut k = mpec_core::Polyhedron::whole_space(m);
        for i in 0..m {
            let mut row = vec![rat(0); m];
            row[i] = rat(-1);
            k.add_ineq(row, rat(0));
        }
        let avi = AviProblem {
            q: q.clone(),
            m_matrix: m_matrix.clone(),
            k_set: k,
        };
        let sol = mpec_core::cones::solve_avi(&avi)?;
        for y in &oracle.solutions {
            if !sol.member(y)? {
                mismatches.push(format!("lcp trial {t}: oracle solution {} missing", fmt_vec(y)));
            }
        }
    }

    let mut infeasible = 0usize;
    for t in 0..trials {
        for profile in [Profile::NcpSmall, Profile::ViSmall, Profile::PolyhedralZ] {
            let r = random_instance(seed.wrapping_add(t as u64), profile);
            let fr = feasibility_report(&r.instance, &r.point)?;
            if !fr.feasible {
                infeasible += 1;
                mismatches.push(format!("{profile:?} seed {t}: designed point infeasible"));
            }
        }
    }

    report.push(
        "summary",
        kv(vec![
            ("lp trials", trials.to_string()),
            ("lcp trials", trials.to_string()),
            ("instance feasibility checks", (3 * trials).to_string()),
            ("infeasible designed points", infeasible.to_string()),
            ("mismatches", mismatches.len().to_string()),
        ]),
    );
    report.push("diffs", Body::List { items: mismatches.clone() });
    if !mismatches.is_empty() {
        report.mark_failed();
    }
    Ok(report)
}

fn echo_asserted(inst: &MpecInstance, report: &mut AnalysisReport) {
    if inst.asserted_cqs.is_empty() {
        report.note("asserted CQs: none (SBCQ/CRCQ are user-asserted, never computed)");
    } else {
        let list: Vec<&str> = inst.asserted_cqs.iter().map(|c| c.as_str()).collect();
        report.note(format!(
            "asserted CQs (user-supplied, not verified): {}",
            list.join(", ")
        ));
    }
}
