//! Report model shared by every subcommand: structured sections that
//! serialize to the versioned `report-v1` JSON schema and render to
//! plain text. Rationals always print as `p/q`, never as decimals.

use serde::Serialize;

use mpec_core::polyhedra::{enumerate_extreme_rays, PolyhedraError, Polyhedron, PolyhedralCone};
use mpec_core::polyhedra::{ConeUnion, enumerate_vertices};
use mpec_core::rat::{fmt_rat, fmt_vec, Rat};

pub const SCHEMA: &str = "report-v1";

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub schema: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<String>>,
    /// ok | inconclusive | failed; drives the process exit status.
    pub status: String,
    pub provenance: Vec<String>,
    pub sections: Vec<Section>,
}

impl AnalysisReport {
    pub fn new(command: &str) -> Self {
        AnalysisReport {
            schema: SCHEMA,
            command: command.to_string(),
            instance_digest: None,
            point: None,
            status: "ok".to_string(),
            provenance: Vec::new(),
            sections: Vec::new(),
        }
    }

    pub fn mark_inconclusive(&mut self) {
        if self.status == "ok" {
            self.status = "inconclusive".to_string();
        }
    }

    pub fn mark_failed(&mut self) {
        self.status = "failed".to_string();
    }

    pub fn push(&mut self, title: &str, body: Body) {
        self.sections.push(Section {
            title: title.to_string(),
            body,
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.provenance.push(text.into());
    }

    pub fn exit_code(&self) -> i32 {
        match self.status.as_str() {
            "ok" => 0,
            "inconclusive" => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is total")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("mpec-kit {} ({})\n", self.command, self.schema));
        if let Some(d) = &self.instance_digest {
            out.push_str(&format!("instance: sha256:{d}\n"));
        }
        if let Some(p) = &self.point {
            out.push_str(&format!("point: ({})\n", p.join(", ")));
        }
        for s in &self.sections {
            out.push_str(&format!("\n== {} ==\n", s.title));
            s.body.render(&mut out);
        }
        if !self.provenance.is_empty() {
            out.push_str("\n== provenance ==\n");
            for n in &self.provenance {
                out.push_str(&format!("- {n}\n"));
            }
        }
        out.push_str(&format!("\nstatus: {}\n", self.status));
        out
    }
}

#[derive(Debug, Serialize)]
pub struct Section {
    pub title: String,
    #[serde(flatten)]
    pub body: Body,
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    KeyValues { entries: Vec<(String, String)> },
    List { items: Vec<String> },
    Cone { cone: ConeView },
    Union { status: Option<String>, pieces: Vec<ConeView> },
    Polyhedron { set: PolyView },
    Table { header: Vec<String>, rows: Vec<Vec<String>> },
}

impl Body {
    fn render(&self, out: &mut String) {
        match self {
            Body::KeyValues { entries } => {
                for (k, v) in entries {
                    out.push_str(&format!("{k}: {v}\n"));
                }
            }
            Body::List { items } => {
                if items.is_empty() {
                    out.push_str("(none)\n");
                }
                for i in items {
                    out.push_str(&format!("- {i}\n"));
                }
            }
            Body::Cone { cone } => cone.render(out, ""),
            Body::Union { status, pieces } => {
                if let Some(s) = status {
                    out.push_str(&format!("status: {s}\n"));
                }
                if pieces.is_empty() {
                    out.push_str("(empty union)\n");
                }
                for (i, piece) in pieces.iter().enumerate() {
                    out.push_str(&format!("piece {}:\n", i + 1));
                    piece.render(out, "  ");
                }
            }
            Body::Polyhedron { set } => set.render(out),
            Body::Table { header, rows } => {
                out.push_str(&format!("{}\n", header.join(" | ")));
                for r in rows {
                    out.push_str(&format!("{}\n", r.join(" | ")));
                }
            }
        }
    }
}

pub fn kv(entries: Vec<(&str, String)>) -> Body {
    Body::KeyValues {
        entries: entries
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
    }
}

/// Cone view: H-representation rows plus the generator (ray/lineality)
/// description used by the text format.
#[derive(Debug, Serialize)]
pub struct ConeView {
    pub eq_rows: Vec<String>,
    pub ineq_rows: Vec<String>,
    pub rays: Vec<String>,
    pub lineality: Vec<String>,
}

impl ConeView {
    pub fn from_cone(c: &PolyhedralCone) -> Result<Self, PolyhedraError> {
        let gens = enumerate_extreme_rays(c)?;
        Ok(ConeView {
            eq_rows: c.eqs().iter().map(|r| format!("{} . d = 0", fmt_vec(r))).collect(),
            ineq_rows: c
                .ineqs()
                .iter()
                .map(|r| format!("{} . d <= 0", fmt_vec(r)))
                .collect(),
            rays: gens.rays.iter().map(|r| fmt_vec(r)).collect(),
            lineality: gens.lineality.iter().map(|r| fmt_vec(r)).collect(),
        })
    }

    fn render(&self, out: &mut String, indent: &str) {
        out.push_str(&format!(
            "{indent}rays: {}\n",
            if self.rays.is_empty() {
                "(none)".to_string()
            } else {
                self.rays.join(", ")
            }
        ));
        out.push_str(&format!(
            "{indent}lineality: {}\n",
            if self.lineality.is_empty() {
                "(none)".to_string()
            } else {
                self.lineality.join(", ")
            }
        ));
        for r in &self.eq_rows {
            out.push_str(&format!("{indent}{r}\n"));
        }
        for r in &self.ineq_rows {
            out.push_str(&format!("{indent}{r}\n"));
        }
    }
}

pub fn union_body(u: &ConeUnion, status: Option<String>) -> Result<Body, PolyhedraError> {
    let pieces: Result<Vec<ConeView>, _> = u.pieces().iter().map(ConeView::from_cone).collect();
    Ok(Body::Union {
        status,
        pieces: pieces?,
    })
}

/// Polyhedron view: H-representation rows and, when within enumeration
/// limits and pointed, the vertex list.
#[derive(Debug, Serialize)]
pub struct PolyView {
    pub empty: bool,
    pub eq_rows: Vec<String>,
    pub ineq_rows: Vec<String>,
    pub vertices: Vec<String>,
    pub pointed: bool,
}

impl PolyView {
    pub fn from_polyhedron(p: &Polyhedron) -> Self {
        let empty = p.is_empty();
        let (vertices, pointed) = match enumerate_vertices(p) {
            Ok(v) => (
                v.vertices.iter().map(|x| fmt_vec(x)).collect(),
                v.pointed,
            ),
            Err(_) => (Vec::new(), false),
        };
        PolyView {
            empty,
            eq_rows: p
                .eqs()
                .iter()
                .map(|r| format!("{} . v = {}", fmt_vec(&r.coeffs), fmt_rat(&r.rhs)))
                .collect(),
            ineq_rows: p
                .ineqs()
                .iter()
                .map(|r| format!("{} . v <= {}", fmt_vec(&r.coeffs), fmt_rat(&r.rhs)))
                .collect(),
            vertices,
            pointed,
        }
    }

    fn render(&self, out: &mut String) {
        if self.empty {
            out.push_str("(empty set)\n");
        }
        for r in &self.eq_rows {
            out.push_str(&format!("{r}\n"));
        }
        for r in &self.ineq_rows {
            out.push_str(&format!("{r}\n"));
        }
        if !self.vertices.is_empty() {
            out.push_str(&format!("vertices: {}\n", self.vertices.join(", ")));
        }
    }
}

pub fn fmt_rat_list(v: &[Rat]) -> Vec<String> {
    v.iter().map(fmt_rat).collect()
}
