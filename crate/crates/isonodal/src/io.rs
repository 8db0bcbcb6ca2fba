//! On-disk formats: JSON documents for graphs, spectra, and search
//! catalogs, plus aligned CSV tables for count profiles and secular
//! scan traces.
//!
//! Everything is plain JSON or CSV so artifacts stay diffable.  Numeric
//! output is rounded to 12 significant digits at format time only — all
//! internal computation runs at full precision — which together with the
//! deterministic solvers makes every emitted byte reproducible from the
//! same inputs and configuration.
//!
//! The graph document is `{"vertices": N, "edges": [[i,j],…],
//! "leaf_pairs": [{"root": r, "arm_plus": […], "arm_minus": […]}]}`.
//! The metric variant adds a parallel `"lengths"` array and an optional
//! `"glues"` list; glues are applied while loading, in order, each
//! referring to a pair index of the graph as it stands at that step.
//! Metric leaf pairs use the same arm keys with a single pendant vertex
//! per arm; the loader resolves each to its pendant edge.

use crate::graph::{DiscreteGraph, GraphError, LeafPairSpec};
use crate::metric::{
    build_metric, GlueOutcome, MetricError, MetricGraph, MetricLeafPairSpec,
};
use crate::nodal::NodalProfile;
use crate::qnodal::QNodalProfile;
use crate::qspectra::QEigenpair;
use crate::report::VerificationReport;
use crate::spectra::{genericity_flags, Spectrum};
use crate::theorems::SearchOutcome;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("invalid document: {0}")]
    Invalid(String),
}

/// Rounds to 12 significant digits — the format-time precision of every
/// number this module emits.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("scientific notation round-trips")
}

/// Shortest decimal form of [`sig12`]'s rounding — the one float format
/// used in every emitted table.
pub fn fmt12(x: f64) -> String {
    format!("{}", sig12(x))
}

// ---------------------------------------------------------------------------
// graph documents

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeafPairDoc {
    pub root: usize,
    pub arm_plus: Vec<usize>,
    pub arm_minus: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub leaf_pairs: Vec<LeafPairDoc>,
}

pub fn graph_to_doc(g: &DiscreteGraph, pairs: &[LeafPairSpec]) -> GraphDoc {
    GraphDoc {
        vertices: g.vertex_count(),
        edges: g.edges().to_vec(),
        leaf_pairs: pairs
            .iter()
            .map(|p| LeafPairDoc {
                root: p.root,
                arm_plus: p.arm_plus.clone(),
                arm_minus: p.arm_minus.clone(),
            })
            .collect(),
    }
}

/// Builds and validates the graph and its leaf pairs.
pub fn doc_to_graph(doc: &GraphDoc) -> Result<(DiscreteGraph, Vec<LeafPairSpec>), IoError> {
    let g = DiscreteGraph::new(doc.vertices, &doc.edges)?;
    let mut pairs = Vec::with_capacity(doc.leaf_pairs.len());
    for p in &doc.leaf_pairs {
        let spec = LeafPairSpec::new(p.root, p.arm_plus.clone(), p.arm_minus.clone())?;
        spec.validate(&g)?;
        pairs.push(spec);
    }
    Ok((g, pairs))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlueDoc {
    pub pair: usize,
    pub l1: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricDoc {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub lengths: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub leaf_pairs: Vec<LeafPairDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub glues: Vec<GlueDoc>,
}

/// A loaded metric graph: the final graph after all glues, plus the
/// outcome bookkeeping of each glue in order.
pub struct MetricLoad {
    pub graph: MetricGraph,
    pub glue_outcomes: Vec<GlueOutcome>,
}

pub fn metric_to_doc(g: &MetricGraph) -> MetricDoc {
    MetricDoc {
        vertices: g.vertex_count(),
        edges: g.edges().iter().map(|e| (e.u, e.v)).collect(),
        lengths: g.edges().iter().map(|e| sig12(e.length)).collect(),
        leaf_pairs: g
            .leaf_pairs()
            .iter()
            .map(|p| LeafPairDoc {
                root: p.root,
                arm_plus: vec![g.edges()[p.edge_plus].opposite(p.root)],
                arm_minus: vec![g.edges()[p.edge_minus].opposite(p.root)],
            })
            .collect(),
        glues: Vec::new(),
    }
}

pub fn doc_to_metric(doc: &MetricDoc) -> Result<MetricLoad, IoError> {
    if doc.lengths.len() != doc.edges.len() {
        return Err(IoError::Invalid(format!(
            "{} lengths for {} edges",
            doc.lengths.len(),
            doc.edges.len()
        )));
    }
    let mut pairs = Vec::with_capacity(doc.leaf_pairs.len());
    for p in &doc.leaf_pairs {
        let (&lp, &lm) = match (&p.arm_plus[..], &p.arm_minus[..]) {
            ([lp], [lm]) => (lp, lm),
            _ => {
                return Err(IoError::Invalid(
                    "metric leaf pairs carry a single pendant vertex per arm".into(),
                ))
            }
        };
        let find_edge = |leaf: usize| {
            doc.edges
                .iter()
                .position(|&(u, v)| (u, v) == (p.root, leaf) || (u, v) == (leaf, p.root))
                .ok_or_else(|| {
                    IoError::Invalid(format!("no edge between root {} and leaf {leaf}", p.root))
                })
        };
        pairs.push(MetricLeafPairSpec::new(p.root, find_edge(lp)?, find_edge(lm)?));
    }
    let mut graph = build_metric(doc.vertices, &doc.edges, &doc.lengths, &pairs)?;
    let mut glue_outcomes = Vec::with_capacity(doc.glues.len());
    for glue in &doc.glues {
        let out = graph.glue_leaf_pair(glue.pair, glue.l1)?;
        graph = out.graph.clone();
        glue_outcomes.push(out);
    }
    Ok(MetricLoad { graph, glue_outcomes })
}

// ---------------------------------------------------------------------------
// spectra documents

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumDoc {
    pub eigenvalues: Vec<f64>,
    pub generic: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

pub fn spectrum_to_doc(s: &Spectrum, include_eigenvectors: bool) -> SpectrumDoc {
    SpectrumDoc {
        eigenvalues: s.eigenvalues.iter().map(|&x| sig12(x)).collect(),
        generic: genericity_flags(s).generic,
        eigenvectors: include_eigenvectors.then(|| {
            s.eigenvectors
                .iter()
                .map(|v| v.iter().map(|&x| sig12(x)).collect())
                .collect()
        }),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QSpectrumDoc {
    pub k: Vec<f64>,
    pub lambda: Vec<f64>,
    pub multiplicity: Vec<usize>,
    pub generic: Vec<bool>,
}

pub fn qspectrum_to_doc(pairs: &[QEigenpair]) -> QSpectrumDoc {
    QSpectrumDoc {
        k: pairs.iter().map(|p| sig12(p.k)).collect(),
        lambda: pairs.iter().map(|p| sig12(p.lambda())).collect(),
        multiplicity: pairs.iter().map(|p| p.multiplicity).collect(),
        generic: pairs.iter().map(|p| p.generic).collect(),
    }
}

// ---------------------------------------------------------------------------
// profile rows

fn is_false(b: &bool) -> bool {
    !b
}

/// One table row of a count profile — shared by the discrete and quantum
/// sides; quantum rows carry `"quantum": true` and λ = k².
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileRow {
    pub n: usize,
    pub lambda: f64,
    pub generic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<usize>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub quantum: bool,
}

pub fn profile_rows(profiles: &[NodalProfile]) -> Vec<ProfileRow> {
    profiles
        .iter()
        .map(|p| ProfileRow {
            n: p.n,
            lambda: sig12(p.lambda),
            generic: p.generic,
            mu: p.mu,
            nu: p.nu,
            quantum: false,
        })
        .collect()
}

pub fn q_profile_rows(profiles: &[QNodalProfile]) -> Vec<ProfileRow> {
    profiles
        .iter()
        .map(|p| ProfileRow {
            n: p.n,
            lambda: sig12(p.k * p.k),
            generic: p.generic,
            mu: p.mu,
            nu: p.nu,
            quantum: true,
        })
        .collect()
}

/// Column-aligned CSV: every cell padded to its column width so the file
/// reads as a table; absent counts are empty cells.
pub fn profiles_to_csv(rows: &[ProfileRow]) -> String {
    let header = ["n", "lambda", "generic", "mu", "nu", "quantum"];
    let mut cells: Vec<[String; 6]> = vec![header.map(str::to_string)];
    for r in rows {
        cells.push([
            r.n.to_string(),
            fmt12(r.lambda),
            r.generic.to_string(),
            r.mu.map(|m| m.to_string()).unwrap_or_default(),
            r.nu.map(|m| m.to_string()).unwrap_or_default(),
            r.quantum.to_string(),
        ]);
    }
    let mut width = [0usize; 6];
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    for row in &cells {
        for (i, (c, w)) in row.iter().zip(width).enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&" ".repeat(w - c.len()));
            out.push_str(c);
        }
        out.push('\n');
    }
    out
}

/// Secular scan trace as two CSV columns: k and the smallest singular
/// value of the secular matrix there.
pub fn trace_to_csv(trace: &[(f64, f64)]) -> String {
    let mut out = String::from("k,sigma_min\n");
    for &(k, sigma) in trace {
        out.push_str(&fmt12(k));
        out.push(',');
        out.push_str(&fmt12(sigma));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// reports and catalogs

/// A copy of the report with its measured values and bounds rounded for
/// emission.
pub fn rounded_report(r: &VerificationReport) -> VerificationReport {
    let mut r = r.clone();
    for a in r.assertions.iter_mut() {
        a.measured = a.measured.map(sig12);
        a.bound = a.bound.map(sig12);
    }
    r
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogPairDoc {
    pub vertices: usize,
    pub seed1: GraphDoc,
    pub seed2: GraphDoc,
    pub closure1: GraphDoc,
    pub closure2: GraphDoc,
    pub seed_spectrum_gap: f64,
    pub closure_spectrum_gap: f64,
    pub report: VerificationReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogDoc {
    pub trees_scanned: usize,
    pub groups: usize,
    pub candidates_checked: usize,
    pub pairs: Vec<CatalogPairDoc>,
}

pub fn catalog_doc(outcome: &SearchOutcome) -> CatalogDoc {
    CatalogDoc {
        trees_scanned: outcome.trees_scanned,
        groups: outcome.groups,
        candidates_checked: outcome.candidates_checked,
        pairs: outcome
            .hits
            .iter()
            .map(|h| CatalogPairDoc {
                vertices: h.vertices,
                seed1: graph_to_doc(&h.seed1, std::slice::from_ref(&h.pair1)),
                seed2: graph_to_doc(&h.seed2, std::slice::from_ref(&h.pair2)),
                closure1: graph_to_doc(&h.closure1, &[]),
                closure2: graph_to_doc(&h.closure2, &[]),
                seed_spectrum_gap: sig12(h.seed_spectrum_gap),
                closure_spectrum_gap: sig12(h.closure_spectrum_gap),
                report: rounded_report(&h.report),
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// files

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String, IoError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn read_json_file<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_text_file(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    Ok(std::fs::write(path, text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::laplacian_spectrum;

    mod fixtures {
        use crate::graph::DiscreteGraph;

        pub fn path(n: usize) -> DiscreteGraph {
            let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
            DiscreteGraph::new(n, &edges).unwrap()
        }

        pub fn star(leaves: usize) -> DiscreteGraph {
            let edges: Vec<(usize, usize)> = (1..=leaves).map(|i| (0, i)).collect();
            DiscreteGraph::new(leaves + 1, &edges).unwrap()
        }
    }

    #[test]
    fn graph_documents_round_trip() {
        let g = fixtures::star(3);
        let pair = LeafPairSpec::new(0, vec![1], vec![2]).unwrap();
        let doc = graph_to_doc(&g, std::slice::from_ref(&pair));
        let text = to_json_pretty(&doc).unwrap();
        assert!(text.contains("\"vertices\": 4"));
        assert!(text.contains("\"arm_plus\""));
        let back: GraphDoc = serde_json::from_str(&text).unwrap();
        let (g2, pairs2) = doc_to_graph(&back).unwrap();
        assert_eq!(g2.edges(), g.edges());
        assert_eq!(pairs2, vec![pair]);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(serde_json::from_str::<GraphDoc>("{\"vertices\": 3}").is_err());
        // arm vertex missing from the graph
        let doc = GraphDoc {
            vertices: 4,
            edges: vec![(0, 1), (0, 2), (0, 3)],
            leaf_pairs: vec![LeafPairDoc { root: 0, arm_plus: vec![9], arm_minus: vec![2] }],
        };
        assert!(doc_to_graph(&doc).is_err());
        // lengths array out of step with edges
        let doc = MetricDoc {
            vertices: 2,
            edges: vec![(0, 1)],
            lengths: vec![1.0, 2.0],
            leaf_pairs: vec![],
            glues: vec![],
        };
        assert!(matches!(doc_to_metric(&doc), Err(IoError::Invalid(_))));
    }

    #[test]
    fn metric_documents_load_and_apply_glues() {
        let text = r#"{
            "vertices": 4,
            "edges": [[0, 1], [0, 2], [0, 3]],
            "lengths": [1.0, 1.0, 1.3],
            "leaf_pairs": [{"root": 0, "arm_plus": [1], "arm_minus": [2]}],
            "glues": [{"pair": 0, "l1": 0.4142}]
        }"#;
        let doc: MetricDoc = serde_json::from_str(text).unwrap();
        let load = doc_to_metric(&doc).unwrap();
        assert_eq!(load.glue_outcomes.len(), 1);
        assert_eq!(load.graph.edges().len(), 5);
        assert_eq!(load.graph.betti(), 1);
        assert!((load.graph.total_length() - 3.3).abs() < 1e-12);

        // the same document without glues round-trips through the exporter
        let mut plain = doc.clone();
        plain.glues.clear();
        let seed = doc_to_metric(&plain).unwrap().graph;
        let doc2 = metric_to_doc(&seed);
        let seed2 = doc_to_metric(&doc2).unwrap().graph;
        assert_eq!(seed2.edges(), seed.edges());
        assert_eq!(seed2.leaf_pairs(), seed.leaf_pairs());
    }

    #[test]
    fn rounding_is_twelve_significant_digits() {
        assert_eq!(sig12(std::f64::consts::PI), 3.14159265359);
        assert_eq!(sig12(0.0), 0.0);
        assert_eq!(sig12(-1.0 / 3.0), -0.333333333333);
        assert_eq!(sig12(12345678901234.0), 12345678901200.0);
        assert_eq!(fmt12(2.0_f64.sqrt()), "1.41421356237");
    }

    #[test]
    fn spectrum_documents_carry_genericity() {
        let s = laplacian_spectrum(&fixtures::star(3)).unwrap();
        let doc = spectrum_to_doc(&s, false);
        for (got, want) in doc.eigenvalues.iter().zip([0.0, 1.0, 1.0, 4.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        // the degenerate middle pair is non-generic
        assert_eq!(doc.generic, vec![true, false, false, true]);
        assert!(doc.eigenvectors.is_none());
        let with = spectrum_to_doc(&s, true);
        assert_eq!(with.eigenvectors.unwrap().len(), 4);
    }

    #[test]
    fn profile_tables_align_and_tag_quantum_rows() {
        let g = fixtures::star(3);
        let s = laplacian_spectrum(&g).unwrap();
        let profiles = crate::nodal::nodal_profiles(&g, &s).unwrap();
        let rows = profile_rows(&profiles);
        let json = to_json_pretty(&rows).unwrap();
        assert!(!json.contains("\"quantum\""));

        let qrows = vec![ProfileRow {
            n: 2,
            lambda: sig12(std::f64::consts::PI * std::f64::consts::PI),
            generic: true,
            mu: Some(1),
            nu: Some(2),
            quantum: true,
        }];
        let qjson = to_json_pretty(&qrows).unwrap();
        assert!(qjson.contains("\"quantum\": true"));

        let csv = profiles_to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), rows.len() + 1);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()), "{csv}");
        assert!(lines[0].trim_start().starts_with("n,"));
        // non-generic rows leave the count cells empty
        let cells: Vec<&str> = lines[2].split(',').collect();
        assert!(cells[3].trim().is_empty() && cells[4].trim().is_empty(), "{csv}");
    }

    #[test]
    fn trace_csv_is_frozen_format() {
        let csv = trace_to_csv(&[(0.1, 0.5), (0.2, 1.0 / 3.0)]);
        assert_eq!(csv, "k,sigma_min\n0.1,0.5\n0.2,0.333333333333\n");
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("graph.json");
        let doc = graph_to_doc(&fixtures::path(3), &[]);
        write_text_file(&path, &to_json_pretty(&doc).unwrap()).unwrap();
        let back: GraphDoc = read_json_file(&path).unwrap();
        assert_eq!(back.edges, doc.edges);
        assert!(read_json_file::<GraphDoc>(&dir.path().join("missing.json")).is_err());
    }
}
