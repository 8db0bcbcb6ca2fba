//! Spectral graph theory toolkit centered on isospectral constructions.
//!
//! The crate builds discrete graphs and metric (quantum) graphs, computes
//! Laplacian spectra, counts sign flips and nodal domains of eigenvectors,
//! and mechanically verifies a family of isospectrality claims about
//! "leaf pairs": two pendant arms of equal length attached to a common
//! root vertex.  Inserting an edge between mirror vertices of the two arms
//! (discrete case) or gluing the arms at an interior point (metric case)
//! preserves spectra and nodal data in ways the [`theorems`] and [`qnodal`]
//! modules check assertion by assertion.
//!
//! Module map:
//!
//! | module     | contents                                                       |
//! |------------|----------------------------------------------------------------|
//! | [`linalg`] | dense symmetric eigensolver, small SVD, shared matrix type     |
//! | [`graph`]  | discrete graphs, leaf pairs, edge insertion, isomorphism       |
//! | [`spectra`]| Laplacian spectra, genericity, leaf-exchange symmetry          |
//! | [`nodal`]  | flip counts, nodal counts, per-index bound checks              |
//! | [`trees`]  | enumeration of non-isomorphic trees                            |
//! | [`theorems`]| verification harnesses and the non-isospectral pair search    |
//! | [`metric`] | metric graphs, dummy vertices, leaf-pair gluing                |
//! | [`qspectra`]| bond-scattering secular solver, finite-difference oracle      |
//! | [`qnodal`] | sinusoid zero counting, quantum nodal counts, interlacing      |
//! | [`io`]     | JSON/CSV formats shared with the command-line front end        |
//!
//! With the default `parallel` feature the candidate search and the secular
//! grid scan fan out over rayon; disabling the feature swaps in sequential
//! loops with byte-identical results.

pub mod graph;
pub mod io;
pub mod linalg;
pub mod metric;
pub mod nodal;
pub mod qnodal;
pub mod qspectra;
pub mod report;
pub mod spectra;
pub mod theorems;
pub mod trees;

mod par;

pub use graph::{DiscreteGraph, LeafPairSpec};
pub use metric::{GlueOutcome, MetricEdge, MetricGraph, MetricLeafPairSpec};
pub use nodal::NodalProfile;
pub use qnodal::QNodalProfile;
pub use qspectra::{EdgeWave, QEigenpair, SecularConfig};
pub use report::{Assertion, Verdict, VerificationReport};
pub use spectra::Spectrum;
pub use theorems::{SearchHit, SearchLimits, SearchOutcome};
