//! Laplacian spectra and the structure leaf pairs impose on them.
//!
//! An eigenvalue index is *generic* when the eigenvalue is simple and its
//! eigenvector vanishes nowhere.  The arm-exchange involution of a leaf
//! pair commutes with the Laplacian, so eigenvectors split into even and
//! odd parts; odd vectors are supported on the arms alone (an odd vector
//! equals minus itself off the arms), which forces every generic
//! eigenvector to be even.  Those facts carry the isospectrality proofs
//! downstream, and this module is where they are checked numerically.

use crate::graph::{DiscreteGraph, GraphError, LeafPairSpec};
use crate::linalg::{self, Matrix};
use thiserror::Error;

pub const DEFAULT_EIG_TOL: f64 = 1e-13;
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;
pub const DEFAULT_ISO_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("spectra have different lengths: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("symmetry classification inconsistent: {0}")]
    ClassificationInconsistent(String),
}

/// Eigenvalues ascending with matching orthonormal eigenvectors, plus the
/// tolerances used to interpret them.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    /// relative gap (to the spectral diameter) below which neighboring
    /// eigenvalues count as degenerate
    pub degeneracy_tol: f64,
    /// relative size (to the sup norm of the eigenvector) below which an
    /// entry counts as a zero
    pub zero_tol: f64,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn diameter(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Maximal runs of consecutive eigenvalues with gaps at or below the
    /// degeneracy tolerance, as index ranges.
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        let gap_limit = self.degeneracy_tol * self.diameter();
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.n() {
            let split = i == self.n()
                || self.eigenvalues[i] - self.eigenvalues[i - 1] > gap_limit;
            if split {
                out.push(start..i);
                start = i;
            }
        }
        out
    }
}

/// Per-index genericity data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericityFlags {
    pub simple: Vec<bool>,
    pub nowhere_zero: Vec<bool>,
    pub generic: Vec<bool>,
}

/// Symmetric eigensolve via cyclic Jacobi; `tol` is the off-diagonal
/// convergence threshold relative to the matrix magnitude.
pub fn eig_sym(m: &Matrix, tol: f64) -> Result<Spectrum, SpectraError> {
    let e = linalg::jacobi_eigh(m, tol)?;
    Ok(Spectrum {
        eigenvalues: e.values,
        eigenvectors: e.vectors,
        degeneracy_tol: DEFAULT_DEGENERACY_TOL,
        zero_tol: DEFAULT_ZERO_TOL,
    })
}

/// Spectrum of the combinatorial Laplacian with default tolerances.
pub fn laplacian_spectrum(g: &DiscreteGraph) -> Result<Spectrum, SpectraError> {
    eig_sym(&g.laplacian(), DEFAULT_EIG_TOL)
}

pub fn genericity_flags(s: &Spectrum) -> GenericityFlags {
    let n = s.n();
    let gap_limit = s.degeneracy_tol * s.diameter();
    let mut simple = vec![true; n];
    for i in 0..n {
        if i > 0 && s.eigenvalues[i] - s.eigenvalues[i - 1] <= gap_limit {
            simple[i] = false;
        }
        if i + 1 < n && s.eigenvalues[i + 1] - s.eigenvalues[i] <= gap_limit {
            simple[i] = false;
        }
    }
    let nowhere_zero: Vec<bool> = s
        .eigenvectors
        .iter()
        .map(|f| {
            let sup = linalg::norm_inf(f);
            f.iter().all(|x| x.abs() > s.zero_tol * sup)
        })
        .collect();
    let generic = simple.iter().zip(&nowhere_zero).map(|(a, b)| a & b).collect();
    GenericityFlags { simple, nowhere_zero, generic }
}

/// Equality of eigenvalue lists within `tol`, relative to the larger
/// eigenvalue magnitude present.
pub fn is_isospectral(s1: &Spectrum, s2: &Spectrum, tol: f64) -> Result<bool, SpectraError> {
    if s1.n() != s2.n() {
        return Err(SpectraError::DimensionMismatch(s1.n(), s2.n()));
    }
    Ok(max_spectral_gap(&s1.eigenvalues, &s2.eigenvalues) <= tol * spectral_scale(s1, s2))
}

pub fn max_spectral_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn spectral_scale(s1: &Spectrum, s2: &Spectrum) -> f64 {
    let m1 = s1.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let m2 = s2.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    1.0 + m1.max(m2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryClass {
    Even,
    Odd,
    Mixed,
}

fn apply_swap(pi: &[usize], f: &[f64]) -> Vec<f64> {
    // (pi f)(v) = f(pi(v)); pi is an involution so direction is immaterial
    pi.iter().map(|&w| f[w]).collect()
}

fn require_automorphism(g: &DiscreteGraph, pi: &[usize]) -> Result<(), SpectraError> {
    let ok = pi.len() == g.vertex_count()
        && g.edges().iter().all(|&(a, b)| g.has_edge(pi[a], pi[b]));
    if ok {
        Ok(())
    } else {
        Err(SpectraError::ClassificationInconsistent(
            "vertex swap is not a graph automorphism".into(),
        ))
    }
}

/// Replaces each degenerate cluster's eigenvector block by an orthonormal
/// basis of pure even vectors followed by pure odd vectors under the
/// arm-exchange of `pair`.  Eigenvalues are untouched.
pub fn symmetrize_clusters(
    g: &DiscreteGraph,
    pair: &LeafPairSpec,
    s: &Spectrum,
) -> Result<Spectrum, SpectraError> {
    pair.validate(g)?;
    symmetrize_clusters_by_swap(g, &pair.vertex_swap(g.vertex_count()), s)
}

/// Same as [`symmetrize_clusters`] but driven by an explicit involution,
/// for graphs where the arms are no longer pendant (after edge insertion
/// the exchange is still an automorphism even though the pair spec no
/// longer validates).
pub fn symmetrize_clusters_by_swap(
    g: &DiscreteGraph,
    pi: &[usize],
    s: &Spectrum,
) -> Result<Spectrum, SpectraError> {
    require_automorphism(g, pi)?;
    let mut out = s.clone();
    for r in s.clusters() {
        if r.len() < 2 {
            continue;
        }
        let mut evens = Vec::new();
        let mut odds = Vec::new();
        for f in &s.eigenvectors[r.clone()] {
            let pf = apply_swap(&pi, f);
            evens.push(f.iter().zip(&pf).map(|(a, b)| 0.5 * (a + b)).collect::<Vec<f64>>());
            odds.push(f.iter().zip(&pf).map(|(a, b)| 0.5 * (a - b)).collect::<Vec<f64>>());
        }
        let mut basis = linalg::mgs_orthonormalize(&evens, 1e-8);
        let odd_basis = linalg::mgs_orthonormalize(&odds, 1e-8);
        basis.extend(odd_basis);
        if basis.len() != r.len() {
            return Err(SpectraError::ClassificationInconsistent(format!(
                "cluster {:?} spans {} symmetry-adapted directions, expected {}",
                r,
                basis.len(),
                r.len()
            )));
        }
        for v in basis.iter_mut() {
            linalg::fix_sign(v);
        }
        out.eigenvectors.splice(r.clone(), basis);
    }
    Ok(out)
}

/// Even/odd/mixed label per spectral index, computed after cluster
/// re-projection.  Errors if a generic eigenvector fails to classify even,
/// which a valid pair symmetry rules out.
pub fn leaf_symmetry_classify(
    g: &DiscreteGraph,
    pair: &LeafPairSpec,
    s: &Spectrum,
) -> Result<Vec<SymmetryClass>, SpectraError> {
    pair.validate(g)?;
    leaf_symmetry_classify_by_swap(g, &pair.vertex_swap(g.vertex_count()), s)
}

/// [`leaf_symmetry_classify`] driven by an explicit involution; see
/// [`symmetrize_clusters_by_swap`].
pub fn leaf_symmetry_classify_by_swap(
    g: &DiscreteGraph,
    pi: &[usize],
    s: &Spectrum,
) -> Result<Vec<SymmetryClass>, SpectraError> {
    let sym = symmetrize_clusters_by_swap(g, pi, s)?;
    let flags = genericity_flags(&sym);
    let mut labels = Vec::with_capacity(sym.n());
    for (i, f) in sym.eigenvectors.iter().enumerate() {
        let pf = apply_swap(pi, f);
        let sup = linalg::norm_inf(f).max(1e-300);
        let even_dev = f.iter().zip(&pf).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let odd_dev = f.iter().zip(&pf).fold(0.0f64, |m, (a, b)| m.max((a + b).abs()));
        let label = if even_dev <= sym.zero_tol * sup {
            SymmetryClass::Even
        } else if odd_dev <= sym.zero_tol * sup {
            SymmetryClass::Odd
        } else {
            SymmetryClass::Mixed
        };
        if flags.generic[i] && label != SymmetryClass::Even {
            return Err(SpectraError::ClassificationInconsistent(format!(
                "generic eigenvector at index {} classified {:?}",
                i + 1,
                label
            )));
        }
        labels.push(label);
    }
    Ok(labels)
}

/// Confirms L(g_bar) = L(g) + gamma gamma^T entrywise for the depth-j
/// insertion; both Laplacians are integer matrices so the comparison is
/// exact up to representation.
pub fn rank_one_check(
    g: &DiscreteGraph,
    pair: &LeafPairSpec,
    j: usize,
    g_bar: &DiscreteGraph,
) -> Result<bool, SpectraError> {
    if g.vertex_count() != g_bar.vertex_count() {
        return Err(SpectraError::DimensionMismatch(g.vertex_count(), g_bar.vertex_count()));
    }
    let gamma = pair.gamma(g.vertex_count(), j)?;
    let l0 = g.laplacian();
    let l1 = g_bar.laplacian();
    let n = g.vertex_count();
    let mut worst = 0.0f64;
    for i in 0..n {
        for jj in 0..n {
            let want = l0.get(i, jj) + gamma[i] * gamma[jj];
            worst = worst.max((l1.get(i, jj) - want).abs());
        }
    }
    Ok(worst <= 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::insert_pair_edge;
    use proptest::prelude::*;

    fn path(n: usize) -> DiscreteGraph {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        DiscreteGraph::new(n, &edges).unwrap()
    }

    fn star(leaves: usize) -> DiscreteGraph {
        let edges: Vec<(usize, usize)> = (1..=leaves).map(|i| (0, i)).collect();
        DiscreteGraph::new(leaves + 1, &edges).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn frozen_small_spectra() {
        let s = laplacian_spectrum(&path(2)).unwrap();
        assert!(close(&s.eigenvalues, &[0.0, 2.0], 1e-12));
        let s = laplacian_spectrum(&path(3)).unwrap();
        assert!(close(&s.eigenvalues, &[0.0, 1.0, 3.0], 1e-12));
        let s = laplacian_spectrum(&star(3)).unwrap();
        assert!(close(&s.eigenvalues, &[0.0, 1.0, 1.0, 4.0], 1e-12));
        let paw = DiscreteGraph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2)]).unwrap();
        let s = laplacian_spectrum(&paw).unwrap();
        assert!(close(&s.eigenvalues, &[0.0, 1.0, 3.0, 4.0], 1e-12));
    }

    #[test]
    fn path3_genericity() {
        // eigenvector at eigenvalue 1 is (1, 0, -1) up to scale: not generic
        let s = laplacian_spectrum(&path(3)).unwrap();
        let flags = genericity_flags(&s);
        assert_eq!(flags.simple, vec![true, true, true]);
        assert_eq!(flags.nowhere_zero, vec![true, false, true]);
        assert_eq!(flags.generic, vec![true, false, true]);
    }

    #[test]
    fn star_and_paw_genericity() {
        let s = laplacian_spectrum(&star(3)).unwrap();
        let flags = genericity_flags(&s);
        assert_eq!(flags.generic, vec![true, false, false, true]);
        let paw = DiscreteGraph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2)]).unwrap();
        let flags = genericity_flags(&laplacian_spectrum(&paw).unwrap());
        // eigenvectors at 1 and 3 vanish at a vertex
        assert_eq!(flags.generic, vec![true, false, false, true]);
    }

    #[test]
    fn star4_eigenvalue4_profile_vector() {
        let s = laplacian_spectrum(&star(3)).unwrap();
        let f = &s.eigenvectors[3];
        // (1, -1/3, -1/3, -1/3) normalized; sign convention puts the
        // largest entry positive
        let scale = f[0];
        assert!(scale > 0.0);
        for i in 1..4 {
            assert!((f[i] / scale + 1.0 / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn isospectral_checks() {
        let s1 = laplacian_spectrum(&star(3)).unwrap();
        let relabeled = DiscreteGraph::new(4, &[(3, 0), (3, 1), (3, 2)]).unwrap();
        let s2 = laplacian_spectrum(&relabeled).unwrap();
        assert!(is_isospectral(&s1, &s2, DEFAULT_ISO_TOL).unwrap());
        let paw = DiscreteGraph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2)]).unwrap();
        let s3 = laplacian_spectrum(&paw).unwrap();
        assert!(!is_isospectral(&s1, &s3, DEFAULT_ISO_TOL).unwrap());
        let s4 = laplacian_spectrum(&path(3)).unwrap();
        assert!(matches!(
            is_isospectral(&s1, &s4, DEFAULT_ISO_TOL),
            Err(SpectraError::DimensionMismatch(4, 3))
        ));
    }

    #[test]
    fn star_classification_splits_the_degenerate_pair() {
        let g = star(3);
        let pair = g.find_leaf_pairs(1).into_iter().next().unwrap();
        let s = laplacian_spectrum(&g).unwrap();
        let labels = leaf_symmetry_classify(&g, &pair, &s).unwrap();
        assert_eq!(
            labels,
            vec![SymmetryClass::Even, SymmetryClass::Even, SymmetryClass::Odd, SymmetryClass::Even]
        );
        // the odd vector is supported on the two arms only
        let sym = symmetrize_clusters(&g, &pair, &s).unwrap();
        let odd = &sym.eigenvectors[2];
        assert!(odd[0].abs() < 1e-10 && odd[3].abs() < 1e-10);
        assert!((odd[1] + odd[2]).abs() < 1e-10);
        assert!(odd[1].abs() > 0.5);
    }

    #[test]
    fn rank_one_identity_star_to_paw() {
        let g = star(3);
        let pair = g.find_leaf_pairs(1).into_iter().next().unwrap();
        let paw = insert_pair_edge(&g, &pair, 1).unwrap();
        assert!(rank_one_check(&g, &pair, 1, &paw).unwrap());
        // wrong target graph fails the check
        let other = DiscreteGraph::new(4, &[(0, 1), (0, 2), (0, 3), (2, 3)]).unwrap();
        assert!(!rank_one_check(&g, &pair, 1, &other).unwrap());
    }

    #[test]
    fn no_mixed_labels_on_pair_symmetric_graphs() {
        for (g, k) in [(star(5), 1), (path(7), 3)] {
            let pairs = g.find_leaf_pairs(k);
            assert!(!pairs.is_empty());
            let s = laplacian_spectrum(&g).unwrap();
            for pair in &pairs {
                let labels = leaf_symmetry_classify(&g, pair, &s).unwrap();
                assert!(labels.iter().all(|&l| l != SymmetryClass::Mixed));
            }
        }
    }

    proptest! {
        #[test]
        fn connected_laplacians_have_zero_ground_state(
            n in 2usize..8,
            extra in proptest::collection::vec(any::<u32>(), 0..10),
        ) {
            // random tree plus extra edges: always connected
            let mut edges: Vec<(usize, usize)> = (1..n)
                .map(|v| {
                    let parent = (extra.first().copied().unwrap_or(0) as usize + v) % v;
                    (parent.min(v), parent.max(v))
                })
                .collect();
            for p in &extra {
                let a = (*p as usize) % n;
                let b = ((*p as usize) / n) % n;
                if a != b && !edges.contains(&(a.min(b), a.max(b))) {
                    edges.push((a.min(b), a.max(b)));
                }
            }
            let g = DiscreteGraph::new(n, &edges).unwrap();
            prop_assert!(g.is_connected());
            let s = laplacian_spectrum(&g).unwrap();
            prop_assert!(s.eigenvalues[0].abs() < 1e-10);
            prop_assert!(s.eigenvalues[1] > 1e-8);
            // ground state is constant
            let f = &s.eigenvectors[0];
            let c = f[0];
            prop_assert!(f.iter().all(|x| (x - c).abs() < 1e-8));
            // all eigenvalues within [0, 2 max degree]
            let maxdeg = (0..n).map(|v| g.degree(v)).max().unwrap() as f64;
            for l in &s.eigenvalues {
                prop_assert!(*l > -1e-10 && *l <= 2.0 * maxdeg + 1e-9);
            }
        }
    }
}
