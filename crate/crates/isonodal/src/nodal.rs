//! Flip counts and nodal counts of Laplacian eigenvectors.
//!
//! For a generic eigenvector f, the flip set is the set of edges whose
//! endpoint values differ in sign; mu counts them and nu counts the
//! connected components left after deleting them (the nodal domains).
//! With beta the first Betti number, the n-th generic eigenvector obeys
//!
//! ```text
//! n - beta <= nu_n <= n          n - 1 <= mu_n <= n - 1 + beta
//! ```
//!
//! so on trees both collapse to the Sturm values nu_n = n, mu_n = n - 1.

use crate::graph::{DiscreteGraph, GraphError};
use crate::linalg;
use crate::spectra::{genericity_flags, Spectrum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NodalError {
    #[error("vector entry {index} is within zero tolerance; flip data undefined for non-generic vectors")]
    NonGenericVector { index: usize },
    #[error("vector length {0} does not match vertex count {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Edges whose endpoints carry opposite signs under f.  Errors when any
/// entry sits inside the zero tolerance, because a sign pattern read off
/// such a vector would be meaningless.
pub fn flip_set(
    g: &DiscreteGraph,
    f: &[f64],
    zero_tol: f64,
) -> Result<Vec<(usize, usize)>, NodalError> {
    if f.len() != g.vertex_count() {
        return Err(NodalError::DimensionMismatch(f.len(), g.vertex_count()));
    }
    let sup = linalg::norm_inf(f);
    if let Some(ix) = f.iter().position(|x| x.abs() <= zero_tol * sup) {
        return Err(NodalError::NonGenericVector { index: ix });
    }
    Ok(g.edges()
        .iter()
        .copied()
        .filter(|&(a, b)| (f[a] > 0.0) != (f[b] > 0.0))
        .collect())
}

/// Number of connected components after deleting the flip edges.
pub fn nodal_count(g: &DiscreteGraph, f: &[f64], zero_tol: f64) -> Result<usize, NodalError> {
    let flips = flip_set(g, f, zero_tol)?;
    Ok(g.components(&flips).count())
}

/// Everything the bound checks and sequence comparisons need about one
/// spectral index.  `n` is 1-based; flip data is present only at generic
/// indices and the gaps are kept so positions stay absolute.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalProfile {
    pub n: usize,
    pub lambda: f64,
    pub generic: bool,
    pub flips: Option<Vec<(usize, usize)>>,
    pub mu: Option<usize>,
    pub nu: Option<usize>,
}

pub fn nodal_profiles(g: &DiscreteGraph, s: &Spectrum) -> Result<Vec<NodalProfile>, NodalError> {
    let flags = genericity_flags(s);
    let mut out = Vec::with_capacity(s.n());
    for i in 0..s.n() {
        let generic = flags.generic[i];
        let (flips, mu, nu) = if generic {
            let fs = flip_set(g, &s.eigenvectors[i], s.zero_tol)?;
            let mu = fs.len();
            let nu = g.components(&fs).count();
            (Some(fs), Some(mu), Some(nu))
        } else {
            (None, None, None)
        };
        out.push(NodalProfile { n: i + 1, lambda: s.eigenvalues[i], generic, flips, mu, nu });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct BoundRow {
    pub n: usize,
    pub mu: usize,
    pub nu: usize,
    pub mu_ok: bool,
    pub nu_ok: bool,
    /// exact Sturm equalities; only evaluated on trees
    pub sturm_ok: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct BoundsReport {
    pub betti: usize,
    pub is_tree: bool,
    pub rows: Vec<BoundRow>,
    pub all_pass: bool,
}

/// Checks the flip and nodal bounds at every generic index.
pub fn check_bounds(
    g: &DiscreteGraph,
    profiles: &[NodalProfile],
) -> Result<BoundsReport, NodalError> {
    let betti = g.betti()?;
    let is_tree = betti == 0;
    let mut rows = Vec::new();
    for p in profiles {
        let (Some(mu), Some(nu)) = (p.mu, p.nu) else { continue };
        let n = p.n;
        let nu_ok = nu + betti >= n && nu <= n;
        let mu_ok = mu + 1 >= n && mu <= n - 1 + betti;
        let sturm_ok = is_tree.then(|| nu == n && mu == n - 1);
        rows.push(BoundRow { n, mu, nu, mu_ok, nu_ok, sturm_ok });
    }
    let all_pass = rows.iter().all(|r| r.mu_ok && r.nu_ok && r.sturm_ok.unwrap_or(true));
    Ok(BoundsReport { betti, is_tree, rows, all_pass })
}

/// True iff both profile sequences have the same length, the same generic
/// index set, and identical mu and nu at every generic index.
pub fn sequences_match(a: &[NodalProfile], b: &[NodalProfile]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    a.iter().zip(b).all(|(x, y)| {
        x.generic == y.generic && (!x.generic || (x.mu == y.mu && x.nu == y.nu))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::laplacian_spectrum;
    use proptest::prelude::*;

    fn path(n: usize) -> DiscreteGraph {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        DiscreteGraph::new(n, &edges).unwrap()
    }

    fn star(leaves: usize) -> DiscreteGraph {
        let edges: Vec<(usize, usize)> = (1..=leaves).map(|i| (0, i)).collect();
        DiscreteGraph::new(leaves + 1, &edges).unwrap()
    }

    fn paw() -> DiscreteGraph {
        DiscreteGraph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2)]).unwrap()
    }

    #[test]
    fn star_top_eigenvector_counts() {
        let g = star(3);
        let s = laplacian_spectrum(&g).unwrap();
        let profiles = nodal_profiles(&g, &s).unwrap();
        let top = &profiles[3];
        assert!(top.generic);
        // (1, -1/3, -1/3, -1/3): every edge flips, all vertices separate
        assert_eq!(top.mu, Some(3));
        assert_eq!(top.nu, Some(4));
        assert_eq!(top.flips.as_ref().unwrap().len(), 3);
    }

    #[test]
    fn paw_top_eigenvector_counts() {
        let g = paw();
        let s = laplacian_spectrum(&g).unwrap();
        let profiles = nodal_profiles(&g, &s).unwrap();
        let top = &profiles[3];
        assert!(top.generic);
        // triangle edge (1,2) keeps its sign; three spokes flip
        assert_eq!(top.mu, Some(3));
        assert_eq!(top.nu, Some(3));
    }

    #[test]
    fn path3_profiles_and_gaps() {
        let g = path(3);
        let s = laplacian_spectrum(&g).unwrap();
        let profiles = nodal_profiles(&g, &s).unwrap();
        assert_eq!(profiles.len(), 3);
        assert!(profiles[0].generic && !profiles[1].generic && profiles[2].generic);
        assert_eq!((profiles[0].mu, profiles[0].nu), (Some(0), Some(1)));
        assert_eq!((profiles[2].mu, profiles[2].nu), (Some(2), Some(3)));
        // the non-generic index keeps its position but carries no counts
        assert_eq!(profiles[1].n, 2);
        assert_eq!(profiles[1].mu, None);
    }

    #[test]
    fn flip_set_rejects_near_zero_entries() {
        let g = path(3);
        let s = laplacian_spectrum(&g).unwrap();
        let err = flip_set(&g, &s.eigenvectors[1], s.zero_tol);
        assert!(matches!(err, Err(NodalError::NonGenericVector { index: 1 })));
    }

    #[test]
    fn bounds_reports() {
        for g in [path(5), star(4), paw()] {
            let s = laplacian_spectrum(&g).unwrap();
            let profiles = nodal_profiles(&g, &s).unwrap();
            let report = check_bounds(&g, &profiles).unwrap();
            assert!(report.all_pass, "bounds failed on {:?}", g.edges());
            if g.is_tree() {
                assert!(report.is_tree);
                for row in &report.rows {
                    assert_eq!(row.sturm_ok, Some(true));
                }
            }
        }
    }

    #[test]
    fn sequences_match_discriminates() {
        let g = star(3);
        let s = laplacian_spectrum(&g).unwrap();
        let p1 = nodal_profiles(&g, &s).unwrap();
        assert!(sequences_match(&p1, &p1));
        let g2 = paw();
        let p2 = nodal_profiles(&g2, &laplacian_spectrum(&g2).unwrap()).unwrap();
        // same generic index sets {1, 4} but nu differs at index 4
        assert!(!sequences_match(&p1, &p2));
        let short = &p1[..3];
        assert!(!sequences_match(&p1, short));
    }

    proptest! {
        #[test]
        fn bounds_hold_on_random_connected_graphs(
            n in 2usize..9,
            seed in any::<u32>(),
            extra in proptest::collection::vec(any::<u32>(), 0..12),
        ) {
            let mut edges: Vec<(usize, usize)> = (1..n)
                .map(|v| {
                    let parent = (seed as usize + v) % v;
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
            let s = laplacian_spectrum(&g).unwrap();
            let profiles = nodal_profiles(&g, &s).unwrap();
            let report = check_bounds(&g, &profiles).unwrap();
            prop_assert!(report.all_pass);
        }
    }
}
