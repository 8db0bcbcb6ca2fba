//! Quantum-graph spectra: Laplacian eigenvalues λ = k² of a metric graph
//! with Neumann (Kirchhoff) vertex conditions, eigenfunction
//! reconstruction, closed-form odd leaf spectra, and an independent
//! finite-difference oracle.
//!
//! On each edge an eigenfunction is a superposition of directed waves,
//! ψ_e(x) = a·e^{ikx} + â·e^{ik(l_e−x)}.  Vertex continuity plus the
//! zero-sum of outgoing derivatives is equivalent to the amplitude vector
//! being fixed by the bond evolution operator U(k) = S·diag(e^{ik l_b}),
//! whose vertex scattering entries are 2/d − δ_reversal.  Eigenvalues are
//! the k > 0 where I − U(k) becomes singular; the solver scans the
//! smallest singular value of that matrix on a uniform k-grid and refines
//! each local minimum by golden-section search.  Working with singular
//! values rather than a determinant avoids the wild oscillation that
//! commensurate edge lengths — which the leaf constructions force — would
//! otherwise make hard to bracket.
//!
//! Since U(k) is complex, singular values are computed on the real
//! 2×2-block embedding [[X, −Y], [Y, X]] of X + iY, where every singular
//! value of the complex matrix appears twice; multiplicities are halved
//! accordingly, and an embedding null vector (x; y) is the complex
//! amplitude vector x + iy.  Reconstruction converts amplitudes to the
//! real form ψ_e(x) = C cos(kx) + D sin(kx); real and imaginary parts of
//! a complex solution solve the same real vertex conditions, so a real
//! basis of the eigenspace always exists and is found by orthonormalizing
//! the pooled parts — no phase heuristics.  Degenerate eigenspaces are
//! re-projected onto even and odd functions under the graph's leaf-pair
//! exchange before genericity flags are assigned, mirroring the discrete
//! pipeline.
//!
//! Quasi-degenerate eigenvalue pairs closer than the grid can separate
//! but wider than the multiplicity tolerance may be missed; raising
//! `grid_density` is the remedy, and the solver errors when two refined
//! roots collide outright.

use crate::linalg::{self, Matrix};
use crate::metric::{MetricError, MetricGraph};
use crate::par;
use crate::spectra::SymmetryClass;
use num_complex::Complex64;
use thiserror::Error;

/// Singular values below this accept a refined k as an eigenvalue, and
/// count toward the multiplicity of the null space.
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-7;

/// Residual allowed in vertex continuity and outgoing-derivative sums of a
/// reconstructed eigenfunction, relative to the wave scale.
pub const DEFAULT_VERTEX_TOL: f64 = 1e-8;

/// Relative size under which a vertex value counts as a zero.
pub const DEFAULT_QZERO_TOL: f64 = 1e-8;

/// Samples of the secular curve per mean eigenvalue spacing π/L.
pub const DEFAULT_GRID_DENSITY: usize = 20;

#[derive(Debug, Error)]
pub enum QspectraError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error("bad solver configuration: {0}")]
    BadConfig(String),
    #[error(
        "refined roots {k1} and {k2} collide; the k-grid is too coarse \
         to separate them — raise grid_density"
    )]
    GridTooCoarse { k1: f64, k2: f64 },
    #[error(
        "eigenspace at k = {k} spans {got} real directions where {want} \
         were expected; reconstruction is numerically degenerate"
    )]
    DegenerateReconstruction { k: f64, got: usize, want: usize },
    #[error("reconstructed eigenfunction at k = {k} violates vertex conditions by {residual}")]
    VertexConditionViolated { k: f64, residual: f64 },
    #[error("finite-difference system of size {size} exceeds the cap {cap}")]
    OracleTooLarge { size: usize, cap: usize },
    #[error("finite-difference eigensolve did not settle in {iterations} iterations")]
    OracleDidNotConverge { iterations: usize },
}

/// Solver knobs.  `k_max` bounds the scan; roots are resolved to
/// 1e−10·k_max (the refinement actually targets 1e−11·k_max so residuals
/// sit far below every downstream tolerance).
#[derive(Clone, Debug)]
pub struct SecularConfig {
    pub k_max: f64,
    pub grid_density: usize,
    pub singular_tol: f64,
    pub vertex_tol: f64,
    pub zero_tol: f64,
}

impl SecularConfig {
    pub fn new(k_max: f64) -> Self {
        SecularConfig {
            k_max,
            grid_density: DEFAULT_GRID_DENSITY,
            singular_tol: DEFAULT_SINGULAR_TOL,
            vertex_tol: DEFAULT_VERTEX_TOL,
            zero_tol: DEFAULT_QZERO_TOL,
        }
    }

    fn validate(&self) -> Result<(), QspectraError> {
        if !(self.k_max > 0.0 && self.k_max.is_finite()) {
            return Err(QspectraError::BadConfig(format!("k_max = {}", self.k_max)));
        }
        if self.grid_density == 0 {
            return Err(QspectraError::BadConfig("grid_density = 0".into()));
        }
        Ok(())
    }
}

/// One wave ψ_e(x) = R·sin(kx + φ) on an edge, x measured from the edge's
/// first endpoint.
#[derive(Clone, Copy, Debug)]
pub struct EdgeWave {
    pub edge: usize,
    /// R ≥ 0
    pub amplitude: f64,
    /// φ ∈ [0, 2π)
    pub phase: f64,
}

impl EdgeWave {
    pub fn eval(&self, k: f64, x: f64) -> f64 {
        self.amplitude * (k * x + self.phase).sin()
    }

    pub fn deriv(&self, k: f64, x: f64) -> f64 {
        self.amplitude * k * (k * x + self.phase).cos()
    }
}

/// One eigenvalue of the metric graph with a reconstructed real
/// eigenfunction.  A degenerate eigenvalue contributes `multiplicity`
/// consecutive entries sharing k.  The constant mode at k = 0 is always
/// first.
#[derive(Clone, Debug)]
pub struct QEigenpair {
    pub k: f64,
    pub multiplicity: usize,
    pub vertex_values: Vec<f64>,
    pub edge_waves: Vec<EdgeWave>,
    /// simple eigenvalue and no vertex value within tolerance of zero
    pub generic: bool,
}

impl QEigenpair {
    pub fn lambda(&self) -> f64 {
        self.k * self.k
    }
}

fn bond_length(g: &MetricGraph, b: usize) -> f64 {
    g.edges()[b / 2].length
}

fn bond_head(g: &MetricGraph, b: usize) -> usize {
    let e = &g.edges()[b / 2];
    if b % 2 == 0 {
        e.v
    } else {
        e.u
    }
}

fn bond_tail(g: &MetricGraph, b: usize) -> usize {
    bond_head(g, b ^ 1)
}

/// Real 2n×2n embedding of the complex n×n matrix I − U(k), n = 2E.
fn embedded_secular(g: &MetricGraph, k: f64) -> Matrix {
    let n = 2 * g.edges().len();
    let degree: Vec<usize> = (0..g.vertex_count()).map(|v| g.degree(v)).collect();
    let mut ure = vec![0.0f64; n * n];
    let mut uim = vec![0.0f64; n * n];
    for b in 0..n {
        let v = bond_head(g, b);
        let (im, re) = (k * bond_length(g, b)).sin_cos();
        let open = 2.0 / degree[v] as f64;
        for bp in 0..n {
            if bond_tail(g, bp) != v {
                continue;
            }
            let s = open - if bp == b ^ 1 { 1.0 } else { 0.0 };
            ure[bp * n + b] = s * re;
            uim[bp * n + b] = s * im;
        }
    }
    let mut m = Matrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let x = if i == j { 1.0 } else { 0.0 } - ure[i * n + j];
            let y = -uim[i * n + j];
            m.set(i, j, x);
            m.set(i, j + n, -y);
            m.set(i + n, j, y);
            m.set(i + n, j + n, x);
        }
    }
    m
}

/// Smallest singular value of I − U(k); zero exactly at eigenvalues.
pub fn secular_sigma(g: &MetricGraph, k: f64) -> Result<f64, QspectraError> {
    let svd = linalg::svd_square(&embedded_secular(g, k), 1e-13)?;
    Ok(svd.singular[0])
}

fn grid_points(g: &MetricGraph, cfg: &SecularConfig) -> Vec<f64> {
    let dk = std::f64::consts::PI / (cfg.grid_density as f64 * g.total_length());
    let steps = (cfg.k_max / dk).ceil() as usize;
    let mut ks: Vec<f64> = (1..=steps).map(|i| (i as f64 * dk).min(cfg.k_max)).collect();
    if ks.last().copied() != Some(cfg.k_max) {
        ks.push(cfg.k_max);
    }
    ks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    ks
}

/// The sampled secular curve (k, smallest singular value) on the scan
/// grid — raw material for plots and for the root scan itself.
pub fn secular_trace(
    g: &MetricGraph,
    cfg: &SecularConfig,
) -> Result<Vec<(f64, f64)>, QspectraError> {
    cfg.validate()?;
    let grid = grid_points(g, cfg);
    let sigmas: Vec<Result<f64, QspectraError>> =
        par::map_ordered(&grid, |&k| secular_sigma(g, k));
    let mut out = Vec::with_capacity(grid.len());
    for (k, s) in grid.into_iter().zip(sigmas) {
        out.push((k, s?));
    }
    Ok(out)
}

fn golden_min<F: FnMut(f64) -> Result<f64, QspectraError>>(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mut f: F,
) -> Result<f64, QspectraError> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { x1 } else { x2 })
}

/// Eigenvalues and eigenfunctions up to k_max, ordered by k, constant mode
/// first.  Uses the graph's first declared leaf pair (if any) to
/// symmetry-split degenerate eigenspaces.
pub fn secular_spectrum(
    g: &MetricGraph,
    cfg: &SecularConfig,
) -> Result<Vec<QEigenpair>, QspectraError> {
    let swap = match g.leaf_pairs().first() {
        Some(p) => Some(g.pair_bond_swap(p)?),
        None => None,
    };
    secular_spectrum_with_swap(g, cfg, swap.as_deref())
}

/// As [`secular_spectrum`] with an explicit bond involution for the
/// symmetry splitting — the form glued graphs need, since gluing consumes
/// the declared pair while [`crate::metric::GlueOutcome`] keeps the swap.
pub fn secular_spectrum_with_swap(
    g: &MetricGraph,
    cfg: &SecularConfig,
    swap: Option<&[usize]>,
) -> Result<Vec<QEigenpair>, QspectraError> {
    cfg.validate()?;
    if let Some(pi) = swap {
        if pi.len() != 2 * g.edges().len() {
            return Err(QspectraError::BadConfig(format!(
                "bond swap has length {}, expected {}",
                pi.len(),
                2 * g.edges().len()
            )));
        }
    }
    let grid = grid_points(g, cfg);
    let sigmas: Vec<Result<f64, QspectraError>> =
        par::map_ordered(&grid, |&k| secular_sigma(g, k));
    let mut sig = Vec::with_capacity(grid.len());
    for s in sigmas {
        sig.push(s?);
    }

    let refine_tol = 1e-11 * cfg.k_max;
    let collide_tol = 1e-9 * cfg.k_max;
    let mut roots: Vec<f64> = Vec::new();
    let last = grid.len() - 1;
    for i in 1..=last {
        let is_min = if i < last {
            sig[i] < sig[i - 1] && sig[i] <= sig[i + 1]
        } else {
            sig[i] < sig[i - 1]
        };
        if !is_min {
            continue;
        }
        let lo = grid[i - 1];
        let hi = if i < last { grid[i + 1] } else { grid[i] };
        let k_star = golden_min(lo, hi, refine_tol, |k| secular_sigma(g, k))?;
        if secular_sigma(g, k_star)? >= cfg.singular_tol {
            continue;
        }
        if let Some(&prev) = roots.last() {
            if (k_star - prev).abs() < collide_tol {
                return Err(QspectraError::GridTooCoarse { k1: prev, k2: k_star });
            }
        }
        roots.push(k_star);
    }

    let mut out = vec![constant_mode(g)];
    for k in roots {
        let svd = linalg::svd_square(&embedded_secular(g, k), 1e-13)?;
        let below = svd.singular.iter().filter(|&&s| s < cfg.singular_tol).count();
        let mult = (below / 2).max(1);
        out.extend(reconstruct_family(g, k, &svd, mult, swap, cfg)?);
    }
    Ok(out)
}

fn constant_mode(g: &MetricGraph) -> QEigenpair {
    QEigenpair {
        k: 0.0,
        multiplicity: 1,
        vertex_values: vec![1.0; g.vertex_count()],
        edge_waves: (0..g.edges().len())
            .map(|e| EdgeWave { edge: e, amplitude: 1.0, phase: std::f64::consts::FRAC_PI_2 })
            .collect(),
        generic: true,
    }
}

/// Coefficient layout for one candidate eigenfunction: C_e then D_e, with
/// ψ_e(x) = C_e cos(kx) + D_e sin(kx).
fn amplitude_to_coeffs(g: &MetricGraph, k: f64, a: &[Complex64]) -> Vec<Complex64> {
    let ne = g.edges().len();
    let mut cd = vec![Complex64::new(0.0, 0.0); 2 * ne];
    for e in 0..ne {
        let p = Complex64::from_polar(1.0, k * g.edges()[e].length);
        let fwd = a[2 * e];
        let bwd = a[2 * e + 1] * p;
        cd[e] = fwd + bwd;
        cd[ne + e] = Complex64::i() * (fwd - bwd);
    }
    cd
}

/// Image of a coefficient vector under an orientation-aligned bond
/// involution: the (C, D) pair of each edge moves wholesale to its image
/// edge.  Every swap built in this crate aligns orientations.
fn swap_coeffs(g: &MetricGraph, swap: &[usize], cd: &[f64]) -> Vec<f64> {
    let ne = g.edges().len();
    let mut out = vec![0.0; 2 * ne];
    for e in 0..ne {
        let img = swap[2 * e] / 2;
        out[img] = cd[e];
        out[ne + img] = cd[ne + e];
    }
    out
}

fn reconstruct_family(
    g: &MetricGraph,
    k: f64,
    svd: &linalg::SmallSvd,
    mult: usize,
    swap: Option<&[usize]>,
    cfg: &SecularConfig,
) -> Result<Vec<QEigenpair>, QspectraError> {
    let n = 2 * g.edges().len();
    let mut pool: Vec<Vec<f64>> = Vec::with_capacity(4 * mult);
    for rv in svd.right.iter().take(2 * mult) {
        let a: Vec<Complex64> = (0..n).map(|i| Complex64::new(rv[i], rv[i + n])).collect();
        let cd = amplitude_to_coeffs(g, k, &a);
        pool.push(cd.iter().map(|z| z.re).collect());
        pool.push(cd.iter().map(|z| z.im).collect());
    }
    let mut basis = linalg::mgs_orthonormalize(&pool, 1e-6);
    if basis.len() != mult {
        return Err(QspectraError::DegenerateReconstruction {
            k,
            got: basis.len(),
            want: mult,
        });
    }
    if let (Some(pi), true) = (swap, mult >= 2) {
        let mut evens = Vec::new();
        let mut odds = Vec::new();
        for v in &basis {
            let sv = swap_coeffs(g, pi, v);
            evens.push(v.iter().zip(&sv).map(|(a, b)| 0.5 * (a + b)).collect::<Vec<f64>>());
            odds.push(v.iter().zip(&sv).map(|(a, b)| 0.5 * (a - b)).collect::<Vec<f64>>());
        }
        let mut split = linalg::mgs_orthonormalize(&evens, 1e-6);
        split.extend(linalg::mgs_orthonormalize(&odds, 1e-6));
        if split.len() != mult {
            return Err(QspectraError::DegenerateReconstruction {
                k,
                got: split.len(),
                want: mult,
            });
        }
        basis = split;
    }
    basis.iter().map(|cd| build_pair(g, k, mult, cd, cfg)).collect()
}

fn build_pair(
    g: &MetricGraph,
    k: f64,
    multiplicity: usize,
    cd: &[f64],
    cfg: &SecularConfig,
) -> Result<QEigenpair, QspectraError> {
    let ne = g.edges().len();
    let scale = cd.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);

    let end_values = |e: usize| -> (f64, f64) {
        let (c, d) = (cd[e], cd[ne + e]);
        let (s, co) = (k * g.edges()[e].length).sin_cos();
        (c, c * co + d * s)
    };

    // vertex values from the first incident edge, continuity over the rest
    let mut values = vec![0.0f64; g.vertex_count()];
    let mut continuity = 0.0f64;
    for v in 0..g.vertex_count() {
        let mut first: Option<f64> = None;
        for e in g.incident(v) {
            let (at_u, at_v) = end_values(e);
            let val = if g.edges()[e].u == v { at_u } else { at_v };
            match first {
                None => {
                    first = Some(val);
                    values[v] = val;
                }
                Some(f0) => continuity = continuity.max((val - f0).abs()),
            }
        }
    }
    // outgoing-derivative sums
    let mut flux = 0.0f64;
    for v in 0..g.vertex_count() {
        let mut sum = 0.0;
        for e in g.incident(v) {
            let (c, d) = (cd[e], cd[ne + e]);
            let (s, co) = (k * g.edges()[e].length).sin_cos();
            if g.edges()[e].u == v {
                sum += k * d;
            } else {
                sum += k * (c * s - d * co);
            }
        }
        flux = flux.max(sum.abs());
    }
    let residual = continuity.max(flux / k.max(1.0)) / scale;
    if residual > cfg.vertex_tol {
        return Err(QspectraError::VertexConditionViolated { k, residual });
    }

    // deterministic sign and scale: the largest vertex value becomes +1,
    // or the largest coefficient for modes vanishing at every vertex
    let mut anchor = 0.0f64;
    for &v in &values {
        if v.abs() > anchor.abs() {
            anchor = v;
        }
    }
    if anchor.abs() <= 1e-9 * scale {
        for &c in cd {
            if c.abs() > anchor.abs() {
                anchor = c;
            }
        }
    }
    let cd: Vec<f64> = cd.iter().map(|c| c / anchor).collect();
    for v in values.iter_mut() {
        *v /= anchor;
    }

    let edge_waves: Vec<EdgeWave> = (0..ne)
        .map(|e| {
            let (c, d) = (cd[e], cd[ne + e]);
            let amplitude = c.hypot(d);
            let mut phase = if amplitude > 0.0 { c.atan2(d) } else { 0.0 };
            if phase < 0.0 {
                phase += 2.0 * std::f64::consts::PI;
            }
            EdgeWave { edge: e, amplitude, phase }
        })
        .collect();

    // a vertex value is a zero when it is small against the whole
    // function, not merely against the other vertex values — a mode
    // vanishing at every vertex must not read as generic
    let vmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let vmin = values.iter().fold(f64::MAX, |m, v| m.min(v.abs()));
    let amp_max = edge_waves.iter().fold(0.0f64, |m, w| m.max(w.amplitude));
    let generic = multiplicity == 1 && vmin > cfg.zero_tol * vmax.max(amp_max).max(1e-300);

    Ok(QEigenpair { k, multiplicity, vertex_values: values, edge_waves, generic })
}

/// Even/odd/mixed label of each eigenpair under an orientation-aligned
/// bond involution, decided by comparing each wave with its image at two
/// interior sample points per edge.
pub fn symmetry_labels(
    g: &MetricGraph,
    pairs: &[QEigenpair],
    swap: &[usize],
) -> Vec<SymmetryClass> {
    pairs
        .iter()
        .map(|p| {
            let scale =
                p.edge_waves.iter().fold(0.0f64, |m, w| m.max(w.amplitude)).max(1e-300);
            let mut even = 0.0f64;
            let mut odd = 0.0f64;
            for e in 0..g.edges().len() {
                let img = swap[2 * e] / 2;
                let l = g.edges()[e].length;
                for frac in [0.37, 0.73] {
                    let x = frac * l;
                    let own = p.edge_waves[e].eval(p.k, x);
                    let mirrored = p.edge_waves[img].eval(p.k, x);
                    even = even.max((own - mirrored).abs());
                    odd = odd.max((own + mirrored).abs());
                }
            }
            if even <= 1e-7 * scale {
                SymmetryClass::Even
            } else if odd <= 1e-7 * scale {
                SymmetryClass::Odd
            } else {
                SymmetryClass::Mixed
            }
        })
        .collect()
}

/// Closed-form antisymmetric spectrum carried by an l-leaf pair, below
/// k_max.  Unglued, odd modes see a Dirichlet condition at the root and
/// Neumann at the leaf: k ∈ {(2m+1)π/(2l)}.  After gluing at distance l1
/// the pair splits into a Dirichlet–Dirichlet segment of length l1 and
/// Dirichlet–Neumann tails of length l−l1:
/// k ∈ {mπ/l1, m ≥ 1} ∪ {(2m+1)π/(2(l−l1))}.
pub fn odd_leaf_spectrum(
    l: f64,
    l1: Option<f64>,
    glued: bool,
    k_max: f64,
) -> Result<Vec<f64>, QspectraError> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(QspectraError::BadConfig(format!("leaf length {l}")));
    }
    let pi = std::f64::consts::PI;
    let mut ks = Vec::new();
    if !glued {
        let mut m = 0usize;
        loop {
            let k = (2 * m + 1) as f64 * pi / (2.0 * l);
            if k > k_max {
                return Ok(ks);
            }
            ks.push(k);
            m += 1;
        }
    }
    let l1 = l1.ok_or_else(|| {
        QspectraError::BadConfig("glued spectrum requires the glue distance l1".into())
    })?;
    if !(l1 > 0.0 && l1 < l) {
        return Err(QspectraError::BadConfig(format!("l1 = {l1} outside (0, {l})")));
    }
    let l2 = l - l1;
    let mut m = 1usize;
    loop {
        let k = m as f64 * pi / l1;
        if k > k_max {
            break;
        }
        ks.push(k);
        m += 1;
    }
    let mut m = 0usize;
    loop {
        let k = (2 * m + 1) as f64 * pi / (2.0 * l2);
        if k > k_max {
            break;
        }
        ks.push(k);
        m += 1;
    }
    ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ks)
}

// ---------------------------------------------------------------------------
// finite-difference oracle

const FD_SIZE_CAP: usize = 150_000;
const FD_SUBSPACE: usize = 25;
const FD_WANT: usize = 15;
const FD_MAX_ITERS: usize = 400;
const FD_SETTLE_TOL: f64 = 1e-11;

/// Factorized arrowhead solver for the shifted, mass-normalized
/// second-order discretization B + I of the metric Laplacian.  Interior
/// points of each edge form a tridiagonal block eliminated by Thomas
/// sweeps; vertices form a small dense border handled through the
/// eigendecomposition of its Schur complement.
struct FdSolver {
    size: usize,
    base: usize,
    offsets: Vec<usize>,
    interiors: Vec<usize>,
    ends: Vec<(usize, usize)>,
    dmod: Vec<Vec<f64>>,
    off: Vec<f64>,
    couple_u: Vec<f64>,
    couple_v: Vec<f64>,
    inv_first: Vec<Vec<f64>>,
    inv_last: Vec<Vec<f64>>,
    schur_values: Vec<f64>,
    schur_vectors: Vec<Vec<f64>>,
}

fn thomas_factor(diag: &[f64], off: f64) -> Vec<f64> {
    let mut d = diag.to_vec();
    for i in 1..d.len() {
        d[i] -= off * off / d[i - 1];
    }
    d
}

fn thomas_solve(dmod: &[f64], off: f64, rhs: &[f64]) -> Vec<f64> {
    let m = rhs.len();
    let mut y = rhs.to_vec();
    for i in 1..m {
        y[i] -= off / dmod[i - 1] * y[i - 1];
    }
    let mut x = vec![0.0; m];
    if m > 0 {
        x[m - 1] = y[m - 1] / dmod[m - 1];
        for i in (0..m - 1).rev() {
            x[i] = (y[i] - off * x[i + 1]) / dmod[i];
        }
    }
    x
}

impl FdSolver {
    fn build(g: &MetricGraph, points_per_unit: usize) -> Result<Self, QspectraError> {
        if points_per_unit < 100 {
            return Err(QspectraError::BadConfig(format!(
                "points_per_unit = {points_per_unit}, need at least 100"
            )));
        }
        let ne = g.edges().len();
        let nv = g.vertex_count();
        let mut offsets = vec![0usize; ne];
        let mut interiors = vec![0usize; ne];
        let mut steps = vec![0usize; ne];
        let mut ends = Vec::with_capacity(ne);
        let mut acc = 0usize;
        for e in 0..ne {
            let edge = &g.edges()[e];
            let n = ((edge.length * points_per_unit as f64).ceil() as usize).max(1);
            steps[e] = n;
            offsets[e] = acc;
            interiors[e] = n - 1;
            ends.push((edge.u, edge.v));
            acc += n - 1;
        }
        let base = acc;
        let size = base + nv;
        if size > FD_SIZE_CAP {
            return Err(QspectraError::OracleTooLarge { size, cap: FD_SIZE_CAP });
        }

        // lumped vertex masses: half of each incident subinterval
        let mut mass_v = vec![0.0f64; nv];
        for e in 0..ne {
            let h = g.edges()[e].length / steps[e] as f64;
            mass_v[ends[e].0] += 0.5 * h;
            mass_v[ends[e].1] += 0.5 * h;
        }

        let mut dmod = Vec::with_capacity(ne);
        let mut off = vec![0.0f64; ne];
        let mut couple_u = vec![0.0f64; ne];
        let mut couple_v = vec![0.0f64; ne];
        let mut inv_first = Vec::with_capacity(ne);
        let mut inv_last = Vec::with_capacity(ne);
        // vertex block of B + I, folded into its Schur complement
        let mut s = Matrix::identity(nv);
        for e in 0..ne {
            let (u, v) = ends[e];
            let h = g.edges()[e].length / steps[e] as f64;
            let m = interiors[e];
            s.add_to(u, u, 1.0 / (h * mass_v[u]));
            s.add_to(v, v, 1.0 / (h * mass_v[v]));
            off[e] = -1.0 / (h * h);
            if m == 0 {
                let c = -1.0 / (h * (mass_v[u] * mass_v[v]).sqrt());
                s.add_to(u, v, c);
                s.add_to(v, u, c);
                dmod.push(Vec::new());
                inv_first.push(Vec::new());
                inv_last.push(Vec::new());
                continue;
            }
            couple_u[e] = -1.0 / (h * (h * mass_v[u]).sqrt());
            couple_v[e] = -1.0 / (h * (h * mass_v[v]).sqrt());
            let diag: Vec<f64> = (0..m).map(|_| 2.0 / (h * h) + 1.0).collect();
            let f = thomas_factor(&diag, off[e]);
            let mut ef = vec![0.0; m];
            ef[0] = 1.0;
            let mut el = vec![0.0; m];
            el[m - 1] = 1.0;
            let pf = thomas_solve(&f, off[e], &ef);
            let pl = thomas_solve(&f, off[e], &el);
            s.add_to(u, u, -couple_u[e] * couple_u[e] * pf[0]);
            s.add_to(v, v, -couple_v[e] * couple_v[e] * pl[m - 1]);
            s.add_to(u, v, -couple_u[e] * couple_v[e] * pf[m - 1]);
            s.add_to(v, u, -couple_u[e] * couple_v[e] * pl[0]);
            dmod.push(f);
            inv_first.push(pf);
            inv_last.push(pl);
        }

        let eig = linalg::jacobi_eigh(&s, 1e-13)?;
        Ok(FdSolver {
            size,
            base,
            offsets,
            interiors,
            ends,
            dmod,
            off,
            couple_u,
            couple_v,
            inv_first,
            inv_last,
            schur_values: eig.values,
            schur_vectors: eig.vectors,
        })
    }

    /// Solves (B + I) z = r.
    fn solve(&self, r: &[f64]) -> Vec<f64> {
        let ne = self.offsets.len();
        let nv = self.size - self.base;
        let mut rv: Vec<f64> = r[self.base..].to_vec();
        let mut ys: Vec<Vec<f64>> = Vec::with_capacity(ne);
        for e in 0..ne {
            let m = self.interiors[e];
            if m == 0 {
                ys.push(Vec::new());
                continue;
            }
            let seg = &r[self.offsets[e]..self.offsets[e] + m];
            let y = thomas_solve(&self.dmod[e], self.off[e], seg);
            rv[self.ends[e].0] -= self.couple_u[e] * y[0];
            rv[self.ends[e].1] -= self.couple_v[e] * y[m - 1];
            ys.push(y);
        }
        let mut phi = vec![0.0f64; nv];
        for (val, vec) in self.schur_values.iter().zip(&self.schur_vectors) {
            let c = linalg::dot(vec, &rv) / val;
            for (p, q) in phi.iter_mut().zip(vec) {
                *p += c * q;
            }
        }
        let mut z = vec![0.0f64; self.size];
        z[self.base..].copy_from_slice(&phi);
        for e in 0..ne {
            let m = self.interiors[e];
            if m == 0 {
                continue;
            }
            let fu = phi[self.ends[e].0] * self.couple_u[e];
            let fv = phi[self.ends[e].1] * self.couple_v[e];
            for i in 0..m {
                z[self.offsets[e] + i] =
                    ys[e][i] - fu * self.inv_first[e][i] - fv * self.inv_last[e][i];
            }
        }
        z
    }

    /// Lowest eigenvalues of B by shift-inverted subspace iteration with
    /// Rayleigh–Ritz extraction on the projected inverse.
    fn lowest(&self, want: usize) -> Result<Vec<f64>, QspectraError> {
        let want = want.min(self.size);
        let p = FD_SUBSPACE.clamp(want, self.size);
        let seed = |j: usize, i: usize| ((i + 1) as f64 * 0.7368 * (j + 1) as f64 + 0.31).sin();
        let mut q: Vec<Vec<f64>> =
            (0..p).map(|j| (0..self.size).map(|i| seed(j, i)).collect()).collect();
        q = linalg::mgs_orthonormalize(&q, 1e-12);
        let mut extra = p;
        while q.len() < p {
            q.push((0..self.size).map(|i| seed(extra, i)).collect());
            extra += 1;
            q = linalg::mgs_orthonormalize(&q, 1e-12);
        }

        let mut prev: Vec<f64> = Vec::new();
        for iter in 1..=FD_MAX_ITERS {
            let y: Vec<Vec<f64>> = par::map_ordered(&q, |v| self.solve(v));
            let mut h = Matrix::zeros(p);
            for i in 0..p {
                for j in i..p {
                    let v = 0.5 * (linalg::dot(&q[i], &y[j]) + linalg::dot(&q[j], &y[i]));
                    h.set(i, j, v);
                    h.set(j, i, v);
                }
            }
            let eig = linalg::jacobi_eigh(&h, 1e-13)?;
            // θ descending ↔ λ = 1/θ − 1 ascending
            let order: Vec<usize> = (0..p).rev().collect();
            let mut next: Vec<Vec<f64>> = Vec::with_capacity(p);
            for &c in &order {
                let w = &eig.vectors[c];
                let mut z = vec![0.0f64; self.size];
                for (t, yt) in y.iter().enumerate() {
                    let wc = w[t];
                    for (zi, yi) in z.iter_mut().zip(yt) {
                        *zi += wc * yi;
                    }
                }
                next.push(z);
            }
            q = linalg::mgs_orthonormalize(&next, 1e-12);
            let mut extra = p;
            while q.len() < p {
                q.push((0..self.size).map(|i| seed(extra + iter, i)).collect());
                extra += 1;
                q = linalg::mgs_orthonormalize(&q, 1e-12);
            }

            let lam: Vec<f64> =
                order.iter().map(|&c| 1.0 / eig.values[c] - 1.0).take(want).collect();
            let settled = prev.len() == lam.len()
                && prev
                    .iter()
                    .zip(&lam)
                    .all(|(a, b)| (a - b).abs() <= FD_SETTLE_TOL * (1.0 + b.abs()));
            if settled {
                return Ok(lam);
            }
            prev = lam;
        }
        Err(QspectraError::OracleDidNotConverge { iterations: FD_MAX_ITERS })
    }
}

/// Lowest eigenvalues of the metric Laplacian by an independent
/// second-order discretization: lumped mass matrix, mass-normalized
/// stiffness, shift-inverted subspace iteration with Rayleigh–Ritz
/// extraction through the module's dense eigensolver.  Returns up to 15
/// values ascending, starting with 0.
pub fn fd_oracle(g: &MetricGraph, points_per_unit: usize) -> Result<Vec<f64>, QspectraError> {
    fd_lowest(g, points_per_unit, FD_WANT)
}

/// As [`fd_oracle`] with a caller-chosen count.
pub fn fd_lowest(
    g: &MetricGraph,
    points_per_unit: usize,
    want: usize,
) -> Result<Vec<f64>, QspectraError> {
    FdSolver::build(g, points_per_unit)?.lowest(want)
}
