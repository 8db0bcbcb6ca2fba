//! Sign changes and nodal domains of metric-graph eigenfunctions, plus
//! the gluing and interlacing verification harnesses.
//!
//! On an edge a (generic) eigenfunction is R·sin(kx + φ), so its zeros
//! are at x = (mπ − φ)/k and are counted in closed form — sampling is
//! used only as an independent oracle, since samples alone can miss
//! near-tangent zeros while the amplitude–phase form cannot.  The flip
//! count μ sums the interior zeros over all edges; the nodal count ν
//! merges the sign-constant segments of each edge with the stars of
//! same-sign vertices through a union-find and counts components.  Both
//! are defined only for generic eigenpairs: a zero at a vertex or edge
//! endpoint makes the counts ill-posed and raises an error instead of
//! guessing.
//!
//! For trees the counts collapse to the Sturm oscillation picture
//! (ν_n = n, μ_n = n−1 at generic indices); on a graph with β independent
//! cycles they obey n−β ≤ ν_n ≤ n and n−1 ≤ μ_n ≤ n−1+β.
//!
//! [`verify_theorem3`] runs the full gluing pipeline on two metric graphs
//! carrying equal-length leaf pairs: it checks the seeds are isospectral
//! with matching count sequences, glues both pairs at the same distance,
//! and then asserts the glued graphs are isospectral with matching flip
//! and nodal sequences at mutually generic indices, that eigenfunction
//! ratios are constant across the glued leaf region, and that gluing
//! never changes μ and lowers ν by at most one at retained eigenpairs.
//! [`interlacing_check`] compares the closed-form odd spectra before and
//! after gluing and asserts strict interlacing in λ = k².

use crate::metric::{GlueOutcome, MetricError, MetricGraph};
use crate::qspectra::{
    self, EdgeWave, QEigenpair, QspectraError, SecularConfig, DEFAULT_QZERO_TOL,
};
use crate::report::{Assertion, VerificationReport};
use thiserror::Error;

/// |sin| below this at an edge endpoint counts as an endpoint zero and
/// makes the closed-form zero count refuse the wave.
pub const ENDPOINT_ZERO_TOL: f64 = 1e-9;

/// Tolerance (relative to k_max) for matching eigenvalues across graphs.
pub const QMATCH_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum QnodalError {
    #[error(transparent)]
    Qspectra(#[from] QspectraError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(
        "eigenfunction vanishes (within tolerance) at an endpoint of edge {edge}; \
         zero counts are undefined on a non-generic wave"
    )]
    NonGenericWave { edge: usize },
    #[error("flip and nodal counts require a generic eigenpair (k = {k})")]
    NonGenericPair { k: f64 },
    #[error("eigenpair carries {got} edge waves for a graph with {want} edges")]
    ShapeMismatch { got: usize, want: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

/// Number of interior zeros of R·sin(kx + φ) on (0, l): the integers m
/// with 0 < (mπ − φ)/k < l, evaluated with two floor operations — exact,
/// no sampling.  A zero within tolerance of either endpoint (including a
/// vanishing amplitude) is a non-generic error; the k = 0 constant mode
/// has no zeros.
pub fn edge_zero_count(w: &EdgeWave, k: f64, l: f64) -> Result<usize, QnodalError> {
    if w.amplitude == 0.0 {
        return Err(QnodalError::NonGenericWave { edge: w.edge });
    }
    let pi = std::f64::consts::PI;
    if w.phase.sin().abs() <= ENDPOINT_ZERO_TOL
        || (k * l + w.phase).sin().abs() <= ENDPOINT_ZERO_TOL
    {
        return Err(QnodalError::NonGenericWave { edge: w.edge });
    }
    if k == 0.0 {
        return Ok(0);
    }
    let a = (w.phase / pi).floor();
    let b = ((k * l + w.phase) / pi).floor();
    Ok((b - a) as usize)
}

/// Quantum flip count μ: total interior zeros of the eigenfunction.
pub fn q_flip_count(g: &MetricGraph, pair: &QEigenpair) -> Result<usize, QnodalError> {
    check_pair(g, pair)?;
    let mut total = 0;
    for (e, w) in pair.edge_waves.iter().enumerate() {
        total += edge_zero_count(w, pair.k, g.edges()[e].length)?;
    }
    Ok(total)
}

fn check_pair(g: &MetricGraph, pair: &QEigenpair) -> Result<(), QnodalError> {
    if pair.edge_waves.len() != g.edges().len() {
        return Err(QnodalError::ShapeMismatch {
            got: pair.edge_waves.len(),
            want: g.edges().len(),
        });
    }
    if !pair.generic {
        return Err(QnodalError::NonGenericPair { k: pair.k });
    }
    Ok(())
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn join(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

/// Quantum nodal count ν: connected components of the graph minus the
/// zero set.  Each edge contributes zeros+1 sign-constant segments; the
/// segments touching a common vertex all share the vertex's (nonzero)
/// sign and are merged by a union-find.
pub fn q_nodal_count(g: &MetricGraph, pair: &QEigenpair) -> Result<usize, QnodalError> {
    check_pair(g, pair)?;
    let ne = g.edges().len();
    let mut zeros = Vec::with_capacity(ne);
    let mut base = Vec::with_capacity(ne);
    let mut total = 0usize;
    for (e, w) in pair.edge_waves.iter().enumerate() {
        let z = edge_zero_count(w, pair.k, g.edges()[e].length)?;
        zeros.push(z);
        base.push(total);
        total += z + 1;
    }
    let mut dsu = Dsu::new(total);
    for v in 0..g.vertex_count() {
        let mut anchor: Option<usize> = None;
        for e in g.incident(v) {
            let seg = if g.edges()[e].u == v { base[e] } else { base[e] + zeros[e] };
            match anchor {
                None => anchor = Some(seg),
                Some(a) => dsu.join(a, seg),
            }
        }
    }
    let mut roots: Vec<usize> = (0..total).map(|s| dsu.find(s)).collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(roots.len())
}

/// Independent nodal-count oracle: sample every edge densely, build
/// maximal same-sign runs, merge runs through same-sign vertices, and
/// count the classes.  Works on any eigenpair; zeros simply separate
/// runs, so a vertex zero splits domains exactly as it should.
pub fn q_nodal_count_sampled(
    g: &MetricGraph,
    pair: &QEigenpair,
    samples_per_edge: usize,
) -> usize {
    let n = samples_per_edge.max(2);
    let amp = pair.edge_waves.iter().fold(0.0f64, |m, w| m.max(w.amplitude)).max(1e-300);
    let vmax =
        pair.vertex_values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let cut = 1e-9 * amp;
    let sign_of = |x: f64, tol: f64| -> i8 {
        if x > tol {
            1
        } else if x < -tol {
            -1
        } else {
            0
        }
    };

    // run ids per edge end, then vertices appended as bridge nodes
    let mut runs = 0usize;
    let mut ends: Vec<(Option<(usize, i8)>, Option<(usize, i8)>)> = Vec::new();
    let mut spans: Vec<Vec<(usize, i8)>> = Vec::new();
    for (e, w) in pair.edge_waves.iter().enumerate() {
        let l = g.edges()[e].length;
        let mut cur: Option<(usize, i8)> = None;
        let mut first: Option<(usize, i8)> = None;
        let mut edge_runs = Vec::new();
        for i in 0..n {
            let x = (i as f64 + 0.5) * l / n as f64;
            let s = sign_of(w.eval(pair.k, x), cut);
            match (cur, s) {
                (_, 0) => cur = None,
                (Some((_, cs)), s) if cs == s => {}
                (_, s) => {
                    cur = Some((runs, s));
                    edge_runs.push((runs, s));
                    if first.is_none() {
                        first = Some((runs, s));
                    }
                    runs += 1;
                }
            }
        }
        ends.push((first, cur));
        spans.push(edge_runs);
    }
    let mut dsu = Dsu::new(runs + g.vertex_count());
    for v in 0..g.vertex_count() {
        let vs = sign_of(pair.vertex_values[v], 1e-9 * vmax);
        if vs == 0 {
            continue;
        }
        for e in g.incident(v) {
            let near = if g.edges()[e].u == v { ends[e].0 } else { ends[e].1 };
            if let Some((run, s)) = near {
                if s == vs {
                    dsu.join(runs + v, run);
                }
            }
        }
    }
    let mut roots: Vec<usize> =
        spans.iter().flatten().map(|&(r, _)| dsu.find(r)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Per-index flip and nodal counts for a run of eigenpairs; indices are
/// 1-based in spectral order, counts present only at generic indices.
#[derive(Clone, Debug, PartialEq)]
pub struct QNodalProfile {
    pub n: usize,
    pub k: f64,
    pub generic: bool,
    pub mu: Option<usize>,
    pub nu: Option<usize>,
}

pub fn q_nodal_profiles(
    g: &MetricGraph,
    pairs: &[QEigenpair],
) -> Result<Vec<QNodalProfile>, QnodalError> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (mu, nu) = if p.generic {
                (Some(q_flip_count(g, p)?), Some(q_nodal_count(g, p)?))
            } else {
                (None, None)
            };
            Ok(QNodalProfile { n: i + 1, k: p.k, generic: p.generic, mu, nu })
        })
        .collect()
}

/// True when the two profile runs have the same generic pattern and equal
/// counts at every mutually generic index.
pub fn q_sequences_match(a: &[QNodalProfile], b: &[QNodalProfile]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.generic == y.generic && (!x.generic || (x.mu == y.mu && x.nu == y.nu))
        })
}

/// One bound check n−β ≤ ν_n ≤ n, n−1 ≤ μ_n ≤ n−1+β at a generic index.
#[derive(Clone, Debug)]
pub struct QBoundRow {
    pub n: usize,
    pub mu: usize,
    pub nu: usize,
    pub ok: bool,
}

/// Evaluates the count bounds at every generic index of a profile run;
/// β is the cycle count of the underlying multigraph.
pub fn q_check_bounds(g: &MetricGraph, profiles: &[QNodalProfile]) -> Vec<QBoundRow> {
    let beta = g.betti();
    profiles
        .iter()
        .filter(|p| p.generic)
        .map(|p| {
            let (mu, nu) = (p.mu.unwrap(), p.nu.unwrap());
            let nu_ok = nu + beta >= p.n && nu <= p.n;
            let mu_ok = mu + 1 >= p.n && mu <= p.n - 1 + beta;
            QBoundRow { n: p.n, mu, nu, ok: nu_ok && mu_ok }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// gluing harness

fn secular_to_count(
    g: &MetricGraph,
    k_max: f64,
    need: usize,
) -> Result<Option<Vec<QEigenpair>>, QnodalError> {
    let cfg = SecularConfig::new(k_max);
    let s = qspectra::secular_spectrum(g, &cfg)?;
    Ok(if s.len() >= need { Some(s) } else { None })
}

/// Inside the first n_max entries: a simple eigenfunction whose only
/// vanishing vertex value is the glue joint — the signal that the glue
/// point landed on a zero and l1 should be nudged.
fn joint_blocks_genericity(out: &GlueOutcome, pairs: &[QEigenpair]) -> bool {
    pairs.iter().any(|p| {
        if p.multiplicity != 1 {
            return false;
        }
        let vmax = p.vertex_values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if vmax == 0.0 {
            return false;
        }
        let tol = DEFAULT_QZERO_TOL * vmax;
        p.vertex_values[out.joint].abs() <= tol
            && p
                .vertex_values
                .iter()
                .enumerate()
                .all(|(v, val)| v == out.joint || val.abs() > tol)
    })
}

/// Verifies the gluing construction on two metric graphs carrying
/// equal-length leaf pairs.  Preconditions (reported, not errors): the
/// seeds are isospectral over the first n_max eigenvalues and their
/// generic flip/nodal sequences match.  The harness glues both pairs at
/// arclength l1 from the roots — nudging l1 by +0.001·l and re-gluing,
/// up to three times, if a generic eigenfunction vanishes at the joint —
/// and asserts: the glued graphs are isospectral; their flip and nodal
/// sequences match at mutually generic indices; eigenfunction ratios are
/// constant across the glued leaf edges; gluing preserves μ and lowers
/// ν by at most one at retained eigenpairs; and all count bounds hold.
/// All statements refer to the first n_max eigenvalues, which the report
/// records.
pub fn verify_theorem3(
    g1: &MetricGraph,
    g2: &MetricGraph,
    pair1: usize,
    pair2: usize,
    l1: f64,
    n_max: usize,
) -> Result<VerificationReport, QnodalError> {
    if n_max == 0 {
        return Err(QnodalError::InvalidInstance("n_max must be positive".into()));
    }
    let p1 = g1
        .leaf_pairs()
        .get(pair1)
        .ok_or_else(|| QnodalError::InvalidInstance(format!("graph 1 has no pair {pair1}")))?
        .clone();
    let p2 = g2
        .leaf_pairs()
        .get(pair2)
        .ok_or_else(|| QnodalError::InvalidInstance(format!("graph 2 has no pair {pair2}")))?
        .clone();
    let l = g1.edges()[p1.edge_plus].length;
    let l_other = g2.edges()[p2.edge_plus].length;
    if (l - l_other).abs() > 1e-12 * l.max(1.0) {
        return Err(QnodalError::InvalidInstance(format!(
            "pair lengths differ: {l} vs {l_other}"
        )));
    }
    if !(l1 > 0.0 && l1 < l) {
        return Err(QnodalError::InvalidInstance(format!("l1 = {l1} outside (0, {l})")));
    }

    let mut report = VerificationReport::new(
        "theorem3",
        format!(
            "{}v/{}e and {}v/{}e metric graphs, pairs {pair1}/{pair2}, l = {l}, l1 = {l1}",
            g1.vertex_count(),
            g1.edges().len(),
            g2.vertex_count(),
            g2.edges().len()
        ),
    );

    // seed spectra, with the scan window widened until n_max entries exist
    let l_min = g1.total_length().min(g2.total_length());
    let mut k_max = (n_max as f64 + 6.0) * std::f64::consts::PI / l_min;
    let (s1, s2) = {
        let mut found = None;
        for _ in 0..4 {
            if let (Some(a), Some(b)) =
                (secular_to_count(g1, k_max, n_max)?, secular_to_count(g2, k_max, n_max)?)
            {
                found = Some((a, b));
                break;
            }
            k_max *= 1.5;
        }
        found.ok_or_else(|| {
            QnodalError::InvalidInstance(format!(
                "could not collect {n_max} eigenvalues below k_max = {k_max}"
            ))
        })?
    };
    report.note(format!(
        "statements truncated to the first {n_max} eigenvalues (k_max = {k_max:.6})"
    ));
    let match_tol = QMATCH_TOL * k_max;

    let seed_gap = (0..n_max).fold(0.0f64, |m, n| m.max((s1[n].k - s2[n].k).abs()));
    if seed_gap > match_tol {
        return Ok(report.preconditions_failed(format!(
            "seeds are not isospectral: max eigenvalue gap {seed_gap:.3e} exceeds {match_tol:.3e}"
        )));
    }
    let prof1 = q_nodal_profiles(g1, &s1[..n_max])?;
    let prof2 = q_nodal_profiles(g2, &s2[..n_max])?;
    if !q_sequences_match(&prof1, &prof2) {
        return Ok(report
            .preconditions_failed("seed flip/nodal sequences do not match".into()));
    }

    // glue both sides at the same distance, nudging off eigenfunction zeros
    let mut l1_used = l1;
    let mut attempt = 0usize;
    let (out1, out2, gs1, gs2) = loop {
        let o1 = g1.glue_leaf_pair(pair1, l1_used)?;
        let o2 = g2.glue_leaf_pair(pair2, l1_used)?;
        let t1 = secular_to_count(&o1.graph, k_max, n_max)?;
        let t2 = secular_to_count(&o2.graph, k_max, n_max)?;
        let (t1, t2) = match (t1, t2) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(QnodalError::InvalidInstance(format!(
                    "glued spectrum has fewer than {n_max} eigenvalues below k_max = {k_max}"
                )))
            }
        };
        let blocked = joint_blocks_genericity(&o1, &t1[..n_max])
            || joint_blocks_genericity(&o2, &t2[..n_max]);
        if !blocked || attempt == 3 {
            if blocked {
                report
                    .note("glue point still meets an eigenfunction zero after 3 nudges".into());
            }
            break (o1, o2, t1, t2);
        }
        attempt += 1;
        l1_used += 0.001 * l;
        report.note(format!("glue point nudged to l1 = {l1_used:.6} (attempt {attempt})"));
    };

    // (i) glued graphs isospectral
    let glued_gap = (0..n_max).fold(0.0f64, |m, n| m.max((gs1[n].k - gs2[n].k).abs()));
    report.push(Assertion::measured("glued_spectra_match", glued_gap, match_tol));

    // (ii)–(iii) count sequences at mutually generic indices
    let gp1 = q_nodal_profiles(&out1.graph, &gs1[..n_max])?;
    let gp2 = q_nodal_profiles(&out2.graph, &gs2[..n_max])?;
    let mut mu_ok = true;
    let mut nu_ok = true;
    let mut mutual = 0usize;
    for (a, b) in gp1.iter().zip(&gp2) {
        if a.generic && b.generic {
            mutual += 1;
            mu_ok &= a.mu == b.mu;
            nu_ok &= a.nu == b.nu;
        }
    }
    report.push(Assertion::flag("glued_mu_sequences_match", mu_ok));
    report.push(Assertion::flag("glued_nu_sequences_match", nu_ok));
    report.note(format!("{mutual} mutually generic glued indices of {n_max}"));

    // eigenfunction ratios constant across the glued leaf region
    let quartet = |o: &GlueOutcome| [o.head_plus, o.head_minus, o.tail_plus, o.tail_minus];
    let (q1, q2) = (quartet(&out1), quartet(&out2));
    let mut ratio_dev = 0.0f64;
    let mut ratio_indices = 0usize;
    for n in 0..n_max {
        if !(gp1[n].generic && gp2[n].generic) || gs1[n].k == 0.0 {
            continue;
        }
        let (pa, pb) = (&gs1[n], &gs2[n]);
        let amp = q2
            .iter()
            .fold(0.0f64, |m, &e| m.max(pb.edge_waves[e].amplitude))
            .max(1e-300);
        let mut ratios = Vec::new();
        for (&e1, &e2) in q1.iter().zip(&q2) {
            let len = out1.graph.edges()[e1].length;
            for t in [0.23, 0.52, 0.81] {
                let x = t * len;
                let denom = pb.edge_waves[e2].eval(pb.k, x);
                if denom.abs() > 1e-6 * amp {
                    ratios.push(pa.edge_waves[e1].eval(pa.k, x) / denom);
                }
            }
        }
        if ratios.len() >= 6 {
            ratio_indices += 1;
            let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
            let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
            ratio_dev = ratio_dev.max((hi - lo).abs() / (1.0 + hi.abs().max(lo.abs())));
        }
    }
    report.push(Assertion::measured("leaf_ratio_constant", ratio_dev, 1e-6));
    report.note(format!("leaf ratios sampled at {ratio_indices} generic indices"));

    // retained eigenpairs: μ unchanged, ν drops by at most one
    let mut mu_same = true;
    let mut nu_drop = true;
    let mut retained = 0usize;
    for (seed_prof, seeds, glue_prof, glued) in
        [(&prof1, &s1, &gp1, &gs1), (&prof2, &s2, &gp2, &gs2)]
    {
        for n in 0..n_max {
            if !seed_prof[n].generic {
                continue;
            }
            let k = seeds[n].k;
            for m in 0..n_max {
                if (glued[m].k - k).abs() <= match_tol && glue_prof[m].generic {
                    retained += 1;
                    mu_same &= glue_prof[m].mu == seed_prof[n].mu;
                    let d = glue_prof[m].nu.unwrap() as i64 - seed_prof[n].nu.unwrap() as i64;
                    nu_drop &= d == 0 || d == -1;
                    break;
                }
            }
        }
    }
    report.push(Assertion::flag("gluing_preserves_mu_on_retained", mu_same));
    report.push(Assertion::flag("gluing_drops_nu_by_at_most_one", nu_drop));
    report.note(format!("{retained} retained generic eigenpairs across both sides"));

    // count bounds everywhere
    let bounds_ok = [
        q_check_bounds(g1, &prof1),
        q_check_bounds(g2, &prof2),
        q_check_bounds(&out1.graph, &gp1),
        q_check_bounds(&out2.graph, &gp2),
    ]
    .iter()
    .all(|rows| rows.iter().all(|r| r.ok));
    report.push(Assertion::flag("count_bounds_hold", bounds_ok));

    // Sturm collapse on tree seeds
    if g1.is_metric_tree() && g2.is_metric_tree() {
        let sturm = [(&prof1), (&prof2)].iter().all(|prof| {
            prof.iter()
                .filter(|p| p.generic)
                .all(|p| p.nu == Some(p.n) && p.mu == Some(p.n - 1))
        });
        report.push(Assertion::flag("seed_sturm_counts", sturm));
    }

    if l1_used != l1 {
        report.note(format!("final glue distance l1 = {l1_used:.6}"));
    }
    Ok(report.finish())
}

/// Strict interlacing of the closed-form odd spectra before and after
/// gluing, compared in λ = k²: λ_n(unglued) < λ_n(glued) < λ_{n+1}(unglued)
/// for every index available below k_max.  Ties within tolerance are
/// reported as non-strict with the offending index; an empty range passes
/// vacuously.
pub fn interlacing_check(
    l: f64,
    l1: f64,
    k_max: f64,
) -> Result<VerificationReport, QnodalError> {
    let unglued = qspectra::odd_leaf_spectrum(l, None, false, k_max)?;
    let glued = qspectra::odd_leaf_spectrum(l, Some(l1), true, k_max)?;
    let lu: Vec<f64> = unglued.iter().map(|k| k * k).collect();
    let lg: Vec<f64> = glued.iter().map(|k| k * k).collect();
    let tie_tol = 1e-9 * k_max * k_max;

    let mut report = VerificationReport::new(
        "interlacing",
        format!("leaf length {l}, glue distance {l1}, k up to {k_max}"),
    );
    let mut violations: Vec<String> = Vec::new();
    for n in 0..lg.len() {
        if n < lu.len() && lu[n] >= lg[n] - tie_tol {
            violations.push(format!("index {}: λ_unglued ≥ λ_glued", n + 1));
        }
        if n + 1 < lu.len() && lg[n] >= lu[n + 1] - tie_tol {
            violations.push(format!("index {}: λ_glued ≥ next λ_unglued", n + 1));
        }
    }
    report.push(Assertion::flag("odd_spectra_strictly_interlace", violations.is_empty()));
    report.note(format!(
        "{} unglued and {} glued odd eigenvalues below k_max",
        lu.len(),
        lg.len()
    ));
    if lu.is_empty() && lg.is_empty() {
        report.note("no odd eigenvalues in range; interlacing holds vacuously".into());
    }
    for v in violations.iter().take(5) {
        report.note(format!("non-strict: {v}"));
    }
    Ok(report.finish())
}

/// The standard gluing test bed: a spine u1–u2 with an equal-length leaf
/// pair at each end — pair 0 at u1, pair 1 at u2.
pub fn double_pair_graph(spine: f64, leaf: f64) -> MetricGraph {
    crate::metric::build_metric(
        6,
        &[(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)],
        &[spine, leaf, leaf, leaf, leaf],
        &[
            crate::metric::MetricLeafPairSpec::new(0, 1, 2),
            crate::metric::MetricLeafPairSpec::new(1, 3, 4),
        ],
    )
    .expect("double-pair graph is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{build_metric, MetricLeafPairSpec};
    use crate::report::Verdict;

    fn interval(l: f64) -> MetricGraph {
        build_metric(2, &[(0, 1)], &[l], &[]).unwrap()
    }

    fn starlet() -> MetricGraph {
        build_metric(
            4,
            &[(0, 1), (0, 2), (0, 3)],
            &[1.0, 1.0, 1.3],
            &[MetricLeafPairSpec::new(0, 0, 1)],
        )
        .unwrap()
    }

    fn wave(edge: usize, amplitude: f64, phase: f64) -> EdgeWave {
        EdgeWave { edge, amplitude, phase }
    }

    #[test]
    fn zero_count_closed_forms() {
        let pi = std::f64::consts::PI;
        // interval mode n: cos((n−1)πx) = sin((n−1)πx + π/2) has n−1 zeros
        for n in 1..8 {
            let k = (n - 1) as f64 * pi;
            let w = wave(0, 1.0, pi / 2.0);
            assert_eq!(edge_zero_count(&w, k, 1.0).unwrap(), n - 1);
        }
        // k = 0 constant mode
        assert_eq!(edge_zero_count(&wave(0, 1.0, pi / 2.0), 0.0, 1.0).unwrap(), 0);
        // leaf edge ψ = cos(kx) with k·l = 3π/4 crosses once
        let k = 0.75 * pi;
        assert_eq!(edge_zero_count(&wave(0, 1.0, pi / 2.0), k, 1.0).unwrap(), 1);
        // endpoint zero: sin(kx) vanishes at x = 0
        assert!(matches!(
            edge_zero_count(&wave(3, 1.0, 0.0), 1.0, 1.0),
            Err(QnodalError::NonGenericWave { edge: 3 })
        ));
        // zero amplitude
        assert!(edge_zero_count(&wave(0, 0.0, 1.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn interval_counts_follow_sturm() {
        let g = interval(1.0);
        let cfg = SecularConfig::new(8.0 * std::f64::consts::PI + 0.5);
        let pairs = qspectra::secular_spectrum(&g, &cfg).unwrap();
        let profiles = q_nodal_profiles(&g, &pairs).unwrap();
        assert!(profiles.len() >= 9);
        for p in &profiles {
            assert!(p.generic);
            assert_eq!(p.mu, Some(p.n - 1));
            assert_eq!(p.nu, Some(p.n));
        }
        assert!(q_check_bounds(&g, &profiles).iter().all(|r| r.ok));
    }

    #[test]
    fn star_counts_follow_sturm_at_generic_indices() {
        let g = build_metric(
            4,
            &[(0, 1), (0, 2), (0, 3)],
            &[1.0, 1.0, 1.0],
            &[MetricLeafPairSpec::new(0, 0, 1)],
        )
        .unwrap();
        let cfg = SecularConfig::new(6.5);
        let pairs = qspectra::secular_spectrum(&g, &cfg).unwrap();
        let profiles = q_nodal_profiles(&g, &pairs).unwrap();
        let generic: Vec<&QNodalProfile> = profiles.iter().filter(|p| p.generic).collect();
        // k = 0, π, 2π at indices 1, 4, 7
        assert_eq!(generic.iter().map(|p| p.n).collect::<Vec<_>>(), vec![1, 4, 7]);
        for p in generic {
            assert_eq!(p.mu, Some(p.n - 1));
            assert_eq!(p.nu, Some(p.n));
        }
    }

    #[test]
    fn exact_nodal_count_matches_dense_sampling() {
        let g = starlet();
        let cfg = SecularConfig::new(9.0);
        let pairs = qspectra::secular_spectrum(&g, &cfg).unwrap();
        let mut checked = 0;
        for p in &pairs {
            if !p.generic {
                continue;
            }
            checked += 1;
            assert_eq!(
                q_nodal_count(&g, p).unwrap(),
                q_nodal_count_sampled(&g, p, 1000),
                "mismatch at k = {}",
                p.k
            );
        }
        assert!(checked >= 4);

        let out = g.glue_leaf_pair(0, 0.4142).unwrap();
        let glued = qspectra::secular_spectrum_with_swap(
            &out.graph,
            &cfg,
            Some(&out.bond_swap),
        )
        .unwrap();
        let mut checked = 0;
        for p in &glued {
            if !p.generic {
                continue;
            }
            checked += 1;
            assert_eq!(
                q_nodal_count(&out.graph, p).unwrap(),
                q_nodal_count_sampled(&out.graph, p, 1000),
                "glued mismatch at k = {}",
                p.k
            );
        }
        assert!(checked >= 4);
    }

    #[test]
    fn counts_ignore_sign_and_scale() {
        let g = starlet();
        let cfg = SecularConfig::new(6.0);
        let pairs = qspectra::secular_spectrum(&g, &cfg).unwrap();
        let p = pairs.iter().find(|p| p.generic && p.k > 0.0).unwrap();
        let mu = q_flip_count(&g, p).unwrap();
        let nu = q_nodal_count(&g, p).unwrap();
        // scale by 2.7 and flip the sign: amplitudes scale, phases shift by π
        let mut flipped = p.clone();
        let two_pi = 2.0 * std::f64::consts::PI;
        for w in flipped.edge_waves.iter_mut() {
            w.amplitude *= 2.7;
            w.phase = (w.phase + std::f64::consts::PI) % two_pi;
        }
        for v in flipped.vertex_values.iter_mut() {
            *v *= -2.7;
        }
        assert_eq!(q_flip_count(&g, &flipped).unwrap(), mu);
        assert_eq!(q_nodal_count(&g, &flipped).unwrap(), nu);
        assert_eq!(q_nodal_count_sampled(&g, &flipped, 1000), nu);
    }

    #[test]
    fn nongeneric_pairs_are_refused() {
        let g = starlet();
        let cfg = SecularConfig::new(2.0);
        let pairs = qspectra::secular_spectrum(&g, &cfg).unwrap();
        // k = π/2 odd mode vanishes at the root: non-generic
        let odd = pairs.iter().find(|p| !p.generic).unwrap();
        assert!(matches!(
            q_flip_count(&g, odd),
            Err(QnodalError::NonGenericPair { .. })
        ));
        assert!(q_nodal_count(&g, odd).is_err());
    }

    #[test]
    fn gluing_harness_passes_on_the_double_pair_graph() {
        let g = double_pair_graph(1.3, 1.0);
        let report = verify_theorem3(&g, &g, 0, 1, 0.4142, 12).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.claim, "theorem3");
    }

    #[test]
    fn gluing_harness_trivial_and_inconclusive_cases() {
        let g = double_pair_graph(1.3, 1.0);
        // same graph, same pair, same distance: identical glued graphs
        let report = verify_theorem3(&g, &g, 0, 0, 0.4142, 8).unwrap();
        assert!(report.passed(), "{report:?}");
        // a perturbed spine breaks seed isospectrality → inconclusive
        let h = double_pair_graph(1.45, 1.0);
        let report = verify_theorem3(&g, &h, 0, 1, 0.4142, 8).unwrap();
        assert_eq!(report.verdict, Verdict::Inconclusive);
        // structural misuse is an error, not a verdict
        assert!(verify_theorem3(&g, &g, 0, 5, 0.4142, 8).is_err());
        assert!(verify_theorem3(&g, &g, 0, 1, 2.0, 8).is_err());
    }

    #[test]
    fn interlacing_strict_and_tied_cases() {
        let report = interlacing_check(1.0, 0.4142, 30.0).unwrap();
        assert!(report.passed(), "{report:?}");
        // l1 = 2l/3 forces mπ/l1 = 3π/2 to meet the unglued 3π/2 exactly
        let report = interlacing_check(1.0, 2.0 / 3.0, 30.0).unwrap();
        assert!(!report.passed());
        assert!(report.notes.iter().any(|n| n.contains("non-strict")));
        // empty range below the first odd eigenvalue passes vacuously
        let report = interlacing_check(1.0, 0.4142, 1.0).unwrap();
        assert!(report.passed());
        assert!(report.notes.iter().any(|n| n.contains("vacuously")));
    }
}
