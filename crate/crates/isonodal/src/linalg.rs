//! Dense linear algebra at desk scale.
//!
//! Everything downstream runs on matrices small enough that cyclic Jacobi
//! methods are the simplest provably convergent choice: two-sided Jacobi
//! for symmetric eigenproblems, one-sided (Hestenes) Jacobi for singular
//! values.  Both deliver absolute accuracy near machine epsilon times the
//! matrix scale, which the secular root finder depends on: it must resolve
//! singular values down to 1e-10 and below without a noise floor.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric: max |a_ij - a_ji| = {asymmetry:.3e} exceeds {limit:.3e}")]
    NotSymmetric { asymmetry: f64, limit: f64 },
    #[error("Jacobi iteration failed to converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix rows are ragged or empty")]
    BadShape,
}

/// Dense square matrix, row major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    a: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(LinalgError::BadShape);
        }
        let mut a = Vec::with_capacity(n * n);
        for r in rows {
            a.extend_from_slice(r);
        }
        Ok(Matrix { n, a })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.a[i * self.n..(i + 1) * self.n];
            let mut s = 0.0;
            for (a, b) in row.iter().zip(x) {
                s += a * b;
            }
            y[i] = s;
        }
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct JacobiEig {
    pub values: Vec<f64>,
    /// `vectors[j]` is the orthonormal eigenvector for `values[j]`.
    pub vectors: Vec<Vec<f64>>,
}

const MAX_SWEEPS: usize = 64;

/// Cyclic two-sided Jacobi.  Stops once the off-diagonal Frobenius norm
/// drops below `tol * max(1, max|m_ij|)`, which bounds the reconstruction
/// residual `max|M - Q diag(w) Q^T|` by ten times that threshold.
pub fn jacobi_eigh(m: &Matrix, tol: f64) -> Result<JacobiEig, LinalgError> {
    let n = m.n();
    let scale = m.max_abs();
    let sym_limit = tol.max(1e-15) * scale.max(1.0) * 10.0;
    let asym = m.asymmetry();
    if asym > sym_limit {
        return Err(LinalgError::NotSymmetric { asymmetry: asym, limit: sym_limit });
    }
    if n == 0 {
        return Ok(JacobiEig { values: vec![], vectors: vec![] });
    }

    let mut a = m.clone();
    // symmetrize exactly so both triangles agree during sweeps
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    let mut v = Matrix::identity(n);
    let stop = tol.max(1e-15) * scale.max(1.0);

    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a.get(i, j) * a.get(i, j);
            }
        }
        if off.sqrt() <= stop {
            return Ok(sorted_eig(&a, &v));
        }
        // during early sweeps only rotate entries above a shrinking floor
        let floor = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };

        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 || apq * apq <= floor {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                a.set(p, p, app - h);
                a.set(q, q, aqq + h);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a.get(i, p);
                        let aiq = a.get(i, q);
                        let nip = aip - s * (aiq + tau * aip);
                        let niq = aiq + s * (aip - tau * aiq);
                        a.set(i, p, nip);
                        a.set(p, i, nip);
                        a.set(i, q, niq);
                        a.set(q, i, niq);
                    }
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip - s * (viq + tau * vip));
                    v.set(i, q, viq + s * (vip - tau * viq));
                }
            }
        }
    }
    Err(LinalgError::NoConvergence(MAX_SWEEPS))
}

fn sorted_eig(a: &Matrix, v: &Matrix) -> JacobiEig {
    let n = a.n();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a.get(i, i).partial_cmp(&a.get(j, j)).unwrap());
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &j in &idx {
        values.push(a.get(j, j));
        let mut col: Vec<f64> = (0..n).map(|i| v.get(i, j)).collect();
        fix_sign(&mut col);
        vectors.push(col);
    }
    JacobiEig { values, vectors }
}

/// Deterministic sign convention: the first entry of largest magnitude is
/// made positive.
pub fn fix_sign(col: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in col.iter().enumerate() {
        if x.abs() > col[best].abs() {
            best = i;
        }
    }
    if col[best] < 0.0 {
        for x in col.iter_mut() {
            *x = -*x;
        }
    }
}

/// Singular values (ascending) with matching right singular vectors.
#[derive(Clone, Debug)]
pub struct SmallSvd {
    pub singular: Vec<f64>,
    pub right: Vec<Vec<f64>>,
}

/// One-sided (Hestenes) Jacobi SVD of a square matrix.  Columns of the work
/// matrix are rotated until pairwise orthogonal; the surviving column norms
/// are the singular values.  Small singular values come out with absolute
/// error on the order of machine epsilon times the matrix norm, without the
/// squaring loss a normal-equations approach would have.
pub fn svd_square(m: &Matrix, ortho_tol: f64) -> Result<SmallSvd, LinalgError> {
    let n = m.n();
    if n == 0 {
        return Ok(SmallSvd { singular: vec![], right: vec![] });
    }
    // columns held contiguously for the rotation inner loops
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| m.get(i, j)).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let frob2: f64 = w.iter().map(|c| dot(c, c)).sum();
    let col_floor = frob2 * 1e-30;

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                if alpha <= col_floor && beta <= col_floor {
                    continue;
                }
                let gamma = dot(&w[p], &w[q]);
                if gamma.abs() <= ortho_tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let wp = w[p][i];
                    let wq = w[q][i];
                    w[p][i] = c * wp - s * wq;
                    w[q][i] = s * wp + c * wq;
                    let vp = v[p][i];
                    let vq = v[q][i];
                    v[p][i] = c * vp - s * vq;
                    v[q][i] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            let mut order: Vec<usize> = (0..n).collect();
            let sigmas: Vec<f64> = w.iter().map(|c| norm2(c)).collect();
            order.sort_by(|&i, &j| sigmas[i].partial_cmp(&sigmas[j]).unwrap());
            let mut singular = Vec::with_capacity(n);
            let mut right = Vec::with_capacity(n);
            for &j in &order {
                singular.push(sigmas[j]);
                let mut col = v[j].clone();
                fix_sign(&mut col);
                right.push(col);
            }
            return Ok(SmallSvd { singular, right });
        }
    }
    Err(LinalgError::NoConvergence(MAX_SWEEPS))
}

/// Modified Gram-Schmidt.  Vectors whose residual norm falls below
/// `drop_tol` (relative to the original norm, with an absolute floor) are
/// discarded; the rest are returned orthonormal, in input order.
pub fn mgs_orthonormalize(vecs: &[Vec<f64>], drop_tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for vin in vecs {
        let orig = norm2(vin);
        if orig == 0.0 {
            continue;
        }
        let mut v = vin.clone();
        for b in &out {
            let c = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        // second pass guards against cancellation when vin is nearly in span
        for b in &out {
            let c = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let nv = norm2(&v);
        if nv > drop_tol * orig.max(1.0) {
            for x in v.iter_mut() {
                *x /= nv;
            }
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Closed-form eigenvalues of [[a, b], [b, c]].
    fn eig2(a: f64, b: f64, c: f64) -> (f64, f64) {
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        (mid - rad, mid + rad)
    }

    /// Closed-form eigenvalues of a symmetric 3x3 via the trigonometric
    /// method, ascending.
    fn eig3(m: &Matrix) -> [f64; 3] {
        let (a11, a22, a33) = (m.get(0, 0), m.get(1, 1), m.get(2, 2));
        let (a12, a13, a23) = (m.get(0, 1), m.get(0, 2), m.get(1, 2));
        let p1 = a12 * a12 + a13 * a13 + a23 * a23;
        if p1 == 0.0 {
            let mut d = [a11, a22, a33];
            d.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return d;
        }
        let q = (a11 + a22 + a33) / 3.0;
        let p2 = (a11 - q).powi(2) + (a22 - q).powi(2) + (a33 - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b = |i: usize, j: usize| (m.get(i, j) - if i == j { q } else { 0.0 }) / p;
        let detb = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
            - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
            + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
        let r = (detb / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let hi = q + 2.0 * p * phi.cos();
        let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let mid = 3.0 * q - hi - lo;
        let mut d = [lo, mid, hi];
        d.sort_by(|x, y| x.partial_cmp(y).unwrap());
        d
    }

    fn residual_inf(m: &Matrix, e: &JacobiEig) -> f64 {
        let n = m.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += e.vectors[k][i] * e.values[k] * e.vectors[k][j];
                }
                worst = worst.max((s - m.get(i, j)).abs());
            }
        }
        worst
    }

    #[test]
    fn path3_laplacian_matrix() {
        let m = Matrix::from_rows(&[
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 1.0],
        ])
        .unwrap();
        let e = jacobi_eigh(&m, 1e-12).unwrap();
        let want = [0.0, 1.0, 3.0];
        for (got, w) in e.values.iter().zip(want) {
            assert!((got - w).abs() < 1e-12, "got {got}, want {w}");
        }
        assert!(residual_inf(&m, &e) <= 10.0 * 1e-12 * m.max_abs());
    }

    #[test]
    fn rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(jacobi_eigh(&m, 1e-12), Err(LinalgError::NotSymmetric { .. })));
    }

    #[test]
    fn svd_rank_deficient() {
        let m = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let s = svd_square(&m, 1e-13).unwrap();
        assert!(s.singular[0].abs() < 1e-14);
        assert!((s.singular[1] - 2.0).abs() < 1e-12);
        // right vector of the zero singular value spans the null space
        let v = &s.right[0];
        let r = ((v[0] + v[1]).powi(2)).sqrt();
        assert!(r < 1e-12, "null vector not (1,-1)/sqrt(2): {v:?}");
    }

    #[test]
    fn svd_identity() {
        let s = svd_square(&Matrix::identity(5), 1e-13).unwrap();
        for x in &s.singular {
            assert!((x - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn mgs_drops_dependent() {
        let vs = vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 1e-14, 0.0],
            vec![0.0, 1.0, 0.0],
        ];
        let q = mgs_orthonormalize(&vs, 1e-8);
        assert_eq!(q.len(), 2);
        assert!(dot(&q[0], &q[1]).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn jacobi_matches_closed_form_2x2(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0) {
            let m = Matrix::from_rows(&[vec![a, b], vec![b, c]]).unwrap();
            let e = jacobi_eigh(&m, 1e-14).unwrap();
            let (lo, hi) = eig2(a, b, c);
            prop_assert!((e.values[0] - lo).abs() <= 1e-12 * (1.0 + m.max_abs()));
            prop_assert!((e.values[1] - hi).abs() <= 1e-12 * (1.0 + m.max_abs()));
        }

        #[test]
        fn jacobi_matches_closed_form_3x3(
            a11 in -5.0f64..5.0, a22 in -5.0f64..5.0, a33 in -5.0f64..5.0,
            a12 in -5.0f64..5.0, a13 in -5.0f64..5.0, a23 in -5.0f64..5.0,
        ) {
            let m = Matrix::from_rows(&[
                vec![a11, a12, a13],
                vec![a12, a22, a23],
                vec![a13, a23, a33],
            ]).unwrap();
            let e = jacobi_eigh(&m, 1e-14).unwrap();
            let want = eig3(&m);
            for (got, w) in e.values.iter().zip(want) {
                prop_assert!((got - w).abs() <= 1e-11 * (1.0 + m.max_abs()),
                    "got {got}, want {w}");
            }
        }

        #[test]
        fn jacobi_reconstructs_and_is_orthonormal(vals in proptest::collection::vec(-4.0f64..4.0, 16)) {
            let mut m = Matrix::zeros(4);
            let mut k = 0;
            for i in 0..4 {
                for j in i..4 {
                    let v = vals[k];
                    k += 1;
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
            let e = jacobi_eigh(&m, 1e-13).unwrap();
            prop_assert!(residual_inf(&m, &e) <= 10.0 * 1e-13 * m.max_abs().max(1.0));
            for p in 0..4 {
                for q in 0..4 {
                    let d = dot(&e.vectors[p], &e.vectors[q]);
                    let want = if p == q { 1.0 } else { 0.0 };
                    prop_assert!((d - want).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn svd_agrees_with_eigen_of_gram_matrix(vals in proptest::collection::vec(-3.0f64..3.0, 16)) {
            let mut m = Matrix::zeros(4);
            for i in 0..4 {
                for j in 0..4 {
                    m.set(i, j, vals[i * 4 + j]);
                }
            }
            let s = svd_square(&m, 1e-13).unwrap();
            // independent check: eigenvalues of M^T M are the squares
            let mut g = Matrix::zeros(4);
            for i in 0..4 {
                for j in 0..4 {
                    let mut acc = 0.0;
                    for k in 0..4 {
                        acc += m.get(k, i) * m.get(k, j);
                    }
                    g.set(i, j, acc);
                }
            }
            let e = jacobi_eigh(&g, 1e-14).unwrap();
            for (sv, ev) in s.singular.iter().zip(&e.values) {
                prop_assert!((sv * sv - ev).abs() <= 1e-10 * (1.0 + g.max_abs()));
            }
            // right vectors map to scaled columns: |M v_i| = sigma_i
            for (sv, v) in s.singular.iter().zip(&s.right) {
                let mv = m.matvec(v);
                prop_assert!((norm2(&mv) - sv).abs() <= 1e-10 * (1.0 + m.max_abs()));
            }
        }
    }
}
