//! Small dense linear algebra the rest of the crate factors through.
//!
//! Everything here is deliberately hand-rolled: the matrices are modest
//! (N ≲ 2500), determinism matters more than BLAS-level speed, and each
//! routine is short enough to audit directly.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Square complex matrix, row-major.
#[derive(Debug, Clone)]
pub struct CMat {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> CMat {
        CMat {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    /// Leading principal submatrix of order m.
    pub fn leading(&self, m: usize) -> CMat {
        assert!(m <= self.n);
        let mut out = CMat::zeros(m);
        for i in 0..m {
            out.data[i * m..(i + 1) * m]
                .copy_from_slice(&self.data[i * self.n..i * self.n + m]);
        }
        out
    }

    /// Trailing principal submatrix of order m.
    pub fn trailing(&self, m: usize) -> CMat {
        assert!(m <= self.n);
        let off = self.n - m;
        let mut out = CMat::zeros(m);
        for i in 0..m {
            let r = (off + i) * self.n + off;
            out.data[i * m..(i + 1) * m].copy_from_slice(&self.data[r..r + m]);
        }
        out
    }
}

/// Real rectangular matrix, row-major.
#[derive(Debug, Clone)]
pub struct RMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RMat {
    pub fn zeros(rows: usize, cols: usize) -> RMat {
        RMat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }
}

/// Determinant of `I - M` by LU with partial pivoting (destroys a copy).
pub fn det_one_minus(m: &CMat) -> Complex64 {
    let n = m.n;
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            a[i * n + j] = Complex64::new(id, 0.0) - m.at(i, j);
        }
    }
    lu_det(&mut a, n)
}

/// Determinant of a general complex matrix by LU with partial pivoting.
pub fn lu_det(a: &mut [Complex64], n: usize) -> Complex64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut piv_row = k;
        let mut piv_mag = a[k * n + k].norm_sqr();
        for i in k + 1..n {
            let mag = a[i * n + k].norm_sqr();
            if mag > piv_mag {
                piv_row = i;
                piv_mag = mag;
            }
        }
        if piv_mag == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv_row != k {
            for j in 0..n {
                a.swap(k * n + j, piv_row * n + j);
            }
            det = -det;
        }
        let piv = a[k * n + k];
        det *= piv;
        let inv = piv.inv();
        for i in k + 1..n {
            let f = a[i * n + k] * inv;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            a[i * n + k] = f;
            for j in k + 1..n {
                let t = a[k * n + j];
                a[i * n + j] -= f * t;
            }
        }
    }
    det
}

/// Eigenvalues of a symmetric real matrix by the cyclic Jacobi method,
/// ascending. The input is consumed as workspace.
pub fn sym_eigenvalues(mut a: RMat) -> Result<Vec<f64>> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    if n == 0 {
        return Ok(vec![]);
    }
    let frob: f64 = a.data.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-15 * frob.max(1e-300);
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in p + 1..n {
                off += a.at(p, q).abs();
            }
        }
        if off < tol {
            let mut eig: Vec<f64> = (0..n).map(|i| a.at(i, i)).collect();
            eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return Ok(eig);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.at(p, q);
                if apq.abs() <= tol / (n * n) as f64 {
                    continue;
                }
                let app = a.at(p, p);
                let aqq = a.at(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    let akp = a.at(k, p);
                    let akq = a.at(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.at(p, k);
                    let aqk = a.at(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    Err(Error::Numeric(
        "Jacobi eigenvalue iteration did not converge in 60 sweeps".into(),
    ))
}

/// Singular values of a real matrix by one-sided (Hestenes) Jacobi,
/// descending order.
pub fn singular_values(a: &RMat) -> Result<Vec<f64>> {
    // Work on the side with fewer columns.
    let (rows, cols, col_major): (usize, usize, Vec<f64>) = if a.rows >= a.cols {
        let mut w = vec![0.0; a.rows * a.cols];
        for j in 0..a.cols {
            for i in 0..a.rows {
                w[j * a.rows + i] = a.at(i, j);
            }
        }
        (a.rows, a.cols, w)
    } else {
        // Transpose: singular values are shared.
        let mut w = vec![0.0; a.rows * a.cols];
        for j in 0..a.rows {
            for i in 0..a.cols {
                w[j * a.cols + i] = a.at(j, i);
            }
        }
        (a.cols, a.rows, w)
    };
    let mut w = col_major;
    let m = rows;
    let scale: f64 = w.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let eps = 1e-15 * scale;
    let mut converged = false;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (wp, wq) = (&w[p * m..(p + 1) * m], &w[q * m..(q + 1) * m]);
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..m {
                    alpha += wp[i] * wp[i];
                    beta += wq[i] * wq[i];
                    gamma += wp[i] * wq[i];
                }
                if gamma.abs() <= eps * eps / scale
                    || gamma.abs() <= 1e-15 * (alpha.sqrt() * beta.sqrt()).max(1e-300)
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let vp = w[p * m + i];
                    let vq = w[q * m + i];
                    w[p * m + i] = c * vp - s * vq;
                    w[q * m + i] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(
            "one-sided Jacobi SVD did not converge in 60 sweeps".into(),
        ));
    }
    let mut sv: Vec<f64> = (0..cols)
        .map(|p| w[p * m..(p + 1) * m].iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(sv)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix (diag, off)
/// strictly below `sigma`, via the Sturm sequence of LDLᵀ pivots.
pub fn sturm_count_below(diag: &[f64], off: &[f64], sigma: f64) -> usize {
    debug_assert_eq!(off.len() + 1, diag.len());
    let pivmin = 1e-300;
    let mut count = 0usize;
    let mut q = 1.0_f64;
    for (i, &d) in diag.iter().enumerate() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = d - sigma - e2 / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by bisection on the
/// Sturm count, to absolute tolerance `tol * max(1, |bound|)`.
pub fn tridiag_max_eigenvalue(diag: &[f64], off: &[f64], tol: f64) -> f64 {
    let n = diag.len();
    assert!(n > 0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i == 0 { 0.0 } else { off[i - 1].abs() }
            + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = hi.abs().max(lo.abs()).max(1.0);
    let mut width = hi - lo;
    while width > tol * scale {
        let mid = 0.5 * (lo + hi);
        if sturm_count_below(diag, off, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
        width = hi - lo;
    }
    0.5 * (lo + hi)
}

/// k-th smallest eigenvalue (0-based) by the same bisection.
pub fn tridiag_kth_eigenvalue(diag: &[f64], off: &[f64], k: usize, tol: f64) -> f64 {
    let n = diag.len();
    assert!(k < n);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i == 0 { 0.0 } else { off[i - 1].abs() }
            + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = hi.abs().max(lo.abs()).max(1.0);
    while hi - lo > tol * scale {
        let mid = 0.5 * (lo + hi);
        if sturm_count_below(diag, off, mid) >= k + 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
