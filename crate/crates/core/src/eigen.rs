//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! Each pivot (p, q) is annihilated by U = D·R where D = diag(1, e^{-iφ})
//! rotates a_pq onto the positive real axis and R is the real Jacobi
//! rotation. Sweeps stop once the off-diagonal Frobenius mass drops below
//! [`OFF_DIAGONAL_TOL`]·‖A‖_F, or when a whole sweep performs no rotation.

use num_complex::Complex64;

/// Relative off-diagonal Frobenius mass at which iteration stops.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// stored column-wise in a row-major `n × n` buffer.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub n: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<Complex64>,
    pub sweeps: usize,
}

impl HermitianEigen {
    /// Component i of eigenvector j.
    pub fn vector_entry(&self, i: usize, j: usize) -> Complex64 {
        self.vectors[i * self.n + j]
    }
}

fn off_diagonal_norm_sq(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s
}

/// Diagonalizes the Hermitian part of `a` (row-major, `n × n`).
///
/// The input is symmetrized as (A + A*)/2 first, so tiny non-Hermitian
/// rounding in callers does not matter.
pub fn hermitian_eigen(a: &[Complex64], n: usize) -> HermitianEigen {
    assert_eq!(a.len(), n * n, "buffer is not n×n");
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = (a[i * n + j] + a[j * n + i].conj()) * 0.5;
        }
        m[i * n + i].im = 0.0;
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }

    let total: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let target = (OFF_DIAGONAL_TOL * OFF_DIAGONAL_TOL) * total;
    let mut sweeps = 0;

    while sweeps < MAX_SWEEPS {
        if total == 0.0 || off_diagonal_norm_sq(&m, n) <= target {
            break;
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                // skip pivots already negligible against their diagonal
                if r <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    continue;
                }
                rotated = true;
                let phase = apq / r;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let e = phase.conj();

                for i in 0..n {
                    let aip = m[i * n + p];
                    let aiq = m[i * n + q];
                    m[i * n + p] = aip * c - aiq * e * s;
                    m[i * n + q] = aip * s + aiq * e * c;
                }
                let ec = phase;
                for j in 0..n {
                    let apj = m[p * n + j];
                    let aqj = m[q * n + j];
                    m[p * n + j] = apj * c - aqj * ec * s;
                    m[q * n + j] = apj * s + aqj * ec * c;
                }
                m[p * n + q] = Complex64::new(0.0, 0.0);
                m[q * n + p] = Complex64::new(0.0, 0.0);
                m[p * n + p].im = 0.0;
                m[q * n + q].im = 0.0;

                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = vip * c - viq * e * s;
                    v[i * n + q] = vip * s + viq * e * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.total_cmp(&m[j * n + j].re));
    let values = order.iter().map(|&k| m[k * n + k].re).collect();
    let mut vectors = vec![Complex64::new(0.0, 0.0); n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + new_col] = v[i * n + old_col];
        }
    }
    HermitianEigen { n, values, vectors, sweeps }
}
