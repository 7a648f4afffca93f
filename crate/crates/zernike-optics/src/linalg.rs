//! Dense Hermitian eigenvalues via cyclic Jacobi rotations.
//!
//! A complex Hermitian `H = A + iB` embeds into the real symmetric
//! `[[A, −B], [B, A]]` whose spectrum is that of `H` with every eigenvalue
//! doubled; diagonalizing the embedding with plane rotations and collapsing
//! the pairs gives the Hermitian spectrum without any external linear-algebra
//! dependency. Matrices here are reduced density matrices of at most a few
//! hundred rows, well inside Jacobi territory.

use crate::{Complex, Error, Result};

/// Convergence threshold on the off-diagonal Frobenius norm.
const OFF_DIAGONAL_TOLERANCE: f64 = 1e-13;
/// Sweep budget before giving up.
const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a dense complex Hermitian matrix (row-major, `dim²`
/// entries), sorted descending.
pub fn hermitian_eigenvalues(matrix: &[Complex], dim: usize) -> Result<Vec<f64>> {
    assert_eq!(matrix.len(), dim * dim, "matrix shape mismatch");
    if dim == 0 {
        return Ok(Vec::new());
    }
    // real symmetric embedding [[A, -B], [B, A]]
    let n = 2 * dim;
    let mut m = vec![0.0f64; n * n];
    for r in 0..dim {
        for c in 0..dim {
            let z = matrix[r * dim + c];
            m[r * n + c] = z.re;
            m[(r + dim) * n + (c + dim)] = z.re;
            m[r * n + (c + dim)] = -z.im;
            m[(r + dim) * n + c] = z.im;
        }
    }
    let mut eigs = symmetric_eigenvalues_jacobi(&mut m, n)?;
    eigs.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    // spectrum comes doubled; take every other entry
    Ok(eigs.into_iter().step_by(2).collect())
}

/// In-place cyclic Jacobi on a real symmetric matrix; returns the unsorted
/// eigenvalues. Converges when the off-diagonal Frobenius norm drops below
/// `1e-13` (absolute; callers hold unit-trace-scale matrices).
pub fn symmetric_eigenvalues_jacobi(m: &mut [f64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(m.len(), n * n);
    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for r in 0..n {
            for c in (r + 1)..n {
                off += 2.0 * m[r * n + c] * m[r * n + c];
            }
        }
        if off.sqrt() < OFF_DIAGONAL_TOLERANCE {
            let _ = sweep;
            return Ok((0..n).map(|i| m[i * n + i]).collect());
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                // smaller-root tangent keeps rotations well conditioned
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    let new_kp = akp - s * (akq + tau * akp);
                    let new_kq = akq + s * (akp - tau * akq);
                    m[k * n + p] = new_kp;
                    m[p * n + k] = new_kp;
                    m[k * n + q] = new_kq;
                    m[q * n + k] = new_kq;
                }
            }
        }
    }
    Err(Error::EigensolverFailure(MAX_SWEEPS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_matrix() {
        let m = vec![
            Complex::new(3.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(-1.0, 0.0),
        ];
        let eigs = hermitian_eigenvalues(&m, 2).unwrap();
        assert_abs_diff_eq!(eigs[0], 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(eigs[1], -1.0, epsilon = 1e-13);
    }

    #[test]
    fn pauli_y_spectrum() {
        // [[0, -i], [i, 0]] has eigenvalues ±1
        let m = vec![
            Complex::new(0.0, 0.0),
            Complex::new(0.0, -1.0),
            Complex::new(0.0, 1.0),
            Complex::new(0.0, 0.0),
        ];
        let eigs = hermitian_eigenvalues(&m, 2).unwrap();
        assert_abs_diff_eq!(eigs[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(eigs[1], -1.0, epsilon = 1e-13);
    }

    #[test]
    fn random_hermitian_trace_and_frobenius_invariants() {
        // deterministic congruential fill
        let dim = 24;
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = vec![Complex::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in r..dim {
                if r == c {
                    m[r * dim + c] = Complex::new(next(), 0.0);
                } else {
                    let z = Complex::new(next(), next());
                    m[r * dim + c] = z;
                    m[c * dim + r] = z.conj();
                }
            }
        }
        let eigs = hermitian_eigenvalues(&m, dim).unwrap();
        assert_eq!(eigs.len(), dim);
        let trace: f64 = (0..dim).map(|i| m[i * dim + i].re).sum();
        let eig_sum: f64 = eigs.iter().sum();
        assert_abs_diff_eq!(trace, eig_sum, epsilon = 1e-10);
        let frob: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        let eig_sq: f64 = eigs.iter().map(|l| l * l).sum();
        assert_abs_diff_eq!(frob, eig_sq, epsilon = 1e-9);
    }
}
