//! Cyclic Jacobi eigensolver for small Hermitian matrices.
//!
//! A Hermitian `H = A + iB` is diagonalized through its real symmetric
//! embedding `[[A, -B], [B, A]]`, whose spectrum is that of `H` with every
//! eigenvalue doubled.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::CMatrix;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues of a real symmetric matrix given row-major, ascending.
pub fn symmetric_eigenvalues(n: usize, a: &mut [f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Eigenvalues of a Hermitian matrix, ascending. The input is assumed
/// Hermitian; only its Hermitian part is used.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let n = h.dim();
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            // Hermitian part, so round-off asymmetry cannot leak in.
            let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    let doubled = symmetric_eigenvalues(m, &mut a);
    doubled.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &CMatrix) -> f64 {
    hermitian_eigenvalues(h).first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    // λ± = (a+d)/2 ± sqrt(((a−d)/2)² + |b|²) for [[a, b], [b*, d]].
    fn closed_form(a: f64, d: f64, b: C64) -> (f64, f64) {
        let mean = 0.5 * (a + d);
        let r = ((0.5 * (a - d)).powi(2) + b.norm_sqr()).sqrt();
        (mean - r, mean + r)
    }

    #[test]
    fn matches_2x2_closed_form() {
        let cases = [
            (1.0, 0.0, C64::new(0.0, 0.0)),
            (0.5, 0.5, C64::new(0.5, 0.0)),
            (0.36, 0.64, C64::new(0.48, 0.0)),
            (2.0, -1.0, C64::new(0.3, -0.7)),
            (0.0, 0.0, C64::new(0.0, 1.0)),
        ];
        for (a, d, b) in cases {
            let m = CMatrix::from_row_major(2, vec![C64::new(a, 0.0), b, b.conj(), C64::new(d, 0.0)]).unwrap();
            let eig = hermitian_eigenvalues(&m);
            let (lo, hi) = closed_form(a, d, b);
            assert!((eig[0] - lo).abs() < 1e-12, "{eig:?} vs {lo}");
            assert!((eig[1] - hi).abs() < 1e-12, "{eig:?} vs {hi}");
        }
    }

    #[test]
    fn diagonal_and_projector_spectra() {
        let d = CMatrix::from_diagonal(&[C64::new(3.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.5, 0.0)]);
        let eig = hermitian_eigenvalues(&d);
        assert!((eig[0] + 1.0).abs() < 1e-14 && (eig[1] - 0.5).abs() < 1e-14 && (eig[2] - 3.0).abs() < 1e-14);

        let s = 0.5f64.sqrt();
        let v = [C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, s), C64::new(0.0, 0.0)];
        let p = CMatrix::outer(&v, &v);
        let eig = hermitian_eigenvalues(&p);
        assert!(eig[..3].iter().all(|x| x.abs() < 1e-13));
        assert!((eig[3] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn trace_is_preserved_for_dense_matrix() {
        let n = 16;
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let z = C64::new(((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.5, if i == j { 0.0 } else { ((i + 2 * j) % 5) as f64 / 5.0 - 0.4 });
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        let eig = hermitian_eigenvalues(&m);
        let sum: f64 = eig.iter().sum();
        assert!((sum - m.trace().re).abs() < 1e-10);
        let frob: f64 = m.as_slice().iter().map(|z| z.norm_sqr()).sum();
        let sq: f64 = eig.iter().map(|x| x * x).sum();
        assert!((frob - sq).abs() < 1e-9);
    }
}
