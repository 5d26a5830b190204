//! Hermitian eigensolver (cyclic complex Jacobi).

use super::matrix::{ComplexMatrix, C64, ZERO};

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of the
/// Hermitian part of `a`.
pub fn eigh(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = apq / apq.norm();
                let g = apq.norm();
                let theta = 0.5 * (2.0 * g).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                // Columns: x_p' = c x_p - s e^{-iφ}... expressed via J with J^† M J diagonal in (p,q).
                let sp = phase * s;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c - mkq * sp.conj();
                    m[(k, q)] = mkp * sp + mkq * c;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c - mqk * sp;
                    m[(q, k)] = mpk * sp.conj() + mqk * c;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * sp.conj();
                    v[(k, q)] = vkp * sp + vkq * c;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re));
    let vals = idx.iter().map(|&i| m[(i, i)].re).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |r, c| v[(r, idx[c])]);
    (vals, vecs)
}

/// `V diag(f(w)) V^†` for a Hermitian matrix.
pub fn hermitian_function(a: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let (w, v) = eigh(a);
    let n = a.rows();
    let fw: Vec<C64> = w.iter().map(|x| C64::new(f(*x), 0.0)).collect();
    let d = ComplexMatrix::diagonal(&fw);
    let out = &(&v * &d) * &v.adjoint();
    debug_assert_eq!(out.rows(), n);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_known_spectrum() {
        let a = ComplexMatrix::from_rows(&[
            vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
            vec![C64::new(0.0, -1.0), C64::new(2.0, 0.0)],
        ])
        .unwrap();
        let (w, v) = eigh(&a);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 3.0).abs() < 1e-14);
        let recon = &(&v * &ComplexMatrix::diagonal(&[C64::new(w[0], 0.0), C64::new(w[1], 0.0)])) * &v.adjoint();
        assert!(recon.max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let n = 6;
        let mut s = 7u64;
        let mut rnd = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let b = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rnd(), rnd()));
        let a = &b + &b.adjoint();
        let (w, v) = eigh(&a);
        let d = ComplexMatrix::diagonal(&w.iter().map(|x| C64::new(*x, 0.0)).collect::<Vec<_>>());
        let recon = &(&v * &d) * &v.adjoint();
        assert!(recon.max_abs_diff(&a) < 1e-13);
        let vv = &v.adjoint() * &v;
        assert!(vv.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-13);
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
    }
}
