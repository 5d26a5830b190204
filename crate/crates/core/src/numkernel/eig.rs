//! General complex eigendecomposition with left and right eigenvectors.

use super::matrix::{inner, norm, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;

/// Right and left eigenvectors stored as matrix columns, sorted by descending
/// imaginary part of the eigenvalue, then ascending real part.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<C64>,
    pub right: ComplexMatrix,
    pub left: ComplexMatrix,
    /// Condition number of the unit-column right eigenvector matrix.
    pub condition: f64,
    pub defect_flag: bool,
}

impl EigDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn right_vec(&self, n: usize) -> Vec<C64> {
        self.right.column(n)
    }

    pub fn left_vec(&self, n: usize) -> Vec<C64> {
        self.left.column(n)
    }

    /// Largest `|<l_m|r_n> - delta_mn|`.
    pub fn biorthogonality_error(&self) -> f64 {
        let g = &self.left.adjoint() * &self.right;
        g.max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }

    /// Reorders modes by a permutation `order[new] = old`.
    pub fn permute(&mut self, order: &[usize]) {
        let n = self.dim();
        let ev: Vec<C64> = order.iter().map(|&i| self.eigenvalues[i]).collect();
        let r = ComplexMatrix::from_fn(n, n, |row, col| self.right[(row, order[col])]);
        let l = ComplexMatrix::from_fn(n, n, |row, col| self.left[(row, order[col])]);
        self.eigenvalues = ev;
        self.right = r;
        self.left = l;
    }
}

/// Mode labelling order: descending Im, then ascending Re among values whose
/// imaginary parts agree to roundoff, then index.
pub fn mode_order(values: &[C64]) -> Vec<usize> {
    let scale = values.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let tie = 1e-12 * scale;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].im.total_cmp(&values[a].im).then(a.cmp(&b)));
    // Runs of equal Im are reordered by Re; grouping is anchored at the run start.
    let mut start = 0;
    while start < idx.len() {
        let anchor = values[idx[start]].im;
        let mut end = start + 1;
        while end < idx.len() && anchor - values[idx[end]].im <= tie {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re).then(a.cmp(&b)));
        start = end;
    }
    idx
}

/// Eigendecomposition of a general square complex matrix.
///
/// Eigenvectors come from the complex Schur form; left eigenvectors satisfy
/// `l^† A = λ l^†` and are rescaled so that `<l_n|r_n> = 1` whenever the
/// decomposition is not flagged defective. `tol` sets the defect threshold
/// (`condition > 1/tol`).
pub fn eig_general(a: &ComplexMatrix, tol: f64) -> Result<EigDecomposition> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() > 4096 {
        return Err(Error::DimensionTooLarge(format!("dimension {}", a.rows())));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(EigDecomposition {
            eigenvalues: vec![],
            right: ComplexMatrix::zeros(0, 0),
            left: ComplexMatrix::zeros(0, 0),
            condition: 1.0,
            defect_flag: false,
        });
    }
    let (mut t, mut z) = hessenberg(a);
    schur_qr(&mut t, &mut z)?;
    let anorm = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let smin = (EPS * anorm).max(f64::MIN_POSITIVE);
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();

    let mut right = ComplexMatrix::zeros(n, n);
    let mut left = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let x = triangular_right(&t, k, smin);
        let w = triangular_left(&t, k, smin);
        let r = z.matvec(&x)?;
        let l = z.matvec(&w)?;
        right.set_column(k, &unit(&r));
        left.set_column(k, &unit(&l));
    }

    let condition = condition_number(&right);
    let mut dec = EigDecomposition {
        eigenvalues: values,
        right,
        left,
        condition,
        defect_flag: !(condition <= 1.0 / tol),
    };
    let order = mode_order(&dec.eigenvalues);
    dec.permute(&order);
    if !dec.defect_flag {
        biorthonormalize(&mut dec)?;
    }
    Ok(dec)
}

/// Rescales left eigenvectors so that `<l_m|r_n> = δ_mn`.
///
/// Clusters of nearly equal eigenvalues are handled jointly by inverting the
/// cluster's Gram block, which restores biorthogonality inside degenerate
/// subspaces where independently computed left and right vectors need not pair.
pub fn biorthonormalize(dec: &mut EigDecomposition) -> Result<()> {
    if dec.defect_flag {
        return Err(Error::DefectiveMatrix {
            condition: dec.condition,
        });
    }
    let n = dec.dim();
    let scale = dec
        .eigenvalues
        .iter()
        .map(|z| z.norm())
        .fold(1.0_f64, f64::max);
    let cluster_tol = 1e-6 * scale;
    let mut assigned = vec![false; n];
    for seed in 0..n {
        if assigned[seed] {
            continue;
        }
        // Transitive closure so that chains of close eigenvalues share a cluster.
        let mut members = vec![seed];
        assigned[seed] = true;
        let mut cursor = 0;
        while cursor < members.len() {
            let m = members[cursor];
            for j in 0..n {
                if !assigned[j] && (dec.eigenvalues[j] - dec.eigenvalues[m]).norm() < cluster_tol {
                    assigned[j] = true;
                    members.push(j);
                }
            }
            cursor += 1;
        }
        let k = members.len();
        let gram = ComplexMatrix::from_fn(k, k, |i, j| {
            inner(&dec.left.column(members[i]), &dec.right.column(members[j]))
        });
        // L_c <- L_c G^{-†} so that L_c^† R_c = I.
        let ginv_h = gram.inverse()?.adjoint();
        let lc = ComplexMatrix::from_fn(n, k, |r, c| dec.left[(r, members[c])]);
        let fixed = &lc * &ginv_h;
        for (c, &m) in members.iter().enumerate() {
            dec.left.set_column(m, &fixed.column(c));
        }
    }
    let err = dec.biorthogonality_error();
    if !(err <= 1e-6) {
        return Err(Error::DefectiveMatrix {
            condition: dec.condition.max(1.0 / err.max(f64::MIN_POSITIVE)),
        });
    }
    Ok(())
}

fn unit(v: &[C64]) -> Vec<C64> {
    let nv = norm(v);
    if nv == 0.0 || !nv.is_finite() {
        return v.to_vec();
    }
    // Fix the phase so the largest component is real and positive.
    let big = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(ONE);
    let phase = if big.norm() > 0.0 { big.conj() / big.norm() } else { ONE };
    v.iter().map(|z| z * phase / nv).collect()
}

/// Householder reduction to upper Hessenberg form: returns (H, Q) with A = Q H Q^†.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = norm(&v);
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vnorm);
        // H <- P H with P = I - 2 v v^†, acting on rows k+1..n.
        for c in 0..n {
            let s: C64 = (0..v.len()).map(|i| v[i].conj() * h[(k + 1 + i, c)]).sum();
            for i in 0..v.len() {
                h[(k + 1 + i, c)] -= v[i] * s * 2.0;
            }
        }
        // H <- H P, Q <- Q P acting on columns k+1..n.
        for r in 0..n {
            let s: C64 = (0..v.len()).map(|i| h[(r, k + 1 + i)] * v[i]).sum();
            for i in 0..v.len() {
                h[(r, k + 1 + i)] -= s * v[i].conj() * 2.0;
            }
            let s: C64 = (0..v.len()).map(|i| q[(r, k + 1 + i)] * v[i]).sum();
            for i in 0..v.len() {
                q[(r, k + 1 + i)] -= s * v[i].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` zeroing `y` in `G [x; y]`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    if y == ZERO {
        return (1.0, ZERO);
    }
    if x == ZERO {
        return (0.0, ONE);
    }
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    let c = x.norm() / r;
    let s = (x / x.norm()) * y.conj() / r;
    (c, s)
}

/// Shifted single-step QR iteration driving a Hessenberg matrix to upper
/// triangular (Schur) form, accumulating the unitary transform in `z`.
fn schur_qr(h: &mut ComplexMatrix, z: &mut ComplexMatrix) -> Result<()> {
    let n = h.rows();
    let hnorm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let max_iter = 60 * n.max(1);
    let mut total = 0usize;
    let mut hi = n - 1;
    let mut its = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == 0.0 {
                s = hnorm;
            }
            if h[(l, l - 1)].norm() <= EPS * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > max_iter {
            return Err(Error::NonConvergence { iterations: total });
        }
        let mu = if its % 11 == 0 {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + C64::new(0.75, 0.25) * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        let mut x = h[(l, l)] - mu;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            if k > l {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let cstart = if k > l { k - 1 } else { l };
            for j in cstart..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            if k > l {
                h[(k + 1, k - 1)] = ZERO;
            }
            let rend = (k + 2).min(hi);
            for i in 0..=rend {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * c + b * s.conj();
                z[(i, k + 1)] = -a * s + b * c;
            }
        }
    }
    for r in 1..n {
        for c in 0..r {
            h[(r, c)] = ZERO;
        }
    }
    Ok(())
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

fn guarded(d: C64, smin: f64) -> C64 {
    if d.norm() < smin {
        C64::new(smin, 0.0)
    } else {
        d
    }
}

/// Right eigenvector of upper triangular `t` for its k-th diagonal entry.
fn triangular_right(t: &ComplexMatrix, k: usize, smin: f64) -> Vec<C64> {
    let n = t.rows();
    let lam = t[(k, k)];
    let mut x = vec![ZERO; n];
    x[k] = ONE;
    for i in (0..k).rev() {
        let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * x[j]).sum();
        x[i] = -s / guarded(t[(i, i)] - lam, smin);
        let big = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if big > 1e100 {
            x.iter_mut().for_each(|z| *z /= big);
        }
    }
    x
}

/// Left eigenvector (`y^† T = λ y^†`) of upper triangular `t`.
fn triangular_left(t: &ComplexMatrix, k: usize, smin: f64) -> Vec<C64> {
    let n = t.rows();
    let lam = t[(k, k)];
    // w = conj(y): w_i (T_ii - λ) = -Σ_{j<i} w_j T_ji.
    let mut w = vec![ZERO; n];
    w[k] = ONE;
    for i in k + 1..n {
        let s: C64 = (k..i).map(|j| w[j] * t[(j, i)]).sum();
        w[i] = -s / guarded(t[(i, i)] - lam, smin);
        let big = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if big > 1e100 {
            w.iter_mut().for_each(|z| *z /= big);
        }
    }
    w.iter().map(|z| z.conj()).collect()
}

/// Ratio of extreme singular values, by one-sided Jacobi orthogonalisation.
pub fn condition_number(a: &ComplexMatrix) -> f64 {
    let sv = singular_values(a);
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Singular values of a square or tall matrix (one-sided Jacobi).
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<C64>> = (0..n).map(|c| a.column(c)).collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = inner(&cols[p], &cols[q]);
                if gamma.norm() <= EPS * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                // Remove the phase, then apply a real Jacobi rotation.
                let phase = gamma / gamma.norm();
                let g = gamma.norm();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let xp = cols[p][i];
                    let xq = cols[q][i] * phase.conj();
                    cols[p][i] = xp * c - xq * s;
                    cols[q][i] = (xp * s + xq * c) * phase;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    cols.iter().map(|c| norm(c)).collect()
}
