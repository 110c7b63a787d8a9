//! Small dense linear algebra: LU solves, determinants, least squares,
//! null spaces, symmetric eigenvalues, and nonnegative least squares.
//!
//! Problem sizes in this crate are tiny (matrices up to ~50 x 10), so plain
//! row-major `Vec<f64>` with partial pivoting is all we need.

/// Row-major matrix with explicit shape.
#[derive(Debug, Clone)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            a: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut a = Vec::with_capacity(r * c);
        for row in rows {
            debug_assert_eq!(row.len(), c);
            a.extend_from_slice(row);
        }
        Mat {
            rows: r,
            cols: c,
            a,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Solve `A x = b` for square `A` by LU with partial pivoting.
/// Returns `None` when a pivot falls below `tiny` relative to the row scale.
pub fn solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    debug_assert_eq!(a.rows, a.cols);
    debug_assert_eq!(b.len(), a.rows);
    let n = a.rows;
    let mut m = a.a.clone();
    let mut x = b.to_vec();
    let scale: f64 = m.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    let tiny = 1e-300_f64.max(scale * 1e-14 * f64::EPSILON);
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].abs();
        for r in col + 1..n {
            let v = m[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best <= tiny {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f != 0.0 {
                for j in col..n {
                    m[r * n + j] -= f * m[col * n + j];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut v = x[col];
        for j in col + 1..n {
            v -= m[col * n + j] * x[j];
        }
        x[col] = v / m[col * n + col];
    }
    Some(x)
}

/// Determinant of a square matrix via LU with partial pivoting.
pub fn det(a: &Mat) -> f64 {
    debug_assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.a.clone();
    let mut sign = 1.0f64;
    let mut d = 1.0f64;
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].abs();
        for r in col + 1..n {
            let v = m[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            sign = -sign;
        }
        let p = m[col * n + col];
        d *= p;
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            if f != 0.0 {
                for j in col..n {
                    m[r * n + j] -= f * m[col * n + j];
                }
            }
        }
    }
    sign * d
}

/// Minimum-norm least-squares solution of `A x ~ b` via ridge-stabilized
/// normal equations. Adequate for the well-scaled small systems used here.
pub fn lstsq(a: &Mat, b: &[f64]) -> Vec<f64> {
    let n = a.cols;
    let mut ata = Mat::zeros(n, n);
    let mut atb = vec![0.0; n];
    for r in 0..a.rows {
        let row = a.row(r);
        for i in 0..n {
            atb[i] += row[i] * b[r];
            for j in i..n {
                let v = ata.get(i, j) + row[i] * row[j];
                ata.set(i, j, v);
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            ata.set(i, j, ata.get(j, i));
        }
    }
    let scale: f64 = (0..n).fold(0.0f64, |s, i| s.max(ata.get(i, i))).max(1.0);
    let ridge = scale * 1e-13;
    for i in 0..n {
        let v = ata.get(i, i) + ridge;
        ata.set(i, i, v);
    }
    solve(&ata, &atb).unwrap_or_else(|| vec![0.0; n])
}

/// Orthonormal basis of the null space of `m` (columns of the result span
/// `{x : m x = 0}`), via modified Gram-Schmidt against the row space.
pub fn nullspace_basis(m: &Mat, tol: f64) -> Vec<Vec<f64>> {
    let n = m.cols;
    // Orthonormalize the rows to get a basis of the row space.
    let mut rowbasis: Vec<Vec<f64>> = Vec::new();
    for r in 0..m.rows {
        let mut v = m.row(r).to_vec();
        for q in &rowbasis {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= dot * qi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rowscale = m.row(r).iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1.0);
        if norm > tol * rowscale {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            rowbasis.push(v);
        }
    }
    // Project unit vectors off the row space and orthonormalize survivors.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for q in rowbasis.iter().chain(basis.iter()) {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= dot * qi;
            }
        }
        // Second pass for orthogonality at working precision.
        for q in rowbasis.iter().chain(basis.iter()) {
            let dot: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= dot * qi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            basis.push(v);
        }
    }
    basis
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn sym_eigenvalues(s: &Mat) -> Vec<f64> {
    debug_assert_eq!(s.rows, s.cols);
    let n = s.rows;
    let mut a = s.a.clone();
    let idx = |i: usize, j: usize| i * n + j;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off += a[idx(i, j)] * a[idx(i, j)];
            }
        }
        if off.sqrt() < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[idx(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s_ = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s_ * akq;
                    a[idx(k, q)] = s_ * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s_ * aqk;
                    a[idx(q, k)] = s_ * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eig
}

/// Singular values of a general matrix (square roots of eigenvalues of GᵀG).
pub fn singular_values(g: &Mat) -> Vec<f64> {
    let n = g.cols;
    let mut gtg = Mat::zeros(n, n);
    for r in 0..g.rows {
        let row = g.row(r);
        for i in 0..n {
            for j in 0..n {
                let v = gtg.get(i, j) + row[i] * row[j];
                gtg.set(i, j, v);
            }
        }
    }
    sym_eigenvalues(&gtg)
        .into_iter()
        .map(|e| e.max(0.0).sqrt())
        .collect()
}

/// Nonnegative least squares: minimize `‖A λ − b‖₂` over `λ ≥ 0`
/// (Lawson-Hanson active set). Returns the coefficient vector.
pub fn nnls(a: &Mat, b: &[f64]) -> Vec<f64> {
    let n = a.cols;
    let m = a.rows;
    let mut passive = vec![false; n];
    let mut x = vec![0.0; n];
    let max_outer = 3 * n + 10;
    for _ in 0..max_outer {
        // Gradient of 0.5‖Ax − b‖² is Aᵀ(Ax − b); we want its most negative entry.
        let ax = a.mul_vec(&x);
        let resid: Vec<f64> = (0..m).map(|i| b[i] - ax[i]).collect();
        let mut wgrad = vec![0.0; n];
        for r in 0..m {
            let row = a.row(r);
            for j in 0..n {
                wgrad[j] += row[j] * resid[r];
            }
        }
        let mut best = -1.0f64;
        let mut bestj = None;
        let scale = b.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
        for j in 0..n {
            if !passive[j] && wgrad[j] > best && wgrad[j] > 1e-14 * scale {
                best = wgrad[j];
                bestj = Some(j);
            }
        }
        let Some(j0) = bestj else { break };
        passive[j0] = true;
        // Inner loop: solve the unconstrained LS on the passive set and clip.
        for _ in 0..max_outer {
            let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let mut sub = Mat::zeros(m, cols.len());
            for r in 0..m {
                for (cj, &j) in cols.iter().enumerate() {
                    sub.set(r, cj, a.get(r, j));
                }
            }
            let z = lstsq(&sub, b);
            if z.iter().all(|&v| v > 0.0) {
                for (cj, &j) in cols.iter().enumerate() {
                    x[j] = z[cj];
                }
                break;
            }
            // Step toward z until the first passive coordinate hits zero.
            let mut alpha = 1.0f64;
            for (cj, &j) in cols.iter().enumerate() {
                if z[cj] <= 0.0 {
                    let denom = x[j] - z[cj];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            for (cj, &j) in cols.iter().enumerate() {
                x[j] += alpha * (z[cj] - x[j]);
                if x[j] <= 1e-14 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    x
}

/// Residual `b − A λ` of an NNLS fit in the sup norm.
pub fn nnls_residual_inf(a: &Mat, b: &[f64], lambda: &[f64]) -> f64 {
    let ax = a.mul_vec(lambda);
    b.iter()
        .zip(&ax)
        .map(|(bi, ai)| (bi - ai).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_det_small() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = solve(&a, &[5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
        assert!((det(&a) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(solve(&a, &[1.0, 2.0]).is_none());
        assert!(det(&a).abs() < 1e-12);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let m = Mat::from_rows(&[vec![1.0, 1.0, 1.0]]);
        let basis = nullspace_basis(&m, 1e-12);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            let s: f64 = v.iter().sum();
            assert!(s.abs() < 1e-10);
        }
    }

    #[test]
    fn nnls_recovers_cone_member() {
        // b = 2·a1 + 0.5·a3 is in the cone; residual must vanish.
        let a = Mat::from_rows(&[
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let b = vec![2.5, 0.5, 0.5];
        let lam = nnls(&a, &b);
        assert!(nnls_residual_inf(&a, &b, &lam) < 1e-10);
    }

    #[test]
    fn nnls_rejects_outside_point() {
        let a = Mat::from_rows(&[vec![1.0], vec![0.0]]);
        let b = vec![0.0, 1.0];
        let lam = nnls(&a, &b);
        // Best cone point is the origin; residual stays 1 in the second row.
        assert!((nnls_residual_inf(&a, &b, &lam) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn jacobi_eigenvalues() {
        let s = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = sym_eigenvalues(&s);
        assert!((e[0] - 3.0).abs() < 1e-10);
        assert!((e[1] - 1.0).abs() < 1e-10);
    }
}
