//! Dense real kernels used by the solver and the built-in oracles.
//!
//! Vectors are plain `[f64]` slices. [`Matrix`] is dense and row-major.
//! Every reduction runs in a fixed index order so results are bit-reproducible.

use thiserror::Error;

/// Relative pivot tolerance of [`certifying_cholesky`], scaled by the largest
/// initial diagonal magnitude.
pub const PIVOT_TOL: f64 = 1e-12;

/// Relative tolerance of the symmetry precondition in [`certifying_cholesky`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative pivot threshold of the LU routines.
pub const LU_PIVOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("rank-one update is singular (denominator {denominator:e})")]
    SingularUpdate { denominator: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Dimension("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.concat() })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[&[f64]]) -> Result<Self, LinalgError> {
        let c = cols.len();
        let r = cols.first().map_or(0, |v| v.len());
        if cols.iter().any(|v| v.len() != r) {
            return Err(LinalgError::Dimension("columns of unequal length".into()));
        }
        let mut m = Matrix::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "tr_mul_vec dimension");
        let mut out = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            axpy(*xi, self.row(i), &mut out);
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                axpy(a, other.row(k), dst);
            }
        }
        out
    }

    /// `xᵀ A x` for square `A`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        norm_inf(&self.data)
    }

    pub fn all_finite(&self) -> bool {
        all_finite(&self.data)
    }

    /// `‖self − other‖_∞` (row-sum norm).
    pub fn dist_inf(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(other.row(i)).map(|(a, b)| (a - b).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &Matrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        axpy(alpha, &other.data, &mut self.data);
    }

    /// `(A + Aᵀ)/2`
    pub fn symmetrized(&self) -> Matrix {
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    /// `‖A − Aᵀ‖_∞`
    pub fn asymmetry(&self) -> f64 {
        self.dist_inf(&self.transpose())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Returns the inverse of `B + u e_colᵀ` given `g = B⁻¹`, i.e. the inverse after
/// column `col` of `B` has been shifted by `u`.
///
/// Fails with [`LinalgError::SingularUpdate`] when
/// `|1 + e_colᵀ G u| < 1e-10 (1 + ‖G‖_∞ ‖u‖_∞)`; the caller must refactorize.
pub fn smw_inverse_update(g: &Matrix, u: &[f64], col: usize) -> Result<Matrix, LinalgError> {
    if !g.is_square() || g.rows() != u.len() || col >= u.len() {
        return Err(LinalgError::Dimension("smw_inverse_update operands".into()));
    }
    let gu = g.mul_vec(u);
    let denominator = 1.0 + gu[col];
    if denominator.abs() < 1e-10 * (1.0 + g.norm_inf() * norm_inf(u)) {
        return Err(LinalgError::SingularUpdate { denominator });
    }
    // G − (G u)(e_colᵀ G) / (1 + e_colᵀ G u)
    let g_row = g.row(col).to_vec();
    let mut out = g.clone();
    for i in 0..g.rows() {
        let f = gu[i] / denominator;
        if f != 0.0 {
            let dst = &mut out.data[i * g.cols..(i + 1) * g.cols];
            axpy(-f, &g_row, dst);
        }
    }
    Ok(out)
}

/// Outcome of [`certifying_cholesky`].
#[derive(Debug, Clone, PartialEq)]
pub enum Definiteness {
    /// `X = L Lᵀ` with every pivot above the tolerance. `l` is lower triangular.
    PositiveDefinite { l: Matrix },
    /// Unit vector with `vᵀ X v ≤ 0` up to the pivot band. `pivot` is the
    /// offending Schur-complement diagonal; `vᵀXv = pivot / ‖v_raw‖²`.
    NotPositiveDefinite { v: Vec<f64>, pivot: f64 },
}

impl Definiteness {
    pub fn is_positive_definite(&self) -> bool {
        matches!(self, Definiteness::PositiveDefinite { .. })
    }
}

/// Cholesky factorization that, on failure, produces a certificate of
/// non-definiteness from the row where the nonpositive pivot appeared.
///
/// A pivot `d_k ≤ PIVOT_TOL · max_i |X_ii|` stops the factorization. With the
/// leading block `A = L₁₁L₁₁ᵀ`, off-diagonal column `b = L₁₁ l` and corner `c`,
/// the vector `v = (−L₁₁⁻ᵀ l, 1, 0, …)` gives `vᵀXv = c − lᵀl = d_k`.
pub fn certifying_cholesky(x: &Matrix) -> Result<Definiteness, LinalgError> {
    if !x.is_square() {
        return Err(LinalgError::Dimension("certifying_cholesky needs a square matrix".into()));
    }
    let n = x.rows();
    let asym = x.asymmetry();
    if asym > SYMMETRY_TOL * x.norm_inf() {
        return Err(LinalgError::NonSymmetric { asymmetry: asym });
    }
    let x = x.symmetrized();
    let scale = (0..n).fold(0.0f64, |acc, i| acc.max(x[(i, i)].abs()));
    let tol = PIVOT_TOL * scale;

    let mut l = Matrix::zeros(n, n);
    for k in 0..n {
        let lk = l.row(k)[..k].to_vec();
        let pivot = x[(k, k)] - dot(&lk, &lk);
        if pivot <= tol {
            // back-substitute L₁₁ᵀ w = l
            let mut w = lk;
            for i in (0..k).rev() {
                let mut s = w[i];
                for j in (i + 1)..k {
                    s -= l[(j, i)] * w[j];
                }
                w[i] = s / l[(i, i)];
            }
            let mut v = vec![0.0; n];
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = -wi;
            }
            v[k] = 1.0;
            let nv = norm(&v);
            for vi in v.iter_mut() {
                *vi /= nv;
            }
            return Ok(Definiteness::NotPositiveDefinite { v, pivot });
        }
        let d = pivot.sqrt();
        l[(k, k)] = d;
        for i in (k + 1)..n {
            let s = x[(i, k)] - dot(&l.row(i)[..k], &l.row(k)[..k]);
            l[(i, k)] = s / d;
        }
    }
    Ok(Definiteness::PositiveDefinite { l })
}

/// LU factorization with partial pivoting, `P B = L U` packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn factor(b: &Matrix) -> Result<Lu, LinalgError> {
        if !b.is_square() {
            return Err(LinalgError::Dimension("LU needs a square matrix".into()));
        }
        let n = b.rows();
        let threshold = LU_PIVOT_TOL * b.max_abs();
        let mut lu = b.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in (k + 1)..n {
                if lu[(i, k)].abs() > best {
                    best = lu[(i, k)].abs();
                    p = i;
                }
            }
            if best < threshold || best == 0.0 {
                return Err(LinalgError::Singular);
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        let v = lu[(k, j)];
                        lu[(i, j)] -= f * v;
                    }
                }
            }
        }
        Ok(Lu { lu, perm, sign })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        assert_eq!(rhs.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let s = dot(&self.lu.row(i)[..i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s = dot(&self.lu.row(i)[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.lu.rows();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            e[j] = 0.0;
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }

    pub fn determinant(&self) -> f64 {
        (0..self.lu.rows()).fold(self.sign, |acc, i| acc * self.lu[(i, i)])
    }
}

/// Solves `B x = rhs` by pivoted LU.
pub fn solve_with_factorization(b: &Matrix, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if rhs.len() != b.rows() {
        return Err(LinalgError::Dimension("rhs length".into()));
    }
    Ok(Lu::factor(b)?.solve(rhs))
}

pub fn invert(b: &Matrix) -> Result<Matrix, LinalgError> {
    Ok(Lu::factor(b)?.inverse())
}

/// Determinant; zero for matrices the LU routine reports singular.
pub fn determinant(b: &Matrix) -> f64 {
    match Lu::factor(b) {
        Ok(lu) => lu.determinant(),
        Err(_) => 0.0,
    }
}

/// Relative size of the trailing block below which [`null_vector`] calls a
/// matrix rank deficient.
pub const RANK_TOL: f64 = 1e-11;

/// Householder QR with column pivoting, `B P = Q R`, stopped once the
/// remaining columns are negligible. Rank revealing.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// `R` in the upper triangle; the rest is scratch.
    r: Matrix,
    /// Householder vectors, `v_k` acting on rows `k..`.
    reflectors: Vec<Vec<f64>>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn factor(b: &Matrix) -> PivotedQr {
        let (rows, cols) = (b.rows(), b.cols());
        let mut a = b.clone();
        let mut perm: Vec<usize> = (0..cols).collect();
        let mut col_norms: Vec<f64> = (0..cols).map(|j| norm(&a.column(j))).collect();
        let scale = col_norms.iter().cloned().fold(0.0, f64::max);
        let mut reflectors = Vec::new();
        for k in 0..rows.min(cols) {
            let p = (k..cols).max_by(|&i, &j| col_norms[i].total_cmp(&col_norms[j])).expect("nonempty");
            if !(col_norms[p] > RANK_TOL * scale) {
                break;
            }
            if p != k {
                for i in 0..rows {
                    a.data.swap(i * cols + k, i * cols + p);
                }
                perm.swap(k, p);
                col_norms.swap(k, p);
            }
            let mut v: Vec<f64> = (k..rows).map(|i| a[(i, k)]).collect();
            let nx = norm(&v);
            let alpha = if v[0] > 0.0 { -nx } else { nx };
            v[0] -= alpha;
            let vv = dot(&v, &v);
            if vv > 0.0 {
                for j in k..cols {
                    let s: f64 = (k..rows).map(|i| v[i - k] * a[(i, j)]).sum::<f64>() * 2.0 / vv;
                    for i in k..rows {
                        a[(i, j)] -= s * v[i - k];
                    }
                }
            }
            reflectors.push(v);
            for j in k + 1..cols {
                col_norms[j] = (k + 1..rows).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt();
            }
        }
        let rank = reflectors.len();
        PivotedQr { r: a, reflectors, perm, rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Back substitution `R₁₁ w = rhs` on the leading `rank` rows.
    fn back_substitute(&self, rhs: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.rank];
        for i in (0..self.rank).rev() {
            let mut s = rhs[i];
            for l in i + 1..self.rank {
                s -= self.r[(i, l)] * w[l];
            }
            w[i] = s / self.r[(i, i)];
        }
        w
    }

    /// Kernel vector built from the first non-pivot column, `None` at full column rank.
    pub fn null_vector(&self) -> Option<Vec<f64>> {
        let cols = self.r.cols();
        if self.rank == cols {
            return None;
        }
        let j = self.rank;
        let rhs: Vec<f64> = (0..self.rank).map(|i| self.r[(i, j)]).collect();
        let w = self.back_substitute(&rhs);
        let mut out = vec![0.0; cols];
        for (i, wi) in w.into_iter().enumerate() {
            out[self.perm[i]] = wi;
        }
        out[self.perm[j]] = -1.0;
        Some(out)
    }

    /// Basic least-squares solution: minimizes `‖Bx − rhs‖` with `x` zero
    /// outside the pivot columns.
    pub fn least_squares(&self, rhs: &[f64]) -> Vec<f64> {
        let mut q = rhs.to_vec();
        for (k, v) in self.reflectors.iter().enumerate() {
            let vv = dot(v, v);
            if vv > 0.0 {
                let s = 2.0 * dot(v, &q[k..]) / vv;
                for (qi, vi) in q[k..].iter_mut().zip(v) {
                    *qi -= s * vi;
                }
            }
        }
        let w = self.back_substitute(&q);
        let mut out = vec![0.0; self.r.cols()];
        for (i, wi) in w.into_iter().enumerate() {
            out[self.perm[i]] = wi;
        }
        out
    }
}

/// A nonzero vector in the kernel of `b`, or `None` if `b` has full column
/// rank to working precision.
pub fn null_vector(b: &Matrix) -> Option<Vec<f64>> {
    if b.cols() > 0 && b.max_abs() == 0.0 {
        let mut v = vec![0.0; b.cols()];
        v[0] = 1.0;
        return Some(v);
    }
    PivotedQr::factor(b).null_vector()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn smw_zero_update_is_identity() {
        let g = Matrix::identity(2);
        for col in 0..2 {
            assert_eq!(smw_inverse_update(&g, &[0.0, 0.0], col).unwrap(), g);
        }
    }

    #[test]
    fn smw_replacement_that_makes_matrix_singular_is_rejected() {
        // B = [[1,-1],[1,1]]; replacing column 2 by (1,1) gives [[1,1],[1,1]].
        let g = m(&[&[0.5, 0.5], &[-0.5, 0.5]]);
        let err = smw_inverse_update(&g, &[2.0, 0.0], 1).unwrap_err();
        assert!(matches!(err, LinalgError::SingularUpdate { .. }));
    }

    #[test]
    fn smw_column_replacement_matches_new_inverse() {
        let g = m(&[&[0.5, 0.5], &[-0.5, 0.5]]);
        // replace column 2 of B by (1,2): shift (2,1)
        let g_new = smw_inverse_update(&g, &[2.0, 1.0], 1).unwrap();
        let b_new = m(&[&[1.0, 1.0], &[1.0, 2.0]]);
        assert!(g_new.matmul(&b_new).dist_inf(&Matrix::identity(2)) <= 1e-12);
    }

    #[test]
    fn smw_near_singular() {
        let g = Matrix::identity(2);
        let err = smw_inverse_update(&g, &[-1.0 + 1e-14, 0.0], 0).unwrap_err();
        assert!(matches!(err, LinalgError::SingularUpdate { .. }));
    }

    #[test]
    fn cholesky_identity() {
        assert!(certifying_cholesky(&Matrix::identity(3)).unwrap().is_positive_definite());
    }

    #[test]
    fn cholesky_negative_diagonal() {
        match certifying_cholesky(&Matrix::diag(&[1.0, -1.0])).unwrap() {
            Definiteness::NotPositiveDefinite { v, .. } => {
                assert_eq!(v, vec![0.0, 1.0]);
                assert_eq!(Matrix::diag(&[1.0, -1.0]).quad_form(&v), -1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cholesky_indefinite_two_by_two() {
        let x = m(&[&[1.0, 2.0], &[2.0, 1.0]]);
        match certifying_cholesky(&x).unwrap() {
            Definiteness::NotPositiveDefinite { v, pivot } => {
                assert_eq!(pivot, -3.0);
                let s = 5f64.sqrt();
                assert!((v[0] + 2.0 / s).abs() < 1e-15 && (v[1] - 1.0 / s).abs() < 1e-15);
                assert!((x.quad_form(&v) + 0.6).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cholesky_rejects_nonsymmetric() {
        let x = m(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(certifying_cholesky(&x), Err(LinalgError::NonSymmetric { .. })));
    }

    #[test]
    fn cholesky_zero_matrix_is_not_pd() {
        match certifying_cholesky(&Matrix::zeros(3, 3)).unwrap() {
            Definiteness::NotPositiveDefinite { v, pivot } => {
                assert_eq!(pivot, 0.0);
                assert_eq!(v, vec![1.0, 0.0, 0.0]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lu_solves_and_detects_singular() {
        let b = m(&[&[0.0, 2.0, 1.0], &[1.0, 1.0, 0.0], &[3.0, 0.0, 1.0]]);
        let rhs = [1.0, 2.0, 3.0];
        let x = solve_with_factorization(&b, &rhs).unwrap();
        let r = sub(&b.mul_vec(&x), &rhs);
        assert!(norm(&r) <= 1e-10 * norm(&rhs));
        assert!((determinant(&b) - (-5.0)).abs() < 1e-12);

        let s = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(solve_with_factorization(&s, &[1.0, 1.0]), Err(LinalgError::Singular));
    }

    #[test]
    fn least_squares_consistent_system() {
        let b = m(&[&[1.0, 2.0, 3.0], &[0.0, 1.0, 1.0], &[1.0, 3.0, 4.0]]);
        let qr = PivotedQr::factor(&b);
        assert_eq!(qr.rank(), 2);
        let rhs = b.mul_vec(&[1.0, -1.0, 2.0]);
        let x = qr.least_squares(&rhs);
        assert!(norm(&sub(&b.mul_vec(&x), &rhs)) < 1e-13);
        let v = qr.null_vector().unwrap();
        assert!(norm(&b.mul_vec(&v)) < 1e-13 * norm(&v));
    }

    #[test]
    fn null_vector_of_wide_matrix() {
        let b = m(&[&[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0]]);
        let v = null_vector(&b).unwrap();
        assert!(norm(&b.mul_vec(&v)) < 1e-14);
        assert!(norm(&v) > 0.5);
        assert!(null_vector(&Matrix::identity(3)).is_none());
    }
}
