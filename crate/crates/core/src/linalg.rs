//! Dense row-major linear algebra.
//!
//! Only what the solvers need: products, Gram matrices, an upper Cholesky
//! factor `A = LᵀL`, triangular solves and a cyclic Jacobi symmetric
//! eigendecomposition. Vectors are plain `&[f64]` / `Vec<f64>`.

use thiserror::Error;

/// Relative pivot floor for [`cholesky_upper`]: a pivot at or below
/// `CHOLESKY_PIVOT_EPS * trace(A) / n` is treated as rank deficiency.
pub const CHOLESKY_PIVOT_EPS: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive definite (pivot {index} = {pivot:e}); design is rank deficient")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("triangular factor has a zero diagonal entry at {index}")]
    SingularFactor { index: usize },
    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("non-finite entry at flat index {index}")]
    NonFinite { index: usize },
    #[error("data length {got} does not match {rows}x{cols}")]
    InvalidData { rows: usize, cols: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense matrix, row-major: `data[i * cols + j]` is entry `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data, rejecting wrong lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::InvalidData {
                rows,
                cols,
                got: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::ShapeMismatch {
                    op: "from_rows",
                    left: (i, cols),
                    right: (i, r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    /// Builds a matrix entry by entry. Panics if `f` produces a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data).expect("from_fn produced a non-finite entry")
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(LinalgError::ShapeMismatch {
                op: "matvec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `Aᵀ x`.
    pub fn transpose_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(LinalgError::ShapeMismatch {
                op: "transpose_matvec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                axpy(xi, self.row(i), &mut out);
            }
        }
        Ok(out)
    }

    /// `A B`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            let out = &mut data[i * other.cols..(i + 1) * other.cols];
            for (k, &aik) in self.row(i).iter().enumerate() {
                if aik != 0.0 {
                    axpy(aik, other.row(k), out);
                }
            }
        }
        Matrix::new(self.rows, other.cols, data)
    }

    /// `AᵀA`, exploiting symmetry.
    pub fn gram(&self) -> Matrix {
        self.weighted_gram_impl(None)
    }

    /// `Aᵀ diag(weights) A`.
    pub fn weighted_gram(&self, weights: &[f64]) -> Result<Matrix> {
        if weights.len() != self.rows {
            return Err(LinalgError::ShapeMismatch {
                op: "weighted_gram",
                left: self.shape(),
                right: (weights.len(), 1),
            });
        }
        Ok(self.weighted_gram_impl(Some(weights)))
    }

    fn weighted_gram_impl(&self, weights: Option<&[f64]>) -> Matrix {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for i in 0..self.rows {
            let w = weights.map_or(1.0, |w| w[i]);
            if w == 0.0 {
                continue;
            }
            let r = self.row(i);
            for j in 0..n {
                let a = w * r[j];
                if a == 0.0 {
                    continue;
                }
                let out = &mut g[j * n + j..(j + 1) * n];
                axpy(a, &r[j..], out);
            }
        }
        for j in 0..n {
            for k in 0..j {
                g[j * n + k] = g[k * n + j];
            }
        }
        Matrix {
            rows: n,
            cols: n,
            data: g,
        }
    }

    /// Rows `indices` in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// The first `k` columns.
    pub fn leading_columns(&self, k: usize) -> Matrix {
        assert!(k <= self.cols);
        Matrix::from_fn(self.rows, k, |i, j| self.get(i, j))
    }

    /// Scales column `j` by `factors[j]`.
    pub fn scale_columns(&self, factors: &[f64]) -> Result<Matrix> {
        if factors.len() != self.cols {
            return Err(LinalgError::ShapeMismatch {
                op: "scale_columns",
                left: self.shape(),
                right: (factors.len(), 1),
            });
        }
        let mut data = self.data.clone();
        for row in data.chunks_mut(self.cols.max(1)) {
            for (v, f) in row.iter_mut().zip(factors) {
                *v *= f;
            }
        }
        Matrix::new(self.rows, self.cols, data)
    }

    fn is_symmetric(&self) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (0..self.rows).all(|i| {
            (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= SYMMETRY_TOL * scale)
        })
    }

    fn require_square(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }
}

/// Upper-triangular `L` with `LᵀL = A` for symmetric positive-definite `A`.
pub fn cholesky_upper(a: &Matrix) -> Result<Matrix> {
    a.require_square()?;
    if !a.is_symmetric() {
        return Err(LinalgError::NotSymmetric);
    }
    let n = a.rows;
    let trace: f64 = (0..n).map(|i| a.get(i, i)).sum();
    let floor = CHOLESKY_PIVOT_EPS * trace / n.max(1) as f64;
    let mut l = vec![0.0; n * n];
    let mut acc = vec![0.0; n];
    for j in 0..n {
        acc[j..].copy_from_slice(&a.row(j)[j..]);
        for k in 0..j {
            let lkj = l[k * n + j];
            if lkj != 0.0 {
                let row_k = &l[k * n + j..(k + 1) * n];
                for (dst, src) in acc[j..].iter_mut().zip(row_k) {
                    *dst -= lkj * src;
                }
            }
        }
        let pivot = acc[j];
        if pivot.is_nan() || pivot <= floor {
            return Err(LinalgError::NotPositiveDefinite { index: j, pivot });
        }
        let d = pivot.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            l[j * n + i] = acc[i] / d;
        }
    }
    Ok(Matrix {
        rows: n,
        cols: n,
        data: l,
    })
}

/// Solves `L x = b`, or `Lᵀ x = b` when `transpose` is set, for upper-triangular `L`.
/// Entries below the diagonal are ignored.
pub fn solve_upper_triangular(l: &Matrix, b: &[f64], transpose: bool) -> Result<Vec<f64>> {
    l.require_square()?;
    let n = l.rows;
    if b.len() != n {
        return Err(LinalgError::ShapeMismatch {
            op: "solve_upper_triangular",
            left: l.shape(),
            right: (b.len(), 1),
        });
    }
    if let Some(index) = (0..n).find(|&i| l.get(i, i) == 0.0) {
        return Err(LinalgError::SingularFactor { index });
    }
    let mut x = b.to_vec();
    if transpose {
        // Lᵀ is lower triangular: forward substitution, sweeping rows of L.
        for i in 0..n {
            let xi = x[i] / l.get(i, i);
            x[i] = xi;
            if xi != 0.0 {
                let row = l.row(i);
                for j in i + 1..n {
                    x[j] -= row[j] * xi;
                }
            }
        }
    } else {
        for i in (0..n).rev() {
            let row = l.row(i);
            let s = dot(&row[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / row[i];
        }
    }
    Ok(x)
}

/// Solves `A x = b` for symmetric positive-definite `A` through its Cholesky factor.
pub fn solve_spd(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let l = cholesky_upper(a)?;
    let u = solve_upper_triangular(&l, b, true)?;
    solve_upper_triangular(&l, &u, false)
}

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
/// Column `k` of `vectors` is the eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eig(a: &Matrix) -> Result<SymEig> {
    a.require_square()?;
    if !a.is_symmetric() {
        return Err(LinalgError::NotSymmetric);
    }
    let n = a.rows;
    let mut m = a.data.clone();
    // symmetrize exactly so rotations stay consistent
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = avg;
            m[j * n + i] = avg;
        }
    }
    let mut v = Matrix::identity(n).data;
    let frob: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = f64::EPSILON * frob;

    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= target || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = m[r * n + p];
                    let arq = m[r * n + q];
                    m[r * n + p] = c * arp - s * arq;
                    m[r * n + q] = s * arp + c * arq;
                }
                for r in 0..n {
                    let apr = m[p * n + r];
                    let aqr = m[q * n + r];
                    m[p * n + r] = c * apr - s * aqr;
                    m[q * n + r] = s * apr + c * aqr;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, k| v[r * n + order[k]]);
    Ok(SymEig { values, vectors })
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a x`.
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `‖a − b‖₂`.
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
    }

    fn random_matrix(rows: usize, cols: usize, vals: &[f64]) -> Matrix {
        Matrix::from_fn(rows, cols, |i, j| vals[(i * cols + j) % vals.len()])
    }

    #[test]
    fn constructor_rejects_nan_and_bad_length() {
        assert!(matches!(
            Matrix::new(2, 2, vec![1.0, 2.0, 3.0]),
            Err(LinalgError::InvalidData { .. })
        ));
        assert_eq!(
            Matrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(LinalgError::NonFinite { index: 1 })
        );
    }

    #[test]
    fn cholesky_identity() {
        let l = cholesky_upper(&Matrix::identity(3)).unwrap();
        assert_eq!(l, Matrix::identity(3));
    }

    #[test]
    fn cholesky_two_by_two() {
        let a = Matrix::from_rows(&[[4.0, 2.0], [2.0, 5.0]]).unwrap();
        let l = cholesky_upper(&a).unwrap();
        let expected = Matrix::from_rows(&[[2.0, 1.0], [0.0, 2.0]]).unwrap();
        assert!(max_abs_diff(&l, &expected) < 1e-15);
        // LᵀL = A by direct multiplication
        let back = l.transpose().matmul(&l).unwrap();
        assert!(max_abs_diff(&back, &a) < 1e-14);
    }

    #[test]
    fn cholesky_indefinite() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(
            cholesky_upper(&a),
            Err(LinalgError::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn cholesky_rejects_asymmetric_and_rectangular() {
        let a = Matrix::from_rows(&[[1.0, 0.5], [0.0, 1.0]]).unwrap();
        assert_eq!(cholesky_upper(&a), Err(LinalgError::NotSymmetric));
        assert!(matches!(
            cholesky_upper(&Matrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn triangular_solves() {
        let b = [3.0, -1.0, 2.5];
        assert_eq!(
            solve_upper_triangular(&Matrix::identity(3), &b, false).unwrap(),
            b.to_vec()
        );
        let l = Matrix::from_rows(&[[2.0, 1.0], [0.0, 2.0]]).unwrap();
        let x = solve_upper_triangular(&l, &[4.0, 2.0], false).unwrap();
        assert_eq!(x, vec![1.5, 1.0]);
        assert_eq!(l.matvec(&x).unwrap(), vec![4.0, 2.0]);
        let xt = solve_upper_triangular(&l, &[4.0, 2.0], true).unwrap();
        assert_eq!(l.transpose().matvec(&xt).unwrap(), vec![4.0, 2.0]);

        let singular = Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(
            solve_upper_triangular(&singular, &[1.0, 1.0], false),
            Err(LinalgError::SingularFactor { index: 1 })
        );
    }

    #[test]
    fn eig_diagonal_and_zero() {
        let e = sym_eig(&Matrix::diag(&[1.0, 3.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert_eq!(e.vectors.get(1, 0).abs(), 1.0);
        assert_eq!(e.vectors.get(0, 1).abs(), 1.0);

        let z = sym_eig(&Matrix::zeros(2, 2)).unwrap();
        assert_eq!(z.values, vec![0.0, 0.0]);
        let vtv = z.vectors.transpose().matmul(&z.vectors).unwrap();
        assert!(max_abs_diff(&vtv, &Matrix::identity(2)) < 1e-15);
    }

    #[test]
    fn eig_two_by_two() {
        // characteristic polynomial (2-λ)² - 1 = 0 → λ = 3, 1
        let a = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = sym_eig(&a).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let v0 = e.vectors.column(0);
        assert!((v0[0] - v0[1]).abs() < 1e-14);
        assert!((v0[0].abs() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn products() {
        let x = [1.0, -2.0, 0.5];
        assert_eq!(Matrix::identity(3).matvec(&x).unwrap(), x.to_vec());
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(a.matvec(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
        assert_eq!(a.transpose_matvec(&[1.0, 1.0]).unwrap(), vec![4.0, 6.0]);
        assert!(matches!(
            Matrix::zeros(2, 3).matvec(&[1.0, 1.0]),
            Err(LinalgError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            a.matmul(&Matrix::zeros(3, 1)),
            Err(LinalgError::ShapeMismatch { .. })
        ));
        let g = a.gram();
        assert_eq!(g, a.transpose().matmul(&a).unwrap());
        let wg = a.weighted_gram(&[2.0, 0.5]).unwrap();
        assert_eq!(wg.as_slice(), &[6.5, 10.0, 10.0, 16.0]);
    }

    prop_compose! {
        fn spd_matrix()(n in 1usize..=50)(
            vals in prop::collection::vec(-1.0f64..1.0, n * (n + 3)),
            n in Just(n),
        ) -> Matrix {
            let b = random_matrix(n + 3, n, &vals);
            let mut g = b.gram();
            for i in 0..n {
                g.data[i * n + i] += 1e-3;
            }
            g
        }
    }

    prop_compose! {
        fn symmetric_matrix()(n in 1usize..=50)(
            vals in prop::collection::vec(-10.0f64..10.0, n * n),
            n in Just(n),
        ) -> Matrix {
            Matrix::from_fn(n, n, |i, j| {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                vals[a * n + b]
            })
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn cholesky_reconstructs(a in spd_matrix()) {
            let l = cholesky_upper(&a).unwrap();
            let back = l.transpose().matmul(&l).unwrap();
            prop_assert!(max_abs_diff(&back, &a) <= 1e-8 * a.max_abs());
            for i in 0..l.rows() {
                for j in 0..i {
                    prop_assert_eq!(l.get(i, j), 0.0);
                }
            }
        }

        #[test]
        fn cholesky_solves_spd_systems(a in spd_matrix(), seed in 0u64..1000) {
            let n = a.rows();
            let b: Vec<f64> = (0..n).map(|i| ((i as u64 * 7919 + seed) % 13) as f64 - 6.0).collect();
            let x = solve_spd(&a, &b).unwrap();
            let r = sub(&a.matvec(&x).unwrap(), &b);
            prop_assert!(norm2(&r) <= 1e-8 * norm2(&b).max(1e-300));
        }

        #[test]
        fn jacobi_reconstructs(a in symmetric_matrix()) {
            let n = a.rows();
            let e = sym_eig(&a).unwrap();
            for k in 1..n {
                prop_assert!(e.values[k - 1] >= e.values[k]);
            }
            let vtv = e.vectors.transpose().matmul(&e.vectors).unwrap();
            prop_assert!(max_abs_diff(&vtv, &Matrix::identity(n)) <= 1e-8);
            let vl = e.vectors.scale_columns(&e.values).unwrap();
            let back = vl.matmul(&e.vectors.transpose()).unwrap();
            prop_assert!(max_abs_diff(&back, &a) <= 1e-7 * a.max_abs().max(1e-300));
            let spectral = e.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            for k in 0..n {
                let v = e.vectors.column(k);
                let av = a.matvec(&v).unwrap();
                let resid: Vec<f64> = av.iter().zip(&v).map(|(x, y)| x - e.values[k] * y).collect();
                prop_assert!(norm2(&resid) <= 1e-8 * spectral.max(1e-300));
            }
        }
    }
}
