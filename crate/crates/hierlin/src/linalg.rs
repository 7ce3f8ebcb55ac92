//! Dense linear-algebra kernels used by the selectors.
//!
//! Everything here works on plain `f64` buffers: a row-major [`Matrix`], a
//! Cholesky factorization, least squares via the normal equations, and an
//! incremental [`ForwardFitState`] that scores one-column additions to an
//! active set in `O(n * k)`.
//!
//! Normal equations with a Cholesky solve are used instead of QR: sample
//! sizes stay in the thousands and active sets in the dozens, so Gram
//! conditioning is acceptable and the incremental update is cheap.

use thiserror::Error;

/// Pivot tolerance for Cholesky, relative to the largest diagonal entry.
const CHOLESKY_PIVOT_RTOL: f64 = 1e-12;

/// A candidate whose residual variance after projection on the active set
/// falls below this fraction of its own variance is declared collinear.
const DEGENERATE_RTOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense matrix stored in row-major order: `data[row * cols + col]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must match dimensions");
        debug_assert!(data.iter().all(|v| v.is_finite()), "entries must be finite");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Matrix::zeros(size, size);
        for i in 0..size {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "need at least one row");
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, data)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, val: f64) {
        self.data[row * self.cols + col] = val;
    }

    /// Copies column `col` (0-based) out of the matrix.
    pub fn column(&self, col: usize) -> Vec<f64> {
        assert!(col < self.cols, "column index out of bounds");
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }
}

/// Result of a least-squares fit.
///
/// With `intercept = true` the first coefficient is the intercept, followed
/// by one slope per column of the design matrix.
#[derive(Clone, Debug)]
pub struct LsFit {
    pub coefficients: Vec<f64>,
    pub rss: f64,
    pub dof: usize,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Lower-triangular Cholesky factor `L` with `L * L^T = a`.
///
/// Only the lower triangle of `a` is read. Fails with
/// [`LinalgError::NotPositiveDefinite`] when a pivot drops below
/// `1e-12 * max(diag)`.
pub fn cholesky(a: &Matrix) -> Result<Matrix, LinalgError> {
    if a.rows != a.cols {
        return Err(LinalgError::DimensionMismatch(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let max_diag = (0..n).fold(0.0_f64, |acc, i| acc.max(a.get(i, i).abs()));
    let tol = CHOLESKY_PIVOT_RTOL * max_diag.max(f64::MIN_POSITIVE);

    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if sum <= tol {
                    return Err(LinalgError::NotPositiveDefinite {
                        index: i,
                        pivot: sum,
                    });
                }
                l.set(i, j, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solves `L x = b` for lower-triangular `L` given as rows of a growing
/// factor (row `i` has `i + 1` entries).
fn forward_solve(l_rows: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = b.len();
    let mut x = vec![0.0; k];
    for i in 0..k {
        let mut sum = b[i];
        for j in 0..i {
            sum -= l_rows[i][j] * x[j];
        }
        x[i] = sum / l_rows[i][i];
    }
    x
}

/// Solves `L^T x = b` for the same row-list representation.
fn backward_solve(l_rows: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = b.len();
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut sum = b[i];
        for j in i + 1..k {
            sum -= l_rows[j][i] * x[j];
        }
        x[i] = sum / l_rows[i][i];
    }
    x
}

/// Ordinary least squares of `y` on the columns of `x`.
///
/// With `intercept`, columns and response are centered internally and the
/// reported coefficient vector is `[intercept, slopes...]`; the intercept is
/// recovered from the column means. Errors with
/// [`LinalgError::RankDeficient`] when the Gram matrix is not positive
/// definite.
pub fn least_squares(x: &Matrix, y: &[f64], intercept: bool) -> Result<LsFit, LinalgError> {
    let n = x.rows;
    let k = x.cols;
    if y.len() != n {
        return Err(LinalgError::DimensionMismatch(format!(
            "{} rows vs response of length {}",
            n,
            y.len()
        )));
    }
    let fitted = k + usize::from(intercept);
    if n <= fitted {
        return Err(LinalgError::RankDeficient);
    }

    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| x.column(j)).collect();
    let mut yv = y.to_vec();
    let mut col_means = vec![0.0; k];
    let mut y_mean = 0.0;
    if intercept {
        y_mean = mean(&yv);
        for v in yv.iter_mut() {
            *v -= y_mean;
        }
        for (j, c) in cols.iter_mut().enumerate() {
            let m = mean(c);
            col_means[j] = m;
            for v in c.iter_mut() {
                *v -= m;
            }
        }
    }

    // Gram matrix and right-hand side on the (possibly centered) columns.
    let mut gram = Matrix::zeros(k, k);
    let mut xty = vec![0.0; k];
    for i in 0..k {
        for j in 0..=i {
            let g = dot(&cols[i], &cols[j]);
            gram.set(i, j, g);
            gram.set(j, i, g);
        }
        xty[i] = dot(&cols[i], &yv);
    }

    let l = cholesky(&gram).map_err(|_| LinalgError::RankDeficient)?;
    let l_rows: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..=i).map(|j| l.get(i, j)).collect())
        .collect();
    let w = forward_solve(&l_rows, &xty);
    let slopes = backward_solve(&l_rows, &w);

    let mut resid = yv;
    for (j, c) in cols.iter().enumerate() {
        let b = slopes[j];
        for (r, v) in resid.iter_mut().zip(c) {
            *r -= b * v;
        }
    }
    let rss = dot(&resid, &resid).max(0.0);

    let coefficients = if intercept {
        let b0 = y_mean
            - slopes
                .iter()
                .zip(&col_means)
                .map(|(b, m)| b * m)
                .sum::<f64>();
        let mut c = Vec::with_capacity(k + 1);
        c.push(b0);
        c.extend_from_slice(&slopes);
        c
    } else {
        slopes
    };

    Ok(LsFit {
        coefficients,
        rss,
        dof: n - fitted,
    })
}

/// RSS reduction from adding one candidate column to the active set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gain {
    /// `RSS(current model) - RSS(current model + candidate)`, never negative.
    pub reduction: f64,
    /// Set when the candidate is numerically collinear with the active set;
    /// the reduction is reported as zero in that case.
    pub degenerate: bool,
}

/// Incremental least-squares state over a growing set of columns.
///
/// Maintains the Cholesky factor of the active Gram matrix, so scoring a
/// candidate costs `O(n * k)` dot products plus an `O(k^2)` triangular
/// solve, and committing a column appends one factor row. The response is
/// centered at construction; callers are expected to pass centered columns
/// so that the implicit intercept stays exact.
#[derive(Clone, Debug)]
pub struct ForwardFitState {
    n: usize,
    y: Vec<f64>,
    /// Total sum of squares of the centered response.
    tss: f64,
    cols: Vec<Vec<f64>>,
    /// Rows of the growing Cholesky factor of the active Gram matrix.
    chol_rows: Vec<Vec<f64>>,
    /// `L^{-1} X^T y`, extended by one entry per committed column.
    w: Vec<f64>,
    rss: f64,
}

impl ForwardFitState {
    pub fn new(y: &[f64]) -> Self {
        let m = mean(y);
        let centered: Vec<f64> = y.iter().map(|v| v - m).collect();
        let tss = dot(&centered, &centered);
        ForwardFitState {
            n: y.len(),
            y: centered,
            tss,
            cols: Vec::new(),
            chol_rows: Vec::new(),
            w: Vec::new(),
            rss: tss,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn active_len(&self) -> usize {
        self.cols.len()
    }

    pub fn rss(&self) -> f64 {
        self.rss
    }

    pub fn tss(&self) -> f64 {
        self.tss
    }

    /// Cross products of the candidate with the active columns, the
    /// triangular solve, and the two scalars needed by both `gain` and
    /// `push`.
    fn project(&self, col: &[f64]) -> (Vec<f64>, f64, f64) {
        let u = if self.cols.is_empty() {
            Vec::new()
        } else {
            let g: Vec<f64> = self.cols.iter().map(|c| dot(c, col)).collect();
            forward_solve(&self.chol_rows, &g)
        };
        let s2 = dot(col, col) - dot(&u, &u);
        let t = dot(col, &self.y) - dot(&u, &self.w);
        (u, s2, t)
    }

    /// Scores the RSS reduction from adding `col` without committing it.
    pub fn gain(&self, col: &[f64]) -> Gain {
        assert_eq!(col.len(), self.n, "candidate length must match n");
        let (_, s2, t) = self.project(col);
        let own = dot(col, col);
        if s2 <= DEGENERATE_RTOL * own || s2 <= 0.0 {
            return Gain {
                reduction: 0.0,
                degenerate: true,
            };
        }
        Gain {
            reduction: (t * t / s2).max(0.0),
            degenerate: false,
        }
    }

    /// Commits a column to the active set.
    ///
    /// Fails with [`LinalgError::RankDeficient`] when the column is
    /// collinear with the active set.
    pub fn push(&mut self, col: Vec<f64>) -> Result<(), LinalgError> {
        assert_eq!(col.len(), self.n, "column length must match n");
        let (mut u, s2, t) = self.project(&col);
        let own = dot(&col, &col);
        if s2 <= DEGENERATE_RTOL * own || s2 <= 0.0 {
            return Err(LinalgError::RankDeficient);
        }
        let s = s2.sqrt();
        u.push(s);
        self.chol_rows.push(u);
        let w_new = t / s;
        self.w.push(w_new);
        self.rss = (self.rss - w_new * w_new).max(0.0);
        self.cols.push(col);
        Ok(())
    }

    /// Least-squares slopes of the active columns, in push order.
    pub fn coefficients(&self) -> Vec<f64> {
        backward_solve(&self.chol_rows, &self.w)
    }
}

/// RSS reduction from adding `candidate` to the fit tracked by `state`.
pub fn greedy_gain(state: &ForwardFitState, candidate: &[f64]) -> Gain {
    state.gain(candidate)
}
