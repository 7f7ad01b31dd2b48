//! Small dense helpers on top of nalgebra: sorted SVD, kernels, ranges and
//! principal-angle distances between subspaces.

use nalgebra::{DMatrix, DVector};

/// Relative threshold used for rank decisions throughout the crate.
pub const RANK_TOL: f64 = 1e-10;

/// Full SVD `m = U Σ Vᵀ` with singular values sorted in decreasing order.
///
/// Wide matrices are padded with zero rows so that `V` is always square; `U`
/// keeps the original row count, so only its columns for nonzero singular
/// values are meaningful in that case.
pub fn svd_sorted(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (r, c) = m.shape();
    let padded;
    let m = if r < c {
        padded = m.clone().resize_vertically(c, 0.0);
        &padded
    } else {
        m
    };
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = DMatrix::from_fn(r, order.len(), |i, j| u[(i, order[j])]);
    let v = DMatrix::from_fn(vt.ncols(), order.len(), |i, j| vt[(order[j], i)]);
    (u, sigma, v)
}

/// Numerical rank with threshold `rel_tol · σ_max`.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let (_, s, _) = svd_sorted(m);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * top).count()
}

/// Orthonormal basis (as columns) of the right null space of `m`.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    let (_, s, v) = svd_sorted(m);
    let top = s.first().copied().unwrap_or(0.0);
    let r = if top == 0.0 {
        0
    } else {
        s.iter().filter(|&&x| x > rel_tol * top).count()
    };
    let cols: Vec<DVector<f64>> = (r..n).map(|j| v.column(j).into_owned()).collect();
    columns(n, &cols)
}

/// The last `k` right singular vectors (those of the smallest singular values).
pub fn smallest_right_singular(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = m.ncols();
    let (_, _, v) = svd_sorted(m);
    let cols: Vec<DVector<f64>> = (n - k..n).map(|j| v.column(j).into_owned()).collect();
    columns(n, &cols)
}

/// The first `k` left singular vectors (those of the largest singular values).
pub fn largest_left_singular(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let (u, _, _) = svd_sorted(m);
    let cols: Vec<DVector<f64>> = (0..k).map(|j| u.column(j).into_owned()).collect();
    columns(m.nrows(), &cols)
}

/// Orthonormal basis of the column space of `m`.
pub fn range(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (u, s, _) = svd_sorted(m);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let r = s.iter().filter(|&&x| x > rel_tol * top).count();
    let cols: Vec<DVector<f64>> = (0..r).map(|j| u.column(j).into_owned()).collect();
    columns(m.nrows(), &cols)
}

/// Assemble column vectors into a matrix, allowing zero columns.
pub fn columns(nrows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(nrows, cols.len(), |i, j| cols[j][i])
}

/// Largest sine of the principal angles between the column spans of `a`
/// and `b`; 1 when the dimensions differ.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = range(a, RANK_TOL);
    let qb = range(b, RANK_TOL);
    if qa.ncols() != qb.ncols() || qa.nrows() != qb.nrows() {
        return 1.0;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    let resid = &qa - &qb * (qb.transpose() * &qa);
    let (_, s, _) = svd_sorted(&resid);
    s.first().copied().unwrap_or(0.0).min(1.0)
}

/// Flip the sign of each column so that its first entry above `eps` in magnitude is positive.
pub fn orient_columns(m: &mut DMatrix<f64>, eps: f64) {
    for mut col in m.column_iter_mut() {
        if let Some(x) = col.iter().find(|x| x.abs() > eps).copied() {
            if x < 0.0 {
                col.neg_mut();
            }
        }
    }
}

/// Entrywise maximum absolute value.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}
