//! Small dense linear-algebra guards: rank checks, nullspaces, pivot slices.
//!
//! These are input guards and estimators around the numerical core, not part
//! of it, so they lean on `nalgebra`'s SVD.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::norms::Vector;

/// Smallest-to-largest singular value ratio below which a basis is rejected.
pub const RANK_RATIO: f64 = 1e-10;

fn matrix_from_rows(rows: &[Vector], ncols: usize, min_rows: usize) -> DMatrix<f64> {
    let nrows = rows.len().max(min_rows);
    let mut m = DMatrix::zeros(nrows, ncols);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    m
}

/// Singular values in descending order, with the matching right singular vectors.
fn svd_sorted(m: DMatrix<f64>) -> (Vec<f64>, Vec<Vector>) {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = idx
        .iter()
        .map(|&i| Vector::from(v_t.row(i).iter().copied().collect::<Vec<_>>()))
        .collect();
    (values, vectors)
}

pub fn singular_values(rows: &[Vector]) -> Vec<f64> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    svd_sorted(matrix_from_rows(rows, first.dim(), 0)).0
}

/// Rejects families whose smallest/largest singular value ratio is below [`RANK_RATIO`].
pub fn check_independent(vectors: &[Vector]) -> Result<()> {
    let Some(first) = vectors.first() else {
        return Ok(());
    };
    if vectors.len() > first.dim() {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    let sv = singular_values(vectors);
    let max = sv.first().copied().unwrap_or(0.0);
    let min = sv.get(vectors.len() - 1).copied().unwrap_or(0.0);
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if ratio < RANK_RATIO {
        return Err(Error::RankDeficient { ratio });
    }
    Ok(())
}

/// Numerical rank of a family of vectors (threshold relative to the largest singular value).
pub fn rank(vectors: &[Vector], rel_threshold: f64) -> usize {
    let sv = singular_values(vectors);
    let max = sv.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_threshold * max).count()
}

#[derive(Debug, Clone)]
pub struct NullspaceEstimate {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// Euclidean-orthonormal basis of the estimated common kernel.
    pub basis: Vec<Vector>,
    /// Ratio between the last retained and the first discarded singular value
    /// (infinite when nothing was discarded and nothing is close to the cut).
    pub gap_ratio: f64,
    pub conclusive: bool,
}

/// Common kernel of the row functionals.
///
/// Singular values below `rel_threshold * σ_max` count as zero. The estimate is
/// conclusive only when the singular values on either side of the cut are
/// separated by at least `min_gap`.
pub fn nullspace(rows: &[Vector], ncols: usize, rel_threshold: f64, min_gap: f64) -> NullspaceEstimate {
    let (values, vectors) = svd_sorted(matrix_from_rows(rows, ncols, ncols));
    let max = values.first().copied().unwrap_or(0.0);
    let cut = rel_threshold * max;
    let rank = values.iter().filter(|&&s| s > cut).count();
    let gap_ratio = if rank == 0 {
        f64::INFINITY
    } else if rank < values.len() {
        let below = values[rank];
        if below > 0.0 {
            values[rank - 1] / below
        } else {
            f64::INFINITY
        }
    } else {
        // full rank: the smallest retained value must sit clearly above the cut
        values[rank - 1] / cut
    };
    let basis = vectors[rank..].to_vec();
    NullspaceEstimate {
        singular_values: values,
        rank,
        basis,
        gap_ratio,
        conclusive: gap_ratio >= min_gap && max > 0.0,
    }
}

/// Coordinates left over after choosing one pivot coordinate per basis vector.
///
/// The returned slice spans a complement of `span(basis)`: embedding a vector
/// on these coordinates and quotienting by the span is a bijection.
pub fn complement_slice(basis: &[Vector], dim: usize) -> Vec<usize> {
    let mut rows: Vec<Vec<f64>> = basis.iter().map(|b| b.as_slice().to_vec()).collect();
    let mut pivots = Vec::new();
    for r in 0..rows.len() {
        let (col, _) = (0..dim)
            .filter(|c| !pivots.contains(c))
            .map(|c| (c, rows[r][c].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("basis smaller than dimension");
        pivots.push(col);
        let pivot_row = rows[r].clone();
        for other in rows.iter_mut().skip(r + 1) {
            let f = other[col] / pivot_row[col];
            for (o, p) in other.iter_mut().zip(&pivot_row) {
                *o -= f * p;
            }
        }
    }
    (0..dim).filter(|c| !pivots.contains(c)).collect()
}

/// Solves the square system `A x = b` given the columns of `A`.
pub fn solve_columns(columns: &[Vector], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let a = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
    let b = DVector::from_column_slice(rhs);
    a.lu().solve(&b).map(|x| x.iter().copied().collect())
}

/// Euclidean least squares `argmin_c |Σ cⱼ colⱼ − rhs|₂` for independent columns.
pub fn least_squares(columns: &[Vector], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let a = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
    let b = DVector::from_column_slice(rhs);
    a.svd(true, true)
        .solve(&b, 0.0)
        .ok()
        .map(|x| x.iter().copied().collect())
}
