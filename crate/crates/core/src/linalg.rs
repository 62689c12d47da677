//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

pub fn hcat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows(), "hcat: row counts differ");
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn vcat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.ncols(), "vcat: column counts differ");
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

pub fn vcat_vec(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(a.len() + b.len());
    out.rows_mut(0, a.len()).copy_from(a);
    out.rows_mut(a.len(), b.len()).copy_from(b);
    out
}

pub fn blkdiag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// `M diag(d)`.
pub fn scale_columns(m: &DMatrix<f64>, d: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= d[j];
    }
    out
}

/// ‖row i of M‖₁.
pub fn row_l1(m: &DMatrix<f64>, i: usize) -> f64 {
    m.row(i).iter().map(|v| v.abs()).sum()
}

/// `|M| 1`.
pub fn abs_row_sums(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_fn(m.nrows(), |i, _| row_l1(m, i))
}

/// Ratio of extreme singular values; infinite for rank-deficient or empty input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Orthonormal basis of the null space of `m`, one column per basis vector.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // Pad to at least n rows so the thin SVD returns a full right basis.
    let padded = if m.nrows() < n {
        vcat(m, &DMatrix::zeros(n - m.nrows(), n))
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let scale = svd.singular_values.max().max(1.0);
    let cols: Vec<DVector<f64>> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= tol * scale)
        .map(|k| vt.row(k).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Moore–Penrose pseudo-inverse.
pub fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.is_empty() {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let eps = 1e-12 * m.amax().max(1.0);
    m.clone()
        .pseudo_inverse(eps)
        .unwrap_or_else(|_| DMatrix::zeros(m.ncols(), m.nrows()))
}

pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    m.rank(tol * m.amax().max(1.0))
}

/// Row-major nested vectors → matrix. `ncols` fixes the width of empty input.
pub fn from_rows(rows: &[Vec<f64>], ncols: usize) -> Option<DMatrix<f64>> {
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Fixed pseudo-random unit directions used for support-function comparisons.
pub fn test_directions(n: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let norm = v.norm();
            if norm > 1e-3 && norm <= 1.0 {
                break v / norm;
            }
        })
        .collect()
}

/// Serde adapter: matrix as row-major nested arrays.
pub mod serde_mat {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        super::to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let width = rows.first().map_or(0, Vec::len);
        super::from_rows(&rows, width).ok_or_else(|| serde::de::Error::custom("ragged matrix rows"))
    }
}

/// Serde adapter: vector as a flat array.
pub mod serde_vec {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        Ok(DVector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concatenation_shapes() {
        let a = DMatrix::from_element(2, 3, 1.0);
        let b = DMatrix::from_element(2, 1, 2.0);
        assert_eq!(hcat(&a, &b).shape(), (2, 4));
        assert_eq!(blkdiag(&a, &b).shape(), (4, 4));
        assert_eq!(blkdiag(&a, &b)[(3, 3)], 2.0);
        assert_eq!(blkdiag(&a, &b)[(3, 0)], 0.0);
    }

    #[test]
    fn null_space_of_row() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).amax() < 1e-12);
    }

    #[test]
    fn singular_condition() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(condition_number(&m) > 1e12);
        assert!((condition_number(&DMatrix::identity(3, 3)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn directions_are_unit_and_reproducible() {
        let d1 = test_directions(3, 8, 7);
        let d2 = test_directions(3, 8, 7);
        assert_eq!(d1, d2);
        assert!(d1.iter().all(|d| (d.norm() - 1.0).abs() < 1e-12));
    }
}
