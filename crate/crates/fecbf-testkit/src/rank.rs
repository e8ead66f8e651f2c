//! SVD-based numerical rank for the nullspace-dimension tests.

use fecbf_core::RowMat;
use nalgebra::DMatrix;

/// Rank by singular-value thresholding at `1e−10 · σ_max`.
pub fn numerical_rank(m: &RowMat) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let dm = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m.get(i, j));
    let svd = dm.svd(false, false);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > 1e-10 * sigma_max).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_rank_one_matrix() {
        let mut m = RowMat::with_cols(3);
        m.push_row(&[1.0, 2.0, 3.0]);
        m.push_row(&[2.0, 4.0, 6.0]);
        m.push_row(&[-1.0, -2.0, -3.0]);
        assert_eq!(numerical_rank(&m), 1);
    }

    #[test]
    fn rank_of_identity() {
        let mut m = RowMat::with_cols(2);
        m.push_row(&[1.0, 0.0]);
        m.push_row(&[0.0, 1.0]);
        assert_eq!(numerical_rank(&m), 2);
    }
}
