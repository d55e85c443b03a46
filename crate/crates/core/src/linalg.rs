//! Dense SVD backed by faer, in nalgebra types.

use faer::Mat;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Thin SVD `A = U diag(s) V^T` with singular values in descending order.
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub vt: DMatrix<f64>,
}

pub(crate) fn thin_svd(a: &DMatrix<f64>) -> Result<Svd> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::invalid("SVD of an empty matrix"));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("SVD of a matrix with non-finite entries"));
    }
    let fa = Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let svd = fa
        .thin_svd()
        .map_err(|e| Error::DegenerateTrialSpace(format!("SVD did not converge: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = s.nrows();
    Ok(Svd {
        u: DMatrix::from_fn(m, k, |i, j| u[(i, j)]),
        s: DVector::from_fn(k, |i, _| s[i]),
        vt: DMatrix::from_fn(k, n, |i, j| v[(j, i)]),
    })
}
