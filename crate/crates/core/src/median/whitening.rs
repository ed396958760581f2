use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::cloud::{PointCloud, ValuePoint};
use crate::error::{invalid, Result};

/// Eigenvalues below this fraction of the largest are clamped.
pub const EPS_COV: f64 = 1e-8;
/// Below this largest eigenvalue the cloud counts as a single point.
const ABS_FLOOR: f64 = 1e-30;

/// Affine map x ↦ T(x − mean) that whitens a cloud.
#[derive(Clone, Debug, PartialEq)]
pub struct WhiteningTransform {
    pub matrix: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    /// Covariance eigenvalues, descending, before clamping.
    pub eigenvalues: Vec<f64>,
    pub mean: ValuePoint,
    /// No usable spread: the transform is the identity.
    pub degenerate: bool,
}

impl WhiteningTransform {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, p: &ValuePoint) -> ValuePoint {
        let d = DVector::from_iterator(
            self.dim(),
            p.as_slice().iter().zip(self.mean.as_slice()).map(|(a, m)| a - m),
        );
        ValuePoint::new((&self.matrix * d).as_slice())
    }

    pub fn invert(&self, p: &ValuePoint) -> ValuePoint {
        let y = DVector::from_column_slice(p.as_slice());
        let x = &self.inverse * y;
        let out: Vec<f64> = x.iter().zip(self.mean.as_slice()).map(|(a, m)| a + m).collect();
        ValuePoint::new(&out)
    }

    pub fn apply_cloud(&self, cloud: &PointCloud) -> Result<PointCloud> {
        cloud.map(|p| self.apply(p))
    }
}

/// Principal axes of the cloud: (eigenvalues descending, eigenvectors as columns).
pub(crate) fn principal_axes(cloud: &PointCloud) -> (Vec<f64>, DMatrix<f64>) {
    let n = cloud.dim();
    let c3 = cloud.covariance();
    let c = DMatrix::from_fn(n, n, |i, j| c3[(i, j)]);
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Principal-axis whitening T = Λ^{-1/2} Pᵀ of the population covariance.
pub fn covariance_whitening(cloud: &PointCloud) -> Result<WhiteningTransform> {
    let n = cloud.dim();
    if cloud.len() < n + 1 {
        return Err(invalid(format!(
            "whitening needs at least {} points, got {}",
            n + 1,
            cloud.len()
        )));
    }
    let (vals, vecs) = principal_axes(cloud);
    let mean = cloud.mean();
    if vals[0] < ABS_FLOOR {
        let id = DMatrix::identity(n, n);
        return Ok(WhiteningTransform {
            matrix: id.clone(),
            inverse: id,
            eigenvalues: vals,
            mean,
            degenerate: true,
        });
    }
    let floor = EPS_COV * vals[0];
    let root: Vec<f64> = vals.iter().map(|v| v.max(floor).sqrt()).collect();
    let matrix = DMatrix::from_fn(n, n, |r, c| vecs[(c, r)] / root[r]);
    let inverse = DMatrix::from_fn(n, n, |r, c| vecs[(r, c)] * root[c]);
    Ok(WhiteningTransform {
        matrix,
        inverse,
        eigenvalues: vals,
        mean,
        degenerate: false,
    })
}
