use nalgebra::{Matrix3, SVector};

use crate::error::{invalid, Result};

/// A point in value space of dimension 1, 2 or 3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValuePoint {
    coords: [f64; 3],
    dim: usize,
}

impl ValuePoint {
    /// Panics unless `coords.len()` is 1, 2 or 3.
    pub fn new(coords: &[f64]) -> Self {
        assert!(
            (1..=3).contains(&coords.len()),
            "value dimension must be 1, 2 or 3, got {}",
            coords.len()
        );
        let mut c = [0.0; 3];
        c[..coords.len()].copy_from_slice(coords);
        ValuePoint {
            coords: c,
            dim: coords.len(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(&[0.0, 0.0, 0.0][..dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    /// Coordinates padded with zeros to length 3.
    pub fn padded(&self) -> [f64; 3] {
        self.coords
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }

    pub fn distance(&self, other: &ValuePoint) -> f64 {
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn to_svector<const D: usize>(self) -> SVector<f64, D> {
        SVector::<f64, D>::from_fn(|i, _| self.coords[i])
    }

    pub(crate) fn from_svector<const D: usize>(v: &SVector<f64, D>) -> Self {
        Self::new(v.as_slice())
    }
}

impl std::ops::Index<usize> for ValuePoint {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

/// A nonempty ordered list of points of one common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<ValuePoint>,
    dim: usize,
}

impl PointCloud {
    pub fn new(points: Vec<ValuePoint>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| invalid("point cloud must be nonempty"))?;
        let dim = first.dim();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(invalid(format!(
                "mixed dimensions in point cloud: {} and {}",
                dim,
                p.dim()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(invalid("point cloud contains non-finite coordinates"));
        }
        Ok(PointCloud { points, dim })
    }

    /// Builds a cloud from rows of coordinates.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        for r in rows {
            let len = r.as_ref().len();
            if !(1..=3).contains(&len) {
                return Err(invalid(format!("value dimension {len} not in 1..=3")));
            }
        }
        Self::new(rows.iter().map(|r| ValuePoint::new(r.as_ref())).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ValuePoint] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ValuePoint> {
        self.points.iter()
    }

    pub fn into_points(self) -> Vec<ValuePoint> {
        self.points
    }

    pub fn mean(&self) -> ValuePoint {
        let mut m = [0.0; 3];
        for p in &self.points {
            for (acc, v) in m.iter_mut().zip(p.as_slice()) {
                *acc += v;
            }
        }
        let n = self.len() as f64;
        ValuePoint::new(&m.map(|v| v / n)[..self.dim])
    }

    /// Population covariance about the mean, padded to 3×3.
    pub fn covariance(&self) -> Matrix3<f64> {
        let m = self.mean().padded();
        let mut c = Matrix3::zeros();
        for p in &self.points {
            let q = p.padded();
            for i in 0..self.dim {
                for j in 0..self.dim {
                    c[(i, j)] += (q[i] - m[i]) * (q[j] - m[j]);
                }
            }
        }
        c / self.len() as f64
    }

    /// Diagonal of the axis-aligned bounding box.
    pub fn bbox_diagonal(&self) -> f64 {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.points {
            for (i, v) in p.as_slice().iter().enumerate() {
                lo[i] = lo[i].min(*v);
                hi[i] = hi[i].max(*v);
            }
        }
        (0..self.dim)
            .map(|i| (hi[i] - lo[i]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest pairwise distance, O(N²).
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.max(a.distance(b));
            }
        }
        d
    }

    /// Per-coordinate median; the lower middle element for even sizes.
    pub fn componentwise_median(&self) -> ValuePoint {
        let mut out = [0.0; 3];
        let mut buf: Vec<f64> = Vec::with_capacity(self.len());
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            buf.clear();
            buf.extend(self.points.iter().map(|p| p[i]));
            let mid = (buf.len() - 1) / 2;
            let (_, v, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
            *o = *v;
        }
        ValuePoint::new(&out[..self.dim])
    }

    /// Applies `f` to every point.
    pub fn map(&self, f: impl Fn(&ValuePoint) -> ValuePoint) -> Result<Self> {
        Self::new(self.points.iter().map(f).collect())
    }

    pub(crate) fn to_svectors<const D: usize>(&self, origin: &ValuePoint) -> Vec<SVector<f64, D>> {
        let o = origin.to_svector::<D>();
        self.points.iter().map(|p| p.to_svector::<D>() - o).collect()
    }
}

impl<'a> IntoIterator for &'a PointCloud {
    type Item = &'a ValuePoint;
    type IntoIter = std::slice::Iter<'a, ValuePoint>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_mixed() {
        assert!(PointCloud::new(vec![]).is_err());
        let mixed = vec![ValuePoint::new(&[1.0]), ValuePoint::new(&[1.0, 2.0])];
        assert!(PointCloud::new(mixed).is_err());
        assert!(PointCloud::from_rows(&[[f64::NAN, 0.0]]).is_err());
    }

    #[test]
    fn covariance_is_population() {
        let c = PointCloud::from_rows(&[[1.0, 0.0], [-1.0, 0.0]]).unwrap();
        let cov = c.covariance();
        assert_eq!(cov[(0, 0)], 1.0);
        assert_eq!(cov[(1, 1)], 0.0);
    }

    #[test]
    fn componentwise_median_takes_lower_middle() {
        let c = PointCloud::from_rows(&[[3.0, 1.0], [1.0, 4.0], [2.0, 2.0], [0.0, 3.0]]).unwrap();
        assert_eq!(c.componentwise_median().as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn diameter_and_bbox() {
        let c = PointCloud::from_rows(&[[0.0, 0.0], [3.0, 4.0], [1.0, 1.0]]).unwrap();
        assert_eq!(c.diameter(), 5.0);
        assert_eq!(c.bbox_diagonal(), 5.0);
    }
}
