use super::cloud::{PointCloud, ValuePoint};
use crate::error::{invalid, Result};

/// Corners of the canonical regular simplex with circumradius 1.
fn unit_simplex(n: usize) -> Vec<[f64; 3]> {
    let s3 = 3f64.sqrt() / 2.0;
    match n {
        1 => vec![[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
        2 => vec![[0.0, 1.0, 0.0], [-s3, -0.5, 0.0], [s3, -0.5, 0.0]],
        _ => {
            let r = 8f64.sqrt() / 3.0;
            let z = -1.0 / 3.0;
            vec![
                [0.0, 0.0, 1.0],
                [0.0, r, z],
                [-s3 * r, -0.5 * r, z],
                [s3 * r, -0.5 * r, z],
            ]
        }
    }
}

/// Replaces every point by the n+1 corners of a regular simplex of
/// circumradius `h` centred on it.
pub fn regularize_simplex(cloud: &PointCloud, h: f64) -> Result<PointCloud> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("simplex radius must be positive, got {h}")));
    }
    let n = cloud.dim();
    let corners = unit_simplex(n);
    let mut out = Vec::with_capacity(cloud.len() * (n + 1));
    for p in cloud {
        for c in &corners {
            let q: Vec<f64> = (0..n).map(|i| p[i] + h * c[i]).collect();
            out.push(ValuePoint::new(&q));
        }
    }
    PointCloud::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_corners_at_fixed_angles() {
        let c = PointCloud::from_rows(&[[0.0, 0.0]]).unwrap();
        let r = regularize_simplex(&c, 1.0).unwrap();
        for (p, deg) in r.iter().zip([90.0f64, 210.0, 330.0]) {
            let a = deg.to_radians();
            assert!((p[0] - a.cos()).abs() < 1e-15 && (p[1] - a.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn corners_are_regular() {
        for n in 1..=3 {
            let s = unit_simplex(n);
            let mut mean = [0.0; 3];
            for c in &s {
                let norm: f64 = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-15);
                for i in 0..3 {
                    mean[i] += c[i];
                }
            }
            assert!(mean.iter().all(|m| m.abs() < 1e-15));
            let d0: f64 = (0..3).map(|i| (s[0][i] - s[1][i]).powi(2)).sum();
            for a in 0..s.len() {
                for b in a + 1..s.len() {
                    let d: f64 = (0..3).map(|i| (s[a][i] - s[b][i]).powi(2)).sum();
                    assert!((d - d0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn rejects_nonpositive_radius() {
        let c = PointCloud::from_rows(&[[0.0, 0.0]]).unwrap();
        assert!(regularize_simplex(&c, 0.0).is_err());
    }
}
