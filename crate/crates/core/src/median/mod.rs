//! Medians of finite point clouds in R¹, R² and R³.

mod cloud;
pub(crate) mod kernels;
mod regularize;
pub(crate) mod solver;
mod whitening;

use nalgebra::{DMatrix, DVector};

pub use cloud::{PointCloud, ValuePoint};
pub use regularize::regularize_simplex;
pub use solver::{Descent, OjaKernel, SolverConfig, SolverReport};
pub use whitening::{covariance_whitening, WhiteningTransform, EPS_COV};

use crate::error::{invalid, Result};
use kernels::{
    Kernel, L1Kernel, OjaAreaPairs3, OjaPlanePairs, OjaPlaneSweep, OjaVolumeSweep,
    OjaVolumeTriples, V,
};
use solver::{is_flat, minimise, Outcome};
use whitening::principal_axes;

/// Relative variance below which a principal axis counts as absent.
const RANK_TOL: f64 = 1e-18;
/// Oja kernels switch to angular sweeps from these sizes under `OjaKernel::Auto`.
const PLANE_SWEEP_MIN: usize = 1500;
const VOLUME_SWEEP_MIN: usize = 300;
/// Flatness probing is skipped above this size.
const FLAT_PROBE_MAX: usize = 4096;
/// Relative sign floor of the Oja simplex terms.
const VOLUME_FLOOR: f64 = 1e-13;

/// Member of the cloud with the smallest distance sum; lowest index on ties.
pub fn medoid(cloud: &PointCloud) -> ValuePoint {
    let pts = cloud.points();
    let mut best = (f64::INFINITY, 0);
    for (i, p) in pts.iter().enumerate() {
        let s: f64 = pts.iter().map(|q| p.distance(q)).sum();
        if s < best.0 {
            best = (s, i);
        }
    }
    pts[best.1]
}

/// Median of scalars; the midpoint of the two middle values for even counts.
/// The flag is set when those two values differ.
pub fn univariate_median(values: &[f64]) -> (f64, bool) {
    assert!(!values.is_empty(), "median of an empty list");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        (v[n / 2], false)
    } else {
        let (a, b) = (v[n / 2 - 1], v[n / 2]);
        (0.5 * (a + b), a != b)
    }
}

fn check_dim(x: &ValuePoint, cloud: &PointCloud) -> Result<()> {
    if x.dim() != cloud.dim() {
        return Err(invalid(format!(
            "point of dimension {} against cloud of dimension {}",
            x.dim(),
            cloud.dim()
        )));
    }
    Ok(())
}

/// Σ‖x − x_i‖.
pub fn l1_objective(x: &ValuePoint, cloud: &PointCloud) -> Result<f64> {
    check_dim(x, cloud)?;
    Ok(cloud.iter().map(|p| x.distance(p)).sum())
}

/// Σ (x − x_i)/‖x − x_i‖, skipping terms closer than `distance_floor`.
pub fn l1_gradient(x: &ValuePoint, cloud: &PointCloud, distance_floor: f64) -> Result<ValuePoint> {
    check_dim(x, cloud)?;
    let n = x.dim();
    let mut g = [0.0; 3];
    for p in cloud {
        let r = x.distance(p);
        if r < distance_floor || r == 0.0 {
            continue;
        }
        for (i, gi) in g.iter_mut().enumerate().take(n) {
            *gi += (x[i] - p[i]) / r;
        }
    }
    Ok(ValuePoint::new(&g[..n]))
}

fn check_oja(cloud: &PointCloud, k: usize) -> Result<()> {
    if !(k == 2 || k == 3) || k > cloud.dim() {
        return Err(invalid(format!(
            "simplex dimension {k} not valid for values of dimension {}",
            cloud.dim()
        )));
    }
    if cloud.len() < k {
        return Err(invalid(format!("need at least {k} points, got {}", cloud.len())));
    }
    Ok(())
}

fn rms_radius(cloud: &PointCloud) -> f64 {
    cloud.covariance().trace().max(0.0).sqrt()
}

fn oja_floor(cloud: &PointCloud, k: usize) -> f64 {
    VOLUME_FLOOR * rms_radius(cloud).powi(k as i32)
}

/// Sum of simplex volumes (k = n) or of triangle areas (k = 2, n = 3).
pub fn oja_objective(x: &ValuePoint, cloud: &PointCloud, k: usize) -> Result<f64> {
    check_dim(x, cloud)?;
    check_oja(cloud, k)?;
    let floor = oja_floor(cloud, k);
    Ok(match (cloud.dim(), k) {
        (2, _) => OjaPlanePairs { pts: cloud.to_svectors::<2>(x), floor }.value(&V::<2>::zeros(), 0.0),
        (_, 3) => OjaVolumeTriples { pts: cloud.to_svectors::<3>(x), floor }.value(&V::<3>::zeros(), 0.0),
        _ => OjaAreaPairs3 { pts: cloud.to_svectors::<3>(x), floor }.value(&V::<3>::zeros(), 0.0),
    })
}

/// Gradient of [`oja_objective`]; degenerate simplices contribute nothing.
pub fn oja_gradient(x: &ValuePoint, cloud: &PointCloud, k: usize) -> Result<ValuePoint> {
    check_dim(x, cloud)?;
    check_oja(cloud, k)?;
    let floor = oja_floor(cloud, k);
    Ok(match (cloud.dim(), k) {
        (2, _) => {
            let g = OjaPlanePairs { pts: cloud.to_svectors::<2>(x), floor }.value_grad(&V::<2>::zeros(), 0.0).1;
            ValuePoint::from_svector(&g)
        }
        (_, 3) => {
            let g = OjaVolumeTriples { pts: cloud.to_svectors::<3>(x), floor }.value_grad(&V::<3>::zeros(), 0.0).1;
            ValuePoint::from_svector(&g)
        }
        _ => {
            let g = OjaAreaPairs3 { pts: cloud.to_svectors::<3>(x), floor }.value_grad(&V::<3>::zeros(), 0.0).1;
            ValuePoint::from_svector(&g)
        }
    })
}

fn constant_report(cloud: &PointCloud) -> Option<SolverReport> {
    let first = cloud.points()[0];
    cloud.iter().all(|p| *p == first).then_some(SolverReport {
        minimiser: first,
        iterations: 0,
        final_grad_norm: 0.0,
        converged: true,
        degenerate: false,
    })
}

fn rank(vals: &[f64]) -> usize {
    vals.iter().filter(|&&v| v > RANK_TOL * vals[0]).count()
}

/// Coordinates of the cloud in its top `r` principal axes.
struct Reduction {
    mean: ValuePoint,
    axes: DMatrix<f64>,
}

impl Reduction {
    fn new(cloud: &PointCloud, vecs: &DMatrix<f64>, r: usize) -> Self {
        Reduction {
            mean: cloud.mean(),
            axes: vecs.columns(0, r).into_owned(),
        }
    }

    fn project(&self, cloud: &PointCloud) -> Result<PointCloud> {
        cloud.map(|p| {
            let d = DVector::from_iterator(p.dim(), p.as_slice().iter().zip(self.mean.as_slice()).map(|(a, m)| a - m));
            ValuePoint::new((self.axes.transpose() * d).as_slice())
        })
    }

    fn lift(&self, y: &ValuePoint) -> ValuePoint {
        let x = &self.axes * DVector::from_column_slice(y.as_slice());
        let out: Vec<f64> = x.iter().zip(self.mean.as_slice()).map(|(a, m)| a + m).collect();
        ValuePoint::new(&out)
    }
}

fn line_median(cloud: &PointCloud, red: &Reduction, reduced: bool) -> Result<SolverReport> {
    let proj = red.project(cloud)?;
    let t: Vec<f64> = proj.iter().map(|p| p[0]).collect();
    let (m, interval) = univariate_median(&t);
    Ok(SolverReport {
        minimiser: red.lift(&ValuePoint::new(&[m])),
        iterations: 0,
        final_grad_norm: 0.0,
        converged: true,
        degenerate: interval || reduced,
    })
}

fn lift_report(red: &Reduction, r: SolverReport) -> SolverReport {
    SolverReport {
        minimiser: red.lift(&r.minimiser),
        degenerate: true,
        ..r
    }
}

fn finish<const D: usize>(x0: &ValuePoint, out: Outcome<D>, degenerate: bool) -> SolverReport {
    let x = x0.to_svector::<D>() + out.x;
    SolverReport {
        minimiser: ValuePoint::from_svector(&x),
        iterations: out.iterations,
        final_grad_norm: out.grad_norm,
        converged: out.converged,
        degenerate,
    }
}

fn solve_l1<const D: usize>(cloud: &PointCloud, cfg: &SolverConfig) -> SolverReport {
    let x0 = cloud.componentwise_median();
    let k = L1Kernel {
        pts: cloud.to_svectors::<D>(&x0),
        floor: cfg.distance_floor * cloud.bbox_diagonal(),
    };
    finish(&x0, minimise(&k, V::<D>::zeros(), rms_radius(cloud), cfg), false)
}

/// Spatial median: minimiser of Σ‖x − x_i‖.
pub fn l1_median(cloud: &PointCloud, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    if let Some(r) = constant_report(cloud) {
        return Ok(r);
    }
    let (vals, vecs) = principal_axes(cloud);
    if rank(&vals) == 1 {
        return line_median(cloud, &Reduction::new(cloud, &vecs, 1), false);
    }
    Ok(match cloud.dim() {
        2 => solve_l1::<2>(cloud, cfg),
        _ => solve_l1::<3>(cloud, cfg),
    })
}

fn run_oja<const D: usize, K: Kernel<D>>(
    k: &K,
    x0: &ValuePoint,
    scale: f64,
    n: usize,
    cfg: &SolverConfig,
) -> SolverReport {
    let out = minimise(k, V::<D>::zeros(), scale, cfg);
    let flat = n <= FLAT_PROBE_MAX && is_flat(k, &out.x, scale);
    finish(x0, out, flat)
}

fn solve_oja_full(cloud: &PointCloud, cfg: &SolverConfig) -> SolverReport {
    let x0 = cloud.componentwise_median();
    let scale = rms_radius(cloud);
    let n = cloud.len();
    let dim = cloud.dim();
    let sweep = match cfg.oja_kernel {
        OjaKernel::Sweep => true,
        OjaKernel::Subsets => false,
        OjaKernel::Auto => n >= if dim == 2 { PLANE_SWEEP_MIN } else { VOLUME_SWEEP_MIN },
    };
    let floor = oja_floor(cloud, dim);
    let dist_floor = 1e-12 * scale;
    match (dim, sweep) {
        (2, false) => run_oja(&OjaPlanePairs { pts: cloud.to_svectors::<2>(&x0), floor }, &x0, scale, n, cfg),
        (2, true) => run_oja(&OjaPlaneSweep { pts: cloud.to_svectors::<2>(&x0), floor: dist_floor }, &x0, scale, n, cfg),
        (_, false) => run_oja(&OjaVolumeTriples { pts: cloud.to_svectors::<3>(&x0), floor }, &x0, scale, n, cfg),
        (_, true) => run_oja(&OjaVolumeSweep { pts: cloud.to_svectors::<3>(&x0), floor: dist_floor }, &x0, scale, n, cfg),
    }
}

/// Oja median: minimiser of the summed volumes of simplices spanned by x
/// and k-subsets of the cloud. With k = 2 on values in R³ the summands are
/// triangle areas.
pub fn oja_median(cloud: &PointCloud, k: usize, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    check_oja(cloud, k)?;
    if let Some(r) = constant_report(cloud) {
        return Ok(r);
    }
    let (vals, vecs) = principal_axes(cloud);
    let r = rank(&vals);
    if r < k {
        let red = Reduction::new(cloud, &vecs, r);
        if r == 1 {
            return line_median(cloud, &red, cloud.dim() > 1);
        }
        let sub = oja_median(&red.project(cloud)?, r, cfg)?;
        return Ok(lift_report(&red, sub));
    }
    if k < cloud.dim() {
        if r < 3 {
            let red = Reduction::new(cloud, &vecs, r);
            let sub = oja_median(&red.project(cloud)?, 2, cfg)?;
            return Ok(SolverReport { degenerate: sub.degenerate, ..lift_report(&red, sub) });
        }
        let x0 = cloud.componentwise_median();
        let kern = OjaAreaPairs3 { pts: cloud.to_svectors::<3>(&x0), floor: oja_floor(cloud, 2) };
        return Ok(run_oja(&kern, &x0, rms_radius(cloud), cloud.len(), cfg));
    }
    if cfg.whiten_oja {
        let w = covariance_whitening(cloud)?;
        let rep = solve_oja_full(&w.apply_cloud(cloud)?, cfg);
        return Ok(SolverReport { minimiser: w.invert(&rep.minimiser), ..rep });
    }
    Ok(solve_oja_full(cloud, cfg))
}

/// Transformation–retransformation L1 median: whiten, take the L1 median,
/// map back.
pub fn trl1_median(cloud: &PointCloud, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let w = covariance_whitening(cloud)?;
    if w.degenerate {
        let mut r = l1_median(cloud, cfg)?;
        r.degenerate = true;
        return Ok(r);
    }
    let rep = l1_median(&w.apply_cloud(cloud)?, cfg)?;
    Ok(SolverReport { minimiser: w.invert(&rep.minimiser), ..rep })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(rows: &[[f64; 2]]) -> PointCloud {
        PointCloud::from_rows(rows).unwrap()
    }

    fn close(p: &ValuePoint, q: &[f64], tol: f64) -> bool {
        p.as_slice().iter().zip(q).all(|(a, b)| (a - b).abs() <= tol)
    }

    #[test]
    fn medoid_examples() {
        let c = cloud(&[[0.0, 0.0]]);
        assert_eq!(medoid(&c).as_slice(), &[0.0, 0.0]);
        let c = cloud(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.2, 0.2]]);
        assert_eq!(medoid(&c).as_slice(), &[0.2, 0.2]);
        let c = PointCloud::from_rows(&[[0.0], [1.0], [10.0]]).unwrap();
        assert_eq!(medoid(&c).as_slice(), &[1.0]);
    }

    #[test]
    fn l1_objective_and_gradient_examples() {
        let x = ValuePoint::new(&[0.0, 0.0]);
        let c = cloud(&[[1.0, 0.0], [-1.0, 0.0]]);
        assert_eq!(l1_objective(&x, &c).unwrap(), 2.0);
        assert_eq!(l1_gradient(&x, &c, 0.0).unwrap().as_slice(), &[0.0, 0.0]);
        let c = cloud(&[[3.0, 4.0]]);
        assert_eq!(l1_objective(&x, &c).unwrap(), 5.0);
        assert!(close(&l1_gradient(&x, &c, 0.0).unwrap(), &[-0.6, -0.8], 1e-15));
        let sq = cloud(&[[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]);
        let g = l1_gradient(&ValuePoint::new(&[1.0, 1.0]), &sq, 0.0).unwrap();
        assert!(close(&g, &[0.0, 0.0], 1e-15));
    }

    #[test]
    fn l1_median_geometry() {
        let cfg = SolverConfig::default();
        let sq = cloud(&[[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]);
        let r = l1_median(&sq, &cfg).unwrap();
        assert!(close(&r.minimiser, &[1.0, 1.0], 1e-7), "{r:?}");
        assert!(r.converged);
        let tri = cloud(&[[0.0, 0.0], [1.0, 0.0], [-0.866, 0.5]]);
        let r = l1_median(&tri, &cfg).unwrap();
        assert!(close(&r.minimiser, &[0.0, 0.0], 1e-7), "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn collinear_l1_takes_midpoint() {
        let c = cloud(&[[0.0, 0.0], [1.0, 1.0], [3.0, 3.0], [4.0, 4.0]]);
        let r = l1_median(&c, &SolverConfig::default()).unwrap();
        assert!(close(&r.minimiser, &[2.0, 2.0], 1e-12));
        assert!(r.degenerate);
    }

    #[test]
    fn oja_objective_examples() {
        let c = cloud(&[[0.0, 0.0], [2.0, 0.0]]);
        let v = oja_objective(&ValuePoint::new(&[1.0, 1.0]), &c, 2).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        assert!(oja_objective(&ValuePoint::new(&[1.0, 1.0]), &c, 3).is_err());
        let tri = cloud(&[[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]]);
        for x in [[1.0, 1.0], [0.5, 2.0], [2.0, 0.1]] {
            let v = oja_objective(&ValuePoint::new(&x), &tri, 2).unwrap();
            assert!((v - 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oja_median_geometry() {
        let cfg = SolverConfig::default();
        let sq = cloud(&[[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]);
        let r = oja_median(&sq, 2, &cfg).unwrap();
        assert!(close(&r.minimiser, &[1.0, 1.0], 1e-7), "{r:?}");
        let hull = cloud(&[[0.0, 0.0], [4.0, 0.0], [0.0, 4.0], [1.0, 1.0]]);
        let r = oja_median(&hull, 2, &cfg).unwrap();
        assert!(close(&r.minimiser, &[1.0, 1.0], 1e-7), "{r:?}");
        let tri = cloud(&[[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]]);
        assert!(oja_median(&tri, 2, &cfg).unwrap().degenerate);
    }

    #[test]
    fn coplanar_oja_reduces() {
        let c = PointCloud::from_rows(&[
            [0.0, 0.0, 1.0],
            [2.0, 0.0, 1.0],
            [2.0, 2.0, 1.0],
            [0.0, 2.0, 1.0],
        ])
        .unwrap();
        let r = oja_median(&c, 3, &SolverConfig::default()).unwrap();
        assert!(r.degenerate);
        assert!(close(&r.minimiser, &[1.0, 1.0, 1.0], 1e-7), "{r:?}");
    }

    #[test]
    fn trl1_square() {
        let sq = cloud(&[[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]]);
        let r = trl1_median(&sq, &SolverConfig::default()).unwrap();
        assert!(close(&r.minimiser, &[1.0, 1.0], 1e-7), "{r:?}");
    }

    #[test]
    fn univariate_examples() {
        assert_eq!(univariate_median(&[0.0, 10.0, 1.0]), (1.0, false));
        assert_eq!(univariate_median(&[0.0, 2.0, 4.0, 10.0]), (3.0, true));
        assert_eq!(univariate_median(&[1.0, 1.0]), (1.0, false));
    }
}
