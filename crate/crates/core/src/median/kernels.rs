//! Objective kernels shared by the solvers.
//!
//! Every kernel works on points already shifted so that the solver's start
//! point sits at the origin. Smooth kernels replace each nonsmooth term |t|
//! by sqrt(t² + μ²); with μ = 0 they evaluate the exact objective and skip
//! terms whose magnitude is below the kernel's floor.

use nalgebra::{SMatrix, SVector, Vector2, Vector3};
use rayon::prelude::*;

pub(crate) type V<const D: usize> = SVector<f64, D>;
pub(crate) type M<const D: usize> = SMatrix<f64, D, D>;

/// Rows handled sequentially below this count.
const PAR_MIN: usize = 256;
/// Largest subsample used for approximate Hessians of pair kernels.
const HESSIAN_SAMPLE: usize = 2048;

pub(crate) trait Kernel<const D: usize>: Sync {
    /// Homogeneity degree of one term in the data scale.
    fn degree(&self) -> i32;
    fn term_count(&self) -> f64;
    /// True when μ > 0 and Hessians are supported.
    fn smooth(&self) -> bool;
    fn value(&self, x: &V<D>, mu: f64) -> f64;
    fn value_grad(&self, x: &V<D>, mu: f64) -> (f64, V<D>);
    fn hessian(&self, x: &V<D>, mu: f64) -> M<D>;
}

/// Sums `f(i)` for `i in 0..n` in a fixed order regardless of scheduling.
pub(crate) fn ordered_sum<T, F>(n: usize, zero: T, f: F) -> T
where
    T: Send + Copy + std::ops::Add<Output = T>,
    F: Fn(usize) -> T + Sync,
{
    if n < PAR_MIN {
        (0..n).fold(zero, |acc, i| acc + f(i))
    } else {
        let parts: Vec<T> = (0..n).into_par_iter().map(&f).collect();
        parts.into_iter().fold(zero, |acc, v| acc + v)
    }
}

#[derive(Clone, Copy)]
struct Vg<const D: usize>(f64, V<D>);

impl<const D: usize> std::ops::Add for Vg<D> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vg(self.0 + o.0, self.1 + o.1)
    }
}

#[derive(Clone, Copy)]
struct Hs<const D: usize>(M<D>);

impl<const D: usize> std::ops::Add for Hs<D> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Hs(self.0 + o.0)
    }
}

fn smooth_abs(t: f64, mu: f64) -> f64 {
    if mu > 0.0 {
        (t * t + mu * mu).sqrt()
    } else {
        t.abs()
    }
}

/// Derivative of `smooth_abs`, with the floor rule at μ = 0.
fn smooth_sign(t: f64, mu: f64, floor: f64) -> f64 {
    if mu > 0.0 {
        t / (t * t + mu * mu).sqrt()
    } else if t.abs() <= floor {
        0.0
    } else {
        t.signum()
    }
}

fn subsample_stride(n: usize) -> usize {
    n.div_ceil(HESSIAN_SAMPLE).max(1)
}

// ---------------------------------------------------------------- L1

pub(crate) struct L1Kernel<const D: usize> {
    pub pts: Vec<V<D>>,
    pub floor: f64,
}

impl<const D: usize> Kernel<D> for L1Kernel<D> {
    fn degree(&self) -> i32 {
        1
    }

    fn term_count(&self) -> f64 {
        self.pts.len() as f64
    }

    fn smooth(&self) -> bool {
        true
    }

    fn value(&self, x: &V<D>, mu: f64) -> f64 {
        ordered_sum(self.pts.len(), 0.0, |i| {
            smooth_abs((x - self.pts[i]).norm(), mu)
        })
    }

    fn value_grad(&self, x: &V<D>, mu: f64) -> (f64, V<D>) {
        let Vg(f, g) = ordered_sum(self.pts.len(), Vg(0.0, V::<D>::zeros()), |i| {
            let d = x - self.pts[i];
            let r = d.norm();
            let phi = smooth_abs(r, mu);
            if mu == 0.0 && r < self.floor {
                Vg(phi, V::<D>::zeros())
            } else {
                Vg(phi, d / phi)
            }
        });
        (f, g)
    }

    fn hessian(&self, x: &V<D>, mu: f64) -> M<D> {
        let Hs(h) = ordered_sum(self.pts.len(), Hs(M::<D>::zeros()), |i| {
            let d = x - self.pts[i];
            let r2 = d.norm_squared() + mu * mu;
            let phi = r2.sqrt();
            if phi < self.floor {
                return Hs(M::<D>::zeros());
            }
            Hs(M::<D>::identity() / phi - d * d.transpose() / (phi * r2))
        });
        h
    }
}

// ------------------------------------------------- Oja, triangles in the plane

fn perp(v: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(v.y, -v.x)
}

fn det2(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Sum of triangle areas over all pairs, O(N²).
pub(crate) struct OjaPlanePairs {
    pub pts: Vec<Vector2<f64>>,
    pub floor: f64,
}

impl Kernel<2> for OjaPlanePairs {
    fn degree(&self) -> i32 {
        2
    }

    fn term_count(&self) -> f64 {
        let n = self.pts.len() as f64;
        n * (n - 1.0) / 2.0
    }

    fn smooth(&self) -> bool {
        true
    }

    fn value(&self, x: &V<2>, mu: f64) -> f64 {
        ordered_sum(self.pts.len(), 0.0, |i| {
            let a = self.pts[i] - x;
            self.pts[i + 1..]
                .iter()
                .map(|p| 0.5 * smooth_abs(det2(&a, &(p - x)), mu))
                .sum::<f64>()
        })
    }

    fn value_grad(&self, x: &V<2>, mu: f64) -> (f64, V<2>) {
        let Vg(f, g) = ordered_sum(self.pts.len(), Vg(0.0, V::<2>::zeros()), |i| {
            let a = self.pts[i] - x;
            let mut acc = Vg(0.0, V::<2>::zeros());
            for p in &self.pts[i + 1..] {
                let b = p - x;
                let l = det2(&a, &b);
                acc.0 += 0.5 * smooth_abs(l, mu);
                acc.1 += perp(&(a - b)) * (0.5 * smooth_sign(l, mu, self.floor));
            }
            acc
        });
        (f, g)
    }

    fn hessian(&self, x: &V<2>, mu: f64) -> M<2> {
        let Hs(h) = ordered_sum(self.pts.len(), Hs(M::<2>::zeros()), |i| {
            let a = self.pts[i] - x;
            let mut acc = M::<2>::zeros();
            for p in &self.pts[i + 1..] {
                let b = p - x;
                let l = det2(&a, &b);
                let r2 = l * l + mu * mu;
                let w = 0.5 * mu * mu / (r2 * r2.sqrt());
                let gl = perp(&(a - b));
                acc += gl * gl.transpose() * w;
            }
            Hs(acc)
        });
        h
    }
}

// ------------------------------------------------- Oja, tetrahedra in space

/// Sum of tetrahedron volumes over all triples, O(N³).
pub(crate) struct OjaVolumeTriples {
    pub pts: Vec<Vector3<f64>>,
    pub floor: f64,
}

impl OjaVolumeTriples {
    fn fold_row<T: Copy + std::ops::Add<Output = T>>(
        &self,
        x: &V<3>,
        i: usize,
        zero: T,
        f: impl Fn(f64, Vector3<f64>) -> T,
    ) -> T {
        let n = self.pts.len();
        let a = self.pts[i] - x;
        let mut acc = zero;
        for j in i + 1..n {
            let b = self.pts[j] - x;
            let ab = a.cross(&b);
            for k in j + 1..n {
                let c = self.pts[k] - x;
                let l = ab.dot(&c);
                let grad = -(b.cross(&c) + c.cross(&a) + ab);
                acc = acc + f(l, grad);
            }
        }
        acc
    }
}

impl Kernel<3> for OjaVolumeTriples {
    fn degree(&self) -> i32 {
        3
    }

    fn term_count(&self) -> f64 {
        let n = self.pts.len() as f64;
        n * (n - 1.0) * (n - 2.0) / 6.0
    }

    fn smooth(&self) -> bool {
        true
    }

    fn value(&self, x: &V<3>, mu: f64) -> f64 {
        ordered_sum(self.pts.len(), 0.0, |i| {
            let n = self.pts.len();
            let a = self.pts[i] - x;
            let mut acc = 0.0;
            for j in i + 1..n {
                let ab = a.cross(&(self.pts[j] - x));
                for k in j + 1..n {
                    acc += smooth_abs(ab.dot(&(self.pts[k] - x)), mu) / 6.0;
                }
            }
            acc
        })
    }

    fn value_grad(&self, x: &V<3>, mu: f64) -> (f64, V<3>) {
        let Vg(f, g) = ordered_sum(self.pts.len(), Vg(0.0, V::<3>::zeros()), |i| {
            self.fold_row(x, i, Vg(0.0, V::<3>::zeros()), |l, gl| {
                Vg(
                    smooth_abs(l, mu) / 6.0,
                    gl * (smooth_sign(l, mu, self.floor) / 6.0),
                )
            })
        });
        (f, g)
    }

    fn hessian(&self, x: &V<3>, mu: f64) -> M<3> {
        let Hs(h) = ordered_sum(self.pts.len(), Hs(M::<3>::zeros()), |i| {
            self.fold_row(x, i, Hs(M::<3>::zeros()), |l, gl| {
                let r2 = l * l + mu * mu;
                Hs(gl * gl.transpose() * (mu * mu / (6.0 * r2 * r2.sqrt())))
            })
        });
        h
    }
}

// ------------------------------------------------- Oja, triangles in space

/// Sum of triangle areas in R³ over all pairs, O(N²).
pub(crate) struct OjaAreaPairs3 {
    pub pts: Vec<Vector3<f64>>,
    pub floor: f64,
}

impl Kernel<3> for OjaAreaPairs3 {
    fn degree(&self) -> i32 {
        2
    }

    fn term_count(&self) -> f64 {
        let n = self.pts.len() as f64;
        n * (n - 1.0) / 2.0
    }

    fn smooth(&self) -> bool {
        true
    }

    fn value(&self, x: &V<3>, mu: f64) -> f64 {
        let mu2 = mu * mu;
        ordered_sum(self.pts.len(), 0.0, |i| {
            let a = self.pts[i] - x;
            self.pts[i + 1..]
                .iter()
                .map(|p| 0.5 * (a.cross(&(p - x)).norm_squared() + mu2).sqrt())
                .sum::<f64>()
        })
    }

    fn value_grad(&self, x: &V<3>, mu: f64) -> (f64, V<3>) {
        let mu2 = mu * mu;
        let Vg(f, g) = ordered_sum(self.pts.len(), Vg(0.0, V::<3>::zeros()), |i| {
            let a = self.pts[i] - x;
            let mut acc = Vg(0.0, V::<3>::zeros());
            for p in &self.pts[i + 1..] {
                let b = p - x;
                let c = a.cross(&b);
                let phi = (c.norm_squared() + mu2).sqrt();
                acc.0 += 0.5 * phi;
                if mu > 0.0 || phi >= self.floor {
                    acc.1 += c.cross(&(b - a)) * (0.5 / phi);
                }
            }
            acc
        });
        (f, g)
    }

    fn hessian(&self, x: &V<3>, mu: f64) -> M<3> {
        let mu2 = mu * mu;
        let n = self.pts.len();
        let stride = subsample_stride(n);
        let idx: Vec<usize> = (0..n).step_by(stride).collect();
        let m = idx.len();
        let Hs(h) = ordered_sum(m, Hs(M::<3>::zeros()), |ii| {
            let a = self.pts[idx[ii]] - x;
            let mut acc = M::<3>::zeros();
            for &jj in &idx[ii + 1..] {
                let b = self.pts[jj] - x;
                let e = b - a;
                let c = a.cross(&b);
                let r2 = c.norm_squared() + mu2;
                let phi = r2.sqrt();
                if phi < self.floor {
                    continue;
                }
                let ce = c.cross(&e);
                acc += (M::<3>::identity() * e.norm_squared() - e * e.transpose()) * (0.5 / phi)
                    - ce * ce.transpose() * (0.5 / (phi * r2));
            }
            Hs(acc)
        });
        let mf = m as f64;
        h * (self.term_count() / (mf * (mf - 1.0) / 2.0).max(1.0))
    }
}

// ------------------------------------------------- angular sweeps

/// Angles closer than this count as collinear. Lattice data has many exactly
/// collinear triples, and the rounding in `atan2` would otherwise settle each
/// tie differently from each vertex, so the gradient terms stop cancelling.
const ANGLE_TIE: f64 = 1e-11;

/// Signed half-plane counts of a set of planar vectors.
///
/// For every vector p_b returns S_b = Σ_c sign det(p_b, p_c) and, when asked,
/// W_b = Σ_c sign det(p_b, p_c) · p_c. Vectors must be nonzero.
pub(crate) fn angular_sweep(p: &[Vector2<f64>], want_w: bool) -> (Vec<i64>, Vec<Vector2<f64>>) {
    use std::f64::consts::PI;
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    let theta: Vec<f64> = p.iter().map(|v| v.y.atan2(v.x)).collect();
    order.sort_by(|&a, &b| theta[a].total_cmp(&theta[b]).then(a.cmp(&b)));
    let mut th2 = Vec::with_capacity(2 * m);
    th2.extend(order.iter().map(|&i| theta[i]));
    th2.extend(order.iter().map(|&i| theta[i] + 2.0 * PI));
    let mut prefix = Vec::new();
    if want_w {
        prefix.reserve(2 * m + 1);
        prefix.push(Vector2::zeros());
        let mut acc = Vector2::zeros();
        for r in 0..2 * m {
            acc += p[order[r % m]];
            prefix.push(acc);
        }
    }
    let mut s = vec![0i64; m];
    let mut w = vec![Vector2::zeros(); if want_w { m } else { 0 }];
    for k in 0..m {
        let t = th2[k];
        let win = &th2[k + 1..k + m];
        let base = k + 1;
        let l0 = base + win.partition_point(|&v| v <= t + ANGLE_TIE);
        let l1 = base + win.partition_point(|&v| v < t + PI - ANGLE_TIE);
        let r0 = base + win.partition_point(|&v| v <= t + PI + ANGLE_TIE);
        let r1 = base + win.partition_point(|&v| v < t + 2.0 * PI - ANGLE_TIE);
        let b = order[k];
        s[b] = (l1 - l0) as i64 - (r1 - r0) as i64;
        if want_w {
            w[b] = (prefix[l1] - prefix[l0]) - (prefix[r1] - prefix[r0]);
        }
    }
    (s, w)
}

/// Planar Oja objective by angular sweep, O(N log N) per evaluation.
pub(crate) struct OjaPlaneSweep {
    pub pts: Vec<Vector2<f64>>,
    pub floor: f64,
}

impl OjaPlaneSweep {
    fn eval(&self, x: &V<2>) -> (f64, V<2>) {
        let d: Vec<Vector2<f64>> = self
            .pts
            .iter()
            .map(|p| p - x)
            .filter(|v| v.norm() >= self.floor)
            .collect();
        let (s, w) = angular_sweep(&d, true);
        let mut f = 0.0;
        let mut g = V::<2>::zeros();
        for i in 0..d.len() {
            f += det2(&d[i], &w[i]);
            g += d[i] * s[i] as f64;
        }
        (0.25 * f, perp(&g) * 0.5)
    }
}

impl Kernel<2> for OjaPlaneSweep {
    fn degree(&self) -> i32 {
        2
    }

    fn term_count(&self) -> f64 {
        let n = self.pts.len() as f64;
        n * (n - 1.0) / 2.0
    }

    fn smooth(&self) -> bool {
        false
    }

    fn value(&self, x: &V<2>, _mu: f64) -> f64 {
        self.eval(x).0
    }

    fn value_grad(&self, x: &V<2>, _mu: f64) -> (f64, V<2>) {
        self.eval(x)
    }

    fn hessian(&self, _x: &V<2>, _mu: f64) -> M<2> {
        M::<2>::zeros()
    }
}

/// Spatial Oja objective by one planar sweep per point, O(N² log N).
pub(crate) struct OjaVolumeSweep {
    pub pts: Vec<Vector3<f64>>,
    pub floor: f64,
}

fn plane_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vector3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let e1 = n.cross(&helper).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

impl OjaVolumeSweep {
    fn eval(&self, x: &V<3>) -> (f64, V<3>) {
        let d: Vec<Vector3<f64>> = self
            .pts
            .iter()
            .map(|p| p - x)
            .filter(|v| v.norm() >= self.floor)
            .collect();
        let planar_floor = self.floor;
        let Vg(f, g) = ordered_sum(d.len(), Vg(0.0, V::<3>::zeros()), |a| {
            let da = d[a];
            let len = da.norm();
            let n = da / len;
            let (e1, e2) = plane_basis(&n);
            let mut q = Vec::with_capacity(d.len());
            let mut ids = Vec::with_capacity(d.len());
            for (b, db) in d.iter().enumerate() {
                if b == a {
                    continue;
                }
                let v = Vector2::new(db.dot(&e1), db.dot(&e2));
                if v.norm() >= planar_floor {
                    q.push(v);
                    ids.push(b);
                }
            }
            let (s, w) = angular_sweep(&q, true);
            let mut area = 0.0;
            let mut va = V::<3>::zeros();
            for r in 0..q.len() {
                area += det2(&q[r], &w[r]);
                va += d[ids[r]] * s[r] as f64;
            }
            Vg(0.5 * area * len, da.cross(&va))
        });
        (f / 18.0, -g / 12.0)
    }
}

impl Kernel<3> for OjaVolumeSweep {
    fn degree(&self) -> i32 {
        3
    }

    fn term_count(&self) -> f64 {
        let n = self.pts.len() as f64;
        n * (n - 1.0) * (n - 2.0) / 6.0
    }

    fn smooth(&self) -> bool {
        false
    }

    fn value(&self, x: &V<3>, _mu: f64) -> f64 {
        self.eval(x).0
    }

    fn value_grad(&self, x: &V<3>, _mu: f64) -> (f64, V<3>) {
        self.eval(x)
    }

    fn hessian(&self, _x: &V<3>, _mu: f64) -> M<3> {
        M::<3>::zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand2(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vector2<f64>> {
        (0..n)
            .map(|_| Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn rand3(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vector3<f64>> {
        (0..n)
            .map(|_| {
                Vector3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect()
    }

    #[test]
    fn sweep_counts_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = rand2(&mut rng, 57);
        let (s, w) = angular_sweep(&p, true);
        for b in 0..p.len() {
            let mut sb = 0i64;
            let mut wb = Vector2::zeros();
            for c in 0..p.len() {
                let sg = det2(&p[b], &p[c]).signum() as i64;
                let sg = if c == b { 0 } else { sg };
                sb += sg;
                wb += p[c] * sg as f64;
            }
            assert_eq!(s[b], sb);
            assert!((w[b] - wb).norm() < 1e-12);
        }
    }

    #[test]
    fn plane_sweep_matches_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = rand2(&mut rng, 80);
        let pairs = OjaPlanePairs { pts: pts.clone(), floor: 1e-14 };
        let sweep = OjaPlaneSweep { pts, floor: 1e-14 };
        let x = Vector2::new(0.13, -0.07);
        let (f1, g1) = pairs.value_grad(&x, 0.0);
        let (f2, g2) = sweep.value_grad(&x, 0.0);
        assert!((f1 - f2).abs() < 1e-10 * f1);
        assert!((g1 - g2).norm() < 1e-10 * g1.norm().max(1.0));
    }

    #[test]
    fn volume_sweep_matches_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = rand3(&mut rng, 40);
        let triples = OjaVolumeTriples { pts: pts.clone(), floor: 1e-14 };
        let sweep = OjaVolumeSweep { pts, floor: 1e-14 };
        let x = Vector3::new(0.05, 0.1, -0.12);
        let (f1, g1) = triples.value_grad(&x, 0.0);
        let (f2, g2) = sweep.value_grad(&x, 0.0);
        assert!((f1 - f2).abs() < 1e-10 * f1, "{f1} {f2}");
        assert!((g1 - g2).norm() < 1e-9 * g1.norm().max(1.0), "{g1} {g2}");
    }

    #[test]
    fn sweeps_match_subsets_on_lattices() {
        // Grid data is full of collinear triples, which stress tie handling.
        let mut p2 = Vec::new();
        let mut p3 = Vec::new();
        for i in -3..=3 {
            for j in -3..=3 {
                let (x, y) = (i as f64 * 0.25, j as f64 * 0.25);
                p2.push(Vector2::new(x + 0.05 * y * y, y));
                for k in -2..=2 {
                    let z = k as f64 * 0.25;
                    p3.push(Vector3::new(x + 0.05 * y * y, y, z));
                }
            }
        }
        let x2 = Vector2::new(0.031, -0.0123);
        let (f1, g1) = OjaPlanePairs { pts: p2.clone(), floor: 1e-14 }.value_grad(&x2, 0.0);
        let (f2, g2) = OjaPlaneSweep { pts: p2, floor: 1e-14 }.value_grad(&x2, 0.0);
        assert!((f1 - f2).abs() < 1e-10 * f1);
        assert!((g1 - g2).norm() < 1e-10 * g1.norm(), "{g1} {g2}");
        let x3 = Vector3::new(0.0031, 0.0123, -0.0271);
        let (f1, g1) = OjaVolumeTriples { pts: p3.clone(), floor: 1e-14 }.value_grad(&x3, 0.0);
        let (f2, g2) = OjaVolumeSweep { pts: p3, floor: 1e-14 }.value_grad(&x3, 0.0);
        assert!((f1 - f2).abs() < 1e-10 * f1);
        assert!((g1 - g2).norm() < 1e-10 * g1.norm(), "{g1} {g2}");
    }

    fn fd_check<const D: usize, K: Kernel<D>>(k: &K, x: V<D>, mu: f64) {
        let (_, g) = k.value_grad(&x, mu);
        let h = 1e-6;
        let mut fd = V::<D>::zeros();
        for i in 0..D {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            fd[i] = (k.value(&xp, mu) - k.value(&xm, mu)) / (2.0 * h);
        }
        assert!((g - fd).norm() <= 1e-5 * g.norm().max(1.0), "{g} vs {fd}");
        if k.smooth() && mu > 0.0 {
            let hs = k.hessian(&x, mu);
            for i in 0..D {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let col = (k.value_grad(&xp, mu).1 - k.value_grad(&xm, mu).1) / (2.0 * h);
                let hc = hs.column(i).into_owned();
                assert!((hc - col).norm() <= 1e-4 * hs.norm().max(1.0), "{hc} vs {col}");
            }
        }
    }

    #[test]
    fn smoothed_kernels_pass_derivative_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p2 = rand2(&mut rng, 9);
        let p3 = rand3(&mut rng, 9);
        let x2 = Vector2::new(0.1, 0.2);
        let x3 = Vector3::new(0.1, -0.2, 0.05);
        fd_check(&L1Kernel { pts: p2.clone(), floor: 0.0 }, x2, 0.05);
        fd_check(&L1Kernel { pts: p3.clone(), floor: 0.0 }, x3, 0.05);
        fd_check(&OjaPlanePairs { pts: p2, floor: 0.0 }, x2, 0.05);
        fd_check(&OjaVolumeTriples { pts: p3.clone(), floor: 0.0 }, x3, 0.05);
        fd_check(&OjaAreaPairs3 { pts: p3, floor: 0.0 }, x3, 0.05);
    }
}
