//! Descent solvers for the median objectives.

use nalgebra::{DMatrix, DVector};

use super::cloud::ValuePoint;
use super::kernels::{Kernel, M, V};

/// Search direction used by [`SolverConfig`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Descent {
    /// Newton steps on a smoothed objective, smoothing driven to zero.
    Newton,
    /// Normalised gradient steps on the exact objective.
    Gradient,
}

/// Evaluation strategy for Oja objectives with k = n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OjaKernel {
    /// Angular sweeps for large clouds, explicit subsets otherwise.
    Auto,
    /// Explicit sums over all pairs or triples.
    Subsets,
    /// Angular sweeps, O(N log N) in the plane and O(N² log N) in space.
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stationarity threshold, relative to the data scale.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// First trial step, relative to the data scale.
    pub initial_step: f64,
    pub shrink: f64,
    pub grow: f64,
    /// L1 terms closer than this fraction of the cloud diameter are skipped.
    pub distance_floor: f64,
    pub descent: Descent,
    /// Whiten the cloud before an Oja solve with k = n.
    pub whiten_oja: bool,
    pub oja_kernel: OjaKernel,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grad_tol: 1e-9,
            max_iters: 500,
            initial_step: 0.5,
            shrink: 0.5,
            grow: 1.2,
            distance_floor: 1e-9,
            descent: Descent::Newton,
            whiten_oja: true,
            oja_kernel: OjaKernel::Auto,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.grad_tol > 0.0
            && self.max_iters >= 1
            && self.initial_step > 0.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.grow > 1.0
            && self.distance_floor >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(crate::error::invalid(format!("invalid solver config {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverReport {
    pub minimiser: ValuePoint,
    pub iterations: usize,
    /// Stationarity measure, relative to the data scale.
    pub final_grad_norm: f64,
    pub converged: bool,
    /// Non-unique minimiser or lower-dimensional input.
    pub degenerate: bool,
}

pub(crate) struct Outcome<const D: usize> {
    pub x: V<D>,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

const SMOOTHING: [f64; 6] = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12];
const MAX_BACKTRACK: usize = 50;

fn grad_unit<const D: usize, K: Kernel<D>>(k: &K, scale: f64) -> f64 {
    k.term_count().max(1.0) * scale.powi(k.degree() - 1)
}

pub(crate) fn minimise<const D: usize, K: Kernel<D>>(
    k: &K,
    x0: V<D>,
    scale: f64,
    cfg: &SolverConfig,
) -> Outcome<D> {
    let (x, iterations) = if !k.smooth() {
        let (x, mut it) = slope_search(k, x0, scale, cfg);
        if stationarity(k, &x, scale, cfg.grad_tol) > cfg.grad_tol {
            (polish(k, x, scale, cfg, &mut it), it)
        } else {
            (x, it)
        }
    } else if cfg.descent == Descent::Gradient {
        gradient_descent(k, x0, scale, cfg)
    } else {
        let (x, mut it) = smoothed_newton(k, x0, scale, cfg);
        if stationarity(k, &x, scale, cfg.grad_tol) > cfg.grad_tol {
            (polish(k, x, scale, cfg, &mut it), it)
        } else {
            (x, it)
        }
    };
    let grad_norm = stationarity(k, &x, scale, cfg.grad_tol);
    Outcome {
        x,
        iterations,
        grad_norm,
        converged: grad_norm <= cfg.grad_tol,
    }
}

fn smoothed_newton<const D: usize, K: Kernel<D>>(
    k: &K,
    mut x: V<D>,
    scale: f64,
    cfg: &SolverConfig,
) -> (V<D>, usize) {
    let unit = grad_unit(k, scale);
    let mu_unit = scale.powi(k.degree());
    let mut it = 0;
    for (stage, mu_rel) in SMOOTHING.iter().enumerate() {
        let mu = mu_rel * mu_unit;
        let tol = if stage + 1 == SMOOTHING.len() {
            cfg.grad_tol
        } else {
            cfg.grad_tol.max(1e-3 * mu_rel)
        };
        let mut trust = cfg.initial_step * scale;
        let mut stalls = 0;
        let (mut f, mut g) = k.value_grad(&x, mu);
        while g.norm() > tol * unit && it < cfg.max_iters {
            it += 1;
            let d = newton_direction(&k.hessian(&x, mu), &g, trust);
            let dn = d.norm();
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACK {
                let trial = x + d * alpha;
                let (ft, gt) = k.value_grad(&trial, mu);
                let slack = 8.0 * f64::EPSILON * f.abs();
                if ft < f || (ft <= f + slack && gt.norm() < g.norm()) {
                    accepted = Some((trial, ft, gt));
                    break;
                }
                alpha *= cfg.shrink;
                if alpha * dn < 1e-15 * scale {
                    break;
                }
            }
            match accepted {
                Some((xt, ft, gt)) => {
                    // Steps this short are limited by rounding in the value;
                    // leave the rest to the next stage or the polish.
                    stalls = if alpha * dn < 1e-11 * scale { stalls + 1 } else { 0 };
                    if stalls >= 3 {
                        break;
                    }
                    trust = (4.0 * alpha * dn).max(1e-12 * scale);
                    x = xt;
                    f = ft;
                    g = gt;
                }
                None => break,
            }
        }
    }
    (x, it)
}

fn newton_direction<const D: usize>(h: &M<D>, g: &V<D>, trust: f64) -> V<D> {
    let reg = 1e-13 * h.trace().abs().max(f64::MIN_POSITIVE);
    let hr = h + M::<D>::identity() * reg;
    let mut d = match hr.cholesky() {
        Some(c) => -c.solve(g),
        None => -g * (trust / g.norm()),
    };
    if !d.iter().all(|v| v.is_finite()) || d.dot(g) >= 0.0 {
        d = -g * (trust / g.norm());
    }
    let n = d.norm();
    if n > trust {
        d *= trust / n;
    }
    d
}

fn gradient_descent<const D: usize, K: Kernel<D>>(
    k: &K,
    mut x: V<D>,
    scale: f64,
    cfg: &SolverConfig,
) -> (V<D>, usize) {
    let unit = grad_unit(k, scale);
    let mut t = cfg.initial_step * scale;
    let (mut f, mut g) = k.value_grad(&x, 0.0);
    let mut it = 0;
    while g.norm() > cfg.grad_tol * unit && it < cfg.max_iters && t > 1e-14 * scale {
        it += 1;
        let trial = x - g * (t / g.norm());
        let ft = k.value(&trial, 0.0);
        if ft < f {
            x = trial;
            let (fn_, gn) = k.value_grad(&x, 0.0);
            f = fn_;
            g = gn;
            t *= cfg.grow;
        } else {
            t *= cfg.shrink;
        }
    }
    (x, it)
}

/// Quasi-Newton descent whose line search brackets the sign change of the
/// directional derivative. Used for the sweep kernels, whose values carry
/// too much rounding for decrease tests at small steps.
fn slope_search<const D: usize, K: Kernel<D>>(
    k: &K,
    mut x: V<D>,
    scale: f64,
    cfg: &SolverConfig,
) -> (V<D>, usize) {
    let unit = grad_unit(k, scale);
    let (_, mut g) = k.value_grad(&x, 0.0);
    let reset = |g: &V<D>| M::<D>::identity() * (cfg.initial_step * scale / g.norm().max(f64::MIN_POSITIVE));
    let mut hinv = reset(&g);
    let mut it = 0;
    while g.norm() > cfg.grad_tol * unit && it < cfg.max_iters {
        it += 1;
        let mut d = -(hinv * g);
        if d.dot(&g) >= 0.0 || !d.iter().all(|v| v.is_finite()) {
            hinv = reset(&g);
            d = -(hinv * g);
        }
        // The minimiser lies in the hull, so longer steps are never needed,
        // and far from the data the sweeps lose their angular resolution.
        if d.norm() > scale {
            d *= scale / d.norm();
        }
        let s0 = g.dot(&d);
        let dn = d.norm();
        let (mut a, mut sa, mut ga) = (0.0, s0, g);
        let mut b = 1.0;
        let mut gb = k.value_grad(&(x + d * b), 0.0).1;
        let mut sb = gb.dot(&d);
        while sb < 0.0 && 2.0 * b * dn <= 2.0 * scale {
            a = b;
            sa = sb;
            ga = gb;
            b *= 2.0;
            gb = k.value_grad(&(x + d * b), 0.0).1;
            sb = gb.dot(&d);
        }
        let mut best = if sb.abs() < sa.abs() { (b, gb) } else { (a, ga) };
        let mut use_secant = true;
        for _ in 0..80 {
            if best.1.dot(&d).abs() <= 0.1 * s0.abs() || (b - a) * dn < 1e-14 * scale {
                break;
            }
            let m = if use_secant && sb > sa {
                let t = (sa / (sa - sb)).clamp(0.1, 0.9);
                a + (b - a) * t
            } else {
                0.5 * (a + b)
            };
            use_secant = !use_secant;
            let gm = k.value_grad(&(x + d * m), 0.0).1;
            let sm = gm.dot(&d);
            if sm < 0.0 {
                a = m;
                sa = sm;
                ga = gm;
            } else {
                b = m;
                sb = sm;
                gb = gm;
            }
            best = if sb.abs() < sa.abs() { (b, gb) } else { (a, ga) };
        }
        let (alpha, gnew) = if best.0 > 0.0 { best } else { (b, gb) };
        let s = d * alpha;
        if s.norm() < 1e-14 * scale {
            break;
        }
        let y = gnew - g;
        let sy = s.dot(&y);
        x += s;
        g = gnew;
        if sy > 0.0 {
            let rho = 1.0 / sy;
            let i = M::<D>::identity();
            hinv = (i - s * y.transpose() * rho) * hinv * (i - y * s.transpose() * rho)
                + s * s.transpose() * rho;
        }
    }
    (x, it)
}

/// Gradient sampling: steps along the negated min-norm element of the
/// gradients sampled around `x`, shrinking the sampling radius down to the
/// stationarity probe radius.
fn polish<const D: usize, K: Kernel<D>>(
    k: &K,
    mut x: V<D>,
    scale: f64,
    cfg: &SolverConfig,
    it: &mut usize,
) -> V<D> {
    let unit = grad_unit(k, scale);
    let dirs = probe_directions::<D>();
    let floor = PROBE_RADIUS * scale;
    let mut delta = 1e-5 * scale;
    let slope = |p: &V<D>, d: &V<D>| k.value_grad(p, 0.0).1.dot(d);
    while *it < cfg.max_iters {
        *it += 1;
        let mut grads = vec![k.value_grad(&x, 0.0).1];
        grads.extend(dirs.iter().map(|d| k.value_grad(&(x + d * delta), 0.0).1));
        let gs = min_norm_vector(&grads);
        if gs.norm() <= cfg.grad_tol * unit {
            if delta <= floor {
                break;
            }
            delta = (delta * 0.1).max(floor);
            continue;
        }
        let d = -gs.normalize();
        if slope(&(x + d * delta), &d) >= 0.0 {
            if delta <= floor {
                break;
            }
            delta = (delta * 0.1).max(floor);
            continue;
        }
        let (mut a, mut b) = (delta, 2.0 * delta);
        while slope(&(x + d * b), &d) < 0.0 && b < scale {
            a = b;
            b *= 2.0;
        }
        for _ in 0..30 {
            let m = 0.5 * (a + b);
            if slope(&(x + d * m), &d) < 0.0 {
                a = m;
            } else {
                b = m;
            }
            if b - a <= 0.25 * floor {
                break;
            }
        }
        x += d * a;
    }
    x
}

const PROBE_RADIUS: f64 = 1e-8;

/// Norm of the smallest convex combination of exact gradients sampled at `x`
/// and at nearby probes, divided by the gradient unit.
pub(crate) fn stationarity<const D: usize, K: Kernel<D>>(
    k: &K,
    x: &V<D>,
    scale: f64,
    tol: f64,
) -> f64 {
    let unit = grad_unit(k, scale);
    let g0 = k.value_grad(x, 0.0).1;
    if g0.norm() <= tol * unit {
        return g0.norm() / unit;
    }
    let delta = PROBE_RADIUS * scale;
    let mut grads = vec![g0];
    for dir in probe_directions::<D>() {
        grads.push(k.value_grad(&(x + dir * delta), 0.0).1);
    }
    min_norm_point(&grads) / unit
}

/// Axis and diagonal probe directions, each normalised.
pub(crate) fn probe_directions<const D: usize>() -> Vec<V<D>> {
    let mut out = Vec::new();
    let total = 3usize.pow(D as u32);
    for code in 0..total {
        let mut v = V::<D>::zeros();
        let mut c = code;
        for i in 0..D {
            v[i] = (c % 3) as f64 - 1.0;
            c /= 3;
        }
        if v.norm() > 0.0 {
            out.push(v.normalize());
        }
    }
    out
}

pub(crate) fn min_norm_point<const D: usize>(pts: &[V<D>]) -> f64 {
    min_norm_vector(pts).norm()
}

/// Minimum-norm point of the convex hull of `pts` (Wolfe's algorithm).
pub(crate) fn min_norm_vector<const D: usize>(pts: &[V<D>]) -> V<D> {
    let scale2 = pts.iter().map(|p| p.norm_squared()).fold(0.0, f64::max);
    if scale2 == 0.0 {
        return V::<D>::zeros();
    }
    let start = (0..pts.len())
        .min_by(|&a, &b| pts[a].norm_squared().total_cmp(&pts[b].norm_squared()))
        .unwrap();
    let mut set = vec![start];
    let mut w = vec![1.0];
    for _ in 0..200 {
        let xv = combine(pts, &set, &w);
        let (j, dot) = (0..pts.len())
            .map(|j| (j, xv.dot(&pts[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if xv.norm_squared() - dot <= 1e-14 * scale2 || set.contains(&j) {
            return xv;
        }
        set.push(j);
        w.push(0.0);
        loop {
            let Some(v) = affine_min_norm(pts, &set) else {
                return combine(pts, &set, &w);
            };
            if v.iter().all(|&c| c > 1e-15) {
                w = v;
                break;
            }
            let mut theta: f64 = 1.0;
            for (wi, vi) in w.iter().zip(&v) {
                if *vi <= 1e-15 {
                    theta = theta.min(wi / (wi - vi));
                }
            }
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi = (1.0 - theta) * *wi + theta * vi;
            }
            let mut r = 0;
            while r < set.len() {
                if w[r] <= 1e-15 {
                    set.remove(r);
                    w.remove(r);
                } else {
                    r += 1;
                }
            }
            if set.is_empty() {
                return V::<D>::zeros();
            }
        }
    }
    combine(pts, &set, &w)
}

fn combine<const D: usize>(pts: &[V<D>], set: &[usize], w: &[f64]) -> V<D> {
    set.iter().zip(w).fold(V::<D>::zeros(), |acc, (&i, &c)| acc + pts[i] * c)
}

fn affine_min_norm<const D: usize>(pts: &[V<D>], set: &[usize]) -> Option<Vec<f64>> {
    let m = set.len();
    let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
    let mut rhs = DVector::<f64>::zeros(m + 1);
    for r in 0..m {
        for c in 0..m {
            a[(r, c)] = pts[set[r]].dot(&pts[set[c]]);
        }
        a[(r, m)] = 1.0;
        a[(m, r)] = 1.0;
    }
    rhs[m] = 1.0;
    let sol = a.lu().solve(&rhs)?;
    let v: Vec<f64> = sol.iter().take(m).copied().collect();
    v.iter().all(|c| c.is_finite()).then_some(v)
}

/// True when the exact objective barely changes along some probe line.
pub(crate) fn is_flat<const D: usize, K: Kernel<D>>(k: &K, x: &V<D>, scale: f64) -> bool {
    let f0 = k.value(x, 0.0);
    let delta = 1e-4 * scale;
    let tol = 1e-10 * f0.abs().max(f64::MIN_POSITIVE);
    let dirs = probe_directions::<D>();
    dirs[dirs.len() / 2..].iter().any(|dir| {
        k.value(&(x + dir * delta), 0.0) - f0 <= tol && k.value(&(x - dir * delta), 0.0) - f0 <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector2;

    #[test]
    fn min_norm_point_of_segment_and_triangle() {
        let seg = [Vector2::new(1.0, 1.0), Vector2::new(-1.0, 1.0)];
        assert!((min_norm_point(&seg) - 1.0).abs() < 1e-12);
        let tri = [
            Vector2::new(1.0, 0.0),
            Vector2::new(-1.0, 1.0),
            Vector2::new(-1.0, -1.0),
        ];
        assert!(min_norm_point(&tri) < 1e-12);
        let far = [Vector2::new(3.0, 4.0)];
        assert!((min_norm_point(&far) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn probe_counts() {
        assert_eq!(probe_directions::<2>().len(), 8);
        assert_eq!(probe_directions::<3>().len(), 26);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig { shrink: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
