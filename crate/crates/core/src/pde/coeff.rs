//! Coefficient functions of the L1 median PDEs.
//!
//! Each function is a ratio of disc integrals whose radial part is
//! integrated in closed form, leaving angular integrals
//! `I(p, q, e) = ∫ cos^p φ sin^q φ / (cos²φ + λ² sin²φ)^e dφ`
//! over the first quadrant.

const REL_TOL: f64 = 1e-13;
const MAX_LEVELS: usize = 20;

/// Angular integrals for several `(p, q, e)` triples sharing one grid.
///
/// With `φ = atan(e^y)` the integrand decays like `e^{-|y|}` and is
/// analytic, so the trapezoid rule converges geometrically.
fn angular(lambda: f64, terms: &[(i32, i32, f64)]) -> Vec<f64> {
    let l2 = lambda * lambda;
    let half = 40.0 + lambda.ln().abs();
    let eval = |y: f64, out: &mut [f64]| {
        // c = 1/sqrt(1+e^{2y}) computed without overflow
        let (c, s) = if y > 0.0 {
            let t = (-y).exp();
            let n = (1.0 + t * t).sqrt();
            (t / n, 1.0 / n)
        } else {
            let t = y.exp();
            let n = (1.0 + t * t).sqrt();
            (1.0 / n, t / n)
        };
        let g = c * c + l2 * s * s;
        for (o, &(p, q, e)) in out.iter_mut().zip(terms) {
            *o += c.powi(p + 1) * s.powi(q + 1) / g.powf(e);
        }
    };
    let mut n = 64usize;
    let mut step = 2.0 * half / n as f64;
    let mut sum = vec![0.0; terms.len()];
    for i in 0..=n {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        let mut tmp = vec![0.0; terms.len()];
        eval(-half + i as f64 * step, &mut tmp);
        for (a, b) in sum.iter_mut().zip(&tmp) {
            *a += w * b;
        }
    }
    let mut prev: Vec<f64> = sum.iter().map(|v| v * step).collect();
    for _ in 0..MAX_LEVELS {
        // midpoints of the current grid
        let mut mid = vec![0.0; terms.len()];
        for i in 0..n {
            eval(-half + (i as f64 + 0.5) * step, &mut mid);
        }
        for (a, b) in sum.iter_mut().zip(&mid) {
            *a += b;
        }
        n *= 2;
        step *= 0.5;
        let cur: Vec<f64> = sum.iter().map(|v| v * step).collect();
        let done = cur
            .iter()
            .zip(&prev)
            .all(|(c, p)| (c - p).abs() <= REL_TOL * c.abs());
        prev = cur;
        if done {
            break;
        }
    }
    prev
}

fn ratio(lambda: f64, num: (i32, i32, f64), den: (i32, i32, f64)) -> f64 {
    let v = angular(lambda, &[num, den]);
    v[0] / v[1]
}

fn limits(lambda: f64) -> Option<f64> {
    let l = lambda.abs();
    if l.is_nan() {
        Some(f64::NAN)
    } else if l == 0.0 {
        Some(1.0)
    } else if l.is_infinite() {
        Some(0.0)
    } else {
        None
    }
}

/// `Q1(λ)`; `f64::INFINITY` is accepted as the symbolic limit.
pub fn q1(lambda: f64) -> f64 {
    limits(lambda).unwrap_or_else(|| ratio(lambda.abs(), (2, 2, 1.5), (2, 0, 1.5)))
}

pub fn q2(lambda: f64) -> f64 {
    limits(lambda).unwrap_or_else(|| ratio(lambda.abs(), (0, 4, 1.5), (0, 2, 1.5)))
}

/// Coefficient of the third channel in the aligned three-channel L1 PDE.
pub fn q3(lambda: f64) -> f64 {
    limits(lambda).unwrap_or_else(|| ratio(lambda.abs(), (0, 2, 0.5), (0, 0, 0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson in φ, as an independent check of the substitution.
    fn simpson_ratio(lambda: f64, num: (i32, i32, f64), den: (i32, i32, f64)) -> f64 {
        let n = 200_000;
        let hstep = std::f64::consts::FRAC_PI_2 / n as f64;
        let f = |phi: f64, (p, q, e): (i32, i32, f64)| {
            let (s, c) = phi.sin_cos();
            c.powi(p) * s.powi(q) / (c * c + lambda * lambda * s * s).powf(e)
        };
        let mut a = 0.0;
        let mut b = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            a += w * f(i as f64 * hstep, num);
            b += w * f(i as f64 * hstep, den);
        }
        a / b
    }

    #[test]
    fn isotropic_values() {
        assert!((q1(1.0) - 0.25).abs() < 1e-12);
        assert!((q2(1.0) - 0.75).abs() < 1e-12);
        assert!((q3(1.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn limits_are_exact() {
        for q in [q1, q2, q3] {
            assert_eq!(q(0.0), 1.0);
            assert_eq!(q(f64::INFINITY), 0.0);
        }
    }

    #[test]
    fn reciprocal_identity() {
        for i in 0..20 {
            let l = 10f64.powf(-1.0 + 2.0 * i as f64 / 19.0);
            assert!((q2(l) - (1.0 - q1(1.0 / l))).abs() < 1e-10, "{l}");
        }
    }

    #[test]
    fn against_simpson() {
        for l in [0.3, 0.7, 2.0, 5.0] {
            assert!((q1(l) - simpson_ratio(l, (2, 2, 1.5), (2, 0, 1.5))).abs() < 1e-9);
            assert!((q2(l) - simpson_ratio(l, (0, 4, 1.5), (0, 2, 1.5))).abs() < 1e-9);
            assert!((q3(l) - simpson_ratio(l, (0, 2, 0.5), (0, 0, 0.5))).abs() < 1e-9);
        }
    }

    /// Midpoint sum over a Cartesian grid of the unit disc, using the
    /// integrands before the radial integration.
    #[test]
    fn against_cartesian_sum() {
        let l: f64 = 2.0;
        let n = 1500;
        let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let s = (i as f64 + 0.5) / n as f64;
                let t = (j as f64 + 0.5) / n as f64;
                if s * s + t * t > 1.0 {
                    continue;
                }
                let g = (s * s + l * l * t * t).powf(1.5);
                a += s * s * t * t / g;
                b += s * s / g;
                c += t.powi(4) / g;
                d += t * t / g;
            }
        }
        assert!((3.0 * a / b - q1(l)).abs() < 2e-3);
        assert!((3.0 * c / d - q2(l)).abs() < 2e-3);
    }

    #[test]
    fn lambda_q1_vanishes() {
        assert!(1e4 * q1(1e4) < 0.05);
        let mut prev = f64::INFINITY;
        for l in [10.0, 100.0, 1000.0, 1e4] {
            let v = l * q1(l);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn monotone_decreasing() {
        let mut p = (2.0, 2.0, 2.0);
        for i in 1..40 {
            let l = 0.05 * i as f64 * i as f64;
            let v = (q1(l), q2(l), q3(l));
            assert!(v.0 < p.0 && v.1 < p.1 && v.2 < p.2);
            p = v;
        }
    }
}
