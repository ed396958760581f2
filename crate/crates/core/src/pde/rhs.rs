use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};

use super::coeff::{q1, q2, q3};
use super::jet::{structure_frame, JetPoint};
use crate::error::{invalid, Error, Result};

/// Coefficient matrices used to assemble a right-hand side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficients {
    L1 {
        s: Matrix2<f64>,
        t: Matrix2<f64>,
        w: Matrix2<f64>,
    },
    Oja22 {
        a: Matrix2<f64>,
        b: Matrix2<f64>,
    },
    Oja33 {
        a1: Matrix3<f64>,
        a2: Matrix3<f64>,
        b1: Matrix3<f64>,
        b2: Matrix3<f64>,
        b3: Matrix3<f64>,
    },
    Oja23 {
        d3: Matrix3<f64>,
        a: Matrix3<f64>,
        b: Matrix3<f64>,
    },
    L1Aligned23 {
        s: Matrix2<f64>,
        t: Matrix2<f64>,
        w: Matrix2<f64>,
        /// Weights of `w_xx` and `w_yy`.
        q3: [f64; 2],
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdeUpdate {
    pub rhs: Vec<f64>,
    pub tau: f64,
    pub coefficients: Coefficients,
}

impl PdeUpdate {
    /// `τ · rhs`, the predicted change of one filter step.
    pub fn step(&self) -> Vec<f64> {
        self.rhs.iter().map(|r| r * self.tau).collect()
    }
}

fn check(jet: &JetPoint, n: usize, m: usize, rho: f64) -> Result<()> {
    if jet.n() != n || jet.m() != m {
        return Err(invalid(format!(
            "expected a {n}-channel jet over {m} dimensions, got {}x{}",
            jet.n(),
            jet.m()
        )));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {rho}")));
    }
    Ok(())
}

fn undefined(msg: &str) -> Error {
    Error::PdeUndefined(msg.to_string())
}

fn jac2(jet: &JetPoint) -> Matrix2<f64> {
    let d = jet.first();
    Matrix2::new(d[(0, 0)], d[(0, 1)], d[(1, 0)], d[(1, 1)])
}

fn jac3(d: &DMatrix<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| d[(i, j)])
}

fn singular(det: f64, scale: f64) -> bool {
    det == 0.0 || det.abs() <= 1e-14 * scale
}

/// Coefficient matrices S, T, W and the frame (η, ξ).
type L1Coefficients = (Matrix2<f64>, Matrix2<f64>, Matrix2<f64>, Vector2<f64>, Vector2<f64>);

fn l1_coefficients(jet: &JetPoint) -> Result<L1Coefficients> {
    let d = jac2(jet);
    if singular(d.determinant(), d.norm_squared()) {
        return Err(undefined("singular Jacobian"));
    }
    let f = structure_frame(jet)?;
    let s1 = (d * f.eta).norm();
    let s2 = (d * f.xi).norm();
    let lam = s1 / s2;
    let p = Matrix2::from_columns(&[f.eta, f.xi]);
    let dinv_t = d.try_inverse().ok_or_else(|| undefined("singular Jacobian"))?.transpose();
    let r = dinv_t * p * Matrix2::new(s1, 0.0, 0.0, s2);
    let rt = r.transpose();
    let s = r * Matrix2::new(q1(lam), 0.0, 0.0, q2(lam)) * rt;
    let t = r * Matrix2::new(q2(1.0 / lam), 0.0, 0.0, q1(1.0 / lam)) * rt;
    let w = r * Matrix2::new(0.0, lam * q1(lam), q1(1.0 / lam) / lam, 0.0) * rt;
    Ok((s, t, w, f.eta, f.xi))
}

fn l1_assemble(
    jet: &JetPoint,
    (s, t, w, eta, xi): L1Coefficients,
) -> Vector2<f64> {
    let dd = |a: &Vector2<f64>, b: &Vector2<f64>| {
        Vector2::new(
            jet.directional(0, a.as_slice(), b.as_slice()),
            jet.directional(1, a.as_slice(), b.as_slice()),
        )
    };
    s * dd(&eta, &eta) + t * dd(&xi, &xi) - 2.0 * w * dd(&xi, &eta)
}

/// Two-channel planar L1 median PDE; `τ = ρ²/6`.
pub fn l1_rhs_22(jet: &JetPoint, rho: f64) -> Result<PdeUpdate> {
    check(jet, 2, 2, rho)?;
    let parts = l1_coefficients(jet)?;
    let rhs = l1_assemble(jet, parts);
    let (s, t, w, _, _) = parts;
    Ok(PdeUpdate {
        rhs: rhs.as_slice().to_vec(),
        tau: rho * rho / 6.0,
        coefficients: Coefficients::L1 { s, t, w },
    })
}

/// Two-channel planar Oja median PDE; `τ = ρ²/24`.
pub fn oja_rhs_22(jet: &JetPoint, rho: f64) -> Result<PdeUpdate> {
    check(jet, 2, 2, rho)?;
    let d = jac2(jet);
    let (ux, uy, vx, vy) = (d[(0, 0)], d[(0, 1)], d[(1, 0)], d[(1, 1)]);
    let det = ux * vy - uy * vx;
    if singular(det, d.norm_squared()) {
        return Err(undefined("singular Jacobian"));
    }
    let a = Matrix2::new(ux * vy + uy * vx, 2.0 * ux * uy, 2.0 * vx * vy, ux * vy + uy * vx) / det;
    let b = Matrix2::new(
        -ux * vx + uy * vy,
        ux * ux - uy * uy,
        -vx * vx + vy * vy,
        ux * vx - uy * vy,
    ) * (2.0 / det);
    let h = |c, i, j| jet.d2(c, i, j);
    let lap = Vector2::new(h(0, 0, 0) + h(0, 1, 1), h(1, 0, 0) + h(1, 1, 1));
    let diff = Vector2::new(h(0, 0, 0) - h(0, 1, 1), h(1, 1, 1) - h(1, 0, 0));
    let mixed = Vector2::new(h(0, 0, 1), h(1, 0, 1));
    let rhs = 2.0 * lap - a * diff - b * mixed;
    Ok(PdeUpdate {
        rhs: rhs.as_slice().to_vec(),
        tau: rho * rho / 24.0,
        coefficients: Coefficients::Oja22 { a, b },
    })
}

fn channels3(jet: &JetPoint, f: impl Fn(usize) -> f64) -> Vector3<f64> {
    let _ = jet;
    Vector3::new(f(0), f(1), f(2))
}

fn conj(d: &Matrix3<f64>, dinv: &Matrix3<f64>, m: Matrix3<f64>) -> Matrix3<f64> {
    d * m * dinv
}

/// Three-channel volume Oja median PDE; `τ = ρ²/60`.
pub fn oja_rhs_33(jet: &JetPoint, rho: f64) -> Result<PdeUpdate> {
    check(jet, 3, 3, rho)?;
    let d = jac3(jet.first());
    if singular(d.determinant(), d.norm().powi(3)) {
        return Err(undefined("singular Jacobian"));
    }
    let dinv = d.try_inverse().ok_or_else(|| undefined("singular Jacobian"))?;
    let id = Matrix3::identity();
    let a1 = id - 3.0 * conj(&d, &dinv, Matrix3::from_diagonal(&Vector3::new(0.0, 1.0, 0.0)));
    let a2 = id - 3.0 * conj(&d, &dinv, Matrix3::from_diagonal(&Vector3::new(0.0, 0.0, 1.0)));
    let swap = |i: usize, j: usize| {
        let mut m = Matrix3::zeros();
        m[(i, j)] = 1.0;
        m[(j, i)] = 1.0;
        m
    };
    let b1 = conj(&d, &dinv, swap(0, 1));
    let b2 = conj(&d, &dinv, swap(0, 2));
    let b3 = conj(&d, &dinv, swap(1, 2));
    let h = |i, j| channels3(jet, |c| jet.d2(c, i, j));
    let lap = h(0, 0) + h(1, 1) + h(2, 2);
    let rhs = 5.0 * lap + a1 * (h(1, 1) - h(0, 0)) + a2 * (h(2, 2) - h(0, 0))
        - 3.0 * (b1 * h(0, 1) + b2 * h(0, 2) + b3 * h(1, 2));
    Ok(PdeUpdate {
        rhs: rhs.as_slice().to_vec(),
        tau: rho * rho / 60.0,
        coefficients: Coefficients::Oja33 { a1, a2, b1, b2, b3 },
    })
}

/// Extends a rank-2 `3 x 2` Jacobian by the cross product of its columns.
pub fn build_d3(d: &DMatrix<f64>) -> Result<Matrix3<f64>> {
    if d.shape() != (3, 2) {
        return Err(invalid("build_d3 expects a 3 x 2 matrix"));
    }
    let c1 = Vector3::new(d[(0, 0)], d[(1, 0)], d[(2, 0)]);
    let c2 = Vector3::new(d[(0, 1)], d[(1, 1)], d[(2, 1)]);
    let c3 = c1.cross(&c2);
    if c3.norm_squared() <= 1e-28 * c1.norm_squared() * c2.norm_squared() || c3 == Vector3::zeros() {
        return Err(undefined("Jacobian has rank below 2"));
    }
    Ok(Matrix3::from_columns(&[c1, c2, c3]))
}

/// Three-channel planar Oja median PDE with triangle areas; `τ = ρ²/24`.
pub fn oja_rhs_23(jet: &JetPoint, rho: f64) -> Result<PdeUpdate> {
    check(jet, 3, 2, rho)?;
    let d3 = build_d3(jet.first())?;
    let (a, b) = oja23_matrices(&d3)?;
    let h = |i, j| channels3(jet, |c| jet.d2(c, i, j));
    let rhs = 2.0 * (h(0, 0) + h(1, 1)) + a * (h(1, 1) - h(0, 0)) - 2.0 * b * h(0, 1);
    Ok(PdeUpdate {
        rhs: rhs.as_slice().to_vec(),
        tau: rho * rho / 24.0,
        coefficients: Coefficients::Oja23 { d3, a, b },
    })
}

fn oja23_matrices(d3: &Matrix3<f64>) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    let inv = d3.try_inverse().ok_or_else(|| undefined("Jacobian has rank below 2"))?;
    let a = d3 * Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 0.0)) * inv;
    let b = d3 * Matrix3::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0) * inv;
    Ok((a, b))
}

/// Three-channel planar L1 median PDE for a Jacobian of the form
/// `[[u_x, 0], [0, v_y], [0, 0]]`; `τ = ρ²/6`.
pub fn l1_rhs_23_aligned(jet: &JetPoint, rho: f64) -> Result<PdeUpdate> {
    check(jet, 3, 2, rho)?;
    let d = jet.first();
    let (ux, vy) = (d[(0, 0)], d[(1, 1)]);
    if d[(0, 1)] != 0.0 || d[(1, 0)] != 0.0 || d[(2, 0)] != 0.0 || d[(2, 1)] != 0.0 {
        return Err(invalid("Jacobian is not in aligned form"));
    }
    if !(ux > 0.0 && vy > 0.0) {
        return Err(undefined("aligned form needs u_x > 0 and v_y > 0"));
    }
    let planar = JetPoint::new(
        d.rows(0, 2).into_owned(),
        vec![jet.second(0).clone(), jet.second(1).clone()],
    )?;
    let parts = l1_coefficients(&planar)?;
    let uv = l1_assemble(&planar, parts);
    let qw = [q3(ux / vy), q3(vy / ux)];
    let wt = qw[0] * jet.d2(2, 0, 0) + qw[1] * jet.d2(2, 1, 1);
    let (s, t, w, _, _) = parts;
    Ok(PdeUpdate {
        rhs: vec![uv.x, uv.y, wt],
        tau: rho * rho / 6.0,
        coefficients: Coefficients::L1Aligned23 { s, t, w, q3: qw },
    })
}
