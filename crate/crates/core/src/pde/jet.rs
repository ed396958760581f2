use nalgebra::{DMatrix, Matrix2, Vector2};

use crate::error::{invalid, Result};
use crate::window::AnalyticField;

/// First and second derivatives of an `n`-channel image over an
/// `m`-dimensional domain at one location.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint {
    first: DMatrix<f64>,
    second: Vec<DMatrix<f64>>,
}

impl JetPoint {
    /// Hessians are symmetrised by averaging.
    pub fn new(first: DMatrix<f64>, second: Vec<DMatrix<f64>>) -> Result<Self> {
        let (n, m) = first.shape();
        if !(1..=3).contains(&n) || !(1..=3).contains(&m) {
            return Err(invalid(format!("jet shape {n}x{m} unsupported")));
        }
        if second.len() != n || second.iter().any(|h| h.shape() != (m, m)) {
            return Err(invalid("one m x m Hessian per channel expected"));
        }
        if first.iter().chain(second.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(invalid("jet entries must be finite"));
        }
        let second = second.into_iter().map(|h| (&h + h.transpose()) * 0.5).collect();
        Ok(JetPoint { first, second })
    }

    /// Jacobian with ones on the diagonal and zero Hessians.
    pub fn identity(n: usize, m: usize) -> Self {
        JetPoint {
            first: DMatrix::identity(n, m),
            second: vec![DMatrix::zeros(m, m); n],
        }
    }

    pub fn with_first(mut self, channel: usize, axis: usize, value: f64) -> Self {
        self.first[(channel, axis)] = value;
        self
    }

    pub fn with_second(mut self, channel: usize, i: usize, j: usize, value: f64) -> Self {
        self.second[channel][(i, j)] = value;
        self.second[channel][(j, i)] = value;
        self
    }

    pub fn n(&self) -> usize {
        self.first.nrows()
    }

    pub fn m(&self) -> usize {
        self.first.ncols()
    }

    /// The `n x m` Jacobian.
    pub fn first(&self) -> &DMatrix<f64> {
        &self.first
    }

    pub fn second(&self, channel: usize) -> &DMatrix<f64> {
        &self.second[channel]
    }

    /// `∂²u_c / ∂x_i ∂x_j`.
    pub fn d2(&self, channel: usize, i: usize, j: usize) -> f64 {
        self.second[channel][(i, j)]
    }

    /// `aᵀ H_c b`.
    pub fn directional(&self, channel: usize, a: &[f64], b: &[f64]) -> f64 {
        let h = &self.second[channel];
        let mut s = 0.0;
        for i in 0..self.m() {
            for j in 0..self.m() {
                s += a[i] * h[(i, j)] * b[j];
            }
        }
        s
    }

    /// Jet of `x ↦ A u(x)` for an `n x n` matrix `A`.
    pub fn transform_values(&self, a: &DMatrix<f64>) -> Result<Self> {
        if a.shape() != (self.n(), self.n()) {
            return Err(invalid("value transform must be n x n"));
        }
        let second = (0..self.n())
            .map(|r| {
                let mut h = DMatrix::zeros(self.m(), self.m());
                for c in 0..self.n() {
                    h += &self.second[c] * a[(r, c)];
                }
                h
            })
            .collect();
        JetPoint::new(a * &self.first, second)
    }
}

/// Eigen-frame of the structure tensor `J = DᵀD` for planar images.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureTensorFrame {
    pub j: Matrix2<f64>,
    pub eta: Vector2<f64>,
    pub xi: Vector2<f64>,
    /// Descending.
    pub eigenvalues: [f64; 2],
    /// Equal eigenvalues; the frame is the coordinate axes.
    pub isotropic: bool,
}

pub fn structure_frame(jet: &JetPoint) -> Result<StructureTensorFrame> {
    if jet.m() != 2 {
        return Err(invalid("structure frame needs a planar domain"));
    }
    let d = jet.first();
    let jt = d.transpose() * d;
    let (a, b, c) = (jt[(0, 0)], jt[(0, 1)], jt[(1, 1)]);
    let j = Matrix2::new(a, b, b, c);
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let eigenvalues = [mean + rad, mean - rad];
    if 2.0 * rad <= 1e-12 * eigenvalues[0].abs() || eigenvalues[0] == 0.0 {
        return Ok(StructureTensorFrame {
            j,
            eta: Vector2::new(1.0, 0.0),
            xi: Vector2::new(0.0, 1.0),
            eigenvalues: [mean, mean],
            isotropic: true,
        });
    }
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let mut eta = Vector2::new(theta.cos(), theta.sin());
    let lead = if eta.x != 0.0 { eta.x } else { eta.y };
    if lead < 0.0 {
        eta = -eta;
    }
    Ok(StructureTensorFrame {
        j,
        eta,
        xi: Vector2::new(-eta.y, eta.x),
        eigenvalues,
        isotropic: false,
    })
}

const FIRST_STEP: f64 = 1e-5;
const SECOND_STEP: f64 = 2e-3;

/// Finite-difference jet of an analytic field.
///
/// First derivatives are central differences; second derivatives use
/// central differences at two step sizes combined by Richardson
/// extrapolation.
pub fn jet_from_analytic(field: &AnalyticField, location: &[f64]) -> Result<JetPoint> {
    let m = field.domain_dim();
    let n = field.value_dim();
    if location.len() != m {
        return Err(invalid("location dimension differs from field domain"));
    }
    let at = |shift: &[(usize, f64)]| {
        let mut x = location.to_vec();
        for &(i, d) in shift {
            x[i] += d;
        }
        field.eval(&x)
    };
    let mut first = DMatrix::zeros(n, m);
    for j in 0..m {
        let p = at(&[(j, FIRST_STEP)]);
        let q = at(&[(j, -FIRST_STEP)]);
        for c in 0..n {
            first[(c, j)] = (p[c] - q[c]) / (2.0 * FIRST_STEP);
        }
    }
    let centre = at(&[]);
    let second_at = |h: f64| {
        let mut hs = vec![DMatrix::zeros(m, m); n];
        for i in 0..m {
            let p = at(&[(i, h)]);
            let q = at(&[(i, -h)]);
            for c in 0..n {
                hs[c][(i, i)] = (p[c] - 2.0 * centre[c] + q[c]) / (h * h);
            }
            for j in i + 1..m {
                let pp = at(&[(i, h), (j, h)]);
                let pm = at(&[(i, h), (j, -h)]);
                let mp = at(&[(i, -h), (j, h)]);
                let mm = at(&[(i, -h), (j, -h)]);
                for c in 0..n {
                    let v = (pp[c] - pm[c] - mp[c] + mm[c]) / (4.0 * h * h);
                    hs[c][(i, j)] = v;
                    hs[c][(j, i)] = v;
                }
            }
        }
        hs
    };
    let coarse = second_at(SECOND_STEP);
    let fine = second_at(0.5 * SECOND_STEP);
    let second = fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (f * 4.0 - c) / 3.0)
        .collect();
    JetPoint::new(first, second)
}
