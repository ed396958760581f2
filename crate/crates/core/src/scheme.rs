//! Explicit finite-difference scheme for the affine equivariant median
//! PDE of three-channel planar images.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::window::MultiChannelImage;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig {
    pub tau: f64,
    pub steps: usize,
    /// Regularisation of the quotients in the mixed term.
    pub eps: f64,
    /// Fraction of the isotropic diffusion term removed, in `[0, 1]`.
    pub anti_diffusion: f64,
    pub h: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            tau: 0.05,
            steps: 10,
            eps: 1e-4,
            anti_diffusion: 0.0,
            h: 1.0,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(invalid(format!("time step must be positive, got {}", self.tau)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(invalid(format!("eps must be positive, got {}", self.eps)));
        }
        if !(0.0..=1.0).contains(&self.anti_diffusion) {
            return Err(invalid(format!(
                "anti-diffusion weight must lie in [0, 1], got {}",
                self.anti_diffusion
            )));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(invalid(format!("grid step must be positive, got {}", self.h)));
        }
        Ok(())
    }

    /// Evolution time `steps · τ`.
    pub fn evolution_time(&self) -> f64 {
        self.steps as f64 * self.tau
    }
}

/// Local value-space and domain frames at one pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatchFrame {
    /// Orthogonal; columns are eigenvectors of `C = D Dᵀ`.
    pub q: Matrix3<f64>,
    pub c: f64,
    pub s: f64,
    /// Descending.
    pub eigenvalues: [f64; 3],
}

/// Minmod stabilisation of a pair of one-sided differences.
///
/// When the signs disagree, the larger one is replaced by the sum and the
/// other by zero.
pub fn minmod(plus: f64, minus: f64) -> (f64, f64) {
    if plus * minus >= 0.0 {
        (plus, minus)
    } else if plus.abs() >= minus.abs() {
        (plus + minus, 0.0)
    } else {
        (0.0, plus + minus)
    }
}

fn check(img: &MultiChannelImage) -> Result<()> {
    if img.dims() != 2 || img.channels() != 3 {
        return Err(invalid("the scheme needs a three-channel planar image"));
    }
    let e = img.extent();
    if e[0] < 3 || e[1] < 3 {
        return Err(invalid("the scheme needs an image of at least 3x3 pixels"));
    }
    Ok(())
}

/// 3x3 patch with mirrored borders.
struct Patch {
    v: [[Vector3<f64>; 3]; 3],
}

impl Patch {
    fn new(img: &MultiChannelImage, x: usize, y: usize) -> Self {
        let e = img.extent();
        let clamp = |p: usize, d: i64, n: usize| (p as i64 + d).clamp(0, n as i64 - 1) as usize;
        let mut v = [[Vector3::zeros(); 3]; 3];
        for (i, row) in v.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let px = clamp(x, i as i64 - 1, e[0]);
                let py = clamp(y, j as i64 - 1, e[1]);
                *cell = Vector3::from_column_slice(img.get(&[px, py]));
            }
        }
        Patch { v }
    }

    fn at(&self, dx: i64, dy: i64) -> Vector3<f64> {
        self.v[(dx + 1) as usize][(dy + 1) as usize]
    }

    fn rotated(&self, qt: &Matrix3<f64>) -> Patch {
        let mut v = self.v;
        for row in v.iter_mut() {
            for cell in row.iter_mut() {
                *cell = qt * *cell;
            }
        }
        Patch { v }
    }
}

fn frame_of(patch: &Patch, h: f64) -> Matrix3<f64> {
    let ux = (patch.at(1, 0) - patch.at(-1, 0)) / (2.0 * h);
    let uy = (patch.at(0, 1) - patch.at(0, -1)) / (2.0 * h);
    ux * ux.transpose() + uy * uy.transpose()
}

fn eigen_frame(c: Matrix3<f64>) -> (Matrix3<f64>, [f64; 3]) {
    let eig = SymmetricEigen::new(c);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut q = Matrix3::zeros();
    for (k, &i) in idx.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        let lead = col.iamax();
        if col[lead] < 0.0 {
            col = -col;
        }
        q.set_column(k, &col);
    }
    (q, idx.map(|i| eig.eigenvalues[i]))
}

fn velocity_at(patch: &Patch, cfg: &SchemeConfig) -> (Vector3<f64>, PatchFrame) {
    let h = cfg.h;
    let (q, eigenvalues) = eigen_frame(frame_of(patch, h));
    let p = patch.rotated(&q.transpose());
    let hx = (p.at(1, 0) - p.at(-1, 0)) / (2.0 * h);
    let hy = (p.at(0, 1) - p.at(0, -1)) / (2.0 * h);
    let h2 = h * h;
    let hxx = (p.at(1, 0) - 2.0 * p.at(0, 0) + p.at(-1, 0)) / h2;
    let hyy = (p.at(0, 1) - 2.0 * p.at(0, 0) + p.at(0, -1)) / h2;
    let hxy = (p.at(1, 1) - p.at(1, -1) - p.at(-1, 1) + p.at(-1, -1)) / (4.0 * h2);
    let z1 = hxx + hyy;

    let g = hx[0].hypot(hy[0]);
    let (c, s) = if g > 0.0 { (hx[0] / g, hy[0] / g) } else { (1.0, 0.0) };
    let d_eta = hx * c + hy * s;
    let d_xi = hy * c - hx * s;
    let d_ee = hxx * (c * c) + hxy * (2.0 * c * s) + hyy * (s * s);
    let d_xx = hxx * (s * s) - hxy * (2.0 * c * s) + hyy * (c * c);
    let d_ex = (hyy - hxx) * (c * s) + hxy * (c * c - s * s);
    // the third channel carries the second half of its 2Δw diffusion here,
    // so that the anti-diffusion weight only ever scales z1
    let z2 = Vector3::new(2.0 * d_xx[0], 2.0 * d_ee[1], z1[2]);

    let mut xp = (p.at(1, 0) - p.at(0, 0)) / h;
    let mut xm = (p.at(0, 0) - p.at(-1, 0)) / h;
    let mut yp = (p.at(0, 1) - p.at(0, 0)) / h;
    let mut ym = (p.at(0, 0) - p.at(0, -1)) / h;
    for k in 0..3 {
        (xp[k], xm[k]) = minmod(xp[k], xm[k]);
        (yp[k], ym[k]) = minmod(yp[k], ym[k]);
    }
    // one-sided derivative along (a, b); `forward` follows the direction
    let along = |a: f64, b: f64, ch: usize, forward: bool| {
        let dx = if (a >= 0.0) == forward { xp[ch] } else { xm[ch] };
        let dy = if (b >= 0.0) == forward { yp[ch] } else { ym[ch] };
        a * dx + b * dy
    };
    let (ue_p, ue_m) = (along(c, s, 0, true), along(c, s, 0, false));
    let (vx_p, vx_m) = (along(-s, c, 1, true), along(-s, c, 1, false));
    let rv = 2.0 * d_ex[1] * d_xi[1] / (vx_p * vx_p + vx_m * vx_m + 2.0 * cfg.eps);
    let ru = 2.0 * d_ex[0] * d_eta[0] / (ue_p * ue_p + ue_m * ue_m + 2.0 * cfg.eps);
    let z3 = Vector3::new(
        2.0 * rv * if rv > 0.0 { ue_m } else { ue_p },
        2.0 * ru * if ru > 0.0 { vx_m } else { vx_p },
        0.0,
    );
    let hat_t = z1 * (1.0 - cfg.anti_diffusion) + z2 - z3;
    (
        q * hat_t,
        PatchFrame {
            q,
            c,
            s,
            eigenvalues,
        },
    )
}

/// Frame used by the scheme at pixel `(x, y)`.
pub fn patch_frame(img: &MultiChannelImage, x: usize, y: usize, h: f64) -> Result<PatchFrame> {
    check(img)?;
    let cfg = SchemeConfig { h, ..SchemeConfig::default() };
    cfg.validate()?;
    Ok(velocity_at(&Patch::new(img, x, y), &cfg).1)
}

/// Discrete time derivative `u_t` at every pixel.
pub fn scheme_velocity(img: &MultiChannelImage, cfg: &SchemeConfig) -> Result<MultiChannelImage> {
    check(img)?;
    cfg.validate()?;
    let nx = img.extent()[0];
    let vals: Vec<[f64; 3]> = (0..img.pixel_count())
        .into_par_iter()
        .map(|lin| {
            let v = velocity_at(&Patch::new(img, lin % nx, lin / nx), cfg).0;
            [v.x, v.y, v.z]
        })
        .collect();
    img.with_data(vals.concat())
}

/// One explicit Euler step.
pub fn scheme_step(img: &MultiChannelImage, cfg: &SchemeConfig) -> Result<MultiChannelImage> {
    let vel = scheme_velocity(img, cfg)?;
    let data = img
        .data()
        .iter()
        .zip(vel.data())
        .map(|(u, v)| u + cfg.tau * v)
        .collect();
    img.with_data(data)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evolution {
    pub image: MultiChannelImage,
    pub time: f64,
}

/// `cfg.steps` successive scheme steps.
pub fn evolve(img: &MultiChannelImage, cfg: &SchemeConfig) -> Result<Evolution> {
    check(img)?;
    cfg.validate()?;
    let mut cur = img.clone();
    for _ in 0..cfg.steps {
        cur = scheme_step(&cur, cfg)?;
    }
    Ok(Evolution {
        image: cur,
        time: cfg.evolution_time(),
    })
}
