//! Images, structuring elements and neighbourhood clouds.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::median::{PointCloud, ValuePoint};

/// Regular planar or volumetric grid with 1 to 3 interleaved channels.
///
/// Pixel (x, y[, z]) lives at linear index ((z·ny + y)·nx + x), x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiChannelImage {
    extent: [usize; 3],
    dims: usize,
    channels: usize,
    h: f64,
    data: Vec<f64>,
}

impl MultiChannelImage {
    pub fn new(extent: &[usize], channels: usize, h: f64, data: Vec<f64>) -> Result<Self> {
        if !(2..=3).contains(&extent.len()) {
            return Err(invalid(format!("images have 2 or 3 axes, got {}", extent.len())));
        }
        if extent.contains(&0) {
            return Err(invalid("image extent must be positive"));
        }
        if !(1..=3).contains(&channels) {
            return Err(invalid(format!("channel count must be 1..=3, got {channels}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("grid step must be positive, got {h}")));
        }
        let pixels: usize = extent.iter().product();
        if data.len() != pixels * channels {
            return Err(invalid(format!(
                "expected {} samples, got {}",
                pixels * channels,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("image contains non-finite samples"));
        }
        let mut e = [1; 3];
        e[..extent.len()].copy_from_slice(extent);
        Ok(MultiChannelImage {
            extent: e,
            dims: extent.len(),
            channels,
            h,
            data,
        })
    }

    /// Samples `f` at every grid index.
    pub fn from_fn(
        extent: &[usize],
        channels: usize,
        h: f64,
        f: impl Fn(&[usize]) -> Vec<f64>,
    ) -> Result<Self> {
        let pixels: usize = extent.iter().product();
        let mut data = Vec::with_capacity(pixels * channels);
        let mut idx = vec![0usize; extent.len()];
        for _ in 0..pixels {
            let v = f(&idx);
            if v.len() != channels {
                return Err(invalid("sample function returned the wrong channel count"));
            }
            data.extend(v);
            for (i, e) in idx.iter_mut().zip(extent) {
                *i += 1;
                if *i < *e {
                    break;
                }
                *i = 0;
            }
        }
        Self::new(extent, channels, h, data)
    }

    pub fn filled(extent: &[usize], h: f64, value: &[f64]) -> Result<Self> {
        Self::from_fn(extent, value.len(), h, |_| value.to_vec())
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn extent(&self) -> &[usize] {
        &self.extent[..self.dims]
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn pixel_count(&self) -> usize {
        self.extent.iter().product()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Linear pixel index of a grid position, or `None` outside the grid.
    pub fn linear(&self, pos: &[i64]) -> Option<usize> {
        let mut lin = 0usize;
        for axis in (0..self.dims).rev() {
            let p = pos[axis];
            if p < 0 || p as usize >= self.extent[axis] {
                return None;
            }
            lin = lin * self.extent[axis] + p as usize;
        }
        Some(lin)
    }

    /// Grid position of a linear pixel index, padded with zeros.
    pub fn position(&self, mut lin: usize) -> [usize; 3] {
        let mut p = [0; 3];
        for (axis, slot) in p.iter_mut().enumerate().take(self.dims) {
            *slot = lin % self.extent[axis];
            lin /= self.extent[axis];
        }
        p
    }

    pub fn pixel(&self, lin: usize) -> &[f64] {
        &self.data[lin * self.channels..(lin + 1) * self.channels]
    }

    pub fn get(&self, pos: &[usize]) -> &[f64] {
        let p: Vec<i64> = pos.iter().map(|&v| v as i64).collect();
        let lin = self.linear(&p).expect("position inside the image");
        self.pixel(lin)
    }

    pub fn set(&mut self, pos: &[usize], value: &[f64]) {
        let p: Vec<i64> = pos.iter().map(|&v| v as i64).collect();
        let lin = self.linear(&p).expect("position inside the image");
        let c = self.channels;
        self.data[lin * c..(lin + 1) * c].copy_from_slice(value);
    }

    /// Same grid with new samples.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.extent(), self.channels, self.h, data)
    }

    /// Applies `f` to every pixel value.
    pub fn map_values(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut out = Vec::with_capacity(self.data.len());
        for px in self.data.chunks(self.channels) {
            out.extend(f(px));
        }
        self.with_data(out)
    }

    /// Largest absolute sample difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Integer offsets sampling a disc or ball of radius ρ at grid step h.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuringElement {
    radius: f64,
    h: f64,
    dims: usize,
    offsets: Vec<[i64; 3]>,
}

impl StructuringElement {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Offsets in lexicographic order, padded with zeros.
    pub fn offsets(&self) -> &[[i64; 3]] {
        &self.offsets
    }
}

fn sample(rho: f64, h: f64, dims: usize) -> Result<StructuringElement> {
    if !(rho > 0.0 && rho.is_finite() && h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("need positive rho and h, got rho={rho}, h={h}")));
    }
    let r = rho / h;
    let bound = r * r * (1.0 + 1e-9);
    let m = r.floor() as i64 + 1;
    let zr = if dims == 3 { -m..=m } else { 0..=0 };
    let mut offsets = Vec::new();
    for i in -m..=m {
        for j in -m..=m {
            for k in zr.clone() {
                if ((i * i + j * j + k * k) as f64) <= bound {
                    offsets.push([i, j, k]);
                }
            }
        }
    }
    Ok(StructuringElement {
        radius: rho,
        h,
        dims,
        offsets,
    })
}

/// Grid points of the disc of radius ρ, boundary included.
pub fn sample_disc(rho: f64, h: f64) -> Result<StructuringElement> {
    sample(rho, h, 2)
}

/// Grid points of the ball of radius ρ, boundary included.
pub fn sample_ball(rho: f64, h: f64) -> Result<StructuringElement> {
    sample(rho, h, 3)
}

/// Values of the image at `center + offset` for all offsets inside the grid.
pub fn extract_cloud(
    img: &MultiChannelImage,
    center: &[usize],
    se: &StructuringElement,
) -> Result<PointCloud> {
    if se.dims() != img.dims() || center.len() != img.dims() {
        return Err(invalid("structuring element and image dimensions differ"));
    }
    if center.iter().zip(img.extent()).any(|(c, e)| c >= e) {
        return Err(invalid(format!("centre {center:?} outside the image")));
    }
    let mut pts = Vec::with_capacity(se.len());
    let mut pos = [0i64; 3];
    for off in se.offsets() {
        for a in 0..img.dims() {
            pos[a] = center[a] as i64 + off[a];
        }
        if let Some(lin) = img.linear(&pos) {
            pts.push(ValuePoint::new(img.pixel(lin)));
        }
    }
    PointCloud::new(pts)
}

type Evaluator = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A value function on R^m with values in R^n.
#[derive(Clone)]
pub struct AnalyticField {
    domain_dim: usize,
    value_dim: usize,
    f: Arc<Evaluator>,
}

impl fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnalyticField(R^{} -> R^{})", self.domain_dim, self.value_dim)
    }
}

impl AnalyticField {
    pub fn new(
        domain_dim: usize,
        value_dim: usize,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        assert!((2..=3).contains(&domain_dim) && (1..=3).contains(&value_dim));
        AnalyticField {
            domain_dim,
            value_dim,
            f: Arc::new(f),
        }
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn value_dim(&self) -> usize {
        self.value_dim
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let v = (self.f)(x);
        debug_assert_eq!(v.len(), self.value_dim);
        v
    }

    pub fn eval_point(&self, x: &[f64]) -> ValuePoint {
        ValuePoint::new(&self.eval(x))
    }
}

/// Field values at `origin + offset·h` for every offset of `se`.
pub fn rasterize(field: &AnalyticField, se: &StructuringElement, origin: &[f64]) -> Result<PointCloud> {
    let m = field.domain_dim();
    if se.dims() != m || origin.len() != m {
        return Err(invalid("field, structuring element and origin dimensions differ"));
    }
    let mut x = [0.0; 3];
    let pts = se
        .offsets()
        .iter()
        .map(|off| {
            for a in 0..m {
                x[a] = origin[a] + off[a] as f64 * se.h();
            }
            field.eval_point(&x[..m])
        })
        .collect();
    PointCloud::new(pts)
}
