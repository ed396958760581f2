//! Sliding-window median filters over multi-channel images.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::median::{
    l1_median, medoid, oja_median, regularize_simplex, trl1_median, PointCloud, SolverConfig,
    SolverReport, ValuePoint,
};
use crate::window::{extract_cloud, MultiChannelImage, StructuringElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MedianVariant {
    L1,
    /// Oja median with simplices of full dimension.
    OjaFull,
    /// Oja median with triangles, for three channels.
    Oja2In3,
    TrL1,
    Medoid,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MedianSpec {
    pub variant: MedianVariant,
    pub solver: SolverConfig,
    /// Simplex radius for input regularisation.
    pub regularize: Option<f64>,
}

impl MedianSpec {
    pub fn new(variant: MedianVariant) -> Self {
        MedianSpec {
            variant,
            solver: SolverConfig::default(),
            regularize: None,
        }
    }

    pub fn with_regularize(mut self, h: f64) -> Self {
        self.regularize = Some(h);
        self
    }

    pub fn validate(&self, channels: usize) -> Result<()> {
        self.solver.validate()?;
        match (self.variant, channels) {
            (MedianVariant::OjaFull, 1) => {
                return Err(invalid("the Oja median needs at least two channels"))
            }
            (MedianVariant::Oja2In3, c) if c != 3 => {
                return Err(invalid("the triangle Oja median needs three channels"))
            }
            _ => {}
        }
        if let Some(h) = self.regularize {
            if !(h >= 0.0 && h.is_finite()) {
                return Err(invalid(format!("regularisation radius must be >= 0, got {h}")));
            }
        }
        Ok(())
    }

    /// Median of one cloud, falling back to the medoid when the solver
    /// reports a degenerate or unsolvable configuration.
    pub fn apply(&self, cloud: &PointCloud) -> Result<PixelOutcome> {
        self.validate(cloud.dim())?;
        let work = match self.regularize {
            Some(h) if h > 0.0 => regularize_simplex(cloud, h)?,
            _ => cloud.clone(),
        };
        let n = work.dim();
        let rep: Option<SolverReport> = match self.variant {
            MedianVariant::Medoid => None,
            MedianVariant::L1 => Some(l1_median(&work, &self.solver)?),
            MedianVariant::OjaFull if work.len() >= n => Some(oja_median(&work, n, &self.solver)?),
            MedianVariant::Oja2In3 if work.len() >= 2 => Some(oja_median(&work, 2, &self.solver)?),
            MedianVariant::TrL1 if work.len() > n => Some(trl1_median(&work, &self.solver)?),
            _ => None,
        };
        Ok(match rep {
            None => PixelOutcome {
                value: medoid(cloud),
                iterations: 0,
                converged: true,
                fallback: self.variant != MedianVariant::Medoid,
            },
            Some(r) if r.degenerate => PixelOutcome {
                value: medoid(cloud),
                iterations: r.iterations,
                converged: r.converged,
                fallback: true,
            },
            Some(r) => PixelOutcome {
                value: r.minimiser,
                iterations: r.iterations,
                converged: r.converged,
                fallback: false,
            },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PixelOutcome {
    pub value: ValuePoint,
    pub iterations: usize,
    pub converged: bool,
    /// Medoid used instead of the requested median.
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterReport {
    pub output: MultiChannelImage,
    pub converged_fraction: f64,
    pub max_iterations: usize,
    pub fallback_pixels: usize,
}

/// One pass of the median filter.
pub fn median_filter(
    img: &MultiChannelImage,
    se: &StructuringElement,
    spec: &MedianSpec,
) -> Result<FilterReport> {
    spec.validate(img.channels())?;
    if se.dims() != img.dims() {
        return Err(invalid("structuring element and image dimensions differ"));
    }
    let outcomes: Vec<PixelOutcome> = (0..img.pixel_count())
        .into_par_iter()
        .map(|lin| {
            let p = img.position(lin);
            let cloud = extract_cloud(img, &p[..img.dims()], se)?;
            spec.apply(&cloud)
        })
        .collect::<Result<_>>()?;
    let mut data = Vec::with_capacity(img.data().len());
    let mut converged = 0usize;
    let mut max_iterations = 0;
    let mut fallback_pixels = 0;
    for o in &outcomes {
        data.extend_from_slice(o.value.as_slice());
        converged += o.converged as usize;
        max_iterations = max_iterations.max(o.iterations);
        fallback_pixels += o.fallback as usize;
    }
    Ok(FilterReport {
        output: img.with_data(data)?,
        converged_fraction: converged as f64 / outcomes.len() as f64,
        max_iterations,
        fallback_pixels,
    })
}

/// `k` successive passes, each consuming the previous output.
pub fn iterate_filter(
    img: &MultiChannelImage,
    se: &StructuringElement,
    spec: &MedianSpec,
    k: usize,
) -> Result<FilterReport> {
    if k == 0 {
        return Err(invalid("iteration count must be at least 1"));
    }
    let mut rep = median_filter(img, se, spec)?;
    let mut worst = rep.converged_fraction;
    let mut fallback = rep.fallback_pixels;
    for _ in 1..k {
        let next = median_filter(&rep.output, se, spec)?;
        worst = worst.min(next.converged_fraction);
        fallback += next.fallback_pixels;
        rep = FilterReport {
            max_iterations: rep.max_iterations.max(next.max_iterations),
            ..next
        };
    }
    rep.converged_fraction = worst;
    rep.fallback_pixels = fallback;
    Ok(rep)
}
