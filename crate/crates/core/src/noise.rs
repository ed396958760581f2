//! Impulse noise for test inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::window::MultiChannelImage;

/// Replaces each channel entry independently, with probability `density`,
/// by a uniform draw from `range`. The same seed gives the same output.
pub fn add_impulse_noise(
    img: &MultiChannelImage,
    density: f64,
    range: (f64, f64),
    seed: u64,
) -> Result<MultiChannelImage> {
    if !(0.0..=1.0).contains(&density) {
        return Err(invalid(format!("noise density must lie in [0, 1], got {density}")));
    }
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(invalid(format!("invalid noise range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = img
        .data()
        .iter()
        .map(|&v| {
            // Draw both numbers for every entry so the stream does not
            // depend on earlier outcomes.
            let hit = rng.random::<f64>() < density;
            let value = lo + (hi - lo) * rng.random::<f64>();
            if hit {
                value
            } else {
                v
            }
        })
        .collect();
    img.with_data(data)
}
