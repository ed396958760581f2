//! Multivariate median filters for multi-channel images, the PDEs they
//! approximate for small windows, and an explicit scheme for one of those
//! PDEs.
//!
//! The shared data types are re-exported here; algorithms live in the
//! modules.

pub mod error;
pub mod filter;
pub mod harness;
pub mod io;
pub mod median;
pub mod noise;
pub mod pde;
pub mod scheme;
pub mod window;

pub use error::{Error, Result};
pub use filter::{FilterReport, MedianSpec, MedianVariant};
pub use median::{PointCloud, SolverConfig, SolverReport, ValuePoint, WhiteningTransform};
pub use pde::{JetPoint, PdeUpdate, StructureTensorFrame};
pub use scheme::SchemeConfig;
pub use window::{AnalyticField, MultiChannelImage, StructuringElement};
