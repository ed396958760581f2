//! Analytic right-hand sides of the PDEs approximated by median filters.

mod coeff;
mod jet;
mod rhs;

pub use coeff::{q1, q2, q3};
pub use jet::{jet_from_analytic, structure_frame, JetPoint, StructureTensorFrame};
pub use rhs::{
    build_d3, l1_rhs_22, l1_rhs_23_aligned, oja_rhs_22, oja_rhs_23, oja_rhs_33, Coefficients,
    PdeUpdate,
};
