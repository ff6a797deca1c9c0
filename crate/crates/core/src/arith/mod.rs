//! Exact arithmetic: Z[w], Q(√5), Q(i), Q(ζ15), the algebra A = F[u, v] and F_{p^n}.

pub mod alga;
pub mod cyclo;
pub mod finite;
pub mod gauss;
pub mod hnf;
pub mod quad;

pub use alga::{AlgAElem, VSq};
pub use cyclo::CycloElem;
pub use finite::{dickson_permutes, FieldTable};
pub use gauss::GaussRatElem;
pub use hnf::hnf_of;
pub use quad::{quad_norm_trace_conj, tp_enumerate, QuadElem, QuadInt};
