//! Cantor space with exact representatives: eventually periodic streams,
//! finite unions of cylinders and dyadic measures.

pub mod coding;
pub mod cylinder;
pub mod dyadic;
pub mod stream;

pub use coding::{code_family, pair, project, unpair};
pub use cylinder::{capture_check, capture_check_many, measure_of, member, schnorr_test_level, CylinderFamily, Word};
pub use dyadic::Dyadic;
pub use stream::{approx_eq, join, split, tailset_closure, EPStream, MAX_CLOSURE_BOUND};
