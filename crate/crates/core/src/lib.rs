//! Typical properties and typical elements.
//!
//! Finite structures are handled exactly through automorphism orbits, dense
//! linear orders through quantifier elimination over symbolic parameters, and
//! Cantor space through eventually periodic streams and cylinder sets.

pub mod axioms;
pub mod cantor;
pub mod corpus;
pub mod dlo;
pub mod engine;
pub mod enumerate;
pub mod family;
pub mod model;
pub mod par;
pub mod symmetry;
pub mod syntax;

pub use engine::{classify_element, classify_property, typical_set, FilterMode};
pub use model::{evaluate, extension, load_structure, FiniteStructure, Valuation};
pub use syntax::{parse_formula, Formula, Signature};
