//! Sheaves of DG rings on finite spaces: exact computation of stalkwise cohomology,
//! pseudo-semi-free resolutions, factorizations, Ore squares and derived intersections.

pub mod derived;
pub mod dg;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod graded;
pub mod homology;
pub mod groebner;
pub mod linalg;
pub mod module;
pub mod parse;
pub mod poly;
pub mod problem;
pub mod pseudo_free;
pub mod resolution;
pub mod space;
pub mod stalk;

pub use dg::{DgModuleSheaf, DgRing, FiberProduct, RingedSpace, SheafHom};
pub use error::{Error, Result};
pub use field::{Coeff, Field};
pub use graded::{GcMonomial, GcPoly};
pub use module::{ModVec, ModulePresentation};
pub use poly::{Poly, PolyRing};
pub use pseudo_free::{Generator, GeneratorSpec, PsfRing, Section};
pub use space::{FiniteSpace, OpenSet};
pub use derived::{derived_intersection, derived_tensor, koszul_tor_oracle, ClosedSubspace, TensorMode};
pub use homology::{cohomology, is_quasi_iso, CohomologyReport, Window};
pub use problem::{parse_problem, Problem};
pub use resolution::{certify, factorize, ore_square, resolve, Certificate, ResolutionStage};
