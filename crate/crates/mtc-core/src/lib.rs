//! Numerical laboratory for weighted Carleson embedding and potential
//! theory on finite n-trees: Hardy operators, embedding constants,
//! discrete capacities, majorant constructions, covering machinery, and
//! random-lattice kernel comparisons.

pub mod capacity;
pub mod constants;
pub mod error;
pub mod field;
pub mod instance;
pub mod lattice;
pub mod majorization;
pub mod maxprinciple;
pub mod ops;
pub mod poset;
pub mod suite;
pub mod tol;

pub use error::{Error, Result};
pub use field::{NodeField, TensorWeight};
pub use ops::EnergyReport;
pub use poset::{DownSet, NTree, Tree, VertexSet};
