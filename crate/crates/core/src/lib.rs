//! Exact Grassmann-algebra engine and triangulation toolkit for checking
//! Pachner-move identities of Grassmann weights and computing the deformed
//! invariant of 3-manifolds with boundary.

pub mod chain3d;
pub mod chain4d;
pub mod error;
pub mod grassmann;
pub mod invariant3d;
pub mod linalg;
pub mod samples;
pub mod scalars;
pub mod triangulation;
pub mod weights3d;

pub use error::{Error, Result};
pub use grassmann::{
    berezin_integrate, integrate_measure, integrate_product, FirstOrderOperator, Gen, GeneratorRegistry,
    GrassmannElement, Monomial,
};
pub use linalg::{pfaffian, Matrix, SkewMatrix};
pub use scalars::{Scalar, Vertex, ZetaAssignment};
pub use triangulation::{pachner_move, PachnerMove, Triangulation};
pub use weights3d::{AlphaSystem, AlphaSystem3, MoveCheck};
pub use chain4d::AlphaSystem4;
