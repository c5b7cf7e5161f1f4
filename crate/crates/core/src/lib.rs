//! Simple closed geodesics on hyperbolic once-punctured tori, the length
//! norm they define on real homology, and the shape of its unit ball.
//!
//! A torus is given by the traces `(x, y, z)` of a generator pair and its
//! product, subject to `x² + y² + z² = xyz`. From there:
//!
//! - [`farey`] enumerates primitive classes with their traces,
//! - [`norm`] evaluates the norm and brackets the unit ball,
//! - [`hyperbolic`] measures axes and crossing angles,
//! - [`counting`] counts geodesics by length,
//! - [`moduli`] moves the torus around moduli space.

pub mod counting;
pub mod error;
pub mod farey;
pub mod hyperbolic;
pub mod moduli;
pub mod norm;
pub mod trace;

pub use error::{Error, Result};
pub use farey::PrimitiveClass;
pub use trace::{LengthValue, Mat2, ModuliPoint, TraceTriple};
