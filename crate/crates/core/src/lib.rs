//! Spectral workbench for the Kirchhoff equation on the torus.
//!
//! The crate is generic over the real scalar type ([`Scalar`], implemented for
//! `f32` and `f64`); the aliases at the root fix it to `f64`.

pub mod error;
pub mod field;
pub mod grid;
pub mod integrator;
pub mod kirchhoff;
pub mod normal_form;
pub mod scalar;
pub mod transforms;
pub mod vector_field;

pub use error::{Error, Result};
pub use field::{ComplexField, ConjugatePair, FieldPair, PairSymmetry, Symmetry};
pub use grid::{CoefficientKind, ResonanceClass, SpectralGrid};
pub use scalar::Scalar;
pub use vector_field::VectorField;

pub use integrator::{integrate, step, ExitReason, IntegratorConfig, Monitors, Scheme, TrajectoryRecord};
pub use kirchhoff::KirchhoffField;
pub use normal_form::{LinearField, Syst6DicField, SystUvField, XPlusField, XPlusMethod};
pub use transforms::{ComposeOptions, Direction, InverseMethod};

pub type Field = ComplexField<f64>;
pub type Field32 = ComplexField<f32>;
pub type Pair = FieldPair<f64>;
pub type Pair32 = FieldPair<f32>;
pub type Conjugate = ConjugatePair<f64>;
