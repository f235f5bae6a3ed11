//! Common interface of every right-hand side the integrator can drive.

use crate::error::Result;
use crate::field::{FieldPair, PairSymmetry};
use crate::scalar::Scalar;

pub trait VectorField<T: Scalar> {
    fn eval(&self, state: &FieldPair<T>) -> Result<FieldPair<T>>;

    /// Symmetry class the flow preserves; the integrator projects onto it.
    fn symmetry(&self) -> PairSymmetry;

    fn name(&self) -> &'static str;
}

impl<T: Scalar, F: VectorField<T> + ?Sized> VectorField<T> for &F {
    fn eval(&self, state: &FieldPair<T>) -> Result<FieldPair<T>> {
        (**self).eval(state)
    }

    fn symmetry(&self) -> PairSymmetry {
        (**self).symmetry()
    }

    fn name(&self) -> &'static str {
        (**self).name()
    }
}
