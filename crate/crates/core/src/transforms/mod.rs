//! Changes of variables and the operator algebra they are built from.

pub mod bilinear;
pub mod changes;
pub mod linalg;
pub mod scalar_maps;

pub use bilinear::{
    apply_bilinear, apply_k, apply_m, bilinear_multiplier, solve_i_plus_k, BilinearKind, InverseMethod,
    NormalFormOperator,
};
pub use changes::{
    full_compose, full_compose_traced, kappa_apply, kappa_factor, kappa_inverse_closed_form, phi1, phi2, phi3,
    phi34, phi4, phi4_with, physical_from_w, physical_size, ComposeOptions, Direction, TransformChainState,
    PHI4_INVERSE_RADIUS,
};
pub use linalg::DenseMatrix;
pub use scalar_maps::{p_functional, phi_inverse_fn, q_functional, q_functional_complex, rho};
