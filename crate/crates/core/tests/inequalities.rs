mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::*;
use kirchhoff_core::transforms::{apply_bilinear, apply_k, apply_m, phi4, BilinearKind, Direction};
use kirchhoff_core::{normal_form, ComplexField, FieldPair, SpectralGrid};
use num_complex::Complex64;
use proptest::prelude::*;

const S_VALUES: [f64; 4] = [0.0, 1.0, 2.5, 4.0];

/// Either a smooth random field or a handful of isolated modes; the sparse
/// ones come much closer to the extremal configurations of the bounds.
fn field_strategy(g: Arc<SpectralGrid>) -> impl Strategy<Value = ComplexField<f64>> {
    let n = g.len();
    let g2 = g.clone();
    prop_oneof![
        (0u64..1_000_000).prop_map(move |seed| free(&g, seed, 1.0, 1.0)),
        prop::collection::vec((0..n, -1.0f64..1.0, -1.0f64..1.0), 1..4).prop_map(move |entries| {
            let mut f = ComplexField::zeros(&g2);
            for (i, re, im) in entries {
                f.coeffs_mut()[i] += Complex64::new(re, im);
            }
            if f.is_zero() {
                f.coeffs_mut()[0] = Complex64::new(1.0, 0.0);
            }
            f
        }),
    ]
}

fn grid_strategy() -> impl Strategy<Value = Arc<SpectralGrid>> {
    prop_oneof![Just(grid(1, 8)), Just(grid(2, 5)), Just(grid(3, 3))]
}

fn norm(f: &ComplexField<f64>, s: f64) -> f64 {
    f.sobolev_norm(s).unwrap()
}

fn scaled_conj(f: ComplexField<f64>, size: f64) -> FieldPair<f64> {
    let m0 = f.grid().m0();
    let n = norm(&f, m0);
    FieldPair::conjugate_from(f.scale_real(size / n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bilinear_norm_bounds(
        (u, v, h) in grid_strategy().prop_flat_map(|g| (field_strategy(g.clone()), field_strategy(g.clone()), field_strategy(g)))
    ) {
        let m0 = u.grid().m0();
        for s in S_VALUES {
            let a = norm(&apply_bilinear(BilinearKind::A12, &u, &v, &h).unwrap(), s);
            prop_assert!(a <= 0.375 * norm(&u, m0) * norm(&v, m0) * norm(&h, s) * (1.0 + 1e-12));
            let c = norm(&apply_bilinear(BilinearKind::C12, &u, &v, &h).unwrap(), s);
            prop_assert!(c <= norm(&u, 1.0) * norm(&v, 1.0) * norm(&h, s) / 16.0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn m_and_k_norm_bounds(
        (w, a, size) in grid_strategy().prop_flat_map(|g| (field_strategy(g.clone()), field_strategy(g), 0.01f64..0.5))
    ) {
        let base = scaled_conj(w, size);
        let dir = FieldPair::conjugate_from(a);
        let m0 = base.grid().m0();
        let wm0 = base.norm(m0);
        let mx = apply_m(&base, &dir).unwrap();
        let kx = apply_k(&base, &dir).unwrap();
        for s in S_VALUES {
            prop_assert!(mx.norm(s) <= 7.0 / 16.0 * wm0 * wm0 * dir.norm(s) * (1.0 + 1e-12));
            let k_bound = 7.0 / 16.0 * wm0 * wm0 * dir.norm(s) + 7.0 / 8.0 * wm0 * base.norm(s) * dir.norm(m0);
            prop_assert!(kx.norm(s) <= k_bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn cubic_and_remainder_bounds(
        (w, size) in grid_strategy().prop_flat_map(|g| (field_strategy(g), 0.01f64..0.5))
    ) {
        let pair = scaled_conj(w, size);
        let parts = normal_form::decompose(&pair).unwrap();
        let x3 = normal_form::x3_plus(&pair).unwrap();
        let p = kirchhoff_core::transforms::p_functional(&pair.first, &pair.second).unwrap();
        let w1 = pair.norm(1.0);
        for s in S_VALUES {
            let ws = pair.norm(s);
            prop_assert!(parts.b3.norm(s) <= 0.5 * w1 * w1 * ws * (1.0 + 1e-12));
            prop_assert!(x3.norm(s) <= 0.25 * w1 * w1 * ws * (1.0 + 1e-12));
            prop_assert!(parts.r_ge5.norm(s) <= 2.0 * p * parts.b3.norm(s) * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn normal_form_inverse_bounds(
        (w, size) in grid_strategy().prop_flat_map(|g| (field_strategy(g), 0.001f64..0.25))
    ) {
        let eta = scaled_conj(w, size);
        let m0 = eta.grid().m0();
        let back = phi4(Direction::Inverse, &eta).unwrap();
        prop_assert!(back.norm(m0) <= 2.0 * eta.norm(m0));
        for s in S_VALUES {
            prop_assert!(back.norm(s) <= 2.0 * eta.norm(s));
        }
    }
}

#[test]
fn small_divisor_bound_is_exhaustive_on_attained_norms() {
    for d in [2usize, 3] {
        let r = 50i64;
        let mut norms = BTreeSet::new();
        let mut j = vec![-r; d];
        loop {
            let n2: i64 = j.iter().map(|x| x * x).sum();
            if n2 > 0 {
                norms.insert(n2);
            }
            let mut axis = 0;
            while axis < d && j[axis] == r {
                j[axis] = -r;
                axis += 1;
            }
            if axis == d {
                break;
            }
            j[axis] += 1;
        }
        let norms: Vec<i64> = norms.into_iter().collect();
        let mut violations = 0usize;
        for &a in &norms {
            let ja = (a as f64).sqrt();
            for &b in &norms {
                if a == b {
                    continue;
                }
                let gap = ((a - b) as f64 / (ja + (b as f64).sqrt())).abs();
                if 1.0 / gap > 3.0 * ja {
                    violations += 1;
                }
            }
        }
        assert_eq!(violations, 0, "d={d}");
    }
}
