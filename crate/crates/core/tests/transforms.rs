mod common;

use common::*;
use kirchhoff_core::transforms::bilinear::{pair_from_vec, pair_to_vec};
use kirchhoff_core::transforms::{
    full_compose, full_compose_traced, kappa_apply, kappa_inverse_closed_form, p_functional, phi1, phi2, phi3,
    phi4, phi_inverse_fn, physical_size, q_functional, rho, solve_i_plus_k, DenseMatrix,
};
use kirchhoff_core::{ComplexField, ComposeOptions, Direction, Error, FieldPair, InverseMethod};
use num_complex::Complex64;
use proptest::prelude::*;

fn physical(g: &std::sync::Arc<kirchhoff_core::SpectralGrid>, seed: u64, size: f64) -> FieldPair<f64> {
    let m0 = g.m0();
    let u = hermitian(g, seed, 1.0, m0 + 0.5);
    let v = hermitian(g, seed + 1, 1.0, m0 - 0.5);
    let p = FieldPair::new(u, v).unwrap();
    p.scale_real(size / physical_size(&p))
}

#[test]
fn scalar_map_examples() {
    assert_eq!(rho(0.0f64).unwrap(), 0.0);
    assert!((rho(4.0f64).unwrap() + 0.5).abs() < 1e-16);
    for x in [0.1f64, 1.0, 10.0] {
        let r = rho(x).unwrap();
        assert!(((1.0 - r) / (1.0 + r) - (1.0 + 2.0 * x).sqrt()).abs() < 1e-14);
    }
    assert!(rho(-1.0f64).is_err());
    assert_eq!(phi_inverse_fn(0.0f64).unwrap(), 0.0);
    assert!((phi_inverse_fn(3f64.sqrt()).unwrap() - 1.0).abs() < 1e-15);
    assert!((phi_inverse_fn(12.0f64).unwrap() - 4.0).abs() < 1e-14);
    assert!(phi_inverse_fn(-1.0f64).is_err());

    let g = grid(1, 2);
    let mut f = ComplexField::zeros(&g);
    f.set(&[1], Complex64::new(0.5, 0.0), true).unwrap();
    assert!((q_functional(&f, &f).unwrap() - 0.5).abs() < 1e-16);
}

#[test]
fn p_functional_example_and_identity() {
    // a single real mode scaled so that Q = √3, hence P = 1
    let g = grid(1, 2);
    let mut f = ComplexField::zeros(&g);
    f.set(&[1], Complex64::new(1.0, 0.0), true).unwrap();
    let q1 = q_functional(&f, &f).unwrap();
    let f = f.scale_real((3f64.sqrt() / q1).sqrt());
    assert!((p_functional(&f, &f).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn stage_examples() {
    let g = grid(1, 5);
    let q = ComplexField::delta(&g, &[4], Complex64::new(1.0, 0.0)).unwrap();
    let uv = phi1(Direction::Forward, &FieldPair::new(q.clone(), ComplexField::zeros(&g)).unwrap());
    assert_eq!(uv.first.get(&[4]).unwrap(), Complex64::new(0.5, 0.0));
    assert!(uv.second.is_zero());
    let fg = phi2(Direction::Inverse, &FieldPair::new(q.clone(), ComplexField::zeros(&g)).unwrap());
    assert_eq!(fg.first, fg.second);
    assert!((fg.first.get(&[4]).unwrap().re - 0.5f64.sqrt()).abs() < 1e-16);
    let zero = FieldPair::<f64>::zeros(&g);
    for dir in [Direction::Forward, Direction::Inverse] {
        assert_eq!(phi3(dir, &zero).unwrap(), zero);
        assert_eq!(phi4(dir, &zero).unwrap(), zero);
        assert_eq!(full_compose(dir, &zero, &ComposeOptions::default()).unwrap(), zero);
    }
}

#[test]
fn geometric_series_closed_form_matches_dense_solve() {
    for (d, n, seed) in [(1, 8, 1u64), (2, 4, 2), (2, 6, 3)] {
        let g = grid(d, n);
        for k in 0..20 {
            let base = conj_pair(&g, seed * 100 + k, 0.05 + 0.05 * k as f64);
            let rhs = free_pair(&g, seed * 100 + k + 50, 1.0);
            let dim = 2 * g.len();
            let mut a = DenseMatrix::from_columns(dim, |col| {
                let mut e = vec![Complex64::new(0.0, 0.0); dim];
                e[col] = Complex64::new(1.0, 0.0);
                pair_to_vec(&kappa_apply(&base, &pair_from_vec(&g, &e)).unwrap())
            });
            a.add_identity();
            let dense = pair_from_vec(&g, &a.solve(&pair_to_vec(&rhs)).unwrap());
            let closed = kappa_inverse_closed_form(&base, &rhs).unwrap();
            assert!((&dense - &closed).max_abs() < 1e-11, "d={d} k={k}");
        }
    }
}

#[test]
fn inverse_outside_its_ball_is_rejected() {
    let g = grid(1, 6);
    let big = conj_pair(&g, 1, 0.3);
    assert!(matches!(phi4(Direction::Inverse, &big), Err(Error::Domain(_))));
    let state = physical(&g, 2, 0.2);
    assert!(matches!(full_compose(Direction::Inverse, &state, &ComposeOptions::default()), Err(Error::Domain(_))));
}

#[test]
fn composition_constant_is_moderate() {
    // ‖w‖_s against ‖u‖_{s+½} + ‖v‖_{s-½}, both ways
    let g = grid(1, 8);
    let opts = ComposeOptions::default();
    let mut c0: f64 = 0.0;
    for seed in 0..50 {
        let state = physical(&g, seed, 0.09);
        let w = full_compose(Direction::Inverse, &state, &opts).unwrap();
        for s in [1.0, 2.0, 3.0] {
            let phys = state.first.sobolev_norm(s + 0.5).unwrap() + state.second.sobolev_norm(s - 0.5).unwrap();
            let ws = w.norm(s);
            c0 = c0.max(ws / phys).max(phys / ws);
        }
    }
    assert!(c0.is_finite() && c0 < 4.0, "C0 = {c0}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn linear_stages_round_trip_exactly(seed in 0u64..1_000_000, d in 1usize..=2) {
        let g = grid(d, 6);
        let p = free_pair(&g, seed, 1.0);
        for stage in [phi1::<f64>, phi2::<f64>] {
            let back = stage(Direction::Forward, &stage(Direction::Inverse, &p));
            prop_assert!((&back - &p).max_abs() <= 1e-15);
            let back = stage(Direction::Inverse, &stage(Direction::Forward, &p));
            prop_assert!((&back - &p).max_abs() <= 1e-15);
        }
        let qp = FieldPair::new(hermitian(&g, seed, 1.0, 1.0), hermitian(&g, seed + 1, 1.0, 1.0)).unwrap();
        let fg = phi2(Direction::Inverse, &qp);
        prop_assert!((&fg.first.conj_mirror() - &fg.second).max_abs() <= 1e-15);
    }

    #[test]
    fn diagonalizing_stage_round_trips(seed in 0u64..1_000_000, d in 1usize..=2, size in 0.0f64..1.0) {
        let g = grid(d, 6);
        let eta = FieldPair::conjugate_from(free(&g, seed, size, 1.0));
        let fg = phi3(Direction::Forward, &eta).unwrap();
        prop_assert!(fg.conjugate_defect() <= 1e-15);
        let back = phi3(Direction::Inverse, &fg).unwrap();
        prop_assert!((&back - &eta).max_abs() <= 1e-12);
        let qf = q_functional(&fg.first, &fg.second).unwrap();
        let qe = q_functional(&eta.first, &eta.second).unwrap();
        prop_assert!((qf * (1.0 + 2.0 * qf).sqrt() - qe).abs() <= 1e-12);
        let p = p_functional(&eta.first, &eta.second).unwrap();
        prop_assert!(p <= qe && p >= 0.0);
    }

    #[test]
    fn normal_form_stage_round_trips(seed in 0u64..1_000_000, d in 1usize..=2, size in 0.0f64..0.2) {
        let g = grid(d, 6);
        let w = conj_pair(&g, seed, size);
        let eta = phi4(Direction::Forward, &w).unwrap();
        let back = phi4(Direction::Inverse, &eta).unwrap();
        prop_assert!((&back - &w).max_abs() <= 1e-12);
        prop_assert!(back.conjugate_defect() <= 1e-15);
    }

    #[test]
    fn full_composition_round_trips(seed in 0u64..1_000_000, d in 1usize..=2, size in 0.0f64..0.1) {
        let g = grid(d, 6);
        let opts = ComposeOptions::default();
        let state = physical(&g, seed, size);
        let chain = full_compose_traced(Direction::Inverse, &state, &opts).unwrap();
        prop_assert!(chain.max_symmetry_defect() <= 1e-15);
        let w = chain.stages.last().unwrap().1.clone();
        let back = full_compose(Direction::Forward, &w, &opts).unwrap();
        prop_assert!((&back - &state).max_abs() <= 1e-11);
        prop_assert!(back.hermitian_defect() <= 1e-15);
    }

    #[test]
    fn neumann_and_dense_inverse_agree(seed in 0u64..1_000_000, size in 0.0f64..0.4) {
        let g = grid(2, 4);
        let base = conj_pair(&g, seed, size);
        let rhs = free_pair(&g, seed + 1, 1.0);
        let a = solve_i_plus_k(&base, &rhs, InverseMethod::Neumann).unwrap();
        let b = solve_i_plus_k(&base, &rhs, InverseMethod::Dense).unwrap();
        prop_assert!((&a - &b).max_abs() <= 1e-10);
        let residual = &(&a + &kirchhoff_core::transforms::apply_k(&base, &a).unwrap()) - &rhs;
        prop_assert!(residual.max_abs() <= 1e-12 * rhs.max_abs());
    }
}
