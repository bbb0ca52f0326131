mod common;

use common::{e, ordered_state, seeded, state};
use peakon_core::flows::{factorize, FactorizationPair};
use peakon_core::lax::*;
use peakon_core::matrix::{determinant, Lu};
use peakon_core::spectral::lax_spectrum;
use peakon_core::Mat;
use proptest::prelude::*;

#[test]
fn three_peak_rank_one_pattern() {
    let s = seeded(21, 3, Sector::Minus);
    let l = lax_from_state(&s).unwrap().matrix;
    assert!((l[(0, 2)] * l[(1, 1)] - l[(0, 1)] * l[(1, 2)]).abs() <= 1e-12);
}

#[test]
fn leading_minors_match_lu_n5() {
    let s = seeded(22, 5, Sector::Minus);
    let lax = lax_from_state(&s).unwrap();
    let dets = lax.leading_minor_dets().unwrap();
    for (k, d) in dets.iter().enumerate() {
        let idx: Vec<usize> = (0..=k).collect();
        let lu = determinant(&lax.matrix.select(&idx, &idx)).unwrap();
        assert!((d - lu).abs() <= 1e-10 * lu.abs(), "k={} formula={} lu={}", k + 1, d, lu);
    }
}

#[test]
fn tridiagonal_entries_n2_against_dense_inverse() {
    let s = state(&[-1.0, 1.0], &[1.0, 1.0], Sector::Minus);
    let j = tridiagonal_inverse(&s).unwrap();
    let dense = Lu::new(&lax_from_state(&s).unwrap().matrix).unwrap().inverse().unwrap();
    assert!((j.a[0] - dense[(0, 0)]).abs() <= 1e-12);
    assert!((j.a[1] - dense[(1, 1)]).abs() <= 1e-12);
    assert!((-j.b[0] - dense[(0, 1)]).abs() <= 1e-12);
    assert!((j.a[0] - 2.3130353).abs() < 1e-7);
    assert!((j.b[0] - 0.8509181).abs() < 1e-7);
    assert!((j.b[0] - 2.0 * e(-1.0) / (1.0 - e(-2.0))).abs() < 1e-15);
}

#[test]
fn tridiagonal_inverse_n6() {
    let s = seeded(23, 6, Sector::Minus);
    let j = tridiagonal_inverse(&s).unwrap().to_matrix();
    let l = lax_from_state(&s).unwrap().matrix;
    assert!((&j * &l).max_abs_diff(&Mat::identity(6)) <= 1e-10);
}

#[test]
fn recurrence_examples() {
    let s = state(&[-1.0, 1.0], &[1.0, 1.0], Sector::Minus);
    let spec = lax_spectrum(&lax_from_state(&s).unwrap().matrix, None).unwrap();
    assert!(recurrence_residual(&s, &spec).unwrap() <= 1e-10);
    let s = seeded(24, 6, Sector::Minus);
    let spec = lax_spectrum(&lax_from_state(&s).unwrap().matrix, None).unwrap();
    assert!(recurrence_residual(&s, &spec).unwrap() <= 1e-8);
    let s = state(&[0.0], &[2.0], Sector::Minus);
    let spec = lax_spectrum(&lax_from_state(&s).unwrap().matrix, None).unwrap();
    assert_eq!(recurrence_residual(&s, &spec).unwrap(), 0.0);
}

#[test]
fn rank_one_is_semiseparable() {
    let w = [0.3, -1.2, 2.0, 0.7];
    let m = Mat::from_fn(4, 4, |i, j| w[i] * w[j]);
    assert!(is_semiseparable(&m, 1e-12));
}

#[test]
fn coadjoint_action_on_four_by_four() {
    let l = lax_from_state(&seeded(25, 4, Sector::Minus)).unwrap().matrix;
    let g = Mat::from_fn(4, 4, |i, j| if i == j { 1.5 } else { 0.1 * (i as f64 - 2.0 * j as f64) });
    let pair = factorize(&g).unwrap();
    assert!(is_semiseparable(&coadjoint_action(&pair, &l).unwrap(), 1e-9));
}

#[test]
fn diagonal_conjugation_fixes_diagonal() {
    let l = Mat::from_diag(&[3.0, 1.0, 0.5]);
    let pair = FactorizationPair { b_minus: Mat::from_diag(&[2.0, 0.5, 7.0]), b_plus: Mat::identity(3) };
    assert!(coadjoint_action(&pair, &l).unwrap().max_abs_diff(&l) <= 1e-15);
}

#[test]
fn plus_states_reverse_to_minus() {
    let s = seeded(26, 5, Sector::Plus);
    let l_plus = lax_from_state(&s).unwrap().matrix;
    let l_rev = lax_from_state(&s.reversed()).unwrap().matrix;
    let n = 5;
    for i in 0..n {
        for j in 0..n {
            assert_eq!(l_plus[(i, j)], l_rev[(n - 1 - i, n - 1 - j)]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lax_structure(s in ordered_state(1, 8, Sector::Minus)) {
        let lax = lax_from_state(&s).unwrap();
        let l = &lax.matrix;
        for j in 0..s.n() {
            prop_assert_eq!(l[(j, j)], s.p[j] / 2.0);
        }
        prop_assert!(is_semiseparable(l, 1e-12));
        prop_assert!(lax.u.iter().zip(&lax.v).map(|(u, v)| u / v).collect::<Vec<_>>().windows(2).all(|w| w[0] < w[1]));
        for d in lax.leading_minor_dets().unwrap() {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn determinant_formula_matches_lu(s in ordered_state(1, 8, Sector::Minus)) {
        let lax = lax_from_state(&s).unwrap();
        let dets = lax.leading_minor_dets().unwrap();
        for (k, d) in dets.iter().enumerate() {
            let idx: Vec<usize> = (0..=k).collect();
            let lu = determinant(&lax.matrix.select(&idx, &idx)).unwrap();
            prop_assert!((d - lu).abs() <= 1e-10 * lu.abs());
        }
    }

    #[test]
    fn tridiagonal_inverts(
        n in 1usize..=10,
        p in proptest::collection::vec(1e-3f64..3.0, 10),
        gaps in proptest::collection::vec(0.1f64..3.0, 10),
    ) {
        let mut q = vec![0.0];
        for g in &gaps[..n - 1] {
            let last = *q.last().unwrap();
            q.push(last + g);
        }
        let s = state(&q, &p[..n], Sector::Minus);
        let l = lax_from_state(&s).unwrap().matrix;
        let j = tridiagonal_inverse(&s).unwrap().to_matrix();
        prop_assert!((&j * &l).max_abs_diff(&Mat::identity(n)) <= 1e-9);
    }

    #[test]
    fn first_components_nonzero(s in ordered_state(1, 6, Sector::Minus)) {
        let spec = lax_spectrum(&lax_from_state(&s).unwrap().matrix, None).unwrap();
        prop_assert!(spec.first_row().iter().all(|&c| c > 1e-12));
    }
}
