#![allow(dead_code)]

use peakon_core::generate::{random_state, seeded_rng, RandomSpec};
use peakon_core::lax::Sector;
use peakon_core::{Mat, State};
use proptest::prelude::*;

pub fn e(x: f64) -> f64 {
    x.exp()
}

pub fn state(q: &[f64], p: &[f64], sector: Sector) -> State {
    State::from_f64(q, p, sector).unwrap()
}

pub fn seeded(seed: u64, n: usize, sector: Sector) -> State {
    random_state(&mut seeded_rng(seed), n, sector, &RandomSpec::default()).unwrap()
}

/// Square matrices with entries in [-1, 1].
pub fn square(lo: usize, hi: usize) -> impl Strategy<Value = Mat> {
    (lo..=hi).prop_flat_map(|n| {
        proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| Mat::from_fn(n, n, |i, j| v[i * n + j]))
    })
}

/// Pairs of equally sized square matrices.
pub fn square_pair(lo: usize, hi: usize) -> impl Strategy<Value = (Mat, Mat)> {
    (lo..=hi).prop_flat_map(|n| {
        proptest::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |v| {
            (Mat::from_fn(n, n, |i, j| v[i * n + j]), Mat::from_fn(n, n, |i, j| v[n * n + i * n + j]))
        })
    })
}

pub fn symmetrize(a: &Mat) -> Mat {
    (a + &a.transpose()).scale(0.5)
}

/// Ordered states: momenta in [0.2, 2], consecutive gaps in [0.3, 2].
pub fn ordered_state(lo: usize, hi: usize, sector: Sector) -> impl Strategy<Value = State> {
    (lo..=hi).prop_flat_map(move |n| {
        let sector = sector.clone();
        (proptest::collection::vec(0.2f64..2.0, n), proptest::collection::vec(0.3f64..2.0, n)).prop_map(move |(p, gaps)| {
            let sign = if sector == Sector::Minus { 1.0 } else { -1.0 };
            let mut q = vec![0.0];
            for g in &gaps[1..] {
                let last = *q.last().unwrap();
                q.push(last + sign * g);
            }
            State::from_f64(&q, &p, sector.clone()).unwrap()
        })
    })
}
