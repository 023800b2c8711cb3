//! Random QP generators shared by the oracle tests and the acceptance run.
#![allow(dead_code)]

use ivreg::lcp::Qp;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_spd(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m + 2, m, |_, _| rng.random_range(-1.0..1.0));
    a.transpose() * a + DMatrix::identity(m, m) * 0.05
}

pub fn random_qp(rng: &mut ChaCha8Rng) -> Qp {
    let m = rng.random_range(1..=4);
    let p = rng.random_range(1..=6);
    let q = random_spd(rng, m);
    let c = DVector::from_fn(m, |_, _| rng.random_range(-3.0..3.0));
    let r_mat = DMatrix::from_fn(p, m, |_, _| rng.random_range(-1.0..1.0));
    // feasible by construction around z0
    let z0 = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
    let slack = DVector::from_fn(p, |_, _| rng.random_range(0.0..1.0));
    let r = &r_mat * z0 - slack;
    Qp::new(q, c, r_mat, r).unwrap()
}

/// Degenerate instances: many constraints through one vertex, duplicated
/// rows, and ties in `q`.
pub fn degenerate_qp(rng: &mut ChaCha8Rng, i: usize) -> Qp {
    let m = 2 + i % 3;
    let p = m + 2 + i % 4;
    let q = random_spd(rng, m);
    let vertex = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
    let mut r_mat = DMatrix::from_fn(p, m, |_, _| rng.random_range(-1.0..1.0));
    if i % 2 == 0 {
        let row = r_mat.row(0).into_owned();
        r_mat.set_row(1, &row);
    }
    // every constraint tight at the vertex
    let r = &r_mat * &vertex;
    // pull the unconstrained optimum far outside so the vertex binds
    let c = -(&q * (&vertex - r_mat.transpose() * DVector::from_element(p, 5.0)));
    Qp::new(q, c, r_mat, r).unwrap()
}
