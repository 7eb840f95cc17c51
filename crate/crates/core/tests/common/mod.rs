#![allow(dead_code)]

use qet_core::model::BobUnitary;
use qet_core::sim::{Mat2, C64};
use qet_core::ModelParams;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn params(h: f64, k: f64) -> ModelParams {
    ModelParams::new(h, k).unwrap()
}

/// Haar-random single-qubit unitary: a uniform point on S³ read as an SU(2)
/// matrix, times a uniform global phase.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> BobUnitary {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [a, b, c, d] = q.map(|x| x / norm);
    let phase = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    let su2 = Mat2::new(
        C64::new(a, b),
        C64::new(c, d),
        C64::new(-c, d),
        C64::new(a, -b),
    );
    BobUnitary::new(su2 * phase).unwrap()
}
