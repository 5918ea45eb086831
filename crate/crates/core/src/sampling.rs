//! Deterministic random sampling of points.
//!
//! Every random stream in this crate is a ChaCha8 generator seeded with the
//! user seed; independent workers (one per sample index) use distinct
//! ChaCha stream ids, so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hyperboloid;
use crate::space::{Point, Space, SpaceModel};
use crate::tree::TreePoint;

pub type SampleRng = ChaCha8Rng;

/// Generator for worker `stream` under `seed`.
pub fn rng_for(seed: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws a point: standard normal coordinates (Euclidean), exponential map
/// of a standard normal tangent vector at the origin (hyperboloid), uniform
/// edge then uniform offset (tree), independent factors (product).
pub fn sample_point<R: Rng + ?Sized>(space: &Space, rng: &mut R) -> Point {
    sample_model(space.model(), rng)
}

fn sample_model<R: Rng + ?Sized>(model: &SpaceModel, rng: &mut R) -> Point {
    match model {
        SpaceModel::Euclidean { dim } => Point::Euclidean((0..*dim).map(|_| rng.sample(StandardNormal)).collect()),
        SpaceModel::Hyperboloid { dim } => {
            let w: Vec<f64> = (0..*dim).map(|_| rng.sample(StandardNormal)).collect();
            Point::Hyperboloid(hyperboloid::from_origin_tangent(&w))
        }
        SpaceModel::MetricTree(tree) => {
            let edge = rng.random_range(0..tree.edges().len());
            let offset = rng.random::<f64>() * tree.edges()[edge].length;
            Point::Tree(tree.canonical(TreePoint { edge, offset }))
        }
        SpaceModel::Product(l, r) => {
            let left = sample_model(l, rng);
            Point::product(left, sample_model(r, rng))
        }
    }
}

/// Draws weights on the probability simplex (normalized uniform draws).
pub fn sample_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    // put the rounding residue on the last weight so the sum is 1 to the ulp
    let head: f64 = w[..n - 1].iter().sum();
    w[n - 1] = 1.0 - head;
    w
}
