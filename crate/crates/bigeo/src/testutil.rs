//! Seeded random group elements and tangents, shared by unit, property and
//! acceptance tests.

use crate::explog::group_exp;
use crate::group::{GroupId, GroupPoint, Side, Tangent};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Identity-based tangent with i.i.d. normal coordinates of the given std.
pub fn random_identity_tangent<R: Rng>(rng: &mut R, group: GroupId, std: f64) -> Tangent {
    let n = group.tangent_dim();
    let coords: Vec<f64> = (0..n)
        .map(|_| std * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Tangent::from_identity_coords(group, &coords).unwrap()
}

/// Random group element `exp(v)` with `v` normal of the given std.
pub fn random_point<R: Rng>(rng: &mut R, group: GroupId, std: f64) -> GroupPoint {
    group_exp(&random_identity_tangent(rng, group, std)).unwrap()
}

/// Random tangent based at `base` (left-translated identity tangent).
pub fn random_tangent_at<R: Rng>(rng: &mut R, base: &GroupPoint, std: f64) -> Tangent {
    random_identity_tangent(rng, base.group(), std)
        .d_translate(base, Side::Left)
        .unwrap()
}
