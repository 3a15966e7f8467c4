//! Seeded random states shared by the integration tests.
//!
//! Ranges: α ∈ [−0.3, 0.3], ξ, ζ ∈ [0.6, 1.6], ϱ ∈ [0.5, 1.5] (so
//! ξζ − α² ≥ 0.27); inertia components in [0.5, 2]; spins, momenta and
//! rates in [−1, 1].

#![allow(dead_code)]

use klbody::dynamics::{InertiaTensor, PolarMomenta, PolarVelocities};
use klbody::kinematics::{PolarDeformation, RotationMatrix, SpinVector};
use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(r: &mut ChaCha8Rng) -> f64 {
    r.gen_range(-1.0..=1.0)
}

pub fn inertia(r: &mut ChaCha8Rng) -> InertiaTensor {
    InertiaTensor::new(r.gen_range(0.5..=2.0), r.gen_range(0.5..=2.0), r.gen_range(0.5..=2.0)).unwrap()
}

pub fn deformation(r: &mut ChaCha8Rng) -> PolarDeformation {
    PolarDeformation::new(
        r.gen_range(-0.3..=0.3),
        r.gen_range(0.6..=1.6),
        r.gen_range(0.6..=1.6),
        r.gen_range(0.5..=1.5),
    )
    .unwrap()
}

pub fn momenta(r: &mut ChaCha8Rng) -> PolarMomenta {
    PolarMomenta::from_array(std::array::from_fn(|_| unit(r)))
}

pub fn velocities(r: &mut ChaCha8Rng) -> PolarVelocities {
    PolarVelocities::from_array(std::array::from_fn(|_| unit(r)))
}

pub fn spin(r: &mut ChaCha8Rng) -> SpinVector {
    SpinVector::new(unit(r), unit(r), unit(r))
}

pub fn rotation(r: &mut ChaCha8Rng) -> RotationMatrix {
    let k = Vector3::new(unit(r), unit(r), unit(r)) * std::f64::consts::PI;
    RotationMatrix::from_rotation_vector(k)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
