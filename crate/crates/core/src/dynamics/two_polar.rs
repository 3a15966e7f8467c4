//! Kinetic energy in two-polar variables `(R; λ, μ, ϱ; θ)`, used to cross-check
//! the polar formulation.

use crate::error::{Error, Result};
use crate::kinematics::{nu_from_omega_theta, PolarDeformation, SpinVector, TwoPolarDeformation};

use super::polar::{InertiaTensor, PolarVelocities};

/// Spin `ω = R⁻¹Ṙ` of the `R`-top and the rates of `(λ, μ, ϱ, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoPolarVelocities {
    pub omega: SpinVector,
    pub lambda_dot: f64,
    pub mu_dot: f64,
    pub rho_dot: f64,
    pub theta_dot: f64,
}

/// Momenta conjugate to `(ω; λ̇, μ̇, ϱ̇, θ̇)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TwoPolarMomenta {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub p_lambda: f64,
    pub p_mu: f64,
    pub p_rho: f64,
    pub p_theta: f64,
}

/// Kinetic energy `½Tr(J Φ̇ᵀΦ̇)` for general `J₁ ≠ J₂`.
///
/// The anisotropic coupling term carries the coefficient
/// `(J₁ − J₂)·sinθ·cosθ`; with `sin 2θ` in its place the expression no longer
/// equals the trace form (checked against the polar energy in the tests).
pub fn kinetic_energy_two_polar(def: &TwoPolarDeformation, vel: &TwoPolarVelocities, j: &InertiaTensor) -> f64 {
    let TwoPolarDeformation { lambda: l, mu: m, rho, theta } = *def;
    let TwoPolarVelocities { omega, lambda_dot: ld, mu_dot: md, rho_dot: rd, theta_dot: td } = *vel;
    let SpinVector { nu1: o1, nu2: o2, nu3: o3 } = omega;
    let InertiaTensor { j1, j2, j3 } = *j;
    let (s, c) = theta.sin_cos();
    let jc = j1 * c * c + j2 * s * s;
    let js = j1 * s * s + j2 * c * c;
    let r2 = rho * rho;

    0.5 * jc * ld * ld
        + 0.5 * js * md * md
        + 0.5 * j3 * rd * rd
        + 0.5 * (js * m * m + j3 * r2) * o1 * o1
        + 0.5 * (jc * l * l + j3 * r2) * o2 * o2
        + (j1 + j2) * l * m * o3 * td
        + (j1 - j2) * s * c * ((m * md - l * ld) * td + (l * md - m * ld) * o3 + l * m * o1 * o2)
        + 0.5 * (jc * l * l + js * m * m) * o3 * o3
        + 0.5 * (js * l * l + jc * m * m) * td * td
}

/// Canonical kinetic energy for `J₁ = J₂ = j`.
pub fn kinetic_energy_canonical_isotropic(
    def: &TwoPolarDeformation,
    mom: &TwoPolarMomenta,
    j: f64,
    j3: f64,
) -> Result<f64> {
    let TwoPolarDeformation { lambda: l, mu: m, rho, .. } = *def;
    let gap = l * l - m * m;
    if (l - m).abs() <= 1e-10 {
        return Err(Error::DegenerateDeformation { value: l });
    }
    let r2 = rho * rho;
    let TwoPolarMomenta { s1, s2, s3, p_lambda, p_mu, p_rho, p_theta } = *mom;
    Ok(s1 * s1 / (2.0 * (j * m * m + j3 * r2))
        + s2 * s2 / (2.0 * (j * l * l + j3 * r2))
        + ((l * l + m * m) * (s3 * s3 + p_theta * p_theta) - 4.0 * l * m * p_theta * s3) / (2.0 * j * gap * gap)
        + (p_lambda * p_lambda + p_mu * p_mu) / (2.0 * j)
        + p_rho * p_rho / (2.0 * j3))
}

/// Converts a two-polar state and its rates to polar variables: `S = U·D·U⁻¹`
/// and its time derivative, with `ν = U(ω − ϑ)U⁻¹`.
pub fn to_polar_velocities(def: &TwoPolarDeformation, vel: &TwoPolarVelocities) -> (PolarDeformation, PolarVelocities) {
    let TwoPolarDeformation { lambda, mu, rho, theta } = *def;
    let (s, c) = theta.sin_cos();
    let (s2, c2) = (2.0 * theta).sin_cos();
    let gap = lambda - mu;
    let td = vel.theta_dot;
    let polar = PolarDeformation {
        alpha: gap * s * c,
        xi: lambda * c * c + mu * s * s,
        zeta: lambda * s * s + mu * c * c,
        rho,
    };
    let rates = PolarVelocities {
        nu: nu_from_omega_theta(vel.omega, theta, td),
        alpha_dot: (vel.lambda_dot - vel.mu_dot) * s * c + gap * c2 * td,
        xi_dot: vel.lambda_dot * c * c + vel.mu_dot * s * s - gap * s2 * td,
        zeta_dot: vel.lambda_dot * s * s + vel.mu_dot * c * c + gap * s2 * td,
        rho_dot: vel.rho_dot,
    };
    (polar, rates)
}
