//! Hamiltonian dynamics in polar variables `(L; α, ξ, ζ, ϱ)` for a diagonal
//! inertia `J = diag(J₁, J₂, J₃)`.
//!
//! The spin momenta `πᵢ` are conjugate to the co-moving angular velocity
//! `ν = L⁻¹L̇` and obey `{πᵢ, πⱼ} = −εᵢⱼₖ πₖ`; the deformation momenta are
//! canonically conjugate to `(α, ξ, ζ, ϱ)`.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::kinematics::{PolarDeformation, RotationMatrix, SpinVector};
use crate::potentials::PotentialModel;

/// Denominators below this magnitude are reported as a singular mass matrix.
const DENOMINATOR_FLOOR: f64 = 1e-14;

/// Diagonal inertial coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaTensor {
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
}

impl InertiaTensor {
    pub fn new(j1: f64, j2: f64, j3: f64) -> Result<Self> {
        for (name, v) in [("j1", j1), ("j2", j2), ("j3", j3)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: name.into(),
                    reason: format!("inertia must be positive, got {v}"),
                });
            }
        }
        Ok(Self { j1, j2, j3 })
    }

    pub fn isotropic(j: f64, j3: f64) -> Result<Self> {
        Self::new(j, j, j3)
    }
}

/// Generalised velocities `(ν; α̇, ξ̇, ζ̇, ϱ̇)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolarVelocities {
    pub nu: SpinVector,
    pub alpha_dot: f64,
    pub xi_dot: f64,
    pub zeta_dot: f64,
    pub rho_dot: f64,
}

impl PolarVelocities {
    pub fn to_array(self) -> [f64; 7] {
        [self.nu.nu1, self.nu.nu2, self.nu.nu3, self.alpha_dot, self.xi_dot, self.zeta_dot, self.rho_dot]
    }

    pub fn from_array(v: [f64; 7]) -> Self {
        Self {
            nu: SpinVector::new(v[0], v[1], v[2]),
            alpha_dot: v[3],
            xi_dot: v[4],
            zeta_dot: v[5],
            rho_dot: v[6],
        }
    }
}

/// Canonical momenta `(π₁, π₂, π₃; p_α, p_ξ, p_ζ, p_ϱ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolarMomenta {
    pub pi1: f64,
    pub pi2: f64,
    pub pi3: f64,
    pub p_alpha: f64,
    pub p_xi: f64,
    pub p_zeta: f64,
    pub p_rho: f64,
}

impl PolarMomenta {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn to_array(self) -> [f64; 7] {
        [self.pi1, self.pi2, self.pi3, self.p_alpha, self.p_xi, self.p_zeta, self.p_rho]
    }

    pub fn from_array(m: [f64; 7]) -> Self {
        Self {
            pi1: m[0],
            pi2: m[1],
            pi3: m[2],
            p_alpha: m[3],
            p_xi: m[4],
            p_zeta: m[5],
            p_rho: m[6],
        }
    }

    pub fn spin_norm_squared(&self) -> f64 {
        self.pi1 * self.pi1 + self.pi2 * self.pi2 + self.pi3 * self.pi3
    }
}

/// Full phase-space state at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub l: RotationMatrix,
    pub def: PolarDeformation,
    pub mom: PolarMomenta,
    pub t: f64,
}

impl PhasePoint {
    pub fn new(l: RotationMatrix, def: PolarDeformation, mom: PolarMomenta, t: f64) -> Result<Self> {
        def.check()?;
        Ok(Self { l, def, mom, t })
    }

    /// Configuration `Φ = L·S`.
    pub fn phi(&self) -> Matrix3<f64> {
        self.l.matrix() * self.def.matrix()
    }
}

/// The three pieces of the velocity-form kinetic energy and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticEnergy {
    pub total: f64,
    /// Rotation of the `L`-top coupled to `S`.
    pub rot: f64,
    /// Coupling of `ν₃` to the in-plane deformation rates.
    pub rot_def: f64,
    /// Pure deformation oscillations.
    pub def: f64,
}

/// `Ξ`, `Ω(π₁, π₂)` and `Υ(π₃ + α(p_ζ − p_ξ), p_α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliarySymbols {
    pub xi_sym: f64,
    pub omega: f64,
    pub upsilon: f64,
}

/// Deformation-dependent coefficients shared by every formula below.
struct Coefficients {
    j1: f64,
    j2: f64,
    j3: f64,
    /// `J₁α² + J₂ζ² + J₃ϱ²`
    a1: f64,
    /// `J₁ξ² + J₂α² + J₃ϱ²`
    a2: f64,
    /// `J₁ξ² + J₂ζ² + (J₁+J₂)α²`
    a3: f64,
    /// `(J₁ξ + J₂ζ)α`
    cross: f64,
    /// `J₁ξ − J₂ζ`
    skew: f64,
    /// `J₁J₂(ξ+ζ)²`
    plane_den: f64,
    /// `Ξ`
    spin_den: f64,
}

impl Coefficients {
    fn new(def: &PolarDeformation, j: &InertiaTensor) -> Self {
        let PolarDeformation { alpha, xi, zeta, rho } = *def;
        let InertiaTensor { j1, j2, j3 } = *j;
        let a2_ = alpha * alpha;
        let r2 = rho * rho;
        let a3 = j1 * xi * xi + j2 * zeta * zeta + (j1 + j2) * a2_;
        let det = a2_ - xi * zeta;
        Self {
            j1,
            j2,
            j3,
            a1: j1 * a2_ + j2 * zeta * zeta + j3 * r2,
            a2: j1 * xi * xi + j2 * a2_ + j3 * r2,
            a3,
            cross: (j1 * xi + j2 * zeta) * alpha,
            skew: j1 * xi - j2 * zeta,
            plane_den: j1 * j2 * (xi + zeta).powi(2),
            spin_den: j1 * j2 * det * det + a3 * j3 * r2 + j3 * j3 * r2 * r2,
        }
    }

    fn check(&self) -> Result<()> {
        for d in [self.spin_den, self.plane_den] {
            if d.abs() < DENOMINATOR_FLOOR {
                return Err(Error::SingularMassMatrix { denominator: d });
            }
        }
        Ok(())
    }
}

/// `π₃ + α(p_ζ − p_ξ)`, the combination that carries the third spin.
fn twisted_spin(def: &PolarDeformation, mom: &PolarMomenta) -> f64 {
    mom.pi3 + def.alpha * (mom.p_zeta - mom.p_xi)
}

pub fn kinetic_energy_velocities(def: &PolarDeformation, vel: &PolarVelocities, j: &InertiaTensor) -> KineticEnergy {
    let c = Coefficients::new(def, j);
    let SpinVector { nu1, nu2, nu3 } = vel.nu;
    let alpha = def.alpha;
    let rot = 0.5 * c.a1 * nu1 * nu1 + 0.5 * c.a2 * nu2 * nu2 + 0.5 * c.a3 * nu3 * nu3 - c.cross * nu1 * nu2;
    let rot_def = (c.j1 * alpha * vel.xi_dot - c.j2 * alpha * vel.zeta_dot - c.skew * vel.alpha_dot) * nu3;
    let deformation = 0.5 * (c.j1 + c.j2) * vel.alpha_dot.powi(2)
        + 0.5 * c.j1 * vel.xi_dot.powi(2)
        + 0.5 * c.j2 * vel.zeta_dot.powi(2)
        + 0.5 * c.j3 * vel.rho_dot.powi(2);
    KineticEnergy {
        total: rot + rot_def + deformation,
        rot,
        rot_def,
        def: deformation,
    }
}

/// Momenta as partial derivatives of the velocity-form kinetic energy.
pub fn legendre_forward(def: &PolarDeformation, vel: &PolarVelocities, j: &InertiaTensor) -> PolarMomenta {
    let c = Coefficients::new(def, j);
    let SpinVector { nu1, nu2, nu3 } = vel.nu;
    let alpha = def.alpha;
    PolarMomenta {
        pi1: c.a1 * nu1 - c.cross * nu2,
        pi2: c.a2 * nu2 - c.cross * nu1,
        pi3: c.a3 * nu3 + c.j1 * alpha * vel.xi_dot - c.j2 * alpha * vel.zeta_dot - c.skew * vel.alpha_dot,
        p_alpha: (c.j1 + c.j2) * vel.alpha_dot - c.skew * nu3,
        p_xi: c.j1 * (vel.xi_dot + alpha * nu3),
        p_zeta: c.j2 * (vel.zeta_dot - alpha * nu3),
        p_rho: c.j3 * vel.rho_dot,
    }
}

/// Velocities `∂𝒯/∂(momenta)`.
pub fn legendre_inverse(def: &PolarDeformation, mom: &PolarMomenta, j: &InertiaTensor) -> Result<PolarVelocities> {
    let c = Coefficients::new(def, j);
    c.check()?;
    Ok(velocities_unchecked(&c, def, mom))
}

fn velocities_unchecked(c: &Coefficients, def: &PolarDeformation, mom: &PolarMomenta) -> PolarVelocities {
    let alpha = def.alpha;
    let w = twisted_spin(def, mom);
    let nu3 = ((c.j1 + c.j2) * w + c.skew * mom.p_alpha) / c.plane_den;
    let stretch = c.j1 * def.xi * def.xi + c.j2 * def.zeta * def.zeta;
    PolarVelocities {
        nu: SpinVector {
            nu1: (c.a2 * mom.pi1 + c.cross * mom.pi2) / c.spin_den,
            nu2: (c.cross * mom.pi1 + c.a1 * mom.pi2) / c.spin_den,
            nu3,
        },
        alpha_dot: (c.skew * w + stretch * mom.p_alpha) / c.plane_den,
        xi_dot: mom.p_xi / c.j1 - alpha * nu3,
        zeta_dot: mom.p_zeta / c.j2 + alpha * nu3,
        rho_dot: mom.p_rho / c.j3,
    }
}

pub fn auxiliary_symbols(def: &PolarDeformation, mom: &PolarMomenta, j: &InertiaTensor) -> AuxiliarySymbols {
    let c = Coefficients::new(def, j);
    symbols(&c, def, mom)
}

fn symbols(c: &Coefficients, def: &PolarDeformation, mom: &PolarMomenta) -> AuxiliarySymbols {
    let (pi1, pi2) = (mom.pi1, mom.pi2);
    let w = twisted_spin(def, mom);
    let stretch = c.j1 * def.xi * def.xi + c.j2 * def.zeta * def.zeta;
    AuxiliarySymbols {
        xi_sym: c.spin_den,
        omega: c.a2 * pi1 * pi1 + 2.0 * c.cross * pi1 * pi2 + c.a1 * pi2 * pi2,
        upsilon: (c.j1 + c.j2) * w * w + stretch * mom.p_alpha * mom.p_alpha + 2.0 * c.skew * w * mom.p_alpha,
    }
}

/// Kinetic energy in canonical variables, `Ω/2Ξ + Υ/2J₁J₂(ξ+ζ)² + p_ξ²/2J₁ + p_ζ²/2J₂ + p_ϱ²/2J₃`.
pub fn kinetic_energy_canonical(def: &PolarDeformation, mom: &PolarMomenta, j: &InertiaTensor) -> f64 {
    let c = Coefficients::new(def, j);
    let s = symbols(&c, def, mom);
    s.omega / (2.0 * s.xi_sym)
        + s.upsilon / (2.0 * c.plane_den)
        + mom.p_xi * mom.p_xi / (2.0 * c.j1)
        + mom.p_zeta * mom.p_zeta / (2.0 * c.j2)
        + mom.p_rho * mom.p_rho / (2.0 * c.j3)
}

pub fn hamiltonian<P: PotentialModel>(
    def: &PolarDeformation,
    mom: &PolarMomenta,
    j: &InertiaTensor,
    pot: &P,
) -> Result<f64> {
    Ok(kinetic_energy_canonical(def, mom, j) + pot.value(def)?)
}

/// `dπ/dt = {π, H}`; equals `π × ν`.
pub fn spin_torques(def: &PolarDeformation, mom: &PolarMomenta, j: &InertiaTensor) -> Result<[f64; 3]> {
    let c = Coefficients::new(def, j);
    c.check()?;
    Ok(spin_torques_unchecked(&c, def, mom))
}

fn spin_torques_unchecked(c: &Coefficients, def: &PolarDeformation, mom: &PolarMomenta) -> [f64; 3] {
    let PolarMomenta { pi1, pi2, pi3, p_alpha, .. } = *mom;
    let w = twisted_spin(def, mom);
    let nu3_num = (c.j1 + c.j2) * w + c.skew * p_alpha;
    let nu1_num = c.a2 * pi1 + c.cross * pi2;
    let nu2_num = c.cross * pi1 + c.a1 * pi2;
    [
        -nu2_num * pi3 / c.spin_den + pi2 * nu3_num / c.plane_den,
        nu1_num * pi3 / c.spin_den - pi1 * nu3_num / c.plane_den,
        (c.cross * (pi1 * pi1 - pi2 * pi2) + (c.a1 - c.a2) * pi1 * pi2) / c.spin_den,
    ]
}

/// `(dp_α/dt, dp_ξ/dt, dp_ζ/dt, dp_ϱ/dt) = −∂H/∂(α, ξ, ζ, ϱ)`.
pub fn deformation_forces<P: PotentialModel>(
    def: &PolarDeformation,
    mom: &PolarMomenta,
    j: &InertiaTensor,
    pot: &P,
) -> Result<[f64; 4]> {
    let c = Coefficients::new(def, j);
    c.check()?;
    let [ga, gx, gz, gr] = pot.gradient(def)?;
    let [ka, kx, kz, kr] = kinetic_forces(&c, def, mom);
    Ok([ka - ga, kx - gx, kz - gz, kr - gr])
}

/// `−∂𝒯/∂(α, ξ, ζ, ϱ)`, the inertial (centrifugal) part of the forces.
fn kinetic_forces(c: &Coefficients, def: &PolarDeformation, mom: &PolarMomenta) -> [f64; 4] {
    let PolarDeformation { alpha, xi, zeta, rho } = *def;
    let PolarMomenta { pi1, pi2, p_alpha, p_xi, p_zeta, .. } = *mom;
    let (j1, j2, j3) = (c.j1, c.j2, c.j3);
    let s = symbols(c, def, mom);
    let (den, omega, upsilon) = (s.xi_sym, s.omega, s.upsilon);
    let den2 = den * den;
    let w = twisted_spin(def, mom);
    let nu3_num = (j1 + j2) * w + c.skew * p_alpha;
    let det = xi * zeta - alpha * alpha;
    let r2 = rho * rho;
    let pp = pi1 * pi2;

    let f_alpha = -((j2 * pi1 * pi1 + j1 * pi2 * pi2) * alpha + (j1 * xi + j2 * zeta) * pp) / den
        + (2.0 * j1 * j2 * alpha * (alpha * alpha - xi * zeta) + (j1 + j2) * alpha * j3 * r2) / den2 * omega
        - nu3_num / c.plane_den * (p_zeta - p_xi);
    let f_xi = -(j1 * xi * pi1 * pi1 + j1 * alpha * pp) / den
        + (j1 * j2 * zeta * det + j1 * xi * j3 * r2) / den2 * omega
        - (j1 * xi * p_alpha * p_alpha + j1 * w * p_alpha) / c.plane_den
        + upsilon / (c.plane_den * (xi + zeta));
    let f_zeta = -(j2 * zeta * pi2 * pi2 + j2 * alpha * pp) / den
        + (j1 * xi * j2 * det + j2 * zeta * j3 * r2) / den2 * omega
        - (j2 * zeta * p_alpha * p_alpha - j2 * w * p_alpha) / c.plane_den
        + upsilon / (c.plane_den * (xi + zeta));
    let f_rho = -j3 * rho / den * (pi1 * pi1 + pi2 * pi2) + j3 * rho / den2 * (c.a3 + 2.0 * j3 * r2) * omega;
    [f_alpha, f_xi, f_zeta, f_rho]
}

/// Time derivative of every phase-space coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDerivative {
    /// `L̇ = L·hat(ν)`. This is the orientation of the spin rates in
    /// [`spin_torques`] for which `L·π` is conserved.
    pub l_dot: Matrix3<f64>,
    pub velocities: PolarVelocities,
    pub mom_dot: PolarMomenta,
}

pub fn eom_rhs<P: PotentialModel>(p: &PhasePoint, j: &InertiaTensor, pot: &P) -> Result<PhaseDerivative> {
    eom_rhs_parts(p.l.matrix(), &p.def, &p.mom, j, pot)
}

/// Same as [`eom_rhs`] for an `L` that is not exactly orthogonal
/// (intermediate Runge–Kutta stages).
pub(crate) fn eom_rhs_parts<P: PotentialModel>(
    l: &Matrix3<f64>,
    def: &PolarDeformation,
    mom: &PolarMomenta,
    j: &InertiaTensor,
    pot: &P,
) -> Result<PhaseDerivative> {
    let c = Coefficients::new(def, j);
    c.check()?;
    let velocities = velocities_unchecked(&c, def, mom);
    let [t1, t2, t3] = spin_torques_unchecked(&c, def, mom);
    let [ga, gx, gz, gr] = pot.gradient(def)?;
    let [ka, kx, kz, kr] = kinetic_forces(&c, def, mom);
    Ok(PhaseDerivative {
        l_dot: l * velocities.nu.hat(),
        velocities,
        mom_dot: PolarMomenta {
            pi1: t1,
            pi2: t2,
            pi3: t3,
            p_alpha: ka - ga,
            p_xi: kx - gx,
            p_zeta: kz - gz,
            p_rho: kr - gr,
        },
    })
}
