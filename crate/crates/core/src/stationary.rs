//! Stationary ellipsoids: motions with constant `S` (hence constant Green
//! tensor) and constant co-moving spin `ν`, so that `Φ(t) = exp(ν̂t)·Φ₀`.
//!
//! Three branches are distinguished by which component of `ν` is nonzero.
//! Each gives a small algebraic system balancing centrifugal against elastic
//! forces, solved here by damped Newton iteration with a finite-difference
//! Jacobian.

use log::debug;
use nalgebra::{DMatrix, DVector, Matrix3};

use crate::dynamics::{legendre_forward, legendre_inverse, InertiaTensor, PhasePoint, PolarMomenta, PolarVelocities};
use crate::error::{Error, Result};
use crate::kinematics::{PolarDeformation, RotationMatrix, SpinVector};
use crate::potentials::PotentialModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `ν₁ ≠ 0`, `ν₂ = ν₃ = 0`.
    Axis1,
    /// `ν₂ ≠ 0`, `ν₁ = ν₃ = 0`.
    Axis2,
    /// `ν₃ ≠ 0`, `ν₁ = ν₂ = 0`.
    Axis3,
}

impl Branch {
    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(Branch::Axis1),
            2 => Some(Branch::Axis2),
            3 => Some(Branch::Axis3),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Branch::Axis1 => 1,
            Branch::Axis2 => 2,
            Branch::Axis3 => 3,
        }
    }
}

/// How the spin momenta enter the branch-1/2 system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpinInput {
    /// The branch's own spin (`π₁` for axis 1, `π₂` for axis 2, `π₃` for
    /// axis 3) is fixed; for axes 1–2 the other in-plane spin is an unknown.
    Coupled(f64),
    /// Both in-plane spins fixed (axes 1–2 only); the five relations are then
    /// solved in the least-squares sense over the four deformation variables.
    Supplied { pi1: f64, pi2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iter: 200, tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarySolution {
    pub branch: Branch,
    pub def: PolarDeformation,
    /// Full momentum vector; the components fixed to zero by the branch are exactly zero.
    pub momenta: PolarMomenta,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl StationarySolution {
    /// The nonzero spin momenta: `(π₁, π₂)` for axes 1–2, `π₃` for axis 3.
    pub fn spin(&self) -> Vec<f64> {
        match self.branch {
            Branch::Axis1 | Branch::Axis2 => vec![self.momenta.pi1, self.momenta.pi2],
            Branch::Axis3 => vec![self.momenta.pi3],
        }
    }

    pub fn phase_point(&self, l0: RotationMatrix) -> PhasePoint {
        PhasePoint { l: l0, def: self.def, mom: self.momenta, t: 0.0 }
    }

    /// Constant co-moving angular velocity of the motion.
    pub fn angular_velocity(&self, j: &InertiaTensor) -> Result<SpinVector> {
        Ok(legendre_inverse(&self.def, &self.momenta, j)?.nu)
    }
}

/// Residual of the axis-3 relations plus the momenta they imply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch3Residual {
    pub residual: [f64; 4],
    pub p_alpha: f64,
    pub p_xi: f64,
    pub p_zeta: f64,
}

struct Shorthand {
    j1: f64,
    j2: f64,
    j3: f64,
    /// `Ξ`
    den: f64,
    /// `Ω(π₁, π₂)`
    omega: f64,
}

fn shorthand(def: &PolarDeformation, pi1: f64, pi2: f64, j: &InertiaTensor) -> Shorthand {
    let PolarDeformation { alpha, xi, zeta, rho } = *def;
    let InertiaTensor { j1, j2, j3 } = *j;
    let r2 = rho * rho;
    let den = j1 * j2 * (alpha * alpha - xi * zeta).powi(2)
        + (j1 * xi * xi + j2 * zeta * zeta + (j1 + j2) * alpha * alpha) * j3 * r2
        + j3 * j3 * r2 * r2;
    let omega = (j1 * xi * xi + j2 * alpha * alpha + j3 * r2) * pi1 * pi1
        + 2.0 * (j1 * xi + j2 * zeta) * alpha * pi1 * pi2
        + (j1 * alpha * alpha + j2 * zeta * zeta + j3 * r2) * pi2 * pi2;
    Shorthand { j1, j2, j3, den, omega }
}

/// Axes 1–2 relations, `∂V − (centrifugal terms)` for `α, ξ, ζ, ϱ`, followed
/// by the compatibility expression (vanishing of `dπ₃/dt` times `Ξ`).
pub fn residual_branch12<P: PotentialModel>(
    def: &PolarDeformation,
    pi1: f64,
    pi2: f64,
    j: &InertiaTensor,
    pot: &P,
) -> Result<[f64; 5]> {
    let PolarDeformation { alpha, xi, zeta, rho } = *def;
    let Shorthand { j1, j2, j3, den, omega } = shorthand(def, pi1, pi2, j);
    let den2 = den * den;
    let [ga, gx, gz, gr] = pot.gradient(def)?;
    let pp = pi1 * pi2;
    let det = xi * zeta - alpha * alpha;
    let r2 = rho * rho;

    let rhs_alpha = -((j2 * pi1 * pi1 + j1 * pi2 * pi2) * alpha + (j1 * xi + j2 * zeta) * pp) / den
        + (2.0 * j1 * j2 * alpha * (alpha * alpha - xi * zeta) + (j1 + j2) * alpha * j3 * r2) / den2 * omega;
    let rhs_xi = -(j1 * xi * pi1 * pi1 + j1 * alpha * pp) / den + (j1 * j2 * zeta * det + j1 * xi * j3 * r2) / den2 * omega;
    let rhs_zeta =
        -(j2 * zeta * pi2 * pi2 + j2 * alpha * pp) / den + (j1 * xi * j2 * det + j2 * zeta * j3 * r2) / den2 * omega;
    let rhs_rho = -j3 * rho / den * (pi1 * pi1 + pi2 * pi2)
        + j3 * rho / den2 * (j1 * xi * xi + j2 * zeta * zeta + (j1 + j2) * alpha * alpha + 2.0 * j3 * r2) * omega;
    let compatibility = (j1 * xi + j2 * zeta) * alpha * (pi1 * pi1 - pi2 * pi2)
        + (j1 * (alpha * alpha - xi * xi) + j2 * (zeta * zeta - alpha * alpha)) * pp;

    Ok([ga - rhs_alpha, gx - rhs_xi, gz - rhs_zeta, gr - rhs_rho, compatibility])
}

/// Axis-3 relations. The deformation momenta follow from `π₃` by requiring
/// `α̇ = ξ̇ = ζ̇ = 0`; the last component is `dV_ϱ/dϱ`.
pub fn residual_branch3<P: PotentialModel>(
    def: &PolarDeformation,
    pi3: f64,
    j: &InertiaTensor,
    pot: &P,
) -> Result<Branch3Residual> {
    let PolarDeformation { alpha, xi, zeta, .. } = *def;
    let InertiaTensor { j1, j2, .. } = *j;
    let inertia3 = j1 * xi * xi + j2 * zeta * zeta + (j1 + j2) * alpha * alpha;
    let p_alpha = (j2 * zeta - j1 * xi) * pi3 / inertia3;
    let p_xi = j1 * alpha * pi3 / inertia3;
    let p_zeta = -j2 * alpha * pi3 / inertia3;

    let plane_den = j1 * j2 * (xi + zeta).powi(2);
    let w = pi3 + alpha * (p_zeta - p_xi);
    let skew = j1 * xi - j2 * zeta;
    let upsilon = (j1 + j2) * w * w + (j1 * xi * xi + j2 * zeta * zeta) * p_alpha * p_alpha + 2.0 * skew * w * p_alpha;
    let [ga, gx, gz, gr] = pot.gradient(def)?;

    let rhs_alpha = ((j1 + j2) * w + skew * p_alpha) / plane_den * (p_xi - p_zeta);
    let rhs_xi = -(j1 * xi * p_alpha * p_alpha + j1 * w * p_alpha) / plane_den + upsilon / (plane_den * (xi + zeta));
    let rhs_zeta = -(j2 * zeta * p_alpha * p_alpha - j2 * w * p_alpha) / plane_den + upsilon / (plane_den * (xi + zeta));

    Ok(Branch3Residual { residual: [ga - rhs_alpha, gx - rhs_xi, gz - rhs_zeta, gr], p_alpha, p_xi, p_zeta })
}

/// Momenta generated by a pure rotation about one material axis at rate
/// `rate`, through the forward Legendre map.
pub fn axis_momenta(branch: Branch, rate: f64, def: &PolarDeformation, j: &InertiaTensor) -> PolarMomenta {
    let nu = match branch {
        Branch::Axis1 => SpinVector::new(rate, 0.0, 0.0),
        Branch::Axis2 => SpinVector::new(0.0, rate, 0.0),
        Branch::Axis3 => SpinVector::new(0.0, 0.0, rate),
    };
    legendre_forward(def, &PolarVelocities { nu, ..Default::default() }, j)
}

/// Solves with [`SpinInput::Coupled`] and default options.
pub fn solve_stationary<P: PotentialModel>(
    branch: Branch,
    spin_value: f64,
    j: &InertiaTensor,
    pot: &P,
    guess: &PolarDeformation,
) -> Result<StationarySolution> {
    solve_stationary_with(branch, SpinInput::Coupled(spin_value), j, pot, guess, &SolverOptions::default())
}

/// Unknown vector layout: `[α, ξ, ζ, ϱ]`, plus the free in-plane spin for
/// coupled axis-1/2 solves.
struct Problem<'a, P: PotentialModel> {
    branch: Branch,
    spin: SpinInput,
    j: &'a InertiaTensor,
    pot: &'a P,
}

impl<P: PotentialModel> Problem<'_, P> {
    fn unknowns(&self) -> usize {
        match (self.branch, self.spin) {
            (Branch::Axis3, _) | (_, SpinInput::Supplied { .. }) => 4,
            _ => 5,
        }
    }

    fn spins(&self, x: &[f64]) -> (f64, f64, f64) {
        match (self.branch, self.spin) {
            (Branch::Axis3, SpinInput::Coupled(s)) => (0.0, 0.0, s),
            (Branch::Axis3, SpinInput::Supplied { .. }) => unreachable!("rejected before solving"),
            (_, SpinInput::Supplied { pi1, pi2 }) => (pi1, pi2, 0.0),
            (Branch::Axis1, SpinInput::Coupled(s)) => (s, x[4], 0.0),
            (Branch::Axis2, SpinInput::Coupled(s)) => (x[4], s, 0.0),
        }
    }

    fn def(x: &[f64]) -> PolarDeformation {
        PolarDeformation { alpha: x[0], xi: x[1], zeta: x[2], rho: x[3] }
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let def = Self::def(x);
        def.check()?;
        let (pi1, pi2, pi3) = self.spins(x);
        Ok(match self.branch {
            Branch::Axis3 => residual_branch3(&def, pi3, self.j, self.pot)?.residual.to_vec(),
            _ => residual_branch12(&def, pi1, pi2, self.j, self.pot)?.to_vec(),
        })
    }

    fn momenta(&self, x: &[f64]) -> Result<PolarMomenta> {
        let def = Self::def(x);
        let (pi1, pi2, pi3) = self.spins(x);
        Ok(match self.branch {
            Branch::Axis3 => {
                let r = residual_branch3(&def, pi3, self.j, self.pot)?;
                PolarMomenta { pi3, p_alpha: r.p_alpha, p_xi: r.p_xi, p_zeta: r.p_zeta, ..Default::default() }
            }
            _ => PolarMomenta { pi1, pi2, ..Default::default() },
        })
    }

    /// Central differences where both sides stay valid, one-sided otherwise.
    fn jacobian(&self, x: &[f64], f0: &[f64]) -> Result<DMatrix<f64>> {
        let n = x.len();
        let mut jac = DMatrix::zeros(f0.len(), n);
        for k in 0..n {
            let h = 1e-6 * x[k].abs().max(1.0);
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[k] += h;
            down[k] -= h;
            let col: Vec<f64> = match (self.residual(&up), self.residual(&down)) {
                (Ok(fu), Ok(fd)) => fu.iter().zip(&fd).map(|(a, b)| (a - b) / (2.0 * h)).collect(),
                (Ok(fu), Err(_)) => fu.iter().zip(f0).map(|(a, b)| (a - b) / h).collect(),
                (Err(_), Ok(fd)) => f0.iter().zip(&fd).map(|(a, b)| (a - b) / h).collect(),
                (Err(e), Err(_)) => return Err(e),
            };
            for (i, v) in col.into_iter().enumerate() {
                jac[(i, k)] = v;
            }
        }
        Ok(jac)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn solve_stationary_with<P: PotentialModel>(
    branch: Branch,
    spin: SpinInput,
    j: &InertiaTensor,
    pot: &P,
    guess: &PolarDeformation,
    opts: &SolverOptions,
) -> Result<StationarySolution> {
    guess.check()?;
    if branch == Branch::Axis3 && matches!(spin, SpinInput::Supplied { .. }) {
        return Err(Error::InvalidParameter {
            name: "spin".into(),
            reason: "axis-3 solutions take a single spin value".into(),
        });
    }
    let problem = Problem { branch, spin, j, pot };
    let mut x = guess.to_array().to_vec();
    if problem.unknowns() == 5 {
        x.push(0.0);
    }
    let mut f = problem.residual(&x)?;
    let mut fnorm = norm(&f);

    for iter in 0..=opts.max_iter {
        if fnorm < opts.tolerance {
            debug!("stationary branch {} converged in {iter} iterations, |F| = {fnorm:e}", branch.index());
            return Ok(StationarySolution {
                branch,
                def: Problem::<P>::def(&x),
                momenta: problem.momenta(&x)?,
                residual_norm: fnorm,
                iterations: iter,
            });
        }
        if iter == opts.max_iter {
            break;
        }
        let jac = problem.jacobian(&x, &f)?;
        let rhs = -DVector::from_column_slice(&f);
        let delta = jac
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::DegenerateConfiguration(format!("Newton solve failed: {e}")))?;

        let mut t = 1.0;
        // outcome of the smallest trial step decides the failure kind
        let mut left_domain = false;
        let mut accepted = None;
        while t > 1e-12 {
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + t * d).collect();
            match problem.residual(&trial) {
                Ok(ft) => {
                    let n = norm(&ft);
                    if n.is_finite() && n < fnorm {
                        accepted = Some((trial, ft, n));
                        break;
                    }
                    left_domain = false;
                }
                Err(Error::PositivityViolation(_)) | Err(Error::DomainError(_)) => left_domain = true,
                Err(e) => return Err(e),
            }
            t *= 0.5;
        }
        match accepted {
            Some((xt, ft, n)) => {
                x = xt;
                f = ft;
                fnorm = n;
            }
            None if left_domain => {
                return Err(Error::PositivityViolation(format!(
                    "Newton step for branch {} leaves the valid domain (best residual {fnorm:e})",
                    branch.index()
                )))
            }
            None => break,
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual_norm: fnorm, best: x })
}

/// `Φ(t) = exp(ν̂t)·L₀·S = L₀·exp(hat(ν)t)·S` with `ν̂ = L₀·hat(ν)·L₀⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryOrbit {
    pub phi0: Matrix3<f64>,
    /// Spatial angular velocity (antisymmetric).
    pub nu_hat: Matrix3<f64>,
}

impl StationaryOrbit {
    pub fn new(l0: &RotationMatrix, nu: SpinVector, s: &PolarDeformation) -> Self {
        let l = l0.matrix();
        Self { phi0: l * s.matrix(), nu_hat: l * nu.hat() * l.transpose() }
    }

    pub fn at(&self, t: f64) -> Matrix3<f64> {
        let m = &self.nu_hat;
        let spatial = SpinVector::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]);
        spatial.exp_hat(t).matrix() * self.phi0
    }
}

pub fn stationary_orbit(l0: &RotationMatrix, nu: SpinVector, s: &PolarDeformation, t: f64) -> Matrix3<f64> {
    StationaryOrbit::new(l0, nu, s).at(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{deformation_forces, eom_rhs};
    use crate::potentials::Potential;
    use nalgebra::Vector3;

    fn setup() -> (InertiaTensor, Potential) {
        (InertiaTensor::new(1.2, 0.8, 0.6).unwrap(), Potential::harmonic(1.0, 1.0, 1.0).unwrap())
    }

    #[test]
    fn branch12_residual_vanishes_at_rest() {
        let (j, _) = setup();
        let pot = Potential::harmonic(1.0, 2.0, 0.25).unwrap();
        let def = PolarDeformation { rho: pot.rho_equilibrium(), ..PolarDeformation::identity() };
        let r = residual_branch12(&def, 0.0, 0.0, &j, &pot).unwrap();
        assert!(norm(&r) < 1e-15, "{r:?}");
    }

    #[test]
    fn compatibility_needs_shear_or_second_spin() {
        let (j, pot) = setup();
        let def = PolarDeformation::new(0.0, 1.3, 0.9, 1.1).unwrap();
        for pi1 in [0.1, 1.0, -3.0] {
            assert_eq!(residual_branch12(&def, pi1, 0.0, &j, &pot).unwrap()[4], 0.0);
        }
    }

    #[test]
    fn branch12_residual_is_minus_momentum_rate() {
        let (j, pot) = setup();
        let def = PolarDeformation::new(0.15, 1.2, 0.85, 1.05).unwrap();
        let (pi1, pi2) = (0.6, -0.35);
        let r = residual_branch12(&def, pi1, pi2, &j, &pot).unwrap();
        let mom = PolarMomenta { pi1, pi2, ..Default::default() };
        let p = PhasePoint::new(RotationMatrix::identity(), def, mom, 0.0).unwrap();
        let d = eom_rhs(&p, &j, &pot).unwrap().mom_dot;
        let rates = [d.p_alpha, d.p_xi, d.p_zeta, d.p_rho];
        for i in 0..4 {
            assert!((r[i] + rates[i]).abs() < 1e-12, "{i}: {} vs {}", r[i], rates[i]);
        }
        let xi_sym = crate::dynamics::auxiliary_symbols(&def, &mom, &j).xi_sym;
        assert!((r[4] / xi_sym - d.pi3).abs() < 1e-12);
    }

    #[test]
    fn branch3_residual_is_minus_momentum_rate() {
        let (j, pot) = setup();
        let def = PolarDeformation::new(0.1, 1.1, 0.95, 0.9).unwrap();
        let pi3 = 0.45;
        let r = residual_branch3(&def, pi3, &j, &pot).unwrap();
        let mom = PolarMomenta { pi3, p_alpha: r.p_alpha, p_xi: r.p_xi, p_zeta: r.p_zeta, ..Default::default() };
        let forces = deformation_forces(&def, &mom, &j, &pot).unwrap();
        for (res, force) in r.residual.iter().zip(forces) {
            assert!((res + force).abs() < 1e-12);
        }
        // the implied momenta keep the deformation still
        let v = legendre_inverse(&def, &mom, &j).unwrap();
        for rate in [v.alpha_dot, v.xi_dot, v.zeta_dot, v.rho_dot, v.nu.nu1, v.nu.nu2] {
            assert!(rate.abs() < 1e-15);
        }
    }

    #[test]
    fn branch3_examples() {
        let (j, pot) = setup();
        let def = PolarDeformation { rho: 1.0, ..PolarDeformation::identity() };
        let r = residual_branch3(&def, 0.0, &j, &pot).unwrap();
        assert_eq!(r.residual, [0.0; 4]);
        assert_eq!((r.p_alpha, r.p_xi, r.p_zeta), (0.0, 0.0, 0.0));

        let pot2 = Potential::harmonic(1.0, 2.0, 0.5).unwrap();
        let off = PolarDeformation { rho: 1.3, ..def };
        assert_eq!(residual_branch3(&off, 0.7, &j, &pot2).unwrap().residual[3], pot2.dv_rho(1.3).unwrap());
        let at = PolarDeformation { rho: pot2.rho_equilibrium(), ..def };
        assert!(residual_branch3(&at, 0.7, &j, &pot2).unwrap().residual[3].abs() < 1e-15);

        let iso = InertiaTensor::new(0.9, 0.9, 1.4).unwrap();
        let round = PolarDeformation::new(0.0, 1.2, 1.2, 0.8).unwrap();
        let r = residual_branch3(&round, 2.5, &iso, &pot).unwrap();
        assert_eq!((r.p_alpha, r.p_xi, r.p_zeta), (0.0, 0.0, 0.0));
    }

    #[test]
    fn zero_spin_gives_equilibrium() {
        let j = InertiaTensor::new(1.2, 0.8, 0.6).unwrap();
        let pot = Potential::harmonic(1.0, 3.0, 1.0).unwrap();
        let guess = PolarDeformation::identity();
        let sol = solve_stationary(Branch::Axis3, 0.0, &j, &pot, &guess).unwrap();
        assert!(sol.residual_norm < 1e-10);
        assert!((sol.def.rho - 3f64.cbrt()).abs() < 1e-10);
        assert!(sol.def.alpha.abs() < 1e-10);
        assert!((sol.def.xi - 1.0).abs() < 1e-10 && (sol.def.zeta - 1.0).abs() < 1e-10);
    }

    #[test]
    fn branch3_continuation_to_equilibrium() {
        let (j, pot) = setup();
        let eq = PolarDeformation { rho: pot.rho_equilibrium(), ..PolarDeformation::identity() };
        let dist = |d: &PolarDeformation| {
            norm(&d.to_array().iter().zip(eq.to_array()).map(|(a, b)| a - b).collect::<Vec<_>>())
        };
        let mut last = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-3] {
            let sol = solve_stationary(Branch::Axis3, eps, &j, &pot, &PolarDeformation::identity()).unwrap();
            assert!(sol.residual_norm < 1e-10);
            let d = dist(&sol.def);
            assert!(d < last, "{d} !< {last}");
            last = d;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn branch1_rotates_about_first_axis() {
        let (j, pot) = setup();
        let sol = solve_stationary(Branch::Axis1, 0.4, &j, &pot, &PolarDeformation::identity()).unwrap();
        assert!(sol.residual_norm < 1e-10);
        assert_eq!(sol.momenta.pi3, 0.0);
        assert_eq!((sol.momenta.p_alpha, sol.momenta.p_xi, sol.momenta.p_zeta, sol.momenta.p_rho), (0.0, 0.0, 0.0, 0.0));
        let nu = sol.angular_velocity(&j).unwrap();
        assert!(nu.nu1.abs() > 0.1);
        assert!(nu.nu2.abs() < 1e-9 && nu.nu3.abs() < 1e-12, "{nu:?}");
        // centrifugal stretch: ζ and ϱ grow, ξ stays put
        assert!(sol.def.zeta > 1.0 && sol.def.rho > 1.0);
        assert!((sol.def.xi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn branch2_rotates_about_second_axis() {
        let (j, pot) = setup();
        let sol = solve_stationary(Branch::Axis2, -0.3, &j, &pot, &PolarDeformation::identity()).unwrap();
        assert_eq!(sol.momenta.pi2, -0.3);
        let nu = sol.angular_velocity(&j).unwrap();
        assert!(nu.nu1.abs() < 1e-9 && nu.nu3.abs() < 1e-12);
        assert!(sol.def.xi > 1.0 && (sol.def.zeta - 1.0).abs() < 1e-9);
    }

    #[test]
    fn supplied_spins_must_be_compatible() {
        let (j, pot) = setup();
        // α = 0 solutions need π₂ = 0, so a generic pair has no solution
        let err = solve_stationary_with(
            Branch::Axis1,
            SpinInput::Supplied { pi1: 0.4, pi2: 0.3 },
            &j,
            &pot,
            &PolarDeformation::identity(),
            &SolverOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }), "{err:?}");

        let ok = solve_stationary_with(
            Branch::Axis1,
            SpinInput::Supplied { pi1: 0.4, pi2: 0.0 },
            &j,
            &pot,
            &PolarDeformation::identity(),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(ok.residual_norm < 1e-10);
    }

    #[test]
    fn axis_momenta_match_branch_shape() {
        let (j, _) = setup();
        let def = PolarDeformation::new(0.2, 1.1, 0.9, 1.0).unwrap();
        let m = axis_momenta(Branch::Axis1, 0.5, &def, &j);
        // rotation about axis 1 with shear drags π₂ along
        assert!(m.pi2 != 0.0 && m.pi3 == 0.0);
        let m = axis_momenta(Branch::Axis3, 0.5, &def, &j);
        assert_eq!((m.pi1, m.pi2, m.p_rho), (0.0, 0.0, 0.0));
        let r = residual_branch3(&def, m.pi3, &j, &Potential::default()).unwrap();
        assert!((r.p_alpha - m.p_alpha).abs() < 1e-15);
        assert!((r.p_xi - m.p_xi).abs() < 1e-15);
        assert!((r.p_zeta - m.p_zeta).abs() < 1e-15);
    }

    #[test]
    fn axis3_rejects_supplied_pair() {
        let (j, pot) = setup();
        let err = solve_stationary_with(
            Branch::Axis3,
            SpinInput::Supplied { pi1: 0.1, pi2: 0.1 },
            &j,
            &pot,
            &PolarDeformation::identity(),
            &SolverOptions::default(),
        );
        assert!(matches!(err, Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn orbit_examples() {
        let l0 = RotationMatrix::from_rotation_vector(Vector3::new(0.3, -0.2, 0.9));
        let s = PolarDeformation::new(0.2, 1.3, 0.8, 1.1).unwrap();
        let phi0 = l0.matrix() * s.matrix();
        let nu = SpinVector::new(0.4, -0.1, 0.7);
        assert!((stationary_orbit(&l0, nu, &s, 0.0) - phi0).amax() < 1e-15);
        for t in [0.5, 3.0, 40.0] {
            assert!((stationary_orbit(&l0, SpinVector::zero(), &s, t) - phi0).amax() < 1e-15);
        }
        // same as L₀·exp(hat(ν)t)·S
        let t = 2.3;
        let direct = l0.matrix() * nu.exp_hat(t).matrix() * s.matrix();
        assert!((stationary_orbit(&l0, nu, &s, t) - direct).amax() < 1e-13);
        let orbit = StationaryOrbit::new(&l0, nu, &s);
        assert!((orbit.nu_hat + orbit.nu_hat.transpose()).amax() < 1e-15);
    }

    #[test]
    fn integrated_solution_follows_orbit() {
        use crate::integrator::{simulate, IntegratorConfig};
        let (j, pot) = setup();
        let l0 = RotationMatrix::from_rotation_vector(Vector3::new(0.2, 0.5, -0.3));
        for (branch, spin) in [(Branch::Axis1, 0.4), (Branch::Axis2, 0.3), (Branch::Axis3, 0.6)] {
            let sol = solve_stationary(branch, spin, &j, &pot, &PolarDeformation::identity()).unwrap();
            let nu = sol.angular_velocity(&j).unwrap();
            let traj = simulate(&sol.phase_point(l0), &IntegratorConfig::rk4(1e-3, 2000), &j, &pot).unwrap();
            let end = traj.last().unwrap();
            let gap = (end.phi() - stationary_orbit(&l0, nu, &sol.def, end.t)).amax();
            assert!(gap < 1e-10, "branch {}: {gap:e}", branch.index());
        }
    }

    #[test]
    fn absurd_spin_fails() {
        let (j, pot) = setup();
        let err = solve_stationary(Branch::Axis1, 1e6, &j, &pot, &PolarDeformation::identity()).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. } | Error::PositivityViolation(_)), "{err:?}");
    }
}
