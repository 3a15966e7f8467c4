pub mod polar;
pub mod two_polar;

pub use polar::{
    auxiliary_symbols, deformation_forces, eom_rhs, hamiltonian, kinetic_energy_canonical, kinetic_energy_velocities,
    legendre_forward, legendre_inverse, spin_torques, AuxiliarySymbols, InertiaTensor, KineticEnergy, PhaseDerivative,
    PhasePoint, PolarMomenta, PolarVelocities,
};
pub use two_polar::{
    kinetic_energy_canonical_isotropic, kinetic_energy_two_polar, to_polar_velocities, TwoPolarMomenta,
    TwoPolarVelocities,
};
