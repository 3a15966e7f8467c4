//! Property tests for the Hamiltonian flow and the stationary solver.

use klbody::dynamics::{
    eom_rhs, hamiltonian, kinetic_energy_canonical, kinetic_energy_velocities, legendre_forward, legendre_inverse,
    InertiaTensor, PhasePoint, PolarMomenta, PolarVelocities,
};
use klbody::integrator::{simulate, IntegratorConfig};
use klbody::kinematics::{green_tensor, PolarDeformation, RotationMatrix};
use klbody::potentials::Potential;
use klbody::stationary::{solve_stationary, Branch};
use nalgebra::Vector3;
use proptest::prelude::*;

fn inertia() -> impl Strategy<Value = InertiaTensor> {
    (0.5f64..2.0, 0.5f64..2.0, 0.5f64..2.0).prop_map(|(a, b, c)| InertiaTensor::new(a, b, c).unwrap())
}

fn deformation() -> impl Strategy<Value = PolarDeformation> {
    (-0.3f64..0.3, 0.6f64..1.6, 0.6f64..1.6, 0.5f64..1.5)
        .prop_map(|(alpha, xi, zeta, rho)| PolarDeformation::new(alpha, xi, zeta, rho).unwrap())
}

fn seven(scale: f64) -> impl Strategy<Value = [f64; 7]> {
    prop::array::uniform7(-scale..scale)
}

proptest! {
    #[test]
    fn legendre_is_an_involution(j in inertia(), def in deformation(), m in seven(1.0)) {
        let mom = PolarMomenta::from_array(m);
        let vel = legendre_inverse(&def, &mom, &j).unwrap();
        let back = legendre_forward(&def, &vel, &j).to_array();
        for (a, b) in back.iter().zip(m) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        // 𝒯(p) = ½⟨p, v⟩ for a quadratic form
        let pairing: f64 = m.iter().zip(vel.to_array()).map(|(p, v)| p * v).sum();
        prop_assert!((kinetic_energy_canonical(&def, &mom, &j) - 0.5 * pairing).abs() < 1e-12);
    }

    #[test]
    fn kinetic_energy_is_positive(j in inertia(), def in deformation(), v in seven(1.0)) {
        prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
        let t = kinetic_energy_velocities(&def, &PolarVelocities::from_array(v), &j);
        prop_assert!(t.total > 0.0);
        prop_assert!((t.rot + t.rot_def + t.def - t.total).abs() < 1e-12 * t.total);
    }

    #[test]
    fn rates_do_not_depend_on_orientation(j in inertia(), def in deformation(), m in seven(1.0), k in prop::array::uniform3(-3.0f64..3.0)) {
        let pot = Potential::invariant(0.7, 1.2, 0.9).unwrap();
        let mom = PolarMomenta::from_array(m);
        let a = eom_rhs(&PhasePoint::new(RotationMatrix::identity(), def, mom, 0.0).unwrap(), &j, &pot).unwrap();
        let l = RotationMatrix::from_rotation_vector(Vector3::from(k));
        let b = eom_rhs(&PhasePoint::new(l, def, mom, 0.0).unwrap(), &j, &pot).unwrap();
        prop_assert_eq!(a.mom_dot, b.mom_dot);
        prop_assert_eq!(a.velocities, b.velocities);
        prop_assert!((b.l_dot - l.matrix() * a.l_dot).amax() < 1e-14);
    }

    #[test]
    fn short_runs_conserve_energy_and_angular_momentum(j in inertia(), m in seven(0.3)) {
        let pot = Potential::harmonic(1.0, 1.0, 1.0).unwrap();
        let def = PolarDeformation::new(0.05, 1.05, 0.95, 1.0).unwrap();
        let p0 = PhasePoint::new(RotationMatrix::identity(), def, PolarMomenta::from_array(m), 0.0).unwrap();
        let traj = simulate(&p0, &IntegratorConfig::rk4(1e-2, 300), &j, &pot).unwrap();
        prop_assert!(traj.failure.is_none());
        prop_assert!(traj.max_relative_energy_drift() < 1e-7);
        // L·π is the spatial angular momentum
        let spatial = |p: &PhasePoint| p.l.matrix() * Vector3::new(p.mom.pi1, p.mom.pi2, p.mom.pi3);
        let m0 = spatial(&traj.points[0]);
        prop_assert!(traj.points.iter().all(|p| (spatial(p) - m0).amax() < 1e-8));
        let s0 = traj.monitors[0].spin_norm_squared;
        // |π| is a Casimir of the spin bracket
        prop_assert!(traj.monitors.iter().all(|m| (m.spin_norm_squared - s0).abs() < 1e-8 * s0.max(1e-3)));
    }

    #[test]
    fn axis3_solutions_are_rest_points_of_the_reduced_flow(j in inertia(), pi3 in -0.3f64..0.3) {
        let pot = Potential::harmonic(1.0, 1.5, 0.8).unwrap();
        let guess = PolarDeformation { rho: pot.rho_equilibrium(), ..PolarDeformation::identity() };
        let sol = solve_stationary(Branch::Axis3, pi3, &j, &pot, &guess).unwrap();
        prop_assert!(sol.residual_norm < 1e-10);
        let m = sol.momenta;
        prop_assert_eq!((m.pi1, m.pi2, m.p_rho), (0.0, 0.0, 0.0));
        let rhs = eom_rhs(&sol.phase_point(RotationMatrix::identity()), &j, &pot).unwrap();
        let v = rhs.velocities;
        prop_assert!([v.alpha_dot, v.xi_dot, v.zeta_dot, v.rho_dot].iter().all(|x| x.abs() < 1e-9));
        prop_assert!(rhs.mom_dot.to_array().iter().all(|x| x.abs() < 1e-9));
        prop_assert!((sol.def.rho - pot.rho_equilibrium()).abs() < 1e-10);
    }

    #[test]
    fn axis12_solutions_keep_green_tensor(j in inertia(), spin in 0.05f64..0.5, axis2 in any::<bool>()) {
        let pot = Potential::harmonic(1.0, 1.0, 1.0).unwrap();
        let branch = if axis2 { Branch::Axis2 } else { Branch::Axis1 };
        let sol = solve_stationary(branch, spin, &j, &pot, &PolarDeformation::identity()).unwrap();
        let p0 = sol.phase_point(RotationMatrix::identity());
        let traj = simulate(&p0, &IntegratorConfig::rk4(1e-2, 100), &j, &pot).unwrap();
        let g0 = green_tensor(&sol.def).matrix();
        for p in &traj.points {
            prop_assert!((green_tensor(&p.def).matrix() - g0).amax() < 1e-9);
        }
        let nu = sol.angular_velocity(&j).unwrap();
        let zeroed = if axis2 { [nu.nu1, nu.nu3] } else { [nu.nu2, nu.nu3] };
        prop_assert!(zeroed.iter().all(|x| x.abs() < 1e-9));
        prop_assert!(hamiltonian(&sol.def, &sol.momenta, &j, &pot).is_ok());
    }
}
