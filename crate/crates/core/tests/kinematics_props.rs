//! Property tests for the kinematic layer.

use std::f64::consts::PI;

use klbody::kinematics::{
    deformation_invariants, ell_polar, green_tensor, kl_embed, nu_from_omega_theta, polar_decompose,
    polar_from_two_polar, two_polar_from_polar, PolarDeformation, PolarState, RotationMatrix, SpinVector,
    TwoPolarDeformation, TwoPolarState,
};
use nalgebra::{Matrix3, Matrix3x2, Vector3};
use proptest::prelude::*;

fn deformation() -> impl Strategy<Value = PolarDeformation> {
    (-0.3f64..0.3, 0.6f64..1.6, 0.6f64..1.6, 0.5f64..1.5)
        .prop_map(|(alpha, xi, zeta, rho)| PolarDeformation::new(alpha, xi, zeta, rho).unwrap())
}

fn rotation() -> impl Strategy<Value = RotationMatrix> {
    (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b, c)| RotationMatrix::from_rotation_vector(Vector3::new(a, b, c)))
}

fn spin() -> impl Strategy<Value = SpinVector> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b, c)| SpinVector::new(a, b, c))
}

proptest! {
    #[test]
    fn two_polar_roundtrip(l in rotation(), def in deformation()) {
        let tp = two_polar_from_polar(&l, &def);
        prop_assert!(tp.def.lambda >= tp.def.mu);
        prop_assert!((0.0..PI).contains(&tp.def.theta));
        let (l2, def2) = polar_from_two_polar(&tp);
        prop_assert!((l2.matrix() - l.matrix()).amax() < 1e-12);
        for (a, b) in def2.to_array().iter().zip(def.to_array()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let phi = PolarState { l, def }.phi();
        prop_assert!((tp.phi() - phi).amax() < 1e-12);
    }

    #[test]
    fn ell_agrees_between_charts(lambda in 0.5f64..2.0, mu in 0.5f64..2.0, rho in 0.5f64..1.5, theta in 0.0f64..PI) {
        let def = TwoPolarDeformation::new(lambda, mu, rho, theta).unwrap();
        let (_, polar) = polar_from_two_polar(&TwoPolarState { r: RotationMatrix::identity(), def });
        let ell = ell_polar(&polar).unwrap();
        prop_assert!((ell - rho / (lambda * mu)).abs() < 1e-12 * ell);
    }

    #[test]
    fn polar_decomposition_recovers_factors(l in rotation(), def in deformation()) {
        let state = polar_decompose(&PolarState { l, def }.phi()).unwrap();
        prop_assert!((state.l.matrix() - l.matrix()).amax() < 1e-10);
        for (a, b) in state.def.to_array().iter().zip(def.to_array()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn green_tensor_ignores_spatial_rotation(q in rotation(), l in rotation(), def in deformation()) {
        let phi = PolarState { l, def }.phi();
        let g_direct = phi.transpose() * phi;
        let rotated = polar_decompose(&(q.matrix() * phi)).unwrap();
        prop_assert!((green_tensor(&rotated.def).matrix() - g_direct).amax() < 1e-10);
        prop_assert!((green_tensor(&def).matrix() - g_direct).amax() < 1e-12);
    }

    #[test]
    fn invariants_multiply_to_det_g(def in deformation()) {
        let k = deformation_invariants(&def);
        let det = green_tensor(&def).determinant();
        prop_assert!((k.k1 * k.k2 * k.k3 - det).abs() < 1e-12 * det.abs().max(1.0));
        prop_assert!(k.k1 >= k.k2 && k.k2 > 0.0);
    }

    #[test]
    fn invariants_ignore_material_rotation(def in deformation(), theta in 0.0f64..PI) {
        // S ↦ U S U⁻¹ with U about the normal
        let u = RotationMatrix::about_third_axis(theta);
        let s = u.matrix() * def.matrix() * u.matrix().transpose();
        let turned = PolarDeformation::new(s[(0, 1)], s[(0, 0)], s[(1, 1)], s[(2, 2)]).unwrap();
        let (a, b) = (deformation_invariants(&def), deformation_invariants(&turned));
        prop_assert!((a.k1 - b.k1).abs() < 1e-12 && (a.k2 - b.k2).abs() < 1e-12);
    }

    #[test]
    fn spin_is_body_angular_velocity(l0 in rotation(), nu in spin()) {
        // L(t) = L₀·exp(νt); L₀⁻¹·dL/dt at t = 0 by central differences
        let h = 1e-5;
        let d = (l0 * nu.exp(h)).matrix() - (l0 * nu.exp(-h)).matrix();
        let body = l0.matrix().transpose() * d / (2.0 * h);
        prop_assert!((body - nu.to_matrix()).amax() < 1e-9);
        let back = SpinVector::from_matrix(&body);
        prop_assert!((back.to_vector() - nu.to_vector()).amax() < 1e-9);
    }

    #[test]
    fn spin_of_composed_tops(omega in spin(), theta in 0.0f64..PI, theta_dot in -1.0f64..1.0) {
        // L = R·U(θ)⁻¹ with R = exp(ωt), θ(t) = θ + θ̇t
        let h = 1e-5;
        let l_at = |t: f64| omega.exp(t) * RotationMatrix::about_third_axis(theta + theta_dot * t).transpose();
        let d = (l_at(h).matrix() - l_at(-h).matrix()) / (2.0 * h);
        let body = SpinVector::from_matrix(&(l_at(0.0).matrix().transpose() * d));
        let want = nu_from_omega_theta(omega, theta, theta_dot);
        prop_assert!((body.to_vector() - want.to_vector()).amax() < 1e-9);
    }

    #[test]
    fn embedding_satisfies_constraint(c in prop::array::uniform6(-2.0f64..2.0), ell in 0.1f64..3.0) {
        let plane = Matrix3x2::from_column_slice(&c);
        let normal = plane.column(0).cross(&plane.column(1));
        prop_assume!(normal.norm() > 1e-6);
        let phi: Matrix3<f64> = kl_embed(&plane, ell).unwrap();
        prop_assert!((phi.column(2) - normal * ell).amax() < 1e-12);
        prop_assert!(phi.determinant() > 0.0);
    }
}
