//! Configuration space of the constrained body.
//!
//! A configuration is a linear map `Φ` whose third column is proportional to
//! the cross product of the first two. It is parameterised either by the polar
//! decomposition `Φ = L·S` with
//!
//! ```text
//!     | ξ  α  0 |
//! S = | α  ζ  0 |
//!     | 0  0  ϱ |
//! ```
//!
//! or by the singular value ("two-polar") decomposition `Φ = R·D·U(θ)⁻¹` with
//! `D = diag(λ, μ, ϱ)` and `U(θ)` a rotation about the third material axis.
//!
//! Antisymmetric matrices are identified with 3-vectors through the layout
//!
//! ```text
//!     |  0   ν₃  -ν₂ |
//! ν = | -ν₃  0    ν₁ |
//!     |  ν₂ -ν₁   0  |
//! ```
//!
//! which is the negative of the usual `hat` map. The kinetic energy formulas in
//! [`crate::dynamics`] are written for this layout with `ν = L⁻¹·L̇`.

use nalgebra::{Matrix2, Matrix3, Matrix3x2, Vector3};

use crate::error::{Error, Result};

/// Tolerance used to accept a matrix as a proper rotation.
pub const ROTATION_TOLERANCE: f64 = 1e-10;

/// Below this norm the two in-plane columns are treated as collinear.
const CROSS_PRODUCT_FLOOR: f64 = 1e-12;

/// Proper orthogonal 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Exponential map of a rotation vector (axis times angle), Rodrigues form.
    pub fn from_rotation_vector(k: Vector3<f64>) -> Self {
        let angle = k.norm();
        if angle < 1e-300 {
            return Self::identity();
        }
        let axis = k / angle;
        let (s, c) = angle.sin_cos();
        let hat = skew(axis);
        Self(Matrix3::identity() + hat * s + hat * hat * (1.0 - c))
    }

    /// Rotation about the third axis by `theta`. This is `U(θ)` of the
    /// two-polar decomposition.
    pub fn about_third_axis(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    /// Checked constructor.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let r = Self(m);
        let defect = r.orthogonality_defect();
        if defect > ROTATION_TOLERANCE {
            return Err(Error::DegenerateConfiguration(format!(
                "matrix is not orthogonal (defect {defect:e})"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(Error::DegenerateConfiguration(format!(
                "matrix is not a proper rotation (det {det})"
            )));
        }
        Ok(r)
    }

    /// Wraps a matrix without checking. Used for integrator states whose
    /// drift is monitored and corrected separately.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Matrix3<f64> {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// `‖mᵀm − I‖∞` (largest absolute entry).
    pub fn orthogonality_defect(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).amax()
    }

    /// Nearest proper rotation in the Frobenius norm (orthogonal factor of the
    /// polar decomposition).
    pub fn reprojected(&self) -> Self {
        Self(nearest_rotation(&self.0))
    }

    /// Rotation vector of this rotation (inverse of [`Self::from_rotation_vector`]).
    pub fn rotation_vector(&self) -> Vector3<f64> {
        let m = &self.0;
        let cos = ((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        let angle = cos.acos();
        let v = Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]);
        if angle < 1e-8 {
            return v / 2.0;
        }
        if std::f64::consts::PI - angle < 1e-6 {
            // near π the antisymmetric part vanishes; read the axis off m + I
            let b = (m + Matrix3::identity()) / 2.0;
            let col = (0..3)
                .map(|j| b.column(j).into_owned())
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .unwrap_or_else(Vector3::x);
            return col.normalize() * angle;
        }
        v * (angle / (2.0 * angle.sin()))
    }
}

impl std::ops::Mul for RotationMatrix {
    type Output = RotationMatrix;

    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

/// Standard cross-product matrix, `skew(a)·b = a × b`.
fn skew(a: Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

pub(crate) fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return *m;
    };
    let mut q = u * v_t;
    if q.determinant() < 0.0 {
        let mut u = u;
        // smallest singular value is last
        let mut col = u.column_mut(2);
        col.neg_mut();
        q = u * v_t;
    }
    q
}

/// Co-moving angular velocity, stored as the vector of the antisymmetric
/// matrix `L⁻¹·L̇` in the layout described in the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpinVector {
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
}

impl SpinVector {
    pub const fn new(nu1: f64, nu2: f64, nu3: f64) -> Self {
        Self { nu1, nu2, nu3 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.nu1, self.nu2, self.nu3)
    }

    pub fn from_vector(v: Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    /// Antisymmetric matrix `[[0, ν₃, −ν₂], [−ν₃, 0, ν₁], [ν₂, −ν₁, 0]]`.
    pub fn to_matrix(self) -> Matrix3<f64> {
        let Self { nu1, nu2, nu3 } = self;
        Matrix3::new(0.0, nu3, -nu2, -nu3, 0.0, nu1, nu2, -nu1, 0.0)
    }

    /// Reads the vector back from the antisymmetric part of `m`.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        Self::new(
            0.5 * (m[(1, 2)] - m[(2, 1)]),
            0.5 * (m[(2, 0)] - m[(0, 2)]),
            0.5 * (m[(0, 1)] - m[(1, 0)]),
        )
    }

    /// Cross-product matrix `hat(ν)`, with `hat(ν)·x = ν × x`; equals `−to_matrix()`.
    pub fn hat(self) -> Matrix3<f64> {
        -self.to_matrix()
    }

    /// `exp(t·hat(ν))`, the rotation by angle `t|ν|` about `ν`.
    pub fn exp_hat(self, t: f64) -> RotationMatrix {
        RotationMatrix::from_rotation_vector(self.to_vector() * t)
    }

    /// `exp(t·ν)` for the matrix form of this vector.
    pub fn exp(self, t: f64) -> RotationMatrix {
        // the matrix layout is minus the usual hat map
        RotationMatrix::from_rotation_vector(-self.to_vector() * t)
    }

    pub fn norm_squared(self) -> f64 {
        self.nu1 * self.nu1 + self.nu2 * self.nu2 + self.nu3 * self.nu3
    }
}

/// Symmetric factor `S` of the polar decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarDeformation {
    pub alpha: f64,
    pub xi: f64,
    pub zeta: f64,
    pub rho: f64,
}

impl PolarDeformation {
    /// Checked constructor: `ξ, ζ, ϱ > 0` and `ξζ − α² > 0`.
    pub fn new(alpha: f64, xi: f64, zeta: f64, rho: f64) -> Result<Self> {
        let def = Self { alpha, xi, zeta, rho };
        def.check()?;
        Ok(def)
    }

    pub fn identity() -> Self {
        Self { alpha: 0.0, xi: 1.0, zeta: 1.0, rho: 1.0 }
    }

    /// `ξζ − α²`, the determinant of the in-plane block.
    pub fn plane_determinant(&self) -> f64 {
        self.xi * self.zeta - self.alpha * self.alpha
    }

    pub fn check(&self) -> Result<()> {
        let Self { alpha, xi, zeta, rho } = *self;
        if !(alpha.is_finite() && xi.is_finite() && zeta.is_finite() && rho.is_finite()) {
            return Err(Error::PositivityViolation(format!("non-finite deformation {self:?}")));
        }
        if xi <= 0.0 || zeta <= 0.0 {
            return Err(Error::PositivityViolation(format!("xi = {xi}, zeta = {zeta}")));
        }
        if rho <= 0.0 {
            return Err(Error::PositivityViolation(format!("rho = {rho}")));
        }
        let det = self.plane_determinant();
        if det <= 0.0 {
            return Err(Error::PositivityViolation(format!("xi*zeta - alpha^2 = {det}")));
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        let Self { alpha, xi, zeta, rho } = *self;
        Matrix3::new(xi, alpha, 0.0, alpha, zeta, 0.0, 0.0, 0.0, rho)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.alpha, self.xi, self.zeta, self.rho]
    }

    pub fn from_array(q: [f64; 4]) -> Self {
        Self { alpha: q[0], xi: q[1], zeta: q[2], rho: q[3] }
    }
}

/// Diagonal stretches and material angle of the two-polar decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPolarDeformation {
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub theta: f64,
}

impl TwoPolarDeformation {
    pub fn new(lambda: f64, mu: f64, rho: f64, theta: f64) -> Result<Self> {
        let def = Self { lambda, mu, rho, theta };
        def.check()?;
        Ok(def)
    }

    pub fn check(&self) -> Result<()> {
        let Self { lambda, mu, rho, theta } = *self;
        if !(lambda > 0.0 && mu > 0.0 && rho > 0.0 && theta.is_finite()) {
            return Err(Error::PositivityViolation(format!(
                "lambda = {lambda}, mu = {mu}, rho = {rho}, theta = {theta}"
            )));
        }
        Ok(())
    }

    pub fn diagonal(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(self.lambda, self.mu, self.rho))
    }

    pub fn material_rotation(&self) -> RotationMatrix {
        RotationMatrix::about_third_axis(self.theta)
    }
}

/// Configuration in polar variables, `Φ = L·S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState {
    pub l: RotationMatrix,
    pub def: PolarDeformation,
}

impl PolarState {
    pub fn phi(&self) -> Matrix3<f64> {
        self.l.matrix() * self.def.matrix()
    }
}

/// Configuration in two-polar variables, `Φ = R·D·U(θ)⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPolarState {
    pub r: RotationMatrix,
    pub def: TwoPolarDeformation,
}

impl TwoPolarState {
    pub fn phi(&self) -> Matrix3<f64> {
        self.r.matrix() * self.def.diagonal() * self.def.material_rotation().matrix().transpose()
    }
}

/// Green deformation tensor `G = ΦᵀΦ = S²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenTensor {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    pub g33: f64,
}

impl GreenTensor {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.g11, self.g12, 0.0, self.g12, self.g22, 0.0, 0.0, 0.0, self.g33)
    }

    pub fn determinant(&self) -> f64 {
        (self.g11 * self.g22 - self.g12 * self.g12) * self.g33
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.g11, self.g12, self.g22, self.g33]
    }
}

/// Eigenvalues of the Green tensor, `k1 ≥ k2` in the plane and `k3 = ϱ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationInvariants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

/// Completes an in-plane immersion to a Kirchhoff–Love configuration: the
/// third column is `ell` times the cross product of the first two.
pub fn kl_embed(phi_plane: &Matrix3x2<f64>, ell: f64) -> Result<Matrix3<f64>> {
    let c1: Vector3<f64> = phi_plane.column(0).into_owned();
    let c2: Vector3<f64> = phi_plane.column(1).into_owned();
    let normal = c1.cross(&c2);
    if normal.norm() < CROSS_PRODUCT_FLOOR {
        return Err(Error::DegenerateConfiguration(format!(
            "in-plane columns are collinear (|c1 x c2| = {:e})",
            normal.norm()
        )));
    }
    Ok(Matrix3::from_columns(&[c1, c2, normal * ell]))
}

/// `ℓ = ϱ / (ξζ − α²)`.
pub fn ell_polar(def: &PolarDeformation) -> Result<f64> {
    let det = def.plane_determinant();
    if det <= 0.0 {
        return Err(Error::PositivityViolation(format!("xi*zeta - alpha^2 = {det}")));
    }
    Ok(def.rho / det)
}

/// `ℓ = ϱ / (λμ)`.
pub fn ell_two_polar(def: &TwoPolarDeformation) -> f64 {
    def.rho / (def.lambda * def.mu)
}

/// `L = R·U(θ)⁻¹` and `S = U(θ)·D·U(θ)⁻¹`.
pub fn polar_from_two_polar(state: &TwoPolarState) -> (RotationMatrix, PolarDeformation) {
    let TwoPolarDeformation { lambda, mu, rho, theta } = state.def;
    let (s, c) = theta.sin_cos();
    let def = PolarDeformation {
        alpha: (lambda - mu) * s * c,
        xi: lambda * c * c + mu * s * s,
        zeta: lambda * s * s + mu * c * c,
        rho,
    };
    let l = state.r * state.def.material_rotation().transpose();
    (l, def)
}

/// Inverse of [`polar_from_two_polar`]: eigen-decomposes the in-plane block of
/// `S`, with `λ ≥ μ` and `θ ∈ [0, π)` the angle of the `λ` eigenvector.
/// When `λ = μ` the angle is set to zero.
pub fn two_polar_from_polar(l: &RotationMatrix, def: &PolarDeformation) -> TwoPolarState {
    let PolarDeformation { alpha, xi, zeta, rho } = *def;
    let mean = 0.5 * (xi + zeta);
    let half_gap = 0.5 * (xi - zeta);
    let radius = half_gap.hypot(alpha);
    let lambda = mean + radius;
    // μ = det/λ avoids cancellation when the block is nearly singular
    let mu = def.plane_determinant() / lambda;
    let theta = if radius <= 1e-15 * mean.abs().max(1.0) {
        0.0
    } else {
        let t = 0.5 * (2.0 * alpha).atan2(xi - zeta);
        if t < 0.0 {
            t + std::f64::consts::PI
        } else {
            t
        }
    };
    let def = TwoPolarDeformation { lambda, mu, rho, theta };
    let r = *l * def.material_rotation();
    TwoPolarState { r, def }
}

pub fn green_tensor(def: &PolarDeformation) -> GreenTensor {
    let PolarDeformation { alpha, xi, zeta, rho } = *def;
    GreenTensor {
        g11: xi * xi + alpha * alpha,
        g12: (xi + zeta) * alpha,
        g22: zeta * zeta + alpha * alpha,
        g33: rho * rho,
    }
}

/// Closed-form eigenvalues of `G`.
pub fn deformation_invariants(def: &PolarDeformation) -> DeformationInvariants {
    let PolarDeformation { alpha, xi, zeta, rho } = *def;
    let sum = xi * xi + zeta * zeta + 2.0 * alpha * alpha;
    let split = (xi + zeta) * ((xi - zeta).powi(2) + 4.0 * alpha * alpha).sqrt();
    let k1 = 0.5 * (sum + split);
    // k1·k2 = (ξζ − α²)², which is cancellation-free
    let k2 = if k1 > 0.0 { def.plane_determinant().powi(2) / k1 } else { 0.5 * (sum - split) };
    DeformationInvariants { k1, k2, k3: rho * rho }
}

/// `ν` of the `L`-top from the `R`-top spin `ω` and the material angle.
pub fn nu_from_omega_theta(omega: SpinVector, theta: f64, theta_dot: f64) -> SpinVector {
    let (s, c) = theta.sin_cos();
    SpinVector {
        nu1: omega.nu1 * c - omega.nu2 * s,
        nu2: omega.nu1 * s + omega.nu2 * c,
        nu3: omega.nu3 + theta_dot,
    }
}

/// Polar decomposition of a Kirchhoff–Love configuration.
pub fn polar_decompose(phi: &Matrix3<f64>) -> Result<PolarState> {
    let det = phi.determinant();
    if det.is_nan() || det <= 0.0 {
        return Err(Error::DegenerateConfiguration(format!("det(phi) = {det}")));
    }
    let svd = phi.svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::DegenerateConfiguration("SVD failed".into()));
    };
    let l = u * v_t;
    let s = v_t.transpose() * Matrix3::from_diagonal(&svd.singular_values) * v_t;
    let scale = s.amax().max(1.0);
    let off_plane = s[(0, 2)].abs().max(s[(1, 2)].abs());
    if off_plane > 1e-9 * scale {
        return Err(Error::DegenerateConfiguration(format!(
            "normal column is not orthogonal to the central plane (|S13|, |S23| up to {off_plane:e})"
        )));
    }
    let def = PolarDeformation {
        alpha: 0.5 * (s[(0, 1)] + s[(1, 0)]),
        xi: s[(0, 0)],
        zeta: s[(1, 1)],
        rho: s[(2, 2)],
    };
    def.check()?;
    Ok(PolarState { l: RotationMatrix::from_matrix(l)?, def })
}

/// In-plane 2×2 block of a symmetric 3×3 matrix.
pub fn plane_block(m: &Matrix3<f64>) -> Matrix2<f64> {
    m.fixed_view::<2, 2>(0, 0).into_owned()
}
