//! Separated potentials `V = V_plane(α, ξ, ζ) + V_ϱ(ϱ)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kinematics::{deformation_invariants, PolarDeformation};

/// A potential that depends on the configuration only through `S`.
///
/// Gradients default to central differences with step `1e-7·max(1, |q|)`;
/// the built-in models override them with analytic expressions.
pub trait PotentialModel {
    fn v_plane(&self, alpha: f64, xi: f64, zeta: f64) -> f64;

    fn v_plane_gradient(&self, alpha: f64, xi: f64, zeta: f64) -> [f64; 3] {
        let q = [alpha, xi, zeta];
        let mut grad = [0.0; 3];
        for (i, g) in grad.iter_mut().enumerate() {
            let h = 1e-7 * q[i].abs().max(1.0);
            let (mut up, mut down) = (q, q);
            up[i] += h;
            down[i] -= h;
            *g = (self.v_plane(up[0], up[1], up[2]) - self.v_plane(down[0], down[1], down[2])) / (2.0 * h);
        }
        grad
    }

    fn v_rho(&self, rho: f64) -> Result<f64>;

    fn dv_rho(&self, rho: f64) -> Result<f64> {
        let h = 1e-7 * rho.abs().max(1.0);
        Ok((self.v_rho(rho + h)? - self.v_rho(rho - h)?) / (2.0 * h))
    }

    fn value(&self, def: &PolarDeformation) -> Result<f64> {
        Ok(self.v_plane(def.alpha, def.xi, def.zeta) + self.v_rho(def.rho)?)
    }

    /// `(∂V/∂α, ∂V/∂ξ, ∂V/∂ζ, ∂V/∂ϱ)`.
    fn gradient(&self, def: &PolarDeformation) -> Result<[f64; 4]> {
        let [ga, gx, gz] = self.v_plane_gradient(def.alpha, def.xi, def.zeta);
        Ok([ga, gx, gz, self.dv_rho(def.rho)?])
    }
}

impl<P: PotentialModel + ?Sized> PotentialModel for &P {
    fn v_plane(&self, alpha: f64, xi: f64, zeta: f64) -> f64 {
        (**self).v_plane(alpha, xi, zeta)
    }
    fn v_plane_gradient(&self, alpha: f64, xi: f64, zeta: f64) -> [f64; 3] {
        (**self).v_plane_gradient(alpha, xi, zeta)
    }
    fn v_rho(&self, rho: f64) -> Result<f64> {
        (**self).v_rho(rho)
    }
    fn dv_rho(&self, rho: f64) -> Result<f64> {
        (**self).dv_rho(rho)
    }
}

/// `V_ϱ = a/ϱ + (b/2)ϱ²` and its derivative.
pub fn v_rho_paper(rho: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::DomainError(format!("V_rho needs rho > 0, got {rho}")));
    }
    Ok((a / rho + 0.5 * b * rho * rho, -a / (rho * rho) + b * rho))
}

/// `(c/2)[(ξ−1)² + (ζ−1)² + 2α²]`: quadratic in the entries of `S − I`.
pub fn v_plane_harmonic(alpha: f64, xi: f64, zeta: f64, c: f64) -> (f64, [f64; 3]) {
    let value = 0.5 * c * ((xi - 1.0).powi(2) + (zeta - 1.0).powi(2) + 2.0 * alpha * alpha);
    (value, [2.0 * c * alpha, c * (xi - 1.0), c * (zeta - 1.0)])
}

/// `(c/2)[(K₁−1)² + (K₂−1)²]` in the in-plane Green invariants.
///
/// Written through the symmetric functions `K₁+K₂ = ξ²+ζ²+2α²` and
/// `K₁K₂ = (ξζ−α²)²` the model is a polynomial, which gives the gradient.
pub fn v_plane_invariant(alpha: f64, xi: f64, zeta: f64, c: f64) -> (f64, [f64; 3]) {
    let k = deformation_invariants(&PolarDeformation { alpha, xi, zeta, rho: 1.0 });
    let value = 0.5 * c * ((k.k1 - 1.0).powi(2) + (k.k2 - 1.0).powi(2));
    let trace = xi * xi + zeta * zeta + 2.0 * alpha * alpha;
    let det = xi * zeta - alpha * alpha;
    // V = (c/2)(trace² − 2·trace − 2·det² + 2)
    let d_trace = [4.0 * alpha, 2.0 * xi, 2.0 * zeta];
    let d_det = [-2.0 * alpha, zeta, xi];
    let grad = [0, 1, 2].map(|i| c * ((trace - 1.0) * d_trace[i] - 2.0 * det * d_det[i]));
    (value, grad)
}

/// Built-in in-plane models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlaneModel {
    Harmonic { c: f64 },
    Invariant { c: f64 },
}

impl PlaneModel {
    pub fn name(&self) -> &'static str {
        match self {
            PlaneModel::Harmonic { .. } => "harmonic",
            PlaneModel::Invariant { .. } => "invariant",
        }
    }
}

/// In-plane model plus the confining out-of-plane term `a/ϱ + (b/2)ϱ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    pub plane: PlaneModel,
    pub a: f64,
    pub b: f64,
}

impl Potential {
    pub fn new(plane: PlaneModel, a: f64, b: f64) -> Result<Self> {
        let c = match plane {
            PlaneModel::Harmonic { c } | PlaneModel::Invariant { c } => c,
        };
        for (name, v) in [("c", c), ("a", a), ("b", b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: name.into(),
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        Ok(Self { plane, a, b })
    }

    pub fn harmonic(c: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(PlaneModel::Harmonic { c }, a, b)
    }

    pub fn invariant(c: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(PlaneModel::Invariant { c }, a, b)
    }

    /// Builds a model from a name and a map of named parameters
    /// (`c`, `a`, `b`; missing ones default to 1).
    pub fn from_params(model: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        for key in params.keys() {
            if !matches!(key.as_str(), "a" | "b" | "c") {
                return Err(Error::InvalidParameter {
                    name: key.clone(),
                    reason: "unknown potential parameter".into(),
                });
            }
        }
        let get = |k: &str| params.get(k).copied().unwrap_or(1.0);
        let plane = match model {
            "harmonic" => PlaneModel::Harmonic { c: get("c") },
            "invariant" => PlaneModel::Invariant { c: get("c") },
            other => {
                return Err(Error::InvalidParameter {
                    name: "model".into(),
                    reason: format!("unknown in-plane model `{other}` (expected harmonic or invariant)"),
                })
            }
        };
        Self::new(plane, get("a"), get("b"))
    }

    /// Minimiser of `V_ϱ`, `(a/b)^{1/3}`.
    pub fn rho_equilibrium(&self) -> f64 {
        (self.a / self.b).cbrt()
    }
}

impl Default for Potential {
    fn default() -> Self {
        Self { plane: PlaneModel::Harmonic { c: 1.0 }, a: 1.0, b: 1.0 }
    }
}

impl PotentialModel for Potential {
    fn v_plane(&self, alpha: f64, xi: f64, zeta: f64) -> f64 {
        match self.plane {
            PlaneModel::Harmonic { c } => v_plane_harmonic(alpha, xi, zeta, c).0,
            PlaneModel::Invariant { c } => v_plane_invariant(alpha, xi, zeta, c).0,
        }
    }

    fn v_plane_gradient(&self, alpha: f64, xi: f64, zeta: f64) -> [f64; 3] {
        match self.plane {
            PlaneModel::Harmonic { c } => v_plane_harmonic(alpha, xi, zeta, c).1,
            PlaneModel::Invariant { c } => v_plane_invariant(alpha, xi, zeta, c).1,
        }
    }

    fn v_rho(&self, rho: f64) -> Result<f64> {
        Ok(v_rho_paper(rho, self.a, self.b)?.0)
    }

    fn dv_rho(&self, rho: f64) -> Result<f64> {
        Ok(v_rho_paper(rho, self.a, self.b)?.1)
    }
}
