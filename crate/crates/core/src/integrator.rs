//! Explicit Runge–Kutta integration of the polar Hamiltonian flow.
//!
//! The state is packed as `[L (9, column-major) | α ξ ζ ϱ | π₁ π₂ π₃ p_α p_ξ p_ζ p_ϱ]`.
//! `L` drifts off SO(3) at the truncation-error level; it is projected back to
//! the nearest rotation every `renorm_interval` steps.

use log::debug;
use nalgebra::Matrix3;

use crate::dynamics::polar::eom_rhs_parts;
use crate::dynamics::{hamiltonian, InertiaTensor, PhasePoint, PolarMomenta};
use crate::error::{Error, Result};
use crate::kinematics::{deformation_invariants, DeformationInvariants, PolarDeformation, RotationMatrix};
use crate::potentials::PotentialModel;

const DIM: usize = 20;
type State = [f64; DIM];

/// Upper bound on attempted adaptive steps in one `simulate` call.
const MAX_ADAPTIVE_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Classical fixed-step fourth-order Runge–Kutta.
    Rk4,
    /// Dormand–Prince 5(4) with step-size control.
    Rk45Adaptive,
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rk4" => Ok(Scheme::Rk4),
            "rk45" | "rk45_adaptive" => Ok(Scheme::Rk45Adaptive),
            other => Err(format!("unknown scheme `{other}` (expected rk4 or rk45_adaptive)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Fixed step for `Rk4`; initial trial step for the adaptive scheme.
    pub dt: f64,
    /// Number of steps for `Rk4`. The adaptive scheme covers the same span, `n_steps·dt`.
    pub n_steps: usize,
    pub scheme: Scheme,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Reproject `L` every this many steps; 0 disables reprojection.
    pub renorm_interval: usize,
    /// Record every this many steps (the final state is always recorded).
    pub sample_stride: usize,
}

impl IntegratorConfig {
    pub fn rk4(dt: f64, n_steps: usize) -> Self {
        Self {
            dt,
            n_steps,
            scheme: Scheme::Rk4,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            renorm_interval: 100,
            sample_stride: 1,
        }
    }

    pub fn adaptive(dt: f64, n_steps: usize, rel_tol: f64, abs_tol: f64) -> Self {
        Self { scheme: Scheme::Rk45Adaptive, rel_tol, abs_tol, ..Self::rk4(dt, n_steps) }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, reason: String| Err(Error::InvalidParameter { name: name.into(), reason });
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", format!("must be positive, got {}", self.dt));
        }
        if self.n_steps == 0 {
            return bad("n_steps", "must be at least 1".into());
        }
        if self.sample_stride == 0 {
            return bad("sample_stride", "must be at least 1".into());
        }
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 {
            return bad("rel_tol", format!("must be positive, got {}", self.rel_tol));
        }
        if self.abs_tol.is_nan() || self.abs_tol <= 0.0 {
            return bad("abs_tol", format!("must be positive, got {}", self.abs_tol));
        }
        Ok(())
    }

    /// Time span covered by one `simulate` call.
    pub fn span(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}

/// Conserved-quantity monitors recorded with every sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSample {
    pub t: f64,
    pub hamiltonian: f64,
    /// `π₁² + π₂² + π₃²`
    pub spin_norm_squared: f64,
    pub invariants: DeformationInvariants,
    /// `‖LᵀL − I‖∞`
    pub orthogonality_defect: f64,
}

impl MonitorSample {
    pub fn of<P: PotentialModel>(p: &PhasePoint, j: &InertiaTensor, pot: &P) -> Result<Self> {
        Ok(Self {
            t: p.t,
            hamiltonian: hamiltonian(&p.def, &p.mom, j, pot)?,
            spin_norm_squared: p.mom.spin_norm_squared(),
            invariants: deformation_invariants(&p.def),
            orthogonality_defect: p.l.orthogonality_defect(),
        })
    }
}

/// Samples of an integration run. When the run stopped early, `failure`
/// holds the reason and the samples end at the last valid state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<PhasePoint>,
    pub monitors: Vec<MonitorSample>,
    pub failure: Option<Error>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<&PhasePoint> {
        self.points.last()
    }

    /// `max |H(t) − H(0)| / |H(0)|` (absolute drift when `H(0) = 0`).
    pub fn max_relative_energy_drift(&self) -> f64 {
        let Some(first) = self.monitors.first() else { return 0.0 };
        let h0 = first.hamiltonian;
        let scale = if h0 == 0.0 { 1.0 } else { h0.abs() };
        self.monitors.iter().map(|m| (m.hamiltonian - h0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn max_orthogonality_defect(&self) -> f64 {
        self.monitors.iter().map(|m| m.orthogonality_defect).fold(0.0, f64::max)
    }
}

fn pack(p: &PhasePoint) -> State {
    let mut y = [0.0; DIM];
    y[..9].copy_from_slice(p.l.matrix().as_slice());
    y[9..13].copy_from_slice(&p.def.to_array());
    y[13..].copy_from_slice(&p.mom.to_array());
    y
}

fn unpack(y: &State, t: f64) -> PhasePoint {
    PhasePoint {
        l: RotationMatrix::from_matrix_unchecked(Matrix3::from_column_slice(&y[..9])),
        def: PolarDeformation::from_array([y[9], y[10], y[11], y[12]]),
        mom: PolarMomenta::from_array(y[13..].try_into().expect("seven momenta")),
        t,
    }
}

fn rhs<P: PotentialModel>(y: &State, j: &InertiaTensor, pot: &P) -> Result<State> {
    let l = Matrix3::from_column_slice(&y[..9]);
    let def = PolarDeformation::from_array([y[9], y[10], y[11], y[12]]);
    let mom = PolarMomenta::from_array(y[13..].try_into().expect("seven momenta"));
    let d = eom_rhs_parts(&l, &def, &mom, j, pot)?;
    let mut out = [0.0; DIM];
    out[..9].copy_from_slice(d.l_dot.as_slice());
    let v = d.velocities;
    out[9..13].copy_from_slice(&[v.alpha_dot, v.xi_dot, v.zeta_dot, v.rho_dot]);
    out[13..].copy_from_slice(&d.mom_dot.to_array());
    Ok(out)
}

/// `y + Σ coeffs[i]·h·k[i]`.
fn combine(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += h * c * ki;
        }
    }
    out
}

fn stage_error(e: Error) -> Error {
    match e {
        Error::PositivityViolation(_) => e,
        other => Error::PositivityViolation(format!("stage left the valid domain: {other}")),
    }
}

fn rk4_step<P: PotentialModel>(y: &State, h: f64, j: &InertiaTensor, pot: &P) -> Result<State> {
    let f = |s: &State| rhs(s, j, pot).map_err(stage_error);
    let k1 = f(y)?;
    let k2 = f(&combine(y, h, &[(0.5, &k1)]))?;
    let k3 = f(&combine(y, h, &[(0.5, &k2)]))?;
    let k4 = f(&combine(y, h, &[(1.0, &k3)]))?;
    Ok(combine(y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]))
}

// Dormand–Prince 5(4) tableau
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step; returns the fifth-order solution and the
/// embedded error estimate.
fn dp45_step<P: PotentialModel>(y: &State, h: f64, j: &InertiaTensor, pot: &P) -> Result<(State, State)> {
    let mut k: Vec<State> = Vec::with_capacity(7);
    k.push(rhs(y, j, pot)?);
    for row in DP_A.iter() {
        let terms: Vec<(f64, &State)> = row.iter().zip(k.iter()).map(|(a, ki)| (*a, ki)).collect();
        let stage = combine(y, h, &terms);
        k.push(rhs(&stage, j, pot)?);
    }
    let terms: Vec<(f64, &State)> = DP_B5.iter().zip(k.iter()).map(|(b, ki)| (*b, ki)).collect();
    let y5 = combine(y, h, &terms);
    let mut err = [0.0; DIM];
    for (i, e) in err.iter_mut().enumerate() {
        *e = h * (0..7).map(|s| (DP_B5[s] - DP_B4[s]) * k[s][i]).sum::<f64>();
    }
    Ok((y5, err))
}

fn error_norm(y: &State, y_new: &State, err: &State, rel_tol: f64, abs_tol: f64) -> f64 {
    let sum: f64 = (0..DIM)
        .map(|i| {
            let scale = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
            (err[i] / scale).powi(2)
        })
        .sum();
    (sum / DIM as f64).sqrt()
}

/// Stateful stepper: keeps the step counter used for reprojection and the
/// current adaptive step size.
pub struct Stepper<'a, P: PotentialModel> {
    cfg: IntegratorConfig,
    j: &'a InertiaTensor,
    pot: &'a P,
    steps: usize,
    h: f64,
}

impl<'a, P: PotentialModel> Stepper<'a, P> {
    pub fn new(cfg: IntegratorConfig, j: &'a InertiaTensor, pot: &'a P) -> Self {
        Self { cfg, j, pot, steps: 0, h: cfg.dt }
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    /// Advances by one step (at most to `t_max` for the adaptive scheme).
    pub fn advance(&mut self, p: &PhasePoint, t_max: f64) -> Result<PhasePoint> {
        let y = pack(p);
        let (y_new, t_new) = match self.cfg.scheme {
            Scheme::Rk4 => (rk4_step(&y, self.cfg.dt, self.j, self.pot)?, p.t + self.cfg.dt),
            Scheme::Rk45Adaptive => self.adaptive_step(&y, p.t, t_max)?,
        };
        self.steps += 1;
        let mut next = unpack(&y_new, t_new);
        if self.cfg.renorm_interval > 0 && self.steps.is_multiple_of(self.cfg.renorm_interval) {
            next.l = next.l.reprojected();
        }
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::PositivityViolation(format!("non-finite state at t = {t_new}")));
        }
        next.def.check()?;
        Ok(next)
    }

    fn adaptive_step(&mut self, y: &State, t: f64, t_max: f64) -> Result<(State, f64)> {
        let min_h = 1e-14 * t.abs().max(1.0);
        loop {
            let h = self.h.min(t_max - t).max(min_h);
            let clipped = h < self.h;
            match dp45_step(y, h, self.j, self.pot) {
                Ok((y_new, err)) => {
                    let norm = error_norm(y, &y_new, &err, self.cfg.rel_tol, self.cfg.abs_tol);
                    let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                    if norm <= 1.0 {
                        if !clipped {
                            self.h = h * factor;
                        }
                        return Ok((y_new, t + h));
                    }
                    self.h = h * factor;
                }
                Err(e) => {
                    debug!("adaptive stage failed at t = {t}, h = {h}: {e}");
                    self.h = h * 0.25;
                }
            }
            if self.h < min_h {
                return Err(Error::PositivityViolation(format!(
                    "adaptive step underflow at t = {t} (h = {:e})",
                    self.h
                )));
            }
        }
    }
}

/// One step of the configured scheme from `p` (reprojection applies when
/// `renorm_interval == 1`).
pub fn step<P: PotentialModel>(p: &PhasePoint, cfg: &IntegratorConfig, j: &InertiaTensor, pot: &P) -> Result<PhasePoint> {
    cfg.validate()?;
    p.def.check()?;
    Stepper::new(*cfg, j, pot).advance(p, p.t + cfg.dt)
}

/// Integrates from `p0` over `cfg.span()`. Domain exits end the run and are
/// reported through [`Trajectory::failure`].
pub fn simulate<P: PotentialModel>(
    p0: &PhasePoint,
    cfg: &IntegratorConfig,
    j: &InertiaTensor,
    pot: &P,
) -> Result<Trajectory> {
    cfg.validate()?;
    p0.def.check()?;
    let mut traj = Trajectory { points: Vec::new(), monitors: Vec::new(), failure: None };
    traj.points.push(*p0);
    traj.monitors.push(MonitorSample::of(p0, j, pot)?);

    let mut stepper = Stepper::new(*cfg, j, pot);
    let t0 = p0.t;
    let t_end = t0 + cfg.span();
    let mut current = *p0;
    let mut k = 0usize;
    loop {
        let done = match cfg.scheme {
            Scheme::Rk4 => k >= cfg.n_steps,
            Scheme::Rk45Adaptive => current.t >= t_end || k >= MAX_ADAPTIVE_STEPS,
        };
        if done {
            break;
        }
        match stepper.advance(&current, t_end) {
            Ok(mut next) => {
                k += 1;
                if cfg.scheme == Scheme::Rk4 {
                    // avoid accumulating round-off in the clock
                    next.t = t0 + k as f64 * cfg.dt;
                }
                current = next;
                let last = match cfg.scheme {
                    Scheme::Rk4 => k == cfg.n_steps,
                    Scheme::Rk45Adaptive => current.t >= t_end,
                };
                if k.is_multiple_of(cfg.sample_stride) || last {
                    traj.monitors.push(MonitorSample::of(&current, j, pot)?);
                    traj.points.push(current);
                }
            }
            Err(e) => {
                debug!("integration stopped at t = {}: {e}", current.t);
                if traj.points.last().map(|p| p.t) != Some(current.t) {
                    traj.monitors.push(MonitorSample::of(&current, j, pot)?);
                    traj.points.push(current);
                }
                traj.failure = Some(e);
                break;
            }
        }
    }
    Ok(traj)
}
