//! Command-line front end: `simulate`, `stationary` and `convert`.
//!
//! Exit codes: 0 success, 1 `--verify` tolerance exceeded, 2 invalid
//! configuration or input, 3 integration left the valid domain, 4 the
//! stationary solver found no solution.

pub mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use nalgebra::Vector3;

use crate::dynamics::{InertiaTensor, PhasePoint};
use crate::error::Error;
use crate::integrator::{simulate, IntegratorConfig, Trajectory};
use crate::kinematics::{
    deformation_invariants, ell_polar, green_tensor, polar_from_two_polar, two_polar_from_polar, PolarDeformation,
    RotationMatrix, TwoPolarDeformation, TwoPolarState,
};
use crate::potentials::{PlaneModel, Potential};
use crate::stationary::{residual_branch12, solve_stationary_with, Branch, SolverOptions, SpinInput, StationarySolution};

pub use config::{ConfigError, InitialState, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;

/// Drift bound applied by `stationary --verify`.
pub const VERIFY_TOLERANCE: f64 = 1e-6;

/// Trajectory CSV header.
pub const CSV_HEADER: &str =
    "t,alpha,xi,zeta,rho,pi1,pi2,pi3,p_alpha,p_xi,p_zeta,p_rho,H,K1,K2,K3,orthogonality_defect";

#[derive(Debug, Parser)]
#[command(name = "klbody", version, about = "Affinely-rigid body dynamics under Kirchhoff-Love constraints")]
struct Cli {
    /// Write results to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Record every n-th integration step.
    #[arg(long, global = true, value_name = "N")]
    stride: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the equations of motion and write a trajectory CSV.
    Simulate { config: PathBuf },
    /// Solve for a stationary ellipsoid on the given branch.
    #[command(allow_negative_numbers = true)]
    Stationary {
        config: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        branch: u8,
        /// Spin momentum about the branch axis.
        #[arg(long)]
        spin: f64,
        /// Integrate the solution and report the drift of G and of the spin.
        #[arg(long)]
        verify: bool,
    },
    /// Convert between polar and two-polar variables.
    #[command(allow_negative_numbers = true)]
    Convert {
        /// Target chart.
        #[arg(long, value_enum)]
        to: Chart,
        /// `λ μ θ ϱ [r1 r2 r3]` for `--to polar`, `α ξ ζ ϱ [k1 k2 k3]` for
        /// `--to two-polar`; the optional triple is a rotation vector.
        #[arg(required = true, num_args = 4..=7)]
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Chart {
    Polar,
    TwoPolar,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self { code: EXIT_INVALID, message: message.into() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::invalid(e.to_string())
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::invalid(format!("cannot write {}: {e}", path.display()))
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("KLBODY_LOG", "warn")).try_init();
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs one command, writing results to `out` (unless `--output` is given)
/// and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    match &cli.command {
        Command::Simulate { config } => {
            let cfg = load_config(config, cli)?;
            let path = cli.output.clone().or_else(|| cfg.output_path.as_ref().map(PathBuf::from));
            with_output(path.as_deref(), out, |w| cmd_simulate(&cfg, w))
        }
        Command::Stationary { config, branch, spin, verify } => {
            let cfg = load_config(config, cli)?;
            let branch = Branch::from_index(*branch).expect("range checked by the parser");
            with_output(cli.output.as_deref(), out, |w| cmd_stationary(&cfg, branch, *spin, *verify, w))
        }
        Command::Convert { to, values } => with_output(cli.output.as_deref(), out, |w| cmd_convert(*to, values, w)),
    }
}

fn load_config(path: &Path, cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::from_file(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    if let Some(stride) = cli.stride {
        if stride == 0 {
            return Err(Failure::invalid("--stride must be at least 1"));
        }
        cfg.integrator.sample_stride = stride;
    }
    Ok(cfg)
}

fn with_output(
    path: Option<&Path>,
    out: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<i32, Failure>,
) -> Result<i32, Failure> {
    match path {
        None => {
            let code = body(out)?;
            out.flush().map_err(|e| Failure::invalid(format!("cannot write output: {e}")))?;
            Ok(code)
        }
        Some(p) => {
            let file = File::create(p).map_err(|e| io_failure(p, e))?;
            let mut w = BufWriter::new(file);
            let code = body(&mut w)?;
            w.flush().map_err(|e| io_failure(p, e))?;
            Ok(code)
        }
    }
}

fn write_err(e: io::Error) -> Failure {
    Failure::invalid(format!("cannot write output: {e}"))
}

/// 17 significant digits in scientific notation.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn initial_phase_point(cfg: &RunConfig) -> Result<PhasePoint, Failure> {
    let Some(initial) = cfg.initial else {
        return Err(Failure::invalid("configuration has no initial state (`state.*` or `two_polar.*`)"));
    };
    let (l, def) = match initial {
        InitialState::Polar { def, rotation } => (RotationMatrix::from_rotation_vector(rotation), def),
        InitialState::TwoPolar { def, rotation } => {
            polar_from_two_polar(&TwoPolarState { r: RotationMatrix::from_rotation_vector(rotation), def })
        }
    };
    PhasePoint::new(l, def, cfg.momenta, 0.0).map_err(|e| Failure::invalid(e.to_string()))
}

fn write_metadata(w: &mut dyn Write, cfg: &RunConfig) -> io::Result<()> {
    let j = cfg.inertia;
    let pot = cfg.potential;
    let c = match pot.plane {
        PlaneModel::Harmonic { c } | PlaneModel::Invariant { c } => c,
    };
    let ic = cfg.integrator;
    writeln!(w, "# klbody {} simulate", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# inertia j1={} j2={} j3={}", j.j1, j.j2, j.j3)?;
    writeln!(w, "# potential model={} c={c} a={} b={}", pot.plane.name(), pot.a, pot.b)?;
    writeln!(
        w,
        "# integrator scheme={:?} dt={} steps={} renorm_interval={} stride={}",
        ic.scheme, ic.dt, ic.n_steps, ic.renorm_interval, ic.sample_stride
    )
}

fn write_trajectory(w: &mut dyn Write, traj: &Trajectory) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for (p, m) in traj.points.iter().zip(&traj.monitors) {
        let d = p.def;
        let q = p.mom;
        let k = m.invariants;
        let row = [
            p.t,
            d.alpha,
            d.xi,
            d.zeta,
            d.rho,
            q.pi1,
            q.pi2,
            q.pi3,
            q.p_alpha,
            q.p_xi,
            q.p_zeta,
            q.p_rho,
            m.hamiltonian,
            k.k1,
            k.k2,
            k.k3,
            m.orthogonality_defect,
        ];
        let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

fn cmd_simulate(cfg: &RunConfig, w: &mut dyn Write) -> Result<i32, Failure> {
    let p0 = initial_phase_point(cfg)?;
    let traj = simulate(&p0, &cfg.integrator, &cfg.inertia, &cfg.potential).map_err(|e| Failure::invalid(e.to_string()))?;
    info!("simulated {} samples", traj.len());
    write_metadata(w, cfg).map_err(write_err)?;
    write_trajectory(w, &traj).map_err(write_err)?;
    match &traj.failure {
        None => Ok(EXIT_OK),
        Some(e) => {
            let t = traj.last().map_or(0.0, |p| p.t);
            writeln!(w, "# error: integration stopped at t = {}: {e}", num(t)).map_err(write_err)?;
            Err(Failure { code: EXIT_DOMAIN, message: format!("integration stopped at t = {t}: {e}") })
        }
    }
}

/// Largest deviation of the Green tensor entries and of the spin momenta
/// from their initial values along an integrated stationary solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryDrift {
    pub green: f64,
    pub spin: f64,
}

/// Integrates `sol` from `L₀ = I` over `[0, span]` with the step of `integrator`.
pub fn stationary_drift(
    sol: &StationarySolution,
    inertia: &InertiaTensor,
    potential: &Potential,
    integrator: &IntegratorConfig,
    span: f64,
) -> crate::error::Result<StationaryDrift> {
    let n_steps = (span / integrator.dt).ceil().max(1.0) as usize;
    let cfg = IntegratorConfig { dt: span / n_steps as f64, n_steps, sample_stride: 1, ..*integrator };
    let traj = simulate(&sol.phase_point(RotationMatrix::identity()), &cfg, inertia, potential)?;
    if let Some(e) = traj.failure {
        return Err(e);
    }
    let g0 = green_tensor(&sol.def).to_array();
    let s0 = sol.momenta;
    let mut drift = StationaryDrift { green: 0.0, spin: 0.0 };
    for p in &traj.points {
        let g = green_tensor(&p.def).to_array();
        for (a, b) in g.iter().zip(&g0) {
            drift.green = drift.green.max((a - b).abs());
        }
        for (a, b) in [(p.mom.pi1, s0.pi1), (p.mom.pi2, s0.pi2), (p.mom.pi3, s0.pi3)] {
            drift.spin = drift.spin.max((a - b).abs());
        }
    }
    Ok(drift)
}

fn solver_failure(e: Error) -> Failure {
    match e {
        Error::NoConvergence { iterations, residual_norm, .. } => Failure {
            code: EXIT_NO_CONVERGENCE,
            message: format!("no stationary solution after {iterations} iterations; best residual {}", num(residual_norm)),
        },
        Error::PositivityViolation(msg) => {
            Failure { code: EXIT_NO_CONVERGENCE, message: format!("no stationary solution: {msg}") }
        }
        other => Failure::invalid(other.to_string()),
    }
}

fn cmd_stationary(cfg: &RunConfig, branch: Branch, spin: f64, verify: bool, w: &mut dyn Write) -> Result<i32, Failure> {
    let guess = cfg
        .stationary_guess
        .unwrap_or(PolarDeformation { rho: cfg.potential.rho_equilibrium(), ..PolarDeformation::identity() });
    let sol = solve_stationary_with(
        branch,
        SpinInput::Coupled(spin),
        &cfg.inertia,
        &cfg.potential,
        &guess,
        &SolverOptions::default(),
    )
    .map_err(solver_failure)?;
    let nu = sol.angular_velocity(&cfg.inertia).map_err(|e| Failure::invalid(e.to_string()))?;

    let report = |w: &mut dyn Write| -> io::Result<()> {
        writeln!(w, "branch = {}", branch.index())?;
        writeln!(w, "iterations = {}", sol.iterations)?;
        writeln!(w, "residual_norm = {}", num(sol.residual_norm))?;
        let d = sol.def;
        for (k, v) in [("alpha", d.alpha), ("xi", d.xi), ("zeta", d.zeta), ("rho", d.rho)] {
            writeln!(w, "{k} = {}", num(v))?;
        }
        let m = sol.momenta;
        for (k, v) in [
            ("pi1", m.pi1),
            ("pi2", m.pi2),
            ("pi3", m.pi3),
            ("p_alpha", m.p_alpha),
            ("p_xi", m.p_xi),
            ("p_zeta", m.p_zeta),
            ("p_rho", m.p_rho),
        ] {
            writeln!(w, "{k} = {}", num(v))?;
        }
        for (k, v) in [("nu1", nu.nu1), ("nu2", nu.nu2), ("nu3", nu.nu3)] {
            writeln!(w, "{k} = {}", num(v))?;
        }
        Ok(())
    };
    report(w).map_err(write_err)?;
    if branch != Branch::Axis3 {
        let r = residual_branch12(&sol.def, sol.momenta.pi1, sol.momenta.pi2, &cfg.inertia, &cfg.potential)
            .map_err(|e| Failure::invalid(e.to_string()))?;
        writeln!(w, "compatibility = {}", num(r[4])).map_err(write_err)?;
    }
    if !verify {
        return Ok(EXIT_OK);
    }

    let drift = stationary_drift(&sol, &cfg.inertia, &cfg.potential, &cfg.integrator, cfg.verify_time).map_err(|e| {
        Failure { code: EXIT_DOMAIN, message: format!("verification integration failed: {e}") }
    })?;
    let passed = drift.green < VERIFY_TOLERANCE && drift.spin < VERIFY_TOLERANCE;
    writeln!(w, "verify_time = {}", num(cfg.verify_time)).map_err(write_err)?;
    writeln!(w, "max_green_drift = {}", num(drift.green)).map_err(write_err)?;
    writeln!(w, "max_spin_drift = {}", num(drift.spin)).map_err(write_err)?;
    writeln!(w, "verified = {passed}").map_err(write_err)?;
    if passed {
        Ok(EXIT_OK)
    } else {
        Err(Failure {
            code: EXIT_VERIFY_FAILED,
            message: format!("drift exceeds {VERIFY_TOLERANCE:e} (G: {:e}, spin: {:e})", drift.green, drift.spin),
        })
    }
}

fn rotation_arg(values: &[f64]) -> Result<Vector3<f64>, Failure> {
    match values.len() {
        4 => Ok(Vector3::zeros()),
        7 => Ok(Vector3::new(values[4], values[5], values[6])),
        n => Err(Failure::invalid(format!("expected 4 or 7 values, got {n}"))),
    }
}

fn cmd_convert(to: Chart, values: &[f64], w: &mut dyn Write) -> Result<i32, Failure> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Failure::invalid(format!("non-finite value {v}")));
    }
    let rotation = rotation_arg(values)?;
    let mut lines: Vec<(&str, f64)> = Vec::new();
    let def = match to {
        Chart::Polar => {
            let def = TwoPolarDeformation::new(values[0], values[1], values[3], values[2])
                .map_err(|e| Failure::invalid(e.to_string()))?;
            let (l, polar) = polar_from_two_polar(&TwoPolarState { r: RotationMatrix::from_rotation_vector(rotation), def });
            let k = l.rotation_vector();
            lines.extend([("alpha", polar.alpha), ("xi", polar.xi), ("zeta", polar.zeta), ("rho", polar.rho)]);
            lines.extend([("k1", k.x), ("k2", k.y), ("k3", k.z)]);
            polar
        }
        Chart::TwoPolar => {
            let polar = PolarDeformation::new(values[0], values[1], values[2], values[3])
                .map_err(|e| Failure::invalid(e.to_string()))?;
            let tp = two_polar_from_polar(&RotationMatrix::from_rotation_vector(rotation), &polar);
            let r = tp.r.rotation_vector();
            let d = tp.def;
            lines.extend([("lambda", d.lambda), ("mu", d.mu), ("theta", d.theta), ("rho", d.rho)]);
            lines.extend([("r1", r.x), ("r2", r.y), ("r3", r.z)]);
            polar
        }
    };
    let ell = ell_polar(&def).map_err(|e| Failure::invalid(e.to_string()))?;
    let inv = deformation_invariants(&def);
    lines.extend([("ell", ell), ("K1", inv.k1), ("K2", inv.k2), ("K3", inv.k3)]);
    for (k, v) in lines {
        writeln!(w, "{k} = {}", num(v)).map_err(write_err)?;
    }
    Ok(EXIT_OK)
}
