//! Flat `section.key = value` run configuration.
//!
//! Blank lines and text after `#` are ignored. Every key may appear once;
//! unknown keys are rejected. Errors carry the line of the offending key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use nalgebra::Vector3;

use crate::dynamics::{InertiaTensor, PolarMomenta};
use crate::integrator::{IntegratorConfig, Scheme};
use crate::kinematics::{PolarDeformation, TwoPolarDeformation};
use crate::potentials::Potential;

const KNOWN_KEYS: &[&str] = &[
    "inertia.j1",
    "inertia.j2",
    "inertia.j3",
    "potential.model",
    "potential.a",
    "potential.b",
    "potential.c",
    "state.alpha",
    "state.xi",
    "state.zeta",
    "state.rho",
    "two_polar.lambda",
    "two_polar.mu",
    "two_polar.rho",
    "two_polar.theta",
    "rotation.k1",
    "rotation.k2",
    "rotation.k3",
    "momenta.pi1",
    "momenta.pi2",
    "momenta.pi3",
    "momenta.p_alpha",
    "momenta.p_xi",
    "momenta.p_zeta",
    "momenta.p_rho",
    "integrator.scheme",
    "integrator.dt",
    "integrator.steps",
    "integrator.rel_tol",
    "integrator.abs_tol",
    "integrator.renorm_interval",
    "output.path",
    "output.stride",
    "stationary.alpha",
    "stationary.xi",
    "stationary.zeta",
    "stationary.rho",
    "stationary.verify_time",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "`{key}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

type ConfigResult<T> = std::result::Result<T, ConfigError>;

/// Initial configuration in one of the two supported charts. The rotation
/// vector gives `L` for the polar form and `R` for the two-polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Polar { def: PolarDeformation, rotation: Vector3<f64> },
    TwoPolar { def: TwoPolarDeformation, rotation: Vector3<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inertia: InertiaTensor,
    pub potential: Potential,
    pub initial: Option<InitialState>,
    pub momenta: PolarMomenta,
    pub integrator: IntegratorConfig,
    pub output_path: Option<String>,
    /// Initial guess for the stationary solver; `None` selects the zero-spin equilibrium.
    pub stationary_guess: Option<PolarDeformation>,
    /// Length of the `--verify` integration.
    pub verify_time: f64,
}

struct Entry {
    line: usize,
    value: String,
}

struct Table {
    entries: BTreeMap<String, Entry>,
}

impl Table {
    fn parse(text: &str) -> ConfigResult<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError {
                    line: Some(line),
                    key: None,
                    message: format!("expected `key = value`, got `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let err = |message: String| ConfigError { line: Some(line), key: Some(key.to_string()), message };
            if !KNOWN_KEYS.contains(&key) {
                return Err(err("unknown key".into()));
            }
            if value.is_empty() {
                return Err(err("missing value".into()));
            }
            if let Some(prev) = entries.get(key) {
                let prev: &Entry = prev;
                return Err(err(format!("duplicate key (first set on line {})", prev.line)));
            }
            entries.insert(key.to_string(), Entry { line, value: value.to_string() });
        }
        Ok(Self { entries })
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn has_section(&self, section: &str) -> bool {
        self.entries.keys().any(|k| k.split('.').next() == Some(section))
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError { line: self.entries.get(key).map(|e| e.line), key: Some(key.to_string()), message: message.into() }
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn number(&self, key: &str) -> ConfigResult<Option<f64>> {
        let Some(raw) = self.str(key) else { return Ok(None) };
        let v: f64 = raw.parse().map_err(|_| self.error(key, format!("`{raw}` is not a number")))?;
        if !v.is_finite() {
            return Err(self.error(key, format!("`{raw}` is not finite")));
        }
        Ok(Some(v))
    }

    fn number_or(&self, key: &str, default: f64) -> ConfigResult<f64> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn required(&self, key: &str) -> ConfigResult<f64> {
        self.number(key)?.ok_or_else(|| self.error(key, "required key is missing"))
    }

    fn positive(&self, key: &str, default: Option<f64>) -> ConfigResult<f64> {
        let v = match default {
            Some(d) => self.number_or(key, d)?,
            None => self.required(key)?,
        };
        if v <= 0.0 {
            return Err(self.error(key, format!("must be positive, got {v}")));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: usize) -> ConfigResult<usize> {
        match self.str(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| self.error(key, format!("`{raw}` is not a non-negative integer"))),
        }
    }

    fn rotation(&self) -> ConfigResult<Vector3<f64>> {
        Ok(Vector3::new(
            self.number_or("rotation.k1", 0.0)?,
            self.number_or("rotation.k2", 0.0)?,
            self.number_or("rotation.k3", 0.0)?,
        ))
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            key: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> ConfigResult<Self> {
        let t = Table::parse(text)?;

        let j1 = t.positive("inertia.j1", None)?;
        let j2 = t.positive("inertia.j2", None)?;
        let j3 = t.positive("inertia.j3", None)?;
        let inertia = InertiaTensor::new(j1, j2, j3).map_err(|e| t.error("inertia.j1", e.to_string()))?;

        let mut params = BTreeMap::new();
        for name in ["a", "b", "c"] {
            let key = format!("potential.{name}");
            params.insert(name.to_string(), t.positive(&key, Some(1.0))?);
        }
        let model = t.str("potential.model").unwrap_or("harmonic");
        let potential = Potential::from_params(model, &params).map_err(|e| t.error("potential.model", e.to_string()))?;

        let initial = match (t.has_section("state"), t.has_section("two_polar")) {
            (true, true) => {
                let key = if t.has("two_polar.lambda") { "two_polar.lambda" } else { "two_polar.mu" };
                return Err(t.error(key, "give either `state.*` or `two_polar.*`, not both"));
            }
            (true, false) => {
                let def = PolarDeformation {
                    alpha: t.required("state.alpha")?,
                    xi: t.required("state.xi")?,
                    zeta: t.required("state.zeta")?,
                    rho: t.required("state.rho")?,
                };
                def.check().map_err(|e| t.error("state.xi", e.to_string()))?;
                Some(InitialState::Polar { def, rotation: t.rotation()? })
            }
            (false, true) => {
                let lambda = t.positive("two_polar.lambda", None)?;
                let mu = t.positive("two_polar.mu", None)?;
                let rho = t.positive("two_polar.rho", None)?;
                let theta = t.required("two_polar.theta")?;
                let def = TwoPolarDeformation::new(lambda, mu, rho, theta)
                    .map_err(|e| t.error("two_polar.lambda", e.to_string()))?;
                Some(InitialState::TwoPolar { def, rotation: t.rotation()? })
            }
            (false, false) => None,
        };
        if initial.is_none() && (t.has_section("rotation") || t.has_section("momenta")) {
            let key = ["rotation.k1", "rotation.k2", "rotation.k3"]
                .into_iter()
                .chain(KNOWN_KEYS.iter().copied().filter(|k| k.starts_with("momenta.")))
                .find(|k| t.has(k))
                .unwrap_or("momenta.pi1");
            return Err(t.error(key, "set without an initial state (`state.*` or `two_polar.*`)"));
        }

        let momenta = PolarMomenta {
            pi1: t.number_or("momenta.pi1", 0.0)?,
            pi2: t.number_or("momenta.pi2", 0.0)?,
            pi3: t.number_or("momenta.pi3", 0.0)?,
            p_alpha: t.number_or("momenta.p_alpha", 0.0)?,
            p_xi: t.number_or("momenta.p_xi", 0.0)?,
            p_zeta: t.number_or("momenta.p_zeta", 0.0)?,
            p_rho: t.number_or("momenta.p_rho", 0.0)?,
        };

        let scheme = match t.str("integrator.scheme") {
            None => Scheme::Rk4,
            Some(s) => s.parse().map_err(|e: String| t.error("integrator.scheme", e))?,
        };
        let dt = t.positive("integrator.dt", Some(1e-3))?;
        let steps = t.count("integrator.steps", 1000)?;
        if steps == 0 {
            return Err(t.error("integrator.steps", "must be at least 1"));
        }
        let defaults = IntegratorConfig::rk4(dt, steps);
        let integrator = IntegratorConfig {
            scheme,
            rel_tol: t.positive("integrator.rel_tol", Some(defaults.rel_tol))?,
            abs_tol: t.positive("integrator.abs_tol", Some(defaults.abs_tol))?,
            renorm_interval: t.count("integrator.renorm_interval", defaults.renorm_interval)?,
            sample_stride: t.count("output.stride", 1)?,
            ..defaults
        };
        if integrator.sample_stride == 0 {
            return Err(t.error("output.stride", "must be at least 1"));
        }

        let stationary_guess = if t.has_section("stationary")
            && ["alpha", "xi", "zeta", "rho"].iter().any(|k| t.has(&format!("stationary.{k}")))
        {
            let def = PolarDeformation {
                alpha: t.number_or("stationary.alpha", 0.0)?,
                xi: t.number_or("stationary.xi", 1.0)?,
                zeta: t.number_or("stationary.zeta", 1.0)?,
                rho: t.number_or("stationary.rho", potential.rho_equilibrium())?,
            };
            def.check().map_err(|e| t.error("stationary.xi", e.to_string()))?;
            Some(def)
        } else {
            None
        };

        Ok(Self {
            inertia,
            potential,
            initial,
            momenta,
            integrator,
            output_path: t.str("output.path").map(str::to_string),
            stationary_guess,
            verify_time: t.positive("stationary.verify_time", Some(10.0))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "inertia.j1 = 1\ninertia.j2 = 2\ninertia.j3 = 3\n";

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.inertia, InertiaTensor::new(1.0, 2.0, 3.0).unwrap());
        assert_eq!(c.potential, Potential::harmonic(1.0, 1.0, 1.0).unwrap());
        assert!(c.initial.is_none());
        assert_eq!(c.integrator, IntegratorConfig::rk4(1e-3, 1000));
        assert_eq!(c.verify_time, 10.0);
    }

    #[test]
    fn comments_and_whitespace() {
        let text = format!("# header\n\n{MINIMAL}  state.alpha = 0.1  # shear\nstate.xi=1\nstate.zeta = 1\nstate.rho = 1\n");
        let c = RunConfig::parse(&text).unwrap();
        match c.initial {
            Some(InitialState::Polar { def, rotation }) => {
                assert_eq!(def.alpha, 0.1);
                assert_eq!(rotation, Vector3::zeros());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_inertia_names_key_and_line() {
        let err = RunConfig::parse("inertia.j1 = 1\ninertia.j2 = -2\ninertia.j3 = 3\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert_eq!(err.key.as_deref(), Some("inertia.j2"));
        assert!(err.to_string().contains("inertia.j2"));
    }

    #[test]
    fn rejects_malformed_input() {
        let cases = [
            ("inertia.j1 1\n", Some(1)),
            ("inertia.j4 = 1\n", Some(1)),
            (&format!("{MINIMAL}inertia.j1 = 2\n"), Some(4)),
            (&format!("{MINIMAL}integrator.dt = fast\n"), Some(4)),
            (&format!("{MINIMAL}integrator.scheme = euler\n"), Some(4)),
            (&format!("{MINIMAL}potential.model = quartic\n"), Some(4)),
            ("inertia.j1 = 1\ninertia.j2 = 1\n", None),
        ];
        for (text, line) in cases {
            let err = RunConfig::parse(text).unwrap_err();
            assert_eq!(err.line, line, "{text}: {err}");
        }
    }

    #[test]
    fn exactly_one_initial_form() {
        let both = format!(
            "{MINIMAL}state.alpha = 0\nstate.xi = 1\nstate.zeta = 1\nstate.rho = 1\ntwo_polar.lambda = 1\n"
        );
        assert!(RunConfig::parse(&both).unwrap_err().to_string().contains("not both"));
        let orphan = format!("{MINIMAL}momenta.pi3 = 1\n");
        assert_eq!(RunConfig::parse(&orphan).unwrap_err().key.as_deref(), Some("momenta.pi3"));
        let bad_det = format!("{MINIMAL}state.alpha = 2\nstate.xi = 1\nstate.zeta = 1\nstate.rho = 1\n");
        assert_eq!(RunConfig::parse(&bad_det).unwrap_err().line, Some(5));
    }

    #[test]
    fn two_polar_form() {
        let text = format!(
            "{MINIMAL}two_polar.lambda = 2\ntwo_polar.mu = 1\ntwo_polar.rho = 1\ntwo_polar.theta = 0.5\nrotation.k3 = 0.2\n"
        );
        match RunConfig::parse(&text).unwrap().initial {
            Some(InitialState::TwoPolar { def, rotation }) => {
                assert_eq!((def.lambda, def.mu, def.theta), (2.0, 1.0, 0.5));
                assert_eq!(rotation.z, 0.2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
