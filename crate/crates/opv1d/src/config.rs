//! Flat TOML run configuration.
//!
//! Every key is optional and overrides one defaulted quantity: a scaled
//! device parameter, the mesh resolution, or a solver knob.  Unknown keys
//! are rejected outright — a typoed parameter name silently running the
//! default device is the worst failure mode a study config can have.
//!
//! ```toml
//! # strip chemistry
//! kr_in = 3.86
//! kd_in0 = 386.0
//!
//! # discretization and iteration
//! n_cells = 2000
//! grading_ratio = 1.15
//! u_profile = "quadratic"
//! ```

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::materials::UProfileKind;
use crate::scaling::{default_params, ScaledParams};
use crate::solver::SolverOptions;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Optional overrides for one run.  Field names match [`ScaledParams`] and
/// [`SolverOptions`] one-to-one.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    // Scaled device parameters.
    pub lambda2: Option<f64>,
    pub eps_r: Option<f64>,
    pub t_ref: Option<f64>,
    pub gt: Option<f64>,
    pub c_r: Option<f64>,
    pub c_r_prime: Option<f64>,
    pub kd_in0: Option<f64>,
    pub kd_out: Option<f64>,
    pub kr_in: Option<f64>,
    pub kr_out: Option<f64>,
    pub mu_n0: Option<f64>,
    pub gamma_n: Option<f64>,
    pub mu_p0: Option<f64>,
    pub gamma_p: Option<f64>,
    pub d_x: Option<f64>,
    pub h_over_l: Option<f64>,
    pub delta_u: Option<f64>,
    pub a_m: Option<f64>,
    pub x0: Option<f64>,
    pub x_l: Option<f64>,
    pub x_m: Option<f64>,
    pub x_r: Option<f64>,
    pub x_end: Option<f64>,
    pub n_x0: Option<f64>,
    pub n_xend: Option<f64>,
    pub p_x0: Option<f64>,
    pub p_xend: Option<f64>,
    pub v_int: Option<f64>,
    // Mesh.
    pub n_cells: Option<usize>,
    pub grading_ratio: Option<f64>,
    // Solver.
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub damping: Option<f64>,
    pub warmup_damping: Option<f64>,
    pub warmup_steps: Option<usize>,
    pub stall_rescue: Option<bool>,
    /// `"quadratic"` (smooth arcs) or `"linear"` (straight ramp).
    pub u_profile: Option<String>,
    pub gate_enabled: Option<bool>,
    pub gate_threshold: Option<f64>,
    pub gate_width: Option<f64>,
    pub kd_const: Option<f64>,
    /// Default built-in drop for single solves.
    pub v_diff: Option<f64>,
}

/// Mesh resolution used when the config does not say otherwise.
pub const DEFAULT_N_CELLS: usize = 2000;
/// Cell-width growth ratio used when the config does not say otherwise.
pub const DEFAULT_GRADING: f64 = 1.15;

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Defaults with the configured overrides applied and validated.
    pub fn scaled_params(&self) -> Result<ScaledParams, ConfigError> {
        let mut p = default_params();
        macro_rules! take {
            ($($field:ident),* $(,)?) => {
                $(if let Some(v) = self.$field { p.$field = v; })*
            };
        }
        take!(
            lambda2, eps_r, t_ref, gt, c_r, c_r_prime, kd_in0, kd_out, kr_in, kr_out, mu_n0,
            gamma_n, mu_p0, gamma_p, d_x, h_over_l, delta_u, a_m, x0, x_l, x_m, x_r, x_end, n_x0,
            n_xend, p_x0, p_xend, v_int,
        );
        p.validate()
            .map_err(|problems| ConfigError::Invalid(problems.join("; ")))?;
        Ok(p)
    }

    /// Solver defaults with the configured overrides applied.
    pub fn solver_options(&self) -> Result<SolverOptions, ConfigError> {
        let mut o = SolverOptions::default();
        if let Some(v) = self.tolerance {
            o.tolerance = v;
        }
        if let Some(v) = self.max_iterations {
            o.max_iterations = v;
        }
        if let Some(v) = self.damping {
            o.damping = v;
        }
        if let Some(v) = self.warmup_damping {
            o.warmup_damping = v;
        }
        if let Some(v) = self.warmup_steps {
            o.warmup_steps = v;
        }
        if let Some(v) = self.stall_rescue {
            o.stall_rescue = v;
        }
        if let Some(kind) = &self.u_profile {
            o.u_profile = match kind.as_str() {
                "quadratic" => UProfileKind::QuadraticC1,
                "linear" => UProfileKind::Linear,
                other => {
                    return Err(ConfigError::Invalid(format!(
                        "u_profile must be \"quadratic\" or \"linear\", got \"{other}\""
                    )))
                }
            };
        }
        if let Some(v) = self.gate_enabled {
            o.gate.enabled = v;
        }
        if let Some(v) = self.gate_threshold {
            o.gate.threshold = v;
        }
        if let Some(v) = self.gate_width {
            if v <= 0.0 {
                return Err(ConfigError::Invalid(format!(
                    "gate_width must be positive, got {v}"
                )));
            }
            o.gate.width = v;
        }
        if let Some(v) = self.kd_const {
            if v < 0.0 {
                return Err(ConfigError::Invalid(format!(
                    "kd_const must be nonnegative, got {v}"
                )));
            }
            o.kd_const = Some(v);
        }
        Ok(o)
    }

    /// `(n_cells, grading_ratio)` for mesh construction.
    pub fn mesh_spec(&self) -> (usize, f64) {
        (
            self.n_cells.unwrap_or(DEFAULT_N_CELLS),
            self.grading_ratio.unwrap_or(DEFAULT_GRADING),
        )
    }
}
